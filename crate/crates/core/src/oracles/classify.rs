use serde::{Deserialize, Serialize};

use super::{
    s0_seesaw_oracle, s0_square_oracle, s1_lp, HalfClassicalMode, OracleConfig, OracleResult,
};
use crate::correlation::{Correlation, S2Report, ValidationReport};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegionLabel {
    Invalid,
    NotInS2,
    Classical,
    /// In both half-classical sets but not classical.
    Mnn,
    HalfAbOptOnly,
    HalfBcOptOnly,
    /// No-signalling but in neither half-classical set.
    Fnn,
}

impl RegionLabel {
    /// The label of the correlation with Alice and Charlie exchanged.
    pub fn mirrored(self) -> Self {
        match self {
            RegionLabel::HalfAbOptOnly => RegionLabel::HalfBcOptOnly,
            RegionLabel::HalfBcOptOnly => RegionLabel::HalfAbOptOnly,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::Invalid => "INVALID",
            RegionLabel::NotInS2 => "NOT_IN_S2",
            RegionLabel::Classical => "CLASSICAL",
            RegionLabel::Mnn => "MNN",
            RegionLabel::HalfAbOptOnly => "HALF_AB_OPT_ONLY",
            RegionLabel::HalfBcOptOnly => "HALF_BC_OPT_ONLY",
            RegionLabel::Fnn => "FNN",
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClassificationFlags {
    /// The seesaw found no decomposition although the square oracle did.
    pub s0_oracle_disagreement: bool,
    /// A verdict contradicts `S0 within S1 within S2`.
    pub monotonicity_violation: bool,
}

/// Oracle stages that were not reached are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub label: RegionLabel,
    pub validation: ValidationReport,
    pub s2: Option<S2Report>,
    /// Classical Alice-Bob source.
    pub s1_ab_classical: Option<OracleResult>,
    /// Classical Bob-Charlie source.
    pub s1_bc_classical: Option<OracleResult>,
    pub s0: Option<OracleResult>,
    pub s0_cross_check: Option<OracleResult>,
    pub flags: ClassificationFlags,
    pub config: OracleConfig,
}

impl ClassificationReport {
    fn stopped(label: RegionLabel, validation: ValidationReport, cfg: &OracleConfig) -> Self {
        ClassificationReport {
            label,
            validation,
            s2: None,
            s1_ab_classical: None,
            s1_bc_classical: None,
            s0: None,
            s0_cross_check: None,
            flags: ClassificationFlags::default(),
            config: cfg.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }
}

/// Places `corr` in the region diagram, running every oracle it reaches.
pub fn classify(corr: &Correlation, cfg: &OracleConfig) -> Result<ClassificationReport> {
    corr.require_minimal()?;
    let validation = corr.validate();
    if !validation.is_valid {
        return Ok(ClassificationReport::stopped(
            RegionLabel::Invalid,
            validation,
            cfg,
        ));
    }
    let p = corr.clamped()?;
    let s2 = p.check_s2(cfg.s2_tol);
    if !s2.in_s2 {
        let mut report = ClassificationReport::stopped(RegionLabel::NotInS2, validation, cfg);
        report.s2 = Some(s2);
        return Ok(report);
    }

    let ab = s1_lp(&p, HalfClassicalMode::AbClassicalBcOpt, cfg)?;
    let bc = s1_lp(&p, HalfClassicalMode::AbOptBcClassical, cfg)?;
    let s0 = s0_square_oracle(&p, cfg)?;
    let cross = if s0.feasible && cfg.seesaw_cross_check {
        Some(s0_seesaw_oracle(&p, cfg)?)
    } else {
        None
    };

    let label = match (s0.feasible, ab.feasible, bc.feasible) {
        (true, _, _) => RegionLabel::Classical,
        (false, true, true) => RegionLabel::Mnn,
        (false, false, true) => RegionLabel::HalfAbOptOnly,
        (false, true, false) => RegionLabel::HalfBcOptOnly,
        (false, false, false) => RegionLabel::Fnn,
    };
    let flags = ClassificationFlags {
        s0_oracle_disagreement: cross.as_ref().is_some_and(|c| !c.feasible),
        monotonicity_violation: s0.feasible && !(ab.feasible && bc.feasible),
    };
    Ok(ClassificationReport {
        label,
        validation,
        s2: Some(s2),
        s1_ab_classical: Some(ab),
        s1_bc_classical: Some(bc),
        s0: Some(s0),
        s0_cross_check: cross,
        flags,
        config: cfg.clone(),
    })
}
