use serde::{Deserialize, Serialize};

use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::generators::{mnn1, mnn1_quantum, mnn2};
use crate::oracles::{s0_square_oracle, s1_lp, HalfClassicalMode, OracleConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectionConfig {
    pub lo: f64,
    pub hi: f64,
    /// Target bracket width.
    pub tol: f64,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            lo: 0.0,
            hi: 1.0,
            tol: 1e-3,
        }
    }
}

impl BisectionConfig {
    fn check(&self) -> Result<()> {
        if !(self.lo < self.hi) || !(self.tol > 0.0) {
            return Err(Error::Parameter(format!(
                "need lo < hi and tol > 0, got [{}, {}] tol {}",
                self.lo, self.hi, self.tol
            )));
        }
        Ok(())
    }
}

/// Location of a verdict change.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Flip {
    /// Bracket midpoint.
    pub value: f64,
    /// Last parameter with the `lo` verdict and first with the other one.
    pub bracket: (f64, f64),
}

fn in_s0(corr: &Correlation, cfg: &OracleConfig) -> Result<bool> {
    Ok(s0_square_oracle(corr, cfg)?.feasible)
}

fn in_s1_both(corr: &Correlation, cfg: &OracleConfig) -> Result<bool> {
    Ok(s1_lp(corr, HalfClassicalMode::AbClassicalBcOpt, cfg)?.feasible
        && s1_lp(corr, HalfClassicalMode::AbOptBcClassical, cfg)?.feasible)
}

/// Bisects `[lo, hi]`, where `pred(lo) != pred(hi)` is the caller's job.
fn bisect<P>(mut lo: f64, mut hi: f64, tol: f64, pred: P) -> Result<Flip>
where
    P: Fn(f64) -> Result<bool>,
{
    let at_lo = pred(lo)?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Flip {
        value: 0.5 * (lo + hi),
        bracket: (lo, hi),
    })
}

/// Quantum families swept in the Werner visibility `v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum VisibilityFamily {
    Mnn1Quantum { mu: f64 },
    Mnn2 { theta: f64 },
}

impl VisibilityFamily {
    pub fn generate(&self, v: f64) -> Result<Correlation> {
        match *self {
            VisibilityFamily::Mnn1Quantum { mu } => mnn1_quantum(mu, v),
            VisibilityFamily::Mnn2 { theta } => mnn2(theta, v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisibilityResult {
    pub v_crit: f64,
    pub bracket: (f64, f64),
    /// Where membership in both half-classical sets is lost, if it is lost
    /// inside the interval at all.
    pub s1_flip: Option<Flip>,
    /// `(v, classical)` at five interior points.
    pub spot_checks: Vec<(f64, bool)>,
    /// Whether every spot check agrees with a single flip at `v_crit`.
    pub monotone: bool,
}

/// Smallest visibility at which the family leaves the classical set.
///
/// Requires a classical verdict at `bis.lo` and a nonclassical one at
/// `bis.hi`; otherwise fails with [`Error::NoBracket`].
pub fn critical_visibility(
    family: VisibilityFamily,
    bis: &BisectionConfig,
    cfg: &OracleConfig,
) -> Result<VisibilityResult> {
    bis.check()?;
    let classical = |v: f64| in_s0(&family.generate(v)?, cfg);
    if !classical(bis.lo)? || classical(bis.hi)? {
        return Err(Error::NoBracket(format!(
            "{family:?} is not classical at v={} and nonclassical at v={}",
            bis.lo, bis.hi
        )));
    }
    let flip = bisect(bis.lo, bis.hi, bis.tol, classical)?;

    let mut spot_checks = Vec::with_capacity(5);
    let mut monotone = true;
    for k in 1..=5 {
        let v = bis.lo + (bis.hi - bis.lo) * k as f64 / 6.0;
        let verdict = classical(v)?;
        if v < flip.bracket.0 && !verdict || v > flip.bracket.1 && verdict {
            monotone = false;
        }
        spot_checks.push((v, verdict));
    }

    let s1 = |v: f64| in_s1_both(&family.generate(v)?, cfg);
    let s1_flip = if s1(bis.hi)? {
        None
    } else {
        Some(bisect(bis.lo, bis.hi, bis.tol, s1)?)
    };
    Ok(VisibilityResult {
        v_crit: flip.value,
        bracket: flip.bracket,
        s1_flip,
        spot_checks,
        monotone,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuRange {
    /// Loss of classicality.
    pub low: Flip,
    /// Loss of membership in both half-classical sets; `None` when the
    /// mixture stays in both up to `mu = 1`.
    pub high: Option<Flip>,
    /// `(mu, in S0, in both S1)` on the coarse scan.
    pub scan: Vec<(f64, bool, bool)>,
}

const MU_SCAN_STEP: f64 = 0.05;

/// Interval of mixing weights for which `mnn1(mu, v, p_ps)` is MNN.
///
/// A coarse scan locates the first change of each verdict, which is then
/// bisected to `bis.tol`. Only `bis.tol` is read from `bis`.
pub fn mu_range(v: f64, p_ps: f64, bis: &BisectionConfig, cfg: &OracleConfig) -> Result<MuRange> {
    if !(bis.tol > 0.0) {
        return Err(Error::Parameter("tol must be positive".into()));
    }
    // Validates the parameters once up front.
    mnn1(0.0, v, p_ps)?;
    let steps = (1.0 / MU_SCAN_STEP).round() as usize;
    let mut scan = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let mu = i as f64 / steps as f64;
        let corr = mnn1(mu, v, p_ps)?;
        scan.push((mu, in_s0(&corr, cfg)?, in_s1_both(&corr, cfg)?));
    }
    let first_change = |pick: fn(&(f64, bool, bool)) -> bool| {
        scan.windows(2)
            .find(|w| pick(&w[0]) != pick(&w[1]))
            .map(|w| (w[0].0, w[1].0))
    };
    let Some((lo, hi)) = first_change(|s| s.1) else {
        return Err(Error::NoBracket(format!(
            "classicality of mu-mixtures at V={v}, p_ps={p_ps} never changes on [0, 1]"
        )));
    };
    let low = bisect(lo, hi, bis.tol, |mu| in_s0(&mnn1(mu, v, p_ps)?, cfg))?;
    let high = match first_change(|s| s.2) {
        Some((lo, hi)) => Some(bisect(lo, hi, bis.tol, |mu| {
            in_s1_both(&mnn1(mu, v, p_ps)?, cfg)
        })?),
        None => None,
    };
    Ok(MuRange { low, high, scan })
}
