use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::generators::mnn2;
use crate::oracles::{classify, ClassificationReport, OracleConfig, RegionLabel};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub parameter: String,
    pub value: f64,
    pub label: RegionLabel,
    pub s0_violation: Option<f64>,
    pub s1_ab_violation: Option<f64>,
    pub s1_bc_violation: Option<f64>,
}

impl SweepRecord {
    pub fn from_report(parameter: &str, value: f64, report: &ClassificationReport) -> Self {
        SweepRecord {
            parameter: parameter.to_string(),
            value,
            label: report.label,
            s0_violation: report.s0.as_ref().map(|r| r.violation),
            s1_ab_violation: report.s1_ab_classical.as_ref().map(|r| r.violation),
            s1_bc_violation: report.s1_bc_classical.as_ref().map(|r| r.violation),
        }
    }
}

/// Classifies `generate(value)` for every value, in input order.
pub fn sweep<F>(
    parameter: &str,
    values: &[f64],
    generate: F,
    cfg: &OracleConfig,
) -> Result<Vec<SweepRecord>>
where
    F: Fn(f64) -> Result<Correlation> + Sync,
{
    values
        .par_iter()
        .map(|&value| {
            let report = classify(&generate(value)?, cfg)?;
            Ok(SweepRecord::from_report(parameter, value, &report))
        })
        .collect()
}

/// Classifies the `theta` family at visibility `v` on `grid`.
pub fn theta_scan(v: f64, grid: &[f64], cfg: &OracleConfig) -> Result<Vec<SweepRecord>> {
    sweep("theta", grid, |theta| mnn2(theta, v), cfg)
}

/// Points `lo, lo + step, ...` up to `hi` (inclusive up to round-off).
/// `lo == hi` gives a single point.
pub fn range_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || hi < lo {
        return Err(Error::Parameter(format!("bad range {lo}:{hi}:{step}")));
    }
    if hi == lo {
        return Ok(vec![lo]);
    }
    if step <= 0.0 {
        return Err(Error::Parameter(format!("step {step} must be positive")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

fn csv_cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x != 0.0 && x.abs() < 1e-4 => format!("{x:e}"),
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("parameter,value,label,s0_violation,s1_ab_violation,s1_bc_violation\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.parameter,
            r.value,
            r.label,
            csv_cell(r.s0_violation),
            csv_cell(r.s1_ab_violation),
            csv_cell(r.s1_bc_violation)
        ));
    }
    out
}

pub fn records_to_json(records: &[SweepRecord]) -> String {
    serde_json::to_string_pretty(records).expect("serializable records")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = range_grid(0.0, 1.0, 0.05).unwrap();
        assert_eq!(g.len(), 21);
        assert!((g[20] - 1.0).abs() < 1e-12);
        assert_eq!(range_grid(0.3, 0.3, 0.0).unwrap(), vec![0.3]);
        assert!(range_grid(1.0, 0.0, 0.1).is_err());
        assert!(range_grid(0.0, 1.0, 0.0).is_err());
        // The upper end is dropped when the step does not reach it.
        assert_eq!(range_grid(0.0, 1.5707963, 0.0981748).unwrap().len(), 16);
    }

    #[test]
    fn csv_layout() {
        let r = SweepRecord {
            parameter: "mu".into(),
            value: 0.5,
            label: RegionLabel::Mnn,
            s0_violation: Some(0.25),
            s1_ab_violation: None,
            s1_bc_violation: Some(0.0),
        };
        let csv = records_to_csv(&[r]);
        assert_eq!(
            csv,
            "parameter,value,label,s0_violation,s1_ab_violation,s1_bc_violation\nmu,0.5,MNN,0.25,,0\n"
        );
    }
}
