//! S0 membership through the "square" picture of a classical strategy.
//!
//! The hidden variables `lambda1` (horizontal) and `lambda2` (vertical) live
//! on the unit square. Columns are Alice's deterministic strategies
//! `(a0, a1)` in the order 11, 10, 01, 00; rows are Charlie's `(c0, c1)` in
//! the same order. Area `J = 4 * row + col + 1` is the rectangle `R_J`; the
//! part of it where Bob answers 1 is `S_J`. With the split points `alpha`
//! and `beta` fixed, everything is linear in `S`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{prepare, Diagnostics, OracleConfig, OracleResult, Witness};
use crate::correlation::{Correlation, ScenarioShape};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Relation};

/// How the four column widths (and row heights) depend on the split point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnWidths {
    /// `alpha, p0 - alpha, p1 - alpha, 1 - p0 - p1 + alpha`: the columns
    /// partition the unit interval.
    Partition,
    /// Fourth factor `p1 - p0 + alpha`. Kept to reproduce the published
    /// constraint table; the widths do not sum to one.
    AsPrinted,
}

impl ColumnWidths {
    /// Widths for marginals `p0 = p(1|input 0)`, `p1 = p(1|input 1)`.
    pub fn widths(self, p0: f64, p1: f64, split: f64) -> [f64; 4] {
        let last = match self {
            ColumnWidths::Partition => 1.0 - p0 - p1 + split,
            ColumnWidths::AsPrinted => p1 - p0 + split,
        };
        [split, p0 - split, p1 - split, last]
    }
}

/// Output of column (or row) strategy `col` on input `input`.
pub fn column_output(col: usize, input: usize) -> usize {
    match input {
        0 => usize::from(col < 2),
        _ => usize::from(col % 2 == 0),
    }
}

/// The nine Bob-response equalities: 1-based area indices and the observed
/// `p(a, b=1, c | x, z)` they sum to, as `(a, c, x, z)`.
pub const GROUP2: [([usize; 4], [usize; 4]); 9] = [
    ([1, 2, 5, 6], [1, 1, 0, 0]),
    ([3, 4, 7, 8], [0, 1, 0, 0]),
    ([9, 10, 13, 14], [1, 0, 0, 0]),
    ([11, 12, 15, 16], [0, 0, 0, 0]),
    ([1, 3, 5, 7], [1, 1, 1, 0]),
    ([9, 11, 13, 15], [1, 0, 1, 0]),
    ([1, 2, 9, 10], [1, 1, 0, 1]),
    ([3, 4, 11, 12], [0, 1, 0, 1]),
    ([1, 3, 9, 11], [1, 1, 1, 1]),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareInstance {
    /// Coloured areas `S_1..S_16` (index `J - 1`).
    pub s: [f64; 16],
    pub alpha: f64,
    pub beta: f64,
    pub widths: [f64; 4],
    pub heights: [f64; 4],
}

impl SquareInstance {
    pub fn rectangle(&self, j: usize) -> f64 {
        self.heights[j / 4] * self.widths[j % 4]
    }

    pub fn reconstruct(&self) -> Correlation {
        Correlation::from_fn(ScenarioShape::MINIMAL, |x, z, a, b, c| {
            let mut total = 0.0;
            for row in (0..4).filter(|&r| column_output(r, z) == c) {
                for col in (0..4).filter(|&k| column_output(k, x) == a) {
                    let j = row * 4 + col;
                    total += if b == 1 {
                        self.s[j]
                    } else {
                        self.rectangle(j) - self.s[j]
                    };
                }
            }
            total
        })
        .expect("minimal shape")
    }
}

struct Marginals {
    pa: [f64; 2],
    pc: [f64; 2],
    group2_rhs: [f64; 9],
}

impl Marginals {
    fn of(p: &Correlation) -> Self {
        let mut group2_rhs = [0.0; 9];
        for (rhs, (_, [a, c, x, z])) in group2_rhs.iter_mut().zip(GROUP2.iter()) {
            *rhs = p.get(*x, *z, *a, 1, *c);
        }
        Marginals {
            pa: [p.alice_marginal(1, 0), p.alice_marginal(1, 1)],
            pc: [p.charlie_marginal(1, 0), p.charlie_marginal(1, 1)],
            group2_rhs,
        }
    }

    fn alpha_box(&self) -> (f64, f64) {
        split_box(self.pa)
    }

    fn beta_box(&self) -> (f64, f64) {
        split_box(self.pc)
    }
}

/// Range of `P(output 1 on both inputs)` compatible with the two marginals.
fn split_box(p: [f64; 2]) -> (f64, f64) {
    let lo = (p[0] + p[1] - 1.0).max(0.0);
    let hi = p[0].min(p[1]);
    (lo, hi.max(lo))
}

struct CellEval {
    g: f64,
    s: [f64; 16],
    iterations: usize,
}

/// Inner LP at fixed `(alpha, beta)`: minimal total excess of the areas
/// over their rectangles with the Bob equalities enforced exactly.
fn evaluate_cell(m: &Marginals, widths: ColumnWidths, alpha: f64, beta: f64) -> CellEval {
    let w = widths.widths(m.pa[0], m.pa[1], alpha);
    let h = widths.widths(m.pc[0], m.pc[1], beta);
    let mut lp = LinearProgram::new();
    let s0 = lp.add_vars(16, 0.0);
    let v0 = lp.add_vars(16, 1.0);
    for j in 0..16 {
        let ub = (h[j / 4] * w[j % 4]).max(0.0);
        lp.add_row(&[(s0 + j, 1.0), (v0 + j, -1.0)], Relation::Le, ub);
    }
    for ((areas, _), &rhs) in GROUP2.iter().zip(&m.group2_rhs) {
        let coeffs: Vec<(usize, f64)> = areas.iter().map(|&j| (s0 + j - 1, 1.0)).collect();
        lp.add_row(&coeffs, Relation::Eq, rhs);
    }
    let sol = lp.solve();
    let mut s = [0.0; 16];
    let g = match sol.status {
        LpStatus::Optimal => {
            s.copy_from_slice(&sol.x[s0..s0 + 16]);
            sol.objective.max(0.0)
        }
        _ => f64::INFINITY,
    };
    CellEval {
        g,
        s,
        iterations: sol.iterations,
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

struct Best {
    g: f64,
    alpha: f64,
    beta: f64,
    s: [f64; 16],
}

struct Search<'a> {
    m: &'a Marginals,
    widths: ColumnWidths,
    eps: f64,
    lp_solves: usize,
    iterations: usize,
}

impl Search<'_> {
    /// Evaluates the tensor grid `alphas x betas` row by row, stopping after
    /// the first row that reaches `eps`. Ties keep the earliest point.
    fn scan(&mut self, alphas: &[f64], betas: &[f64], best: &mut Option<Best>) {
        for &beta in betas {
            let evals: Vec<(f64, CellEval)> = alphas
                .par_iter()
                .map(|&alpha| (alpha, evaluate_cell(self.m, self.widths, alpha, beta)))
                .collect();
            for (alpha, e) in evals {
                self.lp_solves += 1;
                self.iterations += e.iterations;
                if best.as_ref().is_none_or(|b| e.g < b.g) {
                    *best = Some(Best {
                        g: e.g,
                        alpha,
                        beta,
                        s: e.s,
                    });
                }
            }
            if best.as_ref().is_some_and(|b| b.g <= self.eps) {
                return;
            }
        }
    }
}

/// Decides S0 membership with the square construction.
///
/// The violation adds the inner LP optimum to the L-infinity error of the
/// full reconstruction, so inputs whose `b = 0` part does not fit the
/// rectangles are not reported feasible.
pub fn s0_square_oracle(corr: &Correlation, cfg: &OracleConfig) -> Result<OracleResult> {
    if cfg.grid_n == 0 {
        return Err(Error::Parameter("grid_n must be positive".into()));
    }
    let p = prepare(corr)?;
    let m = Marginals::of(&p);
    let (alo, ahi) = m.alpha_box();
    let (blo, bhi) = m.beta_box();
    let mut search = Search {
        m: &m,
        widths: cfg.widths,
        eps: cfg.eps,
        lp_solves: 0,
        iterations: 0,
    };
    let mut best = None;
    search.scan(
        &linspace(alo, ahi, cfg.grid_n),
        &linspace(blo, bhi, cfg.grid_n),
        &mut best,
    );
    let mut ha = if cfg.grid_n > 1 {
        (ahi - alo) / (cfg.grid_n - 1) as f64
    } else {
        0.0
    };
    let mut hb = if cfg.grid_n > 1 {
        (bhi - blo) / (cfg.grid_n - 1) as f64
    } else {
        0.0
    };
    for _ in 0..cfg.refine_rounds {
        let b = best.as_ref().expect("grid is never empty");
        if b.g <= cfg.eps {
            break;
        }
        let (ca, cb) = (b.alpha, b.beta);
        let alphas = refine_axis(ca, ha, alo, ahi);
        let betas = refine_axis(cb, hb, blo, bhi);
        search.scan(&alphas, &betas, &mut best);
        ha /= 8.0;
        hb /= 8.0;
    }
    let b = best.expect("grid is never empty");
    let w = cfg.widths.widths(m.pa[0], m.pa[1], b.alpha);
    let h = cfg.widths.widths(m.pc[0], m.pc[1], b.beta);
    let instance = SquareInstance {
        s: b.s,
        alpha: b.alpha,
        beta: b.beta,
        widths: w,
        heights: h,
    };
    let violation = if b.g.is_finite() {
        b.g + instance.reconstruct().max_abs_diff(&p)
    } else {
        f64::INFINITY
    };
    let feasible = violation <= cfg.eps;
    Ok(OracleResult {
        feasible,
        violation,
        witness: b.g.is_finite().then_some(Witness::Square(instance)),
        diagnostics: Diagnostics {
            lp_solves: search.lp_solves,
            simplex_iterations: search.iterations,
            grid_n: Some(cfg.grid_n),
            refine_rounds: Some(cfg.refine_rounds),
            restarts_used: None,
            heuristic: false,
        },
    })
}

/// 25 points covering the 3 cells around `center` at an 8x finer step.
fn refine_axis(center: f64, step: f64, lo: f64, hi: f64) -> Vec<f64> {
    if step <= 0.0 {
        return vec![center];
    }
    let fine = step / 8.0;
    let mut pts: Vec<f64> = (-12..=12)
        .map(|k| (center + k as f64 * fine).clamp(lo, hi))
        .collect();
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group2_rows_match_strategy_structure() {
        // Each equality collects the areas whose column answers `a` on `x`
        // and whose row answers `c` on `z`.
        for (areas, [a, c, x, z]) in GROUP2 {
            let expected: Vec<usize> = (0..16)
                .filter(|&j| column_output(j % 4, x) == a && column_output(j / 4, z) == c)
                .map(|j| j + 1)
                .collect();
            assert_eq!(areas.to_vec(), expected);
        }
    }

    #[test]
    fn partition_widths_sum_to_one() {
        let w = ColumnWidths::Partition.widths(0.3, 0.6, 0.2);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let printed = ColumnWidths::AsPrinted.widths(0.3, 0.6, 0.2);
        assert!((printed.iter().sum::<f64>() - 1.0).abs() > 0.1);
    }

    #[test]
    fn split_box_bounds() {
        assert_eq!(split_box([0.5, 0.5]), (0.0, 0.5));
        let (lo, hi) = split_box([0.8, 0.7]);
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 0.7).abs() < 1e-15);
    }

    #[test]
    fn uniform_is_feasible() {
        let u = Correlation::uniform(ScenarioShape::MINIMAL).unwrap();
        let r = s0_square_oracle(&u, &OracleConfig::default()).unwrap();
        assert!(r.feasible, "{}", r.violation);
        assert!(r.witness_error(&u).unwrap() < 1e-9);
    }

    #[test]
    fn refine_axis_is_clamped() {
        let pts = refine_axis(0.0, 0.1, 0.0, 1.0);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts.len(), 13);
    }
}
