//! Membership in the half-classical sets S1: one classical source, the
//! other an arbitrary no-signalling resource.
//!
//! When the Alice-Bob source is classical, Alice's answers to both inputs
//! exist jointly, so the correlation must be the marginal of some
//! `Q(A0, A1, B, C | z)` that does not let `z` signal to `(A0, A1, B)` and
//! keeps `(A0, A1)` independent of Charlie's output. The other mode runs
//! the same program with Alice and Charlie exchanged.

use serde::{Deserialize, Serialize};

use super::{prepare, Diagnostics, OracleConfig, OracleResult, Witness};
use crate::correlation::{Correlation, ScenarioShape};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HalfClassicalMode {
    /// Classical Alice-Bob source, unrestricted Bob-Charlie source.
    AbClassicalBcOpt,
    /// Unrestricted Alice-Bob source, classical Bob-Charlie source.
    AbOptBcClassical,
}

impl HalfClassicalMode {
    pub fn mirrored(self) -> Self {
        match self {
            HalfClassicalMode::AbClassicalBcOpt => HalfClassicalMode::AbOptBcClassical,
            HalfClassicalMode::AbOptBcClassical => HalfClassicalMode::AbClassicalBcOpt,
        }
    }
}

/// `q[z][a0][a1][b][c]` for [`HalfClassicalMode::AbClassicalBcOpt`]. For the
/// other mode the same array is stored in the mirrored frame, i.e. indexed
/// `q[x][c0][c1][b][a]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnpackedLp {
    pub mode: HalfClassicalMode,
    pub q: [[[[[f64; 2]; 2]; 2]; 2]; 2],
}

impl UnpackedLp {
    /// The compatible correlation in the frame of the oracle input.
    pub fn reconstruct(&self) -> Correlation {
        let frame = Correlation::from_fn(ScenarioShape::MINIMAL, |x, z, a, b, c| {
            (0..2)
                .map(|other| {
                    let (a0, a1) = if x == 0 { (a, other) } else { (other, a) };
                    self.q[z][a0][a1][b][c]
                })
                .sum()
        })
        .expect("minimal shape");
        match self.mode {
            HalfClassicalMode::AbClassicalBcOpt => frame,
            HalfClassicalMode::AbOptBcClassical => frame.mirror(),
        }
    }
}

fn var(z: usize, a0: usize, a1: usize, b: usize, c: usize) -> usize {
    (((z * 2 + a0) * 2 + a1) * 2 + b) * 2 + c
}

/// Builds and solves the unpacked program for a classical Alice-Bob source.
fn solve_unpacked(p: &Correlation) -> Result<(f64, [[[[[f64; 2]; 2]; 2]; 2]; 2], usize)> {
    let mut lp = LinearProgram::new();
    let q0 = lp.add_vars(32, 0.0);
    let sp = lp.add_vars(32, 1.0);
    let sm = lp.add_vars(32, 1.0);

    for z in 0..2 {
        let all: Vec<(usize, f64)> = (0..16).map(|i| (q0 + z * 16 + i, 1.0)).collect();
        lp.add_row(&all, Relation::Eq, 1.0);
    }
    // Q(A0, A1, B | z) does not depend on z.
    for a0 in 0..2 {
        for a1 in 0..2 {
            for b in 0..2 {
                let mut coeffs = Vec::with_capacity(4);
                for c in 0..2 {
                    coeffs.push((q0 + var(0, a0, a1, b, c), 1.0));
                    coeffs.push((q0 + var(1, a0, a1, b, c), -1.0));
                }
                lp.add_row(&coeffs, Relation::Eq, 0.0);
            }
        }
    }
    // Q(A0, A1, C=c | z) = Q(A0, A1 | z) p(c|z), with p(c|z) read off the data.
    for z in 0..2 {
        for c in 0..2 {
            let pc = p.charlie_marginal(c, z);
            for a0 in 0..2 {
                for a1 in 0..2 {
                    let mut coeffs = Vec::with_capacity(6);
                    for b in 0..2 {
                        for cc in 0..2 {
                            let w = if cc == c { 1.0 - pc } else { -pc };
                            coeffs.push((q0 + var(z, a0, a1, b, cc), w));
                        }
                    }
                    lp.add_row(&coeffs, Relation::Eq, 0.0);
                }
            }
        }
    }
    // Compatibility with the observed data, up to slack.
    let mut e = 0;
    for x in 0..2 {
        for z in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        let mut coeffs = vec![(sp + e, -1.0), (sm + e, 1.0)];
                        for other in 0..2 {
                            let (a0, a1) = if x == 0 { (a, other) } else { (other, a) };
                            coeffs.push((q0 + var(z, a0, a1, b, c), 1.0));
                        }
                        lp.add_row(&coeffs, Relation::Eq, p.get(x, z, a, b, c));
                        e += 1;
                    }
                }
            }
        }
    }
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numeric(format!(
            "unpacked program ended {:?}",
            sol.status
        )));
    }
    let mut q = [[[[[0.0; 2]; 2]; 2]; 2]; 2];
    for z in 0..2 {
        for a0 in 0..2 {
            for a1 in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        q[z][a0][a1][b][c] = sol.x[q0 + var(z, a0, a1, b, c)];
                    }
                }
            }
        }
    }
    Ok((sol.objective.max(0.0), q, sol.iterations))
}

/// Decides membership in the half-classical set selected by `mode`.
/// The violation is the minimal total compatibility slack.
pub fn s1_lp(corr: &Correlation, mode: HalfClassicalMode, cfg: &OracleConfig) -> Result<OracleResult> {
    let p = prepare(corr)?;
    let frame = match mode {
        HalfClassicalMode::AbClassicalBcOpt => p,
        HalfClassicalMode::AbOptBcClassical => p.mirror(),
    };
    let (violation, q, iterations) = solve_unpacked(&frame)?;
    Ok(OracleResult {
        feasible: violation <= cfg.eps,
        violation,
        witness: Some(Witness::Unpacked(UnpackedLp { mode, q })),
        diagnostics: Diagnostics {
            lp_solves: 1,
            simplex_iterations: iterations,
            heuristic: false,
            ..Diagnostics::default()
        },
    })
}
