//! Membership oracles for the classical set S0, the two half-classical sets
//! S1 and the region classifier.
//!
//! Every oracle takes a minimal-shape correlation, clamps floating-point
//! noise (see [`Correlation::clamped`]) and returns an [`OracleResult`].

pub mod classify;
pub mod half_classical;
pub mod seesaw;
pub mod square;

use serde::{Deserialize, Serialize};

use crate::correlation::Correlation;
use crate::error::Result;

pub use classify::{classify, ClassificationReport, RegionLabel};
pub use half_classical::{s1_lp, HalfClassicalMode, UnpackedLp};
pub use seesaw::{s0_seesaw_oracle, SeesawDecomposition};
pub use square::{s0_square_oracle, ColumnWidths, SquareInstance};

/// Knobs shared by all oracles. Each oracle reads only the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Feasibility threshold on the violation.
    pub eps: f64,
    /// Grid points per axis for the outer `(alpha, beta)` search.
    pub grid_n: usize,
    pub refine_rounds: usize,
    pub widths: ColumnWidths,
    pub restarts: usize,
    /// Alternation rounds per seesaw restart.
    pub max_iters: usize,
    pub seed: u64,
    /// Tolerance for the S2 conditions.
    pub s2_tol: f64,
    /// Run the seesaw when the square oracle reports feasible.
    pub seesaw_cross_check: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            eps: 1e-7,
            grid_n: 64,
            refine_rounds: 3,
            widths: ColumnWidths::Partition,
            restarts: 16,
            max_iters: 100,
            seed: 0,
            s2_tol: 1e-9,
            seesaw_cross_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Square(SquareInstance),
    Seesaw(SeesawDecomposition),
    Unpacked(UnpackedLp),
}

impl Witness {
    /// The correlation the witness describes, in the frame of the oracle input.
    pub fn reconstruct(&self) -> Correlation {
        match self {
            Witness::Square(w) => w.reconstruct(),
            Witness::Seesaw(w) => w.reconstruct(),
            Witness::Unpacked(w) => w.reconstruct(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub lp_solves: usize,
    pub simplex_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts_used: Option<usize>,
    /// Set when an infeasible verdict comes from a local search and is not
    /// a proof.
    pub heuristic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub feasible: bool,
    /// Zero (within `eps`) iff feasible. Infinite when no candidate
    /// satisfied the hard constraints at all.
    pub violation: f64,
    pub witness: Option<Witness>,
    pub diagnostics: Diagnostics,
}

impl OracleResult {
    /// L-infinity distance between the witness and `corr`.
    pub fn witness_error(&self, corr: &Correlation) -> Option<f64> {
        self.witness
            .as_ref()
            .map(|w| w.reconstruct().max_abs_diff(corr))
    }
}

/// Shape check plus noise clamping shared by the oracles.
fn prepare(corr: &Correlation) -> Result<Correlation> {
    corr.require_minimal()?;
    corr.clamped()
}

/// Deterministic strategy `j` answers `(j >> input) & 1`.
pub(crate) fn strategy_output(j: usize, input: usize) -> usize {
    (j >> input) & 1
}
