//! Membership oracles for the classical, half-classical and no-signalling
//! sets of the 3-chain (bilocality) network, together with generators for
//! quantum and post-quantum example correlations and sweep tools.
//!
//! The scenario is Alice (input `x`, output `a`) and Charlie (`z`, `c`) at
//! the ends of the chain, Bob (`b`, no input) in the middle, with one
//! source shared by each neighbouring pair.

pub mod analysis;
pub mod correlation;
pub mod error;
pub mod format;
pub mod generators;
pub mod lp;
pub mod oracles;
pub mod quantum;

pub use correlation::{mix, Correlation, Output, S2Report, ScenarioShape, ValidationReport};
pub use error::{Error, Result};
