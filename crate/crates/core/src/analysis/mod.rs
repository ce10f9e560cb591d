//! CHSH-type evaluators, parameter sweeps and bisection on oracle verdicts.

pub mod bisection;
pub mod chsh;
pub mod sweep;

pub use bisection::{
    critical_visibility, mu_range, BisectionConfig, Flip, MuRange, VisibilityFamily,
    VisibilityResult,
};
pub use chsh::{chsh, chsh_value, fritz_chsh, postselected_chsh, ChshValue};
pub use sweep::{range_grid, records_to_csv, records_to_json, sweep, theta_scan, SweepRecord};
