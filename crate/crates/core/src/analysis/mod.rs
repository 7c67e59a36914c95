//! Frequency sweeps and modulation-depth budgets.

mod budget;
mod loss;
mod sweep;

pub use budget::{
    budget, depth_db, modulation_ratio, multinode_ratio, multinode_ratio_with_pullup, n_max, BudgetResult,
    MultinodeRatio, DEFAULT_MIN_DEPTH_DB,
};
pub use loss::{LossModel, DEFAULT_POLE_CAP, DEFAULT_Q, DEFAULT_Q_REF_HZ};
pub use sweep::{sweep, write_sweep_csv, Marker, SweepResult, SCHEMA_VERSION};
