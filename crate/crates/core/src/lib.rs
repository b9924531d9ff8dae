//! Optimal proper/improper Gaussian signaling for a secondary user sharing
//! spectrum with a rate-constrained primary link.
//!
//! - [`rate`]: domain types and the achievable-rate formulas.
//! - [`solver`]: closed-form allowed power, improper-signaling condition and
//!   optimal circularity coefficient.
//! - [`oracle`]: bisection and grid-search references for the closed forms.
//! - [`montecarlo`]: Rayleigh-fading sweeps of the averaged SU rates.
//! - [`exec`]: sequential or rayon-backed evaluation of independent items.

pub mod exec;
pub mod montecarlo;
pub mod oracle;
pub mod rate;
pub mod solver;

pub use exec::ExecutionMode;
pub use montecarlo::{run_sweep, sample_channel, ExperimentConfig, Sampling, SweepPoint, SweepResult};
pub use oracle::{grid_search_optimum, max_feasible_power, GridOptimum, OracleConfig, OracleError};
pub use rate::{ChannelRealization, DerivedQuantities, ParamError, RateReport, ScenarioParams, SignalingDesign};
pub use solver::{select_strategy, PowerLimit, Regime, SolverError, StrategyDecision};
