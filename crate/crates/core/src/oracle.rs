//! Brute-force reference solutions used to certify the closed forms in
//! [`crate::solver`].
//!
//! Nothing here calls into the solver. The allowed power is found by
//! bisecting the PU rate formula directly, and the optimum by scanning a
//! uniform grid of circularity coefficients.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_indexed, ExecutionMode};
use crate::rate::{self, ChannelRealization, ScenarioParams, SignalingDesign};
use crate::solver::PowerLimit;

/// Multiple of the SU budget beyond which the tolerated power counts as unbounded.
pub const SEARCH_CAP_FACTOR: f64 = 1e4;

/// Below `cap * ZERO_POWER_FRACTION` with no feasible positive power seen,
/// the constraint tolerates no interference at all.
const ZERO_POWER_FRACTION: f64 = 1e-45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub kappa_grid_steps: usize,
    /// Relative width of the final bisection bracket.
    pub q_bisection_tolerance: f64,
    pub max_bisection_iters: usize,
    #[serde(default)]
    pub execution: ExecutionMode,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            kappa_grid_steps: 1001,
            q_bisection_tolerance: 1e-12,
            max_bisection_iters: 200,
            execution: ExecutionMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("kappa grid needs at least 2 points, got {0}")]
    GridTooCoarse(usize),
    #[error("bisection tolerance must be finite and positive, got {0}")]
    BadTolerance(f64),
    #[error("bisection at kappa = {kappa} did not converge within {iterations} iterations (bracket [{lo}, {hi}])")]
    NoConvergence {
        kappa: f64,
        iterations: usize,
        lo: f64,
        hi: f64,
    },
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.kappa_grid_steps < 2 {
            return Err(OracleError::GridTooCoarse(self.kappa_grid_steps));
        }
        if !(self.q_bisection_tolerance.is_finite() && self.q_bisection_tolerance > 0.0) {
            return Err(OracleError::BadTolerance(self.q_bisection_tolerance));
        }
        Ok(())
    }

    pub fn grid_step(&self) -> f64 {
        1.0 / (self.kappa_grid_steps - 1) as f64
    }

    fn kappa_at(&self, i: usize) -> f64 {
        if i + 1 == self.kappa_grid_steps {
            1.0
        } else {
            i as f64 * self.grid_step()
        }
    }
}

/// Largest SU power at which the PU still meets `α·R_PU(0,0)`, found by
/// bisection on the PU rate, which decreases strictly in `q`.
pub fn max_feasible_power(
    kappa: f64,
    scenario: &ScenarioParams,
    channel: &ChannelRealization,
    config: &OracleConfig,
) -> Result<PowerLimit, OracleError> {
    config.validate()?;
    let target = scenario.loading_factor() * rate::pu_rate_max(scenario, channel);
    let feasible = |q: f64| {
        let design = SignalingDesign::new(q, kappa).expect("oracle probe outside the design domain");
        rate::pu_rate(&design, scenario, channel) >= target
    };

    let budget = scenario.su_power_budget();
    let cap = budget * SEARCH_CAP_FACTOR;
    if feasible(cap) {
        return Ok(PowerLimit::Unbounded);
    }

    let (mut lo, mut hi) = (0.0_f64, cap);
    for _ in 0..config.max_bisection_iters {
        if hi - lo <= config.q_bisection_tolerance * hi {
            return Ok(PowerLimit::Finite(lo));
        }
        if lo == 0.0 && hi < cap * ZERO_POWER_FRACTION {
            return Ok(PowerLimit::Finite(0.0));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Bracket exhausted at floating-point resolution.
            return Ok(PowerLimit::Finite(lo));
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(OracleError::NoConvergence {
        kappa,
        iterations: config.max_bisection_iters,
        lo,
        hi,
    })
}

/// Best point of the κ-grid scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptimum {
    pub kappa: f64,
    pub q: f64,
    pub r_su: f64,
    /// Grid value at `κ = 0`, i.e. the proper baseline.
    pub r_su_proper: f64,
    pub grid_step: f64,
    /// Upper bound on how far the true optimum can sit above the grid
    /// maximum, from the monotonicity of the SU rate in `q` and `κ`.
    pub resolution_slack: f64,
}

impl GridOptimum {
    /// Rate gained over proper signaling; zero when `κ = 0` wins the scan.
    pub fn improvement(&self) -> f64 {
        self.r_su - self.r_su_proper
    }
}

/// Scans `κ` over a uniform grid on `[0, 1]`, transmitting at
/// `min(max_feasible_power(κ), Q)`, and keeps the best SU rate.
///
/// Ties go to the smaller `κ`.
pub fn grid_search_optimum(
    scenario: &ScenarioParams,
    channel: &ChannelRealization,
    config: &OracleConfig,
) -> Result<GridOptimum, OracleError> {
    config.validate()?;
    let budget = scenario.su_power_budget();
    let points = map_indexed(config.execution, config.kappa_grid_steps, |i| {
        let kappa = config.kappa_at(i);
        let q = max_feasible_power(kappa, scenario, channel, config)?.cap(budget);
        let r = rate::su_rate(&SignalingDesign::new(q, kappa).expect("grid point"), scenario, channel);
        Ok((kappa, q, r))
    })
    .into_iter()
    .collect::<Result<Vec<_>, OracleError>>()?;

    let (mut best_kappa, mut best_q, mut best_r) = points[0];
    for &(kappa, q, r) in &points[1..] {
        if r > best_r {
            (best_kappa, best_q, best_r) = (kappa, q, r);
        }
    }
    // Inside a cell the power is at most the right end's and κ at least the
    // left end's, so the SU rate there cannot exceed su_rate(q_right, κ_left).
    let resolution_slack = points
        .windows(2)
        .map(|w| {
            let ((k_left, _, r_left), (_, q_right, r_right)) = (w[0], w[1]);
            let bound = rate::su_rate(
                &SignalingDesign::new(q_right, k_left).expect("grid point"),
                scenario,
                channel,
            );
            bound - r_left.max(r_right)
        })
        .fold(0.0_f64, f64::max);
    Ok(GridOptimum {
        kappa: best_kappa,
        q: best_q,
        r_su: best_r,
        r_su_proper: points[0].2,
        grid_step: config.grid_step(),
        resolution_slack,
    })
}
