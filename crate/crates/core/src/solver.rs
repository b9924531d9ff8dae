//! Closed-form SU transmit design under the PU rate constraint
//! `R_PU(q, κ) ≥ α·R_PU(0,0)` and the SU power budget `q ≤ Q`.
//!
//! The allowed power `q(κ)` is the positive root of a quadratic in `q`
//! obtained by equating the PU rate to its target. It increases with `κ`, and
//! the constrained SU rate is monotone in `q(κ)` with a slope whose sign is
//! fixed by the realization. The optimal circularity coefficient is
//! therefore either 0, 1, or the value that exhausts the power budget.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rate::{self, ChannelRealization, DerivedQuantities, ScenarioParams, SignalingDesign};

/// Radicand values in `(-RADICAND_SLACK, 0)` are treated as rounding noise.
const RADICAND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    /// The PU constraint never binds for this realization.
    #[error("the PU rate constraint never binds; tolerated SU power is unbounded")]
    Unbounded,
    #[error("improper signaling does not improve the SU rate for this realization")]
    ImproperNotBeneficial,
    #[error("proper allowed power {q_proper} already reaches the SU budget {budget}")]
    BudgetNotBinding { q_proper: f64, budget: f64 },
    #[error("optimal circularity radicand {0} lies outside [0, 1]")]
    RadicandOutOfRange(f64),
}

/// Largest SU power the PU constraint tolerates, or no limit at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerLimit {
    Finite(f64),
    Unbounded,
}

impl PowerLimit {
    pub fn finite(self) -> Option<f64> {
        match self {
            PowerLimit::Finite(q) => Some(q),
            PowerLimit::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, PowerLimit::Unbounded)
    }

    /// `min(limit, budget)`.
    pub fn cap(self, budget: f64) -> f64 {
        match self {
            PowerLimit::Finite(q) => q.min(budget),
            PowerLimit::Unbounded => budget,
        }
    }

    /// Infinity stands in for [`PowerLimit::Unbounded`].
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `q(0) ≥ Q`: the budget binds before the PU constraint does, so proper
    /// signaling at full power is optimal.
    Unconstrained,
    /// The PU constraint binds and improper signaling does not help.
    ProperOptimal,
    /// `κ* = 1` with `q(1) ≤ Q`.
    MaxImproper,
    /// `0 < κ* < 1` chosen so that `q(κ*) = Q`.
    PowerLimitedImproper,
}

impl Regime {
    pub fn is_improper(self) -> bool {
        matches!(self, Regime::MaxImproper | Regime::PowerLimitedImproper)
    }
}

/// Optimal SU strategy for one realization, with its proper baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyDecision {
    pub regime: Regime,
    /// Whether the improper-signaling condition `|g|²σ̃²/(|f|²σ²) > β` holds.
    /// It is acted upon only when the PU constraint binds (`q(0) < Q`).
    pub improper_beneficial: bool,
    pub kappa_opt: f64,
    pub q_opt: f64,
    /// SU rate with `κ = 0` and `q = min(q(0), Q)`.
    pub r_su_proper: f64,
    /// SU rate at `(q_opt, kappa_opt)`.
    pub r_su_improper: f64,
    /// Left-hand side of the improper-signaling condition.
    pub condition_lhs: f64,
    pub beta: f64,
}

fn constraint_never_binds(scenario: &ScenarioParams, channel: &ChannelRealization, dq: &DerivedQuantities) -> bool {
    channel.g2() == 0.0 || scenario.loading_factor() == 0.0 || dq.snr_pu == 0.0
}

/// Allowed SU power under proper signaling, `(σ²/|g|²)(γ(1)/γ(α) − 1)`.
///
/// Not capped by the SU budget.
pub fn allowed_power_proper(scenario: &ScenarioParams, channel: &ChannelRealization) -> PowerLimit {
    let dq = DerivedQuantities::new(scenario, channel);
    if constraint_never_binds(scenario, channel, &dq) {
        return PowerLimit::Unbounded;
    }
    PowerLimit::Finite(scenario.noise_variance() / channel.g2() * dq.proper_power_ratio)
}

/// Allowed SU power `q(κ)` for circularity coefficient `kappa`.
pub fn allowed_power(kappa: f64, scenario: &ScenarioParams, channel: &ChannelRealization) -> PowerLimit {
    let dq = DerivedQuantities::new(scenario, channel);
    if constraint_never_binds(scenario, channel, &dq) {
        return PowerLimit::Unbounded;
    }
    allowed_power_with(kappa, scenario, channel, &dq)
}

fn allowed_power_with(
    kappa: f64,
    scenario: &ScenarioParams,
    channel: &ChannelRealization,
    dq: &DerivedQuantities,
) -> PowerLimit {
    assert!(
        (0.0..=1.0).contains(&kappa),
        "circularity coefficient {kappa} outside [0, 1]"
    );
    let beta = dq.beta;
    let c = dq.improper_power_ratio;
    let one_minus_k2 = (1.0 - kappa) * (1.0 + kappa);
    let root = (beta * beta + one_minus_k2 * c).sqrt();
    // Positive root of (1−κ²)x² + 2βx − c = 0 with x = q|g|²/σ².
    let x = if beta > 0.0 {
        // Rationalized; finite at κ = 1 where it equals c/(2β).
        c / (root + beta)
    } else if one_minus_k2 == 0.0 {
        return PowerLimit::Unbounded;
    } else {
        (root - beta) / one_minus_k2
    };
    PowerLimit::Finite(x * scenario.noise_variance() / channel.g2())
}

/// SU rate under the PU constraint as a function of `kappa` alone.
pub fn su_rate_given_constraint(
    kappa: f64,
    scenario: &ScenarioParams,
    channel: &ChannelRealization,
) -> Result<f64, SolverError> {
    let dq = DerivedQuantities::new(scenario, channel);
    if constraint_never_binds(scenario, channel, &dq) {
        return Err(SolverError::Unbounded);
    }
    let q = allowed_power_with(kappa, scenario, channel, &dq)
        .finite()
        .ok_or(SolverError::Unbounded)?;
    let sigma2 = scenario.noise_variance();
    let snr_per_watt = channel.f2() / dq.tilde_sigma2;
    // |f|²σ²/(|g|²σ̃²)
    let ratio = channel.f2() * sigma2 / (channel.g2() * dq.tilde_sigma2);
    let bracket = 2.0 * q * snr_per_watt * (1.0 - dq.beta * ratio) + ratio * ratio * dq.improper_power_ratio;
    Ok(0.5 * bracket.ln_1p() / std::f64::consts::LN_2)
}

/// Left-hand side `|g|²σ̃²/(|f|²σ²)` of the improper-signaling condition and `β`.
pub fn improper_condition(scenario: &ScenarioParams, channel: &ChannelRealization) -> (f64, f64) {
    let dq = DerivedQuantities::new(scenario, channel);
    let lhs = channel.g2() * dq.tilde_sigma2 / (channel.f2() * scenario.noise_variance());
    (lhs, dq.beta)
}

/// Whether improper signaling strictly raises the constrained SU rate.
///
/// Equality counts as not beneficial. Meaningful when `q(0) < Q`.
pub fn improper_beneficial(scenario: &ScenarioParams, channel: &ChannelRealization) -> bool {
    let (lhs, beta) = improper_condition(scenario, channel);
    lhs > beta
}

/// Optimal circularity coefficient when improper signaling is beneficial
/// and the PU constraint binds.
pub fn optimal_kappa(scenario: &ScenarioParams, channel: &ChannelRealization) -> Result<f64, SolverError> {
    let budget = scenario.su_power_budget();
    let q_proper = allowed_power_proper(scenario, channel)
        .finite()
        .ok_or(SolverError::Unbounded)?;
    if q_proper >= budget {
        return Err(SolverError::BudgetNotBinding { q_proper, budget });
    }
    if !improper_beneficial(scenario, channel) {
        return Err(SolverError::ImproperNotBeneficial);
    }
    let dq = DerivedQuantities::new(scenario, channel);
    if let PowerLimit::Finite(q_max_improper) = allowed_power_with(1.0, scenario, channel, &dq) {
        if q_max_improper <= budget {
            return Ok(1.0);
        }
    }
    let u = scenario.noise_variance() / (budget * channel.g2());
    let radicand = 1.0 - u * (dq.improper_power_ratio * u - 2.0 * dq.beta);
    if !(-RADICAND_SLACK..=1.0 + RADICAND_SLACK).contains(&radicand) {
        return Err(SolverError::RadicandOutOfRange(radicand));
    }
    Ok(radicand.clamp(0.0, 1.0).sqrt())
}

fn design(q: f64, kappa: f64) -> SignalingDesign {
    SignalingDesign::new(q, kappa).expect("solver produced an invalid design")
}

/// Picks the SU's optimal `(q, κ)` and reports the proper baseline alongside.
pub fn select_strategy(scenario: &ScenarioParams, channel: &ChannelRealization) -> StrategyDecision {
    let budget = scenario.su_power_budget();
    let (condition_lhs, beta) = improper_condition(scenario, channel);
    let beneficial = condition_lhs > beta;
    let su_rate = |q: f64, kappa: f64| rate::su_rate(&design(q, kappa), scenario, channel);

    let decide = |regime, kappa_opt: f64, q_opt: f64, r_su_proper: f64| StrategyDecision {
        regime,
        improper_beneficial: beneficial,
        kappa_opt,
        q_opt,
        r_su_proper,
        r_su_improper: if regime.is_improper() {
            su_rate(q_opt, kappa_opt)
        } else {
            r_su_proper
        },
        condition_lhs,
        beta,
    };

    let q_proper = match allowed_power_proper(scenario, channel) {
        PowerLimit::Finite(q) if q < budget => q,
        _ => return decide(Regime::Unconstrained, 0.0, budget, su_rate(budget, 0.0)),
    };
    let r_su_proper = su_rate(q_proper, 0.0);
    // At α = 1 the PU tolerates no interference for any κ; the rate is flat at zero.
    if !beneficial || allowed_power(1.0, scenario, channel) == PowerLimit::Finite(0.0) {
        return decide(Regime::ProperOptimal, 0.0, q_proper, r_su_proper);
    }
    match optimal_kappa(scenario, channel) {
        Ok(1.0) => {
            let q = allowed_power(1.0, scenario, channel).cap(budget);
            decide(Regime::MaxImproper, 1.0, q, r_su_proper)
        }
        Ok(kappa) => {
            let q = allowed_power(kappa, scenario, channel).cap(budget);
            decide(Regime::PowerLimitedImproper, kappa, q, r_su_proper)
        }
        // Only reachable through rounding at a regime boundary.
        Err(_) => decide(Regime::ProperOptimal, 0.0, q_proper, r_su_proper),
    }
}
