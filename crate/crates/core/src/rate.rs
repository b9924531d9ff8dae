//! Domain types and the raw achievable-rate formulas of the two-user SISO
//! interference channel in which a primary user (PU) transmits proper
//! Gaussian signals and a secondary user (SU) may transmit improper ones.
//!
//! Everything here is a pure function of its inputs. No optimization happens
//! in this module; see [`crate::solver`] for that.
//!
//! All rates are in bits per complex channel use.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Invalid problem data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be finite and strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite and nonnegative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must lie in [0, 1], got {value}")]
    OutOfUnitInterval { name: &'static str, value: f64 },
    #[error("PU transmit power {p} exceeds its budget {budget}")]
    PuPowerAboveBudget { p: f64, budget: f64 },
    #[error("channel gain {name} is not finite")]
    NonFiniteGain { name: &'static str },
}

fn positive(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ParamError::NonPositive { name, value })
    }
}

fn nonnegative(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ParamError::Negative { name, value })
    }
}

fn unit_interval(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ParamError::OutOfUnitInterval { name, value })
    }
}

/// Static problem data shared by every channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct ScenarioParams {
    pu_power_budget: f64,
    su_power_budget: f64,
    noise_variance: f64,
    loading_factor: f64,
    pu_tx_power: f64,
}

#[derive(Serialize, Deserialize)]
struct RawScenario {
    pu_power_budget: f64,
    su_power_budget: f64,
    noise_variance: f64,
    loading_factor: f64,
    #[serde(default)]
    pu_tx_power: Option<f64>,
}

impl TryFrom<RawScenario> for ScenarioParams {
    type Error = ParamError;

    fn try_from(raw: RawScenario) -> Result<Self, ParamError> {
        let scenario = ScenarioParams::new(
            raw.pu_power_budget,
            raw.su_power_budget,
            raw.noise_variance,
            raw.loading_factor,
        )?;
        match raw.pu_tx_power {
            Some(p) => scenario.with_pu_tx_power(p),
            None => Ok(scenario),
        }
    }
}

impl From<ScenarioParams> for RawScenario {
    fn from(s: ScenarioParams) -> Self {
        RawScenario {
            pu_power_budget: s.pu_power_budget,
            su_power_budget: s.su_power_budget,
            noise_variance: s.noise_variance,
            loading_factor: s.loading_factor,
            pu_tx_power: Some(s.pu_tx_power),
        }
    }
}

impl ScenarioParams {
    /// Builds a scenario in which the PU transmits at its full budget (`p = P`).
    pub fn new(
        pu_power_budget: f64,
        su_power_budget: f64,
        noise_variance: f64,
        loading_factor: f64,
    ) -> Result<Self, ParamError> {
        let pu_power_budget = positive("PU power budget", pu_power_budget)?;
        Ok(ScenarioParams {
            pu_power_budget,
            su_power_budget: positive("SU power budget", su_power_budget)?,
            noise_variance: positive("noise variance", noise_variance)?,
            loading_factor: unit_interval("loading factor", loading_factor)?,
            pu_tx_power: pu_power_budget,
        })
    }

    /// Overrides the PU transmit power, which must not exceed its budget.
    pub fn with_pu_tx_power(self, p: f64) -> Result<Self, ParamError> {
        let p = positive("PU transmit power", p)?;
        if p > self.pu_power_budget {
            return Err(ParamError::PuPowerAboveBudget {
                p,
                budget: self.pu_power_budget,
            });
        }
        Ok(ScenarioParams { pu_tx_power: p, ..self })
    }

    /// Same scenario with a different SU power budget.
    pub fn with_su_power_budget(self, q_max: f64) -> Result<Self, ParamError> {
        Ok(ScenarioParams {
            su_power_budget: positive("SU power budget", q_max)?,
            ..self
        })
    }

    /// Same scenario with a different loading factor.
    pub fn with_loading_factor(self, alpha: f64) -> Result<Self, ParamError> {
        Ok(ScenarioParams {
            loading_factor: unit_interval("loading factor", alpha)?,
            ..self
        })
    }

    pub fn pu_power_budget(&self) -> f64 {
        self.pu_power_budget
    }

    pub fn su_power_budget(&self) -> f64 {
        self.su_power_budget
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn loading_factor(&self) -> f64 {
        self.loading_factor
    }

    pub fn pu_tx_power(&self) -> f64 {
        self.pu_tx_power
    }
}

/// The four complex channel gains of one fading realization.
///
/// Only squared moduli enter the rate formulas; phases are carried along so
/// that sampled realizations can be replayed verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct ChannelRealization {
    h: Complex64,
    d: Complex64,
    g: Complex64,
    f: Complex64,
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    h: Complex64,
    d: Complex64,
    g: Complex64,
    f: Complex64,
}

impl TryFrom<RawChannel> for ChannelRealization {
    type Error = ParamError;

    fn try_from(raw: RawChannel) -> Result<Self, ParamError> {
        ChannelRealization::new(raw.h, raw.d, raw.g, raw.f)
    }
}

impl From<ChannelRealization> for RawChannel {
    fn from(c: ChannelRealization) -> Self {
        RawChannel {
            h: c.h,
            d: c.d,
            g: c.g,
            f: c.f,
        }
    }
}

impl ChannelRealization {
    /// `h`: PU-PU, `d`: PU-SU, `g`: SU-PU, `f`: SU-SU.
    pub fn new(h: Complex64, d: Complex64, g: Complex64, f: Complex64) -> Result<Self, ParamError> {
        for (name, z) in [("h", h), ("d", d), ("g", g), ("f", f)] {
            if !z.is_finite() {
                return Err(ParamError::NonFiniteGain { name });
            }
        }
        Ok(ChannelRealization { h, d, g, f })
    }

    /// Real, nonnegative gains with the given squared moduli.
    pub fn from_squared_moduli(h2: f64, d2: f64, g2: f64, f2: f64) -> Result<Self, ParamError> {
        let gain = |name, v| nonnegative(name, v).map(|v| Complex64::new(v.sqrt(), 0.0));
        Ok(ChannelRealization {
            h: gain("|h|^2", h2)?,
            d: gain("|d|^2", d2)?,
            g: gain("|g|^2", g2)?,
            f: gain("|f|^2", f2)?,
        })
    }

    pub fn h(&self) -> Complex64 {
        self.h
    }

    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn g(&self) -> Complex64 {
        self.g
    }

    pub fn f(&self) -> Complex64 {
        self.f
    }

    pub fn h2(&self) -> f64 {
        self.h.norm_sqr()
    }

    pub fn d2(&self) -> f64 {
        self.d.norm_sqr()
    }

    pub fn g2(&self) -> f64 {
        self.g.norm_sqr()
    }

    pub fn f2(&self) -> f64 {
        self.f.norm_sqr()
    }
}

/// SU transmit strategy: power `q` and circularity coefficient `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalingDesign {
    q: f64,
    kappa: f64,
}

impl SignalingDesign {
    pub fn new(q: f64, kappa: f64) -> Result<Self, ParamError> {
        Ok(SignalingDesign {
            q: nonnegative("SU transmit power", q)?,
            kappa: unit_interval("circularity coefficient", kappa)?,
        })
    }

    /// Proper signaling (`kappa = 0`) at power `q`.
    pub fn proper(q: f64) -> Result<Self, ParamError> {
        Self::new(q, 0.0)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Per-realization scalars the closed-form design relies on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    /// `p|h|²/σ²`, which equals `γ(1)`.
    pub snr_pu: f64,
    /// `1 − γ(1)/γ(2α)`.
    pub beta: f64,
    /// Interference-plus-noise power at the SU receiver, `σ² + p|d|²`.
    pub tilde_sigma2: f64,
    /// Interference-free PU rate `R_PU(0,0)`.
    pub r_pu_max: f64,
    /// `γ(1)/γ(α) − 1`, the proper-case power ratio.
    pub proper_power_ratio: f64,
    /// `γ(2)/γ(2α) − 1`, the constant term of the allowed-power quadratic.
    pub improper_power_ratio: f64,
}

impl DerivedQuantities {
    pub fn new(scenario: &ScenarioParams, channel: &ChannelRealization) -> Self {
        let snr_pu = pu_snr(scenario, channel);
        let alpha = scenario.loading_factor();
        DerivedQuantities {
            snr_pu,
            // `0.0 - x` rather than `-x` so the half-load value is +0.
            beta: 0.0 - gamma_ratio_minus_one(1.0, 2.0 * alpha, snr_pu),
            tilde_sigma2: su_interference_plus_noise(scenario, channel),
            r_pu_max: log2_1p(snr_pu),
            proper_power_ratio: gamma_ratio_minus_one(1.0, alpha, snr_pu),
            improper_power_ratio: gamma_ratio_minus_one(2.0, 2.0 * alpha, snr_pu),
        }
    }

    /// `γ(a)` for this realization.
    pub fn gamma(&self, a: f64) -> f64 {
        gamma_from_snr(a, self.snr_pu)
    }
}

/// Power-normalized achievable rates for one design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub r_pu: f64,
    pub r_su: f64,
    pub design: SignalingDesign,
    /// `r_pu − αR_PU(0,0)`; negative when the PU constraint is violated.
    pub constraint_slack: f64,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// PU signal-to-noise ratio without interference, `p|h|²/σ²`.
pub fn pu_snr(scenario: &ScenarioParams, channel: &ChannelRealization) -> f64 {
    scenario.pu_tx_power() * channel.h2() / scenario.noise_variance()
}

/// `σ̃² = σ² + p|d|²`.
pub fn su_interference_plus_noise(scenario: &ScenarioParams, channel: &ChannelRealization) -> f64 {
    scenario.noise_variance() + scenario.pu_tx_power() * channel.d2()
}

/// Interference-free PU rate `R_PU(0,0) = log2(1 + p|h|²/σ²)`.
pub fn pu_rate_max(scenario: &ScenarioParams, channel: &ChannelRealization) -> f64 {
    log2_1p(pu_snr(scenario, channel))
}

/// SNR required for the PU to reach `a·R_PU(0,0)` without interference.
///
/// Evaluated as `(1 + SNR)^a − 1` instead of going through `2^{aR}`.
///
/// # Panics
/// If `a` is negative or NaN.
pub fn gamma(a: f64, scenario: &ScenarioParams, channel: &ChannelRealization) -> f64 {
    gamma_from_snr(a, pu_snr(scenario, channel))
}

fn gamma_from_snr(a: f64, snr: f64) -> f64 {
    assert!(a >= 0.0, "gamma exponent must be nonnegative, got {a}");
    (a * snr.ln_1p()).exp_m1()
}

/// `γ(num)/γ(den) − 1` without cancellation when `num ≈ den`.
///
/// Uses `γ(num) − γ(den) = (1+s)^den · ((1+s)^(num−den) − 1)`. Infinite when
/// `γ(den) = 0` (`den = 0` with positive SNR); NaN when the SNR is zero.
pub fn gamma_ratio_minus_one(num: f64, den: f64, snr: f64) -> f64 {
    let log_x = snr.ln_1p();
    let numerator = (den * log_x).exp() * ((num - den) * log_x).exp_m1();
    numerator / gamma_from_snr(den, snr)
}

/// Circularity coefficients of the received signal and of the
/// interference-plus-noise at the PU receiver, `(κ_yp, κ_inp)`.
///
/// Both are zero when no SU power reaches the PU.
pub fn circularity_at_pu_rx(
    design: &SignalingDesign,
    scenario: &ScenarioParams,
    channel: &ChannelRealization,
) -> (f64, f64) {
    let interference = design.q() * channel.g2();
    if interference == 0.0 {
        return (0.0, 0.0);
    }
    let sigma2 = scenario.noise_variance();
    let signal = scenario.pu_tx_power() * channel.h2();
    let kappa = design.kappa();
    let k_yp = kappa / (1.0 + (signal + sigma2) / interference);
    let k_inp = kappa / (1.0 + sigma2 / interference);
    (k_yp, k_inp)
}

/// `ln(1 − (κ/(1+t))²)`, stable when `κ → 1` and `t → 0`.
fn ln_one_minus_sq(kappa: f64, t: f64) -> f64 {
    // 1 − κ/(1+t) = ((1−κ) + t)/(1+t)
    ((1.0 - kappa) + t).ln() - t.ln_1p() + (kappa / (1.0 + t)).ln_1p()
}

/// PU achievable rate when the SU interferes with power `q` and
/// circularity coefficient `κ`.
pub fn pu_rate(design: &SignalingDesign, scenario: &ScenarioParams, channel: &ChannelRealization) -> f64 {
    let sigma2 = scenario.noise_variance();
    let signal = scenario.pu_tx_power() * channel.h2();
    let interference = design.q() * channel.g2();
    let proper = log2_1p(signal / (sigma2 + interference));
    let kappa = design.kappa();
    if kappa == 0.0 || interference == 0.0 {
        return proper;
    }
    // κ_yp = κ/(1 + a), κ_inp = κ/(1 + b)
    let a = (signal + sigma2) / interference;
    let b = sigma2 / interference;
    let ln_ratio = ln_one_minus_sq(kappa, a) - ln_one_minus_sq(kappa, b);
    debug_assert!(ln_ratio.is_finite());
    proper + 0.5 * ln_ratio / LN_2
}

/// SU achievable rate for a given power and circularity coefficient.
pub fn su_rate(design: &SignalingDesign, scenario: &ScenarioParams, channel: &ChannelRealization) -> f64 {
    let snr = design.q() * channel.f2() / su_interference_plus_noise(scenario, channel);
    let kappa = design.kappa();
    let one_minus_k2 = (1.0 - kappa) * (1.0 + kappa);
    0.5 * log2_1p(snr * (one_minus_k2 * snr + 2.0))
}

/// Both rates plus the slack of the PU rate constraint.
pub fn rate_report(design: SignalingDesign, scenario: &ScenarioParams, channel: &ChannelRealization) -> RateReport {
    let r_pu = pu_rate(&design, scenario, channel);
    RateReport {
        r_pu,
        r_su: su_rate(&design, scenario, channel),
        design,
        constraint_slack: r_pu - scenario.loading_factor() * pu_rate_max(scenario, channel),
    }
}
