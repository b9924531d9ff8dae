//! Rayleigh-fading Monte Carlo sweeps comparing the proper baseline against
//! the optimal (possibly improper) SU strategy.
//!
//! Every trial draws its channel from its own ChaCha stream keyed by
//! `(seed, trial)`, so results do not depend on how trials are scheduled.
//! Trials are accumulated in fixed-size chunks that are merged in chunk
//! order, which keeps the output bit-identical between sequential and
//! parallel runs.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_indexed, ExecutionMode};
use crate::rate::{ChannelRealization, ParamError, ScenarioParams};
use crate::solver::select_strategy;

const CHUNK_TRIALS: usize = 1024;

/// One zero-mean, unit-variance circularly-symmetric complex Gaussian draw.
fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Independent CN(0, 1) gains for all four links.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R) -> ChannelRealization {
    let h = sample_cn(rng);
    let d = sample_cn(rng);
    let g = sample_cn(rng);
    let f = sample_cn(rng);
    ChannelRealization::new(h, d, g, f).expect("gaussian draws are finite")
}

/// A random test scenario: CN(0,1) channels, `α ~ U[0,1]`, both SNRs uniform
/// in `[0, 30]` dB, unit noise variance.
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R) -> (ScenarioParams, ChannelRealization) {
    let alpha = rng.random_range(0.0..=1.0);
    let snr_pu = 10f64.powf(rng.random_range(0.0..=30.0) / 10.0);
    let snr_su = 10f64.powf(rng.random_range(0.0..=30.0) / 10.0);
    let scenario = ScenarioParams::new(snr_pu, snr_su, 1.0, alpha).expect("sampled scenario is valid");
    (scenario, sample_channel(rng))
}

/// Counter-based generator for one trial of one stream.
pub fn trial_rng(seed: u64, stream_key: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream_key.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Every sweep point sees the same channel realizations.
    #[default]
    CommonRandomNumbers,
    /// Each sweep point draws its own realizations.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("loading factor must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("the {0} SNR list is empty")]
    EmptySweep(&'static str),
    #[error("SNR values must be finite and positive (linear), got {0}")]
    BadSnr(f64),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Experiment description. SNRs are linear (`P/σ²` and `Q/σ²`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub snr_pu: Vec<f64>,
    pub snr_su: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub sigma2: f64,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub execution: ExecutionMode,
}

impl ExperimentConfig {
    pub fn new(alpha: f64, snr_pu: Vec<f64>, snr_su: Vec<f64>) -> Self {
        ExperimentConfig {
            alpha,
            snr_pu,
            snr_su,
            trials: 100_000,
            seed: 0,
            sigma2: 1.0,
            sampling: Sampling::default(),
            execution: ExecutionMode::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        for (name, list) in [("PU", &self.snr_pu), ("SU", &self.snr_su)] {
            if list.is_empty() {
                return Err(ConfigError::EmptySweep(name));
            }
            if let Some(&bad) = list.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
                return Err(ConfigError::BadSnr(bad));
            }
        }
        self.scenarios().map(|_| ())
    }

    /// One scenario per sweep point, PU-major.
    fn scenarios(&self) -> Result<Vec<ScenarioParams>, ConfigError> {
        let mut out = Vec::with_capacity(self.snr_pu.len() * self.snr_su.len());
        for &snr_pu in &self.snr_pu {
            for &snr_su in &self.snr_su {
                out.push(ScenarioParams::new(
                    snr_pu * self.sigma2,
                    snr_su * self.sigma2,
                    self.sigma2,
                    self.alpha,
                )?);
            }
        }
        Ok(out)
    }
}

/// Averaged rates at one `(SNR_PU, SNR_SU)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_pu: f64,
    pub snr_su: f64,
    pub mean_r_su_proper: f64,
    pub mean_r_su_improper: f64,
    /// `100·(improper − proper)/proper`; `None` when the proper mean is zero
    /// and the improper one is not.
    pub relative_gain_pct: Option<f64>,
    /// Share of realizations where the improper-signaling condition holds.
    pub fraction_improper_beneficial: f64,
    pub se_proper: f64,
    pub se_improper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    /// PU-major: all SU points for the first PU SNR, then the next.
    pub points: Vec<SweepPoint>,
    pub su_points: usize,
}

impl SweepResult {
    /// SU sweep at the `pu_index`-th PU SNR.
    pub fn curve(&self, pu_index: usize) -> &[SweepPoint] {
        &self.points[pu_index * self.su_points..(pu_index + 1) * self.su_points]
    }

    /// Largest defined relative gain along one SU sweep.
    pub fn max_relative_gain(&self, pu_index: usize) -> Option<f64> {
        self.curve(pu_index)
            .iter()
            .filter_map(|p| p.relative_gain_pct)
            .reduce(f64::max)
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    fn standard_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PointAccumulator {
    proper: Moments,
    improper: Moments,
    beneficial: u64,
}

impl PointAccumulator {
    fn merge(&mut self, other: &PointAccumulator) {
        self.proper.merge(&other.proper);
        self.improper.merge(&other.improper);
        self.beneficial += other.beneficial;
    }

    fn record(&mut self, scenario: &ScenarioParams, channel: &ChannelRealization) {
        let decision = select_strategy(scenario, channel);
        debug_assert!(
            decision.r_su_improper >= decision.r_su_proper - 1e-12,
            "improper strategy lost to proper: {decision:?}"
        );
        self.proper.push(decision.r_su_proper);
        self.improper.push(decision.r_su_improper);
        self.beneficial += u64::from(decision.improper_beneficial);
    }
}

/// Runs the full `(SNR_PU × SNR_SU)` sweep.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, ConfigError> {
    config.validate()?;
    let scenarios = config.scenarios()?;
    let n_chunks = config.trials.div_ceil(CHUNK_TRIALS);

    let partials = map_indexed(config.execution, n_chunks, |chunk| {
        let mut acc = vec![PointAccumulator::default(); scenarios.len()];
        let start = chunk * CHUNK_TRIALS;
        let end = (start + CHUNK_TRIALS).min(config.trials);
        for trial in start..end {
            match config.sampling {
                Sampling::CommonRandomNumbers => {
                    let channel = sample_channel(&mut trial_rng(config.seed, 0, trial as u64));
                    for (a, s) in acc.iter_mut().zip(&scenarios) {
                        a.record(s, &channel);
                    }
                }
                Sampling::Independent => {
                    for (k, (a, s)) in acc.iter_mut().zip(&scenarios).enumerate() {
                        let channel = sample_channel(&mut trial_rng(config.seed, k as u64 + 1, trial as u64));
                        a.record(s, &channel);
                    }
                }
            }
        }
        acc
    });

    let mut totals = vec![PointAccumulator::default(); scenarios.len()];
    for chunk in &partials {
        for (t, c) in totals.iter_mut().zip(chunk) {
            t.merge(c);
        }
    }

    let su_points = config.snr_su.len();
    let points = totals
        .iter()
        .enumerate()
        .map(|(k, acc)| {
            let proper = acc.proper.mean;
            let improper = acc.improper.mean;
            let relative_gain_pct = if proper > 0.0 {
                Some(100.0 * (improper - proper) / proper)
            } else if improper == proper {
                Some(0.0)
            } else {
                None
            };
            SweepPoint {
                snr_pu: config.snr_pu[k / su_points],
                snr_su: config.snr_su[k % su_points],
                mean_r_su_proper: proper,
                mean_r_su_improper: improper,
                relative_gain_pct,
                fraction_improper_beneficial: acc.beneficial as f64 / config.trials as f64,
                se_proper: acc.proper.standard_error(),
                se_improper: acc.improper.standard_error(),
            }
        })
        .collect();

    Ok(SweepResult {
        alpha: config.alpha,
        trials: config.trials,
        seed: config.seed,
        points,
        su_points,
    })
}
