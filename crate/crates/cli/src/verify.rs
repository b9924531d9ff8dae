//! Closed-form versus oracle agreement checks over random or replayed cases.

use igs_core::montecarlo::{random_scenario, trial_rng};
use igs_core::oracle::{self, OracleConfig, OracleError, SEARCH_CAP_FACTOR};
use igs_core::rate::{self, ChannelRealization, ScenarioParams, SignalingDesign};
use igs_core::solver::{self, PowerLimit};
use serde::{Deserialize, Serialize};

use crate::record::SCHEMA_VERSION;

/// Circularity coefficients at which allowed powers are compared.
pub const KAPPA_PROBES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.99];

/// Stream key separating verification draws from sweep draws.
const VERIFY_STREAM: u64 = u64::MAX;

const KAPPA_STEP_TOLERANCE: f64 = 1.0 + 1e-9;

/// Failing cases kept in a report.
const MAX_REPORTED_FAILURES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative allowed-power disagreement.
    pub power_rel: f64,
    /// PU rate distance from its target at the closed-form power, in bits.
    pub constraint_bits: f64,
    /// Relative gap between `q(0)` and the proper allowed power.
    pub identity_rel: f64,
    /// How far the grid optimum may exceed the closed-form optimum, in bits.
    pub rate_bits: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            power_rel: 1e-9,
            constraint_bits: 1e-9,
            identity_rel: 1e-10,
            rate_bits: 1e-6,
        }
    }
}

/// A self-contained case that `verify --replay` can re-run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayCase {
    pub scenario: ScenarioParams,
    pub channel: ChannelRealization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_grid: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    PowerAgreement,
    ConstraintTightness,
    ProperIdentity,
    DecisionMatch,
    KappaMatch,
    RateOptimality,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::PowerAgreement,
        Check::ConstraintTightness,
        Check::ProperIdentity,
        Check::DecisionMatch,
        Check::KappaMatch,
        Check::RateOptimality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::PowerAgreement => "power_agreement",
            Check::ConstraintTightness => "constraint_tightness",
            Check::ProperIdentity => "proper_identity",
            Check::DecisionMatch => "decision_match",
            Check::KappaMatch => "kappa_match",
            Check::RateOptimality => "rate_optimality",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: Check,
    pub checked: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub scenarios: usize,
    pub kappa_grid: usize,
    pub checks: Vec<CheckSummary>,
    pub passed: bool,
    pub failing_cases: Vec<ReplayCase>,
}

impl VerifyReport {
    pub fn failure_count(&self) -> usize {
        self.checks.iter().map(|c| c.failures).sum()
    }
}

/// Deviations of one case, measured against the tolerance of each check.
struct CaseOutcome {
    /// `(check, deviation, tolerance)`
    measurements: Vec<(Check, f64, f64)>,
}

impl CaseOutcome {
    fn failed(&self) -> bool {
        self.measurements.iter().any(|&(_, dev, tol)| !within(dev, tol))
    }
}

/// NaN deviations count as failures.
fn within(deviation: f64, tolerance: f64) -> bool {
    deviation <= tolerance
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn verify_case(
    scenario: &ScenarioParams,
    channel: &ChannelRealization,
    tol: &Tolerances,
    config: &OracleConfig,
) -> Result<CaseOutcome, OracleError> {
    let mut m = Vec::new();
    let budget = scenario.su_power_budget();
    let cap = budget * SEARCH_CAP_FACTOR;
    let target = scenario.loading_factor() * rate::pu_rate_max(scenario, channel);

    for kappa in KAPPA_PROBES {
        let closed = solver::allowed_power(kappa, scenario, channel);
        let brute = oracle::max_feasible_power(kappa, scenario, channel, config)?;
        let deviation = match (closed, brute) {
            (PowerLimit::Finite(a), PowerLimit::Finite(b)) => Some(relative(a, b)),
            (PowerLimit::Unbounded, PowerLimit::Finite(_)) => Some(f64::INFINITY),
            (PowerLimit::Finite(a), PowerLimit::Unbounded) if a < cap * (1.0 - tol.power_rel.abs()) => {
                Some(f64::INFINITY)
            }
            _ => None,
        };
        if let Some(dev) = deviation {
            m.push((Check::PowerAgreement, dev, tol.power_rel));
        }
        if let PowerLimit::Finite(q) = closed {
            if q <= budget {
                let design = SignalingDesign::new(q, kappa).expect("closed-form power is a valid design");
                let gap = (rate::pu_rate(&design, scenario, channel) - target).abs();
                m.push((Check::ConstraintTightness, gap, tol.constraint_bits));
            }
        }
    }

    if let (PowerLimit::Finite(a), PowerLimit::Finite(b)) = (
        solver::allowed_power(0.0, scenario, channel),
        solver::allowed_power_proper(scenario, channel),
    ) {
        m.push((Check::ProperIdentity, relative(a, b), tol.identity_rel));
    }

    let binding = matches!(solver::allowed_power_proper(scenario, channel), PowerLimit::Finite(q) if q < budget);
    if binding {
        let decision = solver::select_strategy(scenario, channel);
        let grid = oracle::grid_search_optimum(scenario, channel, config)?;
        let oracle_improves = grid.improvement() > 0.0;
        // A coarse grid cannot see an optimum closer to κ = 0 than one step.
        let below_resolution = decision.regime.is_improper() && decision.kappa_opt < grid.grid_step;
        let agrees = oracle_improves == decision.regime.is_improper() || (below_resolution && !oracle_improves);
        let mismatch = if agrees { 0.0 } else { 1.0 };
        m.push((Check::DecisionMatch, mismatch, 0.0));
        let steps_off = (decision.kappa_opt - grid.kappa).abs() / grid.grid_step;
        m.push((Check::KappaMatch, steps_off, KAPPA_STEP_TOLERANCE));
        m.push((Check::RateOptimality, grid.r_su - decision.r_su_improper, tol.rate_bits));
    }
    Ok(CaseOutcome { measurements: m })
}

/// Runs every check over the given cases.
pub fn verify_cases(
    cases: &[(ScenarioParams, ChannelRealization)],
    tol: &Tolerances,
    config: &OracleConfig,
) -> Result<VerifyReport, OracleError> {
    let mut checks: Vec<CheckSummary> = Check::ALL
        .iter()
        .zip(tolerance_column(tol))
        .map(|(&check, tolerance)| CheckSummary {
            check,
            checked: 0,
            max_deviation: 0.0,
            tolerance,
            failures: 0,
        })
        .collect();
    let mut failing_cases = Vec::new();

    for (scenario, channel) in cases {
        let outcome = verify_case(scenario, channel, tol, config)?;
        for &(check, dev, t) in &outcome.measurements {
            let summary = &mut checks[check as usize];
            summary.checked += 1;
            summary.max_deviation = summary.max_deviation.max(dev);
            if !within(dev, t) {
                summary.failures += 1;
            }
        }
        if outcome.failed() && failing_cases.len() < MAX_REPORTED_FAILURES {
            failing_cases.push(ReplayCase {
                scenario: *scenario,
                channel: *channel,
                tolerances: Some(*tol),
                kappa_grid: Some(config.kappa_grid_steps),
            });
        }
    }
    let passed = checks.iter().all(|c| c.failures == 0);
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        scenarios: cases.len(),
        kappa_grid: config.kappa_grid_steps,
        checks,
        passed,
        failing_cases,
    })
}

/// Tolerances in [`Check::ALL`] order. Kappa agreement is counted in grid steps.
fn tolerance_column(tol: &Tolerances) -> [f64; 6] {
    [
        tol.power_rel,
        tol.constraint_bits,
        tol.identity_rel,
        0.0,
        KAPPA_STEP_TOLERANCE,
        tol.rate_bits,
    ]
}

/// `n` reproducible random cases drawn from `seed`.
pub fn random_cases(n: usize, seed: u64) -> Vec<(ScenarioParams, ChannelRealization)> {
    (0..n as u64)
        .map(|i| random_scenario(&mut trial_rng(seed, VERIFY_STREAM, i)))
        .collect()
}
