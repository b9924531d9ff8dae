//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p igs-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use igs_core::montecarlo::{random_scenario, run_sweep, sample_channel, trial_rng, ExperimentConfig, SweepResult};
use igs_core::oracle::{self, OracleConfig};
use igs_core::rate::{self, ChannelRealization, DerivedQuantities, ScenarioParams, SignalingDesign};
use igs_core::solver::{self, PowerLimit};
use igs_core::ExecutionMode;
use rand::Rng;

const SEED: u64 = 7;
/// Keeps acceptance draws apart from the sweep streams.
const SCENARIO_STREAM: u64 = 0xACCE_0000;
const KAPPA_PROBES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.99];
const SNR_PU_DB: [f64; 3] = [10.0, 20.0, 30.0];

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn design(q: f64, kappa: f64) -> SignalingDesign {
    SignalingDesign::new(q, kappa).unwrap()
}

fn scenarios(n: usize, stream: u64) -> Vec<(ScenarioParams, ChannelRealization)> {
    (0..n as u64)
        .map(|i| random_scenario(&mut trial_rng(SEED, SCENARIO_STREAM + stream, i)))
        .collect()
}

fn power_agreement(cases: &[(ScenarioParams, ChannelRealization)]) -> Outcome {
    let cfg = OracleConfig::default();
    let (mut worst, mut compared, mut mismatched) = (0.0_f64, 0usize, 0usize);
    for (s, c) in cases {
        for kappa in KAPPA_PROBES {
            let closed = solver::allowed_power(kappa, s, c);
            let brute = oracle::max_feasible_power(kappa, s, c, &cfg).unwrap();
            match (closed, brute) {
                (PowerLimit::Finite(a), PowerLimit::Finite(b)) => {
                    compared += 1;
                    worst = worst.max(relative(a, b));
                }
                // The oracle stops searching at a fixed multiple of Q.
                (PowerLimit::Finite(a), PowerLimit::Unbounded)
                    if a >= s.su_power_budget() * oracle::SEARCH_CAP_FACTOR * (1.0 - 1e-9) => {}
                (PowerLimit::Unbounded, PowerLimit::Unbounded) => {}
                _ => mismatched += 1,
            }
        }
    }
    outcome(
        worst < 1e-9 && mismatched == 0,
        format!("{compared} finite pairs, max relative error {worst:.2e} (< 1e-9), {mismatched} finiteness mismatches"),
    )
}

fn tightness(cases: &[(ScenarioParams, ChannelRealization)]) -> Outcome {
    let (mut worst, mut checked) = (0.0_f64, 0usize);
    for (s, c) in cases {
        let target = s.loading_factor() * rate::pu_rate_max(s, c);
        for kappa in KAPPA_PROBES {
            if let PowerLimit::Finite(q) = solver::allowed_power(kappa, s, c) {
                if q <= s.su_power_budget() {
                    checked += 1;
                    worst = worst.max((rate::pu_rate(&design(q, kappa), s, c) - target).abs());
                }
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("{checked} binding points, max |R_PU - target| {worst:.2e} bits (< 1e-9)"),
    )
}

fn proper_identity(cases: &[(ScenarioParams, ChannelRealization)]) -> Outcome {
    let (mut worst, mut checked) = (0.0_f64, 0usize);
    for (s, c) in cases {
        if let (PowerLimit::Finite(a), PowerLimit::Finite(b)) =
            (solver::allowed_power(0.0, s, c), solver::allowed_power_proper(s, c))
        {
            checked += 1;
            worst = worst.max(relative(a, b));
        }
    }
    outcome(
        worst < 1e-10,
        format!("{checked} scenarios, max relative error {worst:.2e} (< 1e-10)"),
    )
}

fn decision_correctness() -> Outcome {
    let cfg = OracleConfig::default();
    let binding: Vec<_> = (0u64..)
        .map(|i| random_scenario(&mut trial_rng(SEED, SCENARIO_STREAM + 3, i)))
        .filter(|(s, c)| matches!(solver::allowed_power_proper(s, c), PowerLimit::Finite(q) if q < s.su_power_budget()))
        .take(1000)
        .collect();

    let (mut sign_mismatch, mut kappa_off, mut worst_steps, mut worst_rate_gap) = (0usize, 0usize, 0.0_f64, f64::MIN);
    for (s, c) in &binding {
        let grid = oracle::grid_search_optimum(s, c, &cfg).unwrap();
        let d = solver::select_strategy(s, c);
        if solver::improper_beneficial(s, c) != (grid.improvement() > 0.0) {
            sign_mismatch += 1;
        }
        let steps = (d.kappa_opt - grid.kappa).abs() / grid.grid_step;
        worst_steps = worst_steps.max(steps);
        if steps > 1.0 + 1e-9 {
            kappa_off += 1;
        }
        worst_rate_gap = worst_rate_gap.max(grid.r_su - d.r_su_improper);
    }
    outcome(
        sign_mismatch == 0 && kappa_off == 0 && worst_rate_gap <= 1e-6,
        format!(
            "{} scenarios: {sign_mismatch} sign mismatches, {kappa_off} kappa misses (worst {worst_steps:.3} steps), \
             oracle - closed form <= {worst_rate_gap:.2e} bits (<= 1e-6)",
            binding.len()
        ),
    )
}

fn sweep(alpha: f64, execution: ExecutionMode, trials: usize) -> SweepResult {
    let snr_su = (0..=12).map(|i| db(2.5 * i as f64)).collect();
    let mut cfg = ExperimentConfig::new(alpha, SNR_PU_DB.iter().map(|&x| db(x)).collect(), snr_su);
    cfg.trials = trials;
    cfg.seed = SEED;
    cfg.execution = execution;
    run_sweep(&cfg).unwrap()
}

fn max_gains(result: &SweepResult) -> Vec<f64> {
    (0..SNR_PU_DB.len())
        .map(|i| result.max_relative_gain(i).unwrap())
        .collect()
}

fn figure_gains(result: &SweepResult, expected: [f64; 3], band: f64) -> Outcome {
    let gains = max_gains(result);
    let pass = gains.iter().zip(expected).all(|(g, e)| (g - e).abs() <= band);
    let shown: Vec<String> = gains
        .iter()
        .zip(expected)
        .zip(SNR_PU_DB)
        .map(|((g, e), snr)| format!("{snr} dB: {g:.2}% vs {e}%"))
        .collect();
    outcome(pass, format!("max gain {} (band +-{band})", shown.join(", ")))
}

fn fraction_is_one(result: &SweepResult) -> Outcome {
    let off = result
        .points
        .iter()
        .filter(|p| p.fraction_improper_beneficial != 1.0)
        .count();
    outcome(
        off == 0,
        format!("{off} of {} points with fraction != 1.0", result.points.len()),
    )
}

/// Compares the largest gain of each SNR_PU curve. Pointwise the ordering
/// does not hold: at low SNR_SU the half-load proper power rarely binds, so
/// there is little to gain. Those points are reported but not judged.
fn ordering(half: &SweepResult, heavy: &SweepResult) -> (Outcome, String) {
    let (a, b) = (max_gains(half), max_gains(heavy));
    let pass = a.iter().zip(&b).all(|(x, y)| x > y);
    let shown: Vec<String> = a
        .iter()
        .zip(&b)
        .zip(SNR_PU_DB)
        .map(|((x, y), snr)| format!("{snr} dB: {x:.1}% > {y:.1}%"))
        .collect();
    let below: Vec<String> = half
        .points
        .iter()
        .zip(&heavy.points)
        .filter(|(x, y)| x.relative_gain_pct <= y.relative_gain_pct)
        .map(|(x, _)| format!("({:.0},{:.1})", 10.0 * x.snr_pu.log10(), 10.0 * x.snr_su.log10()))
        .collect();
    let info = format!(
        "{} of {} (SNR_PU, SNR_SU) dB points have a smaller gain at alpha 0.5 than at 0.8: {}",
        below.len(),
        half.points.len(),
        below.join(" ")
    );
    (outcome(pass, format!("max gain per SNR_PU {}", shown.join(", "))), info)
}

fn monotonicity(cases: &[(ScenarioParams, ChannelRealization)]) -> Outcome {
    let mut violations = Vec::new();
    for (i, (s, c)) in cases.iter().enumerate() {
        let mut rng = trial_rng(SEED, SCENARIO_STREAM + 9, i as u64);
        let q = 10f64.powf(rng.random_range(-3.0..3.0));
        let kappa: f64 = rng.random_range(0.0..0.99);
        let su = |q, k| rate::su_rate(&design(q, k), s, c);
        let pu = |q, k| rate::pu_rate(&design(q, k), s, c);
        if su(q * (1.0 + 1e-6), kappa) <= su(q, kappa) {
            violations.push("su_rate in q");
        }
        if su(q, kappa + 1e-3) >= su(q, kappa) {
            violations.push("su_rate in kappa");
        }
        if pu(q * (1.0 + 1e-6), kappa) >= pu(q, kappa) {
            violations.push("pu_rate in q");
        }
        if pu(q, kappa + 1e-3) <= pu(q, kappa) {
            violations.push("pu_rate in kappa");
        }
        let (lo, hi) = (
            solver::allowed_power(kappa, s, c).as_f64(),
            solver::allowed_power(kappa + 1e-3, s, c).as_f64(),
        );
        if hi < lo * (1.0 - 1e-12) {
            violations.push("allowed_power in kappa");
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{} points x 5 finite differences, violations {violations:?}",
            cases.len()
        ),
    )
}

fn residuals(cases: &[(ScenarioParams, ChannelRealization)]) -> Outcome {
    let (mut worst_a2, mut worst_a3) = (0.0_f64, 0.0_f64);
    for (s, c) in cases {
        let dq = DerivedQuantities::new(s, c);
        let sigma2 = s.noise_variance();
        for kappa in KAPPA_PROBES {
            let Some(q) = solver::allowed_power(kappa, s, c).finite() else {
                continue;
            };
            if q == 0.0 {
                continue;
            }
            let quadratic = q * q * c.g2().powi(2) * (1.0 - kappa * kappa);
            let constant = dq.improper_power_ratio * sigma2 * sigma2;
            let linear = 2.0 * sigma2 * c.g2() * dq.beta * q;
            let scale = quadratic.abs().max(constant.abs()).max(linear.abs());
            worst_a2 = worst_a2.max((quadratic - (constant - linear)).abs() / scale);

            let i = q * c.g2();
            let signal = s.pu_tx_power() * c.h2();
            let ratio =
                (((i + signal + sigma2) / i).powi(2) - kappa * kappa) / (((i + sigma2) / i).powi(2) - kappa * kappa);
            let lhs = (2.0 * rate::pu_rate(&design(q, kappa), s, c)).exp2();
            worst_a3 = worst_a3.max(relative(lhs, ratio));
        }
    }
    outcome(
        worst_a2 < 1e-9 && worst_a3 < 1e-10,
        format!("quadratic residual {worst_a2:.2e} (< 1e-9), rate-ratio residual {worst_a3:.2e} (< 1e-10)"),
    )
}

fn determinism(parallel: &SweepResult, alpha: f64) -> Outcome {
    let again = serde_json::to_string(&sweep(alpha, ExecutionMode::Parallel, 2000)).unwrap();
    let first = serde_json::to_string(&sweep(alpha, ExecutionMode::Parallel, 2000)).unwrap();
    let sequential = serde_json::to_string(&sweep(alpha, ExecutionMode::Sequential, 2000)).unwrap();
    let full_sequential = serde_json::to_string(&sweep(alpha, ExecutionMode::Sequential, parallel.trials)).unwrap();
    let full_parallel = serde_json::to_string(parallel).unwrap();
    outcome(
        first == again && first == sequential && full_parallel == full_sequential,
        "repeat and sequential-vs-parallel serializations compared byte for byte".to_string(),
    )
}

fn su_snr_monotone(results: &[&SweepResult]) -> Outcome {
    let mut violations = 0;
    for result in results {
        for i in 0..SNR_PU_DB.len() {
            for w in result.curve(i).windows(2) {
                if w[1].mean_r_su_proper < w[0].mean_r_su_proper || w[1].mean_r_su_improper < w[0].mean_r_su_improper {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} decreases of mean SU rate along SNR_SU"),
    )
}

fn channel_distribution() -> Outcome {
    let n = 20_000;
    let mut x: Vec<f64> = (0..n as u64)
        .map(|i| sample_channel(&mut trial_rng(SEED, SCENARIO_STREAM + 11, i)).f2())
        .collect();
    x.sort_by(f64::total_cmp);
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let cdf = -(-v).exp_m1();
            (cdf - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - cdf)
        })
        .fold(0.0, f64::max);
    let critical = 1.628 / (n as f64).sqrt();
    outcome(
        d < critical,
        format!("KS statistic of |f|^2 vs Exp(1): {d:.4} (< {critical:.4} at 1%, n = {n})"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cases = scenarios(10_000, 0);
    let small = scenarios(1_000, 1);
    let heavy = sweep(0.8, ExecutionMode::Parallel, 100_000);
    let half = sweep(0.5, ExecutionMode::Parallel, 100_000);

    let criteria: Vec<Criterion> = vec![
        ("1 closed-form vs oracle power", Box::new(|| power_agreement(&cases))),
        ("2 constraint tightness", Box::new(|| tightness(&cases))),
        ("3 proper power identity", Box::new(|| proper_identity(&cases))),
        ("4 decision correctness", Box::new(decision_correctness)),
        (
            "5 gains at alpha 0.8",
            Box::new(|| figure_gains(&heavy, [9.0, 23.0, 56.0], 3.0)),
        ),
        (
            "6 gains at alpha 0.5",
            Box::new(|| figure_gains(&half, [292.0, 297.0, 256.0], 25.0)),
        ),
        (
            "6 fraction beneficial at alpha 0.5",
            Box::new(|| fraction_is_one(&half)),
        ),
        (
            "7 alpha 0.5 gains exceed alpha 0.8",
            Box::new(|| ordering(&half, &heavy).0),
        ),
        ("8 monotonicity", Box::new(|| monotonicity(&small))),
        ("8 quadratic and rate-ratio residuals", Box::new(|| residuals(&small))),
        ("8 determinism", Box::new(|| determinism(&heavy, 0.8))),
        (
            "8 mean rates nondecreasing in SNR_SU",
            Box::new(|| su_snr_monotone(&[&heavy, &half])),
        ),
        ("8 channel distribution", Box::new(channel_distribution)),
    ];

    let mut failed = 0;
    for (name, check) in &criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} [{name}] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("INFO [7 pointwise] {}", ordering(&half, &heavy).1);
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
