//! Experiment execution: turns a validated config into a report plus the
//! CSV files to write. All randomness flows from the config's seed, so the
//! report and file contents are reproducible byte for byte.

use std::time::Instant;

use crate::classifier::{classify_projection, law_consistency_check, MarkovFactorProcess};
use crate::config::{
    ClassifyConfig, CommuteConfig, DemoSineConfig, ExperimentConfig, LawCheckConfig,
    StepCertConfig, TrajectoryConfig,
};
use crate::dynamics::{gaussian_sine_path, sine_demo_grid};
use crate::error::Result;
use crate::grid::scalar_path;
use crate::quantum::{
    run_full_trajectory, verify_decoherence_step, verify_information_step, verify_martingale_step,
    StepVerdict,
};
use crate::report::RunReport;
use crate::rng::RandomSource;
use crate::transforms::{commutator_check, StochasticTransform};

/// A finished run: the report and the named CSV files it produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    /// `(file name, contents)` pairs, relative to the output directory.
    pub files: Vec<(String, String)>,
}

/// Executes the experiment described by the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut outcome = match config {
        ExperimentConfig::DemoSine(c) => run_demo_sine(c)?,
        ExperimentConfig::Classify(c) => run_classify(c)?,
        ExperimentConfig::Decohere(c) => run_step_cert(c, "decohere")?,
        ExperimentConfig::Inform(c) => run_step_cert(c, "inform")?,
        ExperimentConfig::Martingale(c) => run_step_cert(c, "martingale")?,
        ExperimentConfig::Trajectory(c) => run_trajectory(c)?,
        ExperimentConfig::Commute(c) => run_commute(c)?,
        ExperimentConfig::LawCheck(c) => run_law_check(c)?,
    };
    outcome.report.config = config.to_json();
    outcome.report.command = config.command().name().to_string();
    outcome.report.wall_clock_ms = start.elapsed().as_millis();
    Ok(outcome)
}

fn finish(
    seed: u64,
    passed: bool,
    details: serde_json::Value,
    files: Vec<(String, String)>,
) -> RunOutcome {
    let outputs = files.iter().map(|(name, _)| name.clone()).collect();
    RunOutcome {
        // Command and config echo are filled in by `run_experiment`.
        report: RunReport::new("", seed, serde_json::Value::Null, passed, details, outputs),
        files,
    }
}

fn run_demo_sine(c: &DemoSineConfig) -> Result<RunOutcome> {
    let pi = std::f64::consts::PI;
    let grid = sine_demo_grid(c.points_per_segment)?;
    let src = RandomSource::from_seed(c.seed);
    let full = gaussian_sine_path(&grid, &src.substream("path"))?;
    let source = grid.window(0.0, 2.0 * pi)?;
    let input = full.restrict(&source)?;
    let target = grid.window(pi, 3.0 * pi)?;
    let tf = StochasticTransform::sine_demo(&source, &target, c.epsilon_sigma)?;
    let output = tf.apply(&input, &src.substream("transform"))?;
    let details = serde_json::json!({
        "transform": tf.to_json(),
        "input": input.to_json(),
        "output": output.to_json(),
    });
    let files = vec![
        ("demo_input.csv".to_string(), input.to_csv()),
        ("demo_output.csv".to_string(), output.to_csv()),
    ];
    Ok(finish(c.seed, true, details, files))
}

fn run_classify(c: &ClassifyConfig) -> Result<RunOutcome> {
    let grid = c.grid.build()?;
    let window = grid.window_by_index(0, c.prefix_values.len() - 1)?;
    let prefix = scalar_path(window.clone(), &c.prefix_values)?;
    let target_index = c.target_index.unwrap_or(c.prefix_values.len());
    let target_time = grid.times()[target_index];
    let tf = StochasticTransform::multiplicative(&window, c.law, target_time)?;
    let src = RandomSource::from_seed(c.seed);
    let verdict = classify_projection(&tf, &prefix, c.samples, c.z, &src)?;
    let passed = c.expect.is_none_or(|e| e == verdict.label);
    let details = serde_json::json!({
        "transform": tf.to_json(),
        "verdict": verdict.to_json(),
        "expected": c.expect,
    });
    Ok(finish(c.seed, passed, details, Vec::new()))
}

fn offdiag_margins_csv(verdict: &StepVerdict) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("i,j,estimate,std_error,reference,margin\n");
    for m in &verdict.offdiag {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            m.i + 1,
            m.j + 1,
            m.estimate,
            m.std_error,
            m.reference,
            m.margin
        );
    }
    out
}

fn information_margin_csv(verdict: &StepVerdict) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("estimate,std_error,reference,margin\n");
    if let Some(m) = &verdict.information {
        let _ = writeln!(out, "{},{},{},{}", m.estimate, m.std_error, m.reference, m.margin);
    }
    out
}

fn run_step_cert(c: &StepCertConfig, which: &str) -> Result<RunOutcome> {
    let src = RandomSource::from_seed(c.seed);
    let verdict = match which {
        "decohere" => verify_decoherence_step(&c.weights, &c.law, c.samples, &src)?,
        "inform" => verify_information_step(&c.weights, &c.law, c.samples, &src)?,
        _ => verify_martingale_step(&c.weights, &c.law, c.samples, &src)?,
    };
    let mut files = Vec::new();
    if !verdict.offdiag.is_empty() {
        files.push(("offdiag_margins.csv".to_string(), offdiag_margins_csv(&verdict)));
    }
    if verdict.information.is_some() {
        files.push(("information_margin.csv".to_string(), information_margin_csv(&verdict)));
    }
    let passed = verdict.pass;
    let details = serde_json::json!({ "verdict": verdict });
    Ok(finish(c.seed, passed, details, files))
}

fn run_trajectory(c: &TrajectoryConfig) -> Result<RunOutcome> {
    let grid = c.grid.build()?;
    let phases = c.phases.clone().unwrap_or_else(|| vec![0.0; c.outcomes]);
    let src = RandomSource::from_seed(c.seed);
    let report = run_full_trajectory(
        c.outcomes,
        &grid,
        &c.law,
        &c.initial_weights,
        &phases,
        c.samples,
        c.clause,
        &src,
    )?;
    let files = vec![
        ("magnitudes.csv".to_string(), report.magnitudes_csv()),
        ("information.csv".to_string(), report.information_csv()),
        ("weights.csv".to_string(), report.weights_csv()),
    ];
    let passed = report.pass;
    let details = serde_json::to_value(&report)?;
    Ok(finish(c.seed, passed, details, files))
}

fn run_commute(c: &CommuteConfig) -> Result<RunOutcome> {
    let grid = c.grid.build()?;
    let window = grid.window(c.window.r, c.window.t)?;
    let first = c.first.build(&window)?;
    let second = c.second.build(&window)?;
    let input = scalar_path(window, &c.input_values)?;
    let src = RandomSource::from_seed(c.seed);
    let report = commutator_check(&first, &second, &input, &src)?;
    let passed = c.expect_equal.is_none_or(|e| e == report.equal);
    let details = serde_json::json!({
        "first": first.to_json(),
        "second": second.to_json(),
        "equal": report.equal,
        "first_diff_time": report.first_diff_time,
        "expected_equal": c.expect_equal,
    });
    Ok(finish(c.seed, passed, details, Vec::new()))
}

fn run_law_check(c: &LawCheckConfig) -> Result<RunOutcome> {
    let grid = c.grid.build()?;
    let window = grid.window_by_index(0, c.prefix_values.len() - 1)?;
    let prefix = scalar_path(window.clone(), &c.prefix_values)?;
    let u_index = c.u_index.unwrap_or(c.prefix_values.len());
    let u = grid.times()[u_index];
    let family = StochasticTransform::multiplicative(&window, c.family_law, u)?;
    let process = MarkovFactorProcess { law: c.process_law };
    let src = RandomSource::from_seed(c.seed);
    let report = law_consistency_check(&process, &family, &prefix, u, c.samples, &src)?;
    let details = serde_json::json!({
        "family": family.to_json(),
        "ks_stat": report.ks_stat,
        "threshold": report.threshold,
        "pass": report.pass,
    });
    Ok(finish(c.seed, report.pass, details, Vec::new()))
}
