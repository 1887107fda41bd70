//! Experiment configuration: JSON schemas per subcommand, with validation
//! that reports every violated constraint at once. Unknown keys are
//! rejected.

use serde::{Deserialize, Serialize};

use crate::classifier::VerdictLabel;
use crate::dynamics::FactorLaw;
use crate::error::{Error, Result};
use crate::grid::{make_grid, TimeGrid, Window};
use crate::quantum::TrajectoryClause;
use crate::transforms::{NoiseLaw, StochasticTransform};

pub const DEFAULT_SAMPLES: u64 = 50_000;
pub const DEFAULT_Z: f64 = 3.0;

fn default_samples() -> u64 {
    DEFAULT_SAMPLES
}

fn default_z() -> f64 {
    DEFAULT_Z
}

fn default_demo_points() -> usize {
    8
}

fn default_epsilon_sigma() -> f64 {
    0.5
}

/// Grid description. `uniform` places `steps + 1` equidistant points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Uniform { t0: f64, t_end: f64, steps: usize },
    Explicit { times: Vec<f64> },
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        match self {
            GridSpec::Uniform { t0, t_end, steps } => {
                let h = (t_end - t0) / *steps as f64;
                let mut times: Vec<f64> = (0..*steps).map(|i| t0 + i as f64 * h).collect();
                times.push(*t_end);
                make_grid(&times)
            }
            GridSpec::Explicit { times } => make_grid(times),
        }
    }

    fn collect_violations(&self, out: &mut Vec<String>) {
        match self {
            GridSpec::Uniform { t0, t_end, steps } => {
                if *steps < 1 {
                    out.push("grid: uniform spec needs steps >= 1".into());
                }
                if !t0.is_finite() || *t0 < 0.0 {
                    out.push(format!("grid: t0 must be >= 0 (got {t0})"));
                }
                if !t_end.is_finite() || t_end <= t0 {
                    out.push(format!("grid: t_end must exceed t0 (got {t0}..{t_end})"));
                }
            }
            GridSpec::Explicit { times } => {
                if let Err(e) = make_grid(times) {
                    out.push(format!("grid: {e}"));
                }
            }
        }
    }
}

/// Transform description used by the `commute` subcommand; built against a
/// base window at run time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    Identity,
    VerticalBump { law: NoiseLaw },
    InteriorBump { law: NoiseLaw, tau_star: f64 },
    HorizontalStretch { alpha: f64 },
    Multiplicative { law: FactorLaw, target_time: f64 },
}

impl TransformSpec {
    pub fn build(&self, window: &Window) -> Result<StochasticTransform> {
        match self {
            TransformSpec::Identity => Ok(StochasticTransform::identity(window)),
            TransformSpec::VerticalBump { law } => StochasticTransform::vertical_bump(window, *law),
            TransformSpec::InteriorBump { law, tau_star } => {
                StochasticTransform::interior_bump(window, *law, *tau_star)
            }
            TransformSpec::HorizontalStretch { alpha } => {
                StochasticTransform::horizontal_stretch(window, *alpha)
            }
            TransformSpec::Multiplicative { law, target_time } => {
                StochasticTransform::multiplicative(window, *law, *target_time)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoSineConfig {
    /// Grid points per π-length segment of [0, 3π].
    #[serde(default = "default_demo_points")]
    pub points_per_segment: usize,
    /// Standard deviation of the jump size.
    #[serde(default = "default_epsilon_sigma")]
    pub epsilon_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub grid: GridSpec,
    /// Prefix samples over the first `prefix_values.len()` grid points.
    pub prefix_values: Vec<f64>,
    pub law: FactorLaw,
    /// Grid index of the projection target; defaults to the point after the
    /// prefix end.
    #[serde(default)]
    pub target_index: Option<usize>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_z")]
    pub z: f64,
    #[serde(default)]
    pub seed: u64,
    /// Expected label; when present the run passes iff the verdict matches.
    #[serde(default)]
    pub expect: Option<VerdictLabel>,
}

/// Shared config for the single-step certifications
/// (`decohere`, `inform`, `martingale`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepCertConfig {
    pub weights: Vec<f64>,
    pub law: FactorLaw,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub outcomes: usize,
    pub grid: GridSpec,
    pub law: FactorLaw,
    pub initial_weights: Vec<f64>,
    /// Defaults to all-zero phases.
    #[serde(default)]
    pub phases: Option<Vec<f64>>,
    pub clause: TrajectoryClause,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub r: f64,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommuteConfig {
    pub grid: GridSpec,
    /// Base window both transforms act on.
    pub window: WindowSpec,
    pub first: TransformSpec,
    pub second: TransformSpec,
    /// Input path samples over the base window.
    pub input_values: Vec<f64>,
    /// When present the run passes iff the equality outcome matches.
    #[serde(default)]
    pub expect_equal: Option<bool>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawCheckConfig {
    pub grid: GridSpec,
    pub prefix_values: Vec<f64>,
    pub process_law: FactorLaw,
    pub family_law: FactorLaw,
    /// Grid index of the comparison time; defaults to the point after the
    /// prefix end.
    #[serde(default)]
    pub u_index: Option<usize>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
}

/// Subcommand selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    DemoSine,
    Classify,
    Decohere,
    Inform,
    Martingale,
    Trajectory,
    Commute,
    LawCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::DemoSine => "demo-sine",
            Command::Classify => "classify",
            Command::Decohere => "decohere",
            Command::Inform => "inform",
            Command::Martingale => "martingale",
            Command::Trajectory => "trajectory",
            Command::Commute => "commute",
            Command::LawCheck => "law-check",
        }
    }
}

/// A parsed, validated experiment configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentConfig {
    DemoSine(DemoSineConfig),
    Classify(ClassifyConfig),
    Decohere(StepCertConfig),
    Inform(StepCertConfig),
    Martingale(StepCertConfig),
    Trajectory(TrajectoryConfig),
    Commute(CommuteConfig),
    LawCheck(LawCheckConfig),
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub z: Option<f64>,
}

impl ExperimentConfig {
    pub fn command(&self) -> Command {
        match self {
            ExperimentConfig::DemoSine(_) => Command::DemoSine,
            ExperimentConfig::Classify(_) => Command::Classify,
            ExperimentConfig::Decohere(_) => Command::Decohere,
            ExperimentConfig::Inform(_) => Command::Inform,
            ExperimentConfig::Martingale(_) => Command::Martingale,
            ExperimentConfig::Trajectory(_) => Command::Trajectory,
            ExperimentConfig::Commute(_) => Command::Commute,
            ExperimentConfig::LawCheck(_) => Command::LawCheck,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentConfig::DemoSine(c) => c.seed,
            ExperimentConfig::Classify(c) => c.seed,
            ExperimentConfig::Decohere(c)
            | ExperimentConfig::Inform(c)
            | ExperimentConfig::Martingale(c) => c.seed,
            ExperimentConfig::Trajectory(c) => c.seed,
            ExperimentConfig::Commute(c) => c.seed,
            ExperimentConfig::LawCheck(c) => c.seed,
        }
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        let seed_slot: &mut u64 = match self {
            ExperimentConfig::DemoSine(c) => &mut c.seed,
            ExperimentConfig::Classify(c) => &mut c.seed,
            ExperimentConfig::Decohere(c)
            | ExperimentConfig::Inform(c)
            | ExperimentConfig::Martingale(c) => &mut c.seed,
            ExperimentConfig::Trajectory(c) => &mut c.seed,
            ExperimentConfig::Commute(c) => &mut c.seed,
            ExperimentConfig::LawCheck(c) => &mut c.seed,
        };
        if let Some(seed) = o.seed {
            *seed_slot = seed;
        }
        if let Some(samples) = o.samples {
            match self {
                ExperimentConfig::Classify(c) => c.samples = samples,
                ExperimentConfig::Decohere(c)
                | ExperimentConfig::Inform(c)
                | ExperimentConfig::Martingale(c) => c.samples = samples,
                ExperimentConfig::Trajectory(c) => c.samples = samples,
                ExperimentConfig::LawCheck(c) => c.samples = samples,
                ExperimentConfig::DemoSine(_) | ExperimentConfig::Commute(_) => {}
            }
        }
        if let Some(z) = o.z {
            if let ExperimentConfig::Classify(c) = self {
                c.z = z;
            }
        }
    }

    /// Config echo for reports.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ExperimentConfig::DemoSine(c) => serde_json::to_value(c),
            ExperimentConfig::Classify(c) => serde_json::to_value(c),
            ExperimentConfig::Decohere(c)
            | ExperimentConfig::Inform(c)
            | ExperimentConfig::Martingale(c) => serde_json::to_value(c),
            ExperimentConfig::Trajectory(c) => serde_json::to_value(c),
            ExperimentConfig::Commute(c) => serde_json::to_value(c),
            ExperimentConfig::LawCheck(c) => serde_json::to_value(c),
        }
        .expect("config structs serialize")
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        match self {
            ExperimentConfig::DemoSine(c) => {
                if c.points_per_segment < 2 {
                    v.push("points_per_segment must be >= 2".into());
                }
                if !c.epsilon_sigma.is_finite() || c.epsilon_sigma < 0.0 {
                    v.push(format!("epsilon_sigma must be >= 0 (got {})", c.epsilon_sigma));
                }
            }
            ExperimentConfig::Classify(c) => {
                c.grid.collect_violations(&mut v);
                check_law(&c.law, "law", &mut v);
                check_samples(c.samples, &mut v);
                if !c.z.is_finite() || c.z <= 0.0 {
                    v.push(format!("z must be > 0 (got {})", c.z));
                }
                check_prefix(&c.prefix_values, &c.grid, c.target_index, "target_index", &mut v);
            }
            ExperimentConfig::Decohere(c) => {
                step_violations(c, &mut v);
                if c.law.mean() > 1.0 + 1e-9 {
                    v.push(format!(
                        "law mean must be <= 1 for decohere (got {})",
                        c.law.mean()
                    ));
                }
            }
            ExperimentConfig::Inform(c) => {
                step_violations(c, &mut v);
                if c.law.mean() < 1.0 - 1e-9 {
                    v.push(format!(
                        "law mean must be >= 1 for inform (got {})",
                        c.law.mean()
                    ));
                }
            }
            ExperimentConfig::Martingale(c) => {
                step_violations(c, &mut v);
                if (c.law.mean() - 1.0).abs() > 1e-9 {
                    v.push(format!(
                        "law mean must equal 1 for martingale (got {})",
                        c.law.mean()
                    ));
                }
            }
            ExperimentConfig::Trajectory(c) => {
                c.grid.collect_violations(&mut v);
                check_law(&c.law, "law", &mut v);
                check_samples(c.samples, &mut v);
                if c.outcomes < 2 {
                    v.push("outcomes must be >= 2".into());
                }
                if c.initial_weights.len() != c.outcomes {
                    v.push(format!(
                        "initial_weights must have length {} (got {})",
                        c.outcomes,
                        c.initial_weights.len()
                    ));
                }
                check_weights_list(&c.initial_weights, "initial_weights", &mut v);
                if let Some(phases) = &c.phases {
                    if phases.len() != c.outcomes {
                        v.push(format!(
                            "phases must have length {} (got {})",
                            c.outcomes,
                            phases.len()
                        ));
                    }
                }
                let mean = c.law.mean();
                let ok = match c.clause {
                    TrajectoryClause::Super => mean <= 1.0 + 1e-9,
                    TrajectoryClause::Sub => mean >= 1.0 - 1e-9,
                    TrajectoryClause::Martingale => (mean - 1.0).abs() <= 1e-9,
                };
                if !ok {
                    v.push(format!(
                        "law mean {mean} does not satisfy the {:?} clause",
                        c.clause
                    ));
                }
            }
            ExperimentConfig::Commute(c) => {
                c.grid.collect_violations(&mut v);
                if c.input_values.is_empty() {
                    v.push("input_values must be nonempty".into());
                }
                if c.window.r.is_nan() || c.window.t.is_nan() || c.window.r > c.window.t {
                    v.push(format!(
                        "window bounds out of order: r = {} > t = {}",
                        c.window.r, c.window.t
                    ));
                }
            }
            ExperimentConfig::LawCheck(c) => {
                c.grid.collect_violations(&mut v);
                check_law(&c.process_law, "process_law", &mut v);
                check_law(&c.family_law, "family_law", &mut v);
                check_samples(c.samples, &mut v);
                check_prefix(&c.prefix_values, &c.grid, c.u_index, "u_index", &mut v);
            }
        }
        v
    }
}

fn check_law(law: &FactorLaw, name: &str, v: &mut Vec<String>) {
    if let Err(e) = law.validate() {
        v.push(format!("{name}: {e}"));
    }
}

fn check_samples(samples: u64, v: &mut Vec<String>) {
    if samples < 2 {
        v.push(format!("samples must be >= 2 (got {samples})"));
    }
}

fn check_weights_list(weights: &[f64], name: &str, v: &mut Vec<String>) {
    if weights.is_empty() {
        v.push(format!("{name} must be nonempty"));
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            v.push(format!("{name}[{i}] must be a nonnegative number (got {w})"));
        }
    }
}

fn check_prefix(
    prefix: &[f64],
    grid: &GridSpec,
    index: Option<usize>,
    index_name: &str,
    v: &mut Vec<String>,
) {
    if prefix.is_empty() {
        v.push("prefix_values must be nonempty".into());
        return;
    }
    let points = match grid {
        GridSpec::Uniform { steps, .. } => steps + 1,
        GridSpec::Explicit { times } => times.len(),
    };
    if prefix.len() >= points {
        v.push(format!(
            "prefix_values must leave at least one future grid point ({} values on a {points}-point grid)",
            prefix.len()
        ));
        return;
    }
    let target = index.unwrap_or(prefix.len());
    if target < prefix.len() || target >= points {
        v.push(format!(
            "{index_name} must lie in [{}, {}) (got {target})",
            prefix.len(),
            points
        ));
    }
}

fn step_violations(c: &StepCertConfig, v: &mut Vec<String>) {
    check_weights_list(&c.weights, "weights", v);
    if c.weights.len() < 2 {
        v.push("weights must have at least two components".into());
    }
    check_law(&c.law, "law", v);
    check_samples(c.samples, v);
}

/// Parses and validates a config document for the given subcommand.
/// Malformed JSON and unknown keys are rejected by the parser; semantic
/// violations are collected and reported together.
pub fn parse_config(command: Command, text: &str) -> Result<ExperimentConfig> {
    let parsed = match command {
        Command::DemoSine => serde_json::from_str(text).map(ExperimentConfig::DemoSine),
        Command::Classify => serde_json::from_str(text).map(ExperimentConfig::Classify),
        Command::Decohere => serde_json::from_str(text).map(ExperimentConfig::Decohere),
        Command::Inform => serde_json::from_str(text).map(ExperimentConfig::Inform),
        Command::Martingale => serde_json::from_str(text).map(ExperimentConfig::Martingale),
        Command::Trajectory => serde_json::from_str(text).map(ExperimentConfig::Trajectory),
        Command::Commute => serde_json::from_str(text).map(ExperimentConfig::Commute),
        Command::LawCheck => serde_json::from_str(text).map(ExperimentConfig::LawCheck),
    };
    let config = parsed.map_err(|e| Error::Config(format!("invalid config: {e}")))?;
    let violations = config.violations();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(format!(
            "{} constraint violation(s): {}",
            violations.len(),
            violations.join("; ")
        )))
    }
}
