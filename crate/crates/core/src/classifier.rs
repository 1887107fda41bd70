//! Monte-Carlo conditional expectation and projection classification.
//!
//! A projection transform maps a path prefix onto a single future time
//! point. Holding the prefix fixed and averaging the projection's output
//! over fresh substreams estimates the conditional expectation given the
//! observed path. Comparing that estimate against the prefix's terminal
//! value, with a `z`-standard-error decision band, classifies the transform
//! as a supermartingale, submartingale, or martingale-consistent projection.
//!
//! The statistical rule is a finite-sample surrogate for the defining
//! inequalities: `Supermartingale` means `mean + z·SE < reference`,
//! `Submartingale` means `mean − z·SE > reference`, and
//! `MartingaleConsistent` means the reference lies inside the band. With a
//! finite `z` the three cases are exhaustive for finite estimates, so
//! `Indeterminate` only arises from non-finite estimates or disagreeing
//! components of a weight-vector path.

use serde::{Deserialize, Serialize};

use crate::dynamics::FactorLaw;
use crate::error::{Error, Result};
use crate::grid::{Path, StateKind, StateValue};
use crate::rng::RandomSource;
use crate::stats::{ks_critical_value, ks_statistic, MeanVariance};
use crate::transforms::StochasticTransform;

/// Monte-Carlo estimate of a conditional expectation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CondExpEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl CondExpEstimate {
    fn from_acc(acc: &MeanVariance) -> Self {
        Self {
            mean: acc.mean(),
            std_error: acc.std_error(),
            samples: acc.count(),
        }
    }
}

/// Classification outcome for a projection transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictLabel {
    Supermartingale,
    Submartingale,
    MartingaleConsistent,
    Indeterminate,
}

/// Per-component classification detail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentVerdict {
    pub label: VerdictLabel,
    pub estimate: CondExpEstimate,
    /// The prefix's terminal value for this component.
    pub reference: f64,
    /// Margin beyond the `z·SE` band; positive only for the strict labels.
    pub margin: f64,
    pub strict: bool,
}

/// Verdict for a projection at a given prefix. Scalar paths have one
/// component; weight-vector paths have one per outcome, and the overall
/// label is the conjunction (components must agree).
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionVerdict {
    pub label: VerdictLabel,
    pub z: f64,
    pub strict: bool,
    pub components: Vec<ComponentVerdict>,
}

impl ProjectionVerdict {
    /// Single-component estimate (scalar prefixes).
    pub fn estimate(&self) -> &CondExpEstimate {
        &self.components[0].estimate
    }

    pub fn reference(&self) -> f64 {
        self.components[0].reference
    }

    /// JSON form. Scalar verdicts flatten to
    /// `{label, mean, std_error, reference, z, strict, samples}`; vector
    /// verdicts carry a `components` array instead.
    pub fn to_json(&self) -> serde_json::Value {
        if self.components.len() == 1 {
            let c = &self.components[0];
            serde_json::json!({
                "label": self.label,
                "mean": c.estimate.mean,
                "std_error": c.estimate.std_error,
                "reference": c.reference,
                "z": self.z,
                "strict": self.strict,
                "samples": c.estimate.samples,
            })
        } else {
            serde_json::json!({
                "label": self.label,
                "z": self.z,
                "strict": self.strict,
                "components": self.components,
            })
        }
    }
}

fn check_projection_form(tf: &StochasticTransform, prefix: &Path, n: u64) -> Result<()> {
    if !tf.target_window().is_singleton() {
        return Err(Error::NonSingletonTarget);
    }
    if prefix.window() != tf.source_window() {
        return Err(Error::SourceWindowMismatch);
    }
    if n < 2 {
        return Err(Error::NotEnoughSamples { min: 2, got: n });
    }
    Ok(())
}

/// Per-component conditional-expectation estimates of a projection's output,
/// prefix held fixed, replicate `i` on substream `i`.
fn conditional_estimates(
    tf: &StochasticTransform,
    prefix: &Path,
    n: u64,
    src: &RandomSource,
) -> Result<Vec<CondExpEstimate>> {
    check_projection_form(tf, prefix, n)?;
    let width = match prefix.kind() {
        StateKind::Scalar => 1,
        StateKind::Weights(q) => q,
    };
    let mut accs = vec![MeanVariance::new(); width];
    for i in 0..n {
        let out = tf.apply(prefix, &src.substream_index(i))?;
        match out.terminal() {
            StateValue::Scalar(x) => accs[0].push(*x),
            StateValue::Weights(w) => {
                if w.len() != width {
                    return Err(Error::DimensionMismatch {
                        expected: width,
                        actual: w.len(),
                    });
                }
                for (acc, &x) in accs.iter_mut().zip(w) {
                    acc.push(x);
                }
            }
        }
    }
    Ok(accs.iter().map(CondExpEstimate::from_acc).collect())
}

/// Conditional expectation of a projection's output given a scalar prefix.
pub fn cond_expectation(
    tf: &StochasticTransform,
    prefix: &Path,
    n: u64,
    src: &RandomSource,
) -> Result<CondExpEstimate> {
    if prefix.kind() != StateKind::Scalar {
        return Err(Error::UnsupportedState {
            kind: "cond_expectation",
            state: "weight-vector",
        });
    }
    Ok(conditional_estimates(tf, prefix, n, src)?.remove(0))
}

/// Conditional L^p norm of `g(output)`: `(E[g(Y)^p])^{1/p}` for `p >= 1`.
pub fn cond_lp_norm<G>(
    tf: &StochasticTransform,
    g: G,
    prefix: &Path,
    p: f64,
    n: u64,
    src: &RandomSource,
) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidNormOrder { p });
    }
    if prefix.kind() != StateKind::Scalar {
        return Err(Error::UnsupportedState {
            kind: "cond_lp_norm",
            state: "weight-vector",
        });
    }
    check_projection_form(tf, prefix, n)?;
    let mut acc = MeanVariance::new();
    for i in 0..n {
        let out = tf.apply(prefix, &src.substream_index(i))?;
        let y = out.terminal_scalar()?;
        acc.push(g(y).powf(p));
    }
    Ok(acc.mean().powf(1.0 / p))
}

fn classify_component(estimate: CondExpEstimate, reference: f64, z: f64) -> ComponentVerdict {
    let band = z * estimate.std_error;
    let (label, margin) = if !estimate.mean.is_finite() || !reference.is_finite() {
        (VerdictLabel::Indeterminate, 0.0)
    } else if estimate.mean + band < reference {
        (VerdictLabel::Supermartingale, reference - estimate.mean - band)
    } else if estimate.mean - band > reference {
        (VerdictLabel::Submartingale, estimate.mean - band - reference)
    } else {
        (VerdictLabel::MartingaleConsistent, 0.0)
    };
    let strict = matches!(
        label,
        VerdictLabel::Supermartingale | VerdictLabel::Submartingale
    );
    ComponentVerdict {
        label,
        estimate,
        reference,
        margin,
        strict,
    }
}

/// Classifies a projection at a prefix. The reference is the prefix's
/// terminal value; for weight-vector paths each component is classified
/// against its own terminal weight and the labels must agree.
pub fn classify_projection(
    tf: &StochasticTransform,
    prefix: &Path,
    n: u64,
    z: f64,
    src: &RandomSource,
) -> Result<ProjectionVerdict> {
    let estimates = conditional_estimates(tf, prefix, n, src)?;
    let references: Vec<f64> = match prefix.terminal() {
        StateValue::Scalar(x) => vec![*x],
        StateValue::Weights(w) => w.clone(),
    };
    let components: Vec<ComponentVerdict> = estimates
        .into_iter()
        .zip(references)
        .map(|(e, r)| classify_component(e, r, z))
        .collect();
    let label = if components.iter().all(|c| c.label == components[0].label) {
        components[0].label
    } else {
        VerdictLabel::Indeterminate
    };
    let strict = label != VerdictLabel::Indeterminate && components.iter().all(|c| c.strict);
    Ok(ProjectionVerdict {
        label,
        z,
        strict,
        components,
    })
}

/// Result of a boundedness probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundednessReport {
    /// Max over sampled prefixes and output points of the absolute
    /// conditional-mean estimate.
    pub sup_abs_mean: f64,
    pub prefixes: u64,
    pub samples_per_prefix: u64,
}

/// Samples scalar prefixes with sup-norm at most `bound` (i.i.d. uniform on
/// `[-bound, bound]` per grid point) and reports the largest absolute
/// pointwise conditional mean of the transform's output.
pub fn boundedness_probe(
    tf: &StochasticTransform,
    bound: f64,
    n_prefixes: u64,
    n: u64,
    src: &RandomSource,
) -> Result<BoundednessReport> {
    use rand::Rng;
    if n_prefixes < 1 || n < 2 {
        return Err(Error::NotEnoughSamples {
            min: 2,
            got: n.min(n_prefixes),
        });
    }
    let prefix_src = src.substream("prefixes");
    let mc_src = src.substream("estimates");
    let window = tf.source_window().clone();
    let mut sup = 0.0f64;
    for j in 0..n_prefixes {
        let mut rng = prefix_src.substream_index(j).rng();
        let values: Vec<f64> = (0..window.len())
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        let prefix = crate::grid::scalar_path(window.clone(), &values)?;
        let mut accs = vec![MeanVariance::new(); tf.target_window().len()];
        let replicate_src = mc_src.substream_index(j);
        for i in 0..n {
            let out = tf.apply(&prefix, &replicate_src.substream_index(i))?;
            for (acc, v) in accs.iter_mut().zip(out.values()) {
                match v {
                    StateValue::Scalar(x) => acc.push(*x),
                    StateValue::Weights(_) => {
                        return Err(Error::UnsupportedState {
                            kind: "boundedness_probe",
                            state: "weight-vector",
                        })
                    }
                }
            }
        }
        for acc in &accs {
            sup = sup.max(acc.mean().abs());
        }
    }
    Ok(BoundednessReport {
        sup_abs_mean: sup,
        prefixes: n_prefixes,
        samples_per_prefix: n,
    })
}

/// Scalar Markov dynamics: each grid step multiplies the state by a fresh
/// factor drawn from `law`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarkovFactorProcess {
    pub law: FactorLaw,
}

impl MarkovFactorProcess {
    /// Continuation of the process from the prefix terminal over `steps`
    /// grid steps, one fresh factor per step.
    fn continue_from(&self, terminal: f64, steps: usize, src: &RandomSource) -> f64 {
        let mut value = terminal;
        for s in 0..steps {
            value *= self.law.sample(&mut src.substream_index(s as u64).rng());
        }
        value
    }
}

/// Result of a law-consistency check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LawConsistencyReport {
    pub ks_stat: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Two-sample Kolmogorov–Smirnov comparison between `n` conditional
/// continuations of the process at time `u` and `n` outputs of the family's
/// projection onto `u`, both given the same prefix. Passes when the KS
/// statistic stays below the asymptotic 5% critical value.
pub fn law_consistency_check(
    process: &MarkovFactorProcess,
    family: &StochasticTransform,
    prefix: &Path,
    u: f64,
    n: u64,
    src: &RandomSource,
) -> Result<LawConsistencyReport> {
    process.law.validate()?;
    check_projection_form(family, prefix, n)?;
    if family.target_window().start_time() != u {
        return Err(Error::IncompatibleWindows {
            reason: format!("family target must be the singleton {{{u}}}"),
        });
    }
    let u_idx = prefix.window().grid().index_of(u)?;
    let end_idx = prefix.window().end_index();
    if u_idx <= end_idx {
        return Err(Error::IncompatibleWindows {
            reason: format!("u = {u} must lie strictly after the prefix end"),
        });
    }
    let steps = u_idx - end_idx;
    let terminal = prefix.terminal_scalar()?;
    let process_src = src.substream("process");
    let family_src = src.substream("family");
    let mut continuations = Vec::with_capacity(n as usize);
    let mut projections = Vec::with_capacity(n as usize);
    for i in 0..n {
        continuations
            .push(process.continue_from(terminal, steps, &process_src.substream_index(i)));
        let out = family.apply(prefix, &family_src.substream_index(i))?;
        projections.push(out.terminal_scalar()?);
    }
    let ks_stat = ks_statistic(&continuations, &projections);
    let threshold = ks_critical_value(n as usize, n as usize);
    Ok(LawConsistencyReport {
        ks_stat,
        threshold,
        pass: ks_stat < threshold,
    })
}
