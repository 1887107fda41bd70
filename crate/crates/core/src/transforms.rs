//! Stochastic path transformations.
//!
//! A [`StochasticTransform`] maps a path over its source window to a path
//! over its target window. Application is a pure function of the input path
//! and a [`RandomSource`]: replaying with an equal source reproduces the
//! output bitwise. Randomness enters only through the source, so conditional
//! expectations given the input path are plain averages over fresh
//! substreams with the input held fixed.
//!
//! Compositions run the stage list in forward order; stage `i` draws from
//! `src.substream_index(i)`. `compose` and `compose_chain` flatten nested
//! compositions into one stage list, which makes chain composition
//! associative including its randomness.

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::dynamics::{FactorLaw, SINE_DEMO_SUP};
use crate::error::{Error, Result};
use crate::grid::{make_path, Path, StateKind, StateValue, Window};
use crate::rng::RandomSource;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Law of a real-valued additive perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseLaw {
    Degenerate { c: f64 },
    Normal { mean: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
}

impl NoiseLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseLaw::Degenerate { c } => c.is_finite(),
            NoiseLaw::Normal { mean, sigma } => mean.is_finite() && sigma.is_finite() && sigma >= 0.0,
            NoiseLaw::Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidLaw {
                reason: format!("invalid noise law parameters: {self:?}"),
            })
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            NoiseLaw::Degenerate { c } => c,
            NoiseLaw::Normal { mean, .. } => mean,
            NoiseLaw::Uniform { a, b } => 0.5 * (a + b),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            NoiseLaw::Degenerate { c } => c,
            NoiseLaw::Normal { mean, sigma } => {
                if sigma == 0.0 {
                    mean
                } else {
                    Normal::new(mean, sigma).unwrap().sample(rng)
                }
            }
            NoiseLaw::Uniform { a, b } => Uniform::new(a, b).unwrap().sample(rng),
        }
    }
}

/// What a transform does. Windows live on the enclosing
/// [`StochasticTransform`]; constructors validate that kind and windows fit.
#[derive(Clone, Debug, PartialEq)]
pub enum TransformKind {
    /// Path-preserving transformation.
    Identity,
    /// Truncation onto a sub-window, values kept exactly.
    Restrict,
    /// Extension onto a super-window, holding the nearest endpoint value.
    ConstantExtend,
    /// Adds one draw of `law` at the terminal point (negated for the inverse).
    VerticalBump { law: NoiseLaw, negate: bool },
    /// Adds one draw of `law` at the interior point `tau_star` only.
    InteriorBump { law: NoiseLaw, tau_star: f64 },
    /// Extends the window by `alpha`, holding the terminal value constant.
    HorizontalStretch { alpha: f64 },
    /// Scales by one fresh factor per component; projection form when the
    /// target is a singleton (factor times the source terminal value).
    Multiplicative { law: FactorLaw },
    /// Piecewise demo: copies the tail of the source, then continues from the
    /// source terminal with a sine plus a randomly timed jump of size
    /// `Normal(0, epsilon_sigma^2)`.
    SineDemo { epsilon_sigma: f64 },
    /// Stage list applied in forward order; stage `i` uses substream `i`.
    Composed { stages: Vec<StochasticTransform> },
}

impl TransformKind {
    fn name(&self) -> &'static str {
        match self {
            TransformKind::Identity => "identity",
            TransformKind::Restrict => "restrict",
            TransformKind::ConstantExtend => "constant_extend",
            TransformKind::VerticalBump { .. } => "vertical_bump",
            TransformKind::InteriorBump { .. } => "interior_bump",
            TransformKind::HorizontalStretch { .. } => "horizontal_stretch",
            TransformKind::Multiplicative { .. } => "multiplicative",
            TransformKind::SineDemo { .. } => "sine_demo",
            TransformKind::Composed { .. } => "composed",
        }
    }
}

/// A path transformation between two windows of one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticTransform {
    kind: TransformKind,
    source: Window,
    target: Window,
}

impl StochasticTransform {
    /// Builds a transform, validating the windows against the kind.
    pub fn new(kind: TransformKind, source: Window, target: Window) -> Result<Self> {
        if source.grid() != target.grid() {
            return Err(Error::IncompatibleWindows {
                reason: "source and target must share one grid".into(),
            });
        }
        match &kind {
            TransformKind::Identity => {
                if source != target {
                    return Err(Error::IncompatibleWindows {
                        reason: "identity requires target == source".into(),
                    });
                }
            }
            TransformKind::Restrict => {
                if !source.contains(&target) {
                    return Err(Error::IncompatibleWindows {
                        reason: "restrict requires target ⊆ source".into(),
                    });
                }
            }
            TransformKind::ConstantExtend => {
                if !target.contains(&source) {
                    return Err(Error::IncompatibleWindows {
                        reason: "constant_extend requires source ⊆ target".into(),
                    });
                }
            }
            TransformKind::VerticalBump { law, .. } => {
                law.validate()?;
                if source != target {
                    return Err(Error::IncompatibleWindows {
                        reason: "vertical_bump requires target == source".into(),
                    });
                }
            }
            TransformKind::InteriorBump { law, tau_star } => {
                law.validate()?;
                if source != target {
                    return Err(Error::IncompatibleWindows {
                        reason: "interior_bump requires target == source".into(),
                    });
                }
                let idx = source.grid().index_of(*tau_star)?;
                if idx <= source.start_index() || idx >= source.end_index() {
                    return Err(Error::IncompatibleWindows {
                        reason: format!("tau_star = {tau_star} is not strictly interior"),
                    });
                }
            }
            TransformKind::HorizontalStretch { alpha } => {
                if !alpha.is_finite() || *alpha <= 0.0 {
                    return Err(Error::IncompatibleWindows {
                        reason: format!("stretch needs alpha > 0 (got {alpha})"),
                    });
                }
                if target.start_index() != source.start_index()
                    || target.end_index() <= source.end_index()
                    || target.end_time() != source.end_time() + alpha
                {
                    return Err(Error::IncompatibleWindows {
                        reason: "stretch target must extend the source by alpha on the grid".into(),
                    });
                }
            }
            TransformKind::Multiplicative { law } => {
                law.validate()?;
                if !(target.is_singleton() || target == source) {
                    return Err(Error::IncompatibleWindows {
                        reason: "multiplicative requires a singleton target or target == source"
                            .into(),
                    });
                }
            }
            TransformKind::SineDemo { epsilon_sigma } => {
                if !epsilon_sigma.is_finite() || *epsilon_sigma < 0.0 {
                    return Err(Error::InvalidLaw {
                        reason: format!("epsilon_sigma must be >= 0 (got {epsilon_sigma})"),
                    });
                }
                if source.end_time() != TWO_PI {
                    return Err(Error::IncompatibleWindows {
                        reason: "sine_demo source must end at 2π".into(),
                    });
                }
                if target.end_time() > SINE_DEMO_SUP {
                    return Err(Error::OutsideDemoRange {
                        value: target.end_time(),
                    });
                }
                if target.start_index() < source.start_index()
                    || target.start_index() > source.end_index()
                {
                    return Err(Error::IncompatibleWindows {
                        reason: "sine_demo target must start inside the source window".into(),
                    });
                }
            }
            TransformKind::Composed { stages } => {
                if stages.is_empty() {
                    return Err(Error::IncompatibleWindows {
                        reason: "composed transform needs at least one stage".into(),
                    });
                }
                if stages[0].source != source || stages.last().unwrap().target != target {
                    return Err(Error::IncompatibleWindows {
                        reason: "composed windows must match the stage endpoints".into(),
                    });
                }
                for (index, pair) in stages.windows(2).enumerate() {
                    if pair[0].target != pair[1].source {
                        return Err(Error::ChainMismatch { index });
                    }
                }
            }
        }
        Ok(Self { kind, source, target })
    }

    pub fn identity(window: &Window) -> Self {
        Self {
            kind: TransformKind::Identity,
            source: window.clone(),
            target: window.clone(),
        }
    }

    pub fn restrict_to(source: &Window, target: &Window) -> Result<Self> {
        Self::new(TransformKind::Restrict, source.clone(), target.clone())
    }

    pub fn constant_extend(source: &Window, target: &Window) -> Result<Self> {
        Self::new(TransformKind::ConstantExtend, source.clone(), target.clone())
    }

    pub fn vertical_bump(window: &Window, law: NoiseLaw) -> Result<Self> {
        Self::new(
            TransformKind::VerticalBump { law, negate: false },
            window.clone(),
            window.clone(),
        )
    }

    /// Bump that subtracts the draw instead of adding it; with a shared
    /// random source it inverts [`StochasticTransform::vertical_bump`].
    pub fn vertical_bump_inverse(window: &Window, law: NoiseLaw) -> Result<Self> {
        Self::new(
            TransformKind::VerticalBump { law, negate: true },
            window.clone(),
            window.clone(),
        )
    }

    pub fn interior_bump(window: &Window, law: NoiseLaw, tau_star: f64) -> Result<Self> {
        Self::new(
            TransformKind::InteriorBump { law, tau_star },
            window.clone(),
            window.clone(),
        )
    }

    /// Stretch by `alpha`; the target window is located on the grid, so
    /// `source.end_time() + alpha` must be a grid member.
    pub fn horizontal_stretch(source: &Window, alpha: f64) -> Result<Self> {
        let grid = source.grid();
        let end = grid.index_of(source.end_time() + alpha)?;
        let target = grid.window_by_index(source.start_index(), end)?;
        Self::new(TransformKind::HorizontalStretch { alpha }, source.clone(), target)
    }

    /// Projection onto the singleton `{target_time}`: one fresh factor per
    /// component times the source terminal value.
    pub fn multiplicative(source: &Window, law: FactorLaw, target_time: f64) -> Result<Self> {
        let target = source.grid().window(target_time, target_time)?;
        Self::new(TransformKind::Multiplicative { law }, source.clone(), target)
    }

    /// Whole-window variant: every point scaled by the same per-component factor.
    pub fn multiplicative_pointwise(window: &Window, law: FactorLaw) -> Result<Self> {
        Self::new(
            TransformKind::Multiplicative { law },
            window.clone(),
            window.clone(),
        )
    }

    pub fn sine_demo(source: &Window, target: &Window, epsilon_sigma: f64) -> Result<Self> {
        Self::new(
            TransformKind::SineDemo { epsilon_sigma },
            source.clone(),
            target.clone(),
        )
    }

    pub fn kind(&self) -> &TransformKind {
        &self.kind
    }

    pub fn source_window(&self) -> &Window {
        &self.source
    }

    pub fn target_window(&self) -> &Window {
        &self.target
    }

    /// JSON descriptor: kind, law parameters, and window bounds.
    pub fn to_json(&self) -> serde_json::Value {
        let kind = match &self.kind {
            TransformKind::Identity => serde_json::json!({"kind": "identity"}),
            TransformKind::Restrict => serde_json::json!({"kind": "restrict"}),
            TransformKind::ConstantExtend => serde_json::json!({"kind": "constant_extend"}),
            TransformKind::VerticalBump { law, negate } => {
                serde_json::json!({"kind": "vertical_bump", "law": law, "negate": negate})
            }
            TransformKind::InteriorBump { law, tau_star } => {
                serde_json::json!({"kind": "interior_bump", "law": law, "tau_star": tau_star})
            }
            TransformKind::HorizontalStretch { alpha } => {
                serde_json::json!({"kind": "horizontal_stretch", "alpha": alpha})
            }
            TransformKind::Multiplicative { law } => {
                serde_json::json!({"kind": "multiplicative", "law": law})
            }
            TransformKind::SineDemo { epsilon_sigma } => {
                serde_json::json!({"kind": "sine_demo", "epsilon_sigma": epsilon_sigma})
            }
            TransformKind::Composed { stages } => {
                let stages: Vec<_> = stages.iter().map(|s| s.to_json()).collect();
                serde_json::json!({"kind": "composed", "stages": stages})
            }
        };
        serde_json::json!({
            "transform": kind,
            "source": {"r": self.source.start_time(), "t": self.source.end_time()},
            "target": {"r": self.target.start_time(), "t": self.target.end_time()},
        })
    }

    /// Applies the transform to a path over its source window.
    pub fn apply(&self, x: &Path, src: &RandomSource) -> Result<Path> {
        if x.window() != &self.source {
            return Err(Error::SourceWindowMismatch);
        }
        match &self.kind {
            TransformKind::Identity => Ok(x.clone()),
            TransformKind::Restrict => x.restrict(&self.target),
            TransformKind::ConstantExtend => {
                let mut values = Vec::with_capacity(self.target.len());
                for offset in 0..self.target.len() {
                    let abs = self.target.start_index() + offset;
                    let v = if abs < self.source.start_index() {
                        x.value_at(0)
                    } else if abs > self.source.end_index() {
                        x.terminal()
                    } else {
                        x.value_at(abs - self.source.start_index())
                    };
                    values.push(v.clone());
                }
                make_path(self.target.clone(), values)
            }
            TransformKind::VerticalBump { law, negate } => {
                let last = x.window().len() - 1;
                self.bump_at(x, law, *negate, last, src)
            }
            TransformKind::InteriorBump { law, tau_star } => {
                let idx = self.source.grid().index_of(*tau_star)?;
                self.bump_at(x, law, false, idx - self.source.start_index(), src)
            }
            TransformKind::HorizontalStretch { .. } => {
                let mut values = x.values().to_vec();
                values.resize(self.target.len(), x.terminal().clone());
                make_path(self.target.clone(), values)
            }
            TransformKind::Multiplicative { law } => self.apply_multiplicative(x, law, src),
            TransformKind::SineDemo { epsilon_sigma } => {
                self.apply_sine_demo(x, *epsilon_sigma, src)
            }
            TransformKind::Composed { stages } => {
                let mut y = x.clone();
                for (i, stage) in stages.iter().enumerate() {
                    y = stage.apply(&y, &src.substream_index(i as u64))?;
                }
                Ok(y)
            }
        }
    }

    fn bump_at(
        &self,
        x: &Path,
        law: &NoiseLaw,
        negate: bool,
        offset: usize,
        src: &RandomSource,
    ) -> Result<Path> {
        let mut values = x.values().to_vec();
        let eps = law.sample(&mut src.rng());
        let eps = if negate { -eps } else { eps };
        match &mut values[offset] {
            StateValue::Scalar(v) => *v += eps,
            StateValue::Weights(_) => {
                return Err(Error::UnsupportedState {
                    kind: self.kind.name(),
                    state: "weight-vector",
                })
            }
        }
        make_path(self.target.clone(), values)
    }

    fn apply_multiplicative(&self, x: &Path, law: &FactorLaw, src: &RandomSource) -> Result<Path> {
        // One factor per component, drawn from the component's substream.
        let factor = |q: u64| law.sample(&mut src.substream_index(q).rng());
        let values = if self.target.is_singleton() {
            vec![match x.terminal() {
                StateValue::Scalar(v) => StateValue::Scalar(factor(0) * v),
                StateValue::Weights(w) => StateValue::Weights(
                    w.iter()
                        .enumerate()
                        .map(|(q, &v)| factor(q as u64) * v)
                        .collect(),
                ),
            }]
        } else {
            match x.kind() {
                StateKind::Scalar => {
                    let u = factor(0);
                    x.values()
                        .iter()
                        .map(|v| match v {
                            StateValue::Scalar(x) => StateValue::Scalar(u * x),
                            _ => unreachable!(),
                        })
                        .collect()
                }
                StateKind::Weights(q) => {
                    let us: Vec<f64> = (0..q as u64).map(factor).collect();
                    x.values()
                        .iter()
                        .map(|v| match v {
                            StateValue::Weights(w) => StateValue::Weights(
                                w.iter().zip(&us).map(|(x, u)| u * x).collect(),
                            ),
                            _ => unreachable!(),
                        })
                        .collect()
                }
            }
        };
        make_path(self.target.clone(), values)
    }

    fn apply_sine_demo(&self, x: &Path, epsilon_sigma: f64, src: &RandomSource) -> Result<Path> {
        if x.kind() != StateKind::Scalar {
            return Err(Error::UnsupportedState {
                kind: self.kind.name(),
                state: "weight-vector",
            });
        }
        let mut rng = src.rng();
        let eps = NoiseLaw::Normal {
            mean: 0.0,
            sigma: epsilon_sigma,
        }
        .sample(&mut rng);
        // Jump time: uniform over the target grid points at or after 2π.
        let tail: Vec<f64> = self
            .target
            .times()
            .iter()
            .copied()
            .filter(|&t| t >= TWO_PI)
            .collect();
        let tau = tail[rng.random_range(0..tail.len())];
        let terminal = x.terminal_scalar()?;
        let mut values = Vec::with_capacity(self.target.len());
        for offset in 0..self.target.len() {
            let t = self.target.time_at(offset);
            if t < TWO_PI {
                let abs = self.target.start_index() + offset;
                values.push(x.value_at(abs - self.source.start_index()).clone());
            } else {
                let jump = if tau <= t { eps } else { 0.0 };
                values.push(StateValue::Scalar(terminal + t.sin() + jump));
            }
        }
        make_path(self.target.clone(), values)
    }

    /// Re-anchors the transform onto a new source window, keeping its kind
    /// and parameters. Used to compare the two application orders of a pair
    /// of transforms, where the later transform must act on the earlier
    /// one's output window.
    pub(crate) fn rebind(&self, new_source: &Window) -> Result<Self> {
        match &self.kind {
            TransformKind::Identity => Ok(Self::identity(new_source)),
            TransformKind::Restrict => Self::restrict_to(new_source, &self.target),
            TransformKind::ConstantExtend => Self::constant_extend(new_source, &self.target),
            TransformKind::VerticalBump { law, negate } => Self::new(
                TransformKind::VerticalBump {
                    law: *law,
                    negate: *negate,
                },
                new_source.clone(),
                new_source.clone(),
            ),
            TransformKind::InteriorBump { law, tau_star } => Self::new(
                TransformKind::InteriorBump {
                    law: *law,
                    tau_star: *tau_star,
                },
                new_source.clone(),
                new_source.clone(),
            ),
            TransformKind::HorizontalStretch { alpha } => {
                Self::horizontal_stretch(new_source, *alpha)
            }
            TransformKind::Multiplicative { law } => {
                if self.target.is_singleton() {
                    Self::new(
                        TransformKind::Multiplicative { law: *law },
                        new_source.clone(),
                        self.target.clone(),
                    )
                } else {
                    Self::multiplicative_pointwise(new_source, *law)
                }
            }
            TransformKind::SineDemo { .. } | TransformKind::Composed { .. } => {
                Err(Error::IncompatibleWindows {
                    reason: format!("{} cannot be re-anchored", self.kind.name()),
                })
            }
        }
    }

    fn stages(self) -> Vec<StochasticTransform> {
        match self.kind {
            TransformKind::Composed { stages } => stages,
            _ => vec![self],
        }
    }
}

/// Sequential composition: `inner` first, then `outer`. Nested compositions
/// are flattened into one stage list.
pub fn compose(outer: StochasticTransform, inner: StochasticTransform) -> Result<StochasticTransform> {
    if inner.target != outer.source {
        return Err(Error::ChainMismatch { index: 0 });
    }
    let source = inner.source.clone();
    let target = outer.target.clone();
    let mut stages = inner.stages();
    stages.extend(outer.stages());
    StochasticTransform::new(TransformKind::Composed { stages }, source, target)
}

/// Composition of a forward-ordered stage list (stage 1 first).
pub fn compose_chain(stages: Vec<StochasticTransform>) -> Result<StochasticTransform> {
    let mut iter = stages.into_iter();
    let first = iter.next().ok_or_else(|| Error::IncompatibleWindows {
        reason: "composition chain must be nonempty".into(),
    })?;
    let mut acc = first;
    for next in iter {
        acc = compose(next, acc)?;
    }
    Ok(acc)
}

/// Outcome of comparing the two application orders of a pair of transforms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub equal: bool,
    /// First grid time where the two orderings differ, when they do.
    pub first_diff_time: Option<f64>,
}

/// Compares `t1 ∘ t2` against `t2 ∘ t1` on a fixed input, pointwise and
/// exactly. Each transform owns one substream and uses it in both orders, so
/// its realized randomness is shared across the two routes. The transform
/// applied second is re-anchored onto the first one's output window.
pub fn commutator_check(
    t1: &StochasticTransform,
    t2: &StochasticTransform,
    x: &Path,
    src: &RandomSource,
) -> Result<CommutatorReport> {
    let s1 = src.substream_index(0);
    let s2 = src.substream_index(1);

    // t1 ∘ t2: t2 first.
    let mid = t2.apply(x, &s2)?;
    let a = t1.rebind(t2.target_window())?.apply(&mid, &s1)?;

    // t2 ∘ t1: t1 first.
    let mid = t1.apply(x, &s1)?;
    let b = t2.rebind(t1.target_window())?.apply(&mid, &s2)?;

    if a.window() != b.window() {
        return Err(Error::IncompatibleWindows {
            reason: "the two orderings produce different target windows".into(),
        });
    }
    let mut first_diff_time = None;
    for offset in 0..a.window().len() {
        if a.value_at(offset) != b.value_at(offset) {
            first_diff_time = Some(a.window().time_at(offset));
            break;
        }
    }
    Ok(CommutatorReport {
        equal: first_diff_time.is_none(),
        first_diff_time,
    })
}

/// True when `inv` undoes `fwd` exactly on this input. Both transforms are
/// applied with the same source, so the inverse can replay the forward
/// transform's realized draws.
pub fn invertibility_check(
    fwd: &StochasticTransform,
    inv: &StochasticTransform,
    x: &Path,
    src: &RandomSource,
) -> Result<bool> {
    if inv.source != fwd.target || inv.target != fwd.source {
        return Err(Error::IncompatibleWindows {
            reason: "inverse windows must mirror the forward windows".into(),
        });
    }
    let y = fwd.apply(x, src)?;
    let back = inv.apply(&y, src)?;
    Ok(back == *x)
}

/// Result of a Hölder-continuity probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderReport {
    /// Max observed ratio `D(Γx, Γx*) / D(x, x*)^alpha` over the sampled pairs.
    pub k_hat: f64,
    /// Pairs whose ratio exceeded the caller's bound.
    pub violations: u64,
    /// Pairs skipped because the inputs coincided (zero denominator).
    pub skipped: u64,
}

/// Samples `n` input pairs, transforms each pair with shared randomness, and
/// measures sup-distance expansion ratios at exponent `alpha`.
pub fn holder_probe<F>(
    tf: &StochasticTransform,
    mut pair_sampler: F,
    alpha: f64,
    k_bound: f64,
    n: u64,
    src: &RandomSource,
) -> Result<HolderReport>
where
    F: FnMut(&RandomSource) -> Result<(Path, Path)>,
{
    if n < 1 {
        return Err(Error::NotEnoughSamples { min: 1, got: n });
    }
    let pair_src = src.substream("pairs");
    let tf_src = src.substream("transform");
    let mut k_hat = 0.0f64;
    let mut violations = 0u64;
    let mut skipped = 0u64;
    for i in 0..n {
        let (x, x_star) = pair_sampler(&pair_src.substream_index(i))?;
        let d_in = x.sup_distance(&x_star)?;
        if d_in == 0.0 {
            skipped += 1;
            continue;
        }
        let s = tf_src.substream_index(i);
        let y = tf.apply(&x, &s)?;
        let y_star = tf.apply(&x_star, &s)?;
        let ratio = y.sup_distance(&y_star)? / d_in.powf(alpha);
        k_hat = k_hat.max(ratio);
        if ratio > k_bound {
            violations += 1;
        }
    }
    Ok(HolderReport {
        k_hat,
        violations,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, scalar_path, TimeGrid};

    fn grid5() -> TimeGrid {
        make_grid(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    fn const_path(window: &Window, v: f64) -> Path {
        scalar_path(window.clone(), &vec![v; window.len()]).unwrap()
    }

    fn scalar_values(p: &Path) -> Vec<f64> {
        p.values()
            .iter()
            .map(|v| match v {
                StateValue::Scalar(x) => *x,
                _ => panic!("scalar path expected"),
            })
            .collect()
    }

    #[test]
    fn identity_preserves_every_path() {
        let g = grid5();
        let w = g.window(0.0, 3.0).unwrap();
        let id = StochasticTransform::identity(&w);
        let src = RandomSource::from_seed(4);
        for seed in 0..20 {
            let vals: Vec<f64> = (0..w.len()).map(|i| (seed * 31 + i) as f64 * 0.7 - 3.0).collect();
            let p = scalar_path(w.clone(), &vals).unwrap();
            assert_eq!(id.apply(&p, &src).unwrap(), p);
        }
    }

    #[test]
    fn vertical_bump_hits_terminal_only() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let tf =
            StochasticTransform::vertical_bump(&w, NoiseLaw::Degenerate { c: 1.0 }).unwrap();
        let out = tf.apply(&const_path(&w, 0.0), &RandomSource::from_seed(0)).unwrap();
        assert_eq!(scalar_values(&out), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn interior_bump_hits_tau_only() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let tf =
            StochasticTransform::interior_bump(&w, NoiseLaw::Degenerate { c: 2.0 }, 1.0).unwrap();
        let out = tf.apply(&const_path(&w, 0.0), &RandomSource::from_seed(0)).unwrap();
        assert_eq!(scalar_values(&out), vec![0.0, 2.0, 0.0]);

        assert!(StochasticTransform::interior_bump(&w, NoiseLaw::Degenerate { c: 2.0 }, 0.0)
            .is_err());
        assert!(StochasticTransform::interior_bump(&w, NoiseLaw::Degenerate { c: 2.0 }, 2.0)
            .is_err());
    }

    #[test]
    fn stretch_appends_terminal_value() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let tf = StochasticTransform::horizontal_stretch(&w, 1.0).unwrap();
        let p = scalar_path(w.clone(), &[1.0, 3.0, 5.0]).unwrap();
        let out = tf.apply(&p, &RandomSource::from_seed(0)).unwrap();
        assert_eq!(scalar_values(&out), vec![1.0, 3.0, 5.0, 5.0]);
        assert_eq!(out.window().end_time(), 3.0);

        // alpha must land on the grid.
        assert!(StochasticTransform::horizontal_stretch(&w, 0.5).is_err());
        let w_end = g.window(2.0, 4.0).unwrap();
        assert!(StochasticTransform::horizontal_stretch(&w_end, 1.0).is_err());
    }

    #[test]
    fn multiplicative_projection_uses_terminal() {
        let g = grid5();
        let w = g.window(0.0, 1.0).unwrap();
        let law = FactorLaw::degenerate(1.0).unwrap();
        let tf = StochasticTransform::multiplicative(&w, law, 2.0).unwrap();
        let p = scalar_path(w.clone(), &[7.0, 2.0]).unwrap();
        let out = tf.apply(&p, &RandomSource::from_seed(0)).unwrap();
        assert!(out.window().is_singleton());
        assert_eq!(scalar_values(&out), vec![2.0]);
    }

    #[test]
    fn apply_rejects_window_mismatch() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let other = g.window(1.0, 3.0).unwrap();
        let tf = StochasticTransform::identity(&w);
        let p = const_path(&other, 1.0);
        assert!(matches!(
            tf.apply(&p, &RandomSource::from_seed(0)),
            Err(Error::SourceWindowMismatch)
        ));
    }

    #[test]
    fn seed_determinism_across_builtin_kinds() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let normal = NoiseLaw::Normal { mean: 0.0, sigma: 1.0 };
        let law = FactorLaw::uniform(0.5, 1.5).unwrap();
        let builtins = vec![
            StochasticTransform::identity(&w),
            StochasticTransform::vertical_bump(&w, normal).unwrap(),
            StochasticTransform::interior_bump(&w, normal, 1.0).unwrap(),
            StochasticTransform::horizontal_stretch(&w, 1.0).unwrap(),
            StochasticTransform::multiplicative(&w, law, 3.0).unwrap(),
            StochasticTransform::multiplicative_pointwise(&w, law).unwrap(),
        ];
        let base = RandomSource::from_seed(77);
        for tf in &builtins {
            for i in 0..100 {
                let src = base.substream_index(i);
                let mut rng = src.substream("input").rng();
                let vals: Vec<f64> = (0..w.len()).map(|_| rng.random_range(-5.0..5.0)).collect();
                let p = scalar_path(w.clone(), &vals).unwrap();
                let a = tf.apply(&p, &src).unwrap();
                let b = tf.apply(&p, &src).unwrap();
                assert_eq!(a, b, "kind {} not deterministic", tf.kind().name());
            }
        }
    }

    #[test]
    fn compose_with_identity_is_transparent() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let bump =
            StochasticTransform::vertical_bump(&w, NoiseLaw::Normal { mean: 0.0, sigma: 1.0 })
                .unwrap();
        let id = StochasticTransform::identity(&w);
        let composed = compose(id, bump.clone()).unwrap();
        for seed in 0..20 {
            let src = RandomSource::from_seed(seed);
            let p = const_path(&w, 0.5);
            // Identity consumes no randomness, so only the bump stage's
            // substream matters.
            let direct = bump.apply(&p, &src.substream_index(0)).unwrap();
            assert_eq!(composed.apply(&p, &src).unwrap(), direct);
        }
    }

    #[test]
    fn composition_replay_equality() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let normal = NoiseLaw::Normal { mean: 0.0, sigma: 1.0 };
        let bump = StochasticTransform::vertical_bump(&w, normal).unwrap();
        let stretch = StochasticTransform::horizontal_stretch(&w, 1.0).unwrap();
        let wide = stretch.target_window().clone();
        let bump_wide = StochasticTransform::vertical_bump(&wide, normal).unwrap();

        let p = scalar_path(w.clone(), &[0.25, -1.0, 2.0]).unwrap();
        let src = RandomSource::from_seed(13);

        // K = 2: composed application equals the two-step replay with the
        // documented stage substreams.
        let two = compose(stretch.clone(), bump.clone()).unwrap();
        let replay2 = stretch
            .apply(&bump.apply(&p, &src.substream_index(0)).unwrap(), &src.substream_index(1))
            .unwrap();
        assert_eq!(two.apply(&p, &src).unwrap(), replay2);

        // K = 3 chain equals both nestings of two-fold composition.
        let chain = compose_chain(vec![bump.clone(), stretch.clone(), bump_wide.clone()]).unwrap();
        let nested_a = compose(bump_wide.clone(), compose(stretch.clone(), bump.clone()).unwrap())
            .unwrap();
        let nested_b = compose(compose(bump_wide.clone(), stretch.clone()).unwrap(), bump.clone())
            .unwrap();
        let out = chain.apply(&p, &src).unwrap();
        assert_eq!(out, nested_a.apply(&p, &src).unwrap());
        assert_eq!(out, nested_b.apply(&p, &src).unwrap());
        let replay3 = bump_wide
            .apply(
                &stretch
                    .apply(&bump.apply(&p, &src.substream_index(0)).unwrap(), &src.substream_index(1))
                    .unwrap(),
                &src.substream_index(2),
            )
            .unwrap();
        assert_eq!(out, replay3);
    }

    #[test]
    fn compose_rejects_window_chain_mismatch() {
        let g = grid5();
        let w1 = g.window(0.0, 2.0).unwrap();
        let w2 = g.window(1.0, 3.0).unwrap();
        let a = StochasticTransform::identity(&w1);
        let b = StochasticTransform::identity(&w2);
        assert!(matches!(compose(b, a), Err(Error::ChainMismatch { .. })));
    }

    #[test]
    fn terminal_bump_and_stretch_do_not_commute() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let bump =
            StochasticTransform::vertical_bump(&w, NoiseLaw::Degenerate { c: 1.0 }).unwrap();
        let stretch = StochasticTransform::horizontal_stretch(&w, 2.0).unwrap();
        let p = const_path(&w, 0.0);
        let report = commutator_check(&bump, &stretch, &p, &RandomSource::from_seed(0)).unwrap();
        assert!(!report.equal);
        // bump-then-stretch carries the bump onto the plateau; the other
        // order bumps only the final point, so they first differ at t = 2.
        assert_eq!(report.first_diff_time, Some(2.0));
    }

    #[test]
    fn interior_bump_and_stretch_commute() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let bump = StochasticTransform::interior_bump(
            &w,
            NoiseLaw::Normal { mean: 0.0, sigma: 2.0 },
            1.0,
        )
        .unwrap();
        let stretch = StochasticTransform::horizontal_stretch(&w, 2.0).unwrap();
        let p = scalar_path(w.clone(), &[0.5, -0.25, 4.0]).unwrap();
        let report = commutator_check(&bump, &stretch, &p, &RandomSource::from_seed(9)).unwrap();
        assert!(report.equal);
        assert_eq!(report.first_diff_time, None);
    }

    #[test]
    fn identity_commutes_with_itself() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let id = StochasticTransform::identity(&w);
        let p = const_path(&w, 3.0);
        let report = commutator_check(&id, &id, &p, &RandomSource::from_seed(0)).unwrap();
        assert!(report.equal);
    }

    #[test]
    fn bump_inverse_round_trips() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let normal = NoiseLaw::Normal { mean: 0.0, sigma: 1.5 };
        let fwd = StochasticTransform::vertical_bump(&w, normal).unwrap();
        let inv = StochasticTransform::vertical_bump_inverse(&w, normal).unwrap();
        let p = scalar_path(w.clone(), &[1.0, 2.0, 3.0]).unwrap();
        assert!(invertibility_check(&fwd, &inv, &p, &RandomSource::from_seed(5)).unwrap());
    }

    #[test]
    fn stretch_then_restrict_round_trips() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let fwd = StochasticTransform::horizontal_stretch(&w, 2.0).unwrap();
        let inv = StochasticTransform::restrict_to(fwd.target_window(), &w).unwrap();
        let p = scalar_path(w.clone(), &[1.0, -2.0, 0.5]).unwrap();
        assert!(invertibility_check(&fwd, &inv, &p, &RandomSource::from_seed(5)).unwrap());
    }

    #[test]
    fn endpoint_projection_is_not_invertible() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let law = FactorLaw::degenerate(1.0).unwrap();
        let fwd = StochasticTransform::multiplicative(&w, law, 2.0).unwrap();
        let candidate =
            StochasticTransform::constant_extend(fwd.target_window(), &w).unwrap();
        let p = scalar_path(w.clone(), &[1.0, 2.0, 3.0]).unwrap();
        assert!(!invertibility_check(&fwd, &candidate, &p, &RandomSource::from_seed(5)).unwrap());

        let wrong = StochasticTransform::identity(&w);
        assert!(invertibility_check(&fwd, &wrong, &p, &RandomSource::from_seed(5)).is_err());
    }

    fn uniform_pair_sampler(
        window: &Window,
    ) -> impl FnMut(&RandomSource) -> Result<(Path, Path)> + '_ {
        move |src: &RandomSource| {
            let mut rng = src.rng();
            let a: Vec<f64> = (0..window.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..window.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
            Ok((scalar_path(window.clone(), &a)?, scalar_path(window.clone(), &b)?))
        }
    }

    #[test]
    fn holder_probe_identity_and_scaling() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let src = RandomSource::from_seed(3);

        let id = StochasticTransform::identity(&w);
        let rep = holder_probe(&id, uniform_pair_sampler(&w), 1.0, 1.0 + 1e-12, 200, &src).unwrap();
        assert!((rep.k_hat - 1.0).abs() < 1e-12);
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.skipped, 0);

        let law = FactorLaw::degenerate(2.5).unwrap();
        let scale = StochasticTransform::multiplicative_pointwise(&w, law).unwrap();
        let rep = holder_probe(&scale, uniform_pair_sampler(&w), 1.0, 2.5 + 1e-9, 200, &src).unwrap();
        assert!((rep.k_hat - 2.5).abs() < 1e-9, "k_hat = {}", rep.k_hat);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn holder_probe_bump_with_shared_draw() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let tf =
            StochasticTransform::vertical_bump(&w, NoiseLaw::Normal { mean: 0.0, sigma: 1.0 })
                .unwrap();
        let rep = holder_probe(
            &tf,
            uniform_pair_sampler(&w),
            1.0,
            1.0 + 1e-9,
            200,
            &RandomSource::from_seed(8),
        )
        .unwrap();
        // The shared additive draw cancels in the difference.
        assert!((rep.k_hat - 1.0).abs() < 1e-9);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn sine_demo_piecewise_semantics() {
        use crate::dynamics::sine_demo_grid;
        let pi = std::f64::consts::PI;
        let g = sine_demo_grid(2).unwrap(); // 0, π/2, π, 3π/2, 2π, 5π/2, 3π
        let source = g.window(0.0, 2.0 * pi).unwrap();
        let target = g.window(pi, 3.0 * pi).unwrap();
        let vals = [0.1, -0.4, 0.9, 1.3, 2.0];
        let x = scalar_path(source.clone(), &vals).unwrap();

        // Zero jump size: the tail is exactly X_{2π} + sin(t).
        let quiet = StochasticTransform::sine_demo(&source, &target, 0.0).unwrap();
        let out = quiet.apply(&x, &RandomSource::from_seed(0)).unwrap();
        let got = scalar_values(&out);
        assert_eq!(got[0], 0.9); // copies X_π
        assert_eq!(got[1], 1.3); // copies X_{3π/2}
        for (offset, v) in got.iter().enumerate().skip(2) {
            let t = target.time_at(offset);
            assert_eq!(*v, 2.0 + t.sin());
        }

        // Nonzero jump: the difference against the quiet output is zero up
        // to the jump time and one constant afterwards.
        let noisy = StochasticTransform::sine_demo(&source, &target, 1.0).unwrap();
        let src = RandomSource::from_seed(21);
        let out_n = noisy.apply(&x, &src).unwrap();
        assert_eq!(out_n, noisy.apply(&x, &src).unwrap());
        let diffs: Vec<f64> = scalar_values(&out_n)
            .iter()
            .zip(&got)
            .map(|(a, b)| a - b)
            .collect();
        assert_eq!(diffs[0], 0.0);
        assert_eq!(diffs[1], 0.0);
        let tail: Vec<f64> = diffs[2..].iter().copied().filter(|d| *d != 0.0).collect();
        assert!(!tail.is_empty(), "jump time can be any tail point");
        assert!(
            tail.iter().all(|d| (d - tail[0]).abs() < 1e-12),
            "single jump of constant size: {tail:?}"
        );

        // Source must end at 2π.
        let bad_source = g.window(0.0, pi).unwrap();
        assert!(StochasticTransform::sine_demo(&bad_source, &target, 0.5).is_err());
    }

    #[test]
    fn holder_probe_counts_degenerate_pairs() {
        let g = grid5();
        let w = g.window(0.0, 2.0).unwrap();
        let id = StochasticTransform::identity(&w);
        let sampler = |_: &RandomSource| {
            let p = scalar_path(w.clone(), &[1.0, 1.0, 1.0])?;
            Ok((p.clone(), p))
        };
        let rep = holder_probe(&id, sampler, 1.0, 10.0, 5, &RandomSource::from_seed(0)).unwrap();
        assert_eq!(rep.skipped, 5);
        assert_eq!(rep.k_hat, 0.0);
    }
}
