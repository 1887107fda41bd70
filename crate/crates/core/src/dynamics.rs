//! Canonical stochastic dynamics driving the experiments.
//!
//! Two generators live here: a Gaussian-plus-sine demonstration path
//! (`sin(t) + W_t` with `W` a discretized Brownian motion), and nonnegative
//! weight vectors evolved by independent multiplicative factors. The factor
//! law's mean decides the regime: mean below one gives supermartingale
//! components, one gives martingales, above one gives submartingales.
//!
//! Weights are deliberately not normalized to sum to one: the certification
//! arguments need the components to be stochastically independent, and exact
//! normalization is incompatible with independent strictly-super/sub-
//! martingale components.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_weights, make_grid, scalar_path, Path, TimeGrid};
use crate::rng::RandomSource;

/// Upper bound of the sine-demo time range, `3π`.
pub const SINE_DEMO_SUP: f64 = 3.0 * std::f64::consts::PI;

/// Law of one nonnegative multiplicative factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorLaw {
    Uniform { a: f64, b: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Degenerate { c: f64 },
}

impl FactorLaw {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let law = FactorLaw::Uniform { a, b };
        law.validate()?;
        Ok(law)
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        let law = FactorLaw::Lognormal { mu, sigma };
        law.validate()?;
        Ok(law)
    }

    pub fn degenerate(c: f64) -> Result<Self> {
        let law = FactorLaw::Degenerate { c };
        law.validate()?;
        Ok(law)
    }

    /// Checks support and parameter constraints (support must be in `[0, ∞)`).
    pub fn validate(&self) -> Result<()> {
        match *self {
            FactorLaw::Uniform { a, b } => {
                if !a.is_finite() || !b.is_finite() || a < 0.0 {
                    Err(Error::InvalidLaw {
                        reason: format!("uniform bounds must be finite with a >= 0 (a = {a}, b = {b})"),
                    })
                } else if a >= b {
                    Err(Error::InvalidLaw {
                        reason: format!("uniform bounds inverted or equal (a = {a}, b = {b})"),
                    })
                } else {
                    Ok(())
                }
            }
            FactorLaw::Lognormal { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
                    Err(Error::InvalidLaw {
                        reason: format!("lognormal needs finite mu and sigma > 0 (mu = {mu}, sigma = {sigma})"),
                    })
                } else {
                    Ok(())
                }
            }
            FactorLaw::Degenerate { c } => {
                if !c.is_finite() || c < 0.0 {
                    Err(Error::InvalidLaw {
                        reason: format!("degenerate value must be finite and >= 0 (c = {c})"),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Closed-form mean.
    pub fn mean(&self) -> f64 {
        match *self {
            FactorLaw::Uniform { a, b } => 0.5 * (a + b),
            FactorLaw::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            FactorLaw::Degenerate { c } => c,
        }
    }

    /// Closed-form variance.
    pub fn variance(&self) -> f64 {
        match *self {
            FactorLaw::Uniform { a, b } => (b - a) * (b - a) / 12.0,
            FactorLaw::Lognormal { mu, sigma } => {
                let s2 = sigma * sigma;
                (s2.exp() - 1.0) * (2.0 * mu + s2).exp()
            }
            FactorLaw::Degenerate { .. } => 0.0,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, FactorLaw::Degenerate { .. })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            FactorLaw::Uniform { a, b } => Uniform::new(a, b).unwrap().sample(rng),
            FactorLaw::Lognormal { mu, sigma } => LogNormal::new(mu, sigma).unwrap().sample(rng),
            FactorLaw::Degenerate { c } => c,
        }
    }
}

/// Per-outcome weights over a grid, one nonnegative vector per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTrajectory {
    outcomes: usize,
    grid: TimeGrid,
    weights: Vec<Vec<f64>>,
}

impl WeightTrajectory {
    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Weight vector at grid index `k`.
    pub fn weights_at(&self, k: usize) -> &[f64] {
        &self.weights[k]
    }

    pub fn steps(&self) -> usize {
        self.weights.len() - 1
    }

    /// Long-format CSV: `time,q,value`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("time,q,value\n");
        for (k, w) in self.weights.iter().enumerate() {
            let t = self.grid.times()[k];
            for (q, x) in w.iter().enumerate() {
                let _ = writeln!(out, "{t},{},{x}", q + 1);
            }
        }
        out
    }
}

/// Grid for the sine demo: three π-length segments of `[0, 3π]`, each with
/// `points_per_segment` points, plus the final endpoint. The segment anchors
/// `0, π, 2π, 3π` are exact grid members.
pub fn sine_demo_grid(points_per_segment: usize) -> Result<TimeGrid> {
    if points_per_segment < 1 {
        return Err(Error::Config(
            "points_per_segment must be >= 1".to_string(),
        ));
    }
    let pi = std::f64::consts::PI;
    let anchors = [0.0, pi, 2.0 * pi, 3.0 * pi];
    let mut times = Vec::with_capacity(3 * points_per_segment + 1);
    for seg in 0..3 {
        let (a, b) = (anchors[seg], anchors[seg + 1]);
        for j in 0..points_per_segment {
            times.push(a + (b - a) * j as f64 / points_per_segment as f64);
        }
    }
    times.push(anchors[3]);
    make_grid(&times)
}

/// Demo path `X_t = sin(t) + W_t` over the full grid, with `W` a discretized
/// Brownian motion started from zero at time zero.
pub fn gaussian_sine_path(grid: &TimeGrid, src: &RandomSource) -> Result<Path> {
    if grid.sup() > SINE_DEMO_SUP {
        return Err(Error::OutsideDemoRange { value: grid.sup() });
    }
    let mut rng = src.rng();
    let mut w = 0.0;
    let mut prev_t = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid.times() {
        let dt = t - prev_t;
        if dt > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            w += z * dt.sqrt();
        }
        values.push(t.sin() + w);
        prev_t = t;
    }
    scalar_path(grid.full_window(), &values)
}

/// One multiplicative step: component `q` is scaled by an independent fresh
/// draw from `law`, using the per-component substream `q`.
pub fn multiplicative_weight_step(
    weights: &[f64],
    law: &FactorLaw,
    src: &RandomSource,
) -> Result<Vec<f64>> {
    check_weights(weights)?;
    law.validate()?;
    Ok(weights
        .iter()
        .enumerate()
        .map(|(q, &w)| w * law.sample(&mut src.substream_index(q as u64).rng()))
        .collect())
}

/// Iterates [`multiplicative_weight_step`] over the grid; step `k` (the move
/// onto grid point `k`) uses substream index `k`.
pub fn simulate_weight_trajectory(
    outcomes: usize,
    grid: &TimeGrid,
    law: &FactorLaw,
    initial: &[f64],
    src: &RandomSource,
) -> Result<WeightTrajectory> {
    if initial.len() != outcomes {
        return Err(Error::DimensionMismatch {
            expected: outcomes,
            actual: initial.len(),
        });
    }
    check_weights(initial)?;
    law.validate()?;
    let mut weights = Vec::with_capacity(grid.len());
    weights.push(initial.to_vec());
    for k in 1..grid.len() {
        let next = multiplicative_weight_step(
            weights.last().unwrap(),
            law,
            &src.substream_index(k as u64),
        )?;
        weights.push(next);
    }
    Ok(WeightTrajectory {
        outcomes,
        grid: grid.clone(),
        weights,
    })
}
