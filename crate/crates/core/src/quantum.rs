//! Pure states from weights and phases, density-matrix views, Shannon–Wiener
//! information, and per-step certification of the decoherence and
//! information-gain inequalities.
//!
//! A phase-homogeneous pure state over `Q` outcomes is described by
//! nonnegative weights `π_q` and fixed phases `θ_q`. Its density coordinates
//! are `√(π_i π_j)·exp(i(θ_i − θ_j))`, so the off-diagonal magnitudes
//! `√(π_i π_j)` and the information `Σ π_q ln π_q` depend on the weights
//! alone. Under multiplicative weight dynamics with independent
//! per-component factors, the expected next-step off-diagonal magnitude
//! factorizes into a product of per-component means of `√π`, which is what
//! the decoherence check estimates.
//!
//! Certification is statistical: an inequality counts as certified only when
//! it holds with a margin of three standard errors of the Monte-Carlo
//! estimate. Zero-variance (degenerate) laws are flagged; their equality
//! cases are reported, never silently passed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::CondExpEstimate;
use crate::dynamics::{multiplicative_weight_step, simulate_weight_trajectory, FactorLaw};
use crate::error::{Error, Result};
use crate::grid::{check_weights, TimeGrid};
use crate::rng::RandomSource;
use crate::stats::MeanVariance;

/// Certification margin multiplier: strict inequalities must clear 3·SE.
pub const CERTIFICATION_Z: f64 = 3.0;

/// Tolerance for deciding whether a law's mean sits at one.
const MEAN_TOL: f64 = 1e-9;

/// Weights and fixed phases of a phase-homogeneous pure state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PureStateSnapshot {
    weights: Vec<f64>,
    phases: Vec<f64>,
}

impl PureStateSnapshot {
    pub fn new(weights: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        if phases.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                actual: phases.len(),
            });
        }
        if let Some(&bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidLaw {
                reason: format!("phases must be finite (got {bad})"),
            });
        }
        Ok(Self { weights, phases })
    }

    pub fn outcomes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

/// Density-matrix coordinates and their magnitudes in the observable basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityView {
    pub coords: Vec<Vec<Complex64>>,
    pub magnitudes: Vec<Vec<f64>>,
}

impl DensityView {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize, j: usize) -> Complex64 {
        self.coords[i][j]
    }

    pub fn magnitude(&self, i: usize, j: usize) -> f64 {
        self.magnitudes[i][j]
    }
}

/// Density coordinates `√(π_i π_j)·exp(i(θ_i − θ_j))`. The lower triangle is
/// filled with explicit conjugates, so Hermitian symmetry is exact.
pub fn density_coordinates(state: &PureStateSnapshot) -> DensityView {
    let q = state.outcomes();
    let mags = magnitudes(state.weights()).expect("weights validated at construction");
    let mut coords = vec![vec![Complex64::ZERO; q]; q];
    for i in 0..q {
        for j in i..q {
            let z = Complex64::from_polar(mags[i][j], state.phases[i] - state.phases[j]);
            coords[i][j] = z;
            coords[j][i] = z.conj();
        }
    }
    DensityView {
        coords,
        magnitudes: mags,
    }
}

/// Magnitude matrix: entry `(i, j)` is `√(π_i π_j)`.
pub fn magnitudes(weights: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_weights(weights)?;
    Ok(weights
        .iter()
        .map(|wi| weights.iter().map(|wj| (wi * wj).sqrt()).collect())
        .collect())
}

/// Shannon–Wiener information `Σ_q π_q ln π_q` in nats (negative Shannon
/// entropy), with the convention `0·ln 0 = 0`.
pub fn shannon_wiener(weights: &[f64]) -> Result<f64> {
    check_weights(weights)?;
    Ok(weights
        .iter()
        .map(|&w| if w > 0.0 { w * w.ln() } else { 0.0 })
        .sum())
}

/// Monte-Carlo estimates of the expected next-step off-diagonal magnitudes
/// given the previous weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OffDiagEstimate {
    /// Per-component estimates of `E[√π_q | prev]`.
    pub sqrt_means: Vec<CondExpEstimate>,
    /// Factorized estimate: product of the per-component means (the
    /// components evolve on independent substreams).
    pub product: Vec<Vec<f64>>,
    /// Delta-method standard error of each product entry.
    pub product_std_error: Vec<Vec<f64>>,
    /// Direct estimate of `E[√(π_i π_j) | prev]`, an independence check.
    pub joint: Vec<Vec<f64>>,
    pub joint_std_error: Vec<Vec<f64>>,
}

/// Estimates the expected off-diagonal magnitudes after one multiplicative
/// step from `prev_weights`; replicate `i` draws on substream `i`.
pub fn expected_offdiag_step(
    prev_weights: &[f64],
    law: &FactorLaw,
    n: u64,
    src: &RandomSource,
) -> Result<OffDiagEstimate> {
    check_weights(prev_weights)?;
    law.validate()?;
    if n < 2 {
        return Err(Error::NotEnoughSamples { min: 2, got: n });
    }
    let q = prev_weights.len();
    let mut sqrt_accs = vec![MeanVariance::new(); q];
    let mut joint_accs = vec![vec![MeanVariance::new(); q]; q];
    for i in 0..n {
        let next = multiplicative_weight_step(prev_weights, law, &src.substream_index(i))?;
        let roots: Vec<f64> = next.iter().map(|w| w.sqrt()).collect();
        for (acc, &r) in sqrt_accs.iter_mut().zip(&roots) {
            acc.push(r);
        }
        for a in 0..q {
            for b in 0..q {
                joint_accs[a][b].push((next[a] * next[b]).sqrt());
            }
        }
    }
    let sqrt_means: Vec<CondExpEstimate> = sqrt_accs
        .iter()
        .map(|acc| CondExpEstimate {
            mean: acc.mean(),
            std_error: acc.std_error(),
            samples: acc.count(),
        })
        .collect();
    let mut product = vec![vec![0.0; q]; q];
    let mut product_se = vec![vec![0.0; q]; q];
    let mut joint = vec![vec![0.0; q]; q];
    let mut joint_se = vec![vec![0.0; q]; q];
    for a in 0..q {
        for b in 0..q {
            let (ma, sa) = (sqrt_means[a].mean, sqrt_means[a].std_error);
            let (mb, sb) = (sqrt_means[b].mean, sqrt_means[b].std_error);
            product[a][b] = ma * mb;
            product_se[a][b] = ((mb * sa).powi(2) + (ma * sb).powi(2)).sqrt();
            joint[a][b] = joint_accs[a][b].mean();
            joint_se[a][b] = joint_accs[a][b].std_error();
        }
    }
    Ok(OffDiagEstimate {
        sqrt_means,
        product,
        product_std_error: product_se,
        joint,
        joint_std_error: joint_se,
    })
}

/// Monte-Carlo estimate of the expected next-step information
/// `E[Σ_q π_q ln π_q | prev]`.
pub fn expected_information_step(
    prev_weights: &[f64],
    law: &FactorLaw,
    n: u64,
    src: &RandomSource,
) -> Result<CondExpEstimate> {
    check_weights(prev_weights)?;
    law.validate()?;
    if n < 2 {
        return Err(Error::NotEnoughSamples { min: 2, got: n });
    }
    let mut acc = MeanVariance::new();
    for i in 0..n {
        let next = multiplicative_weight_step(prev_weights, law, &src.substream_index(i))?;
        acc.push(shannon_wiener(&next)?);
    }
    Ok(CondExpEstimate {
        mean: acc.mean(),
        std_error: acc.std_error(),
        samples: acc.count(),
    })
}

/// Which inequalities a step verdict covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepCheckKind {
    Decoherence,
    Information,
    Both,
}

/// One certified off-diagonal inequality: `estimate + 3·SE < reference`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairMargin {
    pub i: usize,
    pub j: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub reference: f64,
    /// `reference − estimate − 3·SE`; the inequality is certified iff > 0.
    pub margin: f64,
}

/// The certified information inequality: `estimate − 3·SE > reference`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarMargin {
    pub estimate: f64,
    pub std_error: f64,
    pub reference: f64,
    /// `estimate − 3·SE − reference`; the inequality is certified iff > 0.
    pub margin: f64,
}

/// Outcome of certifying one step of the dynamics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepVerdict {
    pub kind: StepCheckKind,
    /// True iff every required inequality holds with positive margin.
    pub pass: bool,
    /// Zero-variance law: equalities are reported, strictness is not certifiable.
    pub degenerate: bool,
    /// Off-diagonal margins for pairs `i < j` (decoherence checks).
    pub offdiag: Vec<PairMargin>,
    /// Information margin (information checks).
    pub information: Option<ScalarMargin>,
}

/// Certifies the one-step decoherence inequality: every off-diagonal
/// estimate plus 3·SE must fall below the previous realized magnitude.
/// Requires a factor law with mean at most one.
#[allow(clippy::needless_range_loop)] // pair loops read clearest with indices
pub fn verify_decoherence_step(
    prev_weights: &[f64],
    law: &FactorLaw,
    n: u64,
    src: &RandomSource,
) -> Result<StepVerdict> {
    law.validate()?;
    if law.mean() > 1.0 + MEAN_TOL {
        return Err(Error::LawHypothesis {
            clause: "supermartingale",
            mean: law.mean(),
        });
    }
    let est = expected_offdiag_step(prev_weights, law, n, src)?;
    let refs = magnitudes(prev_weights)?;
    let q = prev_weights.len();
    let mut offdiag = Vec::with_capacity(q * (q - 1) / 2);
    let mut pass = true;
    for i in 0..q {
        for j in (i + 1)..q {
            let estimate = est.product[i][j];
            let std_error = est.product_std_error[i][j];
            let reference = refs[i][j];
            let margin = reference - estimate - CERTIFICATION_Z * std_error;
            pass &= margin > 0.0;
            offdiag.push(PairMargin {
                i,
                j,
                estimate,
                std_error,
                reference,
                margin,
            });
        }
    }
    Ok(StepVerdict {
        kind: StepCheckKind::Decoherence,
        pass,
        degenerate: law.is_degenerate(),
        offdiag,
        information: None,
    })
}

/// Certifies the one-step information-gain inequality: the estimated
/// next-step information minus 3·SE must exceed the realized information.
/// Requires a factor law with mean at least one.
pub fn verify_information_step(
    prev_weights: &[f64],
    law: &FactorLaw,
    n: u64,
    src: &RandomSource,
) -> Result<StepVerdict> {
    law.validate()?;
    if law.mean() < 1.0 - MEAN_TOL {
        return Err(Error::LawHypothesis {
            clause: "submartingale",
            mean: law.mean(),
        });
    }
    let est = expected_information_step(prev_weights, law, n, src)?;
    let reference = shannon_wiener(prev_weights)?;
    let margin = est.mean - CERTIFICATION_Z * est.std_error - reference;
    Ok(StepVerdict {
        kind: StepCheckKind::Information,
        pass: margin > 0.0,
        degenerate: law.is_degenerate(),
        offdiag: Vec::new(),
        information: Some(ScalarMargin {
            estimate: est.mean,
            std_error: est.std_error,
            reference,
            margin,
        }),
    })
}

/// Certifies both inequalities for a unit-mean law; passes iff both pass.
pub fn verify_martingale_step(
    prev_weights: &[f64],
    law: &FactorLaw,
    n: u64,
    src: &RandomSource,
) -> Result<StepVerdict> {
    law.validate()?;
    if (law.mean() - 1.0).abs() > MEAN_TOL {
        return Err(Error::LawHypothesis {
            clause: "martingale",
            mean: law.mean(),
        });
    }
    let deco = verify_decoherence_step(prev_weights, law, n, &src.substream("decoherence"))?;
    let info = verify_information_step(prev_weights, law, n, &src.substream("information"))?;
    Ok(StepVerdict {
        kind: StepCheckKind::Both,
        pass: deco.pass && info.pass,
        degenerate: law.is_degenerate(),
        offdiag: deco.offdiag,
        information: info.information,
    })
}

/// Which family of inequalities a full-trajectory run certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryClause {
    Super,
    Sub,
    Martingale,
}

impl TrajectoryClause {
    fn check_law(&self, law: &FactorLaw) -> Result<()> {
        let mean = law.mean();
        let ok = match self {
            TrajectoryClause::Super => mean <= 1.0 + MEAN_TOL,
            TrajectoryClause::Sub => mean >= 1.0 - MEAN_TOL,
            TrajectoryClause::Martingale => (mean - 1.0).abs() <= MEAN_TOL,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::LawHypothesis {
                clause: match self {
                    TrajectoryClause::Super => "supermartingale",
                    TrajectoryClause::Sub => "submartingale",
                    TrajectoryClause::Martingale => "martingale",
                },
                mean,
            })
        }
    }
}

/// One certified step of a realized trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryStep {
    /// Grid index `k` of the step target (1-based over the grid).
    pub index: usize,
    pub time: f64,
    pub verdict: StepVerdict,
    pub realized_weights: Vec<f64>,
    pub realized_magnitudes: Vec<Vec<f64>>,
    pub realized_information: f64,
}

/// Full-trajectory certification report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub clause: TrajectoryClause,
    pub outcomes: usize,
    pub times: Vec<f64>,
    pub phases: Vec<f64>,
    pub initial_weights: Vec<f64>,
    pub initial_magnitudes: Vec<Vec<f64>>,
    pub initial_information: f64,
    /// True iff every step's applicable inequalities were certified.
    pub pass: bool,
    pub steps: Vec<TrajectoryStep>,
}

impl TrajectoryReport {
    fn weights_over_time(&self) -> Vec<(&f64, &Vec<f64>)> {
        std::iter::once((&self.times[0], &self.initial_weights))
            .chain(self.steps.iter().map(|s| (&s.time, &s.realized_weights)))
            .collect()
    }

    /// Wide-format CSV of realized off-diagonal magnitudes over time:
    /// `time,mag_i_j,...` for pairs `i < j` (1-based labels).
    #[allow(clippy::needless_range_loop)] // pair loops read clearest with indices
    pub fn magnitudes_csv(&self) -> String {
        use std::fmt::Write as _;
        let q = self.outcomes;
        let mut out = String::from("time");
        for i in 0..q {
            for j in (i + 1)..q {
                let _ = write!(out, ",mag_{}_{}", i + 1, j + 1);
            }
        }
        out.push('\n');
        let mut rows: Vec<(f64, &Vec<Vec<f64>>)> = vec![(self.times[0], &self.initial_magnitudes)];
        for s in &self.steps {
            rows.push((s.time, &s.realized_magnitudes));
        }
        for (t, mags) in rows {
            let _ = write!(out, "{t}");
            for i in 0..q {
                for j in (i + 1)..q {
                    let _ = write!(out, ",{}", mags[i][j]);
                }
            }
            out.push('\n');
        }
        out
    }

    /// CSV of realized information over time: `time,information`.
    pub fn information_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("time,information\n");
        let _ = writeln!(out, "{},{}", self.times[0], self.initial_information);
        for s in &self.steps {
            let _ = writeln!(out, "{},{}", s.time, s.realized_information);
        }
        out
    }

    /// Long-format CSV of realized weights over time: `time,q,value`.
    pub fn weights_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("time,q,value\n");
        for (t, weights) in self.weights_over_time() {
            for (q, w) in weights.iter().enumerate() {
                let _ = writeln!(out, "{t},{},{w}", q + 1);
            }
        }
        out
    }
}

/// Simulates a realized weight trajectory and certifies the clause's
/// inequalities at every step, conditioning on the realized prefix. Step
/// estimation and the realized moves use disjoint substreams.
#[allow(clippy::too_many_arguments)]
pub fn run_full_trajectory(
    outcomes: usize,
    grid: &TimeGrid,
    law: &FactorLaw,
    initial_weights: &[f64],
    phases: &[f64],
    n: u64,
    clause: TrajectoryClause,
    src: &RandomSource,
) -> Result<TrajectoryReport> {
    clause.check_law(law)?;
    if phases.len() != outcomes {
        return Err(Error::DimensionMismatch {
            expected: outcomes,
            actual: phases.len(),
        });
    }
    // Validates weights, dimensions, and the law.
    let traj = simulate_weight_trajectory(outcomes, grid, law, initial_weights, &src.substream("path"))?;
    let estimate_src = src.substream("estimate");
    let mut steps = Vec::with_capacity(grid.len() - 1);
    let mut pass = true;
    for k in 1..grid.len() {
        let prev = traj.weights_at(k - 1);
        let step_src = estimate_src.substream_index(k as u64);
        let verdict = match clause {
            TrajectoryClause::Super => verify_decoherence_step(prev, law, n, &step_src)?,
            TrajectoryClause::Sub => verify_information_step(prev, law, n, &step_src)?,
            TrajectoryClause::Martingale => verify_martingale_step(prev, law, n, &step_src)?,
        };
        pass &= verdict.pass;
        let realized = traj.weights_at(k);
        steps.push(TrajectoryStep {
            index: k,
            time: grid.times()[k],
            verdict,
            realized_weights: realized.to_vec(),
            realized_magnitudes: magnitudes(realized)?,
            realized_information: shannon_wiener(realized)?,
        });
    }
    Ok(TrajectoryReport {
        clause,
        outcomes,
        times: grid.times().to_vec(),
        phases: phases.to_vec(),
        initial_weights: initial_weights.to_vec(),
        initial_magnitudes: magnitudes(initial_weights)?,
        initial_information: shannon_wiener(initial_weights)?,
        pass,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;
    use rand::Rng;

    // Closed-form oracles used to freeze expected values.
    fn uniform_sqrt_mean(a: f64, b: f64) -> f64 {
        2.0 * (b.powf(1.5) - a.powf(1.5)) / (3.0 * (b - a))
    }

    fn uniform_xlnx_mean(a: f64, b: f64) -> f64 {
        let f = |u: f64| 0.5 * u * u * u.ln() - 0.25 * u * u;
        (f(b) - f(a)) / (b - a)
    }

    #[test]
    fn density_coordinate_values() {
        // Equal phases: real coordinate √(0.25·0.75) = √0.1875.
        let s = PureStateSnapshot::new(vec![0.25, 0.75], vec![0.0, 0.0]).unwrap();
        let view = density_coordinates(&s);
        let z = view.coord(0, 1);
        assert!((z.re - 0.25f64.sqrt() * 0.75f64.sqrt()).abs() < 1e-15);
        assert!((z.re - 0.433_012_701_892_219_3).abs() < 1e-12);
        assert_eq!(z.im, 0.0);

        // Quarter-turn phase difference: 0.5·e^{-iπ/2} = −0.5i.
        let s = PureStateSnapshot::new(
            vec![0.5, 0.5],
            vec![0.0, std::f64::consts::FRAC_PI_2],
        )
        .unwrap();
        let z = density_coordinates(&s).coord(0, 1);
        assert!(z.re.abs() < 1e-12);
        assert!((z.im + 0.5).abs() < 1e-12);
    }

    #[test]
    fn magnitude_values() {
        let m = magnitudes(&[0.5, 0.5]).unwrap();
        assert_eq!(m[0][1], 0.5);
        let m = magnitudes(&[1.0, 0.0]).unwrap();
        assert_eq!(m[0][1], 0.0);
        let m = magnitudes(&[0.25, 0.75]).unwrap();
        assert!((m[0][1] - 0.433_012_701_892_219_3).abs() < 1e-12);
        assert!(magnitudes(&[-0.1, 0.5]).is_err());
    }

    #[test]
    fn shannon_wiener_values() {
        assert!((shannon_wiener(&[0.5, 0.5]).unwrap() + std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(shannon_wiener(&[1.0, 0.0]).unwrap(), 0.0);
        let s = shannon_wiener(&[0.25, 0.75]).unwrap();
        let oracle = 0.25 * 0.25f64.ln() + 0.75 * 0.75f64.ln();
        assert_eq!(s, oracle);
        assert!((s + 0.562_335_144_618_808_3).abs() < 1e-12);
    }

    proptest! {
        // Hermitian coords, symmetric magnitudes, |coords| == magnitudes, and
        // phase invariance of the magnitudes.
        #[test]
        fn density_view_symmetries(seed in 0u64..1000) {
            let mut rng = RandomSource::from_seed(seed).rng();
            let q = rng.random_range(2..6);
            let weights: Vec<f64> = (0..q).map(|_| rng.random_range(0.0..2.0)).collect();
            let phases: Vec<f64> = (0..q).map(|_| rng.random_range(-3.2..3.2)).collect();
            let state = PureStateSnapshot::new(weights.clone(), phases).unwrap();
            let view = density_coordinates(&state);
            for i in 0..q {
                for j in 0..q {
                    prop_assert_eq!(view.coord(i, j), view.coord(j, i).conj());
                    prop_assert_eq!(view.magnitude(i, j), view.magnitude(j, i));
                    let diff = (view.coord(i, j).norm() - view.magnitude(i, j)).abs();
                    prop_assert!(diff <= 1e-12 * view.magnitude(i, j).max(1.0));
                }
            }
            // Phases do not affect magnitudes.
            let other_phases: Vec<f64> = (0..q).map(|_| rng.random_range(-3.2..3.2)).collect();
            let other = PureStateSnapshot::new(weights, other_phases).unwrap();
            prop_assert_eq!(density_coordinates(&other).magnitudes, view.magnitudes);
        }
    }

    #[test]
    fn offdiag_step_closed_forms() {
        let src = RandomSource::from_seed(40);
        let n = 50_000;

        // uniform(0.2, 0.8) on π = (0.5, 0.5): product ≈ 0.5·E[√U]² ≈ 0.241975.
        let law = FactorLaw::uniform(0.2, 0.8).unwrap();
        let est = expected_offdiag_step(&[0.5, 0.5], &law, n, &src).unwrap();
        let expected = 0.5 * uniform_sqrt_mean(0.2, 0.8).powi(2);
        assert!((expected - 0.241_975_1).abs() < 1e-6);
        assert!(
            (est.product[0][1] - expected).abs() < 4.0 * est.product_std_error[0][1],
            "product = {}, expected = {expected}",
            est.product[0][1]
        );

        // uniform(0.5, 1.5): ≈ 0.489103.
        let law = FactorLaw::uniform(0.5, 1.5).unwrap();
        let est = expected_offdiag_step(&[0.5, 0.5], &law, n, &src).unwrap();
        let expected = 0.5 * uniform_sqrt_mean(0.5, 1.5).powi(2);
        assert!((expected - 0.489_102_6).abs() < 1e-6);
        assert!((est.product[0][1] - expected).abs() < 4.0 * est.product_std_error[0][1]);

        // Degenerate(1): joint exactly 0.5 and equal to the product.
        let law = FactorLaw::degenerate(1.0).unwrap();
        let est = expected_offdiag_step(&[0.5, 0.5], &law, 100, &src).unwrap();
        assert_eq!(est.joint[0][1], 0.5);
        assert!((est.product[0][1] - est.joint[0][1]).abs() < 1e-12);
        assert_eq!(est.product_std_error[0][1], 0.0);
    }

    #[test]
    fn offdiag_joint_matches_product() {
        // Independence factorization: |joint − product| within combined SEs.
        let law = FactorLaw::uniform(0.2, 0.8).unwrap();
        let est =
            expected_offdiag_step(&[0.4, 0.6, 1.2], &law, 50_000, &RandomSource::from_seed(41))
                .unwrap();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let gap = (est.joint[i][j] - est.product[i][j]).abs();
                let se = est.joint_std_error[i][j] + est.product_std_error[i][j];
                assert!(gap <= 4.0 * se, "pair ({i},{j}): gap {gap}, se {se}");
            }
        }
    }

    #[test]
    fn information_step_closed_forms() {
        let src = RandomSource::from_seed(42);

        // Degenerate(1) on (0.5, 0.5): exactly −ln 2 with zero error.
        let law = FactorLaw::degenerate(1.0).unwrap();
        let est = expected_information_step(&[0.5, 0.5], &law, 100, &src).unwrap();
        assert_eq!(est.mean, -std::f64::consts::LN_2);
        assert_eq!(est.std_error, 0.0);

        // uniform(0.5, 1.5) on π = (1, 1): 2·E[U ln U] ≈ 0.0855833 > 0.
        let law = FactorLaw::uniform(0.5, 1.5).unwrap();
        let est = expected_information_step(&[1.0, 1.0], &law, 50_000, &src).unwrap();
        let expected = 2.0 * uniform_xlnx_mean(0.5, 1.5);
        assert!((expected - 0.085_583_288_4).abs() < 1e-9);
        assert!((est.mean - expected).abs() < 4.0 * est.std_error);
        assert!(est.mean - CERTIFICATION_Z * est.std_error > 0.0);
    }

    #[test]
    fn decoherence_step_verdicts() {
        let src = RandomSource::from_seed(43);
        let n = 50_000;

        let sup = FactorLaw::uniform(0.2, 0.8).unwrap();
        let v = verify_decoherence_step(&[0.5, 0.5], &sup, n, &src).unwrap();
        assert!(v.pass);
        assert!(!v.degenerate);
        assert_eq!(v.offdiag.len(), 1);
        assert!((v.offdiag[0].reference - 0.5).abs() < 1e-15);

        // Unit-mean law still decoheres through the strict Jensen gap.
        let mart = FactorLaw::uniform(0.5, 1.5).unwrap();
        let v = verify_decoherence_step(&[0.5, 0.5], &mart, n, &src).unwrap();
        assert!(v.pass);
        assert!(v.offdiag[0].estimate < 0.5);

        // Degenerate(1) sits at equality: reported, not certified.
        let degen = FactorLaw::degenerate(1.0).unwrap();
        let v = verify_decoherence_step(&[0.5, 0.5], &degen, n, &src).unwrap();
        assert!(!v.pass);
        assert!(v.degenerate);

        // A sub law violates the hypothesis.
        let sub = FactorLaw::uniform(0.9, 1.6).unwrap();
        assert!(matches!(
            verify_decoherence_step(&[0.5, 0.5], &sub, n, &src),
            Err(Error::LawHypothesis { .. })
        ));
    }

    #[test]
    fn information_step_verdicts() {
        let src = RandomSource::from_seed(44);
        let n = 50_000;

        let sub = FactorLaw::uniform(0.9, 1.6).unwrap();
        let v = verify_information_step(&[0.5, 0.5], &sub, n, &src).unwrap();
        assert!(v.pass);
        let m = v.information.unwrap();
        assert!(m.margin > 0.0);
        assert_eq!(m.reference, -std::f64::consts::LN_2);

        let mart = FactorLaw::uniform(0.5, 1.5).unwrap();
        let v = verify_information_step(&[1.0, 1.0], &mart, n, &src).unwrap();
        assert!(v.pass);

        let degen = FactorLaw::degenerate(1.0).unwrap();
        let v = verify_information_step(&[0.5, 0.5], &degen, n, &src).unwrap();
        assert!(!v.pass);
        assert!(v.degenerate);

        let sup = FactorLaw::uniform(0.2, 0.8).unwrap();
        assert!(matches!(
            verify_information_step(&[0.5, 0.5], &sup, n, &src),
            Err(Error::LawHypothesis { .. })
        ));
    }

    #[test]
    fn martingale_step_verdicts() {
        let src = RandomSource::from_seed(45);
        let n = 50_000;

        let mart = FactorLaw::uniform(0.5, 1.5).unwrap();
        let v = verify_martingale_step(&[0.5, 0.5], &mart, n, &src).unwrap();
        assert!(v.pass);
        assert_eq!(v.kind, StepCheckKind::Both);
        assert!(!v.offdiag.is_empty());
        assert!(v.information.is_some());

        // Unit-mean lognormal: E[√U] = e^{−σ²/8} < 1.
        let sigma = 0.3f64;
        let ln = FactorLaw::lognormal(-0.5 * sigma * sigma, sigma).unwrap();
        let v = verify_martingale_step(&[0.4, 0.6], &ln, n, &src).unwrap();
        assert!(v.pass);

        let degen = FactorLaw::degenerate(1.0).unwrap();
        let v = verify_martingale_step(&[0.5, 0.5], &degen, n, &src).unwrap();
        assert!(!v.pass);
        assert!(v.degenerate);

        let sup = FactorLaw::uniform(0.2, 0.8).unwrap();
        assert!(matches!(
            verify_martingale_step(&[0.5, 0.5], &sup, n, &src),
            Err(Error::LawHypothesis { .. })
        ));
    }

    #[test]
    fn jensen_gap_is_strict() {
        // E[πU ln(πU)] − 3·SE > (πE[U])·ln(πE[U]) for non-degenerate laws.
        let src = RandomSource::from_seed(46);
        for law in [
            FactorLaw::uniform(0.5, 1.5).unwrap(),
            FactorLaw::uniform(0.9, 1.6).unwrap(),
            FactorLaw::lognormal(-0.045, 0.3).unwrap(),
        ] {
            let pi = 0.8;
            let mut acc = MeanVariance::new();
            let sub = src.substream("jensen");
            for i in 0..40_000 {
                let u = law.sample(&mut sub.substream_index(i).rng());
                let x = pi * u;
                acc.push(if x > 0.0 { x * x.ln() } else { 0.0 });
            }
            let rhs_arg: f64 = pi * law.mean();
            let rhs = rhs_arg * rhs_arg.ln();
            assert!(
                acc.mean() - CERTIFICATION_Z * acc.std_error() > rhs,
                "law {law:?}: lhs {} rhs {rhs}",
                acc.mean()
            );
        }
    }

    #[test]
    fn trajectory_runs_and_clause_checks() {
        let grid = make_grid(&(0..=5).map(f64::from).collect::<Vec<_>>()).unwrap();
        let src = RandomSource::from_seed(47);
        let n = 20_000;
        let w0 = [0.5, 0.5, 0.5, 0.5];
        let phases = [0.0, 0.5, 1.0, 1.5];

        let sup = FactorLaw::uniform(0.2, 0.8).unwrap();
        let rep = run_full_trajectory(
            4,
            &grid,
            &sup,
            &w0,
            &phases,
            n,
            TrajectoryClause::Super,
            &src,
        )
        .unwrap();
        assert!(rep.pass);
        assert_eq!(rep.steps.len(), 5);
        // Realized off-diagonal expectations decrease step over step.
        for pair in rep.steps.windows(2) {
            assert!(
                pair[1].verdict.offdiag[0].estimate < pair[0].verdict.offdiag[0].estimate,
                "estimates should shrink under the super law"
            );
        }

        // Clause/law mismatch is rejected.
        assert!(matches!(
            run_full_trajectory(4, &grid, &sup, &w0, &phases, n, TrajectoryClause::Sub, &src),
            Err(Error::LawHypothesis { .. })
        ));

        // Degenerate(1) runs under every clause but certifies nothing.
        let degen = FactorLaw::degenerate(1.0).unwrap();
        let rep = run_full_trajectory(
            4,
            &grid,
            &degen,
            &w0,
            &phases,
            n,
            TrajectoryClause::Martingale,
            &src,
        )
        .unwrap();
        assert!(!rep.pass);
        assert!(rep.steps.iter().all(|s| s.verdict.degenerate && !s.verdict.pass));
    }

    #[test]
    fn trajectory_csv_outputs() {
        let grid = make_grid(&[0.0, 1.0, 2.0]).unwrap();
        let law = FactorLaw::uniform(0.5, 1.5).unwrap();
        let rep = run_full_trajectory(
            2,
            &grid,
            &law,
            &[0.5, 0.5],
            &[0.0, 0.0],
            1000,
            TrajectoryClause::Martingale,
            &RandomSource::from_seed(3),
        )
        .unwrap();
        let mags = rep.magnitudes_csv();
        assert!(mags.starts_with("time,mag_1_2\n0,0.5\n"));
        assert_eq!(mags.lines().count(), 4);
        let info = rep.information_csv();
        assert!(info.starts_with("time,information\n"));
        assert_eq!(info.lines().count(), 4);
        let weights = rep.weights_csv();
        assert!(weights.starts_with("time,q,value\n"));
        assert_eq!(weights.lines().count(), 7);
    }
}
