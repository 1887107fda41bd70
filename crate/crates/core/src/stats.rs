//! Streaming moments and the two-sample Kolmogorov–Smirnov statistic.

/// Welford accumulator for mean and variance with a Chan-style merge, so
/// partial accumulations over sample chunks combine without order effects
/// in the counts.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanVariance {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanVariance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanVariance) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let delta = other.mean - self.mean;
        let total = n1 + n2;
        self.mean += delta * n2 / total;
        self.m2 += other.m2 + delta * delta * n1 * n2 / total;
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (Bessel-corrected); zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean, `stdev / sqrt(n)`.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.std_dev() / (self.n as f64).sqrt()
        }
    }
}

/// Two-sample Kolmogorov–Smirnov statistic: the sup distance between the
/// empirical CDFs. Inputs need not be sorted.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "samples must be nonempty");
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let n = xs.len() as f64;
    let m = ys.len() as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut max_diff = 0.0f64;
    // The gap is recomputed from the step counts at every jump point, so
    // identical samples give exactly zero.
    while i < xs.len() && j < ys.len() {
        let (x, y) = (xs[i], ys[j]);
        if x <= y {
            while i < xs.len() && xs[i] == x {
                i += 1;
            }
        }
        if y <= x {
            while j < ys.len() && ys[j] == y {
                j += 1;
            }
        }
        max_diff = max_diff.max((i as f64 / n - j as f64 / m).abs());
    }
    max_diff
}

/// Asymptotic two-sample critical value at significance 0.05:
/// `1.36 * sqrt((n + m) / (n * m))`.
pub fn ks_critical_value(n: usize, m: usize) -> f64 {
    1.36 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}
