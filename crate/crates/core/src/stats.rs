//! Small statistical helpers: compensated summation, binomial confidence
//! intervals and weighted line fits.

/// Kahan compensated accumulator. Orbit sums run up to `n = 1e8` terms;
/// naive summation loses several digits there.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        // The carry holds the rounding injected so far; subtracting it is
        // the Neumaier-style corrected total.
        self.sum - self.carry
    }
}

/// Two-sided z quantiles.
pub const Z_95: f64 = 1.959963984540054;
pub const Z_999: f64 = 3.290526731491926;

/// Wilson score interval for a binomial proportion. Bounds always lie in
/// `[0, 1]`.
pub fn wilson_ci(count: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A fitted line `y = intercept + slope * x` with the standard error of
/// the slope.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub points: usize,
}

/// Weighted least squares for a straight line. Weights are inverse
/// variances of the `y` values.
pub fn weighted_line_fit(pts: &[(f64, f64, f64)]) -> Option<LineFit> {
    if pts.len() < 2 {
        return None;
    }
    let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, w) in pts {
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
    }
    let det = sw * swxx - swx * swx;
    if det <= 0.0 || !det.is_finite() {
        return None;
    }
    let slope = (sw * swxy - swx * swy) / det;
    let intercept = (swxx * swy - swx * swxy) / det;
    // Var(slope) = sw / det under the inverse-variance weighting model.
    let slope_se = (sw / det).sqrt();
    Some(LineFit {
        slope,
        intercept,
        slope_se,
        points: pts.len(),
    })
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(*v);
    }
    let mean = acc.total() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut sq = KahanSum::new();
    for v in values {
        let d = v - mean;
        sq.add(d * d);
    }
    (mean, (sq.total() / (n as f64 - 1.0)).sqrt())
}
