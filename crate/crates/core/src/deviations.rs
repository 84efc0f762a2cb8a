//! Monte-Carlo estimation of deviation-set, tail-set and escape-survivor
//! volumes, exponential-rate fitting and exact combinatorial oracles.
//!
//! A deviation experiment measures the Lebesgue volume of
//!
//! ```text
//! B_n = { x : (1/n) S_n phi(x) >= c }                      (threshold mode)
//! B_n = { x : inf_t |(1/n) S_n phi(x) - t| > omega }       (equilibrium mode)
//! ```
//!
//! optionally intersected with the recurrence set
//! `A_n = { x : (1/n) S_n Delta_delta(x) <= epsilon }`. Volumes decaying
//! like `C e^{-xi n}` are summarized by a weighted least-squares fit of
//! `-log p_n` against `n`; zero counts are replaced by the rule-of-three
//! bound `3/m`, flagged, and left out of the fit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::RegionSpec;
use crate::observable::Observable;
use crate::parallel::run_sharded_fold;
use crate::rng::Stream;
use crate::stats::{weighted_line_fit, wilson_ci, KahanSum, Z_95};
use crate::systems::DynamicalSystem;

const RETRY_LIMIT: usize = 100;

/// What counts as a deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DeviationMode {
    /// Time average at least `c`.
    Threshold { c: f64 },
    /// Time average further than `omega` from every target value.
    EquilibriumDistance { targets: Vec<f64>, omega: f64 },
}

/// Optional slow-recurrence gate `(1/n) S_n Delta_delta <= epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceGate {
    pub delta: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct DeviationExperiment {
    pub system: DynamicalSystem,
    pub observable: Observable,
    pub mode: DeviationMode,
    pub gate: Option<RecurrenceGate>,
    pub n_grid: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl DeviationExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidInput("n_grid must not be empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "n_grid must be strictly increasing".into(),
            ));
        }
        if self.samples < 1000 {
            return Err(Error::InvalidInput("need at least 1000 samples".into()));
        }
        if let DeviationMode::EquilibriumDistance { targets, omega } = &self.mode {
            if targets.is_empty() {
                return Err(Error::InvalidInput("equilibrium mode needs targets".into()));
            }
            if *omega <= 0.0 {
                return Err(Error::InvalidInput("omega must be positive".into()));
            }
        }
        if let Some(g) = &self.gate {
            if g.delta <= 0.0 || g.epsilon <= 0.0 {
                return Err(Error::InvalidInput(
                    "gate delta and epsilon must be positive".into(),
                ));
            }
        }
        self.observable.validate(&self.system, self.seed)?;
        Ok(())
    }
}

/// A measured fraction with Wilson 95% confidence bounds.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FractionEstimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub count: u64,
    pub samples: u64,
    /// Starts redrawn after orbit errors.
    pub resampled: u64,
    /// True when no sampling was needed (degenerate or enumerated case).
    pub exact: bool,
}

impl FractionEstimate {
    fn from_counts(count: u64, samples: u64, resampled: u64) -> FractionEstimate {
        let (ci_lo, ci_hi) = wilson_ci(count, samples, Z_95);
        FractionEstimate {
            p_hat: count as f64 / samples as f64,
            ci_lo,
            ci_hi,
            count,
            samples,
            resampled,
            exact: false,
        }
    }

    fn exactly(p: f64) -> FractionEstimate {
        FractionEstimate {
            p_hat: p,
            ci_lo: p,
            ci_hi: p,
            count: 0,
            samples: 0,
            resampled: 0,
            exact: true,
        }
    }
}

/// Volume fraction of the deviation set at time `n`.
pub fn deviation_fraction(exp: &DeviationExperiment, n: usize) -> Result<FractionEstimate> {
    exp.validate()?;
    if !exp.n_grid.contains(&n) {
        return Err(Error::InvalidInput(format!(
            "n = {n} is not in the experiment grid"
        )));
    }
    // A constant observable needs no sampling: the set is everything or
    // nothing.
    if let Observable::Constant(c0) = exp.observable {
        let deviates = match &exp.mode {
            DeviationMode::Threshold { c } => c0 >= *c,
            DeviationMode::EquilibriumDistance { targets, omega } => {
                targets
                    .iter()
                    .map(|t| (c0 - t).abs())
                    .fold(f64::INFINITY, f64::min)
                    > *omega
            }
        };
        // The gate still requires sampling unless the singular set is empty.
        if exp.gate.is_none() || !exp.system.has_singular_set() {
            return Ok(FractionEstimate::exactly(if deviates { 1.0 } else { 0.0 }));
        }
    }

    let sys = &exp.system;
    let (count, resampled) = run_sharded_fold(
        exp.samples,
        exp.workers,
        (0u64, 0u64),
        |acc, i| {
            let mut rng = Stream::for_index(exp.seed, i as u64);
            'retry: for _ in 0..RETRY_LIMIT {
                let start = sys.domain().sample(&mut rng);
                let mut orbit = sys.orbit_seeded(start, rng.clone());
                rng.next_u64();
                let mut phi_sum = KahanSum::new();
                let mut gate_sum = KahanSum::new();
                for step in 0..n {
                    let p = orbit.current();
                    phi_sum.add(exp.observable.eval(p));
                    if let Some(g) = &exp.gate {
                        match crate::diagnostics::delta_log(sys, p, g.delta) {
                            Ok(v) => gate_sum.add(v),
                            Err(_) => {
                                acc.1 += 1;
                                continue 'retry;
                            }
                        }
                    }
                    if step + 1 < n && orbit.advance().is_err() {
                        acc.1 += 1;
                        continue 'retry;
                    }
                }
                let mean = phi_sum.total() / n as f64;
                let mut hit = match &exp.mode {
                    DeviationMode::Threshold { c } => mean >= *c,
                    DeviationMode::EquilibriumDistance { targets, omega } => {
                        targets
                            .iter()
                            .map(|t| (mean - t).abs())
                            .fold(f64::INFINITY, f64::min)
                            > *omega
                    }
                };
                if let Some(g) = &exp.gate {
                    hit = hit && gate_sum.total() / n as f64 <= g.epsilon;
                }
                if hit {
                    acc.0 += 1;
                }
                return;
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    Ok(FractionEstimate::from_counts(
        count,
        exp.samples as u64,
        resampled,
    ))
}

/// Fraction of starts violating slow recurrence:
/// `(1/n) S_n Delta_delta > epsilon`.
pub fn tail_fraction(
    sys: &DynamicalSystem,
    delta: f64,
    epsilon: f64,
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<FractionEstimate> {
    if delta <= 0.0 || epsilon <= 0.0 || n == 0 {
        return Err(Error::InvalidInput(
            "need delta, epsilon > 0 and n >= 1".into(),
        ));
    }
    // Without a singular set the recurrence depth vanishes identically.
    if !sys.has_singular_set() {
        return Ok(FractionEstimate::exactly(0.0));
    }
    let (count, resampled) = run_sharded_fold(
        samples,
        workers,
        (0u64, 0u64),
        |acc, i| {
            let mut rng = Stream::for_index(seed, i as u64);
            'retry: for _ in 0..RETRY_LIMIT {
                let start = sys.domain().sample(&mut rng);
                let mut orbit = sys.orbit_seeded(start, rng.clone());
                rng.next_u64();
                let mut sum = KahanSum::new();
                for step in 0..n {
                    match crate::diagnostics::delta_log(sys, orbit.current(), delta) {
                        Ok(v) => sum.add(v),
                        Err(_) => {
                            acc.1 += 1;
                            continue 'retry;
                        }
                    }
                    if step + 1 < n && orbit.advance().is_err() {
                        acc.1 += 1;
                        continue 'retry;
                    }
                }
                if sum.total() / n as f64 > epsilon {
                    acc.0 += 1;
                }
                return;
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    Ok(FractionEstimate::from_counts(
        count,
        samples as u64,
        resampled,
    ))
}

/// Survivor estimates for the open system with hole `M \ K`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EscapeEstimate {
    /// `Leb{ x in K : f^j x in K, j < n } / Leb(K)`.
    pub relative: FractionEstimate,
    /// The same, normalized by the full domain instead of `K`.
    pub absolute: f64,
    /// `Leb(K) / Leb(M)`.
    pub region_fraction: f64,
}

/// Fraction of uniform starts in `K` whose first `n` points all stay in
/// `K`.
pub fn escape_survivor_fraction(
    sys: &DynamicalSystem,
    region: &RegionSpec,
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<EscapeEstimate> {
    if n == 0 {
        return Err(Error::InvalidInput("need n >= 1".into()));
    }
    if region.volume() <= 0.0 {
        return Err(Error::InvalidInput("region has no volume".into()));
    }
    let (count, resampled) = run_sharded_fold(
        samples,
        workers,
        (0u64, 0u64),
        |acc, i| {
            let mut rng = Stream::for_index(seed, i as u64);
            'retry: for _ in 0..RETRY_LIMIT {
                let start = region.sample(&mut rng);
                if !sys.domain().contains(start) {
                    acc.1 += 1;
                    continue 'retry;
                }
                let mut orbit = sys.orbit_seeded(start, rng.clone());
                rng.next_u64();
                let mut survived = true;
                for step in 0..n {
                    if !region.contains(orbit.current()) {
                        survived = false;
                        break;
                    }
                    if step + 1 < n {
                        match orbit.advance() {
                            Ok(_) => {}
                            Err(_) => {
                                acc.1 += 1;
                                continue 'retry;
                            }
                        }
                    }
                }
                if survived {
                    acc.0 += 1;
                }
                return;
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    let relative = FractionEstimate::from_counts(count, samples as u64, resampled);
    let region_fraction = region.volume() / sys.domain().volume();
    Ok(EscapeEstimate {
        relative,
        absolute: relative.p_hat * region_fraction,
        region_fraction,
    })
}

/// Exact survivor volumes for the full-branch linear circle maps and an
/// interval hole complement, for `j = 1..=n`, normalized by the domain.
pub fn escape_survivors_exact(
    sys: &DynamicalSystem,
    region: &RegionSpec,
    n: usize,
) -> Result<Vec<f64>> {
    use crate::arcs::ArcSet;
    let k = match sys.kind {
        crate::systems::Kind::Doubling => 2u32,
        crate::systems::Kind::ExpandingCircle { k } => k,
        _ => {
            return Err(Error::Unsupported(format!(
                "exact survivor enumeration needs a full-branch linear circle map, not `{}`",
                sys.name()
            )))
        }
    };
    let RegionSpec::Interval1 { lo, hi } = region else {
        return Err(Error::Unsupported(
            "exact survivors need an interval region".into(),
        ));
    };
    if !(0.0 <= *lo && lo < hi && *hi <= 1.0) {
        return Err(Error::InvalidInput(
            "interval must sit inside the circle".into(),
        ));
    }
    let hole_k = ArcSet::arc(*lo, *hi);
    let mut survivors = hole_k.clone();
    let mut out = Vec::with_capacity(n);
    out.push(survivors.total_length());
    for _ in 2..=n {
        survivors = hole_k.intersect(&survivors.preimage_linear(k)?);
        out.push(survivors.total_length());
    }
    Ok(out)
}

/// One point of a decay series.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub p_hat: f64,
    /// Monte-Carlo sample count; `None` marks exact values.
    pub samples: Option<u64>,
    pub censored: bool,
}

impl RatePoint {
    pub fn exact(n: usize, p: f64) -> RatePoint {
        RatePoint {
            n,
            p_hat: p,
            samples: None,
            censored: false,
        }
    }

    pub fn measured(n: usize, est: &FractionEstimate) -> RatePoint {
        RatePoint {
            n,
            p_hat: est.p_hat,
            samples: Some(est.samples),
            censored: false,
        }
    }
}

/// A fitted exponential decay rate `p_n ~ C e^{-xi n}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateEstimate {
    pub xi: f64,
    pub xi_stderr: f64,
    pub intercept: f64,
    pub window: (usize, usize),
    pub used_points: usize,
    /// `xi > 0` with its 95% interval excluding zero.
    pub decay_detected: bool,
    pub points: Vec<RatePoint>,
}

/// Weighted least squares of `-log p_n` on `n`. Zero fractions are
/// replaced by the rule-of-three bound `3/m`, flagged censored and
/// excluded from the fit; at least three uncensored points are required.
pub fn fit_exponential_rate(series: &[RatePoint]) -> Result<RateEstimate> {
    let mut points: Vec<RatePoint> = Vec::with_capacity(series.len());
    for p in series {
        let mut q = *p;
        if q.p_hat <= 0.0 {
            match q.samples {
                Some(m) if m > 0 => {
                    q.p_hat = 3.0 / m as f64;
                    q.censored = true;
                }
                _ => {
                    q.censored = true;
                }
            }
        }
        points.push(q);
    }
    let usable: Vec<&RatePoint> = points
        .iter()
        .filter(|p| !p.censored && p.p_hat > 0.0)
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need >= 3 uncensored points, have {}",
            usable.len()
        )));
    }
    let pts: Vec<(f64, f64, f64)> = usable
        .iter()
        .map(|p| {
            let y = -p.p_hat.ln();
            let w = match p.samples {
                // Delta method: Var(log p_hat) = (1 - p) / (m p).
                Some(m) => {
                    let m = m as f64;
                    m * p.p_hat / (1.0 - p.p_hat).max(0.5 / m)
                }
                None => 1.0,
            };
            (p.n as f64, y, w)
        })
        .collect();
    let fit =
        weighted_line_fit(&pts).ok_or_else(|| Error::InsufficientData("degenerate fit".into()))?;
    let lo = usable.iter().map(|p| p.n).min().unwrap();
    let hi = usable.iter().map(|p| p.n).max().unwrap();
    Ok(RateEstimate {
        xi: fit.slope,
        xi_stderr: fit.slope_se,
        intercept: fit.intercept,
        window: (lo, hi),
        used_points: usable.len(),
        decay_detected: fit.slope - Z_95 * fit.slope_se > 0.0,
        points,
    })
}

/// Exact volume of `{ x : (1/n) S_n digit >= c }` for the doubling map:
/// the binary digits of a uniform start are independent fair bits, so
/// the volume is the binomial tail `2^{-n} sum_{k >= cn} C(n, k)`,
/// evaluated in exact integer arithmetic.
pub fn exact_doubling_oracle(n: usize, c: f64) -> Result<BigRational> {
    if n == 0 || n > 1000 {
        return Err(Error::InvalidInput("need 1 <= n <= 1000".into()));
    }
    let k_min = threshold_count(n, c);
    let denom = BigInt::one() << n;
    if k_min > n {
        return Ok(BigRational::new(BigInt::zero(), denom));
    }
    // Walk C(n, k) upward with exact updates.
    let mut binom = BigInt::one();
    for j in 0..k_min {
        binom = binom * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    let mut sum = binom.clone();
    for k in k_min..n {
        binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
        sum += &binom;
    }
    Ok(BigRational::new(sum, denom))
}

/// Smallest digit count `k` with `k / n >= c`, snapping away float fuzz
/// when `c n` is an integer.
fn threshold_count(n: usize, c: f64) -> usize {
    let t = c * n as f64;
    if t <= 0.0 {
        return 0;
    }
    let snapped = if (t - t.round()).abs() < 1e-9 {
        t.round()
    } else {
        t.ceil()
    };
    snapped as usize
}

/// The oracle volume as f64.
pub fn exact_doubling_fraction_f64(n: usize, c: f64) -> Result<f64> {
    let p = exact_doubling_oracle(n, c)?;
    p.to_f64()
        .ok_or_else(|| Error::InvalidInput("tail does not fit in f64".into()))
}

/// `-log` of the oracle volume as f64 (`inf` for an empty tail).
pub fn exact_doubling_neg_log(n: usize, c: f64) -> Result<f64> {
    let p = exact_doubling_oracle(n, c)?;
    if p.is_zero() {
        return Ok(f64::INFINITY);
    }
    let v = p
        .to_f64()
        .ok_or_else(|| Error::InvalidInput("tail does not fit in f64".into()))?;
    if v > 0.0 {
        Ok(-v.ln())
    } else {
        // Underflow: split into log numerator - n log 2 via bit length.
        let numer = p.numer().abs();
        let bits = numer.bits();
        let scaled = (&numer >> bits.saturating_sub(53)).to_f64().unwrap();
        let log_numer = scaled.ln() + (bits as f64 - 53.0).max(0.0) * std::f64::consts::LN_2;
        Ok(n as f64 * std::f64::consts::LN_2 - log_numer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{build_system, FamilyId, Params};

    fn doubling() -> DynamicalSystem {
        build_system(FamilyId::Doubling, &Params::new()).unwrap()
    }

    fn digit_experiment(c: f64, n_grid: Vec<usize>, samples: usize) -> DeviationExperiment {
        DeviationExperiment {
            system: doubling(),
            observable: Observable::FirstDigit,
            mode: DeviationMode::Threshold { c },
            gate: None,
            n_grid,
            samples,
            seed: 99,
            workers: 4,
        }
    }

    #[test]
    fn oracle_matches_the_frozen_binomial_sum() {
        let p = exact_doubling_oracle(20, 0.8).unwrap();
        assert_eq!(
            p,
            BigRational::new(BigInt::from(6196), BigInt::from(1_048_576))
        );
        assert_eq!(exact_doubling_oracle(7, 0.0).unwrap(), BigRational::one());
        assert!(exact_doubling_oracle(7, 1.0 + 1e-9).unwrap().is_zero());
    }

    #[test]
    fn oracle_neg_log_handles_large_n() {
        let v = exact_doubling_neg_log(400, 0.8).unwrap();
        // Large-n slope approaches the entropy rate 0.19274...
        assert!(v > 70.0 && v < 90.0, "got {v}");
    }

    #[test]
    fn monte_carlo_sits_inside_the_exact_band() {
        let exp = digit_experiment(0.8, vec![20], 100_000);
        let est = deviation_fraction(&exp, 20).unwrap();
        let exact = exact_doubling_oracle(20, 0.8).unwrap().to_f64().unwrap();
        let sd = (exact * (1.0 - exact) / 100_000.0).sqrt();
        assert!(
            (est.p_hat - exact).abs() < crate::stats::Z_999 * sd,
            "p_hat {}",
            est.p_hat
        );
    }

    #[test]
    fn degenerate_constant_is_exact() {
        let mut exp = digit_experiment(0.5, vec![5], 1000);
        exp.observable = Observable::Constant(0.4);
        let est = deviation_fraction(&exp, 5).unwrap();
        assert!(est.exact && est.p_hat == 0.0);
        exp.observable = Observable::Constant(0.6);
        assert_eq!(deviation_fraction(&exp, 5).unwrap().p_hat, 1.0);
    }

    #[test]
    fn extreme_thresholds_hit_everything_or_nothing() {
        let exp = digit_experiment(-0.1, vec![10], 2000);
        assert_eq!(deviation_fraction(&exp, 10).unwrap().count, 2000);
        let exp = digit_experiment(1.1, vec![10], 2000);
        assert_eq!(deviation_fraction(&exp, 10).unwrap().count, 0);
    }

    #[test]
    fn fractions_nest_exactly() {
        // Same seed means the same starts and orbits, so the sets nest
        // pointwise and the counts must as well.
        let loose = deviation_fraction(&digit_experiment(0.6, vec![12], 20_000), 12).unwrap();
        let tight = deviation_fraction(&digit_experiment(0.8, vec![12], 20_000), 12).unwrap();
        assert!(tight.count <= loose.count);

        let mut gated = digit_experiment(0.6, vec![12], 20_000);
        gated.system = build_system(FamilyId::Gauss, &Params::new()).unwrap();
        gated.observable = Observable::Coordinate;
        gated.gate = Some(RecurrenceGate {
            delta: 0.05,
            epsilon: 0.2,
        });
        let joint = deviation_fraction(&gated, 12).unwrap();
        gated.gate = None;
        let ungated = deviation_fraction(&gated, 12).unwrap();
        assert!(joint.count <= ungated.count);
    }

    #[test]
    fn equilibrium_mode_matches_two_sided_binomial() {
        // |mean digit - 1/2| > 0.2 at n = 10 means 8 or more, or 2 or
        // fewer, ones: 2 * 56 / 1024.
        let mut exp = digit_experiment(0.0, vec![10], 200_000);
        exp.mode = DeviationMode::EquilibriumDistance {
            targets: vec![0.5],
            omega: 0.2,
        };
        let est = deviation_fraction(&exp, 10).unwrap();
        let exact = 112.0_f64 / 1024.0;
        let sd = (exact * (1.0 - exact) / 200_000.0).sqrt();
        assert!(
            (est.p_hat - exact).abs() < crate::stats::Z_999 * sd,
            "p_hat {}",
            est.p_hat
        );
    }

    #[test]
    fn equilibrium_mode_with_two_targets_takes_the_infimum() {
        let mut exp = digit_experiment(0.0, vec![10], 10_000);
        // A target at every reachable average: nothing deviates.
        exp.mode = DeviationMode::EquilibriumDistance {
            targets: (0..=10).map(|k| k as f64 / 10.0).collect(),
            omega: 0.05,
        };
        let est = deviation_fraction(&exp, 10).unwrap();
        assert_eq!(est.count, 0);
    }

    #[test]
    fn tail_fraction_vanishes_without_singular_set() {
        let est = tail_fraction(&doubling(), 0.05, 0.1, 100, 10_000, 5, 4).unwrap();
        assert!(est.exact && est.p_hat == 0.0);
    }

    #[test]
    fn whole_domain_never_escapes() {
        let region = RegionSpec::Interval1 { lo: 0.0, hi: 1.0 };
        let est = escape_survivor_fraction(&doubling(), &region, 10, 5000, 3, 4).unwrap();
        assert_eq!(est.relative.p_hat, 1.0);
    }

    #[test]
    fn exact_survivors_follow_the_power_law() {
        let region = RegionSpec::Interval1 { lo: 0.0, hi: 0.5 };
        let v = escape_survivors_exact(&doubling(), &region, 20).unwrap();
        for (j, value) in v.iter().enumerate() {
            let expect = 2.0_f64.powi(-(j as i32 + 1));
            assert!((value - expect).abs() < 1e-14, "j = {j}");
        }
    }

    #[test]
    fn monte_carlo_survivors_match_exact_within_ci() {
        let region = RegionSpec::Interval1 { lo: 0.0, hi: 0.5 };
        for n in [3usize, 8, 12] {
            let est = escape_survivor_fraction(&doubling(), &region, n, 400_000, 21, 4).unwrap();
            let exact_abs = 2.0_f64.powi(-(n as i32));
            let exact_rel = exact_abs / 0.5;
            assert!(
                est.relative.ci_lo <= exact_rel && exact_rel <= est.relative.ci_hi,
                "n = {n}: [{}, {}] vs {exact_rel}",
                est.relative.ci_lo,
                est.relative.ci_hi
            );
            assert!((est.absolute - est.relative.p_hat * 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn survivors_satisfy_the_plateau_inclusion() {
        // Every survivor has (1/n) S_n phi_K = 1 for the plateau function.
        let sys = doubling();
        let region = RegionSpec::Interval1 { lo: 0.0, hi: 0.5 };
        let phi = Observable::Plateau {
            region,
            margin: 0.05,
        };
        let mut rng = Stream::new(77);
        let n = 6;
        let mut survivors = 0;
        for _ in 0..20_000 {
            let start = region.sample(&mut rng);
            let mut orbit = sys.orbit(start);
            let mut inside = true;
            let mut phi_sum = 0.0;
            for step in 0..n {
                let p = orbit.current();
                inside &= region.contains(p);
                phi_sum += phi.eval(p);
                if step + 1 < n {
                    orbit.advance().unwrap();
                }
            }
            if inside {
                survivors += 1;
                assert!(phi_sum / n as f64 >= 1.0 - 1e-12);
            }
        }
        assert!(survivors > 100);
    }

    #[test]
    fn noiseless_exponential_is_fit_exactly() {
        let series: Vec<RatePoint> = (10..=50)
            .step_by(5)
            .map(|n| RatePoint::exact(n, (-0.3 * n as f64).exp()))
            .collect();
        let fit = fit_exponential_rate(&series).unwrap();
        assert!((fit.xi - 0.3).abs() < 1e-12);
        assert!(fit.decay_detected);
    }

    #[test]
    fn flat_series_has_zero_rate() {
        let series: Vec<RatePoint> = (1..=10).map(|n| RatePoint::exact(n, 1.0)).collect();
        let fit = fit_exponential_rate(&series).unwrap();
        assert!(fit.xi.abs() < 1e-12);
        assert!(!fit.decay_detected);
    }

    #[test]
    fn censored_points_are_flagged_and_excluded() {
        let mut series: Vec<RatePoint> = (1..=6)
            .map(|n| RatePoint::exact(n, (-0.5 * n as f64).exp()))
            .collect();
        series.push(RatePoint {
            n: 40,
            p_hat: 0.0,
            samples: Some(1000),
            censored: false,
        });
        let fit = fit_exponential_rate(&series).unwrap();
        assert!(fit
            .points
            .iter()
            .any(|p| p.censored && (p.p_hat - 0.003).abs() < 1e-12));
        assert_eq!(fit.used_points, 6);
        assert!((fit.xi - 0.5).abs() < 1e-9);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let series = vec![RatePoint::exact(1, 0.5), RatePoint::exact(2, 0.25)];
        assert!(matches!(
            fit_exponential_rate(&series),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn exact_doubling_counts_drive_the_rate_to_the_entropy_bound() {
        let series: Vec<RatePoint> = (100..=400)
            .step_by(50)
            .map(|n| {
                let p = exact_doubling_oracle(n, 0.8).unwrap().to_f64().unwrap();
                RatePoint::exact(n, p)
            })
            .collect();
        let fit = fit_exponential_rate(&series).unwrap();
        let closed_form = 2.0_f64.ln() + 0.8 * 0.8_f64.ln() + 0.2 * 0.2_f64.ln();
        assert!(
            (fit.xi - closed_form).abs() < 0.01,
            "xi = {}, target = {closed_form}",
            fit.xi
        );
    }
}
