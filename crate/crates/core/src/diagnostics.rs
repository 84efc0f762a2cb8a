//! Orbit-level statistics: Birkhoff sums, the non-uniform-expansion
//! statistic, truncated-distance recurrence, hyperbolic times, Lyapunov
//! exponents and Jacobian sums.
//!
//! A time `n` qualifies as a `(sigma, delta, b)`-hyperbolic time when
//! every backward window of inverse-derivative norms contracts,
//!
//! ```text
//! prod_{j=n-k}^{n-1} ||Df(f^j x)^{-1}|| <= sigma^k   for 1 <= k <= n,
//! ```
//!
//! and the orbit does not recur too deeply near the singular set:
//! `d_delta(f^k x, S) >= e^{-bk}`. The recurrence index can run forward
//! from the start (`PaperLiteral`, condition at `f^k x`) or backward from
//! the endpoint (`Reversed`, condition at `f^{n-k} x`); the two variants
//! do not coincide and callers must record which one an experiment used.
//! Note the window condition is stated for window lengths `1..=n`: with
//! length 0 allowed every first iterate would qualify vacuously, which
//! contradicts the neutral-rotation behaviour the definition is meant to
//! exclude.
//!
//! The optimized detector runs in O(n) by comparing prefix sums of
//! `log ||Df^{-1}|| - log sigma` against their running minimum; no raw
//! derivative product is ever formed. [`hyperbolic_times_direct`] is the
//! quadratic double-loop transcription of the definition, kept as the
//! reference oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Deriv, Mat2, Point, Vec2};
use crate::observable::Observable;
use crate::stats::KahanSum;
use crate::systems::{DynamicalSystem, Orbit};

/// Quintic smoothstep on `[0, 1]`: `6u^5 - 15u^4 + 10u^3`.
fn smoothstep(u: f64) -> f64 {
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

/// Smooth `delta`-truncated distance to the singular set: equals the
/// distance below `delta`, equals 1 beyond `2 delta`, and bridges
/// monotonically in between with the quintic smoothstep (any smooth
/// monotone bridge is admissible; this one is fixed for
/// reproducibility).
pub fn truncated_distance(sys: &DynamicalSystem, x: Point, delta: f64) -> Result<f64> {
    if delta <= 0.0 {
        return Err(Error::ParamOutOfRange {
            name: "delta",
            value: delta,
            reason: "must be positive",
        });
    }
    let d = sys.singular_distance(x);
    if d == 0.0 {
        return Err(Error::HitSingularSet { at: x, step: 0 });
    }
    Ok(truncate(d, delta))
}

fn truncate(d: f64, delta: f64) -> f64 {
    if d >= 2.0 * delta {
        1.0
    } else if d <= delta {
        d
    } else {
        let xi = 1.0 - smoothstep((d - delta) / delta);
        xi * d + 1.0 - xi
    }
}

/// `|log d_delta(x, S)|`, the recurrence depth. Zero wherever the orbit
/// is at least `2 delta` away from the singular set.
pub fn delta_log(sys: &DynamicalSystem, x: Point, delta: f64) -> Result<f64> {
    Ok(truncated_distance(sys, x, delta)?.ln().abs())
}

fn delta_log_of_distance(d: f64, delta: f64) -> f64 {
    truncate(d, delta).ln().abs()
}

/// Compensated Birkhoff sum of `phi` over the next `n` orbit points
/// (the current point included).
pub fn birkhoff_sum_orbit(orbit: &mut Orbit, phi: &Observable, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("orbit length must be positive".into()));
    }
    let mut acc = KahanSum::new();
    acc.add(phi.eval(orbit.current()));
    for _ in 1..n {
        acc.add(phi.eval(orbit.advance()?));
    }
    Ok(acc.total())
}

/// Time average `(1/n) S_n phi(x)`.
pub fn birkhoff_average(
    sys: &DynamicalSystem,
    phi: &Observable,
    x: Point,
    n: usize,
) -> Result<f64> {
    let mut orbit = Orbit::new(sys, x);
    Ok(birkhoff_sum_orbit(&mut orbit, phi, n)? / n as f64)
}

/// Average of `psi = log ||Df^{-1}||` along the orbit. Negative values
/// witness non-uniform expansion; for surfaces the inverse norm is the
/// reciprocal smallest singular value.
pub fn nue_statistic(sys: &DynamicalSystem, x: Point, n: usize) -> Result<f64> {
    let mut orbit = Orbit::new(sys, x);
    nue_statistic_orbit(sys, &mut orbit, n)
}

pub fn nue_statistic_orbit(sys: &DynamicalSystem, orbit: &mut Orbit, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("orbit length must be positive".into()));
    }
    let mut acc = KahanSum::new();
    acc.add(sys.derivative(orbit.current())?.log_inv_norm());
    for _ in 1..n {
        acc.add(sys.derivative(orbit.advance()?)?.log_inv_norm());
    }
    Ok(acc.total() / n as f64)
}

/// Average recurrence depth `(1/n) S_n Delta_delta(x)`.
pub fn slow_recurrence_statistic(
    sys: &DynamicalSystem,
    x: Point,
    n: usize,
    delta: f64,
) -> Result<f64> {
    let mut orbit = Orbit::new(sys, x);
    slow_recurrence_orbit(sys, &mut orbit, n, delta)
}

pub fn slow_recurrence_orbit(
    sys: &DynamicalSystem,
    orbit: &mut Orbit,
    n: usize,
    delta: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("orbit length must be positive".into()));
    }
    let mut acc = KahanSum::new();
    acc.add(delta_log(sys, orbit.current(), delta)?);
    for _ in 1..n {
        acc.add(delta_log(sys, orbit.advance()?, delta)?);
    }
    Ok(acc.total() / n as f64)
}

/// Birkhoff sum of `J = log |det Df|`.
pub fn sum_log_jacobian(sys: &DynamicalSystem, x: Point, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("orbit length must be positive".into()));
    }
    let mut orbit = Orbit::new(sys, x);
    let mut acc = KahanSum::new();
    acc.add(sys.derivative(orbit.current())?.log_abs_det());
    for _ in 1..n {
        acc.add(sys.derivative(orbit.advance()?)?.log_abs_det());
    }
    Ok(acc.total())
}

/// Which iterate the recurrence condition indexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecurrenceIndexing {
    /// Condition on `d_delta(f^k x)` against `e^{-bk}`, `k = 0..n-1`.
    PaperLiteral,
    /// Condition on `d_delta(f^{n-k} x)` against `e^{-bk}`: depth is
    /// measured backward from the endpoint, matching the
    /// backward-contraction structure of hyperbolic preballs.
    Reversed,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HyperbolicTimeParams {
    pub sigma: f64,
    pub delta: f64,
    pub b: f64,
    pub indexing: RecurrenceIndexing,
}

impl HyperbolicTimeParams {
    pub fn new(sigma: f64, delta: f64, b: f64) -> Result<Self> {
        if !(0.0 < sigma && sigma < 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "sigma",
                value: sigma,
                reason: "must lie in (0, 1)",
            });
        }
        if delta <= 0.0 {
            return Err(Error::ParamOutOfRange {
                name: "delta",
                value: delta,
                reason: "must be positive",
            });
        }
        if b <= 0.0 {
            return Err(Error::ParamOutOfRange {
                name: "b",
                value: b,
                reason: "must be positive",
            });
        }
        Ok(HyperbolicTimeParams {
            sigma,
            delta,
            b,
            indexing: RecurrenceIndexing::PaperLiteral,
        })
    }

    pub fn with_indexing(mut self, indexing: RecurrenceIndexing) -> Self {
        self.indexing = indexing;
        self
    }
}

/// Per-orbit arrays consumed by both detectors: `psi[j]` at the first
/// `n_max` points and `log d_delta` at all `n_max + 1` points.
struct OrbitScan {
    psi: Vec<f64>,
    logd: Vec<f64>,
}

fn orbit_scan(
    sys: &DynamicalSystem,
    orbit: &mut Orbit,
    n_max: usize,
    delta: f64,
) -> Result<OrbitScan> {
    let mut psi = Vec::with_capacity(n_max);
    let mut logd = Vec::with_capacity(n_max + 1);
    let mut p = orbit.current();
    for j in 0..=n_max {
        logd.push(truncated_distance(sys, p, delta)?.ln());
        if j < n_max {
            psi.push(sys.derivative(p)?.log_inv_norm());
            p = orbit.advance()?;
        }
    }
    Ok(OrbitScan { psi, logd })
}

/// All `(sigma, delta, b)`-hyperbolic times up to `n_max`, in O(n_max).
pub fn hyperbolic_times(
    sys: &DynamicalSystem,
    x: Point,
    n_max: usize,
    params: &HyperbolicTimeParams,
) -> Result<Vec<usize>> {
    let mut orbit = Orbit::new(sys, x);
    hyperbolic_times_orbit(sys, &mut orbit, n_max, params)
}

pub fn hyperbolic_times_orbit(
    sys: &DynamicalSystem,
    orbit: &mut Orbit,
    n_max: usize,
    params: &HyperbolicTimeParams,
) -> Result<Vec<usize>> {
    let scan = orbit_scan(sys, orbit, n_max, params.delta)?;
    Ok(detect_from_scan(&scan, params, n_max))
}

fn detect_from_scan(scan: &OrbitScan, params: &HyperbolicTimeParams, n_max: usize) -> Vec<usize> {
    let log_sigma = params.sigma.ln();
    let b = params.b;
    let mut times = Vec::new();

    // Contraction condition: with A_m the prefix sum of psi - log sigma,
    // every backward window from n is nonpositive iff A_n <= min_{m<n} A_m.
    let mut prefix = 0.0_f64;
    let mut run_min = 0.0_f64;

    // PaperLiteral: recurrence holds for n iff the first n conditions all
    // hold, so only a horizon needs tracking.
    let mut literal_horizon = usize::MAX;
    if params.indexing == RecurrenceIndexing::PaperLiteral {
        for (k, ld) in scan.logd[..n_max].iter().enumerate() {
            if *ld < -b * k as f64 {
                literal_horizon = k;
                break;
            }
        }
    }
    // Reversed: running minimum of log d_delta(f^j x) - b j over j = 1..n.
    let mut rev_min = f64::INFINITY;

    for n in 1..=n_max {
        prefix += scan.psi[n - 1] - log_sigma;
        let contraction_ok = prefix <= run_min;
        run_min = run_min.min(prefix);

        let recurrence_ok = match params.indexing {
            RecurrenceIndexing::PaperLiteral => n <= literal_horizon,
            RecurrenceIndexing::Reversed => {
                rev_min = rev_min.min(scan.logd[n] - b * n as f64);
                rev_min >= -b * n as f64
            }
        };

        if contraction_ok && recurrence_ok {
            times.push(n);
        }
    }
    times
}

/// Quadratic-time transcription of the definition, window sums evaluated
/// by direct summation. Reference oracle for the optimized detector.
pub fn hyperbolic_times_direct(
    sys: &DynamicalSystem,
    x: Point,
    n_max: usize,
    params: &HyperbolicTimeParams,
) -> Result<Vec<usize>> {
    let mut orbit = Orbit::new(sys, x);
    hyperbolic_times_direct_orbit(sys, &mut orbit, n_max, params)
}

pub fn hyperbolic_times_direct_orbit(
    sys: &DynamicalSystem,
    orbit: &mut Orbit,
    n_max: usize,
    params: &HyperbolicTimeParams,
) -> Result<Vec<usize>> {
    let scan = orbit_scan(sys, orbit, n_max, params.delta)?;
    let log_sigma = params.sigma.ln();
    let b = params.b;
    let mut times = Vec::new();
    'next_n: for n in 1..=n_max {
        for k in 1..=n {
            let mut window = 0.0_f64;
            for j in (n - k)..n {
                window += scan.psi[j] - log_sigma;
            }
            if window > 0.0 {
                continue 'next_n;
            }
        }
        for k in 0..n {
            let ld = match params.indexing {
                RecurrenceIndexing::PaperLiteral => scan.logd[k],
                RecurrenceIndexing::Reversed => scan.logd[n - k],
            };
            if ld < -b * k as f64 {
                continue 'next_n;
            }
        }
        times.push(n);
    }
    Ok(times)
}

/// Empirical frequency `#{ k : n_k <= N } / N`.
pub fn hyperbolic_time_density(times: &[usize], n_upper: usize) -> f64 {
    if n_upper == 0 {
        return 0.0;
    }
    times.iter().filter(|&&t| t <= n_upper).count() as f64 / n_upper as f64
}

/// Re-orthonormalization period of the two-dimensional cocycle; products
/// of norms around 2^n overflow without it.
const REORTHO_PERIOD: usize = 10;

/// Lyapunov exponents in descending order: the time average of
/// `log |f'|` in one dimension, and the two cocycle exponents via
/// periodically re-orthonormalized derivative products in two.
///
/// Two-dimensional runs discard a short alignment transient before
/// accumulating (the initial frame is not adapted to the splitting, and
/// the `O(1)` angle factor would otherwise pollute the `1/n` term).
pub fn lyapunov_spectrum(sys: &DynamicalSystem, x: Point, n: usize) -> Result<Vec<f64>> {
    let mut orbit = Orbit::new(sys, x);
    lyapunov_spectrum_orbit(sys, &mut orbit, n)
}

pub fn lyapunov_spectrum_orbit(
    sys: &DynamicalSystem,
    orbit: &mut Orbit,
    n: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("orbit length must be positive".into()));
    }
    if sys.dimension() == 1 {
        let mut acc = KahanSum::new();
        match sys.derivative(orbit.current())? {
            Deriv::Scalar(d) => acc.add(d.abs().ln()),
            Deriv::Mat(_) => unreachable!("one-dimensional system"),
        }
        for _ in 1..n {
            match sys.derivative(orbit.advance()?)? {
                Deriv::Scalar(d) => acc.add(d.abs().ln()),
                Deriv::Mat(_) => unreachable!("one-dimensional system"),
            }
        }
        return Ok(vec![acc.total() / n as f64]);
    }

    let warmup = (n / 10).min(50);
    let mut frame = (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0));
    let mut sums = (KahanSum::new(), KahanSum::new());
    for step in 0..warmup + n {
        let m = match sys.derivative(orbit.current())? {
            Deriv::Mat(m) => m,
            Deriv::Scalar(d) => Mat2::new(d, 0.0, 0.0, 1.0),
        };
        frame = (m.apply(frame.0), m.apply(frame.1));
        let boundary = step + 1 == warmup || step + 1 == warmup + n;
        if (step + 1) % REORTHO_PERIOD == 0 || boundary {
            let (r11, r22, q1, q2) = gram_schmidt(frame);
            frame = (q1, q2);
            if step >= warmup {
                sums.0.add(r11.ln());
                sums.1.add(r22.ln());
            }
        }
        if step + 1 < warmup + n {
            orbit.advance()?;
        }
    }
    let mut exps = [sums.0.total() / n as f64, sums.1.total() / n as f64];
    exps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(exps.to_vec())
}

fn gram_schmidt(frame: (Vec2, Vec2)) -> (f64, f64, Vec2, Vec2) {
    let r11 = frame.0.norm();
    let q1 = frame.0.scale(1.0 / r11);
    let proj = frame.1.dot(q1);
    let ortho = frame.1.add(q1.scale(-proj));
    let r22 = ortho.norm();
    (r11, r22, q1, ortho.scale(1.0 / r22))
}

/// Sum of the positive Lyapunov exponents.
pub fn sigma_plus(exponents: &[f64]) -> f64 {
    exponents.iter().filter(|e| **e > 0.0).sum()
}

/// Everything worth keeping from one ensemble orbit, one CSV row per
/// orbit. Column order: `start_x, start_y, n, sum_<obs>..., sum_psi,
/// sum_delta, sum_log_jacobian, min_singular_distance, hyp_time_count,
/// hyp_density`.
#[derive(Clone, Debug)]
pub struct OrbitSummary {
    pub start: Point,
    pub n: usize,
    /// Observable name and Birkhoff sum `S_n phi`.
    pub observables: Vec<(String, f64)>,
    pub sum_psi: f64,
    pub sum_delta: f64,
    pub sum_log_jac: f64,
    pub min_singular_distance: f64,
    pub hyperbolic_times: Vec<usize>,
}

impl OrbitSummary {
    pub fn csv_header(names: &[String]) -> String {
        let obs: Vec<String> = names.iter().map(|n| format!("sum_{n}")).collect();
        format!(
            "start_x,start_y,n_iterates,{},sum_psi,sum_delta,sum_log_jacobian,min_singular_distance,hyp_time_count,hyp_density",
            obs.join(",")
        )
    }

    pub fn csv_row(&self) -> String {
        let obs: Vec<String> = self
            .observables
            .iter()
            .map(|(_, v)| format!("{v:.17e}"))
            .collect();
        format!(
            "{:.17e},{:.17e},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.6}",
            self.start.x,
            self.start.y,
            self.n,
            obs.join(","),
            self.sum_psi,
            self.sum_delta,
            self.sum_log_jac,
            self.min_singular_distance,
            self.hyperbolic_times.len(),
            hyperbolic_time_density(&self.hyperbolic_times, self.n),
        )
    }
}

/// Scan one orbit and collect the summary row. The orbit is consumed
/// from its current position for `n` steps.
pub fn orbit_summary(
    sys: &DynamicalSystem,
    orbit: &mut Orbit,
    observables: &[Observable],
    n: usize,
    ht: &HyperbolicTimeParams,
) -> Result<OrbitSummary> {
    if n == 0 {
        return Err(Error::InvalidInput("orbit length must be positive".into()));
    }
    let start = orbit.current();
    let mut sums: Vec<KahanSum> = observables.iter().map(|_| KahanSum::new()).collect();
    let mut psi = Vec::with_capacity(n);
    let mut logd = Vec::with_capacity(n + 1);
    let mut min_dist = f64::INFINITY;
    let mut sum_psi = KahanSum::new();
    let mut sum_delta = KahanSum::new();
    let mut sum_jac = KahanSum::new();

    let mut p = start;
    for j in 0..=n {
        let d = sys.singular_distance(p);
        logd.push(truncate(d, ht.delta).ln());
        if j < n {
            min_dist = min_dist.min(d);
            for (i, phi) in observables.iter().enumerate() {
                sums[i].add(phi.eval(p));
            }
            let deriv = sys.derivative(p)?;
            let psi_j = deriv.log_inv_norm();
            psi.push(psi_j);
            sum_psi.add(psi_j);
            sum_delta.add(delta_log_of_distance(d, ht.delta));
            sum_jac.add(deriv.log_abs_det());
            p = orbit.advance()?;
        }
    }

    let scan = OrbitScan { psi, logd };
    let times = detect_from_scan(&scan, ht, n);

    Ok(OrbitSummary {
        start,
        n,
        observables: observables
            .iter()
            .zip(&sums)
            .map(|(o, s)| (o.name(), s.total()))
            .collect(),
        sum_psi: sum_psi.total(),
        sum_delta: sum_delta.total(),
        sum_log_jac: sum_jac.total(),
        min_singular_distance: min_dist,
        hyperbolic_times: times,
    })
}
