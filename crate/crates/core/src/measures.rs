//! Empirical physical measures, basin counting, Brin-Katok local entropy
//! and integrals against binned measures.
//!
//! An [`EmpiricalMeasure`] is a uniform bin grid over the domain with
//! nonnegative weights of total mass one, built by pooling the
//! post-burn-in segments of an ensemble of orbits. Starts that hit the
//! singular set or leave the domain are resampled from their own random
//! stream and counted in a diagnostics field, so histograms are
//! reproducible bit for bit for a fixed seed regardless of worker count.

use crate::error::{Error, Result};
use crate::geom::{DomainSpec, Point};
use crate::observable::Observable;
use crate::parallel::{run_sharded, run_sharded_fold};
use crate::rng::Stream;
use crate::stats::KahanSum;
use crate::systems::DynamicalSystem;

const RETRY_LIMIT: usize = 100;

#[derive(Clone, Copy, Debug)]
pub struct MeasureConfig {
    pub starts: usize,
    pub burn_in: usize,
    /// Samples kept per start after burn-in.
    pub iterates: usize,
    /// Bins per axis.
    pub bins: usize,
    pub seed: u64,
    pub workers: usize,
}

/// A binned approximation of a physical measure.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    domain: DomainSpec,
    bins_x: usize,
    bins_y: usize,
    weights: Vec<f64>,
    pub samples: u64,
    /// Starts that had to be redrawn after an orbit error.
    pub resampled_starts: u64,
    /// Starts abandoned after the retry limit.
    pub failed_starts: u64,
}

impl EmpiricalMeasure {
    fn grid_for(domain: DomainSpec, bins: usize) -> (usize, usize) {
        match domain.dimension() {
            1 => (bins, 1),
            _ => (bins, bins),
        }
    }

    pub fn bins(&self) -> (usize, usize) {
        (self.bins_x, self.bins_y)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn unit_coords(&self, p: Point) -> (f64, f64) {
        match self.domain {
            DomainSpec::Interval { lo, hi } => ((p.x - lo) / (hi - lo), 0.0),
            DomainSpec::Circle => (p.x.rem_euclid(1.0), 0.0),
            DomainSpec::Cylinder { lo, hi } => (p.x.rem_euclid(1.0), (p.y - lo) / (hi - lo)),
            DomainSpec::Torus2 => (p.x.rem_euclid(1.0), p.y.rem_euclid(1.0)),
        }
    }

    pub fn bin_index(&self, p: Point) -> usize {
        let (ux, uy) = self.unit_coords(p);
        let ix = ((ux * self.bins_x as f64) as usize).min(self.bins_x - 1);
        let iy = ((uy * self.bins_y as f64) as usize).min(self.bins_y - 1);
        iy * self.bins_x + ix
    }

    pub fn bin_midpoint(&self, index: usize) -> Point {
        let ix = index % self.bins_x;
        let iy = index / self.bins_x;
        let ux = (ix as f64 + 0.5) / self.bins_x as f64;
        let uy = (iy as f64 + 0.5) / self.bins_y as f64;
        match self.domain {
            DomainSpec::Interval { lo, hi } => Point::one(lo + ux * (hi - lo)),
            DomainSpec::Circle => Point::one(ux),
            DomainSpec::Cylinder { lo, hi } => Point::two(ux, lo + uy * (hi - lo)),
            DomainSpec::Torus2 => Point::two(ux, uy),
        }
    }

    /// Bin edges along each axis, for serialization.
    pub fn bin_bounds(&self, index: usize) -> (f64, f64, f64, f64) {
        let ix = index % self.bins_x;
        let iy = index / self.bins_x;
        let (x0, x1) = axis_bounds(&self.domain, true, ix, self.bins_x);
        let (y0, y1) = axis_bounds(&self.domain, false, iy, self.bins_y);
        (x0, x1, y0, y1)
    }

    pub fn l1_distance(&self, other: &EmpiricalMeasure) -> Result<f64> {
        if self.weights.len() != other.weights.len() {
            return Err(Error::InvalidInput("bin grids differ".into()));
        }
        let mut acc = KahanSum::new();
        for (a, b) in self.weights.iter().zip(&other.weights) {
            acc.add((a - b).abs());
        }
        Ok(acc.total())
    }

    /// Bin-midpoint quadrature of an observable; exact for bin-constant
    /// integrands, second order in the bin width otherwise.
    pub fn integrate(&self, phi: &Observable) -> f64 {
        let mut acc = KahanSum::new();
        for (i, w) in self.weights.iter().enumerate() {
            if *w > 0.0 {
                acc.add(w * phi.eval(self.bin_midpoint(i)));
            }
        }
        acc.total()
    }

    /// Coordinate means and variances under the binned measure.
    pub fn moments(&self) -> ((f64, f64), (f64, f64)) {
        let (mut mx, mut my) = (KahanSum::new(), KahanSum::new());
        for (i, w) in self.weights.iter().enumerate() {
            let p = self.bin_midpoint(i);
            mx.add(w * p.x);
            my.add(w * p.y);
        }
        let (ex, ey) = (mx.total(), my.total());
        let (mut vx, mut vy) = (KahanSum::new(), KahanSum::new());
        for (i, w) in self.weights.iter().enumerate() {
            let p = self.bin_midpoint(i);
            vx.add(w * (p.x - ex) * (p.x - ex));
            vy.add(w * (p.y - ey) * (p.y - ey));
        }
        ((ex, vx.total()), (ey, vy.total()))
    }

    /// Fraction of bins carrying mass.
    pub fn support_fraction(&self) -> f64 {
        self.weights.iter().filter(|w| **w > 0.0).count() as f64 / self.weights.len() as f64
    }

    fn from_counts(
        domain: DomainSpec,
        bins: (usize, usize),
        counts: &[u64],
        resampled: u64,
        failed: u64,
    ) -> Result<EmpiricalMeasure> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InsufficientData("empty histogram".into()));
        }
        Ok(EmpiricalMeasure {
            domain,
            bins_x: bins.0,
            bins_y: bins.1,
            weights: counts.iter().map(|c| *c as f64 / total as f64).collect(),
            samples: total,
            resampled_starts: resampled,
            failed_starts: failed,
        })
    }
}

fn axis_bounds(domain: &DomainSpec, x_axis: bool, i: usize, n: usize) -> (f64, f64) {
    let (lo, hi) = match (domain, x_axis) {
        (DomainSpec::Interval { lo, hi }, true) => (*lo, *hi),
        (DomainSpec::Interval { .. }, false) => (0.0, 0.0),
        (DomainSpec::Circle, true) => (0.0, 1.0),
        (DomainSpec::Circle, false) => (0.0, 0.0),
        (DomainSpec::Cylinder { .. }, true) => (0.0, 1.0),
        (DomainSpec::Cylinder { lo, hi }, false) => (*lo, *hi),
        (DomainSpec::Torus2, _) => (0.0, 1.0),
    };
    if hi <= lo {
        return (lo, hi);
    }
    let w = (hi - lo) / n as f64;
    (lo + i as f64 * w, lo + (i + 1) as f64 * w)
}

/// Accumulate one start's post-burn-in segment into `counts`, retrying
/// with fresh draws from the same stream on orbit errors.
fn accumulate_start(
    sys: &DynamicalSystem,
    proto: &EmpiricalMeasure,
    cfg: &MeasureConfig,
    index: usize,
    counts: &mut [u64],
) -> (u64, bool) {
    let mut rng = Stream::for_index(cfg.seed, index as u64);
    let mut resampled = 0u64;
    'retry: for _ in 0..RETRY_LIMIT {
        let start = sys.domain().sample(&mut rng);
        let mut orbit = sys.orbit_seeded(start, rng.clone());
        // Branch the stream so a retry does not replay the same tail.
        rng.next_u64();
        let mut temp: Vec<u32> = Vec::new();
        let mut temp_sparse: Vec<(usize, u32)> = Vec::new();
        let use_sparse = cfg.iterates < counts.len() / 4;
        if !use_sparse {
            temp = vec![0u32; counts.len()];
        }
        if orbit.advance_by(cfg.burn_in).is_err() {
            resampled += 1;
            continue 'retry;
        }
        for step in 0..cfg.iterates {
            let p = orbit.current();
            let b = proto.bin_index(p);
            if use_sparse {
                temp_sparse.push((b, 1));
            } else {
                temp[b] += 1;
            }
            if step + 1 < cfg.iterates && orbit.advance().is_err() {
                resampled += 1;
                continue 'retry;
            }
        }
        if use_sparse {
            for (b, c) in temp_sparse {
                counts[b] += c as u64;
            }
        } else {
            for (b, c) in temp.iter().enumerate() {
                counts[b] += *c as u64;
            }
        }
        return (resampled, false);
    }
    (resampled, true)
}

/// Pooled histogram of `starts` orbits.
pub fn empirical_measure(sys: &DynamicalSystem, cfg: &MeasureConfig) -> Result<EmpiricalMeasure> {
    if cfg.bins < 2 {
        return Err(Error::InvalidInput("need at least 2 bins".into()));
    }
    if cfg.starts == 0 || cfg.iterates == 0 {
        return Err(Error::InvalidInput(
            "need starts >= 1 and iterates >= 1".into(),
        ));
    }
    let bins = EmpiricalMeasure::grid_for(*sys.domain(), cfg.bins);
    let proto = EmpiricalMeasure {
        domain: *sys.domain(),
        bins_x: bins.0,
        bins_y: bins.1,
        weights: vec![],
        samples: 0,
        resampled_starts: 0,
        failed_starts: 0,
    };
    let zero = (vec![0u64; bins.0 * bins.1], 0u64, 0u64);
    let (counts, resampled, failed) = run_sharded_fold(
        cfg.starts,
        cfg.workers,
        zero,
        |acc, i| {
            let (res, fail) = accumulate_start(sys, &proto, cfg, i, &mut acc.0);
            acc.1 += res;
            acc.2 += u64::from(fail);
        },
        |mut a, b| {
            for (x, y) in a.0.iter_mut().zip(&b.0) {
                *x += *y;
            }
            (a.0, a.1 + b.1, a.2 + b.2)
        },
    );
    if failed as usize >= cfg.starts {
        return Err(Error::AllStartsFailed(cfg.starts));
    }
    EmpiricalMeasure::from_counts(*sys.domain(), bins, &counts, resampled, failed)
}

/// Result of clustering per-start histograms.
#[derive(Clone, Debug)]
pub struct BasinReport {
    /// Estimated number of physical measures.
    pub count: usize,
    /// One representative histogram per cluster with its member count.
    pub representatives: Vec<(EmpiricalMeasure, usize)>,
    pub failed_starts: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct BasinConfig {
    pub starts: usize,
    pub burn_in: usize,
    pub iterates: usize,
    pub bins: usize,
    /// L1 distance below which two per-start histograms belong to the
    /// same basin.
    pub tol: f64,
    pub seed: u64,
    pub workers: usize,
}

/// Cluster per-start histograms by L1 distance: the number of clusters
/// estimates the number of physical measures whose basins the starts
/// sample.
pub fn basin_count(sys: &DynamicalSystem, cfg: &BasinConfig) -> Result<BasinReport> {
    let mcfg = MeasureConfig {
        starts: 1,
        burn_in: cfg.burn_in,
        iterates: cfg.iterates,
        bins: cfg.bins,
        seed: cfg.seed,
        workers: 1,
    };
    let per_start: Vec<Option<EmpiricalMeasure>> = run_sharded(cfg.starts, cfg.workers, |i| {
        let cfg_i = MeasureConfig {
            seed: Stream::for_index(mcfg.seed, i as u64).next_u64(),
            ..mcfg
        };
        empirical_measure(sys, &cfg_i).ok()
    });

    let mut reps: Vec<(EmpiricalMeasure, usize)> = Vec::new();
    let mut failed = 0u64;
    for m in per_start.into_iter() {
        let Some(m) = m else {
            failed += 1;
            continue;
        };
        let mut assigned = false;
        for (rep, count) in reps.iter_mut() {
            if rep.l1_distance(&m)? <= cfg.tol {
                *count += 1;
                assigned = true;
                break;
            }
        }
        if !assigned {
            reps.push((m, 1));
        }
    }
    Ok(BasinReport {
        count: reps.len(),
        representatives: reps,
        failed_starts: failed,
    })
}

/// A burned-in ensemble of points used as the sampling measure for
/// local-entropy estimation.
#[derive(Clone, Debug)]
pub struct EmpiricalOrbitSet {
    pub points: Vec<Point>,
    pub failed_starts: u64,
}

impl EmpiricalOrbitSet {
    pub fn sample(
        sys: &DynamicalSystem,
        count: usize,
        burn_in: usize,
        seed: u64,
        workers: usize,
    ) -> Result<EmpiricalOrbitSet> {
        let raw: Vec<Option<Point>> = run_sharded(count, workers, |i| {
            let mut rng = Stream::for_index(seed, i as u64);
            for _ in 0..RETRY_LIMIT {
                let start = sys.domain().sample(&mut rng);
                let mut orbit = sys.orbit_seeded(start, rng.clone());
                rng.next_u64();
                if orbit.advance_by(burn_in).is_ok() {
                    return Some(orbit.current());
                }
            }
            None
        });
        let failed = raw.iter().filter(|p| p.is_none()).count() as u64;
        let points: Vec<Point> = raw.into_iter().flatten().collect();
        if points.is_empty() {
            return Err(Error::AllStartsFailed(count));
        }
        Ok(EmpiricalOrbitSet {
            points,
            failed_starts: failed,
        })
    }
}

/// Brin-Katok local entropy estimate at `x`.
#[derive(Clone, Copy, Debug)]
pub struct LocalEntropy {
    /// Log-rate of dynamical-ball decay between one step and `n` steps:
    /// `(log c_1 - log c_n) / (n - 1)`.
    pub rate: f64,
    /// Ensemble points within `eps` of `x`.
    pub count_first: u64,
    /// Ensemble points shadowing all `n` steps.
    pub count_full: u64,
    /// The full count was zero and replaced by the rule-of-three
    /// surrogate 3, making the rate a lower bound.
    pub censored: bool,
}

/// Estimate the local entropy at `x` from the fraction of ensemble
/// points whose first `n` iterates `eps`-shadow those of `x`.
pub fn local_entropy(
    sys: &DynamicalSystem,
    ensemble: &EmpiricalOrbitSet,
    x: Point,
    n: usize,
    eps: f64,
) -> Result<LocalEntropy> {
    if n < 2 {
        return Err(Error::InvalidInput(
            "need n >= 2 to measure a decay rate".into(),
        ));
    }
    if eps <= 0.0 {
        return Err(Error::InvalidInput("need eps > 0".into()));
    }
    let mut orbit = sys.orbit(x);
    let mut reference = Vec::with_capacity(n);
    reference.push(x);
    for _ in 1..n {
        reference.push(orbit.advance()?);
    }

    let mut count_first = 0u64;
    let mut count_full = 0u64;
    for &y in &ensemble.points {
        let depth = shadow_depth(sys, &reference, y, eps);
        if depth >= 1 {
            count_first += 1;
        }
        if depth >= n {
            count_full += 1;
        }
    }
    if count_first < 10 {
        return Err(Error::InsufficientData(format!(
            "only {count_first} ensemble points fall in the eps-ball; enlarge the ensemble"
        )));
    }
    let censored = count_full == 0;
    let effective = if censored { 3.0 } else { count_full as f64 };
    let rate = ((count_first as f64).ln() - effective.ln()) / (n as f64 - 1.0);
    Ok(LocalEntropy {
        rate,
        count_first,
        count_full,
        censored,
    })
}

fn shadow_depth(sys: &DynamicalSystem, reference: &[Point], y: Point, eps: f64) -> usize {
    let mut orbit = sys.orbit(y);
    for (i, rp) in reference.iter().enumerate() {
        if sys.domain().dist(*rp, orbit.current()) >= eps {
            return i;
        }
        if i + 1 < reference.len() && orbit.advance().is_err() {
            return i + 1;
        }
    }
    reference.len()
}

#[derive(Clone, Copy, Debug)]
pub struct RuelleConfig {
    pub ensemble: usize,
    pub burn_in: usize,
    pub reference_points: usize,
    pub n: usize,
    pub eps: f64,
    pub lyapunov_n: usize,
    pub seed: u64,
    pub workers: usize,
}

/// Entropy-versus-exponents check: averaged local entropy against the
/// sum of positive Lyapunov exponents, with slack for estimator noise.
#[derive(Clone, Debug)]
pub struct RuelleReport {
    pub system: String,
    pub local_entropy_mean: f64,
    pub evaluated: usize,
    pub censored: usize,
    pub sigma_plus: f64,
    /// `sigma_plus + 0.1 - local_entropy_mean`; nonnegative passes.
    pub margin: f64,
    pub pass: bool,
}

pub fn ruelle_check(sys: &DynamicalSystem, cfg: &RuelleConfig) -> Result<RuelleReport> {
    let ensemble =
        EmpiricalOrbitSet::sample(sys, cfg.ensemble, cfg.burn_in, cfg.seed, cfg.workers)?;
    let refs = EmpiricalOrbitSet::sample(
        sys,
        cfg.reference_points,
        cfg.burn_in,
        cfg.seed ^ 0x5EED_0F0F,
        cfg.workers,
    )?;

    let mut rates = Vec::new();
    let mut censored = 0usize;
    for &x in refs.points.iter().take(cfg.reference_points) {
        match local_entropy(sys, &ensemble, x, cfg.n, cfg.eps) {
            Ok(le) => {
                rates.push(le.rate);
                censored += usize::from(le.censored);
            }
            Err(Error::InsufficientData(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if rates.is_empty() {
        return Err(Error::InsufficientData(
            "no reference point had enough neighbours".into(),
        ));
    }
    let h_mean = rates.iter().sum::<f64>() / rates.len() as f64;

    // Average the Lyapunov spectrum over a few burned-in starts.
    let mut spectra: Vec<Vec<f64>> = Vec::new();
    let mut rng = Stream::new(cfg.seed ^ 0xACE0_ACE0);
    let mut attempts = 0;
    while spectra.len() < 4 && attempts < 40 {
        attempts += 1;
        let start = sys.domain().sample(&mut rng);
        let mut orbit = sys.orbit_seeded(start, rng.clone());
        rng.next_u64();
        if orbit.advance_by(cfg.burn_in).is_err() {
            continue;
        }
        if let Ok(spec) =
            crate::diagnostics::lyapunov_spectrum_orbit(sys, &mut orbit, cfg.lyapunov_n)
        {
            spectra.push(spec);
        }
    }
    if spectra.is_empty() {
        return Err(Error::InsufficientData(
            "no start yielded a Lyapunov spectrum".into(),
        ));
    }
    let dim = spectra[0].len();
    let mean_spec: Vec<f64> = (0..dim)
        .map(|i| spectra.iter().map(|s| s[i]).sum::<f64>() / spectra.len() as f64)
        .collect();
    let sigma_plus = crate::diagnostics::sigma_plus(&mean_spec);

    let margin = sigma_plus + 0.1 - h_mean;
    Ok(RuelleReport {
        system: sys.name().to_string(),
        local_entropy_mean: h_mean,
        evaluated: rates.len(),
        censored,
        sigma_plus,
        margin,
        pass: margin >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{build_system, FamilyId, Params};

    fn sys(f: FamilyId) -> DynamicalSystem {
        build_system(f, &Params::new()).unwrap()
    }

    fn cfg(starts: usize, iterates: usize, bins: usize) -> MeasureConfig {
        MeasureConfig {
            starts,
            burn_in: 50,
            iterates,
            bins,
            seed: 2024,
            workers: 4,
        }
    }

    #[test]
    fn doubling_histogram_is_uniform() {
        let s = sys(FamilyId::Doubling);
        let m = empirical_measure(&s, &cfg(200, 2000, 10)).unwrap();
        let total: f64 = m.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for w in m.weights() {
            assert!((w - 0.1).abs() < 0.01, "weight {w}");
        }
    }

    #[test]
    fn histograms_are_worker_count_invariant() {
        let s = sys(FamilyId::Doubling);
        let a = empirical_measure(
            &s,
            &MeasureConfig {
                workers: 1,
                ..cfg(100, 500, 16)
            },
        )
        .unwrap();
        let b = empirical_measure(
            &s,
            &MeasureConfig {
                workers: 5,
                ..cfg(100, 500, 16)
            },
        )
        .unwrap();
        assert_eq!(a.weights(), b.weights());
    }

    #[test]
    fn integrate_uniform_coordinate() {
        let s = sys(FamilyId::Doubling);
        let m = empirical_measure(&s, &cfg(200, 2000, 10)).unwrap();
        let mean_x = m.integrate(&Observable::Coordinate);
        assert!((mean_x - 0.5).abs() < 0.01);
        let c = m.integrate(&Observable::Constant(3.0));
        assert!((c - 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_basins_control_finds_two_clusters() {
        let s = sys(FamilyId::TwoBasins);
        let report = basin_count(
            &s,
            &BasinConfig {
                starts: 60,
                burn_in: 400,
                iterates: 400,
                bins: 20,
                tol: 0.5,
                seed: 7,
                workers: 4,
            },
        )
        .unwrap();
        assert_eq!(
            report.count,
            2,
            "representatives: {}",
            report.representatives.len()
        );
    }

    #[test]
    fn doubling_has_one_basin() {
        let s = sys(FamilyId::Doubling);
        let report = basin_count(
            &s,
            &BasinConfig {
                starts: 40,
                burn_in: 100,
                iterates: 4000,
                bins: 10,
                tol: 0.15,
                seed: 7,
                workers: 4,
            },
        )
        .unwrap();
        assert_eq!(report.count, 1);
    }

    #[test]
    fn rotation_local_entropy_vanishes() {
        let s = sys(FamilyId::Rotation);
        let ens = EmpiricalOrbitSet::sample(&s, 20_000, 10, 5, 4).unwrap();
        let le = local_entropy(&s, &ens, Point::one(0.33), 12, 0.05).unwrap();
        assert!(le.rate.abs() < 0.05, "rate {}", le.rate);
        assert!(!le.censored);
    }

    #[test]
    fn doubling_local_entropy_is_log_two() {
        let s = sys(FamilyId::Doubling);
        let ens = EmpiricalOrbitSet::sample(&s, 3_000_000, 0, 6, 8).unwrap();
        let le = local_entropy(&s, &ens, Point::one(0.312371), 15, 0.05).unwrap();
        assert!((le.rate - 2.0_f64.ln()).abs() < 0.1, "rate {}", le.rate);
    }

    #[test]
    fn cat_map_local_entropy_matches_the_linear_model() {
        // Dynamical balls contract only along the unstable direction, so
        // the count ratio decays at the unstable eigenvalue rate.
        let s = sys(FamilyId::CatMap);
        let ens = EmpiricalOrbitSet::sample(&s, 1_000_000, 0, 8, 8).unwrap();
        let le = local_entropy(&s, &ens, Point::two(0.2137, 0.7613), 8, 0.15).unwrap();
        let expect = ((3.0 + 5.0_f64.sqrt()) / 2.0).ln();
        assert!(
            (le.rate - expect).abs() < 0.1,
            "rate {} vs {expect}",
            le.rate
        );
        assert!(!le.censored);
    }

    #[test]
    fn censored_ball_uses_rule_of_three() {
        let s = sys(FamilyId::Doubling);
        let ens = EmpiricalOrbitSet::sample(&s, 2_000, 0, 6, 4).unwrap();
        // Far deeper than 2000 points can resolve: the full count must
        // censor.
        let le = local_entropy(&s, &ens, Point::one(0.312371), 25, 0.02).unwrap();
        assert!(le.censored);
        assert_eq!(le.count_full, 0);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        let s = sys(FamilyId::Doubling);
        let bad = MeasureConfig {
            starts: 10,
            burn_in: 0,
            iterates: 10,
            bins: 1,
            seed: 1,
            workers: 1,
        };
        assert!(matches!(
            empirical_measure(&s, &bad),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn mass_is_conserved_on_every_construction_path() {
        for f in [
            FamilyId::Doubling,
            FamilyId::Quadratic,
            FamilyId::Gauss,
            FamilyId::CatMap,
        ] {
            let s = sys(f);
            let m = empirical_measure(
                &s,
                &MeasureConfig {
                    starts: 50,
                    burn_in: 20,
                    iterates: 200,
                    bins: 8,
                    seed: 3,
                    workers: 3,
                },
            )
            .unwrap();
            let total: f64 = m.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "family {f}: mass {total}");
        }
    }
}
