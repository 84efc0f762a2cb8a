//! Volumes of dynamical balls `B(x, n, r) = { y : d(f^i x, f^i y) < r,
//! i < n }`, by Monte Carlo for any system and by exact arc enumeration
//! for the full-branch linear circle maps.
//!
//! At hyperbolic times the volume is controlled by the Jacobian sum:
//! `Leb(B(x, n, r)) * exp(S_n J(x))` stays of order `r` uniformly in
//! `n`, which the exact enumeration reproduces to rounding error.

use crate::arcs::ArcSet;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::parallel::run_sharded_fold;
use crate::rng::Stream;
use crate::stats::{wilson_ci, Z_95};
use crate::systems::{DynamicalSystem, Kind, Orbit};

/// A Monte-Carlo (or exact) fraction with its confidence interval.
#[derive(Clone, Copy, Debug)]
pub struct VolumeEstimate {
    /// Normalized measure (the domain has total mass 1).
    pub measure: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub hits: u64,
    pub samples: u64,
    pub exact: bool,
}

/// Monte-Carlo volume of the dynamical ball by uniform sampling of the
/// domain, sharded deterministically.
pub fn dynamical_ball_volume(
    sys: &DynamicalSystem,
    x: Point,
    n: usize,
    r: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<VolumeEstimate> {
    if n == 0 || r <= 0.0 {
        return Err(Error::InvalidInput("need n >= 1 and r > 0".into()));
    }
    let reference = orbit_points(sys, x, n)?;
    let hits = run_sharded_fold(
        samples,
        workers,
        0u64,
        |acc, i| {
            let mut rng = Stream::for_index(seed, i as u64);
            let y = sys.domain().sample(&mut rng);
            if shadows(sys, &reference, y, r) {
                *acc += 1;
            }
        },
        |a, b| a + b,
    );
    let (ci_lo, ci_hi) = wilson_ci(hits, samples as u64, Z_95);
    Ok(VolumeEstimate {
        measure: hits as f64 / samples as f64,
        ci_lo,
        ci_hi,
        hits,
        samples: samples as u64,
        exact: false,
    })
}

fn orbit_points(sys: &DynamicalSystem, x: Point, n: usize) -> Result<Vec<Point>> {
    let mut orbit = Orbit::new(sys, x);
    let mut pts = Vec::with_capacity(n);
    pts.push(x);
    for _ in 1..n {
        pts.push(orbit.advance()?);
    }
    Ok(pts)
}

fn shadows(sys: &DynamicalSystem, reference: &[Point], y: Point, r: f64) -> bool {
    let mut orbit = Orbit::new(sys, y);
    for (i, rp) in reference.iter().enumerate() {
        let p = orbit.current();
        if sys.domain().dist(*rp, p) >= r {
            return false;
        }
        if i + 1 < reference.len() && orbit.advance().is_err() {
            return false;
        }
    }
    true
}

/// Exact ball volume for the full-branch linear circle maps, by backward
/// arc enumeration: `T_{i} = ball(f^i x, r) /\ f^{-1}(T_{i+1})`.
pub fn dynamical_ball_volume_exact(
    sys: &DynamicalSystem,
    x: Point,
    n: usize,
    r: f64,
) -> Result<VolumeEstimate> {
    let k = match sys.kind {
        Kind::Doubling => 2u32,
        Kind::ExpandingCircle { k } => k,
        _ => {
            return Err(Error::Unsupported(format!(
                "exact ball enumeration needs a full-branch linear circle map, not `{}`",
                sys.name()
            )))
        }
    };
    if n == 0 || r <= 0.0 {
        return Err(Error::InvalidInput("need n >= 1 and r > 0".into()));
    }
    let pts = orbit_points(sys, x, n)?;
    let mut set = ArcSet::ball(pts[n - 1].x, r);
    for i in (0..n - 1).rev() {
        set = ArcSet::ball(pts[i].x, r).intersect(&set.preimage_linear(k)?);
    }
    let measure = set.total_length();
    Ok(VolumeEstimate {
        measure,
        ci_lo: measure,
        ci_hi: measure,
        hits: 0,
        samples: 0,
        exact: true,
    })
}
