//! Sampled verification that the derivative behaves like a power of the
//! distance to the singular set: for constants `B > 1`, `beta > 0`,
//!
//! ```text
//! (1/B) d(x,S)^beta  <=  ||Df(x) v|| / ||v||  <=  B d(x,S)^{-beta}
//! ```
//!
//! for all tangent vectors. Points are sampled at geometrically shrinking
//! distances from the singular set, where the power law is the binding
//! constraint.

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::rng::Stream;
use crate::systems::{DynamicalSystem, Kind};

#[derive(Clone, Copy, Debug)]
pub struct NonflatViolation {
    pub at: Point,
    pub distance: f64,
    /// Observed expansion factor that broke a bound.
    pub factor: f64,
    /// The bound it broke.
    pub bound: f64,
    pub upper: bool,
}

#[derive(Clone, Debug)]
pub struct NonflatReport {
    pub checked: usize,
    pub skipped: usize,
    pub violations: Vec<NonflatViolation>,
}

impl NonflatReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample `samples` points at log-uniform distances in `(1e-9, d_max)`
/// from the singular set and test both power-law bounds. Relative slack
/// of `1e-9` absorbs rounding in the distance computation itself.
pub fn check_nonflat(
    sys: &DynamicalSystem,
    big_b: f64,
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<NonflatReport> {
    if !sys.has_singular_set() {
        return Err(Error::EmptySingularSet(sys.name().to_string()));
    }
    if big_b <= 1.0 {
        return Err(Error::ParamOutOfRange {
            name: "B",
            value: big_b,
            reason: "must exceed 1",
        });
    }
    if beta <= 0.0 {
        return Err(Error::ParamOutOfRange {
            name: "beta",
            value: beta,
            reason: "must be positive",
        });
    }

    let mut rng = Stream::new(seed);
    let d_max: f64 = 1.0;
    let d_min: f64 = 1e-9;
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut skipped = 0;

    for _ in 0..samples {
        let d_target = d_max * (d_min / d_max).powf(rng.next_f64());
        let Some(p) = point_near_singular(sys, d_target, &mut rng) else {
            skipped += 1;
            continue;
        };
        let d = sys.singular_distance(p);
        if d <= 0.0 || !d.is_finite() {
            skipped += 1;
            continue;
        }
        let deriv = match sys.derivative(p) {
            Ok(d) => d,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        checked += 1;
        let lo_bound = d.powf(beta) / big_b;
        let hi_bound = big_b * d.powf(-beta);
        let slack = 1.0 + 1e-9;
        let co = deriv.co_norm();
        let op = deriv.op_norm();
        if co * slack < lo_bound {
            violations.push(NonflatViolation {
                at: p,
                distance: d,
                factor: co,
                bound: lo_bound,
                upper: false,
            });
        }
        if op > hi_bound * slack {
            violations.push(NonflatViolation {
                at: p,
                distance: d,
                factor: op,
                bound: hi_bound,
                upper: true,
            });
        }
    }

    Ok(NonflatReport {
        checked,
        skipped,
        violations,
    })
}

/// A point at (approximately) the requested distance from the singular
/// set, or `None` when no such point fits in the domain.
fn point_near_singular(sys: &DynamicalSystem, d: f64, rng: &mut Stream) -> Option<Point> {
    let side = if rng.next_f64() < 0.5 { 1.0 } else { -1.0 };
    match &sys.kind {
        Kind::Quadratic { .. } => Some(Point::one(side * d)),
        Kind::Lorenz1d { .. } => {
            if d <= 1.0 {
                Some(Point::one(side * d))
            } else {
                None
            }
        }
        Kind::Gauss => {
            if d < 1.0 {
                Some(Point::one(d))
            } else {
                None
            }
        }
        Kind::InfiniteModal(im) => {
            // Pick a random singular position and step off it; the true
            // nearest point may be a different one, which is fine since the
            // bound is evaluated against the recomputed distance.
            let i = rng.next_below(im.singular.len() as u64) as usize;
            let z = im.singular[i] + side * d;
            if z.abs() <= 1.0 {
                Some(Point::one(z))
            } else {
                Some(Point::one(im.singular[i] - side * d))
            }
        }
        Kind::Viana(v) => {
            let s = rng.next_f64();
            let y = side * d;
            if y > v.x_lo && y < v.x_hi {
                Some(Point::two(s, y))
            } else {
                Some(Point::two(s, -side * d))
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{build_system, FamilyId, Params};

    #[test]
    fn quadratic_satisfies_power_law_with_unit_exponent() {
        // |Q'_a(x)| = 2 d(x, S) exactly.
        let mut p = Params::new();
        p.insert("a".into(), 2.0);
        let sys = build_system(FamilyId::Quadratic, &p).unwrap();
        let report = check_nonflat(&sys, 3.0, 1.0, 10_000, 11).unwrap();
        assert!(
            report.is_ok(),
            "violations: {:?}",
            report.violations.first()
        );
        assert!(report.checked > 9000);
    }

    #[test]
    fn gauss_satisfies_inverse_square_law() {
        // |G'(x)| = d(x, S)^{-2} exactly.
        let sys = build_system(FamilyId::Gauss, &Params::new()).unwrap();
        let report = check_nonflat(&sys, 2.0, 2.0, 10_000, 12).unwrap();
        assert!(report.is_ok());
    }

    #[test]
    fn empty_singular_set_is_an_error() {
        let sys = build_system(FamilyId::Doubling, &Params::new()).unwrap();
        assert!(matches!(
            check_nonflat(&sys, 2.0, 1.0, 10, 1),
            Err(Error::EmptySingularSet(_))
        ));
    }

    #[test]
    fn wrong_exponent_is_detected() {
        // The quadratic derivative vanishes linearly, so demanding it stay
        // above d^{1/4}/B must fail close to the critical point.
        let mut p = Params::new();
        p.insert("a".into(), 2.0);
        let sys = build_system(FamilyId::Quadratic, &p).unwrap();
        let report = check_nonflat(&sys, 1.5, 0.25, 10_000, 13).unwrap();
        assert!(!report.is_ok());
    }
}
