//! Orbit iteration, including digit-refreshed ensemble orbits.
//!
//! Families whose angular dynamics multiplies by an integer (`doubling`,
//! `expanding_circle_k` and the skew-product base `s -> d s mod 1`) are
//! exact digit shifts in base `k`. Iterating them directly in f64 shifts
//! the mantissa out: after roughly 53 / log2(k) steps every orbit
//! collapses onto a dyadic rational and then onto 0, which silently
//! destroys long-run statistics. Ensemble orbits therefore track the
//! angle as a 64-bit fixed-point fraction and refresh the vacated low
//! digits from the per-start random stream. This is exactly the shift
//! acting on a start whose unrepresented digit tail is drawn uniformly,
//! so the marginal process is the intended one and results stay
//! deterministic for a fixed seed regardless of worker count.
//!
//! Single-orbit diagnostics use the plain f64 iteration.

use super::{DynamicalSystem, Kind};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::rng::Stream;

const FRAC_SCALE: f64 = 18446744073709551616.0; // 2^64

#[derive(Clone, Debug)]
enum Tail {
    /// Angle is the x coordinate, advanced as `frac -> frac * radix + digit`.
    Angle { radix: u64, frac: u64, rng: Stream },
    /// Same, but the y coordinate follows the fibre map of the skew product.
    SkewBase { radix: u64, frac: u64, rng: Stream },
}

fn frac_to_f64(frac: u64) -> f64 {
    // Keep the top 53 bits; the result lies in [0, 1).
    (frac >> 11) as f64 * (1.0 / 9007199254740992.0)
}

fn f64_to_frac(x: f64, rng: &mut Stream) -> u64 {
    let hi = (x * FRAC_SCALE) as u64;
    // The start has only 53 significant bits; draw the unobserved tail.
    hi | (rng.next_u64() & 0x7FF)
}

/// Iterator over the forward orbit of a point.
#[derive(Clone, Debug)]
pub struct Orbit<'a> {
    sys: &'a DynamicalSystem,
    state: Point,
    step: usize,
    tail: Option<Tail>,
}

impl<'a> Orbit<'a> {
    /// Plain f64 orbit.
    pub fn new(sys: &'a DynamicalSystem, start: Point) -> Self {
        Orbit {
            sys,
            state: start,
            step: 0,
            tail: None,
        }
    }

    /// Ensemble orbit with digit refresh where the family calls for it.
    pub fn seeded(sys: &'a DynamicalSystem, start: Point, mut rng: Stream) -> Self {
        let tail = match &sys.kind {
            Kind::Doubling => Some(Tail::Angle {
                radix: 2,
                frac: f64_to_frac(start.x, &mut rng),
                rng,
            }),
            Kind::ExpandingCircle { k } => Some(Tail::Angle {
                radix: *k as u64,
                frac: f64_to_frac(start.x, &mut rng),
                rng,
            }),
            Kind::Viana(v) => Some(Tail::SkewBase {
                radix: v.d as u64,
                frac: f64_to_frac(start.x, &mut rng),
                rng,
            }),
            _ => None,
        };
        Orbit {
            sys,
            state: start,
            step: 0,
            tail,
        }
    }

    pub fn current(&self) -> Point {
        self.state
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    /// Advance one step and return the new point.
    pub fn advance(&mut self) -> Result<Point> {
        let next = match &mut self.tail {
            None => self
                .sys
                .map(self.state)
                .map_err(|e| at_step(e, self.step))?,
            Some(Tail::Angle { radix, frac, rng }) => {
                let digit = rng.next_below(*radix);
                *frac = (*frac as u128 * *radix as u128 + digit as u128) as u64;
                Point::one(frac_to_f64(*frac))
            }
            Some(Tail::SkewBase { radix, frac, rng }) => {
                // Fibre map first (it reads the current angle), then shift
                // the base digits.
                let image = self
                    .sys
                    .map(self.state)
                    .map_err(|e| at_step(e, self.step))?;
                let digit = rng.next_below(*radix);
                *frac = (*frac as u128 * *radix as u128 + digit as u128) as u64;
                Point::two(frac_to_f64(*frac), image.y)
            }
        };
        self.state = next;
        self.step += 1;
        Ok(next)
    }

    /// Advance `n` steps.
    pub fn advance_by(&mut self, n: usize) -> Result<Point> {
        for _ in 0..n {
            self.advance()?;
        }
        Ok(self.state)
    }
}

fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::HitSingularSet { at, .. } => Error::HitSingularSet { at, step },
        Error::LeftDomain { at, .. } => Error::LeftDomain { at, step },
        other => other,
    }
}
