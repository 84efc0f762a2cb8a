//! Observables: continuous functions averaged along orbits.
//!
//! A closed enum rather than boxed closures, so experiment configs can
//! name and serialize them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, RegionSpec};
use crate::rng::Stream;
use crate::systems::DynamicalSystem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    /// First coordinate.
    Coordinate,
    /// Second coordinate (two-dimensional systems).
    SecondCoordinate,
    /// Indicator of the upper half `[1/2, 1)` of a unit coordinate: the
    /// first binary digit.
    FirstDigit,
    /// Constant function.
    Constant(f64),
    /// Continuous plateau: 1 on the region, falling linearly to 0 within
    /// `margin` of it. The escape-rate inclusion argument uses these.
    Plateau { region: RegionSpec, margin: f64 },
    /// Piecewise-linear interpolation of `(x, value)` knots on the first
    /// coordinate, clamped outside the knot range.
    Table { knots: Vec<(f64, f64)> },
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::Coordinate => "x".into(),
            Observable::SecondCoordinate => "y".into(),
            Observable::FirstDigit => "digit".into(),
            Observable::Constant(c) => format!("const({c})"),
            Observable::Plateau { .. } => "plateau".into(),
            Observable::Table { .. } => "table".into(),
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        match self {
            Observable::Coordinate => p.x,
            Observable::SecondCoordinate => p.y,
            Observable::FirstDigit => {
                if p.x >= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            Observable::Constant(c) => *c,
            Observable::Plateau { region, margin } => plateau(region, *margin, p),
            Observable::Table { knots } => table_eval(knots, p.x),
        }
    }

    /// Check boundedness by sampling the domain; the built-ins are bounded
    /// by construction, user tables are validated here.
    pub fn validate(&self, sys: &DynamicalSystem, seed: u64) -> Result<()> {
        match self {
            Observable::Table { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidInput(
                        "table observable needs >= 2 knots".into(),
                    ));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidInput(
                        "table knots must have increasing x".into(),
                    ));
                }
                if knots.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
                    return Err(Error::InvalidInput("table knots must be finite".into()));
                }
            }
            Observable::Plateau { margin, .. } if *margin <= 0.0 => {
                return Err(Error::InvalidInput(
                    "plateau margin must be positive".into(),
                ));
            }
            _ => {}
        }
        let mut rng = Stream::new(seed);
        for _ in 0..1000 {
            let v = self.eval(sys.domain().sample(&mut rng));
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "observable `{}` is unbounded on the domain",
                    self.name()
                )));
            }
        }
        Ok(())
    }
}

fn plateau(region: &RegionSpec, margin: f64, p: Point) -> f64 {
    // Distance outside the region, coordinatewise max.
    let outside = match region {
        RegionSpec::Interval1 { lo, hi } => (lo - p.x).max(p.x - hi).max(0.0),
        RegionSpec::Box2 {
            lo_x,
            hi_x,
            lo_y,
            hi_y,
        } => {
            let dx = (lo_x - p.x).max(p.x - hi_x).max(0.0);
            let dy = (lo_y - p.y).max(p.y - hi_y).max(0.0);
            dx.max(dy)
        }
    };
    (1.0 - outside / margin).clamp(0.0, 1.0)
}

fn table_eval(knots: &[(f64, f64)], x: f64) -> f64 {
    if x <= knots[0].0 {
        return knots[0].1;
    }
    if x >= knots[knots.len() - 1].0 {
        return knots[knots.len() - 1].1;
    }
    let i = knots.partition_point(|(kx, _)| *kx <= x);
    let (x0, v0) = knots[i - 1];
    let (x1, v1) = knots[i];
    v0 + (v1 - v0) * (x - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_observable() {
        assert_eq!(Observable::FirstDigit.eval(Point::one(0.49)), 0.0);
        assert_eq!(Observable::FirstDigit.eval(Point::one(0.5)), 1.0);
    }

    #[test]
    fn plateau_is_one_on_region_zero_far_away() {
        let k = Observable::Plateau {
            region: RegionSpec::Interval1 { lo: 0.0, hi: 0.5 },
            margin: 0.1,
        };
        assert_eq!(k.eval(Point::one(0.25)), 1.0);
        assert_eq!(k.eval(Point::one(0.5)), 1.0);
        assert!((k.eval(Point::one(0.55)) - 0.5).abs() < 1e-12);
        assert_eq!(k.eval(Point::one(0.7)), 0.0);
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let t = Observable::Table {
            knots: vec![(0.0, 1.0), (1.0, 3.0)],
        };
        assert_eq!(t.eval(Point::one(0.5)), 2.0);
        assert_eq!(t.eval(Point::one(-5.0)), 1.0);
        assert_eq!(t.eval(Point::one(5.0)), 3.0);
    }
}
