//! Points, 2x2 derivatives and domain geometry.
//!
//! State spaces are one- or two-dimensional: an interval, the circle
//! `R/Z`, a cylinder `S^1 x I` or the 2-torus. Points carry two
//! coordinates; one-dimensional systems simply ignore `y`. Distances on
//! wrapped coordinates use the circle metric, and two-dimensional
//! distances are the maximum over coordinates, so a metric ball is a
//! coordinate box.

use serde::{Deserialize, Serialize};

/// A point of the state space. `y` is zero for one-dimensional systems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn one(x: f64) -> Self {
        Point { x, y: 0.0 }
    }

    pub fn two(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Distance on the unit circle `R/Z`.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Difference `a - b` wrapped to `(-1/2, 1/2]`, for finite differences
/// across the circle cut.
pub fn circle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// A 2x2 matrix in row-major order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2 {
            x: self.a * v.x + self.b * v.y,
            y: self.c * v.x + self.d * v.y,
        }
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Singular values `(s_max, s_min)`, via the eigenvalues of `A^T A`.
    pub fn singular_values(&self) -> (f64, f64) {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let g11 = a * a + c * c;
        let g22 = b * b + d * d;
        let g12 = a * b + c * d;
        let tr = g11 + g22;
        let disc = ((g11 - g22) * (g11 - g22) + 4.0 * g12 * g12)
            .max(0.0)
            .sqrt();
        let hi = 0.5 * (tr + disc);
        // `det(A)^2 / s_max^2` is better conditioned than the small root of
        // the quadratic when the matrix is far from conformal.
        let det2 = self.det() * self.det();
        let lo = if hi > 0.0 { det2 / hi } else { 0.0 };
        (hi.max(0.0).sqrt(), lo.max(0.0).sqrt())
    }
}

/// A tangent vector in two dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(&self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(&self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    pub fn scale(&self, t: f64) -> Vec2 {
        Vec2::new(t * self.x, t * self.y)
    }

    pub fn add(&self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

/// The derivative of the map at a point: a scalar in one dimension, a
/// full matrix in two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Deriv {
    Scalar(f64),
    Mat(Mat2),
}

impl Deriv {
    /// `log ||Df^{-1}||`: minus the log of the smallest singular value.
    pub fn log_inv_norm(&self) -> f64 {
        match self {
            Deriv::Scalar(d) => -d.abs().ln(),
            Deriv::Mat(m) => -m.singular_values().1.ln(),
        }
    }

    /// `log |det Df|`.
    pub fn log_abs_det(&self) -> f64 {
        match self {
            Deriv::Scalar(d) => d.abs().ln(),
            Deriv::Mat(m) => m.det().abs().ln(),
        }
    }

    /// Largest expansion factor `||Df v|| / ||v||`.
    pub fn op_norm(&self) -> f64 {
        match self {
            Deriv::Scalar(d) => d.abs(),
            Deriv::Mat(m) => m.singular_values().0,
        }
    }

    /// Smallest expansion factor.
    pub fn co_norm(&self) -> f64 {
        match self {
            Deriv::Scalar(d) => d.abs(),
            Deriv::Mat(m) => m.singular_values().1,
        }
    }

    pub fn as_mat(&self) -> Mat2 {
        match self {
            Deriv::Scalar(d) => Mat2::new(*d, 0.0, 0.0, 1.0),
            Deriv::Mat(m) => *m,
        }
    }
}

/// Shape and wrap rule of the state space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DomainSpec {
    /// `[lo, hi]`, no wrapping.
    Interval { lo: f64, hi: f64 },
    /// The circle `R/Z`, coordinates in `[0, 1)`.
    Circle,
    /// `S^1 x [lo, hi]`: first coordinate wraps, second does not.
    Cylinder { lo: f64, hi: f64 },
    /// The 2-torus, both coordinates in `[0, 1)`.
    Torus2,
}

impl DomainSpec {
    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } | DomainSpec::Circle => 1,
            DomainSpec::Cylinder { .. } | DomainSpec::Torus2 => 2,
        }
    }

    /// Apply the wrap rule. Idempotent.
    pub fn wrap(&self, p: Point) -> Point {
        match self {
            DomainSpec::Interval { .. } => p,
            DomainSpec::Circle => Point::one(p.x.rem_euclid(1.0)),
            DomainSpec::Cylinder { .. } => Point::two(p.x.rem_euclid(1.0), p.y),
            DomainSpec::Torus2 => Point::two(p.x.rem_euclid(1.0), p.y.rem_euclid(1.0)),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            DomainSpec::Interval { lo, hi } => p.x >= *lo && p.x <= *hi,
            DomainSpec::Circle => (0.0..1.0).contains(&p.x),
            DomainSpec::Cylinder { lo, hi } => {
                (0.0..1.0).contains(&p.x) && p.y >= *lo && p.y <= *hi
            }
            DomainSpec::Torus2 => (0.0..1.0).contains(&p.x) && (0.0..1.0).contains(&p.y),
        }
    }

    /// Distance between points; the max metric across coordinates in two
    /// dimensions, circle metric on wrapped coordinates.
    pub fn dist(&self, p: Point, q: Point) -> f64 {
        match self {
            DomainSpec::Interval { .. } => (p.x - q.x).abs(),
            DomainSpec::Circle => circle_dist(p.x, q.x),
            DomainSpec::Cylinder { .. } => circle_dist(p.x, q.x).max((p.y - q.y).abs()),
            DomainSpec::Torus2 => circle_dist(p.x, q.x).max(circle_dist(p.y, q.y)),
        }
    }

    /// Unnormalized Lebesgue volume of the domain.
    pub fn volume(&self) -> f64 {
        match self {
            DomainSpec::Interval { lo, hi } => hi - lo,
            DomainSpec::Circle | DomainSpec::Torus2 => 1.0,
            DomainSpec::Cylinder { lo, hi } => hi - lo,
        }
    }

    /// Uniform sample with respect to the product Lebesgue measure.
    pub fn sample(&self, rng: &mut crate::rng::Stream) -> Point {
        match self {
            DomainSpec::Interval { lo, hi } => Point::one(lo + (hi - lo) * rng.next_f64()),
            DomainSpec::Circle => Point::one(rng.next_f64()),
            DomainSpec::Cylinder { lo, hi } => {
                Point::two(rng.next_f64(), lo + (hi - lo) * rng.next_f64())
            }
            DomainSpec::Torus2 => Point::two(rng.next_f64(), rng.next_f64()),
        }
    }
}

/// A measurable region used for escape experiments and plateau
/// observables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegionSpec {
    /// `[lo, hi]` on the first coordinate (an arc when the coordinate
    /// wraps; must not straddle the cut).
    Interval1 { lo: f64, hi: f64 },
    /// A coordinate box.
    Box2 {
        lo_x: f64,
        hi_x: f64,
        lo_y: f64,
        hi_y: f64,
    },
}

impl RegionSpec {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            RegionSpec::Interval1 { lo, hi } => p.x >= *lo && p.x <= *hi,
            RegionSpec::Box2 {
                lo_x,
                hi_x,
                lo_y,
                hi_y,
            } => p.x >= *lo_x && p.x <= *hi_x && p.y >= *lo_y && p.y <= *hi_y,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            RegionSpec::Interval1 { lo, hi } => (hi - lo).max(0.0),
            RegionSpec::Box2 {
                lo_x,
                hi_x,
                lo_y,
                hi_y,
            } => (hi_x - lo_x).max(0.0) * (hi_y - lo_y).max(0.0),
        }
    }

    pub fn sample(&self, rng: &mut crate::rng::Stream) -> Point {
        match self {
            RegionSpec::Interval1 { lo, hi } => Point::one(lo + (hi - lo) * rng.next_f64()),
            RegionSpec::Box2 {
                lo_x,
                hi_x,
                lo_y,
                hi_y,
            } => Point::two(
                lo_x + (hi_x - lo_x) * rng.next_f64(),
                lo_y + (hi_y - lo_y) * rng.next_f64(),
            ),
        }
    }
}
