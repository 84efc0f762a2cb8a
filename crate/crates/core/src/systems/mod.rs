//! The dynamical-system abstraction and the built-in families.
//!
//! A [`DynamicalSystem`] bundles a state space, the map, its derivative
//! and the distance to the singular set (the points where the derivative
//! is undefined or non-invertible). Every estimator in the crate consumes
//! this one abstraction. Values are immutable after construction and all
//! evaluations are pure, so systems can be shared freely across worker
//! threads.
//!
//! Families with an empty singular set encode the distance as `+inf`.

pub(crate) mod build;
mod nonflat;
mod orbit;

pub use nonflat::{check_nonflat, NonflatReport, NonflatViolation};
pub use orbit::Orbit;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::{circle_diff, Deriv, DomainSpec, Mat2, Point, Vec2};

/// Identifiers for the built-in families, addressable from CLI configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyId {
    /// `x -> 2x mod 1`; uniformly expanding, empty singular set.
    Doubling,
    /// `x -> kx mod 1` for an integer `k >= 2`.
    ExpandingCircle,
    /// Rigid rotation `x -> x + alpha mod 1`; zero-entropy control.
    Rotation,
    /// `x -> x + x^{1+gamma} mod 1`; neutral fixed point at 0.
    MannevillePomeau,
    /// `x -> a - x^2` on `[-2, 2]`; critical point at 0.
    Quadratic,
    /// Oscillating map `z -> a z^alpha sin(beta log(1/z))` near 0 with an
    /// expanding sawtooth extension; infinitely many critical points.
    InfiniteModal,
    /// `x -> 1/x mod 1` on `(0, 1)`; singular at 0.
    Gauss,
    /// Two symmetric monotone branches with derivative blowing up like a
    /// power of the distance to 0.
    Lorenz1d,
    /// Skew product over `s -> d s mod 1` with quadratic fibres.
    Viana,
    /// The linear torus automorphism `[[2, 1], [1, 1]]`.
    CatMap,
    /// The cat map deformed by a localized shear that weakens expansion
    /// along the unstable direction inside a small region.
    DaMap,
    /// Control map with two attracting fixed points at the interval ends.
    TwoBasins,
    /// Rigid torus translation; identity derivative control.
    TorusTranslation,
}

impl FamilyId {
    pub const ALL: [FamilyId; 13] = [
        FamilyId::Doubling,
        FamilyId::ExpandingCircle,
        FamilyId::Rotation,
        FamilyId::MannevillePomeau,
        FamilyId::Quadratic,
        FamilyId::InfiniteModal,
        FamilyId::Gauss,
        FamilyId::Lorenz1d,
        FamilyId::Viana,
        FamilyId::CatMap,
        FamilyId::DaMap,
        FamilyId::TwoBasins,
        FamilyId::TorusTranslation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::Doubling => "doubling",
            FamilyId::ExpandingCircle => "expanding_circle_k",
            FamilyId::Rotation => "rotation",
            FamilyId::MannevillePomeau => "manneville_pomeau",
            FamilyId::Quadratic => "quadratic",
            FamilyId::InfiniteModal => "infinite_modal",
            FamilyId::Gauss => "gauss",
            FamilyId::Lorenz1d => "lorenz1d",
            FamilyId::Viana => "viana",
            FamilyId::CatMap => "cat_map",
            FamilyId::DaMap => "da_map",
            FamilyId::TwoBasins => "two_basins",
            FamilyId::TorusTranslation => "torus_translation",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Numeric parameters for [`build_system`].
pub type Params = BTreeMap<String, f64>;

/// Dispatch data for each family. Derived constants (eigendirections,
/// critical-point tables, invariant bands) are precomputed at build time.
#[derive(Clone, Debug)]
pub(crate) enum Kind {
    Doubling,
    ExpandingCircle { k: u32 },
    Rotation { alpha: f64 },
    MannevillePomeau { gamma: f64 },
    Quadratic { a: f64 },
    InfiniteModal(InfiniteModal),
    Gauss,
    Lorenz1d { exponent: f64, scale: f64 },
    Viana(Viana),
    CatMap,
    DaMap(DaMap),
    TwoBasins,
    TorusTranslation { vx: f64, vy: f64 },
}

#[derive(Clone, Debug)]
pub(crate) struct InfiniteModal {
    pub amp: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
    pub mu: f64,
    pub slope: f64,
    /// Value of the oscillating core at `eps`, start of the extension.
    pub f_eps: f64,
    /// Sorted nonnegative singular positions: 0, the critical points of
    /// the core, the junction `eps` and the extension fold points.
    pub singular: Vec<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct Viana {
    pub d: u32,
    pub alpha: f64,
    pub a0: f64,
    /// Forward-invariant fibre band `[x_lo, x_hi]`, located numerically.
    pub x_lo: f64,
    pub x_hi: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct DaMap {
    pub center: (f64, f64),
    /// Support half-widths of the shear along the unstable and stable
    /// eigendirections.
    pub r_u: f64,
    pub r_s: f64,
    /// Shear amplitude; the derivative along the unstable direction at the
    /// center is `(1 - tau) * lambda_u`.
    pub tau: f64,
    pub delta0: f64,
}

/// Golden ratio and the cat-map eigendata.
pub(crate) const PHI: f64 = 1.618033988749894848204586834365638118;

pub(crate) fn cat_lambda_u() -> f64 {
    (3.0 + 5.0_f64.sqrt()) / 2.0
}

pub(crate) fn cat_unstable_dir() -> Vec2 {
    Vec2::new(PHI, 1.0).normalized()
}

pub(crate) fn cat_stable_dir() -> Vec2 {
    Vec2::new(-1.0, PHI).normalized()
}

/// A state space, a map, its derivative and the distance to the singular
/// set, plus naming metadata.
#[derive(Clone, Debug)]
pub struct DynamicalSystem {
    pub(crate) kind: Kind,
    family: FamilyId,
    domain: DomainSpec,
    name: String,
    params: Vec<(String, f64)>,
}

impl DynamicalSystem {
    pub(crate) fn new(
        kind: Kind,
        family: FamilyId,
        domain: DomainSpec,
        params: Vec<(String, f64)>,
    ) -> Self {
        let name = if params.is_empty() {
            family.name().to_string()
        } else {
            let ps: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{}({})", family.name(), ps.join(","))
        };
        DynamicalSystem {
            kind,
            family,
            domain,
            name,
            params,
        }
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Whether the singular set is nonempty.
    pub fn has_singular_set(&self) -> bool {
        matches!(
            self.kind,
            Kind::Quadratic { .. }
                | Kind::InfiniteModal(_)
                | Kind::Gauss
                | Kind::Lorenz1d { .. }
                | Kind::Viana(_)
        )
    }

    /// Distance from `p` to the singular set; `+inf` when the set is
    /// empty. Zero exactly on the singular set.
    pub fn singular_distance(&self, p: Point) -> f64 {
        match &self.kind {
            Kind::Quadratic { .. } | Kind::Lorenz1d { .. } => p.x.abs(),
            Kind::Gauss => p.x,
            Kind::Viana(_) => p.y.abs(),
            Kind::InfiniteModal(im) => im.singular_distance(p.x),
            _ => f64::INFINITY,
        }
    }

    /// One step of the map. Errors when `p` lies exactly on the singular
    /// set or the image leaves the domain.
    pub fn map(&self, p: Point) -> Result<Point> {
        if self.singular_distance(p) == 0.0 {
            return Err(Error::HitSingularSet { at: p, step: 0 });
        }
        let image = match &self.kind {
            Kind::Doubling => Point::one((2.0 * p.x).rem_euclid(1.0)),
            Kind::ExpandingCircle { k } => Point::one((*k as f64 * p.x).rem_euclid(1.0)),
            Kind::Rotation { alpha } => Point::one((p.x + alpha).rem_euclid(1.0)),
            Kind::MannevillePomeau { gamma } => {
                Point::one((p.x + p.x.powf(1.0 + gamma)).rem_euclid(1.0))
            }
            Kind::Quadratic { a } => Point::one(a - p.x * p.x),
            Kind::InfiniteModal(im) => Point::one(im.map(p.x)),
            Kind::Gauss => {
                let t = 1.0 / p.x;
                Point::one(t - t.floor())
            }
            Kind::Lorenz1d { exponent, scale } => {
                let z = scale * p.x.abs().powf(*exponent) - 1.0;
                Point::one(p.x.signum() * z)
            }
            Kind::Viana(v) => {
                let s2 = (v.d as f64 * p.x).rem_euclid(1.0);
                let a_s = v.a0 + v.alpha * (std::f64::consts::TAU * p.x).sin();
                Point::two(s2, a_s - p.y * p.y)
            }
            Kind::CatMap => Point::two(
                (2.0 * p.x + p.y).rem_euclid(1.0),
                (p.x + p.y).rem_euclid(1.0),
            ),
            Kind::DaMap(da) => {
                let g = da.pre_shear(p);
                Point::two(
                    (2.0 * g.x + g.y).rem_euclid(1.0),
                    (g.x + g.y).rem_euclid(1.0),
                )
            }
            Kind::TwoBasins => Point::one(p.x + 0.45 * p.x * (1.0 - p.x * p.x)),
            Kind::TorusTranslation { vx, vy } => {
                Point::two((p.x + vx).rem_euclid(1.0), (p.y + vy).rem_euclid(1.0))
            }
        };
        if !self.domain.contains(image) {
            return Err(Error::LeftDomain { at: image, step: 0 });
        }
        Ok(image)
    }

    /// The derivative at `p`. Errors on the singular set.
    pub fn derivative(&self, p: Point) -> Result<Deriv> {
        if self.singular_distance(p) == 0.0 {
            return Err(Error::HitSingularSet { at: p, step: 0 });
        }
        let d = match &self.kind {
            Kind::Doubling => Deriv::Scalar(2.0),
            Kind::ExpandingCircle { k } => Deriv::Scalar(*k as f64),
            Kind::Rotation { .. } => Deriv::Scalar(1.0),
            Kind::MannevillePomeau { gamma } => {
                Deriv::Scalar(1.0 + (1.0 + gamma) * p.x.powf(*gamma))
            }
            Kind::Quadratic { .. } => Deriv::Scalar(-2.0 * p.x),
            Kind::InfiniteModal(im) => Deriv::Scalar(im.derivative(p.x)),
            Kind::Gauss => Deriv::Scalar(-1.0 / (p.x * p.x)),
            Kind::Lorenz1d { exponent, scale } => {
                Deriv::Scalar(scale * exponent * p.x.abs().powf(exponent - 1.0))
            }
            Kind::Viana(v) => {
                let two_pi = std::f64::consts::TAU;
                Deriv::Mat(Mat2::new(
                    v.d as f64,
                    0.0,
                    v.alpha * two_pi * (two_pi * p.x).cos(),
                    -2.0 * p.y,
                ))
            }
            Kind::CatMap => Deriv::Mat(Mat2::new(2.0, 1.0, 1.0, 1.0)),
            Kind::DaMap(da) => {
                let g = da.shear_deriv(p);
                Deriv::Mat(Mat2::new(2.0, 1.0, 1.0, 1.0).mul(&g))
            }
            Kind::TwoBasins => Deriv::Scalar(1.0 + 0.45 * (1.0 - 3.0 * p.x * p.x)),
            Kind::TorusTranslation { .. } => Deriv::Mat(Mat2::identity()),
        };
        Ok(d)
    }

    /// Pure orbit iterator from `x`.
    pub fn orbit(&self, x: Point) -> Orbit<'_> {
        Orbit::new(self, x)
    }

    /// Orbit iterator for ensemble statistics: families whose angle
    /// dynamics is an exact digit shift get fresh seeded low digits each
    /// step (see [`Orbit`]).
    pub fn orbit_seeded(&self, x: Point, rng: crate::rng::Stream) -> Orbit<'_> {
        Orbit::seeded(self, x, rng)
    }
}

impl InfiniteModal {
    /// Core branch for `z` in `(0, eps]`, before the parameter shift.
    fn core(&self, z: f64) -> f64 {
        self.amp * z.powf(self.alpha) * (self.beta * (1.0 / z).ln()).sin()
    }

    /// Map for arbitrary `x != 0`, odd in `x`.
    fn map(&self, x: f64) -> f64 {
        let z = x.abs();
        let raw = if z <= self.eps {
            self.core(z) + self.mu
        } else {
            // Expanding sawtooth extension, wrapped into [-1, 1).
            self.f_eps + self.slope * (z - self.eps) + self.mu
        };
        x.signum() * wrap_pm1(raw)
    }

    /// Derivative (even in `x`).
    fn derivative(&self, x: f64) -> f64 {
        let z = x.abs();
        if z <= self.eps {
            let l = (1.0 / z).ln();
            self.amp
                * z.powf(self.alpha - 1.0)
                * (self.alpha * (self.beta * l).sin() - self.beta * (self.beta * l).cos())
        } else {
            self.slope
        }
    }

    fn singular_distance(&self, x: f64) -> f64 {
        let z = x.abs();
        match self
            .singular
            .binary_search_by(|s| s.partial_cmp(&z).unwrap())
        {
            Ok(_) => 0.0,
            Err(i) => {
                let mut d = f64::INFINITY;
                if i < self.singular.len() {
                    d = d.min(self.singular[i] - z);
                }
                if i > 0 {
                    d = d.min(z - self.singular[i - 1]);
                }
                d
            }
        }
    }
}

impl DaMap {
    fn eigen_coords(&self, p: Point) -> (f64, f64) {
        let dx = circle_diff(p.x, self.center.0);
        let dy = circle_diff(p.y, self.center.1);
        let u = cat_unstable_dir();
        let s = cat_stable_dir();
        (dx * u.x + dy * u.y, dx * s.x + dy * s.y)
    }

    /// The localized shear `g` applied before the linear map.
    fn pre_shear(&self, p: Point) -> Point {
        let (xi, eta) = self.eigen_coords(p);
        if xi.abs() >= self.r_u || eta.abs() >= self.r_s {
            return p;
        }
        let t = xi / self.r_u;
        let h = eta / self.r_s;
        let shift = self.tau * self.r_u * bump_integral(t) * bump(h);
        let u = cat_unstable_dir();
        let np = Point::two(p.x - shift * u.x, p.y - shift * u.y);
        Point::two(np.x.rem_euclid(1.0), np.y.rem_euclid(1.0))
    }

    /// Derivative of the shear in the standard basis.
    fn shear_deriv(&self, p: Point) -> Mat2 {
        let (xi, eta) = self.eigen_coords(p);
        if xi.abs() >= self.r_u || eta.abs() >= self.r_s {
            return Mat2::identity();
        }
        let t = xi / self.r_u;
        let h = eta / self.r_s;
        let g11 = 1.0 - self.tau * bump(t) * bump(h);
        let g12 = -self.tau * self.r_u * bump_integral(t) * bump_deriv(h) / self.r_s;
        // G = U * [[g11, g12], [0, 1]] * U^T with U = [u s].
        let u = cat_unstable_dir();
        let s = cat_stable_dir();
        let col1 = Vec2::new(g11 * u.x, g11 * u.y);
        let col2 = Vec2::new(g12 * u.x + s.x, g12 * u.y + s.y);
        // Columns are images of u and s; assemble G = col1 * u^T + col2 * s^T.
        Mat2::new(
            col1.x * u.x + col2.x * s.x,
            col1.x * u.y + col2.x * s.y,
            col1.y * u.x + col2.y * s.x,
            col1.y * u.y + col2.y * s.y,
        )
    }
}

/// C^2 bump on [-1, 1]: value 1 at 0, vanishing with two derivatives at
/// the edges.
pub(crate) fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - t * t;
        w * w * w
    }
}

pub(crate) fn bump_deriv(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - t * t;
        -6.0 * t * w * w
    }
}

/// Odd primitive of `bump` with `bump_integral(0) = 0`, clamped outside
/// the support.
pub(crate) fn bump_integral(t: f64) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    let t3 = t * t * t;
    let t5 = t3 * t * t;
    let t7 = t5 * t * t;
    t - t3 + 0.6 * t5 - t7 / 7.0
}

/// Wrap a value into `[-1, 1)` with period 2.
fn wrap_pm1(v: f64) -> f64 {
    (v + 1.0).rem_euclid(2.0) - 1.0
}

pub use build::build_system;
