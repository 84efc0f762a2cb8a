//! Cone fields and centre-unstable diagnostics for the torus
//! diffeomorphisms.
//!
//! The splitting `E + F` of the linear automorphism is known exactly (the
//! matrix is symmetric, so the eigendirections are orthogonal). The `F`
//! direction of the deformed map is tracked by forward cone iteration: a
//! vector inside the unstable cone aligns with the true centre-unstable
//! bundle exponentially fast under domination, so after a short warm-up
//! the tracked direction is the bundle for every practical purpose.
//!
//! All products of restricted derivative norms are accumulated in log
//! space.

use crate::error::{Error, Result};
use crate::geom::{Mat2, Point, Vec2};
use crate::rng::Stream;
use crate::stats::KahanSum;
use crate::systems::{DynamicalSystem, FamilyId, Kind};

/// Steps of direction tracking discarded before accumulating any
/// restricted Jacobian, so the power iteration has aligned.
pub const F_TRACK_WARMUP: usize = 50;

/// A constant-direction cone pair around a reference splitting.
#[derive(Clone, Copy, Debug)]
pub struct ConeField {
    pub e_dir: Vec2,
    pub f_dir: Vec2,
    /// Cone half-widths (slopes measured in the eigenframe), in (0, 1).
    pub width_e: f64,
    pub width_f: f64,
    /// Slope contraction factor of `Df` on the F cone; 1 for neutral
    /// controls.
    pub lambda: f64,
}

impl ConeField {
    /// The cone data for systems carrying a dominated splitting.
    pub fn for_system(sys: &DynamicalSystem) -> Result<ConeField> {
        match sys.kind {
            Kind::CatMap | Kind::DaMap(_) => {
                let lu = crate::systems::cat_lambda_u();
                // The E width must stay below the value where the linear map
                // starts expanding tilted stable vectors (a^2 (lu^2 - 1) <
                // 1 - ls^2, i.e. a < 0.382); 0.2 leaves room for the
                // deformation's shear coupling.
                Ok(ConeField {
                    e_dir: crate::systems::cat_stable_dir(),
                    f_dir: crate::systems::cat_unstable_dir(),
                    width_e: 0.2,
                    width_f: 0.25,
                    lambda: 1.0 / (lu * lu),
                })
            }
            Kind::TorusTranslation { .. } => Ok(ConeField {
                e_dir: Vec2::new(0.0, 1.0),
                f_dir: Vec2::new(1.0, 0.0),
                width_e: 0.5,
                width_f: 0.5,
                lambda: 1.0,
            }),
            _ => Err(Error::Unsupported(format!(
                "system `{}` has no declared cone field",
                sys.name()
            ))),
        }
    }

    /// Components of `v` in the (f, e) frame.
    pub fn components(&self, v: Vec2) -> (f64, f64) {
        (v.dot(self.f_dir), v.dot(self.e_dir))
    }

    pub fn in_f_cone(&self, v: Vec2) -> bool {
        let (f, e) = self.components(v);
        e.abs() <= self.width_f * f.abs()
    }

    pub fn in_e_cone(&self, v: Vec2) -> bool {
        let (f, e) = self.components(v);
        f.abs() <= self.width_e * e.abs()
    }

    /// A unit vector on the F-cone at relative offset `t` in [-1, 1].
    pub fn f_cone_vector(&self, t: f64) -> Vec2 {
        self.f_dir
            .add(self.e_dir.scale(t * self.width_f))
            .normalized()
    }

    pub fn e_cone_vector(&self, t: f64) -> Vec2 {
        self.e_dir
            .add(self.f_dir.scale(t * self.width_e))
            .normalized()
    }
}

fn deriv_mat(sys: &DynamicalSystem, x: Point) -> Result<Mat2> {
    Ok(sys.derivative(x)?.as_mat())
}

/// Push `v0` through `Df^n` along the orbit of `x`, normalizing each
/// step. Errors if the vector ever leaves the F cone. The returned unit
/// vector has positive component along the reference F direction.
pub fn track_f_direction(sys: &DynamicalSystem, x: Point, v0: Vec2, n: usize) -> Result<Vec2> {
    let cone = ConeField::for_system(sys)?;
    let mut v = v0.normalized();
    let mut p = x;
    for step in 0..n {
        if !cone.in_f_cone(v) {
            return Err(Error::ConeLoss { step });
        }
        let m = deriv_mat(sys, p)?;
        v = m.apply(v).normalized();
        p = sys.map(p)?;
    }
    if !cone.in_f_cone(v) {
        return Err(Error::ConeLoss { step: n });
    }
    if v.dot(cone.f_dir) < 0.0 {
        v = v.scale(-1.0);
    }
    Ok(v)
}

/// One step of the restricted Jacobian: the log expansion of `v` at `x`,
/// the image point and the transported direction.
pub fn f_jacobian_step(sys: &DynamicalSystem, x: Point, v: Vec2) -> Result<(f64, Point, Vec2)> {
    let m = deriv_mat(sys, x)?;
    let w = m.apply(v.normalized());
    let growth = w.norm();
    Ok((growth.ln(), sys.map(x)?, w.scale(1.0 / growth)))
}

struct FTrack<'a> {
    sys: &'a DynamicalSystem,
    cone: ConeField,
    p: Point,
    v: Vec2,
    step: usize,
}

impl<'a> FTrack<'a> {
    /// Warm up the direction from the reference F axis before measuring.
    fn warmed(sys: &'a DynamicalSystem, x: Point, warmup: usize) -> Result<Self> {
        let cone = ConeField::for_system(sys)?;
        let mut t = FTrack {
            sys,
            cone,
            p: x,
            v: cone.f_dir,
            step: 0,
        };
        for _ in 0..warmup {
            t.advance()?;
        }
        Ok(t)
    }

    /// Advance one step, returning `log ||Df v||` at the pre-image point.
    fn advance(&mut self) -> Result<f64> {
        if !self.cone.in_f_cone(self.v) {
            return Err(Error::ConeLoss { step: self.step });
        }
        let m = deriv_mat(self.sys, self.p)?;
        let w = m.apply(self.v);
        let growth = w.norm();
        self.v = w.scale(1.0 / growth);
        self.p = self.sys.map(self.p)?;
        self.step += 1;
        Ok(growth.ln())
    }
}

/// Birkhoff sum of the centre-unstable Jacobian `log ||Df v_F||` over `n`
/// steps, after the tracking warm-up.
pub fn f_jacobian_sum(sys: &DynamicalSystem, x: Point, n: usize) -> Result<f64> {
    let mut track = FTrack::warmed(sys, x, F_TRACK_WARMUP)?;
    let mut acc = KahanSum::new();
    for _ in 0..n {
        acc.add(track.advance()?);
    }
    Ok(acc.total())
}

/// `(1/n) sum log ||(Df|F)^{-1}||`: negative values witness non-uniform
/// expansion along the centre-unstable direction.
pub fn ph_nue_statistic(sys: &DynamicalSystem, x: Point, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("orbit length must be positive".into()));
    }
    let mut track = FTrack::warmed(sys, x, F_TRACK_WARMUP)?;
    let mut acc = KahanSum::new();
    for _ in 0..n {
        acc.add(-track.advance()?);
    }
    Ok(acc.total() / n as f64)
}

/// Times `n <= n_max` at which every backward window of the restricted
/// inverse norms contracts: `prod_{j=n-k+1}^{n} ||(Df|F_{f^j x})^{-1}|| <=
/// sigma^k` for all `1 <= k <= n`. Runs in O(n_max) by comparing prefix
/// sums against their running minimum.
pub fn ph_hyperbolic_times(
    sys: &DynamicalSystem,
    x: Point,
    n_max: usize,
    sigma: f64,
) -> Result<Vec<usize>> {
    if !(0.0 < sigma && sigma < 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "sigma",
            value: sigma,
            reason: "must lie in (0, 1)",
        });
    }
    let log_sigma = sigma.ln();
    let mut track = FTrack::warmed(sys, x, 0)?;
    // Position j = 0 is x itself; the product uses positions 1..=n.
    track.advance()?;
    let mut times = Vec::new();
    let mut prefix = 0.0;
    let mut run_min = 0.0_f64;
    for n in 1..=n_max {
        let log_growth = track.advance()?;
        // a_j = log ||(Df|F)^{-1}|| - log sigma at position j = n.
        prefix += -log_growth - log_sigma;
        if prefix <= run_min {
            times.push(n);
        }
        run_min = run_min.min(prefix);
    }
    Ok(times)
}

/// Numeric verification of the deformation conditions: invariant cones,
/// volume expansion along F with contraction along E, closeness to the
/// linear map away from the deformation, and the weak-expansion bound
/// inside it.
#[derive(Clone, Debug)]
pub struct AbcdReport {
    /// Worst slope-contraction of the F cone under `Df` (< 1 passes).
    pub lambda_f: f64,
    /// Worst slope-contraction of the E cone under `Df^{-1}`.
    pub lambda_e: f64,
    pub a_pass: bool,

    /// Fitted volume-expansion constant: min expansion along F-cone
    /// tangents capped by 1 / (max E-cone norm).
    pub sigma1: f64,
    pub f_expansion_min: f64,
    pub e_norm_max: f64,
    pub b_pass: bool,

    /// Max restricted inverse norm outside the deformed region.
    pub sigma2: f64,
    /// Max entrywise derivative distance to the linear map outside it.
    pub c1_distance: f64,
    /// Bounding-box widths of the region and its image in the cover.
    pub v_box: (f64, f64),
    pub fv_box: (f64, f64),
    pub c_pass: bool,

    pub delta0: f64,
    /// `(1 + delta0) - max ||(Df|F)^{-1}||` over the deformed region.
    pub d_margin: f64,
    pub d_pass: bool,
}

impl AbcdReport {
    pub fn all_pass(&self) -> bool {
        self.a_pass && self.b_pass && self.c_pass && self.d_pass
    }

    pub fn failure_summary(&self) -> String {
        let mut out = Vec::new();
        if !self.a_pass {
            out.push(format!(
                "cone invariance failed (lambda_f = {:.4}, lambda_e = {:.4})",
                self.lambda_f, self.lambda_e
            ));
        }
        if !self.b_pass {
            out.push(format!(
                "volume expansion failed (sigma1 = {:.4})",
                self.sigma1
            ));
        }
        if !self.c_pass {
            out.push(format!(
                "closeness to the linear map failed (sigma2 = {:.4}, boxes {:?}/{:?})",
                self.sigma2, self.v_box, self.fv_box
            ));
        }
        if !self.d_pass {
            out.push(format!(
                "weak-expansion bound failed (margin = {:.4} with delta0 = {})",
                self.d_margin, self.delta0
            ));
        }
        out.join("; ")
    }
}

const CONE_OFFSETS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

pub fn check_conditions_abcd(
    sys: &DynamicalSystem,
    samples: usize,
    seed: u64,
) -> Result<AbcdReport> {
    if !matches!(sys.family(), FamilyId::CatMap | FamilyId::DaMap) {
        return Err(Error::Unsupported(format!(
            "conditions (A)-(D) apply to the torus diffeomorphisms, not `{}`",
            sys.name()
        )));
    }
    let cone = ConeField::for_system(sys)?;
    let da = match &sys.kind {
        Kind::DaMap(da) => Some(da.clone()),
        _ => None,
    };
    let delta0 = da.as_ref().map(|d| d.delta0).unwrap_or(0.2);

    let mut rng = Stream::new(seed);
    let mut points: Vec<Point> = (0..samples)
        .map(|_| sys.domain().sample(&mut rng))
        .collect();
    // Oversample the deformed region: the binding constraints live there.
    if let Some(d) = &da {
        let u = crate::systems::cat_unstable_dir();
        let s = crate::systems::cat_stable_dir();
        let grid = 21;
        for i in 0..grid {
            for j in 0..grid {
                let xi = d.r_u * (2.0 * i as f64 / (grid - 1) as f64 - 1.0);
                let eta = d.r_s * (2.0 * j as f64 / (grid - 1) as f64 - 1.0);
                points.push(Point::two(
                    (d.center.0 + xi * u.x + eta * s.x).rem_euclid(1.0),
                    (d.center.1 + xi * u.y + eta * s.y).rem_euclid(1.0),
                ));
            }
        }
    }

    let linear = Mat2::new(2.0, 1.0, 1.0, 1.0);
    let in_v = |p: Point| -> bool {
        match &da {
            None => false,
            Some(d) => {
                let u = crate::systems::cat_unstable_dir();
                let s = crate::systems::cat_stable_dir();
                let dx = crate::geom::circle_diff(p.x, d.center.0);
                let dy = crate::geom::circle_diff(p.y, d.center.1);
                let xi = dx * u.x + dy * u.y;
                let eta = dx * s.x + dy * s.y;
                xi.abs() < d.r_u && eta.abs() < d.r_s
            }
        }
    };

    let mut lambda_f = 0.0_f64;
    let mut lambda_e = 0.0_f64;
    let mut f_expansion_min = f64::INFINITY;
    let mut e_norm_max = 0.0_f64;
    let mut sigma2 = 0.0_f64;
    let mut c1_distance = 0.0_f64;
    let mut inv_norm_in_v = 0.0_f64;

    for &p in &points {
        let m = deriv_mat(sys, p)?;
        let det = m.det();
        let m_inv = Mat2::new(m.d / det, -m.b / det, -m.c / det, m.a / det);
        let inside = in_v(p);

        for &t in &CONE_OFFSETS {
            let v = cone.f_cone_vector(t);
            let w = m.apply(v);
            let (fw, ew) = cone.components(w);
            lambda_f = lambda_f.max(ew.abs() / (cone.width_f * fw.abs()));
            let growth = w.norm();
            f_expansion_min = f_expansion_min.min(growth);
            if inside {
                inv_norm_in_v = inv_norm_in_v.max(1.0 / growth);
            } else {
                sigma2 = sigma2.max(1.0 / growth);
            }

            let u = cone.e_cone_vector(t);
            let wu = m_inv.apply(u);
            let (fu, eu) = cone.components(wu);
            lambda_e = lambda_e.max(fu.abs() / (cone.width_e * eu.abs()));
            e_norm_max = e_norm_max.max(m.apply(u).norm());
        }

        if !inside {
            let dd = [
                (m.a - linear.a).abs(),
                (m.b - linear.b).abs(),
                (m.c - linear.c).abs(),
                (m.d - linear.d).abs(),
            ];
            c1_distance = c1_distance.max(dd.into_iter().fold(0.0, f64::max));
        }
    }

    // Bounding boxes of the deformed region and its image in the cover.
    let (v_box, fv_box) = match &da {
        None => ((0.0, 0.0), (0.0, 0.0)),
        Some(d) => {
            let u = crate::systems::cat_unstable_dir();
            let s = crate::systems::cat_stable_dir();
            let mut v_lo = (f64::INFINITY, f64::INFINITY);
            let mut v_hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            let mut f_lo = (f64::INFINITY, f64::INFINITY);
            let mut f_hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            let grid = 41;
            for i in 0..grid {
                for j in 0..grid {
                    let xi = d.r_u * (2.0 * i as f64 / (grid - 1) as f64 - 1.0);
                    let eta = d.r_s * (2.0 * j as f64 / (grid - 1) as f64 - 1.0);
                    let (px, py) = (xi * u.x + eta * s.x, xi * u.y + eta * s.y);
                    v_lo = (v_lo.0.min(px), v_lo.1.min(py));
                    v_hi = (v_hi.0.max(px), v_hi.1.max(py));
                    // Continuous (unwrapped) image displacement: shear then
                    // the linear map.
                    let shift = d.tau
                        * d.r_u
                        * crate::systems::bump_integral(xi / d.r_u)
                        * crate::systems::bump(eta / d.r_s);
                    let (gx, gy) = (px - shift * u.x, py - shift * u.y);
                    let (ix, iy) = (2.0 * gx + gy, gx + gy);
                    f_lo = (f_lo.0.min(ix), f_lo.1.min(iy));
                    f_hi = (f_hi.0.max(ix), f_hi.1.max(iy));
                }
            }
            (
                (v_hi.0 - v_lo.0, v_hi.1 - v_lo.1),
                (f_hi.0 - f_lo.0, f_hi.1 - f_lo.1),
            )
        }
    };

    let sigma1 = f_expansion_min.min(1.0 / e_norm_max);
    let d_sup = if da.is_some() { inv_norm_in_v } else { sigma2 };
    let d_margin = (1.0 + delta0) - d_sup;

    Ok(AbcdReport {
        lambda_f,
        lambda_e,
        a_pass: lambda_f < 1.0 && lambda_e < 1.0,
        sigma1,
        f_expansion_min,
        e_norm_max,
        b_pass: sigma1 > 1.0,
        sigma2,
        c1_distance,
        v_box,
        fv_box,
        c_pass: sigma2 < 1.0 && v_box.0 < 1.0 && v_box.1 < 1.0 && fv_box.0 < 1.0 && fv_box.1 < 1.0,
        delta0,
        d_margin,
        d_pass: d_margin > 0.0,
    })
}
