//! Family constructors: parameter validation and derived data.

use super::{cat_lambda_u, DaMap, DynamicalSystem, FamilyId, InfiniteModal, Kind, Params, Viana};
use crate::error::{Error, Result};
use crate::geom::DomainSpec;

const GOLDEN_FRAC: f64 = 0.6180339887498949;

/// Build one of the built-in families. Defaults are filled in for missing
/// parameters and echoed in the system metadata, so runs are
/// self-describing.
pub fn build_system(family: FamilyId, params: &Params) -> Result<DynamicalSystem> {
    let mut p = ParamReader::new(params);
    let sys = match family {
        FamilyId::Doubling => {
            DynamicalSystem::new(Kind::Doubling, family, DomainSpec::Circle, vec![])
        }
        FamilyId::ExpandingCircle => {
            let k = p.integer("k", 3.0, 2.0, 64.0)?;
            DynamicalSystem::new(
                Kind::ExpandingCircle { k: k as u32 },
                family,
                DomainSpec::Circle,
                vec![("k".into(), k)],
            )
        }
        FamilyId::Rotation => {
            let alpha = p.real(
                "alpha",
                GOLDEN_FRAC,
                |v| v > 0.0 && v < 1.0,
                "must lie in (0, 1)",
            )?;
            DynamicalSystem::new(
                Kind::Rotation { alpha },
                family,
                DomainSpec::Circle,
                vec![("alpha".into(), alpha)],
            )
        }
        FamilyId::MannevillePomeau => {
            let gamma = p.real("gamma", 0.5, |v| v > 0.0 && v < 1.0, "must lie in (0, 1)")?;
            DynamicalSystem::new(
                Kind::MannevillePomeau { gamma },
                family,
                DomainSpec::Circle,
                vec![("gamma".into(), gamma)],
            )
        }
        FamilyId::Quadratic => {
            let a = p.real("a", 2.0, |v| v > 1.0 && v <= 2.0, "must lie in (1, 2]")?;
            DynamicalSystem::new(
                Kind::Quadratic { a },
                family,
                DomainSpec::Interval { lo: -2.0, hi: 2.0 },
                vec![("a".into(), a)],
            )
        }
        FamilyId::InfiniteModal => build_infinite_modal(&mut p)?,
        FamilyId::Gauss => DynamicalSystem::new(
            Kind::Gauss,
            family,
            DomainSpec::Interval { lo: 0.0, hi: 1.0 },
            vec![],
        ),
        FamilyId::Lorenz1d => {
            let exponent = p.real(
                "exponent",
                0.75,
                |v| v > 0.0 && v < 1.0,
                "must lie in (0, 1)",
            )?;
            let scale = p.real("scale", 2.0, |v| v > 1.0 && v <= 2.0, "must lie in (1, 2]")?;
            if scale * exponent <= 1.0 {
                return Err(Error::ParamOutOfRange {
                    name: "exponent",
                    value: exponent,
                    reason: "scale * exponent must exceed 1 so the branches expand",
                });
            }
            DynamicalSystem::new(
                Kind::Lorenz1d { exponent, scale },
                family,
                DomainSpec::Interval { lo: -1.0, hi: 1.0 },
                vec![("exponent".into(), exponent), ("scale".into(), scale)],
            )
        }
        FamilyId::Viana => build_viana(&mut p)?,
        FamilyId::CatMap => DynamicalSystem::new(Kind::CatMap, family, DomainSpec::Torus2, vec![]),
        FamilyId::DaMap => build_da(&mut p)?,
        FamilyId::TwoBasins => DynamicalSystem::new(
            Kind::TwoBasins,
            family,
            DomainSpec::Interval { lo: -1.0, hi: 1.0 },
            vec![],
        ),
        FamilyId::TorusTranslation => {
            let vx = p.real(
                "vx",
                GOLDEN_FRAC,
                |v| v > 0.0 && v < 1.0,
                "must lie in (0, 1)",
            )?;
            let vy = p.real(
                "vy",
                std::f64::consts::SQRT_2 - 1.0,
                |v| v > 0.0 && v < 1.0,
                "must lie in (0, 1)",
            )?;
            DynamicalSystem::new(
                Kind::TorusTranslation { vx, vy },
                family,
                DomainSpec::Torus2,
                vec![("vx".into(), vx), ("vy".into(), vy)],
            )
        }
    };
    p.finish(family)?;
    Ok(sys)
}

fn build_infinite_modal(p: &mut ParamReader) -> Result<DynamicalSystem> {
    let amp = p.real("amp", 1.0, |v| v > 0.0, "must be positive")?;
    let alpha = p.real("alpha", 0.4, |v| v > 0.0 && v < 1.0, "must lie in (0, 1)")?;
    let beta = p.real("beta", 3.0, |v| v > 0.0, "must be positive")?;
    let eps = p.real("eps", 0.5, |v| v > 0.0 && v < 1.0, "must lie in (0, 1)")?;
    let mu = p.real("mu", 0.005, |v| v.abs() < 0.5, "must be small")?;
    let slope = p.real("slope", 16.0, |v| v > 1.0, "extension must expand")?;
    if amp * eps.powf(alpha) + mu.abs() >= 1.0 {
        return Err(Error::ParamOutOfRange {
            name: "amp",
            value: amp,
            reason: "amp * eps^alpha + |mu| must stay below 1 so the core maps into the interval",
        });
    }

    let f_eps = amp * eps.powf(alpha) * (beta * (1.0 / eps).ln()).sin();

    // Critical points of the core: z_k = exp(-(atan(beta/alpha) + k pi) / beta),
    // accumulating at zero, truncated at the f64 floor.
    let atan_ba = (beta / alpha).atan();
    let mut singular = vec![0.0, eps];
    let k_min = ((beta * (1.0 / eps).ln() - atan_ba) / std::f64::consts::PI)
        .ceil()
        .max(0.0) as i64;
    let mut k = k_min;
    loop {
        let z = (-(atan_ba + k as f64 * std::f64::consts::PI) / beta).exp();
        if z < 1e-300 || k > k_min + 500_000 {
            break;
        }
        if z <= eps {
            singular.push(z);
        }
        k += 1;
    }
    // Fold points of the wrapped extension: f_eps + slope (z - eps) + mu = 1 (mod 2).
    for j in -200..=200 {
        let z = eps + (1.0 - mu - f_eps + 2.0 * j as f64) / slope;
        if z > eps && z < 1.0 {
            singular.push(z);
        }
    }
    singular.sort_by(|a, b| a.partial_cmp(b).unwrap());
    singular.dedup();

    let im = InfiniteModal {
        amp,
        alpha,
        beta,
        eps,
        mu,
        slope,
        f_eps,
        singular,
    };
    Ok(DynamicalSystem::new(
        Kind::InfiniteModal(im),
        FamilyId::InfiniteModal,
        DomainSpec::Interval { lo: -1.0, hi: 1.0 },
        vec![
            ("amp".into(), amp),
            ("alpha".into(), alpha),
            ("beta".into(), beta),
            ("eps".into(), eps),
            ("mu".into(), mu),
            ("slope".into(), slope),
        ],
    ))
}

/// Parameter of the quadratic family whose critical orbit lands on a
/// repelling fixed point after three iterates (real root of
/// `a^3 - 2a^2 + 2a - 2`).
fn misiurewicz_parameter() -> f64 {
    let mut a: f64 = 1.5437;
    for _ in 0..60 {
        let f = ((a - 2.0) * a + 2.0) * a - 2.0;
        let df = (3.0 * a - 4.0) * a + 2.0;
        let next = a - f / df;
        if next == a {
            break;
        }
        a = next;
    }
    a
}

fn build_viana(p: &mut ParamReader) -> Result<DynamicalSystem> {
    let d = p.integer("d", 16.0, 16.0, 64.0)?;
    let alpha = p.real(
        "alpha",
        0.02,
        |v| v > 0.0 && v <= 0.1,
        "must lie in (0, 0.1]",
    )?;
    let a0 = p.real(
        "a0",
        misiurewicz_parameter(),
        |v| v > 1.0 && v < 2.0,
        "must lie in (1, 2)",
    )?;

    let (x_lo, x_hi) = viana_band(a0, alpha)?;
    let v = Viana {
        d: d as u32,
        alpha,
        a0,
        x_lo,
        x_hi,
    };
    Ok(DynamicalSystem::new(
        Kind::Viana(v),
        FamilyId::Viana,
        DomainSpec::Cylinder { lo: x_lo, hi: x_hi },
        vec![
            ("d".into(), d),
            ("alpha".into(), alpha),
            ("a0".into(), a0),
            ("x_lo".into(), x_lo),
            ("x_hi".into(), x_hi),
        ],
    ))
}

/// Locate a forward-invariant fibre band for the skew product: candidate
/// `[a_min - hi^2, hi]` with `hi` slightly above the largest critical
/// value, then verify by iterating the boundary until the image is
/// strictly interior.
fn viana_band(a0: f64, alpha: f64) -> Result<(f64, f64)> {
    let a_max = a0 + alpha;
    let a_min = a0 - alpha;
    let margin = 0.01;
    let hi = a_max + margin;
    let lo = a_min - hi * hi;
    if lo <= -2.0 || hi >= 2.0 || lo.abs() > hi {
        return Err(Error::RegionSearchFailed(format!(
            "no invariant fibre band for a0 = {a0}, alpha = {alpha}"
        )));
    }
    // One step: x in [lo, hi] maps into [a_min - hi^2, a_max] = [lo, a_max].
    let after_one = (lo, a_max);
    if after_one.0 < lo || after_one.1 >= hi {
        return Err(Error::RegionSearchFailed(
            "band is not forward invariant".into(),
        ));
    }
    // Second step starts from |x| <= max(|lo|, a_max) < hi, so the image is
    // strictly inside. Verify on a grid of fibre endpoints.
    let m = a_max.max(lo.abs());
    let two_lo = a_min - m * m;
    if two_lo <= lo || a_max >= hi {
        return Err(Error::RegionSearchFailed(
            "band image does not become interior".into(),
        ));
    }
    for i in 0..=200 {
        let x = lo + (hi - lo) * i as f64 / 200.0;
        let y = a_max - x * x;
        let y2 = a_min - x * x;
        if !(y > lo && y < hi && y2 > lo && y2 < hi) {
            return Err(Error::RegionSearchFailed(
                "band boundary iterate escaped".into(),
            ));
        }
    }
    Ok((lo, hi))
}

fn build_da(p: &mut ParamReader) -> Result<DynamicalSystem> {
    let radius = p.real(
        "radius",
        0.04,
        |v| v > 0.0 && v <= 0.05,
        "must lie in (0, 0.05]",
    )?;
    let radius_s = p.real(
        "radius_s",
        4.0 * radius,
        |v| v > 0.0 && v <= 0.2,
        "must lie in (0, 0.2]",
    )?;
    let delta0 = p.real("delta0", 0.2, |v| v > 0.0 && v < 1.0, "must lie in (0, 1)")?;
    let weak = p.real(
        "weak",
        1.1,
        |v| v > 0.0 && v <= cat_lambda_u(),
        "cannot exceed the unperturbed unstable eigenvalue",
    )?;
    if radius_s < radius {
        return Err(Error::ParamOutOfRange {
            name: "radius_s",
            value: radius_s,
            reason: "stable-direction support must be at least the unstable one",
        });
    }
    let sys = build_da_unchecked(radius, radius_s, delta0, weak);
    // The deformation must satisfy the cone and expansion conditions; a
    // construction that fails them is rejected outright.
    let report = crate::ph::check_conditions_abcd(&sys, 2000, 0xDA_5EED)?;
    if !report.all_pass() {
        return Err(Error::ConditionViolated(report.failure_summary()));
    }
    Ok(sys)
}

/// Assemble the deformed torus map without verifying the cone and
/// expansion conditions. Test-only escape hatch for exercising the
/// condition checker on illegal bumps.
pub(crate) fn build_da_unchecked(
    radius: f64,
    radius_s: f64,
    delta0: f64,
    weak: f64,
) -> DynamicalSystem {
    let tau = 1.0 - weak / cat_lambda_u();
    let da = DaMap {
        center: (0.5, 0.5),
        r_u: radius,
        r_s: radius_s,
        tau,
        delta0,
    };
    DynamicalSystem::new(
        Kind::DaMap(da),
        FamilyId::DaMap,
        DomainSpec::Torus2,
        vec![
            ("radius".into(), radius),
            ("radius_s".into(), radius_s),
            ("delta0".into(), delta0),
            ("weak".into(), weak),
        ],
    )
}

/// Reads parameters by key, tracking unknown keys so typos in configs
/// fail loudly.
struct ParamReader<'a> {
    params: &'a Params,
    used: Vec<&'a str>,
}

impl<'a> ParamReader<'a> {
    fn new(params: &'a Params) -> Self {
        ParamReader {
            params,
            used: Vec::new(),
        }
    }

    fn real(
        &mut self,
        name: &'static str,
        default: f64,
        ok: impl Fn(f64) -> bool,
        reason: &'static str,
    ) -> Result<f64> {
        let v = match self.params.get_key_value(name) {
            Some((k, v)) => {
                self.used.push(k.as_str());
                *v
            }
            None => default,
        };
        if !ok(v) {
            return Err(Error::ParamOutOfRange {
                name,
                value: v,
                reason,
            });
        }
        Ok(v)
    }

    fn integer(&mut self, name: &'static str, default: f64, lo: f64, hi: f64) -> Result<f64> {
        let v = self.real(name, default, |v| v >= lo && v <= hi, "out of range")?;
        if (v - v.round()).abs() > 1e-9 {
            return Err(Error::ParamOutOfRange {
                name,
                value: v,
                reason: "must be an integer",
            });
        }
        Ok(v.round())
    }

    fn finish(self, family: FamilyId) -> Result<()> {
        for key in self.params.keys() {
            if !self.used.contains(&key.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "unknown parameter `{key}` for family `{family}`"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn misiurewicz_root_is_fixed() {
        let a = misiurewicz_parameter();
        let f = ((a - 2.0) * a + 2.0) * a - 2.0;
        assert!(f.abs() < 1e-14);
        assert!(a > 1.54 && a < 1.55);
    }

    #[test]
    fn quadratic_rejects_out_of_range_parameter() {
        let mut p = Params::new();
        p.insert("a".into(), 2.5);
        assert!(matches!(
            build_system(FamilyId::Quadratic, &p),
            Err(Error::ParamOutOfRange { name: "a", .. })
        ));
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        let mut p = Params::new();
        p.insert("zeta".into(), 1.0);
        assert!(matches!(
            build_system(FamilyId::Doubling, &p),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn viana_band_is_forward_invariant() {
        let sys = build_system(FamilyId::Viana, &Params::new()).unwrap();
        let (lo, hi) = (sys.param("x_lo").unwrap(), sys.param("x_hi").unwrap());
        assert!(lo > -2.0 && hi < 2.0 && lo < 0.0 && hi > 1.0);
        // Iterate a boundary fibre and confirm it stays inside.
        let mut p = crate::geom::Point::two(0.123, hi);
        for _ in 0..200 {
            p = sys.map(p).unwrap();
            assert!(p.y > lo && p.y < hi);
        }
    }

    #[test]
    fn infinite_modal_singular_set_is_dense_near_zero() {
        let sys = build_system(FamilyId::InfiniteModal, &Params::new()).unwrap();
        // Distances shrink as the accumulation point is approached.
        let d1 = sys.singular_distance(crate::geom::Point::one(1e-2));
        let d2 = sys.singular_distance(crate::geom::Point::one(1e-6));
        assert!(d1 < 1e-2 && d2 < 1e-6);
        assert!(d2 < d1);
    }
}
