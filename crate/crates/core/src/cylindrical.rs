//! Surfaces of revolution around the t-axis: zero sets of f(x,y,t) = v(u,t)
//! with u = |x|^2 + |y|^2.  For these the curvature eigenvalues have closed
//! forms in the profile derivatives:
//!
//!   k = v_u / (sqrt(u) sqrt(v_u^2 + v_t^2))
//!   l = k + 2 sqrt(u) (v_uu v_t^2 + v_tt v_u^2 - 2 v_ut v_u v_t)
//!           / (v_u^2 + v_t^2)^(3/2)
//!
//! valid off the axis and with the orientation along +grad f.

use crate::error::{Error, Result};
use crate::heisenberg::{check_dimension, Point};
use crate::surface::{frame_jet_from_euclidean, EuclideanJet, SurfaceJet};

/// Points with |x|^2 + |y|^2 below this are treated as on the axis.
pub const AXIS_TOL: f64 = 1e-10;

/// Maximum total degree of a user polynomial profile.
pub const MAX_PROFILE_DEGREE: u32 = 6;

/// Value and derivatives of the profile at one (u, t).
#[derive(Debug, Clone, Copy)]
pub struct ProfileJet {
    pub v: f64,
    pub v_u: f64,
    pub v_t: f64,
    pub v_uu: f64,
    pub v_ut: f64,
    pub v_tt: f64,
}

/// A polynomial profile v(u, t), total degree at most 6.
#[derive(Debug, Clone)]
pub struct ProfilePolynomial {
    /// (coefficient, power of u, power of t)
    terms: Vec<(f64, u32, u32)>,
    interior_t: Option<f64>,
}

impl ProfilePolynomial {
    pub fn new(terms: Vec<(f64, u32, u32)>, interior_t: Option<f64>) -> Result<Self> {
        for (c, pu, pt) in &terms {
            if !c.is_finite() {
                return Err(Error::InvalidSpec("profile coefficient must be finite".into()));
            }
            if pu + pt > MAX_PROFILE_DEGREE {
                return Err(Error::InvalidSpec(format!(
                    "profile term u^{pu} t^{pt} exceeds total degree {MAX_PROFILE_DEGREE}"
                )));
            }
        }
        Ok(ProfilePolynomial { terms, interior_t })
    }
}

/// The profile catalog.
#[derive(Debug, Clone)]
pub enum Profile {
    /// v = u^2 + (t - t0)^2 - R^4, the gauge ball profile.
    Gauge { radius: f64, t0: f64 },
    /// v = u^2/a + t^2/b - 1.
    Ellipsoid { a: f64, b: f64 },
    /// A user polynomial in (u, t).
    Polynomial(ProfilePolynomial),
}

impl Profile {
    pub fn gauge(radius: f64, t0: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "gauge profile needs finite R > 0, got R = {radius}"
            )));
        }
        Ok(Profile::Gauge { radius, t0 })
    }

    pub fn ellipsoid(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "ellipsoid profile needs a, b > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Profile::Ellipsoid { a, b })
    }

    /// Looks up a profile by catalog id with a JSON parameter object.
    /// Supported: "gauge" {radius, t0?}, "ellipsoid" {a, b},
    /// "polynomial" {terms: [[coeff, u_pow, t_pow], ...], interior_t?}.
    pub fn from_catalog(id: &str, params: &serde_json::Value) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params.get(key).and_then(|v| v.as_f64()).ok_or_else(|| {
                Error::InvalidSpec(format!("profile '{id}' needs numeric parameter '{key}'"))
            })
        };
        match id {
            "gauge" => {
                let radius = get("radius")?;
                let t0 = params.get("t0").and_then(|v| v.as_f64()).unwrap_or(0.0);
                Profile::gauge(radius, t0)
            }
            "ellipsoid" => Profile::ellipsoid(get("a")?, get("b")?),
            "polynomial" => {
                let raw = params.get("terms").and_then(|v| v.as_array()).ok_or_else(|| {
                    Error::InvalidSpec("profile 'polynomial' needs a 'terms' array".into())
                })?;
                let mut terms = Vec::with_capacity(raw.len());
                for entry in raw {
                    let triple = entry.as_array().filter(|a| a.len() == 3).ok_or_else(|| {
                        Error::InvalidSpec(
                            "each polynomial term must be [coeff, u_pow, t_pow]".into(),
                        )
                    })?;
                    let coeff = triple[0].as_f64().ok_or_else(|| {
                        Error::InvalidSpec("term coefficient must be numeric".into())
                    })?;
                    let pu = triple[1].as_u64().ok_or_else(|| {
                        Error::InvalidSpec("term powers must be nonnegative integers".into())
                    })?;
                    let pt = triple[2].as_u64().ok_or_else(|| {
                        Error::InvalidSpec("term powers must be nonnegative integers".into())
                    })?;
                    terms.push((coeff, pu as u32, pt as u32));
                }
                let interior_t = params.get("interior_t").and_then(|v| v.as_f64());
                Ok(Profile::Polynomial(ProfilePolynomial::new(terms, interior_t)?))
            }
            other => Err(Error::InvalidSpec(format!("unknown profile id '{other}'"))),
        }
    }

    /// A t with (0, 0, t) strictly inside the body, when one is known.
    pub fn interior_t(&self) -> Option<f64> {
        match self {
            Profile::Gauge { t0, .. } => Some(*t0),
            Profile::Ellipsoid { .. } => Some(0.0),
            Profile::Polynomial(p) => p.interior_t,
        }
    }

    /// Exact order-2 jet of v at (u, t).
    pub fn eval(&self, u: f64, t: f64) -> ProfileJet {
        match self {
            Profile::Gauge { radius, t0 } => {
                let w = t - t0;
                ProfileJet {
                    v: u * u + w * w - radius.powi(4),
                    v_u: 2.0 * u,
                    v_t: 2.0 * w,
                    v_uu: 2.0,
                    v_ut: 0.0,
                    v_tt: 2.0,
                }
            }
            Profile::Ellipsoid { a, b } => ProfileJet {
                v: u * u / a + t * t / b - 1.0,
                v_u: 2.0 * u / a,
                v_t: 2.0 * t / b,
                v_uu: 2.0 / a,
                v_ut: 0.0,
                v_tt: 2.0 / b,
            },
            Profile::Polynomial(p) => {
                let mut jet =
                    ProfileJet { v: 0.0, v_u: 0.0, v_t: 0.0, v_uu: 0.0, v_ut: 0.0, v_tt: 0.0 };
                for &(c, pu, pt) in &p.terms {
                    let up = [pow(u, pu), dpow(u, pu), ddpow(u, pu)];
                    let tp = [pow(t, pt), dpow(t, pt), ddpow(t, pt)];
                    jet.v += c * up[0] * tp[0];
                    jet.v_u += c * up[1] * tp[0];
                    jet.v_t += c * up[0] * tp[1];
                    jet.v_uu += c * up[2] * tp[0];
                    jet.v_ut += c * up[1] * tp[1];
                    jet.v_tt += c * up[0] * tp[2];
                }
                jet
            }
        }
    }
}

fn pow(v: f64, p: u32) -> f64 {
    if p == 0 {
        1.0
    } else {
        v.powi(p as i32)
    }
}

fn dpow(v: f64, p: u32) -> f64 {
    if p == 0 {
        0.0
    } else {
        p as f64 * pow(v, p - 1)
    }
}

fn ddpow(v: f64, p: u32) -> f64 {
    if p < 2 {
        0.0
    } else {
        (p * (p - 1)) as f64 * pow(v, p - 2)
    }
}

/// Coordinate jet of f(x,y,t) = v(u,t) by the chain rule through u.
pub(crate) fn profile_euclidean_jet(profile: &Profile, p: &Point) -> EuclideanJet {
    let n = p.dim();
    let dim = 2 * n + 1;
    let ti = 2 * n;
    let u = p.radial_sq();
    let pj = profile.eval(u, p.t);
    let z = |j: usize| if j < n { p.x[j] } else { p.y[j - n] };
    let mut e = EuclideanJet::zero(dim);
    e.value = pj.v;
    for j in 0..2 * n {
        e.grad[j] = 2.0 * z(j) * pj.v_u;
    }
    e.grad[ti] = pj.v_t;
    for i in 0..2 * n {
        for j in 0..2 * n {
            e.hess[(i, j)] = 4.0 * z(i) * z(j) * pj.v_uu + if i == j { 2.0 * pj.v_u } else { 0.0 };
        }
        e.hess[(i, ti)] = 2.0 * z(i) * pj.v_ut;
        e.hess[(ti, i)] = e.hess[(i, ti)];
    }
    e.hess[(ti, ti)] = pj.v_tt;
    e
}

/// Exact frame jet of the profile surface at p (orientation along +grad f).
pub fn profile_jet(profile: &Profile, n: usize, p: &Point) -> Result<SurfaceJet> {
    check_dimension(n)?;
    if p.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: p.dim() });
    }
    Ok(frame_jet_from_euclidean(p, profile_euclidean_jet(profile, p), 1.0))
}

/// Closed-form curvature eigenvalues (k, l) of the profile surface at p.
/// Errors on the axis (u < AXIS_TOL) and when the profile gradient vanishes.
pub fn profile_kl(profile: &Profile, p: &Point) -> Result<(f64, f64)> {
    let u = p.radial_sq();
    if u < AXIS_TOL {
        return Err(Error::AxisPoint(u.sqrt()));
    }
    let pj = profile.eval(u, p.t);
    let q = pj.v_u * pj.v_u + pj.v_t * pj.v_t;
    if q < 1e-28 {
        return Err(Error::DegenerateGradient(q.sqrt()));
    }
    let su = u.sqrt();
    let k = pj.v_u / (su * q.sqrt());
    let num =
        pj.v_uu * pj.v_t * pj.v_t + pj.v_tt * pj.v_u * pj.v_u - 2.0 * pj.v_ut * pj.v_u * pj.v_t;
    let l = k + 2.0 * su * num / q.powf(1.5);
    Ok((k, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{evaluate_jet, DefiningFunctionSpec};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn gauge_profile_jet_matches_gauge_ball_jet() {
        let profile = Profile::gauge(1.0, 0.0).unwrap();
        let ball = DefiningFunctionSpec::gauge_ball(1, 1.0, 0.0).unwrap();
        let p = Point::new(vec![1.0], vec![0.0], 0.0);
        let a = profile_jet(&profile, 1, &p).unwrap();
        let b = evaluate_jet(&ball, &p).unwrap();
        assert_close(a.value, b.value, 1e-15);
        for m in 0..3 {
            assert_close(a.frame_grad.component(m), b.frame_grad.component(m), 1e-14);
            for k in 0..3 {
                assert_close(a.frame_hess[(m, k)], b.frame_hess[(m, k)], 1e-14);
            }
        }
    }

    #[test]
    fn gauge_profile_kl_is_umbilic_with_l_3k() {
        let profile = Profile::gauge(1.2, 0.3).unwrap();
        // on-surface point: u^2 + (t - t0)^2 = R^4
        let u = 0.9f64;
        let t = 0.3 + (1.2f64.powi(4) - u * u).sqrt();
        let p = Point::new(vec![u.sqrt()], vec![0.0], t);
        let (k, l) = profile_kl(&profile, &p).unwrap();
        assert_close(k, u.sqrt() / 1.2f64.powi(2), 1e-13);
        assert_close(l, 3.0 * k, 1e-13);
    }

    #[test]
    fn ellipsoid_profile_on_surface_points() {
        let profile = Profile::ellipsoid(2.0, 1.0).unwrap();
        // v(1, t) = 1/2 + t^2 - 1 = 0 at t = 1/sqrt(2)
        let t = (0.5f64).sqrt();
        assert_close(profile.eval(1.0, t).v, 0.0, 1e-15);
        let p = Point::new(vec![1.0], vec![0.0], t);
        let (k, l) = profile_kl(&profile, &p).unwrap();
        // generic profile: umbilic but l != 3k
        assert!((l - 3.0 * k).abs() > 1e-3, "k = {k}, l = {l}");
    }

    #[test]
    fn polynomial_profile_matches_gauge() {
        let poly = Profile::Polynomial(
            ProfilePolynomial::new(vec![(1.0, 2, 0), (1.0, 0, 2), (-1.0, 0, 0)], Some(0.0))
                .unwrap(),
        );
        let gauge = Profile::gauge(1.0, 0.0).unwrap();
        let p = Point::new(vec![0.8], vec![0.3], 0.4);
        let a = profile_jet(&poly, 1, &p).unwrap();
        let b = profile_jet(&gauge, 1, &p).unwrap();
        assert_close(a.value, b.value, 1e-14);
        for m in 0..3 {
            assert_close(a.frame_grad.component(m), b.frame_grad.component(m), 1e-13);
        }
    }

    #[test]
    fn axis_points_are_rejected() {
        let profile = Profile::gauge(1.0, 0.0).unwrap();
        let p = Point::new(vec![0.0], vec![0.0], 1.0);
        assert!(matches!(profile_kl(&profile, &p), Err(Error::AxisPoint(_))));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let err = ProfilePolynomial::new(vec![(1.0, 4, 3)], None);
        assert!(matches!(err, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn catalog_round_trip() {
        let params: serde_json::Value = serde_json::json!({"radius": 1.5, "t0": 0.25});
        let profile = Profile::from_catalog("gauge", &params).unwrap();
        assert!(matches!(profile, Profile::Gauge { radius, t0 } if radius == 1.5 && t0 == 0.25));
        let params = serde_json::json!({"a": 2.0, "b": 0.5});
        assert!(Profile::from_catalog("ellipsoid", &params).is_ok());
        let params = serde_json::json!({"terms": [[1.0, 2, 0], [1.0, 0, 2], [-1.0, 0, 0]], "interior_t": 0.0});
        let profile = Profile::from_catalog("polynomial", &params).unwrap();
        assert_eq!(profile.interior_t(), Some(0.0));
        assert!(Profile::from_catalog("torus", &serde_json::json!({})).is_err());
        assert!(Profile::from_catalog("gauge", &serde_json::json!({})).is_err());
    }
}
