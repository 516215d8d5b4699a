//! Closed-form reference data for gauge spheres
//! (|x|^2+|y|^2)^2 + (t - t0)^2 = R^4, kept deliberately independent of the
//! generic defining-function machinery so the two can check each other.
//!
//! With r = |xi_H|, w = t - t0 and D = sqrt(4 r^2 R^4 + w^2):
//!
//!   |P_H nu| = 2 r R^2 / D,        <nu, T> = w / D,
//!   nu_h = (r^2 xi_H + w J xi_H) / (r R^2),
//!   eta  = (w xi_H - r^2 J xi_H) / (r R^2),
//!   alpha = w / (r R^2),
//!   A(z) = (2r/R^2) <eta, z> eta + (r/R^2) z,
//!   H = (2n+1)/(2n-1) r / R^2.

use crate::error::{Error, Result};
use crate::heisenberg::{check_dimension, horizontal_position, j_apply, HorizontalVector, Point};
use crate::numeric::{derive_rng, unit_vector};
use rand::Rng;

/// Relative on-sphere tolerance for |r^4 + w^2 - R^4|.
pub const SPHERE_LEVEL_TOL: f64 = 1e-10;

/// Samples stay out of the polar caps r < POLE_BAND * R.
pub const POLE_BAND: f64 = 1e-3;

/// A gauge sphere of radius R centered at (0, 0, t0) in H^n.
#[derive(Debug, Clone, Copy)]
pub struct SphereSpec {
    pub n: usize,
    pub radius: f64,
    pub t0: f64,
}

impl SphereSpec {
    pub fn new(n: usize, radius: f64, t0: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(radius > 0.0) || !radius.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidSpec(format!("sphere needs finite R > 0, got R = {radius}")));
        }
        Ok(SphereSpec { n, radius, t0 })
    }

    /// The factor c for which the sphere satisfies H = c |xi_H|.
    pub fn prescribed_c(&self) -> f64 {
        (2 * self.n + 1) as f64 / ((2 * self.n - 1) as f64 * self.radius * self.radius)
    }

    /// The constant value of phi_v on the sphere, t0 / R^2.
    pub fn phi_v_constant(&self) -> f64 {
        self.t0 / (self.radius * self.radius)
    }

    /// South and north pole (the two characteristic points).
    pub fn poles(&self) -> (Point, Point) {
        let r2 = self.radius * self.radius;
        (
            Point::new(vec![0.0; self.n], vec![0.0; self.n], self.t0 - r2),
            Point::new(vec![0.0; self.n], vec![0.0; self.n], self.t0 + r2),
        )
    }

    fn check_point(&self, p: &Point) -> Result<(f64, f64)> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: p.dim() });
        }
        let r4 = self.radius.powi(4);
        let u = p.radial_sq();
        let w = p.t - self.t0;
        let value = u * u + w * w - r4;
        if value.abs() > SPHERE_LEVEL_TOL * r4 {
            return Err(Error::OffSurface { value, tol: SPHERE_LEVEL_TOL * r4 });
        }
        let r = u.sqrt();
        if r <= 1e-12 * self.radius {
            return Err(Error::Pole(r));
        }
        Ok((r, w))
    }
}

/// Closed-form frame data at a non-polar sphere point.
#[derive(Debug, Clone)]
pub struct SphereFrame {
    pub p_h_norm: f64,
    pub nu_t: f64,
    pub nu_h: HorizontalVector,
    pub eta: HorizontalVector,
    pub alpha: f64,
}

pub fn sphere_frame(spec: &SphereSpec, p: &Point) -> Result<SphereFrame> {
    let (r, w) = spec.check_point(p)?;
    let r2sq = spec.radius * spec.radius;
    let d = (4.0 * r * r * r2sq * r2sq + w * w).sqrt();
    let xi = horizontal_position(p);
    let jxi = j_apply(&xi);
    let scale = 1.0 / (r * r2sq);
    let nu_h = xi.scale(r * r * scale).add(&jxi.scale(w * scale));
    let eta = xi.scale(w * scale).sub(&jxi.scale(r * r * scale));
    Ok(SphereFrame { p_h_norm: 2.0 * r * r2sq / d, nu_t: w / d, nu_h, eta, alpha: w / (r * r2sq) })
}

/// Closed-form curvature data at a non-polar sphere point: the shape
/// operator applied to a tangent horizontal z, and the scalars H, k, l.
#[derive(Debug, Clone)]
pub struct SphereShape {
    pub a_of_z: HorizontalVector,
    pub h: f64,
    pub k: f64,
    pub l: f64,
}

pub fn sphere_shape(spec: &SphereSpec, p: &Point, z: &HorizontalVector) -> Result<SphereShape> {
    let frame = sphere_frame(spec, p)?;
    if z.dim() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, actual: z.dim() });
    }
    let pairing = frame.nu_h.dot(z);
    if pairing.abs() > 1e-10 * (1.0 + z.norm()) {
        return Err(Error::NonTangent(pairing));
    }
    let r = horizontal_position(p).norm();
    let k = r / (spec.radius * spec.radius);
    let a_of_z = frame.eta.scale(2.0 * k * frame.eta.dot(z)).add(&z.scale(k));
    Ok(SphereShape {
        a_of_z,
        h: (2 * spec.n + 1) as f64 / (2 * spec.n - 1) as f64 * k,
        k,
        l: 3.0 * k,
    })
}

/// Deterministic sampling of the sphere away from the polar caps.  The
/// height above t0 is uniform in the band |t - t0| <= R^2 sqrt(1 - 1e-12)
/// (equivalent to r >= POLE_BAND * R) and the horizontal direction is
/// uniform on the (2n-1)-sphere; the level equation holds to roundoff.
pub fn sphere_sample(spec: &SphereSpec, count: usize, seed: u64) -> Vec<Point> {
    let r2 = spec.radius * spec.radius;
    let band = 1.0 - POLE_BAND.powi(4);
    (0..count)
        .map(|i| {
            let mut rng = derive_rng(seed, i as u64);
            let w = r2 * band * (2.0 * rng.gen::<f64>() - 1.0);
            let r = (r2 * r2 - w * w).sqrt().sqrt();
            let dir = unit_vector(&mut rng, 2 * spec.n);
            let x = dir[..spec.n].iter().map(|d| r * d).collect();
            let y = dir[spec.n..].iter().map(|d| r * d).collect();
            Point::new(x, y, spec.t0 + w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn frame_reference_point() {
        // |xi_H|^2 = 1/2, t = sqrt(3)/2 on the unit sphere
        let spec = SphereSpec::new(1, 1.0, 0.0).unwrap();
        let p = Point::new(vec![(0.5f64).sqrt()], vec![0.0], (3.0f64).sqrt() / 2.0);
        let f = sphere_frame(&spec, &p).unwrap();
        assert_close(f.nu_t, (3.0f64 / 11.0).sqrt(), 1e-13);
        assert_close(f.p_h_norm, 2.0 * (2.0f64 / 11.0).sqrt(), 1e-13);
        // structural relations of the closed forms
        assert_close(f.nu_h.norm(), 1.0, 1e-13);
        assert_close(f.eta.norm(), 1.0, 1e-13);
        assert_close(f.nu_h.dot(&f.eta), 0.0, 1e-13);
        assert_close(f.eta.add(&j_apply(&f.nu_h)).norm(), 0.0, 1e-13);
        assert_close(f.alpha, 2.0 * f.nu_t / f.p_h_norm, 1e-13);
        assert_close(f.p_h_norm * f.p_h_norm + f.nu_t * f.nu_t, 1.0, 1e-13);
    }

    #[test]
    fn curvature_reference_values() {
        let cases = [
            (1, 1.0, 0.0, Point::new(vec![1.0], vec![0.0], 0.0), 3.0),
            (2, 1.0, 0.0, Point::new(vec![1.0, 0.0], vec![0.0, 0.0], 0.0), 5.0 / 3.0),
            (
                1,
                1.0,
                0.0,
                Point::new(vec![(0.5f64).sqrt()], vec![0.0], (0.75f64).sqrt()),
                3.0 / std::f64::consts::SQRT_2,
            ),
        ];
        for (n, radius, t0, p, expected) in cases {
            let spec = SphereSpec::new(n, radius, t0).unwrap();
            let frame = sphere_frame(&spec, &p).unwrap();
            let shape = sphere_shape(&spec, &p, &frame.eta).unwrap();
            assert_close(shape.h, expected, 1e-13);
            // A(eta) = l eta
            assert_close(shape.a_of_z.sub(&frame.eta.scale(shape.l)).norm(), 0.0, 1e-13);
            assert_close(shape.l, 3.0 * shape.k, 1e-15);
        }
    }

    #[test]
    fn shape_on_transverse_directions() {
        // n = 2: any tangent direction orthogonal to eta satisfies A(z) = k z
        let spec = SphereSpec::new(2, 1.3, 0.2).unwrap();
        let p = sphere_sample(&spec, 1, 5).remove(0);
        let f = sphere_frame(&spec, &p).unwrap();
        // orthonormalize a coordinate direction against nu_h and eta
        let mut z = HorizontalVector::new(vec![1.0, 0.0], vec![0.0, 0.0]);
        for u in [&f.nu_h, &f.eta] {
            z = z.sub(&u.scale(z.dot(u)));
        }
        for u in [&f.nu_h, &f.eta] {
            z = z.sub(&u.scale(z.dot(u)));
        }
        let z = z.scale(1.0 / z.norm());
        let shape = sphere_shape(&spec, &p, &z).unwrap();
        assert_close(shape.a_of_z.sub(&z.scale(shape.k)).norm(), 0.0, 1e-12);
    }

    #[test]
    fn non_tangent_input_is_rejected() {
        let spec = SphereSpec::new(1, 1.0, 0.0).unwrap();
        let p = Point::new(vec![1.0], vec![0.0], 0.0);
        let f = sphere_frame(&spec, &p).unwrap();
        assert!(matches!(sphere_shape(&spec, &p, &f.nu_h), Err(Error::NonTangent(_))));
    }

    #[test]
    fn off_sphere_and_pole_are_rejected() {
        let spec = SphereSpec::new(1, 1.0, 0.0).unwrap();
        let off = Point::new(vec![0.5], vec![0.0], 0.0);
        assert!(matches!(sphere_frame(&spec, &off), Err(Error::OffSurface { .. })));
        let (south, _) = spec.poles();
        assert!(matches!(sphere_frame(&spec, &south), Err(Error::Pole(_))));
    }

    #[test]
    fn samples_lie_on_sphere_outside_polar_caps() {
        let spec = SphereSpec::new(3, 1.7, -0.4).unwrap();
        let pts = sphere_sample(&spec, 200, 9);
        let r4 = spec.radius.powi(4);
        for p in &pts {
            let u = p.radial_sq();
            let w = p.t - spec.t0;
            assert!((u * u + w * w - r4).abs() <= SPHERE_LEVEL_TOL * r4);
            assert!(u.sqrt() >= POLE_BAND * spec.radius);
            sphere_frame(&spec, p).unwrap();
        }
        assert_eq!(pts, sphere_sample(&spec, 200, 9));
        assert_ne!(pts, sphere_sample(&spec, 200, 10));
    }

    #[test]
    fn prescription_constants() {
        let spec = SphereSpec::new(1, 1.0, 2.0).unwrap();
        assert_close(spec.prescribed_c(), 3.0, 1e-15);
        assert_close(spec.phi_v_constant(), 2.0, 1e-15);
        let spec = SphereSpec::new(2, 2.0, 0.0).unwrap();
        assert_close(spec.prescribed_c(), 5.0 / 12.0, 1e-15);
    }
}
