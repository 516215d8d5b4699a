//! The Heisenberg group H^n = R^{2n+1} with coordinates (x_1..x_n, y_1..y_n, t),
//! its left-invariant orthonormal frame
//!
//!   X_j = d/dx_j - 2 y_j d/dt,   Y_j = d/dy_j + 2 x_j d/dt,   T = d/dt,
//!
//! the complex structure J on the horizontal layer, and the Levi-Civita
//! connection of the metric that makes {X_j, Y_j, T} orthonormal.
//!
//! Frame indexing convention used everywhere in this crate:
//! index 0..n maps to X_1..X_n, index n..2n maps to Y_1..Y_n, index 2n maps to T.

use crate::error::{Error, Result};

/// Supported dimension range for the group parameter n.
pub const MIN_DIM: usize = 1;
pub const MAX_DIM: usize = 8;

/// Validates the group parameter n.
pub fn check_dimension(n: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

/// A point of H^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Self {
        assert_eq!(x.len(), y.len(), "x and y must have the same length");
        Point { x, y, t }
    }

    pub fn origin(n: usize) -> Self {
        Point { x: vec![0.0; n], y: vec![0.0; n], t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Flattens to coordinates (x_1..x_n, y_1..y_n, t).
    pub fn to_coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(2 * self.dim() + 1);
        c.extend_from_slice(&self.x);
        c.extend_from_slice(&self.y);
        c.push(self.t);
        c
    }

    pub fn from_coords(n: usize, c: &[f64]) -> Self {
        assert_eq!(c.len(), 2 * n + 1);
        Point { x: c[..n].to_vec(), y: c[n..2 * n].to_vec(), t: c[2 * n] }
    }

    /// Squared distance to the vertical axis, |x|^2 + |y|^2.
    pub fn radial_sq(&self) -> f64 {
        dot(&self.x, &self.x) + dot(&self.y, &self.y)
    }
}

/// A vector in the horizontal layer, z = sum_j a_j X_j + b_j Y_j.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl HorizontalVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len(), "a and b must have the same length");
        HorizontalVector { a, b }
    }

    pub fn zero(n: usize) -> Self {
        HorizontalVector { a: vec![0.0; n], b: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn dot(&self, other: &HorizontalVector) -> f64 {
        dot(&self.a, &other.a) + dot(&self.b, &other.b)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> HorizontalVector {
        HorizontalVector {
            a: self.a.iter().map(|v| v * s).collect(),
            b: self.b.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &HorizontalVector) -> HorizontalVector {
        HorizontalVector {
            a: self.a.iter().zip(&other.a).map(|(p, q)| p + q).collect(),
            b: self.b.iter().zip(&other.b).map(|(p, q)| p + q).collect(),
        }
    }

    pub fn sub(&self, other: &HorizontalVector) -> HorizontalVector {
        self.add(&other.scale(-1.0))
    }

    /// Embeds into the full frame with zero T-component.
    pub fn to_ambient(&self) -> AmbientVector {
        AmbientVector { a: self.a.clone(), b: self.b.clone(), c: 0.0 }
    }
}

/// A vector in the full frame, z = sum_j a_j X_j + b_j Y_j + c T.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl AmbientVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: f64) -> Self {
        assert_eq!(a.len(), b.len(), "a and b must have the same length");
        AmbientVector { a, b, c }
    }

    pub fn zero(n: usize) -> Self {
        AmbientVector { a: vec![0.0; n], b: vec![0.0; n], c: 0.0 }
    }

    /// The m-th frame field as a constant-coefficient vector (see the module
    /// indexing convention).
    pub fn frame_basis(n: usize, m: usize) -> Self {
        assert!(m <= 2 * n);
        let mut v = AmbientVector::zero(n);
        if m < n {
            v.a[m] = 1.0;
        } else if m < 2 * n {
            v.b[m - n] = 1.0;
        } else {
            v.c = 1.0;
        }
        v
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn dot(&self, other: &AmbientVector) -> f64 {
        dot(&self.a, &other.a) + dot(&self.b, &other.b) + self.c * other.c
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> AmbientVector {
        AmbientVector {
            a: self.a.iter().map(|v| v * s).collect(),
            b: self.b.iter().map(|v| v * s).collect(),
            c: self.c * s,
        }
    }

    pub fn add(&self, other: &AmbientVector) -> AmbientVector {
        AmbientVector {
            a: self.a.iter().zip(&other.a).map(|(p, q)| p + q).collect(),
            b: self.b.iter().zip(&other.b).map(|(p, q)| p + q).collect(),
            c: self.c + other.c,
        }
    }

    pub fn sub(&self, other: &AmbientVector) -> AmbientVector {
        self.add(&other.scale(-1.0))
    }

    /// Projection onto the horizontal layer (drops the T-component).
    pub fn horizontal_part(&self) -> HorizontalVector {
        HorizontalVector { a: self.a.clone(), b: self.b.clone() }
    }

    /// Frame coefficient by flat index.
    pub fn component(&self, m: usize) -> f64 {
        let n = self.dim();
        if m < n {
            self.a[m]
        } else if m < 2 * n {
            self.b[m - n]
        } else {
            self.c
        }
    }
}

/// A vector field value together with the derivative of its frame
/// coefficients along a chosen direction, enough data to apply the
/// connection once.
#[derive(Debug, Clone)]
pub struct FieldJet {
    /// Field value at the base point.
    pub value: AmbientVector,
    /// Direction-applied derivative of each frame coefficient.
    pub coeff_derivative: AmbientVector,
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Group law: (x,y,t) . (x',y',t') = (x+x', y+y', t+t'+2 sum(x_k y'_k - y_k x'_k)).
pub fn group_mul(p: &Point, q: &Point) -> Result<Point> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), actual: q.dim() });
    }
    let n = p.dim();
    let mut twist = 0.0;
    for k in 0..n {
        twist += p.x[k] * q.y[k] - p.y[k] * q.x[k];
    }
    Ok(Point {
        x: p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect(),
        y: p.y.iter().zip(&q.y).map(|(a, b)| a + b).collect(),
        t: p.t + q.t + 2.0 * twist,
    })
}

/// Group inverse, componentwise negation.
pub fn group_inv(p: &Point) -> Point {
    Point { x: p.x.iter().map(|v| -v).collect(), y: p.y.iter().map(|v| -v).collect(), t: -p.t }
}

/// Anisotropic dilation delta_R(x,y,t) = (Rx, Ry, R^2 t); requires R > 0.
pub fn dilate(r: f64, p: &Point) -> Result<Point> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveDilation(r));
    }
    Ok(Point {
        x: p.x.iter().map(|v| r * v).collect(),
        y: p.y.iter().map(|v| r * v).collect(),
        t: r * r * p.t,
    })
}

/// Homogeneous gauge norm rho(p) = ((|x|^2+|y|^2)^2 + t^2)^(1/4).
pub fn gauge_norm(p: &Point) -> f64 {
    let u = p.radial_sq();
    (u * u + p.t * p.t).powf(0.25)
}

/// The complex structure on the horizontal layer: J(X_j) = Y_j, J(Y_j) = -X_j.
pub fn j_apply(z: &HorizontalVector) -> HorizontalVector {
    HorizontalVector { a: z.b.iter().map(|v| -v).collect(), b: z.a.to_vec() }
}

/// Horizontal position field xi_H = sum_j x_j X_j + y_j Y_j evaluated at p.
pub fn horizontal_position(p: &Point) -> HorizontalVector {
    HorizontalVector { a: p.x.clone(), b: p.y.clone() }
}

/// Derivative of the coordinate t along a horizontal vector at p,
/// Z(t) = sum_j (-2 a_j y_j + 2 b_j x_j).  Equals -2 <J(Z), xi_H>.
pub fn frame_derivative_of_t(p: &Point, z: &HorizontalVector) -> f64 {
    let mut s = 0.0;
    for j in 0..p.dim() {
        s += -2.0 * z.a[j] * p.y[j] + 2.0 * z.b[j] * p.x[j];
    }
    s
}

/// Coordinate representation of the frame vector z at p: moving along z
/// displaces coordinates by (a, b, c + 2 sum(x_j b_j - y_j a_j)).
pub fn coordinate_velocity(p: &Point, z: &AmbientVector) -> Vec<f64> {
    let n = p.dim();
    let mut v = Vec::with_capacity(2 * n + 1);
    v.extend_from_slice(&z.a);
    v.extend_from_slice(&z.b);
    let mut tdot = z.c;
    for j in 0..n {
        tdot += 2.0 * (p.x[j] * z.b[j] - p.y[j] * z.a[j]);
    }
    v.push(tdot);
    v
}

/// Straight coordinate displacement of p by h along the frame vector z.
pub fn displace(p: &Point, z: &AmbientVector, h: f64) -> Point {
    let v = coordinate_velocity(p, z);
    let mut c = p.to_coords();
    for (ci, vi) in c.iter_mut().zip(&v) {
        *ci += h * vi;
    }
    Point::from_coords(p.dim(), &c)
}

/// Levi-Civita covariant derivative nabla_dir applied to a field with the
/// given jet.  The connection table in the orthonormal frame is
///
///   nabla_{X_i} Y_j =  2 d_ij T,   nabla_{Y_i} X_j = -2 d_ij T,
///   nabla_{X_i} T  = -2 Y_i,       nabla_{Y_i} T   =  2 X_i,
///   nabla_T  X_i   = -2 Y_i,       nabla_T  Y_i    =  2 X_i,
///
/// with all remaining pairings zero.
pub fn covariant_derivative(field: &FieldJet, dir: &AmbientVector) -> Result<AmbientVector> {
    let n = dir.dim();
    if field.value.dim() != n || field.coeff_derivative.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: field.value.dim() });
    }
    let w = &field.value;
    let mut out = field.coeff_derivative.clone();
    for i in 0..n {
        // nabla_{X_i} Y_i = 2T and nabla_{Y_i} X_i = -2T
        out.c += 2.0 * (dir.a[i] * w.b[i] - dir.b[i] * w.a[i]);
        // nabla_{X_i} T = -2 Y_i and nabla_{Y_i} T = 2 X_i
        out.b[i] += -2.0 * dir.a[i] * w.c;
        out.a[i] += 2.0 * dir.b[i] * w.c;
        // nabla_T X_i = -2 Y_i and nabla_T Y_i = 2 X_i
        out.b[i] += -2.0 * dir.c * w.a[i];
        out.a[i] += 2.0 * dir.c * w.b[i];
    }
    Ok(out)
}

/// Lie bracket of two coefficient-constant fields, nabla_v w - nabla_w v.
pub fn constant_field_bracket(v: &AmbientVector, w: &AmbientVector) -> Result<AmbientVector> {
    let n = v.dim();
    let fw = FieldJet { value: w.clone(), coeff_derivative: AmbientVector::zero(n) };
    let fv = FieldJet { value: v.clone(), coeff_derivative: AmbientVector::zero(n) };
    Ok(covariant_derivative(&fw, v)?.sub(&covariant_derivative(&fv, w)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn group_mul_twists_t() {
        // (1,0,0).(0,1,0) = (1,1,2) in H^1
        let p = Point::new(vec![1.0], vec![0.0], 0.0);
        let q = Point::new(vec![0.0], vec![1.0], 0.0);
        let r = group_mul(&p, &q).unwrap();
        assert_eq!(r, Point::new(vec![1.0], vec![1.0], 2.0));
        // reversed order flips the sign of the twist
        let r = group_mul(&q, &p).unwrap();
        assert_eq!(r, Point::new(vec![1.0], vec![1.0], -2.0));
    }

    #[test]
    fn group_mul_rejects_mixed_dims() {
        let p = Point::origin(1);
        let q = Point::origin(2);
        assert!(matches!(
            group_mul(&p, &q),
            Err(Error::DimensionMismatch { expected: 1, actual: 2 })
        ));
    }

    #[test]
    fn gauge_norm_values() {
        assert_close(gauge_norm(&Point::new(vec![0.0], vec![0.0], 4.0)), 2.0, 1e-15);
        assert_close(gauge_norm(&Point::new(vec![1.0], vec![0.0], 0.0)), 1.0, 1e-15);
        assert_close(gauge_norm(&Point::origin(3)), 0.0, 0.0);
    }

    #[test]
    fn dilate_requires_positive_factor() {
        let p = Point::origin(1);
        assert!(matches!(dilate(0.0, &p), Err(Error::NonPositiveDilation(_))));
        assert!(matches!(dilate(-1.0, &p), Err(Error::NonPositiveDilation(_))));
    }

    #[test]
    fn j_squares_to_minus_one() {
        let z = HorizontalVector::new(vec![1.0, 2.0], vec![-0.5, 3.0]);
        let jj = j_apply(&j_apply(&z));
        assert_eq!(jj, z.scale(-1.0));
    }

    #[test]
    fn connection_table_entries() {
        let n = 2;
        // nabla_{X_1} Y_1 = 2T
        let x1 = AmbientVector::frame_basis(n, 0);
        let y1 = AmbientVector::frame_basis(n, n);
        let jet = FieldJet { value: y1.clone(), coeff_derivative: AmbientVector::zero(n) };
        let d = covariant_derivative(&jet, &x1).unwrap();
        assert_eq!(d, AmbientVector::new(vec![0.0, 0.0], vec![0.0, 0.0], 2.0));
        // nabla_{X_1} Y_2 = 0
        let y2 = AmbientVector::frame_basis(n, n + 1);
        let jet = FieldJet { value: y2, coeff_derivative: AmbientVector::zero(n) };
        assert_eq!(covariant_derivative(&jet, &x1).unwrap(), AmbientVector::zero(n));
        // nabla_{Y_1} T = 2 X_1
        let t = AmbientVector::frame_basis(n, 2 * n);
        let jet = FieldJet { value: t.clone(), coeff_derivative: AmbientVector::zero(n) };
        let d = covariant_derivative(&jet, &y1).unwrap();
        assert_eq!(d, x1.scale(2.0));
        // nabla_T X_1 = -2 Y_1
        let jet = FieldJet { value: x1, coeff_derivative: AmbientVector::zero(n) };
        let d = covariant_derivative(&jet, &t).unwrap();
        assert_eq!(d, y1.scale(-2.0));
        // nabla_T T = 0
        let jet = FieldJet { value: t.clone(), coeff_derivative: AmbientVector::zero(n) };
        assert_eq!(covariant_derivative(&jet, &t).unwrap(), AmbientVector::zero(n));
    }

    #[test]
    fn position_field_covariant_derivative() {
        // nabla_Z xi_H = Z + 2 <J(Z), xi_H> T for horizontal Z
        let p = Point::new(vec![0.3, -1.2], vec![0.7, 0.4], 2.0);
        let z = HorizontalVector::new(vec![1.0, 0.5], vec![-0.25, 2.0]);
        let xi = horizontal_position(&p);
        // coefficients of xi_H are the coordinate functions, so their frame
        // derivatives along Z are the coefficients of Z itself
        let jet = FieldJet { value: xi.to_ambient(), coeff_derivative: z.to_ambient() };
        let d = covariant_derivative(&jet, &z.to_ambient()).unwrap();
        let expected_c = 2.0 * j_apply(&z).dot(&xi);
        assert_close(d.c, expected_c, 1e-14);
        assert_eq!(d.horizontal_part(), z);
    }

    fn small_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, n)
    }

    fn point_strategy(n: usize) -> impl Strategy<Value = Point> {
        (small_vec(n), small_vec(n), -50.0f64..50.0).prop_map(|(x, y, t)| Point::new(x, y, t))
    }

    fn horizontal_strategy(n: usize) -> impl Strategy<Value = HorizontalVector> {
        (small_vec(n), small_vec(n)).prop_map(|(a, b)| HorizontalVector::new(a, b))
    }

    proptest! {
        #[test]
        fn group_axioms(n in 1usize..4, seeds in prop::collection::vec(0u64..u64::MAX, 3)) {
            // build three deterministic points from the seeds
            let mk = |s: u64| {
                let mut v = s;
                let mut next = || {
                    v = v.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((v >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
                };
                let x: Vec<f64> = (0..n).map(|_| next()).collect();
                let y: Vec<f64> = (0..n).map(|_| next()).collect();
                let t = next();
                Point::new(x, y, t)
            };
            let (p, q, r) = (mk(seeds[0]), mk(seeds[1]), mk(seeds[2]));
            // associativity
            let lhs = group_mul(&group_mul(&p, &q).unwrap(), &r).unwrap();
            let rhs = group_mul(&p, &group_mul(&q, &r).unwrap()).unwrap();
            for (a, b) in lhs.to_coords().iter().zip(rhs.to_coords()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
            // identity and inverse are exact
            let e = Point::origin(n);
            prop_assert_eq!(group_mul(&p, &e).unwrap(), p.clone());
            prop_assert_eq!(group_mul(&e, &p).unwrap(), p.clone());
            prop_assert_eq!(group_mul(&p, &group_inv(&p)).unwrap(), e);
        }

        #[test]
        fn gauge_norm_is_homogeneous(p in point_strategy(2), r in 0.01f64..100.0) {
            let lhs = gauge_norm(&dilate(r, &p).unwrap());
            let rhs = r * gauge_norm(&p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn j_relations(v in horizontal_strategy(3), w in horizontal_strategy(3)) {
            // <J(v), w> = -<v, J(w)> and |J(v)| = |v|
            let lhs = j_apply(&v).dot(&w);
            let rhs = -v.dot(&j_apply(&w));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            prop_assert!((j_apply(&v).norm() - v.norm()).abs() <= 1e-12 * (1.0 + v.norm()));
        }

        #[test]
        fn bracket_pairs_with_t(v in horizontal_strategy(2), w in horizontal_strategy(2)) {
            // <[V, W], T> = 4 <J(V), W> for coefficient-constant fields
            let br = constant_field_bracket(&v.to_ambient(), &w.to_ambient()).unwrap();
            let expected = 4.0 * j_apply(&v).dot(&w);
            prop_assert!((br.c - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }

        #[test]
        fn t_derivative_identity(p in point_strategy(3), z in horizontal_strategy(3)) {
            // Z(t) = -2 <J(Z), xi_H>
            let lhs = frame_derivative_of_t(&p, &z);
            let rhs = -2.0 * j_apply(&z).dot(&horizontal_position(&p));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
