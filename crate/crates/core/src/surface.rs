//! Hypersurfaces in H^n described by a defining function f, their horizontal
//! normal frame, horizontal mean curvature and shape operator, and pointwise
//! identity checks.
//!
//! Conventions.  nu = grad f / |grad f| in the orthonormal frame (after the
//! orientation sign is folded into f).  On the regular part |P_H nu| > 0 and
//!
//!   nu_h  = P_H nu / |P_H nu|,        eta   = -J(nu_h),
//!   tau   = <nu,T> nu_h - |P_H nu| T, alpha = 2 <nu,T> / |P_H nu|,
//!
//! and the horizontal tangent space of the surface is spanned by the
//! orthonormal set {eta, V_1, W_1 = J(V_1), ..., V_{n-1}, W_{n-1}}.

use crate::cylindrical::{self, Profile};
use crate::error::{Error, Result};
use crate::heisenberg::{
    self as heis, check_dimension, AmbientVector, FieldJet, HorizontalVector, Point,
};
use crate::numeric;
use nalgebra::DMatrix;

/// Characteristic-point tolerance on |P_H nu| (gradient-relative by
/// construction, since nu is a unit vector).
pub const DEFAULT_CHAR_TOL: f64 = 1e-7;

/// On-level tolerance on |f|, scaled by (1 + |grad f|).
pub const DEFAULT_LEVEL_TOL: f64 = 1e-9;

/// Minimum residual norm for accepting a coordinate direction during
/// horizontal tangent basis completion.
const BASIS_ACCEPT_TOL: f64 = 1e-6;

/// Required relative agreement between the two divergence routes for the
/// mean curvature.
const CURVATURE_ROUTE_TOL: f64 = 1e-9;

/// Gradient norms below this are treated as degenerate.
const DEGENERATE_GRAD_TOL: f64 = 1e-14;

/// Umbilic-residual gate for identity checks that assume the umbilic shape.
const UMBILIC_GATE: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Defining functions
// ---------------------------------------------------------------------------

/// A polynomial in the coordinates (x_1..x_n, y_1..y_n, t) with exact
/// derivatives of every order.
#[derive(Debug, Clone)]
pub struct CoordinatePolynomial {
    n: usize,
    /// (coefficient, exponent per flat coordinate), exponents have length 2n+1.
    terms: Vec<(f64, Vec<u32>)>,
}

impl CoordinatePolynomial {
    pub fn new(n: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        check_dimension(n)?;
        for (c, pows) in &terms {
            if pows.len() != 2 * n + 1 {
                return Err(Error::InvalidSpec(format!(
                    "polynomial term has {} exponents, expected {}",
                    pows.len(),
                    2 * n + 1
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidSpec("polynomial coefficient must be finite".into()));
            }
        }
        Ok(CoordinatePolynomial { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn euclidean_jet(&self, coords: &[f64]) -> EuclideanJet {
        let dim = 2 * self.n + 1;
        let mut jet = EuclideanJet::zero(dim);
        // per-coordinate factor values and derivatives, combined by the
        // product rule
        let mut f0 = vec![0.0; dim];
        let mut f1 = vec![0.0; dim];
        let mut f2 = vec![0.0; dim];
        for (coeff, pows) in &self.terms {
            for i in 0..dim {
                let (v, p) = (coords[i], pows[i]);
                f0[i] = monomial(v, p);
                f1[i] = if p >= 1 { p as f64 * monomial(v, p - 1) } else { 0.0 };
                f2[i] = if p >= 2 { (p * (p - 1)) as f64 * monomial(v, p - 2) } else { 0.0 };
            }
            let all: f64 = f0.iter().product();
            jet.value += coeff * all;
            for i in 0..dim {
                let rest_i: f64 = (0..dim).filter(|&j| j != i).map(|j| f0[j]).product();
                jet.grad[i] += coeff * f1[i] * rest_i;
                jet.hess[(i, i)] += coeff * f2[i] * rest_i;
                for j in (i + 1)..dim {
                    let rest_ij: f64 =
                        (0..dim).filter(|&m| m != i && m != j).map(|m| f0[m]).product();
                    let mixed = coeff * f1[i] * f1[j] * rest_ij;
                    jet.hess[(i, j)] += mixed;
                    jet.hess[(j, i)] += mixed;
                }
            }
        }
        jet
    }
}

fn monomial(v: f64, p: u32) -> f64 {
    // 0^0 = 1 by the usual polynomial convention
    if p == 0 {
        1.0
    } else {
        v.powi(p as i32)
    }
}

/// The supported defining-function families.
#[derive(Debug, Clone)]
pub enum SurfaceKind {
    /// f = (|x|^2+|y|^2)^2 + (t - t0)^2 - R^4, the gauge ball of radius R
    /// centered at (0, 0, t0).
    GaugeBall { radius: f64, t0: f64 },
    /// f = v(|x|^2 + |y|^2, t) for a profile v.
    CylindricalProfile(Profile),
    /// An arbitrary coordinate polynomial.
    CustomPolynomial(CoordinatePolynomial),
}

/// A defining-function surface spec: the zero level set of f with the normal
/// pointing along orientation_sign * grad f.
#[derive(Debug, Clone)]
pub struct DefiningFunctionSpec {
    n: usize,
    orientation_sign: f64,
    kind: SurfaceKind,
    anchor: Option<Point>,
}

impl DefiningFunctionSpec {
    /// Gauge ball of radius R centered at (0,0,t0); f < 0 inside, so the
    /// default orientation points outward.
    pub fn gauge_ball(n: usize, radius: f64, t0: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(radius > 0.0) || !radius.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "gauge ball needs finite R > 0, got R = {radius}"
            )));
        }
        Ok(DefiningFunctionSpec {
            n,
            orientation_sign: 1.0,
            kind: SurfaceKind::GaugeBall { radius, t0 },
            anchor: Some(Point::new(vec![0.0; n], vec![0.0; n], t0)),
        })
    }

    /// Surface of revolution around the t-axis with profile v(u, t),
    /// u = |x|^2 + |y|^2.
    pub fn cylindrical(n: usize, profile: Profile) -> Result<Self> {
        check_dimension(n)?;
        let anchor = profile.interior_t().map(|t| Point::new(vec![0.0; n], vec![0.0; n], t));
        Ok(DefiningFunctionSpec {
            n,
            orientation_sign: 1.0,
            kind: SurfaceKind::CylindricalProfile(profile),
            anchor,
        })
    }

    /// Zero set of an arbitrary coordinate polynomial.
    pub fn polynomial(poly: CoordinatePolynomial) -> Result<Self> {
        let n = poly.n();
        Ok(DefiningFunctionSpec {
            n,
            orientation_sign: 1.0,
            kind: SurfaceKind::CustomPolynomial(poly),
            anchor: None,
        })
    }

    /// Replaces the orientation sign (+1 keeps grad f, -1 flips it).
    pub fn oriented(mut self, sign: f64) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidSpec(format!(
                "orientation sign must be +1 or -1, got {sign}"
            )));
        }
        self.orientation_sign = sign;
        Ok(self)
    }

    /// Declares a point with f < 0, used as the ray origin when sampling.
    pub fn with_anchor(mut self, anchor: Point) -> Result<Self> {
        if anchor.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: anchor.dim() });
        }
        self.anchor = Some(anchor);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn orientation_sign(&self) -> f64 {
        self.orientation_sign
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn interior_anchor(&self) -> Option<&Point> {
        self.anchor.as_ref()
    }
}

// ---------------------------------------------------------------------------
// Jets
// ---------------------------------------------------------------------------

/// Value, gradient and Hessian with respect to the coordinates.
pub(crate) struct EuclideanJet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
}

impl EuclideanJet {
    pub fn zero(dim: usize) -> Self {
        EuclideanJet { value: 0.0, grad: vec![0.0; dim], hess: DMatrix::zeros(dim, dim) }
    }

    fn scale(&mut self, s: f64) {
        self.value *= s;
        for g in self.grad.iter_mut() {
            *g *= s;
        }
        self.hess.scale_mut(s);
    }
}

/// Order-2 frame jet of the defining function at a point: f, E_k f and
/// E_m(E_k f) for the frame fields E_0..E_{2n} (X_1..X_n, Y_1..Y_n, T).
#[derive(Debug, Clone)]
pub struct SurfaceJet {
    pub base: Point,
    pub value: f64,
    pub frame_grad: AmbientVector,
    /// Entry (m, k) holds E_m(E_k f); not symmetric, the frame does not
    /// commute.
    pub frame_hess: DMatrix<f64>,
}

impl SurfaceJet {
    pub fn n(&self) -> usize {
        self.base.dim()
    }

    /// On-level tolerance for this jet.
    pub fn level_tol(&self) -> f64 {
        DEFAULT_LEVEL_TOL * (1.0 + self.frame_grad.norm())
    }
}

/// Converts a coordinate jet at p to the frame jet.  With g = grad f,
/// H = hess f in coordinates (indices x_j -> j, y_j -> n+j, t -> 2n):
///
///   X_j f = g_xj - 2 y_j g_t,  Y_j f = g_yj + 2 x_j g_t,  T f = g_t,
///
/// and the second-order table follows by applying the frame fields to these
/// (producing the extra delta and curvature-of-frame terms below).
pub(crate) fn frame_jet_from_euclidean(p: &Point, mut e: EuclideanJet, sign: f64) -> SurfaceJet {
    let n = p.dim();
    let ti = 2 * n; // flat index of t
    e.scale(sign);
    let g = &e.grad;
    let h = &e.hess;
    let (x, y) = (&p.x, &p.y);

    let mut grad = AmbientVector::zero(n);
    for j in 0..n {
        grad.a[j] = g[j] - 2.0 * y[j] * g[ti];
        grad.b[j] = g[n + j] + 2.0 * x[j] * g[ti];
    }
    grad.c = g[ti];

    let mut fh = DMatrix::zeros(2 * n + 1, 2 * n + 1);
    let ft = g[ti];
    let ftt = h[(ti, ti)];
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { 1.0 } else { 0.0 };
            // X_i(X_j f)
            fh[(i, j)] = h[(i, j)] - 2.0 * y[j] * h[(i, ti)] - 2.0 * y[i] * h[(j, ti)]
                + 4.0 * y[i] * y[j] * ftt;
            // X_i(Y_j f)
            fh[(i, n + j)] = h[(i, n + j)] + 2.0 * d * ft + 2.0 * x[j] * h[(i, ti)]
                - 2.0 * y[i] * h[(n + j, ti)]
                - 4.0 * y[i] * x[j] * ftt;
            // Y_i(X_j f)
            fh[(n + i, j)] = h[(n + i, j)] - 2.0 * d * ft - 2.0 * y[j] * h[(n + i, ti)]
                + 2.0 * x[i] * h[(j, ti)]
                - 4.0 * x[i] * y[j] * ftt;
            // Y_i(Y_j f)
            fh[(n + i, n + j)] = h[(n + i, n + j)]
                + 2.0 * x[j] * h[(n + i, ti)]
                + 2.0 * x[i] * h[(n + j, ti)]
                + 4.0 * x[i] * x[j] * ftt;
        }
        // X_i(T f) and Y_i(T f)
        fh[(i, ti)] = h[(i, ti)] - 2.0 * y[i] * ftt;
        fh[(n + i, ti)] = h[(n + i, ti)] + 2.0 * x[i] * ftt;
        // T(X_j f) and T(Y_j f)
        fh[(ti, i)] = h[(i, ti)] - 2.0 * y[i] * ftt;
        fh[(ti, n + i)] = h[(n + i, ti)] + 2.0 * x[i] * ftt;
    }
    fh[(ti, ti)] = ftt;

    SurfaceJet { base: p.clone(), value: e.value, frame_grad: grad, frame_hess: fh }
}

/// Exact order-2 frame jet of the defining function at p.
pub fn evaluate_jet(spec: &DefiningFunctionSpec, p: &Point) -> Result<SurfaceJet> {
    if p.dim() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, actual: p.dim() });
    }
    let e = match &spec.kind {
        SurfaceKind::GaugeBall { radius, t0 } => gauge_ball_euclidean_jet(p, *radius, *t0),
        SurfaceKind::CylindricalProfile(profile) => cylindrical::profile_euclidean_jet(profile, p),
        SurfaceKind::CustomPolynomial(poly) => poly.euclidean_jet(&p.to_coords()),
    };
    Ok(frame_jet_from_euclidean(p, e, spec.orientation_sign))
}

fn gauge_ball_euclidean_jet(p: &Point, radius: f64, t0: f64) -> EuclideanJet {
    let n = p.dim();
    let dim = 2 * n + 1;
    let ti = 2 * n;
    let u = p.radial_sq();
    let w = p.t - t0;
    let mut e = EuclideanJet::zero(dim);
    e.value = u * u + w * w - radius.powi(4);
    let z = |j: usize| if j < n { p.x[j] } else { p.y[j - n] };
    for j in 0..2 * n {
        e.grad[j] = 4.0 * u * z(j);
    }
    e.grad[ti] = 2.0 * w;
    for i in 0..2 * n {
        for j in 0..2 * n {
            e.hess[(i, j)] = 8.0 * z(i) * z(j) + if i == j { 4.0 * u } else { 0.0 };
        }
    }
    e.hess[(ti, ti)] = 2.0;
    e
}

// ---------------------------------------------------------------------------
// Point classification and the surface frame
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Regular,
    Characteristic,
    OffSurface,
}

/// Classifies p against the zero level set: off-surface when |f| exceeds the
/// level tolerance, characteristic when the horizontal share of the gradient
/// falls below `char_tol` (relative to |grad f|), regular otherwise.
pub fn classify_point(jet: &SurfaceJet, char_tol: f64) -> PointClass {
    if jet.value.abs() > jet.level_tol() {
        return PointClass::OffSurface;
    }
    let gn = jet.frame_grad.norm();
    if gn < DEGENERATE_GRAD_TOL {
        return PointClass::Characteristic;
    }
    let ph = jet.frame_grad.horizontal_part().norm();
    if ph <= char_tol * gn {
        PointClass::Characteristic
    } else {
        PointClass::Regular
    }
}

/// The normal-adapted frame at a regular point.
#[derive(Debug, Clone)]
pub struct SurfaceFrame {
    /// Unit normal in the orthonormal frame.
    pub nu: AmbientVector,
    /// |P_H nu|.
    pub p_h_norm: f64,
    /// <nu, T>.
    pub nu_t: f64,
    /// Unit horizontal normal.
    pub nu_h: HorizontalVector,
    /// eta = -J(nu_h), the distinguished horizontal tangent direction.
    pub eta: HorizontalVector,
    /// tau = <nu,T> nu_h - |P_H nu| T, the unit tangent completing nu.
    pub tau: AmbientVector,
    /// alpha = 2 <nu,T> / |P_H nu|.
    pub alpha: f64,
    /// Orthonormal pairs (V_i, W_i = J(V_i)) spanning the rest of the
    /// horizontal tangent space; n-1 pairs.
    pub basis: Vec<(HorizontalVector, HorizontalVector)>,
    /// Indices of the coordinate directions accepted during completion;
    /// reusing them at displaced points keeps the basis fields smooth.
    pub completion: Vec<usize>,
}

impl SurfaceFrame {
    /// The ordered horizontal tangent basis {eta, V_1, W_1, ...}.
    pub fn tangent_basis(&self) -> Vec<HorizontalVector> {
        let mut list = Vec::with_capacity(2 * self.nu_h.dim() - 1);
        list.push(self.eta.clone());
        for (v, w) in &self.basis {
            list.push(v.clone());
            list.push(w.clone());
        }
        list
    }
}

/// Builds the frame at a regular point, completing the basis greedily from
/// the coordinate horizontal directions X_1..X_n, Y_1..Y_n.
pub fn surface_frame(jet: &SurfaceJet, char_tol: f64) -> Result<SurfaceFrame> {
    build_frame(jet, char_tol, None)
}

/// Builds the frame reusing a previously recorded completion plan, so that
/// the resulting basis varies smoothly near the plan's origin.
pub fn surface_frame_planned(
    jet: &SurfaceJet,
    char_tol: f64,
    plan: &[usize],
) -> Result<SurfaceFrame> {
    build_frame(jet, char_tol, Some(plan))
}

fn build_frame(jet: &SurfaceJet, char_tol: f64, plan: Option<&[usize]>) -> Result<SurfaceFrame> {
    let n = jet.n();
    let gn = jet.frame_grad.norm();
    if gn < DEGENERATE_GRAD_TOL {
        return Err(Error::DegenerateGradient(gn));
    }
    let nu = jet.frame_grad.scale(1.0 / gn);
    let ph = nu.horizontal_part();
    let p_h_norm = ph.norm();
    if p_h_norm <= char_tol {
        return Err(Error::CharacteristicPoint { p_h_norm, tol: char_tol });
    }
    let nu_t = nu.c;
    let nu_h = ph.scale(1.0 / p_h_norm);
    let eta = heis::j_apply(&nu_h).scale(-1.0);
    let tau = AmbientVector {
        a: nu_h.a.iter().map(|v| v * nu_t).collect(),
        b: nu_h.b.iter().map(|v| v * nu_t).collect(),
        c: -p_h_norm,
    };
    let alpha = 2.0 * nu_t / p_h_norm;

    let mut fixed: Vec<HorizontalVector> = vec![nu_h.clone(), eta.clone()];
    let mut basis = Vec::with_capacity(n - 1);
    let mut completion = Vec::with_capacity(n - 1);
    let mut next_candidate = 0usize;
    for pair in 0..n - 1 {
        let accepted = if let Some(plan) = plan {
            let idx = *plan.get(pair).ok_or(Error::BasisCompletion(pair))?;
            orthonormal_residual(candidate(n, idx), &fixed)
                .filter(|(_, res)| *res > 0.25 * BASIS_ACCEPT_TOL)
                .map(|(v, _)| (idx, v))
        } else {
            let mut found = None;
            while next_candidate < 2 * n {
                let idx = next_candidate;
                next_candidate += 1;
                if let Some((v, res)) = orthonormal_residual(candidate(n, idx), &fixed) {
                    if res > BASIS_ACCEPT_TOL {
                        found = Some((idx, v));
                        break;
                    }
                }
            }
            found
        };
        let (idx, v) = accepted.ok_or(Error::BasisCompletion(pair))?;
        let w = heis::j_apply(&v);
        fixed.push(v.clone());
        fixed.push(w.clone());
        basis.push((v, w));
        completion.push(idx);
    }

    Ok(SurfaceFrame { nu, p_h_norm, nu_t, nu_h, eta, tau, alpha, basis, completion })
}

fn candidate(n: usize, idx: usize) -> HorizontalVector {
    let mut v = HorizontalVector::zero(n);
    if idx < n {
        v.a[idx] = 1.0;
    } else {
        v.b[idx - n] = 1.0;
    }
    v
}

/// Two-pass Gram-Schmidt of `v` against an orthonormal family; returns the
/// normalized residual and its norm before normalization.
fn orthonormal_residual(
    mut v: HorizontalVector,
    family: &[HorizontalVector],
) -> Option<(HorizontalVector, f64)> {
    for _ in 0..2 {
        for u in family {
            let proj = v.dot(u);
            v = v.sub(&u.scale(proj));
        }
    }
    let res = v.norm();
    if res > 0.0 {
        Some((v.scale(1.0 / res), res))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// The horizontal normal as a differentiable field
// ---------------------------------------------------------------------------

/// First-order data of the field nu_h = P_H grad f / |P_H grad f| extracted
/// from a single order-2 jet.
struct NuHField<'a> {
    jet: &'a SurfaceJet,
    /// Horizontal gradient coefficients g_1..g_2n.
    g: Vec<f64>,
    norm: f64,
}

impl<'a> NuHField<'a> {
    fn new(jet: &'a SurfaceJet, char_tol: f64) -> Result<Self> {
        let gn = jet.frame_grad.norm();
        if gn < DEGENERATE_GRAD_TOL {
            return Err(Error::DegenerateGradient(gn));
        }
        let n = jet.n();
        let mut g = Vec::with_capacity(2 * n);
        g.extend_from_slice(&jet.frame_grad.a);
        g.extend_from_slice(&jet.frame_grad.b);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= char_tol * gn {
            return Err(Error::CharacteristicPoint { p_h_norm: norm / gn, tol: char_tol });
        }
        Ok(NuHField { jet, g, norm })
    }

    fn n(&self) -> usize {
        self.jet.n()
    }

    /// Frame derivatives E_m(g_k / N) of the nu_h coefficients.
    fn coeff_derivatives(&self, m: usize) -> Vec<f64> {
        let n2 = 2 * self.n();
        let h = &self.jet.frame_hess;
        let dn: f64 = (0..n2).map(|k| self.g[k] * h[(m, k)]).sum::<f64>() / self.norm;
        (0..n2).map(|k| h[(m, k)] / self.norm - self.g[k] * dn / (self.norm * self.norm)).collect()
    }

    /// Covariant derivative nabla_dir nu_h as an ambient vector.
    fn covariant_derivative(&self, dir: &AmbientVector) -> Result<AmbientVector> {
        let n = self.n();
        let mut dd = vec![0.0; 2 * n];
        for m in 0..2 * n + 1 {
            let z = dir.component(m);
            if z != 0.0 {
                for (acc, d) in dd.iter_mut().zip(self.coeff_derivatives(m)) {
                    *acc += z * d;
                }
            }
        }
        let value = AmbientVector {
            a: (0..n).map(|k| self.g[k] / self.norm).collect(),
            b: (0..n).map(|k| self.g[n + k] / self.norm).collect(),
            c: 0.0,
        };
        let jet = FieldJet {
            value,
            coeff_derivative: AmbientVector { a: dd[..n].to_vec(), b: dd[n..].to_vec(), c: 0.0 },
        };
        heis::covariant_derivative(&jet, dir)
    }
}

// ---------------------------------------------------------------------------
// Curvature and shape operator
// ---------------------------------------------------------------------------

/// Horizontal mean curvature H = div_H(nu_h) / (2n-1), computed over the
/// tangent horizontal basis and cross-checked against the sum over the full
/// horizontal frame (the two differ only by <nabla_{nu_h} nu_h, nu_h> = 0).
pub fn mean_curvature(spec: &DefiningFunctionSpec, p: &Point, char_tol: f64) -> Result<f64> {
    let jet = evaluate_jet(spec, p)?;
    let frame = surface_frame(&jet, char_tol)?;
    mean_curvature_from(&jet, &frame, char_tol)
}

pub(crate) fn mean_curvature_from(
    jet: &SurfaceJet,
    frame: &SurfaceFrame,
    char_tol: f64,
) -> Result<f64> {
    let field = NuHField::new(jet, char_tol)?;
    let n = jet.n();
    let denom = (2 * n - 1) as f64;

    let mut tangent_sum = 0.0;
    for z in frame.tangent_basis() {
        let za = z.to_ambient();
        tangent_sum += field.covariant_derivative(&za)?.dot(&za);
    }
    let tangent = tangent_sum / denom;

    let mut frame_sum = 0.0;
    for m in 0..2 * n {
        let em = AmbientVector::frame_basis(n, m);
        frame_sum += field.covariant_derivative(&em)?.dot(&em);
    }
    let full = frame_sum / denom;

    if (tangent - full).abs() > CURVATURE_ROUTE_TOL * (1.0 + tangent.abs()) {
        return Err(Error::CurvatureRouteMismatch { tangent, full });
    }
    Ok(tangent)
}

/// Horizontal shape operator in the ordered basis {eta, V_1, W_1, ...}:
///
///   A(Z) = P_H(nabla_Z nu_h) - alpha (J(Z) - <eta, Z> nu_h).
///
/// Returns the (2n-1) x (2n-1) matrix with entries <b_i, A(b_j)>.
pub fn shape_operator(
    spec: &DefiningFunctionSpec,
    p: &Point,
    char_tol: f64,
) -> Result<DMatrix<f64>> {
    let jet = evaluate_jet(spec, p)?;
    let frame = surface_frame(&jet, char_tol)?;
    shape_operator_from(&jet, &frame, char_tol)
}

pub(crate) fn shape_operator_from(
    jet: &SurfaceJet,
    frame: &SurfaceFrame,
    char_tol: f64,
) -> Result<DMatrix<f64>> {
    let field = NuHField::new(jet, char_tol)?;
    let basis = frame.tangent_basis();
    let dim = basis.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (j, z) in basis.iter().enumerate() {
        let grad = field.covariant_derivative(&z.to_ambient())?.horizontal_part();
        let jz = heis::j_apply(z);
        let corr = jz.sub(&frame.nu_h.scale(frame.eta.dot(z))).scale(frame.alpha);
        let az = grad.sub(&corr);
        for (i, b) in basis.iter().enumerate() {
            m[(i, j)] = b.dot(&az);
        }
    }
    Ok(m)
}

/// Best umbilic-form approximation diag(l, k, ..., k) of a shape matrix.
#[derive(Debug, Clone, Copy)]
pub struct UmbilicFit {
    /// Transverse eigenvalue estimate; absent when the matrix is 1 x 1.
    pub k: Option<f64>,
    /// Eigenvalue along eta.
    pub l: f64,
    /// Frobenius misfit scaled by (1 + |matrix|).
    pub residual: f64,
}

pub fn umbilic_fit(matrix: &DMatrix<f64>) -> UmbilicFit {
    let dim = matrix.nrows();
    assert_eq!(dim, matrix.ncols(), "shape matrix must be square");
    assert!(dim >= 1, "shape matrix must be nonempty");
    let l = matrix[(0, 0)];
    let k = if dim > 1 {
        Some((1..dim).map(|i| matrix[(i, i)]).sum::<f64>() / (dim - 1) as f64)
    } else {
        None
    };
    let mut misfit_sq = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i != j {
                0.0
            } else if i == 0 {
                l
            } else {
                k.unwrap_or(0.0)
            };
            let d = matrix[(i, j)] - target;
            misfit_sq += d * d;
        }
    }
    let residual = misfit_sq.sqrt() / (1.0 + matrix.norm());
    UmbilicFit { k, l, residual }
}

// ---------------------------------------------------------------------------
// Invariants of the position field
// ---------------------------------------------------------------------------

/// The two scalar invariants built from the curvature and the horizontal
/// position:
///
///   phi_h = (2n-1)/(2n+1) H |xi_H|^2 - <nu_h, xi_H>
///   phi_v = (2n-1)/(2n+1) H t / |xi_H| - <eta, xi_H> / |xi_H|
///
/// phi_v is absent on the vertical axis (|xi_H| <= char_tol).
#[derive(Debug, Clone, Copy)]
pub struct DarbouxInvariants {
    pub phi_h: f64,
    pub phi_v: Option<f64>,
}

pub fn darboux_invariants(
    spec: &DefiningFunctionSpec,
    p: &Point,
    char_tol: f64,
) -> Result<DarbouxInvariants> {
    let jet = evaluate_jet(spec, p)?;
    let frame = surface_frame(&jet, char_tol)?;
    let h = mean_curvature_from(&jet, &frame, char_tol)?;
    Ok(darboux_from(&frame, p, jet.n(), h, char_tol))
}

pub(crate) fn darboux_from(
    frame: &SurfaceFrame,
    p: &Point,
    n: usize,
    h: f64,
    char_tol: f64,
) -> DarbouxInvariants {
    let gamma = (2 * n - 1) as f64 / (2 * n + 1) as f64;
    let xi = heis::horizontal_position(p);
    let r = xi.norm();
    let phi_h = gamma * h * r * r - frame.nu_h.dot(&xi);
    let phi_v =
        if r > char_tol { Some(gamma * h * p.t / r - frame.eta.dot(&xi) / r) } else { None };
    DarbouxInvariants { phi_h, phi_v }
}

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

/// Residuals of the structural identities at one regular point.  Entries are
/// `None` when the identity does not apply there (dimension, non-umbilic
/// shape, or no curvature prescription).
#[derive(Debug, Clone, Copy)]
pub struct IdentityReport {
    /// max over horizontal frame Z of |<nabla_Z nu_h, T> - 2 <eta, Z>| (exact).
    pub normal_t_pairing: f64,
    /// max(|<nabla_tau nu_h, tau>|, |<nabla_nu nu_h, nu>|) (exact).
    pub self_pairings: f64,
    /// max over tangent horizontal pairs of
    /// |<[Z1,Z2], nu_h> + 2 alpha <J(Z1), Z2>| (finite differences).
    pub bracket_normal: f64,
    /// max over pairs from {V_i, W_i} of |<[Z1,Z2], eta + (k |P_H nu| / 2) tau>|
    /// (finite differences; n >= 2, umbilic only).
    pub bracket_invariant_span: Option<f64>,
    /// max of |eta(k) - (l-2k) alpha| and |eta(alpha) - (k^2 - alpha^2 - k l)|
    /// (finite differences; n >= 2, umbilic only).
    pub codazzi: Option<f64>,
    /// max over |<nu_h, xi_H> - |xi_H|^2 k|, |<eta, xi_H> - |xi_H|^2 alpha| and
    /// |<V_j, xi_H>|, |<W_j, xi_H>| (exact; n >= 2, umbilic, H = c |xi_H| only).
    pub position_projections: Option<f64>,
    /// Umbilic misfit used for the applicability gates.
    pub umbilic_residual: f64,
}

/// Runs all applicable identity checks at p.  `c` is the proportionality
/// factor of a curvature prescription H = c |xi_H|, enabling the position
/// projection checks when it holds at p.
pub fn identity_suite(
    spec: &DefiningFunctionSpec,
    p: &Point,
    c: Option<f64>,
    fd_step: f64,
) -> Result<IdentityReport> {
    let char_tol = DEFAULT_CHAR_TOL;
    let jet = evaluate_jet(spec, p)?;
    let frame = surface_frame(&jet, char_tol)?;
    let field = NuHField::new(&jet, char_tol)?;
    let n = jet.n();

    // (exact) <nabla_Z nu_h, T> = 2 <eta, Z> over the horizontal frame
    let mut normal_t_pairing = 0.0f64;
    for m in 0..2 * n {
        let em = AmbientVector::frame_basis(n, m);
        let lhs = field.covariant_derivative(&em)?.c;
        let rhs = 2.0 * frame.eta.to_ambient().component(m);
        normal_t_pairing = normal_t_pairing.max((lhs - rhs).abs());
    }

    // (exact) <nabla_tau nu_h, tau> = 0 = <nabla_nu nu_h, nu>
    let along_tau = field.covariant_derivative(&frame.tau)?.dot(&frame.tau);
    let along_nu = field.covariant_derivative(&frame.nu)?.dot(&frame.nu);
    let self_pairings = along_tau.abs().max(along_nu.abs());

    // shape data for the gated checks
    let shape = shape_operator_from(&jet, &frame, char_tol)?;
    let fit = umbilic_fit(&shape);
    let h = mean_curvature_from(&jet, &frame, char_tol)?;
    let umbilic = fit.residual <= UMBILIC_GATE;

    // (FD) <[Z1,Z2], nu_h> = -2 alpha <J(Z1), Z2> over tangent pairs
    let basis = frame.tangent_basis();
    let mut bracket_normal = 0.0f64;
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let br = tangent_bracket(spec, p, &frame, i, j, fd_step, char_tol)?;
            let lhs = br.dot(&frame.nu_h.to_ambient());
            let rhs = -2.0 * frame.alpha * heis::j_apply(&basis[i]).dot(&basis[j]);
            bracket_normal = bracket_normal.max((lhs - rhs).abs());
        }
    }

    // (FD) brackets of {V_i, W_i} stay orthogonal to eta + (k |P_H nu| / 2) tau
    let bracket_invariant_span = if n >= 2 && umbilic {
        let k = fit.k.expect("n >= 2 yields a k estimate");
        let probe = frame.eta.to_ambient().add(&frame.tau.scale(0.5 * k * frame.p_h_norm));
        let mut worst = 0.0f64;
        for i in 1..basis.len() {
            for j in i..basis.len() {
                let br = tangent_bracket(spec, p, &frame, i, j, fd_step, char_tol)?;
                worst = worst.max(br.dot(&probe).abs());
            }
        }
        Some(worst)
    } else {
        None
    };

    // (FD) Codazzi pair: eta(k) = (l - 2k) alpha, eta(alpha) = k^2 - alpha^2 - k l
    let codazzi = if n >= 2 && umbilic {
        let k = fit.k.expect("n >= 2 yields a k estimate");
        let l = fit.l;
        let eta_dir = frame.eta.to_ambient();
        let plan = frame.completion.clone();
        let d_k = numeric::central_diff_richardson(
            |s| {
                let q = heis::displace(p, &eta_dir, s);
                let jq = evaluate_jet(spec, &q)?;
                let fq = surface_frame_planned(&jq, char_tol, &plan)?;
                let sq = shape_operator_from(&jq, &fq, char_tol)?;
                Ok(umbilic_fit(&sq).k.expect("n >= 2"))
            },
            fd_step,
        )?;
        let d_alpha = numeric::central_diff_richardson(
            |s| {
                let q = heis::displace(p, &eta_dir, s);
                let jq = evaluate_jet(spec, &q)?;
                Ok(surface_frame_planned(&jq, char_tol, &plan)?.alpha)
            },
            fd_step,
        )?;
        let r1 = (d_k - (l - 2.0 * k) * frame.alpha).abs();
        let r2 = (d_alpha - (k * k - frame.alpha * frame.alpha - k * l)).abs();
        Some(r1.max(r2))
    } else {
        None
    };

    // (exact) projections of the position field under a curvature prescription
    let position_projections = match c {
        Some(c) if n >= 2 && umbilic => {
            let xi = heis::horizontal_position(p);
            let r = xi.norm();
            if (h - c * r).abs() <= 1e-6 * (1.0 + h.abs()) {
                let k = fit.k.expect("n >= 2 yields a k estimate");
                let mut worst = (frame.nu_h.dot(&xi) - r * r * k).abs();
                worst = worst.max((frame.eta.dot(&xi) - r * r * frame.alpha).abs());
                for (v, w) in &frame.basis {
                    worst = worst.max(v.dot(&xi).abs()).max(w.dot(&xi).abs());
                }
                Some(worst)
            } else {
                None
            }
        }
        _ => None,
    };

    Ok(IdentityReport {
        normal_t_pairing,
        self_pairings,
        bracket_normal,
        bracket_invariant_span,
        codazzi,
        position_projections,
        umbilic_residual: fit.residual,
    })
}

/// Lie bracket [Z_i, Z_j] of two tangent-basis fields at p, via Richardson-
/// refined central differences of their coefficients along straight
/// coordinate displacements.
fn tangent_bracket(
    spec: &DefiningFunctionSpec,
    p: &Point,
    frame: &SurfaceFrame,
    i: usize,
    j: usize,
    fd_step: f64,
    char_tol: f64,
) -> Result<AmbientVector> {
    let n = spec.n();
    let basis = frame.tangent_basis();
    let plan = &frame.completion;
    let field_at = |q: &Point, which: usize| -> Result<HorizontalVector> {
        let jq = evaluate_jet(spec, q)?;
        let fq = surface_frame_planned(&jq, char_tol, plan)?;
        Ok(fq.tangent_basis().swap_remove(which))
    };
    let derivative_along = |dir: &HorizontalVector, which: usize| -> Result<AmbientVector> {
        let da = dir.to_ambient();
        let mut dd = vec![0.0; 2 * n];
        for (comp, slot) in dd.iter_mut().enumerate() {
            *slot = numeric::central_diff_richardson(
                |s| {
                    let q = heis::displace(p, &da, s);
                    Ok(field_at(&q, which)?.to_ambient().component(comp))
                },
                fd_step,
            )?;
        }
        Ok(AmbientVector { a: dd[..n].to_vec(), b: dd[n..].to_vec(), c: 0.0 })
    };
    let di_of_j = derivative_along(&basis[i], j)?;
    let dj_of_i = derivative_along(&basis[j], i)?;
    let jet_j = FieldJet { value: basis[j].to_ambient(), coeff_derivative: di_of_j };
    let jet_i = FieldJet { value: basis[i].to_ambient(), coeff_derivative: dj_of_i };
    let forward = heis::covariant_derivative(&jet_j, &basis[i].to_ambient())?;
    let backward = heis::covariant_derivative(&jet_i, &basis[j].to_ambient())?;
    Ok(forward.sub(&backward))
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Deterministic surface sampling: for each index, a seeded ray from the
/// interior anchor is bisected to |f| < 1e-12.  Rays landing in the
/// characteristic band are redrawn from the same per-index stream, so results
/// do not depend on evaluation order.
pub fn sample_points(spec: &DefiningFunctionSpec, count: usize, seed: u64) -> Result<Vec<Point>> {
    (0..count).map(|i| sample_one(spec, seed, i as u64)).collect()
}

/// Samples the point of index `i` of the stream for `seed`.
pub fn sample_one(spec: &DefiningFunctionSpec, seed: u64, index: u64) -> Result<Point> {
    let anchor = spec.interior_anchor().ok_or(Error::NoInteriorAnchor)?;
    let n = spec.n();
    let value_at = |q: &Point| -> Result<f64> { Ok(evaluate_jet(spec, q)?.value) };
    if !(value_at(anchor)? < 0.0) {
        return Err(Error::SamplingFailure("anchor is not interior (f >= 0)".into()));
    }
    let anchor_coords = anchor.to_coords();
    let mut rng = numeric::derive_rng(seed, index);
    for _attempt in 0..64 {
        let dir = numeric::unit_vector(&mut rng, 2 * n + 1);
        let at = |s: f64| -> Point {
            let coords: Vec<f64> = anchor_coords.iter().zip(&dir).map(|(a, d)| a + s * d).collect();
            Point::from_coords(n, &coords)
        };
        // expand until the ray exits the body
        let mut hi = 1.0;
        let mut expansions = 0;
        let mut exit_value = value_at(&at(hi))?;
        while exit_value <= 0.0 {
            hi *= 2.0;
            expansions += 1;
            if expansions > 60 {
                return Err(Error::SamplingFailure("ray never exits the body".into()));
            }
            exit_value = value_at(&at(hi))?;
        }
        let mut lo = 0.0;
        let mut s_hit = None;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = value_at(&at(mid))?;
            if fm.abs() < 1e-12 {
                s_hit = Some(mid);
                break;
            }
            if fm < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let Some(s) = s_hit else {
            return Err(Error::SamplingFailure("bisection did not reach |f| < 1e-12".into()));
        };
        let q = at(s);
        let jet = evaluate_jet(spec, &q)?;
        // keep a safety factor above the characteristic tolerance so that
        // downstream frame construction cannot fail on returned samples
        if classify_point(&jet, 10.0 * DEFAULT_CHAR_TOL) == PointClass::Regular {
            return Ok(q);
        }
    }
    Err(Error::SamplingFailure(format!(
        "no regular sample after 64 ray draws (seed {seed}, index {index})"
    )))
}
