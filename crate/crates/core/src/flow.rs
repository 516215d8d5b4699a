//! Integral curves of the eta direction.
//!
//! On a surface with curvature prescription H = c |xi_H| the eta-curves
//! reduce, in the coordinates r = |xi_H|, cos(theta) = <nu_h, xi_H>/r,
//! sin(theta) = <eta, xi_H>/r, to the closed planar system
//!
//!   gamma r^{2n+1} - r^{2n-1} cos(theta) = phi0            (conserved)
//!   theta' = (2n-1) (r cos(theta) - c r^3) / r^2
//!   t'     = -2 r cos(theta)
//!
//! with gamma = (2n-1)c/(2n+1).  This module integrates both the reduced
//! system and the full ambient flow on a defining-function surface, and
//! evaluates the two quadrature routes for the per-cycle and pole-to-pole
//! t-drops.

use crate::error::{Error, Result};
use crate::heisenberg::{check_dimension, coordinate_velocity, horizontal_position, Point};
use crate::numeric::{dp_trial_step, integrate_adaptive, newton_bracketed, AdaptiveRk, OdeOptions};
use crate::surface::{
    classify_point, darboux_from, evaluate_jet, mean_curvature_from, surface_frame,
    DefiningFunctionSpec, PointClass, DEFAULT_CHAR_TOL,
};
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

fn gamma(n: usize, c: f64) -> f64 {
    (2 * n - 1) as f64 * c / (2 * n + 1) as f64
}

fn check_flow_params(n: usize, c: f64) -> Result<()> {
    check_dimension(n)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::NonPositiveCurvatureFactor(c));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The conservation-law radius
// ---------------------------------------------------------------------------

/// Solves gamma r^{2n+1} - r^{2n-1} cos_theta = phi0 for the positive radius.
///
/// phi0 = 0 admits the closed form r = sqrt(cos_theta / gamma) (cos_theta > 0
/// required).  phi0 > 0 has exactly one positive root.  phi0 < 0 has zero or
/// two positive roots separated by r* = sqrt(cos_theta / c); `r_prev` selects
/// the branch by side, and its absence is an error when both roots exist.
pub fn reduced_radius(
    n: usize,
    c: f64,
    phi0: f64,
    cos_theta: f64,
    r_prev: Option<f64>,
) -> Result<f64> {
    check_flow_params(n, c)?;
    let gam = gamma(n, c);
    if phi0 == 0.0 {
        if cos_theta <= 0.0 {
            return Err(Error::NoRoot { cos_theta, phi0 });
        }
        return Ok((cos_theta / gam).sqrt());
    }
    let p1 = (2 * n + 1) as i32;
    let p2 = (2 * n - 1) as i32;
    let g = |r: f64| gam * r.powi(p1) - cos_theta * r.powi(p2) - phi0;
    let dg = |r: f64| p1 as f64 * gam * r.powi(p1 - 1) - p2 as f64 * cos_theta * r.powi(p2 - 1);
    let solve = |lo: f64, hi: f64, x0: f64| -> Result<f64> {
        let scale = gam * hi.powi(p1) + cos_theta.abs() * hi.powi(p2) + phi0.abs();
        newton_bracketed(|r| (g(r), dg(r)), lo, hi, x0, 1e-15 * scale, 1e-15 * (1.0 + hi), 200)
    };
    if phi0 > 0.0 {
        // g(0) = -phi0 < 0 and g is eventually increasing: unique root right
        // of the critical radius
        let r_star = if cos_theta > 0.0 { (cos_theta / c).sqrt() } else { 0.0 };
        let mut hi = (r_star + 1.0).max(1.0);
        let mut expansions = 0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::NoRoot { cos_theta, phi0 });
            }
        }
        return solve(r_star, hi, r_prev.unwrap_or(0.5 * (r_star + hi)));
    }
    // phi0 < 0: g(0+) = -phi0 > 0
    if cos_theta <= 0.0 {
        return Err(Error::NoRoot { cos_theta, phi0 });
    }
    let r_star = (cos_theta / c).sqrt();
    let g_min = g(r_star);
    let scale = gam * r_star.powi(p1) + cos_theta * r_star.powi(p2) + phi0.abs();
    if g_min > -1e-14 * scale {
        if g_min.abs() <= 1e-14 * scale {
            return Ok(r_star); // double root at the fold
        }
        return Err(Error::NoRoot { cos_theta, phi0 });
    }
    let r_prev = r_prev.ok_or(Error::AmbiguousRoot)?;
    if r_prev <= r_star {
        solve(f64::MIN_POSITIVE, r_star, r_prev)
    } else {
        let mut hi = 2.0 * r_star;
        let mut expansions = 0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::NoRoot { cos_theta, phi0 });
            }
        }
        solve(r_star, hi, r_prev)
    }
}

// ---------------------------------------------------------------------------
// Quadrature routes for the t-drop
// ---------------------------------------------------------------------------

/// Per-cycle t-drop over an exact 2 pi window of theta, phi0 > 0:
///
///   delta_t = -2/((2n-1)c) * Int_{theta_ref - 2pi}^{theta_ref}
///       R cos^2(sigma) / (phi0 R^{2-2n} + 2c/(2n+1) R^3) d sigma
///
/// with R = R(cos sigma) the conserved radius.  The integrand differs from
/// t'/theta' by a multiple of cos(sigma), which integrates to zero over the
/// full window; this makes the value an independent check on the integrated
/// flow.
pub fn cycle_drop_formula(n: usize, c: f64, phi0: f64, theta_ref: f64) -> Result<f64> {
    check_flow_params(n, c)?;
    if !(phi0 > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "the per-cycle drop formula needs phi0 > 0, got {phi0}"
        )));
    }
    let two_c = 2.0 * c / (2 * n + 1) as f64;
    let pow_low = 2.0 - 2.0 * n as f64;
    let quad = integrate_adaptive(
        |sigma: f64| {
            let cs = sigma.cos();
            let r = reduced_radius(n, c, phi0, cs, None)?;
            Ok(r * cs * cs / (phi0 * r.powf(pow_low) + two_c * r.powi(3)))
        },
        theta_ref - 2.0 * PI,
        theta_ref,
        1e-12,
        1e-14,
        4000,
    )?;
    Ok(-2.0 / ((2 * n - 1) as f64 * c) * quad.value)
}

/// t-drop of the phi0 = 0 traversal over theta in [theta_lo, theta_hi],
/// integrating dt/dtheta = t'/theta' with the conserved radius.  The
/// integrand is regular but 0/0-shaped at the poles, so near theta = +-pi/2
/// the substitution theta = +-(pi/2 - w^2) is used (cos theta = sin(w^2)
/// exactly), which also removes the square-root endpoint behavior.
pub fn traversal_drop_between(n: usize, c: f64, theta_lo: f64, theta_hi: f64) -> Result<f64> {
    check_flow_params(n, c)?;
    if !(-FRAC_PI_2 <= theta_lo && theta_lo < theta_hi && theta_hi <= FRAC_PI_2) {
        return Err(Error::InvalidSpec(format!(
            "traversal range must satisfy -pi/2 <= lo < hi <= pi/2, got [{theta_lo}, {theta_hi}]"
        )));
    }
    let gam = gamma(n, c);
    let ratio = move |cos_theta: f64| -> f64 {
        // r from the closed-form phi0 = 0 conservation law
        let r = (cos_theta / gam).sqrt();
        let t_dot = -2.0 * r * cos_theta;
        let theta_dot = (2 * n - 1) as f64 * (r * cos_theta - c * r.powi(3)) / (r * r);
        t_dot / theta_dot
    };
    let mut total = 0.0;
    // left piece, theta in [lo, min(hi, 0)]: theta = -pi/2 + w^2
    if theta_lo < 0.0 {
        let b = theta_hi.min(0.0);
        let wa = (theta_lo + FRAC_PI_2).sqrt();
        let wb = (b + FRAC_PI_2).sqrt();
        let quad = integrate_adaptive(
            |w: f64| Ok(ratio((w * w).sin()) * 2.0 * w),
            wa,
            wb,
            1e-12,
            1e-14,
            4000,
        )?;
        total += quad.value;
    }
    // right piece, theta in [max(lo, 0), hi]: theta = pi/2 - w^2
    if theta_hi > 0.0 {
        let a = theta_lo.max(0.0);
        let wa = (FRAC_PI_2 - theta_hi).sqrt();
        let wb = (FRAC_PI_2 - a).sqrt();
        let quad = integrate_adaptive(
            |w: f64| Ok(ratio((w * w).sin()) * 2.0 * w),
            wa,
            wb,
            1e-12,
            1e-14,
            4000,
        )?;
        total += quad.value;
    }
    // the trajectory runs from theta_hi down to theta_lo
    Ok(-total)
}

/// Full pole-to-pole t-drop of the phi0 = 0 traversal; equals
/// -2 (2n+1) / ((2n-1) c) analytically.
pub fn traversal_drop(n: usize, c: f64) -> Result<f64> {
    traversal_drop_between(n, c, -FRAC_PI_2, FRAC_PI_2)
}

// ---------------------------------------------------------------------------
// Reduced flow
// ---------------------------------------------------------------------------

/// One recorded state of the reduced system.
#[derive(Debug, Clone, Copy)]
pub struct ReducedState {
    pub s: f64,
    pub theta: f64,
    pub r: f64,
    pub t: f64,
}

/// t-drop over one full 2 pi decrease of theta.
#[derive(Debug, Clone, Copy)]
pub struct CycleRecord {
    pub index: usize,
    pub delta_t: f64,
    pub s_start: f64,
    pub s_end: f64,
}

/// Asymptotic class of the trajectory, determined by phi0: the phi0 = 0
/// traversal closes at the pole r = 0, every other value forces t to be
/// unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoteClass {
    ClosesAtPole,
    TUnbounded,
}

impl AsymptoteClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            AsymptoteClass::ClosesAtPole => "closes-at-pole",
            AsymptoteClass::TUnbounded => "t-unbounded",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CycleReport {
    pub classification: AsymptoteClass,
    /// Per-cycle drops measured from the integrated flow (phi0 > 0 mode).
    pub cycles: Vec<CycleRecord>,
    /// Pole-to-pole drop from the traversal quadrature (phi0 = 0 mode).
    pub traversal_drop: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ReducedRun {
    pub states: Vec<ReducedState>,
    pub report: CycleReport,
}

#[derive(Debug, Clone)]
pub struct ReducedFlowOptions {
    pub max_cycles: usize,
    pub max_s: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Branch hint for the phi0 < 0 two-root regime.
    pub initial_radius: Option<f64>,
    /// Traversal mode stops when r falls below this.
    pub pole_radius: f64,
}

impl Default for ReducedFlowOptions {
    fn default() -> Self {
        ReducedFlowOptions {
            max_cycles: 10,
            max_s: 1e4,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1e-2,
            initial_radius: None,
            pole_radius: 1e-6,
        }
    }
}

/// Integrates the reduced system from (theta0, t_init).
///
/// phi0 = 0: traversal mode, integrates until r < pole_radius and reports the
/// pole-to-pole quadrature drop.  phi0 > 0: cycle mode, theta decreases
/// strictly; each exact 2 pi decrease is located by bisection on the step
/// width and recorded.  phi0 < 0: plain integration to max_s; the branch is
/// tracked continuously from `initial_radius`, which is required when two
/// radii are compatible with the data.
pub fn reduced_flow(
    n: usize,
    c: f64,
    phi0: f64,
    theta0: f64,
    t_init: f64,
    opts: &ReducedFlowOptions,
) -> Result<ReducedRun> {
    check_flow_params(n, c)?;
    let gam = gamma(n, c);
    let p1 = (2 * n + 1) as i32;
    let p2 = (2 * n - 1) as i32;

    let mut hint = opts.initial_radius;
    let rhs = move |_s: f64, y: &[f64]| -> Result<Vec<f64>> {
        let cos_theta = y[0].cos();
        if phi0 == 0.0 && cos_theta <= 0.0 {
            // continuous extension past the pole, where the field vanishes
            return Ok(vec![0.0, 0.0]);
        }
        let r = reduced_radius(n, c, phi0, cos_theta, hint)?;
        hint = Some(r);
        let theta_dot = (2 * n - 1) as f64 * (r * cos_theta - c * r.powi(3)) / (r * r);
        Ok(vec![theta_dot, -2.0 * r * cos_theta])
    };
    let ode_opts = OdeOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: opts.max_step,
        ..Default::default()
    };
    let mut rk = AdaptiveRk::new(rhs, 0.0, vec![theta0, t_init], ode_opts);

    let classification =
        if phi0 == 0.0 { AsymptoteClass::ClosesAtPole } else { AsymptoteClass::TUnbounded };
    let r0 = reduced_radius(n, c, phi0, theta0.cos(), opts.initial_radius)?;
    let mut states = vec![ReducedState { s: 0.0, theta: theta0, r: r0, t: t_init }];
    let mut cycles: Vec<CycleRecord> = Vec::new();
    let mut cycle_anchor = (0.0f64, t_init); // (s, t) of the last 2 pi crossing
    let conservation_bound = 1e-8 * (1.0 + phi0.abs());

    while rk.s < opts.max_s && (phi0 <= 0.0 || cycles.len() < opts.max_cycles) {
        let s_prev = rk.s;
        let y_prev = rk.y.clone();
        match rk.step_capped(opts.max_s - rk.s) {
            Ok(_) => {}
            // the theta-parametrization folds where the two radius branches
            // of the phi0 < 0 regime merge; stop at the last resolvable state
            Err(Error::NoRoot { .. }) if phi0 < 0.0 => break,
            Err(e) => return Err(e),
        }

        if phi0 > 0.0 {
            // theta is strictly decreasing; land exactly on each 2 pi crossing
            let target = theta0 - 2.0 * PI * (cycles.len() + 1) as f64;
            if rk.y[0] <= target {
                let mut lo = 0.0;
                let mut hi = rk.s - s_prev;
                let mut landed = (rk.s, rk.y.clone());
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let (y_mid, _) = dp_trial_step(&mut rk.f, s_prev, &y_prev, mid)?;
                    if (y_mid[0] - target).abs() < 1e-13 {
                        landed = (s_prev + mid, y_mid);
                        break;
                    }
                    if y_mid[0] > target {
                        lo = mid;
                    } else {
                        hi = mid;
                        landed = (s_prev + mid, y_mid);
                    }
                }
                rk.s = landed.0;
                rk.y = landed.1;
                cycles.push(CycleRecord {
                    index: cycles.len() + 1,
                    delta_t: rk.y[1] - cycle_anchor.1,
                    s_start: cycle_anchor.0,
                    s_end: rk.s,
                });
                cycle_anchor = (rk.s, rk.y[1]);
            }
        }

        if phi0 == 0.0 && rk.y[0].cos() <= 0.0 {
            // overshot the pole within one step: land on it
            rk.y[0] = -FRAC_PI_2;
        }
        let cos_theta = rk.y[0].cos();
        let r = match reduced_radius(n, c, phi0, cos_theta, states.last().map(|st| st.r)) {
            Ok(r) => r,
            Err(Error::NoRoot { .. }) if phi0 < 0.0 => break,
            Err(e) => return Err(e),
        };
        let residual = (gam * r.powi(p1) - cos_theta * r.powi(p2) - phi0).abs();
        if residual > conservation_bound {
            return Err(Error::ConservationViolation { residual, bound: conservation_bound });
        }
        states.push(ReducedState { s: rk.s, theta: rk.y[0], r, t: rk.y[1] });

        if phi0 == 0.0 && r < opts.pole_radius {
            break;
        }
    }

    let traversal = if phi0 == 0.0 { Some(traversal_drop(n, c)?) } else { None };
    Ok(ReducedRun {
        states,
        report: CycleReport { classification, cycles, traversal_drop: traversal },
    })
}

// ---------------------------------------------------------------------------
// Ambient flow
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowTermination {
    PoleReached,
    CharacteristicBand,
    MaxArclength,
}

impl FlowTermination {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowTermination::PoleReached => "pole-reached",
            FlowTermination::CharacteristicBand => "characteristic-band",
            FlowTermination::MaxArclength => "max-arclength",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub s: f64,
    pub point: Point,
    pub r: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub phi_h: f64,
    pub phi_v: Option<f64>,
    /// |f| / (1 + |grad f|) after reprojection.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct AmbientTrajectory {
    pub samples: Vec<TrajectorySample>,
    pub termination: FlowTermination,
}

#[derive(Debug, Clone)]
pub struct AmbientFlowOptions {
    pub max_s: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Stop radius around the vertical axis; 0 picks 1e-4 * max(1, gauge
    /// norm of the start point).
    pub pole_radius: f64,
    /// |P_H nu| band that terminates the flow.
    pub char_tol: f64,
    /// Hard error bound on the on-surface residual.
    pub drift_bound: f64,
}

impl Default for AmbientFlowOptions {
    fn default() -> Self {
        AmbientFlowOptions {
            max_s: 50.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1e-2,
            pole_radius: 0.0,
            char_tol: DEFAULT_CHAR_TOL,
            drift_bound: 1e-8,
        }
    }
}

/// Integrates the eta-curve of the surface through `start`.
///
/// eta annihilates f, so the exact flow stays on the surface; after each
/// accepted step the state is reprojected along the normal and the residual
/// recorded.  Termination: r < pole_radius (pole-reached), |P_H nu| below
/// char_tol (characteristic-band), or s reaching max_s.
pub fn ambient_flow(
    spec: &DefiningFunctionSpec,
    start: &Point,
    opts: &AmbientFlowOptions,
) -> Result<AmbientTrajectory> {
    let n = spec.n();
    if start.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: start.dim() });
    }
    let start_jet = evaluate_jet(spec, start)?;
    match classify_point(&start_jet, opts.char_tol) {
        PointClass::OffSurface => {
            return Err(Error::OffSurface { value: start_jet.value, tol: start_jet.level_tol() })
        }
        PointClass::Characteristic => {
            let gn = start_jet.frame_grad.norm();
            let ph = start_jet.frame_grad.horizontal_part().norm();
            return Err(Error::CharacteristicPoint {
                p_h_norm: if gn > 0.0 { ph / gn } else { 0.0 },
                tol: opts.char_tol,
            });
        }
        PointClass::Regular => {}
    }
    let pole_radius = if opts.pole_radius > 0.0 {
        opts.pole_radius
    } else {
        1e-4 * crate::heisenberg::gauge_norm(start).max(1.0)
    };

    // the vector field: coordinate velocity of eta at the current point
    let rhs = |_s: f64, y: &[f64]| -> Result<Vec<f64>> {
        let p = Point::from_coords(n, y);
        let jet = evaluate_jet(spec, &p)?;
        // the frame only degenerates at true characteristic points; stage
        // evaluations may probe deep into the band, so keep a hard floor here
        // and leave band detection to the accepted-state check
        let frame = surface_frame(&jet, 1e-12)?;
        Ok(coordinate_velocity(&p, &frame.eta.to_ambient()))
    };
    let ode_opts = OdeOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: opts.max_step,
        ..Default::default()
    };
    let mut rk = AdaptiveRk::new(rhs, 0.0, start.to_coords(), ode_opts);

    let mut samples = Vec::new();
    samples.push(make_sample(spec, 0.0, start, opts)?);

    let termination = loop {
        if rk.s >= opts.max_s {
            break FlowTermination::MaxArclength;
        }
        match rk.step_capped(opts.max_s - rk.s) {
            Ok(_) => {}
            // a stage ran into the characteristic set itself: stop at the
            // last accepted state
            Err(Error::CharacteristicPoint { .. }) => break FlowTermination::CharacteristicBand,
            Err(e) => return Err(e),
        }

        // reproject onto the level set along the normal direction
        let mut p = Point::from_coords(n, &rk.y);
        for _ in 0..3 {
            let jet = evaluate_jet(spec, &p)?;
            let gn = jet.frame_grad.norm();
            if gn < 1e-14 || jet.value.abs() <= 1e-13 * (1.0 + gn) {
                break;
            }
            let nu = jet.frame_grad.scale(1.0 / gn);
            let v = coordinate_velocity(&p, &nu);
            let delta = -jet.value / gn;
            let coords: Vec<f64> =
                p.to_coords().iter().zip(&v).map(|(ci, vi)| ci + delta * vi).collect();
            p = Point::from_coords(n, &coords);
        }
        rk.y = p.to_coords();

        let sample = make_sample(spec, rk.s, &p, opts)?;
        if sample.residual > opts.drift_bound {
            return Err(Error::DriftExceeded {
                drift: sample.residual,
                bound: opts.drift_bound,
                s: rk.s,
            });
        }
        let r = sample.r;
        let jet = evaluate_jet(spec, &p)?;
        let gn = jet.frame_grad.norm();
        let ph_rel = if gn > 0.0 { jet.frame_grad.horizontal_part().norm() / gn } else { 0.0 };
        samples.push(sample);

        if r < pole_radius {
            break FlowTermination::PoleReached;
        }
        if ph_rel <= opts.char_tol {
            break FlowTermination::CharacteristicBand;
        }
    };

    Ok(AmbientTrajectory { samples, termination })
}

fn make_sample(
    spec: &DefiningFunctionSpec,
    s: f64,
    p: &Point,
    opts: &AmbientFlowOptions,
) -> Result<TrajectorySample> {
    let jet = evaluate_jet(spec, p)?;
    let frame = surface_frame(&jet, 1e-12)?;
    let h = mean_curvature_from(&jet, &frame, 1e-12)?;
    let inv = darboux_from(&frame, p, spec.n(), h, opts.char_tol);
    let xi = horizontal_position(p);
    let r = xi.norm();
    let (cos_theta, sin_theta) =
        if r > 0.0 { (frame.nu_h.dot(&xi) / r, frame.eta.dot(&xi) / r) } else { (0.0, 0.0) };
    Ok(TrajectorySample {
        s,
        point: p.clone(),
        r,
        cos_theta,
        sin_theta,
        phi_h: inv.phi_h,
        phi_v: inv.phi_v,
        residual: jet.value.abs() / (1.0 + jet.frame_grad.norm()),
    })
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes an ambient trajectory as CSV with LF line endings and 17
/// significant digits.
pub fn write_trajectory_csv<W: Write>(
    out: &mut W,
    n: usize,
    traj: &AmbientTrajectory,
) -> std::io::Result<()> {
    let mut header = String::from("s");
    for j in 1..=n {
        header.push_str(&format!(",x{j}"));
    }
    for j in 1..=n {
        header.push_str(&format!(",y{j}"));
    }
    header.push_str(",t,r,cos_theta,sin_theta,phi_h,phi_v,residual");
    writeln!(out, "{header}")?;
    for sm in &traj.samples {
        let mut row = fmt(sm.s);
        for v in sm.point.x.iter().chain(sm.point.y.iter()) {
            row.push(',');
            row.push_str(&fmt(*v));
        }
        row.push(',');
        row.push_str(&fmt(sm.point.t));
        for v in [sm.r, sm.cos_theta, sm.sin_theta, sm.phi_h] {
            row.push(',');
            row.push_str(&fmt(v));
        }
        row.push(',');
        if let Some(pv) = sm.phi_v {
            row.push_str(&fmt(pv));
        }
        row.push(',');
        row.push_str(&fmt(sm.residual));
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Writes a reduced trajectory as CSV (columns s, theta, r, t).
pub fn write_reduced_csv<W: Write>(out: &mut W, run: &ReducedRun) -> std::io::Result<()> {
    writeln!(out, "s,theta,r,t")?;
    for st in &run.states {
        writeln!(out, "{},{},{},{}", fmt(st.s), fmt(st.theta), fmt(st.r), fmt(st.t))?;
    }
    Ok(())
}
