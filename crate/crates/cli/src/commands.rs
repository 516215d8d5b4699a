use crate::config::{FileConfig, FlowSection, VerifySection};
use crate::{
    CliError, FlowArgs, OutputFormat, Resolved, SphereReportArgs, SurfaceArgs, SweepArgs,
    VerifyArgs,
};
use hgeom_core::numeric::DEFAULT_FD_STEP;
use hgeom_core::{
    ambient_flow, cycle_drop_formula, darboux_invariants, horizontal_position, identity_suite,
    mean_curvature, profile_kl, reduced_flow, sample_points, shape_operator, sphere_frame,
    sphere_sample, umbilic_fit, write_trajectory_csv, AmbientFlowOptions, DefiningFunctionSpec,
    Error as CoreError, IdentityReport, Point, Profile, ProfilePolynomial, ReducedFlowOptions,
    Result as CoreResult, SphereSpec, DEFAULT_CHAR_TOL,
};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

pub struct Outcome {
    pub content: String,
    pub pass: bool,
}

fn fx(v: f64) -> String {
    format!("{v:.16e}")
}

fn fx_opt(v: Option<f64>) -> String {
    v.map(fx).unwrap_or_default()
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

// ---------------------------------------------------------------------------
// Surface resolution
// ---------------------------------------------------------------------------

#[derive(Default, Clone)]
struct SurfaceParams {
    surface: Option<String>,
    n: Option<usize>,
    radius: Option<f64>,
    t0: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    terms: Option<Vec<(f64, u32, u32)>>,
    interior_t: Option<f64>,
}

impl SurfaceParams {
    fn from_flags(args: &SurfaceArgs) -> Result<Self, CliError> {
        let terms = match &args.terms {
            None => None,
            Some(text) => {
                Some(serde_json::from_str::<Vec<(f64, u32, u32)>>(text).map_err(|e| {
                    config_err(format!("--terms is not a [[coeff, u_pow, t_pow], ...] array: {e}"))
                })?)
            }
        };
        Ok(SurfaceParams {
            surface: args.surface.clone(),
            n: args.n,
            radius: args.radius,
            t0: args.t0,
            a: args.a,
            b: args.b,
            terms,
            interior_t: args.interior_t,
        })
    }

    fn from_verify_section(sec: &VerifySection) -> Self {
        SurfaceParams {
            surface: sec.surface.clone(),
            n: sec.n,
            radius: sec.radius,
            t0: sec.t0,
            a: sec.a,
            b: sec.b,
            terms: sec.terms.clone(),
            interior_t: sec.interior_t,
        }
    }

    fn from_flow_section(sec: &FlowSection) -> Self {
        SurfaceParams {
            surface: sec.surface.clone(),
            n: sec.n,
            radius: sec.radius,
            t0: sec.t0,
            a: sec.a,
            b: sec.b,
            terms: sec.terms.clone(),
            interior_t: sec.interior_t,
        }
    }

    fn overlaid_on(self, base: SurfaceParams) -> SurfaceParams {
        SurfaceParams {
            surface: self.surface.or(base.surface),
            n: self.n.or(base.n),
            radius: self.radius.or(base.radius),
            t0: self.t0.or(base.t0),
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            terms: self.terms.or(base.terms),
            interior_t: self.interior_t.or(base.interior_t),
        }
    }
}

enum ResolvedSurface {
    GaugeBall { n: usize, radius: f64, t0: f64 },
    Prof { n: usize, profile: Profile },
}

impl ResolvedSurface {
    fn build(p: &SurfaceParams) -> Result<Self, CliError> {
        let kind = p.surface.clone().unwrap_or_else(|| "gauge-ball".to_string());
        let n = p.n.ok_or_else(|| config_err("surface needs --n"))?;
        let radius = p.radius.unwrap_or(1.0);
        let t0 = p.t0.unwrap_or(0.0);
        match kind.as_str() {
            "gauge-ball" => Ok(ResolvedSurface::GaugeBall { n, radius, t0 }),
            "profile:gauge" => {
                Ok(ResolvedSurface::Prof { n, profile: Profile::gauge(radius, t0)? })
            }
            "profile:ellipsoid" => {
                let a = p.a.ok_or_else(|| config_err("ellipsoid profile needs --a"))?;
                let b = p.b.ok_or_else(|| config_err("ellipsoid profile needs --b"))?;
                Ok(ResolvedSurface::Prof { n, profile: Profile::ellipsoid(a, b)? })
            }
            "profile:polynomial" => {
                let terms = p
                    .terms
                    .clone()
                    .ok_or_else(|| config_err("polynomial profile needs --terms"))?;
                let poly = ProfilePolynomial::new(terms, p.interior_t)?;
                Ok(ResolvedSurface::Prof { n, profile: Profile::Polynomial(poly) })
            }
            other => Err(config_err(format!(
                "unknown surface kind '{other}' (expected gauge-ball, profile:gauge, \
                 profile:ellipsoid, profile:polynomial)"
            ))),
        }
    }

    fn n(&self) -> usize {
        match self {
            ResolvedSurface::GaugeBall { n, .. } | ResolvedSurface::Prof { n, .. } => *n,
        }
    }

    fn spec(&self) -> CoreResult<DefiningFunctionSpec> {
        match self {
            ResolvedSurface::GaugeBall { n, radius, t0 } => {
                DefiningFunctionSpec::gauge_ball(*n, *radius, *t0)
            }
            ResolvedSurface::Prof { n, profile } => {
                DefiningFunctionSpec::cylindrical(*n, profile.clone())
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            ResolvedSurface::GaugeBall { radius, t0, .. } => {
                format!("gauge-ball(R={radius}, t0={t0})")
            }
            ResolvedSurface::Prof { profile, .. } => match profile {
                Profile::Gauge { radius, t0 } => format!("profile:gauge(R={radius}, t0={t0})"),
                Profile::Ellipsoid { a, b } => format!("profile:ellipsoid(a={a}, b={b})"),
                Profile::Polynomial(_) => "profile:polynomial".to_string(),
            },
        }
    }

    /// The factor of the prescription H = c |xi_H| satisfied by the surface,
    /// when one is known.
    fn auto_c(&self) -> Option<f64> {
        match self {
            ResolvedSurface::GaugeBall { n, radius, .. } => {
                Some((2 * n + 1) as f64 / ((2 * n - 1) as f64 * radius * radius))
            }
            ResolvedSurface::Prof { .. } => None,
        }
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckRow {
    check: &'static str,
    max_residual: f64,
    threshold: f64,
    status: &'static str,
}

fn check_row(check: &'static str, max_residual: f64, threshold: f64) -> CheckRow {
    let status = if max_residual <= threshold { "pass" } else { "fail" };
    CheckRow { check, max_residual, threshold, status }
}

struct SampleAnalysis {
    report: IdentityReport,
    sphere_h: Option<f64>,
    sphere_shape: Option<f64>,
    sphere_phi_h: Option<f64>,
    sphere_phi_v: Option<f64>,
    profile_k: Option<f64>,
    profile_l: Option<f64>,
}

fn analyze_sample(
    surf: &ResolvedSurface,
    spec: &DefiningFunctionSpec,
    p: &Point,
    c: Option<f64>,
    fd_step: f64,
) -> CoreResult<SampleAnalysis> {
    let report = identity_suite(spec, p, c, fd_step)?;
    let mut out = SampleAnalysis {
        report,
        sphere_h: None,
        sphere_shape: None,
        sphere_phi_h: None,
        sphere_phi_v: None,
        profile_k: None,
        profile_l: None,
    };
    match surf {
        ResolvedSurface::GaugeBall { n, radius, t0 } => {
            let r = horizontal_position(p).norm();
            let k = r / (radius * radius);
            let h = mean_curvature(spec, p, DEFAULT_CHAR_TOL)?;
            let h_closed = (2 * n + 1) as f64 / (2 * n - 1) as f64 * k;
            out.sphere_h = Some((h - h_closed).abs());
            let m = shape_operator(spec, p, DEFAULT_CHAR_TOL)?;
            let mut worst = 0.0f64;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let expected = if i != j {
                        0.0
                    } else if i == 0 {
                        3.0 * k
                    } else {
                        k
                    };
                    worst = worst.max((m[(i, j)] - expected).abs());
                }
            }
            out.sphere_shape = Some(worst);
            let inv = darboux_invariants(spec, p, DEFAULT_CHAR_TOL)?;
            out.sphere_phi_h = Some(inv.phi_h.abs());
            let target = t0 / (radius * radius);
            out.sphere_phi_v = Some(inv.phi_v.map_or(f64::INFINITY, |v| (v - target).abs()));
        }
        ResolvedSurface::Prof { profile, .. } => {
            let (kp, lp) = profile_kl(profile, p)?;
            let m = shape_operator(spec, p, DEFAULT_CHAR_TOL)?;
            let fit = umbilic_fit(&m);
            out.profile_k = fit.k.map(|k| (k - kp).abs());
            out.profile_l = Some((fit.l - lp).abs());
        }
    }
    Ok(out)
}

fn max_over(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.flatten().fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    command: &'static str,
    surface: String,
    n: usize,
    samples: usize,
    seed: u64,
    fd_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    rows: &'a [CheckRow],
    status: &'static str,
}

pub fn cmd_verify(
    args: &VerifyArgs,
    file: &FileConfig,
    resolved: &Resolved,
) -> Result<Outcome, CliError> {
    let sec = file.verify.clone().unwrap_or_default();
    let params = SurfaceParams::from_flags(&args.surface)?
        .overlaid_on(SurfaceParams::from_verify_section(&sec));
    let surf = ResolvedSurface::build(&params)?;
    let spec = surf.spec()?;
    let samples_n = args.samples.or(sec.samples).unwrap_or(500);
    let fd_step = args.fd_step.or(sec.fd_step).unwrap_or(DEFAULT_FD_STEP);
    let c = args.c.or(sec.c).or_else(|| surf.auto_c());

    let points = sample_points(&spec, samples_n, resolved.seed)?;
    let analyses: Vec<CoreResult<SampleAnalysis>> = resolved.pool.install(|| {
        points.par_iter().map(|p| analyze_sample(&surf, &spec, p, c, fd_step)).collect()
    });
    let analyses: Vec<SampleAnalysis> = analyses.into_iter().collect::<CoreResult<_>>()?;

    let mut rows = Vec::new();
    let max_plain = |f: fn(&IdentityReport) -> f64| -> f64 {
        analyses.iter().map(|a| f(&a.report)).fold(0.0, f64::max)
    };
    rows.push(check_row("normal_t_pairing", max_plain(|r| r.normal_t_pairing), 1e-8));
    rows.push(check_row("self_pairings", max_plain(|r| r.self_pairings), 1e-8));
    rows.push(check_row("bracket_normal", max_plain(|r| r.bracket_normal), 1e-5));
    if let Some(v) = max_over(analyses.iter().map(|a| a.report.bracket_invariant_span)) {
        rows.push(check_row("bracket_invariant_span", v, 1e-5));
    }
    if let Some(v) = max_over(analyses.iter().map(|a| a.report.codazzi)) {
        rows.push(check_row("codazzi", v, 1e-5));
    }
    if let Some(v) = max_over(analyses.iter().map(|a| a.report.position_projections)) {
        rows.push(check_row("position_projections", v, 1e-8));
    }
    rows.push(check_row("umbilic_residual", max_plain(|r| r.umbilic_residual), 1e-8));
    match surf {
        ResolvedSurface::GaugeBall { .. } => {
            let get = |f: fn(&SampleAnalysis) -> Option<f64>| -> f64 {
                max_over(analyses.iter().map(f)).unwrap_or(f64::INFINITY)
            };
            rows.push(check_row("closed_form_mean_curvature", get(|a| a.sphere_h), 1e-8));
            rows.push(check_row("closed_form_shape_matrix", get(|a| a.sphere_shape), 1e-8));
            rows.push(check_row("phi_h_magnitude", get(|a| a.sphere_phi_h), 1e-9));
            rows.push(check_row("phi_v_deviation", get(|a| a.sphere_phi_v), 1e-8));
        }
        ResolvedSurface::Prof { .. } => {
            if let Some(v) = max_over(analyses.iter().map(|a| a.profile_k)) {
                rows.push(check_row("profile_k_agreement", v, 1e-8));
            }
            if let Some(v) = max_over(analyses.iter().map(|a| a.profile_l)) {
                rows.push(check_row("profile_l_agreement", v, 1e-8));
            }
        }
    }

    let pass = rows.iter().all(|r| r.status == "pass");
    let content = match resolved.format {
        OutputFormat::Csv => {
            let mut s = String::from("check,max_residual,threshold,status\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.check,
                    fx(r.max_residual),
                    fx(r.threshold),
                    r.status
                ));
            }
            s
        }
        OutputFormat::Json => {
            let report = VerifyReport {
                command: "verify",
                surface: surf.describe(),
                n: surf.n(),
                samples: samples_n,
                seed: resolved.seed,
                fd_step,
                c,
                rows: &rows,
                status: if pass { "pass" } else { "fail" },
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    Ok(Outcome { content, pass })
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SweepRow {
    phi0: f64,
    delta_t_measured: f64,
    delta_t_formula: Option<f64>,
    classification: &'static str,
    #[serde(skip)]
    ok: bool,
}

fn sweep_row(
    n: usize,
    c: f64,
    phi0: f64,
    cycles: usize,
    initial_radius: Option<f64>,
    max_s: f64,
) -> CoreResult<SweepRow> {
    if phi0 == 0.0 {
        let opts = ReducedFlowOptions { max_s, ..Default::default() };
        let run = reduced_flow(n, c, 0.0, FRAC_PI_2 - 1e-5, 0.0, &opts)?;
        let measured = run.states.last().expect("run has states").t - run.states[0].t;
        let formula = run.report.traversal_drop.expect("traversal drop for phi0 = 0");
        Ok(SweepRow {
            phi0,
            delta_t_measured: measured,
            delta_t_formula: Some(formula),
            classification: "closes-at-pole",
            ok: (measured - formula).abs() < 1e-6,
        })
    } else if phi0 > 0.0 {
        let opts =
            ReducedFlowOptions { max_cycles: cycles, max_s, initial_radius, ..Default::default() };
        let run = reduced_flow(n, c, phi0, 0.0, 0.0, &opts)?;
        let measured = run.report.cycles.first().map(|cy| cy.delta_t).ok_or_else(|| {
            CoreError::InvalidSpec(format!("no full cycle within max_s = {max_s}"))
        })?;
        let formula = cycle_drop_formula(n, c, phi0, 0.0)?;
        Ok(SweepRow {
            phi0,
            delta_t_measured: measured,
            delta_t_formula: Some(formula),
            classification: "t-unbounded",
            ok: (measured - formula).abs() < 1e-6,
        })
    } else {
        let opts = ReducedFlowOptions { max_s, initial_radius, ..Default::default() };
        let run = reduced_flow(n, c, phi0, 0.0, 0.0, &opts)?;
        let measured = run.states.last().expect("run has states").t - run.states[0].t;
        Ok(SweepRow {
            phi0,
            delta_t_measured: measured,
            delta_t_formula: None,
            classification: "t-unbounded",
            ok: true,
        })
    }
}

#[derive(Serialize)]
struct SweepReport<'a> {
    command: &'static str,
    n: usize,
    c: f64,
    cycles: usize,
    rows: &'a [SweepRow],
    status: &'static str,
}

pub fn cmd_sweep(
    args: &SweepArgs,
    file: &FileConfig,
    resolved: &Resolved,
) -> Result<Outcome, CliError> {
    let sec = file.sweep.clone().unwrap_or_default();
    let n = args.n.or(sec.n).ok_or_else(|| config_err("sweep needs --n"))?;
    let c = args.c.or(sec.c).ok_or_else(|| config_err("sweep needs --c"))?;
    let phi0 = args.phi0.clone().or(sec.phi0).ok_or_else(|| config_err("sweep needs --phi0"))?;
    if phi0.is_empty() {
        return Err(config_err("sweep needs at least one phi0 value"));
    }
    let cycles = args.cycles.or(sec.cycles).unwrap_or(3).max(1);
    let initial_radius = args.initial_radius.or(sec.initial_radius);
    let max_s = args.max_s.or(sec.max_s).unwrap_or(1e4);

    let rows: Vec<CoreResult<SweepRow>> = resolved.pool.install(|| {
        phi0.par_iter().map(|&p0| sweep_row(n, c, p0, cycles, initial_radius, max_s)).collect()
    });
    let rows: Vec<SweepRow> = rows.into_iter().collect::<CoreResult<_>>()?;

    let pass = rows.iter().all(|r| r.ok);
    let content = match resolved.format {
        OutputFormat::Csv => {
            let mut s = String::from("phi0,delta_t_measured,delta_t_formula,classification\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    fx(r.phi0),
                    fx(r.delta_t_measured),
                    fx_opt(r.delta_t_formula),
                    r.classification
                ));
            }
            s
        }
        OutputFormat::Json => {
            let report = SweepReport {
                command: "sweep",
                n,
                c,
                cycles,
                rows: &rows,
                status: if pass { "pass" } else { "fail" },
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    Ok(Outcome { content, pass })
}

// ---------------------------------------------------------------------------
// flow
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FlowSampleOut {
    s: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    t: f64,
    r: f64,
    cos_theta: f64,
    sin_theta: f64,
    phi_h: f64,
    phi_v: Option<f64>,
    residual: f64,
}

#[derive(Serialize)]
struct FlowReport {
    command: &'static str,
    surface: String,
    n: usize,
    termination: &'static str,
    samples: Vec<FlowSampleOut>,
}

pub fn cmd_flow(
    args: &FlowArgs,
    file: &FileConfig,
    resolved: &Resolved,
) -> Result<Outcome, CliError> {
    let sec = file.flow.clone().unwrap_or_default();
    let params = SurfaceParams::from_flags(&args.surface)?
        .overlaid_on(SurfaceParams::from_flow_section(&sec));
    let surf = ResolvedSurface::build(&params)?;
    let spec = surf.spec()?;
    let n = surf.n();
    let start = args.start.clone().or(sec.start).ok_or_else(|| config_err("flow needs --start"))?;
    if start.len() != 2 * n + 1 {
        return Err(config_err(format!(
            "--start needs {} coordinates for n = {n}, got {}",
            2 * n + 1,
            start.len()
        )));
    }
    let p = Point::from_coords(n, &start);
    let opts = AmbientFlowOptions {
        max_s: args.max_s.or(sec.max_s).unwrap_or(50.0),
        pole_radius: args.pole_radius.or(sec.pole_radius).unwrap_or(0.0),
        ..Default::default()
    };
    let traj = ambient_flow(&spec, &p, &opts)?;

    let content = match resolved.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_trajectory_csv(&mut buf, n, &traj)
                .map_err(|e| config_err(format!("cannot render trajectory: {e}")))?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
        OutputFormat::Json => {
            let samples = traj
                .samples
                .iter()
                .map(|sm| {
                    let coords = sm.point.to_coords();
                    FlowSampleOut {
                        s: sm.s,
                        x: coords[..n].to_vec(),
                        y: coords[n..2 * n].to_vec(),
                        t: coords[2 * n],
                        r: sm.r,
                        cos_theta: sm.cos_theta,
                        sin_theta: sm.sin_theta,
                        phi_h: sm.phi_h,
                        phi_v: sm.phi_v,
                        residual: sm.residual,
                    }
                })
                .collect();
            let report = FlowReport {
                command: "flow",
                surface: surf.describe(),
                n,
                termination: traj.termination.as_str(),
                samples,
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    Ok(Outcome { content, pass: true })
}

// ---------------------------------------------------------------------------
// sphere-report
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SphereRow {
    index: usize,
    r: f64,
    h: f64,
    h_closed: f64,
    h_diff: f64,
    k: Option<f64>,
    k_closed: f64,
    k_diff: Option<f64>,
    l: f64,
    l_closed: f64,
    l_diff: f64,
    phi_h: f64,
    phi_h_closed: f64,
    phi_h_diff: f64,
    phi_v: Option<f64>,
    phi_v_closed: f64,
    phi_v_diff: Option<f64>,
    p_h_norm: f64,
    p_h_norm_closed: f64,
    p_h_norm_diff: f64,
    nu_t: f64,
    nu_t_closed: f64,
    nu_t_diff: f64,
}

impl SphereRow {
    fn worst_diff(&self) -> f64 {
        let mut worst = self
            .h_diff
            .max(self.l_diff)
            .max(self.phi_h_diff)
            .max(self.p_h_norm_diff)
            .max(self.nu_t_diff);
        if let Some(d) = self.k_diff {
            worst = worst.max(d);
        }
        worst = worst.max(self.phi_v_diff.unwrap_or(f64::INFINITY));
        worst
    }
}

fn sphere_row(
    index: usize,
    sphere: &SphereSpec,
    ball: &DefiningFunctionSpec,
    p: &Point,
) -> CoreResult<SphereRow> {
    let n = sphere.n;
    let radius = sphere.radius;
    let frame = hgeom_core::surface_frame(&hgeom_core::evaluate_jet(ball, p)?, DEFAULT_CHAR_TOL)?;
    let h = mean_curvature(ball, p, DEFAULT_CHAR_TOL)?;
    let m = shape_operator(ball, p, DEFAULT_CHAR_TOL)?;
    let fit = umbilic_fit(&m);
    let inv = darboux_invariants(ball, p, DEFAULT_CHAR_TOL)?;

    let closed = sphere_frame(sphere, p)?;
    let r = horizontal_position(p).norm();
    let k_closed = r / (radius * radius);
    let l_closed = 3.0 * k_closed;
    let h_closed = (2 * n + 1) as f64 / (2 * n - 1) as f64 * k_closed;
    let phi_v_closed = sphere.phi_v_constant();

    Ok(SphereRow {
        index,
        r,
        h,
        h_closed,
        h_diff: (h - h_closed).abs(),
        k: fit.k,
        k_closed,
        k_diff: fit.k.map(|k| (k - k_closed).abs()),
        l: fit.l,
        l_closed,
        l_diff: (fit.l - l_closed).abs(),
        phi_h: inv.phi_h,
        phi_h_closed: 0.0,
        phi_h_diff: inv.phi_h.abs(),
        phi_v: inv.phi_v,
        phi_v_closed,
        phi_v_diff: inv.phi_v.map(|v| (v - phi_v_closed).abs()),
        p_h_norm: frame.p_h_norm,
        p_h_norm_closed: closed.p_h_norm,
        p_h_norm_diff: (frame.p_h_norm - closed.p_h_norm).abs(),
        nu_t: frame.nu_t,
        nu_t_closed: closed.nu_t,
        nu_t_diff: (frame.nu_t - closed.nu_t).abs(),
    })
}

#[derive(Serialize)]
struct SphereReport<'a> {
    command: &'static str,
    n: usize,
    #[serde(rename = "R")]
    radius: f64,
    t0: f64,
    samples: usize,
    seed: u64,
    max_diff: f64,
    rows: &'a [SphereRow],
    status: &'static str,
}

pub fn cmd_sphere_report(
    args: &SphereReportArgs,
    file: &FileConfig,
    resolved: &Resolved,
) -> Result<Outcome, CliError> {
    let sec = file.sphere_report.clone().unwrap_or_default();
    let n = args.n.or(sec.n).ok_or_else(|| config_err("sphere-report needs --n"))?;
    let radius = args.radius.or(sec.radius).unwrap_or(1.0);
    let t0 = args.t0.or(sec.t0).unwrap_or(0.0);
    let samples_n = args.samples.or(sec.samples).unwrap_or(100);
    let sphere = SphereSpec::new(n, radius, t0)?;
    let ball = DefiningFunctionSpec::gauge_ball(n, radius, t0)?;
    let points = sphere_sample(&sphere, samples_n, resolved.seed);

    let rows: Vec<CoreResult<SphereRow>> = resolved.pool.install(|| {
        points.par_iter().enumerate().map(|(i, p)| sphere_row(i, &sphere, &ball, p)).collect()
    });
    let rows: Vec<SphereRow> = rows.into_iter().collect::<CoreResult<_>>()?;

    let max_diff = rows.iter().map(SphereRow::worst_diff).fold(0.0, f64::max);
    let pass = max_diff <= 1e-8;
    let content = match resolved.format {
        OutputFormat::Csv => {
            let mut s = String::from(
                "index,r,h,h_closed,h_diff,k,k_closed,k_diff,l,l_closed,l_diff,\
                 phi_h,phi_h_closed,phi_h_diff,phi_v,phi_v_closed,phi_v_diff,\
                 p_h_norm,p_h_norm_closed,p_h_norm_diff,nu_t,nu_t_closed,nu_t_diff\n",
            );
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.index,
                    fx(r.r),
                    fx(r.h),
                    fx(r.h_closed),
                    fx(r.h_diff),
                    fx_opt(r.k),
                    fx(r.k_closed),
                    fx_opt(r.k_diff),
                    fx(r.l),
                    fx(r.l_closed),
                    fx(r.l_diff),
                    fx(r.phi_h),
                    fx(r.phi_h_closed),
                    fx(r.phi_h_diff),
                    fx_opt(r.phi_v),
                    fx(r.phi_v_closed),
                    fx_opt(r.phi_v_diff),
                    fx(r.p_h_norm),
                    fx(r.p_h_norm_closed),
                    fx(r.p_h_norm_diff),
                    fx(r.nu_t),
                    fx(r.nu_t_closed),
                    fx(r.nu_t_diff)
                ));
            }
            s
        }
        OutputFormat::Json => {
            let report = SphereReport {
                command: "sphere-report",
                n,
                radius,
                t0,
                samples: samples_n,
                seed: resolved.seed,
                max_diff,
                rows: &rows,
                status: if pass { "pass" } else { "fail" },
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    Ok(Outcome { content, pass })
}
