// Input guards use !(x > 0.0) on purpose: the negation rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Hypersurface geometry of the Heisenberg group.
//!
//! Horizontal frames, mean curvature, the horizontal shape operator, the
//! radial invariants phi_h / phi_v, gauge-sphere closed forms used as
//! oracles, cylindrically symmetric profiles, and the eta-curve flows (full
//! ambient and reduced planar system).

pub mod cylindrical;
pub mod error;
pub mod flow;
pub mod gauge;
pub mod heisenberg;
pub mod numeric;
pub mod surface;

pub use cylindrical::{profile_jet, profile_kl, Profile, ProfilePolynomial};
pub use error::{Error, Result};
pub use flow::{
    ambient_flow, cycle_drop_formula, reduced_flow, reduced_radius, traversal_drop,
    traversal_drop_between, write_reduced_csv, write_trajectory_csv, AmbientFlowOptions,
    AmbientTrajectory, AsymptoteClass, CycleRecord, CycleReport, FlowTermination,
    ReducedFlowOptions, ReducedRun, ReducedState, TrajectorySample,
};
pub use gauge::{sphere_frame, sphere_sample, sphere_shape, SphereFrame, SphereShape, SphereSpec};
pub use heisenberg::{
    dilate, gauge_norm, group_inv, group_mul, horizontal_position, j_apply, AmbientVector,
    HorizontalVector, Point, MAX_DIM, MIN_DIM,
};
pub use surface::{
    classify_point, darboux_invariants, evaluate_jet, identity_suite, mean_curvature,
    sample_points, shape_operator, surface_frame, umbilic_fit, CoordinatePolynomial,
    DarbouxInvariants, DefiningFunctionSpec, IdentityReport, PointClass, SurfaceFrame, SurfaceJet,
    UmbilicFit, DEFAULT_CHAR_TOL,
};
