//! Two-level fourth-order finite-difference solver for the time-fractional
//! convection-diffusion-reaction equation
//!
//! ```text
//! cD^λ u − q(t) u_xx + p(t) u_x + g(x,t) u = s(x,t),   0 < λ < 1,
//! ```
//!
//! with a Caputo derivative in time. Each time step is split into two
//! implicit sub-steps, at t_{i+1/2} and t_{i+1}. The equation is enforced
//! at the shifted times t_{i+1/2+α} and t_{i+1+α} (α = 1 − λ), and the
//! space derivatives use five-point fourth-order stencils.
//!
//! ```
//! use tfcdr::{example1, run, FractionalParams};
//!
//! let lambda = 0.5;
//! let prob = example1(lambda).unwrap();
//! let grid = prob.grid(16, 40).unwrap();
//! let out = run(&prob, grid, FractionalParams::new(lambda).unwrap()).unwrap();
//! let err = tfcdr::error_vs_exact(&out.history, &prob).unwrap();
//! assert!(err.l2_l2 < 1e-5);
//! ```

pub mod caputo;
pub mod error;
pub mod expr;
pub mod harness;
pub mod linsys;
pub mod problem;
pub mod spatial;
pub mod special;
pub mod stepper;
pub mod weights;

pub use caputo::{
    caputo_quadrature_oracle, discrete_caputo_aseq, discrete_caputo_full, discrete_caputo_half,
    HalfStepHistory,
};
pub use error::{Error, Result};
pub use harness::{
    emit_csv, emit_plot, fit_slope, run_study, ConvergenceReport, Coupling, ErrorNorm,
    ProblemSource, ReportRow, StudyConfig,
};
pub use linsys::{assemble_full, assemble_half, solve_penta, PentaSystem};
pub use problem::{error_vs_exact, example1, example2, ErrorNorms, Problem, ProblemConfig};
pub use spatial::{apply_lh, inner, l2_norm, space_time_l2_norm, stencil_dx4, stencil_dxx4, GridSpec};
pub use special::gamma_fn;
pub use stepper::{run, RunFailure, RunOutput, StepState};
pub use weights::{
    a_sequence, check_inequalities, full_level_weights, half_level_weights, stability_condition,
    ASequence, FractionalParams, Level,
};
