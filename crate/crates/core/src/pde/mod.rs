//! Finite-difference discretization on a uniform rectangle with zero-flux
//! boundaries, and the IMEX time loop built on it.

pub mod cg;
pub mod grid;
pub mod imex;
pub mod io;
pub mod laplacian;
pub mod run;

pub use cg::{cg_solve, cg_solve_in_place, CgStats, CgWorkspace, DEFAULT_CG_TOL};
pub use grid::{Grid, GridState, ScalarField};
pub use imex::{bump_field, dt_max, imex_step, working_necrosis_scale, Bump, ImexStepper};
pub use io::{read_snapshot, write_snapshot};
pub use laplacian::{laplacian_neumann, GridOperator, Identity, ShiftedLaplacian};
pub use run::{
    run_simulation, Cadence, NormRecorder, Observer, ProbeRecorder, RunOutcome, SnapshotWriter,
    StateCapture, StepView,
};
