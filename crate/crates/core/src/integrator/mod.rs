//! Galerkin ODE system, fixed-step and adaptive time integration, and the
//! energy-identity audit.

mod dependence;
pub mod io;
mod reference;
mod stepper;
mod system;
mod trajectory;

pub use dependence::{continuous_dependence, DependenceReport};
pub use reference::reference_solve;
pub use stepper::{Scheme, DEFAULT_IMEX_DT_CAP};
pub use system::{galerkin_rhs, GalerkinSystem, SemilinearSystem, BLOW_UP_THRESHOLD};
pub use trajectory::{
    energy_residual, integrate, integrate_final, integrate_sampled, step, GalerkinState,
    LedgerRow, Trajectory,
};

pub(crate) use stepper::{drive, step_grid};
pub(crate) use trajectory::check_inputs;
