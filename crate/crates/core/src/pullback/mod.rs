//! Pullback dynamics: ensembles evolved from `t − τ` to `t`, attractor
//! sampling, Hausdorff semidistances and runtime checks of the dissipative
//! estimates.

mod checks;
mod cloud;
mod evolve;

pub use checks::{
    absorption_with_radius, check_absorption, check_decay_bound, check_window_bounds, decay_bound,
    q_monitor, q_monitor_with, trajectory_absorption, AbsorptionReport, DecayReport, QLedger,
    TrajectoryAbsorption, WindowBounds, DECAY_TOLERANCE,
};
pub use cloud::{hausdorff_semidistance, CloudOrigin, EnsembleSpec, PointCloud, SemidistanceReport};
pub use evolve::{pullback_evolve, sample_attractor, AttractorSample, TraceRow};
