//! Decomposition of the solution into a decaying part `v`, driven by the
//! dissipative piece `f₀` alone, and a regular part `G = u − v` that carries
//! `f(u) − f₀(v)` and the forcing. Both share the diffusion value `a(l(u))` of
//! the full solution.

mod checks;
mod experiments;
mod system;

pub use checks::{check_g_regularity, check_v_decay, CheckStatus, GRegularityReport, VDecayReport, G_RATIO_LIMIT};
pub use experiments::{
    perturbation_gap, semicontinuity_experiment, PerturbationReport, SemicontinuityReport,
    SemicontinuityRow, TREND_SLACK,
};
pub use system::{integrate_split, SplitTrajectory};
