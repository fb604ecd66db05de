use rayon::prelude::*;
use serde::Serialize;

use super::cloud::{hausdorff_semidistance, CloudOrigin, PointCloud};
use crate::error::{Error, Result};
use crate::integrator::{integrate_final, Scheme};
use crate::model::{absorbing_radius, ConstantsCertificate, ModelConfig};
use crate::spectral::SpectralField;

/// Runs every member with the supplied map in parallel, preserving order, and
/// turns member failures into a partial-failure error.
pub(crate) fn run_members<T: Send>(
    members: &[SpectralField],
    f: impl Fn(&SpectralField) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = members.par_iter().map(&f).collect();
    let mut ok = Vec::with_capacity(results.len());
    let (mut survivors, mut failed) = (Vec::new(), Vec::new());
    let mut first_error = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => {
                survivors.push(i);
                ok.push(v);
            }
            Err(e) => {
                failed.push(i);
                first_error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if failed.is_empty() {
        Ok(ok)
    } else {
        Err(Error::PartialFailure {
            survivors,
            failed,
            first_error: first_error.unwrap_or_default(),
        })
    }
}

/// `U(t, t − τ)` applied to every member of `initial`, in order.
pub fn pullback_evolve(
    config: &ModelConfig,
    t: f64,
    tau: f64,
    initial: &[SpectralField],
    dt: f64,
    scheme: Scheme,
) -> Result<PointCloud> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("τ = {tau} must be nonnegative")));
    }
    let points = run_members(initial, |u0| {
        integrate_final(config, t - tau, t, u0, dt, scheme).map(|s| s.u)
    })?;
    PointCloud::new(
        t,
        config.epsilon().eps(t),
        points,
        CloudOrigin {
            tau,
            ensemble: format!("{} members", initial.len()),
        },
    )
}

/// Cloud at the largest `τ` of a schedule plus the Cauchy trace between
/// consecutive schedule entries.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorSample {
    pub cloud: PointCloud,
    /// `(τ_{i+1}, dist(cloud(τ_i), cloud(τ_{i+1})))`.
    pub trace: Vec<(f64, f64)>,
    pub converged: bool,
    /// `ρ_ξ(t)`.
    pub rho: f64,
    /// Points of the final cloud outside `B(0, ρ_ξ(t)^{1/2})`, with tolerance 1e−9.
    pub outside_ball: usize,
    pub clouds: Vec<PointCloud>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub tau: f64,
    pub semidistance: f64,
}

impl AttractorSample {
    pub fn trace_rows(&self) -> Vec<TraceRow> {
        self.trace
            .iter()
            .map(|&(tau, semidistance)| TraceRow { tau, semidistance })
            .collect()
    }
}

/// Evolves `ensemble` over each `τ` of an increasing schedule (length ≥ 3) and
/// declares convergence when the last trace value is at most `tol`.
#[allow(clippy::too_many_arguments)]
pub fn sample_attractor(
    config: &ModelConfig,
    cert: &ConstantsCertificate,
    t: f64,
    tau_schedule: &[f64],
    ensemble: &[SpectralField],
    dt: f64,
    scheme: Scheme,
    tol: f64,
) -> Result<AttractorSample> {
    if tau_schedule.len() < 3 || tau_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("τ schedule must be strictly increasing with at least 3 entries"));
    }
    let clouds: Vec<PointCloud> = tau_schedule
        .iter()
        .map(|&tau| pullback_evolve(config, t, tau, ensemble, dt, scheme))
        .collect::<Result<_>>()?;
    let trace: Vec<(f64, f64)> = clouds
        .windows(2)
        .map(|w| hausdorff_semidistance(&w[0], &w[1]).map(|r| (w[1].origin().tau, r.value)))
        .collect::<Result<_>>()?;
    let cloud = clouds.last().expect("schedule is nonempty").clone();
    let rho = absorbing_radius(cert, config.forcing(), t)?;
    let outside_ball = cloud.norms_sq().iter().filter(|&&n| n > rho + 1e-9).count();
    let converged = trace.last().is_some_and(|&(_, d)| d <= tol);
    Ok(AttractorSample {
        cloud,
        trace,
        converged,
        rho,
        outside_ball,
        clouds,
    })
}
