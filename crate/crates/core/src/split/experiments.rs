use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{integrate_final, Scheme};
use crate::model::{estimate_constants, ConstantsCertificate, ModelConfig};
use crate::pullback::{hausdorff_semidistance, sample_attractor};
use crate::spectral::{ht_norm_sq, SpectralField};

/// Gap between the forced and unforced evolutions of the same datum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub t0: f64,
    pub tau: f64,
    pub xi_list: Vec<f64>,
    /// `‖u^ξ(t₀) − u⁰(t₀)‖_{H_{t₀}}` per entry of `xi_list`.
    pub gaps: Vec<f64>,
    /// Slope of `log gap` against `log ξ` over entries with `ξ > 0` and a
    /// positive gap; `None` when fewer than two such entries exist.
    pub slope: Option<f64>,
}

fn check_decreasing(xi_list: &[f64]) -> Result<()> {
    if xi_list.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(Error::invalid("ξ values must be finite and nonnegative"));
    }
    if xi_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::invalid("ξ list must be strictly decreasing"));
    }
    Ok(())
}

fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Runs `u0` from `t₀ − τ` to `t₀` with every `ξ` of a decreasing list (at
/// least 4 entries, positive entries spanning at least 3 decades) and with
/// `ξ = 0`, and reports the final `H_{t₀}` gaps.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_gap(
    config: &ModelConfig,
    t0: f64,
    tau: f64,
    u0: &SpectralField,
    xi_list: &[f64],
    dt: f64,
    scheme: Scheme,
) -> Result<PerturbationReport> {
    check_decreasing(xi_list)?;
    let positive: Vec<f64> = xi_list.iter().copied().filter(|&x| x > 0.0).collect();
    let decades = match (positive.first(), positive.last()) {
        (Some(hi), Some(lo)) => (hi / lo).log10(),
        _ => 0.0,
    };
    if xi_list.len() < 4 || decades < 3.0 - 1e-9 {
        return Err(Error::invalid(
            "need at least 4 ξ values whose positive entries span 3 decades",
        ));
    }
    let base = integrate_final(&config.with_xi(0.0)?, t0 - tau, t0, u0, dt, scheme)?.u;
    let eps = config.epsilon().eps(t0);
    let gaps: Vec<f64> = xi_list
        .par_iter()
        .map(|&xi| {
            if xi == 0.0 {
                return Ok(0.0);
            }
            let u = integrate_final(&config.with_xi(xi)?, t0 - tau, t0, u0, dt, scheme)?.u;
            Ok(ht_norm_sq(&u.sub(&base)?, eps)?.sqrt())
        })
        .collect::<Result<_>>()?;
    Ok(PerturbationReport {
        t0,
        tau,
        xi_list: xi_list.to_vec(),
        slope: log_log_slope(xi_list, &gaps),
        gaps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemicontinuityRow {
    pub xi: f64,
    /// `dist_{H_t}(cloud_ξ, cloud_0)`.
    pub distance: f64,
    pub converged: bool,
}

/// Distances from the sampled `ξ`-attractors to the sampled `ξ = 0` attractor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemicontinuityReport {
    pub t: f64,
    pub rows: Vec<SemicontinuityRow>,
    pub reference_converged: bool,
    /// Diameter of the `ξ = 0` cloud.
    pub reference_diameter: f64,
    /// Every distance is at most 1.05 times the previous one.
    pub monotone: bool,
    /// Last distance divided by the reference diameter.
    pub final_relative: f64,
    /// How the unperturbed attractor is approximated.
    pub note: String,
}

/// Slack allowed between consecutive distances in the monotone-trend flag.
pub const TREND_SLACK: f64 = 1.05;

/// Samples the attractor for each `ξ` in a decreasing list and for `ξ = 0`,
/// recertifying the constants per `ξ` with the request stored in `cert`.
#[allow(clippy::too_many_arguments)]
pub fn semicontinuity_experiment(
    config: &ModelConfig,
    cert: &ConstantsCertificate,
    t: f64,
    xi_list: &[f64],
    tau_schedule: &[f64],
    ensemble: &[SpectralField],
    dt: f64,
    scheme: Scheme,
    tol: f64,
) -> Result<SemicontinuityReport> {
    check_decreasing(xi_list)?;
    if xi_list.is_empty() {
        return Err(Error::invalid("ξ list is empty"));
    }
    let sample = |xi: f64| {
        let c = config.with_xi(xi)?;
        let cert_xi = estimate_constants(&c, &cert.request)?;
        sample_attractor(&c, &cert_xi, t, tau_schedule, ensemble, dt, scheme, tol)
    };
    let reference = sample(0.0)?;
    let mut rows = Vec::with_capacity(xi_list.len());
    for &xi in xi_list {
        let (distance, converged) = if xi == 0.0 {
            (0.0, reference.converged)
        } else {
            let s = sample(xi)?;
            (hausdorff_semidistance(&s.cloud, &reference.cloud)?.value, s.converged)
        };
        rows.push(SemicontinuityRow {
            xi,
            distance,
            converged,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].distance <= TREND_SLACK * w[0].distance);
    let reference_diameter = reference.cloud.diameter();
    let last = rows.last().expect("ξ list is nonempty").distance;
    Ok(SemicontinuityReport {
        t,
        monotone,
        final_relative: if reference_diameter > 0.0 {
            last / reference_diameter
        } else if last == 0.0 {
            0.0
        } else {
            f64::INFINITY
        },
        reference_converged: reference.converged,
        reference_diameter,
        rows,
        note: "the unperturbed attractor is approximated by the pullback cloud of the ξ = 0 \
               system, which stays non-autonomous through ε(t)"
            .into(),
    })
}
