use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::stepper::Scheme;
use super::trajectory::integrate_final;
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::spectral::{ht_norm_sq, SpectralField};

/// Growth exponents of paired-run differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceReport {
    /// `log(‖u¹(t) − u²(t)‖²_{H_t} / ‖δu‖²_{H_τ}) / (t − τ)` per direction.
    pub rates: Vec<f64>,
    /// Largest observed rate: the fitted constant `C`.
    pub fitted_c: f64,
}

/// Runs `u0` and `u0 + δu` for `directions` random unit directions scaled to
/// `‖δu‖_{H_τ} = amplitude`, and reports the exponential growth rates.
#[allow(clippy::too_many_arguments)]
pub fn continuous_dependence(
    config: &ModelConfig,
    t_from: f64,
    t_to: f64,
    u0: &SpectralField,
    directions: usize,
    amplitude: f64,
    dt: f64,
    scheme: Scheme,
    seed: u64,
) -> Result<DependenceReport> {
    if t_to <= t_from || directions == 0 || amplitude.is_nan() || amplitude <= 0.0 {
        return Err(Error::invalid(
            "need t_to > t_from, at least one direction and a positive amplitude",
        ));
    }
    let spectrum = config.spectrum().clone();
    let eps_from = config.epsilon().eps(t_from);
    let eps_to = config.epsilon().eps(t_to);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbations: Vec<SpectralField> = (0..directions)
        .map(|_| {
            let c: Vec<f64> = (0..spectrum.len())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let d = SpectralField::new(spectrum.clone(), c)?;
            let norm = ht_norm_sq(&d, eps_from)?.sqrt();
            Ok(d.scaled(amplitude / norm))
        })
        .collect::<Result<_>>()?;
    let base = integrate_final(config, t_from, t_to, u0, dt, scheme)?;
    let rates: Vec<f64> = perturbations
        .par_iter()
        .map(|d| -> Result<f64> {
            let start = u0.add(d)?;
            let end = integrate_final(config, t_from, t_to, &start, dt, scheme)?;
            let gap = ht_norm_sq(&end.u.sub(&base.u)?, eps_to)?;
            let init = ht_norm_sq(d, eps_from)?;
            Ok((gap / init).ln() / (t_to - t_from))
        })
        .collect::<Result<_>>()?;
    let fitted_c = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DependenceReport { rates, fitted_c })
}
