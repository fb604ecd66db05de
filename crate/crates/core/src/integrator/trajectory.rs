use std::sync::Arc;

use serde::Serialize;

use super::stepper::{drive, step_grid, Scheme, Stepper};
use super::system::{GalerkinSystem, SemilinearSystem};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::spectral::{SpectralField, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinState {
    pub t: f64,
    pub u: SpectralField,
}

/// Terms of the energy identity at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    /// `‖u‖²`.
    pub l2_sq: f64,
    /// `‖∇u‖²`.
    pub grad_sq: f64,
    pub eps: f64,
    pub eps_prime: f64,
    /// `a(l(u))`.
    pub diffusion: f64,
    /// `(2a(l(u)) − ε′)‖∇u‖²`.
    pub dissipation: f64,
    /// `(f(u), u)`.
    pub work_f: f64,
    /// `ξ(h, u)`.
    pub work_h: f64,
}

impl LedgerRow {
    /// `‖u‖² + ε‖∇u‖²`.
    pub fn energy(&self) -> f64 {
        self.l2_sq + self.eps * self.grad_sq
    }

    pub(crate) fn compute(sys: &mut GalerkinSystem<'_>, t: f64, y: &[f64]) -> Self {
        let config = sys.config();
        let lambda = config.spectrum().eigenvalues();
        let l2_sq: f64 = y.iter().map(|c| c * c).sum();
        let grad_sq: f64 = y.iter().zip(lambda).map(|(c, l)| l * c * c).sum();
        let eps = config.epsilon().eps(t);
        let eps_prime = config.epsilon().eps_prime(t);
        let diffusion = sys.diffusion(y);
        let forcing = config.forcing();
        let xb = forcing.xi() * forcing.b(t);
        let work_h = xb
            * forcing
                .profile()
                .coeffs()
                .iter()
                .zip(y)
                .map(|(a, b)| a * b)
                .sum::<f64>();
        let work_f = if config.nonlinearity().is_zero() {
            0.0
        } else {
            sys.work(y)
        };
        Self {
            t,
            l2_sq,
            grad_sq,
            eps,
            eps_prime,
            diffusion,
            dissipation: (2.0 * diffusion - eps_prime) * grad_sq,
            work_f,
            work_h,
        }
    }
}

/// Time-ordered states with an energy ledger row per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scheme: String,
    /// Nominal step size; `None` for adaptive runs.
    pub dt: Option<f64>,
    pub states: Vec<GalerkinState>,
    pub ledger: Vec<LedgerRow>,
}

impl Trajectory {
    pub fn spectrum(&self) -> &Arc<Spectrum> {
        self.states[0].u.spectrum()
    }

    pub fn first(&self) -> &GalerkinState {
        &self.states[0]
    }

    pub fn last(&self) -> &GalerkinState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.t)
    }

    /// Index of the state at time `t` (matched to 1e−12 relative).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * t.abs().max(1.0);
        let i = self.states.partition_point(|s| s.t < t - tol);
        match self.states.get(i) {
            Some(s) if (s.t - t).abs() <= tol => Ok(i),
            _ => Err(Error::invalid(format!("t = {t} is not a trajectory time"))),
        }
    }
}

pub(crate) fn check_inputs(
    config: &ModelConfig,
    t_from: f64,
    t_to: f64,
    u0: &SpectralField,
) -> Result<()> {
    u0.check_same(&SpectralField::zeros(config.spectrum().clone()))?;
    if !u0.is_finite() {
        return Err(Error::InvalidState("initial datum is not finite".into()));
    }
    if !(t_from.is_finite() && t_to.is_finite() && t_from <= t_to) {
        return Err(Error::invalid(format!("need t_from ≤ t_to, got {t_from} > {t_to}")));
    }
    Ok(())
}

/// One step of `scheme` from `state`.
pub fn step(scheme: Scheme, config: &ModelConfig, state: &GalerkinState, dt: f64) -> Result<GalerkinState> {
    scheme.validate(dt)?;
    check_inputs(config, state.t, state.t + dt, &state.u)?;
    let mut sys = GalerkinSystem::new(config);
    let mut y = state.u.coeffs().to_vec();
    Stepper::new(scheme, y.len()).step(&mut sys, state.t, &mut y, dt)?;
    Ok(GalerkinState {
        t: state.t + dt,
        u: SpectralField::from_raw(config.spectrum().clone(), y),
    })
}

/// `U(t_to, t_from) u0` with every step and its ledger row recorded.
pub fn integrate(
    config: &ModelConfig,
    t_from: f64,
    t_to: f64,
    u0: &SpectralField,
    dt: f64,
    scheme: Scheme,
) -> Result<Trajectory> {
    scheme.validate(dt)?;
    check_inputs(config, t_from, t_to, u0)?;
    let times = step_grid(t_from, t_to, dt);
    let spectrum = config.spectrum().clone();
    let mut sys = GalerkinSystem::new(config);
    let mut y = u0.coeffs().to_vec();
    let mut states = Vec::with_capacity(times.len());
    let mut ledger = Vec::with_capacity(times.len());
    drive(&mut sys, scheme, &times, &mut y, |sys, t, y| {
        states.push(GalerkinState {
            t,
            u: SpectralField::from_raw(spectrum.clone(), y.to_vec()),
        });
        ledger.push(LedgerRow::compute(sys, t, y));
        Ok(())
    })?;
    Ok(Trajectory {
        scheme: scheme.to_string(),
        dt: Some(dt),
        states,
        ledger,
    })
}

/// `U(t_to, t_from) u0` without storing intermediate states.
pub fn integrate_final(
    config: &ModelConfig,
    t_from: f64,
    t_to: f64,
    u0: &SpectralField,
    dt: f64,
    scheme: Scheme,
) -> Result<GalerkinState> {
    scheme.validate(dt)?;
    check_inputs(config, t_from, t_to, u0)?;
    let times = step_grid(t_from, t_to, dt);
    let mut sys = GalerkinSystem::new(config);
    let mut y = u0.coeffs().to_vec();
    drive(&mut sys, scheme, &times, &mut y, |_, _, _| Ok(()))?;
    Ok(GalerkinState {
        t: t_to,
        u: SpectralField::from_raw(config.spectrum().clone(), y),
    })
}

/// States at the requested times (sorted, inside `[t_from, t_to]`), each
/// landed on exactly by splitting the step grid there.
pub fn integrate_sampled(
    config: &ModelConfig,
    t_from: f64,
    u0: &SpectralField,
    sample_times: &[f64],
    dt: f64,
    scheme: Scheme,
) -> Result<Vec<GalerkinState>> {
    if sample_times.windows(2).any(|w| w[0] > w[1]) || sample_times.first().is_some_and(|&t| t < t_from) {
        return Err(Error::invalid("sample times must be sorted and not before t_from"));
    }
    let mut out = Vec::with_capacity(sample_times.len());
    let mut state = GalerkinState {
        t: t_from,
        u: u0.clone(),
    };
    for &t in sample_times {
        state = integrate_final(config, state.t, t, &state.u, dt, scheme)?;
        out.push(state.clone());
    }
    Ok(out)
}

/// Composite Simpson rule on a nonuniform grid. An odd number of intervals
/// closes with the quadratic through the last three nodes.
pub(crate) fn simpson(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (t[1] - t[0]) * (y[0] + y[1]);
    }
    let pair = |i: usize| -> f64 {
        let (h0, h1) = (t[i + 1] - t[i], t[i + 2] - t[i + 1]);
        let s = h0 + h1;
        s / 6.0
            * (y[i] * (2.0 - h1 / h0) + y[i + 1] * s * s / (h0 * h1) + y[i + 2] * (2.0 - h0 / h1))
    };
    let intervals = n - 1;
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        total += pair(i);
        i += 2;
    }
    if intervals % 2 == 1 {
        // Integral over [t_{n-2}, t_{n-1}] of the interpolant through the last three nodes.
        let (a, b, c) = (t[n - 3], t[n - 2], t[n - 1]);
        let (h0, h1) = (b - a, c - b);
        let (ya, yb, yc) = (y[n - 3], y[n - 2], y[n - 1]);
        total += h1 / 6.0
            * (-ya * h1 * h1 / (h0 * (h0 + h1))
                + yb * (3.0 + h1 / h0)
                + yc * (3.0 * h0 + 2.0 * h1) / (h0 + h1));
    }
    total
}

/// `LHS − RHS` of the energy identity between trajectory times `s ≤ t`:
/// `E(t) + ∫(2a − ε′)‖∇u‖² − E(s) − 2∫(f(u), u) − 2∫ξ(h, u)`,
/// with `E = ‖u‖² + ε‖∇u‖²`.
pub fn energy_residual(traj: &Trajectory, s: f64, t: f64) -> Result<f64> {
    if s > t {
        return Err(Error::invalid(format!("need s ≤ t, got {s} > {t}")));
    }
    let (i, j) = (traj.index_of(s)?, traj.index_of(t)?);
    let rows = &traj.ledger[i..=j];
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let integral = |g: fn(&LedgerRow) -> f64| -> f64 {
        let v: Vec<f64> = rows.iter().map(g).collect();
        simpson(&times, &v)
    };
    let dissipation = integral(|r| r.dissipation);
    let work = integral(|r| r.work_f + r.work_h);
    Ok(rows[rows.len() - 1].energy() + dissipation - rows[0].energy() - 2.0 * work)
}
