use std::fmt;

use serde::Serialize;

use super::system::{full_rhs, SemilinearSystem};
use crate::error::{Error, Result};

/// Default upper bound on the IMEX step size.
pub const DEFAULT_IMEX_DT_CAP: f64 = 0.1;

/// Fixed-step time discretizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Scheme {
    /// Classical fourth-order Runge–Kutta, `ε` and `h` at stage times.
    Rk4,
    /// Linearly implicit θ-scheme: stiff rates `aλ_k/(1 + ελ_k)` implicit with
    /// `a` frozen at the step start, the rest explicit Euler.
    ImexTheta { theta: f64, dt_cap: f64 },
}

impl Scheme {
    pub fn imex(theta: f64) -> Self {
        Scheme::ImexTheta {
            theta,
            dt_cap: DEFAULT_IMEX_DT_CAP,
        }
    }

    pub fn validate(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("step size {dt} must be positive")));
        }
        if let Scheme::ImexTheta { theta, dt_cap } = *self {
            if !(0.0..=1.0).contains(&theta) {
                return Err(Error::invalid(format!("θ = {theta} must lie in [0, 1]")));
            }
            if dt > dt_cap {
                return Err(Error::invalid(format!("step {dt} exceeds the IMEX cap {dt_cap}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Rk4 => write!(f, "rk4"),
            Scheme::ImexTheta { theta, .. } => write!(f, "imex_theta({theta})"),
        }
    }
}

/// Scratch space for one trajectory.
pub(crate) struct Stepper {
    scheme: Scheme,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    rates: Vec<f64>,
    rates_next: Vec<f64>,
}

impl Stepper {
    pub fn new(scheme: Scheme, dim: usize) -> Self {
        Self {
            scheme,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            rates: vec![0.0; dim],
            rates_next: vec![0.0; dim],
        }
    }

    /// Advances `y` from `t` to `t + dt` in place.
    pub fn step<S: SemilinearSystem + ?Sized>(
        &mut self,
        sys: &mut S,
        t: f64,
        y: &mut [f64],
        dt: f64,
    ) -> Result<()> {
        match self.scheme {
            Scheme::Rk4 => self.rk4(sys, t, y, dt)?,
            Scheme::ImexTheta { theta, .. } => self.imex(sys, t, y, dt, theta)?,
        }
        sys.check_finite(t + dt, y)
    }

    fn rk4<S: SemilinearSystem + ?Sized>(
        &mut self,
        sys: &mut S,
        t: f64,
        y: &mut [f64],
        dt: f64,
    ) -> Result<()> {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        let rates = &mut self.rates;
        full_rhs(sys, t, y, rates, k1)?;
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        full_rhs(sys, t + 0.5 * dt, tmp, rates, k2)?;
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        full_rhs(sys, t + 0.5 * dt, tmp, rates, k3)?;
        for i in 0..y.len() {
            tmp[i] = y[i] + dt * k3[i];
        }
        full_rhs(sys, t + dt, tmp, rates, k4)?;
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        Ok(())
    }

    fn imex<S: SemilinearSystem + ?Sized>(
        &mut self,
        sys: &mut S,
        t: f64,
        y: &mut [f64],
        dt: f64,
        theta: f64,
    ) -> Result<()> {
        let e = &mut self.k[0];
        sys.explicit(t, y, e)?;
        let a = sys.diffusion(y);
        sys.rates(t, a, &mut self.rates);
        sys.rates(t + dt, a, &mut self.rates_next);
        for i in 0..y.len() {
            let explicit = y[i] + dt * e[i] - dt * (1.0 - theta) * self.rates[i] * y[i];
            y[i] = explicit / (1.0 + dt * theta * self.rates_next[i]);
        }
        Ok(())
    }
}

/// Step times from `t0` to `t1` with spacing `dt`, the last one clipped to `t1`.
/// Times are `t0 + k·dt` (not accumulated), so splitting a run at a step
/// boundary reproduces the same grid.
pub(crate) fn step_grid(t0: f64, t1: f64, dt: f64) -> Vec<f64> {
    let span = t1 - t0;
    if span <= 0.0 {
        return vec![t0];
    }
    let ratio = span / dt;
    let n = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    }
    .max(1);
    let mut out: Vec<f64> = (0..n).map(|k| t0 + k as f64 * dt).collect();
    out.push(t1);
    out
}

/// Integrates a semilinear system over a step grid, calling `observe` at every
/// grid time (including the first) with the current state.
pub(crate) fn drive<S: SemilinearSystem + ?Sized>(
    sys: &mut S,
    scheme: Scheme,
    times: &[f64],
    y: &mut [f64],
    mut observe: impl FnMut(&mut S, f64, &[f64]) -> Result<()>,
) -> Result<()> {
    let mut stepper = Stepper::new(scheme, y.len());
    sys.check_finite(times[0], y)?;
    observe(sys, times[0], y)?;
    for w in times.windows(2) {
        stepper.step(sys, w[0], y, w[1] - w[0])?;
        observe(sys, w[1], y)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_grid_clips_last_step() {
        assert_eq!(step_grid(0.0, 1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = step_grid(0.0, 1.0, 0.3);
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(step_grid(2.0, 2.0, 0.1), vec![2.0]);
        let g = step_grid(0.0, 1.0, 1e-3);
        assert_eq!(g.len(), 1001);
    }

    #[test]
    fn scheme_validation() {
        assert!(Scheme::imex(1.5).validate(0.01).is_err());
        assert!(Scheme::imex(0.5).validate(0.5).is_err());
        assert!(Scheme::Rk4.validate(0.0).is_err());
        assert!(Scheme::imex(1.0).validate(0.05).is_ok());
        assert_eq!(Scheme::imex(0.5).to_string(), "imex_theta(0.5)");
    }
}
