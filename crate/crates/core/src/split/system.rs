use crate::error::{Error, Result};
use crate::integrator::{
    check_inputs, drive, step_grid, GalerkinState, GalerkinSystem, LedgerRow, Scheme, SemilinearSystem,
    Trajectory,
};
use crate::model::ModelConfig;
use crate::spectral::{ht_sq_raw, SpectralField};

/// `u`, `v` and `G` stacked into one vector of length `3N`. All three blocks
/// share the stiff rates built from `a(l(u))`; the explicit parts are
/// `P f(u) + ξh`, `P f₀(v)` and their difference.
struct SplitSystem<'a> {
    config: &'a ModelConfig,
    inner: GalerkinSystem<'a>,
    n: usize,
    fu: Vec<f64>,
    f0v: Vec<f64>,
}

impl<'a> SplitSystem<'a> {
    fn new(config: &'a ModelConfig) -> Self {
        let n = config.spectrum().len();
        Self {
            config,
            inner: GalerkinSystem::new(config),
            n,
            fu: vec![0.0; n],
            f0v: vec![0.0; n],
        }
    }
}

impl SemilinearSystem for SplitSystem<'_> {
    fn dim(&self) -> usize {
        3 * self.n
    }

    fn diffusion(&self, y: &[f64]) -> f64 {
        self.inner.diffusion(&y[..self.n])
    }

    fn rates(&self, t: f64, a: f64, out: &mut [f64]) {
        let n = self.n;
        self.inner.rates(t, a, &mut out[..n]);
        let (head, tail) = out.split_at_mut(n);
        tail[..n].copy_from_slice(head);
        tail[n..].copy_from_slice(head);
    }

    fn explicit(&mut self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n;
        let config = self.config;
        let nl = config.nonlinearity();
        let eps = config.epsilon().eps(t);
        let forcing = config.forcing();
        let xb = forcing.xi() * forcing.b(t);
        let phi = forcing.profile().coeffs();
        let lambda = config.spectrum().eigenvalues();
        let mut fu = std::mem::take(&mut self.fu);
        let mut f0v = std::mem::take(&mut self.f0v);
        self.inner.project_nonlinearity(&y[..n], |s| nl.f(s), &mut fu);
        self.inner.project_nonlinearity(&y[n..2 * n], |s| nl.f0(s), &mut f0v);
        for k in 0..n {
            let mass = 1.0 + eps * lambda[k];
            out[k] = (fu[k] + xb * phi[k]) / mass;
            out[n + k] = f0v[k] / mass;
            out[2 * n + k] = (fu[k] - f0v[k] + xb * phi[k]) / mass;
        }
        self.fu = fu;
        self.f0v = f0v;
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            let (component, mode) = self.locate(i);
            return Err(Error::BlowUp {
                component,
                t,
                mode,
                value: out[i],
            });
        }
        Ok(())
    }

    fn locate(&self, i: usize) -> (&'static str, usize) {
        match i / self.n {
            0 => ("u", i),
            1 => ("v", i - self.n),
            _ => ("G", i - 2 * self.n),
        }
    }
}

/// Co-evolved full solution `u`, decaying part `v` and regular part `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitTrajectory {
    pub base: Trajectory,
    pub v_states: Vec<GalerkinState>,
    pub reg_states: Vec<GalerkinState>,
    /// Regularity exponent used for the norms of `G`.
    pub alpha: f64,
}

impl SplitTrajectory {
    /// Length of the run, `t − (t − τ)`.
    pub fn tau(&self) -> f64 {
        self.base.last().t - self.base.first().t
    }

    /// `sup_s ‖u(s) − v(s) − G(s)‖_{H_s}`.
    pub fn additivity_defect(&self) -> f64 {
        let lambda = self.base.spectrum().eigenvalues();
        let mut diff = vec![0.0; lambda.len()];
        self.base
            .states
            .iter()
            .zip(&self.v_states)
            .zip(&self.reg_states)
            .zip(&self.base.ledger)
            .map(|(((u, v), g), row)| {
                for (k, d) in diff.iter_mut().enumerate() {
                    *d = u.u.coeffs()[k] - v.u.coeffs()[k] - g.u.coeffs()[k];
                }
                ht_sq_raw(&diff, lambda, row.eps).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Runs the decomposition on `[t − τ, t]` from `v = u0`, `G = 0`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_split(
    config: &ModelConfig,
    t: f64,
    tau: f64,
    u0: &SpectralField,
    dt: f64,
    scheme: Scheme,
    alpha: f64,
) -> Result<SplitTrajectory> {
    scheme.validate(dt)?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("τ = {tau} must be nonnegative")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("α = {alpha} must lie in (0, 1]")));
    }
    let t0 = t - tau;
    check_inputs(config, t0, t, u0)?;
    let spectrum = config.spectrum().clone();
    let n = spectrum.len();
    let mut y = vec![0.0; 3 * n];
    y[..n].copy_from_slice(u0.coeffs());
    y[n..2 * n].copy_from_slice(u0.coeffs());
    let times = step_grid(t0, t, dt);
    let mut sys = SplitSystem::new(config);
    let cap = times.len();
    let (mut us, mut vs, mut gs, mut ledger) = (
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
    );
    drive(&mut sys, scheme, &times, &mut y, |sys, s, y| {
        let block = |b: usize| GalerkinState {
            t: s,
            u: SpectralField::from_raw(spectrum.clone(), y[b * n..(b + 1) * n].to_vec()),
        };
        us.push(block(0));
        vs.push(block(1));
        gs.push(block(2));
        ledger.push(LedgerRow::compute(&mut sys.inner, s, &y[..n]));
        Ok(())
    })?;
    Ok(SplitTrajectory {
        base: Trajectory {
            scheme: scheme.to_string(),
            dt: Some(dt),
            states: us,
            ledger,
        },
        v_states: vs,
        reg_states: gs,
        alpha,
    })
}
