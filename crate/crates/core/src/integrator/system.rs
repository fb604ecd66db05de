use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::spectral::SpectralField;

/// Coefficient magnitude beyond which a run is aborted.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// A diagonal semilinear ODE `y′ = E(t, y) − r(t, a(y)) ∘ y`, where the stiff
/// rates `r` depend on the state only through the scalar diffusion value `a`.
pub trait SemilinearSystem {
    fn dim(&self) -> usize;

    /// The scalar `a(l(u))` entering the stiff rates.
    fn diffusion(&self, y: &[f64]) -> f64;

    /// Stiff rates for a given diffusion value.
    fn rates(&self, t: f64, a: f64, out: &mut [f64]);

    /// Explicit part `E(t, y)`.
    fn explicit(&mut self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()>;

    /// Component name and mode index of unknown `i`, for diagnostics.
    fn locate(&self, i: usize) -> (&'static str, usize);

    /// Fails with a blow-up error if any unknown is non-finite or too large.
    fn check_finite(&self, t: f64, y: &[f64]) -> Result<()> {
        match y
            .iter()
            .position(|v| !v.is_finite() || v.abs() > BLOW_UP_THRESHOLD)
        {
            None => Ok(()),
            Some(i) => {
                let (component, mode) = self.locate(i);
                Err(Error::BlowUp {
                    component,
                    t,
                    mode,
                    value: y[i],
                })
            }
        }
    }
}

/// Modal form of the equation,
/// `(1 + ελ_k) u̇_k = f_k(u) + ξh_k(t) − a(l(u)) λ_k u_k`,
/// with `f_k` the quadrature projection of `f(u(·))`.
pub struct GalerkinSystem<'a> {
    config: &'a ModelConfig,
    grid: Vec<f64>,
    proj: Vec<f64>,
}

impl<'a> GalerkinSystem<'a> {
    pub fn new(config: &'a ModelConfig) -> Self {
        let s = config.spectrum();
        Self {
            config,
            grid: vec![0.0; s.grid().len()],
            proj: vec![0.0; s.len()],
        }
    }

    pub fn config(&self) -> &ModelConfig {
        self.config
    }

    /// Writes `P f(u)` into `out` using the internal grid buffer.
    pub(crate) fn project_nonlinearity(
        &mut self,
        coeffs: &[f64],
        f: impl Fn(f64) -> f64,
        out: &mut [f64],
    ) {
        let s = self.config.spectrum();
        s.eval_into(coeffs, &mut self.grid);
        for v in self.grid.iter_mut() {
            *v = f(*v);
        }
        s.project_into(&self.grid, out);
    }

    /// `(f(u), u)` by quadrature.
    pub(crate) fn work(&mut self, coeffs: &[f64]) -> f64 {
        let s = self.config.spectrum();
        s.eval_into(coeffs, &mut self.grid);
        let nl = self.config.nonlinearity();
        for v in self.grid.iter_mut() {
            *v *= nl.f(*v);
        }
        s.integrate(&self.grid)
    }
}

impl SemilinearSystem for GalerkinSystem<'_> {
    fn dim(&self) -> usize {
        self.config.spectrum().len()
    }

    fn diffusion(&self, y: &[f64]) -> f64 {
        let g = self.config.kernel().field().coeffs();
        let l: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
        self.config.diffusion().a(l)
    }

    fn rates(&self, t: f64, a: f64, out: &mut [f64]) {
        let eps = self.config.epsilon().eps(t);
        for (r, lam) in out.iter_mut().zip(self.config.spectrum().eigenvalues()) {
            *r = a * lam / (1.0 + eps * lam);
        }
    }

    fn explicit(&mut self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        let config = self.config;
        let mut proj = std::mem::take(&mut self.proj);
        if config.nonlinearity().is_zero() {
            proj.iter_mut().for_each(|v| *v = 0.0);
        } else {
            let nl = config.nonlinearity();
            self.project_nonlinearity(y, |s| nl.f(s), &mut proj);
        }
        let eps = config.epsilon().eps(t);
        let forcing = config.forcing();
        let xb = forcing.xi() * forcing.b(t);
        let phi = forcing.profile().coeffs();
        for (k, lam) in config.spectrum().eigenvalues().iter().enumerate() {
            out[k] = (proj[k] + xb * phi[k]) / (1.0 + eps * lam);
        }
        self.proj = proj;
        if let Some(k) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                component: "u",
                t,
                mode: k,
                value: out[k],
            });
        }
        Ok(())
    }

    fn locate(&self, i: usize) -> (&'static str, usize) {
        ("u", i)
    }
}

/// Full right-hand side `y′ = E − r ∘ y` of any semilinear system.
pub(crate) fn full_rhs<S: SemilinearSystem + ?Sized>(
    sys: &mut S,
    t: f64,
    y: &[f64],
    rates: &mut [f64],
    out: &mut [f64],
) -> Result<()> {
    sys.explicit(t, y, out)?;
    let a = sys.diffusion(y);
    sys.rates(t, a, rates);
    for ((o, r), v) in out.iter_mut().zip(rates.iter()).zip(y) {
        *o -= r * v;
    }
    Ok(())
}

/// The solved-for time derivative `du/dt` of the Galerkin system.
pub fn galerkin_rhs(config: &ModelConfig, t: f64, u: &SpectralField) -> Result<SpectralField> {
    u.check_same(&SpectralField::zeros(config.spectrum().clone()))?;
    if !u.is_finite() {
        return Err(Error::InvalidState("state has non-finite coefficients".into()));
    }
    let mut sys = GalerkinSystem::new(config);
    let n = sys.dim();
    let (mut rates, mut out) = (vec![0.0; n], vec![0.0; n]);
    full_rhs(&mut sys, t, u.coeffs(), &mut rates, &mut out)?;
    SpectralField::new(config.spectrum().clone(), out)
}
