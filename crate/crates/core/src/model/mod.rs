//! Problem instances: coefficient laws, assumption validation and the
//! derivation of dissipativity constants.

mod constants;
mod diffusion;
mod epsilon;
mod forcing;
mod nonlinearity;
mod validate;

use std::f64::consts::PI;
use std::sync::Arc;

pub use constants::{
    absorbing_radius, estimate_constants, verify_certificate, CertificateRequest,
    ConstantsCertificate, Provenance,
};
pub use diffusion::{DiffusionKind, DiffusionLaw};
pub use epsilon::{EpsilonLaw, EpsilonSchedule};
pub use forcing::{Forcing, TimeLaw};
pub use nonlinearity::{Nonlinearity, Polynomial};
pub use validate::{
    validate_assumptions, validate_assumptions_with, AssumptionCheck, ScanSettings,
    ValidationReport, Witness,
};

use crate::error::{Error, Result};
use crate::spectral::{build_spectrum, Domain, SpectralField, Spectrum};

/// Weight `g` of the nonlocal functional `l(u) = ∫ g u`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightKernel {
    g: SpectralField,
}

impl WeightKernel {
    pub fn new(g: SpectralField) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::InvalidState("kernel is not finite".into()));
        }
        Ok(Self { g })
    }

    pub fn field(&self) -> &SpectralField {
        &self.g
    }
}

/// `l(u) = ∫ g u dx`, evaluated as the coefficient inner product.
pub fn nonlocal_value(u: &SpectralField, kernel: &WeightKernel) -> Result<f64> {
    kernel.g.dot(u)
}

/// A full problem instance on a shared spectrum.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    spectrum: Arc<Spectrum>,
    epsilon: EpsilonSchedule,
    diffusion: DiffusionLaw,
    kernel: WeightKernel,
    nonlinearity: Nonlinearity,
    forcing: Forcing,
}

impl ModelConfig {
    pub fn new(
        spectrum: Arc<Spectrum>,
        epsilon: EpsilonSchedule,
        diffusion: DiffusionLaw,
        kernel: WeightKernel,
        nonlinearity: Nonlinearity,
        forcing: Forcing,
    ) -> Result<Self> {
        kernel.field().check_same(&SpectralField::zeros(spectrum.clone()))?;
        forcing
            .profile()
            .check_same(&SpectralField::zeros(spectrum.clone()))?;
        Ok(Self {
            spectrum,
            epsilon,
            diffusion,
            kernel,
            nonlinearity,
            forcing,
        })
    }

    /// Default catalog entry on `(0, π)`: `ε(t) = ½/(1 + e^t)`,
    /// `a(s) = 1 + 1/(1 + s²)`, `g = ω₁`, `f(s) = 3s − s³`, and
    /// `h = cos(t)·(0.05 ω₁ + 0.05 ω₂)` with `ξ = 0.1`.
    pub fn default_model(modes: usize) -> Result<Self> {
        let spectrum = build_spectrum(Domain::interval(PI)?, &[modes])?;
        Self::default_on(spectrum)
    }

    /// The default coefficient laws on an arbitrary spectrum.
    pub fn default_on(spectrum: Arc<Spectrum>) -> Result<Self> {
        let profile: Vec<f64> = [0.05, 0.05].into_iter().take(spectrum.len()).collect();
        Self::new(
            spectrum.clone(),
            EpsilonSchedule::logistic(0.5)?,
            DiffusionLaw::bounded_rational(1.0, 2.0)?,
            WeightKernel::new(SpectralField::single_mode(spectrum.clone(), 0, 1.0)?)?,
            Nonlinearity::cubic(3.0)?,
            Forcing::new(
                SpectralField::from_leading(spectrum, &profile)?,
                TimeLaw::Cosine {
                    amplitude: 1.0,
                    omega: 1.0,
                },
                0.1,
            )?,
        )
    }

    /// Linear autonomous control case: `a ≡ 1`, `f ≡ 0`, `ξ = 0`, `ε ≡ ε₀` on `(0, π)`.
    pub fn linear_model(eps0: f64, modes: usize) -> Result<Self> {
        let spectrum = build_spectrum(Domain::interval(PI)?, &[modes])?;
        Self::new(
            spectrum.clone(),
            EpsilonSchedule::constant(eps0)?,
            DiffusionLaw::constant(1.0)?,
            WeightKernel::new(SpectralField::single_mode(spectrum.clone(), 0, 1.0)?)?,
            Nonlinearity::zero(),
            Forcing::none(spectrum),
        )
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn epsilon(&self) -> &EpsilonSchedule {
        &self.epsilon
    }

    pub fn diffusion(&self) -> &DiffusionLaw {
        &self.diffusion
    }

    pub fn kernel(&self) -> &WeightKernel {
        &self.kernel
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn xi(&self) -> f64 {
        self.forcing.xi()
    }

    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        let mut c = self.clone();
        c.forcing = self.forcing.with_xi(xi)?;
        Ok(c)
    }

    pub fn with_epsilon(mut self, epsilon: EpsilonSchedule) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_diffusion(mut self, diffusion: DiffusionLaw) -> Self {
        self.diffusion = diffusion;
        self
    }

    pub fn with_nonlinearity(mut self, nonlinearity: Nonlinearity) -> Self {
        self.nonlinearity = nonlinearity;
        self
    }

    pub fn with_forcing(self, forcing: Forcing) -> Result<Self> {
        Self::new(
            self.spectrum,
            self.epsilon,
            self.diffusion,
            self.kernel,
            self.nonlinearity,
            forcing,
        )
    }

    pub fn with_kernel(self, kernel: WeightKernel) -> Result<Self> {
        Self::new(
            self.spectrum,
            self.epsilon,
            self.diffusion,
            kernel,
            self.nonlinearity,
            self.forcing,
        )
    }

    /// The same coefficient laws on a different spectrum (profiles are
    /// re-expanded by matching leading coefficients).
    pub fn on_spectrum(&self, spectrum: Arc<Spectrum>) -> Result<Self> {
        let carry = |f: &SpectralField| -> Result<SpectralField> {
            let n = spectrum.len();
            let mut c: Vec<f64> = f.coeffs().iter().copied().take(n).collect();
            c.resize(n, 0.0);
            SpectralField::new(spectrum.clone(), c)
        };
        Self::new(
            spectrum.clone(),
            self.epsilon,
            self.diffusion,
            WeightKernel::new(carry(self.kernel.field())?)?,
            self.nonlinearity.clone(),
            Forcing::new(
                carry(self.forcing.profile())?,
                self.forcing.law(),
                self.forcing.xi(),
            )?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{evaluate_on_grid, GridSamples};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nonlocal_value_examples() {
        let s = build_spectrum(Domain::interval(PI).unwrap(), &[6]).unwrap();
        let g = WeightKernel::new(SpectralField::from_leading(s.clone(), &[0.0, 1.0, 2.0]).unwrap())
            .unwrap();
        let u = SpectralField::from_leading(s.clone(), &[4.0, 0.0, 0.0, -1.0]).unwrap();
        assert_eq!(nonlocal_value(&u, &g).unwrap(), 0.0);

        let g1 = WeightKernel::new(SpectralField::single_mode(s.clone(), 0, 1.0).unwrap()).unwrap();
        let u1 = SpectralField::single_mode(s.clone(), 0, -2.5).unwrap();
        assert_eq!(nonlocal_value(&u1, &g1).unwrap(), -2.5);

        let other = build_spectrum(Domain::interval(1.0).unwrap(), &[6]).unwrap();
        assert!(nonlocal_value(&SpectralField::zeros(other), &g1).is_err());
    }

    #[test]
    fn nonlocal_value_matches_quadrature_integral() {
        let s = build_spectrum(Domain::cuboid(&[PI, 2.0]).unwrap(), &[5, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut draw = || -> SpectralField {
                let c = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                SpectralField::new(s.clone(), c).unwrap()
            };
            let (g, u) = (draw(), draw());
            let quad: GridSamples = evaluate_on_grid(&g).mul(&evaluate_on_grid(&u)).unwrap();
            let kernel = WeightKernel::new(g).unwrap();
            let coeff = nonlocal_value(&u, &kernel).unwrap();
            assert!((coeff - quad.integral()).abs() < 1e-10);
        }
    }

    #[test]
    fn default_model_is_consistent() {
        let m = ModelConfig::default_model(8).unwrap();
        assert_eq!(m.spectrum().len(), 8);
        assert_eq!(m.xi(), 0.1);
        let m0 = m.with_xi(0.0).unwrap();
        assert_eq!(m0.xi(), 0.0);
        assert!(m.with_xi(-1.0).is_err());
        let wide = m.on_spectrum(build_spectrum(Domain::interval(PI).unwrap(), &[16]).unwrap());
        assert_eq!(wide.unwrap().forcing().profile().coeffs()[1], 0.05);
    }
}
