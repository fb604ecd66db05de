//! TOML run configuration. Every physical function is picked from a named
//! catalog entry plus parameters.

use std::f64::consts::PI;
use std::path::PathBuf;

use nldiff_core::integrator::{Scheme, DEFAULT_IMEX_DT_CAP};
use nldiff_core::model::{
    CertificateRequest, DiffusionLaw, EpsilonLaw, EpsilonSchedule, Forcing, ModelConfig, Nonlinearity,
    Polynomial, TimeLaw, WeightKernel,
};
use nldiff_core::spectral::{build_spectrum, Domain, DomainKind, SpectralField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub numerics: NumericsSection,
    pub certificate: CertificateSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// One extent gives the interval `(0, ℓ)`, two or three give a box.
    pub extents: Vec<f64>,
    pub modes: Vec<usize>,
    pub xi: f64,
    pub epsilon: EpsilonEntry,
    pub diffusion: DiffusionEntry,
    pub nonlinearity: NonlinearityEntry,
    /// Leading coefficients of the weight `g` in `l(u) = ∫ g u`.
    pub kernel: Vec<f64>,
    pub forcing: ForcingEntry,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            extents: vec![PI],
            modes: vec![16],
            xi: 0.1,
            epsilon: EpsilonEntry::Logistic { eps0: 0.5 },
            diffusion: DiffusionEntry::BoundedRational { lower: 1.0, upper: 2.0 },
            nonlinearity: NonlinearityEntry::Cubic { kappa: 3.0 },
            kernel: vec![1.0],
            forcing: ForcingEntry::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsilonEntry {
    Constant { eps0: f64 },
    Logistic { eps0: f64 },
    Quadratic { c0: f64, c1: f64, c2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiffusionEntry {
    Constant { value: f64 },
    BoundedRational { lower: f64, upper: f64 },
    /// `a(s) = c0 + c1 s` with declared bounds that the validator checks.
    Affine { c0: f64, c1: f64, lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityEntry {
    Zero,
    /// `f(s) = κs − s³` split as `f₀ = −s³ − s`, `f₁ = (κ + 1)s`.
    Cubic { kappa: f64 },
    /// Ascending power coefficients of `f₀` and `f₁`.
    Polynomial { f0: Vec<f64>, f1: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingEntry {
    pub time_law: TimeLawEntry,
    /// Leading coefficients of the spatial profile `φ`.
    pub profile: Vec<f64>,
}

impl Default for ForcingEntry {
    fn default() -> Self {
        Self {
            time_law: TimeLawEntry::Cosine {
                amplitude: 1.0,
                omega: 1.0,
            },
            profile: vec![0.05, 0.05],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeLawEntry {
    Zero,
    Constant { amplitude: f64 },
    Cosine { amplitude: f64, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Rk4,
    Imex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub scheme: SchemeName,
    pub theta: f64,
    pub dt_cap: f64,
    pub dt: f64,
    pub seed: Option<u64>,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            scheme: SchemeName::Rk4,
            theta: 1.0,
            dt_cap: DEFAULT_IMEX_DT_CAP,
            dt: 0.01,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateSection {
    pub window: [f64; 2],
    pub state_range: [f64; 2],
    pub resolution: usize,
}

impl Default for CertificateSection {
    fn default() -> Self {
        Self {
            window: [-40.0, 40.0],
            state_range: [-50.0, 50.0],
            resolution: 4001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Evaluation time of pullback experiments.
    pub t: f64,
    /// Interval of forward runs (`simulate`, `energy-audit`).
    pub t_from: f64,
    pub t_to: f64,
    /// Leading coefficients of the initial datum of single runs.
    pub u0: Vec<f64>,
    /// Run length for `absorb` decay checks and `perturb`.
    pub tau: f64,
    /// Increasing run lengths for families and attractor sampling.
    pub taus: Vec<f64>,
    /// Decreasing perturbation strengths.
    pub xis: Vec<f64>,
    pub ensemble_size: usize,
    pub radii: Vec<f64>,
    pub low_modes: usize,
    /// Convergence tolerance of the attractor trace.
    pub attractor_tol: f64,
    /// Relative energy residual tolerated by `energy-audit`.
    pub energy_tol: f64,
    /// Regularity exponent for `split`; the certificate's α when absent.
    pub alpha: Option<f64>,
    pub slope_band: [f64; 2],
    /// Largest admissible final distance relative to the unperturbed cloud diameter.
    pub semicontinuity_ratio: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            t: 0.0,
            t_from: 0.0,
            t_to: 1.0,
            u0: vec![1.0, 0.5, -0.3, 0.2],
            tau: 20.0,
            taus: vec![10.0, 20.0, 30.0, 40.0],
            xis: vec![1e-1, 1e-2, 1e-3, 1e-4],
            ensemble_size: 64,
            radii: vec![0.1, 1.0, 10.0],
            low_modes: 4,
            attractor_tol: 1e-6,
            energy_tol: 1e-6,
            alpha: None,
            slope_band: [0.9, 1.1],
            semicontinuity_ratio: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Range checks that do not need the model to be built.
    pub fn check(&self) -> Result<(), CliError> {
        let n = &self.numerics;
        if !(n.dt > 0.0 && n.dt.is_finite()) {
            return Err(bad(format!("numerics.dt = {} must be positive", n.dt)));
        }
        if !(0.0..=1.0).contains(&n.theta) {
            return Err(bad(format!("numerics.theta = {} must lie in [0, 1]", n.theta)));
        }
        let m = &self.model;
        if m.extents.is_empty() || m.extents.len() > 3 || m.extents.len() != m.modes.len() {
            return Err(bad("model.extents and model.modes need the same length, 1 to 3"));
        }
        let e = &self.experiment;
        if e.t_to < e.t_from {
            return Err(bad("experiment.t_to must not precede experiment.t_from"));
        }
        if e.tau.is_nan() || e.tau < 0.0 {
            return Err(bad("experiment.tau must be nonnegative"));
        }
        if e.taus.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("experiment.taus must be strictly increasing"));
        }
        if e.xis.windows(2).any(|w| w[0] <= w[1]) {
            return Err(bad("experiment.xis must be strictly decreasing"));
        }
        if e.slope_band[0] > e.slope_band[1] {
            return Err(bad("experiment.slope_band must be [low, high]"));
        }
        if self.output.formats.is_empty() {
            return Err(bad("output.formats is empty"));
        }
        Ok(())
    }

    pub fn scheme(&self) -> Scheme {
        match self.numerics.scheme {
            SchemeName::Rk4 => Scheme::Rk4,
            SchemeName::Imex => Scheme::ImexTheta {
                theta: self.numerics.theta,
                dt_cap: self.numerics.dt_cap,
            },
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.numerics
            .seed
            .ok_or_else(|| bad("this experiment draws an ensemble and needs numerics.seed or --seed"))
    }

    pub fn request(&self) -> CertificateRequest {
        let c = &self.certificate;
        CertificateRequest::new((c.window[0], c.window[1]), (c.state_range[0], c.state_range[1]))
            .with_resolution(c.resolution)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    pub fn build_model(&self) -> Result<ModelConfig, CliError> {
        let m = &self.model;
        let kind = if m.extents.len() == 1 {
            DomainKind::Interval
        } else {
            DomainKind::Box
        };
        let spectrum = build_spectrum(Domain::new(kind, m.extents.clone())?, &m.modes)?;
        let leading = |c: &[f64], what: &str| {
            if c.len() > spectrum.len() {
                return Err(bad(format!("{what} has more coefficients than modes")));
            }
            Ok(SpectralField::from_leading(spectrum.clone(), c)?)
        };
        let epsilon = EpsilonSchedule::new(match m.epsilon {
            EpsilonEntry::Constant { eps0 } => EpsilonLaw::Constant { eps0 },
            EpsilonEntry::Logistic { eps0 } => EpsilonLaw::Logistic { eps0 },
            EpsilonEntry::Quadratic { c0, c1, c2 } => EpsilonLaw::Quadratic { c0, c1, c2 },
        })?;
        let diffusion = match m.diffusion {
            DiffusionEntry::Constant { value } => DiffusionLaw::constant(value)?,
            DiffusionEntry::BoundedRational { lower, upper } => DiffusionLaw::bounded_rational(lower, upper)?,
            DiffusionEntry::Affine { c0, c1, lower, upper } => DiffusionLaw::affine(c0, c1, lower, upper),
        };
        let nonlinearity = match &m.nonlinearity {
            NonlinearityEntry::Zero => Nonlinearity::zero(),
            NonlinearityEntry::Cubic { kappa } => Nonlinearity::cubic(*kappa)?,
            NonlinearityEntry::Polynomial { f0, f1 } => {
                Nonlinearity::from_parts(Polynomial::new(f0.clone())?, Polynomial::new(f1.clone())?)
            }
        };
        let law = match m.forcing.time_law {
            TimeLawEntry::Zero => TimeLaw::Zero,
            TimeLawEntry::Constant { amplitude } => TimeLaw::Constant { amplitude },
            TimeLawEntry::Cosine { amplitude, omega } => TimeLaw::Cosine { amplitude, omega },
        };
        let forcing = Forcing::new(leading(&m.forcing.profile, "model.forcing.profile")?, law, m.xi)?;
        let kernel = WeightKernel::new(leading(&m.kernel, "model.kernel")?)?;
        Ok(ModelConfig::new(
            spectrum,
            epsilon,
            diffusion,
            kernel,
            nonlinearity,
            forcing,
        )?)
    }

    pub fn initial_datum(&self, model: &ModelConfig) -> Result<SpectralField, CliError> {
        if self.experiment.u0.len() > model.spectrum().len() {
            return Err(bad("experiment.u0 has more coefficients than modes"));
        }
        Ok(SpectralField::from_leading(model.spectrum().clone(), &self.experiment.u0)?)
    }
}
