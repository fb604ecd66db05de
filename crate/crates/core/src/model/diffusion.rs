use serde::Serialize;

use crate::error::{Error, Result};

/// Catalog of nonlocal diffusion coefficients `a(s)`, evaluated at `s = l(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DiffusionKind {
    /// `a ≡ value`.
    Constant { value: f64 },
    /// `a(s) = m + (M − m) / (1 + s²)`, bounded in `[m, M]`.
    BoundedRational,
    /// `a(s) = c₀ + c₁ s`; the declared bounds are claims checked by the validator.
    Affine { c0: f64, c1: f64 },
}

/// Diffusion law together with its declared bounds `m ≤ a ≤ M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionLaw {
    kind: DiffusionKind,
    lower: f64,
    upper: f64,
}

impl DiffusionLaw {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid("diffusion value must be finite"));
        }
        Ok(Self {
            kind: DiffusionKind::Constant { value },
            lower: value,
            upper: value,
        })
    }

    pub fn bounded_rational(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(Error::invalid("bounded diffusion needs finite m ≤ M"));
        }
        Ok(Self {
            kind: DiffusionKind::BoundedRational,
            lower,
            upper,
        })
    }

    /// Affine law with user-declared bounds; nothing is enforced here.
    pub fn affine(c0: f64, c1: f64, declared_lower: f64, declared_upper: f64) -> Self {
        Self {
            kind: DiffusionKind::Affine { c0, c1 },
            lower: declared_lower,
            upper: declared_upper,
        }
    }

    pub fn kind(&self) -> DiffusionKind {
        self.kind
    }

    pub fn a(&self, s: f64) -> f64 {
        match self.kind {
            DiffusionKind::Constant { value } => value,
            DiffusionKind::BoundedRational => {
                self.lower + (self.upper - self.lower) / (1.0 + s * s)
            }
            DiffusionKind::Affine { c0, c1 } => c0 + c1 * s,
        }
    }

    /// Declared lower bound `m`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Declared upper bound `M`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Lipschitz constant of `a` on `[−R, R]`.
    pub fn lipschitz(&self, radius: f64) -> f64 {
        match self.kind {
            DiffusionKind::Constant { .. } => 0.0,
            DiffusionKind::BoundedRational => {
                // |a′(s)| = (M − m)·2|s|/(1 + s²)², maximal at |s| = 1/√3.
                let peak = 1.0 / 3f64.sqrt();
                let s = radius.abs().min(peak);
                (self.upper - self.lower) * 2.0 * s / (1.0 + s * s).powi(2)
            }
            DiffusionKind::Affine { c1, .. } => c1.abs(),
        }
    }
}
