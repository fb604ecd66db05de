use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Temporal amplitude `b(t)` of a separable forcing `h(x, t) = b(t) φ(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum TimeLaw {
    Zero,
    Constant { amplitude: f64 },
    /// `b(t) = amplitude · cos(ω t)`.
    Cosine { amplitude: f64, omega: f64 },
}

impl TimeLaw {
    pub fn b(&self, t: f64) -> f64 {
        match *self {
            TimeLaw::Zero => 0.0,
            TimeLaw::Constant { amplitude } => amplitude,
            TimeLaw::Cosine { amplitude, omega } => amplitude * (omega * t).cos(),
        }
    }
}

/// External force `ξ h(x, t)` with `h = b(t) φ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    profile: SpectralField,
    law: TimeLaw,
    xi: f64,
}

impl Forcing {
    pub fn new(profile: SpectralField, law: TimeLaw, xi: f64) -> Result<Self> {
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(Error::invalid(format!("ξ = {xi} must be nonnegative")));
        }
        if !profile.is_finite() {
            return Err(Error::InvalidState("forcing profile is not finite".into()));
        }
        if let TimeLaw::Cosine { omega, .. } = law {
            if omega == 0.0 || !omega.is_finite() {
                return Err(Error::invalid("cosine forcing needs a nonzero finite frequency"));
            }
        }
        Ok(Self { profile, law, xi })
    }

    pub fn none(spectrum: std::sync::Arc<crate::spectral::Spectrum>) -> Self {
        Self {
            profile: SpectralField::zeros(spectrum),
            law: TimeLaw::Zero,
            xi: 0.0,
        }
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        Self::new(self.profile.clone(), self.law, xi)
    }

    pub fn profile(&self) -> &SpectralField {
        &self.profile
    }

    pub fn law(&self) -> TimeLaw {
        self.law
    }

    /// True when `h ≡ 0`, so that `ξ` has no effect.
    pub fn vanishes(&self) -> bool {
        self.profile.is_zero() || matches!(self.law, TimeLaw::Zero)
    }

    pub fn b(&self, t: f64) -> f64 {
        self.law.b(t)
    }

    /// `‖h(·, t)‖²`.
    pub fn norm_sq(&self, t: f64) -> f64 {
        self.b(t).powi(2) * self.profile.l2_sq()
    }

    /// Coefficients of `h(·, t)` (without the factor `ξ`).
    pub fn h_at(&self, t: f64) -> SpectralField {
        self.profile.scaled(self.b(t))
    }

    /// Discounted history `e^{−σt} ∫_{−∞}^{t} e^{σs} ‖h(s)‖² ds`, in closed form.
    pub fn discounted_history(&self, sigma: f64, t: f64) -> Result<f64> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::NoCertificate {
                bound: format!("history weight σ = {sigma} must be positive"),
            });
        }
        let phi = self.profile.l2_sq();
        Ok(match self.law {
            TimeLaw::Zero => 0.0,
            TimeLaw::Constant { amplitude } => amplitude * amplitude * phi / sigma,
            TimeLaw::Cosine { amplitude, omega } => {
                // cos² = (1 + cos 2ωs)/2 and ∫_{−∞}^{t} e^{σ(s−t)} cos(2ωs) ds
                //   = (σ cos 2ωt + 2ω sin 2ωt)/(σ² + 4ω²).
                let w = 2.0 * omega;
                let osc = (sigma * (w * t).cos() + w * (w * t).sin()) / (sigma * sigma + w * w);
                amplitude * amplitude * phi * 0.5 * (1.0 / sigma + osc)
            }
        })
    }

    /// `∫_{−∞}^{t} e^{σs} ‖h(s)‖² ds`; finite for every catalog law and σ > 0.
    pub fn history_integral(&self, sigma: f64, t: f64) -> Result<f64> {
        let value = (sigma * t).exp() * self.discounted_history(sigma, t)?;
        if !value.is_finite() {
            return Err(Error::NoCertificate {
                bound: format!("weighted forcing history diverges at t = {t}"),
            });
        }
        Ok(value)
    }

    /// `∫_a^b ‖h(s)‖² ds`, in closed form.
    pub fn window_integral(&self, a: f64, b: f64) -> f64 {
        let phi = self.profile.l2_sq();
        match self.law {
            TimeLaw::Zero => 0.0,
            TimeLaw::Constant { amplitude } => amplitude * amplitude * phi * (b - a),
            TimeLaw::Cosine { amplitude, omega } => {
                let w = 2.0 * omega;
                amplitude * amplitude * phi * 0.5 * ((b - a) + ((w * b).sin() - (w * a).sin()) / w)
            }
        }
    }

    /// Truncated numeric value of the discounted history, cut where the weight
    /// drops below `1e−16`. Independent of the closed forms above.
    pub fn discounted_history_numeric(&self, sigma: f64, t: f64) -> f64 {
        let span = 16.0 * std::f64::consts::LN_10 / sigma;
        let panels = ((span * 8.0).ceil() as usize).max(64);
        let h = span / panels as f64;
        let g = |s: f64| (sigma * (s - t)).exp() * self.norm_sq(s);
        gauss_legendre_5(g, t - span, panels, h)
    }
}

fn gauss_legendre_5(g: impl Fn(f64) -> f64, start: f64, panels: usize, h: f64) -> f64 {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    (0..panels)
        .map(|p| {
            let mid = start + (p as f64 + 0.5) * h;
            X.iter()
                .zip(W)
                .map(|(x, w)| w * g(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_spectrum, Domain};
    use std::f64::consts::PI;

    fn profile() -> SpectralField {
        let s = build_spectrum(Domain::interval(PI).unwrap(), &[4]).unwrap();
        SpectralField::from_leading(s, &[0.3, -0.2]).unwrap()
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for law in [
            TimeLaw::Constant { amplitude: 0.8 },
            TimeLaw::Cosine { amplitude: 1.0, omega: 1.3 },
        ] {
            let h = Forcing::new(profile(), law, 0.1).unwrap();
            for (sigma, t) in [(0.3, 0.0), (1.1, -2.5), (0.05, 4.0)] {
                let exact = h.discounted_history(sigma, t).unwrap();
                let numeric = h.discounted_history_numeric(sigma, t);
                assert!(
                    (exact - numeric).abs() <= 1e-9 * exact.abs().max(1.0),
                    "{law:?} σ={sigma} t={t}: {exact} vs {numeric}"
                );
            }
            let (a, b) = (-1.7, 0.4);
            let n = 4000;
            let dx = (b - a) / n as f64;
            let mid: f64 = (0..n).map(|i| h.norm_sq(a + (i as f64 + 0.5) * dx) * dx).sum();
            assert!((h.window_integral(a, b) - mid).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_history_is_h0_over_sigma() {
        let h = Forcing::new(profile(), TimeLaw::Constant { amplitude: 1.0 }, 0.5).unwrap();
        let h0 = h.norm_sq(0.0);
        assert!((h.discounted_history(0.25, 3.0).unwrap() - h0 / 0.25).abs() < 1e-14);
        assert!(h.discounted_history(0.0, 0.0).is_err());
    }
}
