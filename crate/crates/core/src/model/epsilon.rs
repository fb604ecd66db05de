use serde::Serialize;

use crate::error::{Error, Result};

/// Catalog of pseudo-parabolic coefficient laws `ε(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum EpsilonLaw {
    /// `ε(t) = ε₀`.
    Constant { eps0: f64 },
    /// `ε(t) = ε₀ / (1 + e^t)`: decreasing, C¹, vanishing at +∞.
    Logistic { eps0: f64 },
    /// `ε(t) = c₀ + c₁ t + c₂ t²`; only useful as a counterexample.
    Quadratic { c0: f64, c1: f64, c2: f64 },
}

/// The coefficient `ε(t)` with its derivative and the global bound
/// `L ≥ sup (|ε| + |ε′|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonSchedule {
    law: EpsilonLaw,
    sup_bound: f64,
}

impl EpsilonSchedule {
    pub fn new(law: EpsilonLaw) -> Result<Self> {
        let sup_bound = match law {
            EpsilonLaw::Constant { eps0 } => {
                if !(eps0 >= 0.0 && eps0.is_finite()) {
                    return Err(Error::invalid("ε₀ must be nonnegative"));
                }
                eps0
            }
            EpsilonLaw::Logistic { eps0 } => {
                if !(eps0 > 0.0 && eps0.is_finite()) {
                    return Err(Error::invalid("ε₀ must be positive"));
                }
                // |ε| ≤ ε₀ and |ε′| ≤ ε₀/4 (attained at t = 0).
                eps0 * 1.25
            }
            EpsilonLaw::Quadratic { c0, c1, c2 } => {
                if ![c0, c1, c2].iter().all(|c| c.is_finite()) {
                    return Err(Error::invalid("quadratic coefficients must be finite"));
                }
                if c1 == 0.0 && c2 == 0.0 {
                    c0.abs()
                } else {
                    f64::INFINITY
                }
            }
        };
        Ok(Self { law, sup_bound })
    }

    pub fn constant(eps0: f64) -> Result<Self> {
        Self::new(EpsilonLaw::Constant { eps0 })
    }

    pub fn logistic(eps0: f64) -> Result<Self> {
        Self::new(EpsilonLaw::Logistic { eps0 })
    }

    pub fn law(&self) -> EpsilonLaw {
        self.law
    }

    pub fn eps(&self, t: f64) -> f64 {
        match self.law {
            EpsilonLaw::Constant { eps0 } => eps0,
            EpsilonLaw::Logistic { eps0 } => {
                if t > 0.0 {
                    let e = (-t).exp();
                    eps0 * e / (1.0 + e)
                } else {
                    eps0 / (1.0 + t.exp())
                }
            }
            EpsilonLaw::Quadratic { c0, c1, c2 } => c0 + t * (c1 + t * c2),
        }
    }

    pub fn eps_prime(&self, t: f64) -> f64 {
        match self.law {
            EpsilonLaw::Constant { .. } => 0.0,
            EpsilonLaw::Logistic { eps0 } => {
                // −ε₀ e^t / (1 + e^t)², written in terms of e^{−|t|} to avoid overflow.
                let e = (-t.abs()).exp();
                -eps0 * e / (1.0 + e).powi(2)
            }
            EpsilonLaw::Quadratic { c1, c2, .. } => c1 + 2.0 * c2 * t,
        }
    }

    /// `L` with `sup_t (|ε(t)| + |ε′(t)|) ≤ L`; infinite when no global bound exists.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }
}

pub(crate) fn sample_points(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| {
        if i + 1 == n {
            b
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_derivative_matches_finite_difference() {
        let e = EpsilonSchedule::logistic(0.5).unwrap();
        for t in [-30.0, -3.0, -0.2, 0.0, 0.7, 4.0, 40.0] {
            let h = 1e-5;
            let fd = (e.eps(t + h) - e.eps(t - h)) / (2.0 * h);
            assert!((fd - e.eps_prime(t)).abs() < 1e-9, "t = {t}");
            assert!(e.eps_prime(t) <= 0.0);
            assert!(e.eps(t).abs() + e.eps_prime(t).abs() <= e.sup_bound());
        }
        assert!(e.eps(800.0) >= 0.0 && e.eps(800.0) < 1e-300);
        assert_eq!(e.eps(-800.0), 0.5);
    }

    #[test]
    fn quadratic_is_unbounded() {
        let e = EpsilonSchedule::new(EpsilonLaw::Quadratic { c0: 1.0, c1: 0.0, c2: 1.0 }).unwrap();
        assert_eq!(e.eps_prime(1.0), 2.0);
        assert!(e.sup_bound().is_infinite());
    }

    #[test]
    fn rejects_negative_coefficient() {
        assert!(EpsilonSchedule::constant(-1.0).is_err());
        assert!(EpsilonSchedule::logistic(0.0).is_err());
    }
}
