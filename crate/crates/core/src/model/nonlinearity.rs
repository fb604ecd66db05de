use serde::Serialize;

use crate::error::{Error, Result};

/// Real polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial(Vec<f64>);

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("polynomial coefficients must be finite"));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Ok(Self(coeffs))
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    pub fn leading(&self) -> f64 {
        self.0.last().copied().unwrap_or(0.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let c = (0..n)
            .map(|i| self.0.get(i).unwrap_or(&0.0) + other.0.get(i).unwrap_or(&0.0))
            .collect();
        Self::new(c).expect("sum of finite coefficients")
    }

    /// `s · p(s) − c s²`, the integrand whose supremum defines the sector constants.
    pub(crate) fn sector_excess(&self, c: f64) -> Self {
        let mut out = vec![0.0; self.0.len().max(2) + 1];
        for (i, a) in self.0.iter().enumerate() {
            out[i + 1] += a;
        }
        out[2] -= c;
        Self::new(out).expect("finite")
    }

    pub(crate) fn derivative(&self) -> Self {
        let c = self
            .0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, a)| i as f64 * a)
            .collect();
        Self::new(c).expect("finite")
    }
}

/// `f = f₀ + f₁` with polynomial parts; `f₀` is the dissipative part that drives
/// the decaying component of the solution splitting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nonlinearity {
    f0: Polynomial,
    f1: Polynomial,
    f: Polynomial,
    growth_exponent: f64,
    growth_constant: f64,
}

impl Nonlinearity {
    pub fn from_parts(f0: Polynomial, f1: Polynomial) -> Self {
        let f = f0.add(&f1);
        let top = f.degree().max(f0.degree()).max(f1.degree());
        let growth_exponent = top.saturating_sub(1) as f64;
        let weighted = |p: &Polynomial| -> f64 {
            p.coeffs()
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| j as f64 * c.abs())
                .sum()
        };
        let abs_sum = |p: &Polynomial| -> f64 { p.coeffs().iter().map(|c| c.abs()).sum() };
        // |f(u) − f(v)| ≤ Σ j|c_j| max(|u|,|v|)^{j−1} |u − v| and each power is
        // bounded by |u|^p + |v|^p + 1; the growth bounds use Σ|c_j|.
        let growth_constant = weighted(&f)
            .max(abs_sum(&f0))
            .max(abs_sum(&f1))
            .max(f64::MIN_POSITIVE);
        Self {
            f0,
            f1,
            f,
            growth_exponent,
            growth_constant,
        }
    }

    /// `f(s) = κ s − s³` split as `f₀ = −s³ − s`, `f₁ = (κ + 1) s`.
    pub fn cubic(kappa: f64) -> Result<Self> {
        Ok(Self::from_parts(
            Polynomial::new(vec![0.0, -1.0, 0.0, -1.0])?,
            Polynomial::new(vec![0.0, kappa + 1.0])?,
        ))
    }

    pub fn zero() -> Self {
        Self::from_parts(Polynomial::zero(), Polynomial::zero())
    }

    pub fn f(&self, s: f64) -> f64 {
        self.f.eval(s)
    }

    pub fn f0(&self, s: f64) -> f64 {
        self.f0.eval(s)
    }

    pub fn f1(&self, s: f64) -> f64 {
        self.f1.eval(s)
    }

    pub fn f_poly(&self) -> &Polynomial {
        &self.f
    }

    pub fn f0_poly(&self) -> &Polynomial {
        &self.f0
    }

    pub fn f1_poly(&self) -> &Polynomial {
        &self.f1
    }

    /// Growth exponent `p` (degree of `f` minus one).
    pub fn growth_exponent(&self) -> f64 {
        self.growth_exponent
    }

    /// Constant `C_f` in the local Lipschitz and growth bounds.
    pub fn growth_constant(&self) -> f64 {
        self.growth_constant
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero() && self.f0.is_zero()
    }

    pub fn f1_is_zero(&self) -> bool {
        self.f1.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_split_sums_back() {
        let n = Nonlinearity::cubic(3.0).unwrap();
        for s in [-4.0, -0.5, 0.0, 1.2, 9.0] {
            assert!((n.f(s) - (3.0 * s - s * s * s)).abs() < 1e-12);
            assert!((n.f(s) - n.f0(s) - n.f1(s)).abs() < 1e-12);
        }
        assert_eq!(n.growth_exponent(), 2.0);
        assert_eq!(n.f_poly().coeffs(), &[0.0, 3.0, 0.0, -1.0]);
    }

    #[test]
    fn sector_excess_and_derivative() {
        let p = Polynomial::new(vec![0.0, 2.0, 0.0, -1.0]).unwrap();
        // s(2s − s³) − 0.5 s² = 1.5 s² − s⁴
        assert_eq!(p.sector_excess(0.5).coeffs(), &[0.0, 0.0, 1.5, 0.0, -1.0]);
        assert_eq!(p.derivative().coeffs(), &[2.0, 0.0, -3.0]);
        assert_eq!(Polynomial::zero().sector_excess(1.0).coeffs(), &[0.0, 0.0, -1.0]);
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = Polynomial::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.degree(), 0);
        assert!(Polynomial::new(vec![f64::NAN]).is_err());
    }
}
