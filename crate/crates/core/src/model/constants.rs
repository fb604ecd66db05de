use serde::Serialize;

use super::epsilon::sample_points;
use super::nonlinearity::Polynomial;
use super::validate::ScanSettings;
use super::{Forcing, ModelConfig};
use crate::error::{Error, Result};

/// Inputs of [`estimate_constants`]. The fractions pick a point inside each
/// admissible open interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateRequest {
    pub window: (f64, f64),
    pub state_range: (f64, f64),
    pub scan_resolution: usize,
    /// `η = eta_fraction · mλ₁`.
    pub eta_fraction: f64,
    /// `η̃ = eta_tilde_fraction · ¾mλ₁`.
    pub eta_tilde_fraction: f64,
    /// `σ = sigma_fraction · sup(admissible σ)`.
    pub sigma_fraction: f64,
    /// `α = alpha_fraction · min{1, (4 − (N−2)p)/2}`.
    pub alpha_fraction: f64,
}

impl CertificateRequest {
    pub fn new(window: (f64, f64), state_range: (f64, f64)) -> Self {
        Self {
            window,
            state_range,
            scan_resolution: 4001,
            eta_fraction: 0.5,
            eta_tilde_fraction: 0.5,
            sigma_fraction: 0.9,
            alpha_fraction: 0.5,
        }
    }

    pub fn with_resolution(mut self, n: usize) -> Self {
        self.scan_resolution = n;
        self
    }

    fn validate(&self) -> Result<ScanSettings> {
        for (name, v) in [
            ("eta_fraction", self.eta_fraction),
            ("eta_tilde_fraction", self.eta_tilde_fraction),
            ("sigma_fraction", self.sigma_fraction),
            ("alpha_fraction", self.alpha_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        ScanSettings::new(self.window, self.state_range)?.with_resolution(self.scan_resolution)
    }
}

/// How one constant was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub name: &'static str,
    pub value: f64,
    pub rule: String,
}

/// Admissible constants for one model and one window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsCertificate {
    pub request: CertificateRequest,
    pub xi: f64,
    pub lambda1: f64,
    pub volume: f64,
    pub dimension: usize,
    pub m: f64,
    pub big_m: f64,
    pub p: f64,
    pub eta: f64,
    pub eta_tilde: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub sigma: f64,
    pub delta1: f64,
    pub delta: f64,
    pub alpha: f64,
    /// Infimum over the window of the energy dissipation rate.
    pub rate_inf: f64,
    pub sigma_sup: f64,
    pub delta_sup: f64,
    pub alpha_sup: f64,
    pub eps_max: f64,
    /// Points where the two sector suprema were attained.
    pub c1_argmax: f64,
    pub c0_argmax: f64,
    pub provenance: Vec<Provenance>,
}

impl ConstantsCertificate {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.provenance.iter().find(|p| p.name == name).map(|p| p.value)
    }
}

/// Supremum of `q` over `[a, b]` extended to contain every critical point,
/// by grid scan plus golden-section refinement. Errors when `q` is unbounded above.
pub(crate) fn polynomial_sup(
    q: &Polynomial,
    range: (f64, f64),
    resolution: usize,
    refine: bool,
) -> Result<(f64, f64)> {
    let d = q.degree();
    if q.is_zero() {
        return Ok((0.0, 0.0));
    }
    if d > 0 && (d % 2 == 1 || q.leading() > 0.0) {
        return Err(Error::NoCertificate {
            bound: "sector excess f(s)s − cs² is unbounded above".into(),
        });
    }
    let dq = q.derivative();
    let cauchy = if dq.degree() == 0 {
        0.0
    } else {
        let lead = dq.leading();
        1.0 + dq.coeffs()[..dq.degree()]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max)
    };
    let (a, b) = (range.0.min(-cauchy), range.1.max(cauchy));
    let grid: Vec<f64> = sample_points(a, b, resolution).collect();
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &s) in grid.iter().enumerate() {
        let v = q.eval(s);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut arg = grid[best_i];
    if refine {
        let lo = grid[best_i.saturating_sub(1)];
        let hi = grid[(best_i + 1).min(grid.len() - 1)];
        let (s, v) = golden_max(|s| q.eval(s), lo, hi);
        if v > best {
            best = v;
            arg = s;
        }
    }
    let at_zero = q.eval(0.0);
    if at_zero > best {
        best = at_zero;
        arg = 0.0;
    }
    Ok((best, arg))
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Energy dissipation rate at time `t`: the largest `r` such that the ledger
/// identity yields `d/dt ‖u‖²_{H_t} + r‖u‖²_{H_t} ≤ 2C₁ + (ξ/η)‖h‖²`.
pub(crate) fn dissipation_rate(m: f64, lambda1: f64, eta: f64, xi: f64, eps: f64, eps_prime: f64) -> f64 {
    let dep = eps_prime.abs();
    let poincare = (dep * lambda1 + (2.0 - xi) * eta) / (1.0 + eps * lambda1);
    let gradient = if eps > 0.0 { (2.0 * m + dep) / eps } else { f64::INFINITY };
    poincare.min(gradient)
}

pub fn estimate_constants(config: &ModelConfig, request: &CertificateRequest) -> Result<ConstantsCertificate> {
    let scan = request.validate()?;
    let spectrum = config.spectrum();
    let lambda1 = spectrum.lambda1();
    let volume = spectrum.domain().volume();
    let dimension = spectrum.domain().dimension();
    let m = config.diffusion().lower();
    let big_m = config.diffusion().upper();
    let xi = config.xi();
    let f = config.nonlinearity();
    let p = f.growth_exponent();
    let eps = config.epsilon();

    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::NoCertificate {
            bound: format!("diffusion lower bound m = {m} must be positive"),
        });
    }
    if xi >= 1.0 {
        return Err(Error::NoCertificate {
            bound: format!("ξ = {xi} must be below 1"),
        });
    }

    let mut prov = Vec::new();
    let ml = m * lambda1;

    let eta = request.eta_fraction * ml;
    prov.push(Provenance {
        name: "eta",
        value: eta,
        rule: format!("{} · mλ₁", request.eta_fraction),
    });
    let eta_tilde = request.eta_tilde_fraction * 0.75 * ml;
    prov.push(Provenance {
        name: "eta_tilde",
        value: eta_tilde,
        rule: format!("{} · ¾mλ₁", request.eta_tilde_fraction),
    });

    let res = request.scan_resolution;
    let (s1, arg1) = polynomial_sup(&f.f_poly().sector_excess(ml - eta), request.state_range, res, true)?;
    let c1 = volume * s1.max(0.0) * (1.0 + 1e-12);
    prov.push(Provenance {
        name: "C1",
        value: c1,
        rule: format!("|Ω| · max(0, sup_s f(s)s − (mλ₁ − η)s²), attained at s = {arg1}"),
    });
    let (s0, arg0) = polynomial_sup(
        &f.f_poly().sector_excess(0.75 * ml - eta_tilde),
        request.state_range,
        res,
        true,
    )?;
    let c0 = volume * s0.max(0.0) * (1.0 + 1e-12);
    prov.push(Provenance {
        name: "C0",
        value: c0,
        rule: format!("|Ω| · max(0, sup_s f(s)s − (¾mλ₁ − η̃)s²), attained at s = {arg0}"),
    });

    let mut rate_inf = f64::INFINITY;
    let mut eps_max: f64 = 0.0;
    for t in scan.times() {
        let e = eps.eps(t);
        eps_max = eps_max.max(e);
        rate_inf = rate_inf.min(dissipation_rate(m, lambda1, eta, xi, e, eps.eps_prime(t)));
    }
    prov.push(Provenance {
        name: "rate_inf",
        value: rate_inf,
        rule: "inf over window of min{(|ε′|λ₁ + (2 − ξ)η)/(1 + ελ₁), (2m + |ε′|)/ε}".into(),
    });

    let numerator = 16.0 * m - 2.0 - xi;
    if numerator <= 0.0 {
        return Err(Error::NoCertificate {
            bound: format!("16m − 2 − ξ = {numerator} leaves no admissible δ"),
        });
    }
    let delta_sup = numerator / (8.0 * (1.0 / lambda1 + eps_max));
    prov.push(Provenance {
        name: "delta_sup",
        value: delta_sup,
        rule: "inf over window of (16m − 2 − ξ)/(8(λ₁⁻¹ + ε(t)))".into(),
    });

    let sigma_sup = ml
        .min(rate_inf)
        .min(lambda1 / (1.0 + lambda1))
        .min(delta_sup / (p + 1.0));
    if !(sigma_sup > 0.0 && sigma_sup.is_finite()) {
        return Err(Error::NoCertificate {
            bound: format!("admissible σ range is empty (sup = {sigma_sup})"),
        });
    }
    let sigma = request.sigma_fraction * sigma_sup;
    prov.push(Provenance {
        name: "sigma",
        value: sigma,
        rule: format!(
            "{} · min{{mλ₁, dissipation rate, λ₁/(1 + λ₁), δ_sup/(p + 1)}}",
            request.sigma_fraction
        ),
    });
    let delta1 = 0.5 * (sigma + rate_inf);
    prov.push(Provenance {
        name: "delta1",
        value: delta1,
        rule: "midpoint of (σ, dissipation rate)".into(),
    });
    let delta = 0.5 * ((p + 1.0) * sigma + delta_sup);
    prov.push(Provenance {
        name: "delta",
        value: delta,
        rule: "midpoint of ((p + 1)σ, δ_sup)".into(),
    });

    let alpha_sup = 1f64.min((4.0 - (dimension as f64 - 2.0) * p) / 2.0);
    if alpha_sup <= 0.0 {
        return Err(Error::NoCertificate {
            bound: format!("α range (0, {alpha_sup}) is empty"),
        });
    }
    let alpha = request.alpha_fraction * alpha_sup;
    prov.push(Provenance {
        name: "alpha",
        value: alpha,
        rule: format!("{} · min{{1, (4 − (N − 2)p)/2}}", request.alpha_fraction),
    });

    let c2 = (2.0 / eta).max(4.0 * c1 / sigma);
    prov.push(Provenance {
        name: "C2",
        value: c2,
        rule: "max{2/η, 4C₁/σ}".into(),
    });

    let witness = config.forcing().discounted_history(sigma, request.window.0)?;
    if !witness.is_finite() {
        return Err(Error::NoCertificate {
            bound: "forcing history integral diverges".into(),
        });
    }

    Ok(ConstantsCertificate {
        request: *request,
        xi,
        lambda1,
        volume,
        dimension,
        m,
        big_m,
        p,
        eta,
        eta_tilde,
        c0,
        c1,
        c2,
        sigma,
        delta1,
        delta,
        alpha,
        rate_inf,
        sigma_sup,
        delta_sup,
        alpha_sup,
        eps_max,
        c1_argmax: arg1,
        c0_argmax: arg0,
        provenance: prov,
    })
}

/// Re-checks every certificate inequality on a scan twice as fine as the one
/// used to build it; returns the names of violated inequalities.
pub fn verify_certificate(config: &ModelConfig, cert: &ConstantsCertificate) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let scan = ScanSettings::new(cert.request.window, cert.request.state_range)?
        .with_resolution(2 * cert.request.scan_resolution)?;
    let f = config.nonlinearity();
    let ml = cert.m * cert.lambda1;
    for s in scan.states() {
        let fs = f.f(s) * s;
        if fs > (ml - cert.eta) * s * s + cert.c1 / cert.volume + 1e-12 * fs.abs().max(1.0) {
            bad.push(format!("f(s)s ≤ (mλ₁ − η)s² + C₁/|Ω| fails at s = {s}"));
            break;
        }
    }
    for s in scan.states() {
        let fs = 2.0 * f.f(s) * s;
        let rhs = (1.5 * ml - 2.0 * cert.eta_tilde) * s * s + 2.0 * cert.c0 / cert.volume;
        if fs > rhs + 1e-12 * fs.abs().max(1.0) {
            bad.push(format!("2f(s)s ≤ (3/2 mλ₁ − 2η̃)s² + 2C₀/|Ω| fails at s = {s}"));
            break;
        }
    }
    let eps = config.epsilon();
    for t in scan.times() {
        let e = eps.eps(t);
        let rate = dissipation_rate(cert.m, cert.lambda1, cert.eta, cert.xi, e, eps.eps_prime(t));
        if !(0.0 < cert.sigma && cert.sigma < cert.delta1 && cert.delta1 < rate) {
            bad.push(format!("0 < σ < δ₁ < dissipation rate fails at t = {t}"));
            break;
        }
        let dcap = (16.0 * cert.m - 2.0 - cert.xi) / (8.0 * (1.0 / cert.lambda1 + e));
        if !((cert.p + 1.0) * cert.sigma < cert.delta && cert.delta < dcap) {
            bad.push(format!("(p + 1)σ < δ < (16m − 2 − ξ)/(8(λ₁⁻¹ + ε)) fails at t = {t}"));
            break;
        }
    }
    let lam = cert.lambda1;
    if !(cert.sigma < ml && cert.sigma < lam / (1.0 + lam)) {
        bad.push("σ < min{mλ₁, λ₁/(1 + λ₁)} fails".into());
    }
    if !(cert.eta > 0.0 && cert.eta < ml) {
        bad.push("η ∈ (0, mλ₁) fails".into());
    }
    if !(cert.eta_tilde > 0.0 && cert.eta_tilde < 0.75 * ml) {
        bad.push("η̃ ∈ (0, ¾mλ₁) fails".into());
    }
    if !(cert.alpha > 0.0 && cert.alpha < cert.alpha_sup) {
        bad.push("α ∈ (0, min{1, (4 − (N − 2)p)/2}) fails".into());
    }
    if (cert.c2 - (2.0 / cert.eta).max(4.0 * cert.c1 / cert.sigma)).abs() > 1e-12 * cert.c2 {
        bad.push("C₂ = max{2/η, 4C₁/σ} fails".into());
    }
    Ok(bad)
}

/// `ρ_ξ(t) = C₂(ξ e^{−σt} ∫_{−∞}^t e^{σs}‖h(s)‖² ds + 1)`.
pub fn absorbing_radius(cert: &ConstantsCertificate, forcing: &Forcing, t: f64) -> Result<f64> {
    let hist = forcing.discounted_history(cert.sigma, t)?;
    let rho = cert.c2 * (forcing.xi() * hist + 1.0);
    if !rho.is_finite() {
        return Err(Error::NoCertificate {
            bound: format!("forcing history diverges at t = {t}"),
        });
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiffusionLaw, Nonlinearity, TimeLaw};
    use std::f64::consts::PI;

    fn req() -> CertificateRequest {
        CertificateRequest::new((-20.0, 20.0), (-50.0, 50.0))
    }

    #[test]
    fn zero_nonlinearity_has_zero_c1() {
        let c = ModelConfig::linear_model(0.5, 8).unwrap();
        let cert = estimate_constants(&c, &req()).unwrap();
        assert_eq!(cert.c1, 0.0);
        assert_eq!(cert.c0, 0.0);
        assert_eq!(cert.c2, 2.0 / cert.eta);
        assert!(verify_certificate(&c, &cert).unwrap().is_empty());
    }

    #[test]
    fn cubic_c1_matches_calculus() {
        // β = κ − mλ₁ + η; sup βs² − s⁴ = β²/4.
        for kappa in [0.2, 3.0, 7.5] {
            let c = ModelConfig::default_model(8)
                .unwrap()
                .with_nonlinearity(Nonlinearity::cubic(kappa).unwrap());
            let cert = estimate_constants(&c, &req()).unwrap();
            let beta: f64 = kappa - cert.m * cert.lambda1 + cert.eta;
            let expect = if beta > 0.0 { PI * beta * beta / 4.0 } else { 0.0 };
            assert!((cert.c1 - expect).abs() <= 1e-10 * expect.max(1.0), "κ={kappa}");
            assert!(verify_certificate(&c, &cert).unwrap().is_empty());
        }
    }

    #[test]
    fn doubling_resolution_barely_moves_c1() {
        let c = ModelConfig::default_model(8).unwrap();
        let a = estimate_constants(&c, &req()).unwrap().c1;
        let b = estimate_constants(&c, &req().with_resolution(8001)).unwrap().c1;
        assert!((a - b).abs() <= 1e-6 * a);
    }

    #[test]
    fn small_m_has_no_delta_range() {
        let c = ModelConfig::default_model(8)
            .unwrap()
            .with_diffusion(DiffusionLaw::bounded_rational(0.1, 2.0).unwrap());
        match estimate_constants(&c, &req()) {
            Err(Error::NoCertificate { bound }) => assert!(bound.contains("16m")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_sector_is_rejected() {
        let f = Nonlinearity::from_parts(
            Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap(),
            Polynomial::zero(),
        );
        let c = ModelConfig::default_model(4).unwrap().with_nonlinearity(f);
        assert!(matches!(estimate_constants(&c, &req()), Err(Error::NoCertificate { .. })));
    }

    #[test]
    fn absorbing_radius_examples() {
        let base = ModelConfig::default_model(8).unwrap();
        let cert = estimate_constants(&base.with_xi(0.0).unwrap(), &req()).unwrap();
        let f0 = base.forcing().with_xi(0.0).unwrap();
        assert_eq!(absorbing_radius(&cert, &f0, 3.0).unwrap(), cert.c2);

        let profile = base.forcing().profile().clone();
        let h0 = profile.l2_sq();
        let constant = Forcing::new(profile, TimeLaw::Constant { amplitude: 1.0 }, 0.3).unwrap();
        let rho = absorbing_radius(&cert, &constant, -4.0).unwrap();
        let expect = cert.c2 * (0.3 * h0 / cert.sigma + 1.0);
        assert!((rho - expect).abs() < 1e-12 * expect);
        assert_eq!(rho, absorbing_radius(&cert, &constant, 9.0).unwrap());

        let mut last = 0.0;
        for xi in [0.0, 0.1, 0.5, 0.9] {
            let r = absorbing_radius(&cert, &base.forcing().with_xi(xi).unwrap(), 1.0).unwrap();
            assert!(r >= last);
            last = r;
        }
    }
}
