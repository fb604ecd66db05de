use serde::Serialize;

use super::epsilon::sample_points;
use super::ModelConfig;
use crate::error::{Error, Result};

/// Scan grid used by the validator and the constant estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSettings {
    pub window: (f64, f64),
    pub state_range: (f64, f64),
    pub resolution: usize,
    /// Time at which `ε` must have dropped below `vanish_tol`.
    pub far_time: f64,
    pub vanish_tol: f64,
}

impl ScanSettings {
    pub fn new(window: (f64, f64), state_range: (f64, f64)) -> Result<Self> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ok(window) {
            return Err(Error::invalid(format!("empty time window {window:?}")));
        }
        if !ok(state_range) {
            return Err(Error::invalid(format!("empty state range {state_range:?}")));
        }
        Ok(Self {
            window,
            state_range,
            resolution: 2001,
            far_time: window.1.max(0.0) + 100.0,
            vanish_tol: 1e-8,
        })
    }

    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        if resolution < 3 {
            return Err(Error::invalid("scan resolution must be at least 3"));
        }
        self.resolution = resolution;
        Ok(self)
    }

    pub(crate) fn times(&self) -> impl Iterator<Item = f64> {
        sample_points(self.window.0, self.window.1, self.resolution)
    }

    /// State samples ordered by distance from the center of the range, so the
    /// first failing sample is the one closest to the origin of the scan.
    pub(crate) fn states(&self) -> Vec<f64> {
        let (a, b) = self.state_range;
        let mut s: Vec<f64> = sample_points(a, b, self.resolution).collect();
        if a < 0.0 && b > 0.0 {
            s.push(0.0);
        }
        let c = if a < 0.0 && b > 0.0 { 0.0 } else { 0.5 * (a + b) };
        s.sort_by(|x, y| (x - c).abs().total_cmp(&(y - c).abs()).then(x.total_cmp(y)));
        s.dedup();
        s
    }

    pub(crate) fn radius(&self) -> f64 {
        self.state_range.0.abs().max(self.state_range.1.abs())
    }
}

/// Counterexample or extremal point of a check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    /// Scanned coordinate: a time, a state value, or the first of a pair.
    pub at: f64,
    /// Second coordinate for pairwise checks.
    pub other: Option<f64>,
    pub value: f64,
}

impl Witness {
    fn at(at: f64, value: f64) -> Self {
        Self { at, other: None, value }
    }

    fn pair(at: f64, other: f64, value: f64) -> Self {
        Self { at, other: Some(other), value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub key: &'static str,
    pub description: &'static str,
    pub passed: bool,
    /// Slack of the tightest sample; negative on failure.
    pub margin: f64,
    /// First failing sample, or the tightest one on success.
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub settings: ScanSettings,
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, key: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.key == key)
    }
}

/// Tracks the tightest sample and the first failure of a scalar scan.
struct Scan {
    margin: f64,
    tightest: Option<Witness>,
    first_fail: Option<Witness>,
}

impl Scan {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            tightest: None,
            first_fail: None,
        }
    }

    fn push(&mut self, slack: f64, w: Witness) {
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        if slack < self.margin || self.tightest.is_none() {
            self.margin = slack.min(self.margin);
            self.tightest = Some(w);
        }
        if slack < 0.0 && self.first_fail.is_none() {
            self.first_fail = Some(w);
        }
    }

    fn finish(self, key: &'static str, description: &'static str) -> AssumptionCheck {
        let passed = self.first_fail.is_none();
        AssumptionCheck {
            key,
            description,
            passed,
            margin: self.margin,
            witness: self.first_fail.or(self.tightest),
            note: None,
        }
    }
}

fn tol(x: f64) -> f64 {
    1e-12 * x.abs().max(1.0)
}

/// Runs every assumption check on the default 2001-point scan grid.
pub fn validate_assumptions(
    config: &ModelConfig,
    window: (f64, f64),
    state_range: (f64, f64),
) -> Result<ValidationReport> {
    validate_assumptions_with(config, &ScanSettings::new(window, state_range)?)
}

pub fn validate_assumptions_with(
    config: &ModelConfig,
    settings: &ScanSettings,
) -> Result<ValidationReport> {
    ScanSettings::new(settings.window, settings.state_range)?.with_resolution(settings.resolution)?;
    let checks = vec![
        epsilon_vanishes(config, settings),
        epsilon_nonnegative(config, settings),
        epsilon_decreasing(config, settings),
        epsilon_bounded(config, settings),
        diffusion_bounds(config, settings),
        diffusion_lipschitz(config, settings),
        kernel_finite(config),
        nonlinearity_split(config, settings),
        nonlinearity_lipschitz_growth(config, settings),
        nonlinearity_sector(config, settings),
        f0_growth(config, settings),
        f0_dissipation(config, settings),
        f1_growth(config, settings),
        growth_exponent(config),
        forcing_history(config, settings),
        xi_small(config),
    ];
    Ok(ValidationReport {
        settings: *settings,
        checks,
    })
}

fn epsilon_vanishes(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let e = c.epsilon().eps(s.far_time);
    let mut scan = Scan::new();
    scan.push(s.vanish_tol - e.abs(), Witness::at(s.far_time, e));
    scan.finish("epsilon_vanishes", "ε(t) → 0 as t → +∞")
}

fn epsilon_nonnegative(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let mut scan = Scan::new();
    for t in s.times() {
        let e = c.epsilon().eps(t);
        scan.push(e, Witness::at(t, e));
    }
    scan.finish("epsilon_nonnegative", "ε(t) ≥ 0 on the window")
}

fn epsilon_decreasing(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let mut scan = Scan::new();
    for t in s.times() {
        let d = c.epsilon().eps_prime(t);
        scan.push(-d, Witness::at(t, d));
    }
    scan.finish("epsilon_decreasing", "ε′(t) ≤ 0 on the window")
}

fn epsilon_bounded(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let l = c.epsilon().sup_bound();
    let mut scan = Scan::new();
    for t in s.times() {
        let v = c.epsilon().eps(t).abs() + c.epsilon().eps_prime(t).abs();
        let slack = if l.is_finite() { l - v + tol(l) } else { f64::NEG_INFINITY };
        scan.push(slack, Witness::at(t, v));
    }
    let mut out = scan.finish("epsilon_bounded", "|ε(t)| + |ε′(t)| ≤ L");
    if !l.is_finite() {
        out.note = Some("no finite global bound L".into());
    }
    out
}

fn diffusion_bounds(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let d = c.diffusion();
    let (m, big_m) = (d.lower(), d.upper());
    let mut scan = Scan::new();
    for x in s.states() {
        let a = d.a(x);
        let positive = if m > 0.0 { m } else { m - f64::MIN_POSITIVE };
        let slack = positive.min(a - m + tol(m)).min(big_m - a + tol(big_m));
        scan.push(slack, Witness::at(x, a));
    }
    scan.finish("diffusion_bounds", "0 < m ≤ a(s) ≤ M")
}

fn diffusion_lipschitz(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let d = c.diffusion();
    let lip = d.lipschitz(s.radius());
    let mut scan = Scan::new();
    for (x, y) in pairs(s) {
        let lhs = (d.a(x) - d.a(y)).abs();
        let rhs = lip * (x - y).abs();
        scan.push(rhs - lhs + tol(rhs), Witness::pair(x, y, lhs));
    }
    scan.finish("diffusion_lipschitz", "|a(s₁) − a(s₂)| ≤ L_a(R)|s₁ − s₂|")
}

/// Sample pairs: grid neighbours plus mirrored points.
fn pairs(s: &ScanSettings) -> Vec<(f64, f64)> {
    let grid: Vec<f64> = sample_points(s.state_range.0, s.state_range.1, s.resolution).collect();
    let n = grid.len();
    let mut out: Vec<(f64, f64)> = grid.windows(2).map(|w| (w[0], w[1])).collect();
    out.extend((0..n / 2).map(|i| (grid[i], grid[n - 1 - i])));
    out.extend((0..n).step_by(7).map(|i| (grid[i], grid[(i * 13 + 5) % n])));
    out.retain(|(x, y)| x != y);
    out
}

fn kernel_finite(c: &ModelConfig) -> AssumptionCheck {
    let norm = c.kernel().field().l2_sq().sqrt();
    let mut scan = Scan::new();
    let slack = if norm.is_finite() { 1.0 } else { -1.0 };
    scan.push(slack, Witness::at(0.0, norm));
    scan.finish("kernel_finite", "‖g‖ < ∞")
}

fn nonlinearity_split(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let f = c.nonlinearity();
    let mut scan = Scan::new();
    for x in s.states() {
        let r = f.f(x) - f.f0(x) - f.f1(x);
        let scale = f.f(x).abs() + f.f0(x).abs() + f.f1(x).abs();
        scan.push(tol(scale) * 1e2 - r.abs(), Witness::at(x, r));
    }
    scan.finish("nonlinearity_split", "f = f₀ + f₁")
}

fn nonlinearity_lipschitz_growth(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let f = c.nonlinearity();
    let (p, cf) = (f.growth_exponent(), f.growth_constant());
    let mut scan = Scan::new();
    for (x, y) in pairs(s) {
        let lhs = (f.f(x) - f.f(y)).abs();
        let rhs = cf * (x.abs().powf(p) + y.abs().powf(p) + 1.0) * (x - y).abs();
        scan.push(rhs - lhs + tol(rhs), Witness::pair(x, y, lhs));
    }
    scan.finish(
        "nonlinearity_lipschitz_growth",
        "|f(u) − f(v)| ≤ C(|u|^p + |v|^p + 1)|u − v|",
    )
}

/// `limsup_{|s|→∞} f(s)/s < λ₁`, decided from the leading coefficient; the
/// witness is `f(s)/s` at the edge of the scanned range.
fn nonlinearity_sector(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let f = c.nonlinearity().f_poly();
    let lambda1 = c.spectrum().lambda1();
    let limsup = match f.degree() {
        0 => 0.0,
        1 => f.coeffs()[1],
        d if d % 2 == 1 && f.leading() < 0.0 => f64::NEG_INFINITY,
        _ => f64::INFINITY,
    };
    let edge = if s.state_range.1.abs() >= s.state_range.0.abs() {
        s.state_range.1
    } else {
        s.state_range.0
    };
    let mut scan = Scan::new();
    let slack = if limsup == f64::NEG_INFINITY { lambda1 } else { lambda1 - limsup };
    scan.push(slack, Witness::at(edge, f.eval(edge) / edge));
    scan.finish("nonlinearity_sector", "limsup f(s)/s < λ₁")
}

fn f0_growth(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let f = c.nonlinearity();
    let (p, cf) = (f.growth_exponent(), f.growth_constant());
    let mut scan = Scan::new();
    for x in s.states() {
        let lhs = f.f0(x).abs();
        let rhs = cf * (x.abs().powf(p + 1.0) + x.abs());
        scan.push(rhs - lhs + tol(rhs), Witness::at(x, lhs));
    }
    scan.finish("f0_growth", "|f₀(u)| ≤ C(|u|^{p+1} + |u|)")
}

fn f1_growth(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let f = c.nonlinearity();
    let (p, cf) = (f.growth_exponent(), f.growth_constant());
    let mut scan = Scan::new();
    for x in s.states() {
        let lhs = f.f1(x).abs();
        let rhs = cf * (x.abs().powf(p + 1.0) + 1.0);
        scan.push(rhs - lhs + tol(rhs), Witness::at(x, lhs));
    }
    scan.finish("f1_growth", "|f₁(u)| ≤ C(|u|^{p+1} + 1)")
}

/// Reduced form of the dissipation condition on `f₀`. With
/// `γ = inf −f₀(s)s/s²`, `c = λ₁/(λ₁+1)` and `K(t) = 2m + |ε′(t)| − cε(t)`,
/// the condition follows from `K ≥ 0` and `γ + λ₁K ≥ c` by Poincaré.
fn f0_dissipation(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let f = c.nonlinearity();
    let lambda1 = c.spectrum().lambda1();
    let m = c.diffusion().lower();
    let cc = lambda1 / (lambda1 + 1.0);
    let (gamma, gamma_at) = s
        .states()
        .into_iter()
        .filter(|x| *x != 0.0)
        .map(|x| (-f.f0(x) / x, x))
        .fold((f64::INFINITY, 0.0), |acc, v| if v.0 < acc.0 { v } else { acc });
    let mut scan = Scan::new();
    for t in s.times() {
        let k = 2.0 * m + c.epsilon().eps_prime(t).abs() - cc * c.epsilon().eps(t);
        let slack = k.min(gamma + lambda1 * k - cc);
        scan.push(slack, Witness::at(t, k));
    }
    let mut out = scan.finish(
        "f0_dissipation",
        "λ₁/(λ₁+1)·ε(t) ≤ 2m + |ε′(t)| and the f₀ coercivity balance",
    );
    out.note = Some(format!("inf −f₀(s)/s = {gamma} at s = {gamma_at}"));
    out
}

fn growth_exponent(c: &ModelConfig) -> AssumptionCheck {
    let n = c.spectrum().domain().dimension();
    let p = c.nonlinearity().growth_exponent();
    let mut scan = Scan::new();
    let mut note = None;
    if n >= 3 {
        let cap = 4.0 / (n as f64 - 2.0);
        scan.push(cap - p, Witness::at(n as f64, p));
    } else {
        scan.push(f64::INFINITY, Witness::at(n as f64, p));
        note = Some(format!("unconstrained in dimension {n}"));
    }
    let mut out = scan.finish("growth_exponent", "p ≤ 4/(N − 2) for N ≥ 3");
    out.note = note;
    out
}

fn forcing_history(c: &ModelConfig, s: &ScanSettings) -> AssumptionCheck {
    let lambda1 = c.spectrum().lambda1();
    let sigma = 0.5 * (c.diffusion().lower() * lambda1).min(lambda1 / (1.0 + lambda1));
    let mut scan = Scan::new();
    let t = s.window.0;
    match c.forcing().discounted_history(sigma, t) {
        Ok(v) if v.is_finite() => scan.push(1.0, Witness::at(t, v)),
        Ok(v) => scan.push(-1.0, Witness::at(t, v)),
        Err(_) => scan.push(-1.0, Witness::at(t, f64::NAN)),
    }
    scan.finish("forcing_history", "∫_{−∞}^t e^{σs}‖h(s)‖² ds < ∞")
}

fn xi_small(c: &ModelConfig) -> AssumptionCheck {
    let xi = c.xi();
    let mut scan = Scan::new();
    scan.push(1.0 - xi - f64::EPSILON, Witness::at(0.0, xi));
    scan.finish("xi_small", "0 ≤ ξ < 1")
}
