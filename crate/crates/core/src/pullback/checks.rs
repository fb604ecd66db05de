use serde::Serialize;

use super::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::integrator::{LedgerRow, Trajectory};
use crate::model::{absorbing_radius, ConstantsCertificate, Forcing, ModelConfig};

fn same_xi(cert: &ConstantsCertificate, forcing: &Forcing) -> Result<()> {
    if cert.xi != forcing.xi() {
        return Err(Error::invalid(format!(
            "certificate built for ξ = {} used with ξ = {}",
            cert.xi,
            forcing.xi()
        )));
    }
    Ok(())
}

/// Both sides of the pullback decay estimate
/// `‖u(t)‖²_{H_t} ≤ e^{−στ}‖u(t−τ)‖²_{H_{t−τ}} + (ξ/η)e^{−σt}∫_{−∞}^t e^{σs}‖h‖² + 2C₁/σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayReport {
    pub t: f64,
    pub tau: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub passed: bool,
}

/// Tolerance of the decay comparison.
pub const DECAY_TOLERANCE: f64 = 1e-9;

/// Decay bound from the start and end energies `‖u‖² + ε‖∇u‖²`.
pub fn decay_bound(
    start_energy: f64,
    end_energy: f64,
    t: f64,
    tau: f64,
    cert: &ConstantsCertificate,
    forcing: &Forcing,
) -> Result<DecayReport> {
    same_xi(cert, forcing)?;
    let hist = forcing.discounted_history(cert.sigma, t)?;
    let rhs = (-cert.sigma * tau).exp() * start_energy
        + forcing.xi() / cert.eta * hist
        + 2.0 * cert.c1 / cert.sigma;
    Ok(DecayReport {
        t,
        tau,
        lhs: end_energy,
        rhs,
        margin: rhs - end_energy,
        passed: end_energy <= rhs + DECAY_TOLERANCE,
    })
}

/// Decay bound between the first and last state of a trajectory.
pub fn check_decay_bound(
    traj: &Trajectory,
    cert: &ConstantsCertificate,
    forcing: &Forcing,
) -> Result<DecayReport> {
    let (first, last) = (&traj.ledger[0], &traj.ledger[traj.ledger.len() - 1]);
    decay_bound(
        first.energy(),
        last.energy(),
        last.t,
        last.t - first.t,
        cert,
        forcing,
    )
}

/// Entry of a `τ`-indexed family of clouds into the absorbing ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionReport {
    pub t: f64,
    /// `ρ_ξ(t)`, compared with squared `H_t` norms.
    pub rho: f64,
    /// `(τ, max ‖u(t)‖²_{H_t})` per family member.
    pub profile: Vec<(f64, f64)>,
    /// Smallest `τ` from which every later cloud is inside the ball.
    pub entry_tau: Option<f64>,
    /// First `τ` whose cloud is inside the ball.
    pub first_inside_tau: Option<f64>,
    /// A cloud inside the ball was followed by one outside it.
    pub excursion: bool,
    pub passed: bool,
}

pub fn check_absorption(
    cert: &ConstantsCertificate,
    forcing: &Forcing,
    t: f64,
    family: &[PointCloud],
) -> Result<AbsorptionReport> {
    absorption_with_radius(absorbing_radius(cert, forcing, t)?, t, family)
}

/// As [`check_absorption`] with an explicit radius `ρ`.
pub fn absorption_with_radius(rho: f64, t: f64, family: &[PointCloud]) -> Result<AbsorptionReport> {
    if family.is_empty() {
        return Err(Error::invalid("absorption check needs at least one cloud"));
    }
    if family.windows(2).any(|w| w[0].origin().tau >= w[1].origin().tau) {
        return Err(Error::invalid("family must be ordered by increasing τ"));
    }
    if family.iter().any(|c| (c.t() - t).abs() > 1e-12 * t.abs().max(1.0)) {
        return Err(Error::invalid("all clouds must live at the evaluation time"));
    }
    let profile: Vec<(f64, f64)> = family
        .iter()
        .map(|c| {
            let worst = c.norms_sq().into_iter().fold(0.0, f64::max);
            (c.origin().tau, worst)
        })
        .collect();
    let inside: Vec<bool> = profile.iter().map(|&(_, n)| n <= rho).collect();
    let first_inside = inside.iter().position(|&b| b);
    let entry = (0..inside.len()).find(|&i| inside[i..].iter().all(|&b| b));
    let excursion = match first_inside {
        Some(i) => inside[i..].iter().any(|&b| !b),
        None => false,
    };
    Ok(AbsorptionReport {
        t,
        rho,
        entry_tau: entry.map(|i| profile[i].0),
        first_inside_tau: first_inside.map(|i| profile[i].0),
        excursion,
        passed: entry.is_some() && !excursion,
        profile,
    })
}

/// Entry of a single trajectory into the moving ball `‖u(s)‖²_{H_s} ≤ ρ_ξ(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryAbsorption {
    pub entry_time: Option<f64>,
    /// The trajectory left the ball after first entering it.
    pub left_after_entry: bool,
}

pub fn trajectory_absorption(
    traj: &Trajectory,
    cert: &ConstantsCertificate,
    forcing: &Forcing,
) -> Result<TrajectoryAbsorption> {
    let mut entry = None;
    let mut left = false;
    for row in &traj.ledger {
        let inside = row.energy() <= absorbing_radius(cert, forcing, row.t)?;
        match (entry, inside) {
            (None, true) => entry = Some(row.t),
            (Some(_), false) => left = true,
            _ => {}
        }
    }
    Ok(TrajectoryAbsorption {
        entry_time: entry,
        left_after_entry: left,
    })
}

/// `Q(s) = ‖u(s)‖²_{H_s} − 2C₀s − (2ξ²/(mλ₁)) ∫_{t−2}^s ‖h‖²` on `[t − 2, t]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QLedger {
    pub times: Vec<f64>,
    pub q: Vec<f64>,
    /// Largest increase between consecutive rows (negative if strictly decreasing).
    pub max_uphill: f64,
}

pub fn q_monitor(
    traj: &Trajectory,
    cert: &ConstantsCertificate,
    forcing: &Forcing,
    t: f64,
) -> Result<QLedger> {
    q_monitor_with(traj, cert.c0, cert.m * cert.lambda1, forcing, t)
}

/// Q-ledger with an explicit `C₀` (for negative controls) and `mλ₁`.
pub fn q_monitor_with(
    traj: &Trajectory,
    c0: f64,
    m_lambda1: f64,
    forcing: &Forcing,
    t: f64,
) -> Result<QLedger> {
    let start = t - 2.0;
    let i = traj.index_of(start)?;
    let j = traj.index_of(t)?;
    let rows: &[LedgerRow] = &traj.ledger[i..=j];
    let xi = forcing.xi();
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let q: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.energy() - 2.0 * c0 * r.t - 2.0 * xi * xi / m_lambda1 * forcing.window_integral(start, r.t)
        })
        .collect();
    let max_uphill = q
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(QLedger {
        times,
        q,
        max_uphill,
    })
}

/// Bounds on `[t − 2, t]` for runs started at `t0 = t − τ`:
/// `‖u(r)‖²_{H_r} ≤ ρ₁(t)` and `∫_{r−1}^r ‖∇u‖² ≤ ρ₂(t)`, with
/// `ρ₁ = C₂(1 + ξe^{−σ(t−t0)}∫_{−∞}^t e^{σs}‖h‖²)` and
/// `ρ₂ = (ρ₁ + (2ξ²/(mλ₁)) max_r ∫_{r−1}^r ‖h‖² + 2C₀)/(2η̃ + L)`, where
/// `L = sup(|ε| + |ε′|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowBounds {
    pub rho1: f64,
    pub rho2: f64,
    pub max_energy: f64,
    pub max_gradient_integral: f64,
    pub passed: bool,
}

pub fn check_window_bounds(
    traj: &Trajectory,
    cert: &ConstantsCertificate,
    config: &ModelConfig,
    t: f64,
) -> Result<WindowBounds> {
    let forcing = config.forcing();
    same_xi(cert, forcing)?;
    let t0 = traj.first().t;
    let i = traj.index_of(t - 2.0)?;
    let j = traj.index_of(t)?;
    let rows = &traj.ledger[i..=j];
    let xi = forcing.xi();
    // e^{−σ(t − t0)} ∫_{−∞}^t e^{σs}‖h‖² = e^{σ t0} · (discounted history at t).
    let hist = forcing.discounted_history(cert.sigma, t)? * (cert.sigma * t0).exp();
    let rho1 = cert.c2 * (1.0 + xi * hist);
    let h_window = (0..=200)
        .map(|k| {
            let r = t - 1.0 + k as f64 / 200.0;
            forcing.window_integral(r - 1.0, r)
        })
        .fold(0.0, f64::max);
    let rho2 = (rho1 + 2.0 * xi * xi / (cert.m * cert.lambda1) * h_window + 2.0 * cert.c0)
        / (2.0 * cert.eta_tilde + config.epsilon().sup_bound());
    let max_energy = rows.iter().map(|r| r.energy()).fold(0.0, f64::max);
    // Trapezoid prefix sums of ‖∇u‖² over the window.
    let mut prefix = vec![0.0; rows.len()];
    for k in 1..rows.len() {
        prefix[k] = prefix[k - 1] + 0.5 * (rows[k].t - rows[k - 1].t) * (rows[k].grad_sq + rows[k - 1].grad_sq);
    }
    let mut max_gradient_integral: f64 = 0.0;
    for (k, r) in rows.iter().enumerate() {
        if r.t < t - 1.0 - 1e-12 {
            continue;
        }
        let lo = r.t - 1.0;
        let m = rows.partition_point(|x| x.t < lo - 1e-12);
        // Interpolate the prefix integral linearly at r − 1 when it falls between rows.
        let at_lo = if m < rows.len() && (rows[m].t - lo).abs() <= 1e-12 {
            prefix[m]
        } else if m > 0 {
            let (a, b) = (&rows[m - 1], &rows[m]);
            let w = (lo - a.t) / (b.t - a.t);
            let g_lo = a.grad_sq + w * (b.grad_sq - a.grad_sq);
            prefix[m - 1] + 0.5 * (lo - a.t) * (a.grad_sq + g_lo)
        } else {
            prefix[0]
        };
        max_gradient_integral = max_gradient_integral.max(prefix[k] - at_lo);
    }
    Ok(WindowBounds {
        rho1,
        rho2,
        max_energy,
        max_gradient_integral,
        passed: max_energy <= rho1 + 1e-9 && max_gradient_integral <= rho2 + 1e-6,
    })
}
