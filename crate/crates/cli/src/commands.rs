use nldiff_core::integrator::io::{fmt, write_ledger_csv, write_snapshot, write_trajectory_csv};
use nldiff_core::integrator::{energy_residual, integrate, Trajectory};
use nldiff_core::model::{
    absorbing_radius, estimate_constants, validate_assumptions_with, verify_certificate, ConstantsCertificate,
    ModelConfig, ScanSettings,
};
use nldiff_core::pullback::{
    check_absorption, check_decay_bound, pullback_evolve, q_monitor, sample_attractor, EnsembleSpec, PointCloud,
};
use nldiff_core::split::{
    check_g_regularity, check_v_decay, integrate_split, perturbation_gap, semicontinuity_experiment, CheckStatus,
    SplitTrajectory,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::Artifacts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Check the model assumptions on the configured scan grid.
    Validate,
    /// Derive and verify the certificate constants.
    Constants,
    /// Integrate one trajectory over [t_from, t_to].
    Simulate,
    /// Energy identity residual along one trajectory.
    EnergyAudit,
    /// Absorbing-ball entry, decay bound and Q monotonicity for an ensemble.
    Absorb,
    /// Sample the pullback attractor at time t.
    Attractor,
    /// Decay of the dissipative part and uniform regularity of the smooth part.
    Split,
    /// Linear dependence of solutions on the forcing strength.
    Perturb,
    /// Distance of the perturbed attractors to the unperturbed one.
    Semicontinuity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Constants => "constants",
            Command::Simulate => "simulate",
            Command::EnergyAudit => "energy-audit",
            Command::Absorb => "absorb",
            Command::Attractor => "attractor",
            Command::Split => "split",
            Command::Perturb => "perturb",
            Command::Semicontinuity => "semicontinuity",
        }
    }

    fn needs_seed(self) -> bool {
        matches!(self, Command::Absorb | Command::Attractor | Command::Semicontinuity)
    }
}

/// Machine-readable report plus the list of checked properties that failed.
#[derive(Debug, Default)]
pub struct Outcome {
    pub report: Value,
    pub failures: Vec<String>,
}

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub model: &'a ModelConfig,
    pub cert: &'a Result<ConstantsCertificate, nldiff_core::Error>,
    pub out: &'a mut Artifacts,
}

impl Context<'_> {
    fn cert(&self) -> Result<&ConstantsCertificate, CliError> {
        self.cert.as_ref().map_err(|e| CliError::Core(e.clone()))
    }

    fn ensemble_spec(&self) -> Result<EnsembleSpec, CliError> {
        let e = &self.cfg.experiment;
        Ok(EnsembleSpec {
            count: e.ensemble_size,
            radii: e.radii.clone(),
            low_modes: e.low_modes,
            seed: self.cfg.seed()?,
        })
    }

    fn wants_csv(&self) -> bool {
        self.cfg.wants(Format::Csv)
    }
}

/// Certificate used by every command other than `validate`.
pub fn certify(cfg: &RunConfig, model: &ModelConfig) -> Result<ConstantsCertificate, nldiff_core::Error> {
    estimate_constants(model, &cfg.request())
}

pub fn run(cmd: Command, ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    if cmd.needs_seed() {
        ctx.cfg.seed()?;
    }
    match cmd {
        Command::Validate => validate(ctx),
        Command::Constants => constants(ctx),
        Command::Simulate => simulate(ctx),
        Command::EnergyAudit => energy_audit(ctx),
        Command::Absorb => absorb(ctx),
        Command::Attractor => attractor(ctx),
        Command::Split => split(ctx),
        Command::Perturb => perturb(ctx),
        Command::Semicontinuity => semicontinuity(ctx),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn validate(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let c = &ctx.cfg.certificate;
    let settings = ScanSettings::new((c.window[0], c.window[1]), (c.state_range[0], c.state_range[1]))?
        .with_resolution(c.resolution)?;
    let report = validate_assumptions_with(ctx.model, &settings)?;
    if ctx.cfg.wants(Format::Json) {
        ctx.out.json("validation.json", &report)?;
    }
    if ctx.wants_csv() {
        ctx.out.csv(
            "validation.csv",
            &["check", "description", "passed", "margin", "witness_at", "witness_other", "witness_value", "note"],
            report.checks.iter().map(|k| {
                vec![
                    k.key.to_string(),
                    k.description.to_string(),
                    k.passed.to_string(),
                    fmt(k.margin),
                    opt(k.witness.map(|w| w.at)),
                    opt(k.witness.and_then(|w| w.other)),
                    opt(k.witness.map(|w| w.value)),
                    k.note.clone().unwrap_or_default(),
                ]
            }),
        )?;
    }
    Ok(Outcome {
        failures: report
            .failures()
            .map(|k| format!("{} failed: {} (margin {})", k.key, k.description, fmt(k.margin)))
            .collect(),
        report: serde_json::to_value(&report)?,
    })
}

fn constants(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let cert = ctx.cert()?.clone();
    let problems = verify_certificate(ctx.model, &cert)?;
    if ctx.wants_csv() {
        ctx.out.csv(
            "constants.csv",
            &["constant", "value", "rule"],
            cert.provenance
                .iter()
                .map(|p| vec![p.name.to_string(), fmt(p.value), p.rule.clone()]),
        )?;
    }
    Ok(Outcome {
        report: json!({ "verification_problems": problems }),
        failures: problems,
    })
}

fn forward_run(ctx: &Context<'_>) -> Result<Trajectory, CliError> {
    let e = &ctx.cfg.experiment;
    let u0 = ctx.cfg.initial_datum(ctx.model)?;
    Ok(integrate(ctx.model, e.t_from, e.t_to, &u0, ctx.cfg.numerics.dt, ctx.cfg.scheme())?)
}

fn simulate(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let traj = forward_run(ctx)?;
    if ctx.wants_csv() {
        ctx.out.with_writer("trajectory.csv", |w| write_trajectory_csv(&traj, w))?;
        ctx.out.with_writer("ledger.csv", |w| write_ledger_csv(&traj, w))?;
    }
    if ctx.cfg.wants(Format::Snapshot) {
        ctx.out.with_writer("trajectory.nldiff", |w| write_snapshot(&traj, w))?;
    }
    let last = traj.ledger.last().expect("trajectory is never empty");
    Ok(Outcome {
        report: json!({
            "scheme": traj.scheme,
            "states": traj.states.len(),
            "t_final": last.t,
            "final_energy": last.energy(),
        }),
        failures: Vec::new(),
    })
}

/// At most this many checkpoints are audited, evenly spread over the run.
const AUDIT_POINTS: usize = 100;

fn energy_audit(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let traj = forward_run(ctx)?;
    let n = traj.states.len();
    let steps = (n - 1).clamp(1, AUDIT_POINTS);
    // A single step has no Simpson pair, so the first checkpoint after the
    // start needs at least two steps.
    let mut picks: Vec<usize> = (0..=steps).map(|i| i * (n - 1) / steps).collect();
    picks.dedup();
    picks.retain(|&k| k != 1);
    let t0 = traj.first().t;
    let scale = traj.ledger[0].energy().max(1.0);
    let mut rows = Vec::with_capacity(picks.len());
    let mut worst: f64 = 0.0;
    for &k in &picks {
        let row = &traj.ledger[k];
        let res = energy_residual(&traj, t0, row.t)?;
        worst = worst.max(res.abs() / scale);
        rows.push((row.t, row.energy(), res, res.abs() / scale));
    }
    if ctx.wants_csv() {
        ctx.out.csv(
            "energy_audit.csv",
            &["t", "energy_ht", "identity_residual", "relative_residual"],
            rows.iter().map(|r| vec![fmt(r.0), fmt(r.1), fmt(r.2), fmt(r.3)]),
        )?;
    }
    let tol = ctx.cfg.experiment.energy_tol;
    let mut failures = Vec::new();
    if worst.is_nan() || worst > tol {
        failures.push(format!("relative energy residual {} exceeds {}", fmt(worst), fmt(tol)));
    }
    Ok(Outcome {
        report: json!({ "checkpoints": rows.len(), "max_relative_residual": worst, "tolerance": tol }),
        failures,
    })
}

/// Largest tolerated increase of the Q functional between ledger rows.
const Q_SLACK: f64 = 1e-9;

fn absorb(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let cert = ctx.cert()?.clone();
    let (cfg, model) = (ctx.cfg, ctx.model);
    let e = &cfg.experiment;
    let spec = ctx.ensemble_spec()?;
    let (t, dt, scheme) = (e.t, cfg.numerics.dt, cfg.scheme());
    let eps = model.epsilon();
    let family: Vec<PointCloud> = e
        .taus
        .iter()
        .map(|&tau| {
            let starts = spec.generate(model.spectrum(), eps.eps(t - tau))?;
            pullback_evolve(model, t, tau, &starts, dt, scheme)
        })
        .collect::<nldiff_core::Result<_>>()?;
    let absorption = check_absorption(&cert, model.forcing(), t, &family)?;

    let starts = spec.generate(model.spectrum(), eps.eps(t - e.tau))?;
    let runs: Vec<Trajectory> = starts
        .par_iter()
        .map(|u0| integrate(model, t - e.tau, t, u0, dt, scheme))
        .collect::<nldiff_core::Result<_>>()?;
    let decay = runs
        .iter()
        .map(|r| check_decay_bound(r, &cert, model.forcing()))
        .collect::<nldiff_core::Result<Vec<_>>>()?;
    let q_window = e.tau >= 2.0;
    let q = if q_window {
        runs.iter()
            .map(|r| q_monitor(r, &cert, model.forcing(), t))
            .collect::<nldiff_core::Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    if ctx.wants_csv() {
        let rho = absorption.rho;
        ctx.out.csv(
            "absorption.csv",
            &["tau", "max_norm_sq_ht", "rho_xi_t", "inside"],
            absorption
                .profile
                .iter()
                .map(|&(tau, m)| vec![fmt(tau), fmt(m), fmt(rho), (m <= rho + 1e-9).to_string()]),
        )?;
        ctx.out.csv(
            "decay.csv",
            &["member", "tau", "end_norm_sq_ht", "decay_bound_rhs", "margin", "passed", "q_max_uphill"],
            decay.iter().enumerate().map(|(i, d)| {
                vec![
                    i.to_string(),
                    fmt(d.tau),
                    fmt(d.lhs),
                    fmt(d.rhs),
                    fmt(d.margin),
                    d.passed.to_string(),
                    opt(q.get(i).map(|l| l.max_uphill)),
                ]
            }),
        )?;
        if let Some(first) = q.first() {
            ctx.out.csv(
                "q_ledger.csv",
                &["s", "q_functional"],
                first.times.iter().zip(&first.q).map(|(&s, &v)| vec![fmt(s), fmt(v)]),
            )?;
        }
    }

    let mut failures = Vec::new();
    if !absorption.passed {
        failures.push(match absorption.entry_tau {
            None => "some cloud is still outside the absorbing ball at the largest tau".to_string(),
            Some(_) => "a cloud left the absorbing ball after entering it".to_string(),
        });
    }
    let bad_decay = decay.iter().filter(|d| !d.passed).count();
    if bad_decay > 0 {
        failures.push(format!("decay bound violated for {bad_decay} of {} members", decay.len()));
    }
    let uphill = q.iter().map(|l| l.max_uphill).fold(f64::NEG_INFINITY, f64::max);
    if q_window && uphill > Q_SLACK {
        failures.push(format!("Q functional increased by {}", fmt(uphill)));
    }
    Ok(Outcome {
        report: json!({
            "absorption": absorption,
            "decay_min_margin": decay.iter().map(|d| d.margin).fold(f64::INFINITY, f64::min),
            "q_max_uphill": q_window.then_some(uphill),
        }),
        failures,
    })
}

fn attractor(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let cert = ctx.cert()?.clone();
    let (cfg, model) = (ctx.cfg, ctx.model);
    let e = &cfg.experiment;
    let ensemble = ctx.ensemble_spec()?.generate(model.spectrum(), model.epsilon().eps(e.t))?;
    let s = sample_attractor(model, &cert, e.t, &e.taus, &ensemble, cfg.numerics.dt, cfg.scheme(), e.attractor_tol)?;
    if ctx.wants_csv() {
        ctx.out.with_writer("cloud.csv", |w| s.cloud.write_csv(w))?;
        ctx.out.csv(
            "trace.csv",
            &["tau", "semidistance_ht"],
            s.trace.iter().map(|&(tau, d)| vec![fmt(tau), fmt(d)]),
        )?;
    }
    let mut failures = Vec::new();
    if !s.converged {
        failures.push(format!(
            "trace did not reach {} (last {})",
            fmt(e.attractor_tol),
            opt(s.trace.last().map(|p| p.1))
        ));
    }
    if s.outside_ball > 0 {
        failures.push(format!("{} points lie outside the absorbing ball", s.outside_ball));
    }
    Ok(Outcome {
        report: json!({
            "converged": s.converged,
            "trace": s.trace_rows(),
            "rho_xi_t": s.rho,
            "outside_ball": s.outside_ball,
            "points": s.cloud.len(),
            "diameter": s.cloud.diameter(),
        }),
        failures,
    })
}

/// Largest tolerated `sup ‖u − v − G‖` relative to the initial norm.
const ADDITIVITY_TOL: f64 = 1e-10;

fn split(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let cert = ctx.cert()?.clone();
    let (cfg, model) = (ctx.cfg, ctx.model);
    let e = &cfg.experiment;
    let alpha = e.alpha.unwrap_or(cert.alpha);
    let u0 = cfg.initial_datum(model)?;
    let (dt, scheme) = (cfg.numerics.dt, cfg.scheme());
    let runs: Vec<SplitTrajectory> = e
        .taus
        .par_iter()
        .map(|&tau| integrate_split(model, e.t, tau, &u0, dt, scheme, alpha))
        .collect::<nldiff_core::Result<_>>()?;
    let decay = runs
        .iter()
        .map(|r| {
            let rho = absorbing_radius(&cert, model.forcing(), e.t - r.tau())?;
            check_v_decay(r, &cert, rho)
        })
        .collect::<nldiff_core::Result<Vec<_>>>()?;
    let regularity = check_g_regularity(&runs, &cert, model.forcing())?;
    let defects: Vec<f64> = runs.iter().map(|r| r.additivity_defect()).collect();

    if ctx.wants_csv() {
        ctx.out.csv(
            "v_decay.csv",
            &[
                "tau",
                "v_norm_sq_ht",
                "v_bound_rhs",
                "margin",
                "status",
                "fitted_rate",
                "sigma",
                "additivity_defect",
            ],
            decay.iter().zip(&defects).map(|(d, &def)| {
                let status = match &d.status {
                    CheckStatus::Passed => "passed",
                    CheckStatus::Failed => "failed",
                    CheckStatus::Skipped(_) => "skipped",
                };
                vec![
                    fmt(d.tau),
                    fmt(d.lhs),
                    fmt(d.rhs),
                    fmt(d.margin),
                    status.into(),
                    opt(d.fitted_rate),
                    fmt(d.sigma),
                    fmt(def),
                ]
            }),
        )?;
        ctx.out.csv(
            "g_regularity.csv",
            &["tau", "g_alpha_norm_sq_ht", "eligible"],
            regularity
                .values
                .iter()
                .map(|&(tau, v, ok)| vec![fmt(tau), fmt(v), ok.to_string()]),
        )?;
    }

    let mut failures: Vec<String> = decay
        .iter()
        .filter(|d| d.status.is_failed())
        .map(|d| format!("v decay bound violated at tau {}", fmt(d.tau)))
        .collect();
    if !regularity.passed {
        failures.push(format!("regular part not uniform across tau (ratio {:?})", regularity.ratio));
    }
    let scale = u0.l2_sq().sqrt().max(1.0);
    let worst = defects.iter().copied().fold(0.0, f64::max);
    if worst > ADDITIVITY_TOL * scale {
        failures.push(format!("u − v − G reached {}", fmt(worst)));
    }
    Ok(Outcome {
        report: json!({
            "alpha": alpha,
            "v_decay": decay,
            "g_regularity": regularity,
            "max_additivity_defect": worst,
        }),
        failures,
    })
}

fn perturb(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let (cfg, model) = (ctx.cfg, ctx.model);
    let e = &cfg.experiment;
    let u0 = cfg.initial_datum(model)?;
    let r = perturbation_gap(model, e.t, e.tau, &u0, &e.xis, cfg.numerics.dt, cfg.scheme())?;
    if ctx.wants_csv() {
        ctx.out.csv(
            "perturb.csv",
            &["xi", "gap_ht", "fitted_slope"],
            r.xi_list
                .iter()
                .zip(&r.gaps)
                .map(|(&x, &g)| vec![fmt(x), fmt(g), opt(r.slope)]),
        )?;
    }
    let [lo, hi] = e.slope_band;
    let mut failures = Vec::new();
    match r.slope {
        Some(s) if (lo..=hi).contains(&s) => {}
        Some(s) => failures.push(format!("log-log slope {} outside [{lo}, {hi}]", fmt(s))),
        None => failures.push("fewer than two positive gaps, no slope".into()),
    }
    Ok(Outcome {
        report: serde_json::to_value(&r)?,
        failures,
    })
}

fn semicontinuity(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let cert = ctx.cert()?.clone();
    let (cfg, model) = (ctx.cfg, ctx.model);
    let e = &cfg.experiment;
    let ensemble = ctx.ensemble_spec()?.generate(model.spectrum(), model.epsilon().eps(e.t))?;
    let r = semicontinuity_experiment(
        model,
        &cert,
        e.t,
        &e.xis,
        &e.taus,
        &ensemble,
        cfg.numerics.dt,
        cfg.scheme(),
        e.attractor_tol,
    )?;
    if ctx.wants_csv() {
        ctx.out.csv(
            "semicontinuity.csv",
            &["xi", "semidistance_ht", "converged"],
            r.rows
                .iter()
                .map(|row| vec![fmt(row.xi), fmt(row.distance), row.converged.to_string()]),
        )?;
    }
    let mut failures = Vec::new();
    if !r.monotone {
        failures.push("distances do not decrease with xi".into());
    }
    if r.final_relative.is_nan() || r.final_relative > e.semicontinuity_ratio {
        failures.push(format!(
            "final distance is {} of the reference diameter, limit {}",
            fmt(r.final_relative),
            fmt(e.semicontinuity_ratio)
        ));
    }
    if !r.reference_converged || r.rows.iter().any(|row| !row.converged) {
        failures.push("some attractor sample did not converge".into());
    }
    Ok(Outcome {
        report: serde_json::to_value(&r)?,
        failures,
    })
}
