use nldiff_core::integrator::{integrate, Scheme};
use nldiff_core::model::{
    absorbing_radius, estimate_constants, CertificateRequest, ConstantsCertificate, Forcing, ModelConfig,
    Nonlinearity, Polynomial,
};
use nldiff_core::pullback::EnsembleSpec;
use nldiff_core::spectral::SpectralField;
use nldiff_core::split::*;
use nldiff_core::Error;

fn cert_for(c: &ModelConfig) -> ConstantsCertificate {
    estimate_constants(c, &CertificateRequest::new((-40.0, 40.0), (-50.0, 50.0))).unwrap()
}

fn smooth_datum(c: &ModelConfig, amp: f64) -> SpectralField {
    SpectralField::from_leading(c.spectrum().clone(), &[amp, 0.5 * amp, -0.3 * amp, 0.2 * amp]).unwrap()
}

/// Default model with `f = f₀ = −s³ − s`.
fn dissipative_only(c: ModelConfig) -> ModelConfig {
    let f0 = Polynomial::new(vec![0.0, -1.0, 0.0, -1.0]).unwrap();
    c.with_nonlinearity(Nonlinearity::from_parts(f0, Polynomial::zero()))
}

#[test]
fn unforced_dissipative_split_has_no_regular_part() {
    let c = dissipative_only(ModelConfig::default_model(8).unwrap().with_xi(0.0).unwrap());
    let s = integrate_split(&c, 2.0, 2.0, &smooth_datum(&c, 1.0), 0.01, Scheme::Rk4, 0.5).unwrap();
    for (u, (v, g)) in s.base.states.iter().zip(s.v_states.iter().zip(&s.reg_states)) {
        assert!(g.u.is_zero());
        assert_eq!(u.u, v.u);
    }
}

#[test]
fn zero_datum_stays_zero() {
    let c = ModelConfig::default_model(8).unwrap().with_xi(0.0).unwrap();
    let zero = SpectralField::zeros(c.spectrum().clone());
    let s = integrate_split(&c, 1.0, 1.0, &zero, 0.01, Scheme::Rk4, 0.5).unwrap();
    assert!(s.base.last().u.is_zero() && s.v_states.last().unwrap().u.is_zero());
    assert!(s.reg_states.last().unwrap().u.is_zero());
}

#[test]
fn split_reproduces_full_solution() {
    let c = ModelConfig::default_model(16).unwrap();
    let u0 = smooth_datum(&c, 3.0);
    let s = integrate_split(&c, 1.0, 1.0, &u0, 1e-3, Scheme::Rk4, 0.5).unwrap();
    assert!(s.additivity_defect() <= 1e-7, "{}", s.additivity_defect());
    let full = integrate(&c, 0.0, 1.0, &u0, 1e-3, Scheme::Rk4).unwrap();
    let d = full.last().u.sub(&s.base.last().u).unwrap();
    assert!(d.coeffs().iter().all(|x| x.abs() < 1e-12));
    assert_eq!(s.v_states[0].u, u0);
    assert!(s.reg_states[0].u.is_zero());
}

#[test]
fn split_blow_up_is_tagged() {
    let c = ModelConfig::default_model(8).unwrap();
    let err = integrate_split(&c, 1.0, 1.0, &smooth_datum(&c, 50.0), 0.05, Scheme::Rk4, 0.5).unwrap_err();
    assert!(err.is_blow_up(), "{err}");
}

#[test]
fn v_decay_zero_start_passes() {
    let c = ModelConfig::default_model(8).unwrap();
    let cert = cert_for(&c);
    let zero = SpectralField::zeros(c.spectrum().clone());
    let s = integrate_split(&c, 0.0, 3.0, &zero, 0.01, Scheme::Rk4, cert.alpha).unwrap();
    let rho = absorbing_radius(&cert, c.forcing(), -3.0).unwrap();
    let r = check_v_decay(&s, &cert, rho).unwrap();
    assert_eq!(r.status, CheckStatus::Passed);
    assert_eq!(r.lhs, 0.0);
    assert_eq!(r.fitted_rate, None);
}

#[test]
fn v_decay_holds_across_tau_and_beats_sigma() {
    let c = ModelConfig::default_model(16).unwrap();
    let cert = cert_for(&c);
    let u0 = smooth_datum(&c, 3.0);
    let mut rhs = Vec::new();
    for tau in [5.0, 10.0, 20.0] {
        let s = integrate_split(&c, 0.0, tau, &u0, 0.01, Scheme::Rk4, cert.alpha).unwrap();
        let rho = absorbing_radius(&cert, c.forcing(), -tau).unwrap();
        let r = check_v_decay(&s, &cert, rho).unwrap();
        assert_eq!(r.status, CheckStatus::Passed, "{r:?}");
        assert!(r.fitted_rate.unwrap() >= cert.sigma);
        rhs.push(r.rhs);
    }
    assert!(rhs[1] < rhs[0] && rhs[2] < rhs[1]);
}

#[test]
fn v_decay_rate_matches_linearization() {
    let c = ModelConfig::default_model(8).unwrap();
    let cert = cert_for(&c);
    let lam = c.spectrum().lambda1();
    let u0 = SpectralField::single_mode(c.spectrum().clone(), 0, 1e-3).unwrap();
    let s = integrate_split(&c, 0.0, 4.0, &u0, 0.01, Scheme::Rk4, cert.alpha).unwrap();
    let rho = absorbing_radius(&cert, c.forcing(), -4.0).unwrap();
    let r = check_v_decay(&s, &cert, rho).unwrap();
    assert!(r.fitted_rate.unwrap() >= 2.0 * lam / (1.0 + lam));
}

#[test]
fn v_decay_skips_start_outside_ball() {
    let c = ModelConfig::default_model(8).unwrap();
    let cert = cert_for(&c);
    let s = integrate_split(&c, 0.0, 1.0, &smooth_datum(&c, 3.0), 0.01, Scheme::Rk4, cert.alpha).unwrap();
    let r = check_v_decay(&s, &cert, 1.0).unwrap();
    assert!(matches!(r.status, CheckStatus::Skipped(_)));
}

#[test]
fn g_regularity_vanishes_without_regular_forcing() {
    let c = dissipative_only(ModelConfig::default_model(8).unwrap().with_xi(0.0).unwrap());
    let cert = cert_for(&c);
    let runs: Vec<_> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&tau| integrate_split(&c, 0.0, tau, &smooth_datum(&c, 1.0), 0.01, Scheme::Rk4, 0.5).unwrap())
        .collect();
    let r = check_g_regularity(&runs, &cert, c.forcing()).unwrap();
    assert!(r.values.iter().all(|v| v.1 == 0.0));
    assert_eq!(r.ratio, Some(1.0));
    assert!(r.passed);
    assert!(matches!(
        check_g_regularity(&runs[..2], &cert, c.forcing()),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn g_regularity_is_uniform_and_forgets_initial_radius() {
    let c = ModelConfig::default_model(16).unwrap();
    let cert = cert_for(&c);
    let spec = |r: f64| EnsembleSpec {
        count: 1,
        radii: vec![r],
        low_modes: 4,
        seed: 3,
    };
    let taus = [8.0, 16.0, 32.0];
    let run = |r: f64| -> Vec<SplitTrajectory> {
        taus.iter()
            .map(|&tau| {
                let u0 = spec(r).generate(c.spectrum(), c.epsilon().eps(-tau)).unwrap().remove(0);
                integrate_split(&c, 0.0, tau, &u0, 0.01, Scheme::Rk4, cert.alpha).unwrap()
            })
            .collect()
    };
    let small = check_g_regularity(&run(1.0), &cert, c.forcing()).unwrap();
    let large = check_g_regularity(&run(10.0), &cert, c.forcing()).unwrap();
    assert!(small.passed && large.passed, "{small:?} {large:?}");
    let (a, b) = (small.values[2].1, large.values[2].1);
    assert!((a - b).abs() <= 0.1 * a, "{a} vs {b}");
}

#[test]
fn perturbation_gap_examples() {
    let c = ModelConfig::default_model(16).unwrap();
    let u0 = smooth_datum(&c, 1.0);
    let xis = [1e-1, 1e-2, 1e-3, 1e-4];
    let r = perturbation_gap(&c, 0.0, 5.0, &u0, &xis, 0.01, Scheme::Rk4).unwrap();
    let slope = r.slope.unwrap();
    assert!((0.9..=1.1).contains(&slope), "{slope} {:?}", r.gaps);

    let r = perturbation_gap(&c, 0.0, 1.0, &u0, &[0.5, 1e-1, 1e-2, 1e-4, 0.0], 0.01, Scheme::Rk4).unwrap();
    assert_eq!(r.gaps[4], 0.0);

    let unforced = c
        .clone()
        .with_forcing(Forcing::none(c.spectrum().clone()))
        .unwrap();
    let r = perturbation_gap(&unforced, 0.0, 1.0, &u0, &xis, 0.01, Scheme::Rk4).unwrap();
    assert!(r.gaps.iter().all(|&g| g == 0.0));
    assert_eq!(r.slope, None);

    assert!(perturbation_gap(&c, 0.0, 1.0, &u0, &[1e-1, 1e-2, 1e-3], 0.01, Scheme::Rk4).is_err());
    assert!(perturbation_gap(&c, 0.0, 1.0, &u0, &[1e-3, 1e-2, 1e-1, 1.0], 0.01, Scheme::Rk4).is_err());
}

#[test]
fn semicontinuity_trivial_cases() {
    let c = ModelConfig::default_model(8).unwrap();
    let cert = cert_for(&c);
    let ens = EnsembleSpec {
        count: 4,
        ..Default::default()
    }
    .generate(c.spectrum(), c.epsilon().eps(0.0))
    .unwrap();
    let taus = [1.0, 2.0, 3.0];
    let r = semicontinuity_experiment(&c, &cert, 0.0, &[0.0], &taus, &ens, 0.02, Scheme::Rk4, 1e-3).unwrap();
    assert_eq!(r.rows[0].distance, 0.0);

    let unforced = c.clone().with_forcing(Forcing::none(c.spectrum().clone())).unwrap();
    let r = semicontinuity_experiment(&unforced, &cert, 0.0, &[0.5, 0.25], &taus, &ens, 0.02, Scheme::Rk4, 1e-3)
        .unwrap();
    assert!(r.rows.iter().all(|row| row.distance == 0.0));
    assert!(r.monotone);
}
