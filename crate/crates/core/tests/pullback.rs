use nldiff_core::integrator::{integrate, Scheme};
use nldiff_core::model::{estimate_constants, CertificateRequest, ConstantsCertificate, ModelConfig};
use nldiff_core::pullback::*;
use nldiff_core::spectral::{ht_norm_sq, SpectralField};
use nldiff_core::Error;

fn cert_for(c: &ModelConfig) -> ConstantsCertificate {
    estimate_constants(c, &CertificateRequest::new((-40.0, 40.0), (-50.0, 50.0))).unwrap()
}

fn cloud(c: &ModelConfig, t: f64, tau: f64, pts: Vec<SpectralField>) -> PointCloud {
    let origin = CloudOrigin {
        tau,
        ensemble: "test".into(),
    };
    PointCloud::new(t, c.epsilon().eps(t), pts, origin).unwrap()
}

fn mode1(c: &ModelConfig, a: f64) -> SpectralField {
    SpectralField::single_mode(c.spectrum().clone(), 0, a).unwrap()
}

#[test]
fn zero_tau_returns_initial_set() {
    let c = ModelConfig::default_model(8).unwrap();
    let init = EnsembleSpec {
        count: 5,
        ..Default::default()
    }
    .generate(c.spectrum(), c.epsilon().eps(1.0))
    .unwrap();
    let out = pullback_evolve(&c, 1.0, 0.0, &init, 0.01, Scheme::Rk4).unwrap();
    assert_eq!(out.points(), &init[..]);
}

#[test]
fn linear_points_contract_in_first_mode() {
    let eps0 = 0.5;
    let c = ModelConfig::linear_model(eps0, 8).unwrap();
    let init: Vec<_> = [1.0, -2.0, 0.5].iter().map(|&a| mode1(&c, a)).collect();
    let tau = 1.5;
    let out = pullback_evolve(&c, 3.0, tau, &init, 1e-3, Scheme::Rk4).unwrap();
    let lam = c.spectrum().lambda1();
    let factor = (-lam * tau / (1.0 + eps0 * lam)).exp();
    for (p, q) in out.points().iter().zip(&init) {
        assert!((p.coeffs()[0] - factor * q.coeffs()[0]).abs() < 1e-10);
    }
}

#[test]
fn zero_is_a_fixed_point_without_forcing() {
    let c = ModelConfig::default_model(8).unwrap().with_xi(0.0).unwrap();
    let zero = SpectralField::zeros(c.spectrum().clone());
    let out = pullback_evolve(&c, 2.0, 3.0, std::slice::from_ref(&zero), 0.01, Scheme::Rk4).unwrap();
    assert_eq!(out.points(), &[zero][..]);
}

#[test]
fn semidistance_examples() {
    let c = ModelConfig::linear_model(0.5, 8).unwrap();
    let a = cloud(&c, 1.0, 1.0, vec![mode1(&c, 1.0), mode1(&c, -2.0)]);
    assert_eq!(hausdorff_semidistance(&a, &a).unwrap().value, 0.0);

    let sup = cloud(&c, 1.0, 1.0, vec![mode1(&c, 1.0), mode1(&c, -2.0), mode1(&c, 7.0)]);
    assert_eq!(hausdorff_semidistance(&a, &sup).unwrap().value, 0.0);
    let back = hausdorff_semidistance(&sup, &a).unwrap();
    assert!(back.value > 0.0);
    assert_eq!(back.source_index, 2);
    assert_eq!(back.target_index, 0);

    let cval = -3.0;
    let single = cloud(&c, 1.0, 1.0, vec![mode1(&c, cval)]);
    let zero = cloud(&c, 1.0, 1.0, vec![SpectralField::zeros(c.spectrum().clone())]);
    let r = hausdorff_semidistance(&single, &zero).unwrap();
    let expect = cval.abs() * (1.0 + 0.5 * c.spectrum().lambda1()).sqrt();
    assert!((r.value - expect).abs() < 1e-12);
    assert_eq!(r.eps_t, 0.5);

    let later = cloud(&c, 2.0, 1.0, vec![mode1(&c, 1.0)]);
    assert!(matches!(hausdorff_semidistance(&a, &later), Err(Error::InvalidArgument(_))));
}

#[test]
fn decay_bound_at_equilibrium_keeps_constant_margin() {
    let c = ModelConfig::default_model(8).unwrap().with_xi(0.0).unwrap();
    let cert = cert_for(&c);
    let zero = SpectralField::zeros(c.spectrum().clone());
    let tr = integrate(&c, 0.0, 2.0, &zero, 0.01, Scheme::Rk4).unwrap();
    let r = check_decay_bound(&tr, &cert, c.forcing()).unwrap();
    assert!(r.passed);
    assert!(r.margin >= 2.0 * cert.c1 / cert.sigma - 1e-12);
}

#[test]
fn decay_bound_holds_in_linear_case() {
    let c = ModelConfig::linear_model(0.5, 8).unwrap();
    let cert = cert_for(&c);
    let lam = c.spectrum().lambda1();
    assert_eq!(cert.c1, 0.0);
    assert!(cert.sigma <= 2.0 * lam / (1.0 + 0.5 * lam));
    let u0 = SpectralField::from_leading(c.spectrum().clone(), &[3.0, -1.0, 0.5]).unwrap();
    let tr = integrate(&c, 0.0, 5.0, &u0, 1e-3, Scheme::Rk4).unwrap();
    let r = check_decay_bound(&tr, &cert, c.forcing()).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn decay_bound_rejects_mismatched_forcing() {
    let c = ModelConfig::default_model(8).unwrap();
    let cert = cert_for(&c);
    let other = c.with_xi(0.05).unwrap();
    assert!(decay_bound(1.0, 1.0, 0.0, 1.0, &cert, other.forcing()).is_err());
}

#[test]
fn decay_bound_holds_for_random_starts() {
    let c = ModelConfig::default_model(8).unwrap();
    let cert = cert_for(&c);
    let (t, tau) = (5.0, 20.0);
    let spec = EnsembleSpec {
        count: 32,
        radii: vec![10.0],
        low_modes: 8,
        seed: 7,
    };
    let init = spec.generate(c.spectrum(), c.epsilon().eps(t - tau)).unwrap();
    let violations = init
        .iter()
        .filter(|u0| {
            let tr = integrate(&c, t - tau, t, u0, 0.01, Scheme::Rk4).unwrap();
            !check_decay_bound(&tr, &cert, c.forcing()).unwrap().passed
        })
        .count();
    assert_eq!(violations, 0);
}

fn linear_family(c: &ModelConfig, r0_sq: f64, t: f64, taus: &[f64]) -> Vec<PointCloud> {
    let lam = c.spectrum().lambda1();
    let amp = (r0_sq / (1.0 + 0.5 * lam)).sqrt();
    taus.iter()
        .map(|&tau| pullback_evolve(c, t, tau, &[mode1(c, amp)], 1e-3, Scheme::Rk4).unwrap())
        .collect()
}

#[test]
fn linear_entry_time_matches_analytic_value() {
    let c = ModelConfig::linear_model(0.5, 4).unwrap();
    let cert = cert_for(&c);
    let lam = c.spectrum().lambda1();
    let r0_sq = 100.0;
    let step = 0.25;
    let taus: Vec<f64> = (1..=24).map(|k| k as f64 * step).collect();
    let family = linear_family(&c, r0_sq, 2.0, &taus);
    let report = check_absorption(&cert, c.forcing(), 2.0, &family).unwrap();
    let analytic = (1.0 + 0.5 * lam) / (2.0 * lam) * (r0_sq / cert.c2).ln();
    let entry = report.entry_tau.unwrap();
    assert!(report.passed && !report.excursion);
    assert!(entry >= analytic && entry - analytic <= step, "{entry} vs {analytic}");

    let doubled = absorption_with_radius(2.0 * report.rho, 2.0, &family).unwrap();
    assert!(doubled.entry_tau.unwrap() <= entry);
}

#[test]
fn family_inside_ball_enters_at_first_tau() {
    let c = ModelConfig::linear_model(0.5, 4).unwrap();
    let cert = cert_for(&c);
    let family = linear_family(&c, 1.0, 0.0, &[0.5, 1.0, 1.5]);
    let report = check_absorption(&cert, c.forcing(), 0.0, &family).unwrap();
    assert_eq!(report.entry_tau, Some(0.5));
}

#[test]
fn excursions_are_reported() {
    let c = ModelConfig::linear_model(0.5, 4).unwrap();
    let mk = |tau, a| cloud(&c, 0.0, tau, vec![mode1(&c, a)]);
    let family = [mk(1.0, 5.0), mk(2.0, 0.1), mk(3.0, 5.0), mk(4.0, 0.1)];
    let r = absorption_with_radius(1.0, 0.0, &family).unwrap();
    assert_eq!(r.first_inside_tau, Some(2.0));
    assert_eq!(r.entry_tau, Some(4.0));
    assert!(r.excursion && !r.passed);
}

#[test]
fn q_is_strictly_decreasing_at_equilibrium() {
    let c = ModelConfig::default_model(8).unwrap().with_xi(0.0).unwrap();
    let cert = cert_for(&c);
    assert!(cert.c0 > 0.0);
    let zero = SpectralField::zeros(c.spectrum().clone());
    let tr = integrate(&c, 0.0, 3.0, &zero, 0.01, Scheme::Rk4).unwrap();
    let q = q_monitor(&tr, &cert, c.forcing(), 3.0).unwrap();
    assert!(q.times.windows(2).all(|w| w[0] < w[1]));
    for (w, s) in q.q.windows(2).zip(q.times.windows(2)) {
        let slope = (w[1] - w[0]) / (s[1] - s[0]);
        assert!((slope + 2.0 * cert.c0).abs() < 1e-9);
    }
    assert!(q.max_uphill < 0.0);
}

#[test]
fn q_is_nonincreasing_on_forced_run_and_control_detects_growth() {
    let c = ModelConfig::default_model(16).unwrap();
    let cert = cert_for(&c);
    // A small datum grows towards the nonzero equilibrium, so Q without C₀ climbs.
    let u0 = mode1(&c, 0.05);
    let tr = integrate(&c, 0.0, 4.0, &u0, 0.01, Scheme::Rk4).unwrap();
    let q = q_monitor(&tr, &cert, c.forcing(), 4.0).unwrap();
    assert!(q.max_uphill <= 1e-8, "{}", q.max_uphill);
    let control = q_monitor_with(&tr, 0.0, cert.m * cert.lambda1, c.forcing(), 4.0).unwrap();
    assert!(control.max_uphill > 0.0);
}

#[test]
fn q_window_must_be_covered() {
    let c = ModelConfig::default_model(8).unwrap();
    let cert = cert_for(&c);
    let tr = integrate(&c, 0.0, 1.0, &mode1(&c, 1.0), 0.01, Scheme::Rk4).unwrap();
    assert!(q_monitor(&tr, &cert, c.forcing(), 1.0).is_err());
}

#[test]
fn window_bounds_hold_on_certified_run() {
    let c = ModelConfig::default_model(8).unwrap();
    let cert = cert_for(&c);
    let u0 = SpectralField::from_leading(c.spectrum().clone(), &[4.0, -2.0, 1.0]).unwrap();
    let tr = integrate(&c, 0.0, 12.0, &u0, 0.01, Scheme::Rk4).unwrap();
    let w = check_window_bounds(&tr, &cert, &c, 12.0).unwrap();
    assert!(w.passed, "{w:?}");
    assert!(w.max_gradient_integral > 0.0);
}

#[test]
fn linear_attractor_trace_is_geometric() {
    let eps0 = 0.5;
    let c = ModelConfig::linear_model(eps0, 4).unwrap();
    let cert = cert_for(&c);
    let lam = c.spectrum().lambda1();
    let dtau = 0.5;
    let taus: Vec<f64> = (1..=6).map(|k| k as f64 * dtau).collect();
    let ens = vec![mode1(&c, 2.0), mode1(&c, -1.0)];
    let s = sample_attractor(&c, &cert, 0.0, &taus, &ens, 1e-3, Scheme::Rk4, 1e-3).unwrap();
    let ratio = (-lam * dtau / (1.0 + eps0 * lam)).exp();
    for w in s.trace.windows(2) {
        assert!((w[1].1 / w[0].1 - ratio).abs() < 1e-6);
    }
    assert_eq!(s.outside_ball, 0);
    assert_eq!(s.trace_rows().len(), taus.len() - 1);
}

#[test]
fn default_attractor_sample_is_inside_ball_and_superset_is_closer() {
    let c = ModelConfig::default_model(8).unwrap();
    let cert = cert_for(&c);
    let taus = [4.0, 6.0, 8.0];
    let t = 1.0;
    let small = EnsembleSpec {
        count: 6,
        ..Default::default()
    };
    let big = EnsembleSpec { count: 12, ..small.clone() };
    let e_small = small.generate(c.spectrum(), c.epsilon().eps(t)).unwrap();
    let e_big = big.generate(c.spectrum(), c.epsilon().eps(t)).unwrap();
    assert_eq!(&e_big[..6], &e_small[..]);
    let s = sample_attractor(&c, &cert, t, &taus, &e_small, 0.01, Scheme::Rk4, 1e-6).unwrap();
    let b = sample_attractor(&c, &cert, t, &taus, &e_big, 0.01, Scheme::Rk4, 1e-6).unwrap();
    for n in b.cloud.norms_sq() {
        assert!(n <= b.rho + 1e-9);
    }
    assert_eq!(hausdorff_semidistance(&s.cloud, &b.cloud).unwrap().value, 0.0);
}

#[test]
fn constant_radius_family_is_tempered() {
    let spec = EnsembleSpec::default();
    let w: Vec<f64> = [-10.0, -50.0, -200.0].iter().map(|&tau| spec.tempered_weight(0.3, tau)).collect();
    assert!(w[0] > w[1] && w[1] > w[2] && w[2] < 1e-20);
}

#[test]
fn cloud_csv_has_point_rows() {
    let c = ModelConfig::linear_model(0.5, 3).unwrap();
    let cl = cloud(&c, 0.0, 1.0, vec![mode1(&c, 1.0), mode1(&c, 2.0)]);
    let mut buf = Vec::new();
    cl.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "point_id,coeff_1,coeff_2,coeff_3");
    assert_eq!(lines.len(), 3);
    assert!((ht_norm_sq(&cl.points()[1], 0.5).unwrap() - cl.norms_sq()[1]).abs() < 1e-12);
}
