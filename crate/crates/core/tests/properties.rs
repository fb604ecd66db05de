mod common;

use common::*;
use nldiff_core::integrator::{step, GalerkinState, Scheme};
use nldiff_core::model::ModelConfig;
use nldiff_core::spectral::{evaluate_on_grid, hs_norm, ht_norm_sq, project, SpectralField};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(1000) })]

    #[test]
    fn parseval_holds(u in field_strategy()) {
        parseval(&u)?;
    }

    #[test]
    fn poincare_holds(u in field_strategy()) {
        poincare(&u)?;
    }

    #[test]
    fn interpolation_has_constant_one(u in field_strategy(), s1 in 0.01f64..0.99, s2 in 0.01f64..0.99, th in 0.01f64..0.99) {
        interpolation(&u, s1, s2, th)?;
    }

    #[test]
    fn semidistance_triangle((a, b, c) in clouds_strategy()) {
        triangle(&a, &b, &c)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(200) })]

    #[test]
    fn grid_round_trip(u in field_strategy()) {
        let back = project(&evaluate_on_grid(&u), u.spectrum()).unwrap();
        for (a, b) in back.coeffs().iter().zip(u.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn monotone_embedding(c in prop::collection::vec(-5.0f64..5.0, 1..10), s1 in 0.0f64..2.0, s2 in 0.0f64..2.0) {
        let s = nldiff_core::spectral::build_spectrum(
            nldiff_core::spectral::Domain::interval(std::f64::consts::PI).unwrap(), &[c.len()]).unwrap();
        let u = SpectralField::new(s, c).unwrap();
        let (hi, lo) = if s1 >= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(hs_norm(&u, hi).unwrap() >= hs_norm(&u, lo).unwrap() * (1.0 - 1e-14));
    }

    #[test]
    fn ht_norm_interpolates_l2_and_gradient(u in field_strategy(), eps in 0.0f64..3.0) {
        let lhs = ht_norm_sq(&u, eps).unwrap();
        let rhs = u.l2_sq() + eps * u.grad_sq();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        let l2 = hs_norm(&u, 0.0).unwrap().powi(2);
        prop_assert!((ht_norm_sq(&u, 0.0).unwrap() - l2).abs() <= 1e-12 * l2.max(1.0));
    }

    #[test]
    fn implicit_euler_never_amplifies_linear_modes(c in prop::collection::vec(-10.0f64..10.0, 8), dt in 0.001f64..0.1) {
        let cfg = ModelConfig::linear_model(0.5, 8).unwrap();
        let u = SpectralField::new(cfg.spectrum().clone(), c).unwrap();
        let next = step(Scheme::imex(1.0), &cfg, &GalerkinState { t: 0.0, u: u.clone() }, dt).unwrap();
        for (a, b) in next.u.coeffs().iter().zip(u.coeffs()) {
            prop_assert!(a.abs() <= b.abs());
        }
    }
}
