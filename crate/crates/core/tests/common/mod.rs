#![allow(dead_code)]

//! Property checks shared by the property suite and the acceptance gate.

use std::sync::Arc;

use nldiff_core::pullback::{hausdorff_semidistance, CloudOrigin, PointCloud};
use nldiff_core::spectral::{build_spectrum, evaluate_on_grid, hs_norm, Domain, SpectralField, Spectrum};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// A random domain (interval or 2D box) with a few modes per axis.
pub fn spectrum_strategy() -> impl Strategy<Value = Arc<Spectrum>> {
    prop_oneof![
        (0.5f64..6.0, 1usize..12).prop_map(|(l, n)| build_spectrum(Domain::interval(l).unwrap(), &[n]).unwrap()),
        (0.5f64..4.0, 0.5f64..4.0, 1usize..5, 1usize..5)
            .prop_map(|(a, b, m, n)| build_spectrum(Domain::cuboid(&[a, b]).unwrap(), &[m, n]).unwrap()),
    ]
}

pub fn field_strategy() -> impl Strategy<Value = SpectralField> {
    spectrum_strategy().prop_flat_map(|s| {
        let n = s.len();
        prop::collection::vec(-5.0f64..5.0, n).prop_map(move |c| SpectralField::new(s.clone(), c).unwrap())
    })
}

pub fn parseval(u: &SpectralField) -> Result<(), TestCaseError> {
    let spectral = hs_norm(u, 0.0).unwrap().powi(2);
    let grid = evaluate_on_grid(u);
    let quad = grid.mul(&grid).unwrap().integral();
    prop_assert!((spectral - quad).abs() <= 1e-10 * spectral.max(1.0), "{spectral} vs {quad}");
    Ok(())
}

pub fn poincare(u: &SpectralField) -> Result<(), TestCaseError> {
    let l1 = u.spectrum().lambda1();
    let h1 = hs_norm(u, 1.0).unwrap().powi(2);
    let l2 = hs_norm(u, 0.0).unwrap().powi(2);
    prop_assert!(h1 >= l1 * l2 * (1.0 - 1e-14), "{h1} < {l1}·{l2}");
    Ok(())
}

pub fn interpolation(u: &SpectralField, s1: f64, s2: f64, theta: f64) -> Result<(), TestCaseError> {
    let mid = hs_norm(u, (1.0 - theta) * s1 + theta * s2).unwrap();
    let bound = hs_norm(u, s1).unwrap().powf(1.0 - theta) * hs_norm(u, s2).unwrap().powf(theta);
    prop_assert!(mid <= bound * (1.0 + 1e-12) + 1e-300, "{mid} > {bound}");
    Ok(())
}

fn cloud_of(s: &Arc<Spectrum>, eps: f64, pts: &[Vec<f64>]) -> PointCloud {
    let fields = pts
        .iter()
        .map(|c| SpectralField::new(s.clone(), c.clone()).unwrap())
        .collect();
    let origin = CloudOrigin {
        tau: 0.0,
        ensemble: "random".into(),
    };
    PointCloud::new(0.0, eps, fields, origin).unwrap()
}

/// Three random clouds on a common interval spectrum with a shared `ε`.
pub fn clouds_strategy() -> impl Strategy<Value = (PointCloud, PointCloud, PointCloud)> {
    (1usize..6, 0.0f64..2.0).prop_flat_map(|(n, eps)| {
        let s = build_spectrum(Domain::interval(std::f64::consts::PI).unwrap(), &[n]).unwrap();
        let cloud = move || prop::collection::vec(prop::collection::vec(-3.0f64..3.0, n), 1..6);
        (cloud(), cloud(), cloud()).prop_map(move |(a, b, c)| {
            (cloud_of(&s, eps, &a), cloud_of(&s, eps, &b), cloud_of(&s, eps, &c))
        })
    })
}

pub fn triangle(a: &PointCloud, b: &PointCloud, c: &PointCloud) -> Result<(), TestCaseError> {
    let ac = hausdorff_semidistance(a, c).unwrap().value;
    let ab = hausdorff_semidistance(a, b).unwrap().value;
    let bc = hausdorff_semidistance(b, c).unwrap().value;
    prop_assert!(ac <= ab + bc + 1e-12 * (1.0 + ab + bc), "{ac} > {ab} + {bc}");
    Ok(())
}
