//! Dirichlet-Laplacian eigenbasis on intervals and boxes.
//!
//! Fields are stored as coefficients against the L²-orthonormal eigenfunctions
//! `ω_k(x) = Π_a sqrt(2/ℓ_a) sin(k_a π x_a / ℓ_a)`, so every Sobolev-type norm is a
//! diagonal weighted sum of squared coefficients.
//!
//! Pointwise work (nonlinearities, products) goes through a tensor Gauss–Legendre
//! grid. A product of `r` basis functions of wavenumber at most `K` is a
//! trigonometric polynomial of frequency at most `rKπ/ℓ`; the node count per axis
//! is chosen so that such products are integrated to rounding error.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Box,
}

/// An interval `(0, ℓ)` or a box `Π (0, ℓ_a)` in one to three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    kind: DomainKind,
    extents: Vec<f64>,
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self> {
        Self::new(DomainKind::Interval, vec![length])
    }

    pub fn cuboid(extents: &[f64]) -> Result<Self> {
        Self::new(DomainKind::Box, extents.to_vec())
    }

    pub fn new(kind: DomainKind, extents: Vec<f64>) -> Result<Self> {
        match kind {
            DomainKind::Interval if extents.len() != 1 => {
                return Err(Error::invalid("an interval has exactly one extent"))
            }
            DomainKind::Box if extents.is_empty() || extents.len() > 3 => {
                return Err(Error::invalid("a box has one to three extents"))
            }
            _ => {}
        }
        if let Some(bad) = extents.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::invalid(format!("extent {bad} is not a positive length")));
        }
        Ok(Self { kind, extents })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    /// Lebesgue measure |Ω|.
    pub fn volume(&self) -> f64 {
        self.extents.iter().product()
    }
}

/// Tensor Gauss–Legendre rule on the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    axis_nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    fn gauss_legendre(extents: &[f64], nodes_per_axis: &[usize]) -> Self {
        let rules: Vec<(Vec<f64>, Vec<f64>)> = extents
            .iter()
            .zip(nodes_per_axis)
            .map(|(&len, &q)| {
                let (x, w) = gauss_legendre_unit(q);
                (
                    x.iter().map(|t| 0.5 * len * (t + 1.0)).collect(),
                    w.iter().map(|v| 0.5 * len * v).collect(),
                )
            })
            .collect();
        let mut weights = vec![1.0];
        for (_, w) in &rules {
            weights = weights
                .iter()
                .flat_map(|a| w.iter().map(move |b| a * b))
                .collect();
        }
        Self {
            axis_nodes: rules.into_iter().map(|(x, _)| x).collect(),
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nodes_per_axis(&self) -> Vec<usize> {
        self.axis_nodes.iter().map(Vec::len).collect()
    }

    /// Coordinates of flattened node `index` (last axis varies fastest).
    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; self.axis_nodes.len()];
        for (axis, nodes) in self.axis_nodes.iter().enumerate().rev() {
            out[axis] = nodes[rem % nodes.len()];
            rem /= nodes.len();
        }
        out
    }
}

/// Nodes needed to integrate `e^{iπjx/ℓ}`, `j ≤ max_wavenumber`, on `(0, ℓ)` to
/// rounding error. The phase over the half interval is `Φ = πj/2`; Gauss–Legendre
/// reaches `1e−14` with about `0.56Φ + 22` nodes (measured up to `Φ ≈ 300`).
fn gauss_nodes_for(max_wavenumber: usize) -> usize {
    let phase = 0.5 * PI * max_wavenumber as f64;
    ((0.56 * phase + 22.0).ceil() as usize).max(max_wavenumber / 2 + 1)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let step = pn / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Eigen-pairs of `A = −Δ` with Dirichlet conditions, truncated to a tensor
/// block of wavenumbers and sorted by eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    domain: Domain,
    modes_per_axis: Vec<usize>,
    eigenvalues: Vec<f64>,
    mode_indices: Vec<Vec<usize>>,
    grid: QuadratureGrid,
    // basis[node * n_modes + mode]
    basis: Vec<f64>,
    // weights[node] * basis[node * n_modes + mode]
    weighted_basis: Vec<f64>,
}

/// Number of basis functions whose products the default grid integrates exactly.
pub const DEFAULT_PRODUCT_ORDER: usize = 4;

pub fn build_spectrum(domain: Domain, modes_per_axis: &[usize]) -> Result<Arc<Spectrum>> {
    Spectrum::new(domain, modes_per_axis)
}

impl Spectrum {
    pub fn new(domain: Domain, modes_per_axis: &[usize]) -> Result<Arc<Self>> {
        Self::with_product_order(domain, modes_per_axis, DEFAULT_PRODUCT_ORDER)
    }

    /// Builds a spectrum whose grid integrates products of `product_order`
    /// basis functions exactly.
    pub fn with_product_order(
        domain: Domain,
        modes_per_axis: &[usize],
        product_order: usize,
    ) -> Result<Arc<Self>> {
        if modes_per_axis.len() != domain.dimension() {
            return Err(Error::invalid(format!(
                "{} mode counts given for a {}-dimensional domain",
                modes_per_axis.len(),
                domain.dimension()
            )));
        }
        if modes_per_axis.contains(&0) {
            return Err(Error::invalid("at least one mode per axis is required"));
        }
        if product_order < 2 {
            return Err(Error::invalid("quadrature must resolve at least pairwise products"));
        }

        let extents = domain.extents().to_vec();
        let mut tuples: Vec<Vec<usize>> = vec![vec![]];
        for &k in modes_per_axis {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    (1..=k).map(move |j| {
                        let mut t = t.clone();
                        t.push(j);
                        t
                    })
                })
                .collect();
        }
        let eigen = |t: &[usize]| -> f64 {
            t.iter()
                .zip(&extents)
                .map(|(&k, &len)| (k as f64 * PI / len).powi(2))
                .sum()
        };
        tuples.sort_by(|a, b| eigen(a).total_cmp(&eigen(b)).then_with(|| a.cmp(b)));
        let eigenvalues: Vec<f64> = tuples.iter().map(|t| eigen(t)).collect();

        let nodes_per_axis: Vec<usize> = modes_per_axis
            .iter()
            .map(|&k| gauss_nodes_for(product_order * k))
            .collect();
        let grid = QuadratureGrid::gauss_legendre(&extents, &nodes_per_axis);

        // Per-axis 1D basis tables: axis_tables[a][node * K_a + (k - 1)].
        let axis_tables: Vec<Vec<f64>> = (0..extents.len())
            .map(|a| {
                let len = extents[a];
                let scale = (2.0 / len).sqrt();
                let nodes = &grid.axis_nodes[a];
                let k_max = modes_per_axis[a];
                let mut table = Vec::with_capacity(nodes.len() * k_max);
                for &x in nodes {
                    for k in 1..=k_max {
                        table.push(scale * (k as f64 * PI * x / len).sin());
                    }
                }
                table
            })
            .collect();

        let n_modes = tuples.len();
        let n_nodes = grid.len();
        let mut basis = vec![0.0; n_nodes * n_modes];
        let mut weighted_basis = vec![0.0; n_nodes * n_modes];
        let mut node_idx = vec![0usize; extents.len()];
        for node in 0..n_nodes {
            let mut rem = node;
            for a in (0..extents.len()).rev() {
                let q = nodes_per_axis[a];
                node_idx[a] = rem % q;
                rem /= q;
            }
            let w = grid.weights[node];
            for (m, t) in tuples.iter().enumerate() {
                let v: f64 = t
                    .iter()
                    .enumerate()
                    .map(|(a, &k)| axis_tables[a][node_idx[a] * modes_per_axis[a] + k - 1])
                    .product();
                basis[node * n_modes + m] = v;
                weighted_basis[node * n_modes + m] = w * v;
            }
        }

        Ok(Arc::new(Self {
            domain,
            modes_per_axis: modes_per_axis.to_vec(),
            eigenvalues,
            mode_indices: tuples,
            grid,
            basis,
            weighted_basis,
        }))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn modes_per_axis(&self) -> &[usize] {
        &self.modes_per_axis
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// First (smallest) Dirichlet eigenvalue λ₁.
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn mode_indices(&self) -> &[Vec<usize>] {
        &self.mode_indices
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// Value of eigenfunction `mode` at grid node `node`.
    pub fn basis_value(&self, node: usize, mode: usize) -> f64 {
        self.basis[node * self.len() + mode]
    }

    /// Evaluates a coefficient vector at every grid node.
    pub fn eval_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(coeffs.len(), n);
        for (row, o) in self.basis.chunks_exact(n).zip(out.iter_mut()) {
            *o = row.iter().zip(coeffs).map(|(b, c)| b * c).sum();
        }
    }

    /// L² projection of grid samples onto the eigenbasis.
    pub fn project_into(&self, values: &[f64], out: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(out.len(), n);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (row, &v) in self.weighted_basis.chunks_exact(n).zip(values) {
            if v != 0.0 {
                for (o, b) in out.iter_mut().zip(row) {
                    *o += b * v;
                }
            }
        }
    }

    /// Quadrature value of `∫_Ω s(x) dx` for grid samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.grid.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub(crate) fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// A function represented by its coefficients in the eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralField {
    spectrum: Arc<Spectrum>,
    coeffs: Vec<f64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.spectrum.same_as(&other.spectrum) && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn new(spectrum: Arc<Spectrum>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != spectrum.len() {
            return Err(Error::invalid(format!(
                "{} coefficients given for a {}-mode spectrum",
                coeffs.len(),
                spectrum.len()
            )));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidState(format!("coefficient {k} is not finite")));
        }
        Ok(Self { spectrum, coeffs })
    }

    pub(crate) fn from_raw(spectrum: Arc<Spectrum>, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), spectrum.len());
        Self { spectrum, coeffs }
    }

    pub fn zeros(spectrum: Arc<Spectrum>) -> Self {
        let n = spectrum.len();
        Self::from_raw(spectrum, vec![0.0; n])
    }

    /// `c · ω_mode` (zero-based mode index in eigenvalue order).
    pub fn single_mode(spectrum: Arc<Spectrum>, mode: usize, c: f64) -> Result<Self> {
        if mode >= spectrum.len() {
            return Err(Error::invalid(format!("mode {mode} out of range")));
        }
        let mut f = Self::zeros(spectrum);
        f.coeffs[mode] = c;
        Ok(f)
    }

    /// Builds a field from leading coefficients, padding the rest with zeros.
    pub fn from_leading(spectrum: Arc<Spectrum>, leading: &[f64]) -> Result<Self> {
        if leading.len() > spectrum.len() {
            return Err(Error::invalid("more coefficients than modes"));
        }
        let mut c = leading.to_vec();
        c.resize(spectrum.len(), 0.0);
        Self::new(spectrum, c)
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.spectrum.same_as(&other.spectrum) {
            Ok(())
        } else {
            Err(Error::invalid("fields live on different spectra"))
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self::from_raw(self.spectrum.clone(), coeffs))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self::from_raw(self.spectrum.clone(), coeffs))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_raw(
            self.spectrum.clone(),
            self.coeffs.iter().map(|c| c * factor).collect(),
        )
    }

    /// Coefficient inner product, equal to `∫ u v` by orthonormality.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    /// `‖u‖²`.
    pub fn l2_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `‖∇u‖² = Σ λ_k u_k²`.
    pub fn grad_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.spectrum.eigenvalues())
            .map(|(c, l)| l * c * c)
            .sum()
    }
}

fn check_finite(u: &SpectralField) -> Result<()> {
    if let Some(k) = u.coeffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::InvalidState(format!("coefficient {k} is not finite")));
    }
    Ok(())
}

/// `‖u‖_{H^s} = ‖A^{s/2} u‖ = sqrt(Σ λ_k^s u_k²)`.
pub fn hs_norm(u: &SpectralField, s: f64) -> Result<f64> {
    check_finite(u)?;
    if !s.is_finite() {
        return Err(Error::invalid("Sobolev index must be finite"));
    }
    let sum: f64 = u
        .coeffs
        .iter()
        .zip(u.spectrum.eigenvalues())
        .map(|(c, l)| l.powf(s) * c * c)
        .sum();
    Ok(sum.sqrt())
}

/// Squared time-dependent norm `‖u‖² + ε ‖∇u‖² = Σ (1 + ε λ_k) u_k²`.
pub fn ht_norm_sq(u: &SpectralField, eps_value: f64) -> Result<f64> {
    if !(eps_value >= 0.0 && eps_value.is_finite()) {
        return Err(Error::invalid(format!("ε = {eps_value} must be nonnegative")));
    }
    check_finite(u)?;
    Ok(ht_sq_raw(u.coeffs(), u.spectrum.eigenvalues(), eps_value))
}

pub(crate) fn ht_sq_raw(coeffs: &[f64], eigenvalues: &[f64], eps: f64) -> f64 {
    coeffs
        .iter()
        .zip(eigenvalues)
        .map(|(c, l)| (1.0 + eps * l) * c * c)
        .sum()
}

/// Squared higher-order norm `‖A^{α/2} u‖² + ε ‖A^{(1+α)/2} u‖² = Σ λ^α (1 + ελ) u²`.
pub fn ht_alpha_norm_sq(u: &SpectralField, eps_value: f64, alpha: f64) -> Result<f64> {
    if !(eps_value >= 0.0 && eps_value.is_finite()) {
        return Err(Error::invalid(format!("ε = {eps_value} must be nonnegative")));
    }
    check_finite(u)?;
    Ok(u.coeffs
        .iter()
        .zip(u.spectrum.eigenvalues())
        .map(|(c, l)| l.powf(alpha) * (1.0 + eps_value * l) * c * c)
        .sum())
}

/// Point values of a field on its spectrum's quadrature grid.
#[derive(Debug, Clone)]
pub struct GridSamples {
    spectrum: Arc<Spectrum>,
    values: Vec<f64>,
}

impl GridSamples {
    pub fn new(spectrum: Arc<Spectrum>, values: Vec<f64>) -> Result<Self> {
        if values.len() != spectrum.grid().len() {
            return Err(Error::invalid(format!(
                "{} samples given for a {}-node grid",
                values.len(),
                spectrum.grid().len()
            )));
        }
        Ok(Self { spectrum, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    /// Pointwise map, e.g. a nonlinearity applied to the samples.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            spectrum: self.spectrum.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if !self.spectrum.same_as(&other.spectrum) {
            return Err(Error::invalid("samples live on different grids"));
        }
        Ok(Self {
            spectrum: self.spectrum.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// Quadrature integral over the domain.
    pub fn integral(&self) -> f64 {
        self.spectrum.integrate(&self.values)
    }
}

pub fn evaluate_on_grid(u: &SpectralField) -> GridSamples {
    let mut values = vec![0.0; u.spectrum.grid().len()];
    u.spectrum.eval_into(&u.coeffs, &mut values);
    GridSamples {
        spectrum: u.spectrum.clone(),
        values,
    }
}

pub fn project(samples: &GridSamples, spectrum: &Arc<Spectrum>) -> Result<SpectralField> {
    if !samples.spectrum.same_as(spectrum) {
        return Err(Error::invalid("samples were taken on a different grid"));
    }
    let mut coeffs = vec![0.0; spectrum.len()];
    spectrum.project_into(&samples.values, &mut coeffs);
    SpectralField::new(spectrum.clone(), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_interval(modes: usize) -> Arc<Spectrum> {
        build_spectrum(Domain::interval(PI).unwrap(), &[modes]).unwrap()
    }

    #[test]
    fn interval_eigenvalues_are_squares() {
        let s = unit_interval(3);
        for (got, want) in s.eigenvalues().iter().zip([1.0, 4.0, 9.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let s = build_spectrum(Domain::interval(2.0 * PI).unwrap(), &[2]).unwrap();
        assert_abs_diff_eq!(s.eigenvalues()[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cube_first_eigenvalue_is_three() {
        let s = build_spectrum(Domain::cuboid(&[PI, PI, PI]).unwrap(), &[1, 1, 1]).unwrap();
        assert_eq!(s.len(), 1);
        assert_abs_diff_eq!(s.lambda1(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn box_eigenvalues_sorted_and_counted() {
        let s = build_spectrum(Domain::cuboid(&[PI, 2.0]).unwrap(), &[3, 4]).unwrap();
        assert_eq!(s.len(), 12);
        assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        for (t, l) in s.mode_indices().iter().zip(s.eigenvalues()) {
            let want = (t[0] as f64).powi(2) + (t[1] as f64 * PI / 2.0).powi(2);
            assert_abs_diff_eq!(*l, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Domain::interval(0.0).is_err());
        assert!(Domain::interval(-1.0).is_err());
        assert!(Domain::cuboid(&[1.0, f64::NAN]).is_err());
        assert!(Domain::cuboid(&[1.0; 4]).is_err());
        let d = Domain::interval(1.0).unwrap();
        assert!(matches!(
            build_spectrum(d.clone(), &[0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(build_spectrum(d, &[2, 2]).is_err());
    }

    #[test]
    fn basis_is_orthonormal_under_quadrature() {
        for s in [
            unit_interval(12),
            build_spectrum(Domain::cuboid(&[1.0, 2.5]).unwrap(), &[4, 3]).unwrap(),
            build_spectrum(Domain::cuboid(&[PI, 1.0, 2.0]).unwrap(), &[2, 3, 2]).unwrap(),
        ] {
            let n = s.len();
            for i in 0..n {
                for j in 0..n {
                    let g: f64 = (0..s.grid().len())
                        .map(|q| s.grid().weights()[q] * s.basis_value(q, i) * s.basis_value(q, j))
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-12, "gram({i},{j}) = {g}");
                }
            }
        }
    }

    #[test]
    fn norms_on_small_examples() {
        let s = unit_interval(2);
        let zero = SpectralField::zeros(s.clone());
        assert_eq!(hs_norm(&zero, 1.7).unwrap(), 0.0);
        assert_eq!(ht_norm_sq(&zero, 0.3).unwrap(), 0.0);

        let m = SpectralField::single_mode(s.clone(), 1, 1.0).unwrap();
        assert_abs_diff_eq!(hs_norm(&m, 1.0).unwrap(), 2.0, epsilon = 1e-14);

        let both = SpectralField::new(s.clone(), vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(hs_norm(&both, 2.0).unwrap(), 17f64.sqrt(), epsilon = 1e-14);

        let first = SpectralField::single_mode(s, 0, 1.0).unwrap();
        assert_abs_diff_eq!(ht_norm_sq(&first, 0.5).unwrap(), 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(
            ht_norm_sq(&both, 0.0).unwrap(),
            hs_norm(&both, 0.0).unwrap().powi(2),
            epsilon = 1e-14
        );
    }

    #[test]
    fn norm_errors() {
        let s = unit_interval(2);
        let u = SpectralField::zeros(s.clone());
        assert!(matches!(ht_norm_sq(&u, -0.1), Err(Error::InvalidArgument(_))));
        let bad = SpectralField::from_raw(s, vec![f64::NAN, 0.0]);
        assert!(matches!(hs_norm(&bad, 0.0), Err(Error::InvalidState(_))));
    }

    #[test]
    fn grid_round_trip() {
        let s = unit_interval(8);
        let zero = SpectralField::zeros(s.clone());
        let samples = evaluate_on_grid(&zero);
        assert!(samples.values().iter().all(|&v| v == 0.0));
        assert!(project(&samples, &s).unwrap().is_zero());

        for k in 0..8 {
            let u = SpectralField::single_mode(s.clone(), k, 1.3).unwrap();
            let back = project(&evaluate_on_grid(&u), &s).unwrap();
            for (a, b) in back.coeffs().iter().zip(u.coeffs()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1, 2, 5, 12, 40] {
            let (x, w) = gauss_legendre_unit(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 2;
            let quad: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((quad - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = unit_interval(4);
        let b = unit_interval(5);
        let samples = evaluate_on_grid(&SpectralField::zeros(a));
        assert!(matches!(project(&samples, &b), Err(Error::InvalidArgument(_))));
        assert!(GridSamples::new(b, vec![0.0; 3]).is_err());
    }

    #[test]
    fn product_of_modes_matches_sine_expansion() {
        // On (0, π) with ω_k = sqrt(2/π) sin(kx):
        // ω_1 ω_2 = (1/π)(cos x − cos 3x), and
        // ∫ cos(jx) sin(kx) dx = k(1 − (−1)^{j+k}) / (k² − j²) for k ≠ j, 0 for k = j.
        let s = unit_interval(10);
        let w1 = evaluate_on_grid(&SpectralField::single_mode(s.clone(), 0, 1.0).unwrap());
        let w2 = evaluate_on_grid(&SpectralField::single_mode(s.clone(), 1, 1.0).unwrap());
        let prod = project(&w1.mul(&w2).unwrap(), &s).unwrap();
        let cos_sin = |j: f64, k: f64| -> f64 {
            if j == k {
                0.0
            } else {
                let sign = if ((j + k) as i64) % 2 == 0 { 1.0 } else { -1.0 };
                k * (1.0 - sign) / (k * k - j * j)
            }
        };
        for k in 1..=10 {
            let kf = k as f64;
            let want = (2.0 / PI).sqrt() / PI * (cos_sin(1.0, kf) - cos_sin(3.0, kf));
            assert!(
                (prod.coeffs()[k - 1] - want).abs() < 1e-13,
                "mode {k}: {} vs {want}",
                prod.coeffs()[k - 1]
            );
        }
    }
}
