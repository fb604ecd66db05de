use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::io::fmt;
use crate::spectral::{ht_sq_raw, SpectralField, Spectrum};

/// Where a cloud came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudOrigin {
    pub tau: f64,
    pub ensemble: String,
}

/// Finite sample of a set in `H_t` at a single time.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    t: f64,
    eps_t: f64,
    points: Vec<SpectralField>,
    origin: CloudOrigin,
}

impl PointCloud {
    pub fn new(t: f64, eps_t: f64, points: Vec<SpectralField>, origin: CloudOrigin) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::invalid("a point cloud needs at least one point"))?;
        for p in &points[1..] {
            p.check_same(first)?;
        }
        if eps_t.is_nan() || eps_t < 0.0 {
            return Err(Error::invalid(format!("ε(t) = {eps_t} must be nonnegative")));
        }
        Ok(Self {
            t,
            eps_t,
            points,
            origin,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eps_t(&self) -> f64 {
        self.eps_t
    }

    pub fn points(&self) -> &[SpectralField] {
        &self.points
    }

    pub fn origin(&self) -> &CloudOrigin {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        self.points[0].spectrum()
    }

    fn dist_sq(&self, a: &[f64], b: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend(a.iter().zip(b).map(|(x, y)| x - y));
        ht_sq_raw(scratch, self.spectrum().eigenvalues(), self.eps_t)
    }

    /// `‖p‖²_{H_t}` for every point.
    pub fn norms_sq(&self) -> Vec<f64> {
        let lambda = self.spectrum().eigenvalues();
        self.points
            .iter()
            .map(|p| ht_sq_raw(p.coeffs(), lambda, self.eps_t))
            .collect()
    }

    /// Largest pairwise `H_t` distance.
    pub fn diameter(&self) -> f64 {
        let mut scratch = Vec::new();
        let mut best: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.max(self.dist_sq(a.coeffs(), b.coeffs(), &mut scratch));
            }
        }
        best.sqrt()
    }

    /// Rows `point_id,coeff_1..coeff_N`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.spectrum().len();
        let io = |e: std::io::Error| Error::InvalidState(format!("i/o failure: {e}"));
        let mut header = vec!["point_id".to_string()];
        header.extend((1..=n).map(|k| format!("coeff_{k}")));
        writeln!(w, "{}", header.join(",")).map_err(io)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(p.coeffs().iter().map(|&c| fmt(c)));
            writeln!(w, "{}", row.join(",")).map_err(io)?;
        }
        Ok(())
    }
}

/// Directed Hausdorff semidistance with its witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemidistanceReport {
    pub value: f64,
    /// Source point attaining the supremum.
    pub source_index: usize,
    /// Its nearest target point.
    pub target_index: usize,
    pub t: f64,
    pub eps_t: f64,
}

/// `sup_{x ∈ source} inf_{y ∈ target} ‖x − y‖_{H_t}`.
pub fn hausdorff_semidistance(source: &PointCloud, target: &PointCloud) -> Result<SemidistanceReport> {
    if (source.t - target.t).abs() > 1e-12 * source.t.abs().max(1.0) {
        return Err(Error::invalid(format!(
            "clouds live at different times {} and {}",
            source.t, target.t
        )));
    }
    if source.eps_t != target.eps_t {
        return Err(Error::invalid("clouds carry different ε(t)"));
    }
    source.points[0].check_same(&target.points[0])?;
    let mut scratch = Vec::new();
    let mut report = SemidistanceReport {
        value: 0.0,
        source_index: 0,
        target_index: 0,
        t: source.t,
        eps_t: source.eps_t,
    };
    let mut sup = f64::NEG_INFINITY;
    for (i, x) in source.points.iter().enumerate() {
        let (mut inf, mut arg) = (f64::INFINITY, 0);
        for (j, y) in target.points.iter().enumerate() {
            let d = source.dist_sq(x.coeffs(), y.coeffs(), &mut scratch);
            if d < inf {
                inf = d;
                arg = j;
            }
        }
        if inf > sup {
            sup = inf;
            report.source_index = i;
            report.target_index = arg;
        }
    }
    report.value = sup.max(0.0).sqrt();
    Ok(report)
}

/// Deterministic family of initial data: member `i` has a random direction
/// supported on the lowest `low_modes` modes and `H_t` radius
/// `radii[i % radii.len()]`. A longer ensemble extends a shorter one with the
/// same seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub count: usize,
    pub radii: Vec<f64>,
    pub low_modes: usize,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            count: 64,
            radii: vec![0.1, 1.0, 10.0],
            low_modes: 4,
            seed: 0,
        }
    }
}

impl EnsembleSpec {
    pub fn generate(&self, spectrum: &Arc<Spectrum>, eps: f64) -> Result<Vec<SpectralField>> {
        if self.count == 0 || self.radii.is_empty() || self.low_modes == 0 {
            return Err(Error::invalid("ensemble needs members, radii and at least one mode"));
        }
        if self.radii.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::invalid("ensemble radii must be finite and nonnegative"));
        }
        let modes = self.low_modes.min(spectrum.len());
        let lambda = spectrum.eigenvalues();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|i| {
                let mut c = vec![0.0; spectrum.len()];
                for v in c.iter_mut().take(modes) {
                    *v = StandardNormal.sample(&mut rng);
                }
                let norm = ht_sq_raw(&c, lambda, eps).sqrt();
                let r = self.radii[i % self.radii.len()];
                let scale = if norm > 0.0 { r / norm } else { 0.0 };
                SpectralField::new(spectrum.clone(), c.iter().map(|v| v * scale).collect())
            })
            .collect()
    }

    /// The constant-radius universe `D(τ) = B(0, R_max)` is tempered for every
    /// `σ > 0`: `e^{στ}R²_max → 0` as `τ → −∞`. Returns `e^{στ}R²_max`.
    pub fn tempered_weight(&self, sigma: f64, tau: f64) -> f64 {
        let r = self.radii.iter().copied().fold(0.0, f64::max);
        (sigma * tau).exp() * r * r
    }
}
