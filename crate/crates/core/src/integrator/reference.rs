use super::system::{full_rhs, GalerkinSystem, SemilinearSystem};
use super::trajectory::{check_inputs, GalerkinState, LedgerRow, Trajectory};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::spectral::SpectralField;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_HAT: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) on a semilinear system. Each accepted step
/// has estimated local error at most `tol · max(1, |y_i|)` in every unknown;
/// the fifth-order solution is propagated. `observe` sees every accepted state.
pub(crate) fn dopri5<S: SemilinearSystem + ?Sized>(
    sys: &mut S,
    t0: f64,
    t1: f64,
    y: &mut [f64],
    tol: f64,
    mut observe: impl FnMut(&mut S, f64, &[f64]) -> Result<()>,
) -> Result<()> {
    let n = y.len();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut rates = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut t = t0;
    sys.check_finite(t, y)?;
    observe(sys, t, y)?;
    if t1 <= t0 {
        return Ok(());
    }
    full_rhs(sys, t, y, &mut rates, &mut k[0])?;
    let scale0: f64 = k[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut h = if scale0 > 0.0 {
        (0.01 * tol.powf(0.2) / scale0).min(t1 - t0)
    } else {
        (t1 - t0).min(0.1)
    };
    let min_step = 1e-14 * t0.abs().max(t1.abs()).max(1.0);
    while t < t1 {
        if t + h > t1 || t1 - (t + h) < min_step {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                stage[i] = acc;
            }
            let (_, rest) = k.split_at_mut(s);
            full_rhs(sys, t + C[s] * h, &stage, &mut rates, &mut rest[0])?;
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..7 {
                hi += B[s] * k[s][i];
                lo += B_HAT[s] * k[s][i];
            }
            y5[i] = y[i] + h * hi;
            let e = (h * (hi - lo)).abs() / (tol * y[i].abs().max(y5[i].abs()).max(1.0));
            err = err.max(e);
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }
        if err <= 1.0 {
            t += h;
            if t1 - t < min_step {
                t = t1;
            }
            y.copy_from_slice(&y5);
            sys.check_finite(t, y)?;
            observe(sys, t, y)?;
            // First-same-as-last: stage 7 is the derivative at the new point.
            k.swap(0, 6);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if t < t1 && h < min_step {
            return Err(Error::Stiffness { t, step: h });
        }
    }
    Ok(())
}

/// High-accuracy adaptive solution used as ground truth.
pub fn reference_solve(
    config: &ModelConfig,
    t_from: f64,
    t_to: f64,
    u0: &SpectralField,
    tol: f64,
) -> Result<Trajectory> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::invalid(format!("tolerance {tol} outside [1e−13, 1e−6]")));
    }
    check_inputs(config, t_from, t_to, u0)?;
    let spectrum = config.spectrum().clone();
    let mut sys = GalerkinSystem::new(config);
    let mut y = u0.coeffs().to_vec();
    let mut states = Vec::new();
    let mut ledger = Vec::new();
    dopri5(&mut sys, t_from, t_to, &mut y, tol, |sys, t, y| {
        states.push(GalerkinState {
            t,
            u: SpectralField::from_raw(spectrum.clone(), y.to_vec()),
        });
        ledger.push(LedgerRow::compute(sys, t, y));
        Ok(())
    })?;
    Ok(Trajectory {
        scheme: format!("dopri5(tol={tol:e})"),
        dt: None,
        states,
        ledger,
    })
}
