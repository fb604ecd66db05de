//! Trajectory export: CSV and the `NLDIFF1` binary snapshot format.
//!
//! Binary layout, all little-endian: the 7 magic bytes `NLDIFF1`, `u64` mode
//! count `N`, `u64` state count `S`, then `S` records of `N + 1` doubles
//! `(t, c_1, …, c_N)`.

use std::io::{self, BufRead, Read, Write};

use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::ht_sq_raw;

pub const SNAPSHOT_MAGIC: &[u8; 7] = b"NLDIFF1";

fn io_err(e: io::Error) -> Error {
    Error::InvalidState(format!("i/o failure: {e}"))
}

/// Header `t,coeff_1..coeff_N,l2_sq,grad_sq,ht_sq` and one row per state.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let n = traj.spectrum().len();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|k| format!("coeff_{k}")));
    header.extend(["l2_sq", "grad_sq", "ht_sq"].map(String::from));
    writeln!(w, "{}", header.join(",")).map_err(io_err)?;
    let lambda = traj.spectrum().eigenvalues();
    for (state, row) in traj.states.iter().zip(&traj.ledger) {
        let mut fields = vec![fmt(state.t)];
        fields.extend(state.u.coeffs().iter().map(|&c| fmt(c)));
        fields.push(fmt(row.l2_sq));
        fields.push(fmt(row.grad_sq));
        fields.push(fmt(ht_sq_raw(state.u.coeffs(), lambda, row.eps)));
        writeln!(w, "{}", fields.join(",")).map_err(io_err)?;
    }
    Ok(())
}

/// Energy ledger as CSV.
pub fn write_ledger_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    writeln!(
        w,
        "t,l2_sq,grad_sq,eps,eps_prime,diffusion,energy,dissipation,work_f,work_h"
    )
    .map_err(io_err)?;
    for r in &traj.ledger {
        let v = [
            r.t,
            r.l2_sq,
            r.grad_sq,
            r.eps,
            r.eps_prime,
            r.diffusion,
            r.energy(),
            r.dissipation,
            r.work_f,
            r.work_h,
        ];
        let line: Vec<String> = v.iter().map(|&x| fmt(x)).collect();
        writeln!(w, "{}", line.join(",")).map_err(io_err)?;
    }
    Ok(())
}

/// Shortest representation that parses back to the same double.
pub fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Parses a trajectory CSV back into `(t, coefficients)` pairs.
pub fn read_trajectory_csv<R: BufRead>(r: R) -> Result<Vec<(f64, Vec<f64>)>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid("empty csv"))?
        .map_err(io_err)?;
    let cols: Vec<&str> = header.split(',').collect();
    let n = cols.iter().filter(|c| c.starts_with("coeff_")).count();
    if cols.first() != Some(&"t") || cols.len() != n + 4 {
        return Err(Error::invalid("unexpected trajectory csv header"));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(io_err)?;
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| Error::invalid(format!("bad number {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if v.len() != n + 4 {
            return Err(Error::invalid("ragged trajectory csv row"));
        }
        out.push((v[0], v[1..=n].to_vec()));
    }
    Ok(out)
}

pub fn write_snapshot<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let n = traj.spectrum().len() as u64;
    w.write_all(SNAPSHOT_MAGIC).map_err(io_err)?;
    w.write_all(&n.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(traj.states.len() as u64).to_le_bytes())
        .map_err(io_err)?;
    for s in &traj.states {
        w.write_all(&s.t.to_le_bytes()).map_err(io_err)?;
        for c in s.u.coeffs() {
            w.write_all(&c.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Vec<(f64, Vec<f64>)>> {
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::invalid("not an NLDIFF1 snapshot"));
    }
    let mut word = [0u8; 8];
    let mut next_u64 = |r: &mut R| -> Result<u64> {
        r.read_exact(&mut word).map_err(io_err)?;
        Ok(u64::from_le_bytes(word))
    };
    let n = next_u64(&mut r)? as usize;
    let count = next_u64(&mut r)? as usize;
    let mut out = Vec::with_capacity(count.min(1 << 20));
    let mut buf = vec![0u8; 8 * (n + 1)];
    for _ in 0..count {
        r.read_exact(&mut buf).map_err(io_err)?;
        let vals: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        out.push((vals[0], vals[1..].to_vec()));
    }
    Ok(out)
}
