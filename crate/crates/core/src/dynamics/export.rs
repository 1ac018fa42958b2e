//! Trajectory export: CSV norm histories and `XSBT` binary state dumps.
//!
//! `XSBT` layout, all little-endian: the magic bytes `XSBT`, then `version`,
//! `nx` and `nt` as `u32`, then `nt` rows of `nx` complex values, each stored
//! as an `f32` real part followed by an `f32` imaginary part. Row `n` holds the
//! physical samples at time node `n`.

use std::io::{Read, Write};

use num_complex::Complex;

use super::Trajectory;
use crate::error::{LabError, Result};
use crate::scalar::Scalar;
use crate::spectral::{l2_norm_samples, sobolev_norm, Dft};

pub const XSBT_MAGIC: [u8; 4] = *b"XSBT";
pub const XSBT_VERSION: u32 = 1;

/// Decoded `XSBT` contents.
#[derive(Debug, Clone, PartialEq)]
pub struct XsbtDump {
    pub nx: usize,
    pub nt: usize,
    pub values: Vec<Complex<f32>>,
}

pub fn write_xsbt<T: Scalar, W: Write>(mut w: W, nx: usize, rows: &[Vec<Complex<T>>]) -> Result<()> {
    let fmt = |e: std::io::Error| LabError::Format(format!("writing XSBT: {e}"));
    if rows.iter().any(|r| r.len() != nx) {
        return Err(LabError::DimensionMismatch {
            expected: format!("rows of {nx} values"),
            got: "ragged rows".into(),
        });
    }
    let nt = u32::try_from(rows.len()).map_err(|_| LabError::Format("too many rows".into()))?;
    let nx32 = u32::try_from(nx).map_err(|_| LabError::Format("row too long".into()))?;
    let mut buf = Vec::with_capacity(16 + rows.len() * nx * 8);
    buf.extend_from_slice(&XSBT_MAGIC);
    buf.extend_from_slice(&XSBT_VERSION.to_le_bytes());
    buf.extend_from_slice(&nx32.to_le_bytes());
    buf.extend_from_slice(&nt.to_le_bytes());
    for z in rows.iter().flatten() {
        buf.extend_from_slice(&(z.re.to_f64_lossy() as f32).to_le_bytes());
        buf.extend_from_slice(&(z.im.to_f64_lossy() as f32).to_le_bytes());
    }
    w.write_all(&buf).map_err(fmt)
}

pub fn read_xsbt<R: Read>(mut r: R) -> Result<XsbtDump> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| LabError::Format(format!("reading XSBT: {e}")))?;
    if bytes.len() < 16 || bytes[..4] != XSBT_MAGIC {
        return Err(LabError::Format("missing XSBT header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != XSBT_VERSION {
        return Err(LabError::Format(format!("unsupported XSBT version {version}")));
    }
    let (nx, nt) = (word(8) as usize, word(12) as usize);
    let body = &bytes[16..];
    if body.len() != nx * nt * 8 {
        return Err(LabError::Format(format!(
            "XSBT body has {} bytes, header implies {}",
            body.len(),
            nx * nt * 8
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| {
            Complex::new(
                f32::from_le_bytes(c[..4].try_into().expect("4 bytes")),
                f32::from_le_bytes(c[4..].try_into().expect("4 bytes")),
            )
        })
        .collect();
    Ok(XsbtDump { nx, nt, values })
}

impl<T: Scalar> Trajectory<T> {
    /// `t,l2,hs` rows, one per time node.
    pub fn to_csv(&self, s: T) -> String {
        let mut out = String::from("t,l2,hs\n");
        for (t, u) in self.times.iter().zip(&self.states) {
            let l2 = sobolev_norm(u, T::zero(), &self.grid);
            let hs = sobolev_norm(u, s, &self.grid);
            out.push_str(&format!(
                "{},{:e},{:e}\n",
                t.to_f64_lossy(),
                l2.to_f64_lossy(),
                hs.to_f64_lossy()
            ));
        }
        out
    }

    /// Physical samples at every node.
    pub fn samples(&self) -> Result<Vec<Vec<Complex<T>>>> {
        let dft = Dft::new(&self.grid);
        self.states.iter().map(|s| dft.samples(s)).collect()
    }

    pub fn write_xsbt<W: Write>(&self, w: W) -> Result<()> {
        write_xsbt(w, self.grid.nx, &self.samples()?)
    }

    /// Largest relative deviation of `‖u(t)‖_{L²}` from `‖u₀‖_{L²}`.
    pub fn l2_drift(&self) -> Result<T> {
        let rows = self.samples()?;
        let n0 = l2_norm_samples(&rows[0], &self.grid);
        Ok(rows
            .iter()
            .map(|r| ((l2_norm_samples(r, &self.grid) - n0) / n0).abs())
            .fold(T::zero(), T::max))
    }
}
