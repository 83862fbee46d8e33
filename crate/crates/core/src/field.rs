//! Spectral field container and the DFT contract.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CascadeError, Result};
use crate::grid::WavenumberGrid;

#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<WavenumberGrid>,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Arc<WavenumberGrid>) -> Self {
        let data = vec![Complex64::default(); grid.len()];
        Self { grid, data }
    }

    pub fn from_data(grid: Arc<WavenumberGrid>, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(CascadeError::ShapeMismatch { expected: grid.len(), got: data.len() });
        }
        Ok(Self { grid, data })
    }

    /// Builds a field by evaluating `f` at every wave vector.
    pub fn from_fn(grid: Arc<WavenumberGrid>, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let data = (0..grid.len()).map(|i| f(&grid.k_vector(i))).collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &Arc<WavenumberGrid> {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        for (u, v) in self.data.iter_mut().zip(&other.data) {
            *u += a * v;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Averages `û[k]` with `conj(û[-k])`.
    pub fn enforce_hermitian(&mut self) {
        let neg = self.grid.neg_indices();
        for i in 0..self.data.len() {
            let j = neg[i];
            if j < i {
                continue;
            }
            if j == i {
                self.data[i].im = 0.0;
            } else {
                let a = 0.5 * (self.data[i] + self.data[j].conj());
                self.data[i] = a;
                self.data[j] = a.conj();
            }
        }
    }

    pub fn project_low_modes(&mut self, kappa: f64) {
        for (v, &m) in self.data.iter_mut().zip(self.grid.modulus()) {
            if m <= kappa {
                *v = Complex64::default();
            }
        }
    }

    /// `max_k |û[k] - conj(û[-k])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let neg = self.grid.neg_indices();
        (0..self.data.len())
            .map(|i| (self.data[i] - self.data[neg[i]].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `max_{|k| ≤ κ} |û[k]|`.
    pub fn low_mode_residual(&self, kappa: f64) -> f64 {
        self.data
            .iter()
            .zip(self.grid.modulus())
            .filter(|(_, &m)| m <= kappa)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    /// `σ²_u = Σ_k |û[k]|² Δk`, with a single Δk factor whatever `d`.
    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dk()
    }

    /// Unnormalized forward DFT of a real physical array.
    pub fn dft_forward(grid: Arc<WavenumberGrid>, u: &[f64]) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(CascadeError::ShapeMismatch { expected: grid.len(), got: u.len() });
        }
        let mut data: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        grid.plan().forward(&mut data);
        Ok(Self { grid, data })
    }

    /// Inverse DFT with the `1/N^d` factor, keeping the imaginary part.
    pub fn dft_inverse_complex(&self) -> Vec<Complex64> {
        let mut data = self.data.clone();
        self.grid.plan().inverse(&mut data);
        data
    }

    /// Real part of the inverse DFT.
    pub fn dft_inverse(&self) -> Vec<f64> {
        self.dft_inverse_complex().into_iter().map(|v| v.re).collect()
    }

    pub fn write_snapshot<W: Write>(&self, w: &mut W, t: f64, precision: Precision) -> Result<()> {
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.d() as u32).to_le_bytes())?;
        w.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        w.write_all(&self.grid.l_tot().to_le_bytes())?;
        w.write_all(&t.to_le_bytes())?;
        w.write_all(&[precision as u8])?;
        let mut buf = Vec::with_capacity(self.data.len() * 16);
        for v in &self.data {
            match precision {
                Precision::Complex64 => {
                    buf.extend_from_slice(&(v.re as f32).to_le_bytes());
                    buf.extend_from_slice(&(v.im as f32).to_le_bytes());
                }
                Precision::Complex128 => {
                    buf.extend_from_slice(&v.re.to_le_bytes());
                    buf.extend_from_slice(&v.im.to_le_bytes());
                }
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads a snapshot, rebuilding the grid it was written on. Returns the field and its time.
    pub fn read_snapshot<R: Read>(r: &mut R) -> Result<(Self, f64)> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(CascadeError::Snapshot("bad magic".into()));
        }
        let version = u32::from_le_bytes(read_array(r)?);
        if version != SNAPSHOT_VERSION {
            return Err(CascadeError::Snapshot(format!("unsupported version {version}")));
        }
        let d = u32::from_le_bytes(read_array(r)?) as usize;
        let n = u64::from_le_bytes(read_array(r)?) as usize;
        let l_tot = f64::from_le_bytes(read_array(r)?);
        let t = f64::from_le_bytes(read_array(r)?);
        let [p] = read_array::<1, _>(r)?;
        let grid = Arc::new(WavenumberGrid::new(d, n, l_tot)?);
        let mut data = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let v = match p {
                8 => {
                    let re = f32::from_le_bytes(read_array(r)?) as f64;
                    let im = f32::from_le_bytes(read_array(r)?) as f64;
                    Complex64::new(re, im)
                }
                16 => {
                    let re = f64::from_le_bytes(read_array(r)?);
                    let im = f64::from_le_bytes(read_array(r)?);
                    Complex64::new(re, im)
                }
                other => return Err(CascadeError::Snapshot(format!("unknown precision tag {other}"))),
            };
            data.push(v);
        }
        Ok((Self { grid, data }, t))
    }

    /// CSV of the shell-averaged modulus `|û|`: `shell,r,mean_abs,members`.
    pub fn write_shell_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let ns = self.grid.n_shells();
        let mut sum = vec![0.0; ns];
        let mut count = vec![0usize; ns];
        for (v, &s) in self.data.iter().zip(self.grid.shell_ids()) {
            sum[s] += v.norm();
            count[s] += 1;
        }
        writeln!(w, "shell,r,mean_abs,members")?;
        for s in 0..ns {
            if count[s] > 0 {
                writeln!(
                    w,
                    "{s},{:.17e},{:.17e},{}",
                    s as f64 * self.grid.dk(),
                    sum[s] / count[s] as f64,
                    count[s]
                )?;
            }
        }
        Ok(())
    }
}

/// Storage width per complex value in snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Precision {
    Complex64 = 8,
    Complex128 = 16,
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"CSNP";
const SNAPSHOT_VERSION: u32 = 1;

fn read_array<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b)?;
    Ok(b)
}
