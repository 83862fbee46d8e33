//! Wavenumber and physical grids on the periodic box `[0, L)^d`.
//!
//! Arrays are row-major with axis 0 slowest. Along every axis the wavenumber
//! ordering is `[0, 1, …, N/2, -N/2+1, …, -1]·Δk`, so the Nyquist index holds
//! `+N/2`.

use crate::error::{CascadeError, Result};
use crate::fft::FftPlan;

#[derive(Debug, Clone)]
pub struct WavenumberGrid {
    d: usize,
    n: usize,
    l_tot: f64,
    dk: f64,
    dx: f64,
    k_axis: Vec<f64>,
    x_tilde: Vec<f64>,
    modulus: Vec<f64>,
    shell: Vec<usize>,
    neg: Vec<usize>,
    n_shells: usize,
    plan: FftPlan,
}

impl WavenumberGrid {
    pub fn new(d: usize, n: usize, l_tot: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(CascadeError::InvalidGrid(format!("dimension {d} not in {{1, 2, 3}}")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(CascadeError::InvalidGrid(format!(
                "N = {n} must be a power of two and at least 4"
            )));
        }
        if !(l_tot.is_finite() && l_tot > 0.0) {
            return Err(CascadeError::InvalidGrid(format!("L_tot = {l_tot} must be positive")));
        }
        let dk = 1.0 / l_tot;
        let dx = l_tot / n as f64;
        let half = n / 2;
        let signed = |i: usize| if i <= half { i as i64 } else { i as i64 - n as i64 };
        let k_axis: Vec<f64> = (0..n).map(|i| signed(i) as f64 * dk).collect();
        let x_tilde: Vec<f64> = (0..n)
            .map(|i| if i == half { 0.0 } else { signed(i) as f64 * dx })
            .collect();

        let total = n.pow(d as u32);
        let mut modulus = Vec::with_capacity(total);
        let mut shell = Vec::with_capacity(total);
        let mut neg = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut sq = 0.0;
            let mut nidx = 0;
            let mut scale = 1;
            for _ in 0..d {
                let i = rem % n;
                rem /= n;
                sq += k_axis[i] * k_axis[i];
                nidx += ((n - i) % n) * scale;
                scale *= n;
            }
            let m = sq.sqrt();
            modulus.push(m);
            shell.push((m / dk).round() as usize);
            neg.push(nidx);
        }
        let n_shells = shell.iter().copied().max().unwrap_or(0) + 1;
        Ok(Self {
            d,
            n,
            l_tot,
            dk,
            dx,
            k_axis,
            x_tilde,
            modulus,
            shell,
            neg,
            n_shells,
            plan: FftPlan::new(d, n),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_tot(&self) -> f64 {
        self.l_tot
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// `(N/2)·Δk`.
    pub fn k_max(&self) -> f64 {
        (self.n / 2) as f64 * self.dk
    }

    pub fn len(&self) -> usize {
        self.modulus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modulus.is_empty()
    }

    /// Wavenumbers along one axis in DFT order.
    pub fn k_axis(&self) -> &[f64] {
        &self.k_axis
    }

    /// Position array used by the spectral derivative, Nyquist entry zeroed.
    pub fn x_tilde(&self) -> &[f64] {
        &self.x_tilde
    }

    pub fn modulus(&self) -> &[f64] {
        &self.modulus
    }

    pub fn shell_ids(&self) -> &[usize] {
        &self.shell
    }

    pub fn n_shells(&self) -> usize {
        self.n_shells
    }

    /// Flat index of `-k`.
    pub fn neg_index(&self, idx: usize) -> usize {
        self.neg[idx]
    }

    pub fn neg_indices(&self) -> &[usize] {
        &self.neg
    }

    pub fn plan(&self) -> &FftPlan {
        &self.plan
    }

    /// Per-axis array index of a flat index.
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.n.pow((self.d - 1 - axis) as u32)) % self.n
    }

    pub fn k_component(&self, idx: usize, axis: usize) -> f64 {
        self.k_axis[self.axis_index(idx, axis)]
    }

    pub fn k_vector(&self, idx: usize) -> Vec<f64> {
        (0..self.d).map(|a| self.k_component(idx, a)).collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn shell_members(&self, s: usize) -> Vec<usize> {
        self.shell
            .iter()
            .enumerate()
            .filter_map(|(i, &sh)| (sh == s).then_some(i))
            .collect()
    }

    pub fn shell_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_shells];
        for &s in &self.shell {
            counts[s] += 1;
        }
        counts
    }
}
