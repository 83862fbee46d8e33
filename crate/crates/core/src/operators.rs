//! Transport and damping operators acting on spectral fields.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub c: f64,
    pub h: f64,
    pub nu: f64,
    pub kappa: f64,
}

impl OperatorParams {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(CascadeError::InvalidParameter(format!("c = {} must be positive", self.c)));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(CascadeError::InvalidParameter(format!("kappa = {} must be positive", self.kappa)));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(CascadeError::InvalidParameter(format!("nu = {} must be nonnegative", self.nu)));
        }
        let lo = -(d as f64) / 2.0;
        if !(self.h >= lo && self.h < 1.0) {
            return Err(CascadeError::InvalidParameter(format!("H = {} outside [{lo}, 1)", self.h)));
        }
        Ok(())
    }
}

/// `DFT[-2πi x̃_j · DFT⁻¹[û]]`. Only axis `j` of the transform pair acts
/// non-trivially, so the full d-dimensional round trip reduces to one axis.
pub fn spectral_derivative(u: &SpectralField, axis: usize) -> SpectralField {
    let mut out = u.clone();
    derivative_in_place(u.grid(), out.data_mut(), axis);
    out
}

fn derivative_in_place(grid: &WavenumberGrid, data: &mut [Complex64], axis: usize) {
    let plan = grid.plan();
    plan.inverse_axis(data, axis);
    let xt = grid.x_tilde();
    for (idx, v) in data.iter_mut().enumerate() {
        let x = xt[grid.axis_index(idx, axis)];
        *v *= Complex64::new(0.0, -2.0 * PI * x);
    }
    plan.forward_axis(data, axis);
}

/// Precomputed multipliers for `𝔏` and `𝔇` on one grid.
#[derive(Debug, Clone)]
pub struct Operators {
    grid: Arc<WavenumberGrid>,
    params: OperatorParams,
    unit: Vec<Vec<f64>>,
    damp: Vec<f64>,
    active: Vec<bool>,
}

impl Operators {
    pub fn new(grid: Arc<WavenumberGrid>, params: OperatorParams) -> Result<Self> {
        params.validate(grid.d())?;
        let half = grid.n() / 2;
        let m = grid.modulus();
        // k_j/|k| is zeroed at the Nyquist index of axis j so that the
        // multiplier stays odd under index negation.
        let unit = (0..grid.d())
            .map(|j| {
                (0..grid.len())
                    .map(|i| {
                        if m[i] == 0.0 || grid.axis_index(i, j) == half {
                            0.0
                        } else {
                            grid.k_component(i, j) / m[i]
                        }
                    })
                    .collect()
            })
            .collect();
        let damp = m.iter().map(|&k| damping_symbol(&params, k)).collect();
        let active = m.iter().map(|&k| k > params.kappa).collect();
        Ok(Self { grid, params, unit, damp, active })
    }

    /// Replaces the damping multiplier by `f(|k|)`. Meant for mutation
    /// checks; `params()` keeps reporting the original parameters.
    pub fn with_damping(mut self, f: impl Fn(f64) -> f64) -> Self {
        self.damp = self.grid.modulus().iter().map(|&k| if k == 0.0 { 0.0 } else { f(k) }).collect();
        self
    }

    pub fn grid(&self) -> &Arc<WavenumberGrid> {
        &self.grid
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    fn mask(&self, data: &mut [Complex64]) {
        for (v, &a) in data.iter_mut().zip(&self.active) {
            if !a {
                *v = Complex64::default();
            }
        }
    }

    fn add_transport(&self, u: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        let c = self.params.c;
        for (j, unit) in self.unit.iter().enumerate() {
            for ((s, v), m) in scratch.iter_mut().zip(u).zip(unit) {
                *s = v * m;
            }
            derivative_in_place(&self.grid, scratch, j);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += c * s;
            }
        }
    }

    /// `𝔏(û) = c Σ_j ∂_{k_j}((k_j/|k|) û)`, projected onto `|k| > κ`.
    pub fn apply_transport(&self, u: &SpectralField) -> SpectralField {
        let mut out = SpectralField::zeros(self.grid.clone());
        let mut scratch = vec![Complex64::default(); self.grid.len()];
        self.add_transport(u.data(), out.data_mut(), &mut scratch);
        self.mask(out.data_mut());
        out
    }

    /// `𝔇(û) = (c(H+1/2)/|k| + 4π²ν|k|²) û`, projected onto `|k| > κ`.
    pub fn apply_damping(&self, u: &SpectralField) -> SpectralField {
        let mut out = u.clone();
        for (v, d) in out.data_mut().iter_mut().zip(&self.damp) {
            *v *= d;
        }
        self.mask(out.data_mut());
        out
    }

    /// `(𝔏 + 𝔇)(û)` written into `out`; `scratch` must have the grid length.
    pub fn apply_into(&self, u: &SpectralField, out: &mut SpectralField, scratch: &mut [Complex64]) {
        for ((o, v), d) in out.data_mut().iter_mut().zip(u.data()).zip(&self.damp) {
            *o = v * d;
        }
        self.add_transport(u.data(), out.data_mut(), scratch);
        self.mask(out.data_mut());
    }

    pub fn apply(&self, u: &SpectralField) -> SpectralField {
        let mut out = SpectralField::zeros(self.grid.clone());
        let mut scratch = vec![Complex64::default(); self.grid.len()];
        self.apply_into(u, &mut out, &mut scratch);
        out
    }

    /// Advective form `c[(k/|k|)·∇_k û + (d-1)/|k| û]`, kept as a cross-check.
    pub fn apply_transport_advective(&self, u: &SpectralField) -> SpectralField {
        let d = self.grid.d();
        let c = self.params.c;
        let mut out = SpectralField::zeros(self.grid.clone());
        for j in 0..d {
            let g = spectral_derivative(u, j);
            for ((o, v), m) in out.data_mut().iter_mut().zip(g.data()).zip(&self.unit[j]) {
                *o += c * m * v;
            }
        }
        for ((o, v), &k) in out.data_mut().iter_mut().zip(u.data()).zip(self.grid.modulus()) {
            if k > 0.0 {
                *o += c * (d as f64 - 1.0) / k * v;
            }
        }
        self.mask(out.data_mut());
        out
    }
}

/// Scalar damping multiplier at modulus `k`; zero at the origin.
pub fn damping_symbol(p: &OperatorParams, k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        p.c * (p.h + 0.5) / k + 4.0 * PI * PI * p.nu * k * k
    }
}
