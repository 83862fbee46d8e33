//! Covariance of the solution field, reduced to radial quadratures.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::bessel::{hankel_coefficients, j0, one_minus_j0, one_minus_sinc, sinc};
use super::quad::oscillatory_tail;
use super::AnalyticParams;
use crate::error::{CascadeError, Result};

/// Past this many radians of `2π|x|r` the tails are handled analytically.
const TAIL_PHASE: f64 = 40.0;
/// `e^{-60}` is far below any tolerance used here.
const VISCOUS_DECADES: f64 = 60.0;

/// Area of the unit sphere in `R^d`.
pub fn surface_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Angular integral of `e^{2πi k·x}` over the sphere `|k| = r`, for `|x| = x`.
pub fn radial_kernel(d: usize, r: f64, x: f64) -> f64 {
    let z = 2.0 * PI * r * x;
    match d {
        1 => 2.0 * z.cos(),
        2 => 2.0 * PI * r * j0(z),
        _ => 4.0 * PI * r * r * sinc(z),
    }
}

/// `radial_kernel(d, r, 0) - radial_kernel(d, r, ℓ)`, free of cancellation.
pub fn radial_kernel_increment(d: usize, r: f64, ell: f64) -> f64 {
    let z = 2.0 * PI * r * ell;
    match d {
        1 => 4.0 * (0.5 * z).sin().powi(2),
        2 => 2.0 * PI * r * one_minus_j0(z),
        _ => 4.0 * PI * r * r * one_minus_sinc(z),
    }
}

/// Panel boundaries on `[lo, hi]`: doubling from `lo`, half periods of the
/// kernel at lag `x`, and any `extra` points inside the interval.
fn breakpoints(lo: f64, hi: f64, x: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    let mut g = lo.max(1e-300);
    while g < hi {
        pts.push(g);
        g *= 2.0;
    }
    if x != 0.0 {
        let step = 0.5 / x.abs();
        let count = ((hi - lo) / step).min(1e6) as usize;
        pts.extend((1..=count).map(|j| lo + j as f64 * step));
    }
    pts.extend(extra.iter().copied());
    pts.retain(|p| p.is_finite() && *p >= lo && *p <= hi);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    pts
}

/// Two-sided bound on the limiting increment variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderBounds {
    pub lower: f64,
    pub upper: f64,
}

impl AnalyticParams {
    /// Support of `ψ`, with an infinite upper end replaced by a radius past
    /// which `Ψ` is negligible.
    fn psi_extent(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.psi.support();
        let lo = lo.max(0.0);
        if hi.is_finite() {
            return Ok((lo, hi));
        }
        let total = self.big_psi(lo)?;
        let mut r = lo.max(self.kappa).max(1.0);
        while self.big_psi(r)? > 1e-15 * total {
            r *= 2.0;
            if r > 1e12 {
                return Err(CascadeError::Divergent("psi has no effective support".into()));
            }
        }
        Ok((lo, r))
    }

    fn viscous_cut(&self, hi: f64) -> f64 {
        (hi.powi(3) + VISCOUS_DECADES / self.viscous_rate()).cbrt()
    }

    fn require_pointwise(&self) -> Result<()> {
        if self.nu == 0.0 && !(self.h > 0.0 && self.h < 1.0) {
            return Err(CascadeError::InvalidParameter(format!(
                "pointwise covariance requires H in (0, 1) when nu = 0 (got H = {}); use tested_limit_correlation",
                self.h
            )));
        }
        Ok(())
    }

    /// `∫_{r0}^∞ c0 r^{-(2H+d)} K_d(r, x) dr`, with `2π|x| r0 ≥ 40` in `d = 2`.
    pub fn power_tail(&self, c0: f64, r0: f64, x: f64) -> Result<f64> {
        let p = self.exponent();
        if x == 0.0 {
            return Ok(c0 * surface_area(self.d) * r0.powf(-2.0 * self.h) / (2.0 * self.h));
        }
        let omega = 2.0 * PI * x.abs();
        let q = &self.quad;
        match self.d {
            1 => Ok(2.0 * c0 * oscillatory_tail(p, omega, r0, q)?.re),
            3 => Ok(4.0 * PI * c0 / omega * oscillatory_tail(p - 1.0, omega, r0, q)?.im),
            _ => {
                let z = omega * r0;
                if z < 0.75 * TAIL_PHASE {
                    return Err(CascadeError::Quadrature(format!("Bessel tail needs 2π|x|R ≥ {TAIL_PHASE}, got {z}")));
                }
                let mut sum = Complex64::default();
                let mut ik = Complex64::new(1.0, 0.0);
                let mut prev = f64::INFINITY;
                for (k, ak) in hankel_coefficients(60).iter().enumerate() {
                    let size = ak.abs() * z.powi(-(k as i32));
                    if size > prev || size < 1e-17 {
                        break;
                    }
                    prev = size;
                    sum += ik * (ak * omega.powi(-(k as i32))) * oscillatory_tail(p - 0.5 + k as f64, omega, r0, q)?;
                    ik *= Complex64::new(0.0, 1.0);
                }
                let phase = Complex64::from_polar((2.0 / (PI * omega)).sqrt(), -PI / 4.0);
                Ok(2.0 * PI * c0 * (phase * sum).re)
            }
        }
    }

    /// `E[u(t,x₁) u(t,x₂)]` at `x = |x₁ - x₂|`, starting from rest at `t = 0`.
    pub fn finite_time_correlation(&self, t: f64, x: f64) -> Result<f64> {
        let x = x.abs();
        let (lo, hi) = self.psi_extent()?;
        let ct = self.c * t;
        let kern = |r: f64| self.theoretical_spectrum(t, r).unwrap_or(f64::NAN) * radial_kernel(self.d, r, x);
        let extra = [lo, hi, ct + self.kappa, ct + lo, ct + hi];
        let r0 = hi.max(self.kappa).max(if x > 0.0 { TAIL_PHASE / (2.0 * PI * x) } else { 0.0 });
        if self.nu == 0.0 && x > 0.0 && ct + self.kappa > r0 {
            // Between r0 and the front the spectrum is the pure power law.
            let c0 = self.c_const()?;
            let head = self.quad.integrate_partitioned(kern, &breakpoints(self.kappa, r0, x, &extra))?;
            let middle = self.power_tail(c0, r0, x)? - self.power_tail(c0, ct + self.kappa, x)?;
            let front = self.quad.integrate_partitioned(kern, &breakpoints(ct + self.kappa, ct + hi, x, &extra))?;
            return Ok(head + middle + front);
        }
        let mut end = ct + hi;
        if self.nu > 0.0 {
            end = end.min(self.viscous_cut(hi));
        }
        if end <= self.kappa {
            return Ok(0.0);
        }
        self.quad.integrate_partitioned(kern, &breakpoints(self.kappa, end, x, &extra))
    }

    /// The `t → ∞` covariance at lag `x`.
    pub fn limiting_correlation(&self, x: f64) -> Result<f64> {
        self.require_pointwise()?;
        let x = x.abs();
        let (lo, hi) = self.psi_extent()?;
        let kern = |r: f64| self.stationary_spectrum(r).unwrap_or(f64::NAN) * radial_kernel(self.d, r, x);
        if self.nu > 0.0 {
            let end = self.viscous_cut(hi);
            return self.quad.integrate_partitioned(kern, &breakpoints(self.kappa, end, x, &[lo, hi]));
        }
        let r0 = hi.max(self.kappa).max(if x > 0.0 { TAIL_PHASE / (2.0 * PI * x) } else { 0.0 });
        let head = self.quad.integrate_partitioned(kern, &breakpoints(self.kappa, r0, x, &[lo, hi]))?;
        Ok(head + self.power_tail(self.c_const()?, r0, x)?)
    }

    /// `E|u_∞(x+ℓ) - u_∞(x)|²`.
    pub fn increment_variance(&self, ell: f64) -> Result<f64> {
        self.require_pointwise()?;
        let ell = ell.abs();
        if ell == 0.0 {
            return Ok(0.0);
        }
        let (lo, hi) = self.psi_extent()?;
        let kern = |r: f64| self.stationary_spectrum(r).unwrap_or(f64::NAN) * radial_kernel_increment(self.d, r, ell);
        if self.nu > 0.0 {
            let end = self.viscous_cut(hi);
            return Ok(2.0 * self.quad.integrate_partitioned(kern, &breakpoints(self.kappa, end, ell, &[lo, hi]))?);
        }
        let r0 = hi.max(self.kappa).max(TAIL_PHASE / (2.0 * PI * ell));
        let head = self.quad.integrate_partitioned(kern, &breakpoints(self.kappa, r0, ell, &[lo, hi]))?;
        let c0 = self.c_const()?;
        Ok(2.0 * (head + self.power_tail(c0, r0, 0.0)? - self.power_tail(c0, r0, ell)?))
    }

    /// `∫_{R^d} (1 - cos 2πk·e) |k|^{-(2H+d)} dk` for a unit vector `e`.
    pub fn holder_constant(&self) -> Result<f64> {
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(CascadeError::InvalidParameter(format!("Hölder constant needs H in (0, 1), got {}", self.h)));
        }
        let p = self.exponent();
        let r0 = TAIL_PHASE / (2.0 * PI);
        let mut pts = vec![0.0];
        pts.extend((0..=60).rev().map(|j| r0 * 0.5f64.powi(j)));
        pts.extend(breakpoints(r0, 2.0 * r0, 1.0, &[]).into_iter().skip(1));
        let r1 = 2.0 * r0;
        let head = self.quad.integrate_partitioned(
            |r: f64| if r == 0.0 { 0.0 } else { r.powf(-p) * radial_kernel_increment(self.d, r, 1.0) },
            &pts,
        )?;
        Ok(head + self.power_tail(1.0, r1, 0.0)? - self.power_tail(1.0, r1, 1.0)?)
    }

    /// Bounds `2C A ℓ^{2H} - 4π²ℓ²(J + C κ^{2-2H} S_d/(2-2H)) ≤ E|δ_ℓ u_∞|² ≤ 2C A ℓ^{2H}`,
    /// where `J = ∫_{|k|>κ} |k|^{2-(2H+d)} Ψ(|k|) dk` and `A` is [`Self::holder_constant`].
    /// The bounds concern the inviscid field and do not depend on `ν`.
    pub fn holder_bounds(&self, ell: f64) -> Result<HolderBounds> {
        let a = self.holder_constant()?;
        let c0 = self.c_const()?;
        let (lo, hi) = self.psi_extent()?;
        let p = self.exponent();
        let start = self.kappa.max(0.0);
        let j = if hi > start {
            surface_area(self.d)
                * self.quad.integrate_partitioned(
                    |r: f64| r.powf(self.d as f64 + 1.0 - p) * self.big_psi(r).unwrap_or(f64::NAN),
                    &breakpoints(start, hi, 0.0, &[lo]),
                )?
        } else {
            0.0
        };
        let low_modes = c0 * surface_area(self.d) * self.kappa.powf(2.0 - 2.0 * self.h) / (2.0 - 2.0 * self.h);
        let ell = ell.abs();
        let upper = 2.0 * c0 * a * ell.powf(2.0 * self.h);
        Ok(HolderBounds { lower: upper - 4.0 * PI * PI * ell * ell * (j + low_modes), upper })
    }

    /// Limiting covariance paired with test functions whose Fourier
    /// transforms are the real radial profiles `g1`, `g2`:
    /// `∫_{|k|>κ} E_∞(|k|) ĝ₁(|k|) ĝ₂(|k|) dk`. Valid for every admissible `H`.
    pub fn tested_limit_correlation(&self, g1: impl Fn(f64) -> f64, g2: impl Fn(f64) -> f64) -> Result<f64> {
        let (lo, hi) = self.psi_extent()?;
        let s = surface_area(self.d);
        let d1 = self.d as i32 - 1;
        let f = |r: f64| s * r.powi(d1) * self.stationary_spectrum(r).unwrap_or(f64::NAN) * g1(r) * g2(r);
        let end = hi.max(self.kappa);
        let head = self.quad.integrate_partitioned(&f, &breakpoints(self.kappa, end, 0.0, &[lo]))?;
        let tail = self.quad.integrate_to_infinity(&f, end)?;
        Ok(head + tail)
    }
}
