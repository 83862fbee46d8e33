//! Analytic predictions used as ground truth for the simulator.

pub mod bessel;
pub mod complex1d;
pub mod correlation;
pub mod quad;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CascadeError, Result};
pub use quad::Quad;

/// Radial forcing density `ψ(|k|)`.
#[derive(Clone)]
pub enum RadialDensity {
    Indicator { a: f64, b: f64, amplitude: f64 },
    /// `f` is only consulted on `[lo, hi]`; `hi` may be infinite.
    Custom { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, lo: f64, hi: f64 },
}

impl fmt::Debug for RadialDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Indicator { a, b, amplitude } => {
                write!(f, "Indicator {{ a: {a}, b: {b}, amplitude: {amplitude} }}")
            }
            Self::Custom { lo, hi, .. } => write!(f, "Custom {{ lo: {lo}, hi: {hi} }}"),
        }
    }
}

impl RadialDensity {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64) -> Self {
        Self::Custom { f: Arc::new(f), lo, hi }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Indicator { a, b, amplitude } => {
                if s >= *a && s <= *b {
                    *amplitude
                } else {
                    0.0
                }
            }
            Self::Custom { f, lo, hi } => {
                if s < *lo || s > *hi {
                    0.0
                } else {
                    f(s)
                }
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Indicator { a, b, .. } => (*a, *b),
            Self::Custom { lo, hi, .. } => (*lo, *hi),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyticParams {
    pub d: usize,
    pub h: f64,
    pub c: f64,
    pub kappa: f64,
    pub nu: f64,
    pub psi: RadialDensity,
    pub quad: Quad,
}

impl AnalyticParams {
    pub fn new(d: usize, h: f64, c: f64, kappa: f64, nu: f64, psi: RadialDensity) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(CascadeError::InvalidParameter(format!("dimension {d} not in {{1, 2, 3}}")));
        }
        if !(c > 0.0 && kappa > 0.0 && nu >= 0.0) {
            return Err(CascadeError::InvalidParameter(format!(
                "need c > 0, kappa > 0, nu >= 0 (got c = {c}, kappa = {kappa}, nu = {nu})"
            )));
        }
        if !(h >= -(d as f64) / 2.0 && h < 1.0) {
            return Err(CascadeError::InvalidParameter(format!("H = {h} outside [-d/2, 1)")));
        }
        Ok(Self { d, h, c, kappa, nu, psi, quad: Quad::default() })
    }

    /// `2H + d`.
    pub fn exponent(&self) -> f64 {
        2.0 * self.h + self.d as f64
    }

    /// `8π²ν/(3c)`, the rate in the spectral viscous factor.
    pub fn viscous_rate(&self) -> f64 {
        8.0 * PI * PI * self.nu / (3.0 * self.c)
    }

    fn weighted_tail(&self, r: f64, rate: f64, hypothesis: &str) -> Result<f64> {
        let p = self.exponent();
        let (lo, hi) = self.psi.support();
        let start = r.max(lo).max(0.0);
        if start >= hi {
            return Ok(0.0);
        }
        if let (RadialDensity::Indicator { b, amplitude, .. }, true) = (&self.psi, rate == 0.0) {
            return Ok(amplitude * (b.powf(p + 1.0) - start.powf(p + 1.0)) / ((p + 1.0) * self.c));
        }
        let integrand = |s: f64| s.powf(p) * (rate * s.powi(3)).exp() * self.psi.eval(s);
        let value = if hi.is_finite() {
            self.quad.integrate(integrand, start, hi)
        } else {
            self.quad.integrate_to_infinity(integrand, start)
        };
        match value {
            Ok(v) if v.is_finite() => Ok(v / self.c),
            _ => Err(CascadeError::Divergent(format!("{hypothesis} is not integrable on (0, ∞)"))),
        }
    }

    /// `Ψ_{d,H}(r) = (1/c) ∫_r^∞ s^{2H+d} ψ(s) ds`.
    pub fn big_psi(&self, r: f64) -> Result<f64> {
        self.weighted_tail(r, 0.0, "s^(2H+d) psi(s)")
    }

    /// `Ψ_{d,H,ν}(r)`, the same tail with weight `e^{(8π²ν/3c)s³}`.
    pub fn big_psi_nu(&self, r: f64) -> Result<f64> {
        self.weighted_tail(r, self.viscous_rate(), "s^(2H+d) exp(8 pi^2 nu s^3 / 3c) psi(s)")
    }

    /// `C(d,H) = Ψ_{d,H}(0)`.
    pub fn c_const(&self) -> Result<f64> {
        self.big_psi(0.0)
    }

    fn window(&self, t: f64, r: f64, tail: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        if r <= self.kappa {
            return Ok(0.0);
        }
        let front = self.c * t + self.kappa;
        if r < front {
            Ok(tail(self.kappa)? - tail(r)?)
        } else {
            Ok(tail(r - self.c * t)? - tail(r)?)
        }
    }

    pub fn f_window(&self, t: f64, r: f64) -> Result<f64> {
        self.window(t, r, |x| self.big_psi(x))
    }

    pub fn f_window_nu(&self, t: f64, r: f64) -> Result<f64> {
        self.window(t, r, |x| self.big_psi_nu(x))
    }

    /// Both branches of the window at the seam `r = ct + κ`.
    pub fn seam_values(&self, t: f64) -> Result<(f64, f64)> {
        let r = self.c * t + self.kappa;
        let left = self.big_psi_nu(self.kappa)? - self.big_psi_nu(r)?;
        let right = self.big_psi_nu(r - self.c * t)? - self.big_psi_nu(r)?;
        Ok((left, right))
    }

    /// `E|û(t,k)|²` density: `r^{-(2H+d)} e^{-(8π²ν/3c)r³} F_ν(t,r)`.
    ///
    /// For `ν > 0` the product of the exponential and `F_ν` is integrated as a
    /// single decaying weight so that neither factor overflows.
    pub fn theoretical_spectrum(&self, t: f64, r: f64) -> Result<f64> {
        self.spectrum_from(if r < self.c * t + self.kappa { self.kappa } else { r - self.c * t }, r)
    }

    /// The `t → ∞` limit of [`Self::theoretical_spectrum`].
    pub fn stationary_spectrum(&self, r: f64) -> Result<f64> {
        self.spectrum_from(self.kappa, r)
    }

    fn spectrum_from(&self, lower: f64, r: f64) -> Result<f64> {
        if r <= self.kappa {
            return Ok(0.0);
        }
        let p = self.exponent();
        if self.nu == 0.0 {
            return Ok(r.powf(-p) * (self.big_psi(lower)? - self.big_psi(r)?));
        }
        let (lo, hi) = self.psi.support();
        let (a, b) = (lower.max(lo), r.min(hi));
        if a >= b {
            return Ok(0.0);
        }
        let rate = self.viscous_rate();
        let r3 = r.powi(3);
        let v = self
            .quad
            .integrate(|s| s.powf(p) * (-rate * (r3 - s.powi(3))).exp() * self.psi.eval(s), a, b)?;
        Ok(r.powf(-p) * v / self.c)
    }

    /// Multiplier of the unforced solution operator at modulus `r` after time `t`.
    pub fn semigroup_factor(&self, r: f64, t: f64) -> f64 {
        let shift = self.c * t;
        if r <= shift + self.kappa {
            return 0.0;
        }
        let r0 = r - shift;
        let alpha = 4.0 * PI * PI * self.nu / (3.0 * self.c);
        (r0 / r).powf(self.h + self.d as f64 - 0.5) * (-alpha * (r.powi(3) - r0.powi(3))).exp()
    }

    /// `e^{-tA} û₀`, evaluated pointwise in `k`.
    pub fn semigroup_apply<'a, F>(&'a self, u0: F, t: f64) -> impl Fn(&[f64]) -> Complex64 + 'a
    where
        F: Fn(&[f64]) -> Complex64 + 'a,
    {
        move |k: &[f64]| {
            let r = k.iter().map(|v| v * v).sum::<f64>().sqrt();
            let g = self.semigroup_factor(r, t);
            if g == 0.0 {
                return Complex64::default();
            }
            let s = (r - self.c * t) / r;
            let k0: Vec<f64> = k.iter().map(|v| v * s).collect();
            u0(&k0) * g
        }
    }

    /// `∫_0^t e^{-(t-s)A} f(s) ds` at wave vector `k`, using panels of width
    /// `ds` refined adaptively. The integrand vanishes for
    /// `s < t - (|k| - κ)/c`, which is used as a breakpoint.
    pub fn duhamel_reference(
        &self,
        f: impl Fn(f64, &[f64]) -> Complex64,
        t: f64,
        k: &[f64],
        ds: f64,
    ) -> Result<Complex64> {
        if t <= 0.0 {
            return Ok(Complex64::default());
        }
        let r = k.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= self.kappa {
            return Ok(Complex64::default());
        }
        let start = (t - (r - self.kappa) / self.c).max(0.0);
        let panels = (((t - start) / ds).ceil() as usize).max(1);
        let points: Vec<f64> = (0..=panels).map(|i| start + (t - start) * i as f64 / panels as f64).collect();
        let quad = Quad { abs_tol: 1e-13, rel_tol: 1e-13, ..self.quad };
        quad.integrate_partitioned(
            |s| {
                let tau = t - s;
                let g = self.semigroup_factor(r, tau);
                if g == 0.0 {
                    return Complex64::default();
                }
                let scale = (r - self.c * tau) / r;
                let k0: Vec<f64> = k.iter().map(|v| v * scale).collect();
                f(s, &k0) * g
            },
            &points,
        )
    }
}
