//! The one-dimensional complex model `du = 2πicx u dt + φ∗dW`, whose
//! solution is explicit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::Quad;
use crate::error::{CascadeError, Result};

/// `φ(x) = a e^{-x²/(2w²)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    pub amplitude: f64,
    pub width: f64,
}

impl GaussianProfile {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * (-x * x / (2.0 * self.width * self.width)).exp()
    }

    /// `C_f(z) = ∫ φ(z+y) φ(y) dy`.
    pub fn autocorrelation(&self, z: f64) -> f64 {
        let w = self.width;
        self.amplitude * self.amplitude * w * PI.sqrt() * (-z * z / (4.0 * w * w)).exp()
    }

    /// `‖φ‖²_{L²} = C_f(0)`.
    pub fn norm_sq(&self) -> f64 {
        self.autocorrelation(0.0)
    }
}

/// Sample moments of `u(t,x₁)` and `u(t,x₂)` over Monte-Carlo paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub paths: usize,
    pub variance: f64,
    pub variance_se: f64,
    pub covariance: Complex64,
    pub covariance_se: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex1d {
    pub c: f64,
    pub profile: GaussianProfile,
}

impl Complex1d {
    pub fn variance(&self, t: f64) -> f64 {
        t * self.profile.norm_sq()
    }

    /// `E[u(t,x₁) conj(u(t,x₂))]` with `z = x₁ - x₂`.
    pub fn covariance(&self, t: f64, z: f64) -> Complex64 {
        let theta = 2.0 * PI * self.c * t * z;
        // (e^{iθ} - 1)/(iθ) = Σ (iθ)^n/(n+1)!
        let factor = if theta.abs() < 1e-3 {
            let it = Complex64::new(0.0, theta);
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = term;
            for n in 1..8 {
                term = term * it / (n + 1) as f64;
                sum += term;
            }
            sum
        } else {
            (Complex64::from_polar(1.0, theta) - 1.0) / Complex64::new(0.0, theta)
        };
        factor * t * self.profile.autocorrelation(z)
    }

    /// `∫∫ g₁(x₁) g₂(x₂) E[u(t,x₁) conj(u(t,x₂))] dx₁ dx₂ = ∫ cov(t,z) G(z) dz`.
    pub fn tested_covariance(&self, t: f64, g1: impl Fn(f64) -> f64, g2: impl Fn(f64) -> f64, reach: f64) -> Result<Complex64> {
        let quad = Quad::default();
        let big_g = |z: f64| cross_correlation(&g1, &g2, z, reach, &quad);
        let period = 1.0 / (self.c * t).max(1e-300);
        let panels = ((2.0 * reach / (0.5 * period)).ceil() as usize).clamp(16, 200_000);
        let pts: Vec<f64> = (0..=panels).map(|j| -reach + 2.0 * reach * j as f64 / panels as f64).collect();
        quad.integrate_partitioned(|z| self.covariance(t, z) * big_g(z).unwrap_or(f64::NAN), &pts)
    }

    /// `t → ∞` limit of [`Self::tested_covariance`]:
    /// `C_f(0)/(2c) ∫g₁g₂ + (i/(2πc)) pv∫ C_f(z) G(z)/z dz`.
    pub fn tested_covariance_limit(&self, g1: impl Fn(f64) -> f64, g2: impl Fn(f64) -> f64, reach: f64) -> Result<Complex64> {
        let quad = Quad::default();
        let overlap = cross_correlation(&g1, &g2, 0.0, reach, &quad)?;
        let pv = pv_correction(|z| self.profile.autocorrelation(z), &g1, &g2, reach)?;
        Ok(Complex64::new(self.profile.norm_sq() * overlap / (2.0 * self.c), pv / (2.0 * PI * self.c)))
    }

    /// Simulates the noise at two points `x₁`, `x₂` with a midpoint
    /// exponential rule of step `ds`. The noise covariance is assembled from a
    /// Riemann sum of `φ(x_i - y) φ(x_j - y)` over `y`.
    pub fn monte_carlo(&self, t: f64, x1: f64, x2: f64, paths: usize, ds: f64, seed: u64) -> Result<McEstimate> {
        if paths < 2 || !(ds > 0.0) || !(t > 0.0) {
            return Err(CascadeError::InvalidParameter("need t > 0, ds > 0 and at least two paths".into()));
        }
        let w = self.profile.width;
        let dy = w / 64.0;
        let (y0, y1) = (x1.min(x2) - 14.0 * w, x1.max(x2) + 14.0 * w);
        let ny = ((y1 - y0) / dy).ceil() as usize;
        let mut cov = [[0.0; 2]; 2];
        for j in 0..ny {
            let y = y0 + (j as f64 + 0.5) * dy;
            let (a, b) = (self.profile.eval(x1 - y), self.profile.eval(x2 - y));
            cov[0][0] += a * a * dy;
            cov[0][1] += a * b * dy;
            cov[1][1] += b * b * dy;
        }
        let l00 = cov[0][0].sqrt();
        let l10 = cov[0][1] / l00;
        let l11 = (cov[1][1] - l10 * l10).max(0.0).sqrt();

        let steps = (t / ds).round().max(1.0) as usize;
        let h = t / steps as f64;
        let sq = h.sqrt();
        let (th1, th2) = (2.0 * PI * self.c * x1, 2.0 * PI * self.c * x2);
        let (rot1, rot2) = (Complex64::from_polar(1.0, th1 * h), Complex64::from_polar(1.0, th2 * h));
        let (mid1, mid2) = (Complex64::from_polar(1.0, 0.5 * th1 * h), Complex64::from_polar(1.0, 0.5 * th2 * h));

        const CHUNK: usize = 256;
        let chunks = paths.div_ceil(CHUNK);
        let samples: Vec<(f64, Complex64)> = (0..chunks)
            .into_par_iter()
            .flat_map_iter(|ci| {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(ci as u64);
                let count = CHUNK.min(paths - ci * CHUNK);
                (0..count)
                    .map(|_| {
                        let (mut u1, mut u2) = (Complex64::default(), Complex64::default());
                        for _ in 0..steps {
                            let a: f64 = StandardNormal.sample(&mut rng);
                            let b: f64 = StandardNormal.sample(&mut rng);
                            let (n1, n2) = (l00 * a * sq, (l10 * a + l11 * b) * sq);
                            u1 = u1 * rot1 + mid1 * n1;
                            u2 = u2 * rot2 + mid2 * n2;
                        }
                        (u1.norm_sqr(), u1 * u2.conj())
                    })
                    .collect::<Vec<_>>()
            })
            .collect();

        let n = paths as f64;
        let var = samples.iter().map(|s| s.0).sum::<f64>() / n;
        let covm = samples.iter().map(|s| s.1).sum::<Complex64>() / n;
        let var_sd = (samples.iter().map(|s| (s.0 - var).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let re_sd = (samples.iter().map(|s| (s.1.re - covm.re).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let im_sd = (samples.iter().map(|s| (s.1.im - covm.im).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        Ok(McEstimate {
            paths,
            variance: var,
            variance_se: var_sd / n.sqrt(),
            covariance: covm,
            covariance_se: Complex64::new(re_sd, im_sd) / n.sqrt(),
        })
    }
}

/// `G(z) = ∫ g₁(z+y) g₂(y) dy`, integrating over `|y| ≤ reach`.
pub fn cross_correlation(g1: impl Fn(f64) -> f64, g2: impl Fn(f64) -> f64, z: f64, reach: f64, quad: &Quad) -> Result<f64> {
    let pts: Vec<f64> = (0..=32).map(|j| -reach + 2.0 * reach * j as f64 / 32.0).collect();
    quad.integrate_partitioned(|y| g1(z + y) * g2(y), &pts)
}

/// `∫_0^∞ C_f(z) (G(z) - G(-z))/z dz`, the principal value of
/// `∫ C_f(z) G(z)/z dz` for even `C_f`, truncated at `|z| ≤ reach`.
pub fn pv_correction(cf: impl Fn(f64) -> f64, g1: impl Fn(f64) -> f64, g2: impl Fn(f64) -> f64, reach: f64) -> Result<f64> {
    let quad = Quad::default();
    let inner = Quad { abs_tol: 1e-13, ..quad };
    let pts: Vec<f64> = (0..=32).map(|j| reach * j as f64 / 32.0).collect();
    quad.integrate_partitioned(
        |z| {
            if z == 0.0 {
                return 0.0;
            }
            let plus = cross_correlation(&g1, &g2, z, reach, &inner).unwrap_or(f64::NAN);
            let minus = cross_correlation(&g1, &g2, -z, reach, &inner).unwrap_or(f64::NAN);
            cf(z) * (plus - minus) / z
        },
        &pts,
    )
}
