//! Band-limited Gaussian forcing, white in time.
//!
//! Each step draws `g ~ N(0,1)` i.i.d. on the physical grid from a ChaCha
//! stream keyed by `(seed, step)`, so a draw depends on nothing but those two
//! numbers.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;
use crate::oracle::RadialDensity;

const BAND_SLACK: f64 = 1e-9;

/// Annulus bounds are in units of Δk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingSpec {
    pub k_lo: f64,
    pub k_hi: f64,
    pub seed: u64,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        Self { k_lo: 3.0, k_hi: 5.0, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Forcing {
    grid: Arc<WavenumberGrid>,
    spec: ForcingSpec,
    in_band: Vec<bool>,
    amplitude: f64,
}

impl Forcing {
    pub fn new(grid: Arc<WavenumberGrid>, spec: ForcingSpec, kappa: f64) -> Result<Self> {
        let dk = grid.dk();
        let (lo, hi) = (spec.k_lo * dk, spec.k_hi * dk);
        if !(kappa < lo && lo <= hi && hi <= grid.k_max()) {
            return Err(CascadeError::InvalidParameter(format!(
                "forcing band [{lo}, {hi}] must satisfy kappa ({kappa}) < k_lo <= k_hi <= k_max ({})",
                grid.k_max()
            )));
        }
        let in_band = grid
            .modulus()
            .iter()
            .map(|&k| k >= lo * (1.0 - BAND_SLACK) && k <= hi * (1.0 + BAND_SLACK))
            .collect();
        let amplitude = grid.dx().powf(grid.d() as f64 / 2.0);
        Ok(Self { grid, spec, in_band, amplitude })
    }

    pub fn spec(&self) -> &ForcingSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Arc<WavenumberGrid> {
        &self.grid
    }

    pub fn in_band(&self) -> &[bool] {
        &self.in_band
    }

    /// `χ_band · DFT[(Δx)^{d/2} g]` for the draw of `step`.
    pub fn sample(&self, step: u64) -> SpectralField {
        let mut f = SpectralField::zeros(self.grid.clone());
        self.sample_into(step, &mut f);
        f
    }

    pub fn sample_into(&self, step: u64, out: &mut SpectralField) {
        let mut rng = ChaCha12Rng::seed_from_u64(self.spec.seed);
        rng.set_stream(step);
        let data = out.data_mut();
        for v in data.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *v = Complex64::new(self.amplitude * g, 0.0);
        }
        self.grid.plan().forward(data);
        for (v, &b) in data.iter_mut().zip(&self.in_band) {
            if !b {
                *v = Complex64::default();
            }
        }
    }

    /// Continuum density realized by the discrete forcing: an indicator of
    /// amplitude `L^d` on the radii whose ball volumes match the lattice
    /// counts inside and outside the band. In d = 1 this is
    /// `[k_lo - Δk/2, k_hi + Δk/2]`.
    pub fn effective_psi(&self) -> RadialDensity {
        let g = &self.grid;
        let dk = g.dk();
        let (lo, hi) = (self.spec.k_lo * dk, self.spec.k_hi * dk);
        let below = g.modulus().iter().filter(|&&k| k < lo * (1.0 - BAND_SLACK)).count();
        let through = g.modulus().iter().filter(|&&k| k <= hi * (1.0 + BAND_SLACK)).count();
        let d = g.d() as f64;
        let radius = |count: usize| (count as f64 / unit_ball_volume(g.d())).powf(1.0 / d) * dk;
        RadialDensity::Indicator { a: radius(below), b: radius(through), amplitude: g.l_tot().powi(g.d() as i32) }
    }
}

pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("unsupported dimension {d}"),
    }
}

/// Independent seed for member `m` of an ensemble.
pub fn member_seed(base: u64, m: u64) -> u64 {
    splitmix64(base ^ splitmix64(m.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forcing(d: usize, n: usize, l: f64) -> Forcing {
        let g = Arc::new(WavenumberGrid::new(d, n, l).unwrap());
        let kappa = g.dk();
        Forcing::new(g, ForcingSpec { seed: 17, ..Default::default() }, kappa).unwrap()
    }

    #[test]
    fn support_is_the_annulus() {
        let f = forcing(2, 16, 1.0);
        for step in 0..5 {
            let s = f.sample(step);
            for (v, &k) in s.data().iter().zip(f.grid().modulus()) {
                if !(3.0..=5.0).contains(&k) {
                    assert_eq!(*v, Complex64::default());
                }
            }
            assert!(s.data().iter().any(|v| v.norm() > 0.0));
        }
    }

    #[test]
    fn same_key_same_draw() {
        let f = forcing(1, 32, 1.0);
        assert_eq!(f.sample(9).data(), f.sample(9).data());
        assert_ne!(f.sample(9).data(), f.sample(10).data());
    }

    #[test]
    fn samples_are_real_in_space() {
        let f = forcing(3, 16, 1.0);
        let x = f.sample(3).dft_inverse_complex();
        assert!(x.iter().all(|v| v.im.abs() < 1e-12));
    }

    #[test]
    fn mean_and_variance_in_band() {
        let l = 2.0;
        let f = forcing(1, 32, l);
        let idx = 4; // k = 4Δk
        let draws = 10_000;
        let (mut sum, mut sq, mut sq2) = (Complex64::default(), 0.0, 0.0);
        for step in 0..draws {
            let v = f.sample(step).data()[idx];
            sum += v;
            sq += v.norm_sqr();
            sq2 += v.norm_sqr().powi(2);
        }
        let n = draws as f64;
        let mean = sum / n;
        let var = sq / n;
        // |f̂|² is exponential with mean L^d, so its spread equals its mean.
        let se_var = ((sq2 / n - var * var) / n).sqrt();
        assert!((var - l).abs() < 4.0 * se_var, "var = {var}");
        let se_mean = (var / 2.0 / n).sqrt();
        assert!(mean.re.abs() < 4.0 * se_mean && mean.im.abs() < 4.0 * se_mean);
    }

    #[test]
    fn effective_band_in_one_dimension() {
        let f = forcing(1, 64, 1.0);
        match f.effective_psi() {
            RadialDensity::Indicator { a, b, amplitude } => {
                assert!((a - 2.5).abs() < 1e-12);
                assert!((b - 5.5).abs() < 1e-12);
                assert_eq!(amplitude, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let psi = f.effective_psi();
        assert_eq!(psi.eval(2.0), 0.0);
        assert_eq!(psi.eval(4.0), 1.0);
    }

    #[test]
    fn member_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|m| member_seed(7, m)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn rejects_band_below_cutoff() {
        let g = Arc::new(WavenumberGrid::new(1, 16, 1.0).unwrap());
        assert!(Forcing::new(g.clone(), ForcingSpec { k_lo: 1.0, k_hi: 5.0, seed: 0 }, 1.0).is_err());
        assert!(Forcing::new(g, ForcingSpec { k_lo: 3.0, k_hi: 9.0, seed: 0 }, 1.0).is_err());
    }
}
