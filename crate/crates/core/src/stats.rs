//! Estimators over snapshots: periodograms, shell and time averages,
//! structure functions and power-law fits.

use std::io::Write;
use std::sync::Arc;

use crate::error::{CascadeError, Result};
use crate::field::SpectralField;
use crate::grid::WavenumberGrid;

pub fn periodogram(u: &SpectralField) -> Vec<f64> {
    u.data().iter().map(|v| v.norm_sqr()).collect()
}

/// Mean of `values` over each shell; `None` marks a shell with no members.
pub fn shell_average(values: &[f64], grid: &WavenumberGrid) -> Vec<Option<f64>> {
    let mut sum = vec![0.0; grid.n_shells()];
    let mut count = vec![0usize; grid.n_shells()];
    for (&v, &s) in values.iter().zip(grid.shell_ids()) {
        sum[s] += v;
        count[s] += 1;
    }
    sum.into_iter().zip(count).map(|(s, c)| (c > 0).then(|| s / c as f64)).collect()
}

/// `S₂(mΔx)`: mean over the periodic box and over the coordinate axes of
/// `(u(x + mΔx e_j) - u(x))²`.
pub fn structure_function(u: &[f64], grid: &WavenumberGrid, m: usize) -> f64 {
    let n = grid.n();
    let d = grid.d();
    let mut total = 0.0;
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let mut acc = 0.0;
        for (idx, &v) in u.iter().enumerate() {
            let i = (idx / stride) % n;
            let j = (i + m) % n;
            let other = idx + j * stride - i * stride;
            acc += (u[other] - v).powi(2);
        }
        total += acc / u.len() as f64;
    }
    total / d as f64
}

/// `S₂` at lags `0..=N/2`.
pub fn structure_curve(u: &[f64], grid: &WavenumberGrid) -> Vec<f64> {
    (0..=grid.n() / 2).map(|m| structure_function(u, grid, m)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub residual: f64,
    pub points: usize,
}

impl PowerLawFit {
    pub fn eval(&self, r: f64) -> f64 {
        self.intercept.exp() * r.powf(self.exponent)
    }
}

/// Least-squares line through `(ln r, ln value)` for the points with
/// `r ∈ [lo, hi]`.
pub fn fit_power_law(curve: &[(f64, f64)], lo: f64, hi: f64) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = curve.iter().copied().filter(|(r, _)| *r >= lo && *r <= hi).collect();
    if pts.len() < 5 {
        return Err(CascadeError::InvalidParameter(format!(
            "fit window [{lo}, {hi}] holds {} points, need at least 5",
            pts.len()
        )));
    }
    if let Some((r, v)) = pts.iter().find(|(r, v)| !(*v > 0.0 && *r > 0.0)) {
        return Err(CascadeError::InvalidParameter(format!("nonpositive point ({r}, {v}) in fit window")));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|(r, v)| (r.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = logs.iter().map(|p| (p.1 - intercept - exponent * p.0).abs()).fold(0.0, f64::max);
    Ok(PowerLawFit { exponent, intercept, residual, points: pts.len() })
}

/// Log-log slope between two points.
pub fn secant_slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 / a.1).ln() / (b.0 / a.0).ln()
}

/// Running sums over samples of one or more trajectories.
#[derive(Debug, Clone)]
pub struct StatsAccumulator {
    grid: Arc<WavenumberGrid>,
    samples: u64,
    /// Per shell, sum over samples of the shell-mean periodogram.
    shell_spectrum_sum: Vec<f64>,
    shell_spectrum_sq_sum: Vec<f64>,
    shell_present: Vec<bool>,
    /// Per lag `m = 0..=N/2`.
    s2_sum: Vec<f64>,
    l2_series: Vec<(f64, f64)>,
}

impl StatsAccumulator {
    pub fn new(grid: Arc<WavenumberGrid>) -> Self {
        let shells = grid.n_shells();
        let lags = grid.n() / 2 + 1;
        let present = grid.shell_counts().iter().map(|&c| c > 0).collect();
        Self {
            grid,
            samples: 0,
            shell_spectrum_sum: vec![0.0; shells],
            shell_spectrum_sq_sum: vec![0.0; shells],
            shell_present: present,
            s2_sum: vec![0.0; lags],
            l2_series: Vec::new(),
        }
    }

    pub fn grid(&self) -> &Arc<WavenumberGrid> {
        &self.grid
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn l2_series(&self) -> &[(f64, f64)] {
        &self.l2_series
    }

    pub fn accumulate_sample(&mut self, u: &SpectralField, t: f64) {
        let shells = shell_average(&periodogram(u), &self.grid);
        for (s, v) in shells.iter().enumerate() {
            if let Some(v) = v {
                self.shell_spectrum_sum[s] += v;
                self.shell_spectrum_sq_sum[s] += v * v;
            }
        }
        let phys = u.dft_inverse();
        for (m, acc) in self.s2_sum.iter_mut().enumerate() {
            *acc += structure_function(&phys, &self.grid, m);
        }
        self.l2_series.push((t, u.l2_norm()));
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &StatsAccumulator) -> Result<()> {
        if self.grid.d() != other.grid.d() || self.grid.n() != other.grid.n() || self.grid.l_tot() != other.grid.l_tot() {
            return Err(CascadeError::ShapeMismatch { expected: self.grid.len(), got: other.grid.len() });
        }
        self.samples += other.samples;
        let add = |a: &mut Vec<f64>, b: &[f64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.shell_spectrum_sum, &other.shell_spectrum_sum);
        add(&mut self.shell_spectrum_sq_sum, &other.shell_spectrum_sq_sum);
        add(&mut self.s2_sum, &other.s2_sum);
        self.l2_series.extend_from_slice(&other.l2_series);
        self.l2_series.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        Ok(())
    }

    /// Time-averaged shell spectrum, indexed by shell.
    pub fn mean_spectrum(&self) -> Vec<Option<f64>> {
        let n = self.samples as f64;
        self.shell_spectrum_sum
            .iter()
            .zip(&self.shell_present)
            .map(|(s, &p)| (p && self.samples > 0).then(|| s / n))
            .collect()
    }

    /// Standard error of [`Self::mean_spectrum`], treating samples as independent.
    pub fn spectrum_standard_error(&self) -> Vec<Option<f64>> {
        if self.samples < 2 {
            return vec![None; self.shell_present.len()];
        }
        let n = self.samples as f64;
        self.shell_spectrum_sum
            .iter()
            .zip(&self.shell_spectrum_sq_sum)
            .zip(&self.shell_present)
            .map(|((s, q), &p)| {
                p.then(|| {
                    let mean = s / n;
                    ((q - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt()
                })
            })
            .collect()
    }

    /// `(r, Ĉ_u)` for the shells that have members, skipping the origin.
    pub fn spectrum_curve(&self) -> Vec<(f64, f64)> {
        let dk = self.grid.dk();
        self.mean_spectrum()
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(s, v)| v.map(|v| (s as f64 * dk, v)))
            .collect()
    }

    /// Mean `S₂` at lags `0..=N/2`.
    pub fn mean_s2(&self) -> Vec<f64> {
        let n = self.samples.max(1) as f64;
        self.s2_sum.iter().map(|s| s / n).collect()
    }

    /// `(ℓ, S₂)` for lags `1..=N/2`.
    pub fn s2_curve(&self) -> Vec<(f64, f64)> {
        let dx = self.grid.dx();
        self.mean_s2().into_iter().enumerate().skip(1).map(|(m, v)| (m as f64 * dx, v)).collect()
    }

    pub fn mean_l2(&self) -> Option<f64> {
        if self.l2_series.is_empty() {
            return None;
        }
        Some(self.l2_series.iter().map(|p| p.1).sum::<f64>() / self.l2_series.len() as f64)
    }

    /// Lag-one autocorrelation of the `σ²_u` series and the effective number
    /// of independent samples it implies, `n (1-ρ)/(1+ρ)`.
    pub fn l2_decorrelation(&self) -> Option<(f64, f64)> {
        let v: Vec<f64> = self.l2_series.iter().map(|p| p.1).collect();
        if v.len() < 3 {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
        if var == 0.0 {
            return Some((0.0, n));
        }
        let cov: f64 = v.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        let rho = (cov / var).clamp(-0.999, 0.999);
        Some((rho, n * (1.0 - rho) / (1.0 + rho)))
    }

    pub fn write_spectrum_csv<W: Write>(&self, w: &mut W, oracle: Option<&dyn Fn(f64) -> f64>) -> Result<()> {
        writeln!(w, "r,c_u,oracle,ratio")?;
        for (r, v) in self.spectrum_curve() {
            match oracle {
                Some(f) => {
                    let o = f(r);
                    if o > 0.0 {
                        writeln!(w, "{r},{v:e},{o:e},{:e}", v / o)?;
                    } else {
                        writeln!(w, "{r},{v:e},{o:e},")?;
                    }
                }
                None => writeln!(w, "{r},{v:e},,")?,
            }
        }
        Ok(())
    }

    pub fn write_s2_csv<W: Write>(&self, w: &mut W, fit: Option<&PowerLawFit>) -> Result<()> {
        writeln!(w, "ell,s2,fitted_slope")?;
        for (ell, v) in self.s2_curve() {
            match fit {
                Some(f) => writeln!(w, "{ell:e},{v:e},{}", f.exponent)?,
                None => writeln!(w, "{ell:e},{v:e},")?,
            }
        }
        Ok(())
    }

    pub fn write_l2_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,sigma2")?;
        for (t, v) in &self.l2_series {
            writeln!(w, "{t},{v:e}")?;
        }
        Ok(())
    }
}

/// Fit windows in absolute units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindows {
    pub spectrum: (f64, f64),
    pub s2_inertial: (f64, f64),
    /// Lags whose secant slope measures the dissipative range.
    pub s2_dissipative: (f64, f64),
}

impl FitWindows {
    /// Spectrum: from twice the forcing edge to the smaller of `k_max/4` and
    /// the radius where the viscous factor reaches `e^{-0.1}`. Structure
    /// function: from `8Δx` to the forcing scale `1/(2π k_hi)`; dissipative
    /// secant between `Δx` and `2Δx`.
    pub fn default_for(grid: &WavenumberGrid, k_hi: f64, c: f64, nu: f64) -> Self {
        let k_hi = k_hi * grid.dk();
        let mut top = grid.k_max() / 4.0;
        if nu > 0.0 {
            top = top.min((0.1 * c / (8.0 * std::f64::consts::PI.powi(2) * nu)).cbrt());
        }
        let dx = grid.dx();
        Self {
            spectrum: (2.0 * k_hi, top),
            s2_inertial: (8.0 * dx, 1.0 / (2.0 * std::f64::consts::PI * k_hi)),
            s2_dissipative: (dx, 2.0 * dx),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn grid(d: usize, n: usize) -> Arc<WavenumberGrid> {
        Arc::new(WavenumberGrid::new(d, n, 1.0).unwrap())
    }

    fn random_hermitian(g: &Arc<WavenumberGrid>, seed: u64, spectrum: impl Fn(f64) -> f64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::from_fn(g.clone(), |k| {
            let r = k.iter().map(|v| v * v).sum::<f64>().sqrt();
            let s = spectrum(r).sqrt();
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(a * s, b * s)
        });
        f.enforce_hermitian();
        f
    }

    #[test]
    fn periodogram_basics() {
        let g = grid(1, 16);
        assert!(periodogram(&SpectralField::zeros(g.clone())).iter().all(|&v| v == 0.0));
        let mut f = SpectralField::zeros(g.clone());
        let a = Complex64::new(0.6, -0.8);
        f.data_mut()[3] = a;
        f.data_mut()[13] = a.conj();
        let p = periodogram(&f);
        assert!((p[3] - 1.0).abs() < 1e-15 && (p[13] - 1.0).abs() < 1e-15);
        let parseval: f64 = p.iter().sum::<f64>() * g.dk();
        assert!((parseval - f.l2_norm()).abs() < 1e-15);
    }

    #[test]
    fn shell_average_examples() {
        let g = grid(2, 16);
        let constant = shell_average(&vec![2.5; g.len()], &g);
        assert!(constant.iter().flatten().all(|&v| v == 2.5));
        let kx2: Vec<f64> = (0..g.len()).map(|i| g.k_component(i, 1).powi(2)).collect();
        let avg = shell_average(&kx2, &g);
        for (s, v) in avg.iter().enumerate() {
            let members = g.shell_members(s);
            if members.is_empty() {
                assert!(v.is_none());
                continue;
            }
            let brute = members.iter().map(|&i| kx2[i]).sum::<f64>() / members.len() as f64;
            assert!((v.unwrap() - brute).abs() < 1e-12);
        }
        let g1 = grid(1, 16);
        let vals: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let a1 = shell_average(&vals, &g1);
        assert_eq!(a1[3], Some((3.0 + 13.0) / 2.0));
        assert_eq!(a1[8], Some(8.0));
    }

    #[test]
    fn structure_function_examples() {
        let g = grid(1, 64);
        let (amp, k0) = (1.7, 3.0);
        let u: Vec<f64> = (0..64).map(|i| amp * (2.0 * PI * k0 * i as f64 * g.dx()).cos()).collect();
        for m in [0, 1, 5, 17, 32] {
            let ell = m as f64 * g.dx();
            let want = amp * amp * (1.0 - (2.0 * PI * k0 * ell).cos());
            assert!((structure_function(&u, &g, m) - want).abs() < 1e-12);
        }
        let single: Vec<f64> = (0..64).map(|i| amp * (2.0 * PI * i as f64 * g.dx()).cos()).collect();
        assert!((structure_function(&single, &g, 32) - 2.0 * amp * amp).abs() < 1e-12);
        assert!(structure_curve(&[4.0; 64], &g).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn structure_function_averages_axes() {
        let g = grid(2, 16);
        // u depends on the second coordinate only, so axis 0 contributes 0.
        let u: Vec<f64> = (0..g.len()).map(|i| (2.0 * PI * (i % 16) as f64 / 16.0).sin()).collect();
        let m = 4;
        let want = 0.5 * (1.0 - (2.0 * PI * m as f64 / 16.0).cos());
        assert!((structure_function(&u, &g, m) - want).abs() < 1e-12);
    }

    #[test]
    fn fit_examples() {
        let curve: Vec<(f64, f64)> = (1..40).map(|i| (i as f64, 3.0 * (i as f64).powf(-5.0 / 3.0))).collect();
        let fit = fit_power_law(&curve, 2.0, 30.0).unwrap();
        assert!((fit.exponent + 5.0 / 3.0).abs() < 1e-12 && fit.residual < 1e-12);
        assert!((fit.eval(7.0) - 3.0 * 7f64.powf(-5.0 / 3.0)).abs() < 1e-12);
        let s2: Vec<(f64, f64)> = (1..20).map(|i| (i as f64 * 0.01, 0.5 * (i as f64 * 0.01).powf(2.0 / 3.0))).collect();
        assert!((fit_power_law(&s2, 0.0, 1.0).unwrap().exponent - 2.0 / 3.0).abs() < 1e-12);
        assert!(fit_power_law(&curve, 2.0, 5.0).is_err());
        let mut bad = curve.clone();
        bad[5].1 = 0.0;
        assert!(fit_power_law(&bad, 1.0, 30.0).is_err());
        assert!((secant_slope((1.0, 2.0), (2.0, 8.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_spectrum_slope_in_plateau() {
        use crate::oracle::{AnalyticParams, RadialDensity};
        let p = AnalyticParams::new(1, 1.0 / 3.0, 1.0, 1.0, 0.0, RadialDensity::Indicator { a: 2.5, b: 5.5, amplitude: 1.0 }).unwrap();
        let curve: Vec<(f64, f64)> = (1..200).map(|s| (s as f64, p.theoretical_spectrum(300.0, s as f64).unwrap())).collect();
        let fit = fit_power_law(&curve, 10.0, 128.0).unwrap();
        assert!((fit.exponent + 5.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn one_sample_and_synthetic_ensemble() {
        let g = grid(2, 16);
        let spectrum = |r: f64| if r == 0.0 { 0.0 } else { r.powf(-2.0) };
        let f = random_hermitian(&g, 1, spectrum);
        let mut one = StatsAccumulator::new(g.clone());
        one.accumulate_sample(&f, 0.5);
        let direct = shell_average(&periodogram(&f), &g);
        assert_eq!(one.mean_spectrum(), direct);
        assert_eq!(one.mean_l2(), Some(f.l2_norm()));
        assert_eq!(one.mean_s2(), structure_curve(&f.dft_inverse(), &g));

        let mut acc = StatsAccumulator::new(g.clone());
        for seed in 0..100 {
            acc.accumulate_sample(&random_hermitian(&g, 100 + seed, spectrum), seed as f64);
        }
        let mean = acc.mean_spectrum();
        let se = acc.spectrum_standard_error();
        let mut outside = 0;
        let mut checked = 0;
        for s in 1..g.n_shells() {
            if let (Some(m), Some(e)) = (mean[s], se[s]) {
                let want = g.shell_members(s).iter().map(|&i| spectrum(g.modulus()[i])).sum::<f64>() / g.shell_members(s).len() as f64;
                checked += 1;
                if (m - want).abs() > 4.0 * e {
                    outside += 1;
                }
            }
        }
        assert!(checked > 5 && outside == 0, "{outside} of {checked} shells outside 4 SE");
    }

    #[test]
    fn decorrelation_of_constant_and_alternating_series() {
        let mut acc = StatsAccumulator::new(grid(1, 8));
        acc.l2_series = (0..10).map(|i| (i as f64, 1.0)).collect();
        assert_eq!(acc.l2_decorrelation(), Some((0.0, 10.0)));
        acc.l2_series = (0..100).map(|i| (i as f64, if i % 2 == 0 { 1.0 } else { -1.0 })).collect();
        let (rho, neff) = acc.l2_decorrelation().unwrap();
        assert!(rho < -0.9 && neff > 100.0);
    }

    #[test]
    fn default_windows_for_reference_run() {
        let g = WavenumberGrid::new(1, 1024, 1.0).unwrap();
        let w = FitWindows::default_for(&g, 5.0, 1.0, 1e-8);
        assert_eq!(w.spectrum.0, 10.0);
        assert!((w.spectrum.1 - 50.2).abs() < 0.1);
        assert!((w.s2_inertial.0 * 1024.0 - 8.0).abs() < 1e-12);
        assert!((w.s2_inertial.1 * 1024.0 - 32.6).abs() < 0.1);
    }

    fn accumulator_from(g: &Arc<WavenumberGrid>, seeds: &[u64]) -> StatsAccumulator {
        let mut acc = StatsAccumulator::new(g.clone());
        for &s in seeds {
            acc.accumulate_sample(&random_hermitian(g, s, |r| 1.0 / (1.0 + r * r)), s as f64);
        }
        acc
    }

    fn same(a: &StatsAccumulator, b: &StatsAccumulator) -> bool {
        let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= 1e-12 * p.abs().max(1.0));
        a.samples == b.samples
            && close(&a.shell_spectrum_sum, &b.shell_spectrum_sum)
            && close(&a.shell_spectrum_sq_sum, &b.shell_spectrum_sq_sum)
            && close(&a.s2_sum, &b.s2_sum)
            && a.l2_series == b.l2_series
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn merge_matches_sequential(split in 0usize..6, order in any::<bool>()) {
            let g = grid(1, 32);
            let seeds: Vec<u64> = (0..6).collect();
            let whole = accumulator_from(&g, &seeds);
            let mut a = accumulator_from(&g, &seeds[..split]);
            let b = accumulator_from(&g, &seeds[split..]);
            if order {
                a.merge(&b).unwrap();
                prop_assert!(same(&a, &whole));
            } else {
                let mut b = b;
                b.merge(&a).unwrap();
                prop_assert!(same(&b, &whole));
            }
        }

        #[test]
        fn merge_is_associative(seed in 0u64..1000) {
            let g = grid(2, 8);
            let (a, b, c) = (accumulator_from(&g, &[seed]), accumulator_from(&g, &[seed + 1]), accumulator_from(&g, &[seed + 2]));
            let mut left = a.clone();
            left.merge(&b).unwrap();
            left.merge(&c).unwrap();
            let mut bc = b.clone();
            bc.merge(&c).unwrap();
            let mut right = a.clone();
            right.merge(&bc).unwrap();
            prop_assert!(same(&left, &right));
        }

        #[test]
        fn shell_spectrum_nonnegative_and_s2_symmetric(seed in 0u64..1000, d in 1usize..=2) {
            let g = grid(d, 16);
            let f = random_hermitian(&g, seed, |r| (-r / 4.0).exp());
            let shells = shell_average(&periodogram(&f), &g);
            prop_assert!(shells.iter().flatten().all(|&v| v >= 0.0));
            let u = f.dft_inverse();
            prop_assert_eq!(structure_function(&u, &g, 0), 0.0);
            for m in 1..16 {
                let (a, b) = (structure_function(&u, &g, m), structure_function(&u, &g, 16 - m));
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
            }
        }
    }
}
