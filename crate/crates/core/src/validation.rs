//! Acceptance checks shared by the `validate` subcommand and the
//! `acceptance` test target. Every tolerance is a named constant.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::config::SimulationConfig;
use crate::error::Result;
use crate::field::SpectralField;
use crate::forcing::{member_seed, Forcing};
use crate::grid::WavenumberGrid;
use crate::integrator::{run, IntegratorState, NoHooks, RunOutput, Stepper};
use crate::operators::{OperatorParams, Operators};
use crate::oracle::complex1d::{Complex1d, GaussianProfile};
use crate::oracle::AnalyticParams;
use crate::stats::{fit_power_law, secant_slope, FitWindows, StatsAccumulator};

pub const SPECTRUM_SLOPE_TOL_D1: f64 = 0.15;
pub const S2_INERTIAL_TOL: f64 = 0.15;
pub const S2_DISSIPATIVE_TOL: f64 = 0.2;
pub const VARIANCE_REL_TOL: f64 = 0.10;
pub const ORACLE_SE_MULTIPLE: f64 = 3.0;
pub const ORACLE_SHELL_FRACTION: f64 = 0.90;
pub const ORACLE_ENSEMBLE: usize = 64;
pub const MIN_CONVERGENCE_ORDER: f64 = 1.8;
pub const MC_SE_MULTIPLE: f64 = 4.0;
pub const MC_PATHS: usize = 10_000;
pub const INVARIANT_TOL: f64 = 1e-12;
pub const INVARIANT_STEPS: u64 = 1_000;
pub const SPECTRUM_SLOPE_TOL_D2: f64 = 0.25;
pub const DRIFT_RATE_TOL: f64 = 1e-4;
/// The drift of Heun's method on a norm-preserving linear system is
/// `O(Δt³)` per unit time, so halving the step should shrink it about 8×;
/// anything at or above 3 shows the expected decrease.
pub const MIN_DRIFT_RATIO: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: String,
    pub name: String,
    pub passed: bool,
    /// Non-gating checks are reported but never fail the suite.
    pub gating: bool,
    pub measured: String,
    pub expected: String,
    pub details: Vec<String>,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match (self.passed, self.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "INFO",
        };
        write!(
            f,
            "{tag} [{}] {}: measured {}; expected {} ({:.1} s)",
            self.id, self.name, self.measured, self.expected, self.seconds
        )
    }
}

fn report(id: &str, name: &str, passed: bool, measured: String, expected: String) -> CriterionReport {
    CriterionReport {
        id: id.into(),
        name: name.into(),
        passed,
        gating: true,
        measured,
        expected,
        details: Vec::new(),
        seconds: 0.0,
    }
}

fn guarded(id: &str, name: &str, f: impl FnOnce() -> Result<CriterionReport>) -> CriterionReport {
    let start = Instant::now();
    let mut r = f().unwrap_or_else(|e| report(id, name, false, format!("error: {e}"), "a completed run".into()));
    r.seconds = start.elapsed().as_secs_f64();
    r
}

/// Desk-scale `d = 1` reference run shared by criteria 1 to 3.
pub fn reference_config_d1() -> SimulationConfig {
    SimulationConfig::preset("fig2-d1-desk").expect("preset exists")
}

pub fn run_reference(cfg: &SimulationConfig) -> Result<RunOutput> {
    run(cfg, &mut NoHooks).map_err(|f| f.error)
}

/// Criterion 1: spectrum slope in the default window.
pub fn spectral_power_law_d1(cfg: &SimulationConfig, out: &RunOutput) -> CriterionReport {
    guarded("1", "spectral power law, d=1", || {
        let grid = out.stats.grid();
        let w = FitWindows::default_for(grid, cfg.forcing.k_hi, cfg.physics.c, cfg.physics.nu);
        let fit = fit_power_law(&out.stats.spectrum_curve(), w.spectrum.0, w.spectrum.1)?;
        let want = -(2.0 * cfg.physics.hurst + 1.0);
        let mut r = report(
            "1",
            "spectral power law, d=1",
            (fit.exponent - want).abs() <= SPECTRUM_SLOPE_TOL_D1,
            format!("slope {:.4} over r in [{:.1}, {:.1}] ({} shells)", fit.exponent, w.spectrum.0, w.spectrum.1, fit.points),
            format!("{want:.4} ± {SPECTRUM_SLOPE_TOL_D1}"),
        );
        r.details.push(format!("samples {}", out.stats.samples()));
        Ok(r)
    })
}

/// Criterion 2: structure-function slopes, inertial and dissipative.
pub fn structure_function_d1(cfg: &SimulationConfig, out: &RunOutput) -> CriterionReport {
    guarded("2", "structure-function law, d=1", || {
        let grid = out.stats.grid();
        let w = FitWindows::default_for(grid, cfg.forcing.k_hi, cfg.physics.c, cfg.physics.nu);
        let curve = out.stats.s2_curve();
        let fit = fit_power_law(&curve, w.s2_inertial.0 * (1.0 - 1e-9), w.s2_inertial.1)?;
        let diss = secant_slope(curve[0], curve[1]);
        let want = 2.0 * cfg.physics.hurst;
        let ok = (fit.exponent - want).abs() <= S2_INERTIAL_TOL && (diss - 2.0).abs() <= S2_DISSIPATIVE_TOL;
        Ok(report(
            "2",
            "structure-function law, d=1",
            ok,
            format!(
                "inertial slope {:.4} over ℓ in [{:.3e}, {:.3e}] ({} lags); dissipative secant {:.4}",
                fit.exponent, w.s2_inertial.0, w.s2_inertial.1, fit.points, diss
            ),
            format!("{want:.4} ± {S2_INERTIAL_TOL}; 2 ± {S2_DISSIPATIVE_TOL}"),
        ))
    })
}

/// Configuration of the finer, less viscous companion run of criterion 3.
pub fn companion_config_d1() -> SimulationConfig {
    let mut cfg = reference_config_d1();
    cfg.grid.n = 2048;
    cfg.physics.nu = 1e-9;
    cfg
}

/// Criterion 3: stationary mean of `σ²_u` at two viscosities.
pub fn viscosity_independence(reference: &RunOutput) -> CriterionReport {
    guarded("3", "viscosity independence of variance", || {
        let fine = run_reference(&companion_config_d1())?;
        let a = reference.stats.mean_l2().unwrap_or(f64::NAN);
        let b = fine.stats.mean_l2().unwrap_or(f64::NAN);
        let rel = (a - b).abs() / a;
        let mut r = report(
            "3",
            "viscosity independence of variance",
            rel < VARIANCE_REL_TOL,
            format!("mean σ² {a:.4} (N=1024, ν=1e-8) vs {b:.4} (N=2048, ν=1e-9): relative difference {rel:.4}"),
            format!("< {VARIANCE_REL_TOL}"),
        );
        for (name, out) in [("reference", reference), ("companion", &fine)] {
            if let Some((rho, neff)) = out.stats.l2_decorrelation() {
                r.details.push(format!("{name}: lag-one autocorrelation of σ² samples {rho:.3}, effective samples {neff:.1}"));
            }
        }
        Ok(r)
    })
}

/// Setup of criterion 4: `d = 1`, `N = 256`, `ν = 0`, stopped before the
/// front `ct + k_hi` reaches `k_max`.
pub fn oracle_mc_config() -> SimulationConfig {
    let mut cfg = SimulationConfig::default();
    cfg.grid.n = 256;
    cfg.physics.nu = 0.0;
    let t_stop = (cfg.k_max() - cfg.forcing.k_hi / cfg.grid.l_tot) / cfg.physics.c;
    let dt = cfg.time.dt;
    cfg.time.t_spinup = Some((t_stop / dt + 1e-9).floor() * dt);
    cfg.time.n_samples = 0;
    cfg
}

/// Outcome of the ensemble-versus-oracle comparison.
#[derive(Debug, Clone)]
pub struct OracleComparison {
    pub t: f64,
    /// `(shell, r, mean, standard error, oracle)`.
    pub shells: Vec<(usize, f64, f64, f64, f64)>,
    pub within: usize,
}

impl OracleComparison {
    pub fn fraction(&self) -> f64 {
        self.within as f64 / self.shells.len().max(1) as f64
    }
}

/// Runs the ensemble of criterion 4. `tamper_damping` flips the sign of the
/// `c(H+1/2)/|k|` term in the simulator while the oracle keeps the true one.
pub fn oracle_vs_monte_carlo(cfg: &SimulationConfig, members: usize, tamper_damping: bool) -> Result<OracleComparison> {
    let grid = cfg.build_grid()?;
    let states: Vec<Result<IntegratorState>> = (0..members as u64)
        .into_par_iter()
        .map(|m| {
            let mut member = *cfg;
            member.forcing.seed = member_seed(cfg.forcing.seed, m);
            let mut stepper = if tamper_damping {
                let p = member.operator_params();
                let ops = Operators::new(grid.clone(), p)?
                    .with_damping(|k| -p.c * (p.h + 0.5) / k + 4.0 * PI * PI * p.nu * k * k);
                Stepper::new(ops, Some(Forcing::new(grid.clone(), member.forcing, member.kappa())?), member.effective_dt())?
            } else {
                Stepper::from_config(&member)?
            };
            let mut state = IntegratorState::zero(stepper.operators().grid().clone());
            for _ in 0..cfg.spinup_steps() {
                stepper.pc_step(&mut state)?;
            }
            Ok(state)
        })
        .collect();
    let mut acc = StatsAccumulator::new(grid.clone());
    let mut t = 0.0;
    for s in states {
        let s = s?;
        t = s.t;
        acc.accumulate_sample(&s.u, s.t);
    }
    let forcing = Forcing::new(grid.clone(), cfg.forcing, cfg.kappa())?;
    let oracle = AnalyticParams::new(1, cfg.physics.hurst, cfg.physics.c, cfg.kappa(), 0.0, forcing.effective_psi())?;
    let mean = acc.mean_spectrum();
    let se = acc.spectrum_standard_error();
    let dk = grid.dk();
    let mut shells = Vec::new();
    let mut within = 0;
    for s in 0..grid.n_shells() {
        let r = s as f64 * dk;
        let in_band = s as f64 >= cfg.forcing.k_lo && s as f64 <= cfg.forcing.k_hi;
        if r <= cfg.kappa() || in_band || r > grid.k_max() {
            continue;
        }
        let (Some(m), Some(e)) = (mean[s], se[s]) else { continue };
        let o = oracle.theoretical_spectrum(t, r)?;
        if (m - o).abs() <= ORACLE_SE_MULTIPLE * e {
            within += 1;
        }
        shells.push((s, r, m, e, o));
    }
    Ok(OracleComparison { t, shells, within })
}

/// Criterion 4.
pub fn oracle_spectrum_check(tamper_damping: bool) -> CriterionReport {
    let id = if tamper_damping { "4-mutant" } else { "4" };
    let name = if tamper_damping { "oracle vs Monte-Carlo, damping sign flipped" } else { "oracle vs Monte-Carlo spectrum" };
    guarded(id, name, || {
        let cfg = oracle_mc_config();
        let cmp = oracle_vs_monte_carlo(&cfg, ORACLE_ENSEMBLE, tamper_damping)?;
        let frac = cmp.fraction();
        let mut r = report(
            id,
            name,
            frac >= ORACLE_SHELL_FRACTION,
            format!("{} of {} shells within {ORACLE_SE_MULTIPLE} SE at t = {} ({frac:.3})", cmp.within, cmp.shells.len(), cmp.t),
            format!("fraction ≥ {ORACLE_SHELL_FRACTION}"),
        );
        let ratios: Vec<f64> = cmp.shells.iter().filter(|s| s.4 > 0.0).map(|s| s.2 / s.4).collect();
        if !ratios.is_empty() {
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &v| (a.0.min(v), a.1.max(v)));
            r.details.push(format!("MC/oracle ratio: mean {mean:.3}, range [{lo:.3}, {hi:.3}]"));
        }
        let mut worst: Vec<_> = cmp.shells.iter().map(|s| ((s.2 - s.4) / s.3, s.0)).collect();
        worst.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
        let list: Vec<String> = worst.iter().take(5).map(|(z, s)| format!("shell {s}: z = {z:+.2}")).collect();
        r.details.push(format!("largest deviations: {}", list.join(", ")));
        Ok(r)
    })
}

fn smooth_profile(grid: &Arc<WavenumberGrid>, k0: f64, sigma: f64) -> SpectralField {
    SpectralField::from_fn(grid.clone(), |k| {
        let r = k.iter().map(|v| v * v).sum::<f64>().sqrt();
        Complex64::new((-(r - k0).powi(2) / (2.0 * sigma * sigma)).exp(), 0.0)
    })
}

/// Errors against the Duhamel integral at `t = 1` for each step size.
pub fn deterministic_errors(steps: &[f64]) -> Result<Vec<f64>> {
    let grid = Arc::new(WavenumberGrid::new(1, 128, 1.0)?);
    let params = OperatorParams { c: 1.0, h: 1.0 / 3.0, nu: 1e-4, kappa: 1.0 };
    let (k0, sigma) = (24.0, 3.0);
    let profile = smooth_profile(&grid, k0, sigma);
    let amp = |t: f64| 1.0 + 0.5 * (2.0 * PI * t).sin();
    let t_end = 1.0;
    let oracle = AnalyticParams::new(1, params.h, params.c, params.kappa, params.nu, crate::oracle::RadialDensity::Indicator { a: 0.0, b: 0.0, amplitude: 0.0 })?;
    let reference: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let k = grid.k_vector(i);
            oracle.duhamel_reference(
                |s, k0v: &[f64]| Complex64::new(amp(s) * (-(k0v[0].abs() - k0).powi(2) / (2.0 * sigma * sigma)).exp(), 0.0),
                t_end,
                &k,
                0.05,
            )
        })
        .collect::<Result<_>>()?;
    steps
        .iter()
        .map(|&dt| {
            let ops = Operators::new(grid.clone(), params)?;
            let mut stepper = Stepper::new(ops, None, dt)?;
            let mut state = IntegratorState::zero(grid.clone());
            let n = (t_end / dt).round() as u64;
            for _ in 0..n {
                stepper.deterministic_step(&mut state, |t| {
                    let mut f = profile.clone();
                    f.scale(amp(t));
                    f
                })?;
            }
            Ok(state.u.data().iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        })
        .collect()
}

/// Criterion 5.
pub fn convergence_order() -> CriterionReport {
    guarded("5", "deterministic convergence order", || {
        let steps = [4e-3, 2e-3, 1e-3];
        let errs = deterministic_errors(&steps)?;
        let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(report(
            "5",
            "deterministic convergence order",
            min >= MIN_CONVERGENCE_ORDER,
            format!("errors {:.3e}, {:.3e}, {:.3e}; orders {:.3}, {:.3}", errs[0], errs[1], errs[2], orders[0], orders[1]),
            format!("order ≥ {MIN_CONVERGENCE_ORDER}"),
        ))
    })
}

/// Model and evaluation point of criterion 6.
pub fn complex_model() -> (Complex1d, f64, f64, f64) {
    (Complex1d { c: 1.0, profile: GaussianProfile { amplitude: 1.0, width: 0.25 } }, 1.0, 0.3, 0.1)
}

/// Criterion 6.
pub fn complex_reference_model() -> CriterionReport {
    guarded("6", "1D complex reference model", || {
        let (model, t, x1, x2) = complex_model();
        let est = model.monte_carlo(t, x1, x2, MC_PATHS, 1e-3, 2024)?;
        let var = model.variance(t);
        let cov = model.covariance(t, x1 - x2);
        let zv = (est.variance - var) / est.variance_se;
        let zr = (est.covariance.re - cov.re) / est.covariance_se.re;
        let zi = (est.covariance.im - cov.im) / est.covariance_se.im;
        let ok = zv.abs() <= MC_SE_MULTIPLE && zr.abs() <= MC_SE_MULTIPLE && zi.abs() <= MC_SE_MULTIPLE;
        Ok(report(
            "6",
            "1D complex reference model",
            ok,
            format!(
                "variance {:.5} vs {var:.5} (z = {zv:+.2}); covariance {:.5}{:+.5}i vs {:.5}{:+.5}i (z = {zr:+.2}, {zi:+.2})",
                est.variance, est.covariance.re, est.covariance.im, cov.re, cov.im
            ),
            format!("|z| ≤ {MC_SE_MULTIPLE} with {MC_PATHS} paths"),
        ))
    })
}

/// Criterion 7: invariants after every step and bit-identical reruns.
pub fn structural_invariants() -> CriterionReport {
    guarded("7", "structural invariants", || {
        let mut cfg = SimulationConfig::preset("fig3-d2-desk")?;
        cfg.grid.n = 64;
        cfg.physics.nu = 1e-4;
        cfg.forcing.seed = 99;
        let trajectory = || -> Result<(f64, f64, SpectralField)> {
            let mut stepper = Stepper::from_config(&cfg)?;
            let mut state = IntegratorState::zero(stepper.operators().grid().clone());
            let (mut herm, mut low) = (0.0f64, 0.0f64);
            for _ in 0..INVARIANT_STEPS {
                stepper.pc_step(&mut state)?;
                herm = herm.max(state.u.hermitian_defect());
                low = low.max(state.u.low_mode_residual(cfg.kappa()));
            }
            Ok((herm, low, state.u))
        };
        let (herm, low, a) = trajectory()?;
        let (_, _, b) = trajectory()?;
        let identical = a.data().iter().zip(b.data()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits());
        Ok(report(
            "7",
            "structural invariants",
            herm < INVARIANT_TOL && low < INVARIANT_TOL && identical,
            format!("max Hermitian defect {herm:.2e}, max |k|≤κ residual {low:.2e}, reruns bit-identical: {identical}"),
            format!("both < {INVARIANT_TOL:e} over {INVARIANT_STEPS} steps; identical reruns"),
        ))
    })
}

/// Criterion 8 and its `d = 3` companion. When the viscous cap falls below
/// the lower edge the spectrum window falls back to `[2 k_hi, k_max/4]`, and
/// to `[2 k_hi, k_max]` if that is still empty.
pub fn multi_d_smoke(d: usize) -> CriterionReport {
    let (id, name, gating) = if d == 2 { ("8", "d=2 spectrum slope", true) } else { ("8-d3", "d=3 spectrum slope (non-gating)", false) };
    let mut r = guarded(id, name, || {
        let cfg = SimulationConfig::preset(if d == 2 { "fig3-d2-desk" } else { "fig4-d3-desk" })?;
        let out = run_reference(&cfg)?;
        let grid = out.stats.grid();
        let mut w = FitWindows::default_for(grid, cfg.forcing.k_hi, cfg.physics.c, cfg.physics.nu).spectrum;
        let mut note = None;
        if w.1 <= w.0 {
            note = Some(format!("viscous cap {:.2} below 2 k_hi; window falls back to k_max/4", w.1));
            w.1 = grid.k_max() / 4.0;
        }
        if w.1 <= w.0 {
            note = Some(format!("viscous cap and k_max/4 = {:.2} below 2 k_hi; window extends to k_max", w.1));
            w.1 = grid.k_max();
        }
        let fit = fit_power_law(&out.stats.spectrum_curve(), w.0, w.1)?;
        let want = -(2.0 * cfg.physics.hurst + d as f64);
        let forcing = Forcing::new(grid.clone(), cfg.forcing, cfg.kappa())?;
        let oracle = AnalyticParams::new(d, cfg.physics.hurst, cfg.physics.c, cfg.kappa(), cfg.physics.nu, forcing.effective_psi())?;
        let t = out.state.t;
        let oracle_curve: Vec<(f64, f64)> = out
            .stats
            .spectrum_curve()
            .iter()
            .map(|&(r, _)| Ok((r, oracle.theoretical_spectrum(t, r)?)))
            .collect::<Result<_>>()?;
        let oracle_fit = fit_power_law(&oracle_curve, w.0, w.1)?;
        let tol = SPECTRUM_SLOPE_TOL_D2;
        let mut r = report(
            id,
            name,
            (fit.exponent - want).abs() <= tol,
            format!("slope {:.4} over r in [{:.1}, {:.1}] ({} shells)", fit.exponent, w.0, w.1, fit.points),
            format!("{want:.4} ± {tol}"),
        );
        r.details.push(format!("oracle spectrum at the final time has slope {:.4} in the same window", oracle_fit.exponent));
        if let Some(n) = note {
            r.details.push(n);
        }
        Ok(r)
    });
    r.gating = gating;
    r
}

/// Relative `σ²_u` drift per unit time of an unforced `H = -d/2`, `ν = 0`
/// run from a smooth random state.
pub fn conservation_drift(dt: f64, t_end: f64, seed: u64) -> Result<f64> {
    let grid = Arc::new(WavenumberGrid::new(1, 256, 1.0)?);
    let params = OperatorParams { c: 1.0, h: -0.5, nu: 0.0, kappa: 1.0 };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, Complex64)> = (0..4)
        .map(|_| {
            let center = rng.random_range(30.0..60.0);
            let width = rng.random_range(4.0..8.0);
            let amp = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (center, width, amp)
        })
        .collect();
    let mut u = SpectralField::from_fn(grid.clone(), |k| {
        let (s, r) = (k[0].signum(), k[0].abs());
        bumps
            .iter()
            .map(|&(c0, w, a)| {
                let v = a * (-(r - c0).powi(2) / (2.0 * w * w)).exp();
                if s < 0.0 { v.conj() } else { v }
            })
            .sum()
    });
    u.project_low_modes(params.kappa);
    u.enforce_hermitian();
    let ops = Operators::new(grid.clone(), params)?;
    let mut stepper = Stepper::new(ops, None, dt)?;
    let s0 = u.l2_norm();
    let mut state = IntegratorState { u, t: 0.0, step: 0 };
    let n = (t_end / dt).round() as u64;
    for _ in 0..n {
        stepper.pc_step(&mut state)?;
    }
    Ok((state.u.l2_norm() - s0).abs() / s0 / state.t)
}

/// Criterion 9.
pub fn conservation_check() -> CriterionReport {
    guarded("9", "L² conservation at H = -d/2", || {
        let a = conservation_drift(1e-3, 10.0, 5)?;
        let b = conservation_drift(5e-4, 10.0, 5)?;
        let ratio = a / b;
        Ok(report(
            "9",
            "L² conservation at H = -d/2",
            a < DRIFT_RATE_TOL && ratio >= MIN_DRIFT_RATIO,
            format!("drift per unit time {a:.3e} at Δt = 1e-3, {b:.3e} at 5e-4 (ratio {ratio:.2})"),
            format!("< {DRIFT_RATE_TOL:e}; ratio ≥ {MIN_DRIFT_RATIO}"),
        ))
    })
}

/// Runs the suite, calling `on_report` as each criterion finishes.
pub fn run_suite(level: Level, on_report: &mut dyn FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    let mut all = Vec::new();
    let mut push = |r: CriterionReport, all: &mut Vec<CriterionReport>| {
        on_report(&r);
        all.push(r);
    };
    let cfg = reference_config_d1();
    match run_reference(&cfg) {
        Ok(out) => {
            push(spectral_power_law_d1(&cfg, &out), &mut all);
            push(structure_function_d1(&cfg, &out), &mut all);
            push(viscosity_independence(&out), &mut all);
        }
        Err(e) => {
            for (id, name) in [("1", "spectral power law, d=1"), ("2", "structure-function law, d=1"), ("3", "viscosity independence of variance")] {
                push(report(id, name, false, format!("reference run failed: {e}"), "a completed run".into()), &mut all);
            }
        }
    }
    push(oracle_spectrum_check(false), &mut all);
    if level == Level::Full {
        push(convergence_order(), &mut all);
        push(complex_reference_model(), &mut all);
    }
    push(structural_invariants(), &mut all);
    if level == Level::Full {
        push(multi_d_smoke(2), &mut all);
        push(multi_d_smoke(3), &mut all);
        push(conservation_check(), &mut all);
    }
    all
}

pub fn suite_passed(reports: &[CriterionReport]) -> bool {
    reports.iter().all(|r| r.passed || !r.gating)
}
