//! Predictor-corrector time stepping and run orchestration.
//!
//! One step with forcing draw `f̂`:
//!
//! ```text
//! û* = û - Δt (𝔏+𝔇)(û) + √Δt f̂
//! û  ← û - (Δt/2) [(𝔏+𝔇)(û) + (𝔏+𝔇)(û*)] + √Δt f̂
//! ```
//!
//! followed by zeroing `|k| ≤ κ` and Hermitian averaging. `Δt · Δt^{-1/2} f̂`
//! is the Euler-Maruyama increment of white-in-time forcing.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::SimulationConfig;
use crate::error::{CascadeError, Result};
use crate::field::SpectralField;
use crate::forcing::{member_seed, Forcing};
use crate::grid::WavenumberGrid;
use crate::operators::Operators;
use crate::stats::StatsAccumulator;

#[derive(Debug, Clone)]
pub struct IntegratorState {
    pub u: SpectralField,
    pub t: f64,
    pub step: u64,
}

impl IntegratorState {
    pub fn zero(grid: Arc<WavenumberGrid>) -> Self {
        Self { u: SpectralField::zeros(grid), t: 0.0, step: 0 }
    }
}

pub struct Stepper {
    ops: Operators,
    forcing: Option<Forcing>,
    forcing_scale: f64,
    dt: f64,
    op0: SpectralField,
    op1: SpectralField,
    pred: SpectralField,
    draw: SpectralField,
    scratch: Vec<Complex64>,
}

impl Stepper {
    pub fn new(ops: Operators, forcing: Option<Forcing>, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CascadeError::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        let grid = ops.grid().clone();
        if let Some(f) = &forcing {
            if !Arc::ptr_eq(f.grid(), &grid) && f.grid().len() != grid.len() {
                return Err(CascadeError::ShapeMismatch { expected: grid.len(), got: f.grid().len() });
            }
        }
        let zeros = SpectralField::zeros(grid.clone());
        Ok(Self {
            ops,
            forcing,
            forcing_scale: 1.0,
            dt,
            op0: zeros.clone(),
            op1: zeros.clone(),
            pred: zeros.clone(),
            draw: zeros,
            scratch: vec![Complex64::default(); grid.len()],
        })
    }

    pub fn from_config(cfg: &SimulationConfig) -> Result<Self> {
        let grid = cfg.build_grid()?;
        let ops = Operators::new(grid.clone(), cfg.operator_params())?;
        let forcing = Forcing::new(grid, cfg.forcing, cfg.kappa())?;
        Self::new(ops, Some(forcing), cfg.effective_dt())
    }

    /// Multiplies every forcing draw by `scale`.
    pub fn with_forcing_scale(mut self, scale: f64) -> Self {
        self.forcing_scale = scale;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn forcing(&self) -> Option<&Forcing> {
        self.forcing.as_ref()
    }

    /// One stochastic step using the draw keyed by `state.step`.
    pub fn pc_step(&mut self, state: &mut IntegratorState) -> Result<()> {
        let mut draw = std::mem::replace(&mut self.draw, SpectralField::zeros(self.ops.grid().clone()));
        match &self.forcing {
            Some(f) => {
                f.sample_into(state.step, &mut draw);
                if self.forcing_scale != 1.0 {
                    draw.scale(self.forcing_scale);
                }
            }
            None => draw.data_mut().fill(Complex64::default()),
        }
        let sq = self.dt.sqrt();
        let r = self.heun(state, &draw, sq, &draw, sq);
        self.draw = draw;
        r
    }

    /// One step with an explicit forcing draw shared by both stages.
    pub fn pc_step_with(&mut self, state: &mut IntegratorState, draw: &SpectralField) -> Result<()> {
        let sq = self.dt.sqrt();
        self.heun(state, draw, sq, draw, sq)
    }

    /// Heun step for `dû/dt = -(𝔏+𝔇)û + f(t)`: the predictor uses `f(t)`,
    /// the corrector the average of `f(t)` and `f(t+Δt)`.
    pub fn deterministic_step(&mut self, state: &mut IntegratorState, f: impl Fn(f64) -> SpectralField) -> Result<()> {
        let f0 = f(state.t);
        let mut avg = f(state.t + self.dt);
        avg.axpy(1.0, &f0);
        avg.scale(0.5);
        let dt = self.dt;
        self.heun(state, &f0, dt, &avg, dt)
    }

    /// `t` is recomputed as `step · Δt` so that long runs do not drift.
    fn heun(&mut self, state: &mut IntegratorState, fp: &SpectralField, wp: f64, fc: &SpectralField, wc: f64) -> Result<()> {
        let dt = self.dt;
        self.ops.apply_into(&state.u, &mut self.op0, &mut self.scratch);
        for (((p, u), o), f) in self.pred.data_mut().iter_mut().zip(state.u.data()).zip(self.op0.data()).zip(fp.data()) {
            *p = u - o * dt + f * wp;
        }
        self.ops.apply_into(&self.pred, &mut self.op1, &mut self.scratch);
        let half = 0.5 * dt;
        for (((u, a), b), f) in state.u.data_mut().iter_mut().zip(self.op0.data()).zip(self.op1.data()).zip(fc.data()) {
            *u -= (a + b) * half;
            *u += f * wc;
        }
        let kappa = self.ops.params().kappa;
        state.u.project_low_modes(kappa);
        state.u.enforce_hermitian();
        state.step += 1;
        state.t = state.step as f64 * dt;
        if !state.u.is_finite() {
            return Err(CascadeError::BlowUp { step: state.step, t: state.t, reason: "non-finite spectral coefficient".into() });
        }
        Ok(())
    }
}

/// Aborts when `σ²_u` exceeds a multiple of the running median of earlier
/// nonzero checks.
#[derive(Debug, Clone)]
pub struct BlowUpMonitor {
    pub interval: u64,
    pub warmup: usize,
    pub factor: f64,
    history: Vec<f64>,
}

impl Default for BlowUpMonitor {
    fn default() -> Self {
        Self { interval: 100, warmup: 10, factor: 1e6, history: Vec::new() }
    }
}

impl BlowUpMonitor {
    pub fn observe(&mut self, state: &IntegratorState) -> Result<()> {
        if self.interval == 0 || state.step % self.interval != 0 {
            return Ok(());
        }
        let v = state.u.l2_norm();
        if self.history.len() >= self.warmup {
            let mut sorted = self.history.clone();
            sorted.sort_by(|a, b| a.total_cmp(b));
            let median = sorted[sorted.len() / 2];
            if v > self.factor * median {
                return Err(CascadeError::BlowUp {
                    step: state.step,
                    t: state.t,
                    reason: format!("sigma^2 = {v:e} exceeds {:e} x running median {median:e}", self.factor),
                });
            }
        }
        if v > 0.0 {
            self.history.push(v);
        }
        Ok(())
    }
}

/// Callbacks invoked by [`run`].
pub trait RunHooks {
    fn on_sample(&mut self, _state: &IntegratorState) -> Result<()> {
        Ok(())
    }
    /// Called at the end of spin-up and every `checkpoint_every` steps.
    fn on_checkpoint(&mut self, _state: &IntegratorState) -> Result<()> {
        Ok(())
    }
}

pub struct NoHooks;
impl RunHooks for NoHooks {}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stats: StatsAccumulator,
    pub state: IntegratorState,
    pub warnings: Vec<String>,
}

/// A failed run with whatever was accumulated before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: CascadeError,
    pub stats: Option<StatsAccumulator>,
    pub state: Option<IntegratorState>,
}

impl From<CascadeError> for RunFailure {
    fn from(error: CascadeError) -> Self {
        Self { error, stats: None, state: None }
    }
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

/// Integrates from rest to the spin-up time, then samples `n_samples` times
/// every `sample_stride` steps.
pub fn run(cfg: &SimulationConfig, hooks: &mut dyn RunHooks) -> std::result::Result<RunOutput, RunFailure> {
    let warnings = cfg.validate()?;
    let mut stepper = Stepper::from_config(cfg)?;
    let grid = stepper.operators().grid().clone();
    let mut state = IntegratorState::zero(grid.clone());
    let mut stats = StatsAccumulator::new(grid);
    let mut monitor = BlowUpMonitor::default();
    let spinup = cfg.spinup_steps();
    let total = cfg.total_steps();
    let stride = cfg.time.sample_stride.max(1);
    let fail = |error, stats: StatsAccumulator, state: IntegratorState| RunFailure { error, stats: Some(stats), state: Some(state) };

    if spinup == 0 {
        if let Err(e) = hooks.on_checkpoint(&state) {
            return Err(fail(e, stats, state));
        }
    }
    while state.step < total {
        if let Err(e) = stepper.pc_step(&mut state).and_then(|_| monitor.observe(&state)) {
            return Err(fail(e, stats, state));
        }
        let s = state.step;
        let checkpoint = s == spinup || cfg.time.checkpoint_every.is_some_and(|k| s % k == 0);
        if checkpoint {
            if let Err(e) = hooks.on_checkpoint(&state) {
                return Err(fail(e, stats, state));
            }
        }
        if s > spinup && (s - spinup) % stride == 0 {
            stats.accumulate_sample(&state.u, state.t);
            if let Err(e) = hooks.on_sample(&state) {
                return Err(fail(e, stats, state));
            }
        }
    }
    Ok(RunOutput { stats, state, warnings })
}

/// Runs `members` trajectories with seeds derived from the configured one
/// and merges their statistics in member order.
pub fn run_ensemble(cfg: &SimulationConfig, members: usize) -> std::result::Result<Vec<RunOutput>, RunFailure> {
    let results: Vec<_> = (0..members as u64)
        .into_par_iter()
        .map(|m| {
            let mut member = *cfg;
            member.forcing.seed = member_seed(cfg.forcing.seed, m);
            run(&member, &mut NoHooks)
        })
        .collect();
    results.into_iter().collect()
}

/// Merged statistics of an ensemble.
pub fn merge_outputs(outputs: &[RunOutput]) -> Result<StatsAccumulator> {
    let mut it = outputs.iter();
    let first = it.next().ok_or_else(|| CascadeError::InvalidParameter("empty ensemble".into()))?;
    let mut acc = first.stats.clone();
    for o in it {
        acc.merge(&o.stats)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::ForcingSpec;
    use crate::operators::OperatorParams;
    use proptest::prelude::*;

    fn setup(d: usize, n: usize, h: f64, nu: f64, seed: u64, dt: f64) -> Stepper {
        let grid = Arc::new(WavenumberGrid::new(d, n, 1.0).unwrap());
        let ops = Operators::new(grid.clone(), OperatorParams { c: 1.0, h, nu, kappa: 1.0 }).unwrap();
        let forcing = Forcing::new(grid, ForcingSpec { k_lo: 3.0, k_hi: 5.0, seed }, 1.0).unwrap();
        Stepper::new(ops, Some(forcing), dt).unwrap()
    }

    #[test]
    fn zero_stays_zero_without_forcing() {
        let mut s = setup(2, 16, 1.0 / 3.0, 1e-3, 0, 5e-3);
        s.forcing = None;
        let mut st = IntegratorState::zero(s.operators().grid().clone());
        for _ in 0..20 {
            s.pc_step(&mut st).unwrap();
        }
        assert_eq!(st.u.max_abs(), 0.0);
        assert_eq!(st.step, 20);
        assert!((st.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn first_step_from_rest() {
        // Expanding the two stages from û = 0:
        // û₁ = √Δt f̂ - (Δt/2)(𝔏+𝔇)(√Δt f̂), then projected and symmetrized.
        let dt = 5e-3;
        let mut s = setup(1, 64, 1.0 / 3.0, 1e-4, 3, dt);
        let mut st = IntegratorState::zero(s.operators().grid().clone());
        s.pc_step(&mut st).unwrap();
        let f = s.forcing().unwrap().sample(0);
        let mut want = f.clone();
        want.scale(dt.sqrt());
        let mut op = s.operators().apply(&want);
        op.scale(-0.5 * dt);
        want.axpy(1.0, &op);
        want.project_low_modes(1.0);
        want.enforce_hermitian();
        assert!(st.u.max_abs_diff(&want) < 1e-14);
        // The leading term alone is off by O(Δt^{3/2}).
        let mut lead = f.clone();
        lead.scale(dt.sqrt());
        let gap = st.u.max_abs_diff(&lead);
        let bound = 0.5 * dt.powf(1.5) * s.operators().apply(&f).max_abs();
        assert!(gap > 0.0 && gap <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn reproducible_and_linear_in_noise() {
        let run_with = |scale: f64| {
            let mut s = setup(2, 16, 1.0 / 3.0, 1e-3, 11, 5e-3).with_forcing_scale(scale);
            let mut st = IntegratorState::zero(s.operators().grid().clone());
            for _ in 0..50 {
                s.pc_step(&mut st).unwrap();
            }
            st.u
        };
        let a = run_with(1.0);
        let b = run_with(1.0);
        assert_eq!(a.data(), b.data());
        let c = run_with(2.5);
        let mut scaled = a.clone();
        scaled.scale(2.5);
        assert!(c.max_abs_diff(&scaled) <= 1e-12 * scaled.max_abs());
    }

    #[test]
    fn blow_up_is_detected() {
        let mut st = IntegratorState::zero(Arc::new(WavenumberGrid::new(1, 8, 1.0).unwrap()));
        let mut m = BlowUpMonitor { interval: 1, warmup: 3, ..BlowUpMonitor::default() };
        for i in 1..=5 {
            st.step = i;
            st.u.data_mut()[2] = Complex64::new(1.0, 0.0);
            m.observe(&st).unwrap();
        }
        st.step = 6;
        st.u.data_mut()[2] = Complex64::new(1e4, 0.0);
        assert!(matches!(m.observe(&st), Err(CascadeError::BlowUp { step: 6, .. })));

        let mut s = setup(1, 16, 0.0, 0.0, 0, 5e-3);
        let mut st = IntegratorState::zero(s.operators().grid().clone());
        st.u.data_mut()[4] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(s.pc_step(&mut st), Err(CascadeError::BlowUp { .. })));
    }

    #[test]
    fn run_with_no_samples_stops_at_spinup() {
        let mut cfg = SimulationConfig::preset("fig2-d1-desk").unwrap();
        cfg.grid.n = 64;
        cfg.physics.nu = 1e-5;
        cfg.time.n_samples = 0;
        struct Count(u64, Vec<u64>);
        impl RunHooks for Count {
            fn on_sample(&mut self, _: &IntegratorState) -> Result<()> {
                self.0 += 1;
                Ok(())
            }
            fn on_checkpoint(&mut self, s: &IntegratorState) -> Result<()> {
                self.1.push(s.step);
                Ok(())
            }
        }
        let mut hooks = Count(0, Vec::new());
        let out = run(&cfg, &mut hooks).unwrap();
        assert_eq!(out.state.step, cfg.spinup_steps());
        assert!((out.state.t - 32.0).abs() < 1e-9);
        assert_eq!(hooks.0, 0);
        assert_eq!(hooks.1, vec![cfg.spinup_steps()]);
        assert_eq!(out.stats.samples(), 0);

        cfg.time.n_samples = 3;
        cfg.time.sample_stride = 7;
        let out = run(&cfg, &mut NoHooks).unwrap();
        assert_eq!(out.stats.samples(), 3);
        let ts: Vec<f64> = out.stats.l2_series().iter().map(|p| p.0).collect();
        let spin = cfg.spinup_steps();
        for (j, t) in ts.iter().enumerate() {
            assert!((t - (spin + 7 * (j as u64 + 1)) as f64 * 5e-3).abs() < 1e-9);
        }
    }

    #[test]
    fn failure_keeps_partial_statistics() {
        let mut cfg = SimulationConfig::preset("fig2-d1-desk").unwrap();
        cfg.grid.n = 32;
        cfg.physics.nu = 0.0;
        cfg.time.t_spinup = Some(0.0);
        cfg.time.n_samples = 4;
        cfg.time.sample_stride = 1;
        struct Fail;
        impl RunHooks for Fail {
            fn on_sample(&mut self, s: &IntegratorState) -> Result<()> {
                if s.step == 3 {
                    return Err(CascadeError::InvalidParameter("stop".into()));
                }
                Ok(())
            }
        }
        let err = run(&cfg, &mut Fail).unwrap_err();
        assert_eq!(err.stats.unwrap().samples(), 3);
        assert_eq!(err.state.unwrap().step, 3);
    }

    #[test]
    fn ensemble_members_differ_and_merge() {
        let mut cfg = SimulationConfig::preset("fig2-d1-desk").unwrap();
        cfg.grid.n = 32;
        cfg.physics.nu = 1e-4;
        cfg.time.t_spinup = Some(1.0);
        cfg.time.n_samples = 2;
        cfg.time.sample_stride = 5;
        let outs = run_ensemble(&cfg, 3).unwrap();
        assert_ne!(outs[0].state.u.data(), outs[1].state.u.data());
        let merged = merge_outputs(&outs).unwrap();
        assert_eq!(merged.samples(), 6);
        let again = merge_outputs(&run_ensemble(&cfg, 3).unwrap()).unwrap();
        assert_eq!(merged.mean_spectrum(), again.mean_spectrum());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn invariants_hold_after_every_step(seed in 0u64..10_000, d in 1usize..=3, h in -0.5f64..0.9) {
            let n = 16;
            let mut s = setup(d, n, h, 1e-3, seed, 5e-3);
            let mut st = IntegratorState::zero(s.operators().grid().clone());
            for _ in 0..10 {
                s.pc_step(&mut st).unwrap();
                prop_assert!(st.u.hermitian_defect() < 1e-12);
                prop_assert!(st.u.low_mode_residual(1.0) == 0.0);
            }
        }
    }
}
