//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use cascade_core::{Forcing, IntegratorState, SimulationConfig, Stepper, WavenumberGrid};

/// A stepper and a spun-up state on the desk-scale preset of dimension `d`.
pub fn warmed_stepper(d: usize, n: usize, steps: u64) -> (Stepper, IntegratorState) {
    let mut cfg = SimulationConfig::preset(match d {
        1 => "fig2-d1-desk",
        2 => "fig3-d2-desk",
        _ => "fig4-d3-desk",
    })
    .expect("preset");
    cfg.grid.n = n;
    let mut stepper = Stepper::from_config(&cfg).expect("valid config");
    let mut state = IntegratorState::zero(stepper.operators().grid().clone());
    for _ in 0..steps {
        stepper.pc_step(&mut state).expect("stable");
    }
    (stepper, state)
}

pub fn forcing(d: usize, n: usize) -> Forcing {
    let grid = Arc::new(WavenumberGrid::new(d, n, 1.0).expect("grid"));
    let cfg = SimulationConfig::default();
    Forcing::new(grid, cfg.forcing, cfg.kappa()).expect("forcing")
}
