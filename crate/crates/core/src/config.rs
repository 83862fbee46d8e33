//! Run configuration: TOML files with `[grid]`, `[physics]`, `[time]` and
//! `[forcing]` sections, named presets, `section.key=value` overrides and
//! the manifest written next to every run.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CascadeError, Result};
use crate::forcing::{Forcing, ForcingSpec};
use crate::grid::WavenumberGrid;
use crate::operators::OperatorParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    pub l_tot: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { d: 1, n: 1024, l_tot: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub c: f64,
    pub hurst: f64,
    pub nu: f64,
    /// Defaults to `Δk = 1/L_tot`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { c: 1.0, hurst: 1.0 / 3.0, nu: 1e-8, kappa: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    /// Defaults to `k_max/c`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_spinup: Option<f64>,
    pub n_samples: usize,
    pub sample_stride: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<u64>,
    /// Caps the step at `Δx²/(2ν)`.
    pub conservative_dt: bool,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { dt: 5e-3, t_spinup: None, n_samples: 100, sample_stride: 1000, checkpoint_every: None, conservative_dt: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub time: TimeConfig,
    pub forcing: ForcingSpec,
}

pub const PRESETS: [&str; 6] = ["fig2-d1", "fig2-d1-desk", "fig3-d2", "fig3-d2-desk", "fig4-d3", "fig4-d3-desk"];

impl SimulationConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let (base, desk) = match name.strip_suffix("-desk") {
            Some(b) => (b, true),
            None => (name, false),
        };
        let (d, n, nu) = match (base, desk) {
            ("fig2-d1", _) => (1, 1024, 1e-8),
            ("fig3-d2", false) => (2, 2048, 1e-9),
            ("fig3-d2", true) => (2, 128, 1e-5),
            ("fig4-d3", false) => (3, 512, 1e-7),
            ("fig4-d3", true) => (3, 32, 1e-3),
            _ => {
                return Err(CascadeError::InvalidConfig(format!(
                    "unknown preset '{name}' (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        let mut cfg = Self::default();
        cfg.grid = GridConfig { d, n, l_tot: 1.0 };
        cfg.physics.nu = nu;
        if desk {
            cfg.time.n_samples = 50;
            cfg.time.sample_stride = 200;
        }
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CascadeError::InvalidConfig(e.to_string()))?;
        Self::from_table(table)
    }

    /// Accepts either bare config sections or a manifest whose `[config]`
    /// table holds them.
    pub fn from_table(mut table: toml::Table) -> Result<Self> {
        if let Some(toml::Value::Table(inner)) = table.remove("config") {
            table = inner;
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CascadeError::InvalidConfig(e.to_string()))
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a table")
    }

    /// Applies `section.key=value` assignments. Values are parsed as TOML
    /// and fall back to strings.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut table = self.to_table();
        for item in overrides {
            let (path, raw) = item
                .split_once('=')
                .ok_or_else(|| CascadeError::InvalidConfig(format!("override '{item}' is not key=value")))?;
            let (section, key) = path
                .trim()
                .split_once('.')
                .ok_or_else(|| CascadeError::InvalidConfig(format!("override key '{path}' is not section.key")))?;
            let value = parse_value(raw.trim());
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let toml::Value::Table(sec) = entry else {
                return Err(CascadeError::InvalidConfig(format!("'{section}' is not a section")));
            };
            sec.insert(key.to_string(), value);
        }
        Self::from_table(table)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML rendering, in hex.
    pub fn content_hash(&self) -> String {
        hex(&Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn build_grid(&self) -> Result<Arc<WavenumberGrid>> {
        Ok(Arc::new(WavenumberGrid::new(self.grid.d, self.grid.n, self.grid.l_tot)?))
    }

    pub fn kappa(&self) -> f64 {
        self.physics.kappa.unwrap_or(1.0 / self.grid.l_tot)
    }

    pub fn k_max(&self) -> f64 {
        (self.grid.n / 2) as f64 / self.grid.l_tot
    }

    pub fn operator_params(&self) -> OperatorParams {
        OperatorParams { c: self.physics.c, h: self.physics.hurst, nu: self.physics.nu, kappa: self.kappa() }
    }

    pub fn effective_dt(&self) -> f64 {
        let dt = self.time.dt;
        if self.time.conservative_dt && self.physics.nu > 0.0 {
            let dx = self.grid.l_tot / self.grid.n as f64;
            dt.min(dx * dx / (2.0 * self.physics.nu))
        } else {
            dt
        }
    }

    pub fn spinup_time(&self) -> f64 {
        self.time.t_spinup.unwrap_or(self.k_max() / self.physics.c)
    }

    /// Smallest step count reaching the spin-up time, up to rounding.
    pub fn spinup_steps(&self) -> u64 {
        let ratio = self.spinup_time() / self.effective_dt();
        (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0) as u64
    }

    pub fn total_steps(&self) -> u64 {
        self.spinup_steps() + self.time.n_samples as u64 * self.time.sample_stride
    }

    /// Checks every constraint and returns advisory warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let grid = self.build_grid()?;
        self.operator_params().validate(self.grid.d)?;
        if !(self.time.dt.is_finite() && self.time.dt > 0.0) {
            return Err(CascadeError::InvalidConfig(format!("time.dt = {} must be positive", self.time.dt)));
        }
        if let Some(t) = self.time.t_spinup {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CascadeError::InvalidConfig(format!("time.t_spinup = {t} must be nonnegative")));
            }
        }
        if self.time.n_samples > 0 && self.time.sample_stride == 0 {
            return Err(CascadeError::InvalidConfig("time.sample_stride must be at least 1".into()));
        }
        if self.time.checkpoint_every == Some(0) {
            return Err(CascadeError::InvalidConfig("time.checkpoint_every must be at least 1".into()));
        }
        Forcing::new(grid, self.forcing, self.kappa())?;
        let mut warnings = Vec::new();
        let limit = self.physics.c * self.k_max().powi(-3);
        if self.physics.nu >= limit {
            warnings.push(format!(
                "nu = {} is not below c k_max^-3 = {limit:e}; the dissipative range starts inside the grid",
                self.physics.nu
            ));
        }
        if self.physics.nu == 0.0 {
            warnings.push("nu = 0: spectral mass reaching k_max is not dissipated and the run may blow up".into());
        }
        Ok(warnings)
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&probe) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub wall_seconds: f64,
    pub steps: u64,
    pub seconds_per_step: f64,
}

/// Everything needed to trace and reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    pub ensemble: usize,
    pub config_hash: String,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub timings: Timings,
    pub config: SimulationConfig,
}

impl RunManifest {
    pub fn new(config: SimulationConfig, ensemble: usize) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.forcing.seed,
            ensemble,
            config_hash: config.content_hash(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            timings: Timings { wall_seconds: 0.0, steps: 0, seconds_per_step: 0.0 },
            config,
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_run() {
        let c = SimulationConfig::default();
        assert_eq!(c.time.dt, 5e-3);
        assert_eq!(c.time.n_samples, 100);
        assert_eq!(c.time.sample_stride, 1000);
        assert_eq!(c.kappa(), 1.0);
        assert_eq!(c.spinup_time(), 512.0);
        assert_eq!(c.spinup_steps(), 102_400);
    }

    #[test]
    fn presets() {
        let d1 = SimulationConfig::preset("fig2-d1-desk").unwrap();
        assert_eq!((d1.grid.d, d1.grid.n, d1.physics.nu), (1, 1024, 1e-8));
        assert_eq!((d1.time.n_samples, d1.time.sample_stride), (50, 200));
        let d2 = SimulationConfig::preset("fig3-d2").unwrap();
        assert_eq!((d2.grid.n, d2.physics.nu, d2.time.sample_stride), (2048, 1e-9, 1000));
        for name in PRESETS {
            SimulationConfig::preset(name).unwrap().validate().unwrap();
        }
        assert!(SimulationConfig::preset("fig9").is_err());
    }

    #[test]
    fn file_parsing_and_unknown_keys() {
        let cfg = SimulationConfig::from_toml_str("[grid]\nd = 2\nn = 64\n[physics]\nnu = 1e-4\n").unwrap();
        assert_eq!((cfg.grid.d, cfg.grid.n, cfg.physics.nu), (2, 64, 1e-4));
        assert_eq!(cfg.physics.c, 1.0);
        assert!(SimulationConfig::from_toml_str("[grid]\nq = 1\n").is_err());
        assert!(SimulationConfig::from_toml_str("[extra]\nq = 1\n").is_err());
    }

    #[test]
    fn overrides() {
        let base = SimulationConfig::default();
        let cfg = base
            .with_overrides(&["physics.nu=1e-9".into(), "grid.n = 2048".into(), "forcing.seed=17".into(), "time.conservative_dt=true".into()])
            .unwrap();
        assert_eq!((cfg.physics.nu, cfg.grid.n, cfg.forcing.seed), (1e-9, 2048, 17));
        assert!(cfg.time.conservative_dt);
        assert!(base.with_overrides(&["physics.viscosity=1".into()]).is_err());
        assert!(base.with_overrides(&["nu=1".into()]).is_err());
        assert!(base.with_overrides(&["physics.nu".into()]).is_err());
        assert!(base.with_overrides(&["grid.n=abc".into()]).is_err());
    }

    #[test]
    fn manifest_round_trip_reproduces_config() {
        let cfg = SimulationConfig::preset("fig3-d2-desk").unwrap().with_overrides(&["physics.kappa=0.5".into()]).unwrap();
        let mut m = RunManifest::new(cfg, 4);
        m.outputs.push("spectrum.csv".into());
        let text = m.to_toml_string();
        let back: RunManifest = toml::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(SimulationConfig::from_toml_str(&text).unwrap(), cfg);
        assert_eq!(back.config.content_hash(), cfg.content_hash());
        assert_eq!(cfg.content_hash().len(), 64);
        assert_ne!(cfg.content_hash(), SimulationConfig::default().content_hash());
    }

    #[test]
    fn validation() {
        let mut cfg = SimulationConfig::default();
        let w = cfg.validate().unwrap();
        assert!(w.iter().any(|s| s.contains("k_max^-3")));
        cfg.physics.nu = 1e-9;
        assert!(cfg.validate().unwrap().is_empty());
        cfg.time.dt = 0.0;
        assert!(cfg.validate().is_err());
        let mut bad = SimulationConfig::default();
        bad.forcing.k_lo = 0.5;
        assert!(bad.validate().is_err());
        let mut bad = SimulationConfig::default();
        bad.grid.n = 1000;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn conservative_step() {
        let mut cfg = SimulationConfig::preset("fig4-d3-desk").unwrap();
        assert_eq!(cfg.effective_dt(), 5e-3);
        cfg.time.conservative_dt = true;
        let dx = 1.0 / 32.0;
        assert_eq!(cfg.effective_dt(), 5e-3f64.min(dx * dx / 2e-3));
    }
}
