use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cascade_core::config::{Timings, PRESETS};
use cascade_core::integrator::{merge_outputs, IntegratorState};
use cascade_core::stats::secant_slope;
use cascade_core::validation::{run_suite, suite_passed, CriterionReport, Level};
use cascade_core::{
    fit_power_law, run, run_ensemble, AnalyticParams, CascadeError, FitWindows, Forcing, Precision, RunHooks,
    RunManifest, SimulationConfig, StatsAccumulator,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_VALIDATION: u8 = 5;
const EXIT_ORACLE: u8 = 6;

#[derive(Parser)]
#[command(name = "cascade", version, about = "Stochastic transport in wavenumber space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the stochastic simulation and write statistics.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Number of independently seeded trajectories to merge.
        #[arg(long, default_value_t = 1)]
        ensemble: usize,
        /// Store checkpoints in single precision.
        #[arg(long)]
        single_precision: bool,
    },
    /// Write analytic reference curves for a configuration.
    Oracle {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "oracle")]
        out: PathBuf,
        /// Times at which to evaluate the spectrum (default: quarter, half
        /// and all of k_max/c).
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
    },
    /// Run the acceptance suite.
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file (a run manifest also works).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset used as the base configuration.
    #[arg(long)]
    preset: Option<String>,
    /// Override as section.key=value, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(String),
    BlowUp(String),
    Io(String),
    Oracle(String),
    Validation,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_INVALID_CONFIG,
            Failure::BlowUp(_) => EXIT_BLOW_UP,
            Failure::Io(_) => EXIT_IO,
            Failure::Oracle(_) => EXIT_ORACLE,
            Failure::Validation => EXIT_VALIDATION,
        }
    }
}

impl From<CascadeError> for Failure {
    fn from(e: CascadeError) -> Self {
        match e {
            CascadeError::BlowUp { .. } => Failure::BlowUp(e.to_string()),
            CascadeError::Io(_) | CascadeError::Snapshot(_) => Failure::Io(e.to_string()),
            CascadeError::Divergent(_) | CascadeError::Quadrature(_) => Failure::Oracle(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out, ensemble, single_precision } => {
            let precision = if single_precision { Precision::Complex64 } else { Precision::Complex128 };
            resolve(&config).and_then(|cfg| simulate(cfg, &out, ensemble, precision))
        }
        Command::Oracle { config, out, times } => resolve(&config).and_then(|cfg| oracle(cfg, &out, times)),
        Command::Validate { level } => validate(match level {
            LevelArg::Quick => Level::Quick,
            LevelArg::Full => Level::Full,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("invalid configuration: {m}"),
                Failure::BlowUp(m) => eprintln!("simulation blew up: {m}"),
                Failure::Io(m) => eprintln!("i/o error: {m}"),
                Failure::Oracle(m) => eprintln!("oracle error: {m}"),
                Failure::Validation => eprintln!("acceptance suite failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn resolve(args: &ConfigArgs) -> Result<SimulationConfig, Failure> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(_), Some(_)) => return Err(Failure::Config("--preset and --config are exclusive".into())),
        (Some(p), None) => SimulationConfig::preset(p).map_err(|e| {
            Failure::Config(format!("{e}; available presets: {}", PRESETS.join(", ")))
        })?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            SimulationConfig::from_toml_str(&text)?
        }
        (None, None) => SimulationConfig::default(),
    };
    cfg = cfg.with_overrides(&args.overrides)?;
    if let Some(seed) = args.seed {
        cfg.forcing.seed = seed;
    }
    Ok(cfg)
}

struct Checkpoints {
    dir: PathBuf,
    precision: Precision,
    written: Vec<String>,
}

impl RunHooks for Checkpoints {
    fn on_checkpoint(&mut self, state: &IntegratorState) -> cascade_core::Result<()> {
        let name = format!("checkpoint_{:010}.bin", state.step);
        write_snapshot(&self.dir.join(&name), state, self.precision)?;
        self.written.push(format!("checkpoints/{name}"));
        Ok(())
    }
}

fn write_snapshot(path: &Path, state: &IntegratorState, precision: Precision) -> cascade_core::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    state.u.write_snapshot(&mut w, state.t, precision)?;
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn simulate(cfg: SimulationConfig, out: &Path, ensemble: usize, precision: Precision) -> Result<(), Failure> {
    if ensemble == 0 {
        return Err(Failure::Config("--ensemble must be at least 1".into()));
    }
    let warnings = cfg.validate()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let ckpt_dir = out.join("checkpoints");
    fs::create_dir_all(&ckpt_dir)?;
    let mut manifest = RunManifest::new(cfg, ensemble);
    manifest.warnings = warnings;
    let start = Instant::now();

    let mut failure = None;
    let (stats, finals) = if ensemble == 1 {
        let mut hooks = Checkpoints { dir: ckpt_dir.clone(), precision, written: Vec::new() };
        let res = run(&cfg, &mut hooks);
        manifest.outputs.append(&mut hooks.written);
        match res {
            Ok(o) => (o.stats, vec![o.state]),
            Err(f) => {
                failure = Some(Failure::from(f.error));
                (f.stats.unwrap_or_else(|| StatsAccumulator::new(cfg.build_grid().expect("validated"))), f.state.into_iter().collect())
            }
        }
    } else {
        match run_ensemble(&cfg, ensemble) {
            Ok(outs) => (merge_outputs(&outs)?, outs.into_iter().map(|o| o.state).collect()),
            Err(f) => {
                failure = Some(Failure::from(f.error));
                (f.stats.unwrap_or_else(|| StatsAccumulator::new(cfg.build_grid().expect("validated"))), f.state.into_iter().collect())
            }
        }
    };
    for (m, state) in finals.iter().enumerate() {
        let name = if finals.len() == 1 { "final.bin".to_string() } else { format!("final_member_{m:04}.bin") };
        write_snapshot(&ckpt_dir.join(&name), state, precision)?;
        manifest.outputs.push(format!("checkpoints/{name}"));
    }
    let steps = cfg.total_steps() * ensemble as u64;
    let wall = start.elapsed().as_secs_f64();
    manifest.timings = Timings { wall_seconds: wall, steps, seconds_per_step: wall / steps.max(1) as f64 };

    let t_final = finals.first().map_or(0.0, |s| s.t);
    write_statistics(&cfg, &stats, t_final, out, &mut manifest)?;
    if let Some(f) = &failure {
        if let Failure::BlowUp(m) = f {
            manifest.warnings.push(format!("run stopped early: {m}"));
        }
    }
    manifest.outputs.push("manifest.toml".into());
    fs::write(out.join("manifest.toml"), manifest.to_toml_string())?;
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn write_statistics(
    cfg: &SimulationConfig,
    stats: &StatsAccumulator,
    t_final: f64,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<(), Failure> {
    let grid = stats.grid().clone();
    let forcing = Forcing::new(grid.clone(), cfg.forcing, cfg.kappa())?;
    let oracle = AnalyticParams::new(
        cfg.grid.d,
        cfg.physics.hurst,
        cfg.physics.c,
        cfg.kappa(),
        cfg.physics.nu,
        forcing.effective_psi(),
    )
    .ok();
    let oracle_fn = oracle.as_ref().map(|o| move |r: f64| o.theoretical_spectrum(t_final, r).unwrap_or(f64::NAN));

    let mut w = create(&out.join("spectrum.csv"))?;
    stats.write_spectrum_csv(&mut w, oracle_fn.as_ref().map(|f| f as &dyn Fn(f64) -> f64))?;
    w.flush()?;

    let windows = FitWindows::default_for(&grid, cfg.forcing.k_hi, cfg.physics.c, cfg.physics.nu);
    let s2 = stats.s2_curve();
    let s2_fit = fit_power_law(&s2, windows.s2_inertial.0 * (1.0 - 1e-9), windows.s2_inertial.1).ok();
    let mut w = create(&out.join("s2.csv"))?;
    stats.write_s2_csv(&mut w, s2_fit.as_ref())?;
    w.flush()?;

    let mut w = create(&out.join("l2.csv"))?;
    stats.write_l2_csv(&mut w)?;
    w.flush()?;

    let mut fits = String::new();
    let mut line = |k: &str, v: String| fits.push_str(&format!("{k} = {v}\n"));
    line("samples", stats.samples().to_string());
    line("t_final", t_final.to_string());
    line("spectrum_window", format!("{} {}", windows.spectrum.0, windows.spectrum.1));
    match fit_power_law(&stats.spectrum_curve(), windows.spectrum.0, windows.spectrum.1) {
        Ok(f) => line("spectrum_slope", f.exponent.to_string()),
        Err(e) => line("spectrum_slope", format!("unavailable ({e})")),
    }
    line("spectrum_slope_expected", (-(2.0 * cfg.physics.hurst + cfg.grid.d as f64)).to_string());
    line("s2_inertial_window", format!("{} {}", windows.s2_inertial.0, windows.s2_inertial.1));
    match &s2_fit {
        Some(f) => line("s2_inertial_slope", f.exponent.to_string()),
        None => line("s2_inertial_slope", "unavailable".into()),
    }
    line("s2_inertial_slope_expected", (2.0 * cfg.physics.hurst).to_string());
    if stats.samples() > 0 && s2.len() > 2 {
        line("s2_dissipative_secant", secant_slope(s2[0], s2[1]).to_string());
    }
    if let Some(m) = stats.mean_l2() {
        line("sigma2_mean", m.to_string());
    }
    if let Some((rho, neff)) = stats.l2_decorrelation() {
        line("sigma2_lag1_autocorrelation", rho.to_string());
        line("sigma2_effective_samples", neff.to_string());
    }
    fs::write(out.join("fits.txt"), fits)?;
    for name in ["spectrum.csv", "s2.csv", "l2.csv", "fits.txt"] {
        manifest.outputs.push(name.into());
    }
    Ok(())
}

fn oracle(cfg: SimulationConfig, out: &Path, times: Vec<f64>) -> Result<(), Failure> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let grid = cfg.build_grid()?;
    let forcing = Forcing::new(grid.clone(), cfg.forcing, cfg.kappa())?;
    let p = AnalyticParams::new(cfg.grid.d, cfg.physics.hurst, cfg.physics.c, cfg.kappa(), cfg.physics.nu, forcing.effective_psi())?;
    let t_star = cfg.k_max() / cfg.physics.c;
    let times = if times.is_empty() { vec![t_star / 4.0, t_star / 2.0, t_star] } else { times };
    let dk = grid.dk();
    let radii: Vec<f64> = (1..=grid.n_shells()).map(|s| s as f64 * dk).filter(|&r| r > cfg.kappa() && r <= grid.k_max()).collect();

    let mut w = create(&out.join("oracle_spectrum.csv"))?;
    let header: Vec<String> = times.iter().map(|t| format!("t={t}")).collect();
    writeln!(w, "r,{},stationary,reference_power_law", header.join(","))?;
    let c_const = p.c_const().ok();
    for &r in &radii {
        let mut row = vec![r.to_string()];
        for &t in &times {
            row.push(format!("{:e}", p.theoretical_spectrum(t, r)?));
        }
        row.push(p.stationary_spectrum(r).map_or(String::new(), |v| format!("{v:e}")));
        row.push(c_const.map_or(String::new(), |c| format!("{:e}", c * r.powf(-p.exponent()))));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;

    let mut w = create(&out.join("seam.csv"))?;
    writeln!(w, "t,r_seam,left,right")?;
    for &t in &times {
        let (l, r) = p.seam_values(t)?;
        writeln!(w, "{t},{},{l:e},{r:e}", cfg.physics.c * t + cfg.kappa())?;
    }
    w.flush()?;

    match increment_curve(&p, grid.dx(), grid.l_tot()) {
        Ok(rows) => {
            let mut w = create(&out.join("increment_variance.csv"))?;
            writeln!(w, "ell,variance,inviscid_variance,inviscid_lower_bound,inviscid_upper_bound")?;
            for (ell, v, v0, lo, hi) in rows {
                writeln!(w, "{ell:e},{v:e},{v0:e},{lo:e},{hi:e}")?;
            }
            w.flush()?;
        }
        Err(e) => eprintln!("increment variance skipped: {e}"),
    }
    Ok(())
}

fn increment_curve(p: &AnalyticParams, dx: f64, l_tot: f64) -> cascade_core::Result<Vec<(f64, f64, f64, f64, f64)>> {
    let inviscid = AnalyticParams { nu: 0.0, ..p.clone() };
    let n = 40;
    let (lo, hi) = (dx.ln(), (l_tot / 2.0).ln());
    (0..n)
        .map(|i| {
            let ell = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
            let v = p.increment_variance(ell)?;
            let v0 = inviscid.increment_variance(ell)?;
            let b = inviscid.holder_bounds(ell)?;
            Ok((ell, v, v0, b.lower, b.upper))
        })
        .collect()
}

fn validate(level: Level) -> Result<(), Failure> {
    let reports = run_suite(level, &mut |r: &CriterionReport| {
        println!("{r}");
        for d in &r.details {
            println!("    {d}");
        }
    });
    if suite_passed(&reports) {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}
