//! Command-line front end: `simulate`, `ensemble`, and `find-stationary`
//! over a config file or a named preset, with flag overrides.
//!
//! Exit codes: 0 success, 2 configuration error, 3 divergence,
//! 4 non-convergence.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{InitialConfig, Overrides, RunConfig};
use crate::ensemble::{run_ensemble, write_outputs, EnsembleParams};
use crate::error::{Error, Result};
use crate::noise::RngStream;
use crate::solver::{find_stationary, run_path, NonlinearMethod, PathParams, Snapshot, StationaryResult};

#[derive(Debug, Parser)]
#[command(name = "neurofield", version, about = "Stochastic neural field simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a single path and write its diagnostics and snapshots.
    Simulate(RunArgs),
    /// Run a Monte Carlo ensemble and write the cross-path statistics.
    Ensemble(RunArgs),
    /// Integrate the deterministic equation to a stationary state.
    FindStationary(StationaryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NonlinearArg {
    Fft,
    Naive,
}

impl From<NonlinearArg> for NonlinearMethod {
    fn from(v: NonlinearArg) -> Self {
        match v {
            NonlinearArg::Fft => NonlinearMethod::Fft,
            NonlinearArg::Naive => NonlinearMethod::Naive,
        }
    }
}

/// Seeding profile for the stationarity search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StationaryProfile {
    /// Relax from the zero field.
    OneBump,
    /// Relax from a wide rectangular profile (half-width 28, height 10).
    ThreeBump,
    /// Relax from a wide rectangular profile (half-width 25, height 10).
    FiveBump,
}

impl StationaryProfile {
    fn initial(self) -> InitialConfig {
        match self {
            StationaryProfile::OneBump => InitialConfig::Zero,
            StationaryProfile::ThreeBump => InitialConfig::Rectangle {
                half_width: 28.0,
                height: 10.0,
            },
            StationaryProfile::FiveBump => InitialConfig::Rectangle {
                half_width: 25.0,
                height: 10.0,
            },
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Config file (TOML).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named preset, e.g. "paper-3.1".
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for ensembles (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Noise amplitude override.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Correlation length override.
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    /// Number of ensemble paths.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Total simulated time; overrides the step count.
    #[arg(long = "T", allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    /// Time step override.
    #[arg(long = "ht", allow_negative_numbers = true)]
    pub h_t: Option<f64>,
    /// Evaluation of the delayed nonlinear term.
    #[arg(long, value_enum)]
    pub nonlinear: Option<NonlinearArg>,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Seeding profile; defaults to the config's `[initial]` section.
    #[arg(long, value_enum)]
    pub profile: Option<StationaryProfile>,
}

impl RunArgs {
    /// File or preset, then flag overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => RunConfig::from_file(path)?,
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => {
                return Err(Error::config("config", "provide --config PATH or --preset NAME"))
            }
            (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
        };
        Overrides {
            epsilon: self.epsilon,
            xi: self.xi,
            seed: self.seed,
            paths: self.paths,
            horizon: self.horizon,
            h_t: self.h_t,
            nonlinear: self.nonlinear.map(Into::into),
            out: self.out.clone(),
            initial: None,
        }
        .apply(&mut cfg)?;
        Ok(cfg)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&args.resolve()?),
        Command::Ensemble(args) => {
            let cfg = args.resolve()?;
            cmd_ensemble(&cfg, args.workers)
        }
        Command::FindStationary(args) => {
            let mut cfg = args.run.resolve()?;
            if let Some(profile) = args.profile {
                cfg.initial = profile.initial();
                cfg.validate()?;
            }
            cmd_find_stationary(&cfg).map(|_| ())
        }
    }
}

/// Run one path with the stream `(master_seed, 0)`; write `path.csv`,
/// `snapshot_<t>.txt` for each recorded time, and `final_snapshot.txt`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let runtime = cfg.build_runtime()?;
    let recorder = cfg.recorder();
    let params = PathParams {
        model: &cfg.model,
        rings: &runtime.rings,
        noise: &cfg.noise,
        eigenvalues: &runtime.eigenvalues,
        time: cfg.time,
        u0: &runtime.u0,
        method: cfg.solver.nonlinear,
        recorder: &recorder,
    };
    let mut rng = RngStream::for_path(cfg.noise.master_seed, 0);
    let record = run_path(&params, &mut rng)?;

    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let mut csv = String::from("t,u_max,u_min\n");
    for j in 0..record.times.len() {
        csv.push_str(&format!("{},{},{}\n", record.times[j], record.u_max[j], record.u_min[j]));
    }
    fs::write(dir.join("path.csv"), csv)?;
    for (t, field) in &record.snapshots {
        Snapshot::new(&cfg.model.grid, *t, field.clone())
            .write(&cfg.model.grid, &dir.join(format!("snapshot_{t}.txt")))?;
    }
    Snapshot::new(&cfg.model.grid, cfg.time.horizon(), record.final_field.clone())
        .write(&cfg.model.grid, &dir.join("final_snapshot.txt"))?;
    println!(
        "simulate: T={} u_max={} u_min={}",
        cfg.time.horizon(),
        record.u_max.last().unwrap(),
        record.u_min.last().unwrap()
    );
    Ok(())
}

#[derive(Serialize)]
struct Metadata<'a> {
    wall_clock_seconds: f64,
    workers: usize,
    divergence_count: usize,
    diverged_paths: Vec<usize>,
    config: &'a RunConfig,
}

/// Run the configured ensemble; write `stats.csv`, `meanfield_<t>.csv`,
/// `hist_max.csv`, `hist_min.csv`, and `metadata.toml`.
pub fn cmd_ensemble(cfg: &RunConfig, workers: Option<usize>) -> Result<()> {
    let runtime = cfg.build_runtime()?;
    let recorder = cfg.recorder();
    let started = Instant::now();
    let params = EnsembleParams {
        path: PathParams {
            model: &cfg.model,
            rings: &runtime.rings,
            noise: &cfg.noise,
            eigenvalues: &runtime.eigenvalues,
            time: cfg.time,
            u0: &runtime.u0,
            method: cfg.solver.nonlinear,
            recorder: &recorder,
        },
        n_paths: cfg.ensemble.paths,
        hist_bin_width: cfg.ensemble.hist_bin_width,
    };
    let stats = run_ensemble(&params, workers)?;
    let wall = started.elapsed().as_secs_f64();

    let dir = &cfg.output.dir;
    let grid_points: Vec<f64> = cfg.model.grid.points().collect();
    write_outputs(&stats, &grid_points, dir)?;
    let meta = Metadata {
        wall_clock_seconds: wall,
        workers: workers.unwrap_or_else(rayon::current_num_threads),
        divergence_count: stats.diverged.len(),
        diverged_paths: stats.diverged.iter().map(|d| d.path).collect(),
        config: cfg,
    };
    fs::write(
        dir.join("metadata.toml"),
        toml::to_string(&meta).expect("metadata serializes"),
    )?;
    println!(
        "ensemble: paths={} diverged={} E_max(T)={} E_min(T)={}",
        stats.surviving_paths(),
        stats.diverged.len(),
        stats.envelopes.mean_max.last().unwrap(),
        stats.envelopes.mean_min.last().unwrap()
    );
    Ok(())
}

/// Deterministic stationarity search (`ε` forced to 0); writes
/// `stationary.txt` and reports the extrema.
pub fn cmd_find_stationary(cfg: &RunConfig) -> Result<StationaryResult> {
    let mut det = cfg.clone();
    det.noise.epsilon = 0.0;
    let runtime = det.build_runtime()?;
    let res = find_stationary(
        &det.model,
        &runtime.rings,
        det.time.h_t,
        runtime.u0,
        det.solver.nonlinear,
        det.stationary.tolerance,
        det.stationary.max_steps,
    )?;
    let dir = &det.output.dir;
    fs::create_dir_all(dir)?;
    let t = (res.steps + 1) as f64 * det.time.h_t;
    Snapshot::new(&det.model.grid, t, res.field.clone()).write(&det.model.grid, &dir.join("stationary.txt"))?;
    println!(
        "find-stationary: steps={} residual={:e} u_max={} u_min={}",
        res.steps, res.residual, res.u_max, res.u_min
    );
    Ok(res)
}
