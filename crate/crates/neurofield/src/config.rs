//! Run configuration: a TOML-serializable record of the full problem
//! (model, noise, time grid, initial data, ensemble and output options),
//! plus named presets and flag overrides.
//!
//! Unknown keys are rejected, every section validates with the offending
//! key path, and serialization round-trips losslessly (floats are written
//! at full round-trip precision).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DomainGrid, FiringRateSpec, InputSpec, KernelSpec, ModelSpec, RingKernelSet};
use crate::noise::{NoiseEigenvalues, NoiseSpec};
use crate::solver::{InitialHistory, NonlinearMethod, RecorderSpec, Snapshot, TimeGrid};

/// Default seed shipped with the `paper-3.1` preset.
pub const DEFAULT_MASTER_SEED: u64 = 8;

/// Initial history selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    Zero,
    /// Constant field.
    Uniform { value: f64 },
    /// Load a field snapshot; its grid must match the run grid.
    Snapshot { path: PathBuf },
    /// `U₀(x) = amplitude e^{-x²/width}`.
    Gaussian { amplitude: f64, width: f64 },
    /// `U₀(x) = height` on `|x| ≤ half_width`, else 0.
    Rectangle { half_width: f64, height: f64 },
    /// `U₀(x, t) = t` (diagnostic).
    TimeRamp,
}

impl InitialConfig {
    pub fn resolve(&self, grid: &DomainGrid) -> Result<InitialHistory> {
        Ok(match self {
            InitialConfig::Zero => InitialHistory::Zero,
            InitialConfig::Uniform { value } => InitialHistory::Uniform(*value),
            InitialConfig::Snapshot { path } => {
                InitialHistory::Field(Snapshot::read(path)?.into_field_for(grid)?)
            }
            InitialConfig::Gaussian { amplitude, width } => InitialHistory::Field(
                grid.points().map(|x| amplitude * (-x * x / width).exp()).collect(),
            ),
            InitialConfig::Rectangle { half_width, height } => InitialHistory::Field(
                grid.points()
                    .map(|x| if x.abs() <= *half_width { *height } else { 0.0 })
                    .collect(),
            ),
            InitialConfig::TimeRamp => InitialHistory::TimeRamp,
        })
    }

    fn validate(&self) -> Result<()> {
        match self {
            InitialConfig::Gaussian { width, .. } if !(*width > 0.0) => {
                Err(Error::config("initial.width", "width must be positive"))
            }
            InitialConfig::Rectangle { half_width, .. } if !(*half_width > 0.0) => {
                Err(Error::config("initial.half_width", "half-width must be positive"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub nonlinear: NonlinearMethod,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            nonlinear: NonlinearMethod::Fft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub paths: usize,
    /// Times at which mean fields / snapshots are recorded.
    #[serde(default)]
    pub record_times: Vec<f64>,
    #[serde(default = "default_bin_width")]
    pub hist_bin_width: f64,
}

fn default_bin_width() -> f64 {
    0.4
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            paths: 100,
            record_times: Vec::new(),
            hist_bin_width: default_bin_width(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySection {
    #[serde(default = "default_stationary_tol")]
    pub tolerance: f64,
    #[serde(default = "default_stationary_budget")]
    pub max_steps: usize,
}

fn default_stationary_tol() -> f64 {
    1e-6
}

fn default_stationary_budget() -> usize {
    50_000
}

impl Default for StationarySection {
    fn default() -> Self {
        StationarySection {
            tolerance: default_stationary_tol(),
            max_steps: default_stationary_budget(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

/// The complete, serializable description of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub noise: NoiseSpec,
    pub time: TimeGrid,
    pub initial: InitialConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub stationary: StationarySection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    /// Expand a named preset. `paper-3.1` is the multi-bump benchmark:
    /// `l = 50, N = 100, h_t = 0.02, 200 steps, α = 1, v = ∞`, oscillatory
    /// kernel, Heaviside firing, heterogeneous Gaussian input, `ε = 0`.
    pub fn preset(name: &str) -> Result<RunConfig> {
        match name {
            "paper-3.1" => Ok(RunConfig {
                model: ModelSpec {
                    grid: DomainGrid::new(50.0, 100).expect("valid benchmark grid"),
                    kernel: KernelSpec::default(),
                    firing: FiringRateSpec::Heaviside { threshold: 0.0 },
                    input: InputSpec::bump_benchmark(),
                    alpha: 1.0,
                    speed: f64::INFINITY,
                },
                noise: NoiseSpec {
                    epsilon: 0.0,
                    xi: 0.05,
                    master_seed: DEFAULT_MASTER_SEED,
                    lambda_scale: Default::default(),
                },
                time: TimeGrid { h_t: 0.02, steps: 200 },
                initial: InitialConfig::Zero,
                solver: SolverSection::default(),
                ensemble: EnsembleSection {
                    paths: 100,
                    record_times: vec![],
                    hist_bin_width: 0.4,
                },
                stationary: StationarySection::default(),
                output: OutputSection::default(),
            }),
            other => Err(Error::config("preset", format!("unknown preset {other:?}"))),
        }
    }

    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        // grid invariants are re-checked because deserialization bypasses the constructor
        DomainGrid::new(self.model.grid.half_width(), self.model.grid.len())?;
        self.model.validate()?;
        self.noise.validate()?;
        self.time.validate()?;
        self.initial.validate()?;
        if self.ensemble.paths == 0 {
            return Err(Error::config("ensemble.paths", "need at least one path"));
        }
        if !(self.ensemble.hist_bin_width > 0.0) {
            return Err(Error::config("ensemble.hist_bin_width", "bin width must be positive"));
        }
        for &t in &self.ensemble.record_times {
            let j = (t / self.time.h_t).round();
            if !(0.0..=self.time.steps as f64).contains(&j)
                || (j * self.time.h_t - t).abs() > 1e-9 * t.abs().max(1.0)
            {
                return Err(Error::config(
                    "ensemble.record_times",
                    format!("time {t} is not on the simulated time grid"),
                ));
            }
        }
        if !(self.stationary.tolerance > 0.0) {
            return Err(Error::config("stationary.tolerance", "tolerance must be positive"));
        }
        if self.stationary.max_steps == 0 {
            return Err(Error::config("stationary.max_steps", "need a positive step budget"));
        }
        Ok(())
    }

    pub fn recorder(&self) -> RecorderSpec {
        RecorderSpec {
            snapshot_times: self.ensemble.record_times.clone(),
        }
    }

    /// Materialize the immutable runtime objects shared by all paths.
    pub fn build_runtime(&self) -> Result<Runtime> {
        self.validate()?;
        let rings = RingKernelSet::build(&self.model, self.time.h_t)?;
        let eigenvalues = NoiseEigenvalues::new(
            self.model.grid.len(),
            self.noise.xi,
            self.noise.lambda_scale,
            self.model.grid.half_width(),
        );
        let u0 = self.initial.resolve(&self.model.grid)?;
        Ok(Runtime { rings, eigenvalues, u0 })
    }
}

/// Immutable per-run state derived from a [`RunConfig`].
pub struct Runtime {
    pub rings: RingKernelSet,
    pub eigenvalues: NoiseEigenvalues,
    pub u0: InitialHistory,
}

/// Flag-level overrides applied on top of a file or preset config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub xi: Option<f64>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    /// Total simulated time `T`; converted to a step count with the final `h_t`.
    pub horizon: Option<f64>,
    pub h_t: Option<f64>,
    pub nonlinear: Option<NonlinearMethod>,
    pub out: Option<PathBuf>,
    pub initial: Option<InitialConfig>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(e) = self.epsilon {
            cfg.noise.epsilon = e;
        }
        if let Some(x) = self.xi {
            cfg.noise.xi = x;
        }
        if let Some(s) = self.seed {
            cfg.noise.master_seed = s;
        }
        if let Some(p) = self.paths {
            cfg.ensemble.paths = p;
        }
        if let Some(h) = self.h_t {
            cfg.time.h_t = h;
        }
        if let Some(t_total) = self.horizon {
            if !(t_total > 0.0) || !(cfg.time.h_t > 0.0) {
                return Err(Error::config("time", "horizon and step size must be positive"));
            }
            cfg.time.steps = (t_total / cfg.time.h_t).round() as usize;
        }
        if let Some(m) = self.nonlinear {
            cfg.solver.nonlinear = m;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        if let Some(init) = &self.initial {
            cfg.initial = init.clone();
        }
        cfg.validate()
    }
}
