//! Single-path integration of the stochastic delayed field equation with
//! the semi-implicit Euler–Maruyama scheme
//!
//! ```text
//! U_{j+1} = [ U_j + h_t (I + F(U, history)) + √h_t ε η_j ] / (1 + α h_t)
//! ```
//!
//! where `F` is the delayed nonlinear term (naive sum or FFT convolution
//! per delay ring) and `η_j` a fresh correlated noise field. The implicit
//! treatment of the decay term makes the linear part unconditionally
//! stable for any step size.

mod convolve;
mod history;
mod snapshot;

pub use convolve::{nonlinear_term_fft, nonlinear_term_naive, FftConvolver};
pub use history::{HistoryBuffer, InitialHistory};
pub use snapshot::Snapshot;

#[cfg(test)]
pub(crate) use convolve::naive_with_rate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, RingKernelSet};
use crate::noise::{NoiseEigenvalues, NoiseSampler, NoiseSpec, RngStream};

/// Uniform time mesh: `steps` steps of size `h_t`, covering `[0, steps·h_t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub h_t: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_t > 0.0) || !self.h_t.is_finite() {
            return Err(Error::config("time.h_t", "time step must be positive and finite"));
        }
        if self.steps == 0 {
            return Err(Error::config("time.steps", "need at least one step"));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.h_t
    }
}

/// Which evaluation of the delayed nonlinear term to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearMethod {
    #[default]
    Fft,
    Naive,
}

/// What to record along a path besides the per-step extrema.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RecorderSpec {
    /// Times at which to keep full field snapshots; must lie on the time grid.
    pub snapshot_times: Vec<f64>,
}

/// Diagnostics of one integrated path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    /// `t_j` for `j = 0..=steps`.
    pub times: Vec<f64>,
    /// Spatial maximum of the field at each `t_j`.
    pub u_max: Vec<f64>,
    /// Spatial minimum of the field at each `t_j`.
    pub u_min: Vec<f64>,
    /// Full fields at the requested snapshot times.
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub final_field: Vec<f64>,
}

/// One path's stepping state: history, cached input, transform plans.
pub struct Stepper<'a> {
    model: &'a ModelSpec,
    h_t: f64,
    alpha_factor: f64,
    history: HistoryBuffer,
    input: Vec<f64>,
    convolver: Option<FftConvolver>,
    sampler: Option<NoiseSampler>,
    epsilon: f64,
    noise_buf: Vec<f64>,
    t: f64,
    j: usize,
}

impl<'a> Stepper<'a> {
    /// Set up a deterministic stepper (`ε = 0`, noise never sampled).
    pub fn deterministic(
        model: &'a ModelSpec,
        rings: &'a RingKernelSet,
        h_t: f64,
        u0: InitialHistory,
        method: NonlinearMethod,
    ) -> Result<Self> {
        Self::build(model, rings, h_t, u0, method, 0.0, None)
    }

    /// Set up a stochastic stepper. The sampler is only constructed when
    /// `noise.epsilon > 0`.
    pub fn stochastic(
        model: &'a ModelSpec,
        rings: &'a RingKernelSet,
        h_t: f64,
        u0: InitialHistory,
        method: NonlinearMethod,
        noise: &NoiseSpec,
        eigenvalues: &NoiseEigenvalues,
    ) -> Result<Self> {
        noise.validate()?;
        let sampler = if noise.epsilon > 0.0 {
            if eigenvalues.grid_len() != model.grid.len() {
                return Err(Error::config(
                    "noise",
                    format!(
                        "eigenvalues built for N = {} but the grid has N = {}",
                        eigenvalues.grid_len(),
                        model.grid.len()
                    ),
                ));
            }
            Some(NoiseSampler::new(eigenvalues.clone()))
        } else {
            None
        };
        Self::build(model, rings, h_t, u0, method, noise.epsilon, sampler)
    }

    fn build(
        model: &'a ModelSpec,
        rings: &'a RingKernelSet,
        h_t: f64,
        u0: InitialHistory,
        method: NonlinearMethod,
        epsilon: f64,
        sampler: Option<NoiseSampler>,
    ) -> Result<Self> {
        model.validate()?;
        let history = HistoryBuffer::new(model.grid, rings.max_delay_steps(), h_t, u0)?;
        let n = model.grid.len();
        // all configurable inputs are constant in time, so evaluate once
        let input: Vec<f64> = model.grid.points().map(|x| model.input.value(x, 0.0)).collect();
        let convolver = match method {
            NonlinearMethod::Fft => Some(FftConvolver::new(rings)),
            NonlinearMethod::Naive => None,
        };
        Ok(Stepper {
            model,
            h_t,
            alpha_factor: 1.0 + model.alpha * h_t,
            history,
            input,
            convolver,
            sampler,
            epsilon,
            noise_buf: vec![0.0; n],
            t: 0.0,
            j: 0,
        })
    }

    pub fn field(&self) -> &[f64] {
        self.history.current()
    }

    pub fn history(&self) -> &HistoryBuffer {
        &self.history
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn step_index(&self) -> usize {
        self.j
    }

    fn nonlinear_term(&mut self) -> Vec<f64> {
        match &mut self.convolver {
            Some(c) => c.apply(&self.history, &self.model.firing),
            None => nonlinear_term_naive(&self.history, self.model, self.h_t),
        }
    }

    /// Advance one step. Returns the divergence error (carrying the step
    /// index) if the new field has any non-finite entry.
    pub fn step(&mut self, rng: &mut RngStream) -> Result<()> {
        let f = self.nonlinear_term();
        if let Some(sampler) = &mut self.sampler {
            sampler.sample_into(rng, &mut self.noise_buf)?;
        }
        let sqrt_ht_eps = self.h_t.sqrt() * self.epsilon;
        let n = self.model.grid.len();
        let mut next = vec![0.0; n];
        let current = self.history.current();
        let mut finite = true;
        for i in 0..n {
            let noise = if self.sampler.is_some() {
                sqrt_ht_eps * self.noise_buf[i]
            } else {
                0.0
            };
            let v = (current[i] + self.h_t * (self.input[i] + f[i]) + noise) / self.alpha_factor;
            finite &= v.is_finite();
            next[i] = v;
        }
        self.j += 1;
        self.t = self.j as f64 * self.h_t;
        if !finite {
            return Err(Error::Divergence { step: self.j, t: self.t });
        }
        self.history.push(next);
        Ok(())
    }
}

fn extrema(field: &[f64]) -> (f64, f64) {
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for &v in field {
        max = max.max(v);
        min = min.min(v);
    }
    (max, min)
}

/// Map each snapshot time to its step index, requiring it to sit on the grid.
fn snapshot_steps(recorder: &RecorderSpec, time: &TimeGrid) -> Result<Vec<(usize, f64)>> {
    recorder
        .snapshot_times
        .iter()
        .map(|&t| {
            let j = (t / time.h_t).round();
            if (j * time.h_t - t).abs() > 1e-9 * t.abs().max(1.0) || j < 0.0 || j as usize > time.steps {
                return Err(Error::config(
                    "recorder.snapshot_times",
                    format!("time {t} is not on the simulated time grid"),
                ));
            }
            Ok((j as usize, t))
        })
        .collect()
}

/// Everything needed to integrate one path; shared read-only across workers.
pub struct PathParams<'a> {
    pub model: &'a ModelSpec,
    pub rings: &'a RingKernelSet,
    pub noise: &'a NoiseSpec,
    pub eigenvalues: &'a NoiseEigenvalues,
    pub time: TimeGrid,
    pub u0: &'a InitialHistory,
    pub method: NonlinearMethod,
    pub recorder: &'a RecorderSpec,
}

/// Integrate one sample path, recording per-step extrema and the requested
/// snapshots. Fails with the divergence error of the first bad step.
pub fn run_path(params: &PathParams, rng: &mut RngStream) -> Result<PathRecord> {
    params.time.validate()?;
    let snaps = snapshot_steps(params.recorder, &params.time)?;
    let mut stepper = Stepper::stochastic(
        params.model,
        params.rings,
        params.time.h_t,
        params.u0.clone(),
        params.method,
        params.noise,
        params.eigenvalues,
    )?;
    let steps = params.time.steps;
    let mut record = PathRecord {
        times: Vec::with_capacity(steps + 1),
        u_max: Vec::with_capacity(steps + 1),
        u_min: Vec::with_capacity(steps + 1),
        snapshots: Vec::with_capacity(snaps.len()),
        final_field: Vec::new(),
    };
    let observe = |stepper: &Stepper, record: &mut PathRecord| {
        let (max, min) = extrema(stepper.field());
        record.times.push(stepper.time());
        record.u_max.push(max);
        record.u_min.push(min);
        for (j, t) in &snaps {
            if *j == stepper.step_index() {
                record.snapshots.push((*t, stepper.field().to_vec()));
            }
        }
    };
    observe(&stepper, &mut record);
    for _ in 0..steps {
        stepper.step(rng)?;
        observe(&stepper, &mut record);
    }
    record.final_field = stepper.field().to_vec();
    Ok(record)
}

/// Result of a stationarity search.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResult {
    pub field: Vec<f64>,
    /// Steps taken before the residual fell below tolerance (0 when the
    /// initial profile is already stationary within tolerance).
    pub steps: usize,
    /// Last measured residual `max|U_{j+1} - U_j| / h_t`.
    pub residual: f64,
    pub u_max: f64,
    pub u_min: f64,
}

/// Integrate the deterministic equation until the time-difference quotient
/// `max|U_{j+1} - U_j| / h_t` drops below `tolerance`, or fail with the
/// final residual after `max_steps`.
pub fn find_stationary(
    model: &ModelSpec,
    rings: &RingKernelSet,
    h_t: f64,
    u0: InitialHistory,
    method: NonlinearMethod,
    tolerance: f64,
    max_steps: usize,
) -> Result<StationaryResult> {
    let mut stepper = Stepper::deterministic(model, rings, h_t, u0, method)?;
    // the stream is never consulted with ε = 0
    let mut rng = RngStream::for_path(0, 0);
    let mut steps = 0;
    let mut residual = f64::INFINITY;
    while steps < max_steps {
        let prev = stepper.field().to_vec();
        stepper.step(&mut rng)?;
        residual = prev
            .iter()
            .zip(stepper.field())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / h_t;
        if residual < tolerance {
            let (u_max, u_min) = extrema(stepper.field());
            return Ok(StationaryResult {
                field: stepper.field().to_vec(),
                steps,
                residual,
                u_max,
                u_min,
            });
        }
        steps += 1;
    }
    Err(Error::NoConvergence { steps, residual })
}
