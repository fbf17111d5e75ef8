//! Monte Carlo ensembles: many independent paths in parallel, reduced to
//! per-time extrema envelopes, expectation curves, mean fields, and
//! final-time extremum histograms.
//!
//! Path `s` draws from the stream derived from `(master_seed, s)`, so the
//! statistics are identical for any worker count or completion order; the
//! reduction itself runs in path-index order after all paths finish.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::RngStream;
use crate::solver::{run_path, PathParams, PathRecord};

/// Per-time cross-path envelopes of the spatial extrema.
///
/// `upper_max(t) = max_s max_x u`, `lower_max(t) = min_s max_x u`, and
/// similarly for the spatial minima; `mean_max`/`mean_min` are the
/// across-path means of the per-path extrema.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtremaEnvelopes {
    pub upper_max: Vec<f64>,
    pub lower_max: Vec<f64>,
    pub upper_min: Vec<f64>,
    pub lower_min: Vec<f64>,
    pub mean_max: Vec<f64>,
    pub mean_min: Vec<f64>,
}

/// Pointwise across-path statistics of the field at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanField {
    pub t: f64,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Uniform left-closed right-open histogram spanning `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges; bin `k` is `[edges[k], edges[k+1])`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Bin `values` into uniform bins of width `bin_width` starting at the
/// smallest value. Every value lands in exactly one bin.
pub fn histogram(values: &[f64], bin_width: f64) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::config("histogram", "cannot bin an empty value list"));
    }
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(Error::config("histogram.bin_width", "bin width must be positive"));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bins = ((max - min) / bin_width).floor() as usize + 1;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - min) / bin_width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let edges = (0..=bins).map(|k| min + k as f64 * bin_width).collect();
    Ok(Histogram { edges, counts })
}

/// Pointwise mean and min/max envelopes of a set of equal-length fields.
pub fn mean_field(t: f64, fields: &[&[f64]]) -> Result<MeanField> {
    let n = fields.first().ok_or_else(|| Error::config("mean_field", "no fields"))?.len();
    let mut mean = vec![0.0; n];
    let mut min = vec![f64::INFINITY; n];
    let mut max = vec![f64::NEG_INFINITY; n];
    for f in fields {
        debug_assert_eq!(f.len(), n);
        for i in 0..n {
            mean[i] += f[i];
            min[i] = min[i].min(f[i]);
            max[i] = max[i].max(f[i]);
        }
    }
    let inv = 1.0 / fields.len() as f64;
    for m in &mut mean {
        *m *= inv;
    }
    Ok(MeanField { t, mean, min, max })
}

/// A path that aborted, with the step at which it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivergedPath {
    pub path: usize,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    /// `t_j` shared by all per-time curves.
    pub times: Vec<f64>,
    pub envelopes: ExtremaEnvelopes,
    /// One entry per recorded snapshot time.
    pub mean_fields: Vec<MeanField>,
    /// Final-time spatial maxima, one per surviving path, in path order.
    pub final_u_max: Vec<f64>,
    /// Final-time spatial minima, one per surviving path, in path order.
    pub final_u_min: Vec<f64>,
    pub hist_max: Histogram,
    pub hist_min: Histogram,
    pub diverged: Vec<DivergedPath>,
}

impl EnsembleStats {
    pub fn surviving_paths(&self) -> usize {
        self.final_u_max.len()
    }
}

pub struct EnsembleParams<'a> {
    pub path: PathParams<'a>,
    pub n_paths: usize,
    pub hist_bin_width: f64,
}

/// Run `n_paths` independent paths (in parallel when `workers != Some(1)`)
/// and reduce them. Diverged paths are excluded from the statistics and
/// reported in `diverged`; only an ensemble in which every path diverged
/// is an error.
pub fn run_ensemble(params: &EnsembleParams, workers: Option<usize>) -> Result<EnsembleStats> {
    if params.n_paths == 0 {
        return Err(Error::config("ensemble.paths", "need at least one path"));
    }
    let seed = params.path.noise.master_seed;
    let simulate = |s: usize| {
        let mut rng = RngStream::for_path(seed, s as u64);
        run_path(&params.path, &mut rng)
    };
    let results: Vec<Result<PathRecord>> = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(|| (0..params.n_paths).into_par_iter().map(simulate).collect()),
        None => (0..params.n_paths).into_par_iter().map(simulate).collect(),
    };
    reduce(results, params.hist_bin_width)
}

fn reduce(results: Vec<Result<PathRecord>>, bin_width: f64) -> Result<EnsembleStats> {
    let n_paths = results.len();
    let mut records = Vec::with_capacity(n_paths);
    let mut diverged = Vec::new();
    for (s, res) in results.into_iter().enumerate() {
        match res {
            Ok(r) => records.push(r),
            Err(Error::Divergence { step, .. }) => diverged.push(DivergedPath { path: s, step }),
            Err(other) => return Err(other),
        }
    }
    if records.is_empty() {
        return Err(Error::AllPathsDiverged { paths: n_paths });
    }

    let times = records[0].times.clone();
    let steps = times.len();
    let mut env = ExtremaEnvelopes {
        upper_max: vec![f64::NEG_INFINITY; steps],
        lower_max: vec![f64::INFINITY; steps],
        upper_min: vec![f64::NEG_INFINITY; steps],
        lower_min: vec![f64::INFINITY; steps],
        mean_max: vec![0.0; steps],
        mean_min: vec![0.0; steps],
    };
    for r in &records {
        for j in 0..steps {
            env.upper_max[j] = env.upper_max[j].max(r.u_max[j]);
            env.lower_max[j] = env.lower_max[j].min(r.u_max[j]);
            env.upper_min[j] = env.upper_min[j].max(r.u_min[j]);
            env.lower_min[j] = env.lower_min[j].min(r.u_min[j]);
            env.mean_max[j] += r.u_max[j];
            env.mean_min[j] += r.u_min[j];
        }
    }
    let count = records.len() as f64;
    for j in 0..steps {
        env.mean_max[j] /= count;
        env.mean_min[j] /= count;
    }

    let snap_times: Vec<f64> = records[0].snapshots.iter().map(|(t, _)| *t).collect();
    let mut mean_fields = Vec::with_capacity(snap_times.len() + 1);
    for (k, &t) in snap_times.iter().enumerate() {
        let fields: Vec<&[f64]> = records
            .iter()
            .map(|r| {
                r.snapshots
                    .get(k)
                    .filter(|(tt, _)| *tt == t)
                    .map(|(_, f)| f.as_slice())
                    .ok_or_else(|| Error::config("recorder", format!("a path is missing the snapshot at t = {t}")))
            })
            .collect::<Result<_>>()?;
        mean_fields.push(mean_field(t, &fields)?);
    }
    // the final time is always available from the paths' final fields
    let t_final = *times.last().unwrap();
    if !snap_times.contains(&t_final) {
        let fields: Vec<&[f64]> = records.iter().map(|r| r.final_field.as_slice()).collect();
        mean_fields.push(mean_field(t_final, &fields)?);
    }

    let final_u_max: Vec<f64> = records.iter().map(|r| *r.u_max.last().unwrap()).collect();
    let final_u_min: Vec<f64> = records.iter().map(|r| *r.u_min.last().unwrap()).collect();
    let hist_max = histogram(&final_u_max, bin_width)?;
    let hist_min = histogram(&final_u_min, bin_width)?;

    Ok(EnsembleStats {
        times,
        envelopes: env,
        mean_fields,
        final_u_max,
        final_u_min,
        hist_max,
        hist_min,
        diverged,
    })
}

/// `stats.csv`: one row per time step with the envelope and mean curves.
pub fn stats_csv(stats: &EnsembleStats) -> String {
    let mut out = String::from("t,U_maxmax,U_minmax,U_maxmin,U_minmin,E_max,E_min\n");
    let e = &stats.envelopes;
    for j in 0..stats.times.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            stats.times[j], e.upper_max[j], e.lower_max[j], e.upper_min[j], e.lower_min[j], e.mean_max[j], e.mean_min[j]
        ));
    }
    out
}

fn meanfield_csv(grid_points: &[f64], mf: &MeanField) -> String {
    let mut out = String::from("x,mean,min,max\n");
    for i in 0..mf.mean.len() {
        out.push_str(&format!("{},{},{},{}\n", grid_points[i], mf.mean[i], mf.min[i], mf.max[i]));
    }
    out
}

fn histogram_csv(hist: &Histogram) -> String {
    let mut out = String::from("bin_left,bin_right,count\n");
    for (k, &c) in hist.counts.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", hist.edges[k], hist.edges[k + 1], c));
    }
    out
}

/// Write the ensemble file set into `dir`: `stats.csv`, one
/// `meanfield_<t>.csv` per recorded time, `hist_max.csv`, `hist_min.csv`.
pub fn write_outputs(stats: &EnsembleStats, grid_points: &[f64], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("stats.csv"), stats_csv(stats))?;
    for mf in &stats.mean_fields {
        fs::write(dir.join(format!("meanfield_{}.csv", mf.t)), meanfield_csv(grid_points, mf))?;
    }
    fs::write(dir.join("hist_max.csv"), histogram_csv(&stats.hist_max))?;
    fs::write(dir.join("hist_min.csv"), histogram_csv(&stats.hist_min))?;
    Ok(())
}
