//! A seeded Monte Carlo ensemble of the noisy benchmark, reduced to
//! envelope statistics.
//!
//! Run with: `cargo run --release --example stochastic_ensemble`

use neurofield::config::RunConfig;
use neurofield::ensemble::{run_ensemble, EnsembleParams};
use neurofield::solver::PathParams;

fn main() {
    // ANCHOR: body
    let mut cfg = RunConfig::preset("paper-3.1").unwrap();
    cfg.noise.epsilon = 0.01; // additive noise on top of the relaxation

    let runtime = cfg.build_runtime().unwrap();
    let recorder = cfg.recorder();
    let stats = run_ensemble(
        &EnsembleParams {
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
            n_paths: 100,
            hist_bin_width: cfg.ensemble.hist_bin_width,
        },
        None, // use all available cores; the result is identical either way
    )
    .unwrap();

    let last = stats.times.len() - 1;
    let e = &stats.envelopes;
    println!("paths: {} (diverged: {})", stats.surviving_paths(), stats.diverged.len());
    println!(
        "t = {}: E_max = {:.4} in [{:.4}, {:.4}], E_min = {:.4} in [{:.4}, {:.4}]",
        stats.times[last],
        e.mean_max[last],
        e.lower_max[last],
        e.upper_max[last],
        e.mean_min[last],
        e.lower_min[last],
        e.upper_min[last],
    );
    println!("final u_max histogram:");
    for (k, &c) in stats.hist_max.counts.iter().enumerate() {
        println!(
            "  [{:6.2}, {:6.2})  {}",
            stats.hist_max.edges[k],
            stats.hist_max.edges[k + 1],
            "#".repeat(c)
        );
    }
    // ANCHOR_END: body
}
