//! Relax the deterministic benchmark field from a zero start to its
//! stationary one-bump state and print the extrema.
//!
//! Run with: `cargo run --release --example one_bump`

use neurofield::config::RunConfig;
use neurofield::solver::{find_stationary, InitialHistory};

fn main() {
    // ANCHOR: body
    let cfg = RunConfig::preset("paper-3.1").unwrap();
    let runtime = cfg.build_runtime().unwrap();

    let result = find_stationary(
        &cfg.model,
        &runtime.rings,
        cfg.time.h_t,
        InitialHistory::Zero,
        cfg.solver.nonlinear,
        1e-6,   // residual tolerance on max|ΔU|/h_t
        10_000, // step budget
    )
    .unwrap();

    println!(
        "stationary after {} steps (t = {}): u_max = {:.6}, u_min = {:.6}",
        result.steps,
        (result.steps + 1) as f64 * cfg.time.h_t,
        result.u_max,
        result.u_min,
    );
    // ANCHOR_END: body
}
