//! Draw correlated noise fields and compare the empirical lag covariance
//! against the analytic cosine series.
//!
//! Run with: `cargo run --release --example noise_field`

use neurofield::noise::{LambdaScale, NoiseEigenvalues, NoiseSampler, RngStream};

fn main() {
    // ANCHOR: body
    let n = 100;
    let xi = 1.0;
    let eigenvalues = NoiseEigenvalues::new(n, xi, LambdaScale::ModeIndex, 50.0);
    let mut sampler = NoiseSampler::new(eigenvalues.clone());
    let mut rng = RngStream::for_path(42, 0);

    let samples = 20_000;
    let mut emp = vec![0.0; 6];
    for _ in 0..samples {
        let field = sampler.sample(&mut rng);
        for (m, e) in emp.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                acc += field[i] * field[(i + m) % n];
            }
            *e += acc / n as f64;
        }
    }

    println!("lag   empirical   analytic");
    for (m, e) in emp.iter().enumerate() {
        println!(
            "{m:3}   {:9.4}   {:9.4}",
            e / samples as f64,
            eigenvalues.lag_covariance(m)
        );
    }
    // ANCHOR_END: body
}
