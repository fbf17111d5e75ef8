//! The delayed nonlinear term `F(x_i) = h Σ_j K(dist(i,j)) S(U_{t-τ(i,j)}(x_j))`,
//! in a direct O(N²) form and an FFT form that convolves one circular kernel
//! per delay level.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::model::{delay_steps, FiringRateSpec, ModelSpec, RingKernelSet};
use crate::solver::history::HistoryBuffer;

/// Direct summation over all pairs, with the per-pair rounded lag.
/// Reference semantics for the FFT path.
pub fn nonlinear_term_naive(history: &HistoryBuffer, model: &ModelSpec, h_t: f64) -> Vec<f64> {
    naive_with_rate(history, model, h_t, |u| model.firing.rate(u))
}

/// Same sum with an arbitrary rate function (used by tests with rate maps
/// outside the configurable family).
pub(crate) fn naive_with_rate(
    history: &HistoryBuffer,
    model: &ModelSpec,
    h_t: f64,
    rate: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let grid = history.grid();
    let n = grid.len();
    let h = grid.spacing();
    // weight, lag, and the looked-up field depend only on the circular offset
    let mut weight = vec![0.0; n];
    let mut past = Vec::with_capacity(n);
    for m in 0..n {
        let dist = grid.offset_distance(m);
        weight[m] = h * model.kernel.value(dist);
        past.push(history.lookup(delay_steps(dist, model.speed, h_t)));
    }
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..n {
            let m = (i + n - j) % n;
            acc += weight[m] * rate(past[m][j]);
        }
        *o = acc;
    }
    out
}

/// FFT evaluation: one circular convolution per occupied delay level.
///
/// Holds forward/inverse plans and the spectra of the delay rings; clone
/// one per worker (plans are shared, buffers are per-instance).
#[derive(Clone)]
pub struct FftConvolver {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// (delay level, DFT of the ring kernel)
    ring_spectra: Vec<(usize, Vec<Complex64>)>,
    buf: Vec<Complex64>,
    acc: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl FftConvolver {
    pub fn new(rings: &RingKernelSet) -> Self {
        let n = rings.len();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::default(); scratch_len];
        let ring_spectra = rings
            .rings()
            .map(|(d, w)| {
                let mut spec: Vec<Complex64> = w.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                fft.process_with_scratch(&mut spec, &mut scratch);
                (d, spec)
            })
            .collect();
        FftConvolver {
            n,
            fft,
            ifft,
            ring_spectra,
            buf: vec![Complex64::default(); n],
            acc: vec![Complex64::default(); n],
            scratch,
        }
    }

    pub fn grid_len(&self) -> usize {
        self.n
    }

    /// `F = Σ_d ring_d ∗ S(U_{t - d h_t})`, accumulated in spectral space
    /// with a single inverse transform.
    pub fn apply(&mut self, history: &HistoryBuffer, firing: &FiringRateSpec) -> Vec<f64> {
        let n = self.n;
        let inv_n = 1.0 / n as f64;
        self.acc.fill(Complex64::default());
        for (d, ring_hat) in &self.ring_spectra {
            let past = history.lookup(*d);
            for (b, &u) in self.buf.iter_mut().zip(past.iter()) {
                *b = Complex64::new(firing.rate(u), 0.0);
            }
            self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
            for ((a, b), r) in self.acc.iter_mut().zip(&self.buf).zip(ring_hat) {
                *a += b * r;
            }
        }
        self.ifft.process_with_scratch(&mut self.acc, &mut self.scratch);
        self.acc.iter().map(|c| c.re * inv_n).collect()
    }
}

/// Convenience wrapper building a fresh plan per call; prefer holding an
/// [`FftConvolver`] when stepping repeatedly.
pub fn nonlinear_term_fft(history: &HistoryBuffer, rings: &RingKernelSet, firing: &FiringRateSpec) -> Vec<f64> {
    FftConvolver::new(rings).apply(history, firing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DomainGrid, InputSpec, KernelSpec};
    use crate::solver::history::InitialHistory;
    use rand::{Rng, SeedableRng};

    fn model(n: usize, l: f64, speed: f64) -> ModelSpec {
        ModelSpec {
            grid: DomainGrid::new(l, n).unwrap(),
            kernel: KernelSpec::default(),
            firing: FiringRateSpec::default(),
            input: InputSpec::Zero,
            alpha: 1.0,
            speed,
        }
    }

    #[test]
    fn zero_kernel_gives_zero() {
        let mut m = model(8, 4.0, f64::INFINITY);
        m.kernel = KernelSpec::Gaussian { amplitude: 0.0, width: 1.0 };
        let hist = HistoryBuffer::new(m.grid, 0, 0.02, InitialHistory::Uniform(3.0)).unwrap();
        let f = nonlinear_term_naive(&hist, &m, 0.02);
        assert!(f.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn saturated_history_sums_full_kernel_mass() {
        // a field above threshold everywhere fires everywhere, so every
        // point receives the same total weighted kernel mass
        let m = model(100, 50.0, f64::INFINITY);
        let hist = HistoryBuffer::new(m.grid, 0, 0.02, InitialHistory::Uniform(1.0)).unwrap();
        let f = nonlinear_term_naive(&hist, &m, 0.02);
        let h = m.grid.spacing();
        let expected: f64 = (0..100).map(|o| h * m.kernel.value(m.grid.offset_distance(o))).sum();
        for &x in &f {
            assert!((x - expected).abs() < 1e-12 * expected.abs());
        }
    }

    #[test]
    fn constant_kernel_identity_rate_by_hand() {
        // N=4, l=1, K≡1, S = clamp(u, 0, 1), U = (1,0,0,0):
        // F(x_i) = 0.5 · (1+0+0+0) = 0.5 everywhere
        let mut m = model(4, 1.0, f64::INFINITY);
        m.kernel = KernelSpec::Oscillatory {
            amplitude: 1.0,
            decay: 0.0,
            sine_coeff: 0.0,
            omega: 0.0,
        };
        let mut hist = HistoryBuffer::new(m.grid, 0, 0.25, InitialHistory::Zero).unwrap();
        hist.push(vec![1.0, 0.0, 0.0, 0.0]);
        let f = naive_with_rate(&hist, &m, 0.25, |u| u.clamp(0.0, 1.0));
        for &x in &f {
            assert!((x - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn fft_matches_naive_on_benchmark() {
        let m = model(100, 50.0, f64::INFINITY);
        let rings = RingKernelSet::build(&m, 0.02).unwrap();
        let mut hist = HistoryBuffer::new(m.grid, 0, 0.02, InitialHistory::Zero).unwrap();
        let field: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin() * 4.0).collect();
        hist.push(field);
        let a = nonlinear_term_naive(&hist, &m, 0.02);
        let b = nonlinear_term_fft(&hist, &rings, &m.firing);
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "max diff {diff}");
    }

    #[test]
    fn fft_matches_naive_with_random_delayed_histories() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
        for &n in &[8usize, 64, 100] {
            for case in 0..10 {
                let speed = if case % 3 == 0 { f64::INFINITY } else { rng.random_range(0.5..10.0) };
                let m = model(n, 25.0, speed);
                let h_t = 0.05;
                let rings = RingKernelSet::build(&m, h_t).unwrap();
                let mut hist =
                    HistoryBuffer::new(m.grid, rings.max_delay_steps(), h_t, InitialHistory::Zero).unwrap();
                for _ in 0..rings.max_delay_steps().min(40) + 1 {
                    let f: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
                    hist.push(f);
                }
                let a = nonlinear_term_naive(&hist, &m, h_t);
                let b = nonlinear_term_fft(&hist, &rings, &m.firing);
                let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(diff < 1e-9, "N={n} case={case}: max diff {diff}");
            }
        }
    }

    #[test]
    fn delayed_reads_use_rounded_lags() {
        // With U₀(x,t) = t, the naive term reads the value -lag·h_t through
        // an identity rate, so the lag of every pair is directly visible.
        let n = 8;
        let h_t = 0.25;
        let m = model(n, 4.0, 1.0);
        let hist = HistoryBuffer::new(m.grid, 100, h_t, InitialHistory::TimeRamp).unwrap();
        // rate = identity: F(x_i) = Σ_m w_m · (-d_m h_t); group by offset
        let f = naive_with_rate(&hist, &m, h_t, |u| u);
        let h = m.grid.spacing();
        for i in 0..n {
            let mut expected = 0.0;
            for j in 0..n {
                let dist = m.grid.circular_distance(i, j);
                let d = delay_steps(dist, m.speed, h_t);
                expected += h * m.kernel.value(dist) * (-(d as f64) * h_t);
            }
            assert!((f[i] - expected).abs() < 1e-12, "i={i}: {} vs {}", f[i], expected);
        }
    }
}
