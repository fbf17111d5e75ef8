//! Spatially correlated Gaussian noise fields, synthesized spectrally.
//!
//! Each increment of the driving noise is a real field on the grid whose
//! discrete Fourier modes are independent Gaussians weighted by the
//! covariance eigenvalues `λ_k = exp(-ξ² k² / 8π)`. The synthesis draws a
//! Hermitian-symmetric spectrum (complex Gaussians on modes `1..N/2-1`,
//! real ones on `k = 0` and `k = N/2`) and inverse-transforms it, so the
//! returned field is real and spatially stationary. Normalization is fixed
//! by the `k = 0` mode having unit variance: a spectrum with only that mode
//! yields a spatially constant field with value `~ N(0, 1)`.
//!
//! The time stepper scales the returned unit field by `ε √h_t`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interpretation of `k` in the eigenvalue formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaScale {
    /// `k` is the integer mode index (the covariance formula verbatim).
    #[default]
    ModeIndex,
    /// `k` is replaced by the physical wavenumber `π k / l`.
    Wavenumber,
}

/// Noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Noise amplitude ε ≥ 0. Zero disables sampling entirely.
    pub epsilon: f64,
    /// Spatial correlation length ξ > 0.
    pub xi: f64,
    /// Master seed; per-path streams are derived from it.
    pub master_seed: u64,
    #[serde(default)]
    pub lambda_scale: LambdaScale,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::config("noise.epsilon", "amplitude must be >= 0 and finite"));
        }
        if !(self.xi > 0.0) || !self.xi.is_finite() {
            return Err(Error::config("noise.xi", "correlation length must be positive and finite"));
        }
        Ok(())
    }
}

/// Covariance eigenvalue `λ_k = exp(-ξ² k² / 8π)` for mode index `k`.
pub fn eigenvalue(k: usize, xi: f64) -> f64 {
    let k = k as f64;
    (-xi * xi * k * k / (8.0 * PI)).exp()
}

/// Eigenvalues `λ_0 ..= λ_{N/2}` of the noise covariance on an `N`-point grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEigenvalues {
    n: usize,
    lambdas: Vec<f64>,
}

impl NoiseEigenvalues {
    pub fn new(n: usize, xi: f64, scale: LambdaScale, half_width: f64) -> Self {
        let lambdas = (0..=n / 2)
            .map(|k| match scale {
                LambdaScale::ModeIndex => eigenvalue(k, xi),
                LambdaScale::Wavenumber => {
                    let kappa = PI * k as f64 / half_width;
                    (-xi * xi * kappa * kappa / (8.0 * PI)).exp()
                }
            })
            .collect();
        NoiseEigenvalues { n, lambdas }
    }

    /// Build from an explicit spectrum (`N/2 + 1` values).
    pub fn from_lambdas(n: usize, lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() != n / 2 + 1 {
            return Err(Error::config(
                "noise.lambdas",
                format!("expected {} eigenvalues for N = {}", n / 2 + 1, n),
            ));
        }
        Ok(NoiseEigenvalues { n, lambdas })
    }

    pub fn grid_len(&self) -> usize {
        self.n
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Analytic covariance between grid points at circular index lag `m`
    /// under the sampler's normalization:
    /// `C(m) = λ_0² + (-1)^m λ_{N/2}² + Σ_{k=1}^{N/2-1} 2 λ_k² cos(2πkm/N)`.
    pub fn lag_covariance(&self, m: usize) -> f64 {
        let n = self.n as f64;
        let l = &self.lambdas;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let mut c = l[0] * l[0] + sign * l[self.n / 2] * l[self.n / 2];
        for (k, lk) in l.iter().enumerate().take(self.n / 2).skip(1) {
            c += 2.0 * lk * lk * (2.0 * PI * k as f64 * m as f64 / n).cos();
        }
        c
    }
}

/// Deterministic per-path random stream.
///
/// Streams for distinct `(master_seed, path_index)` pairs are independent
/// and reproducible regardless of scheduling, so parallel ensembles give
/// identical results for any worker count.
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn for_path(master_seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(path_index);
        RngStream(rng)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }
}

/// Synthesizes correlated noise fields for one grid size.
///
/// Holds the inverse-FFT plan and a spectrum buffer; clone one per worker.
#[derive(Clone)]
pub struct NoiseSampler {
    eig: NoiseEigenvalues,
    ifft: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl NoiseSampler {
    pub fn new(eig: NoiseEigenvalues) -> Self {
        let n = eig.grid_len();
        let ifft = FftPlanner::new().plan_fft_inverse(n);
        let scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
        NoiseSampler {
            eig,
            ifft,
            spectrum: vec![Complex64::default(); n],
            scratch,
        }
    }

    pub fn grid_len(&self) -> usize {
        self.eig.grid_len()
    }

    /// Draw one field into `out`. `out.len()` must equal the grid size.
    pub fn sample_into(&mut self, rng: &mut RngStream, out: &mut [f64]) -> Result<()> {
        if out.len() != self.eig.grid_len() {
            return Err(Error::config(
                "noise",
                format!("field length {} does not match grid N = {}", out.len(), self.eig.grid_len()),
            ));
        }
        self.fill_spectrum(rng);
        self.ifft.process_with_scratch(&mut self.spectrum, &mut self.scratch);
        for (o, c) in out.iter_mut().zip(&self.spectrum) {
            *o = c.re;
        }
        Ok(())
    }

    pub fn sample(&mut self, rng: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.eig.grid_len()];
        self.sample_into(rng, &mut out).expect("length matches by construction");
        out
    }

    /// Hermitian spectrum: mode `k` carries variance `λ_k²`; the inverse
    /// transform (no 1/N factor) then leaves the DFT coefficients of the
    /// field, in the 1/N-forward convention, with exactly that variance.
    fn fill_spectrum(&mut self, rng: &mut RngStream) {
        let n = self.eig.grid_len();
        let l = self.eig.lambdas();
        self.spectrum[0] = Complex64::new(l[0] * rng.standard_normal(), 0.0);
        for k in 1..n / 2 {
            let re = rng.standard_normal() * FRAC_1_SQRT_2;
            let im = rng.standard_normal() * FRAC_1_SQRT_2;
            let c = Complex64::new(l[k] * re, l[k] * im);
            self.spectrum[k] = c;
            self.spectrum[n - k] = c.conj();
        }
        self.spectrum[n / 2] = Complex64::new(l[n / 2] * rng.standard_normal(), 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigenvalue_contract() {
        assert_eq!(eigenvalue(0, 1.0), 1.0);
        assert_eq!(eigenvalue(0, 123.0), 1.0);
        // white-noise limit
        assert_relative_eq!(eigenvalue(7, 1e-9), 1.0, max_relative = 1e-12);
        assert_relative_eq!(eigenvalue(2, 1.0), (-1.0 / (2.0 * PI)).exp(), max_relative = 1e-12);
        assert_relative_eq!(eigenvalue(2, 1.0), 0.852_864_203_314_464_7, max_relative = 1e-12);
    }

    #[test]
    fn eigenvalues_decreasing_and_squared() {
        let eig = NoiseEigenvalues::new(100, 1.0, LambdaScale::ModeIndex, 50.0);
        let l = eig.lambdas();
        assert_eq!(l.len(), 51);
        assert_eq!(l[0], 1.0);
        for k in 1..l.len() {
            assert!(l[k] < l[k - 1]);
            assert!(l[k] > 0.0 && l[k] <= 1.0);
            let sq = (-(k as f64) * (k as f64) / (4.0 * PI)).exp();
            assert_relative_eq!(l[k] * l[k], sq, max_relative = 1e-12);
        }
    }

    #[test]
    fn wavenumber_scale_stretches_spectrum() {
        let mode = NoiseEigenvalues::new(100, 1.0, LambdaScale::ModeIndex, 50.0);
        let wave = NoiseEigenvalues::new(100, 1.0, LambdaScale::Wavenumber, 50.0);
        // π k / l < k for l = 50, so the wavenumber spectrum decays slower
        assert!(wave.lambdas()[10] > mode.lambdas()[10]);
    }

    #[test]
    fn stream_determinism() {
        let eig = NoiseEigenvalues::new(64, 1.0, LambdaScale::ModeIndex, 10.0);
        let mut s = NoiseSampler::new(eig);
        let a = s.sample(&mut RngStream::for_path(42, 3));
        let b = s.sample(&mut RngStream::for_path(42, 3));
        assert_eq!(a, b);
        let c = s.sample(&mut RngStream::for_path(42, 4));
        assert_ne!(a, c);
        let d = s.sample(&mut RngStream::for_path(43, 3));
        assert_ne!(a, d);
    }

    #[test]
    fn single_mode_gives_constant_field() {
        let n = 32;
        let mut lambdas = vec![0.0; n / 2 + 1];
        lambdas[0] = 1.0;
        let eig = NoiseEigenvalues::from_lambdas(n, lambdas).unwrap();
        let mut s = NoiseSampler::new(eig);
        let mut rng = RngStream::for_path(7, 0);
        let mut values = Vec::new();
        for _ in 0..2000 {
            let f = s.sample(&mut rng);
            for w in f.windows(2) {
                assert!((w[0] - w[1]).abs() < 1e-12);
            }
            values.push(f[0]);
        }
        let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
        let var: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        assert!(mean.abs() < 0.1, "mean {mean}");
        assert!((var - 1.0).abs() < 0.15, "variance {var}");
    }

    #[test]
    fn mismatched_length_rejected() {
        let eig = NoiseEigenvalues::new(64, 1.0, LambdaScale::ModeIndex, 10.0);
        let mut s = NoiseSampler::new(eig);
        let mut out = vec![0.0; 63];
        assert!(s.sample_into(&mut RngStream::for_path(0, 0), &mut out).is_err());
        assert!(NoiseEigenvalues::from_lambdas(64, vec![1.0; 5]).is_err());
    }

    #[test]
    fn synthesis_is_real() {
        // imaginary residue of the inverse transform of a Hermitian spectrum
        let eig = NoiseEigenvalues::new(100, 1.0, LambdaScale::ModeIndex, 50.0);
        let mut s = NoiseSampler::new(eig);
        let mut rng = RngStream::for_path(11, 0);
        for _ in 0..100 {
            s.fill_spectrum(&mut rng);
            let mut spec = s.spectrum.clone();
            s.ifft.process_with_scratch(&mut spec, &mut s.scratch);
            let max_im = spec.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
            let max_re = spec.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
            assert!(max_im <= 1e-12 * max_re.max(1.0), "imaginary residue {max_im}");
        }
    }

    fn draw_block(n: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
        let eig = NoiseEigenvalues::new(n, 1.0, LambdaScale::ModeIndex, 50.0);
        let mut s = NoiseSampler::new(eig);
        let mut rng = RngStream::for_path(seed, 0);
        (0..samples).map(|_| s.sample(&mut rng)).collect()
    }

    #[test]
    fn gaussian_moments_per_point() {
        let fields = draw_block(100, 10_000, 5);
        let xs: Vec<f64> = fields.iter().map(|f| f[17]).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let skew = m3 / m2.powf(1.5);
        let kurt = m4 / (m2 * m2);
        assert!(skew.abs() < 0.1, "skewness {skew}");
        assert!((kurt - 3.0).abs() < 0.2, "kurtosis {kurt}");
    }

    #[test]
    fn lag_covariance_matches_cosine_series() {
        let n = 100;
        let samples = 10_000;
        let fields = draw_block(n, samples, 9);
        let eig = NoiseEigenvalues::new(n, 1.0, LambdaScale::ModeIndex, 50.0);
        let c0 = eig.lag_covariance(0);
        for m in [0usize, 1, 2, 3, 5, 8, 13, 25, 50] {
            let mut acc = 0.0;
            for f in &fields {
                // average the product over all positions for variance reduction
                let mut s = 0.0;
                for i in 0..n {
                    s += f[i] * f[(i + m) % n];
                }
                acc += s / n as f64;
            }
            let emp = acc / samples as f64;
            let analytic = eig.lag_covariance(m);
            // conservative MC error: independent-pair standard error
            let se = ((c0 * c0 + analytic * analytic) / samples as f64).sqrt();
            assert!(
                (emp - analytic).abs() < 3.0 * se,
                "lag {m}: empirical {emp}, analytic {analytic}, se {se}"
            );
        }
    }

    #[test]
    fn spatial_stationarity_under_shift() {
        let n = 100;
        let fields = draw_block(n, 10_000, 13);
        // covariance of the pair (i, j) vs the shifted pair (i+s, j+s)
        let pairs = [(3usize, 10usize, 41usize), (0, 25, 60), (7, 8, 50)];
        for (i, j, s) in pairs {
            let cov = |a: usize, b: usize| -> f64 {
                fields.iter().map(|f| f[a] * f[b]).sum::<f64>() / fields.len() as f64
            };
            let c1 = cov(i, j);
            let c2 = cov((i + s) % n, (j + s) % n);
            let c0 = cov(i, i);
            let se = ((c0 * c0 + c1 * c1) / fields.len() as f64).sqrt();
            assert!((c1 - c2).abs() < 3.0 * (2.0f64).sqrt() * se, "pair ({i},{j}) shift {s}: {c1} vs {c2}");
        }
    }

    #[test]
    fn covariance_decreases_with_lag() {
        let n = 100;
        let samples = 10_000;
        let fields = draw_block(n, samples, 21);
        let eig = NoiseEigenvalues::new(n, 1.0, LambdaScale::ModeIndex, 50.0);
        let c0 = eig.lag_covariance(0);
        let mut prev = f64::INFINITY;
        for m in 0..=n / 4 {
            let mut acc = 0.0;
            for f in &fields {
                let mut s = 0.0;
                for i in 0..n {
                    s += f[i] * f[(i + m) % n];
                }
                acc += s / n as f64;
            }
            let emp = acc / samples as f64;
            let se = ((c0 * c0 + emp * emp) / samples as f64).sqrt();
            assert!(emp <= prev + 3.0 * (2.0f64).sqrt() * se, "lag {m}: {emp} > {prev}");
            prev = emp;
        }
    }

    #[test]
    fn successive_samples_uncorrelated_in_time() {
        let fields = draw_block(100, 10_000, 33);
        let xs: Vec<f64> = fields.iter().map(|f| f[0]).collect();
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let lag1: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (n - 1) as f64;
        let rho = lag1 / var;
        let se = 1.0 / (n as f64).sqrt();
        assert!(rho.abs() < 3.0 * se, "lag-1 autocorrelation {rho}");
    }
}
