//! Problem definition: spatial grid, connectivity kernel, firing rate,
//! external input, transmission delays, and the delay-ring decomposition
//! of the weighted kernel used by the solver.
//!
//! The field lives on a periodic grid of `N` points over `[-l, l)` with
//! spacing `h = 2l/N`; distances between points are circular, so the
//! largest possible distance (and hence delay) is `l`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic one-dimensional grid: `x_j = -l + j h`, `j = 0..N-1`, `h = 2l/N`.
///
/// The endpoint `x_N = l` is identified with `x_0 = -l`; quadrature over the
/// domain is the rectangular rule with uniform weight `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainGrid {
    l: f64,
    n: usize,
}

impl DomainGrid {
    /// Build a grid with half-width `l > 0` and `n ≥ 2` (even) points.
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::config("grid.l", "half-width must be positive and finite"));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::config("grid.n", "number of points must be an even integer >= 2"));
        }
        Ok(DomainGrid { l, n })
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `h = 2l/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    /// `x_j = -l + j h`.
    pub fn point(&self, j: usize) -> f64 {
        debug_assert!(j < self.n);
        -self.l + j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.point(j))
    }

    /// Distance travelled along the circle between offset `m` and offset 0:
    /// `min(m, N-m) · h`. Always `<= l`.
    pub fn offset_distance(&self, m: usize) -> f64 {
        debug_assert!(m < self.n);
        m.min(self.n - m) as f64 * self.spacing()
    }

    /// Circular distance between grid points `i` and `j`.
    pub fn circular_distance(&self, i: usize, j: usize) -> f64 {
        let m = if i >= j { i - j } else { j - i };
        self.offset_distance(m)
    }
}

/// Connectivity kernel `K`, evaluated at `|x|` so it is even by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `K(x) = a e^{-b|x|} (c sin(ω|x|) + cos(ω|x|))`.
    ///
    /// The default coefficients (`a=2, b=0.08, c=0.08, ω=π/10`) give the
    /// oscillatory kernel that supports multi-bump stationary solutions.
    Oscillatory {
        #[serde(default = "defaults::kernel_amplitude")]
        amplitude: f64,
        #[serde(default = "defaults::kernel_decay")]
        decay: f64,
        #[serde(default = "defaults::kernel_sine_coeff")]
        sine_coeff: f64,
        #[serde(default = "defaults::kernel_omega")]
        omega: f64,
    },
    /// `K(x) = a e^{-x²/w}`.
    Gaussian { amplitude: f64, width: f64 },
}

mod defaults {
    pub fn kernel_amplitude() -> f64 {
        2.0
    }
    pub fn kernel_decay() -> f64 {
        0.08
    }
    pub fn kernel_sine_coeff() -> f64 {
        0.08
    }
    pub fn kernel_omega() -> f64 {
        std::f64::consts::PI / 10.0
    }
}

impl Default for KernelSpec {
    /// The oscillatory multi-bump benchmark kernel.
    fn default() -> Self {
        KernelSpec::Oscillatory {
            amplitude: defaults::kernel_amplitude(),
            decay: defaults::kernel_decay(),
            sine_coeff: defaults::kernel_sine_coeff(),
            omega: defaults::kernel_omega(),
        }
    }
}

impl KernelSpec {
    /// Evaluate `K(|x|)`.
    pub fn value(&self, x: f64) -> f64 {
        let r = x.abs();
        match *self {
            KernelSpec::Oscillatory {
                amplitude,
                decay,
                sine_coeff,
                omega,
            } => amplitude * (-decay * r).exp() * (sine_coeff * (omega * r).sin() + (omega * r).cos()),
            KernelSpec::Gaussian { amplitude, width } => amplitude * (-r * r / width).exp(),
        }
    }
}

/// Firing rate `S`, mapping membrane potential to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FiringRateSpec {
    /// `S(u) = 1` for `u > threshold`, else `0`.
    ///
    /// The tie `S(threshold) = 0`: a point is active only strictly above
    /// threshold. With the inactive tie, a zero start under the benchmark
    /// input relaxes to the localized one-bump state; the active tie drives
    /// the whole domain above threshold instead.
    Heaviside {
        #[serde(default)]
        threshold: f64,
    },
    /// `S(u) = 1 / (1 + e^{-slope (u - threshold)})`.
    Sigmoid { threshold: f64, slope: f64 },
}

impl Default for FiringRateSpec {
    fn default() -> Self {
        FiringRateSpec::Heaviside { threshold: 0.0 }
    }
}

impl FiringRateSpec {
    pub fn rate(&self, u: f64) -> f64 {
        match *self {
            FiringRateSpec::Heaviside { threshold } => {
                if u > threshold {
                    1.0
                } else {
                    0.0
                }
            }
            FiringRateSpec::Sigmoid { threshold, slope } => 1.0 / (1.0 + (-slope * (u - threshold)).exp()),
        }
    }
}

/// External input `I(x, t)`. All variants here are constant in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSpec {
    Zero,
    /// `I(x) = offset + amplitude e^{-x²/width}`.
    GaussianBump { offset: f64, amplitude: f64, width: f64 },
}

impl InputSpec {
    /// The heterogeneous input of the multi-bump benchmark:
    /// `I(x) = -3.39967 + 8 e^{-x²/18}`.
    pub fn bump_benchmark() -> Self {
        InputSpec::GaussianBump {
            offset: -3.39967,
            amplitude: 8.0,
            width: 18.0,
        }
    }

    pub fn value(&self, x: f64, _t: f64) -> f64 {
        match *self {
            InputSpec::Zero => 0.0,
            InputSpec::GaussianBump {
                offset,
                amplitude,
                width,
            } => offset + amplitude * (-x * x / width).exp(),
        }
    }
}

/// Complete specification of the field problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub grid: DomainGrid,
    pub kernel: KernelSpec,
    pub firing: FiringRateSpec,
    pub input: InputSpec,
    /// Decay rate α of the membrane potential (1/time), > 0.
    pub alpha: f64,
    /// Propagation speed v (space/time). `f64::INFINITY` means no delays.
    pub speed: f64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::config("model.alpha", "decay rate must be positive and finite"));
        }
        if !(self.speed > 0.0) {
            return Err(Error::config("model.speed", "propagation speed must be positive (or inf)"));
        }
        Ok(())
    }

    /// Maximum transmission delay: `l / v` (the largest circular distance
    /// is the half-width `l`). Zero when the speed is infinite.
    pub fn max_delay(&self) -> f64 {
        if self.speed.is_infinite() {
            0.0
        } else {
            self.grid.half_width() / self.speed
        }
    }
}

/// Number of time steps a signal travelling `distance` at speed `v` is
/// delayed by, on a time grid with step `h_t`.
///
/// The lag `τ = distance / v` is rounded to the nearest step: with
/// `d = floor(τ/h_t)` and `δ = frac(τ/h_t)`, the result is `d` when
/// `δ < 0.5` and `d + 1` otherwise.
pub fn delay_steps(distance: f64, speed: f64, h_t: f64) -> usize {
    debug_assert!(distance >= 0.0 && speed > 0.0 && h_t > 0.0);
    if speed.is_infinite() {
        return 0;
    }
    let ratio = distance / speed / h_t;
    let d = ratio.floor();
    let frac = ratio - d;
    if frac < 0.5 {
        d as usize
    } else {
        d as usize + 1
    }
}

/// The spatially weighted kernel split by delay level.
///
/// Offset `m` carries weight `w_m = h K(dist(m))` and delay level
/// `d_m = delay_steps(dist(m), v, h_t)`. Ring `d` is the length-`N`
/// circular kernel holding the weights of exactly the offsets with
/// `d_m = d`; every offset belongs to exactly one ring, so the rings
/// are a partition of the full weighted kernel. The solver convolves
/// each ring with the field history at the matching lag.
#[derive(Debug, Clone, PartialEq)]
pub struct RingKernelSet {
    n: usize,
    d_max: usize,
    rings: BTreeMap<usize, Vec<f64>>,
    offsets: BTreeMap<usize, Vec<usize>>,
}

impl RingKernelSet {
    pub fn build(model: &ModelSpec, h_t: f64) -> Result<Self> {
        model.validate()?;
        if !(h_t > 0.0) || !h_t.is_finite() {
            return Err(Error::config("time.h_t", "time step must be positive and finite"));
        }
        let n = model.grid.len();
        let h = model.grid.spacing();
        let mut rings: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        let mut offsets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for m in 0..n {
            let dist = model.grid.offset_distance(m);
            let d = delay_steps(dist, model.speed, h_t);
            rings.entry(d).or_insert_with(|| vec![0.0; n])[m] = h * model.kernel.value(dist);
            offsets.entry(d).or_default().push(m);
        }
        let d_max = *rings.keys().last().expect("at least one ring");
        Ok(RingKernelSet {
            n,
            d_max,
            rings,
            offsets,
        })
    }

    /// Grid size the rings were built for.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest delay level (in time steps) of any offset.
    pub fn max_delay_steps(&self) -> usize {
        self.d_max
    }

    /// Occupied delay levels and their circular kernels, in increasing order.
    pub fn rings(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.rings.iter().map(|(&d, w)| (d, w.as_slice()))
    }

    /// Circular offsets assigned to delay level `d`.
    pub fn offsets_at(&self, d: usize) -> Option<&[usize]> {
        self.offsets.get(&d).map(|v| v.as_slice())
    }

    /// Sum of all ring entries: `h Σ_m K(dist(m))`, the total mass of the
    /// discretised kernel.
    pub fn total_mass(&self) -> f64 {
        self.rings.values().flat_map(|w| w.iter()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bump_benchmark_model() -> ModelSpec {
        ModelSpec {
            grid: DomainGrid::new(50.0, 100).unwrap(),
            kernel: KernelSpec::default(),
            firing: FiringRateSpec::default(),
            input: InputSpec::bump_benchmark(),
            alpha: 1.0,
            speed: f64::INFINITY,
        }
    }

    #[test]
    fn grid_benchmark_dimensions() {
        let g = DomainGrid::new(50.0, 100).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.point(0), -50.0);
        assert_eq!(g.point(99), 49.0);
    }

    #[test]
    fn grid_two_points() {
        let g = DomainGrid::new(std::f64::consts::PI, 2).unwrap();
        assert_relative_eq!(g.spacing(), std::f64::consts::PI);
        assert_relative_eq!(g.point(0), -std::f64::consts::PI);
        assert_relative_eq!(g.point(1), 0.0);
    }

    #[test]
    fn grid_circular_distance_wraps() {
        let g = DomainGrid::new(1.0, 4).unwrap();
        // offset 3 wraps: min(3, 1) * 0.5
        assert_eq!(g.circular_distance(0, 3), 0.5);
        assert_eq!(g.circular_distance(3, 0), 0.5);
        assert_eq!(g.circular_distance(0, 2), 1.0);
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(DomainGrid::new(0.0, 100).is_err());
        assert!(DomainGrid::new(-1.0, 100).is_err());
        assert!(DomainGrid::new(1.0, 3).is_err());
        assert!(DomainGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn grid_spacing_times_n_is_2l() {
        for &(l, n) in &[(50.0, 100usize), (1.0, 4), (7.3, 62), (0.1, 1000)] {
            let g = DomainGrid::new(l, n).unwrap();
            assert_relative_eq!(g.spacing() * n as f64, 2.0 * l, max_relative = 1e-12);
        }
    }

    #[test]
    fn kernel_benchmark_values() {
        let k = KernelSpec::default();
        assert_eq!(k.value(0.0), 2.0);
        // 2 e^{-0.8} (0.08 sin π + cos π) = -2 e^{-0.8}
        assert_relative_eq!(k.value(10.0), -2.0 * (-0.8f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(k.value(10.0), -0.898_657_928_234_443_1, max_relative = 1e-12);
        assert_eq!(k.value(-10.0), k.value(10.0));
    }

    #[test]
    fn heaviside_threshold_is_inactive() {
        let s = FiringRateSpec::Heaviside { threshold: 0.0 };
        assert_eq!(s.rate(-1.0), 0.0);
        // exact threshold stays inactive; see the type-level comment
        assert_eq!(s.rate(0.0), 0.0);
        assert_eq!(s.rate(1e-300), 1.0);
    }

    #[test]
    fn sigmoid_midpoint() {
        let s = FiringRateSpec::Sigmoid {
            threshold: 2.0,
            slope: 5.0,
        };
        assert_eq!(s.rate(2.0), 0.5);
    }

    #[test]
    fn input_benchmark_values() {
        let i = InputSpec::bump_benchmark();
        assert_relative_eq!(i.value(0.0, 0.0), 4.60033, max_relative = 1e-12);
        // far away the Gaussian vanishes
        assert_relative_eq!(i.value(1e6, 0.0), -3.39967, max_relative = 1e-12);
        assert_eq!(InputSpec::Zero.value(3.0, 7.0), 0.0);
    }

    #[test]
    fn delay_steps_examples() {
        assert_eq!(delay_steps(0.0, 1.0, 0.02), 0);
        assert_eq!(delay_steps(0.0, f64::INFINITY, 0.02), 0);
        // τ/h_t = 50 exactly
        assert_eq!(delay_steps(1.0, 1.0, 0.02), 50);
        // τ/h_t = 51.5: the fractional part ties at 0.5 and rounds up
        assert_eq!(delay_steps(1.03, 1.0, 0.02), 52);
    }

    #[test]
    fn ring_kernels_infinite_speed_single_ring() {
        let model = bump_benchmark_model();
        let rings = RingKernelSet::build(&model, 0.02).unwrap();
        assert_eq!(rings.max_delay_steps(), 0);
        assert_eq!(rings.rings().count(), 1);
        let (_, w) = rings.rings().next().unwrap();
        assert!(w.iter().all(|&x| x != 0.0 || x == 0.0));
        assert_eq!(rings.offsets_at(0).unwrap().len(), 100);
    }

    #[test]
    fn ring_kernels_delay_levels_by_hand() {
        // N=4, l=1, v=1, h_t=0.25: offsets at distances {0, 0.5, 1.0, 0.5}
        // land on delay levels {0, 2, 4, 2}.
        let model = ModelSpec {
            grid: DomainGrid::new(1.0, 4).unwrap(),
            kernel: KernelSpec::default(),
            firing: FiringRateSpec::default(),
            input: InputSpec::Zero,
            alpha: 1.0,
            speed: 1.0,
        };
        let rings = RingKernelSet::build(&model, 0.25).unwrap();
        let levels: Vec<usize> = rings.rings().map(|(d, _)| d).collect();
        assert_eq!(levels, vec![0, 2, 4]);
        assert_eq!(rings.offsets_at(0).unwrap(), &[0]);
        assert_eq!(rings.offsets_at(2).unwrap(), &[1, 3]);
        assert_eq!(rings.offsets_at(4).unwrap(), &[2]);
        assert_eq!(rings.max_delay_steps(), 4);
    }

    #[test]
    fn ring_kernels_conserve_mass() {
        let model = bump_benchmark_model();
        let rings = RingKernelSet::build(&model, 0.02).unwrap();
        let h = model.grid.spacing();
        let direct: f64 = (0..100)
            .map(|m| h * model.kernel.value(model.grid.offset_distance(m)))
            .sum();
        assert_relative_eq!(rings.total_mass(), direct, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn kernel_is_even(x in -200.0f64..200.0) {
            let k = KernelSpec::default();
            prop_assert_eq!(k.value(x), k.value(-x));
            let g = KernelSpec::Gaussian { amplitude: 1.3, width: 7.0 };
            prop_assert_eq!(g.value(x), g.value(-x));
        }

        #[test]
        fn firing_rate_bounded_and_monotone(mut us in proptest::collection::vec(-50.0f64..50.0, 2..40)) {
            us.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for spec in [
                FiringRateSpec::Heaviside { threshold: 0.3 },
                FiringRateSpec::Sigmoid { threshold: -1.0, slope: 2.5 },
            ] {
                let rates: Vec<f64> = us.iter().map(|&u| spec.rate(u)).collect();
                for w in rates.windows(2) {
                    prop_assert!(w[0] <= w[1]);
                }
                for r in rates {
                    prop_assert!((0.0..=1.0).contains(&r));
                }
            }
        }

        #[test]
        fn delay_steps_monotone(d1 in 0.0f64..100.0, d2 in 0.0f64..100.0,
                                v1 in 0.1f64..50.0, v2 in 0.1f64..50.0,
                                h_t in 0.001f64..1.0) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(delay_steps(lo, v1, h_t) <= delay_steps(hi, v1, h_t));
            let (slow, fast) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
            prop_assert!(delay_steps(d1, fast, h_t) <= delay_steps(d1, slow, h_t));
            if d1 / v1 < 0.5 * h_t {
                prop_assert_eq!(delay_steps(d1, v1, h_t), 0);
            }
        }

        #[test]
        fn ring_partition_conserves_mass(n in 1usize..40, v in 0.5f64..20.0, h_t in 0.01f64..0.5) {
            let n = 2 * n;
            let model = ModelSpec {
                grid: DomainGrid::new(10.0, n).unwrap(),
                kernel: KernelSpec::default(),
                firing: FiringRateSpec::default(),
                input: InputSpec::Zero,
                alpha: 1.0,
                speed: v,
            };
            let rings = RingKernelSet::build(&model, h_t).unwrap();
            let h = model.grid.spacing();
            let direct: f64 = (0..n).map(|m| h * model.kernel.value(model.grid.offset_distance(m))).sum();
            prop_assert!((rings.total_mass() - direct).abs() <= 1e-12 * direct.abs().max(1.0));
            // every offset appears exactly once across rings
            let mut seen = vec![false; n];
            for (_, offs) in rings.offsets.iter() {
                for &m in offs {
                    prop_assert!(!seen[m]);
                    seen[m] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
            // d_max h_t stays within half a step of the maximal circular delay
            let tau_max = model.max_delay();
            prop_assert!(rings.max_delay_steps() as f64 * h_t <= tau_max + 0.5 * h_t);
        }
    }
}
