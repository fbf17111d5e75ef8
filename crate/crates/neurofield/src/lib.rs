//! Simulator for stochastic neural field equations with space-dependent
//! transmission delays.
//!
//! The field `U(x, t)` on a periodic one-dimensional domain evolves by
//!
//! ```text
//! dU(x) = [ I(x,t) - α U(x) + ∫ K(|x-y|) S(U(y, t - τ(x,y))) dy ] dt + ε dW(x)
//! ```
//!
//! with a connectivity kernel `K`, a firing rate `S`, a heterogeneous
//! input `I`, transmission delays `τ = |x-y|/v`, and a spatially
//! correlated Q-Wiener noise `W`. The discretisation is spectral: fields
//! live on `N` grid points, the delayed integral becomes one circular
//! convolution per delay level (evaluated by FFT, with a direct O(N²)
//! reference), time stepping is semi-implicit Euler–Maruyama, and noise
//! increments are synthesized from their covariance eigenvalues.
//!
//! ```
//! use neurofield::config::RunConfig;
//! use neurofield::noise::RngStream;
//! use neurofield::solver::{run_path, PathParams};
//!
//! // the multi-bump benchmark: deterministic relaxation from zero
//! let cfg = RunConfig::preset("paper-3.1").unwrap();
//! let runtime = cfg.build_runtime().unwrap();
//! let recorder = cfg.recorder();
//! let params = PathParams {
//!     model: &cfg.model,
//!     rings: &runtime.rings,
//!     noise: &cfg.noise,
//!     eigenvalues: &runtime.eigenvalues,
//!     time: cfg.time,
//!     u0: &runtime.u0,
//!     method: cfg.solver.nonlinear,
//!     recorder: &recorder,
//! };
//! let record = run_path(&params, &mut RngStream::for_path(cfg.noise.master_seed, 0)).unwrap();
//! assert!(record.u_max.last().unwrap() > record.u_min.last().unwrap());
//! ```

pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod noise;
pub mod solver;

pub use error::{Error, Result};
