//! Jump-diffusion CIR process
//!
//! `dX_t = a(θ - X_t)dt + σ√X_t dW_t + dJ_t` with `J` a pure-jump
//! subordinator. The crate provides the affine characteristic function in
//! closed form (with an ODE oracle), the CIR transition density, the Bessel
//! distribution and compound Poisson decomposition of the jump component,
//! exact and Euler samplers, Fourier-inverted transition densities with the
//! lower bound `p ≥ C(t) f`, and Monte Carlo ergodicity diagnostics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besseldist;
pub mod charfn;
pub mod cir;
pub mod ergodicity;
pub mod error;
pub mod inversion;
pub mod jumppart;
pub mod model;
pub mod ode;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
pub use model::{JcirParams, JumpDensity, LevyDensity, LevyMeasure, PointMass};
