//! Integrate-and-fire time-encoding receiver for PAM over AWGN.
//!
//! A block of M-PAM symbols is shaped by a Gaussian pulse, corrupted by white
//! Gaussian noise and sampled by an integrate-and-fire time encoding machine
//! (IF-TEM). The receiver never reconstructs the waveform: per-symbol firing
//! counts and firing-time spans form a Gaussian linear model `y = P·s + Z'`
//! that a zero-forcing solve and a PAM slicer invert directly.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`.

// `!(x > 0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod scalar;

pub mod demod;
pub mod experiment;
pub mod noise;
pub mod numerics;
pub mod sampler;
pub mod signal;

pub use error::{Error, Result};
pub use numerics::DEFAULT_COND_CAP;
pub use scalar::Scalar;

pub type PamConstellation = signal::PamConstellation<f64>;
pub type GaussianPulse = signal::GaussianPulse<f64>;
pub type TxBlock = signal::TxBlock<f64>;
pub type NoiseProcess = noise::NoiseProcess<f64>;
pub type IftemParams = sampler::IftemParams<f64>;
pub type FiringRecord = sampler::FiringRecord<f64>;
pub type BlockObservation = demod::BlockObservation<f64>;
pub type BlockEstimate = demod::BlockEstimate<f64>;
pub type Matrix = numerics::Matrix<f64>;
pub type LeastSquaresSolution = numerics::LeastSquaresSolution<f64>;
