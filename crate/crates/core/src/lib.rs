//! Popularity-aware guided diffusion recommendation.
//!
//! The core is generic over [`numerics::Scalar`] (`f32` or `f64`). Training
//! and checkpoints use `f32`; gradient checks run in `f64`.

pub mod data;
pub mod diffusion;
pub mod error;
pub mod fairness;
pub mod guidance;
pub mod metrics;
pub mod numerics;
pub mod trainer;

pub use error::{Error, ErrorCategory, Result};

pub type DenseNet32 = numerics::DenseNet<f32>;
pub type DenseNet64 = numerics::DenseNet<f64>;
pub type Denoiser32 = diffusion::Denoiser<f32>;
pub type Denoiser64 = diffusion::Denoiser<f64>;
pub type GuidanceNet32 = guidance::GuidanceNet<f32>;
pub type GuidanceNet64 = guidance::GuidanceNet<f64>;
pub type Schedule32 = diffusion::DiffusionSchedule<f32>;
pub type Schedule64 = diffusion::DiffusionSchedule<f64>;
