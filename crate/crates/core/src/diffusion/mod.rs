//! Forward corruption, the x₀-predicting denoiser, the base reconstruction
//! loss and reverse sampling.

mod denoiser;
mod loss;
mod sampling;
mod schedule;

pub use denoiser::{timestep_embedding, Denoiser, Role, DEFAULT_EMB_DIM};
pub use loss::{base_loss, base_loss_fixed, draw_batch, reconstruction_error, DiffusionDraw};
pub use sampling::{
    posterior_coefficients, posterior_mean, posterior_step, q_sample, reverse_chain, sample_unguided, ChainInit,
    SamplerOptions, BLOWUP_LIMIT,
};
pub use schedule::{build_schedule, DiffusionSchedule};
