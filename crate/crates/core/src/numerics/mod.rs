//! Dense-network numerics: MLP forward/backward, activations, temperature
//! softmax and entropy, Adam, a seeded PRNG and a finite-difference checker.

mod activation;
mod adam;
mod gradcheck;
mod net;
mod prob;
mod rng;
mod scalar;

pub use activation::Activation;
pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{finite_diff_check, BlockError, GradCheckReport, ABS_FLOOR};
pub use net::{DenseNet, ForwardCache, Layer, NetGrads};
pub use prob::{shannon_entropy, softmax_entropy_grad, softmax_tau};
pub(crate) use prob::entropy_unchecked;
pub use rng::SeededRng;
pub use scalar::{cast_vec, dot, l2_norm, open_sigmoid, open_sigmoid_grad, sigmoid, squared_distance, Scalar};
