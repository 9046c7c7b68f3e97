//! Autoguidance: fixed-weight fusion, the main/weak discrepancy signals, the
//! adaptive guidance network with its tail bonus, and guided sampling.

mod aan;
mod sampling;
mod signals;

pub use aan::{
    aan_weight, adaptive_weight, AanPass, GuidanceHyper, GuidanceNet, SignalMask, TailScaling, DEFAULT_AAN_HIDDEN,
};
pub use sampling::{ag_sample, guided_sample, ConstantWeight, GuidanceWeight};
pub use signals::{fuse, signals, signals_with_grad, tail_score, GuidanceSignals, SignalsWithGrad, RATIO_EPS};
