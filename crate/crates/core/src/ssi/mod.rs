//! Reference F0 tracking and the frame-based channel weighting derived from it.

mod f0;
mod weights;

pub use f0::{estimate_f0, estimate_f0_with, F0Settings, F0Track, UNVOICED_F0_HZ};
pub use weights::{raw_ssi_weight, ssi_weights, WeightMatrix, WeightNormalization, DEFAULT_H_MAX};
