// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod error;
pub mod eval;
pub mod filters;
pub mod frontend;
pub mod mapping;
pub mod metric;
pub mod modulation;
pub mod resample;
pub mod signal;
pub mod ssi;
pub mod stimuli;
pub mod wav;

pub use error::{GesiError, Result};
pub use metric::{gesi_predict, GesiConfig, MetricResult, PreparedReference};

/// Version tag written into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;
