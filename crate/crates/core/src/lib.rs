//! Classical Kolmogorov–Sinai entropy and its deformation-quantization
//! analogue, the entropy of the Moyal flow, on flat two-dimensional phase spaces.

pub mod algebraic;
pub mod entropy;
pub mod error;
pub mod exact;
pub mod flow;
pub mod geometry;
pub mod starproduct;

pub use error::{Error, Result};
