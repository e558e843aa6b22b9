pub mod duhamel;
pub mod criteria;
pub mod error;
pub mod fit;
pub mod kernels;
pub mod lab;
pub mod quad;
pub mod rvf;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{ExactField, Scalar};

pub type Field64 = spectral::Field<f64>;
pub type GridSpec64 = spectral::GridSpec<f64>;
pub type ProblemSpec64 = duhamel::ProblemSpec<f64>;
