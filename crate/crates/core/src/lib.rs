//! Low-rank approximation and variable concentration of homogeneous
//! polynomials (equivalently, symmetric tensors).
//!
//! The numeric core is generic over [`Scalar`] (`f32` and `f64`); the `*64`
//! aliases below are what the command-line tool and most callers use.

mod compiled;
pub mod concentration;
pub mod error;
pub mod frame;
pub mod gen;
pub mod json;
pub mod linalg;
pub mod low_rank;
pub mod oracle;
pub mod poly;
pub mod scalar;
pub mod sphere;
mod tensor;

pub use error::{Error, Result};
pub use frame::Frame;
pub use linalg::Mat;
pub use poly::{multinomial, Exponent, HomPoly};
pub use scalar::Scalar;

pub type HomPoly64 = HomPoly<f64>;
pub type HomPoly32 = HomPoly<f32>;
pub type Frame64 = Frame<f64>;
pub type Mat64 = Mat<f64>;
pub type LowRankApprox64 = low_rank::LowRankApprox<f64>;
pub type ConcentrationReport64 = concentration::ConcentrationReport<f64>;
