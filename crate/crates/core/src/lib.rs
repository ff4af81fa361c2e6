pub mod calculus;
pub mod error;
pub mod fm;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod operator;
pub mod quadrature;
pub mod rademacher;
pub mod random;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
