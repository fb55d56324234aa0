//! Extended-kernel and path-integral Fredholm determinants for determinantal
//! point processes, at three levels: exact path ensembles on weighted graphs,
//! finite-dimensional operator families, and quadrature-discretized continuum
//! kernels (Hermite/Dyson and Airy).

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod airy;
pub mod airy2;
pub mod defaults;
pub mod dyson;
pub mod error;
pub mod exact;
pub mod fredholm;
pub mod graph;
pub mod hermite;
pub mod kernel;
pub mod linalg;
pub mod operator;
pub mod profile;
pub mod quadrature;

pub use error::{Error, Result};
pub use exact::Rational;
pub use linalg::{Matrix, Scalar};
