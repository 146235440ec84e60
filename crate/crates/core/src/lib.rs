//! Spectra, pseudo-Hermitian gauges, skin-effect diagnostics and non-Bloch
//! phase boundaries of one-dimensional nonreciprocal tight-binding chains.
//!
//! Every numerical type is generic over a [`Real`] scalar (`f32` or `f64`);
//! the aliases at the crate root fix the double-precision instantiation used
//! by the command-line tool.

pub mod classify;
pub mod eig;
pub mod error;
pub mod io;
pub mod lattice;
pub mod nonbloch;
pub mod oracle;
pub mod pointgap;
pub mod scalar;
pub mod skin;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex = num_complex::Complex64;
pub type ModelSpec = lattice::ModelSpec<f64>;
pub type HoppingChain = lattice::HoppingChain<f64>;
pub type DenseMatrix = lattice::DenseMatrix<f64>;
pub type Spectrum = eig::Spectrum<f64>;
