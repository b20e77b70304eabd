//! Neumann eigenvalues of triangles and rectangles, and executable checks of
//! the eigenvalue-sum inequalities comparing them with the equilateral triangle.

pub mod counting;
pub mod error;
pub mod exact_spectra;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod mutf;
pub mod output;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
