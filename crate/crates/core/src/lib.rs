//! Finite-dimensional workbench for commuting contractive tuples whose
//! pairwise Szegő operators vanish and whose product is pure.
//!
//! The crate builds explicit isometric dilations by multiplication
//! operators `M_{Φ_i}` with affine symbols `Φ_i(z) = U_i(P_i^⊥ + zP_i)` on a
//! vector-valued Hardy space, certifies the sharp von Neumann inequality over
//! the one-dimensional variety cut out by those symbols, and lifts commuting
//! contractions to contractive multipliers given by transfer-function
//! realizations. Every verification returns a [`Certificate`] of named
//! residuals rather than a bare boolean.

pub mod certificate;
pub mod circle;
pub mod dilation;
pub mod error;
pub mod gen;
pub mod hardy;
pub mod lifting;
pub mod linalg;
pub mod opcore;
pub mod tol;
pub mod variety;

pub use certificate::{Certificate, Residual};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use num_complex::Complex64;
pub use opcore::{ClassReport, ContractionTuple};
