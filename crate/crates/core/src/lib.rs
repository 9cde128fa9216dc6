//! Quantum invariants of pseudo-Anosov mapping classes of punctured
//! surfaces at odd roots of unity.
//!
//! The pipeline: an ideal triangulation of the surface and a flip-word
//! presentation of the mapping class produce a layered triangulation of
//! the mapping torus; its gluing equations are solved to high precision;
//! shear-bend coordinates are lifted to a monodromy-invariant character;
//! and three intertwiners are assembled, whose determinant-normalized
//! traces are the invariants this crate reports alongside a numerical
//! verification that the big intertwiner decomposes into the blockwise
//! tensor product of the other two.

pub mod error;
pub mod numeric;
pub mod qtorus;
pub mod surface;
pub mod geometry;
pub mod invariants;

pub use error::{Error, Result};
pub use numeric::{DenseMatrix, GPMatrix, IMat, LogVal, Prec, RootOfUnity};
