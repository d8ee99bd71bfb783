//! Exact arithmetic substrate: rationals, multivariate Laurent polynomials,
//! substitution homomorphisms between polynomial rings, and sparse matrices
//! over the rationals with fraction-free elimination.

pub mod error;
pub mod poly;
pub mod rational;
pub mod ringhom;
pub mod sparse;

pub use error::KernelError;
pub use poly::{LaurentPoly, Ring, Var, VarKind};
pub use rational::Rational;
pub use ringhom::RingHom;
pub use sparse::{KernelImage, SparseMatrix, SparseVec};
