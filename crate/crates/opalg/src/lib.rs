//! opalg: a finite-dimensional operator-algebra workbench.
//!
//! The crate builds *-algebras of complex matrices from observables, pairs
//! them with density-matrix states, and carries the constructions that
//! connect the two pictures: cyclic (GNS) representations and faithful
//! direct sums, superselection-sector decompositions, Robertson and
//! complementarity bounds with a multistart sphere optimizer, an exact
//! normal-ordered Poisson algebra whose central element switches between
//! classical and quantum specializations, and finite discrete Weyl systems
//! with numerical intertwiners.
//!
//! Start with the runnable programs in `examples/`; each one exercises a
//! single capability end to end. The `opalg` binary exposes the same
//! operations as subcommands over JSON problem documents.

pub mod algebra;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod gns;
pub mod lambda;
pub mod matrix;
pub mod optimize;
pub mod rng;
pub mod sectors;
pub mod states;
pub mod weyl;

pub use algebra::StarAlgebra;
pub use error::{Error, Result};
pub use matrix::{C64, CVector, ComplexMatrix};
pub use states::State;

/// Default tolerance for structural invariants (orthonormality, hermiticity,
/// state validity) unless a caller overrides it.
pub const DEFAULT_TOL: f64 = 1e-10;
