//! Quadruple-differential de Rham complexes of quotient stacks presented by
//! flat groupoids, with exact cohomology and spectral sequence computations.

#![allow(clippy::needless_range_loop)]

pub mod action;
pub mod complex;
pub mod engine;
pub mod error;
pub mod field;
pub mod group;
pub mod identities;
pub mod model;
pub mod natural;
pub mod registry;
pub mod sector;
pub mod simplicial;
pub mod space;
pub mod structure;

pub use quaddr_exact as exact;
