//! Constructive machinery for the toroidal n-queens hypergraph.

pub mod board;
pub mod decomposition;
pub mod error;
pub mod greedy;
pub mod hnf;
pub mod io;
pub mod lattice;
pub mod solvers;

pub use error::{Result, TorqError};
