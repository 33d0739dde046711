#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod kernels;
pub mod lattice;
pub mod ops;
pub mod numeric;
pub mod supersonic;

pub use error::{Error, Result};
