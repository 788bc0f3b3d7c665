//! Zeros of random polynomials: sampling, root finding, angular discrepancy
//! and verification of explicit discrepancy bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bases;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod polycore;
pub mod seed;
pub mod special;
pub mod zerostats;

pub use error::{Error, Result};
