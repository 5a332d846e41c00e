#![allow(clippy::needless_range_loop)]

pub mod chartforms;
pub mod dsl;
pub mod error;
pub mod linalg;
pub mod locus;
pub mod pointcheck;
pub mod rng;
pub mod suite;
pub mod symexpr;
pub mod sympl;

pub use error::{Error, Result};
