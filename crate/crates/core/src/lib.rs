#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::type_complexity,
    clippy::needless_range_loop
)]

pub mod cli;
pub mod error;
pub mod fields;
pub mod lab;
pub mod numerics;
pub mod opalg;
pub mod quad;
pub mod weights;

pub use error::{Error, Result};
