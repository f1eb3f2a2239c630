// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod forward;
pub mod geometry;
pub mod inversion;
pub mod layered_green;
pub mod oracle;
pub mod point;
pub mod quadrature;
pub mod specfun;

pub use layered_green::{LayeredGreen, Medium};
pub use point::Point;
