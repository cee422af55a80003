//! Numerical building blocks: adaptive quadrature and bracketed root finding.

mod bisect;
mod quadrature;

pub use bisect::{bisect, Bracket};
pub use quadrature::{integrate, Integral, QuadratureOptions};
