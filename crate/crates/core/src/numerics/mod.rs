//! Quadrature and root-finding primitives.

mod quadrature;
mod roots;

pub use quadrature::{integrate, integrate_piecewise, CumulativeIntegral, QuadratureSpec};
pub use roots::{
    bisect, find_zeros, sign_changes, try_find_zeros_on_grid, uniform_grid, BisectionStop, Bracket,
};
