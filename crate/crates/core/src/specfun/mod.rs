//! Special functions needed by the closed-form classical solutions.

mod bessel;
mod dd;
mod gamma;
mod legendre;

pub use bessel::{bessel_j, bessel_j_derivative, SERIES_LIMIT};
pub use gamma::{gamma, gamma_complex, ln_gamma, rgamma};
pub use legendre::{
    legendre_p, legendre_p_with_derivative, ConicalDegree, LegendreValue, DEGRADED_BELOW,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("{what} {value} outside the supported domain")]
    Domain { what: &'static str, value: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}
