//! Special functions underpinning the outage analysis: Bessel J₀/I_p/K_p,
//! the generalized Marcum Q, incomplete gamma functions, Gauss–Laguerre
//! quadrature, and a closed-form Rayleigh-weighted Marcum integral.
//!
//! Everything here is deterministic, allocation-light, and either returns a
//! finite value or a typed [`crate::Error`]; no NaN escapes a public entry
//! point for in-domain arguments. Implementations are hand-rolled from the
//! standard numerical literature (Abramowitz & Stegun, DLMF, Numerical
//! Recipes) because the analysis needs controlled accuracy in regimes where
//! general-purpose crates either stop (integer-order K_p at large argument,
//! Marcum Q at noncentrality ~10⁴) or lose precision (high-order
//! Gauss–Laguerre rules).

mod bessel;
mod gamma;
mod marcum;
mod nuttall;
mod quadrature;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_j0, bessel_k, log_bessel_i};
pub use gamma::{
    gamma, gamma_p, gamma_q, ln_gamma, lower_incomplete_gamma, upper_incomplete_gamma,
};
pub use marcum::marcum_q;
pub use nuttall::nuttall_integral;
pub use quadrature::{adaptive_simpson, gauss_laguerre, QuadratureRule, MAX_GLQ_ORDER};
