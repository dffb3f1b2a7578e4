//! Closed form for the Rayleigh-weighted Marcum integral
//!
//!   ∫₀^∞ 2t · Q₁(a·t, b) · e^{−c t²} dt
//!     = e^{−b²/2}/c + e^{−c b²/(a²+2c)}/c · (1 − e^{−a² b²/(2a² + 4c)}),
//!
//! a Nuttall-style integral (cf. Nuttall, "Some integrals involving the Q_M
//! function", 1975). The two exponent groups multiply back to e^{−b²/2}, so
//! the expression collapses algebraically to e^{−c b²/(a²+2c)}/c; the grouped
//! form is kept because each factor is a probability weight in the derivation
//! and the grouping is numerically harmless.

use crate::{Error, Result};

/// Evaluates ∫₀^∞ 2t Q₁(at, b) e^{−ct²} dt in closed form.
///
/// Degenerate checks: (a, 0, c) → 1/c and (0, b, c) → e^{−b²/2}/c.
///
/// # Errors
///
/// Returns a domain error unless a ≥ 0, b ≥ 0, c > 0, all finite.
pub fn nuttall_integral(a: f64, b: f64, c: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || !c.is_finite() || a < 0.0 || b < 0.0 || c <= 0.0 {
        return Err(Error::domain(format!(
            "nuttall_integral requires a >= 0, b >= 0, c > 0, got ({a}, {b}, {c})"
        )));
    }
    let a2 = a * a;
    let b2 = b * b;
    let first = (-0.5 * b2).exp() / c;
    let second = (-c * b2 / (a2 + 2.0 * c)).exp() / c
        * (1.0 - (-a2 * b2 / (2.0 * a2 + 4.0 * c)).exp());
    Ok(first + second)
}
