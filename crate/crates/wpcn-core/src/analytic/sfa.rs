//! Step-function approximation (SFA) thresholds.
//!
//! Selection terms of the form [1 - Q_p(a, b)]^L, viewed as functions of the
//! Rice-like offset a for fixed b, rise from 0 to 1 over a narrow transition
//! around an abscissa δ. The SFA replaces the whole term by a unit step at δ,
//! turning nested integrals into incomplete-gamma evaluations. The threshold
//! is the inflection point of the term, approximated by a tangent-line
//! construction for L ≥ 2 draws and by solving the single-draw stationarity
//! condition in closed form for L = 1.

use super::SQRT_2PI;
use crate::{Error, Result};

/// Which closed form produced an SFA threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SfaForm {
    /// Tangent-line correction aggregating L ≥ 2 independent draws.
    MultiPort,
    /// Single-draw quadratic solution (L = 1).
    SinglePort,
}

/// An SFA threshold value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfaThreshold {
    /// Step abscissa δ > 0.
    pub value: f64,
    /// Which construction produced it.
    pub form: SfaForm,
}

/// Raw threshold of [1 - Q_p(a, b)]^L as a function of a, without validity
/// checks: the L ≥ 2 tangent-line form, or the L = 1 quadratic root.
///
/// Outside the approximation's validity region (b not large enough relative
/// to L and p) the rational form can pass through a pole; callers that only
/// need a best-effort value (the SFA evaluators, mirroring how the printed
/// approximations behave there) use this directly.
pub(crate) fn delta_step(b: f64, draws: usize, shape: usize) -> f64 {
    let p = shape as f64;
    if draws >= 2 {
        let lm1 = draws as f64 - 1.0;
        let num = lm1 / SQRT_2PI * b + p - 0.5;
        let den = lm1 * (p - 0.5) / SQRT_2PI + (p - 0.5) / b - b;
        b + num / den
    } else {
        0.5 * (b + (b * b + 4.0 * p - 2.0).sqrt())
    }
}

/// SFA threshold δ for the selection term [1 - Q_p(a, b)]^L.
///
/// `b` is the fixed second Marcum argument, `draws` the number L of
/// independent draws the selection aggregates, `shape` the Marcum order p.
///
/// # Errors
///
/// Returns a domain error for b ≤ 0, non-finite b, `draws` = 0, or
/// `shape` = 0, and for parameter combinations outside the approximation's
/// validity region where the construction yields a non-finite or non-positive
/// abscissa.
pub fn sfa_threshold(b: f64, draws: usize, shape: usize) -> Result<SfaThreshold> {
    if !b.is_finite() || b <= 0.0 {
        return Err(Error::domain(format!(
            "sfa_threshold requires finite b > 0, got {b}"
        )));
    }
    if draws == 0 || shape == 0 {
        return Err(Error::domain(format!(
            "sfa_threshold requires draws >= 1 and shape >= 1, got {draws} and {shape}"
        )));
    }
    let value = delta_step(b, draws, shape);
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::domain(format!(
            "sfa_threshold({b}, {draws}, {shape}) = {value} lies outside the \
             approximation's validity region"
        )));
    }
    let form = if draws >= 2 { SfaForm::MultiPort } else { SfaForm::SinglePort };
    Ok(SfaThreshold { value, form })
}

// ---------------------------------------------------------------------------
#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_draw_closed_forms() {
        // p = 1, b -> 0+ tends to sqrt(2)/2.
        let t = sfa_threshold(1e-12, 1, 1).unwrap();
        assert_eq!(t.form, SfaForm::SinglePort);
        assert_relative_eq!(t.value, 2.0_f64.sqrt() / 2.0, max_relative = 1e-9);
        // p = 4, b = 100: (b + sqrt(b^2 + 14)) / 2.
        let t = sfa_threshold(100.0, 1, 4).unwrap();
        assert_relative_eq!(
            t.value,
            0.5 * (100.0 + 10014.0_f64.sqrt()),
            max_relative = 1e-14
        );
    }

    #[test]
    fn multi_draw_form_and_limits() {
        let t = sfa_threshold(100.0, 4, 4).unwrap();
        assert_eq!(t.form, SfaForm::MultiPort);
        // For large b the threshold stays within the transition region near b.
        assert!(t.value > 90.0 && t.value < 110.0, "delta = {}", t.value);
        // More draws push the step left (selection of the best of L draws
        // fails only when all fail).
        let t8 = sfa_threshold(100.0, 8, 4).unwrap();
        assert!(t8.value < t.value);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(sfa_threshold(0.0, 1, 1).is_err());
        assert!(sfa_threshold(-1.0, 1, 1).is_err());
        assert!(sfa_threshold(f64::NAN, 1, 1).is_err());
        assert!(sfa_threshold(1.0, 0, 1).is_err());
        assert!(sfa_threshold(1.0, 1, 0).is_err());
    }

    #[test]
    fn pole_region_is_a_typed_error() {
        // p = 4, L = 11: the rational form has a pole near
        // b* = (t + sqrt(t^2 + 4p - 2))/2 with t = 10 * 3.5 / sqrt(2 pi);
        // just above it the construction turns negative.
        let t = 10.0 * 3.5 / SQRT_2PI;
        let pole = 0.5 * (t + (t * t + 14.0).sqrt());
        assert!(sfa_threshold(pole + 0.01, 11, 4).is_err());
    }
}
