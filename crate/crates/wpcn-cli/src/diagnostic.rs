//! Numerical location of the transition abscissa that the step-function
//! approximation replaces: the inflection point of [1 - Q_p(a, b)]^L in a.
//!
//! For fixed b the term falls monotonically from 1 to 0 as a grows, so its
//! derivative has a single interior minimum (the steepest descent, where the
//! second derivative crosses zero). A coarse scan brackets that minimum and a
//! golden-section pass refines it; both stages work on a central-difference
//! derivative of the exact Marcum term, so the located abscissa carries no
//! approximation beyond the difference step itself.

use wpcn_core::specfun::marcum_q;

use crate::CliError;

/// Coarse-scan resolution across the search bracket.
const SCAN_POINTS: usize = 400;
/// Golden-section iterations; each multiplies the bracket width by ~0.618.
const REFINE_STEPS: usize = 120;
/// Golden ratio conjugate.
const PHI: f64 = 0.618_033_988_749_894_9;

fn term(b: f64, draws: i32, shape: u32, a: f64) -> Result<f64, CliError> {
    let q = marcum_q(shape, a, b)?;
    Ok((1.0 - q).powi(draws))
}

/// Central-difference slope of the selection term at `a`.
fn slope(b: f64, draws: i32, shape: u32, a: f64, h: f64) -> Result<f64, CliError> {
    Ok((term(b, draws, shape, a + h)? - term(b, draws, shape, a - h)?) / (2.0 * h))
}

/// Numerically located inflection abscissa of [1 - Q_p(a, b)]^L, the target
/// the closed-form step threshold approximates.
///
/// # Errors
///
/// Returns a configuration error for b <= 0 or non-finite, `draws` = 0,
/// `shape` = 0, or a shape that does not fit the Marcum order type.
pub fn numeric_inflection(b: f64, draws: usize, shape: usize) -> Result<f64, CliError> {
    if !b.is_finite() || b <= 0.0 {
        return Err(CliError::Config(format!(
            "inflection search requires finite b > 0, got {b}"
        )));
    }
    if draws == 0 || shape == 0 {
        return Err(CliError::Config(format!(
            "inflection search requires draws >= 1 and shape >= 1, got {draws} and {shape}"
        )));
    }
    let shape_u32 = u32::try_from(shape)
        .map_err(|_| CliError::Config(format!("shape {shape} exceeds the Marcum order range")))?;
    let draws_i32 = i32::try_from(draws)
        .map_err(|_| CliError::Config(format!("draw count {draws} exceeds the exponent range")))?;
    let h = 1e-4 * (1.0 + b);
    // The transition sits near a = b, shifted left by selection; the bracket
    // spans from almost zero to well past b so every shift stays inside.
    let lo = 2.0 * h;
    let hi = 2.0 * b + 4.0 * shape as f64 + 2.0 * draws as f64 + 10.0;
    let mut best_i = 0usize;
    let mut best_slope = f64::INFINITY;
    for i in 0..=SCAN_POINTS {
        let a = lo + (hi - lo) * i as f64 / SCAN_POINTS as f64;
        let g = slope(b, draws_i32, shape_u32, a, h)?;
        if g < best_slope {
            best_slope = g;
            best_i = i;
        }
    }
    let step = (hi - lo) / SCAN_POINTS as f64;
    let mut left = (lo + step * best_i as f64 - step).max(lo);
    let mut right = (lo + step * best_i as f64 + step).min(hi);
    let mut c = right - PHI * (right - left);
    let mut d = left + PHI * (right - left);
    let mut gc = slope(b, draws_i32, shape_u32, c, h)?;
    let mut gd = slope(b, draws_i32, shape_u32, d, h)?;
    for _ in 0..REFINE_STEPS {
        if gc < gd {
            right = d;
            d = c;
            gd = gc;
            c = right - PHI * (right - left);
            gc = slope(b, draws_i32, shape_u32, c, h)?;
        } else {
            left = c;
            c = d;
            gc = gd;
            d = left + PHI * (right - left);
            gd = slope(b, draws_i32, shape_u32, d, h)?;
        }
        if right - left < 1e-10 * (1.0 + right) {
            break;
        }
    }
    Ok(0.5 * (left + right))
}

// ---------------------------------------------------------------------------
#[cfg(test)]
mod tests {
    use super::*;
    use wpcn_core::analytic::sfa_threshold;

    #[test]
    fn locates_the_steepest_descent_in_the_validity_region() {
        // Deep in the approximation's validity region (large b) the numeric
        // inflection and the closed-form threshold agree tightly.
        let numeric = numeric_inflection(100.0, 4, 4).unwrap();
        let closed = sfa_threshold(100.0, 4, 4).unwrap().value;
        let rel = ((closed - numeric) / numeric).abs();
        assert!(rel < 0.02, "numeric {numeric}, closed {closed}, rel {rel}");

        let single = numeric_inflection(100.0, 1, 4).unwrap();
        let closed_single = sfa_threshold(100.0, 1, 4).unwrap().value;
        let rel = ((closed_single - single) / single).abs();
        assert!(rel < 0.02, "numeric {single}, closed {closed_single}, rel {rel}");
    }

    #[test]
    fn more_draws_shift_the_transition_left() {
        let one = numeric_inflection(50.0, 1, 4).unwrap();
        let four = numeric_inflection(50.0, 4, 4).unwrap();
        let eight = numeric_inflection(50.0, 8, 4).unwrap();
        assert!(four < one, "L=4 at {four} should sit left of L=1 at {one}");
        assert!(eight < four, "L=8 at {eight} should sit left of L=4 at {four}");
    }

    #[test]
    fn is_deterministic() {
        let a = numeric_inflection(20.0, 4, 1).unwrap();
        let b = numeric_inflection(20.0, 4, 1).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn rejects_out_of_domain_arguments() {
        assert!(numeric_inflection(0.0, 4, 4).is_err());
        assert!(numeric_inflection(-1.0, 4, 4).is_err());
        assert!(numeric_inflection(f64::NAN, 4, 4).is_err());
        assert!(numeric_inflection(100.0, 0, 4).is_err());
        assert!(numeric_inflection(100.0, 4, 0).is_err());
    }
}
