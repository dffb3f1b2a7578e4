//! Gamma-family kernels: log-gamma, gamma, and the incomplete gamma functions.
//!
//! `ln_gamma` uses the Lanczos approximation (g = 7, 9 terms), accurate to
//! ~15 significant digits over the positive reals. The incomplete gamma pair
//! follows Numerical Recipes: the ascending series `gser` for x < a + 1 and
//! the Lentz modified continued fraction `gcf` otherwise, both evaluating the
//! regularized functions P(a,x) and Q(a,x) with P + Q = 1.
//!
//! The unregularized forms Φ(a,x) = γ(a,x) (lower) and Γ(a,x) (upper) are thin
//! wrappers that multiply by Γ(a); they satisfy Φ(a,x) + Γ(a,x) = Γ(a) to
//! ~1e-14 relative.

use crate::{Error, Result};

/// Lanczos coefficients for g = 7 (Godfrey's 9-term set).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
///
/// Lanczos approximation with g = 7; relative error ~1e-15 on (0, 1e300).
///
/// # Errors
///
/// Returns a domain error for x ≤ 0 or non-finite x.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

/// `ln_gamma` without the domain check, for hot loops with known-valid input.
pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function Γ(x) for x > 0. Overflows to +∞ beyond x ≈ 171.6.
///
/// # Errors
///
/// Returns a domain error for x ≤ 0 or non-finite x.
pub fn gamma(x: f64) -> Result<f64> {
    Ok(ln_gamma(x)?.exp())
}

/// Iteration cap for the incomplete-gamma series and continued fraction.
/// Worst cases in this crate (a ~ 1500, x ~ 1250 inside the Marcum-Q series)
/// converge in a few hundred iterations.
const GAMMA_ITMAX: usize = 20_000;
const GAMMA_EPS: f64 = 1e-16;
/// Smallest representable pivot for the Lentz continued fraction.
const LENTZ_FPMIN: f64 = 1e-300;

/// Regularized lower incomplete gamma P(a, x) = γ(a,x)/Γ(a).
///
/// # Errors
///
/// Returns a domain error for a ≤ 0, x < 0, or non-finite input.
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check_inc_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(gser(a, x))
    } else {
        Ok(1.0 - gcf(a, x))
    }
}

/// Regularized upper incomplete gamma Q(a, x) = Γ(a,x)/Γ(a) = 1 − P(a,x).
///
/// # Errors
///
/// Returns a domain error for a ≤ 0, x < 0, or non-finite input.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check_inc_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gser(a, x))
    } else {
        Ok(gcf(a, x))
    }
}

/// Lower incomplete gamma Φ(a, x) = ∫₀ˣ t^{a−1} e^{−t} dt (unregularized).
///
/// # Errors
///
/// Returns a domain error for a ≤ 0, x < 0, or non-finite input.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(gamma_p(a, x)? * ln_gamma(a)?.exp())
}

/// Upper incomplete gamma Γ(a, x) = ∫ₓ^∞ t^{a−1} e^{−t} dt (unregularized).
///
/// # Errors
///
/// Returns a domain error for a ≤ 0, x < 0, or non-finite input.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(gamma_q(a, x)? * ln_gamma(a)?.exp())
}

fn check_inc_args(a: f64, x: f64) -> Result<()> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::domain(format!(
            "incomplete gamma requires a > 0, got a = {a}"
        )));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "incomplete gamma requires x >= 0, got x = {x}"
        )));
    }
    Ok(())
}

/// Ascending series for P(a, x); valid (fast-converging) for x < a + 1.
fn gser(a: f64, x: f64) -> f64 {
    let ln_pre = a * x.ln() - x - ln_gamma_unchecked(a);
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_ITMAX {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum.ln() + ln_pre).exp()
}

/// Lentz continued fraction for Q(a, x); valid for x ≥ a + 1.
fn gcf(a: f64, x: f64) -> f64 {
    let ln_pre = a * x.ln() - x - ln_gamma_unchecked(a);
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / LENTZ_FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_ITMAX {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < LENTZ_FPMIN {
            d = LENTZ_FPMIN;
        }
        c = b + an / c;
        if c.abs() < LENTZ_FPMIN {
            c = LENTZ_FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (ln_pre + h.ln()).exp()
}
