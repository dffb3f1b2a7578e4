//! Bessel-family kernels: J₀, modified I_p and K_p for non-negative integer
//! order.
//!
//! - `bessel_j0` uses Miller's downward recurrence with the normalization
//!   J₀(x) + 2·Σ J_{2k}(x) = 1 (Numerical Recipes §5.5 technique); accuracy is
//!   machine-level for all argument sizes used here (|x| ≤ 2πW ≈ 200).
//! - `bessel_i` sums the ascending series (A&S 9.6.10); beyond x = 40 the
//!   summation runs in e^{−x}-scaled form outward from the peak term, which is
//!   what `bessel_i_scaled` and `log_bessel_i` expose directly.
//! - `bessel_k` uses the A&S 9.6.11 series for x < 3 and the Steed/Temme CF2
//!   continued fraction (Numerical Recipes §6.7, `bessik`) for x ≥ 3 to get
//!   K₀ and K₁, then the stable upward recurrence K_{p+1} = K_{p−1} + (2p/x)K_p.

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_EPS: f64 = 1e-17;
const CF2_MAXIT: usize = 10_000;

/// Bessel function of the first kind, order zero.
///
/// Evaluated by Miller's downward recurrence with the even-order sum
/// normalization; relative error is at machine level away from the zeros and
/// absolute error ~1e-15 near them.
///
/// # Errors
///
/// Returns a domain error for non-finite input.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("bessel_j0 requires finite x, got {x}")));
    }
    let ax = x.abs();
    if ax == 0.0 {
        return Ok(1.0);
    }
    if ax < 1e-8 {
        return Ok(1.0 - 0.25 * ax * ax);
    }
    // Start high enough that the trial solution has converged onto the minimal
    // solution by the time the recurrence reaches order 0.
    let m = (ax + 14.0 * ax.cbrt() + 30.0).ceil() as usize;
    let mut bjp = 0.0_f64;
    let mut bj = 1.0e-30_f64;
    let mut even_sum = 0.0_f64;
    for k in (1..=m).rev() {
        let bjm = (2.0 * k as f64 / ax) * bj - bjp;
        bjp = bj;
        bj = bjm;
        if bj.abs() > 1e100 {
            bj *= 1e-100;
            bjp *= 1e-100;
            even_sum *= 1e-100;
        }
        let order = k - 1;
        if order >= 2 && order % 2 == 0 {
            even_sum += 2.0 * bj;
        }
    }
    Ok(bj / (bj + even_sum))
}

/// Modified Bessel function of the first kind, I_p(x), integer order p ≥ 0.
///
/// Overflows to +∞ for x ≳ 713; use [`log_bessel_i`] there. The two agree
/// (exp(log) = linear) wherever both are finite.
///
/// # Errors
///
/// Returns a domain error for x < 0 or non-finite x.
pub fn bessel_i(p: u32, x: f64) -> Result<f64> {
    let (scaled, _) = bessel_i_scaled_parts(p, x)?;
    Ok(scaled * x.exp())
}

/// Exponentially scaled modified Bessel: I_p(x)·e^{−x}. Never overflows.
///
/// # Errors
///
/// Returns a domain error for x < 0 or non-finite x.
pub fn bessel_i_scaled(p: u32, x: f64) -> Result<f64> {
    Ok(bessel_i_scaled_parts(p, x)?.0)
}

/// Natural log of I_p(x). −∞ for the I_p(0) = 0 cases (p ≥ 1).
///
/// # Errors
///
/// Returns a domain error for x < 0 or non-finite x.
pub fn log_bessel_i(p: u32, x: f64) -> Result<f64> {
    let (scaled, _) = bessel_i_scaled_parts(p, x)?;
    Ok(scaled.ln() + x)
}

/// Shared series evaluation returning (I_p(x)·e^{−x}, peak term index).
fn bessel_i_scaled_parts(p: u32, x: f64) -> Result<(f64, usize)> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "bessel_i requires x >= 0, got x = {x}"
        )));
    }
    if x == 0.0 {
        return Ok((if p == 0 { 1.0 } else { 0.0 }, 0));
    }
    let pf = f64::from(p);
    let z = 0.25 * x * x; // (x/2)²
    if x <= 40.0 {
        // Direct summation; the sum is bounded by e^40, far from overflow.
        let mut term = (pf * (0.5 * x).ln() - super::gamma::ln_gamma_unchecked(pf + 1.0)).exp();
        let mut sum = term;
        let mut k = 0.0_f64;
        while term > SERIES_EPS * sum {
            term *= z / ((k + 1.0) * (k + pf + 1.0));
            sum += term;
            k += 1.0;
        }
        return Ok((sum * (-x).exp(), 0));
    }
    // Large argument: work outward from the peak term in e^{−x}-scaled form so
    // nothing overflows and the small-k underflow is harmless.
    let kpeak = (0.5 * (-(pf + 1.0) + ((pf + 1.0) * (pf + 1.0) + x * x).sqrt())).round();
    let ln_peak = (pf + 2.0 * kpeak) * (0.5 * x).ln()
        - super::gamma::ln_gamma_unchecked(kpeak + 1.0)
        - super::gamma::ln_gamma_unchecked(kpeak + pf + 1.0);
    let speak = (ln_peak - x).exp();
    let mut sum = speak;
    // Upward from the peak.
    let mut term = speak;
    let mut k = kpeak;
    loop {
        term *= z / ((k + 1.0) * (k + pf + 1.0));
        sum += term;
        k += 1.0;
        if term < SERIES_EPS * sum {
            break;
        }
    }
    // Downward from the peak.
    term = speak;
    k = kpeak;
    while k > 0.0 {
        term *= k * (k + pf) / z;
        sum += term;
        k -= 1.0;
        if term < SERIES_EPS * sum {
            break;
        }
    }
    Ok((sum, kpeak as usize))
}

/// Modified Bessel function of the second kind, K_p(x), integer order p ≥ 0.
///
/// # Errors
///
/// Returns a domain error for x ≤ 0 or non-finite x.
pub fn bessel_k(p: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("bessel_k requires x > 0, got {x}")));
    }
    let (k0, k1) = if x < 3.0 {
        (bessel_k_series(0, x)?, bessel_k_series(1, x)?)
    } else {
        bessel_k01_cf2(x)
    };
    match p {
        0 => Ok(k0),
        1 => Ok(k1),
        _ => {
            // Upward recurrence is stable for K (the dominant solution).
            let mut km = k0;
            let mut k = k1;
            for j in 1..p {
                let knext = km + (2.0 * f64::from(j) / x) * k;
                km = k;
                k = knext;
            }
            Ok(k)
        }
    }
}

/// A&S 9.6.11 ascending series, accurate for small arguments (used for x < 3;
/// cancellation against the log term costs ≲ 3 digits there).
fn bessel_k_series(n: u32, x: f64) -> Result<f64> {
    let nf = f64::from(n);
    let z = 0.25 * x * x;
    let half_x = 0.5 * x;
    // Finite sum: (1/2)(x/2)^{−n} Σ_{k=0}^{n−1} [(n−k−1)!/k!] (−z)^k.
    let mut finite = 0.0;
    if n > 0 {
        let mut coeff = super::gamma::ln_gamma_unchecked(nf).exp(); // (n−1)!/0!
        let mut zpow = 1.0;
        for k in 0..n {
            finite += coeff * zpow;
            zpow *= -z;
            let kf = f64::from(k);
            // (n−k−2)!/(k+1)! = previous · 1/((n−k−1)(k+1))
            if k + 1 < n {
                coeff /= (nf - kf - 1.0) * (kf + 1.0);
            }
        }
        finite *= 0.5 * half_x.powi(-(n as i32));
    }
    // Log part: (−1)^{n+1} ln(x/2) I_n(x).
    let sign_log = if n % 2 == 0 { -1.0 } else { 1.0 };
    let log_part = sign_log * half_x.ln() * bessel_i(n, x)?;
    // Psi series: (−1)^n (1/2)(x/2)^n Σ_k [ψ(k+1)+ψ(n+k+1)] z^k/(k!(n+k)!).
    let mut psi_a = -EULER_GAMMA; // ψ(1)
    let mut psi_b = -EULER_GAMMA; // ψ(n+1)
    for j in 1..=n {
        psi_b += 1.0 / f64::from(j);
    }
    let mut term = (-super::gamma::ln_gamma_unchecked(nf + 1.0)).exp(); // 1/(0!·n!)
    let mut sum = (psi_a + psi_b) * term;
    let mut k = 0.0_f64;
    loop {
        term *= z / ((k + 1.0) * (k + nf + 1.0));
        psi_a += 1.0 / (k + 1.0);
        psi_b += 1.0 / (k + nf + 1.0);
        let add = (psi_a + psi_b) * term;
        sum += add;
        k += 1.0;
        if add.abs() < SERIES_EPS * sum.abs() || k > 500.0 {
            break;
        }
    }
    let sign_psi = if n % 2 == 0 { 1.0 } else { -1.0 };
    let psi_part = sign_psi * 0.5 * half_x.powi(n as i32) * sum;
    Ok(finite + log_part + psi_part)
}

/// Steed's CF2 continued fraction for K₀(x) and K₁(x), x ≥ 3 (Numerical
/// Recipes §6.7, order μ = 0 specialization). Machine accuracy for x ≥ 2.
fn bessel_k01_cf2(x: f64) -> (f64, f64) {
    let a1 = 0.25; // 1/4 − μ² with μ = 0
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0_f64;
    let mut q2 = 1.0_f64;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=CF2_MAXIT {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-16 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
