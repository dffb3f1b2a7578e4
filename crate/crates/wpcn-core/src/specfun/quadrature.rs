//! Gauss–Laguerre rules for ∫₀^∞ e^{−x} f(x) dx and an adaptive Simpson
//! integrator for finite intervals.
//!
//! Nodes are the roots of the Laguerre polynomial L_n, located by Newton
//! iteration from the Stroud–Secrest initial guesses (Numerical Recipes §4.5,
//! `gaulag`). The three-term recurrence is run on the exponentially scaled
//! polynomials ℓ_k(x) = e^{−x/2} L_k(x), which keeps every intermediate within
//! f64 range up to order 256 (the classical recurrence overflows near order
//! 190, which is also where `numpy.polynomial.laguerre.laggauss` starts
//! returning NaN). Weights are produced in log form first, so the moment
//! identity Σ wᵢ xᵢᵏ = k! can be checked in log space even when the linear
//! weight underflows in the far tail of a high-order rule.

use crate::{Error, Result};

/// Maximum supported rule order. The scaled recurrence is validated up to
/// here; beyond it ℓ₀ = e^{−x/2} would leave the normal f64 range.
pub const MAX_GLQ_ORDER: usize = 256;

const NEWTON_MAXIT: usize = 200;
const NEWTON_TOL: f64 = 1e-15;

/// Gauss–Laguerre abscissas and weights of the given order, as
/// `(nodes, weights)` with weights for ∫₀^∞ e^{−x} f(x) dx ≈ Σ wᵢ f(xᵢ).
///
/// # Errors
///
/// Returns a configuration error unless 1 ≤ order ≤ 256.
pub fn gauss_laguerre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = QuadratureRule::new(order)?;
    Ok((rule.nodes, rule.weights))
}

/// A fixed Gauss–Laguerre rule, reusable across many integrand evaluations.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    ln_weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the rule of the given order (1 ≤ order ≤ 256).
    ///
    /// # Errors
    ///
    /// Returns a configuration error for order 0 or order > 256, and a domain
    /// error if a Newton search fails to converge (not observed for any
    /// supported order).
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_GLQ_ORDER {
            return Err(Error::config(format!(
                "Gauss-Laguerre order must be in 1..={MAX_GLQ_ORDER}, got {order}"
            )));
        }
        let n = order;
        let nf = n as f64;
        let mut nodes = vec![0.0_f64; n];
        let mut ln_weights = vec![0.0_f64; n];
        let mut z = 0.0_f64;
        for i in 0..n {
            // Stroud–Secrest style initial guesses (α = 0 specialization).
            if i == 0 {
                z = 3.0 / (1.0 + 2.4 * nf);
            } else if i == 1 {
                z += 15.0 / (1.0 + 2.5 * nf);
            } else {
                let ai = i as f64 - 1.0;
                z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2]);
            }
            let mut converged = false;
            let mut last_step = f64::INFINITY;
            for _ in 0..NEWTON_MAXIT {
                let (pn, pnm1) = scaled_laguerre_pair(n, z);
                // e^{−z/2} L_n'(z) = n (ℓ_n(z) − ℓ_{n−1}(z)) / z; the Newton
                // step ℓ_n / (e^{−z/2} L_n') equals L_n / L_n' exactly.
                let deriv = nf * (pn - pnm1) / z;
                let step = pn / deriv;
                z -= step;
                // Done when the step passes the relative tolerance, or when an
                // already-small step stops shrinking: small first nodes of
                // high orders bottom out at the recurrence's rounding noise,
                // slightly above the pure relative threshold.
                let stalled = step.abs() >= last_step && last_step <= 1e-9 * z.abs().max(1.0);
                if step.abs() <= NEWTON_TOL * z.abs() || stalled {
                    converged = true;
                    break;
                }
                last_step = step.abs();
            }
            if !converged {
                return Err(Error::domain(format!(
                    "Gauss-Laguerre Newton iteration failed at order {n}, node {i}"
                )));
            }
            nodes[i] = z;
            // w_i = x_i / ((n+1)² L_{n+1}(x_i)²); with ℓ = e^{−x/2} L this is
            // x_i e^{−x_i} / ((n+1)² ℓ_{n+1}(x_i)²), assembled in log space.
            let lnp1 = scaled_laguerre_pair(n + 1, z).0;
            ln_weights[i] = z.ln() - z - 2.0 * (nf + 1.0).ln() - 2.0 * lnp1.abs().ln();
        }
        let weights = ln_weights.iter().map(|lw| lw.exp()).collect();
        Ok(Self { nodes, weights, ln_weights })
    }

    /// Rule order (number of nodes).
    #[must_use]
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Abscissas, ascending.
    #[must_use]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for ∫₀^∞ e^{−x} f(x) dx. In rules of order ≳ 220 the last few
    /// underflow to subnormals or zero; [`Self::ln_weights`] stays finite.
    #[must_use]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Natural logs of the weights (always finite).
    #[must_use]
    pub fn ln_weights(&self) -> &[f64] {
        &self.ln_weights
    }

    /// Approximates ∫₀^∞ e^{−x} f(x) dx as Σ wᵢ f(xᵢ).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Evaluates (ℓ_n(x), ℓ_{n−1}(x)) by the scaled three-term recurrence
/// (k+1) ℓ_{k+1} = (2k+1−x) ℓ_k − k ℓ_{k−1}, ℓ₀ = e^{−x/2}.
fn scaled_laguerre_pair(n: usize, x: f64) -> (f64, f64) {
    let e = (-0.5 * x).exp();
    if n == 0 {
        return (e, 0.0);
    }
    let mut pm = e; // ℓ_0
    let mut p = (1.0 - x) * e; // ℓ_1
    for k in 1..n {
        let kf = k as f64;
        let pnext = ((2.0 * kf + 1.0 - x) * p - kf * pm) / (kf + 1.0);
        pm = p;
        p = pnext;
    }
    (p, pm)
}

/// Adaptive Simpson integration of f on the finite interval [a, b] to the
/// given relative tolerance (with Richardson extrapolation at acceptance).
///
/// A 64-panel composite pass first sizes the absolute error budget, so
/// integrands concentrated far from the endpoints are still seen by the
/// initial magnitude estimate. Each panel is then refined adaptively. Work
/// is bounded by a hard subdivision budget; within that budget the result
/// for a smooth integrand carries relative error of order `rel_tol`.
///
/// The integrand must be finite on [a, b].
///
/// # Errors
///
/// Returns a domain error for non-finite endpoints, a > b, or tol ≤ 0.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(Error::domain(format!(
            "adaptive_simpson requires finite a <= b, got [{a}, {b}]"
        )));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::domain(format!(
            "adaptive_simpson requires rel_tol > 0, got {rel_tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    const PANELS: usize = 64;
    // Coarse composite pass: 2 samples per panel plus shared endpoints.
    let h = (b - a) / PANELS as f64;
    let mut samples = [0.0f64; 2 * PANELS + 1];
    for (i, s) in samples.iter_mut().enumerate() {
        let x = a + 0.5 * h * i as f64;
        *s = f(x.min(b));
    }
    // Error budget scales with the total unsigned mass; the floor keeps
    // all-zero integrands from demanding exact arithmetic.
    let mut mass = 0.0;
    for p in 0..PANELS {
        let s = h / 6.0 * (samples[2 * p] + 4.0 * samples[2 * p + 1] + samples[2 * p + 2]);
        mass += s.abs();
    }
    let panel_tol = rel_tol * mass.max(1e-300) / PANELS as f64;
    let mut budget: u64 = 500_000;
    let mut total = 0.0;
    for p in 0..PANELS {
        let x0 = a + h * p as f64;
        let x2 = if p + 1 == PANELS { b } else { a + h * (p + 1) as f64 };
        let x1 = 0.5 * (x0 + x2);
        let (f0, f1, f2) = (samples[2 * p], samples[2 * p + 1], samples[2 * p + 2]);
        let whole = (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2);
        total += simpson_rec(&f, x0, f0, x1, f1, x2, f2, whole, panel_tol, 40, &mut budget);
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut u64,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Stop on convergence, exhausted depth or budget, or an interval too
    // narrow to subdivide in f64.
    let splittable = a < lm && lm < m && m < rm && rm < b;
    if depth == 0 || *budget == 0 || !splittable || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    *budget -= 1;
    simpson_rec(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, budget)
        + simpson_rec(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, budget)
}
