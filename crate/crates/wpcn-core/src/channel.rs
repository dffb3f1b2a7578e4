//! System configuration, derived outage thresholds, the Jakes spatial
//! correlation model with its block approximation, and the correlated
//! channel sampler.
//!
//! Conventions fixed here and relied on everywhere else:
//!
//! - Complex gains have unit variance per real dimension, so E\[|g|²\] = 2.
//! - A fluid antenna with N ports inside an aperture of `antenna_size` W
//!   wavelengths has port correlation J₀(2π|n₁−n₂|W/(N−1)) (Jakes model).
//!   [`derive_blocks`] compresses that matrix into independent blocks of
//!   constant intra-block correlation μ² = `correlation`.
//! - Within a block, g_n = √(1−μ²)·z_n + μ·z_b with z_n port-local and z_b
//!   shared; blocks, users, and the uplink channel set are independent.
//! - The path loss Ω = d^ζ / pathloss_ref is an attenuation factor (divide
//!   by it); `pathloss_ref` stores the reference gain at 1 m (default 1e-3).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::specfun::bessel_j0;
use crate::{Error, Result};

/// Converts a dB quantity to linear scale.
#[must_use]
pub fn db_to_linear(db: f64) -> f64 {
    10.0_f64.powf(db / 10.0)
}

/// Converts dBm to watts.
#[must_use]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10.0_f64.powf((dbm - 30.0) / 10.0)
}

/// Full system parameterization of the wireless-powered network.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of users M sharing the downlink (one desired, M−1 interferers).
    pub num_users: usize,
    /// Number of fluid-antenna ports N.
    pub num_ports: usize,
    /// Antenna aperture W in wavelengths.
    pub antenna_size: f64,
    /// Intra-block power correlation μ² ∈ (0, 1).
    pub correlation: f64,
    /// RF-to-DC conversion efficiency η ∈ (0, 1].
    pub conversion_efficiency: f64,
    /// Power-splitting ratio ρ ∈ [0, 1) diverted to information decoding.
    pub power_split: f64,
    /// Access-point transmit power in dBm.
    pub transmit_power_dbm: f64,
    /// Receiver noise power σ_w² in dBm.
    pub noise_power_dbm: f64,
    /// Fraction t₁ ∈ (0, 1) of the frame spent on the downlink phase.
    pub downlink_fraction: f64,
    /// Access-point-to-user distance d in meters.
    pub distance: f64,
    /// Path-loss exponent ζ.
    pub pathloss_exponent: f64,
    /// Reference channel gain at 1 m (stored as a gain; default 1e-3).
    pub pathloss_ref: f64,
}

impl Default for SystemConfig {
    /// The numerical-study defaults: M=4, N=50, W=3, μ²=0.97, η=0.45, ρ=0.5,
    /// Pt=20 dBm, σ_w²=−90 dBm, t₁=0.8, d=12 m, ζ=2.2, 30 dB loss at 1 m.
    fn default() -> Self {
        Self {
            num_users: 4,
            num_ports: 50,
            antenna_size: 3.0,
            correlation: 0.97,
            conversion_efficiency: 0.45,
            power_split: 0.5,
            transmit_power_dbm: 20.0,
            noise_power_dbm: -90.0,
            downlink_fraction: 0.8,
            distance: 12.0,
            pathloss_exponent: 2.2,
            pathloss_ref: 1e-3,
        }
    }
}

impl SystemConfig {
    /// Checks every field range.
    ///
    /// # Errors
    ///
    /// Returns a configuration error naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.num_users < 2 {
            return Err(Error::config(format!(
                "num_users must be >= 2 (one desired user plus interferers), got {}",
                self.num_users
            )));
        }
        if self.num_ports < 2 {
            return Err(Error::config(format!(
                "num_ports must be >= 2, got {}",
                self.num_ports
            )));
        }
        if !(self.antenna_size > 0.0) || !self.antenna_size.is_finite() {
            return Err(Error::config(format!(
                "antenna_size must be positive and finite, got {}",
                self.antenna_size
            )));
        }
        if !(self.correlation > 0.0 && self.correlation < 1.0) {
            return Err(Error::config(format!(
                "correlation must lie in (0, 1), got {}",
                self.correlation
            )));
        }
        if !(self.conversion_efficiency > 0.0 && self.conversion_efficiency <= 1.0) {
            return Err(Error::config(format!(
                "conversion_efficiency must lie in (0, 1], got {}",
                self.conversion_efficiency
            )));
        }
        if !(self.power_split >= 0.0 && self.power_split < 1.0) {
            return Err(Error::config(format!(
                "power_split must lie in [0, 1), got {}",
                self.power_split
            )));
        }
        if !self.transmit_power_dbm.is_finite() || !self.noise_power_dbm.is_finite() {
            return Err(Error::config(format!(
                "transmit/noise powers must be finite dBm, got {} / {}",
                self.transmit_power_dbm, self.noise_power_dbm
            )));
        }
        if !(self.downlink_fraction > 0.0 && self.downlink_fraction < 1.0) {
            return Err(Error::config(format!(
                "downlink_fraction must lie in (0, 1), got {}",
                self.downlink_fraction
            )));
        }
        if !(self.distance > 0.0) || !self.distance.is_finite() {
            return Err(Error::config(format!(
                "distance must be positive and finite, got {}",
                self.distance
            )));
        }
        if !(self.pathloss_exponent > 0.0) || !self.pathloss_exponent.is_finite() {
            return Err(Error::config(format!(
                "pathloss_exponent must be positive and finite, got {}",
                self.pathloss_exponent
            )));
        }
        if !(self.pathloss_ref > 0.0) || !self.pathloss_ref.is_finite() {
            return Err(Error::config(format!(
                "pathloss_ref must be a positive finite gain, got {}",
                self.pathloss_ref
            )));
        }
        Ok(())
    }

    /// Transmit power in watts.
    #[must_use]
    pub fn transmit_power_watts(&self) -> f64 {
        dbm_to_watts(self.transmit_power_dbm)
    }

    /// Noise power in watts.
    #[must_use]
    pub fn noise_power_watts(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }

    /// Path-loss attenuation Ω = d^ζ / pathloss_ref (divide received power
    /// by this).
    #[must_use]
    pub fn path_loss(&self) -> f64 {
        self.distance.powf(self.pathloss_exponent) / self.pathloss_ref
    }

    /// Uplink time fraction t₂ = 1 − t₁.
    #[must_use]
    pub fn uplink_fraction(&self) -> f64 {
        1.0 - self.downlink_fraction
    }

    /// Normalized uplink thresholds for an uplink SNR target given in dB.
    ///
    /// `gamma_tilde` is the threshold on the product αβ of normalized
    /// harvested power and uplink gain; `gamma_hat` = γ̃(1−μ²)²/4 is the same
    /// threshold in the scaling used by the closed-form bounds. A −∞ dB
    /// target maps to zero thresholds.
    ///
    /// # Errors
    ///
    /// Returns a configuration error for invalid fields, a domain error for
    /// NaN or +∞ thresholds.
    pub fn derived_params(&self, uplink_threshold_db: f64) -> Result<DerivedParams> {
        self.validate()?;
        if uplink_threshold_db.is_nan() || uplink_threshold_db == f64::INFINITY {
            return Err(Error::domain(format!(
                "uplink threshold must be a real dB value or -inf, got {uplink_threshold_db}"
            )));
        }
        let gamma_u = db_to_linear(uplink_threshold_db);
        let one_minus_mu2 = 1.0 - self.correlation;
        let loss = self.path_loss();
        let gamma_tilde = gamma_u * self.uplink_fraction() * self.noise_power_watts()
            * loss
            * loss
            / (self.conversion_efficiency
                * (1.0 - self.power_split)
                * self.transmit_power_watts()
                * self.downlink_fraction
                * one_minus_mu2
                * one_minus_mu2);
        let gamma_hat = gamma_tilde * one_minus_mu2 * one_minus_mu2 / 4.0;
        Ok(DerivedParams { gamma_tilde, gamma_hat })
    }
}

/// Uplink outage thresholds derived from a [`SystemConfig`] and a dB target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Threshold on αβ (normalized harvested power × uplink gain).
    pub gamma_tilde: f64,
    /// γ̃(1−μ²)²/4, the argument of the Bessel-form closed bounds.
    pub gamma_hat: f64,
}

/// Partition of the N ports into independently fading blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    sizes: Vec<usize>,
}

impl BlockStructure {
    /// Builds a structure from explicit block sizes.
    ///
    /// # Errors
    ///
    /// Returns a configuration error if `sizes` is empty or contains a zero.
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::config("block structure needs at least one block".to_string()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::config("block sizes must all be >= 1".to_string()));
        }
        Ok(Self { sizes })
    }

    /// `count` blocks of one port each: fully independent ports, the model
    /// behind the fixed-position selection-combining baseline.
    ///
    /// # Errors
    ///
    /// Returns a configuration error for `count` = 0.
    pub fn uniform(count: usize) -> Result<Self> {
        Self::new(vec![1; count])
    }

    /// Number of blocks B.
    #[must_use]
    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    /// Block sizes L_b, in dominant-eigenvalue order.
    #[must_use]
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Total port count Σ L_b.
    #[must_use]
    pub fn total_ports(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Block index of each port, ports laid out contiguously per block.
    #[must_use]
    pub fn port_blocks(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total_ports());
        for (b, &size) in self.sizes.iter().enumerate() {
            out.extend(std::iter::repeat(b).take(size));
        }
        out
    }

    /// Dominant eigenvalue 1 − μ² + μ²L_b of each block's correlation
    /// matrix, for comparison against the top Jakes eigenvalues.
    #[must_use]
    pub fn dominant_eigenvalues(&self, correlation: f64) -> Vec<f64> {
        self.sizes
            .iter()
            .map(|&l| 1.0 - correlation + correlation * l as f64)
            .collect()
    }
}

/// Jakes port-correlation matrix: entry (n₁, n₂) is J₀(2π|n₁−n₂|W/(N−1)).
///
/// # Errors
///
/// Returns a configuration error for N < 2 or non-positive W.
pub fn jakes_matrix(num_ports: usize, antenna_size: f64) -> Result<DMatrix<f64>> {
    if num_ports < 2 {
        return Err(Error::config(format!(
            "jakes_matrix needs at least 2 ports, got {num_ports}"
        )));
    }
    if !(antenna_size > 0.0) || !antenna_size.is_finite() {
        return Err(Error::config(format!(
            "antenna_size must be positive and finite, got {antenna_size}"
        )));
    }
    let n = num_ports;
    let scale = 2.0 * std::f64::consts::PI * antenna_size / (n as f64 - 1.0);
    let mut m = DMatrix::zeros(n, n);
    // J₀ of each distinct lag, reused across the Toeplitz diagonals.
    let mut lags = Vec::with_capacity(n);
    for lag in 0..n {
        lags.push(bessel_j0(scale * lag as f64)?);
    }
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = lags[i.abs_diff(j)];
        }
    }
    Ok(m)
}

/// Compresses the Jakes correlation into independent constant-correlation
/// blocks: one block per eigenvalue ≥ `eigen_threshold`, sized so the block
/// dominant eigenvalue 1 − μ² + μ²L_b matches λ_b, with the port-count
/// residual distributed ±1 round-robin over blocks in decreasing size order.
///
/// # Errors
///
/// Returns a configuration error unless N ≥ 2, W > 0, μ² ∈ (0, 1), and
/// 0 < eigen_threshold < (N−1)/W.
pub fn derive_blocks(
    num_ports: usize,
    antenna_size: f64,
    correlation: f64,
    eigen_threshold: f64,
) -> Result<BlockStructure> {
    if !(correlation > 0.0 && correlation < 1.0) {
        return Err(Error::config(format!(
            "correlation must lie in (0, 1), got {correlation}"
        )));
    }
    let jakes = jakes_matrix(num_ports, antenna_size)?;
    let upper = (num_ports as f64 - 1.0) / antenna_size;
    if !(eigen_threshold > 0.0 && eigen_threshold < upper) {
        return Err(Error::config(format!(
            "eigen_threshold must lie in (0, {upper}), got {eigen_threshold}"
        )));
    }
    let mut eigen: Vec<f64> = jakes.symmetric_eigenvalues().iter().copied().collect();
    eigen.sort_by(|a, b| b.total_cmp(a));
    let num_blocks = eigen.iter().filter(|&&l| l >= eigen_threshold).count().max(1);
    let mut sizes: Vec<isize> = eigen[..num_blocks]
        .iter()
        .map(|&l| (((l - (1.0 - correlation)) / correlation).round() as isize).max(1))
        .collect();
    let mut residual = num_ports as isize - sizes.iter().sum::<isize>();
    // Distribute the leftover ports one at a time over blocks ordered by
    // decreasing initial size (never shrinking a block below one port).
    let mut order: Vec<usize> = (0..num_blocks).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut i = 0usize;
    while residual != 0 {
        let b = order[i % num_blocks];
        if residual > 0 {
            sizes[b] += 1;
            residual -= 1;
        } else if sizes[b] > 1 {
            sizes[b] -= 1;
            residual += 1;
        }
        i += 1;
    }
    BlockStructure::new(sizes.into_iter().map(|s| s as usize).collect())
}

/// One realization of every channel in the system.
///
/// User 0 is the desired user; users 1..M are interferers. Ports are indexed
/// per [`BlockStructure::port_blocks`]. Block common components are retained
/// so diagnostics can condition on them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// Downlink gains: `downlink[m][n]` is user m's signal at port n.
    pub downlink: Vec<Vec<Complex64>>,
    /// Uplink gains per port.
    pub uplink: Vec<Complex64>,
    /// Block common components behind `downlink`, per user and block.
    pub downlink_block: Vec<Vec<Complex64>>,
    /// Block common components behind `uplink`, per block.
    pub uplink_block: Vec<Complex64>,
    /// The μ² used to mix common and local parts (kept for metric scaling).
    correlation: f64,
}

fn standard_complex(rng: &mut impl Rng) -> Complex64 {
    // Unit variance per real dimension, so E[|z|²] = 2.
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Samples one correlated channel realization.
///
/// The RNG consumption order is fixed and documented (users by ascending
/// index: B block pairs then N port pairs, real before imaginary; then the
/// uplink block and port pairs), making draws bit-reproducible for a given
/// RNG state. The port count comes from `blocks`, which allows baseline
/// structures whose total differs from `cfg.num_ports`.
///
/// # Errors
///
/// Returns a configuration error for an invalid `cfg`.
pub fn sample_draw(
    cfg: &SystemConfig,
    blocks: &BlockStructure,
    rng: &mut impl Rng,
) -> Result<ChannelDraw> {
    cfg.validate()?;
    let num_ports = blocks.total_ports();
    let num_blocks = blocks.num_blocks();
    let port_blocks = blocks.port_blocks();
    let local_scale = (1.0 - cfg.correlation).sqrt();
    let common_scale = cfg.correlation.sqrt();

    let mut downlink = Vec::with_capacity(cfg.num_users);
    let mut downlink_block = Vec::with_capacity(cfg.num_users);
    for _ in 0..cfg.num_users {
        let commons: Vec<Complex64> = (0..num_blocks).map(|_| standard_complex(rng)).collect();
        let gains: Vec<Complex64> = (0..num_ports)
            .map(|n| local_scale * standard_complex(rng) + common_scale * commons[port_blocks[n]])
            .collect();
        downlink.push(gains);
        downlink_block.push(commons);
    }
    let uplink_block: Vec<Complex64> = (0..num_blocks).map(|_| standard_complex(rng)).collect();
    let uplink: Vec<Complex64> = (0..num_ports)
        .map(|n| local_scale * standard_complex(rng) + common_scale * uplink_block[port_blocks[n]])
        .collect();

    Ok(ChannelDraw {
        downlink,
        uplink,
        downlink_block,
        uplink_block,
        correlation: cfg.correlation,
    })
}

/// Per-port decision metrics computed from one [`ChannelDraw`].
///
/// `x`, `y`, `alpha`, `beta` are normalized by (1−μ²) so that α(1−μ²)/2 is
/// Gamma(M, 1)-distributed and β(1−μ²)/2 is Exp(1)-distributed; `sir`, `ehp`,
/// `ul_snr` are the physical link metrics (`sir` is +∞ where the interference
/// power is exactly zero, never NaN).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDraw {
    /// Normalized desired-signal power per port.
    pub x: Vec<f64>,
    /// Normalized aggregate interference power per port.
    pub y: Vec<f64>,
    /// Normalized total received downlink power, α = x + y.
    pub alpha: Vec<f64>,
    /// Normalized uplink channel power.
    pub beta: Vec<f64>,
    /// Downlink signal-to-interference ratio x/y.
    pub sir: Vec<f64>,
    /// Harvested energy over the downlink phase, η(1−ρ)Pt t₁ Σ|g|²/Ω.
    pub ehp: Vec<f64>,
    /// Uplink SNR fed by the harvested energy.
    pub ul_snr: Vec<f64>,
}

/// Computes the per-port metric vectors for a draw.
///
/// # Errors
///
/// Returns a configuration error for an invalid `cfg` and a domain error if
/// the draw has no interferers (`downlink` must hold M ≥ 2 users).
pub fn metrics(cfg: &SystemConfig, draw: &ChannelDraw) -> Result<MetricDraw> {
    cfg.validate()?;
    if draw.downlink.len() < 2 {
        return Err(Error::domain(format!(
            "metrics needs the desired user plus at least one interferer, got {} users",
            draw.downlink.len()
        )));
    }
    let num_ports = draw.uplink.len();
    let one_minus_mu2 = 1.0 - draw.correlation;
    let harvest_coeff = cfg.conversion_efficiency
        * (1.0 - cfg.power_split)
        * cfg.transmit_power_watts()
        * cfg.downlink_fraction
        / cfg.path_loss();
    let snr_coeff = harvest_coeff
        / (cfg.path_loss() * cfg.noise_power_watts() * cfg.uplink_fraction());

    let mut x = Vec::with_capacity(num_ports);
    let mut y = Vec::with_capacity(num_ports);
    let mut alpha = Vec::with_capacity(num_ports);
    let mut beta = Vec::with_capacity(num_ports);
    let mut sir = Vec::with_capacity(num_ports);
    let mut ehp = Vec::with_capacity(num_ports);
    let mut ul_snr = Vec::with_capacity(num_ports);
    for n in 0..num_ports {
        let desired = draw.downlink[0][n].norm_sqr();
        let interference: f64 = draw.downlink[1..].iter().map(|g| g[n].norm_sqr()).sum();
        let total = desired + interference;
        let h2 = draw.uplink[n].norm_sqr();
        x.push(desired / one_minus_mu2);
        y.push(interference / one_minus_mu2);
        alpha.push(total / one_minus_mu2);
        beta.push(h2 / one_minus_mu2);
        sir.push(if interference == 0.0 {
            f64::INFINITY
        } else {
            desired / interference
        });
        ehp.push(harvest_coeff * total);
        ul_snr.push(snr_coeff * total * h2);
    }
    Ok(MetricDraw { x, y, alpha, beta, sir, ehp, ul_snr })
}

// ---------------------------------------------------------------------------
#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn validate_rejects_each_bad_field() {
        let base = SystemConfig::default();
        assert!(base.validate().is_ok());
        let cases: Vec<SystemConfig> = vec![
            SystemConfig { num_users: 1, ..base.clone() },
            SystemConfig { num_ports: 1, ..base.clone() },
            SystemConfig { antenna_size: 0.0, ..base.clone() },
            SystemConfig { correlation: 1.0, ..base.clone() },
            SystemConfig { correlation: 0.0, ..base.clone() },
            SystemConfig { conversion_efficiency: 0.0, ..base.clone() },
            SystemConfig { power_split: 1.0, ..base.clone() },
            SystemConfig { transmit_power_dbm: f64::NAN, ..base.clone() },
            SystemConfig { downlink_fraction: 1.0, ..base.clone() },
            SystemConfig { distance: -1.0, ..base.clone() },
            SystemConfig { pathloss_exponent: 0.0, ..base.clone() },
            SystemConfig { pathloss_ref: 0.0, ..base.clone() },
        ];
        for bad in cases {
            assert!(bad.validate().is_err(), "accepted invalid config {bad:?}");
        }
    }

    #[test]
    fn derived_thresholds_reference_point() {
        // 10 dB uplink target at the Pt=20 dBm, d=12 m operating point.
        let cfg = SystemConfig { antenna_size: 4.0, ..SystemConfig::default() };
        let d = cfg.derived_params(10.0).unwrap();
        assert_relative_eq!(d.gamma_tilde, 6916.915, max_relative = 1e-6);
        let omm = 1.0 - cfg.correlation;
        assert_eq!(d.gamma_hat, d.gamma_tilde * omm * omm / 4.0);
        // −∞ dB target → zero thresholds.
        let z = cfg.derived_params(f64::NEG_INFINITY).unwrap();
        assert_eq!(z.gamma_tilde, 0.0);
        assert!(cfg.derived_params(f64::NAN).is_err());
        assert!(cfg.derived_params(f64::INFINITY).is_err());
    }

    #[test]
    fn jakes_matrix_shape_and_values() {
        let m = jakes_matrix(2, 0.5).unwrap();
        assert_eq!(m[(0, 0)], 1.0);
        assert_relative_eq!(m[(0, 1)], -0.3042, max_relative = 2e-4);
        assert_eq!(m[(0, 1)], m[(1, 0)]);

        let m = jakes_matrix(50, 3.0).unwrap();
        for i in 0..50 {
            assert_eq!(m[(i, i)], 1.0);
        }
        // Symmetric positive semidefinite up to numerical tolerance.
        let min_eig = m
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig >= -1e-8, "min Jakes eigenvalue {min_eig}");
        assert!(jakes_matrix(1, 1.0).is_err());
        assert!(jakes_matrix(4, 0.0).is_err());
    }

    #[test]
    fn derive_blocks_reference_structures() {
        // N=50, W=3: about 2W+1 ≈ 6.12 significant eigenvalues.
        let blocks = derive_blocks(50, 3.0, 0.97, 1.0).unwrap();
        let b = blocks.num_blocks() as f64;
        assert!((b - 6.12).abs() <= 2.0, "B = {b}");
        assert_eq!(blocks.total_ports(), 50);
        let mut sizes = blocks.sizes().to_vec();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![11, 10, 7, 6, 6, 5, 4, 1]);

        let mut sizes4 = derive_blocks(50, 4.0, 0.97, 1.0).unwrap().sizes().to_vec();
        sizes4.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes4, vec![9, 9, 6, 5, 5, 4, 4, 4, 4]);

        let mut sizes5 = derive_blocks(50, 5.0, 0.97, 1.0).unwrap().sizes().to_vec();
        sizes5.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes5, vec![9, 8, 5, 5, 4, 4, 3, 3, 3, 3, 3]);
    }

    #[test]
    fn derive_blocks_two_ports() {
        // N=2, W=0.5: eigenvalues 1 ± J₀(π) ≈ {1.304, 0.696}.
        let blocks = derive_blocks(2, 0.5, 0.97, 0.5).unwrap();
        assert_eq!(blocks.sizes(), &[1, 1]);
        // Default threshold 1.0 keeps only the top eigenvalue.
        let blocks = derive_blocks(2, 0.5, 0.97, 1.0).unwrap();
        assert_eq!(blocks.sizes(), &[2]);
    }

    #[test]
    fn derive_blocks_threshold_bounds() {
        assert!(derive_blocks(50, 3.0, 0.97, 0.0).is_err());
        // (N−1)/W = 16.33...; at or above is rejected.
        assert!(derive_blocks(50, 3.0, 0.97, 16.34).is_err());
        assert!(derive_blocks(50, 3.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn block_structure_contracts() {
        assert!(BlockStructure::new(vec![]).is_err());
        assert!(BlockStructure::new(vec![3, 0]).is_err());
        let b = BlockStructure::new(vec![2, 3]).unwrap();
        assert_eq!(b.port_blocks(), vec![0, 0, 1, 1, 1]);
        assert_eq!(b.total_ports(), 5);
        let u = BlockStructure::uniform(3).unwrap();
        assert_eq!(u.sizes(), &[1, 1, 1]);
        let eig = b.dominant_eigenvalues(0.97);
        assert_relative_eq!(eig[0], 1.0 - 0.97 + 0.97 * 2.0);
        assert_relative_eq!(eig[1], 1.0 - 0.97 + 0.97 * 3.0);
    }

    #[test]
    fn sample_draw_is_deterministic() {
        let cfg = SystemConfig::default();
        let blocks = derive_blocks(50, 3.0, 0.97, 1.0).unwrap();
        let a = sample_draw(&cfg, &blocks, &mut rng(7)).unwrap();
        let b = sample_draw(&cfg, &blocks, &mut rng(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_draw_full_correlation_limit() {
        let cfg = SystemConfig {
            correlation: 1.0 - 1e-12,
            ..SystemConfig::default()
        };
        let blocks = BlockStructure::new(vec![3, 2]).unwrap();
        let draw = sample_draw(&cfg, &blocks, &mut rng(11)).unwrap();
        for gains in &draw.downlink {
            // Within each block all ports collapse onto the common component.
            // The residual local part scales with sqrt(1 - mu^2) = 1e-6, so an
            // absolute tolerance avoids dividing by a small common gain.
            for pair in [&gains[0..3], &gains[3..5]] {
                for g in &pair[1..] {
                    assert_relative_eq!(g.re, pair[0].re, epsilon = 1e-4);
                    assert_relative_eq!(g.im, pair[0].im, epsilon = 1e-4);
                }
            }
        }
    }

    /// Batch-mean checks of the second-moment structure: E|g|² = 2,
    /// within-block power correlation μ⁴, cross-block correlation 0.
    #[test]
    fn sample_draw_moment_structure() {
        let cfg = SystemConfig { num_users: 2, ..SystemConfig::default() };
        let blocks = BlockStructure::new(vec![25, 25]).unwrap();
        let batches = 10;
        let per_batch = 2000;
        let mut mean_power = Vec::new();
        let mut corr_within = Vec::new();
        let mut corr_across = Vec::new();
        let mut r = rng(2024);
        for _ in 0..batches {
            let mut p = Vec::with_capacity(per_batch);
            let mut a0 = Vec::with_capacity(per_batch);
            let mut a1 = Vec::with_capacity(per_batch);
            let mut b0 = Vec::with_capacity(per_batch);
            for _ in 0..per_batch {
                let d = sample_draw(&cfg, &blocks, &mut r).unwrap();
                p.push(d.downlink[0][0].norm_sqr());
                a0.push(d.downlink[0][0].norm_sqr());
                a1.push(d.downlink[0][1].norm_sqr());
                b0.push(d.downlink[0][25].norm_sqr());
            }
            mean_power.push(mean(&p));
            corr_within.push(pearson(&a0, &a1));
            corr_across.push(pearson(&a0, &b0));
        }
        let mu2 = cfg.correlation;
        assert_batch_close(&mean_power, 2.0, "E|g|^2");
        assert_batch_close(&corr_within, mu2 * mu2, "within-block corr");
        assert_batch_close(&corr_across, 0.0, "cross-block corr");
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let ma = mean(a);
        let mb = mean(b);
        let mut num = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (&x, &y) in a.iter().zip(b) {
            num += (x - ma) * (y - mb);
            va += (x - ma) * (x - ma);
            vb += (y - mb) * (y - mb);
        }
        num / (va * vb).sqrt()
    }

    fn assert_batch_close(batch_values: &[f64], target: f64, label: &str) {
        let m = mean(batch_values);
        let var = batch_values.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / (batch_values.len() as f64 - 1.0);
        let se = (var / batch_values.len() as f64).sqrt();
        assert!(
            (m - target).abs() <= 3.0 * se + 1e-3,
            "{label}: batch mean {m} vs target {target} (3SE = {})",
            3.0 * se
        );
    }

    #[test]
    fn metrics_identities() {
        let cfg = SystemConfig::default();
        let blocks = derive_blocks(50, 3.0, 0.97, 1.0).unwrap();
        let draw = sample_draw(&cfg, &blocks, &mut rng(5)).unwrap();
        let m = metrics(&cfg, &draw).unwrap();
        let omm = 1.0 - cfg.correlation;
        let snr_scale = cfg.conversion_efficiency
            * (1.0 - cfg.power_split)
            * cfg.transmit_power_watts()
            * cfg.downlink_fraction
            * omm
            * omm
            / (cfg.uplink_fraction()
                * cfg.noise_power_watts()
                * cfg.path_loss()
                * cfg.path_loss());
        for n in 0..50 {
            assert_relative_eq!(m.sir[n], m.x[n] / m.y[n], max_relative = 1e-12);
            assert_relative_eq!(m.alpha[n], m.x[n] + m.y[n], max_relative = 1e-12);
            // ul_snr computed two ways: raw powers vs normalized α, β.
            assert_relative_eq!(
                m.ul_snr[n],
                m.alpha[n] * m.beta[n] * snr_scale,
                max_relative = 1e-10
            );
        }
        // ehp and alpha rank ports identically.
        let argmax = |v: &[f64]| {
            v.iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap()
        };
        assert_eq!(argmax(&m.ehp), argmax(&m.alpha));
    }

    #[test]
    fn metrics_scale_linearly_with_power() {
        let cfg = SystemConfig::default();
        let blocks = derive_blocks(50, 3.0, 0.97, 1.0).unwrap();
        let draw = sample_draw(&cfg, &blocks, &mut rng(9)).unwrap();
        let base = metrics(&cfg, &draw).unwrap();
        let boosted_cfg = SystemConfig {
            transmit_power_dbm: cfg.transmit_power_dbm + 10.0,
            ..cfg
        };
        let boosted = metrics(&boosted_cfg, &draw).unwrap();
        for n in 0..50 {
            assert_relative_eq!(boosted.ehp[n], 10.0 * base.ehp[n], max_relative = 1e-12);
            assert_relative_eq!(boosted.ul_snr[n], 10.0 * base.ul_snr[n], max_relative = 1e-12);
            assert_eq!(boosted.sir[n], base.sir[n]);
        }
    }

    #[test]
    fn metrics_handle_equal_gains_and_zero_interference() {
        let cfg = SystemConfig { num_users: 2, ..SystemConfig::default() };
        let g = Complex64::new(0.6, -0.8);
        let mk_draw = |interferer: Complex64| ChannelDraw {
            downlink: vec![vec![g, g], vec![interferer, interferer]],
            uplink: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
            downlink_block: vec![vec![], vec![]],
            uplink_block: vec![],
            correlation: cfg.correlation,
        };
        // Equal desired and interfering gains → SIR exactly 1.
        let m = metrics(&cfg, &mk_draw(g)).unwrap();
        assert_eq!(m.sir, vec![1.0, 1.0]);
        // Zero interference → +∞ sentinel, never NaN.
        let m = metrics(&cfg, &mk_draw(Complex64::new(0.0, 0.0))).unwrap();
        assert!(m.sir.iter().all(|s| *s == f64::INFINITY));
    }

    #[test]
    fn unit_conversions() {
        assert_relative_eq!(dbm_to_watts(30.0), 1.0);
        assert_relative_eq!(dbm_to_watts(20.0), 0.1);
        assert_relative_eq!(db_to_linear(0.0), 1.0);
        assert_relative_eq!(db_to_linear(10.0), 10.0);
        let cfg = SystemConfig::default();
        assert_relative_eq!(
            cfg.path_loss(),
            1000.0 * 12.0_f64.powf(2.2),
            max_relative = 1e-12
        );
    }
}
