//! Key-rate computations.
//!
//! Per-user achievable-rate lower bounds, interference bookkeeping along
//! the SIC decoding order, the explicit and asymptotic sum secret key
//! rate, the multi-user sum-rate integral (tensor Gauss-Hermite or
//! Monte-Carlo), and the large-power limits used by convergence checks.

use crate::channel::ChannelState;
use crate::error::{QskrError, Result};
use crate::numeric::gauss_hermite;
use crate::quantum_core::{holevo_asym, holevo_explicit, LinkNoise};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN_2: f64 = std::f64::consts::LN_2;

// ---------------------------------------------------------------------------
// Configuration and allocation types
// ---------------------------------------------------------------------------

/// Which interference sum enters the rate lower bound's denominator.
///
/// `Printed` uses the unweighted trailing sum of modulation variances;
/// `Transmittance` applies the per-user channel weights.  The printed form
/// is the default (its denominator is never smaller, so the bound stays
/// conservative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum InterferenceWeighting {
    Printed,
    Transmittance,
}

/// All physical and protocol parameters of the system.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SystemConfig {
    /// Number of users K.
    pub k_users: usize,
    /// Reconciliation efficiency, in (0, 1].
    pub eta: f64,
    /// Detector noise variance (SNU).
    pub delta_det_sq: f64,
    /// Per-user excess-noise variance W_k (SNU).
    pub w: Vec<f64>,
    /// Per-user modulation-variance cap (SNU, each > 1).
    pub v_max_user: Vec<f64>,
    /// Receiver cap on the effective received variance (SNU).
    pub v_max_bs: f64,
    /// Detector quantum efficiency; stored for completeness, used by no
    /// rate expression.
    pub tau_d: f64,
    /// Interference convention in the rate lower bound.
    pub interference_weighting: InterferenceWeighting,
    /// Report `sum(max(0, skr_k))` instead of the raw sum.
    pub clip_negative_users: bool,
    /// Transmission wavelength (m), for the dBm mapping.
    pub wavelength: f64,
    /// Symbol rate (Hz), for the dBm mapping.
    pub symbol_rate: f64,
}

impl Default for SystemConfig {
    /// Typical-value defaults: 16 users, eta 0.92, detector noise 0.16 SNU,
    /// excess noise 0.1 SNU, 1550 nm, 1e8 symbols/s.
    fn default() -> Self {
        let k = 16;
        SystemConfig {
            k_users: k,
            eta: 0.92,
            delta_det_sq: 0.16,
            w: vec![0.1; k],
            v_max_user: vec![1.0e12; k],
            v_max_bs: 1.0e4,
            tau_d: 0.6,
            interference_weighting: InterferenceWeighting::Printed,
            clip_negative_users: false,
            wavelength: 1550e-9,
            symbol_rate: 1.0e8,
        }
    }
}

impl SystemConfig {
    /// Defaults resized to `k` users.
    pub fn with_users(k: usize) -> Self {
        let mut c = SystemConfig::default();
        c.k_users = k;
        c.w = vec![0.1; k];
        c.v_max_user = vec![1.0e12; k];
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_users == 0 {
            return Err(QskrError::domain("SystemConfig", "k_users = 0"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(QskrError::domain(
                "SystemConfig",
                format!("eta = {} outside (0, 1]", self.eta),
            ));
        }
        if self.delta_det_sq < 0.0 {
            return Err(QskrError::domain("SystemConfig", "delta_det_sq < 0"));
        }
        if self.w.len() != self.k_users || self.v_max_user.len() != self.k_users {
            return Err(QskrError::domain(
                "SystemConfig",
                format!(
                    "per-user vectors must have length {} (got w: {}, v_max_user: {})",
                    self.k_users,
                    self.w.len(),
                    self.v_max_user.len()
                ),
            ));
        }
        if self.w.iter().any(|&w| w < 0.0) {
            return Err(QskrError::domain("SystemConfig", "negative excess noise"));
        }
        if self.v_max_user.iter().any(|&v| v <= 1.0) {
            return Err(QskrError::domain(
                "SystemConfig",
                "per-user caps must exceed 1 SNU",
            ));
        }
        if self.v_max_bs <= 0.0 {
            return Err(QskrError::domain("SystemConfig", "v_max_bs <= 0"));
        }
        Ok(())
    }
}

/// One modulation variance per user (SNU), each at or above vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    v_a: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(v_a: Vec<f64>) -> Result<Self> {
        if v_a.is_empty() {
            return Err(QskrError::domain("PowerAllocation", "no users"));
        }
        for (k, &v) in v_a.iter().enumerate() {
            if !v.is_finite() || v < 1.0 {
                return Err(QskrError::domain(
                    "PowerAllocation",
                    format!("user {k}: v_a = {v} < 1"),
                ));
            }
        }
        Ok(PowerAllocation { v_a })
    }

    pub fn uniform(k: usize, v: f64) -> Result<Self> {
        Self::new(vec![v; k])
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.v_a
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.v_a.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.v_a.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.v_a[k]
    }
}

/// Which Holevo evaluation feeds the secret key rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SkrVariant {
    Explicit,
    Asymptotic,
}

/// Per-user and aggregate secret-key-rate report.
#[derive(Debug, Clone, PartialEq)]
pub struct SkrReport {
    /// Achievable-rate lower bound per user (bits/symbol), user-indexed.
    pub i_low: Vec<f64>,
    /// Holevo leakage per user (bits/symbol), user-indexed.
    pub chi: Vec<f64>,
    /// `eta * i_low - chi` per user (bits/symbol), user-indexed.
    pub skr_user: Vec<f64>,
    /// Aggregate rate: raw sum, or clipped sum when the config asks for it.
    pub skr_sum: f64,
    /// Holevo evaluation used.
    pub variant: SkrVariant,
    /// Number of users whose Holevo evaluation clamped an eigenvalue
    /// entropy term to the h(1) = 0 limit.
    pub clamped_users: usize,
}

impl SkrReport {
    /// Raw sum of per-user rates.
    pub fn raw_sum(&self) -> f64 {
        self.skr_user.iter().sum()
    }

    /// Deployment-style sum, negative users set to zero.
    pub fn clipped_sum(&self) -> f64 {
        self.skr_user.iter().map(|s| s.max(0.0)).sum()
    }
}

// ---------------------------------------------------------------------------
// Interference and rate bounds
// ---------------------------------------------------------------------------

/// Position of `user_index` in the decoding order.
fn order_position(channel: &ChannelState, user_index: usize) -> Result<usize> {
    channel
        .decoding_order
        .iter()
        .position(|&u| u == user_index)
        .ok_or_else(|| {
            QskrError::domain(
                "interference_variance",
                format!("user {user_index} not in decoding order"),
            )
        })
}

/// Transmittance-weighted interference from users decoded after
/// `user_index`: `V_I = sum T_i V_a_i` over the trailing part of the order.
pub fn interference_variance(
    alloc: &PowerAllocation,
    channel: &ChannelState,
    user_index: usize,
) -> Result<f64> {
    let pos = order_position(channel, user_index)?;
    Ok(channel.decoding_order[pos + 1..]
        .iter()
        .map(|&i| channel.t_k[i] * alloc.get(i))
        .sum())
}

/// Unweighted trailing interference `sum V_a_i` (the printed rate-bound
/// convention).
fn interference_unweighted(
    alloc: &PowerAllocation,
    channel: &ChannelState,
    user_index: usize,
) -> Result<f64> {
    let pos = order_position(channel, user_index)?;
    Ok(channel.decoding_order[pos + 1..]
        .iter()
        .map(|&i| alloc.get(i))
        .sum())
}

/// Achievable-rate lower bound for one user (bits/symbol):
/// `log2(1 + T_k V_k / (interference + (1 - T_k) W_k + delta_det^2))`.
///
/// The interference term follows `config.interference_weighting`.
pub fn lower_bound(
    alloc: &PowerAllocation,
    channel: &ChannelState,
    config: &SystemConfig,
    user_index: usize,
) -> Result<f64> {
    let interf = match config.interference_weighting {
        InterferenceWeighting::Printed => interference_unweighted(alloc, channel, user_index)?,
        InterferenceWeighting::Transmittance => {
            interference_variance(alloc, channel, user_index)?
        }
    };
    let t = channel.t_k[user_index];
    let denom = interf + (1.0 - t) * config.w[user_index] + config.delta_det_sq;
    if denom <= 0.0 {
        return Err(QskrError::domain(
            "lower_bound",
            format!("zero denominator for user {user_index}"),
        ));
    }
    Ok((t * alloc.get(user_index) / denom).ln_1p() / LN_2)
}

/// Sum secret key rate: per-user `eta * I_low - chi` accumulated along the
/// decoding order, with the Holevo term taken from the explicit or the
/// large-modulation evaluation.
pub fn sum_skr(
    alloc: &PowerAllocation,
    channel: &ChannelState,
    config: &SystemConfig,
    variant: SkrVariant,
) -> Result<SkrReport> {
    config.validate()?;
    let k_users = channel.users();
    if alloc.len() != k_users || config.k_users != k_users {
        return Err(QskrError::domain(
            "sum_skr",
            format!(
                "size mismatch: alloc {}, channel {}, config {}",
                alloc.len(),
                k_users,
                config.k_users
            ),
        ));
    }
    let mut i_low = vec![0.0; k_users];
    let mut chi = vec![0.0; k_users];
    let mut skr_user = vec![0.0; k_users];
    let mut clamped_users = 0;

    for &user in &channel.decoding_order {
        let v_i = interference_variance(alloc, channel, user)?;
        let v_a = alloc.get(user);
        let noise = LinkNoise::assemble(
            v_a,
            channel.t_k[user].min(1.0 - 1e-15),
            config.w[user],
            config.delta_det_sq,
            v_i,
        )
        .map_err(|e| e.for_user(user))?;
        let hol = match variant {
            SkrVariant::Explicit => holevo_explicit(v_a, &noise),
            SkrVariant::Asymptotic => holevo_asym(v_a, &noise),
        }
        .map_err(|e| e.for_user(user))?;
        if hol.clamped_lambda2 || hol.clamped_het {
            clamped_users += 1;
        }
        let il = lower_bound(alloc, channel, config, user)?;
        i_low[user] = il;
        chi[user] = hol.bits;
        skr_user[user] = config.eta * il - hol.bits;
    }

    let skr_sum = if config.clip_negative_users {
        skr_user.iter().map(|s| s.max(0.0)).sum()
    } else {
        skr_user.iter().sum()
    };
    Ok(SkrReport {
        i_low,
        chi,
        skr_user,
        skr_sum,
        variant,
        clamped_users,
    })
}

// ---------------------------------------------------------------------------
// Sum-rate integral
// ---------------------------------------------------------------------------

/// Evaluation strategy for the sum-rate integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SumRateMethod {
    /// Tensor Gauss-Hermite with the given nodes per dimension (K <= 3).
    Quadrature { nodes: usize },
    /// Plain Monte-Carlo with the given sample count and seed.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Sum-rate estimate in bits/symbol, with a standard error when sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRateEstimate {
    pub bits: f64,
    pub std_error: Option<f64>,
}

/// Numerically evaluates the mutual-information sum rate
/// `H(Y) - H(Y | X)` of the superposed received signal
/// `Y = sum sqrt(T_k) X_k + n`, with `X_k ~ N(0, V_k)` and
/// `n ~ N(0, delta^2)`, `delta^2 = delta_det^2 + sum (1 - T_k) W_k`.
///
/// Neither path uses the Gaussian closed form of the rate: quadrature
/// integrates the mixture density built from the model PDFs, Monte-Carlo
/// averages the log density ratio over sampled signal/noise realizations.
pub fn sum_rate_integral(
    alloc: &PowerAllocation,
    channel: &ChannelState,
    config: &SystemConfig,
    method: SumRateMethod,
) -> Result<SumRateEstimate> {
    sum_rate_integral_raw(alloc.as_slice(), channel, config, method)
}

/// Implementation on raw variances (> 0); the public entry point goes
/// through [`PowerAllocation`], whose floor is the vacuum unit.
pub(crate) fn sum_rate_integral_raw(
    variances: &[f64],
    channel: &ChannelState,
    config: &SystemConfig,
    method: SumRateMethod,
) -> Result<SumRateEstimate> {
    let k = variances.len();
    if k != channel.users() {
        return Err(QskrError::domain(
            "sum_rate_integral",
            "allocation/channel size mismatch",
        ));
    }
    if variances.iter().any(|&v| !(v > 0.0)) {
        return Err(QskrError::domain(
            "sum_rate_integral",
            "modulation variances must be positive",
        ));
    }
    // Receiver noise variance of the conditional PDF.
    let delta_sq: f64 = config.delta_det_sq
        + channel
            .t_k
            .iter()
            .zip(&config.w)
            .map(|(&t, &w)| (1.0 - t) * w)
            .sum::<f64>();
    if delta_sq <= 0.0 {
        return Err(QskrError::domain(
            "sum_rate_integral",
            "receiver noise variance must be positive",
        ));
    }
    // Scale of the signal contribution per user: sqrt(T_k) X_k has standard
    // deviation sqrt(T_k V_k).
    let signal_sd: Vec<f64> = channel
        .t_k
        .iter()
        .zip(variances)
        .map(|(&t, &v)| (t * v).sqrt())
        .collect();

    match method {
        SumRateMethod::Quadrature { nodes } => {
            if k > 3 {
                return Err(QskrError::UnsupportedDimension { max: 3, got: k });
            }
            if nodes < 2 {
                return Err(QskrError::domain("sum_rate_integral", "nodes < 2"));
            }
            Ok(SumRateEstimate {
                bits: quadrature_sum_rate(&signal_sd, delta_sq, nodes),
                std_error: None,
            })
        }
        SumRateMethod::MonteCarlo { samples, seed } => {
            if samples < 100 {
                return Err(QskrError::domain("sum_rate_integral", "samples < 100"));
            }
            let (bits, se) = monte_carlo_sum_rate(&signal_sd, delta_sq, samples, seed);
            Ok(SumRateEstimate {
                bits,
                std_error: Some(se),
            })
        }
    }
}

/// Tensor Gauss-Hermite evaluation of `H(Y) - H(Y|X)` in bits.
fn quadrature_sum_rate(signal_sd: &[f64], delta_sq: f64, nodes: usize) -> f64 {
    let k = signal_sd.len();
    let (t, w) = gauss_hermite(nodes);
    let ln_w: Vec<f64> = w
        .iter()
        .map(|&wi| (wi / std::f64::consts::PI.sqrt()).ln())
        .collect();

    // Mixture components: means over the tensor grid, log-weights summed.
    let mut means = vec![0.0f64];
    let mut ln_weights = vec![0.0f64];
    for dim in 0..k {
        let scale = std::f64::consts::SQRT_2 * signal_sd[dim];
        let mut next_means = Vec::with_capacity(means.len() * nodes);
        let mut next_w = Vec::with_capacity(means.len() * nodes);
        for (m, lw) in means.iter().zip(&ln_weights) {
            for j in 0..nodes {
                next_means.push(m + scale * t[j]);
                next_w.push(lw + ln_w[j]);
            }
        }
        means = next_means;
        ln_weights = next_w;
    }

    let ln_norm = -0.5 * (2.0 * std::f64::consts::PI * delta_sq).ln();
    let ln_mix = |y: f64| -> f64 {
        // log-sum-exp over mixture components
        let mut max = f64::NEG_INFINITY;
        for (m, lw) in means.iter().zip(&ln_weights) {
            let d = y - m;
            let e = lw - d * d / (2.0 * delta_sq);
            if e > max {
                max = e;
            }
        }
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let mut sum = 0.0;
        for (m, lw) in means.iter().zip(&ln_weights) {
            let d = y - m;
            sum += (lw - d * d / (2.0 * delta_sq) - max).exp();
        }
        max + sum.ln() + ln_norm
    };

    // Output variance guides the placement of the outer nodes only.
    let var_y: f64 = signal_sd.iter().map(|s| s * s).sum::<f64>() + delta_sq;
    let sd_y = var_y.sqrt();
    let ln_env_norm = -0.5 * (2.0 * std::f64::consts::PI * var_y).ln();

    let mut h_y = 0.0;
    for i in 0..nodes {
        let y = std::f64::consts::SQRT_2 * sd_y * t[i];
        let ln_p = ln_mix(y);
        let ln_env = ln_env_norm - y * y / (2.0 * var_y);
        let log_ratio = ln_p - ln_env;
        if log_ratio > -700.0 {
            h_y += (w[i] / std::f64::consts::PI.sqrt()) * log_ratio.exp() * (-ln_p / LN_2);
        }
    }

    // Conditional entropy of the Gaussian receiver noise, same rule.
    let mut h_y_given_x = 0.0;
    for i in 0..nodes {
        let y = std::f64::consts::SQRT_2 * delta_sq.sqrt() * t[i];
        let ln_p = ln_norm - y * y / (2.0 * delta_sq);
        h_y_given_x += (w[i] / std::f64::consts::PI.sqrt()) * (-ln_p / LN_2);
    }

    h_y - h_y_given_x
}

/// Monte-Carlo estimate of the mutual information as the mean log density
/// ratio `log2 Pr(y|x) - log2 p(y)`, with the marginal density estimated
/// from an independent signal batch.  Returns (estimate, standard error);
/// the plug-in marginal adds an O(1/M) bias with M = 2048 inner samples.
fn monte_carlo_sum_rate(
    signal_sd: &[f64],
    delta_sq: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    const INNER: usize = 2048;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_sd = |rng: &mut ChaCha8Rng| -> f64 {
        signal_sd
            .iter()
            .map(|&s| s * gaussian(rng))
            .sum::<f64>()
    };
    // Independent batch for the marginal-density estimate.
    let batch: Vec<f64> = (0..INNER).map(|_| total_sd(&mut rng)).collect();
    let ln_norm = -0.5 * (2.0 * std::f64::consts::PI * delta_sq).ln();
    let ln_marginal = |y: f64| -> f64 {
        let mut max = f64::NEG_INFINITY;
        for m in &batch {
            let e = -(y - m) * (y - m) / (2.0 * delta_sq);
            if e > max {
                max = e;
            }
        }
        let sum: f64 = batch
            .iter()
            .map(|m| (-(y - m) * (y - m) / (2.0 * delta_sq) - max).exp())
            .sum();
        max + (sum / INNER as f64).ln() + ln_norm
    };

    let mut acc = 0.0;
    let mut acc2 = 0.0;
    for _ in 0..samples {
        let mu = total_sd(&mut rng);
        let y = mu + delta_sq.sqrt() * gaussian(&mut rng);
        let ln_cond = ln_norm - (y - mu) * (y - mu) / (2.0 * delta_sq);
        let v = (ln_cond - ln_marginal(y)) / LN_2;
        acc += v;
        acc2 += v * v;
    }
    let n = samples as f64;
    let mean = acc / n;
    let var = (acc2 / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    use rand_distr::StandardNormal;
    rng.sample(StandardNormal)
}

// ---------------------------------------------------------------------------
// Large-power limits
// ---------------------------------------------------------------------------

/// Large-power limit of one user's rate lower bound along `V_k = c_k V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateLimit {
    /// The bound converges to this value (bits/symbol).
    Finite(f64),
    /// The bound grows without bound (trailing interference empty while
    /// the noise floor stays fixed).
    Unbounded,
}

/// Per-user large-power limits of the implemented rate lower bound under
/// the scaling `V_a_k = c_k V`, `V -> inf`; reference values for
/// convergence tests.  Indexed by user.
pub fn appendix_c_limits(
    c: &[f64],
    channel: &ChannelState,
    config: &SystemConfig,
) -> Result<Vec<RateLimit>> {
    if c.len() != channel.users() {
        return Err(QskrError::domain(
            "appendix_c_limits",
            "coefficient/channel size mismatch",
        ));
    }
    if c.iter().any(|&x| !(x > 0.0)) {
        return Err(QskrError::domain(
            "appendix_c_limits",
            "coefficients must be positive",
        ));
    }
    let mut out = vec![RateLimit::Unbounded; c.len()];
    for (pos, &user) in channel.decoding_order.iter().enumerate() {
        let trailing = &channel.decoding_order[pos + 1..];
        if trailing.is_empty() {
            out[user] = RateLimit::Unbounded;
            continue;
        }
        let denom: f64 = match config.interference_weighting {
            InterferenceWeighting::Printed => trailing.iter().map(|&i| c[i]).sum(),
            InterferenceWeighting::Transmittance => {
                trailing.iter().map(|&i| channel.t_k[i] * c[i]).sum()
            }
        };
        out[user] = RateLimit::Finite((channel.t_k[user] * c[user] / denom).ln_1p() / LN_2);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;

    fn chan(ts: &[f64]) -> ChannelState {
        ChannelState::from_transmittances(ts).unwrap()
    }

    fn cfg(k: usize, w: f64, d2: f64, eta: f64) -> SystemConfig {
        let mut c = SystemConfig::with_users(k);
        c.w = vec![w; k];
        c.delta_det_sq = d2;
        c.eta = eta;
        c
    }

    // -- interference_variance -------------------------------------------------

    #[test]
    fn last_user_sees_no_interference() {
        let ch = chan(&[0.9, 0.5, 0.2]);
        let alloc = PowerAllocation::new(vec![10.0, 20.0, 30.0]).unwrap();
        // user 2 has the lowest transmittance, decoded last
        assert_eq!(interference_variance(&alloc, &ch, 2).unwrap(), 0.0);
    }

    #[test]
    fn two_user_single_term() {
        let ch = chan(&[0.5, 0.5]);
        let alloc = PowerAllocation::new(vec![10.0, 10.0]).unwrap();
        // tie broken by index: order (0, 1); user 0 sees T_1 V_1 = 5
        assert!((interference_variance(&alloc, &ch, 0).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn matches_bruteforce_trailing_sum() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let k = 3;
            let ts: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..0.95)).collect();
            let vs: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..100.0)).collect();
            let ch = chan(&ts);
            let alloc = PowerAllocation::new(vs.clone()).unwrap();
            for user in 0..k {
                let pos = ch.decoding_order.iter().position(|&u| u == user).unwrap();
                let brute: f64 = ch.decoding_order[pos + 1..]
                    .iter()
                    .map(|&i| ts[i] * vs[i])
                    .sum();
                let got = interference_variance(&alloc, &ch, user).unwrap();
                assert!((got - brute).abs() < 1e-12);
            }
        }
    }

    // -- lower_bound -------------------------------------------------------------

    #[test]
    fn plugin_arithmetic_last_user() {
        // T = 1, V = 15, detector noise 0.16 only: log2(1 + 93.75).
        let ch = chan(&[1.0]);
        let alloc = PowerAllocation::new(vec![15.0]).unwrap();
        let c = cfg(1, 123.0, 0.16, 0.92); // W irrelevant at T = 1
        let got = lower_bound(&alloc, &ch, &c, 0).unwrap();
        assert!((got - 6.566054038171092).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn vanishing_transmittance_gives_zero_rate() {
        let ch = chan(&[1e-300]);
        let alloc = PowerAllocation::new(vec![1.0e6]).unwrap();
        let c = cfg(1, 0.1, 0.16, 0.92);
        assert!(lower_bound(&alloc, &ch, &c, 0).unwrap() < 1e-250);
    }

    #[test]
    fn monte_carlo_mutual_information_upper_bounds_single_user() {
        // Gaussian-channel sampling oracle: correlation-based MI estimate
        // (per quadrature, doubled for heterodyne) of y = sqrt(T) x + n.
        let t = 0.7;
        let v = 12.0;
        let (w, d2) = (0.15, 0.16);
        let ch = chan(&[t]);
        let alloc = PowerAllocation::new(vec![v]).unwrap();
        let c = cfg(1, w, d2, 0.92);
        let bound = lower_bound(&alloc, &ch, &c, 0).unwrap();

        let noise_sd = ((1.0 - t) * w + d2).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let batches = 20usize;
        let per = 20_000usize;
        let mut estimates = Vec::with_capacity(batches);
        for _ in 0..batches {
            let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
            for _ in 0..per {
                let x = v.sqrt() * gaussian(&mut rng);
                let y = t.sqrt() * x + noise_sd * gaussian(&mut rng);
                sxx += x * x;
                syy += y * y;
                sxy += x * y;
            }
            let rho2 = sxy * sxy / (sxx * syy);
            estimates.push(-(1.0 - rho2).log2());
        }
        let mean = estimates.iter().sum::<f64>() / batches as f64;
        let sd = (estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / (batches as f64 - 1.0))
            .sqrt();
        let se = sd / (batches as f64).sqrt();
        assert!(
            bound <= mean + 3.0 * se,
            "bound {bound} above MC mutual information {mean} +- {se}"
        );
    }

    #[test]
    fn epi_bound_below_weighted_gaussian_mi() {
        // The printed (unweighted) interference denominator dominates the
        // transmittance-weighted one, so the bound sits below the Gaussian
        // mutual information computed with the full weighted noise.
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..1000 {
            let k = rng.gen_range(2..6);
            let ts: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..0.99)).collect();
            let vs: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..500.0)).collect();
            let ch = chan(&ts);
            let alloc = PowerAllocation::new(vs.clone()).unwrap();
            let c = cfg(k, rng.gen_range(0.0..0.5), rng.gen_range(0.01..0.5), 0.92);
            for user in 0..k {
                let bound = lower_bound(&alloc, &ch, &c, user).unwrap();
                let weighted = interference_variance(&alloc, &ch, user).unwrap();
                let delta_k =
                    weighted + (1.0 - ts[user]) * c.w[user] + c.delta_det_sq;
                let oracle = (ts[user] * vs[user] / delta_k).ln_1p() / LN_2;
                assert!(
                    bound <= oracle + 1e-12,
                    "EPI violation: {bound} > {oracle}"
                );
            }
        }
    }

    // -- sum_skr ---------------------------------------------------------------

    #[test]
    fn leakage_free_limit_sums_lower_bounds() {
        // Vanishing taps and no excess noise: chi -> 0, eta = 1.
        let k = 3;
        let ts = vec![1e-7, 2e-7, 3e-7];
        let ch = chan(&ts);
        let alloc = PowerAllocation::new(vec![50.0, 40.0, 30.0]).unwrap();
        let c = cfg(k, 0.0, 0.16, 1.0);
        let rep = sum_skr(&alloc, &ch, &c, SkrVariant::Explicit).unwrap();
        let direct: f64 = (0..k)
            .map(|u| lower_bound(&alloc, &ch, &c, u).unwrap())
            .sum();
        assert!((rep.skr_sum - direct).abs() < 1e-6);
        assert!((rep.raw_sum() - rep.skr_sum).abs() < 1e-15);
    }

    #[test]
    fn report_sums_are_consistent() {
        let k = 4;
        let ts = vec![0.9, 0.7, 0.5, 0.3];
        let ch = chan(&ts);
        let alloc = PowerAllocation::uniform(k, 50.0).unwrap();
        let mut c = cfg(k, 0.1, 0.16, 0.92);
        let rep = sum_skr(&alloc, &ch, &c, SkrVariant::Explicit).unwrap();
        let manual: f64 = rep.skr_user.iter().sum();
        assert!((rep.skr_sum - manual).abs() < 1e-12);
        // clipped mode
        c.clip_negative_users = true;
        let rep2 = sum_skr(&alloc, &ch, &c, SkrVariant::Explicit).unwrap();
        assert!((rep2.skr_sum - rep2.clipped_sum()).abs() < 1e-12);
        assert!(rep2.skr_sum >= rep.skr_sum);
        // per-user decomposition
        for u in 0..k {
            assert!(
                (rep.skr_user[u] - (0.92 * rep.i_low[u] - rep.chi[u])).abs() < 1e-12
            );
        }
    }

    #[test]
    fn explicit_and_asymptotic_agree_at_large_modulation() {
        // Representative strong-noise sweep configuration; all users at
        // V >= 1e3 keeps the large-modulation forms within 2%.
        let k = 6;
        let ts: Vec<f64> = (0..k).map(|i| 0.9 - 0.1 * i as f64).collect();
        let ch = chan(&ts);
        let c = cfg(k, 2.0, 0.16, 0.92);
        for &v in &[1.0e3, 1.0e4] {
            let alloc = PowerAllocation::uniform(k, v).unwrap();
            let e = sum_skr(&alloc, &ch, &c, SkrVariant::Explicit).unwrap();
            let a = sum_skr(&alloc, &ch, &c, SkrVariant::Asymptotic).unwrap();
            let chi_e: f64 = e.chi.iter().sum();
            let chi_a: f64 = a.chi.iter().sum();
            let rel = (chi_a - chi_e).abs() / chi_e;
            assert!(rel < 0.02, "relative Holevo gap {rel} at V = {v}");
        }
    }

    // -- sum_rate_integral --------------------------------------------------------

    fn closed_form_sum_rate(ts: &[f64], vs: &[f64], c: &SystemConfig) -> f64 {
        // Oracle: Y is Gaussian, so the rate is 0.5 log2(1 + sum T V / delta^2).
        let d2: f64 = c.delta_det_sq
            + ts.iter()
                .zip(&c.w)
                .map(|(&t, &w)| (1.0 - t) * w)
                .sum::<f64>();
        let s: f64 = ts.iter().zip(vs).map(|(&t, &v)| t * v).sum();
        0.5 * (s / d2).ln_1p() / LN_2
    }

    #[test]
    fn quadrature_matches_closed_form_k1() {
        let ts = vec![0.8];
        let vs = vec![20.0];
        let ch = chan(&ts);
        let c = cfg(1, 0.1, 0.16, 0.92);
        let alloc = PowerAllocation::new(vs.clone()).unwrap();
        let got = sum_rate_integral(&alloc, &ch, &c, SumRateMethod::Quadrature { nodes: 64 })
            .unwrap()
            .bits;
        let oracle = closed_form_sum_rate(&ts, &vs, &c);
        assert!(
            (got - oracle).abs() <= 1e-6 * oracle,
            "got {got}, oracle {oracle}"
        );
    }

    #[test]
    fn quadrature_matches_closed_form_k2_k3() {
        let mut rng = StdRng::seed_from_u64(21);
        for &k in &[2usize, 3] {
            for _ in 0..5 {
                let ts: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..0.95)).collect();
                let vs: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..50.0)).collect();
                let ch = chan(&ts);
                let c = cfg(k, rng.gen_range(0.0..0.3), rng.gen_range(0.05..0.3), 0.92);
                let alloc = PowerAllocation::new(vs.clone()).unwrap();
                let got =
                    sum_rate_integral(&alloc, &ch, &c, SumRateMethod::Quadrature { nodes: 64 })
                        .unwrap()
                        .bits;
                let oracle = closed_form_sum_rate(&ts, &vs, &c);
                assert!(
                    (got - oracle).abs() <= 1e-6 * oracle,
                    "K={k}: got {got}, oracle {oracle}"
                );
            }
        }
    }

    #[test]
    fn integral_vanishes_with_modulation() {
        let ts = vec![0.6, 0.4];
        let ch = chan(&ts);
        let c = cfg(2, 0.1, 0.16, 0.92);
        let got = sum_rate_integral_raw(
            &[1e-9, 1e-9],
            &ch,
            &c,
            SumRateMethod::Quadrature { nodes: 64 },
        )
        .unwrap()
        .bits;
        assert!(got.abs() < 1e-8, "got {got}");
    }

    #[test]
    fn integral_invariant_under_relabeling() {
        let c = cfg(3, 0.1, 0.16, 0.92);
        let ts = [0.8, 0.5, 0.2];
        let vs = [30.0, 10.0, 5.0];
        let perm = [2usize, 0, 1];
        let ch1 = chan(&ts);
        let a1 = PowerAllocation::new(vs.to_vec()).unwrap();
        let ts2: Vec<f64> = perm.iter().map(|&i| ts[i]).collect();
        let vs2: Vec<f64> = perm.iter().map(|&i| vs[i]).collect();
        let ch2 = chan(&ts2);
        let a2 = PowerAllocation::new(vs2).unwrap();
        let q = SumRateMethod::Quadrature { nodes: 48 };
        let r1 = sum_rate_integral(&a1, &ch1, &c, q).unwrap().bits;
        let r2 = sum_rate_integral(&a2, &ch2, &c, q).unwrap().bits;
        assert!((r1 - r2).abs() < 1e-10);
    }

    #[test]
    fn quadrature_rejects_high_dimensions() {
        let ch = chan(&[0.5, 0.5, 0.5, 0.5]);
        let c = cfg(4, 0.1, 0.16, 0.92);
        let alloc = PowerAllocation::uniform(4, 5.0).unwrap();
        assert!(matches!(
            sum_rate_integral(&alloc, &ch, &c, SumRateMethod::Quadrature { nodes: 32 }),
            Err(QskrError::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn monte_carlo_brackets_closed_form() {
        let ts = vec![0.7, 0.5, 0.3, 0.6];
        let vs = vec![8.0, 4.0, 6.0, 3.0];
        let ch = chan(&ts);
        let c = cfg(4, 0.1, 0.16, 0.92);
        let alloc = PowerAllocation::new(vs.clone()).unwrap();
        let est = sum_rate_integral(
            &alloc,
            &ch,
            &c,
            SumRateMethod::MonteCarlo {
                samples: 20_000,
                seed: 77,
            },
        )
        .unwrap();
        let oracle = closed_form_sum_rate(&ts, &vs, &c);
        let se = est.std_error.unwrap();
        // allow the O(1/M) plug-in bias on top of 4 standard errors
        assert!(
            (est.bits - oracle).abs() < 4.0 * se + 0.02,
            "MC {} +- {se} vs oracle {oracle}",
            est.bits
        );
    }

    // -- appendix_c_limits ----------------------------------------------------------

    #[test]
    fn last_user_limit_unbounded() {
        let ch = chan(&[0.9, 0.3]);
        let c = cfg(2, 0.1, 0.16, 0.92);
        let lims = appendix_c_limits(&[1.0, 1.0], &ch, &c).unwrap();
        assert!(matches!(lims[1], RateLimit::Unbounded));
    }

    #[test]
    fn interior_limit_matches_formula_and_sequence() {
        let ts = [0.9, 0.6, 0.3];
        let cvec = [2.0, 1.0, 0.5];
        let ch = chan(&ts);
        let c = cfg(3, 0.1, 0.16, 0.92);
        let lims = appendix_c_limits(&cvec, &ch, &c).unwrap();
        // user 0 decoded first: trailing coefficients are c_1 + c_2
        let expect = (ts[0] * cvec[0] / (cvec[1] + cvec[2])).ln_1p() / LN_2;
        match lims[0] {
            RateLimit::Finite(l) => {
                assert!((l - expect).abs() < 1e-12);
                // the implemented bound approaches the limit from below
                let mut prev_gap = f64::INFINITY;
                for &v in &[1.0e3, 1.0e5, 1.0e7] {
                    let alloc =
                        PowerAllocation::new(cvec.iter().map(|&x| x * v).collect()).unwrap();
                    let bound = lower_bound(&alloc, &ch, &c, 0).unwrap();
                    let gap = (l - bound).abs();
                    assert!(gap < prev_gap);
                    prev_gap = gap;
                }
                assert!(prev_gap < 1e-4);
            }
            RateLimit::Unbounded => panic!("expected finite limit"),
        }
    }

    #[test]
    fn uniform_two_user_limit() {
        let ch = chan(&[0.5, 0.5]);
        let c = cfg(2, 0.1, 0.16, 0.92);
        let lims = appendix_c_limits(&[1.0, 1.0], &ch, &c).unwrap();
        match lims[0] {
            RateLimit::Finite(l) => assert!((l - 1.5f64.log2()).abs() < 1e-12),
            _ => panic!("expected finite"),
        }
    }
}
