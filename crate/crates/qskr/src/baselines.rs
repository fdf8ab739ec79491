//! Comparison allocators: orthogonal-access (Q-OMA), uniform power
//! (UQPA), and conservative interference handling (CIH).
//!
//! All three produce allocations feasible for the same power constraints
//! as the optimizer and evaluate through the same entropy/Holevo
//! machinery, so their reports are directly comparable with the
//! SCA allocator's.

use crate::channel::ChannelState;
use crate::error::{QskrError, Result};
use crate::quantum_core::{holevo_asym, holevo_explicit, LinkNoise};
use crate::rates::{
    InterferenceWeighting, PowerAllocation, SkrReport, SkrVariant, SystemConfig,
};
use crate::sca_opt::FeasibleSet;

const LN_2: f64 = std::f64::consts::LN_2;

/// The three benchmark schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Orthogonal resources, transmittance-proportional power split.
    Qoma,
    /// One common modulation variance for every user.
    Uqpa,
    /// No interference cancellation: all other users count as noise.
    Cih,
}

// ---------------------------------------------------------------------------
// Allocators
// ---------------------------------------------------------------------------

/// Transmittance-proportional split of the receiver budget:
/// `V_k = V_max_bs * T_k / sum T_i`, then floor/cap water-refill (clamped
/// users drop out, the remainder is redistributed proportionally), then a
/// final rescale toward the vacuum floor if the coupled receiver
/// constraint still binds.
pub fn allocate_qoma(config: &SystemConfig, channel: &ChannelState) -> Result<PowerAllocation> {
    let feasible = FeasibleSet::from_config(config, channel)?;
    let k = channel.users();
    let t_sum: f64 = channel.t_k.iter().sum();
    if t_sum <= 0.0 {
        return Err(QskrError::Infeasible("zero total transmittance".into()));
    }

    // Water-refill of the variance budget sum(V_k) = v_max_bs with weights
    // T_k against the box [1, cap].
    let budget = config.v_max_bs;
    let mut v: Vec<f64> = vec![0.0; k];
    let mut fixed = vec![false; k];
    let mut fixed_total = 0.0;
    for _ in 0..=k {
        let free_weight: f64 = (0..k)
            .filter(|&i| !fixed[i])
            .map(|i| channel.t_k[i])
            .sum();
        if free_weight <= 0.0 {
            break;
        }
        let remaining = (budget - fixed_total).max(0.0);
        let mut changed = false;
        for i in 0..k {
            if fixed[i] {
                continue;
            }
            v[i] = remaining * channel.t_k[i] / free_weight;
            if v[i] >= feasible.upper[i] {
                v[i] = feasible.upper[i];
                fixed[i] = true;
                fixed_total += v[i];
                changed = true;
            } else if v[i] <= 1.0 {
                v[i] = 1.0;
                fixed[i] = true;
                fixed_total += 1.0;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Rescale along the segment toward the vacuum floor until the coupled
    // receiver constraint holds.
    let load = |s: f64, v: &[f64]| -> f64 {
        v.iter()
            .zip(&feasible.coeffs)
            .map(|(&vi, &c)| c * (1.0 + s * (vi - 1.0)))
            .sum()
    };
    let mut s = 1.0;
    if load(1.0, &v) > feasible.rhs {
        let mut lo = 0.0;
        let mut hi = 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if load(mid, &v) > feasible.rhs {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        s = lo;
    }
    let v: Vec<f64> = v.iter().map(|&vi| 1.0 + s * (vi - 1.0)).collect();
    PowerAllocation::new(v)
}

/// Largest common modulation variance the constraints admit:
/// `V = min(min_k cap_k, coupled_rhs / sum T_i)`.
pub fn allocate_uqpa(config: &SystemConfig, channel: &ChannelState) -> Result<PowerAllocation> {
    let feasible = FeasibleSet::from_config(config, channel)?;
    let t_sum: f64 = channel.t_k.iter().sum();
    let cap = feasible.upper.iter().fold(f64::INFINITY, |a, &u| a.min(u));
    let v = cap.min(feasible.rhs / t_sum);
    if v < 1.0 {
        return Err(QskrError::Infeasible(format!(
            "uniform variance {v} below the vacuum floor"
        )));
    }
    PowerAllocation::uniform(channel.users(), v)
}

// ---------------------------------------------------------------------------
// Evaluators
// ---------------------------------------------------------------------------

fn report_from_parts(
    config: &SystemConfig,
    i_low: Vec<f64>,
    chi: Vec<f64>,
    variant: SkrVariant,
    clamped_users: usize,
    scale: f64,
) -> SkrReport {
    let skr_user: Vec<f64> = i_low
        .iter()
        .zip(&chi)
        .map(|(&i, &c)| scale * (config.eta * i - c))
        .collect();
    let skr_sum = if config.clip_negative_users {
        skr_user.iter().map(|s| s.max(0.0)).sum()
    } else {
        skr_user.iter().sum()
    };
    SkrReport {
        i_low,
        chi,
        skr_user,
        skr_sum,
        variant,
        clamped_users,
    }
}

/// Evaluate a Q-OMA allocation: every user transmits on its own orthogonal
/// resource, so both the rate bound and the Holevo bound see zero
/// inter-user interference.  With `resource_scaling` on (the default
/// convention), per-user rates carry the 1/K time-sharing factor.
pub fn evaluate_qoma(
    alloc: &PowerAllocation,
    channel: &ChannelState,
    config: &SystemConfig,
    variant: SkrVariant,
    resource_scaling: bool,
) -> Result<SkrReport> {
    let k = channel.users();
    let mut i_low = vec![0.0; k];
    let mut chi = vec![0.0; k];
    let mut clamped = 0;
    for user in 0..k {
        let t = channel.t_k[user];
        let v = alloc.get(user);
        let denom = (1.0 - t) * config.w[user] + config.delta_det_sq;
        if denom <= 0.0 {
            return Err(QskrError::domain("evaluate_qoma", "zero noise floor"));
        }
        i_low[user] = (t * v / denom).ln_1p() / LN_2;
        let noise = LinkNoise::assemble(
            v,
            t.min(1.0 - 1e-15),
            config.w[user],
            config.delta_det_sq,
            0.0,
        )
        .map_err(|e| e.for_user(user))?;
        let hol = match variant {
            SkrVariant::Explicit => holevo_explicit(v, &noise),
            SkrVariant::Asymptotic => holevo_asym(v, &noise),
        }
        .map_err(|e| e.for_user(user))?;
        if hol.clamped_lambda2 || hol.clamped_het {
            clamped += 1;
        }
        chi[user] = hol.bits;
    }
    let scale = if resource_scaling { 1.0 / k as f64 } else { 1.0 };
    Ok(report_from_parts(config, i_low, chi, variant, clamped, scale))
}

/// Evaluate an allocation with conservative interference handling: no SIC,
/// so user `k` sees all other `K - 1` users as noise in both the rate
/// bound and the Holevo bound.
pub fn evaluate_cih(
    alloc: &PowerAllocation,
    channel: &ChannelState,
    config: &SystemConfig,
    variant: SkrVariant,
) -> Result<SkrReport> {
    let k = channel.users();
    let mut i_low = vec![0.0; k];
    let mut chi = vec![0.0; k];
    let mut clamped = 0;
    for user in 0..k {
        let t = channel.t_k[user];
        let v = alloc.get(user);
        let v_i: f64 = (0..k)
            .filter(|&i| i != user)
            .map(|i| channel.t_k[i] * alloc.get(i))
            .sum();
        let interf: f64 = match config.interference_weighting {
            InterferenceWeighting::Printed => (0..k)
                .filter(|&i| i != user)
                .map(|i| alloc.get(i))
                .sum(),
            InterferenceWeighting::Transmittance => v_i,
        };
        let denom = interf + (1.0 - t) * config.w[user] + config.delta_det_sq;
        i_low[user] = (t * v / denom).ln_1p() / LN_2;
        let noise = LinkNoise::assemble(
            v,
            t.min(1.0 - 1e-15),
            config.w[user],
            config.delta_det_sq,
            v_i,
        )
        .map_err(|e| e.for_user(user))?;
        let hol = match variant {
            SkrVariant::Explicit => holevo_explicit(v, &noise),
            SkrVariant::Asymptotic => holevo_asym(v, &noise),
        }
        .map_err(|e| e.for_user(user))?;
        if hol.clamped_lambda2 || hol.clamped_het {
            clamped += 1;
        }
        chi[user] = hol.bits;
    }
    Ok(report_from_parts(config, i_low, chi, variant, clamped, 1.0))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
