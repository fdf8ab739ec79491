//! Successive convex approximation for the sum-secret-key-rate power
//! allocation problem.
//!
//! The allocator maximizes the asymptotic sum SKR over per-user modulation
//! variances subject to per-user caps and a coupled receiver power limit.
//! Each outer iteration replaces the non-concave Holevo pieces with
//! first-order surrogates anchored at the previous iterate (value- and
//! gradient-consistent there), solves the resulting subproblem with a
//! projected-gradient inner solver, and re-anchors.  A KKT verifier runs
//! on the final iterate.
//!
//! Conventions: allocations are user-indexed vectors; all objectives are
//! raw (unclipped) asymptotic sums in bits/symbol.

use crate::channel::ChannelState;
use crate::error::{QskrError, Result};
use crate::quantum_core::LinkNoise;
use crate::rates::{InterferenceWeighting, PowerAllocation, SystemConfig};

const LN_2: f64 = std::f64::consts::LN_2;

// ---------------------------------------------------------------------------
// Feasible set
// ---------------------------------------------------------------------------

/// Box constraints plus one coupled halfspace:
/// `lower <= v <= upper`, `sum coeffs_i v_i <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    /// Per-user floor (vacuum unit by default).
    pub lower: Vec<f64>,
    /// Per-user caps.
    pub upper: Vec<f64>,
    /// Halfspace coefficients (the transmittances).
    pub coeffs: Vec<f64>,
    /// Halfspace right-hand side:
    /// `v_max_bs - sum (1 - T_i) W_i - delta_det^2`.
    pub rhs: f64,
}

impl FeasibleSet {
    /// Build the feasible set of the power-allocation problem.
    pub fn from_config(config: &SystemConfig, channel: &ChannelState) -> Result<Self> {
        config.validate()?;
        let k = channel.users();
        if config.k_users != k {
            return Err(QskrError::domain(
                "FeasibleSet",
                "config/channel size mismatch",
            ));
        }
        let noise_load: f64 = channel
            .t_k
            .iter()
            .zip(&config.w)
            .map(|(&t, &w)| (1.0 - t) * w)
            .sum();
        let rhs = config.v_max_bs - noise_load - config.delta_det_sq;
        if rhs <= 0.0 {
            return Err(QskrError::Infeasible(format!(
                "coupled constraint RHS = {rhs} <= 0"
            )));
        }
        let lower = vec![1.0; k];
        let upper = config.v_max_user.clone();
        let floor_load: f64 = channel.t_k.iter().sum();
        if floor_load > rhs {
            return Err(QskrError::Infeasible(format!(
                "vacuum-floor load {floor_load} exceeds coupled RHS {rhs}"
            )));
        }
        Ok(FeasibleSet {
            lower,
            upper,
            coeffs: channel.t_k.clone(),
            rhs,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Membership up to tolerance `tol` on every constraint.
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        if v.len() != self.dim() {
            return false;
        }
        let box_ok = v
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&x, (&l, &u))| x >= l - tol && x <= u + tol);
        let load: f64 = self.coeffs.iter().zip(v).map(|(c, x)| c * x).sum();
        box_ok && load <= self.rhs + tol * self.rhs.abs().max(1.0)
    }

    /// Euclidean projection onto the box intersected with the halfspace.
    ///
    /// The box projection of `y - mu * coeffs` solves the problem for the
    /// right multiplier `mu >= 0`; the halfspace load is nonincreasing in
    /// `mu`, so `mu` is found by bisection.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let clamp = |mu: f64| -> Vec<f64> {
            y.iter()
                .enumerate()
                .map(|(i, &yi)| (yi - mu * self.coeffs[i]).clamp(self.lower[i], self.upper[i]))
                .collect()
        };
        let load = |v: &[f64]| -> f64 { self.coeffs.iter().zip(v).map(|(c, x)| c * x).sum() };

        let x0 = clamp(0.0);
        if load(&x0) <= self.rhs {
            return x0;
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while load(&clamp(hi)) > self.rhs {
            hi *= 2.0;
            if hi > 1e300 {
                break;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if load(&clamp(mid)) > self.rhs {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        clamp(hi)
    }
}

// ---------------------------------------------------------------------------
// Asymptotic objective and its gradient
// ---------------------------------------------------------------------------

/// Evaluation context for the raw asymptotic sum SKR and its gradient.
///
/// Holds what the per-user terms need: decoding order, transmittances,
/// per-user fixed noise `m~_k = (1 - T_k) W_k + delta_det^2`.
pub struct AsymObjective<'a> {
    channel: &'a ChannelState,
    config: &'a SystemConfig,
    m_fixed: Vec<f64>,
}

/// Entropy derivative `h'(x) = 0.5 log2((x + 1)/(x - 1))` for `x > 1`.
fn entropy_slope(x: f64) -> f64 {
    0.5 * ((x + 1.0) / (x - 1.0)).log2()
}

/// Clamped entropy: the `h(1) = 0` limit below 1.
fn entropy_clamped(x: f64) -> f64 {
    if x > 1.0 {
        crate::quantum_core::entropy_h(x).unwrap_or(0.0)
    } else {
        0.0
    }
}

impl<'a> AsymObjective<'a> {
    pub fn new(channel: &'a ChannelState, config: &'a SystemConfig) -> Result<Self> {
        config.validate()?;
        if config.k_users != channel.users() {
            return Err(QskrError::domain(
                "AsymObjective",
                "config/channel size mismatch",
            ));
        }
        let m_fixed = channel
            .t_k
            .iter()
            .zip(&config.w)
            .map(|(&t, &w)| (1.0 - t) * w + config.delta_det_sq)
            .collect();
        Ok(AsymObjective {
            channel,
            config,
            m_fixed,
        })
    }

    fn users(&self) -> usize {
        self.channel.users()
    }

    /// Trailing interference of the user at `pos` in decoding order.
    fn v_interference(&self, v: &[f64], pos: usize) -> f64 {
        self.channel.decoding_order[pos + 1..]
            .iter()
            .map(|&i| self.channel.t_k[i] * v[i])
            .sum()
    }

    /// Rate-bound interference per the configured weighting.
    fn rate_denominator(&self, v: &[f64], pos: usize, user: usize) -> f64 {
        let interf: f64 = match self.config.interference_weighting {
            InterferenceWeighting::Printed => self.channel.decoding_order[pos + 1..]
                .iter()
                .map(|&i| v[i])
                .sum(),
            InterferenceWeighting::Transmittance => self.v_interference(v, pos),
        };
        interf + self.m_fixed[user]
    }

    /// Raw asymptotic sum SKR at allocation `v` (user-indexed, all >= 1).
    pub fn value(&self, v: &[f64]) -> f64 {
        let mut total = 0.0;
        for (pos, &user) in self.channel.decoding_order.iter().enumerate() {
            let t = self.channel.t_k[user];
            let vi = self.v_interference(v, pos);
            let m = self.m_fixed[user] + vi;
            let vk = v[user];
            let b = t * vk + m;
            let s2 = vk * vk + b * b;
            let lead = std::f64::consts::E.log2() - 1.0 + 0.5 * s2.log2();
            let lam2 = vk * (vi + self.config.delta_det_sq) / s2.sqrt();
            let lam_het = vk * m / b;
            let chi = lead + entropy_clamped(lam2) - entropy_clamped(lam_het);
            let d = self.rate_denominator(v, pos, user);
            let rate = (t * vk / d).ln_1p() / LN_2;
            total += self.config.eta * rate - chi;
        }
        total
    }

    /// Closed-form gradient of [`value`](Self::value), user-indexed.
    ///
    /// Clamped entropy terms contribute zero slope, matching the value's
    /// piecewise definition away from the clamp boundaries.
    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let k = self.users();
        let mut grad = vec![0.0; k];
        let order = &self.channel.decoding_order;
        for (pos, &user) in order.iter().enumerate() {
            let t = self.channel.t_k[user];
            let vi = self.v_interference(v, pos);
            let q = vi + self.config.delta_det_sq;
            let m = self.m_fixed[user] + vi;
            let vk = v[user];
            let b = t * vk + m;
            let s2 = vk * vk + b * b;
            let lam2 = vk * q / s2.sqrt();
            let lam_het = vk * m / b;
            let h2_slope = if lam2 > 1.0 { entropy_slope(lam2) } else { 0.0 };
            let het_slope = if lam_het > 1.0 {
                entropy_slope(lam_het)
            } else {
                0.0
            };

            // chi partial wrt own variance
            let mut chi_own = (vk + b * t) / (s2 * LN_2);
            chi_own += h2_slope * q * b * (b - vk * t) / s2.powf(1.5);
            chi_own -= het_slope * (m * m) / (b * b);
            grad[user] -= chi_own;

            // chi partials wrt later-decoded users (through V_I)
            for &j in &order[pos + 1..] {
                let tj = self.channel.t_k[j];
                let mut chi_j = b * tj / (s2 * LN_2);
                chi_j += h2_slope * vk * tj * (s2 - q * b) / s2.powf(1.5);
                chi_j -= het_slope * vk * tj * (b - m) / (b * b);
                grad[j] -= chi_j;
            }

            // rate term
            let d = self.rate_denominator(v, pos, user);
            let full = d + t * vk;
            grad[user] += self.config.eta * t / (full * LN_2);
            let cj = |j: usize| match self.config.interference_weighting {
                InterferenceWeighting::Printed => 1.0,
                InterferenceWeighting::Transmittance => self.channel.t_k[j],
            };
            for &j in &order[pos + 1..] {
                grad[j] += self.config.eta * cj(j) * (1.0 / full - 1.0 / d) / LN_2;
            }
        }
        grad
    }
}

// ---------------------------------------------------------------------------
// Surrogate construction
// ---------------------------------------------------------------------------

/// Per-user anchor of one SCA iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogatePoint {
    /// Reference modulation variance.
    pub v_ref: f64,
    /// Received variance at the reference.
    pub b_ref: f64,
    /// Trailing interference at the reference.
    pub v_i_ref: f64,
    /// Large-modulation eigenvalues at the reference.
    pub lambda1_ref: f64,
    pub lambda2_ref: f64,
    pub lambda_het_ref: f64,
    /// Concave branch (`v_ref > b_ref`): the leading Holevo term is
    /// linearized; otherwise it is kept exact.
    pub concave_regime: bool,
    /// The second-eigenvalue entropy is pinned at its `h(1) = 0` limit
    /// because the reference already sits at or below 1.
    pub h2_degenerate: bool,
}

impl SurrogatePoint {
    /// Anchor at modulation variance `v_ref` with the interference frozen
    /// in `noise`.
    pub fn at(v_ref: f64, noise: &LinkNoise) -> Result<Self> {
        let s = crate::quantum_core::symplectic_spectrum_asym(v_ref, noise)?;
        let b_ref = noise.recompute_b(v_ref);
        Ok(SurrogatePoint {
            v_ref,
            b_ref,
            v_i_ref: noise.v_interference,
            lambda1_ref: s.lambda1,
            lambda2_ref: s.lambda2,
            lambda_het_ref: s.lambda_het,
            concave_regime: v_ref > b_ref,
            h2_degenerate: s.lambda2 <= 1.0,
        })
    }
}

/// Leading-term value `log2((e/2) sqrt(v^2 + b(v)^2))` along own variance,
/// with the interference part of `b` frozen.
fn h1_value(v: f64, t: f64, m: f64) -> f64 {
    let b = t * v + m;
    std::f64::consts::E.log2() - 1.0 + 0.5 * (v * v + b * b).log2()
}

/// Own-variance slope of the leading term: `(v + b t) / ((v^2 + b^2) ln 2)`.
fn h1_slope(v: f64, t: f64, m: f64) -> f64 {
    let b = t * v + m;
    (v + b * t) / ((v * v + b * b) * LN_2)
}

/// One-user surrogate of the leading Holevo term, as a function of that
/// user's modulation variance with cross terms frozen at the anchor.
///
/// Concave branch: first-order expansion at the anchor (an upper bound for
/// the concave leading term, hence an objective minorant).  Convex branch:
/// the exact term.
pub fn surrogate_h1(v_a: f64, noise: &LinkNoise, point: &SurrogatePoint) -> f64 {
    let t = noise.t_k;
    let m = noise.ambient();
    if point.concave_regime {
        h1_value(point.v_ref, t, m) + h1_slope(point.v_ref, t, m) * (v_a - point.v_ref)
    } else {
        h1_value(v_a, t, m)
    }
}

/// Own-variance slope of `h(lambda2~(v))` with cross terms frozen.
fn h2_slope_own(v: f64, t: f64, m: f64, q: f64, lam2: f64) -> f64 {
    if lam2 <= 1.0 {
        return 0.0;
    }
    let b = t * v + m;
    let s2 = v * v + b * b;
    entropy_slope(lam2) * q * b * (b - v * t) / s2.powf(1.5)
}

/// One-user surrogate of the second-eigenvalue entropy term: first-order
/// expansion of `h(lambda2~(v))` at the anchor, or the constant 0 when the
/// anchor eigenvalue already sits at or below 1 (degenerate case).
pub fn surrogate_h2(v_a: f64, noise: &LinkNoise, point: &SurrogatePoint) -> f64 {
    if point.h2_degenerate {
        return 0.0;
    }
    let t = noise.t_k;
    let m = noise.ambient();
    let q = noise.v_interference + noise.delta_det_sq;
    let value = entropy_clamped(point.lambda2_ref);
    let slope = h2_slope_own(point.v_ref, t, m, q, point.lambda2_ref);
    value + slope * (v_a - point.v_ref)
}

/// Full surrogate objective of one SCA iteration: exact rate and
/// conditional-entropy terms, linearized leading and second-eigenvalue
/// Holevo terms (linearized in the full allocation vector, so value and
/// gradient match the true objective at the anchor).
pub struct SurrogateModel<'a> {
    objective: &'a AsymObjective<'a>,
    points: Vec<SurrogatePoint>,
    /// Per linearized term: value at anchor and dense gradient over users.
    h1_lin: Vec<Option<(f64, Vec<f64>)>>,
    h2_lin: Vec<Option<(f64, Vec<f64>)>>,
    anchor: Vec<f64>,
}

impl<'a> SurrogateModel<'a> {
    /// Build the surrogate anchored at allocation `v_ref`.
    pub fn new(objective: &'a AsymObjective<'a>, v_ref: &[f64]) -> Result<Self> {
        let ch = objective.channel;
        let cfg = objective.config;
        let k = ch.users();
        let mut points: Vec<Option<SurrogatePoint>> = vec![None; k];
        let mut h1_lin: Vec<Option<(f64, Vec<f64>)>> = vec![None; k];
        let mut h2_lin: Vec<Option<(f64, Vec<f64>)>> = vec![None; k];
        let order = &ch.decoding_order;
        for (pos, &user) in order.iter().enumerate() {
            let t = ch.t_k[user];
            let vi = objective.v_interference(v_ref, pos);
            let noise = LinkNoise::assemble(
                v_ref[user],
                t.min(1.0 - 1e-15),
                cfg.w[user],
                cfg.delta_det_sq,
                vi,
            )?;
            let point = SurrogatePoint::at(v_ref[user], &noise)?;
            let m = noise.ambient();
            let q = vi + cfg.delta_det_sq;
            let vk = v_ref[user];
            let b = t * vk + m;
            let s2 = vk * vk + b * b;

            if point.concave_regime {
                // gradient of the leading term over all coordinates
                let mut g = vec![0.0; k];
                g[user] = h1_slope(vk, t, m);
                for &j in &order[pos + 1..] {
                    g[j] = b * ch.t_k[j] / (s2 * LN_2);
                }
                h1_lin[user] = Some((h1_value(vk, t, m), g));
            }
            if !point.h2_degenerate {
                let lam2 = point.lambda2_ref;
                let mut g = vec![0.0; k];
                g[user] = h2_slope_own(vk, t, m, q, lam2);
                for &j in &order[pos + 1..] {
                    g[j] = entropy_slope(lam2) * vk * ch.t_k[j] * (s2 - q * b) / s2.powf(1.5);
                }
                h2_lin[user] = Some((entropy_clamped(lam2), g));
            }
            points[user] = Some(point);
        }
        Ok(SurrogateModel {
            objective,
            points: points.into_iter().map(Option::unwrap).collect(),
            h1_lin,
            h2_lin,
            anchor: v_ref.to_vec(),
        })
    }

    pub fn points(&self) -> &[SurrogatePoint] {
        &self.points
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Surrogate objective value at `v`.
    pub fn value(&self, v: &[f64]) -> f64 {
        let obj = self.objective;
        let ch = obj.channel;
        let cfg = obj.config;
        let order = &ch.decoding_order;
        let mut total = 0.0;
        for (pos, &user) in order.iter().enumerate() {
            let t = ch.t_k[user];
            let vi = obj.v_interference(v, pos);
            let m = obj.m_fixed[user] + vi;
            let vk = v[user];
            let b = t * vk + m;
            let s2 = vk * vk + b * b;

            let h1 = match &self.h1_lin[user] {
                Some((val, g)) => {
                    val + g
                        .iter()
                        .zip(v.iter().zip(&self.anchor))
                        .map(|(gi, (x, a))| gi * (x - a))
                        .sum::<f64>()
                }
                None => std::f64::consts::E.log2() - 1.0 + 0.5 * s2.log2(),
            };
            let h2 = match &self.h2_lin[user] {
                Some((val, g)) => {
                    val + g
                        .iter()
                        .zip(v.iter().zip(&self.anchor))
                        .map(|(gi, (x, a))| gi * (x - a))
                        .sum::<f64>()
                }
                None => 0.0,
            };
            let lam_het = vk * m / b;
            let d = obj.rate_denominator(v, pos, user);
            let rate = (t * vk / d).ln_1p() / LN_2;
            total += cfg.eta * rate - (h1 + h2 - entropy_clamped(lam_het));
        }
        total
    }

    /// Gradient of the surrogate at `v`, user-indexed.
    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let obj = self.objective;
        let ch = obj.channel;
        let cfg = obj.config;
        let order = &ch.decoding_order;
        let k = ch.users();
        let mut grad = vec![0.0; k];
        for (pos, &user) in order.iter().enumerate() {
            let t = ch.t_k[user];
            let vi = obj.v_interference(v, pos);
            let m = obj.m_fixed[user] + vi;
            let vk = v[user];
            let b = t * vk + m;
            let s2 = vk * vk + b * b;

            match &self.h1_lin[user] {
                Some((_, g)) => {
                    for (gj, gv) in grad.iter_mut().zip(g) {
                        *gj -= gv;
                    }
                }
                None => {
                    grad[user] -= (vk + b * t) / (s2 * LN_2);
                    for &j in &order[pos + 1..] {
                        grad[j] -= b * ch.t_k[j] / (s2 * LN_2);
                    }
                }
            }
            if let Some((_, g)) = &self.h2_lin[user] {
                for (gj, gv) in grad.iter_mut().zip(g) {
                    *gj -= gv;
                }
            }
            // exact conditional-entropy term (+h(lambda_het~))
            let lam_het = vk * m / b;
            if lam_het > 1.0 {
                let het_slope = entropy_slope(lam_het);
                grad[user] += het_slope * (m * m) / (b * b);
                for &j in &order[pos + 1..] {
                    grad[j] += het_slope * vk * ch.t_k[j] * (b - m) / (b * b);
                }
            }
            // exact rate term
            let d = obj.rate_denominator(v, pos, user);
            let full = d + t * vk;
            grad[user] += cfg.eta * t / (full * LN_2);
            let cj = |j: usize| match cfg.interference_weighting {
                InterferenceWeighting::Printed => 1.0,
                InterferenceWeighting::Transmittance => ch.t_k[j],
            };
            for &j in &order[pos + 1..] {
                grad[j] += cfg.eta * cj(j) * (1.0 / full - 1.0 / d) / LN_2;
            }
        }
        grad
    }
}

// ---------------------------------------------------------------------------
// Inner solver
// ---------------------------------------------------------------------------

/// Result of one subproblem solve.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub alloc: PowerAllocation,
    /// Projected-gradient infinity norm at the returned point.
    pub residual: f64,
    pub iterations: usize,
    /// False when the iteration cap was reached before the tolerance.
    pub converged: bool,
}

/// Maximize the surrogate over the feasible set by projected gradient
/// ascent with Armijo backtracking.  Terminates when the unit-step
/// projected-gradient infinity norm drops to `tol` (default 1e-8) or
/// after 10^4 iterations, returning the best iterate found.
pub fn solve_subproblem(
    surrogate: &SurrogateModel<'_>,
    feasible: &FeasibleSet,
    start: &PowerAllocation,
    tol: f64,
) -> Result<SubproblemSolution> {
    if !feasible.contains(start.as_slice(), 1e-9) {
        return Err(QskrError::Infeasible(
            "subproblem start outside the feasible set".into(),
        ));
    }
    const MAX_ITER: usize = 10_000;
    let mut x = feasible.project(start.as_slice());
    let mut fx = surrogate.value(&x);
    let mut step = 1.0f64;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..MAX_ITER {
        iterations = it + 1;
        let g = surrogate.gradient(&x);
        // unit-step projected-gradient residual
        let probe: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + gi).collect();
        let proj = feasible.project(&probe);
        residual = x
            .iter()
            .zip(&proj)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual <= tol {
            converged = true;
            break;
        }

        // backtracking line search along the projected arc
        let mut accepted = false;
        let mut first_try = true;
        while step >= 1e-18 {
            let trial: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| xi + step * gi)
                .collect();
            let xt = feasible.project(&trial);
            let dir_deriv: f64 = g
                .iter()
                .zip(xt.iter().zip(&x))
                .map(|(gi, (t, xi))| gi * (t - xi))
                .sum();
            let ft = surrogate.value(&xt);
            if dir_deriv <= 0.0 {
                // projection moved against the gradient: shrink
                step *= 0.5;
                first_try = false;
                continue;
            }
            if ft >= fx + 1e-4 * dir_deriv {
                x = xt;
                fx = ft;
                accepted = true;
                if first_try {
                    step = (step * 2.0).min(1e12);
                }
                break;
            }
            step *= 0.5;
            first_try = false;
        }
        if !accepted {
            // no improving feasible step exists at machine precision
            break;
        }
    }

    Ok(SubproblemSolution {
        alloc: PowerAllocation::new(x)?,
        residual,
        iterations,
        converged: converged || residual <= tol,
    })
}

// ---------------------------------------------------------------------------
// KKT verification
// ---------------------------------------------------------------------------

/// Stationarity and complementary-slackness report at an allocation.
#[derive(Debug, Clone)]
pub struct KktReport {
    /// Infinity norm of `grad f - sum mu_i grad g_i` over active constraints.
    pub stationarity_residual: f64,
    /// Largest `mu_i |g_i|` over the active set.
    pub complementary_slackness: f64,
    /// Multiplier of the coupled constraint.
    pub mu_coupled: f64,
    /// Per-user bound multipliers (lower, upper).
    pub mu_bounds: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Verify first-order optimality of `alloc` for the asymptotic objective
/// over `feasible`.
///
/// The gradient is taken by finite differences of the true objective
/// (independent of the closed-form gradient used by the solver); active
/// bound multipliers are eliminated per coordinate and the coupled
/// multiplier is found by a ternary search that minimizes the stationarity
/// residual, which is convex in the multiplier.
pub fn kkt_check(
    alloc: &PowerAllocation,
    channel: &ChannelState,
    config: &SystemConfig,
    feasible: &FeasibleSet,
    tol: f64,
) -> Result<KktReport> {
    let objective = AsymObjective::new(channel, config)?;
    let v = alloc.as_slice();
    if !feasible.contains(v, 1e-7) {
        return Err(QskrError::Infeasible("kkt_check point infeasible".into()));
    }
    let k = v.len();

    // Finite-difference gradient, one-sided (second order) near the bounds.
    let f = |x: &[f64]| objective.value(x);
    let mut grad = vec![0.0; k];
    for j in 0..k {
        let h = 1e-5 * v[j].abs().max(1.0);
        let mut vp = v.to_vec();
        let mut vm = v.to_vec();
        if v[j] - h >= feasible.lower[j] {
            vp[j] = v[j] + h;
            vm[j] = v[j] - h;
            grad[j] = (f(&vp) - f(&vm)) / (2.0 * h);
        } else {
            let mut v2 = v.to_vec();
            vp[j] = v[j] + h;
            v2[j] = v[j] + 2.0 * h;
            grad[j] = (-3.0 * f(v) + 4.0 * f(&vp) - f(&v2)) / (2.0 * h);
        }
    }

    let act = 1e-6;
    let lower_active: Vec<bool> = (0..k)
        .map(|j| v[j] - feasible.lower[j] <= act * feasible.lower[j].abs().max(1.0))
        .collect();
    let upper_active: Vec<bool> = (0..k)
        .map(|j| feasible.upper[j] - v[j] <= act * feasible.upper[j].abs().max(1.0))
        .collect();
    let load: f64 = feasible.coeffs.iter().zip(v).map(|(c, x)| c * x).sum();
    let coupled_active = feasible.rhs - load <= act * feasible.rhs.abs().max(1.0);

    // residual as a function of the coupled multiplier
    let residual_at = |mu: f64| -> (f64, Vec<(f64, f64)>) {
        let mut worst = 0.0f64;
        let mut mus = Vec::with_capacity(k);
        for j in 0..k {
            let r = grad[j] - mu * feasible.coeffs[j];
            // stationarity: r + mu_lo - mu_up = 0 with multipliers >= 0
            let (mut lo, mut up) = (0.0, 0.0);
            let rem = if lower_active[j] && r < 0.0 {
                lo = -r;
                0.0
            } else if upper_active[j] && r > 0.0 {
                up = r;
                0.0
            } else {
                r
            };
            worst = worst.max(rem.abs());
            mus.push((lo, up));
        }
        (worst, mus)
    };

    let mu_coupled = if coupled_active {
        // ternary search on a convex piecewise-linear function of mu
        let mut lo = 0.0f64;
        let g_inf = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
        let c_min = feasible
            .coeffs
            .iter()
            .fold(f64::INFINITY, |a, &c| a.min(c.abs().max(1e-12)));
        let mut hi = (4.0 * g_inf / c_min).max(1.0);
        for _ in 0..300 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if residual_at(m1).0 <= residual_at(m2).0 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        0.5 * (lo + hi)
    } else {
        0.0
    };

    let (stationarity_residual, mu_bounds) = residual_at(mu_coupled);

    // complementary slackness over the included multipliers
    let mut slack = mu_coupled * (feasible.rhs - load).abs();
    for j in 0..k {
        slack = slack.max(mu_bounds[j].0 * (v[j] - feasible.lower[j]).abs());
        slack = slack.max(mu_bounds[j].1 * (feasible.upper[j] - v[j]).abs());
    }

    Ok(KktReport {
        stationarity_residual,
        complementary_slackness: slack,
        mu_coupled,
        mu_bounds,
        pass: stationarity_residual <= tol && slack <= tol,
    })
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

/// Iteration history of the power-allocation algorithm.
#[derive(Debug, Clone)]
pub struct ScaTrace {
    /// Iterates, starting with the initial allocation.
    pub iterates: Vec<PowerAllocation>,
    /// True asymptotic objective at each iterate.
    pub objectives: Vec<f64>,
    /// Surrogate objective evaluated at each accepted subproblem solution.
    pub surrogate_objectives: Vec<f64>,
    /// Final stationarity residual from [`kkt_check`].
    pub kkt_residual: f64,
    /// Largest complementary-slackness violation at the final iterate.
    pub kkt_slackness: f64,
    pub converged: bool,
    pub iterations_used: usize,
    /// Users whose concave/convex branch flipped across iterations.
    pub regime_flips: usize,
}

impl ScaTrace {
    pub fn final_alloc(&self) -> &PowerAllocation {
        self.iterates.last().expect("trace holds at least the init")
    }

    pub fn final_objective(&self) -> f64 {
        *self
            .objectives
            .last()
            .expect("trace holds at least the init")
    }
}

/// Outer SCA driver settings.
#[derive(Debug, Clone, Copy)]
pub struct ScaSettings {
    /// Stop when the true-objective change drops to this value (bits).
    pub tau_sca: f64,
    /// Outer iteration cap.
    pub t_max: usize,
    /// Inner projected-gradient tolerance.
    pub inner_tol: f64,
    /// Tolerance handed to the final KKT check.
    pub kkt_tol: f64,
}

impl Default for ScaSettings {
    fn default() -> Self {
        ScaSettings {
            tau_sca: 1e-6,
            t_max: 100,
            inner_tol: 1e-8,
            kkt_tol: 1e-5,
        }
    }
}

/// Run the power-allocation algorithm from `init`: anchor surrogates,
/// solve the subproblem, re-anchor, until the true asymptotic objective
/// stalls (`tau_sca`) or `t_max` iterations pass; then verify KKT
/// conditions at the final iterate.
pub fn run_algorithm1(
    config: &SystemConfig,
    channel: &ChannelState,
    init: &PowerAllocation,
    settings: &ScaSettings,
) -> Result<ScaTrace> {
    let feasible = FeasibleSet::from_config(config, channel)?;
    if !feasible.contains(init.as_slice(), 1e-9) {
        return Err(QskrError::Infeasible(
            "initial allocation violates the power constraints".into(),
        ));
    }
    let objective = AsymObjective::new(channel, config)?;

    let mut current = init.clone();
    let mut obj = objective.value(current.as_slice());
    let mut iterates = vec![current.clone()];
    let mut objectives = vec![obj];
    let mut surrogate_objectives = vec![obj];
    let mut converged = false;
    let mut iterations_used = 0;
    let mut regime_flips = 0;
    let mut prev_regimes: Option<Vec<bool>> = None;

    for _ in 0..settings.t_max {
        iterations_used += 1;
        let surrogate = SurrogateModel::new(&objective, current.as_slice())?;
        let regimes: Vec<bool> = surrogate
            .points()
            .iter()
            .map(|p| p.concave_regime)
            .collect();
        if let Some(prev) = &prev_regimes {
            regime_flips += prev.iter().zip(&regimes).filter(|(a, b)| a != b).count();
        }
        prev_regimes = Some(regimes);

        let sub = solve_subproblem(&surrogate, &feasible, &current, settings.inner_tol)?;
        let new_obj = objective.value(sub.alloc.as_slice());
        surrogate_objectives.push(surrogate.value(sub.alloc.as_slice()));
        let delta = (new_obj - obj).abs();
        current = sub.alloc;
        obj = new_obj;
        iterates.push(current.clone());
        objectives.push(obj);
        if delta <= settings.tau_sca {
            converged = true;
            break;
        }
    }

    let kkt = kkt_check(&current, channel, config, &feasible, settings.kkt_tol)?;
    Ok(ScaTrace {
        iterates,
        objectives,
        surrogate_objectives,
        kkt_residual: kkt.stationarity_residual,
        kkt_slackness: kkt.complementary_slackness,
        converged,
        iterations_used,
        regime_flips,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
