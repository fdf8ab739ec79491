//! Gaussian quantum-information primitives.
//!
//! Everything the key-rate layer needs from Gaussian-state theory:
//!
//! - the bosonic entropy function `h(x)` and its large-argument form,
//! - symplectic eigenvalues of the two-mode transmitter/receiver
//!   covariance matrix, exact and in the large-modulation limit,
//! - the Holevo bound on the eavesdropper's information, exact and
//!   asymptotic.
//!
//! All variances are in shot-noise units (vacuum quadrature variance = 1),
//! all information quantities in bits per symbol.  Every function here is
//! pure; the module holds no state.

use crate::error::{QskrError, Result};

/// Eigenvalues inside `[1 - EIGENVALUE_ROUNDING_TOL, 1)` are treated as 1;
/// `lambda1` or `lambda_het` below that is a hard error (a modeling bug,
/// not rounding).  `lambda2` may fall genuinely below 1 at low noise; it is
/// clamped and flagged instead of failing (see `HolevoValue::clamped_lambda2`).
pub const EIGENVALUE_ROUNDING_TOL: f64 = 1e-9;

const LN_2: f64 = std::f64::consts::LN_2;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Noise entering one user's effective single-mode channel.
///
/// `b_k` is the effective received variance
/// `b_k = t_k * v_a + (1 - t_k) * w_k + delta_det_sq + v_interference`,
/// fixed at assembly time for a specific modulation variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkNoise {
    /// Effective received variance (SNU).
    pub b_k: f64,
    /// Interference variance from not-yet-decoded users (SNU).
    pub v_interference: f64,
    /// Excess-noise variance attributed to the eavesdropper (SNU).
    pub w_k: f64,
    /// Detector noise variance (SNU).
    pub delta_det_sq: f64,
    /// Channel transmittance, in `[0, 1)`; `0` is the decoupling limit.
    pub t_k: f64,
}

impl LinkNoise {
    /// Assemble the noise record for modulation variance `v_a`, computing
    /// `b_k` from its definition.
    pub fn assemble(
        v_a: f64,
        t_k: f64,
        w_k: f64,
        delta_det_sq: f64,
        v_interference: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&t_k) {
            return Err(QskrError::domain(
                "LinkNoise::assemble",
                format!("t_k = {t_k} outside [0, 1)"),
            ));
        }
        for (name, x) in [
            ("v_a", v_a),
            ("w_k", w_k),
            ("delta_det_sq", delta_det_sq),
            ("v_interference", v_interference),
        ] {
            if !x.is_finite() || x < 0.0 {
                return Err(QskrError::domain(
                    "LinkNoise::assemble",
                    format!("{name} = {x} must be finite and >= 0"),
                ));
            }
        }
        let b_k = t_k * v_a + (1.0 - t_k) * w_k + delta_det_sq + v_interference;
        Ok(LinkNoise {
            b_k,
            v_interference,
            w_k,
            delta_det_sq,
            t_k,
        })
    }

    /// Non-signal part of the received variance:
    /// `(1 - t_k) * w_k + delta_det_sq + v_interference`.
    #[inline]
    pub fn ambient(&self) -> f64 {
        (1.0 - self.t_k) * self.w_k + self.delta_det_sq + self.v_interference
    }

    /// Recompute `b_k` for a given modulation variance (invariant check).
    #[inline]
    pub fn recompute_b(&self, v_a: f64) -> f64 {
        self.t_k * v_a + self.ambient()
    }
}

/// Symplectic eigenvalues of one user's joint covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    /// Larger symplectic eigenvalue.
    pub lambda1: f64,
    /// Smaller symplectic eigenvalue.
    pub lambda2: f64,
    /// Conditional eigenvalue after the receiver's measurement.
    pub lambda_het: f64,
}

/// The 4x4 transmitter/receiver covariance matrix in block form
/// `[[v_a I2, Gamma], [Gamma^T, b_k I2]]` with `Gamma = diag(+g, -g)`,
/// `g = sqrt(t_k (v_a^2 - 1))`.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceBlock {
    /// Modulation variance (SNU); must be >= 1.
    pub v_a: f64,
    /// Off-diagonal coupling entry `g`.
    pub gamma: f64,
    /// Received variance (SNU).
    pub b_k: f64,
}

impl CovarianceBlock {
    pub fn new(v_a: f64, noise: &LinkNoise) -> Result<Self> {
        if v_a < 1.0 {
            return Err(QskrError::domain(
                "CovarianceBlock::new",
                format!("v_a = {v_a} < 1 (below vacuum)"),
            ));
        }
        Ok(CovarianceBlock {
            v_a,
            gamma: (noise.t_k * (v_a * v_a - 1.0)).sqrt(),
            b_k: noise.recompute_b(v_a),
        })
    }

    /// Dense symmetric matrix in `(x1, p1, x2, p2)` quadrature order.
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let (v, g, b) = (self.v_a, self.gamma, self.b_k);
        [
            [v, 0.0, g, 0.0],
            [0.0, v, 0.0, -g],
            [g, 0.0, b, 0.0],
            [0.0, -g, 0.0, b],
        ]
    }
}

/// A Holevo information value together with the clamping that occurred
/// while evaluating it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoValue {
    /// Holevo bound in bits/symbol.
    pub bits: f64,
    /// The smaller eigenvalue fell below 1 and its entropy term was
    /// replaced by the `h(1) = 0` limit.
    pub clamped_lambda2: bool,
    /// The conditional eigenvalue fell below 1 and was clamped likewise.
    pub clamped_het: bool,
}

// ---------------------------------------------------------------------------
// Entropy functions
// ---------------------------------------------------------------------------

/// Bosonic entropy
/// `h(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2)` in bits;
/// `h(1) = 0` by continuity.
///
/// Evaluated as `log2((x+1)/2) + ((x-1)/2) log2(1 + 2/(x-1))`, which is
/// exact at both ends of the domain (no cancellation for large `x`, smooth
/// vanishing as `x -> 1+`).
pub fn entropy_h(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 1.0 {
        return Err(QskrError::domain(
            "entropy_h",
            format!("x = {x} < 1 (nonphysical eigenvalue)"),
        ));
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    let half_up = (x + 1.0) / 2.0;
    let ratio = 2.0 / (x - 1.0);
    Ok(half_up.log2() + (x - 1.0) / 2.0 * ratio.ln_1p() / LN_2)
}

/// Large-argument form of the bosonic entropy, `log2(e x / 2)`.
pub fn entropy_h_asym(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(QskrError::domain(
            "entropy_h_asym",
            format!("x = {x} <= 0"),
        ));
    }
    Ok(std::f64::consts::E.log2() - 1.0 + x.log2())
}

// ---------------------------------------------------------------------------
// Symplectic spectra
// ---------------------------------------------------------------------------

/// Coefficients of the characteristic equation
/// `lambda^4 - A lambda^2 + B = 0` for the two-mode covariance matrix:
///
/// `A = v_a^2 (1 - 2 t) + 2 t + b^2`, `B = (t + (1-t) v_a w + v_a (d^2 + V_I))^2`.
///
/// Both are evaluated through cancellation-free regroupings
/// (`A = (v_a (1-t))^2 + m (b + t v_a) + 2t` with `m` the ambient noise,
/// `sqrt(B) = t + v_a m`).
pub fn characteristic_coefficients(v_a: f64, noise: &LinkNoise) -> (f64, f64) {
    let t = noise.t_k;
    let m = noise.ambient();
    let b = t * v_a + m;
    let a = (v_a * (1.0 - t)).powi(2) + m * (b + t * v_a) + 2.0 * t;
    let sqrt_b = t + v_a * m;
    (a, sqrt_b * sqrt_b)
}

/// Exact symplectic eigenvalues `lambda_{1,2} = sqrt((A +- sqrt(A^2-4B))/2)`
/// and the heterodyne conditional eigenvalue
/// `lambda_het = v_a - t (v_a^2 - 1) / (b + 1)`.
///
/// The discriminant is evaluated through the exact factorization
/// `A^2 - 4B = (v_a - b)^2 ((v_a + b)^2 - 4 t (v_a^2 - 1))`, whose second
/// factor regroups to a sum of nonnegative terms; this removes the
/// catastrophic cancellation of the naive form at large modulation and
/// shows the discriminant is never negative for valid inputs (the
/// negative-discriminant error is kept as a guard against NaN/invariant
/// breakage only).
pub fn symplectic_spectrum(v_a: f64, noise: &LinkNoise) -> Result<SymplecticSpectrum> {
    if v_a < 1.0 {
        return Err(QskrError::domain(
            "symplectic_spectrum",
            format!("v_a = {v_a} < 1"),
        ));
    }
    let t = noise.t_k;
    let m = noise.ambient();
    let b = t * v_a + m;
    let (a, b_coef) = characteristic_coefficients(v_a, noise);

    // (v+b)^2 - 4t(v^2-1) = (v(1-t))^2 + 2 v (1+t) m + m^2 + 4t  >= 0
    let disc_factor =
        (v_a * (1.0 - t)).powi(2) + 2.0 * v_a * (1.0 + t) * m + m * m + 4.0 * t;
    if !disc_factor.is_finite() || disc_factor < 0.0 {
        return Err(QskrError::NegativeDiscriminant {
            disc: (v_a - b).powi(2) * disc_factor,
            a,
        });
    }
    let sqrt_disc = (v_a - b).abs() * disc_factor.sqrt();

    let lambda1 = ((a + sqrt_disc) / 2.0).sqrt();
    // lambda1 * lambda2 = sqrt(B) exactly; dividing avoids the cancellation
    // in (A - sqrt_disc)/2.
    let lambda2 = b_coef.sqrt() / lambda1;

    // lambda_het = (v_a (m + 1) + t) / (b + 1), the cancellation-free form of
    // v_a - t (v_a^2 - 1) / (b + 1).
    let lambda_het = (v_a * (m + 1.0) + t) / (b + 1.0);

    Ok(SymplecticSpectrum {
        lambda1,
        lambda2,
        lambda_het,
    })
}

/// Large-modulation forms of the symplectic eigenvalues:
///
/// `lambda1 ~ sqrt(v_a^2 + b^2)`,
/// `lambda2 ~ v_a (V_I + d^2) / sqrt(v_a^2 + b^2)`,
/// `lambda_het ~ v_a - t v_a^2 / b` (evaluated as `v_a m / b`).
pub fn symplectic_spectrum_asym(v_a: f64, noise: &LinkNoise) -> Result<SymplecticSpectrum> {
    if v_a <= 0.0 {
        return Err(QskrError::domain(
            "symplectic_spectrum_asym",
            format!("v_a = {v_a} <= 0"),
        ));
    }
    let t = noise.t_k;
    let m = noise.ambient();
    let b = t * v_a + m;
    if b == 0.0 {
        return Err(QskrError::domain(
            "symplectic_spectrum_asym",
            "b_k = 0 (division by zero)".to_string(),
        ));
    }
    let lambda1 = v_a.hypot(b);
    let lambda2 = v_a * (noise.v_interference + noise.delta_det_sq) / lambda1;
    let lambda_het = v_a * m / b;
    Ok(SymplecticSpectrum {
        lambda1,
        lambda2,
        lambda_het,
    })
}

// ---------------------------------------------------------------------------
// Holevo information
// ---------------------------------------------------------------------------

/// Entropy of an eigenvalue that must be physical: values in
/// `[1 - tol, 1)` collapse to the `h(1) = 0` limit, anything lower is an
/// error identifying the offending eigenvalue.
fn entropy_checked(x: f64, what: &'static str) -> Result<f64> {
    if x >= 1.0 {
        entropy_h(x)
    } else if x >= 1.0 - EIGENVALUE_ROUNDING_TOL {
        Ok(0.0)
    } else {
        Err(QskrError::NonphysicalState { what, value: x })
    }
}

/// Exact Holevo bound `h(lambda1) + h(lambda2) - h(lambda_het)` on the
/// eavesdropper's information about one user, in bits/symbol.
///
/// `lambda2` may legitimately drop below 1 at low ambient noise; its term
/// is then the `h(1) = 0` limit and the result is flagged.  `lambda1` and
/// `lambda_het` below `1 - 1e-9` indicate an inconsistent state and fail.
pub fn holevo_explicit(v_a: f64, noise: &LinkNoise) -> Result<HolevoValue> {
    let s = symplectic_spectrum(v_a, noise)?;
    let h1 = entropy_checked(s.lambda1, "lambda1")?;
    let (h2, clamped_lambda2) = if s.lambda2 >= 1.0 {
        (entropy_h(s.lambda2)?, false)
    } else {
        (0.0, s.lambda2 < 1.0 - EIGENVALUE_ROUNDING_TOL)
    };
    let h_het = entropy_checked(s.lambda_het, "lambda_het")?;
    Ok(HolevoValue {
        bits: h1 + h2 - h_het,
        clamped_lambda2,
        clamped_het: false,
    })
}

/// Asymptotic Holevo bound built from the large-modulation eigenvalues:
/// `log2(e/2) + (1/2) log2(v_a^2 + b^2) + h(lambda2~) - h(lambda_het~)`.
///
/// The leading term is `h~(lambda1~)` kept in log space so it cannot
/// overflow at extreme modulation.  Sub-unity `lambda2~` or `lambda_het~`
/// terms collapse to the `h(1) = 0` limit and are flagged.
pub fn holevo_asym(v_a: f64, noise: &LinkNoise) -> Result<HolevoValue> {
    if v_a < 1.0 {
        return Err(QskrError::domain(
            "holevo_asym",
            format!("v_a = {v_a} < 1"),
        ));
    }
    let s = symplectic_spectrum_asym(v_a, noise)?;
    let t = noise.t_k;
    let b = t * v_a + noise.ambient();
    // log2((e/2) * sqrt(v^2 + b^2)) without forming the argument.
    let first = std::f64::consts::E.log2() - 1.0
        + 0.5 * (v_a * v_a + b * b).log2();

    let (h2, clamped_lambda2) = if s.lambda2 >= 1.0 {
        (entropy_h(s.lambda2)?, false)
    } else {
        (0.0, true)
    };
    let (h_het, clamped_het) = if s.lambda_het >= 1.0 {
        (entropy_h(s.lambda_het)?, false)
    } else {
        (0.0, true)
    };
    Ok(HolevoValue {
        bits: first + h2 - h_het,
        clamped_lambda2,
        clamped_het,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn noise(v_a: f64, t: f64, w: f64, d2: f64, vi: f64) -> LinkNoise {
        LinkNoise::assemble(v_a, t, w, d2, vi).unwrap()
    }

    /// Independent spectral oracle: absolute eigenvalue moduli of
    /// `i Omega Sigma` via a Schur decomposition of the real matrix
    /// `Omega Sigma` (eigenvalues `+- i lambda`).
    fn spectral_oracle(block: &CovarianceBlock) -> (f64, f64) {
        let m = block.matrix();
        let sigma = Matrix4::from_fn(|r, c| m[r][c]);
        let mut omega = Matrix4::zeros();
        omega[(0, 1)] = 1.0;
        omega[(1, 0)] = -1.0;
        omega[(2, 3)] = 1.0;
        omega[(3, 2)] = -1.0;
        let eig = (omega * sigma).complex_eigenvalues();
        let mut mods: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
        mods.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // Moduli come in duplicated pairs {l1, l1, l2, l2}.
        ((mods[0] + mods[1]) / 2.0, (mods[2] + mods[3]) / 2.0)
    }

    // -- entropy_h ----------------------------------------------------------

    #[test]
    fn entropy_at_one_is_zero() {
        assert_eq!(entropy_h(1.0).unwrap(), 0.0);
    }

    #[test]
    fn entropy_at_three_is_exactly_two() {
        // ((3+1)/2) log2 2 - ((3-1)/2) log2 1 = 2
        assert!((entropy_h(3.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_at_ten_matches_high_precision_value() {
        // 50-digit evaluation of the defining expression.
        let reference = 3.762211396014729276;
        assert!((entropy_h(10.0).unwrap() - reference).abs() < 1e-12);
    }

    #[test]
    fn entropy_below_one_is_domain_error() {
        assert!(matches!(
            entropy_h(0.999),
            Err(QskrError::Domain { .. })
        ));
        assert!(entropy_h(f64::NAN).is_err());
    }

    #[test]
    fn entropy_is_increasing_and_concave() {
        // Finite differences on a grid spanning small and large arguments.
        let grid: Vec<f64> = (0..200).map(|i| 1.001 + 0.25 * i as f64).collect();
        for &x in &grid {
            let e = 1e-4 * x;
            let hm = entropy_h(x - e).unwrap();
            let h0 = entropy_h(x).unwrap();
            let hp = entropy_h(x + e).unwrap();
            assert!(hp > hm, "not increasing at {x}");
            assert!(hp - 2.0 * h0 + hm < 0.0, "not concave at {x}");
        }
    }

    // -- entropy_h_asym -----------------------------------------------------

    #[test]
    fn asym_entropy_known_points() {
        let two_over_e = 2.0 / std::f64::consts::E;
        assert!(entropy_h_asym(two_over_e).unwrap().abs() < 1e-15);
        let log2e = std::f64::consts::E.log2();
        assert!((entropy_h_asym(2.0).unwrap() - log2e).abs() < 1e-15);
        assert!(entropy_h_asym(0.0).is_err());
        assert!(entropy_h_asym(-3.0).is_err());
    }

    #[test]
    fn asym_entropy_close_to_exact_at_ten() {
        let exact = entropy_h(10.0).unwrap();
        let asym = entropy_h_asym(10.0).unwrap();
        assert!((exact - asym).abs() < 5e-3, "gap {}", (exact - asym).abs());
    }

    // -- symplectic_spectrum -------------------------------------------------

    #[test]
    fn decoupled_channel_factorizes() {
        // t = 0: A = v^2 + b^2, B = (v b)^2, spectrum {max, min}.
        let v = 7.0;
        let n = noise(v, 0.0, 0.3, 0.16, 1.2);
        let s = symplectic_spectrum(v, &n).unwrap();
        let b = n.b_k;
        assert!((s.lambda1 - v.max(b)).abs() < 1e-12);
        assert!((s.lambda2 - v.min(b)).abs() < 1e-12);
    }

    #[test]
    fn vacuum_modulation_decouples() {
        // v_a = 1: coupling vanishes, spectrum is {b_k, 1} in some order.
        let n = noise(1.0, 0.6, 0.2, 0.16, 2.0);
        let s = symplectic_spectrum(1.0, &n).unwrap();
        let b = n.b_k;
        let (hi, lo) = (b.max(1.0), b.min(1.0));
        assert!((s.lambda1 - hi).abs() < 1e-12);
        assert!((s.lambda2 - lo).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_spectral_oracle() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..10_000 {
            let v_a = rng.gen_range(1.0..1.0e4_f64);
            let t = rng.gen_range(0.01..0.99);
            let w = rng.gen_range(0.0..2.0);
            let d2 = rng.gen_range(0.0..2.0);
            let vi = rng.gen_range(0.0..50.0);
            let n = noise(v_a, t, w, d2, vi);
            let s = symplectic_spectrum(v_a, &n).unwrap();
            let block = CovarianceBlock::new(v_a, &n).unwrap();
            let (l1, l2) = spectral_oracle(&block);
            let r1 = (s.lambda1 - l1).abs() / l1;
            let r2 = (s.lambda2 - l2).abs() / l2;
            assert!(
                r1 < 1e-9 && r2 < 1e-9,
                "oracle mismatch at v_a={v_a} t={t} w={w} d2={d2} vi={vi}: {r1} {r2}"
            );
        }
    }

    #[test]
    fn characteristic_identities_hold() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10_000 {
            let v_a = rng.gen_range(1.0..1.0e4_f64);
            let t = rng.gen_range(0.01..0.99);
            let n = noise(
                v_a,
                t,
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..50.0),
            );
            let (a, b) = characteristic_coefficients(v_a, &n);
            let s = symplectic_spectrum(v_a, &n).unwrap();
            let sum = s.lambda1 * s.lambda1 + s.lambda2 * s.lambda2;
            let prod = (s.lambda1 * s.lambda2).powi(2);
            assert!((sum - a).abs() <= 1e-9 * a.abs(), "sum identity");
            assert!((prod - b).abs() <= 1e-9 * b.abs(), "product identity");
        }
    }

    #[test]
    fn spectrum_is_stable_at_extreme_modulation() {
        // The factorized discriminant keeps full precision where the naive
        // A^2 - 4B form has already lost every significant digit.
        let v = 1.0e9;
        let n = noise(v, 0.45, 0.1, 0.16, 0.3 * v);
        let s = symplectic_spectrum(v, &n).unwrap();
        let (a, b) = characteristic_coefficients(v, &n);
        let sum = s.lambda1 * s.lambda1 + s.lambda2 * s.lambda2;
        let prod = (s.lambda1 * s.lambda2).powi(2);
        assert!((sum - a).abs() <= 1e-12 * a);
        assert!((prod - b).abs() <= 1e-12 * b);
    }

    // -- symplectic_spectrum_asym --------------------------------------------

    #[test]
    fn asym_lambda1_accurate_at_large_modulation() {
        let v = 1.0e3;
        let n = noise(v, 0.6, 0.1, 0.16, 8.0);
        let exact = symplectic_spectrum(v, &n).unwrap();
        let asym = symplectic_spectrum_asym(v, &n).unwrap();
        let rel = (asym.lambda1 - exact.lambda1).abs() / exact.lambda1;
        assert!(rel < 1e-3, "rel = {rel}");
    }

    #[test]
    fn asym_het_equals_v_in_interference_free_limit() {
        let v = 123.0;
        let n = noise(v, 0.0, 0.0, 0.16, 0.0);
        let s = symplectic_spectrum_asym(v, &n).unwrap();
        // t = 0: lambda_het~ = v exactly.
        assert!((s.lambda_het - v).abs() < 1e-12);
    }

    #[test]
    fn asym_lambda2_zero_without_interference_and_detector_noise() {
        let v = 50.0;
        let n = noise(v, 0.4, 0.3, 0.0, 0.0);
        let s = symplectic_spectrum_asym(v, &n).unwrap();
        assert_eq!(s.lambda2, 0.0);
        // holevo_asym must flag the degenerate entropy term.
        let h = holevo_asym(v, &n).unwrap();
        assert!(h.clamped_lambda2);
    }

    // -- holevo_explicit ------------------------------------------------------

    #[test]
    fn eve_decoupled_leaks_nothing() {
        let v = 40.0;
        let n = noise(v, 1e-9, 0.0, 0.16, 0.0);
        let chi = holevo_explicit(v, &n).unwrap();
        assert!(chi.bits.abs() < 1e-6, "chi = {}", chi.bits);
    }

    #[test]
    fn holevo_nonnegative_over_random_draws() {
        let mut rng = StdRng::seed_from_u64(1234);
        for _ in 0..10_000 {
            let v_a = rng.gen_range(1.0..5.0e3_f64);
            let n = noise(
                v_a,
                rng.gen_range(0.01..0.99),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..100.0),
            );
            let chi = holevo_explicit(v_a, &n).unwrap();
            assert!(chi.bits >= 0.0, "negative Holevo: {chi:?} at v_a={v_a}");
        }
    }

    // -- holevo_asym -----------------------------------------------------------

    #[test]
    fn asym_assembles_from_entropy_primitives() {
        // Recompute the three-term expression by hand from the primitives.
        let (v, b_target) = (1.0e4, 10.0);
        // pick noise so that b = 10 at t = 0: ambient = 10
        let n = noise(v, 0.0, 0.0, 4.0, 6.0);
        assert!((n.recompute_b(v) - b_target).abs() < 1e-12);
        let s = symplectic_spectrum_asym(v, &n).unwrap();
        let first = entropy_h_asym(s.lambda1).unwrap();
        let expect = first + entropy_h(s.lambda2.max(1.0)).unwrap()
            - entropy_h(s.lambda_het.max(1.0)).unwrap();
        let got = holevo_asym(v, &n).unwrap();
        assert!((got.bits - expect).abs() < 1e-9);
        assert!(got.bits.is_finite());
    }

    #[test]
    fn asym_first_and_third_terms_cancel_in_decoupling_limit() {
        // t -> 0, w = 0: lambda_het~ = v and the leading term approaches
        // h(v), so their difference vanishes as v grows.
        let v = 1.0e6;
        let n = noise(v, 0.0, 0.0, 0.16, 0.0);
        let s = symplectic_spectrum_asym(v, &n).unwrap();
        let first = entropy_h_asym(s.lambda1).unwrap();
        let third = entropy_h(s.lambda_het).unwrap();
        assert!((first - third).abs() < 1e-5, "gap {}", first - third);
        let total = holevo_asym(v, &n).unwrap();
        assert!(total.bits.abs() < 1e-5);
    }

    #[test]
    fn asym_leading_term_convexity_switches_at_b() {
        // As a function of v_a with the noise record frozen, the leading
        // term has positive curvature below b_k and negative above it.
        // t = 0 freezes b at the ambient value, independent of v_a.
        let n = noise(1.0, 0.0, 0.1, 29.9, 20.0);
        assert!((n.recompute_b(123.0) - 50.0).abs() < 1e-12);
        let lead = |v: f64| {
            let s = symplectic_spectrum_asym(v, &n).unwrap();
            entropy_h_asym(s.lambda1).unwrap()
        };
        for &v in &[5.0, 20.0, 45.0] {
            let e = 1e-3 * v;
            let d2 = lead(v + e) - 2.0 * lead(v) + lead(v - e);
            assert!(d2 > 0.0, "expected convex at v={v} < b");
        }
        for &v in &[55.0, 100.0, 400.0] {
            let e = 1e-3 * v;
            let d2 = lead(v + e) - 2.0 * lead(v) + lead(v - e);
            assert!(d2 < 0.0, "expected concave at v={v} > b");
        }
    }

    #[test]
    fn asym_tracks_explicit_and_gap_shrinks_with_modulation() {
        // Relative gap |chi_asym - chi_explicit| / chi_explicit decreases
        // monotonically along v = 1e3, 1e4, 1e5 (all-terms-growing regime).
        let t = 0.55;
        let mut last = f64::INFINITY;
        for &v in &[1.0e3, 1.0e4, 1.0e5] {
            let n = noise(v, t, 0.1, 0.16, 0.3 * v);
            let exact = holevo_explicit(v, &n).unwrap().bits;
            let asym = holevo_asym(v, &n).unwrap().bits;
            let rel = (asym - exact).abs() / exact;
            assert!(rel < last, "gap not shrinking: {rel} vs {last} at v={v}");
            last = rel;
        }
    }
}
