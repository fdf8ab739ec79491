//! Free-space channel model.
//!
//! Per-user transmittance is the product of a deterministic geometric path
//! loss and a log-normal turbulence transmissivity.  The module also owns
//! the SIC decoding order and the conversion between modulation variance
//! (SNU) and mean optical power (dBm).
//!
//! Samplers take explicit seeds; concurrent sweeps derive independent
//! streams (`seed = base_seed + stream_index`) rather than sharing state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{QskrError, Result};

/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Link geometry for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    /// Link distance (m).
    pub d_k: f64,
    /// Transmitter aperture diameter (m).
    pub d_t: f64,
    /// Receiver aperture diameter (m).
    pub d_r: f64,
    /// Transmission wavelength (m).
    pub wavelength: f64,
}

impl GeometryParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_k", self.d_k),
            ("d_t", self.d_t),
            ("d_r", self.d_r),
            ("wavelength", self.wavelength),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(QskrError::domain(
                    "GeometryParams",
                    format!("{name} = {v} must be finite and > 0"),
                ));
            }
        }
        Ok(())
    }
}

/// Log-normal turbulence parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceParams {
    /// Turbulence intensity sigma_x (dimensionless).
    pub sigma_x: f64,
    /// RNG seed; identical seeds reproduce identical draws.
    pub seed: u64,
}

/// Assembled per-user channel: loss and turbulence factors, their product,
/// and the SIC decoding order (indices of users, strongest first).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// Deterministic path-loss factor per user.
    pub t_loss: Vec<f64>,
    /// Turbulence transmissivity per user.
    pub t_turb: Vec<f64>,
    /// Total transmittance `t_k = t_loss * t_turb`, clipped to (0, 1].
    pub t_k: Vec<f64>,
    /// Permutation of user indices in decoding order.
    pub decoding_order: Vec<usize>,
}

impl ChannelState {
    /// Build directly from per-user transmittances (bypassing geometry),
    /// ordering users by transmittance descending.
    pub fn from_transmittances(t_k: &[f64]) -> Result<Self> {
        Self::from_parts(vec![1.0; t_k.len()], t_k.to_vec(), None)
    }

    /// Same as [`from_transmittances`](Self::from_transmittances) but with
    /// allocated powers breaking transmittance ties (power descending).
    pub fn from_transmittances_with_powers(t_k: &[f64], powers: &[f64]) -> Result<Self> {
        Self::from_parts(vec![1.0; t_k.len()], t_k.to_vec(), Some(powers))
    }

    fn from_parts(t_loss: Vec<f64>, t_turb: Vec<f64>, powers: Option<&[f64]>) -> Result<Self> {
        if t_turb.is_empty() {
            return Err(QskrError::domain("ChannelState", "no users"));
        }
        let t_k: Vec<f64> = t_loss
            .iter()
            .zip(&t_turb)
            .map(|(l, t)| (l * t).min(1.0))
            .collect();
        for (user, &t) in t_k.iter().enumerate() {
            if !(t > 0.0 && t <= 1.0) {
                return Err(QskrError::DegenerateChannel { user, t });
            }
        }
        let decoding_order = decoding_order(&t_k, powers);
        Ok(ChannelState {
            t_loss,
            t_turb,
            t_k,
            decoding_order,
        })
    }

    /// Recompute the decoding order using allocated powers as tie-breaker.
    pub fn reorder_by_powers(&mut self, powers: &[f64]) {
        self.decoding_order = decoding_order(&self.t_k, Some(powers));
    }

    pub fn users(&self) -> usize {
        self.t_k.len()
    }
}

/// Sort users by transmittance descending; ties broken by allocated power
/// descending, then by index ascending.
fn decoding_order(t_k: &[f64], powers: Option<&[f64]>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..t_k.len()).collect();
    order.sort_by(|&a, &b| {
        t_k[b]
            .total_cmp(&t_k[a])
            .then_with(|| match powers {
                Some(p) => p[b].total_cmp(&p[a]),
                None => std::cmp::Ordering::Equal,
            })
            .then(a.cmp(&b))
    });
    order
}

// ---------------------------------------------------------------------------
// Path loss and turbulence
// ---------------------------------------------------------------------------

/// Deterministic path loss `min(1, (pi D_T D_R / (2 nu))^2 / d^2)`.
///
/// The raw aperture formula exceeds 1 at short ranges (near-field regime),
/// so the value is clipped to keep a physical transmissivity.
pub fn path_loss(geom: &GeometryParams) -> Result<f64> {
    geom.validate()?;
    let gain = std::f64::consts::PI * geom.d_t * geom.d_r / (2.0 * geom.wavelength);
    Ok(((gain / geom.d_k).powi(2)).min(1.0))
}

/// Draw `n` turbulence transmissivities, i.i.d. with
/// `ln T ~ Normal(-sigma_x^2 / 2, sigma_x^2)`, each clipped to (0, 1].
pub fn sample_turbulence(params: &TurbulenceParams, n: usize) -> Vec<f64> {
    sample_ln_turbulence(params, n)
        .into_iter()
        .map(|ln_t| ln_t.exp().min(1.0))
        .collect()
}

/// Unclipped log-samples of the turbulence distribution (moment and
/// goodness-of-fit checks run on these).
pub fn sample_ln_turbulence(params: &TurbulenceParams, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let sigma = params.sigma_x;
    let normal = Normal::new(-sigma * sigma / 2.0, sigma).expect("sigma_x must be positive");
    (0..n).map(|_| normal.sample(&mut rng)).collect()
}

/// Assemble the channel from per-user geometry and one turbulence draw per
/// user: `t_k = clip(t_loss * t_turb, (0, 1])`, decoding order by
/// transmittance descending.
pub fn assemble_channel(geoms: &[GeometryParams], turb: &TurbulenceParams) -> Result<ChannelState> {
    if geoms.is_empty() {
        return Err(QskrError::domain("assemble_channel", "no users"));
    }
    let t_loss: Vec<f64> = geoms
        .iter()
        .map(path_loss)
        .collect::<Result<_>>()?;
    let t_turb = sample_turbulence(turb, geoms.len());
    ChannelState::from_parts(t_loss, t_turb, None)
}

// ---------------------------------------------------------------------------
// dBm conversion
// ---------------------------------------------------------------------------

/// Mean optical power of a modulation variance `v_a` (SNU):
/// photon rate `n = (v_a - 1)/2` per symbol at energy `h c / lambda`,
/// expressed in dBm.  `v_a = 1` (vacuum) maps to `-inf` dBm.
pub fn variance_to_dbm(v_a: f64, wavelength: f64, symbol_rate: f64) -> Result<f64> {
    if !v_a.is_finite() || v_a < 1.0 {
        return Err(QskrError::domain(
            "variance_to_dbm",
            format!("v_a = {v_a} < 1 (below vacuum)"),
        ));
    }
    if wavelength <= 0.0 || symbol_rate <= 0.0 {
        return Err(QskrError::domain(
            "variance_to_dbm",
            "wavelength and symbol_rate must be > 0".to_string(),
        ));
    }
    let n_bar = (v_a - 1.0) / 2.0;
    if n_bar == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let photon_energy = PLANCK * SPEED_OF_LIGHT / wavelength;
    let watts = n_bar * photon_energy * symbol_rate;
    Ok(10.0 * (watts / 1.0e-3).log10())
}

/// Inverse of [`variance_to_dbm`]; `-inf` dBm maps back to `v_a = 1`.
pub fn dbm_to_variance(dbm: f64, wavelength: f64, symbol_rate: f64) -> Result<f64> {
    if wavelength <= 0.0 || symbol_rate <= 0.0 {
        return Err(QskrError::domain(
            "dbm_to_variance",
            "wavelength and symbol_rate must be > 0".to_string(),
        ));
    }
    if dbm == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    if !dbm.is_finite() {
        return Err(QskrError::domain(
            "dbm_to_variance",
            format!("dbm = {dbm}"),
        ));
    }
    let watts = 1.0e-3 * 10f64.powf(dbm / 10.0);
    let photon_energy = PLANCK * SPEED_OF_LIGHT / wavelength;
    Ok(1.0 + 2.0 * watts / (photon_energy * symbol_rate))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
