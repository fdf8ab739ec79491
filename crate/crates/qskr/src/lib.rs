//! # qskr
//!
//! Secret-key-rate analysis and power allocation for an uplink NOMA
//! continuous-variable QKD system under collective attack.
//!
//! The crate is organized around the computation pipeline:
//!
//! - [`quantum_core`] — Gaussian-state primitives: bosonic entropy,
//!   symplectic spectra, Holevo bounds (exact and large-modulation forms).
//! - [`channel`] — free-space channel model: deterministic path loss,
//!   log-normal turbulence sampling, transmittance assembly, SIC decoding
//!   order, optical-power/dBm conversion.
//! - [`rates`] — per-user key-rate lower bounds, interference bookkeeping,
//!   explicit and asymptotic sum secret key rate, and the multi-user
//!   sum-rate integral with quadrature and Monte-Carlo evaluators.
//! - [`sca_opt`] — successive-convex-approximation power allocator with a
//!   self-contained projected-gradient inner solver and KKT verification.
//! - [`baselines`] — the Q-OMA, UQPA, and CIH comparison allocators.
//! - [`experiment`] — configuration parsing, sweep scenarios, CSV/JSON
//!   emission, and deterministic parallel execution (backs the `qskr` CLI).
//!
//! Units: variances in shot-noise units (SNU), rates in bits/symbol,
//! optical power in dBm where noted.

pub mod baselines;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod numeric;
pub mod quantum_core;
pub mod rates;
pub mod sca_opt;

pub use error::{QskrError, Result};
