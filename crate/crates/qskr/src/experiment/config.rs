//! Line-oriented configuration format.
//!
//! Three sections, `key = value` pairs, `#` comments:
//!
//! ```text
//! [system]
//! users = 16
//! eta = 0.92
//! delta_det_sq = 0.16
//! excess_noise = 0.1            # scalar or comma list, per user
//! v_max_user = 1e12             # scalar or comma list
//! v_max_bs = 1e4                # SNU; p_max_bs_dbm derives it instead
//! tau_d = 0.6
//! interference_weighting = printed   # printed | transmittance
//! clip_negative_users = false
//! wavelength_m = 1550e-9
//! symbol_rate_hz = 1e8
//!
//! [channel]
//! mode = transmittance          # transmittance | geometry
//! transmittances = 0.95,0.9,...
//! sigma_x = 0.3
//! turbulence = off              # sample turbulence per trial when on
//! distances_m = 100             # scalar or list (geometry mode)
//! d_t_m = 0.1
//! d_r_m = 1.0
//! distance_profile = 50:0.95,200:0.30   # piecewise-linear T(d)
//!
//! [experiment]
//! scenario = sweep_power
//! grid_start = -100
//! grid_stop = -20
//! grid_points = 17
//! mc_trials = 1
//! seed = 42
//! threads = 1
//! output = qskr_out.csv
//! oma_resource_scaling = true
//! ```
//!
//! Parsing starts from the selected scenario's preset and applies the
//! file's keys on top, so an empty file yields a complete default
//! configuration.  Unknown keys fail in strict mode and warn otherwise.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{QskrError, Result};
use crate::rates::{InterferenceWeighting, SystemConfig};

// ---------------------------------------------------------------------------
// Resolved configuration types
// ---------------------------------------------------------------------------

/// Sweep scenarios the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Scenario {
    SweepPower,
    SweepDistance,
    SweepTurbulence,
    HeatmapTP,
    HeatmapTW,
    ApproxCompare,
    SumRateCompare,
}

impl Scenario {
    pub fn parse(s: &str) -> Option<Scenario> {
        match s {
            "sweep_power" => Some(Scenario::SweepPower),
            "sweep_distance" => Some(Scenario::SweepDistance),
            "sweep_turbulence" => Some(Scenario::SweepTurbulence),
            "heatmap_t_p" => Some(Scenario::HeatmapTP),
            "heatmap_t_w" => Some(Scenario::HeatmapTW),
            "approx_compare" => Some(Scenario::ApproxCompare),
            "sum_rate_compare" => Some(Scenario::SumRateCompare),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::SweepPower => "sweep_power",
            Scenario::SweepDistance => "sweep_distance",
            Scenario::SweepTurbulence => "sweep_turbulence",
            Scenario::HeatmapTP => "heatmap_t_p",
            Scenario::HeatmapTW => "heatmap_t_w",
            Scenario::ApproxCompare => "approx_compare",
            Scenario::SumRateCompare => "sum_rate_compare",
        }
    }
}

/// How per-user transmittances are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// Direct per-user transmittance overrides.
    Transmittance,
    /// Aperture path-loss formula from link distances.
    Geometry,
}

/// Channel-model inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub mode: ChannelMode,
    /// Base per-user transmittances (transmittance mode).
    pub transmittances: Vec<f64>,
    /// Turbulence intensity.
    pub sigma_x: f64,
    /// Sample a fresh turbulence factor per user per trial.
    pub turbulence: bool,
    /// Per-user link distances (geometry mode).
    pub distances_m: Vec<f64>,
    pub d_t_m: f64,
    pub d_r_m: f64,
    /// Piecewise-linear transmittance-vs-distance table for the distance
    /// sweep, as (distance_m, transmittance) knots.
    pub distance_profile: Vec<(f64, f64)>,
}

/// One sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AxisSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        (0..self.points)
            .map(|i| {
                self.start + (self.stop - self.start) * i as f64 / (self.points - 1) as f64
            })
            .collect()
    }
}

/// Sweep definition and execution knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub grid: AxisSpec,
    pub grid2: Option<AxisSpec>,
    pub mc_trials: usize,
    pub seed: u64,
    pub threads: usize,
    pub output: PathBuf,
    pub oma_resource_scaling: bool,
    /// Fixed receiver power (dBm) for scenarios whose axis is not power.
    pub fixed_p_dbm: f64,
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct FullConfig {
    pub system: SystemConfig,
    pub channel: ChannelSpec,
    pub experiment: ExperimentSpec,
}

impl FullConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.experiment.mc_trials == 0 {
            return Err(QskrError::domain("FullConfig", "mc_trials must be >= 1"));
        }
        if self.experiment.grid.points == 0 {
            return Err(QskrError::domain("FullConfig", "empty grid"));
        }
        if self.channel.mode == ChannelMode::Transmittance
            && self.channel.transmittances.len() != self.system.k_users
        {
            return Err(QskrError::domain(
                "FullConfig",
                format!(
                    "need {} transmittances, got {}",
                    self.system.k_users,
                    self.channel.transmittances.len()
                ),
            ));
        }
        if self.channel.mode == ChannelMode::Geometry
            && self.channel.distances_m.len() != self.system.k_users
        {
            return Err(QskrError::domain(
                "FullConfig",
                "distances_m must list one distance per user",
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    AxisSpec {
        start: a,
        stop: b,
        points: n,
    }
    .values()
}

/// Scenario presets: complete runnable configurations reproducing the
/// reference sweep experiments; a config file overrides any key.
pub fn preset(scenario: Scenario) -> FullConfig {
    // Common core: typical-value system parameters.
    let mut system = SystemConfig::default();
    system.symbol_rate = 1.0e5;
    let mut channel = ChannelSpec {
        mode: ChannelMode::Transmittance,
        transmittances: linspace(0.95, 0.35, 16),
        sigma_x: 0.3,
        turbulence: false,
        distances_m: vec![100.0; 16],
        d_t_m: 0.1,
        d_r_m: 1.0,
        distance_profile: vec![
            (50.0, 0.95),
            (110.0, 0.80),
            (140.0, 0.60),
            (170.0, 0.30),
            (200.0, 0.10),
        ],
    };
    let mut experiment = ExperimentSpec {
        scenario,
        grid: AxisSpec {
            start: -100.0,
            stop: -20.0,
            points: 17,
        },
        grid2: None,
        mc_trials: 1,
        seed: 42,
        threads: 1,
        output: PathBuf::from(format!("qskr_{}.csv", scenario.name())),
        oma_resource_scaling: true,
        fixed_p_dbm: -60.0,
    };

    let resize = |system: &mut SystemConfig, channel: &mut ChannelSpec, k: usize| {
        system.k_users = k;
        system.w = vec![system.w[0]; k];
        system.v_max_user = vec![system.v_max_user[0]; k];
        channel.transmittances = linspace(0.95, 0.35, k);
        channel.distances_m = vec![100.0; k];
    };

    match scenario {
        Scenario::SweepPower => {
            // 16 users, deployment-style clipped sums rise and fall with power.
            system.clip_negative_users = true;
        }
        Scenario::SweepTurbulence => {
            resize(&mut system, &mut channel, 8);
            system.clip_negative_users = true;
            channel.turbulence = true;
            experiment.grid = AxisSpec {
                start: 0.3,
                stop: 0.6,
                points: 7,
            };
            experiment.mc_trials = 50;
        }
        Scenario::HeatmapTP => {
            resize(&mut system, &mut channel, 4);
            system.clip_negative_users = true;
            experiment.grid = AxisSpec {
                start: 0.05,
                stop: 0.95,
                points: 19,
            };
            experiment.grid2 = Some(AxisSpec {
                start: -100.0,
                stop: -20.0,
                points: 17,
            });
        }
        Scenario::HeatmapTW => {
            resize(&mut system, &mut channel, 4);
            system.clip_negative_users = true;
            experiment.grid = AxisSpec {
                start: 0.05,
                stop: 0.95,
                points: 19,
            };
            experiment.grid2 = Some(AxisSpec {
                start: 0.01,
                stop: 0.2,
                points: 11,
            });
        }
        Scenario::SweepDistance => {
            resize(&mut system, &mut channel, 12);
            system.clip_negative_users = true;
            channel.turbulence = true;
            experiment.grid = AxisSpec {
                start: 50.0,
                stop: 200.0,
                points: 16,
            };
            experiment.mc_trials = 50;
        }
        Scenario::ApproxCompare => {
            // Strong-excess-noise replica: the large-modulation Holevo
            // tracks the explicit one above -80 dBm and undershoots below.
            resize(&mut system, &mut channel, 12);
            system.w = vec![2.0; 12];
            system.symbol_rate = 1.0e4;
            channel.transmittances = linspace(0.9, 0.3, 12);
        }
        Scenario::SumRateCompare => {
            resize(&mut system, &mut channel, 3);
            channel.transmittances = vec![0.9, 0.6, 0.3];
        }
    }
    FullConfig {
        system,
        channel,
        experiment,
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct RawEntry {
    line: usize,
    section: String,
    value: String,
    used: bool,
}

/// Parse `text` into a full configuration.
///
/// `scenario_override` replaces the file's scenario before preset defaults
/// apply; in strict mode unknown keys abort, otherwise they are collected
/// into `warnings`.
pub fn parse_config_text(
    text: &str,
    scenario_override: Option<Scenario>,
    strict: bool,
    warnings: &mut Vec<String>,
) -> Result<FullConfig> {
    let mut entries: BTreeMap<String, RawEntry> = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(QskrError::Config {
                line: line_no,
                key: line.to_string(),
                msg: "expected `key = value`".into(),
            });
        };
        let key = key.trim().to_string();
        let full_key = if section.is_empty() {
            key.clone()
        } else {
            format!("{section}.{key}")
        };
        entries.insert(
            full_key,
            RawEntry {
                line: line_no,
                section: section.clone(),
                value: value.trim().to_string(),
                used: false,
            },
        );
    }

    // Resolve the scenario first so its preset provides the defaults.
    let scenario = if let Some(s) = scenario_override {
        if let Some(e) = entries.get_mut("experiment.scenario") {
            e.used = true;
        }
        s
    } else if let Some(e) = entries.get_mut("experiment.scenario") {
        e.used = true;
        Scenario::parse(&e.value).ok_or_else(|| QskrError::Config {
            line: e.line,
            key: "scenario".into(),
            msg: format!("unknown scenario `{}`", e.value),
        })?
    } else {
        Scenario::SweepPower
    };

    let mut cfg = preset(scenario);

    // typed readers -------------------------------------------------------
    let mut take = |key: &str| -> Option<(usize, String)> {
        entries.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    };
    fn f64_of(line: usize, key: &str, v: &str) -> Result<f64> {
        v.parse::<f64>().map_err(|_| QskrError::Config {
            line,
            key: key.into(),
            msg: format!("`{v}` is not a number"),
        })
    }
    fn usize_of(line: usize, key: &str, v: &str) -> Result<usize> {
        v.parse::<usize>().map_err(|_| QskrError::Config {
            line,
            key: key.into(),
            msg: format!("`{v}` is not a nonnegative integer"),
        })
    }
    fn u64_of(line: usize, key: &str, v: &str) -> Result<u64> {
        v.parse::<u64>().map_err(|_| QskrError::Config {
            line,
            key: key.into(),
            msg: format!("`{v}` is not a 64-bit seed"),
        })
    }
    fn bool_of(line: usize, key: &str, v: &str) -> Result<bool> {
        match v {
            "true" | "on" | "yes" | "1" => Ok(true),
            "false" | "off" | "no" | "0" => Ok(false),
            _ => Err(QskrError::Config {
                line,
                key: key.into(),
                msg: format!("`{v}` is not a boolean"),
            }),
        }
    }
    fn list_of(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
        v.split(',')
            .map(|p| f64_of(line, key, p.trim()))
            .collect()
    }
    /// Scalar broadcast or explicit per-user list.
    fn per_user(line: usize, key: &str, v: &str, k: usize) -> Result<Vec<f64>> {
        let vals = list_of(line, key, v)?;
        if vals.len() == 1 {
            Ok(vec![vals[0]; k])
        } else if vals.len() == k {
            Ok(vals)
        } else {
            Err(QskrError::Config {
                line,
                key: key.into(),
                msg: format!("expected 1 or {k} values, got {}", vals.len()),
            })
        }
    }

    // [system] --------------------------------------------------------------
    if let Some((line, v)) = take("system.users") {
        let k = usize_of(line, "users", &v)?;
        if k == 0 {
            return Err(QskrError::Config {
                line,
                key: "users".into(),
                msg: "must be >= 1".into(),
            });
        }
        // resize per-user vectors, broadcasting the first entry
        cfg.system.k_users = k;
        cfg.system.w = vec![cfg.system.w[0]; k];
        cfg.system.v_max_user = vec![cfg.system.v_max_user[0]; k];
        if cfg.channel.transmittances.len() != k {
            cfg.channel.transmittances = linspace(0.95, 0.35, k);
        }
        if cfg.channel.distances_m.len() != k {
            cfg.channel.distances_m = vec![100.0; k];
        }
    }
    let k = cfg.system.k_users;
    if let Some((line, v)) = take("system.eta") {
        let x = f64_of(line, "eta", &v)?;
        if !(x > 0.0 && x <= 1.0) {
            return Err(QskrError::Config {
                line,
                key: "eta".into(),
                msg: format!("{x} outside (0, 1]"),
            });
        }
        cfg.system.eta = x;
    }
    if let Some((line, v)) = take("system.delta_det_sq") {
        let x = f64_of(line, "delta_det_sq", &v)?;
        if x < 0.0 {
            return Err(QskrError::Config {
                line,
                key: "delta_det_sq".into(),
                msg: "must be >= 0".into(),
            });
        }
        cfg.system.delta_det_sq = x;
    }
    if let Some((line, v)) = take("system.excess_noise") {
        cfg.system.w = per_user(line, "excess_noise", &v, k)?;
        if cfg.system.w.iter().any(|&x| x < 0.0) {
            return Err(QskrError::Config {
                line,
                key: "excess_noise".into(),
                msg: "must be >= 0".into(),
            });
        }
    }
    if let Some((line, v)) = take("system.v_max_user") {
        cfg.system.v_max_user = per_user(line, "v_max_user", &v, k)?;
        if cfg.system.v_max_user.iter().any(|&x| x <= 1.0) {
            return Err(QskrError::Config {
                line,
                key: "v_max_user".into(),
                msg: "caps must exceed 1 SNU".into(),
            });
        }
    }
    if let Some((line, v)) = take("system.v_max_bs") {
        let x = f64_of(line, "v_max_bs", &v)?;
        if x <= 0.0 {
            return Err(QskrError::Config {
                line,
                key: "v_max_bs".into(),
                msg: "must be > 0".into(),
            });
        }
        cfg.system.v_max_bs = x;
    }
    if let Some((line, v)) = take("system.tau_d") {
        cfg.system.tau_d = f64_of(line, "tau_d", &v)?;
    }
    if let Some((line, v)) = take("system.interference_weighting") {
        cfg.system.interference_weighting = match v.as_str() {
            "printed" => InterferenceWeighting::Printed,
            "transmittance" => InterferenceWeighting::Transmittance,
            other => {
                return Err(QskrError::Config {
                    line,
                    key: "interference_weighting".into(),
                    msg: format!("`{other}` is not printed|transmittance"),
                })
            }
        };
    }
    if let Some((line, v)) = take("system.clip_negative_users") {
        cfg.system.clip_negative_users = bool_of(line, "clip_negative_users", &v)?;
    }
    if let Some((line, v)) = take("system.wavelength_m") {
        let x = f64_of(line, "wavelength_m", &v)?;
        if x <= 0.0 {
            return Err(QskrError::Config {
                line,
                key: "wavelength_m".into(),
                msg: "must be > 0".into(),
            });
        }
        cfg.system.wavelength = x;
    }
    if let Some((line, v)) = take("system.symbol_rate_hz") {
        let x = f64_of(line, "symbol_rate_hz", &v)?;
        if x <= 0.0 {
            return Err(QskrError::Config {
                line,
                key: "symbol_rate_hz".into(),
                msg: "must be > 0".into(),
            });
        }
        cfg.system.symbol_rate = x;
    }
    // p_max_bs_dbm is applied after wavelength/symbol_rate so the mapping
    // uses the file's values.
    if let Some((line, v)) = take("system.p_max_bs_dbm") {
        let dbm = f64_of(line, "p_max_bs_dbm", &v)?;
        cfg.system.v_max_bs = crate::channel::dbm_to_variance(
            dbm,
            cfg.system.wavelength,
            cfg.system.symbol_rate,
        )
        .map_err(|e| QskrError::Config {
            line,
            key: "p_max_bs_dbm".into(),
            msg: e.to_string(),
        })?;
    }

    // [channel] --------------------------------------------------------------
    if let Some((line, v)) = take("channel.mode") {
        cfg.channel.mode = match v.as_str() {
            "transmittance" => ChannelMode::Transmittance,
            "geometry" => ChannelMode::Geometry,
            other => {
                return Err(QskrError::Config {
                    line,
                    key: "mode".into(),
                    msg: format!("`{other}` is not transmittance|geometry"),
                })
            }
        };
    }
    if let Some((line, v)) = take("channel.transmittances") {
        let ts = per_user(line, "transmittances", &v, k)?;
        if ts.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(QskrError::Config {
                line,
                key: "transmittances".into(),
                msg: "entries must lie in (0, 1]".into(),
            });
        }
        cfg.channel.transmittances = ts;
    }
    if let Some((line, v)) = take("channel.sigma_x") {
        let x = f64_of(line, "sigma_x", &v)?;
        if x <= 0.0 {
            return Err(QskrError::Config {
                line,
                key: "sigma_x".into(),
                msg: "must be > 0".into(),
            });
        }
        cfg.channel.sigma_x = x;
    }
    if let Some((line, v)) = take("channel.turbulence") {
        cfg.channel.turbulence = bool_of(line, "turbulence", &v)?;
    }
    if let Some((line, v)) = take("channel.distances_m") {
        cfg.channel.distances_m = per_user(line, "distances_m", &v, k)?;
    }
    if let Some((line, v)) = take("channel.d_t_m") {
        cfg.channel.d_t_m = f64_of(line, "d_t_m", &v)?;
    }
    if let Some((line, v)) = take("channel.d_r_m") {
        cfg.channel.d_r_m = f64_of(line, "d_r_m", &v)?;
    }
    if let Some((line, v)) = take("channel.distance_profile") {
        let mut knots = Vec::new();
        for part in v.split(',') {
            let Some((d, t)) = part.trim().split_once(':') else {
                return Err(QskrError::Config {
                    line,
                    key: "distance_profile".into(),
                    msg: format!("`{part}` is not `distance:transmittance`"),
                });
            };
            knots.push((
                f64_of(line, "distance_profile", d.trim())?,
                f64_of(line, "distance_profile", t.trim())?,
            ));
        }
        knots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        cfg.channel.distance_profile = knots;
    }

    // [experiment] -------------------------------------------------------------
    if let Some((line, v)) = take("experiment.grid_start") {
        cfg.experiment.grid.start = f64_of(line, "grid_start", &v)?;
    }
    if let Some((line, v)) = take("experiment.grid_stop") {
        cfg.experiment.grid.stop = f64_of(line, "grid_stop", &v)?;
    }
    if let Some((line, v)) = take("experiment.grid_points") {
        cfg.experiment.grid.points = usize_of(line, "grid_points", &v)?;
    }
    if let Some((line, v)) = take("experiment.grid2_start") {
        let g = cfg.experiment.grid2.get_or_insert(AxisSpec {
            start: 0.0,
            stop: 1.0,
            points: 2,
        });
        g.start = f64_of(line, "grid2_start", &v)?;
    }
    if let Some((line, v)) = take("experiment.grid2_stop") {
        let g = cfg.experiment.grid2.get_or_insert(AxisSpec {
            start: 0.0,
            stop: 1.0,
            points: 2,
        });
        g.stop = f64_of(line, "grid2_stop", &v)?;
    }
    if let Some((line, v)) = take("experiment.grid2_points") {
        let g = cfg.experiment.grid2.get_or_insert(AxisSpec {
            start: 0.0,
            stop: 1.0,
            points: 2,
        });
        g.points = usize_of(line, "grid2_points", &v)?;
    }
    if let Some((line, v)) = take("experiment.mc_trials") {
        let n = usize_of(line, "mc_trials", &v)?;
        if n == 0 {
            return Err(QskrError::Config {
                line,
                key: "mc_trials".into(),
                msg: "must be >= 1".into(),
            });
        }
        cfg.experiment.mc_trials = n;
    }
    if let Some((line, v)) = take("experiment.seed") {
        cfg.experiment.seed = u64_of(line, "seed", &v)?;
    }
    if let Some((line, v)) = take("experiment.threads") {
        let n = usize_of(line, "threads", &v)?;
        cfg.experiment.threads = n.max(1);
    }
    if let Some((_, v)) = take("experiment.output") {
        cfg.experiment.output = PathBuf::from(v);
    }
    if let Some((line, v)) = take("experiment.oma_resource_scaling") {
        cfg.experiment.oma_resource_scaling = bool_of(line, "oma_resource_scaling", &v)?;
    }
    if let Some((line, v)) = take("experiment.fixed_p_dbm") {
        cfg.experiment.fixed_p_dbm = f64_of(line, "fixed_p_dbm", &v)?;
    }

    // unknown keys ---------------------------------------------------------------
    for (key, e) in entries.iter().filter(|(_, e)| !e.used) {
        let msg = format!(
            "unknown key `{key}` at line {} (section [{}])",
            e.line, e.section
        );
        if strict {
            return Err(QskrError::Config {
                line: e.line,
                key: key.clone(),
                msg: "unknown key".into(),
            });
        }
        warnings.push(msg);
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Parse a configuration file from disk.
pub fn parse_config(
    path: &std::path::Path,
    scenario_override: Option<Scenario>,
    strict: bool,
    warnings: &mut Vec<String>,
) -> Result<FullConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_text(&text, scenario_override, strict, warnings)
}

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Serialize a full configuration in the exact format [`parse_config_text`]
/// accepts; parsing the output reproduces the input structures.
pub fn serialize_config(cfg: &FullConfig) -> String {
    let s = &cfg.system;
    let c = &cfg.channel;
    let e = &cfg.experiment;
    let mut out = String::new();
    out.push_str("[system]\n");
    out.push_str(&format!("users = {}\n", s.k_users));
    out.push_str(&format!("eta = {:?}\n", s.eta));
    out.push_str(&format!("delta_det_sq = {:?}\n", s.delta_det_sq));
    out.push_str(&format!("excess_noise = {}\n", join(&s.w)));
    out.push_str(&format!("v_max_user = {}\n", join(&s.v_max_user)));
    out.push_str(&format!("v_max_bs = {:?}\n", s.v_max_bs));
    out.push_str(&format!("tau_d = {:?}\n", s.tau_d));
    out.push_str(&format!(
        "interference_weighting = {}\n",
        match s.interference_weighting {
            InterferenceWeighting::Printed => "printed",
            InterferenceWeighting::Transmittance => "transmittance",
        }
    ));
    out.push_str(&format!("clip_negative_users = {}\n", s.clip_negative_users));
    out.push_str(&format!("wavelength_m = {:?}\n", s.wavelength));
    out.push_str(&format!("symbol_rate_hz = {:?}\n", s.symbol_rate));
    out.push_str("\n[channel]\n");
    out.push_str(&format!(
        "mode = {}\n",
        match c.mode {
            ChannelMode::Transmittance => "transmittance",
            ChannelMode::Geometry => "geometry",
        }
    ));
    out.push_str(&format!("transmittances = {}\n", join(&c.transmittances)));
    out.push_str(&format!("sigma_x = {:?}\n", c.sigma_x));
    out.push_str(&format!("turbulence = {}\n", c.turbulence));
    out.push_str(&format!("distances_m = {}\n", join(&c.distances_m)));
    out.push_str(&format!("d_t_m = {:?}\n", c.d_t_m));
    out.push_str(&format!("d_r_m = {:?}\n", c.d_r_m));
    out.push_str(&format!(
        "distance_profile = {}\n",
        c.distance_profile
            .iter()
            .map(|(d, t)| format!("{d:?}:{t:?}"))
            .collect::<Vec<_>>()
            .join(",")
    ));
    out.push_str("\n[experiment]\n");
    out.push_str(&format!("scenario = {}\n", e.scenario.name()));
    out.push_str(&format!("grid_start = {:?}\n", e.grid.start));
    out.push_str(&format!("grid_stop = {:?}\n", e.grid.stop));
    out.push_str(&format!("grid_points = {}\n", e.grid.points));
    if let Some(g2) = &e.grid2 {
        out.push_str(&format!("grid2_start = {:?}\n", g2.start));
        out.push_str(&format!("grid2_stop = {:?}\n", g2.stop));
        out.push_str(&format!("grid2_points = {}\n", g2.points));
    }
    out.push_str(&format!("mc_trials = {}\n", e.mc_trials));
    out.push_str(&format!("seed = {}\n", e.seed));
    out.push_str(&format!("threads = {}\n", e.threads));
    out.push_str(&format!("output = {}\n", e.output.display()));
    out.push_str(&format!(
        "oma_resource_scaling = {}\n",
        e.oma_resource_scaling
    ));
    out.push_str(&format!("fixed_p_dbm = {:?}\n", e.fixed_p_dbm));
    out
}

/// FNV-1a hash of the canonical serialized configuration.
pub fn config_hash(cfg: &FullConfig) -> String {
    let text = serialize_config(cfg);
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
