//! Run configuration: flat `key = value` pairs under `[section]` headers.
//!
//! ```text
//! # comment
//! [control]
//! rabi = 15
//! detuning = 50
//! ```
//!
//! Every key is optional and defaults to the Cs D1 setup (splitting 256,
//! Rabi frequency 15, detuning +50, optical depth 50, pulse length 10).
//! Unknown sections or keys are rejected so typos cannot pass silently.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::angular_momentum::{HalfInt, Sublevel};
use crate::carrier_tuner::TuneObjective;
use crate::dressed_medium::{AtomSystem, ControlField, Couplings, LevelScheme, DEFAULT_GAMMA_0};
use crate::info_merit::InfoUnit;
use crate::pulse_transport::{Medium, TimeWindow, DEFAULT_SAMPLES};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("config error in `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    (
        "atom",
        &[
            "nuclear_spin",
            "delta_hf",
            "gamma_0",
            "weights",
            "w_n",
            "w_n_prime",
            "control_ratio",
            "populated_f",
            "populated_m",
            "storage_f",
            "storage_m",
        ],
    ),
    ("control", &["rabi", "detuning"]),
    ("medium", &["od"]),
    (
        "pulse",
        &["duration", "carrier", "samples", "t_min", "t_max", "cutoff", "satellites"],
    ),
    ("spectrum", &["min", "max", "points"]),
    (
        "tune",
        &["min", "max", "span", "points", "objective", "min_transmission"],
    ),
    (
        "info",
        &["units", "eta_min", "eta_max", "eta_points", "squeezing", "sp_eta", "sp_mu"],
    ),
    ("output", &["stride"]),
];

/// Raw `section.key -> value` map, in sorted order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(i) => &line[..i],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let here = format!("line {}", lineno + 1);
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new(&here, "unterminated section header"))?
                    .trim();
                if !KNOWN_KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::new(name, "unknown section"));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(&here, "expected `key = value`"))?;
            let section = section
                .as_deref()
                .ok_or_else(|| ConfigError::new(key.trim(), "key outside of any [section]"))?;
            raw.set(&format!("{section}.{}", key.trim()), value.trim())?;
        }
        Ok(raw)
    }

    /// Sets `section.key`, checking that it is a known field.
    pub fn set(&mut self, field: &str, value: &str) -> Result<()> {
        let (section, key) = field
            .split_once('.')
            .ok_or_else(|| ConfigError::new(field, "expected `section.key`"))?;
        let known = KNOWN_KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .ok_or_else(|| ConfigError::new(field, "unknown section"))?;
        if !known.1.contains(&key) {
            return Err(ConfigError::new(field, "unknown key"));
        }
        self.entries.insert(field.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `section.key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (field, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::new(assignment, "override must look like section.key=value"))?;
        self.set(field.trim(), value.trim())
    }

    fn get(&self, field: &str) -> Option<&str> {
        self.entries.get(field).map(String::as_str)
    }

    fn f64_or(&self, field: &str, default: f64) -> Result<f64> {
        match self.get(field) {
            None => Ok(default),
            Some(v) => parse_f64(field, v),
        }
    }

    fn opt_f64(&self, field: &str) -> Result<Option<f64>> {
        match self.get(field) {
            None | Some("auto") => Ok(None),
            Some(v) => parse_f64(field, v).map(Some),
        }
    }

    fn usize_or(&self, field: &str, default: usize) -> Result<usize> {
        match self.get(field) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError::new(field, format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn bool_or(&self, field: &str, default: bool) -> Result<bool> {
        match self.get(field) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(ConfigError::new(field, format!("`{v}` is not a boolean"))),
        }
    }

    fn list_or(&self, field: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(field) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| parse_f64(field, x.trim()))
                .collect(),
        }
    }

    fn half_int(&self, field: &str) -> Result<Option<HalfInt>> {
        self.get(field)
            .map(|v| {
                v.parse::<HalfInt>()
                    .map_err(|e| ConfigError::new(field, e.to_string()))
            })
            .transpose()
    }
}

fn parse_f64(field: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| ConfigError::new(field, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(ConfigError::new(field, "must be finite"));
    }
    Ok(x)
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightSource {
    /// Computed from the level scheme of a D1 line with this nuclear spin.
    Derive {
        nuclear_spin: HalfInt,
        populated: Option<Sublevel>,
        storage: Option<Sublevel>,
    },
    Explicit(Couplings),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomConfig {
    pub delta_hf: f64,
    pub gamma_0: f64,
    pub weights: WeightSource,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseConfig {
    pub duration: f64,
    /// `None` means tune the carrier first.
    pub carrier: Option<f64>,
    pub window: TimeWindow,
    pub cutoff: f64,
    pub satellites: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneConfig {
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Half-width of the automatic range around the Raman resonance.
    pub span: f64,
    pub points: usize,
    pub objective: TuneObjective,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfoConfig {
    pub units: InfoUnit,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_points: usize,
    pub squeezing: Vec<f64>,
    pub sp_eta: Vec<f64>,
    pub sp_mu: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub atom: AtomConfig,
    pub control: ControlField,
    pub medium: Medium,
    pub pulse: PulseConfig,
    pub spectrum: (f64, f64, usize),
    pub tune: TuneConfig,
    pub info: InfoConfig,
    pub stride: usize,
}

impl RunConfig {
    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self> {
        let mut raw = RawConfig::parse(text)?;
        for o in overrides {
            raw.apply_override(o)?;
        }
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let atom = Self::atom_section(&raw)?;
        let rabi = raw.f64_or("control.rabi", 15.0)?;
        if rabi < 0.0 {
            return Err(ConfigError::new("control.rabi", "must be non-negative"));
        }
        let control = ControlField {
            rabi,
            detuning: raw.f64_or("control.detuning", 50.0)?,
        };
        let od = raw.f64_or("medium.od", 50.0)?;
        let medium = Medium::new(od).map_err(|e| ConfigError::new("medium.od", e.to_string()))?;

        let duration = raw.f64_or("pulse.duration", 10.0)?;
        if duration <= 0.0 {
            return Err(ConfigError::new("pulse.duration", "must be positive"));
        }
        let window = TimeWindow {
            t_min: raw.f64_or("pulse.t_min", -2.0 * duration)?,
            t_max: raw.f64_or("pulse.t_max", 18.0 * duration)?,
            samples: raw.usize_or("pulse.samples", DEFAULT_SAMPLES)?,
        };
        window
            .validate_for(duration)
            .map_err(|e| ConfigError::new("pulse.samples/t_min/t_max", e.to_string()))?;
        let pulse = PulseConfig {
            duration,
            carrier: raw.opt_f64("pulse.carrier")?,
            window,
            cutoff: raw.f64_or("pulse.cutoff", duration)?,
            satellites: raw.bool_or("pulse.satellites", false)?,
        };

        let spectrum = (
            raw.f64_or("spectrum.min", -100.0)?,
            raw.f64_or("spectrum.max", 350.0)?,
            raw.usize_or("spectrum.points", 4501)?,
        );
        if spectrum.2 < 2 {
            return Err(ConfigError::new("spectrum.points", "need at least 2 points"));
        }
        if spectrum.1 <= spectrum.0 {
            return Err(ConfigError::new("spectrum.max", "must exceed spectrum.min"));
        }

        let objective = match raw.get("tune.objective").unwrap_or("max_stored_fraction") {
            "max_stored_fraction" => TuneObjective::MaxStoredFraction,
            "max_delay_subject_to_transmission" | "max_delay" => {
                let min_transmission = raw.f64_or("tune.min_transmission", 0.5)?;
                if !(0.0..=1.0).contains(&min_transmission) {
                    return Err(ConfigError::new("tune.min_transmission", "must lie in [0, 1]"));
                }
                TuneObjective::MaxDelaySubjectTo { min_transmission }
            }
            other => {
                return Err(ConfigError::new(
                    "tune.objective",
                    format!("unknown objective `{other}`"),
                ))
            }
        };
        let tune = TuneConfig {
            min: raw.opt_f64("tune.min")?,
            max: raw.opt_f64("tune.max")?,
            span: raw.f64_or("tune.span", 5.0)?,
            points: raw.usize_or("tune.points", 64)?,
            objective,
        };
        if tune.points < crate::carrier_tuner::MIN_SCAN_POINTS {
            return Err(ConfigError::new(
                "tune.points",
                format!("need at least {}", crate::carrier_tuner::MIN_SCAN_POINTS),
            ));
        }
        if tune.span <= 0.0 {
            return Err(ConfigError::new("tune.span", "must be positive"));
        }

        let units = raw
            .get("info.units")
            .unwrap_or("nats")
            .parse::<InfoUnit>()
            .map_err(|e| ConfigError::new("info.units", e.to_string()))?;
        let info = InfoConfig {
            units,
            eta_min: raw.f64_or("info.eta_min", 0.0)?,
            eta_max: raw.f64_or("info.eta_max", 1.0)?,
            eta_points: raw.usize_or("info.eta_points", 101)?,
            squeezing: raw.list_or("info.squeezing", &[1.0, 2.0, 5.0, 10.0])?,
            sp_eta: raw.list_or("info.sp_eta", &[0.1, 0.3, 0.5, 0.7, 0.9])?,
            sp_mu: raw.list_or("info.sp_mu", &[1e-4, 1e-3, 5e-3, 1e-2])?,
        };
        if !(0.0 <= info.eta_min && info.eta_min < info.eta_max && info.eta_max <= 1.0) {
            return Err(ConfigError::new("info.eta_min/eta_max", "need 0 <= eta_min < eta_max <= 1"));
        }
        if info.eta_points < 2 {
            return Err(ConfigError::new("info.eta_points", "need at least 2 points"));
        }
        if let Some(s) = info.squeezing.iter().find(|&&s| s < 1.0) {
            return Err(ConfigError::new("info.squeezing", format!("squeezing {s} must be >= 1")));
        }
        if let Some(e) = info.sp_eta.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return Err(ConfigError::new("info.sp_eta", format!("efficiency {e} must lie in (0, 1)")));
        }
        if let Some(m) = info.sp_mu.iter().find(|&&m| !(0.0..1.0).contains(&m)) {
            return Err(ConfigError::new("info.sp_mu", format!("noise {m} must lie in [0, 1)")));
        }

        let stride = raw.usize_or("output.stride", 1)?;
        if stride == 0 {
            return Err(ConfigError::new("output.stride", "must be at least 1"));
        }

        let cfg = RunConfig {
            atom,
            control,
            medium,
            pulse,
            spectrum,
            tune,
            info,
            stride,
        };
        cfg.atom_system()?;
        Ok(cfg)
    }

    fn atom_section(raw: &RawConfig) -> Result<AtomConfig> {
        let delta_hf = raw.f64_or("atom.delta_hf", 256.0)?;
        if delta_hf <= 0.0 {
            return Err(ConfigError::new("atom.delta_hf", "must be positive"));
        }
        let gamma_0 = raw.f64_or("atom.gamma_0", DEFAULT_GAMMA_0)?;
        if gamma_0 < 0.0 {
            return Err(ConfigError::new("atom.gamma_0", "must be non-negative"));
        }
        let weights = match raw.get("atom.weights").unwrap_or("derive") {
            "derive" => {
                let nuclear_spin = raw
                    .half_int("atom.nuclear_spin")?
                    .unwrap_or(HalfInt::from_twice(7));
                let pair = |f: &str, m: &str| -> Result<Option<Sublevel>> {
                    match (raw.half_int(f)?, raw.half_int(m)?) {
                        (Some(f), Some(m)) => Ok(Some(Sublevel::new(f, m))),
                        (None, None) => Ok(None),
                        _ => Err(ConfigError::new(f, "give both F and M or neither")),
                    }
                };
                WeightSource::Derive {
                    nuclear_spin,
                    populated: pair("atom.populated_f", "atom.populated_m")?,
                    storage: pair("atom.storage_f", "atom.storage_m")?,
                }
            }
            "explicit" => {
                let need = |f: &str| -> Result<f64> {
                    raw.opt_f64(f)?
                        .ok_or_else(|| ConfigError::new(f, "required when atom.weights = explicit"))
                };
                WeightSource::Explicit(Couplings {
                    w_n: need("atom.w_n")?,
                    w_n_prime: need("atom.w_n_prime")?,
                    control_ratio: need("atom.control_ratio")?,
                })
            }
            other => {
                return Err(ConfigError::new(
                    "atom.weights",
                    format!("expected `derive` or `explicit`, got `{other}`"),
                ))
            }
        };
        Ok(AtomConfig {
            delta_hf,
            gamma_0,
            weights,
        })
    }

    pub fn atom_system(&self) -> Result<AtomSystem> {
        let couplings = match &self.atom.weights {
            WeightSource::Explicit(c) => *c,
            WeightSource::Derive {
                nuclear_spin,
                populated,
                storage,
            } => {
                let mut scheme = LevelScheme::d1_default(*nuclear_spin)
                    .map_err(|e| ConfigError::new("atom.nuclear_spin", e.to_string()))?;
                if let Some(p) = populated {
                    scheme.populated = *p;
                }
                if let Some(s) = storage {
                    scheme.storage = *s;
                }
                scheme
                    .couplings()
                    .map_err(|e| ConfigError::new("atom", e.to_string()))?
            }
        };
        AtomSystem::new(self.atom.delta_hf, self.atom.gamma_0, couplings)
            .map_err(|e| ConfigError::new("atom", e.to_string()))
    }
}
