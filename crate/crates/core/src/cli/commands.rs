//! The four pipelines, each rendering to CSV text.
//!
//! Numbers are written with `{:.16e}` (17 significant digits), which parses
//! back to the identical `f64`. Metadata goes in `#` comment lines above the
//! column header.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use super::config::{ConfigError, RunConfig};
use crate::carrier_tuner::{scan, CarrierProblem, CarrierRange, TuneError, TuneObjective, TuneResult};
use crate::dressed_medium::{
    locate_at_resonances, raman_resonance, spectrum, AtomSystem, DetuningGrid, DressedMediumError, Model,
};
use crate::info_merit::{coherent_info_curves, single_photon_coherent_info, ChannelParams, InfoError};
use crate::pulse_transport::{metrics, PulseError, TransportMetrics};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<DressedMediumError> for CliError {
    fn from(e: DressedMediumError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<PulseError> for CliError {
    fn from(e: PulseError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<TuneError> for CliError {
    fn from(e: TuneError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<InfoError> for CliError {
    fn from(e: InfoError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Propagate,
    Tune,
    Info,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Propagate => "propagate",
            Command::Tune => "tune",
            Command::Info => "info",
        }
    }
}

/// One output file. `suffix` is `None` for the main output; secondary tables
/// go next to it as `<stem>.<suffix>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub suffix: Option<&'static str>,
    pub text: String,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let main = |text| Artifact { suffix: None, text };
    Ok(match command {
        Command::Spectrum => vec![main(cmd_spectrum(cfg)?)],
        Command::Propagate => vec![main(cmd_propagate(cfg)?)],
        Command::Tune => vec![main(cmd_tune(cfg)?)],
        Command::Info => {
            let (curves, table) = cmd_info(cfg)?;
            vec![
                main(curves),
                Artifact {
                    suffix: Some("single_photon"),
                    text: table,
                },
            ]
        }
    })
}

fn header(out: &mut String, command: Command, cfg: &RunConfig, atom: &AtomSystem) {
    let _ = writeln!(out, "# raman-memory {}", command.name());
    let _ = writeln!(out, "# atom.delta_hf = {}", atom.delta_hf);
    let _ = writeln!(out, "# atom.gamma_0 = {}", atom.gamma_0);
    let _ = writeln!(out, "# atom.w_n = {}", atom.w_n);
    let _ = writeln!(out, "# atom.w_n_prime = {}", atom.w_n_prime);
    let _ = writeln!(out, "# atom.control_ratio = {}", atom.control_ratio);
    let _ = writeln!(out, "# control.rabi = {}", cfg.control.rabi);
    let _ = writeln!(out, "# control.detuning = {}", cfg.control.detuning);
}

fn pulse_header(out: &mut String, cfg: &RunConfig) {
    let p = &cfg.pulse;
    let _ = writeln!(out, "# medium.od = {}", cfg.medium.od);
    let _ = writeln!(out, "# pulse.duration = {}", p.duration);
    let _ = writeln!(out, "# pulse.t_min = {}", p.window.t_min);
    let _ = writeln!(out, "# pulse.t_max = {}", p.window.t_max);
    let _ = writeln!(out, "# pulse.samples = {}", p.window.samples);
    let _ = writeln!(out, "# pulse.cutoff = {}", p.cutoff);
}

fn row(out: &mut String, values: &[f64]) {
    let cells: Vec<String> = values.iter().map(|&x| num(x)).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let atom = cfg.atom_system()?;
    let (min, max, points) = cfg.spectrum;
    let grid = DetuningGrid::new(min, max, points)
        .map_err(|e| ConfigError::new("spectrum", e.to_string()))?;
    let full = spectrum(&atom, &cfg.control, &grid, Model::Full)?;
    let lambda = spectrum(&atom, &cfg.control, &grid, Model::Lambda)?;

    let mut out = String::new();
    header(&mut out, Command::Spectrum, cfg, &atom);
    let _ = writeln!(out, "# spectrum.min = {min}");
    let _ = writeln!(out, "# spectrum.max = {max}");
    let _ = writeln!(out, "# spectrum.points = {points}");
    out.push_str("delta_bar,chi_re_full,chi_im_full,chi_re_lambda,chi_im_lambda\n");
    for ((d, f), l) in full.detunings.iter().zip(&full.values).zip(&lambda.values) {
        row(&mut out, &[*d, f.re, f.im, l.re, l.im]);
    }
    Ok(out)
}

fn tune_range(cfg: &RunConfig, atom: &AtomSystem) -> Result<CarrierRange, CliError> {
    let resonance = raman_resonance(&locate_at_resonances(atom, &cfg.control)?, &cfg.control).position;
    let t = &cfg.tune;
    let range = CarrierRange {
        min: t.min.unwrap_or(resonance - t.span),
        max: t.max.unwrap_or(resonance + t.span),
        points: t.points,
    };
    if range.max <= range.min {
        return Err(ConfigError::new("tune.max", "must exceed tune.min").into());
    }
    Ok(range)
}

fn run_tuner(cfg: &RunConfig, atom: &AtomSystem, objective: TuneObjective) -> Result<TuneResult, CliError> {
    let range = tune_range(cfg, atom)?;
    Ok(scan(
        atom,
        &cfg.control,
        &cfg.medium,
        cfg.pulse.duration,
        &cfg.pulse.window,
        &range,
        objective,
    )?)
}

fn metrics_line(out: &mut String, label: &str, carrier: f64, m: &TransportMetrics) {
    let _ = writeln!(
        out,
        "# metrics {label}: carrier={} transmission={} delay={} stored_fraction={}",
        num(carrier),
        num(m.transmission),
        num(m.delay),
        num(m.stored_fraction)
    );
}

pub fn cmd_propagate(cfg: &RunConfig) -> Result<String, CliError> {
    let atom = cfg.atom_system()?;
    let (carrier, tuned) = match cfg.pulse.carrier {
        Some(c) => (c, false),
        None => (run_tuner(cfg, &atom, TuneObjective::MaxStoredFraction)?.best_carrier, true),
    };
    let problem = CarrierProblem::new(&atom, &cfg.control, &cfg.medium, cfg.pulse.duration, &cfg.pulse.window)?;

    let shift = 2.0 * PI / cfg.pulse.duration;
    let carriers: Vec<(&str, f64)> = if cfg.pulse.satellites {
        vec![("minus", carrier - shift), ("center", carrier), ("plus", carrier + shift)]
    } else {
        vec![("center", carrier)]
    };
    let mut input = None;
    let mut outputs = Vec::new();
    let mut summary = Vec::new();
    for &(label, c) in &carriers {
        let (i, o) = problem.pulses(c);
        summary.push((label, c, metrics(&i, &o, cfg.pulse.cutoff)?));
        outputs.push(o.intensity());
        input.get_or_insert(i);
    }
    let input = input.expect("at least one carrier");

    let mut out = String::new();
    header(&mut out, Command::Propagate, cfg, &atom);
    pulse_header(&mut out, cfg);
    let _ = writeln!(out, "# pulse.carrier = {}{}", num(carrier), if tuned { " (tuned)" } else { "" });
    let _ = writeln!(out, "# output.stride = {}", cfg.stride);
    for (label, c, m) in &summary {
        metrics_line(&mut out, label, *c, m);
    }
    out.push_str("time,in_intensity");
    if cfg.pulse.satellites {
        out.push_str(",out_intensity_minus,out_intensity_center,out_intensity_plus\n");
    } else {
        out.push_str(",out_intensity\n");
    }
    let in_int = input.intensity();
    let mut values = Vec::with_capacity(2 + outputs.len());
    for n in (0..input.len()).step_by(cfg.stride) {
        values.clear();
        values.push(input.time(n));
        values.push(in_int[n]);
        values.extend(outputs.iter().map(|o| o[n]));
        row(&mut out, &values);
    }
    Ok(out)
}

pub fn cmd_tune(cfg: &RunConfig) -> Result<String, CliError> {
    let atom = cfg.atom_system()?;
    let objective = cfg.tune.objective;
    let result = run_tuner(cfg, &atom, objective)?;
    let range = tune_range(cfg, &atom)?;

    let mut out = String::new();
    header(&mut out, Command::Tune, cfg, &atom);
    pulse_header(&mut out, cfg);
    let _ = writeln!(out, "# tune.min = {}", range.min);
    let _ = writeln!(out, "# tune.max = {}", range.max);
    let _ = writeln!(out, "# tune.points = {}", range.points);
    match objective {
        TuneObjective::MaxStoredFraction => {
            let _ = writeln!(out, "# tune.objective = max_stored_fraction");
        }
        TuneObjective::MaxDelaySubjectTo { min_transmission } => {
            let _ = writeln!(out, "# tune.objective = max_delay_subject_to_transmission");
            let _ = writeln!(out, "# tune.min_transmission = {min_transmission}");
        }
    }
    let _ = writeln!(out, "# raman_resonance = {}", num(result.resonance));
    metrics_line(&mut out, "best", result.best_carrier, &result.metrics);
    let _ = writeln!(out, "# best objective={}", num(result.objective));
    out.push_str("carrier,transmission,delay,stored_fraction,objective\n");
    for (c, m) in &result.scan_trace {
        row(&mut out, &[*c, m.transmission, m.delay, m.stored_fraction, objective.value(m)]);
    }
    Ok(out)
}

pub fn cmd_info(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let info = &cfg.info;
    let step = (info.eta_max - info.eta_min) / (info.eta_points - 1) as f64;
    let etas: Vec<f64> = (0..info.eta_points)
        .map(|i| {
            if i + 1 == info.eta_points {
                info.eta_max
            } else {
                info.eta_min + i as f64 * step
            }
        })
        .collect();
    let curves = coherent_info_curves(&etas, &info.squeezing, info.units)?;

    let mut out = String::from("# raman-memory info\n");
    let _ = writeln!(out, "# info.units = {}", info.units);
    out.push_str("eta,s,I_e,units\n");
    for p in &curves {
        let _ = writeln!(out, "{},{},{},{}", num(p.eta), num(p.s), num(p.value), info.units);
    }

    let mut table = String::from("# raman-memory info single-photon table\n# units = bits\n");
    table.push_str("eta,mu,I_e,valid\n");
    for &eta in &info.sp_eta {
        for &mu in &info.sp_mu {
            let r = single_photon_coherent_info(&ChannelParams::new(eta, mu)?)?;
            let _ = writeln!(table, "{},{},{},{}", num(eta), num(mu), num(r.bits), r.valid);
        }
    }
    Ok((out, table))
}
