//! Signal-pulse propagation through the dressed medium.
//!
//! A pulse is a slowly varying envelope `alpha(t)` on a uniform time grid with
//! a carrier at probe detuning `carrier`. Its spectrum uses the convention
//!
//! ```text
//! S(w) = sum_n alpha(t_n) exp(+i w t_n) dt,   alpha(t_n) = sum_k S(w_k) exp(-i w_k t_n) dw / 2pi
//! ```
//!
//! so a spectral component at offset `w` sits at probe detuning `carrier + w`
//! and causal media have transfer functions analytic in the upper half plane.
//! The medium multiplies each component by `exp(i (od / 2) chi)`.

use std::f64::consts::PI;

use num::complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::par;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("time window too small: {0}")]
    WindowTooSmall(String),
    #[error("invalid sampling: {0}")]
    InvalidSampling(String),
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("input pulse carries no energy")]
    ZeroEnergyInput,
    #[error("pulse records are on different grids")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, PulseError>;

pub const MIN_SAMPLES: usize = 1 << 14;
pub const DEFAULT_SAMPLES: usize = 1 << 16;

/// Resonant optical depth `n0 (lambda / 2 pi)^2 L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Medium {
    pub od: f64,
}

impl Medium {
    pub fn new(od: f64) -> Result<Self> {
        if !(od.is_finite() && od >= 0.0) {
            return Err(PulseError::InvalidPulse(format!(
                "optical depth {od} must be finite and non-negative"
            )));
        }
        Ok(Medium { od })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PulseShape {
    #[default]
    Rectangular,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub duration: f64,
    pub carrier: f64,
    pub shape: PulseShape,
}

impl PulseSpec {
    pub fn rectangular(duration: f64, carrier: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(PulseError::InvalidPulse(format!(
                "duration {duration} must be positive"
            )));
        }
        if !carrier.is_finite() {
            return Err(PulseError::InvalidPulse("carrier must be finite".into()));
        }
        Ok(PulseSpec {
            duration,
            carrier,
            shape: PulseShape::Rectangular,
        })
    }
}

/// Sampling window `t_n = t_min + n (t_max - t_min) / samples`, `n < samples`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl TimeWindow {
    /// `[-2T, 18T]` with 2^16 samples.
    pub fn default_for(duration: f64) -> Self {
        TimeWindow {
            t_min: -2.0 * duration,
            t_max: 18.0 * duration,
            samples: DEFAULT_SAMPLES,
        }
    }

    pub fn step(&self) -> f64 {
        (self.t_max - self.t_min) / self.samples as f64
    }

    /// Checks the window against a pulse of length `duration` starting at 0.
    pub fn validate_for(&self, duration: f64) -> Result<()> {
        if !self.samples.is_power_of_two() || self.samples < MIN_SAMPLES {
            return Err(PulseError::InvalidSampling(format!(
                "samples = {} must be a power of two >= {MIN_SAMPLES}",
                self.samples
            )));
        }
        if !(self.t_min.is_finite() && self.t_max.is_finite()) || self.t_min >= 0.0 {
            return Err(PulseError::WindowTooSmall(format!(
                "window must start before the pulse at t = 0 (t_min = {})",
                self.t_min
            )));
        }
        if self.t_max - duration < 4.0 * duration {
            return Err(PulseError::WindowTooSmall(format!(
                "need t_max >= 5T = {}, got {}",
                5.0 * duration,
                self.t_max
            )));
        }
        // Frequency span 2 pi / dt must exceed 100 sinc lobes 2 pi / T.
        if self.step() * 100.0 >= duration {
            return Err(PulseError::InvalidSampling(format!(
                "time step {} too coarse for T = {duration}; need dt < T/100",
                self.step()
            )));
        }
        Ok(())
    }
}

/// Sampled pulse with its cached spectrum. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseRecord {
    t_min: f64,
    dt: f64,
    carrier: f64,
    envelope: Vec<Complex64>,
    /// FFT bin order: offsets `0, dw, ..., -dw`.
    spectrum: Vec<Complex64>,
}

fn fft_in_place(data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    fft.process(data);
}

impl PulseRecord {
    /// Builds a record from time samples, computing the spectrum.
    pub fn from_envelope(t_min: f64, dt: f64, carrier: f64, envelope: Vec<Complex64>) -> Self {
        let n = envelope.len();
        let mut spectrum = envelope.clone();
        // exp(+i w t) kernel is the unnormalized inverse DFT.
        fft_in_place(&mut spectrum, true);
        let dw = 2.0 * PI / (n as f64 * dt);
        par::for_each_indexed(&mut spectrum, |k, s| {
            let w = bin_offset(k, n) as f64 * dw;
            *s *= Complex64::from_polar(dt, w * t_min);
        });
        PulseRecord {
            t_min,
            dt,
            carrier,
            envelope,
            spectrum,
        }
    }

    /// Builds a record from spectral samples, computing the envelope.
    pub fn from_spectrum(t_min: f64, dt: f64, carrier: f64, spectrum: Vec<Complex64>) -> Self {
        let n = spectrum.len();
        let dw = 2.0 * PI / (n as f64 * dt);
        let scale = 1.0 / (n as f64 * dt);
        let mut envelope = spectrum.clone();
        par::for_each_indexed(&mut envelope, |k, s| {
            let w = bin_offset(k, n) as f64 * dw;
            *s *= Complex64::from_polar(scale, -w * t_min);
        });
        fft_in_place(&mut envelope, false);
        PulseRecord {
            t_min,
            dt,
            carrier,
            envelope,
            spectrum,
        }
    }

    /// The same envelope on a different carrier.
    pub fn with_carrier(&self, carrier: f64) -> Self {
        PulseRecord {
            carrier,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.envelope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envelope.is_empty()
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dw(&self) -> f64 {
        2.0 * PI / (self.len() as f64 * self.dt)
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t_min + n as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.time(n)).collect()
    }

    /// Spectral offset from the carrier of FFT bin `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        bin_offset(k, self.len()) as f64 * self.dw()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.frequency(k)).collect()
    }

    pub fn envelope(&self) -> &[Complex64] {
        &self.envelope
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.envelope.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `sum |alpha|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.envelope.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dt
    }

    /// `sum |S|^2 dw / 2 pi`; equals [`energy`](Self::energy) by Parseval.
    pub fn spectral_energy(&self) -> f64 {
        self.spectrum.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dw() / (2.0 * PI)
    }

    /// Energy of samples with `t >= cutoff`.
    pub fn energy_after(&self, cutoff: f64) -> f64 {
        self.envelope
            .iter()
            .enumerate()
            .filter(|(n, _)| self.time(*n) >= cutoff)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            * self.dt
    }

    /// Energy-weighted mean time; `None` for an empty pulse.
    pub fn centroid(&self) -> Option<f64> {
        let (mut weight, mut moment) = (0.0, 0.0);
        for (n, a) in self.envelope.iter().enumerate() {
            let p = a.norm_sqr();
            weight += p;
            moment += p * self.time(n);
        }
        (weight > 0.0).then(|| moment / weight)
    }

    fn same_grid(&self, other: &PulseRecord) -> bool {
        self.len() == other.len() && self.t_min == other.t_min && self.dt == other.dt
    }
}

/// Signed FFT bin index; the Nyquist bin counts as negative.
fn bin_offset(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Samples `theta(t) - theta(t - T)` with `theta(0) = 1`, i.e. one on `[0, T)`.
pub fn make_rectangular(spec: &PulseSpec, window: &TimeWindow) -> Result<PulseRecord> {
    let PulseSpec {
        duration, carrier, ..
    } = *spec;
    window.validate_for(duration)?;
    let dt = window.step();
    let envelope = (0..window.samples)
        .map(|n| {
            let t = window.t_min + n as f64 * dt;
            if (0.0..duration).contains(&t) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(PulseRecord::from_envelope(window.t_min, dt, carrier, envelope))
}

/// `exp(i (od / 2) chi(delta_bar))`.
pub fn transfer_amplitude<F>(medium: &Medium, chi: F, delta_bar: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    if medium.od == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    (Complex64::i() * (medium.od / 2.0) * chi(delta_bar)).exp()
}

/// Filters the pulse spectrum through the medium.
pub fn propagate<F>(pulse: &PulseRecord, medium: &Medium, chi: F) -> PulseRecord
where
    F: Fn(f64) -> Complex64 + Sync + Send,
{
    if medium.od == 0.0 {
        // t = 1 exactly; skip the FFT round trip so the output is bit-identical.
        return pulse.clone();
    }
    let carrier = pulse.carrier;
    let n = pulse.len();
    let dw = pulse.dw();
    let mut spectrum = pulse.spectrum.clone();
    par::for_each_indexed(&mut spectrum, |k, s| {
        let w = bin_offset(k, n) as f64 * dw;
        *s *= transfer_amplitude(medium, &chi, carrier + w);
    });
    PulseRecord::from_spectrum(pulse.t_min, pulse.dt, carrier, spectrum)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportMetrics {
    /// Output over input energy.
    pub transmission: f64,
    /// Shift of the energy centroid.
    pub delay: f64,
    /// Output energy at `t >= cutoff` over input energy.
    pub stored_fraction: f64,
}

pub fn metrics(input: &PulseRecord, output: &PulseRecord, cutoff: f64) -> Result<TransportMetrics> {
    if !input.same_grid(output) {
        return Err(PulseError::GridMismatch);
    }
    let e_in = input.energy();
    if !(e_in > 0.0) {
        return Err(PulseError::ZeroEnergyInput);
    }
    let e_out = output.energy();
    let delay = match (output.centroid(), input.centroid()) {
        (Some(a), Some(b)) => a - b,
        _ => 0.0,
    };
    Ok(TransportMetrics {
        transmission: e_out / e_in,
        delay,
        stored_fraction: output.energy_after(cutoff) / e_in,
    })
}

/// The part of `output` from `cutoff` on, moved so the cutoff sits at t = 0.
///
/// This is the shape recovered after the stored excitation is read out again.
pub fn retrieval_profile(output: &PulseRecord, cutoff: f64) -> PulseRecord {
    let envelope: Vec<Complex64> = output
        .envelope
        .iter()
        .enumerate()
        .map(|(n, &a)| {
            if output.time(n) >= cutoff {
                a
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    PulseRecord::from_envelope(output.t_min - cutoff, output.dt, output.carrier, envelope)
}
