//! Carrier-frequency search for the transparency/delay compromise.
//!
//! A dense scan of the carrier detuning is followed by golden-section
//! refinement inside the bracket around the best scan point. Scan points are
//! evaluated in parallel; the reduction runs sequentially in scan order, so
//! results are bit-identical between runs and between the parallel and
//! sequential builds.

use thiserror::Error;

use crate::dressed_medium::{
    locate_at_resonances, raman_resonance, AtomSystem, ControlField, DressedMediumError, Model,
    Response,
};
use crate::par;
use crate::pulse_transport::{
    make_rectangular, metrics, propagate, Medium, PulseError, PulseRecord, PulseSpec, TimeWindow,
    TransportMetrics,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TuneError {
    #[error("carrier range [{min}, {max}] does not contain the Raman resonance at {resonance}")]
    RangeMissesResonance { min: f64, max: f64, resonance: f64 },
    #[error("objective vanishes over the whole scan")]
    ObjectiveAllZero,
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error(transparent)]
    Medium(#[from] DressedMediumError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
}

pub type Result<T> = std::result::Result<T, TuneError>;

pub const MIN_SCAN_POINTS: usize = 16;
/// Golden-section stopping width, in units of gamma.
pub const CARRIER_TOLERANCE: f64 = 1e-3;
/// Objective values at or below this count as zero.
const OBJECTIVE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TuneObjective {
    /// Largest output energy after the pulse's back edge.
    MaxStoredFraction,
    /// Largest delay among carriers transmitting at least `min_transmission`.
    MaxDelaySubjectTo { min_transmission: f64 },
}

impl TuneObjective {
    fn validate(&self) -> Result<()> {
        if let TuneObjective::MaxDelaySubjectTo { min_transmission } = *self {
            if !(0.0..=1.0).contains(&min_transmission) {
                return Err(TuneError::InvalidScan(format!(
                    "min_transmission = {min_transmission} must lie in [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Objective value; `-inf` where a constraint fails.
    pub fn value(&self, m: &TransportMetrics) -> f64 {
        match *self {
            TuneObjective::MaxStoredFraction => m.stored_fraction,
            TuneObjective::MaxDelaySubjectTo { min_transmission } => {
                if m.transmission >= min_transmission {
                    m.delay
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarrierRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl CarrierRange {
    pub fn carriers(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..self.points)
            .map(|i| self.min + (self.max - self.min) * (i as f64 / n as f64))
            .collect()
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneResult {
    pub best_carrier: f64,
    pub metrics: TransportMetrics,
    pub objective: f64,
    /// Raman resonance position the range was checked against.
    pub resonance: f64,
    pub scan_trace: Vec<(f64, TransportMetrics)>,
}

/// Everything needed to evaluate one carrier; the input envelope is shared.
pub struct CarrierProblem {
    response: Response,
    medium: Medium,
    duration: f64,
    input: PulseRecord,
}

impl CarrierProblem {
    pub fn new(
        atom: &AtomSystem,
        ctrl: &ControlField,
        medium: &Medium,
        duration: f64,
        window: &TimeWindow,
    ) -> Result<Self> {
        let response = Response::new(atom, ctrl, Model::Full)?;
        let medium = Medium::new(medium.od)?;
        let input = make_rectangular(&PulseSpec::rectangular(duration, 0.0)?, window)?;
        Ok(CarrierProblem {
            response,
            medium,
            duration,
            input,
        })
    }

    pub fn with_model(mut self, model: Model, atom: &AtomSystem, ctrl: &ControlField) -> Result<Self> {
        self.response = Response::new(atom, ctrl, model)?;
        Ok(self)
    }

    /// Input and output records for a rectangular pulse at `carrier`.
    pub fn pulses(&self, carrier: f64) -> (PulseRecord, PulseRecord) {
        let input = self.input.with_carrier(carrier);
        let response = self.response;
        let output = propagate(&input, &self.medium, move |x| response.chi(x));
        (input, output)
    }

    pub fn evaluate(&self, carrier: f64) -> TransportMetrics {
        let (input, output) = self.pulses(carrier);
        metrics(&input, &output, self.duration).expect("rectangular input has energy on a shared grid")
    }

    /// Metrics at every carrier, in order.
    pub fn sweep(&self, carriers: &[f64]) -> Vec<TransportMetrics> {
        par::map(carriers, |&c| self.evaluate(c))
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes `f` on `[lo, hi]` until the bracket is narrower than `tol`.
/// Returns the best point seen and its value.
pub fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scan the carrier over `range`, then refine around the best point.
pub fn scan(
    atom: &AtomSystem,
    ctrl: &ControlField,
    medium: &Medium,
    duration: f64,
    window: &TimeWindow,
    range: &CarrierRange,
    objective: TuneObjective,
) -> Result<TuneResult> {
    objective.validate()?;
    if range.points < MIN_SCAN_POINTS {
        return Err(TuneError::InvalidScan(format!(
            "need at least {MIN_SCAN_POINTS} scan points, got {}",
            range.points
        )));
    }
    if !(range.min.is_finite() && range.max.is_finite() && range.max > range.min) {
        return Err(TuneError::InvalidScan(format!(
            "carrier range [{}, {}] must be finite and increasing",
            range.min, range.max
        )));
    }
    let resonance = raman_resonance(&locate_at_resonances(atom, ctrl)?, ctrl).position;
    let inside = |x: f64| (range.min..=range.max).contains(&x);
    if !inside(resonance) && !inside(ctrl.detuning) {
        return Err(TuneError::RangeMissesResonance {
            min: range.min,
            max: range.max,
            resonance,
        });
    }
    let problem = CarrierProblem::new(atom, ctrl, medium, duration, window)?;
    refine_scan(&problem, range, objective, resonance)
}

/// Scan + refinement on a prepared problem. `resonance` only breaks ties.
pub fn refine_scan(
    problem: &CarrierProblem,
    range: &CarrierRange,
    objective: TuneObjective,
    resonance: f64,
) -> Result<TuneResult> {
    let carriers = range.carriers();
    let trace = problem.sweep(&carriers);
    let values: Vec<f64> = trace.iter().map(|m| objective.value(m)).collect();

    let mut best = 0;
    for i in 1..values.len() {
        let closer = (carriers[i] - resonance).abs() < (carriers[best] - resonance).abs();
        if values[i] > values[best] || (values[i] == values[best] && closer) {
            best = i;
        }
    }
    let all_zero = match objective {
        TuneObjective::MaxStoredFraction => values[best] <= OBJECTIVE_FLOOR,
        TuneObjective::MaxDelaySubjectTo { .. } => !values[best].is_finite() || values[best] <= OBJECTIVE_FLOOR,
    };
    if all_zero {
        return Err(TuneError::ObjectiveAllZero);
    }

    let lo = carriers[best.saturating_sub(1)];
    let hi = carriers[(best + 1).min(carriers.len() - 1)];
    let (x, fx) = golden_section_max(|c| objective.value(&problem.evaluate(c)), lo, hi, CARRIER_TOLERANCE);

    let (best_carrier, value, best_metrics) = if fx > values[best] {
        (x, fx, problem.evaluate(x))
    } else {
        (carriers[best], values[best], trace[best])
    };
    Ok(TuneResult {
        best_carrier,
        metrics: best_metrics,
        objective: value,
        resonance,
        scan_trace: carriers.into_iter().zip(trace).collect(),
    })
}

/// Nested scan over a short list of pulse durations; the window follows each
/// duration's default. Returns the best duration and its result.
#[allow(clippy::too_many_arguments)]
pub fn scan_durations(
    atom: &AtomSystem,
    ctrl: &ControlField,
    medium: &Medium,
    durations: &[f64],
    samples: usize,
    range: &CarrierRange,
    objective: TuneObjective,
) -> Result<(f64, TuneResult)> {
    let mut best: Option<(f64, TuneResult)> = None;
    for &t in durations {
        let mut window = TimeWindow::default_for(t);
        window.samples = samples;
        let r = scan(atom, ctrl, medium, t, &window, range, objective)?;
        if best.as_ref().is_none_or(|(_, b)| r.objective > b.objective) {
            best = Some((t, r));
        }
    }
    best.ok_or_else(|| TuneError::InvalidScan("empty duration list".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-6);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(fx <= 0.0 && fx > -1e-12);
    }

    fn small_window() -> TimeWindow {
        TimeWindow {
            t_min: -20.0,
            t_max: 180.0,
            samples: 1 << 14,
        }
    }

    #[test]
    fn zero_od_has_nothing_to_store() {
        let atom = AtomSystem::cesium_d1();
        let ctrl = ControlField::new(15.0, 50.0).unwrap();
        let range = CarrierRange {
            min: 45.0,
            max: 53.0,
            points: 16,
        };
        let r = scan(
            &atom,
            &ctrl,
            &Medium::new(0.0).unwrap(),
            10.0,
            &small_window(),
            &range,
            TuneObjective::MaxStoredFraction,
        );
        assert_eq!(r, Err(TuneError::ObjectiveAllZero));
    }

    #[test]
    fn range_must_straddle_resonance() {
        let atom = AtomSystem::cesium_d1();
        let ctrl = ControlField::new(15.0, 50.0).unwrap();
        let range = CarrierRange {
            min: 60.0,
            max: 70.0,
            points: 16,
        };
        let r = scan(
            &atom,
            &ctrl,
            &Medium::new(50.0).unwrap(),
            10.0,
            &small_window(),
            &range,
            TuneObjective::MaxStoredFraction,
        );
        assert!(matches!(r, Err(TuneError::RangeMissesResonance { .. })));
        let few = CarrierRange { points: 8, ..range };
        assert!(matches!(
            scan(&atom, &ctrl, &Medium::new(50.0).unwrap(), 10.0, &small_window(), &few, TuneObjective::MaxStoredFraction),
            Err(TuneError::InvalidScan(_))
        ));
    }

    #[test]
    fn infeasible_threshold_is_rejected() {
        let bad = TuneObjective::MaxDelaySubjectTo {
            min_transmission: 1.5,
        };
        assert!(bad.validate().is_err());
        let m = TransportMetrics {
            transmission: 0.4,
            delay: 3.0,
            stored_fraction: 0.1,
        };
        let obj = TuneObjective::MaxDelaySubjectTo {
            min_transmission: 0.5,
        };
        assert_eq!(obj.value(&m), f64::NEG_INFINITY);
    }
}
