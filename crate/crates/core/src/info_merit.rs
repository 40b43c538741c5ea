//! Coherent information of the memory channel.
//!
//! `I_e = S(Q') - S(RQ')`. Two protocols are covered: a conditionally
//! verified single photon (asymptotic formula, in bits) and one arm of an
//! EPR pair of squeezed beams passing a pure-loss channel (thermal-state
//! entropies, natively in nats).

use std::f64::consts::{E, LN_2};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("entropies carry different units ({0} vs {1})")]
    UnitMismatch(InfoUnit, InfoUnit),
    #[error("squeezing s = {0} must be >= 1")]
    InvalidSqueezing(f64),
    #[error("mean photon number {0} must be >= 0")]
    NegativePhotonNumber(f64),
    #[error("efficiency eta = {0} out of range")]
    EfficiencyOutOfRange(f64),
    #[error("noise probability mu = {0} must lie in [0, 1)")]
    NoiseOutOfRange(f64),
    #[error("unknown information unit `{0}`")]
    UnknownUnit(String),
}

pub type Result<T> = std::result::Result<T, InfoError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InfoUnit {
    Nats,
    Bits,
}

impl InfoUnit {
    /// Factor taking a value in nats to this unit.
    fn per_nat(self) -> f64 {
        match self {
            InfoUnit::Nats => 1.0,
            InfoUnit::Bits => 1.0 / LN_2,
        }
    }

    /// Converts `value` given in `from` into `self`.
    pub fn convert(self, value: f64, from: InfoUnit) -> f64 {
        if self == from {
            value
        } else {
            value / from.per_nat() * self.per_nat()
        }
    }
}

impl fmt::Display for InfoUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InfoUnit::Nats => "nats",
            InfoUnit::Bits => "bits",
        })
    }
}

impl FromStr for InfoUnit {
    type Err = InfoError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nats" | "nat" => Ok(InfoUnit::Nats),
            "bits" | "bit" => Ok(InfoUnit::Bits),
            other => Err(InfoError::UnknownUnit(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyValue {
    pub value: f64,
    pub unit: InfoUnit,
}

impl EntropyValue {
    pub fn nats(value: f64) -> Self {
        EntropyValue {
            value,
            unit: InfoUnit::Nats,
        }
    }

    pub fn to(self, unit: InfoUnit) -> Self {
        EntropyValue {
            value: unit.convert(self.value, self.unit),
            unit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    /// Total memory efficiency.
    pub eta: f64,
    /// Probability of a spurious thermal photon in the output.
    pub mu: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(InfoError::EfficiencyOutOfRange(eta));
        }
        if !(0.0..1.0).contains(&mu) {
            return Err(InfoError::NoiseOutOfRange(mu));
        }
        Ok(ChannelParams { eta, mu })
    }
}

/// EPR beams from two squeezed modes mixed on a beam splitter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EprSource {
    /// Anti-squeezed quadrature variance enhancement.
    pub squeezing: f64,
}

impl EprSource {
    pub fn new(squeezing: f64) -> Result<Self> {
        mean_photons(squeezing)?;
        Ok(EprSource { squeezing })
    }

    pub fn mean_photons(&self) -> f64 {
        mean_photons(self.squeezing).expect("validated at construction")
    }
}

/// `S(Q') - S(RQ')`.
pub fn coherent_information(s_out: EntropyValue, s_joint: EntropyValue) -> Result<f64> {
    if s_out.unit != s_joint.unit {
        return Err(InfoError::UnitMismatch(s_out.unit, s_joint.unit));
    }
    Ok(s_out.value - s_joint.value)
}

/// Mean photon number per beam, `-1/2 + (s + 1/s) / 4`.
pub fn mean_photons(s: f64) -> Result<f64> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(InfoError::InvalidSqueezing(s));
    }
    // (s + 1/s)/4 - 1/2 = (s - 1)^2 / (4 s), free of cancellation near s = 1.
    Ok((s - 1.0) * (s - 1.0) / (4.0 * s))
}

/// Entropy of a thermal mode, `(n + 1) ln(n + 1) - n ln n`.
pub fn thermal_entropy(n_bar: f64, unit: InfoUnit) -> Result<EntropyValue> {
    if !(n_bar >= 0.0) {
        return Err(InfoError::NegativePhotonNumber(n_bar));
    }
    let nats = if n_bar == 0.0 {
        0.0
    } else if n_bar < 1e-8 {
        n_bar * (1.0 - n_bar.ln()) + 0.5 * n_bar * n_bar
    } else {
        (n_bar + 1.0) * n_bar.ln_1p() - n_bar * n_bar.ln()
    };
    Ok(EntropyValue::nats(nats).to(unit))
}

/// `S(eta n) - S((1 - eta) n)` for one EPR beam sent through a pure-loss channel.
pub fn cv_coherent_info(eta: f64, s: f64, unit: InfoUnit) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(InfoError::EfficiencyOutOfRange(eta));
    }
    let n = mean_photons(s)?;
    let kept = thermal_entropy(eta * n, unit)?;
    // The environment starts in vacuum, so S(RQ') equals the entropy it picked up.
    let lost = thermal_entropy((1.0 - eta) * n, unit)?;
    coherent_information(kept, lost)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinglePhotonInfo {
    pub bits: f64,
    /// False where the small-noise expansion cannot be trusted.
    pub valid: bool,
}

/// Asymptotic coherent information of the verified single-photon protocol,
/// `1 - (3 mu (1 - eta) / 4 eta) log2[4 e eta / (mu (1 - eta))]`, in bits.
///
/// Flagged invalid when `mu > eta / 10` or the correction exceeds 1/2.
pub fn single_photon_coherent_info(params: &ChannelParams) -> Result<SinglePhotonInfo> {
    let ChannelParams { eta, mu } = *params;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(InfoError::EfficiencyOutOfRange(eta));
    }
    if !(0.0..1.0).contains(&mu) {
        return Err(InfoError::NoiseOutOfRange(mu));
    }
    let correction = if mu == 0.0 {
        0.0
    } else {
        let x = mu * (1.0 - eta);
        3.0 * x / (4.0 * eta) * (4.0 * E * eta / x).log2()
    };
    Ok(SinglePhotonInfo {
        bits: 1.0 - correction,
        valid: mu <= eta / 10.0 && correction <= 0.5,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub eta: f64,
    pub s: f64,
    pub value: f64,
}

/// `cv_coherent_info` over every `(eta, s)` pair, `s` outermost.
pub fn coherent_info_curves(etas: &[f64], squeezings: &[f64], unit: InfoUnit) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::with_capacity(etas.len() * squeezings.len());
    for &s in squeezings {
        for &eta in etas {
            out.push(CurvePoint {
                eta,
                s,
                value: cv_coherent_info(eta, s, unit)?,
            });
        }
    }
    Ok(out)
}
