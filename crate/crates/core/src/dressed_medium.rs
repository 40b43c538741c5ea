//! Linear probe response of an atomic ensemble dressed by a control field.
//!
//! Level scheme (all atoms start in `|m>`):
//!
//! ```text
//!            |n'>  ---------  +delta_hf
//!            |n>   ---------  0
//!
//!   probe (sigma-)  /      \  control (sigma+)
//!                 |m>     |m'>
//! ```
//!
//! Frequencies are in units of the excited-state decay rate `gamma`, times in
//! `1/gamma`. The probe detuning `delta_bar` is measured from `|m> -> |n>`,
//! the control detuning `detuning` from `|m'> -> |n>`, and the two-photon
//! detuning is `delta_bar - detuning`.
//!
//! The susceptibility is scaled by `n0 (lambda / 2 pi)^3` and calibrated so a
//! closed two-level resonance gives `Im chi = 6 pi` at line centre; the
//! intensity transmission `exp(-od * Im chi)` then equals `exp(-n0 sigma0 L)`
//! with `sigma0 = 3 lambda^2 / 2 pi`.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num::complex::Complex64;
use thiserror::Error;

use crate::angular_momentum::{
    dipole_amplitude, AngularMomentumError, FineLine, HalfInt, Sublevel,
};
use crate::par;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DressedMediumError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    AngularMomentum(#[from] AngularMomentumError),
    #[error("resonance eigensolve did not converge")]
    EigenSolve,
}

pub type Result<T> = std::result::Result<T, DressedMediumError>;

fn invalid(msg: impl Into<String>) -> DressedMediumError {
    DressedMediumError::InvalidParameters(msg.into())
}

/// Default ground-coherence decay; keeps the Raman pole off the real axis.
pub const DEFAULT_GAMMA_0: f64 = 1e-6;

/// Cesium D1 excited-state hyperfine splitting in units of `gamma`.
pub const CESIUM_D1_SPLITTING: f64 = 256.0;

/// The four states of the probe/control scheme, identified by sublevel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelScheme {
    pub line: FineLine,
    pub nuclear_spin: HalfInt,
    /// Populated ground sublevel `|m>`.
    pub populated: Sublevel,
    /// Storage ground sublevel `|m'>`.
    pub storage: Sublevel,
}

/// Relative probe and control coupling strengths derived from a [`LevelScheme`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Couplings {
    pub w_n: f64,
    pub w_n_prime: f64,
    /// `Omega_{n'} / Omega_n`, signed relative to the probe amplitudes.
    pub control_ratio: f64,
}

impl LevelScheme {
    /// D1 line with `|m> = |I + 1/2, I + 1/2>` and `|m'> = |I - 1/2, I - 3/2>`.
    ///
    /// The sigma- probe and sigma+ control then share the excited projection
    /// `M' = I - 1/2` in both excited hyperfine levels.
    pub fn d1_default(nuclear_spin: HalfInt) -> Result<Self> {
        if nuclear_spin.twice() < 1 {
            return Err(invalid(format!(
                "nuclear spin I = {nuclear_spin} must be at least 1/2"
            )));
        }
        let f_upper = nuclear_spin + HalfInt::HALF;
        let f_lower = nuclear_spin - HalfInt::HALF;
        let storage_m = f_upper - HalfInt::integer(2);
        if storage_m.abs() > f_lower {
            return Err(invalid(format!(
                "I = {nuclear_spin} has no storage sublevel M = {storage_m} in F = {f_lower}"
            )));
        }
        Ok(LevelScheme {
            line: FineLine::D1,
            nuclear_spin,
            populated: Sublevel::new(f_upper, f_upper),
            storage: Sublevel::new(f_lower, storage_m),
        })
    }

    /// Excited sublevels `|n>` (lower hyperfine level) and `|n'>` (upper).
    pub fn excited_states(&self) -> (Sublevel, Sublevel) {
        let m_excited = self.populated.m - HalfInt::ONE;
        let f_lo = (self.line.j_excited - self.nuclear_spin).abs();
        let f_hi = self.line.j_excited + self.nuclear_spin;
        (Sublevel::new(f_lo, m_excited), Sublevel::new(f_hi, m_excited))
    }

    /// Dipole couplings: probe with q = -1 out of `|m>`, control with q = +1
    /// out of `|m'>`.
    pub fn couplings(&self) -> Result<Couplings> {
        let (n, n_prime) = self.excited_states();
        let (line, i) = (self.line, self.nuclear_spin);
        if self.storage.m + HalfInt::ONE != n.m {
            return Err(invalid(format!(
                "storage M = {} is not connected to M' = {} by sigma+",
                self.storage.m, n.m
            )));
        }
        let probe_n = dipole_amplitude(line, i, self.populated, n, -1)?;
        let probe_np = dipole_amplitude(line, i, self.populated, n_prime, -1)?;
        let control_n = dipole_amplitude(line, i, self.storage, n, 1)?;
        let control_np = dipole_amplitude(line, i, self.storage, n_prime, 1)?;
        if control_n == 0.0 {
            return Err(invalid(
                "control transition |m'> -> |n> is dipole forbidden; Omega_c is undefined",
            ));
        }
        // The response depends only on the sign of probe_n * probe_np * control_n * control_np;
        // fold it into the control ratio so the probe amplitudes stay non-negative.
        let mut ratio = control_np / control_n;
        if probe_n * probe_np < 0.0 {
            ratio = -ratio;
        }
        Ok(Couplings {
            w_n: probe_n * probe_n,
            w_n_prime: probe_np * probe_np,
            control_ratio: ratio,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomSystem {
    /// Excited-state decay rate; the frequency unit, normally 1.
    pub gamma: f64,
    /// Position of `|n'>` above `|n>`.
    pub delta_hf: f64,
    /// Ground-coherence decay rate.
    pub gamma_0: f64,
    pub w_n: f64,
    pub w_n_prime: f64,
    pub control_ratio: f64,
}

impl AtomSystem {
    pub fn new(delta_hf: f64, gamma_0: f64, couplings: Couplings) -> Result<Self> {
        let atom = AtomSystem {
            gamma: 1.0,
            delta_hf,
            gamma_0,
            w_n: couplings.w_n,
            w_n_prime: couplings.w_n_prime,
            control_ratio: couplings.control_ratio,
        };
        atom.validate()?;
        Ok(atom)
    }

    pub fn from_scheme(scheme: &LevelScheme, delta_hf: f64, gamma_0: f64) -> Result<Self> {
        Self::new(delta_hf, gamma_0, scheme.couplings()?)
    }

    /// Cesium-133 D1 line with the default level scheme.
    pub fn cesium_d1() -> Self {
        let scheme = LevelScheme::d1_default(HalfInt::from_twice(7)).expect("valid Cs scheme");
        Self::from_scheme(&scheme, CESIUM_D1_SPLITTING, DEFAULT_GAMMA_0).expect("valid Cs atom")
    }

    /// The same atom with `|n'>` removed: single excited level.
    pub fn lambda_reduction(&self) -> Self {
        AtomSystem {
            w_n_prime: 0.0,
            control_ratio: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.gamma,
            self.delta_hf,
            self.gamma_0,
            self.w_n,
            self.w_n_prime,
            self.control_ratio,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(invalid("atom parameters must be finite"));
        }
        if self.gamma <= 0.0 {
            return Err(invalid(format!("gamma = {} must be positive", self.gamma)));
        }
        if self.delta_hf <= 0.0 {
            return Err(invalid(format!("delta_hf = {} must be positive", self.delta_hf)));
        }
        if self.gamma_0 < 0.0 {
            return Err(invalid(format!("gamma_0 = {} must be non-negative", self.gamma_0)));
        }
        for (name, w) in [("w_n", self.w_n), ("w_n_prime", self.w_n_prime)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(invalid(format!("{name} = {w} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlField {
    /// Rabi frequency on `|m'> -> |n>`.
    pub rabi: f64,
    /// Detuning from `|m'> -> |n>`.
    pub detuning: f64,
}

impl ControlField {
    pub fn new(rabi: f64, detuning: f64) -> Result<Self> {
        let ctrl = ControlField { rabi, detuning };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn off() -> Self {
        ControlField {
            rabi: 0.0,
            detuning: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rabi.is_finite() || !self.detuning.is_finite() {
            return Err(invalid("control parameters must be finite"));
        }
        if self.rabi < 0.0 {
            return Err(invalid(format!("rabi = {} must be non-negative", self.rabi)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    /// Both excited hyperfine levels coupled by the control field.
    Full,
    /// Single excited level `|n>`.
    Lambda,
    /// Control field switched off.
    Bare,
}

impl std::str::FromStr for Model {
    type Err = DressedMediumError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(Model::Full),
            "lambda" => Ok(Model::Lambda),
            "bare" => Ok(Model::Bare),
            other => Err(invalid(format!("unknown model `{other}`"))),
        }
    }
}

/// Validated atom + control pair; evaluates `chi(delta_bar)` without further checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Response {
    atom: AtomSystem,
    ctrl: ControlField,
    model: Model,
}

impl Response {
    pub fn new(atom: &AtomSystem, ctrl: &ControlField, model: Model) -> Result<Self> {
        atom.validate()?;
        ctrl.validate()?;
        let (atom, ctrl) = match model {
            Model::Full => (*atom, *ctrl),
            Model::Lambda => (atom.lambda_reduction(), *ctrl),
            Model::Bare => (*atom, ControlField::off()),
        };
        Ok(Response { atom, ctrl, model })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn chi(&self, delta_bar: f64) -> Complex64 {
        match self.model {
            Model::Lambda => lambda_chi(&self.atom, &self.ctrl, delta_bar),
            Model::Full | Model::Bare => full_chi(&self.atom, &self.ctrl, delta_bar),
        }
    }
}

// chi = -3 pi gamma v^T K^{-1} v with the 2x2 excited block
//   K = diag(alpha, beta) - Omega Omega^T / (4 D),  D = delta + i gamma_0,
// cleared of the 1/D poles:
//   chi = -3 pi gamma [4D(v1^2 beta + v2^2 alpha) - (v1 q - v2 p)^2]
//                     / [4D alpha beta - (alpha q^2 + beta p^2)]
fn full_chi(atom: &AtomSystem, ctrl: &ControlField, delta_bar: f64) -> Complex64 {
    let half_width = Complex64::new(0.0, atom.gamma / 2.0);
    let alpha = delta_bar + half_width;
    let beta = delta_bar - atom.delta_hf + half_width;
    if ctrl.rabi == 0.0 {
        // |m'> decouples; avoids 0/0 at D = 0 when gamma_0 = 0.
        return -3.0 * PI * atom.gamma * (atom.w_n / alpha + atom.w_n_prime / beta);
    }
    let d = Complex64::new(delta_bar - ctrl.detuning, atom.gamma_0);
    let p = ctrl.rabi;
    let q = atom.control_ratio * ctrl.rabi;
    let v1 = atom.w_n.sqrt();
    let v2 = atom.w_n_prime.sqrt();
    let cross = v1 * q - v2 * p;
    let num = 4.0 * d * (atom.w_n * beta + atom.w_n_prime * alpha) - cross * cross;
    let den = 4.0 * d * alpha * beta - (alpha * q * q + beta * p * p);
    -3.0 * PI * atom.gamma * num / den
}

fn lambda_chi(atom: &AtomSystem, ctrl: &ControlField, delta_bar: f64) -> Complex64 {
    let alpha = Complex64::new(delta_bar, atom.gamma / 2.0);
    if ctrl.rabi == 0.0 {
        return -3.0 * PI * atom.gamma * atom.w_n / alpha;
    }
    let d = Complex64::new(delta_bar - ctrl.detuning, atom.gamma_0);
    let omega2 = ctrl.rabi * ctrl.rabi;
    -3.0 * PI * atom.gamma * atom.w_n * d / (alpha * d - omega2 / 4.0)
}

/// Susceptibility with both excited hyperfine levels.
pub fn susceptibility_full(atom: &AtomSystem, ctrl: &ControlField, delta_bar: f64) -> Result<Complex64> {
    Ok(Response::new(atom, ctrl, Model::Full)?.chi(delta_bar))
}

/// Susceptibility of the single-excited-level reduction.
pub fn susceptibility_lambda(atom: &AtomSystem, ctrl: &ControlField, delta_bar: f64) -> Result<Complex64> {
    Ok(Response::new(atom, ctrl, Model::Lambda)?.chi(delta_bar))
}

/// Uniform probe-detuning grid, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetuningGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl DetuningGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let grid = DetuningGrid { min, max, points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {}", self.points)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max > self.min) {
            return Err(invalid(format!(
                "grid range [{}, {}] must be finite and increasing",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * (i as f64 / n as f64)
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SusceptibilitySpectrum {
    pub model: Model,
    pub grid: DetuningGrid,
    pub detunings: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SusceptibilitySpectrum {
    /// Indices of strict local maxima of `Im chi`.
    pub fn absorption_peaks(&self) -> Vec<usize> {
        let im: Vec<f64> = self.values.iter().map(|c| c.im).collect();
        (1..im.len().saturating_sub(1))
            .filter(|&i| im[i] > im[i - 1] && im[i] >= im[i + 1])
            .collect()
    }
}

/// Evaluate `model` on every point of `grid`.
pub fn spectrum(
    atom: &AtomSystem,
    ctrl: &ControlField,
    grid: &DetuningGrid,
    model: Model,
) -> Result<SusceptibilitySpectrum> {
    grid.validate()?;
    let response = Response::new(atom, ctrl, model)?;
    let detunings = grid.values();
    let values = par::map(&detunings, |&x| response.chi(x));
    Ok(SusceptibilitySpectrum {
        model,
        grid: *grid,
        detunings,
        values,
    })
}

/// A quasi-energy (Autler-Townes) resonance of the dressed atom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtResonance {
    pub index: usize,
    pub position: f64,
    pub width: f64,
}

/// Effective non-Hermitian Hamiltonian of `{|n>, |n'>, |m'>}` in the probe frame.
pub fn dressed_hamiltonian(atom: &AtomSystem, ctrl: &ControlField) -> Matrix3<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let half = ctrl.rabi / 2.0;
    let half_prime = atom.control_ratio * ctrl.rabi / 2.0;
    Matrix3::new(
        c(0.0, -atom.gamma / 2.0),
        c(0.0, 0.0),
        c(half, 0.0),
        c(0.0, 0.0),
        c(atom.delta_hf, -atom.gamma / 2.0),
        c(half_prime, 0.0),
        c(half, 0.0),
        c(half_prime, 0.0),
        c(ctrl.detuning, -atom.gamma_0),
    )
}

/// The three complex poles of the full susceptibility, sorted by position.
pub fn locate_at_resonances(atom: &AtomSystem, ctrl: &ControlField) -> Result<[AtResonance; 3]> {
    atom.validate()?;
    ctrl.validate()?;
    let h = dressed_hamiltonian(atom, ctrl);
    let eig = nalgebra::linalg::Schur::try_new(h, f64::EPSILON, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or(DressedMediumError::EigenSolve)?;
    let mut roots = [eig[0], eig[1], eig[2]];
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut out = [AtResonance {
        index: 0,
        position: 0.0,
        width: 0.0,
    }; 3];
    for (i, z) in roots.iter().enumerate() {
        out[i] = AtResonance {
            index: i,
            position: z.re,
            width: -2.0 * z.im,
        };
    }
    Ok(out)
}

/// The resonance closest to the control frequency, which carries the Raman
/// (two-photon) response used for delay and storage.
pub fn raman_resonance(resonances: &[AtResonance; 3], ctrl: &ControlField) -> AtResonance {
    *resonances
        .iter()
        .min_by(|a, b| {
            (a.position - ctrl.detuning)
                .abs()
                .total_cmp(&(b.position - ctrl.detuning).abs())
        })
        .expect("three resonances")
}
