//! Racah algebra for the hyperfine dipole couplings.
//!
//! Wigner 3j and 6j symbols are evaluated with the Racah sum formulas in exact
//! rational arithmetic and only converted to `f64` at the very end, so the
//! factorial ratios stay exact well beyond the angular momenta of any alkali
//! atom. Dipole weights are normalized per fine-structure line: for a fixed
//! ground sublevel, the weights summed over every excited sublevel and
//! polarization of the line equal one.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngularMomentumError {
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),
    #[error("cannot parse `{0}` as an integer or half-integer")]
    Parse(String),
}

/// An integer or half-integer quantum number, stored as twice its value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const ONE: HalfInt = HalfInt(2);
    pub const HALF: HalfInt = HalfInt(1);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn integer(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// Multiplicity `2j + 1`.
    pub const fn multiplicity(self) -> i32 {
        self.0 + 1
    }

    /// Projections `-j, -j + 1, ..., j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let j = self.0;
        (-j..=j).step_by(2).map(HalfInt)
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = AngularMomentumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || AngularMomentumError::Parse(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((num, den)) => {
                let num: i32 = num.trim().parse().map_err(|_| err())?;
                match den.trim() {
                    "2" => Ok(HalfInt(num)),
                    "1" => Ok(HalfInt(2 * num)),
                    _ => Err(err()),
                }
            }
            None => {
                if let Ok(n) = s.parse::<i32>() {
                    return Ok(HalfInt(2 * n));
                }
                let x: f64 = s.parse().map_err(|_| err())?;
                let twice = 2.0 * x;
                if twice.fract() != 0.0 || twice.abs() > f64::from(i32::MAX) {
                    return Err(err());
                }
                Ok(HalfInt(twice as i32))
            }
        }
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

/// `(j1, j2, j3)` can couple: non-negative, integer perimeter, triangle rule.
pub fn triangle(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
    let (a, b, c) = (j1.0, j2.0, j3.0);
    a >= 0 && b >= 0 && c >= 0 && (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

fn valid_projection(j: HalfInt, m: HalfInt) -> bool {
    j.0 >= 0 && m.0.abs() <= j.0 && (j.0 - m.0) % 2 == 0
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    (2..=n.max(1)).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn ratio_of_factorials(num: &[i32], den: &[i32]) -> BigRational {
    let n = num.iter().fold(BigInt::one(), |acc, &k| acc * factorial(k));
    let d = den.iter().fold(BigInt::one(), |acc, &k| acc * factorial(k));
    BigRational::new(n, d)
}

/// Triangle coefficient `(a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!`, arguments doubled.
fn triangle_coefficient(a: i32, b: i32, c: i32) -> BigRational {
    ratio_of_factorials(
        &[(a + b - c) / 2, (a - b + c) / 2, (-a + b + c) / 2],
        &[(a + b + c) / 2 + 1],
    )
}

/// `sign * sum * sqrt(radicand)` rounded once from the exact square.
fn signed_sqrt_product(sign: i32, sum: &BigRational, radicand: &BigRational) -> f64 {
    if sum.is_zero() || radicand.is_zero() {
        return 0.0;
    }
    let square = sum * sum * radicand;
    let magnitude = square.to_f64().unwrap_or(f64::NAN).sqrt();
    let negative = (sign < 0) ^ sum.is_negative();
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

const fn parity(exponent: i32) -> i32 {
    if exponent.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`. Zero whenever a selection rule fails.
pub fn wigner_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> f64 {
    if !valid_projection(j1, m1) || !valid_projection(j2, m2) || !valid_projection(j3, m3) {
        return 0.0;
    }
    if m1.0 + m2.0 + m3.0 != 0 || !triangle(j1, j2, j3) {
        return 0.0;
    }
    // All combinations below are integers once the selection rules hold.
    let (j1, j2, j3) = (j1.0, j2.0, j3.0);
    let (m1, m2, m3) = (m1.0, m2.0, m3.0);
    let h = |x: i32| x / 2;

    let k_min = 0.max(h(j2 - j3 - m1)).max(h(j1 - j3 + m2));
    let k_max = h(j1 + j2 - j3).min(h(j1 - m1)).min(h(j2 + m2));
    if k_min > k_max {
        return 0.0;
    }
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let term = ratio_of_factorials(
            &[],
            &[
                k,
                h(j3 - j2 + m1) + k,
                h(j3 - j1 - m2) + k,
                h(j1 + j2 - j3) - k,
                h(j1 - m1) - k,
                h(j2 + m2) - k,
            ],
        );
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let radicand = triangle_coefficient(j1, j2, j3)
        * ratio_of_factorials(
            &[
                h(j1 + m1),
                h(j1 - m1),
                h(j2 + m2),
                h(j2 - m2),
                h(j3 + m3),
                h(j3 - m3),
            ],
            &[],
        );
    signed_sqrt_product(parity(h(j1 - j2 - m3)), &sum, &radicand)
}

/// Wigner 6j symbol `{j1 j2 j3; j4 j5 j6}`. Zero when any triad fails.
pub fn wigner_6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> f64 {
    if !triangle(j1, j2, j3)
        || !triangle(j1, j5, j6)
        || !triangle(j4, j2, j6)
        || !triangle(j4, j5, j3)
    {
        return 0.0;
    }
    let h = |x: HalfInt| x.0 / 2;
    let a = [
        h(j1 + j2 + j3),
        h(j1 + j5 + j6),
        h(j4 + j2 + j6),
        h(j4 + j5 + j3),
    ];
    let b = [
        h(j1 + j2 + j4 + j5),
        h(j2 + j3 + j5 + j6),
        h(j3 + j1 + j6 + j4),
    ];
    let t_min = *a.iter().max().unwrap();
    let t_max = *b.iter().min().unwrap();
    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let term = ratio_of_factorials(
            &[t + 1],
            &[
                t - a[0],
                t - a[1],
                t - a[2],
                t - a[3],
                b[0] - t,
                b[1] - t,
                b[2] - t,
            ],
        );
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let radicand = triangle_coefficient(j1.0, j2.0, j3.0)
        * triangle_coefficient(j1.0, j5.0, j6.0)
        * triangle_coefficient(j4.0, j2.0, j6.0)
        * triangle_coefficient(j4.0, j5.0, j3.0);
    signed_sqrt_product(1, &sum, &radicand)
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | j m>`.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> f64 {
    let phase = parity((j1.0 - j2.0 + m.0) / 2);
    f64::from(phase) * f64::from(j.multiplicity()).sqrt() * wigner_3j(j1, j2, j, m1, m2, -m)
}

/// A fine-structure line `J -> J'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FineLine {
    pub j_ground: HalfInt,
    pub j_excited: HalfInt,
}

impl FineLine {
    /// Alkali D1 line, `nS_{1/2} -> nP_{1/2}`.
    pub const D1: FineLine = FineLine {
        j_ground: HalfInt::HALF,
        j_excited: HalfInt::HALF,
    };
    /// Alkali D2 line, `nS_{1/2} -> nP_{3/2}`.
    pub const D2: FineLine = FineLine {
        j_ground: HalfInt::HALF,
        j_excited: HalfInt::from_twice(3),
    };
}

/// Hyperfine sublevel `|F, M>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sublevel {
    pub f: HalfInt,
    pub m: HalfInt,
}

impl Sublevel {
    pub const fn new(f: HalfInt, m: HalfInt) -> Self {
        Sublevel { f, m }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionWeight {
    pub ground: Sublevel,
    pub excited: Sublevel,
    /// Spherical polarization component, -1, 0 or +1.
    pub q: i32,
    /// Relative strength in `[0, 1]`.
    pub weight: f64,
}

fn check_sublevel(j: HalfInt, i: HalfInt, level: Sublevel, what: &str) -> Result<(), AngularMomentumError> {
    if !triangle(j, i, level.f) {
        return Err(AngularMomentumError::InvalidQuantumNumbers(format!(
            "{what} F = {} cannot be built from J = {j} and I = {i}",
            level.f
        )));
    }
    if !valid_projection(level.f, level.m) {
        return Err(AngularMomentumError::InvalidQuantumNumbers(format!(
            "{what} M = {} is not a projection of F = {}",
            level.m, level.f
        )));
    }
    Ok(())
}

/// Signed reduced dipole amplitude `<F' M'| d_q |F M>`, normalized so that
/// its square summed over the whole line is one for every ground sublevel.
///
/// The sign carries the relative phase of different excited hyperfine
/// levels, which decides whether Raman paths through them interfere
/// constructively or destructively.
pub fn dipole_amplitude(
    line: FineLine,
    nuclear_spin: HalfInt,
    ground: Sublevel,
    excited: Sublevel,
    q: i32,
) -> Result<f64, AngularMomentumError> {
    if !(-1..=1).contains(&q) {
        return Err(AngularMomentumError::InvalidQuantumNumbers(format!(
            "polarization q = {q} is not in {{-1, 0, 1}}"
        )));
    }
    check_sublevel(line.j_ground, nuclear_spin, ground, "ground")?;
    check_sublevel(line.j_excited, nuclear_spin, excited, "excited")?;
    if excited.m.0 != ground.m.0 + 2 * q {
        return Ok(0.0);
    }
    let (j, jp, i) = (line.j_ground, line.j_excited, nuclear_spin);
    let (f, fp) = (ground.f, excited.f);
    let three_j = wigner_3j(fp, HalfInt::ONE, f, -excited.m, HalfInt::integer(q), ground.m);
    let six_j = wigner_6j(jp, fp, i, f, j, HalfInt::ONE);
    let phase = parity((fp.0 - excited.m.0) / 2 + (f.0 + jp.0 + 2 + i.0) / 2);
    let scale = f64::from(j.multiplicity() * f.multiplicity() * fp.multiplicity()).sqrt();
    Ok(f64::from(phase) * scale * three_j * six_j)
}

/// Relative strength of `|F M> -> |F' M'>` driven by polarization `q`.
pub fn transition_weight(
    line: FineLine,
    nuclear_spin: HalfInt,
    ground: Sublevel,
    excited: Sublevel,
    q: i32,
) -> Result<TransitionWeight, AngularMomentumError> {
    let amplitude = dipole_amplitude(line, nuclear_spin, ground, excited, q)?;
    Ok(TransitionWeight {
        ground,
        excited,
        q,
        weight: amplitude * amplitude,
    })
}

/// Hyperfine levels `|J - I|, ..., J + I`.
pub fn hyperfine_levels(j: HalfInt, nuclear_spin: HalfInt) -> impl Iterator<Item = HalfInt> {
    let lo = (j.0 - nuclear_spin.0).abs();
    let hi = j.0 + nuclear_spin.0;
    (lo..=hi).step_by(2).map(HalfInt)
}

/// Sum of all weights out of one ground sublevel. Equal to one for valid input.
pub fn line_strength_sum(
    line: FineLine,
    nuclear_spin: HalfInt,
    ground: Sublevel,
) -> Result<f64, AngularMomentumError> {
    let mut total = 0.0;
    for fp in hyperfine_levels(line.j_excited, nuclear_spin) {
        for mp in fp.projections() {
            for q in -1..=1 {
                total += transition_weight(line, nuclear_spin, ground, Sublevel::new(fp, mp), q)?.weight;
            }
        }
    }
    Ok(total)
}
