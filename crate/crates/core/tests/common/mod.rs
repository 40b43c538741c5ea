//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num::complex::Complex64;
use raman_memory::dressed_medium::{locate_at_resonances, AtomSystem, ControlField, Model, Response};

fn fact(n: i32) -> f64 {
    assert!(n >= 0);
    (1..=n).map(f64::from).product()
}

/// 3j symbol from the Racah closed form in plain f64. Arguments are doubled.
pub fn three_j(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() || (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    for (j, m) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        if m.abs() > j || (j + m) % 2 != 0 {
            return 0.0;
        }
    }
    // half-sums as integers
    let h = |x: i32| x / 2;
    let delta = fact(h(tj1 + tj2 - tj3)) * fact(h(tj1 - tj2 + tj3)) * fact(h(-tj1 + tj2 + tj3))
        / fact(h(tj1 + tj2 + tj3) + 1);
    let pre = delta
        * fact(h(tj1 + tm1))
        * fact(h(tj1 - tm1))
        * fact(h(tj2 + tm2))
        * fact(h(tj2 - tm2))
        * fact(h(tj3 + tm3))
        * fact(h(tj3 - tm3));
    let kmin = 0.max(h(tj2 - tj3 - tm1)).max(h(tj1 - tj3 + tm2));
    let kmax = h(tj1 + tj2 - tj3).min(h(tj1 - tm1)).min(h(tj2 + tm2));
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let d = fact(k)
            * fact(h(tj3 - tj2 + tm1) + k)
            * fact(h(tj3 - tj1 - tm2) + k)
            * fact(h(tj1 + tj2 - tj3) - k)
            * fact(h(tj1 - tm1) - k)
            * fact(h(tj2 + tm2) - k);
        sum += if k % 2 == 0 { 1.0 } else { -1.0 } / d;
    }
    let phase = if h(tj1 - tj2 - tm3) % 2 == 0 { 1.0 } else { -1.0 };
    phase * pre.sqrt() * sum
}

fn projections(tj: i32) -> impl Iterator<Item = i32> {
    (-tj..=tj).step_by(2)
}

/// 6j symbol as a contraction of four 3j symbols. Arguments are doubled.
pub fn six_j(a: [i32; 6]) -> f64 {
    let [j1, j2, j3, j4, j5, j6] = a;
    let mut sum = 0.0;
    for m1 in projections(j1) {
        for m2 in projections(j2) {
            let m3 = -m1 - m2;
            if m3.abs() > j3 {
                continue;
            }
            for m4 in projections(j4) {
                for m5 in projections(j5) {
                    let m6 = m5 - m1;
                    if m6.abs() > j6 {
                        continue;
                    }
                    let s = (j1 - m1 + j2 - m2 + j3 - m3 + j4 - m4 + j5 - m5 + j6 - m6) / 2;
                    let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                    sum += sign
                        * three_j(j1, j2, j3, -m1, -m2, -m3)
                        * three_j(j1, j5, j6, m1, -m5, m6)
                        * three_j(j4, j2, j6, m4, m2, -m6)
                        * three_j(j4, j5, j3, -m4, m5, m3);
                }
            }
        }
    }
    sum
}

/// Probe susceptibility from the steady-state amplitude equations of the
/// four-level system, solved directly as a 3x3 linear system.
///
/// Amplitudes `(a_n, a_n', a_m')` in the probe frame obey
/// `(delta - H) a = (g_n, g_n', 0)` with the driven-damped `H`, and the
/// polarisation is `g . a`.
pub fn amplitude_chi(atom: &AtomSystem, ctrl: &ControlField, delta: f64) -> Complex64 {
    let z = |re: f64, im: f64| Complex64::new(re, im);
    let half = ctrl.rabi / 2.0;
    let half_prime = ctrl.rabi * atom.control_ratio / 2.0;
    let m = Matrix3::new(
        z(delta, atom.gamma / 2.0),
        z(0.0, 0.0),
        z(-half, 0.0),
        z(0.0, 0.0),
        z(delta - atom.delta_hf, atom.gamma / 2.0),
        z(-half_prime, 0.0),
        z(-half, 0.0),
        z(-half_prime, 0.0),
        z(delta - ctrl.detuning, atom.gamma_0),
    );
    let g = Vector3::new(z(atom.w_n.sqrt(), 0.0), z(atom.w_n_prime.sqrt(), 0.0), z(0.0, 0.0));
    let a = m.lu().solve(&g).expect("non-singular away from real poles");
    -3.0 * PI * atom.gamma * g.dot(&a)
}

/// Principal-value Hilbert transform `(1/pi) P int f(x) / (x - w) dx` of the
/// piecewise-linear interpolant of `(xs, fs)`, evaluated exactly at `w`.
pub fn hilbert_piecewise_linear(xs: &[f64], fs: &[f64], w: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..xs.len() - 1 {
        let (x0, x1) = (xs[k], xs[k + 1]);
        let b = (fs[k + 1] - fs[k]) / (x1 - x0);
        let a = fs[k] + b * (w - x0);
        let (d0, d1) = ((x0 - w).abs(), (x1 - w).abs());
        // At a node the ln 0 pieces of neighbouring segments cancel.
        let log = match (d0 == 0.0, d1 == 0.0) {
            (true, _) => d1.ln(),
            (_, true) => -d0.ln(),
            _ => (d1 / d0).ln(),
        };
        total += a * log + b * (x1 - x0);
    }
    total / PI
}

pub fn relative_l2(a: &[f64], b: &[f64], weights: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).zip(weights).map(|((x, y), w)| w * (x - y).powi(2)).sum();
    let den: f64 = b.iter().zip(weights).map(|(y, w)| w * y * y).sum();
    (num / den).sqrt()
}

/// Thermal-state entropy in nats, written out directly.
pub fn thermal_entropy_nats(n: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        (n + 1.0) * (n + 1.0).ln() - n * n.ln()
    }
}

/// Relative L2 error of the dispersion rebuilt from absorption on a
/// non-uniform grid over +-1e4, after removing the 1/x tail analytically.
pub fn kramers_kronig_error(atom: &AtomSystem, c: &ControlField) -> (f64, usize) {
    let response = Response::new(atom, c, Model::Full).unwrap();
    let weight = atom.w_n + atom.w_n_prime;
    let tail = |x: f64| -3.0 * std::f64::consts::PI * weight / Complex64::new(x, 0.5);

    let mut xs: Vec<f64> = (0..=40_000).map(|i| -1e4 + 0.5 * i as f64).collect();
    for root in locate_at_resonances(atom, c).unwrap() {
        let w = root.width.max(1e-3);
        xs.extend((-500..=500).map(|k| root.position + 0.02 * k as f64));
        xs.extend((-500..=500).map(|k| root.position + w * 0.02 * k as f64));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let residual_im: Vec<f64> = xs.iter().map(|&x| response.chi(x).im - tail(x).im).collect();

    let eval: Vec<f64> = (0..xs.len() - 1).step_by(17).map(|k| 0.5 * (xs[k] + xs[k + 1])).collect();
    let rebuilt = raman_memory::par::map(&eval, |&w| tail(w).re + hilbert_piecewise_linear(&xs, &residual_im, w));
    let exact: Vec<f64> = eval.iter().map(|&w| response.chi(w).re).collect();
    let weights: Vec<f64> = (0..eval.len())
        .map(|i| {
            let lo = eval[i.saturating_sub(1)];
            let hi = eval[(i + 1).min(eval.len() - 1)];
            0.5 * (hi - lo)
        })
        .collect();
    (relative_l2(&rebuilt, &exact, &weights), eval.len())
}
