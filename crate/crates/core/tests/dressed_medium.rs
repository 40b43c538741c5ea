mod common;

use proptest::prelude::*;
use raman_memory::angular_momentum::HalfInt;
use raman_memory::dressed_medium::{
    locate_at_resonances, raman_resonance, spectrum, susceptibility_full, susceptibility_lambda, AtomSystem,
    ControlField, Couplings, DetuningGrid, LevelScheme, Model, Response,
};
use raman_memory::par;

fn cs() -> AtomSystem {
    AtomSystem::cesium_d1()
}

fn ctrl(detuning: f64) -> ControlField {
    ControlField::new(15.0, detuning).unwrap()
}

fn rel(a: num::complex::Complex64, b: num::complex::Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn closed_form_matches_amplitude_solver() {
    let rb87 = AtomSystem::from_scheme(&LevelScheme::d1_default(HalfInt::from_twice(3)).unwrap(), 97.0, 1e-6).unwrap();
    for atom in [cs(), rb87] {
        for det in [50.0, -50.0, 0.0, 300.0] {
            let c = ctrl(det);
            for i in 0..=4000 {
                let x = -200.0 + 0.125 * i as f64;
                let lib = susceptibility_full(&atom, &c, x).unwrap();
                let oracle = common::amplitude_chi(&atom, &c, x);
                assert!(rel(lib, oracle) < 1e-10, "det {det} x {x}: {lib} vs {oracle}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_matches_oracle_random(
        delta_hf in 1.0..1000.0f64,
        gamma_0 in 1e-6..0.5f64,
        w_n in 0.0..1.0f64,
        w_np in 0.0..1.0f64,
        r in -5.0..5.0f64,
        rabi in 0.0..60.0f64,
        det in -300.0..300.0f64,
        x in -400.0..400.0f64,
    ) {
        let atom = AtomSystem::new(delta_hf, gamma_0, Couplings { w_n, w_n_prime: w_np, control_ratio: r }).unwrap();
        let c = ControlField::new(rabi, det).unwrap();
        let lib = susceptibility_full(&atom, &c, x).unwrap();
        let oracle = common::amplitude_chi(&atom, &c, x);
        prop_assert!((lib - oracle).norm() <= 1e-9 * (1.0 + oracle.norm()), "{lib} vs {oracle}");
    }

    #[test]
    fn passive_everywhere(
        delta_hf in 1.0..1000.0f64,
        gamma_0 in 1e-6..1.0f64,
        w_n in 0.0..1.0f64,
        w_np in 0.0..1.0f64,
        r in -5.0..5.0f64,
        rabi in 0.0..60.0f64,
        det in -300.0..300.0f64,
    ) {
        let atom = AtomSystem::new(delta_hf, gamma_0, Couplings { w_n, w_n_prime: w_np, control_ratio: r }).unwrap();
        let c = ControlField::new(rabi, det).unwrap();
        let roots = locate_at_resonances(&atom, &c).unwrap();
        let full = Response::new(&atom, &c, Model::Full).unwrap();
        let lambda = Response::new(&atom, &c, Model::Lambda).unwrap();
        let mut xs: Vec<f64> = (0..400).map(|i| -500.0 + 1500.0 * i as f64 / 399.0).collect();
        for root in roots {
            xs.extend((-20..=20).map(|k| root.position + 0.05 * k as f64 * root.width.max(1e-3)));
        }
        for x in xs {
            prop_assert!(full.chi(x).im >= -1e-9, "full x={x}: {}", full.chi(x));
            prop_assert!(lambda.chi(x).im >= -1e-9, "lambda x={x}: {}", lambda.chi(x));
        }
    }
}

#[test]
fn lambda_identity_on_dense_grid() {
    let atom = AtomSystem::new(256.0, 1e-6, Couplings { w_n: 7.0 / 12.0, w_n_prime: 0.0, control_ratio: 0.0 }).unwrap();
    for det in [50.0, -50.0, 0.0] {
        let c = ctrl(det);
        for i in 0..10_000 {
            let x = -500.0 + 1000.0 * i as f64 / 9999.0;
            let f = susceptibility_full(&atom, &c, x).unwrap();
            let l = susceptibility_lambda(&atom, &c, x).unwrap();
            assert!((f - l).norm() <= 1e-12 * (1.0 + l.norm()), "x {x}: {f} vs {l}");
        }
    }
}

/// max |full - lambda| / max |lambda| over |x| <= 1000 on a grid fine enough
/// to resolve the Raman line.
fn decoupling_gap(delta_hf: f64, c: &ControlField) -> f64 {
    let atom = AtomSystem { delta_hf, ..cs() };
    let full = Response::new(&atom, c, Model::Full).unwrap();
    let lambda = Response::new(&atom, c, Model::Lambda).unwrap();
    let xs: Vec<f64> = (0..400_001).map(|i| -1000.0 + 0.005 * i as f64).collect();
    let pairs = par::map(&xs, |&x| ((full.chi(x) - lambda.chi(x)).norm(), lambda.chi(x).norm()));
    let dmax = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let cmax = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    dmax / cmax
}

#[test]
fn upper_level_decouples_as_inverse_splitting() {
    // The residual is the light shift of |m'> through |n'>, so it falls as 1/delta_hf.
    for det in [50.0, 0.0] {
        let c = ctrl(det);
        let gaps: Vec<f64> = [1e6, 1e7, 1e8].iter().map(|&hf| decoupling_gap(hf, &c) * hf).collect();
        for g in &gaps[1..] {
            assert!((g / gaps[0] - 1.0).abs() < 0.01, "det {det}: {gaps:?}");
        }
    }
}

#[test]
fn bare_model_is_two_lorentzians() {
    let atom = cs();
    let bare = Response::new(&atom, &ctrl(50.0), Model::Bare).unwrap();
    for i in 0..1000 {
        let x = -100.0 + 0.45 * i as f64;
        let expected = -3.0 * std::f64::consts::PI
            * (atom.w_n / num::complex::Complex64::new(x, 0.5)
                + atom.w_n_prime / num::complex::Complex64::new(x - 256.0, 0.5));
        assert!(rel(bare.chi(x), expected) < 1e-13);
    }
}

#[test]
fn roots_match_absorption_maxima() {
    let atom = cs();
    for det in [50.0, -50.0, 120.0] {
        let c = ctrl(det);
        for root in locate_at_resonances(&atom, &c).unwrap() {
            let grid = DetuningGrid::new(root.position - 5.0 * root.width, root.position + 5.0 * root.width, 201).unwrap();
            let s = spectrum(&atom, &c, &grid, Model::Full).unwrap();
            let peaks = s.absorption_peaks();
            assert!(
                peaks.iter().any(|&i| (s.detunings[i] - root.position).abs() <= grid.step()),
                "det {det} root {root:?}"
            );
        }
    }
}

#[test]
fn uncoupled_roots_are_exact() {
    let atom = cs();
    let c = ControlField::new(0.0, 37.5).unwrap();
    let roots = locate_at_resonances(&atom, &c).unwrap();
    let pos: Vec<f64> = roots.iter().map(|r| r.position).collect();
    assert_eq!(pos, vec![0.0, 37.5, 256.0]);
    let widths: Vec<f64> = roots.iter().map(|r| r.width).collect();
    assert_eq!(widths, vec![1.0, 2e-6, 1.0]);
}

#[test]
fn lambda_limit_roots_solve_the_quadratic() {
    let atom = AtomSystem::new(256.0, 1e-6, Couplings { w_n: 1.0, w_n_prime: 0.0, control_ratio: 0.0 }).unwrap();
    let roots = locate_at_resonances(&atom, &ctrl(50.0)).unwrap();
    let s = (50.0f64 * 50.0 + 15.0 * 15.0).sqrt();
    assert!((roots[0].position - (50.0 - s) / 2.0).abs() < 1e-3);
    assert!((roots[1].position - (50.0 + s) / 2.0).abs() < 1e-3);
    assert!((roots[2].position - 256.0).abs() < 1e-12);
}

#[test]
fn cesium_resonance_triples() {
    let atom = cs();
    let frozen = [
        (50.0, [(-1.133903, 0.97765), (49.237948, 0.03139), (257.895955, 0.99095)]),
        (-50.0, [(-52.351327, 0.02407), (1.069023, 0.98009), (257.282304, 0.99584)]),
    ];
    for (det, expected) in frozen {
        let roots = locate_at_resonances(&atom, &ctrl(det)).unwrap();
        for (r, (p, w)) in roots.iter().zip(expected) {
            assert!((r.position - p).abs() < 1e-5, "{r:?}");
            assert!((r.width - w).abs() < 1e-4, "{r:?}");
        }
        let raman = raman_resonance(&roots, &ctrl(det));
        assert!((raman.position - det).abs() < 3.0);
    }
}

/// Peak of Im chi near `around`, refined on a grid much finer than the line.
fn raman_peak(response: &Response, around: f64, width: f64) -> f64 {
    let n = 20_001;
    (0..n)
        .map(|i| around - 5.0 * width + 10.0 * width * i as f64 / (n - 1) as f64)
        .map(|x| response.chi(x).im)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn hyperfine_interference_reshapes_the_raman_line() {
    let atom = cs();
    let mut ratios = Vec::new();
    for det in [50.0, -50.0] {
        let c = ctrl(det);
        let full = Response::new(&atom, &c, Model::Full).unwrap();
        let lambda = Response::new(&atom, &c, Model::Lambda).unwrap();
        let fr = raman_resonance(&locate_at_resonances(&atom, &c).unwrap(), &c);
        let lr = raman_resonance(&locate_at_resonances(&atom.lambda_reduction(), &c).unwrap(), &c);
        ratios.push(raman_peak(&full, fr.position, fr.width) / raman_peak(&lambda, lr.position, lr.width));
    }
    assert!((ratios[0] - 1.097).abs() < 2e-3, "{ratios:?}");
    assert!((ratios[1] - 0.5735).abs() < 2e-3, "{ratios:?}");
}

#[test]
fn kramers_kronig_reconstructs_dispersion() {
    for det in [50.0, -50.0] {
        let (rel_err, _) = common::kramers_kronig_error(&cs(), &ctrl(det));
        assert!(rel_err < 0.02, "det {det}: {rel_err}");
    }
}
