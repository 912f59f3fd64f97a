mod common;

use common::direct_autocorrelation;
use gfperc_core::kernel::{alpha, make_kernel, validate_conditions, KernelFamily, KernelSpec, Tolerances};
use gfperc_core::TorusGrid;
use proptest::prelude::*;

fn table_spec(n: usize, values: Vec<f64>) -> KernelSpec {
    KernelSpec::new(KernelFamily::CustomTable { n, values })
}

proptest! {
    #![proptest_config(common::cases(32))]

    #[test]
    fn fft_kappa_matches_direct_sum(n in 1usize..=16, side in 0.5f64..20.0, seed in prop::collection::vec(-1.0f64..1.0, 256)) {
        let grid = TorusGrid::square(n, side).unwrap();
        let q: Vec<f64> = seed[..n * n].to_vec();
        prop_assume!(q.iter().any(|v| *v != 0.0));
        let k = make_kernel(&table_spec(n, q.clone()), &grid).unwrap();
        let direct = direct_autocorrelation(n, &q, grid.cell_volume());
        for (a, b) in k.kappa.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
        }
    }

    #[test]
    fn kernel_invariants(width in 0.5f64..3.0, a in 0.0f64..0.5, beta in 2.5f64..6.0, pick in 0usize..3, normalize in any::<bool>()) {
        let family = match pick {
            0 => KernelFamily::BargmannFock { width },
            1 => KernelFamily::Oscillatory { width, a },
            _ => KernelFamily::TruncatedPolynomialDecay { width, beta },
        };
        let mut spec = KernelSpec::new(family);
        spec.normalize_sigma = normalize;
        let grid = TorusGrid::square(64, 8.0 * width).unwrap();
        let k = make_kernel(&spec, &grid).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-10 * y.abs().max(1e-300);
        prop_assert!(rel(k.sigma * k.sigma, k.kappa[0]));
        let l2_quad: f64 = k.values.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume();
        prop_assert!(rel(k.l2_norm * k.l2_norm, l2_quad));
        prop_assert!(rel(k.l2_norm * k.l2_norm, k.sigma * k.sigma));
        let max_kappa = k.kappa.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_kappa <= k.l2_norm * k.l2_norm + 1e-9);
        for i in 0..grid.len() {
            let c = grid.coords(i);
            let j = grid.index(&[(64 - c[0]) % 64, (64 - c[1]) % 64]);
            prop_assert!((k.kappa[i] - k.kappa[j]).abs() <= 1e-12 * k.kappa[0]);
        }
        let report = validate_conditions(&k, &Tolerances::default());
        if report.strong_positivity.pass {
            prop_assert!(report.weak_positivity.pass);
        }
    }

    #[test]
    fn alpha_ignores_scale_and_center(shift_x in 0usize..32, shift_y in 0usize..32, c in 0.01f64..100.0) {
        let grid = TorusGrid::square(32, 16.0).unwrap();
        let k = make_kernel(&KernelSpec::bargmann_fock(1.0), &grid).unwrap();
        let shifted: Vec<f64> = (0..grid.len())
            .map(|i| {
                let p = grid.coords(i);
                k.values[grid.index(&[(p[0] + 32 - shift_x) % 32, (p[1] + 32 - shift_y) % 32])] * c
            })
            .collect();
        let k2 = make_kernel(&table_spec(32, shifted), &grid).unwrap();
        let (a1, a2) = (alpha(&k).unwrap(), alpha(&k2).unwrap());
        prop_assert!((a1 - a2).abs() <= 1e-12, "{} vs {}", a1, a2);
    }
}

#[test]
fn condition_reports_are_bit_identical() {
    let grid = TorusGrid::square(64, 16.0).unwrap();
    let spec = KernelSpec::new(KernelFamily::Oscillatory { width: 1.0, a: 0.2 });
    let a = validate_conditions(&make_kernel(&spec, &grid).unwrap(), &Tolerances::default());
    let b = validate_conditions(&make_kernel(&spec, &grid).unwrap(), &Tolerances::default());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn sigma_is_stable_under_refinement() {
    let coarse = make_kernel(&KernelSpec::bargmann_fock(1.0), &TorusGrid::square(64, 16.0).unwrap()).unwrap();
    let fine = make_kernel(&KernelSpec::bargmann_fock(1.0), &TorusGrid::square(128, 16.0).unwrap()).unwrap();
    assert!((coarse.sigma / fine.sigma - 1.0).abs() < 0.01);
}

#[test]
fn alpha_decreases_with_torus_side() {
    let alphas: Vec<f64> = [64.0, 128.0, 256.0]
        .iter()
        .map(|&side| {
            let grid = TorusGrid::square((side * 2.0) as usize, side).unwrap();
            alpha(&make_kernel(&KernelSpec::bargmann_fock(1.0).normalized(), &grid).unwrap()).unwrap()
        })
        .collect();
    println!("alpha at sides 64, 128, 256: {alphas:?}");
    assert!(alphas.windows(2).all(|w| w[1] < w[0]));
    // |q|_2 / |q|_1 is fixed for a planar Gaussian, so alpha^-2 - 1 grows by ln 2 per doubling
    let inv: Vec<f64> = alphas.iter().map(|a| a.powi(-2) - 1.0).collect();
    for w in inv.windows(2) {
        assert!((w[1] - w[0] - std::f64::consts::LN_2).abs() < 1e-9);
    }
}

#[test]
fn oscillatory_scan_loses_strong_positivity() {
    let grid = TorusGrid::square(128, 16.0).unwrap();
    let mut largest_weak = None;
    for step in 1..=10 {
        let a = 0.05 * step as f64;
        let k = make_kernel(&KernelSpec::new(KernelFamily::Oscillatory { width: 1.0, a }), &grid).unwrap();
        let r = validate_conditions(&k, &Tolerances::default());
        assert!(!r.strong_positivity.pass, "a = {a}");
        if r.weak_positivity.min_kappa >= -1e-12 {
            largest_weak = Some(a);
        }
    }
    println!("largest a with min kappa >= -1e-12: {largest_weak:?}");
    assert!(largest_weak.is_some());
}
