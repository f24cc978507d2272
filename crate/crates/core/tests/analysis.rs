use num_complex::Complex64;
use proptest::prelude::*;
use tfweyl::gabor::{gaussian_window, modnorm_estimate, GaborSystem};
use tfweyl::grid::Grid;
use tfweyl::hermite::{analyze, default_grid, synthesize};
use tfweyl::lattice_norms::{ExponentPair, Lattice, PhaseLattice};
use tfweyl::weights::{check_moderate, Weight};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermite_coefficients_keep_the_energy(x0 in -1.5..1.5f64, w0 in -1.5..1.5f64, width in 0.7..1.4f64) {
        let grid = default_grid();
        let f = grid.sample(|x| Complex64::from_polar((-(x[0] - x0).powi(2) / (2.0 * width * width)).exp(), w0 * x[0]));
        let e = analyze(&f, 60).unwrap();
        let norm = f.norm_l2().powi(2);
        prop_assert!((e.energy() - norm).abs() < 1e-9 * norm, "{} vs {}", e.energy(), norm);
        prop_assert!(synthesize(&e, &grid).unwrap().rel_l2_distance(&f) < 1e-5);
    }

    #[test]
    fn polynomial_weights_are_moderate(s in 0.0..4.0f64, seed in 0u32..1000) {
        let omega = Weight::polynomial(s);
        let report = check_moderate(&omega, &omega, 2, 6.0, 256, seed).unwrap();
        // Peetre: <x + y>^s <= 2^{s/2} <x>^s <y>^s
        prop_assert!(report.max_ratio <= 2f64.powf(s / 2.0) * (1.0 + 1e-12));
    }
}

#[test]
fn gabor_coefficients_bound_the_gaussian_modulation_norm() {
    let grid = Grid::new(1, 256, 16.0).unwrap();
    let phi = gaussian_window(&grid);
    let sys = GaborSystem::new(phi.clone(), PhaseLattice::square(Lattice::covering(0.5, 1, 12.0).unwrap())).unwrap();
    let f = grid.sample(|x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
    for (p, q) in [(1.0, 1.0), (2.0, 2.0), (0.5, 1.0), (f64::INFINITY, 1.0)] {
        let pair = ExponentPair::new(p, q).unwrap();
        let a = modnorm_estimate(&sys, &f, pair, None).unwrap();
        let b = modnorm_estimate(&sys, &f.translate(&[1.0]).modulate(&[1.0]), pair, None).unwrap();
        // lattice time-frequency shifts permute the coefficients
        assert!(a.is_finite() && a > 0.0);
        assert!((a - b).abs() < 1e-6 * a, "p={p} q={q}: {a} vs {b}");
    }
}
