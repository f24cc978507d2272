use num_complex::Complex64;
use tfweyl::grid::{Grid, Sampled};
use tfweyl::phase_space::wigner;
use tfweyl::pseudodiff::{apply_op, gaussian_symbol, sharp_product, CalculusParam};

fn axis() -> Grid {
    Grid::self_dual(1, 128).unwrap()
}

fn bump(grid: &Grid, x0: f64, w0: f64, width: f64) -> Sampled {
    grid.sample(|x| Complex64::from_polar((-(x[0] - x0).powi(2) / (2.0 * width * width)).exp(), w0 * x[0]))
}

/// Gaussian symbol with a linear phase in both variables, so the product is not commutative.
fn twisted_symbol(grid: &Grid, lambda: f64, a: f64, b: f64) -> Sampled {
    gaussian_symbol(grid, lambda, lambda).zip_with(&grid.sample(|p| Complex64::from_polar(1.0, a * p[0] + b * p[1])), |u, v| u * v)
}

#[test]
fn sharp_product_is_associative() {
    let phase = axis().with_dim(2).unwrap();
    let (a, b, c) = (twisted_symbol(&phase, 1.0, 0.3, 0.0), twisted_symbol(&phase, 0.8, 0.0, -0.4), gaussian_symbol(&phase, 1.2, 0.7));
    for t in [0.0, 0.5, 0.3] {
        let calc = CalculusParam::scalar(1, t);
        let left = sharp_product(&sharp_product(&a, &b, &calc).unwrap(), &c, &calc).unwrap();
        let right = sharp_product(&a, &sharp_product(&b, &c, &calc).unwrap(), &calc).unwrap();
        assert!(left.rel_l2_distance(&right) < 1e-10, "t = {t}: {}", left.rel_l2_distance(&right));
    }
}

#[test]
fn adjoint_swaps_the_calculus_and_conjugates() {
    let grid = axis();
    let phase = grid.with_dim(2).unwrap();
    let a = twisted_symbol(&phase, 0.9, 0.5, -0.2);
    let (f, g) = (bump(&grid, 0.5, 0.2, 1.0), bump(&grid, -0.3, -0.6, 0.8));
    for t in [0.0, 0.25, 0.5] {
        let lhs = apply_op(&a, &CalculusParam::scalar(1, t), &f).unwrap().inner(&g);
        let rhs = f.inner(&apply_op(&a.conj(), &CalculusParam::scalar(1, 1.0 - t), &g).unwrap());
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm(), "t = {t}: {lhs} vs {rhs}");
    }
}

#[test]
fn weyl_operator_of_a_wigner_distribution_is_rank_one() {
    let grid = axis();
    let (f, phi, g) = (bump(&grid, 0.7, 0.4, 1.0), bump(&grid, 0.0, 0.0, 1.0), bump(&grid, -0.5, 0.3, 1.3));
    let w = wigner(&f, &phi).unwrap();
    let lhs = apply_op(&w, &CalculusParam::weyl(1), &g).unwrap();
    let rhs = f.scale(g.inner(&phi) / (2.0 * std::f64::consts::PI).sqrt());
    assert!(lhs.rel_l2_distance(&rhs) < 1e-8, "{}", lhs.rel_l2_distance(&rhs));
}

#[test]
fn wigner_pairing_reproduces_inner_products() {
    let grid = axis();
    let (f1, g1) = (bump(&grid, 0.5, 0.0, 1.0), bump(&grid, 0.0, 0.7, 0.9));
    let (f2, g2) = (bump(&grid, -0.4, 0.3, 1.1), bump(&grid, 0.2, -0.2, 1.0));
    let lhs = wigner(&f1, &g1).unwrap().inner(&wigner(&f2, &g2).unwrap());
    let rhs = f1.inner(&f2) * g1.inner(&g2).conj();
    assert!((lhs - rhs).norm() < 1e-10 * rhs.norm(), "{lhs} vs {rhs}");
}
