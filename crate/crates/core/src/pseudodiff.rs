//! Pseudo-differential operators `Op_A(a)` on `R` and the product `#_A`.
//!
//! `Op_A(a) f(x) = (2 pi)^{-1} iint a(x - A(x - y), xi) f(y) e^{i (x - y) xi} dy dxi`,
//! with Kohn-Nirenberg `A = 0` and Weyl `A = 1/2`. Symbols are sampled on a
//! self-dual phase-space grid, so the `x - y` variable of the kernel shares the
//! points of the `x` axis and only the first kernel argument needs a (spectral) shift.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::{conjugate_gradient, gaussian_window, rihaczek_window, synthesis, Walnut};
use crate::grid::{fourier_samples, inverse_fourier_samples, Grid, Sampled};
use crate::lattice_norms::{Lattice, LatticeSequence, PhaseLattice};
use crate::matrix_space::{c_matrix, GaborMatrix};
use crate::phase_space::{check_lattice_fits, stft_lattice, transform_on};

/// Real `d x d` matrix `A` selecting the calculus, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalculusParam {
    pub d: usize,
    pub matrix: Vec<f64>,
}

impl CalculusParam {
    pub fn new(d: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != d * d || matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("calculus matrix must be {d}x{d} and finite")));
        }
        Ok(CalculusParam { d, matrix })
    }

    /// `A = t I`.
    pub fn scalar(d: usize, t: f64) -> Self {
        let matrix = (0..d * d).map(|i| if i % (d + 1) == 0 { t } else { 0.0 }).collect();
        CalculusParam { d, matrix }
    }

    pub fn kohn_nirenberg(d: usize) -> Self {
        Self::scalar(d, 0.0)
    }

    pub fn weyl(d: usize) -> Self {
        Self::scalar(d, 0.5)
    }

    fn one_dimensional(&self) -> Result<f64> {
        if self.d == 1 {
            Ok(self.matrix[0])
        } else {
            Err(Error::Unsupported("operators are implemented for d = 1".into()))
        }
    }
}

/// Tail threshold below which a symbol counts as decayed at the grid boundary.
pub const TAIL_TOLERANCE: f64 = 1e-8;

fn check_symbol(a: &Sampled) -> Result<Grid> {
    let grid = a.grid;
    if grid.dim != 2 {
        return Err(Error::Unsupported("symbols are implemented on R^2 (d = 1)".into()));
    }
    if !grid.is_self_dual() {
        return Err(Error::GridMismatch("symbol grid must be self-dual (L^2 = pi n / 2)".into()));
    }
    let tail = a.boundary_ratio();
    if tail > TAIL_TOLERANCE {
        return Err(Error::TailTooLarge(tail));
    }
    grid.with_dim(1)
}

/// Integral kernel sampled on the axis grid, `values[k * n + l] = K(x_k, x_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl Kernel {
    pub fn apply(&self, f: &Sampled) -> Result<Sampled> {
        if !f.grid.same_as(&self.grid) {
            return Err(Error::GridMismatch("function and kernel grids differ".into()));
        }
        let n = self.grid.n;
        let h = self.grid.step();
        let values = self
            .values
            .chunks(n)
            .map(|row| row.iter().zip(&f.values).map(|(k, v)| k * v).sum::<Complex64>() * h)
            .collect();
        Sampled::new(self.grid, values)
    }

    /// Kernel of the composition `self o other`.
    pub fn compose(&self, other: &Kernel) -> Result<Kernel> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("kernel grids differ".into()));
        }
        let n = self.grid.n;
        let h = self.grid.step();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for (row_out, row_a) in out.chunks_mut(n).zip(self.values.chunks(n)) {
            for (a, row_b) in row_a.iter().zip(other.values.chunks(n)) {
                for (o, b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
            row_out.iter_mut().for_each(|v| *v *= h);
        }
        Ok(Kernel { grid: self.grid, values: out })
    }
}

/// `K(x, y) = (2 pi)^{-1/2} (F_2^{-1} a)(x - A(x - y), x - y)`.
pub fn kernel_from_symbol(a: &Sampled, calculus: &CalculusParam) -> Result<Kernel> {
    let t = calculus.one_dimensional()?;
    let axis = check_symbol(a)?;
    let n = axis.n;
    let h = axis.step();
    // g[s][z] = (2 pi)^{-1} int a(z, xi) e^{i u_s xi} dxi, u_s = (s - n/2) h
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for z in 0..n {
        let row = inverse_fourier_samples(&axis, &a.values[z * n..(z + 1) * n]);
        for (s, v) in row.into_iter().enumerate() {
            g[s * n + z] = v / (2.0 * PI).sqrt();
        }
    }
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    let half = (n / 2) as i64;
    for s_idx in 0..n {
        let s = s_idx as i64 - half;
        let column = Sampled { grid: axis, values: g[s_idx * n..(s_idx + 1) * n].to_vec() };
        // K(x_k, x_k - s h) = g_s(x_k - t s h)
        let shifted = column.translate(&[t * s as f64 * h]);
        for k in 0..n as i64 {
            let l = k - s;
            if l >= 0 && l < n as i64 {
                values[k as usize * n + l as usize] = shifted.values[k as usize];
            }
        }
    }
    Ok(Kernel { grid: axis, values })
}

/// Inverse of [`kernel_from_symbol`]; kernel entries with `|x - y| >= L` are dropped.
pub fn symbol_from_kernel(kernel: &Kernel, calculus: &CalculusParam) -> Result<Sampled> {
    let t = calculus.one_dimensional()?;
    let axis = kernel.grid;
    let n = axis.n;
    let h = axis.step();
    let half = (n / 2) as i64;
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for s_idx in 0..n {
        let s = s_idx as i64 - half;
        let diag: Vec<Complex64> = (0..n as i64)
            .map(|k| {
                let l = k - s;
                if l >= 0 && l < n as i64 {
                    kernel.values[k as usize * n + l as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        // g_s(z) = K(z + t s h, z + t s h - s h)
        let shifted = Sampled { grid: axis, values: diag }.translate(&[-t * s as f64 * h]);
        for (z, v) in shifted.values.into_iter().enumerate() {
            g[z * n + s_idx] = v;
        }
    }
    let phase_grid = axis.with_dim(2)?;
    let mut out = Sampled::zeros(phase_grid);
    for z in 0..n {
        let row = fourier_samples(&axis, &g[z * n..(z + 1) * n]);
        for (m, v) in row.into_iter().enumerate() {
            out.values[z * n + m] = v * (2.0 * PI).sqrt();
        }
    }
    Ok(out)
}

/// `Op_A(a) f` through the sampled kernel.
pub fn apply_op(a: &Sampled, calculus: &CalculusParam, f: &Sampled) -> Result<Sampled> {
    kernel_from_symbol(a, calculus)?.apply(f)
}

/// Symbol `a2` with `Op_{A2}(a2) = Op_{A1}(a1)`: the Fourier multiplier
/// `e^{i (A1 - A2) <D_xi, D_x>}`.
pub fn calculi_transfer(a: &Sampled, from: &CalculusParam, to: &CalculusParam) -> Result<Sampled> {
    let (t1, t2) = (from.one_dimensional()?, to.one_dimensional()?);
    check_symbol(a)?;
    let grid = a.grid;
    let mut spec = fourier_samples(&grid, &a.values);
    let dual = grid.dual();
    for (i, v) in spec.iter_mut().enumerate() {
        let w = dual.point(i);
        *v *= Complex64::from_polar(1.0, (t1 - t2) * w[0] * w[1]);
    }
    Sampled::new(grid, inverse_fourier_samples(&grid, &spec))
}

/// `a #_A b` through kernel composition.
pub fn sharp_product(a: &Sampled, b: &Sampled, calculus: &CalculusParam) -> Result<Sampled> {
    a.check_grid(b)?;
    let k = kernel_from_symbol(a, calculus)?.compose(&kernel_from_symbol(b, calculus)?)?;
    symbol_from_kernel(&k, calculus)
}

/// `e^{-lambda |x|^2 - mu |xi|^2}` on a phase-space grid.
pub fn gaussian_symbol(grid: &Grid, lambda: f64, mu: f64) -> Sampled {
    grid.sample(|p| Complex64::new((-lambda * p[0] * p[0] - mu * p[1] * p[1]).exp(), 0.0))
}

/// Closed form of the Weyl product of `e^{-lambda |X|^2}` and `e^{-mu |X|^2}` on `R^{2d}`.
pub fn gaussian_weyl_product(lambda: f64, mu: f64, big_x_sq: f64, d: usize) -> f64 {
    let s = 1.0 + lambda * mu;
    s.powi(-(d as i32)) * (-big_x_sq * (lambda + mu) / s).exp()
}

/// Gabor-matrix description of `Op_0(a) = D_{phi1} A C_{phi2}`:
/// `A(J, K) = V_Psi a(j, kappa, iota - kappa, k - j) e^{i <k - j, kappa>}`
/// with `Psi` the canonical dual of `Phi(x, xi) = phi1(x) conj(F phi2(xi)) e^{-i x xi}`
/// on `theta Z^2 x theta Z^2`.
#[derive(Debug, Clone)]
pub struct MatrixRoute {
    pub axis: Grid,
    pub phi1: Sampled,
    pub phi2: Sampled,
    /// Points `J = (j, iota)`.
    pub index: Lattice,
    pub window: Sampled,
    pub dual: Sampled,
    /// Half-width, in grid steps, of the square outside which the dual is negligible.
    support: usize,
}

/// Lattice spacing of the matrix route.
pub const DEFAULT_THETA: f64 = 0.5;
/// Lattice radius of the matrix route: `|j|, |iota| <= 10` at the default spacing.
pub const DEFAULT_RADIUS: usize = 20;

/// Dual-window magnitude (relative to its peak) treated as zero when cropping.
const SUPPORT_TOLERANCE: f64 = 1e-13;

impl MatrixRoute {
    pub fn new(phi1: Sampled, phi2: Sampled, theta: f64, radius: usize) -> Result<Self> {
        phi1.check_grid(&phi2)?;
        let axis = phi1.grid;
        if axis.dim != 1 || !axis.is_self_dual() {
            return Err(Error::GridMismatch("matrix route needs a self-dual axis grid".into()));
        }
        let index = Lattice::new(theta, 2, radius)?;
        check_lattice_fits(&axis, &PhaseLattice::square(Lattice { theta, dim: 1, radius }))?;
        let window = rihaczek_window(&phi1, &phi2)?;
        let walnut = Walnut::new(&window, theta)?;
        if walnut.frame_bounds().0 <= 0.0 {
            return Err(Error::NotAFrame(format!("Rihaczek window at spacing {theta}")));
        }
        let dual = conjugate_gradient(|v| walnut.apply(v), &window)?;
        let n = axis.n;
        let centre = (n / 2) as i64;
        let cutoff = SUPPORT_TOLERANCE * dual.max_abs();
        let support = (0..dual.values.len())
            .filter(|&i| dual.values[i].norm() > cutoff)
            .map(|i| (i / n, i % n))
            .map(|(r, c)| (r as i64 - centre).abs().max((c as i64 - centre).abs()) as usize)
            .max()
            .unwrap_or(0);
        Ok(MatrixRoute { axis, phi1, phi2, index, window, dual, support })
    }

    /// Gaussian windows `phi1 = phi2 = pi^{-1/4} e^{-x^2/2}`.
    pub fn gaussian(axis: &Grid, theta: f64, radius: usize) -> Result<Self> {
        let phi = gaussian_window(axis);
        MatrixRoute::new(phi.clone(), phi, theta, radius)
    }

    fn phase_lattice(&self) -> PhaseLattice {
        PhaseLattice::square(Lattice { theta: self.index.theta, dim: 1, radius: self.index.radius })
    }

    /// `C_{phi2} f`, indexed like `self.index`.
    pub fn analysis(&self, f: &Sampled) -> Result<Vec<Complex64>> {
        Ok(stft_lattice(f, &self.phi2, &self.phase_lattice())?.values)
    }

    /// `D_{phi1} c`.
    pub fn synthesis(&self, c: &[Complex64]) -> Result<Sampled> {
        synthesis(&self.phi1, &LatticeSequence::new(self.phase_lattice(), c.to_vec())?)
    }

    /// `D_{phi1} M C_{phi2} f`.
    pub fn apply(&self, m: &GaborMatrix, f: &Sampled) -> Result<Sampled> {
        self.synthesis(&m.apply(&self.analysis(f)?)?)
    }

    /// `C = C_{phi2} D_{phi1}`.
    pub fn c_matrix(&self) -> Result<GaborMatrix> {
        c_matrix(&self.phi1, &self.phi2, &self.index)
    }

    /// Entries whose frequency offset reaches the Nyquist limit of the grid are set to zero;
    /// for symbols resolved by the grid they are below the sampling error.
    pub fn symbol_to_matrix(&self, a: &Sampled) -> Result<GaborMatrix> {
        check_symbol(a)?;
        if !a.grid.same_as(&self.window.grid) {
            return Err(Error::GridMismatch("symbol and window grids differ".into()));
        }
        let grid = a.grid;
        let n = grid.n;
        let h = grid.step();
        let r = self.index.radius as i64;
        let theta = self.index.theta;
        let nyquist = PI / h;
        let band = (2 * r).min(((nyquist / theta) - 1e-9).floor() as i64);
        let offsets: Vec<f64> = (-band..=band).map(|m| m as f64 * theta).collect();
        let no = offsets.len();
        let coords = grid.with_dim(1)?.coords();
        let norm = 1.0 / (2.0 * PI);
        let crop = |centre: f64| {
            let c = ((centre + grid.half_width) / h).round() as i64;
            let lo = (c - self.support as i64 - 1).max(0) as usize;
            let hi = ((c + self.support as i64 + 2) as usize).min(n);
            lo..hi
        };
        let mut out = GaborMatrix::zeros(self.index);
        for j in -r..=r {
            for kappa in -r..=r {
                let pos = [j as f64 * theta, kappa as f64 * theta];
                let moved = self.dual.translate(&pos);
                let (rows, cols) = (crop(pos[0]), crop(pos[1]));
                let mut prod = Vec::with_capacity(rows.len() * cols.len());
                for row in rows.clone() {
                    for col in cols.clone() {
                        let i = row * n + col;
                        prod.push(a.values[i] * moved.values[i].conj());
                    }
                }
                let axes = [coords[rows].to_vec(), coords[cols].to_vec()];
                // V_Psi a((j, kappa), (m1, m2)) for all offsets m1, m2 inside the band
                let v = transform_on(&axes, &prod, &offsets, grid.cell_volume());
                for iota in -r..=r {
                    for k in -r..=r {
                        let (m1, m2) = (iota - kappa, k - j);
                        if m1.abs() > band || m2.abs() > band {
                            continue;
                        }
                        let entry = v[(m1 + band) as usize * no + (m2 + band) as usize];
                        let phase = ((k - j) * kappa) as f64 * theta * theta;
                        let row = self.index.index_of(&[j, iota]).unwrap();
                        let col = self.index.index_of(&[k, kappa]).unwrap();
                        out.set(row, col, entry * norm * Complex64::from_polar(1.0, phase));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `Op(a #_0 b)`: `A C B`.
    pub fn sharp_product(&self, a: &Sampled, b: &Sampled) -> Result<GaborMatrix> {
        let ma = self.symbol_to_matrix(a)?;
        let mb = self.symbol_to_matrix(b)?;
        ma.compose(&self.c_matrix()?)?.compose(&mb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis() -> Grid {
        Grid::self_dual(1, 128).unwrap()
    }

    fn test_function(grid: &Grid) -> Sampled {
        grid.sample(|x| Complex64::from_polar((-(x[0] - 0.7).powi(2) / 1.5).exp(), 0.8 * x[0]))
    }

    #[test]
    fn kernel_round_trip() {
        let phase = axis().with_dim(2).unwrap();
        let a = phase.sample(|p| Complex64::from_polar((-(p[0] * p[0]) / 2.0 - p[1] * p[1]).exp(), 0.3 * p[0] * p[1]));
        for t in [0.0, 0.5, 0.3] {
            let c = CalculusParam::scalar(1, t);
            let back = symbol_from_kernel(&kernel_from_symbol(&a, &c).unwrap(), &c).unwrap();
            assert!(back.rel_l2_distance(&a) < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn kohn_nirenberg_of_product_symbol() {
        // Op_0(alpha(x) beta(xi)) f = alpha (beta(D) f)
        let ax = axis();
        let phase = ax.with_dim(2).unwrap();
        let mu = 0.2;
        let f = ax.sample(|x| Complex64::new((-x[0] * x[0] / 4.0).exp(), 0.0));
        let a = phase.sample(|p| Complex64::new((-p[0] * p[0] - mu * p[1] * p[1]).exp(), 0.0));
        let out = apply_op(&a, &CalculusParam::kohn_nirenberg(1), &f).unwrap();
        let s = 1.0 + mu;
        let exact = ax.sample(|x| Complex64::new((-x[0] * x[0] * (1.0 + 1.0 / (4.0 * s))).exp() / s.sqrt(), 0.0));
        assert!(out.rel_l2_distance(&exact) < 1e-10, "{}", out.rel_l2_distance(&exact));
    }

    #[test]
    fn gaussian_weyl_product_closed_form() {
        let phase = axis().with_dim(2).unwrap();
        let w = CalculusParam::weyl(1);
        for (l, m) in [(1.0, 1.0), (0.5, 2.0)] {
            let c = sharp_product(&gaussian_symbol(&phase, l, l), &gaussian_symbol(&phase, m, m), &w).unwrap();
            let exact = phase.sample(|p| Complex64::new(gaussian_weyl_product(l, m, p[0] * p[0] + p[1] * p[1], 1), 0.0));
            assert!(c.rel_l2_distance(&exact) < 1e-9, "{l} {m}: {}", c.rel_l2_distance(&exact));
        }
    }

    #[test]
    fn transfer_preserves_operator() {
        let ax = axis();
        let phase = ax.with_dim(2).unwrap();
        let a = phase.sample(|p| Complex64::from_polar((-(p[0] - 0.5).powi(2) - p[1] * p[1] / 2.0).exp(), 0.4 * p[1]));
        let f = test_function(&ax);
        let weyl = CalculusParam::weyl(1);
        let kn = CalculusParam::kohn_nirenberg(1);
        let b = calculi_transfer(&a, &weyl, &kn).unwrap();
        let lhs = apply_op(&b, &kn, &f).unwrap();
        let rhs = apply_op(&a, &weyl, &f).unwrap();
        assert!(lhs.rel_l2_distance(&rhs) < 1e-10);
    }

    #[test]
    fn tails_are_checked() {
        let phase = axis().with_dim(2).unwrap();
        let wide = gaussian_symbol(&phase, 0.01, 0.01);
        assert!(matches!(kernel_from_symbol(&wide, &CalculusParam::weyl(1)), Err(Error::TailTooLarge(_))));
        let other = Grid::new(2, 128, 12.0).unwrap();
        assert!(matches!(
            kernel_from_symbol(&gaussian_symbol(&other, 1.0, 1.0), &CalculusParam::weyl(1)),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn matrix_route_matches_kernel_route() {
        let ax = axis();
        let phase = ax.with_dim(2).unwrap();
        let route = MatrixRoute::gaussian(&ax, DEFAULT_THETA, DEFAULT_RADIUS).unwrap();
        let a = gaussian_symbol(&phase, 1.0, 1.0);
        let m = route.symbol_to_matrix(&a).unwrap();
        for (x0, w0) in [(0.0, 0.0), (1.0, 0.0), (-0.5, 0.5), (0.3, -1.0)] {
            let f = ax.sample(|x| Complex64::from_polar((-(x[0] - x0).powi(2) / 2.0).exp(), w0 * x[0]));
            let lhs = route.apply(&m, &f).unwrap();
            let rhs = apply_op(&a, &CalculusParam::kohn_nirenberg(1), &f).unwrap();
            assert!(lhs.rel_l2_distance(&rhs) < 1e-6);
        }
        let zero = route.symbol_to_matrix(&Sampled::zeros(phase)).unwrap();
        assert!(zero.values.iter().all(|v| v.norm() == 0.0));
    }
}
