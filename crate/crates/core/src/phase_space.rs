//! Fourier, symplectic Fourier, short-time Fourier and Wigner transforms of
//! sampled functions and symbols.
//!
//! Conventions: `F f(xi) = (2 pi)^{-d/2} int f(x) e^{-i x xi} dx`;
//! `V_phi f(x, xi) = (2 pi)^{-d/2} int f(y) conj(phi(y - x)) e^{-i y xi} dy`;
//! `F_sigma a(X) = pi^{-d} int a(Y) e^{2 i sigma(X, Y)} dY` with
//! `sigma(X, Y) = <y, xi> - <x, eta>`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{dft_table, fourier_samples, inverse_fourier_samples, Grid, Sampled};
use crate::lattice_norms::{lp_norm, ExponentPair, LatticeSequence, PhaseLattice};

const NYQUIST_TOLERANCE: f64 = 1e-6;

/// Unitary Fourier transform onto `f.grid.dual()`; fails when the spectrum
/// has not decayed at the edge of the frequency grid.
pub fn fourier(f: &Sampled) -> Result<Sampled> {
    let out = Sampled::new(f.grid.dual(), fourier_samples(&f.grid, &f.values))?;
    let edge = out.boundary_ratio();
    if edge > NYQUIST_TOLERANCE {
        return Err(Error::Undersampled(format!("spectrum at the frequency boundary is {edge:e} of its maximum")));
    }
    Ok(out)
}

/// Inverse of [`fourier`]: `spectrum` must live on `grid.dual()`.
pub fn inverse_fourier(spectrum: &Sampled, grid: &Grid) -> Result<Sampled> {
    if !spectrum.grid.same_as(&grid.dual()) {
        return Err(Error::GridMismatch("spectrum is not on the dual of the target grid".into()));
    }
    Sampled::new(*grid, inverse_fourier_samples(grid, &spectrum.values))
}

/// Grid on which [`symplectic_fourier`] returns its values: spacing `pi / (2L)`.
pub fn symplectic_dual(grid: &Grid) -> Grid {
    Grid { dim: grid.dim, n: grid.n, half_width: PI / (2.0 * grid.step()) }
}

/// Symplectic Fourier transform, `F_sigma a(x, xi) = 2^d F a(-2 xi, 2 x)`.
/// Applying it twice (grid to [`symplectic_dual`] and back) is the identity.
pub fn symplectic_fourier(a: &Sampled) -> Result<Sampled> {
    let grid = a.grid;
    if grid.dim % 2 != 0 {
        return Err(Error::InvalidArgument("symbols live on an even-dimensional phase space".into()));
    }
    let d = grid.dim / 2;
    let spec = fourier_samples(&grid, &a.values);
    let out_grid = symplectic_dual(&grid);
    let n = grid.n;
    let factor = 2f64.powi(d as i32);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut src = vec![0; grid.dim];
    for (i, v) in values.iter_mut().enumerate() {
        let idx = out_grid.multi_index(i);
        for k in 0..d {
            src[d + k] = idx[k];
            src[k] = (n - idx[d + k]) % n;
        }
        *v = spec[grid.flat_index(&src)] * factor;
    }
    Sampled::new(out_grid, values)
}

/// `V_phi f(x, xi)` at one point `(x, xi)`, `x` and `xi` in `R^dim`.
pub fn stft(f: &Sampled, window: &Sampled, x: &[f64], xi: &[f64]) -> Result<Complex64> {
    f.check_grid(window)?;
    let shifted = window.translate(x);
    let grid = f.grid;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (a, b)) in f.values.iter().zip(&shifted.values).enumerate() {
        let phase: f64 = grid.point(i).iter().zip(xi).map(|(y, w)| y * w).sum();
        acc += a * b.conj() * Complex64::from_polar(1.0, -phase);
    }
    Ok(acc * (grid.step() / (2.0 * PI).sqrt()).powi(grid.dim as i32))
}

/// Checks that lattice positions lie in the grid and frequencies below Nyquist.
pub fn check_lattice_fits(grid: &Grid, lattice: &PhaseLattice) -> Result<()> {
    if lattice.dim() != grid.dim {
        return Err(Error::DimensionMismatch { expected: grid.dim, found: lattice.dim() });
    }
    let pos = lattice.positions.radius as f64 * lattice.theta();
    let freq = lattice.frequencies.radius as f64 * lattice.theta();
    if pos > grid.half_width {
        return Err(Error::OutsideGrid(format!("positions reach {pos}, grid half width {}", grid.half_width)));
    }
    let nyquist = PI / grid.step();
    if freq >= nyquist {
        return Err(Error::OutsideGrid(format!("frequencies reach {freq}, Nyquist limit {nyquist}")));
    }
    Ok(())
}

/// Transform one axis of a row-major array of `shape` with a `(n_out x shape[axis])` table.
fn transform_axis(data: &[Complex64], shape: &[usize], axis: usize, table: &[Complex64], n_out: usize) -> Vec<Complex64> {
    let n_in = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * n_out * inner];
    for o in 0..outer {
        for m in 0..n_out {
            let row = &table[m * n_in..(m + 1) * n_in];
            let dst = &mut out[(o * n_out + m) * inner..(o * n_out + m + 1) * inner];
            for (k, t) in row.iter().enumerate() {
                let src = &data[(o * n_in + k) * inner..(o * n_in + k + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += t * s;
                }
            }
        }
    }
    out
}

/// `int g(y) e^{-i <y, w>} dy` for every `w` in `freqs^dim`, as a Riemann sum.
pub(crate) fn transform_at(grid: &Grid, values: &[Complex64], freqs: &[f64]) -> Vec<Complex64> {
    let axes = vec![grid.coords(); grid.dim];
    transform_on(&axes, values, freqs, grid.cell_volume())
}

/// Riemann sum over the tensor grid `axes` (row-major `values`) with cell volume `cell`.
pub(crate) fn transform_on(axes: &[Vec<f64>], values: &[Complex64], freqs: &[f64], cell: f64) -> Vec<Complex64> {
    let mut shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let mut data = values.to_vec();
    for axis in (0..axes.len()).rev() {
        let table = dft_table(&axes[axis], freqs);
        data = transform_axis(&data, &shape, axis, &table, freqs.len());
        shape[axis] = freqs.len();
    }
    data.iter_mut().for_each(|v| *v *= cell);
    data
}

/// `V_phi f` on a phase lattice.
pub fn stft_lattice(f: &Sampled, window: &Sampled, lattice: &PhaseLattice) -> Result<LatticeSequence> {
    f.check_grid(window)?;
    check_lattice_fits(&f.grid, lattice)?;
    let grid = f.grid;
    let norm = (2.0 * PI).powf(-(grid.dim as f64) / 2.0);
    let freqs = lattice.frequencies.axis();
    let mut seq = LatticeSequence::zeros(*lattice);
    let nf = lattice.frequencies.len();
    for j in 0..lattice.positions.len() {
        let shifted = window.translate(&lattice.positions.point(j));
        let prod: Vec<Complex64> = f.values.iter().zip(&shifted.values).map(|(a, b)| a * b.conj()).collect();
        let row = transform_at(&grid, &prod, &freqs);
        for (k, v) in row.into_iter().enumerate() {
            seq.values[j * nf + k] = v * norm;
        }
    }
    Ok(seq)
}

/// Cross-Wigner distribution
/// `W_{f,g}(x, xi) = (2 pi)^{-1/2} int f(x + y/2) conj(g(x - y/2)) e^{-i y xi} dy`
/// for functions on `R`, sampled on the phase-space grid with the same axis.
pub fn wigner(f: &Sampled, g: &Sampled) -> Result<Sampled> {
    f.check_grid(g)?;
    let grid = f.grid;
    if grid.dim != 1 {
        return Err(Error::Unsupported("Wigner distributions are implemented for d = 1".into()));
    }
    // half-step samples keep the xi-period at 2L instead of L
    let (fine_f, fine_g) = (f.refine(), g.refine());
    let n = grid.n as i64;
    let h = grid.step();
    let xi = grid.coords();
    // W(x, xi) = (2 pi)^{-1/2} h sum_s f(x + s h/2) conj(g(x - s h/2)) e^{-i s h xi}
    let shifts: Vec<i64> = (-(2 * n - 1)..2 * n).collect();
    let table: Vec<Complex64> = xi
        .iter()
        .flat_map(|&w| shifts.iter().map(move |&s| Complex64::from_polar(1.0, -(s as f64) * h * w)))
        .collect();
    let scale = h / (2.0 * PI).sqrt();
    let phase_grid = grid.with_dim(2)?;
    let mut out = Sampled::zeros(phase_grid);
    let mut prod = vec![Complex64::new(0.0, 0.0); shifts.len()];
    let fine_n = 2 * n;
    for k in 0..n {
        for (slot, &s) in prod.iter_mut().zip(&shifts) {
            let (a, b) = (2 * k + s, 2 * k - s);
            *slot = if a >= 0 && a < fine_n && b >= 0 && b < fine_n {
                fine_f.values[a as usize] * fine_g.values[b as usize].conj()
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        for m in 0..grid.n {
            let row = &table[m * shifts.len()..(m + 1) * shifts.len()];
            let v: Complex64 = row.iter().zip(&prod).map(|(t, p)| t * p).sum();
            out.values[k as usize * grid.n + m] = v * scale;
        }
    }
    Ok(out)
}

/// Symplectic STFT `V_Phi a(X, Y) = F_sigma(a conj(Phi(. - X)))(Y)` at one point.
pub fn symplectic_stft(a: &Sampled, window: &Sampled, big_x: &[f64], big_y: &[f64]) -> Result<Complex64> {
    a.check_grid(window)?;
    let grid = a.grid;
    if grid.dim % 2 != 0 {
        return Err(Error::InvalidArgument("symbols live on an even-dimensional phase space".into()));
    }
    let d = grid.dim / 2;
    let shifted = window.translate(big_x);
    let (y, eta) = big_y.split_at(d);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (u, w)) in a.values.iter().zip(&shifted.values).enumerate() {
        let p = grid.point(i);
        let (z, zeta) = p.split_at(d);
        let sigma: f64 = (0..d).map(|k| z[k] * eta[k] - y[k] * zeta[k]).sum();
        acc += u * w.conj() * Complex64::from_polar(1.0, 2.0 * sigma);
    }
    Ok(acc * grid.cell_volume() * PI.powi(-(d as i32)))
}

/// Continuous mixed norm `|| V_Phi a ||_{L^{p,q}}` of the symplectic STFT:
/// `L^p` over the window position `X`, then `L^q` over `Y`, by Riemann sums.
/// Positions are taken every `stride` grid points.
pub fn symplectic_mixed_norm(a: &Sampled, window: &Sampled, pair: ExponentPair, stride: usize) -> Result<f64> {
    Ok(symplectic_mixed_norms(a, window, &[pair], stride)?[0])
}

/// [`symplectic_mixed_norm`] for several exponent pairs from one pass over the positions.
pub fn symplectic_mixed_norms(a: &Sampled, window: &Sampled, pairs: &[ExponentPair], stride: usize) -> Result<Vec<f64>> {
    a.check_grid(window)?;
    let grid = a.grid;
    if grid.dim % 2 != 0 {
        return Err(Error::InvalidArgument("symbols live on an even-dimensional phase space".into()));
    }
    if stride == 0 || grid.n % stride != 0 {
        return Err(Error::InvalidArgument(format!("stride {stride} does not divide {}", grid.n)));
    }
    let d = grid.dim / 2;
    let factor = 2f64.powi(d as i32);
    let mut acc = vec![vec![0.0f64; grid.len()]; pairs.len()];
    let coarse = Grid { dim: grid.dim, n: grid.n / stride, half_width: grid.half_width };
    for c in 0..coarse.len() {
        let steps: Vec<i64> = coarse.multi_index(c).iter().map(|&k| (k * stride) as i64 - grid.n as i64 / 2).collect();
        let shifted = window.shift_indices(&steps);
        let prod: Vec<Complex64> = a.values.iter().zip(&shifted.values).map(|(u, w)| u * w.conj()).collect();
        let spec = fourier_samples(&grid, &prod);
        for (pair, acc) in pairs.iter().zip(acc.iter_mut()) {
            let p = pair.p;
            for (s, v) in acc.iter_mut().zip(&spec) {
                let m = v.norm() * factor;
                if p.is_infinite() {
                    *s = s.max(m);
                } else {
                    *s += m.powf(p.value());
                }
            }
        }
    }
    let measure_x = (grid.step() * stride as f64).powi(grid.dim as i32);
    let measure_y = symplectic_dual(&grid).cell_volume();
    Ok(pairs
        .iter()
        .zip(acc)
        .map(|(pair, acc)| {
            let p = pair.p;
            let inner: Vec<f64> =
                if p.is_infinite() { acc } else { acc.iter().map(|s| (s * measure_x).powf(p.recip())).collect() };
            let outer = lp_norm(&inner, pair.q);
            if pair.q.is_infinite() {
                outer
            } else {
                outer * measure_y.powf(pair.q.recip())
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Grid, center: f64, freq: f64) -> Sampled {
        grid.sample(|x| {
            Complex64::from_polar(PI.powf(-0.25) * (-(x[0] - center).powi(2) / 2.0).exp(), freq * x[0])
        })
    }

    #[test]
    fn fourier_is_unitary() {
        let grid = Grid::new(1, 256, 12.0).unwrap();
        let f = gaussian(&grid, 1.0, 2.0);
        let spec = fourier(&f).unwrap();
        assert!((spec.norm_l2() - f.norm_l2()).abs() < 1e-12);
        let back = inverse_fourier(&spec, &grid).unwrap();
        assert!(back.rel_l2_distance(&f) < 1e-12);
    }

    #[test]
    fn nyquist_violation_is_flagged() {
        let grid = Grid::new(1, 32, 12.0).unwrap();
        let f = gaussian(&grid, 0.0, 6.0);
        assert!(matches!(fourier(&f), Err(Error::Undersampled(_))));
    }

    #[test]
    fn symplectic_fourier_is_an_involution() {
        let grid = Grid::new(2, 64, 8.0).unwrap();
        let a = grid.sample(|x| Complex64::from_polar((-(x[0] * x[0] + 2.0 * x[1] * x[1]) / 2.0).exp(), 0.3 * x[0]));
        let once = symplectic_fourier(&a).unwrap();
        let twice = symplectic_fourier(&once).unwrap();
        assert!(twice.grid.same_as(&grid));
        assert!(twice.rel_l2_distance(&a) < 1e-9);
        assert!((once.norm_l2() - a.norm_l2()).abs() < 1e-10);
    }

    #[test]
    fn symplectic_fourier_gaussian() {
        // F_sigma e^{-|X|^2} = e^{-|X|^2}
        let grid = Grid::new(2, 64, 8.0).unwrap();
        let a = grid.sample(|x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0));
        let out = symplectic_fourier(&a).unwrap();
        let exact = out.grid.sample(|x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0));
        assert!(out.rel_l2_distance(&exact) < 1e-12);
    }

    #[test]
    fn stft_of_gaussian_pair() {
        // V_phi phi(x, xi) = (2 pi)^{-1/2} e^{-(x^2 + xi^2)/4} e^{-i x xi / 2}
        let grid = Grid::new(1, 256, 12.0).unwrap();
        let phi = gaussian(&grid, 0.0, 0.0);
        for (x, xi) in [(0.0, 0.0), (1.3, -0.7), (-2.0, 3.1)] {
            let v = stft(&phi, &phi, &[x], &[xi]).unwrap();
            let exact = Complex64::from_polar((-(x * x + xi * xi) / 4.0).exp() / (2.0 * PI).sqrt(), -x * xi / 2.0);
            assert!((v - exact).norm() < 1e-12, "{v} vs {exact}");
        }
    }

    #[test]
    fn stft_lattice_agrees_with_pointwise() {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let f = gaussian(&grid, 0.5, 1.0);
        let phi = gaussian(&grid, 0.0, 0.0);
        let lattice = PhaseLattice::square(crate::lattice_norms::Lattice::new(0.5, 1, 6).unwrap());
        let seq = stft_lattice(&f, &phi, &lattice).unwrap();
        for (j, iota) in [(0, 0), (3, 7), (12, 1)] {
            let x = lattice.positions.point(j);
            let xi = lattice.frequencies.point(iota);
            let v = stft(&f, &phi, &x, &xi).unwrap();
            assert!((seq.get(j, iota) - v).norm() < 1e-13);
        }
    }

    #[test]
    fn wigner_of_gaussian() {
        // W_{phi,phi}(x, xi) = 2^{1/2} pi^{-1/2} e^{-x^2 - xi^2}
        let grid = Grid::self_dual(1, 128).unwrap();
        let phi = gaussian(&grid, 0.0, 0.0);
        let w = wigner(&phi, &phi).unwrap();
        let exact = w.grid.sample(|p| Complex64::new((2.0 / PI).sqrt() * (-p[0] * p[0] - p[1] * p[1]).exp(), 0.0));
        assert!(w.rel_l2_distance(&exact) < 1e-10);
    }

    #[test]
    fn symplectic_stft_pointwise_matches_norm_routine() {
        let grid = Grid::new(2, 64, 8.0).unwrap();
        let a = grid.sample(|x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0));
        let window = grid.sample(|x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp() / PI, 0.0));
        // window pi^{-1} e^{-|X|^2}: |V a_1| peaks at 1 / (2 pi)
        let v = symplectic_stft(&a, &window, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((v.norm() - 0.5 / PI).abs() < 1e-10);
        let sup = symplectic_mixed_norm(&a, &window, ExponentPair::new(f64::INFINITY, f64::INFINITY).unwrap(), 1).unwrap();
        assert!((sup - 0.5 / PI).abs() < 1e-10);
    }
}
