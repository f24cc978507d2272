//! Uniform centered grids and sampled complex fields.
//!
//! A grid covers `[-L, L)^dim` with `n` points per axis, `x_k = -L + k h`,
//! `h = 2L / n`. Values are stored row-major with the last axis contiguous.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if dim == 0 || dim > 4 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=4")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("{n} points per axis is not a power of two >= 4")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width {half_width}")));
        }
        Ok(Grid { dim, n, half_width })
    }

    /// Grid whose Fourier dual has the same points: `L^2 = pi n / 2`.
    pub fn self_dual(dim: usize, n: usize) -> Result<Self> {
        Grid::new(dim, n, (PI * n as f64 / 2.0).sqrt())
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.step().powi(self.dim as i32)
    }

    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.step()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.coord(k)).collect()
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Grid::new(dim, self.n, self.half_width)
    }

    /// Frequency grid produced by the discrete Fourier transform: spacing `pi / L`.
    pub fn dual(&self) -> Grid {
        Grid { dim: self.dim, n: self.n, half_width: PI / self.step() }
    }

    pub fn is_self_dual(&self) -> bool {
        (self.dual().half_width - self.half_width).abs() < 1e-12 * self.half_width
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.n == other.n
            && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).into_iter().map(|k| self.coord(k)).collect()
    }

    /// Index of the grid point nearest to `x` along one axis, if inside.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let k = ((x + self.half_width) / self.step()).round();
        (k >= 0.0 && k < self.n as f64).then_some(k as usize)
    }

    /// `Some(m)` when `shift` is (numerically) `m` grid steps.
    pub fn whole_steps(&self, shift: f64) -> Option<i64> {
        let r = shift / self.step();
        ((r - r.round()).abs() < 1e-9).then_some(r.round() as i64)
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> Complex64) -> Sampled {
        let mut point = vec![0.0; self.dim];
        let values = (0..self.len())
            .map(|flat| {
                let mut rest = flat;
                for a in (0..self.dim).rev() {
                    point[a] = self.coord(rest % self.n);
                    rest /= self.n;
                }
                f(&point)
            })
            .collect();
        Sampled { grid: *self, values }
    }
}

/// Complex samples of a function, window or symbol on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl Sampled {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Sampled { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Sampled { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn check_grid(&self, other: &Sampled) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    /// `(f, g) = int f conj(g)`.
    pub fn inner(&self, other: &Sampled) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        s * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Sampled {
        self.map(|v| v.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Sampled {
        Sampled { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Sampled {
        self.map(|v| v * c)
    }

    pub fn zip_with(&self, other: &Sampled, f: impl Fn(Complex64, Complex64) -> Complex64) -> Sampled {
        Sampled {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Sampled) -> Sampled {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Sampled) -> Sampled {
        self.zip_with(other, |a, b| a - b)
    }

    /// Relative L2 distance `||self - other|| / ||other||`.
    pub fn rel_l2_distance(&self, other: &Sampled) -> f64 {
        let diff: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        let base: f64 = other.values.iter().map(|b| b.norm_sqr()).sum();
        (diff / base).sqrt()
    }

    /// Largest magnitude on the outermost layer of grid points, relative to the maximum.
    pub fn boundary_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let n = self.grid.n;
        let edge = (0..self.values.len())
            .filter(|&i| self.grid.multi_index(i).iter().any(|&k| k == 0 || k == n - 1))
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max);
        edge / max
    }

    /// `x -> e^{i <x, freq>} f(x)`.
    pub fn modulate(&self, freq: &[f64]) -> Sampled {
        let grid = self.grid;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let phase: f64 = grid.point(i).iter().zip(freq).map(|(x, w)| x * w).sum();
                v * Complex64::from_polar(1.0, phase)
            })
            .collect();
        Sampled { grid, values }
    }

    /// `x -> f(x - shift)`. Whole-step shifts move samples (zero fill);
    /// fractional shifts use a spectral phase ramp.
    pub fn translate(&self, shift: &[f64]) -> Sampled {
        let steps: Option<Vec<i64>> = shift.iter().map(|&s| self.grid.whole_steps(s)).collect();
        match steps {
            Some(steps) => self.shift_indices(&steps),
            None => {
                let grid = self.grid;
                let n = grid.n;
                let h = grid.step();
                let dual = grid.dual();
                let (lo, hi) = (-grid.half_width, grid.half_width);
                // per-axis phase ramps and masks of samples whose source stays on the grid
                let ramps: Vec<Vec<Complex64>> = shift
                    .iter()
                    .map(|s| (0..n).map(|m| Complex64::from_polar(1.0, -dual.coord(m) * s)).collect())
                    .collect();
                let inside: Vec<Vec<bool>> = shift
                    .iter()
                    .map(|s| {
                        (0..n)
                            .map(|k| {
                                let src = grid.coord(k) - s;
                                src >= lo - 0.5 * h && src <= hi - 0.5 * h
                            })
                            .collect()
                    })
                    .collect();
                let mut spec = fourier_samples(&grid, &self.values);
                for (i, v) in spec.iter_mut().enumerate() {
                    let mut rest = i;
                    for ramp in ramps.iter().rev() {
                        *v *= ramp[rest % n];
                        rest /= n;
                    }
                }
                let mut values = inverse_fourier_samples(&grid, &spec);
                for (i, v) in values.iter_mut().enumerate() {
                    let mut rest = i;
                    for mask in inside.iter().rev() {
                        if !mask[rest % n] {
                            *v = Complex64::new(0.0, 0.0);
                            break;
                        }
                        rest /= n;
                    }
                }
                Sampled { grid, values }
            }
        }
    }

    /// Band-limited resampling on the grid with twice as many points per axis.
    pub fn refine(&self) -> Sampled {
        let grid = self.grid;
        let fine = Grid { dim: grid.dim, n: 2 * grid.n, half_width: grid.half_width };
        let spec = fourier_samples(&grid, &self.values);
        let mut padded = vec![Complex64::new(0.0, 0.0); fine.len()];
        let offset = grid.n / 2;
        for (i, v) in spec.iter().enumerate() {
            let idx: Vec<usize> = grid.multi_index(i).into_iter().map(|m| m + offset).collect();
            padded[fine.flat_index(&idx)] = *v;
        }
        Sampled { grid: fine, values: inverse_fourier_samples(&fine, &padded) }
    }

    pub fn shift_indices(&self, steps: &[i64]) -> Sampled {
        let grid = self.grid;
        let n = grid.n as i64;
        let mut out = Sampled::zeros(grid);
        for (i, v) in self.values.iter().enumerate() {
            let idx = grid.multi_index(i);
            let mut target = Vec::with_capacity(grid.dim);
            for (k, s) in idx.iter().zip(steps) {
                let t = *k as i64 + s;
                if t < 0 || t >= n {
                    break;
                }
                target.push(t as usize);
            }
            if target.len() == grid.dim {
                out.values[grid.flat_index(&target)] = *v;
            }
        }
        out
    }
}

/// Trigonometric (band-limited) interpolation of a sampled field.
pub struct Interpolator {
    grid: Grid,
    spectrum: Vec<Complex64>,
}

impl Interpolator {
    pub fn new(field: &Sampled) -> Self {
        Interpolator { grid: field.grid, spectrum: fourier_samples(&field.grid, &field.values) }
    }

    pub fn eval(&self, point: &[f64]) -> Complex64 {
        let dual = self.grid.dual();
        let n = self.grid.n;
        // per-axis exponentials, the Nyquist bin split symmetrically
        let tables: Vec<Vec<Complex64>> = point
            .iter()
            .map(|&x| {
                (0..n)
                    .map(|m| {
                        let w = dual.coord(m);
                        if m == 0 {
                            Complex64::new((w * x).cos(), 0.0)
                        } else {
                            Complex64::from_polar(1.0, w * x)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, s) in self.spectrum.iter().enumerate() {
            let idx = self.grid.multi_index(i);
            let mut e = *s;
            for (a, &m) in idx.iter().enumerate() {
                e *= tables[a][m];
            }
            acc += e;
        }
        let scale = (dual.step() / (2.0 * PI).sqrt()).powi(self.grid.dim as i32);
        acc * scale
    }
}

fn fft_along_axes(values: &mut [Complex64], n: usize, dim: usize, fft: &dyn Fft<f64>) {
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let total = values.len();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, l) in line.iter_mut().enumerate() {
                    *l = values[base + k * stride];
                }
                fft.process(&mut line);
                for (k, l) in line.iter().enumerate() {
                    values[base + k * stride] = *l;
                }
            }
        }
    }
}

fn parity_sign(grid: &Grid, flat: usize) -> f64 {
    let (mut rest, mut s) = (flat, 0);
    for _ in 0..grid.dim {
        s += rest % grid.n;
        rest /= grid.n;
    }
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unitary Fourier transform `(2 pi)^{-dim/2} int f(x) e^{-i x xi} dx` of samples,
/// returned on `grid.dual()`.
pub fn fourier_samples(grid: &Grid, values: &[Complex64]) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(grid.n);
    let mut out: Vec<Complex64> =
        values.iter().enumerate().map(|(i, v)| v * parity_sign(grid, i)).collect();
    fft_along_axes(&mut out, grid.n, grid.dim, fft.as_ref());
    // (-1)^{m - n/2} per axis equals (-1)^m because n/2 is even
    let scale = (grid.step() / (2.0 * PI).sqrt()).powi(grid.dim as i32);
    for (i, v) in out.iter_mut().enumerate() {
        *v *= scale * parity_sign(grid, i);
    }
    out
}

/// Inverse of [`fourier_samples`]: takes values on `grid.dual()`, returns values on `grid`.
pub fn inverse_fourier_samples(grid: &Grid, spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(grid.n);
    let mut out: Vec<Complex64> =
        spectrum.iter().enumerate().map(|(i, v)| v * parity_sign(grid, i)).collect();
    fft_along_axes(&mut out, grid.n, grid.dim, fft.as_ref());
    let scale = (grid.dual().step() / (2.0 * PI).sqrt()).powi(grid.dim as i32);
    for (i, v) in out.iter_mut().enumerate() {
        *v *= scale * parity_sign(grid, i);
    }
    out
}

/// Matrix `E[m][k] = e^{-i t_k w_m}` used for direct sums at arbitrary frequencies.
pub fn dft_table(coords: &[f64], freqs: &[f64]) -> Vec<Complex64> {
    let mut table = Vec::with_capacity(coords.len() * freqs.len());
    for &w in freqs {
        for &t in coords {
            table.push(Complex64::from_polar(1.0, -t * w));
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(x: &[f64]) -> Complex64 {
        Complex64::new((-x.iter().map(|t| t * t).sum::<f64>() / 2.0).exp(), 0.0)
    }

    #[test]
    fn gaussian_is_fixed_by_fourier() {
        let grid = Grid::new(2, 64, 10.0).unwrap();
        let f = grid.sample(gauss);
        let spec = fourier_samples(&grid, &f.values);
        let expected = grid.dual().sample(gauss);
        for (a, b) in spec.iter().zip(&expected.values) {
            assert!((a - b).norm() < 1e-12);
        }
        let back = inverse_fourier_samples(&grid, &spec);
        for (a, b) in back.iter().zip(&f.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shifted_gaussian_fourier_phase() {
        let grid = Grid::new(1, 128, 12.0).unwrap();
        let f = grid.sample(|x| gauss(&[x[0] - 1.3]));
        let spec = fourier_samples(&grid, &f.values);
        let dual = grid.dual();
        for (m, s) in spec.iter().enumerate() {
            let w = dual.coord(m);
            let exact = Complex64::from_polar((-w * w / 2.0).exp(), -1.3 * w);
            assert!((s - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn fractional_translation_is_spectral() {
        let grid = Grid::new(1, 128, 12.0).unwrap();
        let f = grid.sample(gauss);
        let moved = f.translate(&[0.37]);
        let exact = grid.sample(|x| gauss(&[x[0] - 0.37]));
        assert!(moved.rel_l2_distance(&exact) < 1e-12);
        let whole = f.translate(&[2.0 * grid.step()]);
        let exact = grid.sample(|x| gauss(&[x[0] - 2.0 * grid.step()]));
        assert!(whole.rel_l2_distance(&exact) < 1e-14);
    }

    #[test]
    fn interpolation_off_grid() {
        let grid = Grid::new(2, 64, 10.0).unwrap();
        let f = grid.sample(|x| gauss(x) * Complex64::from_polar(1.0, 0.5 * x[0]));
        let interp = Interpolator::new(&f);
        let p = [0.3141, -1.2];
        let exact = gauss(&p) * Complex64::from_polar(1.0, 0.5 * p[0]);
        assert!((interp.eval(&p) - exact).norm() < 1e-12);
    }

    #[test]
    fn self_dual_grid() {
        let g = Grid::self_dual(1, 128).unwrap();
        assert!(g.is_self_dual());
        assert!((g.step() - PI / g.half_width).abs() < 1e-14);
    }
}
