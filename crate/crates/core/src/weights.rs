//! Positive weight functions, moderateness checks and the three-weight
//! conditions used by the composition estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// A positive function on `R^n`. Serialized as `{"family": "polynomial", "s": 2.0}` etc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Weight {
    ConstantOne,
    /// `(1 + |x|^2)^{s/2}`
    Polynomial { s: f64 },
    /// `e^{r |x|}`
    Exponential { r: f64 },
    /// Multilinear interpolation of positive samples, clamped outside the grid.
    Tabulated { grid: Grid, values: Vec<f64> },
    /// `x -> inner(M x)` with `M` given row by row.
    Linear { inner: Box<Weight>, map: Vec<Vec<f64>> },
    /// `numerator(x) / denominator(x)`
    Quotient { numerator: Box<Weight>, denominator: Box<Weight> },
}

fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|t| t * t).sum::<f64>().sqrt()
}

impl Weight {
    pub fn polynomial(s: f64) -> Self {
        Weight::Polynomial { s }
    }

    pub fn exponential(r: f64) -> Self {
        Weight::Exponential { r }
    }

    pub fn linear(inner: Weight, map: Vec<Vec<f64>>) -> Self {
        Weight::Linear { inner: Box::new(inner), map }
    }

    pub fn quotient(numerator: Weight, denominator: Weight) -> Self {
        Weight::Quotient { numerator: Box::new(numerator), denominator: Box::new(denominator) }
    }

    /// `(X, Y) -> self(X - Y)` for `X, Y` in `R^dim`.
    pub fn of_difference(self, dim: usize) -> Self {
        Weight::linear(self, stacked_map(dim, 1.0, -1.0))
    }

    /// `(X, Y) -> self(X + Y)` for `X, Y` in `R^dim`.
    pub fn of_sum(self, dim: usize) -> Self {
        Weight::linear(self, stacked_map(dim, 1.0, 1.0))
    }

    /// Acts on the first `dim` of `total` coordinates.
    pub fn on_leading(self, dim: usize, total: usize) -> Self {
        let map = (0..dim).map(|i| (0..total).map(|k| if k == i { 1.0 } else { 0.0 }).collect()).collect();
        Weight::linear(self, map)
    }

    pub fn tabulated(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::NonPositiveWeight(grid.point(i)));
        }
        Ok(Weight::Tabulated { grid, values })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Weight::ConstantOne => 1.0,
            Weight::Polynomial { s } => (1.0 + x.iter().map(|t| t * t).sum::<f64>()).powf(s / 2.0),
            Weight::Exponential { r } => (r * euclid(x)).exp(),
            Weight::Tabulated { grid, values } => multilinear(grid, values, x),
            Weight::Linear { inner, map } => {
                let y: Vec<f64> = map.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
                inner.eval(&y)
            }
            Weight::Quotient { numerator, denominator } => numerator.eval(x) / denominator.eval(x),
        }
    }

    pub fn try_eval(&self, x: &[f64]) -> Result<f64> {
        let v = self.eval(x);
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::NonPositiveWeight(x.to_vec()))
        }
    }

    /// Submultiplicative `v` and constant `C` with `self(x + y) <= C self(x) v(y)`,
    /// when known in closed form.
    pub fn moderating_weight(&self) -> Option<(Weight, f64)> {
        match self {
            Weight::ConstantOne => Some((Weight::ConstantOne, 1.0)),
            Weight::Polynomial { s } => Some((Weight::polynomial(s.abs()), 2f64.powf(s.abs() / 2.0))),
            Weight::Exponential { r } => Some((Weight::exponential(r.abs()), 1.0)),
            _ => None,
        }
    }
}

fn stacked_map(dim: usize, a: f64, b: f64) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            (0..2 * dim)
                .map(|k| match k {
                    k if k == i => a,
                    k if k == i + dim => b,
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}

fn multilinear(grid: &Grid, values: &[f64], x: &[f64]) -> f64 {
    let h = grid.step();
    let mut base = Vec::with_capacity(grid.dim);
    let mut frac = Vec::with_capacity(grid.dim);
    for &t in x.iter().take(grid.dim) {
        let r = ((t + grid.half_width) / h).clamp(0.0, (grid.n - 1) as f64);
        let k = (r.floor() as usize).min(grid.n - 2);
        base.push(k);
        frac.push(r - k as f64);
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << grid.dim) {
        let mut idx = Vec::with_capacity(grid.dim);
        let mut w = 1.0;
        for a in 0..grid.dim {
            let up = (corner >> a) & 1 == 1;
            idx.push(base[a] + up as usize);
            w *= if up { frac[a] } else { 1.0 - frac[a] };
        }
        if w != 0.0 {
            acc += w * values[grid.flat_index(&idx)];
        }
    }
    acc
}

/// Scrambled Sobol points in `[-half_box, half_box]^dim`.
pub fn sobol_points(dim: usize, count: usize, seed: u32, half_box: f64) -> Vec<Vec<f64>> {
    (0..count as u32)
        .map(|i| {
            (0..dim as u32)
                .map(|d| (2.0 * sobol_burley::sample(i, d, seed) as f64 - 1.0) * half_box)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub max_ratio: f64,
    pub n_samples: usize,
    #[serde(rename = "box")]
    pub half_box: f64,
    /// Sample at which the maximum was attained.
    pub witness: Vec<f64>,
}

impl WeightReport {
    fn collect(samples: &[Vec<f64>], half_box: f64, ratio: impl Fn(&[f64]) -> Result<f64>) -> Result<Self> {
        let mut report = WeightReport { max_ratio: 0.0, n_samples: samples.len(), half_box, witness: vec![] };
        for s in samples {
            let r = ratio(s)?;
            if r > report.max_ratio {
                report.max_ratio = r;
                report.witness = s.clone();
            }
        }
        Ok(report)
    }
}

/// Maximum of `omega(x + y) / (omega(x) v(y))` over sampled `x, y` in `R^dim`.
pub fn check_moderate(
    omega: &Weight,
    v: &Weight,
    dim: usize,
    half_box: f64,
    n_samples: usize,
    seed: u32,
) -> Result<WeightReport> {
    let samples = sobol_points(2 * dim, n_samples, seed, half_box);
    WeightReport::collect(&samples, half_box, |s| {
        let (x, y) = s.split_at(dim);
        let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        Ok(omega.try_eval(&sum)? / (omega.try_eval(x)? * v.try_eval(y)?))
    })
}

/// Bounds `lower <= omega(x) e^{r|x|}` and `omega(x) e^{-r|x|} <= upper` over samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn exponential_bounds(omega: &Weight, r: f64, dim: usize, half_box: f64, n_samples: usize, seed: u32) -> Result<ExpBounds> {
    let mut b = ExpBounds { lower: f64::INFINITY, upper: 0.0 };
    for x in sobol_points(dim, n_samples, seed, half_box) {
        let w = omega.try_eval(&x)?;
        let e = (r * euclid(&x)).exp();
        b.lower = b.lower.min(w * e);
        b.upper = b.upper.max(w / e);
    }
    Ok(b)
}

/// `T_A(X, Y) = (y + A(x - y), xi + A^T(eta - xi), eta - xi, x - y)` for
/// `X = (x, xi)`, `Y = (y, eta)` in `R^{2d}`; `a` is `d x d` row-major.
pub fn t_map(a: &[f64], d: usize, big_x: &[f64], big_y: &[f64]) -> Vec<f64> {
    let (x, xi) = big_x.split_at(d);
    let (y, eta) = big_y.split_at(d);
    let mut out = vec![0.0; 4 * d];
    for i in 0..d {
        let ax: f64 = (0..d).map(|k| a[i * d + k] * (x[k] - y[k])).sum();
        let at: f64 = (0..d).map(|k| a[k * d + i] * (eta[k] - xi[k])).sum();
        out[i] = y[i] + ax;
        out[d + i] = xi[i] + at;
        out[2 * d + i] = eta[i] - xi[i];
        out[3 * d + i] = x[i] - y[i];
    }
    out
}

/// Maximum over sampled `X, Y, Z` of
/// `omega0(T_A(Z, X)) / (omega1(T_A(Y, X)) omega2(T_A(Z, Y)))`.
#[allow(clippy::too_many_arguments)]
pub fn check_weight_condition(
    a: &[f64],
    d: usize,
    omegas: [&Weight; 3],
    half_box: f64,
    n_samples: usize,
    seed: u32,
) -> Result<WeightReport> {
    if a.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: a.len() });
    }
    let samples = sobol_points(6 * d, n_samples, seed, half_box);
    WeightReport::collect(&samples, half_box, |s| {
        let (x, rest) = s.split_at(2 * d);
        let (y, z) = rest.split_at(2 * d);
        let num = omegas[0].try_eval(&t_map(a, d, z, x))?;
        let den = omegas[1].try_eval(&t_map(a, d, y, x))? * omegas[2].try_eval(&t_map(a, d, z, y))?;
        Ok(num / den)
    })
}

/// Maximum over sampled `X, Y, Z` of
/// `omega0(Z + X, Z - X) / (omega1(Y + X, Y - X) omega2(Z + Y, Z - Y))`.
pub fn check_weyl_condition(d: usize, omegas: [&Weight; 3], half_box: f64, n_samples: usize, seed: u32) -> Result<WeightReport> {
    let samples = sobol_points(6 * d, n_samples, seed, half_box);
    let pair = |u: &[f64], v: &[f64]| -> Vec<f64> {
        u.iter().zip(v).map(|(a, b)| a + b).chain(u.iter().zip(v).map(|(a, b)| a - b)).collect()
    };
    WeightReport::collect(&samples, half_box, |s| {
        let (x, rest) = s.split_at(2 * d);
        let (y, z) = rest.split_at(2 * d);
        let num = omegas[0].try_eval(&pair(z, x))?;
        let den = omegas[1].try_eval(&pair(y, x))? * omegas[2].try_eval(&pair(z, y))?;
        Ok(num / den)
    })
}

/// Weights built from three weights `t0, t1, t2` on `R^{2d}`:
/// `omega0(X, Y) = t2(X - Y) / t0(X + Y)`, `omega1 = t2(X - Y) / t1(X + Y)`,
/// `omega2 = t1(X - Y) / t0(X + Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredWeightTriple {
    pub d: usize,
    pub t0: Weight,
    pub t1: Weight,
    pub t2: Weight,
}

impl StructuredWeightTriple {
    /// The three weights in symplectic coordinates `(X, Y)`.
    pub fn symplectic_weights(&self) -> [Weight; 3] {
        let n = 2 * self.d;
        let q = |num: &Weight, den: &Weight| {
            Weight::quotient(num.clone().of_difference(n), den.clone().of_sum(n))
        };
        [q(&self.t2, &self.t0), q(&self.t2, &self.t1), q(&self.t1, &self.t0)]
    }

    /// The same weights in the coordinates of the operator calculus,
    /// `w(x, xi, u, v) = omega(x, xi, v / 2, -u / 2)`, as taken by [`check_weight_condition`].
    pub fn calculus_weights(&self) -> [Weight; 3] {
        let d = self.d;
        let n = 4 * d;
        let mut map = vec![vec![0.0; n]; n];
        for i in 0..2 * d {
            map[i][i] = 1.0;
        }
        for i in 0..d {
            map[2 * d + i][3 * d + i] = 0.5;
            map[3 * d + i][2 * d + i] = -0.5;
        }
        self.symplectic_weights().map(|w| Weight::linear(w, map.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let w: Weight = serde_json::from_str(r#"{"family": "polynomial", "s": 2.0}"#).unwrap();
        assert_eq!(w, Weight::polynomial(2.0));
        let back = serde_json::to_string(&Weight::ConstantOne).unwrap();
        assert_eq!(back, r#"{"family":"constant_one"}"#);
    }

    #[test]
    fn polynomial_is_moderate_with_peetre_constant() {
        for s in [-3.0, 2.0, 4.5] {
            let w = Weight::polynomial(s);
            let (v, c) = w.moderating_weight().unwrap();
            let r = check_moderate(&w, &v, 2, 10.0, 4000, 3).unwrap();
            assert!(r.max_ratio <= c * (1.0 + 1e-12), "s={s}: {}", r.max_ratio);
        }
    }

    #[test]
    fn exponential_is_submultiplicative() {
        let w = Weight::exponential(0.7);
        let r = check_moderate(&w, &w, 2, 10.0, 4000, 5).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let grid = Grid::new(1, 4, 2.0).unwrap();
        let w = Weight::tabulated(grid, vec![1.0, 2.0, 3.0, 5.0]).unwrap();
        assert!((w.eval(&[-1.5]) - 1.5).abs() < 1e-15);
        assert!((w.eval(&[10.0]) - 5.0).abs() < 1e-15);
        assert!(Weight::tabulated(grid, vec![1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn weyl_condition_is_identity_for_structured_triple() {
        let t = StructuredWeightTriple {
            d: 1,
            t0: Weight::polynomial(1.5),
            t1: Weight::exponential(0.3),
            t2: Weight::polynomial(-2.0),
        };
        let w = t.symplectic_weights();
        let r = check_weyl_condition(1, [&w[0], &w[1], &w[2]], 5.0, 2000, 1).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_map_weyl_case() {
        let big_x = [1.0, 2.0];
        let big_y = [3.0, -1.0];
        let t = t_map(&[0.5], 1, &big_x, &big_y);
        assert_eq!(t, vec![2.0, 0.5, -3.0, -2.0]);
    }
}
