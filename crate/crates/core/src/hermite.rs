//! Hermite functions, Hermite-coefficient analysis and the sequence-space side of
//! Gelfand-Shilov test functions and distributions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Sampled};
use crate::phase_space::transform_at;

/// Highest order handled by the recurrence.
pub const MAX_ORDER: usize = 60;

/// Orders up to which the explicit polynomial form is used for cross-validation.
pub const RODRIGUES_ORDER: usize = 8;

/// `h_0(x), ..., h_max(x)` by the three-term recurrence
/// `h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}`.
///
/// The Gaussian factor is carried as a separate exponent so that large `|x|` does not underflow
/// before the polynomial growth is applied.
pub fn hermite_functions(max_order: usize, x: f64) -> Result<Vec<f64>> {
    if max_order > MAX_ORDER {
        return Err(Error::OrderTooLarge(max_order));
    }
    let mut out = Vec::with_capacity(max_order + 1);
    let mut log_scale = -x * x / 2.0;
    let (mut prev, mut cur) = (0.0, PI.powf(-0.25));
    out.push(cur * log_scale.exp());
    for k in 0..max_order {
        let next = (2.0 / (k + 1) as f64).sqrt() * x * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev *= 1e-100;
            cur *= 1e-100;
            log_scale += 100.0 * 10f64.ln();
        }
        out.push(cur * log_scale.exp());
    }
    Ok(out)
}

/// `h_alpha(x) = prod_a h_{alpha_a}(x_a)`.
pub fn hermite_function(alpha: &[usize], x: &[f64]) -> Result<f64> {
    if alpha.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: alpha.len(), found: x.len() });
    }
    let mut v = 1.0;
    for (&k, &t) in alpha.iter().zip(x) {
        v *= hermite_functions(k, t)?[k];
    }
    Ok(v)
}

/// `h_k` from the explicit Hermite polynomial, for `k <= RODRIGUES_ORDER`.
pub fn hermite_function_explicit(k: usize, x: f64) -> Result<f64> {
    if k > RODRIGUES_ORDER {
        return Err(Error::OrderTooLarge(k));
    }
    let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
    let poly: f64 = (0..=k / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * (2.0 * x).powi((k - 2 * m) as i32) / (fact(m) * fact(k - 2 * m))
        })
        .sum::<f64>()
        * fact(k);
    let norm = (2f64.powi(k as i32) * fact(k) * PI.sqrt()).sqrt();
    Ok(poly * (-x * x / 2.0).exp() / norm)
}

/// Multi-indices with `|alpha| <= max_order`, graded by `|alpha|` then lexicographic.
pub fn multi_indices(d: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=max_order {
        let mut alpha = vec![0; d];
        push_compositions(&mut out, &mut alpha, 0, total);
    }
    out
}

fn push_compositions(out: &mut Vec<Vec<usize>>, alpha: &mut Vec<usize>, slot: usize, rest: usize) {
    if slot + 1 == alpha.len() {
        alpha[slot] = rest;
        out.push(alpha.clone());
        return;
    }
    for first in (0..=rest).rev() {
        alpha[slot] = first;
        push_compositions(out, alpha, slot + 1, rest - first);
    }
}

/// Coefficients `c_alpha = (f, h_alpha)` for `|alpha| <= max_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteExpansion {
    pub d: usize,
    pub max_order: usize,
    pub indices: Vec<Vec<usize>>,
    pub coefficients: Vec<Complex64>,
}

impl HermiteExpansion {
    pub fn zeros(d: usize, max_order: usize) -> Result<Self> {
        if max_order > MAX_ORDER {
            return Err(Error::OrderTooLarge(max_order));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let indices = multi_indices(d, max_order);
        let coefficients = vec![Complex64::new(0.0, 0.0); indices.len()];
        Ok(HermiteExpansion { d, max_order, indices, coefficients })
    }

    /// Expansion with `c_alpha = coeff(alpha)`.
    pub fn from_fn(d: usize, max_order: usize, coeff: impl Fn(&[usize]) -> Complex64) -> Result<Self> {
        let mut e = Self::zeros(d, max_order)?;
        e.coefficients = e.indices.iter().map(|a| coeff(a)).collect();
        Ok(e)
    }

    pub fn get(&self, alpha: &[usize]) -> Option<Complex64> {
        self.indices.iter().position(|a| a == alpha).map(|i| self.coefficients[i])
    }

    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Coefficients of `f1 (x) f2` from those of the factors, truncated at the larger order.
    pub fn tensor(&self, other: &HermiteExpansion) -> Result<Self> {
        let max_order = self.max_order + other.max_order;
        let mut out = Self::zeros(self.d + other.d, max_order.min(MAX_ORDER))?;
        for (alpha, c) in out.indices.iter().zip(out.coefficients.iter_mut()) {
            let (a1, a2) = alpha.split_at(self.d);
            if let (Some(u), Some(v)) = (self.get(a1), other.get(a2)) {
                *c = u * v;
            }
        }
        Ok(out)
    }
}

/// Per-axis tables `h_k(x_j)`, `k <= max_order`.
fn tables(grid: &Grid, max_order: usize) -> Result<Vec<Vec<f64>>> {
    let coords = grid.coords();
    let columns = coords.iter().map(|&x| hermite_functions(max_order, x)).collect::<Result<Vec<_>>>()?;
    Ok((0..=max_order).map(|k| columns.iter().map(|c| c[k]).collect()).collect())
}

/// Product `h_alpha` on the grid.
fn basis_on_grid(grid: &Grid, table: &[Vec<f64>], alpha: &[usize]) -> Vec<f64> {
    let n = grid.n;
    (0..grid.len())
        .map(|i| {
            let mut rest = i;
            let mut v = 1.0;
            for &k in alpha.iter().rev() {
                v *= table[k][rest % n];
                rest /= n;
            }
            v
        })
        .collect()
}

/// Hermite coefficients of `f` by quadrature on its grid.
pub fn analyze(f: &Sampled, max_order: usize) -> Result<HermiteExpansion> {
    let grid = f.grid;
    let table = tables(&grid, max_order)?;
    let mut e = HermiteExpansion::zeros(grid.dim, max_order)?;
    let cell = grid.cell_volume();
    for (alpha, c) in e.indices.iter().zip(e.coefficients.iter_mut()) {
        let basis = basis_on_grid(&grid, &table, alpha);
        *c = f.values.iter().zip(&basis).map(|(v, b)| v * b).sum::<Complex64>() * cell;
    }
    Ok(e)
}

/// `sum_alpha c_alpha h_alpha` on `grid`.
pub fn synthesize(e: &HermiteExpansion, grid: &Grid) -> Result<Sampled> {
    if grid.dim != e.d {
        return Err(Error::DimensionMismatch { expected: e.d, found: grid.dim });
    }
    let table = tables(grid, e.max_order)?;
    let mut out = Sampled::zeros(*grid);
    for (alpha, c) in e.indices.iter().zip(&e.coefficients) {
        if c.norm() == 0.0 {
            continue;
        }
        for (o, b) in out.values.iter_mut().zip(basis_on_grid(grid, &table, alpha)) {
            *o += c * b;
        }
    }
    Ok(out)
}

/// `(f, phi) = sum_alpha c_alpha conj(d_alpha)` over the common indices.
pub fn pairing(f: &HermiteExpansion, phi: &HermiteExpansion) -> Result<Complex64> {
    if f.d != phi.d {
        return Err(Error::DimensionMismatch { expected: f.d, found: phi.d });
    }
    let (short, long, swap) = if f.max_order <= phi.max_order { (f, phi, false) } else { (phi, f, true) };
    // graded ordering: the shorter index list is a prefix of the longer one
    Ok(short
        .coefficients
        .iter()
        .zip(&long.coefficients)
        .map(|(a, b)| if swap { b * a.conj() } else { a * b.conj() })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub r: f64,
    /// `ln sum_alpha |c_alpha|^2 e^{r |alpha|^{1/(2s)}}`.
    pub log_sum: f64,
    pub sum: f64,
}

/// Weighted sums `sum |c_alpha|^2 e^{r |alpha|^{1/(2s)}}` for each `r`, accumulated in the log domain.
pub fn seq_space_profile(e: &HermiteExpansion, s: f64, r_list: &[f64]) -> Result<Vec<ProfileEntry>> {
    if !(s >= 0.5) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("order parameter s = {s} must be at least 1/2")));
    }
    Ok(r_list
        .iter()
        .map(|&r| {
            let terms: Vec<f64> = e
                .indices
                .iter()
                .zip(&e.coefficients)
                .filter(|(_, c)| c.norm() > 0.0)
                .map(|(alpha, c)| {
                    let len: usize = alpha.iter().sum();
                    2.0 * c.norm().ln() + r * (len as f64).powf(1.0 / (2.0 * s))
                })
                .collect();
            let log_sum = log_sum_exp(&terms);
            ProfileEntry { r, log_sum, sum: log_sum.exp() }
        })
        .collect())
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FubiniReport {
    /// Inner sum over the first variable.
    pub iterated_first: Complex64,
    /// Inner sum over the second variable.
    pub iterated_second: Complex64,
    /// `sum c_alpha conj(d_alpha)` with `c = c(f1) (x) c(f2)`.
    pub hermite: Complex64,
    /// Largest pairwise difference relative to the largest magnitude.
    pub discrepancy: f64,
}

/// `<f1 (x) f2, phi>` computed by iterated quadrature in both orders and by Hermite coefficients.
pub fn fubini_check(f1: &Sampled, f2: &Sampled, phi: &Sampled, max_order: usize, tolerance: f64) -> Result<FubiniReport> {
    f1.check_grid(f2)?;
    if f1.grid.dim != 1 {
        return Err(Error::Unsupported("factors must be functions of one variable".into()));
    }
    let axis = f1.grid;
    if phi.grid.dim != 2 || !phi.grid.same_as(&axis.with_dim(2)?) {
        return Err(Error::GridMismatch("test function must live on the square of the factor grid".into()));
    }
    let n = axis.n;
    let h = axis.step();
    let at = |i: usize, j: usize| phi.values[i * n + j].conj();
    let iterated_first: Complex64 = (0..n)
        .map(|j| f2.values[j] * (0..n).map(|i| f1.values[i] * at(i, j)).sum::<Complex64>() * h)
        .sum::<Complex64>()
        * h;
    let iterated_second: Complex64 = (0..n)
        .map(|i| f1.values[i] * (0..n).map(|j| f2.values[j] * at(i, j)).sum::<Complex64>() * h)
        .sum::<Complex64>()
        * h;
    let half = max_order / 2;
    let tensor = analyze(f1, half)?.tensor(&analyze(f2, half)?)?;
    let hermite = pairing(&tensor, &analyze(phi, max_order)?)?;
    let values = [iterated_first, iterated_second, hermite];
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut discrepancy: f64 = 0.0;
    for a in 0..3 {
        for b in a + 1..3 {
            discrepancy = discrepancy.max((values[a] - values[b]).norm() / scale);
        }
    }
    if discrepancy > tolerance {
        return Err(Error::ToleranceExceeded { what: "tensor pairing".into(), value: discrepancy, tolerance });
    }
    Ok(FubiniReport { iterated_first, iterated_second, hermite, discrepancy })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub s: f64,
    pub c: f64,
    /// `max |u(xi)| e^{-c |xi|^{1/s}}` over the inner half of the samples.
    pub c_fit: f64,
    /// `max |u(xi)| e^{-c |xi|^{1/s}} / c_fit` over all samples.
    pub worst_ratio: f64,
    pub samples: usize,
    pub fitted_bound_ok: bool,
}

/// Checks `|u(xi)| <= C_fit e^{c |xi|^{1/s}}` for `u(xi) = (2 pi)^{-d/2} (f, phi e^{i <., xi>})`.
///
/// `C_fit` is fitted on the samples with `|xi|` at most half the largest sampled `|xi|`, and the
/// bound is then checked at every sample.
pub fn stft_growth_check(f: &HermiteExpansion, phi: &Sampled, s: f64, c: f64, xi_samples: &[f64]) -> Result<GrowthReport> {
    if phi.grid.dim != 1 || f.d != 1 {
        return Err(Error::Unsupported("growth check is implemented for d = 1".into()));
    }
    if !(s > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidArgument("s and c must be positive".into()));
    }
    let fs = synthesize(f, &phi.grid)?;
    let prod: Vec<Complex64> = fs.values.iter().zip(&phi.values).map(|(a, b)| a * b.conj()).collect();
    let u = transform_at(&phi.grid, &prod, xi_samples);
    let reach = xi_samples.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let scaled: Vec<(f64, f64)> = xi_samples
        .iter()
        .zip(&u)
        .map(|(x, v)| (x.abs(), v.norm() / (2.0 * PI).sqrt() * (-c * x.abs().powf(1.0 / s)).exp()))
        .collect();
    let c_fit = scaled.iter().filter(|(x, _)| *x <= reach / 2.0).map(|p| p.1).fold(0.0, f64::max);
    let worst = scaled.iter().map(|p| p.1).fold(0.0, f64::max);
    let worst_ratio = if c_fit > 0.0 { worst / c_fit } else if worst == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(GrowthReport {
        s,
        c,
        c_fit,
        worst_ratio,
        samples: xi_samples.len(),
        fitted_bound_ok: worst_ratio <= 1.0 + 1e-12,
    })
}

/// Default grid for expansions up to order 40.
pub fn default_grid() -> Grid {
    Grid::new(1, 256, 12.0).expect("valid grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrence_matches_explicit_form() {
        for x in [-3.5, -1.0, 0.0, 0.3, 2.2, 5.0] {
            let rec = hermite_functions(RODRIGUES_ORDER, x).unwrap();
            for k in 0..=RODRIGUES_ORDER {
                let ex = hermite_function_explicit(k, x).unwrap();
                assert!((rec[k] - ex).abs() < 1e-13 * (1.0 + ex.abs()), "k = {k}, x = {x}");
            }
        }
        assert!((hermite_functions(0, 0.0).unwrap()[0] - PI.powf(-0.25)).abs() < 1e-16);
    }

    #[test]
    fn far_tail_does_not_underflow_early() {
        let h = hermite_functions(MAX_ORDER, 30.0).unwrap();
        assert!(h[MAX_ORDER] > 0.0 && h[MAX_ORDER].is_finite());
        assert!(matches!(hermite_functions(MAX_ORDER + 1, 0.0), Err(Error::OrderTooLarge(_))));
    }

    #[test]
    fn graded_indices() {
        let idx = multi_indices(2, 2);
        assert_eq!(idx, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(3, 4).len(), 35);
    }

    #[test]
    fn analysis_of_basis_function() {
        let g = default_grid();
        let f = g.sample(|x| Complex64::new(hermite_function(&[3], x).unwrap(), 0.0));
        let e = analyze(&f, 20).unwrap();
        for (alpha, c) in e.indices.iter().zip(&e.coefficients) {
            let expect = if alpha[0] == 3 { 1.0 } else { 0.0 };
            assert!((c - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn profile_is_monotone_in_r() {
        let g = default_grid();
        let f = g.sample(|x| Complex64::new((-x[0] * x[0] / 4.0).exp(), 0.0));
        let e = analyze(&f, 40).unwrap();
        let prof = seq_space_profile(&e, 0.5, &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert!(prof.windows(2).all(|w| w[1].log_sum >= w[0].log_sum));
        assert!((prof[0].sum - e.energy()).abs() < 1e-12 * e.energy());
    }
}
