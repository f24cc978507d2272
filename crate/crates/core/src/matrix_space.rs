//! Matrices indexed by a truncated lattice and the mixed norms
//! `||A||_{U^{p,q}_{(omega)}}`: for each offset `k`, the `l^p` norm over `j` of
//! `A(j, j - k) omega(j, j - k)`, followed by the `l^q` norm over `k`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Sampled;
use crate::lattice_norms::{lp_norm, Exponent, ExponentPair, Lattice, PhaseLattice};
use crate::phase_space::stft_lattice;
use crate::weights::Weight;

/// Dense complex matrix whose rows and columns are the points of `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborMatrix {
    pub index: Lattice,
    pub values: Vec<Complex64>,
}

impl GaborMatrix {
    pub fn new(index: Lattice, values: Vec<Complex64>) -> Result<Self> {
        let n = index.len();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: values.len() });
        }
        Ok(GaborMatrix { index, values })
    }

    pub fn zeros(index: Lattice) -> Self {
        let n = index.len();
        GaborMatrix { index, values: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn size(&self) -> usize {
        self.index.len()
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.size() + k]
    }

    pub fn set(&mut self, j: usize, k: usize, v: Complex64) {
        let n = self.size();
        self.values[j * n + k] = v;
    }

    /// Entrywise absolute values.
    pub fn abs(&self) -> GaborMatrix {
        GaborMatrix {
            index: self.index,
            values: self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect(),
        }
    }

    pub fn apply(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.size();
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
        Ok(self.values.chunks(n).map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum()).collect())
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &GaborMatrix) -> Result<GaborMatrix> {
        if self.index != other.index {
            return Err(Error::InvalidArgument("matrices are indexed by different lattices".into()));
        }
        let n = self.size();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for (row_out, row_a) in out.chunks_mut(n).zip(self.values.chunks(n)) {
            for (a, row_b) in row_a.iter().zip(other.values.chunks(n)) {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for (o, b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        Ok(GaborMatrix { index: self.index, values: out })
    }

    /// Offset profile `h(k) = || A(., . - k) omega(., . - k) ||_{l^p}` keyed by integer offset.
    pub fn offset_profile(&self, p: crate::lattice_norms::Exponent, weight: Option<&Weight>) -> Result<BTreeMap<Vec<i64>, f64>> {
        let n = self.size();
        let mut diagonals: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
        let ints: Vec<Vec<i64>> = (0..n).map(|i| self.index.int_point(i)).collect();
        for j in 0..n {
            for l in 0..n {
                let v = self.values[j * n + l];
                let mut m = v.norm();
                if m == 0.0 {
                    continue;
                }
                if let Some(w) = weight {
                    let mut at = self.index.point(j);
                    at.extend(self.index.point(l));
                    m *= w.try_eval(&at)?;
                }
                let offset: Vec<i64> = ints[j].iter().zip(&ints[l]).map(|(a, b)| a - b).collect();
                diagonals.entry(offset).or_default().push(m);
            }
        }
        Ok(diagonals.into_iter().map(|(k, v)| (k, lp_norm(&v, p))).collect())
    }

    /// `||A||_{U^{p,q}_{(omega)}}`.
    pub fn u_norm(&self, pair: ExponentPair, weight: Option<&Weight>) -> Result<f64> {
        let profile = self.offset_profile(pair.p, weight)?;
        let h: Vec<f64> = profile.into_values().collect();
        Ok(lp_norm(&h, pair.q))
    }
}

/// Which sufficient condition on `(q0, q1, q2)` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentCase {
    /// `q1, q2 <= q0 <= min(1, p0)`
    InnerBelowOne,
    /// `min(1, p0) <= q1, q2 <= q0` and `1/min(1, p0) + 1/q0 <= 1/q1 + 1/q2`
    HolderYoung,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub e0: ExponentPair,
    pub e1: ExponentPair,
    pub e2: ExponentPair,
}

const SLACK: f64 = 1e-12;

impl ExponentTriple {
    pub fn new(e0: ExponentPair, e1: ExponentPair, e2: ExponentPair) -> Self {
        ExponentTriple { e0, e1, e2 }
    }

    /// `1/p0 <= 1/p1 + 1/p2`.
    pub fn p_condition(&self) -> bool {
        self.e0.p.recip() <= self.e1.p.recip() + self.e2.p.recip() + SLACK
    }

    /// The first sufficient `q` condition that holds, if any.
    pub fn q_case(&self) -> Option<ExponentCase> {
        let (q0, q1, q2) = (self.e0.q.value(), self.e1.q.value(), self.e2.q.value());
        let r = self.e0.p.value().min(1.0);
        let le = |a: f64, b: f64| a <= b * (1.0 + SLACK);
        if le(q1, q0) && le(q2, q0) && le(q0, r) {
            return Some(ExponentCase::InnerBelowOne);
        }
        if le(r, q1) && le(r, q2) && le(q1, q0) && le(q2, q0) {
            let lhs = 1.0 / r + self.e0.q.recip();
            if lhs <= self.e1.q.recip() + self.e2.q.recip() + SLACK {
                return Some(ExponentCase::HolderYoung);
            }
        }
        None
    }

    pub fn sufficient(&self) -> Option<ExponentCase> {
        if self.p_condition() {
            self.q_case()
        } else {
            None
        }
    }

    /// Power-law exponents of the Gaussian ratio as `lambda -> 0` and `lambda -> inf`.
    /// A bounded ratio needs the first `>= 0` and the second `<= 0`.
    pub fn gaussian_slopes(&self) -> (f64, f64) {
        let small = self.e1.p.recip() + self.e2.p.recip() - self.e0.p.recip();
        let large = self.e0.p.recip() - self.e1.q.recip() - self.e2.q.recip();
        (small, large)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub case: Option<ExponentCase>,
    /// Largest sampled `omega0(x, z) / (omega1(x, y) omega2(y, z))` over index triples.
    pub weight_ratio: f64,
}

/// Compares `||A1 A2||_{U0}` with `||A1||_{U1} ||A2||_{U2}`.
pub fn check_composition_estimate(
    a1: &GaborMatrix,
    a2: &GaborMatrix,
    exps: ExponentTriple,
    weights: Option<[&Weight; 3]>,
) -> Result<CompositionReport> {
    let w = |i: usize| weights.map(|ws| ws[i]);
    let lhs = a1.compose(a2)?.u_norm(exps.e0, w(0))?;
    let rhs = a1.u_norm(exps.e1, w(1))? * a2.u_norm(exps.e2, w(2))?;
    let weight_ratio = match weights {
        None => 1.0,
        Some(ws) => index_weight_ratio(&a1.index, ws)?,
    };
    let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(CompositionReport { lhs, rhs, ratio, case: exps.sufficient(), weight_ratio })
}

fn index_weight_ratio(index: &Lattice, ws: [&Weight; 3]) -> Result<f64> {
    let pts = index.points();
    let at = |a: &Vec<f64>, b: &Vec<f64>| -> Vec<f64> { a.iter().chain(b).copied().collect() };
    // every triple for small index sets, a strided subset otherwise
    let stride = (pts.len() / 24).max(1);
    let mut worst = 0.0f64;
    for x in pts.iter().step_by(stride) {
        for y in pts.iter().step_by(stride) {
            for z in pts.iter().step_by(stride) {
                let r = ws[0].try_eval(&at(x, z))? / (ws[1].try_eval(&at(x, y))? * ws[2].try_eval(&at(y, z))?);
                worst = worst.max(r);
            }
        }
    }
    Ok(worst)
}

/// `||C||_{U^{inf,q}(omega0)}` with `omega0(X, Y) = omega(X - Y)`, where `omega` acts on offsets.
pub fn c_matrix_membership(c: &GaborMatrix, q: Exponent, omega: &Weight) -> Result<f64> {
    let d = c.index.dim;
    c.u_norm(ExponentPair { p: Exponent::INF, q }, Some(&Weight::of_difference(omega.clone(), d)))
}

/// Relative size below which STFT samples are treated as round-off.
pub const ROUNDOFF_FLOOR: f64 = 0.25 * f64::EPSILON;

/// `c(J, K) = e^{i <k, kappa - iota>} V_{phi2} phi1(J - K)` for `J = (j, iota)`, `K = (k, kappa)`
/// on `index` (a two-dimensional lattice for functions on `R`).
///
/// Entries below [`ROUNDOFF_FLOOR`] times the largest one are set to zero: the quadrature
/// cannot resolve them, and quasi-norms with `q < 1` would amplify the round-off.
pub fn c_matrix(phi1: &Sampled, phi2: &Sampled, index: &Lattice) -> Result<GaborMatrix> {
    if index.dim != 2 * phi1.grid.dim {
        return Err(Error::DimensionMismatch { expected: 2 * phi1.grid.dim, found: index.dim });
    }
    let d = phi1.grid.dim;
    let diff = Lattice::new(index.theta, d, 2 * index.radius)?;
    let mut stft = stft_lattice(phi1, phi2, &PhaseLattice::square(diff))?;
    let floor = ROUNDOFF_FLOOR * stft.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for v in stft.values.iter_mut().filter(|v| v.norm() < floor) {
        *v = Complex64::new(0.0, 0.0);
    }
    let n = index.len();
    let nf = diff.len();
    let theta = index.theta;
    let ints: Vec<Vec<i64>> = (0..n).map(|i| index.int_point(i)).collect();
    let mut out = GaborMatrix::zeros(*index);
    for (jj, jp) in ints.iter().enumerate() {
        for (kk, kp) in ints.iter().enumerate() {
            let (j, iota) = jp.split_at(d);
            let (k, kappa) = kp.split_at(d);
            let dj: Vec<i64> = j.iter().zip(k).map(|(a, b)| a - b).collect();
            let di: Vec<i64> = iota.iter().zip(kappa).map(|(a, b)| a - b).collect();
            let v = stft.values[diff.index_of(&dj).unwrap() * nf + diff.index_of(&di).unwrap()];
            let phase: f64 = (0..d).map(|a| (k[a] * (kappa[a] - iota[a])) as f64).sum::<f64>() * theta * theta;
            out.set(jj, kk, v * Complex64::from_polar(1.0, phase));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::gaussian_window;
    use crate::grid::Grid;

    #[test]
    fn identity_has_unit_norm() {
        let index = Lattice::new(1.0, 1, 4).unwrap();
        let mut id = GaborMatrix::zeros(index);
        for i in 0..id.size() {
            id.set(i, i, Complex64::new(1.0, 0.0));
        }
        let pair = ExponentPair::new(0.5, 3.0).unwrap();
        // one diagonal of nine ones
        assert!((id.u_norm(pair, None).unwrap() - 81.0).abs() < 1e-9);
        let pair = ExponentPair::new(f64::INFINITY, 0.5).unwrap();
        assert!((id.u_norm(pair, None).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_matrix_offsets() {
        // A(j, j - 1) = 1: a single offset
        let index = Lattice::new(1.0, 1, 2).unwrap();
        let mut s = GaborMatrix::zeros(index);
        for j in 1..5 {
            s.set(j, j - 1, Complex64::new(2.0, 0.0));
        }
        let prof = s.offset_profile(crate::lattice_norms::Exponent::INF, None).unwrap();
        assert_eq!(prof.len(), 1);
        assert_eq!(prof.get(&vec![1]), Some(&2.0));
    }

    #[test]
    fn case_classification() {
        let e = |p: f64, q: f64| ExponentPair::new(p, q).unwrap();
        let t = ExponentTriple::new(e(0.5, 0.5), e(1.0, 0.5), e(1.0, 0.5));
        assert_eq!(t.sufficient(), Some(ExponentCase::InnerBelowOne));
        let t = ExponentTriple::new(e(2.0, 2.0), e(2.0, 2.0), e(2.0, 1.0));
        assert_eq!(t.sufficient(), Some(ExponentCase::HolderYoung));
        let t = ExponentTriple::new(e(1.0, 0.5), e(1.0, 2.0), e(1.0, 2.0));
        assert_eq!(t.sufficient(), None);
    }

    #[test]
    fn c_matrix_matches_operator_form() {
        let grid = Grid::new(1, 128, 12.0).unwrap();
        let phi = gaussian_window(&grid);
        let index = Lattice::new(0.75, 2, 3).unwrap();
        let c = c_matrix(&phi, &phi, &index).unwrap();
        // column K of C_{phi} D_{phi} is the analysis of the atom e^{i kappa .} phi(. - k)
        let pl = PhaseLattice::square(Lattice::new(0.75, 1, 3).unwrap());
        for col in [0, 17, 30] {
            let kp = index.point(col);
            let atom = phi.translate(&[kp[0]]).modulate(&[kp[1]]);
            let column = stft_lattice(&atom, &phi, &pl).unwrap();
            for row in 0..index.len() {
                assert!((column.values[row] - c.get(row, col)).norm() < 1e-12);
            }
        }
    }
}
