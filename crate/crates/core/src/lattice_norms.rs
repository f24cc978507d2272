//! Lattices `theta Z^d`, sequences on `Lambda x Lambda`, and mixed (quasi-)norms.
//!
//! The mixed norm takes the `l^p` norm over the first (position) index and then
//! the `l^q` norm over the second (frequency) index. Exponents below one are
//! allowed; sums are max-scaled so tiny and huge magnitudes do not under- or overflow.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::weights::Weight;

/// Lebesgue exponent in `(0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const INF: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && !p.is_nan() {
            Ok(Exponent(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1/p`, zero for `p = inf`.
    pub fn recip(self) -> f64 {
        1.0 / self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Exponent::INF),
            t => {
                let v: f64 = if let Some((a, b)) = t.split_once('/') {
                    let a: f64 = a.trim().parse().map_err(|_| Error::Parse(s.into()))?;
                    let b: f64 = b.trim().parse().map_err(|_| Error::Parse(s.into()))?;
                    a / b
                } else {
                    t.parse().map_err(|_| Error::Parse(s.into()))?
                };
                Exponent::new(v)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => Exponent::new(v),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: Exponent,
    pub q: Exponent,
}

impl ExponentPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        Ok(ExponentPair { p: Exponent::new(p)?, q: Exponent::new(q)? })
    }

    /// `r = min(1, p, q)`: the mixed quasi-norm satisfies `|a + b|^r <= |a|^r + |b|^r`.
    pub fn quasi_triangle_constant(self) -> f64 {
        1f64.min(self.p.value()).min(self.q.value())
    }
}

/// `theta Z^dim` restricted to integer coordinates in `[-radius, radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub theta: f64,
    pub dim: usize,
    pub radius: usize,
}

impl Lattice {
    pub fn new(theta: f64, dim: usize, radius: usize) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidArgument(format!("lattice spacing {theta}")));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("lattice dimension 0".into()));
        }
        Ok(Lattice { theta, dim, radius })
    }

    /// Smallest truncation containing every lattice point of `[-extent, extent]^dim`.
    pub fn covering(theta: f64, dim: usize, extent: f64) -> Result<Self> {
        Lattice::new(theta, dim, (extent / theta + 1e-9).floor() as usize)
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn int_point(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut out = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            out[a] = (idx % side) as i64 - self.radius as i64;
            idx /= side;
        }
        out
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.int_point(idx).into_iter().map(|m| m as f64 * self.theta).collect()
    }

    pub fn index_of(&self, int_point: &[i64]) -> Option<usize> {
        let r = self.radius as i64;
        let side = self.side();
        let mut idx = 0;
        for &m in int_point {
            if m < -r || m > r {
                return None;
            }
            idx = idx * side + (m + r) as usize;
        }
        Some(idx)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// One-dimensional coordinates `theta * m`, `|m| <= radius`.
    pub fn axis(&self) -> Vec<f64> {
        let r = self.radius as i64;
        (-r..=r).map(|m| m as f64 * self.theta).collect()
    }
}

/// Index set `Lambda_pos x Lambda_freq` of a Gabor system; both factors share spacing and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLattice {
    pub positions: Lattice,
    pub frequencies: Lattice,
}

impl PhaseLattice {
    pub fn new(positions: Lattice, frequencies: Lattice) -> Result<Self> {
        if positions.dim != frequencies.dim || (positions.theta - frequencies.theta).abs() > 1e-15 {
            return Err(Error::InvalidArgument("position and frequency lattices differ".into()));
        }
        Ok(PhaseLattice { positions, frequencies })
    }

    pub fn square(lattice: Lattice) -> Self {
        PhaseLattice { positions: lattice, frequencies: lattice }
    }

    pub fn theta(&self) -> f64 {
        self.positions.theta
    }

    pub fn dim(&self) -> usize {
        self.positions.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len() * self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Complex sequence on a [`PhaseLattice`], position-major: `values[j * n_freq + iota]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSequence {
    pub lattice: PhaseLattice,
    pub values: Vec<Complex64>,
}

impl LatticeSequence {
    pub fn new(lattice: PhaseLattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::DimensionMismatch { expected: lattice.len(), found: values.len() });
        }
        Ok(LatticeSequence { lattice, values })
    }

    pub fn zeros(lattice: PhaseLattice) -> Self {
        LatticeSequence { lattice, values: vec![Complex64::new(0.0, 0.0); lattice.len()] }
    }

    pub fn get(&self, j: usize, iota: usize) -> Complex64 {
        self.values[j * self.lattice.frequencies.len() + iota]
    }

    pub fn set(&mut self, j: usize, iota: usize, v: Complex64) {
        let nf = self.lattice.frequencies.len();
        self.values[j * nf + iota] = v;
    }

    /// Concatenated coordinates `(j, iota)` of an entry.
    pub fn coordinates(&self, j: usize, iota: usize) -> Vec<f64> {
        let mut x = self.lattice.positions.point(j);
        x.extend(self.lattice.frequencies.point(iota));
        x
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// `(sum |v|^p)^{1/p}` (`max |v|` for `p = inf`) of non-negative magnitudes.
pub fn lp_norm(mags: &[f64], p: Exponent) -> f64 {
    let max = mags.iter().copied().fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 || max.is_infinite() {
        return max;
    }
    let p = p.value();
    let scaled: Vec<f64> = mags.iter().map(|&m| (m / max).powf(p)).collect();
    max * pairwise_sum(&scaled).powf(1.0 / p)
}

/// Mixed norm of a magnitude table with `n_outer` rows (the `q` index) of
/// `n_inner` entries (the `p` index) each; `measure_*` are cell volumes.
pub fn mixed_lp(
    mags: &[f64],
    n_outer: usize,
    pair: ExponentPair,
    measure_inner: f64,
    measure_outer: f64,
) -> Result<f64> {
    if n_outer == 0 || mags.len() % n_outer != 0 {
        return Err(Error::InvalidArgument("magnitude table is not rectangular".into()));
    }
    if mags.iter().any(|m| m.is_nan() || *m < 0.0) {
        return Err(Error::InvalidArgument("magnitudes must be finite and non-negative".into()));
    }
    let n_inner = mags.len() / n_outer;
    let inner_scale = if pair.p.is_infinite() { 1.0 } else { measure_inner.powf(pair.p.recip()) };
    let outer_scale = if pair.q.is_infinite() { 1.0 } else { measure_outer.powf(pair.q.recip()) };
    let rows: Vec<f64> = mags.chunks(n_inner).map(|row| lp_norm(row, pair.p) * inner_scale).collect();
    Ok(lp_norm(&rows, pair.q) * outer_scale)
}

/// `||c||_{l^{p,q}_{(omega)}}`: `l^p` over positions, then `l^q` over frequencies.
pub fn mixed_norm(seq: &LatticeSequence, pair: ExponentPair, weight: Option<&Weight>) -> Result<f64> {
    let np = seq.lattice.positions.len();
    let nf = seq.lattice.frequencies.len();
    let mut table = Vec::with_capacity(seq.values.len());
    for iota in 0..nf {
        for j in 0..np {
            let mut m = seq.get(j, iota).norm();
            if let Some(w) = weight {
                m *= w.try_eval(&seq.coordinates(j, iota))?;
            }
            table.push(m);
        }
    }
    mixed_lp(&table, nf, pair, 1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_from(vals: &[f64], radius: usize) -> LatticeSequence {
        let lat = Lattice::new(1.0, 1, radius).unwrap();
        let lattice = PhaseLattice::square(lat);
        let values = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        LatticeSequence::new(lattice, values).unwrap()
    }

    #[test]
    fn delta_has_unit_norm() {
        let mut vals = vec![0.0; 9];
        vals[4] = 1.0;
        let s = seq_from(&vals, 1);
        for (p, q) in [(0.5, 0.5), (1.0, 2.0), (f64::INFINITY, 0.3)] {
            let n = mixed_norm(&s, ExponentPair::new(p, q).unwrap(), None).unwrap();
            assert!((n - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ones_matrix_closed_form() {
        // 3x3 block of ones: (3^{1/p})^{...} = 3^{1/p + 1/q}
        let s = seq_from(&[1.0; 9], 1);
        let n = mixed_norm(&s, ExponentPair::new(0.5, 2.0).unwrap(), None).unwrap();
        assert!((n - 3f64.powf(2.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn inner_index_is_position() {
        // row for iota = 0 holds (1, 2, 0) over positions, everything else zero
        let mut s = seq_from(&[0.0; 9], 1);
        s.set(0, 0, Complex64::new(1.0, 0.0));
        s.set(1, 0, Complex64::new(2.0, 0.0));
        let n = mixed_norm(&s, ExponentPair::new(1.0, f64::INFINITY).unwrap(), None).unwrap();
        assert!((n - 3.0).abs() < 1e-15);
        let n = mixed_norm(&s, ExponentPair::new(f64::INFINITY, 1.0).unwrap(), None).unwrap();
        assert!((n - 2.0).abs() < 1e-15);
    }

    #[test]
    fn small_magnitudes_do_not_underflow() {
        let s = seq_from(&[1e-200, 1e-200, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1);
        let n = mixed_norm(&s, ExponentPair::new(0.25, 0.25).unwrap(), None).unwrap();
        assert!((n / 1e-200 - 16.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("1/2".parse::<Exponent>().unwrap().value(), 0.5);
        assert!("inf".parse::<Exponent>().unwrap().is_infinite());
        assert!(Exponent::new(0.0).is_err());
        let json = serde_json::to_string(&ExponentPair::new(f64::INFINITY, 2.0).unwrap()).unwrap();
        assert_eq!(json, r#"{"p":"inf","q":2.0}"#);
        let back: ExponentPair = serde_json::from_str(&json).unwrap();
        assert!(back.p.is_infinite());
    }

    #[test]
    fn lattice_indexing_round_trip() {
        let lat = Lattice::new(0.5, 2, 3).unwrap();
        for i in 0..lat.len() {
            assert_eq!(lat.index_of(&lat.int_point(i)), Some(i));
        }
        assert_eq!(Lattice::covering(0.5, 1, 8.0).unwrap().radius, 16);
    }
}
