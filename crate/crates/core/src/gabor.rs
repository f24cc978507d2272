//! Gabor frames on `theta Z^d x theta Z^d`: analysis `C_phi f = {V_phi f(j, iota)}`,
//! synthesis `D_psi c = sum c(j, iota) e^{i <., iota>} psi(. - j)`, frame
//! operators and canonical duals.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Sampled};
use crate::lattice_norms::{mixed_norm, ExponentPair, LatticeSequence, PhaseLattice};
use crate::phase_space::{check_lattice_fits, stft_lattice, symplectic_mixed_norm, transform_at};
use crate::weights::Weight;

pub const CG_TOLERANCE: f64 = 1e-10;
pub const CG_MAX_ITERATIONS: usize = 500;

/// Which frame operator the dual solve inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameOperatorKind {
    /// `D_phi C_phi` over the truncated lattice.
    Truncated,
    /// Walnut representation of the frame operator of the full lattice.
    Walnut,
}

#[derive(Debug, Clone)]
pub struct GaborSystem {
    pub window: Sampled,
    pub dual: Sampled,
    pub lattice: PhaseLattice,
    /// Estimated lower and upper frame bounds.
    pub frame_bounds: (f64, f64),
}

impl GaborSystem {
    /// Builds the system and its canonical dual. One-dimensional windows use the
    /// truncated-lattice frame operator, higher dimensions the Walnut form.
    pub fn new(window: Sampled, lattice: PhaseLattice) -> Result<Self> {
        let kind = if window.grid.dim == 1 { FrameOperatorKind::Truncated } else { FrameOperatorKind::Walnut };
        Self::with_operator(window, lattice, kind)
    }

    pub fn with_operator(window: Sampled, lattice: PhaseLattice, kind: FrameOperatorKind) -> Result<Self> {
        check_lattice_fits(&window.grid, &lattice)?;
        let walnut = Walnut::new(&window, lattice.theta())?;
        let frame_bounds = walnut.frame_bounds();
        if frame_bounds.0 <= 0.0 {
            return Err(Error::NotAFrame(format!(
                "lower frame bound estimate {:.3e} is not positive at spacing {}",
                frame_bounds.0,
                lattice.theta()
            )));
        }
        let dual = match kind {
            FrameOperatorKind::Truncated => canonical_dual(&window, &lattice)?,
            FrameOperatorKind::Walnut => conjugate_gradient(|v| walnut.apply(v), &window)?,
        };
        Ok(GaborSystem { window, dual, lattice, frame_bounds })
    }

    pub fn analysis(&self, f: &Sampled) -> Result<LatticeSequence> {
        stft_lattice(f, &self.window, &self.lattice)
    }

    /// `D_psi c` with the canonical dual `psi`.
    pub fn synthesis(&self, c: &LatticeSequence) -> Result<Sampled> {
        synthesis(&self.dual, c)
    }

    pub fn reconstruct(&self, f: &Sampled) -> Result<Sampled> {
        self.synthesis(&self.analysis(f)?)
    }

    pub fn frame_operator(&self, f: &Sampled) -> Result<Sampled> {
        frame_operator(&self.window, &self.lattice, f)
    }
}

/// Necessary density condition `theta^2 <= 2 pi`.
pub fn check_density(theta: f64) -> Result<()> {
    if theta * theta > 2.0 * PI {
        Err(Error::NotAFrame(format!("theta^2 = {} exceeds 2 pi", theta * theta)))
    } else {
        Ok(())
    }
}

/// `D_psi c = sum_{j, iota} c(j, iota) e^{i <., iota>} psi(. - j)`.
pub fn synthesis(psi: &Sampled, c: &LatticeSequence) -> Result<Sampled> {
    let grid = psi.grid;
    check_lattice_fits(&grid, &c.lattice)?;
    let freqs = c.lattice.frequencies.axis();
    let nf = c.lattice.frequencies.len();
    let coords = grid.coords();
    // (n x |freqs|) table of e^{i x w}
    let table: Vec<Complex64> = coords
        .iter()
        .flat_map(|&x| freqs.iter().map(move |&w| Complex64::from_polar(1.0, x * w)))
        .collect();
    let mut out = Sampled::zeros(grid);
    for j in 0..c.lattice.positions.len() {
        let coeffs = &c.values[j * nf..(j + 1) * nf];
        if coeffs.iter().all(|v| v.norm_sqr() == 0.0) {
            continue;
        }
        let mut data = coeffs.to_vec();
        let mut shape = vec![freqs.len(); grid.dim];
        for axis in (0..grid.dim).rev() {
            data = apply_table(&data, &shape, axis, &table, grid.n);
            shape[axis] = grid.n;
        }
        let moved = psi.translate(&c.lattice.positions.point(j));
        for ((o, s), w) in out.values.iter_mut().zip(&data).zip(&moved.values) {
            *o += s * w;
        }
    }
    Ok(out)
}

fn apply_table(data: &[Complex64], shape: &[usize], axis: usize, table: &[Complex64], n_out: usize) -> Vec<Complex64> {
    let n_in = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * n_out * inner];
    for o in 0..outer {
        for m in 0..n_out {
            let row = &table[m * n_in..(m + 1) * n_in];
            for (k, t) in row.iter().enumerate() {
                let src = (o * n_in + k) * inner;
                let dst = (o * n_out + m) * inner;
                for i in 0..inner {
                    out[dst + i] += t * data[src + i];
                }
            }
        }
    }
    out
}

/// `S f = D_phi C_phi f` over the truncated lattice.
pub fn frame_operator(phi: &Sampled, lattice: &PhaseLattice, f: &Sampled) -> Result<Sampled> {
    synthesis(phi, &stft_lattice(f, phi, lattice)?)
}

/// Canonical dual `psi = S^{-1} phi` by conjugate gradients on the truncated frame operator.
pub fn canonical_dual(phi: &Sampled, lattice: &PhaseLattice) -> Result<Sampled> {
    check_density(lattice.theta())?;
    conjugate_gradient(|v| frame_operator(phi, lattice, v), phi)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solves `S x = b` for a Hermitian positive operator `S`.
pub fn conjugate_gradient(apply: impl Fn(&Sampled) -> Result<Sampled>, b: &Sampled) -> Result<Sampled> {
    let b_norm = dot(&b.values, &b.values).re.sqrt();
    let mut x = Sampled::zeros(b.grid);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs = dot(&r.values, &r.values).re;
    for it in 0..CG_MAX_ITERATIONS {
        if rs.sqrt() <= CG_TOLERANCE * b_norm {
            return Ok(x);
        }
        let ap = apply(&p)?;
        let curvature = dot(&p.values, &ap.values).re;
        if !(curvature > 0.0) {
            return Err(Error::NotAFrame(format!("frame operator is not positive (iteration {it})")));
        }
        let alpha = rs / curvature;
        for ((xv, pv), (rv, av)) in x.values.iter_mut().zip(&p.values).zip(r.values.iter_mut().zip(&ap.values)) {
            *xv += pv * alpha;
            *rv -= av * alpha;
        }
        let rs_new = dot(&r.values, &r.values).re;
        let beta = rs_new / rs;
        for (pv, rv) in p.values.iter_mut().zip(&r.values) {
            *pv = rv + *pv * beta;
        }
        rs = rs_new;
    }
    if rs.sqrt() <= CG_TOLERANCE * b_norm {
        Ok(x)
    } else {
        Err(Error::NoConvergence { iterations: CG_MAX_ITERATIONS, residual: rs.sqrt() / b_norm })
    }
}

/// Walnut representation of the frame operator of the full lattice
/// `theta Z^dim x theta Z^dim`:
/// `S F(X) = (2 pi)^{dim/2} theta^{-dim} sum_K G_K(X) F(X - c K)`, `c = 2 pi / theta`,
/// `G_K(X) = sum_P conj(Phi(X - c K - P)) Phi(X - P)`.
pub struct Walnut {
    theta: f64,
    constant: f64,
    /// `(c K, G_K)` for every non-negligible `K`, `K = 0` first.
    terms: Vec<(Vec<f64>, Sampled)>,
}

impl Walnut {
    pub fn new(window: &Sampled, theta: f64) -> Result<Self> {
        check_density(theta)?;
        let grid = window.grid;
        let dim = grid.dim;
        let period = 2.0 * PI / theta;
        let kmax = (2.0 * grid.half_width / period).floor() as i64;
        let side = (2 * kmax + 1) as usize;
        let count = side.pow(dim as u32);
        let mut terms = Vec::new();
        let mut peak = 0.0f64;
        for idx in 0..count {
            let mut rest = idx;
            let mut k = vec![0i64; dim];
            for a in (0..dim).rev() {
                k[a] = (rest % side) as i64 - kmax;
                rest /= side;
            }
            let shift: Vec<f64> = k.iter().map(|&m| m as f64 * period).collect();
            let g = window.translate(&shift).conj().zip_with(window, |a, b| a * b);
            let size = g.max_abs();
            let is_zero = k.iter().all(|&m| m == 0);
            if is_zero {
                peak = size;
            }
            terms.push((shift, g, is_zero, size));
        }
        let mut kept: Vec<(Vec<f64>, Sampled)> = Vec::new();
        // K = 0 first
        terms.sort_by_key(|t| !t.2);
        for (shift, g, _, size) in terms {
            if size <= 1e-17 * peak && !kept.is_empty() {
                continue;
            }
            kept.push((shift, periodize(&g, theta)));
        }
        let constant = (2.0 * PI).powf(dim as f64 / 2.0) * theta.powi(-(dim as i32));
        Ok(Walnut { theta, constant, terms: kept })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn apply(&self, f: &Sampled) -> Result<Sampled> {
        let mut out = Sampled::zeros(f.grid);
        for (shift, g) in &self.terms {
            let moved = f.translate(shift);
            for ((o, m), w) in out.values.iter_mut().zip(&moved.values).zip(&g.values) {
                *o += m * w * self.constant;
            }
        }
        Ok(out)
    }

    /// `A >= c (inf G_0 - sum_{K != 0} sup |G_K|)`, `B <= c (sup G_0 + sum_{K != 0} sup |G_K|)`.
    pub fn frame_bounds(&self) -> (f64, f64) {
        let g0 = &self.terms[0].1;
        let inf = g0.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
        let sup = g0.values.iter().map(|v| v.re).fold(0.0, f64::max);
        let off: f64 = self.terms[1..].iter().map(|(_, g)| g.max_abs()).sum();
        (self.constant * (inf - off), self.constant * (sup + off))
    }
}

/// `sum_{P in theta Z^dim} g(X - P)` on the grid, by Poisson summation over the
/// harmonics `2 pi m / theta` resolved by the grid.
fn periodize(g: &Sampled, theta: f64) -> Sampled {
    let grid = g.grid;
    let period = 2.0 * PI / theta;
    let nyquist = PI / grid.step();
    let mmax = ((nyquist / period) - 1e-9).floor().max(0.0) as i64;
    let harmonics: Vec<f64> = (-mmax..=mmax).map(|m| m as f64 * period).collect();
    let coeffs = transform_at(&grid, &g.values, &harmonics);
    let scale = theta.powi(-(grid.dim as i32));
    let nh = harmonics.len();
    grid.sample(|x| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in coeffs.iter().enumerate() {
            let mut rest = i;
            let mut phase = 0.0;
            for a in (0..grid.dim).rev() {
                phase += harmonics[rest % nh] * x[a];
                rest /= nh;
            }
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc * scale
    })
}

/// Rihaczek-type window `Phi(x, xi) = phi1(x) conj(F phi2(xi)) e^{-i x xi}` on the
/// phase-space grid built from the (one-dimensional) axis of `phi1`.
pub fn rihaczek_window(phi1: &Sampled, phi2: &Sampled) -> Result<Sampled> {
    phi1.check_grid(phi2)?;
    let axis = phi1.grid;
    if axis.dim != 1 {
        return Err(Error::Unsupported("Rihaczek windows are built for d = 1".into()));
    }
    let coords = axis.coords();
    let hat2: Vec<Complex64> =
        transform_at(&axis, &phi2.values, &coords).into_iter().map(|v| v / (2.0 * PI).sqrt()).collect();
    let grid = axis.with_dim(2)?;
    let n = axis.n;
    let mut out = Sampled::zeros(grid);
    for k in 0..n {
        for m in 0..n {
            out.values[k * n + m] =
                phi1.values[k] * hat2[m].conj() * Complex64::from_polar(1.0, -coords[k] * coords[m]);
        }
    }
    Ok(out)
}

/// `|| C_phi f ||_{l^{p,q}_{(omega)}}`.
pub fn modnorm_estimate(sys: &GaborSystem, f: &Sampled, pair: ExponentPair, weight: Option<&Weight>) -> Result<f64> {
    mixed_norm(&sys.analysis(f)?, pair, weight)
}

/// `pi^{-d/4} e^{-|x|^2 / 2}` on `grid`.
pub fn gaussian_window(grid: &Grid) -> Sampled {
    let c = PI.powf(-(grid.dim as f64) / 4.0);
    grid.sample(|x| Complex64::new(c * (-x.iter().map(|t| t * t).sum::<f64>() / 2.0).exp(), 0.0))
}

/// Closed-form `|| a_lambda ||_{M^{p,q}}` of `a_lambda(x, xi) = e^{-lambda(|x|^2 + |xi|^2)}`
/// on `R^{2d}`, for the symplectic STFT with window `pi^{-d} e^{-|X|^2}`.
pub fn gaussian_modnorm(lambda: f64, pair: ExponentPair, d: usize) -> f64 {
    let (ip, iq) = (pair.p.recip(), pair.q.recip());
    let pp = if pair.p.is_infinite() { 1.0 } else { pair.p.value().powf(-ip) };
    let qq = if pair.q.is_infinite() { 1.0 } else { pair.q.value().powf(-iq) };
    let base = PI.powf(ip + iq - 1.0) * pp * qq * lambda.powf(-ip) * (1.0 + lambda).powf(ip + iq - 1.0);
    base.powi(d as i32)
}

/// `pi^{-d} e^{-|X|^2}` on a phase-space grid, the window matching [`gaussian_modnorm`].
pub fn modnorm_window(grid: &Grid) -> Sampled {
    let d = grid.dim / 2;
    grid.sample(|x| Complex64::new(PI.powi(-(d as i32)) * (-x.iter().map(|t| t * t).sum::<f64>()).exp(), 0.0))
}

/// Quadrature value of `|| a_lambda ||_{M^{p,q}}` on `grid` (symplectic STFT,
/// positions every `stride` points).
pub fn gaussian_modnorm_numeric(lambda: f64, pair: ExponentPair, grid: &Grid, stride: usize) -> Result<f64> {
    let a = grid.sample(|x| Complex64::new((-lambda * x.iter().map(|t| t * t).sum::<f64>()).exp(), 0.0));
    symplectic_mixed_norm(&a, &modnorm_window(grid), pair, stride)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_norms::Lattice;

    fn system(theta: f64, extent: f64) -> Result<GaborSystem> {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let lattice = PhaseLattice::square(Lattice::covering(theta, 1, extent).unwrap());
        GaborSystem::new(gaussian_window(&grid), lattice)
    }

    #[test]
    fn gaussian_dual_is_nearly_scaled_window() {
        let sys = system(0.5, 12.0).unwrap();
        // frame operator is close to 4 (2 pi)^{1/2} times the identity
        let expected = 4.0 * (2.0 * PI).sqrt();
        assert!((sys.frame_bounds.0 - expected).abs() < 1e-9 * expected);
        assert!((sys.frame_bounds.1 - expected).abs() < 1e-9 * expected);
        let scaled = sys.window.scale(Complex64::new(1.0 / expected, 0.0));
        assert!(sys.dual.rel_l2_distance(&scaled) < 1e-8);
    }

    #[test]
    fn coarse_lattice_is_rejected() {
        assert!(matches!(system(3.0, 12.0), Err(Error::NotAFrame(_))));
        assert!(matches!(check_density(2.6), Err(Error::NotAFrame(_))));
    }

    #[test]
    fn walnut_matches_truncated_operator_inside() {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let phi = gaussian_window(&grid);
        let lattice = PhaseLattice::square(Lattice::covering(0.5, 1, 12.0).unwrap());
        let f = grid.sample(|x| Complex64::from_polar((-(x[0] - 1.0).powi(2)).exp(), 0.7 * x[0]));
        let direct = frame_operator(&phi, &lattice, &f).unwrap();
        let walnut = Walnut::new(&phi, 0.5).unwrap().apply(&f).unwrap();
        assert!(walnut.rel_l2_distance(&direct) < 1e-10);
    }

    #[test]
    fn rihaczek_of_gaussians() {
        let axis = Grid::self_dual(1, 64).unwrap();
        let phi = gaussian_window(&axis);
        let w = rihaczek_window(&phi, &phi).unwrap();
        let exact = w.grid.sample(|p| {
            Complex64::from_polar(PI.powf(-0.5) * (-(p[0] * p[0] + p[1] * p[1]) / 2.0).exp(), -p[0] * p[1])
        });
        assert!(w.rel_l2_distance(&exact) < 1e-12);
    }

    #[test]
    fn closed_form_modnorm_values() {
        let v = |p: f64, q: f64| gaussian_modnorm(1.0, ExponentPair::new(p, q).unwrap(), 1);
        assert!((v(2.0, 2.0) - 0.5).abs() < 1e-14);
        assert!((v(f64::INFINITY, f64::INFINITY) - 1.0 / (2.0 * PI)).abs() < 1e-14);
        assert!((v(0.5, 0.5) - 128.0 * PI.powi(3)).abs() < 1e-9);
    }
}
