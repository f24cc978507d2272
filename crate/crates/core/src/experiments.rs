//! Batch experiments: the Gaussian ratio sweep for the product estimate, the divergence
//! witness for the target space `M^{inf, q0}`, and the closed-form STFT of a Wigner symbol.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::{gaussian_modnorm, gaussian_window, modnorm_window};
use crate::grid::{Grid, Sampled};
use crate::lattice_norms::{lp_norm, mixed_norm, Exponent, ExponentPair, Lattice, PhaseLattice};
use crate::matrix_space::{ExponentCase, ExponentTriple};
use crate::phase_space::{stft, stft_lattice, symplectic_mixed_norms, wigner};
use crate::pseudodiff::{gaussian_symbol, sharp_product, CalculusParam};
use crate::weights::{sobol_points, Weight};

pub const SCHEMA_VERSION: u32 = 1;

/// Exponents `(p_j, q_j)` of the target (`j = 0`) and the two factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleSpec {
    pub p0: Exponent,
    pub q0: Exponent,
    pub p1: Exponent,
    pub q1: Exponent,
    pub p2: Exponent,
    pub q2: Exponent,
}

impl TripleSpec {
    pub fn new(e: [f64; 6]) -> Result<Self> {
        Ok(TripleSpec {
            p0: Exponent::new(e[0])?,
            q0: Exponent::new(e[1])?,
            p1: Exponent::new(e[2])?,
            q1: Exponent::new(e[3])?,
            p2: Exponent::new(e[4])?,
            q2: Exponent::new(e[5])?,
        })
    }

    pub fn triple(&self) -> ExponentTriple {
        ExponentTriple::new(
            ExponentPair { p: self.p0, q: self.q0 },
            ExponentPair { p: self.p1, q: self.q1 },
            ExponentPair { p: self.p2, q: self.q2 },
        )
    }
}

/// Either an explicit list or `points` log-spaced values in `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    List(Vec<f64>),
    Log { min: f64, max: f64, points: usize },
}

impl LambdaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            LambdaGrid::List(v) => v.clone(),
            LambdaGrid::Log { min, max, points } => {
                if *points < 2 || !(*min > 0.0) || !(max > min) {
                    return Err(Error::InvalidArgument("log grid needs 0 < min < max and at least 2 points".into()));
                }
                let (a, b) = (min.ln(), max.ln());
                (0..*points).map(|i| (a + (b - a) * i as f64 / (*points - 1) as f64).exp()).collect()
            }
        };
        if v.is_empty() || v.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidArgument("lambda values must be positive and finite".into()));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("lambda grid must be strictly increasing".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn grid(&self, dim: usize) -> Result<Grid> {
        Grid::new(dim, self.n, self.half_width)
    }
}

/// Numeric cross-check of the closed-form sweep through sampled symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericSpec {
    pub enabled: bool,
    pub lambdas: Vec<f64>,
    /// Points per axis of the self-dual phase-space grid.
    pub n: usize,
    pub stride: usize,
}

impl Default for NumericSpec {
    fn default() -> Self {
        NumericSpec { enabled: false, lambdas: vec![0.25, 0.5, 1.0, 2.0, 4.0], n: 128, stride: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CounterexampleSpec {
    pub q0: Exponent,
    pub q1: Exponent,
    /// Inner exponent of the bounded estimate `M^{p, q1}`.
    pub p: Exponent,
    pub n_values: Vec<usize>,
    pub grid: GridSpec,
    pub theta: f64,
    /// Window positions cover `[-position_extent, position_extent]`.
    pub position_extent: f64,
}

impl Default for CounterexampleSpec {
    fn default() -> Self {
        CounterexampleSpec {
            q0: Exponent::new(1.0).unwrap(),
            q1: Exponent::new(2.0).unwrap(),
            p: Exponent::new(2.0).unwrap(),
            n_values: vec![8, 16, 32, 64],
            grid: GridSpec { n: 1024, half_width: 16.0 },
            theta: 0.5,
            position_extent: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StftaSpec {
    /// Terms `|kappa| <= terms` of the superposition.
    pub terms: usize,
    pub points: usize,
    pub half_box: f64,
    pub grid: GridSpec,
    pub tolerance: f64,
}

impl Default for StftaSpec {
    fn default() -> Self {
        StftaSpec { terms: 4, points: 50, half_box: 3.0, grid: GridSpec { n: 128, half_width: 12.0 }, tolerance: 1e-4 }
    }
}

/// Experiment configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub d: usize,
    pub triples: Vec<TripleSpec>,
    pub lambda_grid: LambdaGrid,
    pub weight: Option<Weight>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub numeric: NumericSpec,
    pub counterexample: CounterexampleSpec,
    pub stfta: StftaSpec,
}

/// Six triples: four satisfying the sufficient conditions and two violating them.
pub fn default_triples() -> Vec<TripleSpec> {
    let inf = f64::INFINITY;
    [
        [1.0, 1.0, 2.0, 2.0, 2.0, 2.0],
        [1.0, 1.0, 2.0, 0.5, 2.0, 0.5],
        [inf, 1.0, inf, 1.0, inf, 1.0],
        [1.0, 0.5, 1.0, 0.5, 1.0, 0.5],
        [0.5, 1.0, 2.0, 2.0, 2.0, 2.0],
        [0.25, 2.0, 1.0, inf, 1.0, inf],
    ]
    .iter()
    .map(|e| TripleSpec::new(*e).unwrap())
    .collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            schema_version: SCHEMA_VERSION,
            d: 1,
            triples: default_triples(),
            lambda_grid: LambdaGrid::Log { min: 1e-4, max: 1e4, points: 81 },
            weight: None,
            seed: 0,
            output: None,
            numeric: NumericSpec::default(),
            counterexample: CounterexampleSpec::default(),
            stfta: StftaSpec::default(),
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!("unsupported schema version {}", self.schema_version)));
        }
        if self.d == 0 {
            return Err(Error::InvalidArgument("d must be positive".into()));
        }
        self.lambda_grid.values()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub triple: usize,
    pub lambda: f64,
    /// `|| a_lambda # a_lambda ||_{M^{p0,q0}}`.
    pub lhs: f64,
    pub rhs1: f64,
    pub rhs2: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub triple: usize,
    pub case: Option<ExponentCase>,
    pub small_fitted: f64,
    pub small_expected: f64,
    pub large_fitted: f64,
    pub large_expected: f64,
}

impl SlopeFit {
    pub fn max_deviation(&self) -> f64 {
        (self.small_fitted - self.small_expected).abs().max((self.large_fitted - self.large_expected).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericRow {
    pub triple: usize,
    pub lambda: f64,
    pub closed: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericSlope {
    pub triple: usize,
    pub closed: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub fits: Vec<SlopeFit>,
    pub numeric_rows: Vec<NumericRow>,
    pub numeric_slopes: Vec<NumericSlope>,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Closed-form ratio `|| a_l # a_l ||_{M^{p0,q0}} / (|| a_l ||_{M^{p1,q1}} || a_l ||_{M^{p2,q2}})`,
/// using `a_l # a_l = (1 + l^2)^{-d} a_{2l/(1+l^2)}`.
pub fn gaussian_ratio(triple: &ExponentTriple, lambda: f64, d: usize) -> (f64, f64, f64) {
    let s = 1.0 + lambda * lambda;
    let lhs = s.powi(-(d as i32)) * gaussian_modnorm(2.0 * lambda / s, triple.e0, d);
    (lhs, gaussian_modnorm(lambda, triple.e1, d), gaussian_modnorm(lambda, triple.e2, d))
}

/// Closed-form sweep with log-log slopes over the bottom and top decade of the lambda grid,
/// plus the optional numeric cross-check.
pub fn run_gaussian_ratio_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let lambdas = cfg.lambda_grid.values()?;
    let (lo, hi) = (lambdas[0], lambdas[lambdas.len() - 1]);
    if hi < 100.0 * lo {
        return Err(Error::InvalidArgument("lambda grid must span at least two decades".into()));
    }
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (t, spec) in cfg.triples.iter().enumerate() {
        let triple = spec.triple();
        let start = rows.len();
        for &lambda in &lambdas {
            let (lhs, rhs1, rhs2) = gaussian_ratio(&triple, lambda, cfg.d);
            rows.push(SweepRow { triple: t, lambda, lhs, rhs1, rhs2, ratio: lhs / (rhs1 * rhs2) });
        }
        let fit_over = |keep: &dyn Fn(f64) -> bool| {
            let pts: Vec<(f64, f64)> =
                rows[start..].iter().filter(|r| keep(r.lambda)).map(|r| (r.lambda.ln(), r.ratio.ln())).collect();
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            ls_slope(&x, &y)
        };
        let (small, large) = triple.gaussian_slopes();
        fits.push(SlopeFit {
            triple: t,
            case: triple.sufficient(),
            small_fitted: fit_over(&|l| l <= 10.0 * lo * (1.0 + 1e-12)),
            small_expected: small * cfg.d as f64,
            large_fitted: fit_over(&|l| l >= hi / 10.0 * (1.0 - 1e-12)),
            large_expected: large * cfg.d as f64,
        });
    }
    let (numeric_rows, numeric_slopes) = if cfg.numeric.enabled { numeric_sweep(cfg)? } else { (vec![], vec![]) };
    Ok(SweepOutput { rows, fits, numeric_rows, numeric_slopes })
}

/// Ratios from sampled symbols: kernel-route Weyl product and quadrature norms.
fn numeric_sweep(cfg: &SweepConfig) -> Result<(Vec<NumericRow>, Vec<NumericSlope>)> {
    if cfg.d != 1 {
        return Err(Error::Unsupported("numeric sweep is implemented for d = 1".into()));
    }
    let grid = Grid::self_dual(2, cfg.numeric.n)?;
    let window = modnorm_window(&grid);
    let triples: Vec<ExponentTriple> = cfg.triples.iter().map(TripleSpec::triple).collect();
    let factor_pairs: Vec<ExponentPair> = triples.iter().flat_map(|t| [t.e1, t.e2]).collect();
    let target_pairs: Vec<ExponentPair> = triples.iter().map(|t| t.e0).collect();
    let weyl = CalculusParam::weyl(1);
    let mut rows = Vec::new();
    for &lambda in &cfg.numeric.lambdas {
        let a = gaussian_symbol(&grid, lambda, lambda);
        let b = sharp_product(&a, &a, &weyl)?;
        let fa = symplectic_mixed_norms(&a, &window, &factor_pairs, cfg.numeric.stride)?;
        let fb = symplectic_mixed_norms(&b, &window, &target_pairs, cfg.numeric.stride)?;
        for (t, triple) in triples.iter().enumerate() {
            let (lhs, r1, r2) = gaussian_ratio(triple, lambda, 1);
            let numeric = fb[t] / (fa[2 * t] * fa[2 * t + 1]);
            rows.push(NumericRow { triple: t, lambda, closed: lhs / (r1 * r2), numeric });
        }
    }
    let slopes = (0..triples.len())
        .map(|t| {
            let sel: Vec<&NumericRow> = rows.iter().filter(|r| r.triple == t).collect();
            let x: Vec<f64> = sel.iter().map(|r| r.lambda.ln()).collect();
            let closed: Vec<f64> = sel.iter().map(|r| r.closed.ln()).collect();
            let numeric: Vec<f64> = sel.iter().map(|r| r.numeric.ln()).collect();
            NumericSlope { triple: t, closed: ls_slope(&x, &closed), numeric: ls_slope(&x, &numeric) }
        })
        .collect();
    Ok((rows, slopes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub n: usize,
    /// `|| c ||_{l^{q0}}` over `|kappa| <= N`: the lower bound for the `M^{inf, q0}` estimate.
    pub c_norm_q0: f64,
    pub c_norm_q1: f64,
    pub m_inf_q0: f64,
    pub m_p_q1: f64,
}

/// `c(kappa) = (1 + |kappa|)^{-1/q0}`, which lies in `l^{q1}` but not in `l^{q0}` for `q0 < q1 <= ...`.
pub fn counterexample_coefficient(kappa: i64, q0: Exponent) -> f64 {
    (1.0 + kappa.abs() as f64).powf(-q0.recip())
}

/// `sum_kappa c_kappa e^{i x kappa} phi(x)` with the standard Gaussian `phi`.
pub fn superposition(axis: &Grid, coeffs: &[(f64, Complex64)]) -> Sampled {
    let phi = gaussian_window(axis);
    let mut f = Sampled::zeros(*axis);
    for (kappa, c) in coeffs {
        f = f.add(&phi.modulate(&[*kappa]).scale(*c));
    }
    f
}

/// Gabor estimates of `f_N = sum_{|kappa| <= N} c(kappa) e^{i x kappa} phi` for each `N`.
pub fn run_counterexample(cfg: &SweepConfig) -> Result<Vec<CounterexampleRow>> {
    let spec = &cfg.counterexample;
    if spec.q0.value() >= spec.q1.value() {
        return Err(Error::InvalidArgument(format!("need q0 < q1, got q0 = {}, q1 = {}", spec.q0, spec.q1)));
    }
    let axis = spec.grid.grid(1)?;
    let phi = gaussian_window(&axis);
    let positions = Lattice::covering(spec.theta, 1, spec.position_extent)?;
    let mut rows = Vec::new();
    for &n in &spec.n_values {
        let coeffs: Vec<(f64, Complex64)> = (-(n as i64)..=n as i64)
            .map(|k| (k as f64, Complex64::new(counterexample_coefficient(k, spec.q0), 0.0)))
            .collect();
        let f = superposition(&axis, &coeffs);
        let frequencies = Lattice::covering(spec.theta, 1, n as f64 + spec.position_extent)?;
        let lattice = PhaseLattice::new(positions, frequencies)?;
        let c = stft_lattice(&f, &phi, &lattice)?;
        let w = cfg.weight.as_ref();
        let mags: Vec<f64> = coeffs.iter().map(|(_, v)| v.norm()).collect();
        rows.push(CounterexampleRow {
            n,
            c_norm_q0: lp_norm(&mags, spec.q0),
            c_norm_q1: lp_norm(&mags, spec.q1),
            m_inf_q0: mixed_norm(&c, ExponentPair { p: Exponent::INF, q: spec.q0 }, w)?,
            m_p_q1: mixed_norm(&c, ExponentPair { p: spec.p, q: spec.q1 }, w)?,
        });
    }
    Ok(rows)
}

/// `W_{f,phi}(x, xi) = 2^{1/2} pi^{-1/2} sum c e^{-x^2 - (xi - kappa/2)^2} e^{i x kappa}` (d = 1).
pub fn wigner_closed_form(coeffs: &[(f64, Complex64)], x: f64, xi: f64) -> Complex64 {
    let norm = (2.0 / PI).sqrt();
    coeffs
        .iter()
        .map(|(k, c)| c * (-x * x - (xi - k / 2.0).powi(2)).exp() * Complex64::from_polar(norm, x * k))
        .sum()
}

/// STFT of `W_{f,phi}` with window `(2 pi)^{-1/2} e^{-(x^2 + xi^2)}` at `(x, xi, eta, y)`:
/// `2^{-2} pi^{-1} sum c e^{-(x^2/2 + (xi - k/2)^2/2 + (eta - k)^2/8 + y^2/8)}
/// e^{-i (x (eta - k) + y (xi + k/2)) / 2}`.
pub fn stfta_closed_form(coeffs: &[(f64, Complex64)], p: [f64; 4]) -> Complex64 {
    let [x, xi, eta, y] = p;
    coeffs
        .iter()
        .map(|(k, c)| {
            let decay = -(x * x / 2.0 + (xi - k / 2.0).powi(2) / 2.0 + (eta - k).powi(2) / 8.0 + y * y / 8.0);
            let phase = -(x * (eta - k) + y * (xi + k / 2.0)) / 2.0;
            c * Complex64::from_polar(decay.exp() / (4.0 * PI), phase)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StftaReport {
    pub terms: usize,
    pub points: usize,
    /// Largest `|numeric - closed|` over the samples.
    pub max_abs_error: f64,
    /// Largest `|closed|` over the samples.
    pub max_value: f64,
    pub rel_error: f64,
    /// Relative `L^2` distance between the sampled Wigner symbol and its closed form.
    pub wigner_rel_error: f64,
}

/// Numeric STFT of the sampled Wigner symbol against the closed form.
pub fn stfta_check(coeffs: &[(f64, Complex64)], spec: &StftaSpec, seed: u64) -> Result<StftaReport> {
    let axis = spec.grid.grid(1)?;
    let f = superposition(&axis, coeffs);
    let a = wigner(&f, &gaussian_window(&axis))?;
    let exact = a.grid.sample(|p| wigner_closed_form(coeffs, p[0], p[1]));
    let wigner_rel_error = if exact.norm_l2() > 0.0 { a.rel_l2_distance(&exact) } else { a.norm_l2() };
    let window = a.grid.sample(|p| Complex64::new((-(p[0] * p[0] + p[1] * p[1])).exp() / (2.0 * PI).sqrt(), 0.0));
    let mut max_abs_error: f64 = 0.0;
    let mut max_value: f64 = 0.0;
    for q in sobol_points(4, spec.points, seed as u32, spec.half_box) {
        let closed = stfta_closed_form(coeffs, [q[0], q[1], q[2], q[3]]);
        let numeric = stft(&a, &window, &q[..2], &q[2..])?;
        max_abs_error = max_abs_error.max((numeric - closed).norm());
        max_value = max_value.max(closed.norm());
    }
    let rel_error = if max_value > 0.0 { max_abs_error / max_value } else { max_abs_error };
    Ok(StftaReport { terms: coeffs.len(), points: spec.points, max_abs_error, max_value, rel_error, wigner_rel_error })
}

/// Seeded complex coefficients for `|kappa| <= terms`, uniform in the unit square.
pub fn random_coefficients(terms: usize, seed: u64) -> Vec<(f64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (-(terms as i64)..=terms as i64)
        .map(|k| (k as f64, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect()
}

pub fn run_stfta_check(cfg: &SweepConfig) -> Result<StftaReport> {
    let spec = &cfg.stfta;
    if spec.terms > 8 {
        return Err(Error::InvalidArgument(format!("at most 8 terms supported, got {}", spec.terms)));
    }
    let report = stfta_check(&random_coefficients(spec.terms, cfg.seed), spec, cfg.seed)?;
    if report.rel_error > spec.tolerance {
        return Err(Error::ToleranceExceeded {
            what: "closed-form STFT of the Wigner symbol".into(),
            value: report.rel_error,
            tolerance: spec.tolerance,
        });
    }
    Ok(report)
}
