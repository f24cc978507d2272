//! File formats: raw little-endian complex arrays with a JSON sidecar, and CSV tables
//! for lattice sequences, matrices (COO) and Hermite expansions.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::GaborSystem;
use crate::grid::{Grid, Sampled};
use crate::hermite::HermiteExpansion;
use crate::lattice_norms::{Lattice, LatticeSequence, PhaseLattice};
use crate::matrix_space::GaborMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Complex64,
    Complex128,
}

/// Sidecar describing a raw sample file: `d` axes of `n` points over `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub precision: Precision,
}

fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("json")
}

/// Writes `values` to `path` and the sidecar next to it (same stem, `.json`).
pub fn write_sampled(path: &Path, f: &Sampled, precision: Precision) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for v in &f.values {
        match precision {
            Precision::Complex64 => {
                out.write_all(&(v.re as f32).to_le_bytes())?;
                out.write_all(&(v.im as f32).to_le_bytes())?;
            }
            Precision::Complex128 => {
                out.write_all(&v.re.to_le_bytes())?;
                out.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    let side = Sidecar { d: f.grid.dim, n: f.grid.n, half_width: f.grid.half_width, precision };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

pub fn read_sampled(path: &Path) -> Result<Sampled> {
    let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    let grid = Grid::new(side.d, side.n, side.half_width)?;
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let width = match side.precision {
        Precision::Complex64 => 8,
        Precision::Complex128 => 16,
    };
    if bytes.len() != width * grid.len() {
        return Err(Error::Parse(format!(
            "{} holds {} bytes, sidecar implies {}",
            path.display(),
            bytes.len(),
            width * grid.len()
        )));
    }
    let values = bytes
        .chunks_exact(width)
        .map(|c| match side.precision {
            Precision::Complex64 => Complex64::new(
                f32::from_le_bytes(c[0..4].try_into().unwrap()) as f64,
                f32::from_le_bytes(c[4..8].try_into().unwrap()) as f64,
            ),
            Precision::Complex128 => Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            ),
        })
        .collect();
    Sampled::new(grid, values)
}

fn parse_f64(field: Option<&str>) -> Result<f64> {
    let s = field.ok_or_else(|| Error::Parse("missing column".into()))?;
    s.trim().parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

fn parse_i64(field: Option<&str>) -> Result<i64> {
    let s = field.ok_or_else(|| Error::Parse("missing column".into()))?;
    s.trim().parse().map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
}

/// Rows `(j_1..j_d, iota_1..iota_d, re, im)` with lattice coordinates, nonzero entries only.
pub fn write_sequence_csv<W: Write>(out: W, c: &LatticeSequence) -> Result<()> {
    let d = c.lattice.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=d).map(|a| format!("j{a}")).collect();
    header.extend((1..=d).map(|a| format!("iota{a}")));
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header)?;
    let nf = c.lattice.frequencies.len();
    for (i, v) in c.values.iter().enumerate() {
        if v.norm() == 0.0 {
            continue;
        }
        let mut row: Vec<String> = c.coordinates(i / nf, i % nf).iter().map(|x| x.to_string()).collect();
        row.extend([v.re.to_string(), v.im.to_string()]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_sequence_csv`] into a sequence on `lattice`.
pub fn read_sequence_csv<R: Read>(input: R, lattice: PhaseLattice) -> Result<LatticeSequence> {
    let d = lattice.dim();
    let theta = lattice.theta();
    let mut seq = LatticeSequence::zeros(lattice);
    let mut r = csv::Reader::from_reader(input);
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 2 * d + 2 {
            return Err(Error::Parse(format!("expected {} columns, found {}", 2 * d + 2, rec.len())));
        }
        let to_int = |x: f64| -> Result<i64> {
            let m = (x / theta).round();
            if (x / theta - m).abs() > 1e-6 {
                return Err(Error::Parse(format!("{x} is not on the lattice")));
            }
            Ok(m as i64)
        };
        let coords = (0..2 * d).map(|i| parse_f64(rec.get(i)).and_then(to_int)).collect::<Result<Vec<_>>>()?;
        let j = lattice.positions.index_of(&coords[..d]);
        let iota = lattice.frequencies.index_of(&coords[d..]);
        let (Some(j), Some(iota)) = (j, iota) else {
            return Err(Error::OutsideGrid(format!("{coords:?} outside the truncated lattice")));
        };
        let v = Complex64::new(parse_f64(rec.get(2 * d))?, parse_f64(rec.get(2 * d + 1))?);
        seq.set(j, iota, v);
    }
    Ok(seq)
}

/// Flat little-endian `f64` pairs in lattice order.
pub fn write_sequence_bin<W: Write>(mut out: W, c: &LatticeSequence) -> Result<()> {
    for v in &c.values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_sequence_bin<R: Read>(mut input: R, lattice: PhaseLattice) -> Result<LatticeSequence> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * lattice.len() {
        return Err(Error::Parse(format!("expected {} bytes, found {}", 16 * lattice.len(), bytes.len())));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(f64::from_le_bytes(c[0..8].try_into().unwrap()), f64::from_le_bytes(c[8..16].try_into().unwrap()))
        })
        .collect();
    LatticeSequence::new(lattice, values)
}

/// COO triplets `(j_idx, k_idx, re, im)` for the nonzero entries.
pub fn write_matrix_coo<W: Write>(out: W, m: &GaborMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j_idx", "k_idx", "re", "im"])?;
    let n = m.size();
    for j in 0..n {
        for k in 0..n {
            let v = m.get(j, k);
            if v.norm() != 0.0 {
                w.write_record([j.to_string(), k.to_string(), v.re.to_string(), v.im.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_coo<R: Read>(input: R, index: Lattice) -> Result<GaborMatrix> {
    let mut m = GaborMatrix::zeros(index);
    let n = m.size() as i64;
    let mut r = csv::Reader::from_reader(input);
    for rec in r.records() {
        let rec = rec?;
        let (j, k) = (parse_i64(rec.get(0))?, parse_i64(rec.get(1))?);
        if !(0..n).contains(&j) || !(0..n).contains(&k) {
            return Err(Error::OutsideGrid(format!("entry ({j}, {k}) outside a {n} x {n} matrix")));
        }
        m.set(j as usize, k as usize, Complex64::new(parse_f64(rec.get(2))?, parse_f64(rec.get(3))?));
    }
    Ok(m)
}

/// Rows `(alpha_1..alpha_d, re, im)`.
pub fn write_expansion_csv<W: Write>(out: W, e: &HermiteExpansion) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=e.d).map(|a| format!("alpha{a}")).collect();
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header)?;
    for (alpha, c) in e.indices.iter().zip(&e.coefficients) {
        let mut row: Vec<String> = alpha.iter().map(|a| a.to_string()).collect();
        row.extend([c.re.to_string(), c.im.to_string()]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an expansion of dimension `d`; the order is the largest `|alpha|` present.
pub fn read_expansion_csv<R: Read>(input: R, d: usize) -> Result<HermiteExpansion> {
    let mut rows = Vec::new();
    let mut r = csv::Reader::from_reader(input);
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != d + 2 {
            return Err(Error::Parse(format!("expected {} columns, found {}", d + 2, rec.len())));
        }
        let alpha = (0..d)
            .map(|i| parse_i64(rec.get(i)).and_then(|a| usize::try_from(a).map_err(|_| Error::Parse(format!("negative index {a}")))))
            .collect::<Result<Vec<usize>>>()?;
        rows.push((alpha, Complex64::new(parse_f64(rec.get(d))?, parse_f64(rec.get(d + 1))?)));
    }
    let max_order = rows.iter().map(|(a, _)| a.iter().sum::<usize>()).max().unwrap_or(0);
    let mut e = HermiteExpansion::zeros(d, max_order)?;
    for (alpha, v) in rows {
        let i = e.indices.iter().position(|a| *a == alpha).expect("index within order");
        e.coefficients[i] = v;
    }
    Ok(e)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemManifest {
    lattice: PhaseLattice,
    frame_bounds: (f64, f64),
    window: String,
    dual: String,
}

/// Stores `<dir>/<name>.json` with the lattice and frame bounds, plus raw window and dual arrays.
pub fn write_system(dir: &Path, name: &str, sys: &GaborSystem) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let window = format!("{name}_window.bin");
    let dual = format!("{name}_dual.bin");
    write_sampled(&dir.join(&window), &sys.window, Precision::Complex128)?;
    write_sampled(&dir.join(&dual), &sys.dual, Precision::Complex128)?;
    let manifest = SystemManifest { lattice: sys.lattice, frame_bounds: sys.frame_bounds, window, dual };
    std::fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn read_system(dir: &Path, name: &str) -> Result<GaborSystem> {
    let manifest: SystemManifest = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.json")))?)?;
    Ok(GaborSystem {
        window: read_sampled(&dir.join(&manifest.window))?,
        dual: read_sampled(&dir.join(&manifest.dual))?,
        lattice: manifest.lattice,
        frame_bounds: manifest.frame_bounds,
    })
}
