use num_complex::Complex64;
use tfweyl::gabor::{gaussian_window, GaborSystem};
use tfweyl::grid::Grid;
use tfweyl::hermite::HermiteExpansion;
use tfweyl::io::*;
use tfweyl::lattice_norms::{Lattice, LatticeSequence, PhaseLattice};
use tfweyl::matrix_space::GaborMatrix;

fn wave(i: usize) -> Complex64 {
    Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos() - 0.5)
}

#[test]
fn sampled_arrays_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(2, 16, 3.0).unwrap();
    let f = grid.sample(|x| Complex64::new(x[0], x[1] * x[1]));
    let path = dir.path().join("f.bin");
    write_sampled(&path, &f, Precision::Complex128).unwrap();
    assert_eq!(read_sampled(&path).unwrap(), f);
    write_sampled(&path, &f, Precision::Complex64).unwrap();
    let single = read_sampled(&path).unwrap();
    assert!(single.rel_l2_distance(&f) < 1e-7);
    std::fs::write(&path, [0u8; 5]).unwrap();
    assert!(read_sampled(&path).is_err());
}

#[test]
fn sequences_round_trip() {
    let lattice = PhaseLattice::square(Lattice::new(0.5, 1, 4).unwrap());
    let mut c = LatticeSequence::zeros(lattice);
    for i in 0..c.values.len() {
        if i % 3 != 0 {
            c.values[i] = wave(i);
        }
    }
    let mut csv_bytes = Vec::new();
    write_sequence_csv(&mut csv_bytes, &c).unwrap();
    assert_eq!(read_sequence_csv(csv_bytes.as_slice(), lattice).unwrap(), c);
    let mut bin = Vec::new();
    write_sequence_bin(&mut bin, &c).unwrap();
    assert_eq!(read_sequence_bin(bin.as_slice(), lattice).unwrap(), c);
    let off_lattice = "j1,iota1,re,im\n0.3,0,1,0\n";
    assert!(read_sequence_csv(off_lattice.as_bytes(), lattice).is_err());
}

#[test]
fn matrices_round_trip() {
    let index = Lattice::new(1.0, 1, 3).unwrap();
    let m = GaborMatrix::new(index, (0..49).map(|i| if i % 4 == 0 { Complex64::new(0.0, 0.0) } else { wave(i) }).collect()).unwrap();
    let mut bytes = Vec::new();
    write_matrix_coo(&mut bytes, &m).unwrap();
    assert_eq!(read_matrix_coo(bytes.as_slice(), index).unwrap(), m);
    assert!(read_matrix_coo("j_idx,k_idx,re,im\n7,0,1,0\n".as_bytes(), index).is_err());
}

#[test]
fn expansions_round_trip() {
    let e = HermiteExpansion::from_fn(2, 6, |a| wave(a[0] * 7 + a[1])).unwrap();
    let mut bytes = Vec::new();
    write_expansion_csv(&mut bytes, &e).unwrap();
    assert_eq!(read_expansion_csv(bytes.as_slice(), 2).unwrap(), e);
}

#[test]
fn gabor_systems_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(1, 128, 12.0).unwrap();
    let sys = GaborSystem::new(gaussian_window(&grid), PhaseLattice::square(Lattice::covering(0.5, 1, 8.0).unwrap())).unwrap();
    write_system(dir.path(), "gauss", &sys).unwrap();
    let back = read_system(dir.path(), "gauss").unwrap();
    assert_eq!(back.window, sys.window);
    assert_eq!(back.dual, sys.dual);
    assert_eq!(back.lattice, sys.lattice);
    assert_eq!(back.frame_bounds, sys.frame_bounds);
}
