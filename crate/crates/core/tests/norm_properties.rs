use num_complex::Complex64;
use proptest::prelude::*;
use tfweyl::lattice_norms::{mixed_norm, ExponentPair, Lattice, LatticeSequence, PhaseLattice};
use tfweyl::matrix_space::{check_composition_estimate, ExponentTriple, GaborMatrix};
use tfweyl::weights::Weight;

fn lattice() -> PhaseLattice {
    PhaseLattice::square(Lattice::new(0.5, 1, 3).unwrap())
}

fn sequence(values: Vec<(f64, f64)>) -> LatticeSequence {
    LatticeSequence::new(lattice(), values.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 49)
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.25), Just(0.5), Just(1.0), Just(1.5), Just(2.0), Just(3.0), Just(f64::INFINITY)]
}

proptest! {
    #[test]
    fn mixed_norm_is_homogeneous(v in entries(), p in exponent(), q in exponent(), s in -4.0..4.0f64) {
        let pair = ExponentPair::new(p, q).unwrap();
        let w = Weight::polynomial(1.5);
        let c = sequence(v);
        let scaled = LatticeSequence::new(c.lattice, c.values.iter().map(|x| x * s).collect()).unwrap();
        let lhs = mixed_norm(&scaled, pair, Some(&w)).unwrap();
        let rhs = s.abs() * mixed_norm(&c, pair, Some(&w)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn mixed_norm_is_r_subadditive(a in entries(), b in entries(), p in exponent(), q in exponent()) {
        let pair = ExponentPair::new(p, q).unwrap();
        let r = pair.quasi_triangle_constant();
        let (a, b) = (sequence(a), sequence(b));
        let sum = LatticeSequence::new(a.lattice, a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect()).unwrap();
        let n = |c: &LatticeSequence| mixed_norm(c, pair, None).unwrap().powf(r);
        prop_assert!(n(&sum) <= (n(&a) + n(&b)) * (1.0 + 1e-12));
    }

    #[test]
    fn mixed_norm_is_monotone(v in entries(), shrink in prop::collection::vec(0.0..1.0f64, 49), p in exponent(), q in exponent()) {
        let pair = ExponentPair::new(p, q).unwrap();
        let big = sequence(v);
        let small = LatticeSequence::new(big.lattice, big.values.iter().zip(&shrink).map(|(x, s)| x * *s).collect()).unwrap();
        prop_assert!(mixed_norm(&small, pair, None).unwrap() <= mixed_norm(&big, pair, None).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn larger_exponents_give_smaller_norms(v in entries(), p in exponent(), q in exponent()) {
        let c = sequence(v);
        let base = mixed_norm(&c, ExponentPair::new(p, q).unwrap(), None).unwrap();
        let larger = mixed_norm(&c, ExponentPair::new(p.max(2.0), q.max(2.0)).unwrap(), None).unwrap();
        prop_assert!(larger <= base * (1.0 + 1e-12));
    }

    #[test]
    fn u_norm_depends_only_on_magnitudes(v in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 49), p in exponent(), q in exponent()) {
        let index = Lattice::new(1.0, 1, 3).unwrap();
        let m = GaborMatrix::new(index, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap();
        let pair = ExponentPair::new(p, q).unwrap();
        let w = Weight::exponential(0.2).of_difference(1);
        let direct = m.u_norm(pair, Some(&w)).unwrap();
        prop_assert!((direct - m.abs().u_norm(pair, Some(&w)).unwrap()).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn complex_composition_respects_the_conservative_constant(
        a in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 81),
        b in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 81),
    ) {
        let index = Lattice::new(1.0, 1, 4).unwrap();
        let to_m = |v: Vec<(f64, f64)>| GaborMatrix::new(index, v.into_iter().map(|(x, y)| Complex64::new(x, y)).collect()).unwrap();
        let e = |p: f64, q: f64| ExponentPair::new(p, q).unwrap();
        let triple = ExponentTriple::new(e(2.0, 1.0), e(4.0, 0.5), e(4.0, 0.5));
        let report = check_composition_estimate(&to_m(a), &to_m(b), triple, None).unwrap();
        // the magnitude argument gives 1; 16 is the documented safety margin
        prop_assert!(report.ratio <= 16.0);
        prop_assert!(report.ratio <= 1.0 + 1e-10, "observed complex ratio {}", report.ratio);
    }
}

