use num_complex::Complex64;
use proptest::prelude::*;

use qperm::cyclotomic::{
    cycle_decompose, lam_leung_member, sum_roots, CyclotomicInt, ExponentMultiset,
};
use qperm::hadamard::{
    dephase, equivalent, fourier, is_hadamard, named, parse_blog, parse_cmat, parse_phase, tensor,
    EquivalenceWitness, HadamardMatrix, Phase,
};
use qperm::magic::{
    detect_latin, hom_dim, latin_conjugate, latin_group, magic_from_hadamard, HomMethod,
    LatinSquare,
};
use qperm::obstructions::{decide_with, WitnessRegistry};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn phase() -> impl Strategy<Value = Phase> {
    prop_oneof![
        (0i64..24, 1u32..25).prop_map(|(k, l)| Phase::root(k, l)),
        (0.0..std::f64::consts::TAU).prop_map(|t| Phase::Unit(Complex64::from_polar(1.0, t))),
    ]
}

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn witness(n: usize) -> impl Strategy<Value = EquivalenceWitness> {
    (
        perm(n),
        perm(n),
        prop::collection::vec(phase(), n),
        prop::collection::vec(phase(), n),
    )
        .prop_map(
            |(row_perm, col_perm, row_scalars, col_scalars)| EquivalenceWitness {
                row_perm,
                col_perm,
                row_scalars,
                col_scalars,
            },
        )
}

/// An isotope of the cyclic Latin square: rows, columns and symbols
/// permuted independently.
fn latin(n: usize) -> impl Strategy<Value = LatinSquare> {
    (perm(n), perm(n), perm(n)).prop_map(move |(r, c, s)| {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| s[(r[i] + c[j]) % n] + 1).collect())
            .collect();
        LatinSquare::new(rows).unwrap()
    })
}

fn small_matrix() -> impl Strategy<Value = HadamardMatrix> {
    prop_oneof![
        (2usize..7).prop_map(|n| fourier(n).into()),
        phase().prop_map(|q| named("F_22", &[q]).unwrap()),
        phase().prop_map(|q| named("H", &[q]).unwrap()),
        (phase(), phase()).prop_map(|(r, s)| named("F_23", &[r, s]).unwrap()),
        Just(named("T", &[]).unwrap()),
    ]
}

fn matrix_and_witness() -> impl Strategy<Value = (HadamardMatrix, EquivalenceWitness)> {
    small_matrix().prop_flat_map(|h| {
        let n = h.n();
        (Just(h), witness(n))
    })
}

fn cyclo(order: u32) -> impl Strategy<Value = CyclotomicInt> {
    prop::collection::vec(0..order as u64, 0..8)
        .prop_map(move |e| CyclotomicInt::from_exponents(order, e).unwrap())
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn cyclotomic_ring_laws(a in cyclo(12), b in cyclo(12), c in cyclo(12)) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(a.conj().conj(), a.clone());
        let z = (&a * &b).to_complex();
        prop_assert!((z - a.to_complex() * b.to_complex()).norm() < 1e-9);
    }

    #[test]
    fn rotated_cycles_vanish_and_decompose(
        parts in prop::collection::vec((prop::sample::select(vec![2u32, 3, 5]), 0u32..30), 1..5)
    ) {
        let l = 30;
        let exps: Vec<u32> = parts
            .iter()
            .flat_map(|&(p, rot)| (0..p).map(move |t| (rot + t * l / p) % l))
            .collect();
        let len = exps.len() as u32;
        let s = ExponentMultiset::new(l, exps).unwrap();
        prop_assert!(sum_roots(&s).is_zero());
        let d = cycle_decompose(&s).unwrap();
        prop_assert!(d.is_some());
        prop_assert_eq!(d.unwrap().profile().iter().sum::<u32>(), len);
        prop_assert!(lam_leung_member(len, l));
    }

    #[test]
    fn witness_inverse_undoes_apply((h, w) in matrix_and_witness()) {
        let image = w.apply(&h).unwrap();
        prop_assert!(is_hadamard(&image).hadamard);
        prop_assert!(w.inverse().maps(&image, &h, 1e-9));
    }

    #[test]
    fn dephasing_normalises_first_row_and_column(h in small_matrix()) {
        let (d, w) = dephase(&h);
        prop_assert!(w.maps(&h, &d, 1e-9));
        for k in 0..h.n() {
            prop_assert!((d.get(0, k) - 1.0).norm() < 1e-9);
            prop_assert!((d.get(k, 0) - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn tensor_products_are_hadamard(a in small_matrix(), b in (2usize..4).prop_map(|n| HadamardMatrix::from(fourier(n)))) {
        let t = tensor(&a, &b);
        prop_assert_eq!(t.n(), a.n() * b.n());
        prop_assert!(is_hadamard(&t).hadamard);
    }

    #[test]
    fn latin_conjugation_is_an_involution(s in (1usize..8).prop_flat_map(latin)) {
        let c = latin_conjugate(&s);
        prop_assert_eq!(latin_conjugate(&c), s.clone());
        // Row k of the conjugate is the inverse of the permutation i -> s[i][j] = k.
        for i in 0..s.n() {
            for j in 0..s.n() {
                prop_assert_eq!(c.get(s.get(i, j) - 1, j), i + 1);
            }
        }
    }

    #[test]
    fn parsers_never_panic(text in ".{0,200}") {
        let _ = parse_blog(&text);
        let _ = parse_cmat(&text);
        let _ = parse_phase(&text);
    }

    #[test]
    fn phase_syntax_round_trips(k in -50i64..50, l in 1u32..40) {
        let p = Phase::root(k, l);
        prop_assert_eq!(parse_phase(&p.to_string()).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn equivalence_is_symmetric((h, seed) in matrix_and_witness()) {
        let image = seed.apply(&h).unwrap();
        let forward = equivalent(&h, &image).unwrap();
        let backward = equivalent(&image, &h).unwrap();
        let (f, b) = (forward.witness(), backward.witness());
        prop_assert!(f.is_some() && b.is_some());
        prop_assert!(f.unwrap().maps(&h, &image, 1e-8));
        prop_assert!(b.unwrap().maps(&image, &h, 1e-8));
    }

    #[test]
    fn latin_detection_survives_equivalence(w in (2usize..7).prop_flat_map(witness)) {
        let n = w.row_perm.len();
        let h = w.apply(&fourier(n).into()).unwrap();
        let s = detect_latin(&magic_from_hadamard(&h));
        prop_assert!(s.is_some());
        let g = latin_group(&s.unwrap()).unwrap();
        prop_assert_eq!(g.order, n as u64);
        prop_assert!(g.is_cyclic());
    }

    #[test]
    fn latin_groups_have_degree_many_elements_at_least(s in (1usize..7).prop_flat_map(latin)) {
        let g = latin_group(&s).unwrap();
        prop_assert!(g.order >= s.n() as u64);
        prop_assert_eq!(g.order_histogram.values().sum::<u64>(), g.order);
    }

    #[test]
    fn hom_dimensions_are_symmetric(h in small_matrix(), k in 0usize..3, l in 0usize..2) {
        prop_assume!(h.n() <= 4 || k + l <= 2);
        let xi = magic_from_hadamard(&h);
        let a = hom_dim(&xi, k, l, HomMethod::Auto).unwrap();
        let b = hom_dim(&xi, l, k, HomMethod::Auto).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn no_cell_has_both_witness_and_obstruction() {
    let reg = WitnessRegistry::new(10);
    for n in 1..=10 {
        for l in 1..=60 {
            decide_with(&reg, n, l).unwrap();
        }
    }
}
