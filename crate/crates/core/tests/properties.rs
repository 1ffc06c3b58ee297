//! Property-based invariants for the subspace and projection layer.

use proptest::prelude::*;

use wsobolev::grassmann::{grassmann_distance, Subspace};
use wsobolev::linalg;

const DIM: usize = 3;

fn vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, DIM)
}

fn subspace() -> impl Strategy<Value = Subspace> {
    prop::collection::vec(vector(), 0..=DIM)
        .prop_map(|vs| Subspace::span(DIM, &vs).expect("span is always buildable"))
}

proptest! {
    #[test]
    fn projection_is_idempotent(s in subspace(), v in vector()) {
        let once = s.project(&v).unwrap();
        let twice = s.project(&once).unwrap();
        prop_assert!(linalg::dist(&once, &twice) <= 1e-12);
    }

    #[test]
    fn projection_is_linear(s in subspace(), v in vector(), w in vector(),
                            a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut combo = linalg::scale(a, &v);
        linalg::axpy(&mut combo, b, &w);
        let direct = s.project(&combo).unwrap();
        let mut assembled = linalg::scale(a, &s.project(&v).unwrap());
        linalg::axpy(&mut assembled, b, &s.project(&w).unwrap());
        prop_assert!(linalg::dist(&direct, &assembled) <= 1e-10);
    }

    #[test]
    fn projection_is_non_expansive(s in subspace(), v in vector()) {
        let p = s.project(&v).unwrap();
        prop_assert!(linalg::norm(&p) <= linalg::norm(&v) + 1e-12);
    }

    #[test]
    fn distance_is_symmetric_and_bounded(a in subspace(), b in subspace()) {
        let dab = grassmann_distance(&a, &b).unwrap();
        let dba = grassmann_distance(&b, &a).unwrap();
        // the sin-of-largest-principal-angle distance goes through a square
        // root, so unit-roundoff in the singular values shows up at √ε scale
        prop_assert!((dab - dba).abs() <= 1e-6, "d(a,b)={dab} d(b,a)={dba}");
        prop_assert!((0.0..=1.0 + 1e-12).contains(&dab));
    }

    #[test]
    fn distance_vanishes_on_identical_spans(a in subspace()) {
        let d = grassmann_distance(&a, &a).unwrap();
        // √ε scale for the same reason as the symmetry check
        prop_assert!(d <= 1e-6, "d(a,a) = {d}");
    }

    #[test]
    fn union_contains_both_operands(a in subspace(), b in subspace(), v in vector()) {
        let u = a.span_union(&b).unwrap();
        // anything already in `a` is fixed by projecting onto the union
        let pa = a.project(&v).unwrap();
        prop_assert!(linalg::dist(&u.project(&pa).unwrap(), &pa) <= 1e-9);
        let pb = b.project(&v).unwrap();
        prop_assert!(linalg::dist(&u.project(&pb).unwrap(), &pb) <= 1e-9);
    }
}
