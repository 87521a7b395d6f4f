mod common;

use std::sync::Arc;

use pathtower::padic::reduce_mod_power;
use pathtower::scalar::ratio;
use pathtower::tree::random_automorphism;
use pathtower::{
    act, adjoint, canonicalize, coboundary, in_gamma0, pairing, tree_distance, Cochain, GroupElement, Level,
    LatticeClassVertex, PathGraph, Scalar,
};
use proptest::prelude::*;

fn towers() -> Vec<Arc<PathGraph>> {
    [(2, 2, 0), (2, 3, 1), (3, 2, 1), (2, 3, 2)]
        .into_iter()
        .map(|(q, r, k)| Arc::new(common::tower(q, r, k)))
        .collect()
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| ratio(n, d))
}

fn entries(len: usize) -> impl Strategy<Value = Vec<(usize, Scalar)>> {
    prop::collection::vec((0..len, scalar()), 0..12)
}

fn group_element() -> impl Strategy<Value = GroupElement> {
    prop::array::uniform4(scalar())
        .prop_filter_map("singular", |[a, b, c, d]| GroupElement::new(a, b, c, d).ok())
}

fn integral_unit_matrix(p: u64) -> impl Strategy<Value = GroupElement> {
    prop::array::uniform4(-9i64..=9).prop_filter_map("det not a unit", move |[a, b, c, d]| {
        let det = a * d - b * c;
        (det != 0 && det % p as i64 != 0).then(|| GroupElement::from_ints(a, b, c, d).unwrap())
    })
}

/// Unreduced `(n, u)`; the prime is applied in the test body.
fn vertex() -> impl Strategy<Value = (i64, Scalar)> {
    (-3i64..=3, scalar())
}

fn prime() -> impl Strategy<Value = u64> {
    prop_oneof![Just(2u64), Just(3), Just(5)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn coboundary_and_adjoint_are_adjoint(t in 0usize..4, fv in entries(200), we in entries(200)) {
        let pg = &towers()[t];
        let f = Cochain::from_pairs(Level::Vertex, fv.into_iter().map(|(i, x)| (i % pg.num_vertices(), x)));
        let w = Cochain::from_pairs(Level::Edge, we.into_iter().map(|(i, x)| (i % pg.num_edges().max(1), x)));
        let w = if pg.num_edges() == 0 { Cochain::zero(Level::Edge) } else { w };
        let lhs = pairing(&coboundary(pg, &f).unwrap(), &w).unwrap();
        let rhs = pairing(&f, &adjoint(pg, &w).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn operators_commute_with_automorphisms(t in 0usize..4, seed in any::<u64>(), fv in entries(200)) {
        let pg = &towers()[t];
        let g = random_automorphism(pg.ball(), seed);
        let m = pg.apply_automorphism(&g).unwrap();
        let f = Cochain::from_pairs(Level::Vertex, fv.into_iter().map(|(i, x)| (i % pg.num_vertices(), x)));
        let df = coboundary(pg, &f).unwrap();
        prop_assert_eq!(coboundary(pg, &f.push_forward(&m)).unwrap(), df.push_forward(&m));
        prop_assert_eq!(adjoint(pg, &df.push_forward(&m)).unwrap(), adjoint(pg, &df).unwrap().push_forward(&m));
    }

    #[test]
    fn cochain_csv_roundtrip(edge in any::<bool>(), e in entries(50)) {
        let level = if edge { Level::Edge } else { Level::Vertex };
        let c = Cochain::from_pairs(level, e);
        if c.is_zero() {
            prop_assert!(Cochain::from_csv(&c.to_csv()).is_err());
            return Ok(());
        }
        prop_assert_eq!(Cochain::from_csv(&c.to_csv()).unwrap(), c);
    }

    #[test]
    fn action_is_a_left_action(p in prime(), g in group_element(), h in group_element(), v in vertex()) {
        let v = LatticeClassVertex::new(v.0, v.1, p);
        let gh = act(&g.mul(&h), &v, p).unwrap();
        prop_assert_eq!(gh, act(&g, &act(&h, &v, p).unwrap(), p).unwrap());
        prop_assert_eq!(act(&GroupElement::identity(), &v, p).unwrap(), v);
    }

    #[test]
    fn action_preserves_distance(p in prime(), g in group_element(), v in vertex(), w in vertex()) {
        let (v, w) = (LatticeClassVertex::new(v.0, v.1, p), LatticeClassVertex::new(w.0, w.1, p));
        let d = tree_distance(&v, &w, p);
        prop_assert_eq!(tree_distance(&act(&g, &v, p).unwrap(), &act(&g, &w, p).unwrap(), p), d);
        prop_assert_eq!(tree_distance(&w, &v, p), d);
        prop_assert_eq!(d == 0, v == w);
    }

    #[test]
    fn gamma0_membership_ignores_scaling(p in prime(), g in group_element(), n in 0u32..3, e in -3i64..=3, c in scalar()) {
        prop_assume!(!num::Zero::is_zero(&c));
        let lambda = pathtower::padic::p_power(p, e) * c;
        prop_assert_eq!(in_gamma0(&g.scaled(&lambda).unwrap(), n, p), in_gamma0(&g, n, p));
    }

    #[test]
    fn reduction_stays_in_class(p in prime(), u in scalar(), n in -2i64..4) {
        let r = reduce_mod_power(&u, p, n);
        prop_assert!(r >= Scalar::from_integer(0.into()));
        prop_assert!(r < pathtower::padic::p_power(p, n));
        let diff = &u - &r;
        prop_assert!(pathtower::padic::valuation(&diff, p).is_none_or(|v| v >= n));
        prop_assert_eq!(LatticeClassVertex::new(n, u, p), LatticeClassVertex::new(n, r, p));
    }

    #[test]
    fn canonical_form_ignores_right_integral_units(p in prime(), g in group_element(), k in integral_unit_matrix(2)) {
        prop_assume!(k.det().numer() % p as i64 != 0.into());
        let v = canonicalize(&g, p).unwrap();
        prop_assert_eq!(canonicalize(&g.mul(&k), p).unwrap(), v.clone());
        prop_assert_eq!(canonicalize(&v.matrix(p), p).unwrap(), v);
    }
}
