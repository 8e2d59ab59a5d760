use std::sync::Arc;

use envlab::bundle::advice_bundle;
use envlab::envelope::{compose_o2, is_uniformly_universal, principal_o2_envelope, star};
use envlab::finspace::opens;
use envlab::realpw::{cluster_envelope, q, universality_defects, Affine, PAFunction};
use envlab::{Caps, ElemSet, FinSpace, PointMap};
use proptest::prelude::*;

const NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

/// A random partial order on `n` points: a random relation between earlier
/// and later points, closed transitively.
fn poset(max: usize) -> impl Strategy<Value = Arc<FinSpace>> {
    (1..=max)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (Just(n), prop::collection::vec(any::<bool>(), pairs))
        })
        .prop_map(|(n, bits)| {
            let mut lt = vec![vec![false; n]; n];
            let mut bits = bits.into_iter();
            for (i, row) in lt.iter_mut().enumerate() {
                for cell in &mut row[i + 1..] {
                    *cell = bits.next().expect("one bit per pair");
                }
            }
            for m in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if lt[i][m] && lt[m][j] {
                            lt[i][j] = true;
                        }
                    }
                }
            }
            Arc::new(
                FinSpace::from_le(&NAMES[..n], |i, j| i == j || lt[i][j]).expect("partial order"),
            )
        })
}

fn map_between(x: Arc<FinSpace>, y: Arc<FinSpace>) -> impl Strategy<Value = PointMap> {
    let m = y.len();
    prop::collection::vec(0..m, x.len())
        .prop_map(move |a| PointMap::new(x.clone(), y.clone(), a).expect("valid assignment"))
}

fn map(max: usize) -> impl Strategy<Value = PointMap> {
    (poset(max), poset(max)).prop_flat_map(|(x, y)| map_between(x, y))
}

/// Composable maps `f: X → Y` and `g: Y → Z`.
fn map_pair(max: usize) -> impl Strategy<Value = (PointMap, PointMap)> {
    (poset(max), poset(max), poset(max))
        .prop_flat_map(|(x, y, z)| (map_between(x, y.clone()), map_between(y, z)))
}

fn subset(s: &FinSpace, bits: u32) -> ElemSet {
    (0..s.len()).filter(|i| bits >> i & 1 == 1).collect()
}

fn pa_function() -> impl Strategy<Value = PAFunction> {
    prop::collection::btree_set(-4i64..=4, 0..4)
        .prop_flat_map(|bs| {
            let k = bs.len();
            (
                Just(bs),
                prop::collection::vec(-3i64..=3, k),
                prop::collection::vec((-2i64..=2, -3i64..=3), k + 1),
            )
        })
        .prop_map(|(bs, vals, pieces)| {
            PAFunction::new(
                bs.into_iter()
                    .zip(vals)
                    .map(|(b, v)| (q(b), q(v)))
                    .collect(),
                pieces
                    .into_iter()
                    .map(|(s, c)| Affine::new(q(s), q(c)))
                    .collect(),
            )
            .expect("increasing breakpoints")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn interior_and_closure_laws(s in poset(5), bits in any::<u32>()) {
        let set = subset(&s, bits);
        let int = s.interior_set(&set);
        let cl = s.closure_set(&set);
        prop_assert!(int.is_subset(&set) && s.is_up_set(&int));
        prop_assert!(set.is_subset(&cl) && s.is_down_set(&cl));
        prop_assert_eq!(s.interior_set(&int), int);
        prop_assert_eq!(s.closure_set(&cl), cl);
        let complement = s.all().difference(&set);
        prop_assert_eq!(cl, s.all().difference(&s.interior_set(&complement)));
    }

    #[test]
    fn principal_envelope_is_a_universal_envelope(f in map(4)) {
        let env = principal_o2_envelope(&f);
        prop_assert!(env.map().is_envelope_of(&f));
        let v = is_uniformly_universal(&f, env.map(), &Caps::default()).expect("envelope");
        prop_assert!(v.holds, "counterexample {:?}", v.counterexample);
    }

    #[test]
    fn star_respects_composition((f, g) in map_pair(3)) {
        let caps = Caps::default();
        let (big_f, big_g) = (principal_o2_envelope(&f), principal_o2_envelope(&g));
        let gf = compose_o2(big_g.map(), big_f.map(), &caps).expect("composable");
        let (st_gf, st_f, st_g) = (
            star(&gf, &caps).expect("star"),
            star(big_f.map(), &caps).expect("star"),
            star(big_g.map(), &caps).expect("star"),
        );
        for (i, w) in st_g.opens().opens().iter().enumerate() {
            let via = st_f.row(&st_g.row_at(i)).expect("star rows are open");
            prop_assert_eq!(st_gf.row(&w.members()), Some(via));
        }
    }

    #[test]
    fn advice_projection_is_the_interior_pair(f in map(3)) {
        let ab = advice_bundle(&f, &Caps::default()).expect("bundle");
        for a in 0..ab.pf.len() {
            prop_assert_eq!(ab.pf[ab.pf[a]], ab.pf[a]);
            let (_, v) = ab.rel.pairs[a];
            let (u2, v2) = ab.rel.pairs[ab.pf[a]];
            prop_assert_eq!(v2, v);
            let vset = ab.rel.y_opens.get(v).members();
            let expected = f.domain().interior_set(&f.preimage(&vset));
            prop_assert_eq!(ab.rel.x_opens.get(u2).members(), expected);
        }
        prop_assert!(ab.iso_oy);
    }

    #[test]
    fn interior_preimages_compose_with_inclusion((f, g) in map_pair(4)) {
        let (x, y) = (f.domain().clone(), f.codomain().clone());
        let gf = f.then(&g).expect("composable");
        let zo = opens(g.codomain(), &Caps::default()).expect("opens");
        for w in zo.opens() {
            let inner = y.interior_set(&g.preimage(&w.members()));
            let lhs = x.interior_set(&f.preimage(&inner));
            let rhs = x.interior_set(&gf.preimage(&w.members()));
            prop_assert!(lhs.is_subset(&rhs));
        }
    }

    #[test]
    fn cluster_envelope_is_an_envelope(f in pa_function()) {
        let env = cluster_envelope(&f);
        prop_assert!(env.is_envelope_of(&f));
        for (b, fb) in f.breakpoints() {
            prop_assert!(env.values_at(b).contains(fb));
        }
    }

    #[test]
    fn defects_are_unattained_cluster_values(f in pa_function()) {
        let env = cluster_envelope(&f);
        for d in universality_defects(&f) {
            prop_assert!(env.values_at(&d.breakpoint).contains(&d.value));
            prop_assert_ne!(f.eval(&d.breakpoint), d.value.clone());
            prop_assert!(!d.witness.contains(&d.value));
            prop_assert!(d.witness.contains(&f.eval(&d.breakpoint)));
        }
    }
}
