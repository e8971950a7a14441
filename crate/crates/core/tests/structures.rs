mod common;

use std::collections::BTreeMap;

use common::{arb_arith_formula, arb_chain, arb_rel_formula};
use fulfillment_core::structures::make_segment;
use fulfillment_core::{fulfills, Assignment, Element};
use proptest::prelude::*;

// M_a ⊆ M_b iff every value S(a-1), (a-1)+(a-1), (a-1)*(a-1) lands below b.
fn segment_inclusion_oracle(a: u64, b: u64) -> bool {
    let top = a - 1;
    a <= b && (top + 1).max(2 * top).max(top * top) < b
}

#[test]
fn segment_inclusion_matches_closed_form_and_tables() {
    let segs: Vec<_> = (1..=30).map(|n| make_segment(n).unwrap()).collect();
    let tables: Vec<_> = segs.iter().map(|s| s.materialize()).collect();
    for a in 1..=30u64 {
        for b in 1..=30u64 {
            let (i, j) = (a as usize - 1, b as usize - 1);
            let fast = segs[i].is_substructure(&segs[j]).unwrap();
            assert_eq!(fast, segment_inclusion_oracle(a, b), "M_{a} ⊆ M_{b}");
            assert_eq!(tables[i].is_substructure(&tables[j]).unwrap(), fast, "tables {a} {b}");
        }
    }
}

proptest! {
    #[test]
    fn intensional_and_explicit_segments_agree(
        n in 1u64..=30,
        f in arb_arith_formula(),
        x in 0u64..30, y in 0u64..30, z in 0u64..30,
    ) {
        let seg = make_segment(n).unwrap();
        let explicit = seg.materialize();
        let a = Assignment::from([("x".into(), x % n), ("y".into(), y % n), ("z".into(), z % n)]);
        for t in f.all_terms() {
            prop_assert_eq!(seg.eval_term(&t, &a), explicit.eval_term(&t, &a));
        }
        prop_assert_eq!(seg.satisfies(&f, &a), explicit.satisfies(&f, &a));
    }

    #[test]
    fn substructure_is_transitive(v in arb_chain(3..=4, 4)) {
        let l = v.levels();
        for i in 0..l.len() {
            for j in i..l.len() {
                if i != j {
                    prop_assert!(l[i].is_substructure(&l[j]).unwrap());
                }
            }
        }
    }

    #[test]
    fn relabelling_is_an_isomorphism(v in arb_chain(1..=4, 4), shift in 1u64..50, f in arb_rel_formula()) {
        let top = v.top();
        let map: BTreeMap<Element, Element> =
            top.domain().iter().map(|e| (e, 3 * e + shift)).collect();
        let w = v.relabel(&map).unwrap();
        prop_assert!(v.is_isomorphism(&w, &map));
        prop_assert!(top.is_isomorphic(w.top()).is_some());
        for b in top.domain().iter() {
            let a = Assignment::from([("x".into(), b)]);
            let moved = Assignment::from([("x".into(), map[&b])]);
            prop_assert_eq!(top.satisfies(&f, &a), w.top().satisfies(&f, &moved));
            prop_assert_eq!(fulfills(&v, &f, &a), fulfills(&w, &f, &moved));
        }
    }
}
