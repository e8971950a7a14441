mod common;

use common::{arb_arith_formula, rel_sig};
use fulfillment_core::logic::{enumerate_formulas, measures, parse_formula, render_formula};
use fulfillment_core::{Formula, Signature};
use proptest::prelude::*;

#[test]
fn enumerated_formulas_round_trip() {
    for sig in [Signature::arithmetic(), (*rel_sig()).clone()] {
        let fs = enumerate_formulas(&sig, 500);
        assert_eq!(fs.len(), 500);
        for f in &fs {
            let text = render_formula(f);
            assert_eq!(parse_formula(&text, &sig).as_ref(), Ok(f), "{text}");
        }
    }
}

#[test]
fn enumeration_is_ordered_by_length() {
    let fs = enumerate_formulas(&rel_sig(), 800);
    assert!(fs.windows(2).all(|w| w[0].length() <= w[1].length()));
    let longer = enumerate_formulas(&rel_sig(), 900);
    assert_eq!(&longer[..800], &fs[..]);
}

proptest! {
    #[test]
    fn random_formulas_round_trip(f in arb_arith_formula()) {
        let sig = Signature::arithmetic();
        let text = render_formula(&f);
        prop_assert_eq!(parse_formula(&text, &sig), Ok(f));
    }

    #[test]
    fn measures_are_compositional(a in arb_arith_formula(), b in arb_arith_formula()) {
        let (ma, mb) = (measures(&a), measures(&b));
        let both = Formula::and(a.clone(), b.clone());
        prop_assert_eq!(both.depth(), ma.depth + mb.depth);
        prop_assert_eq!(both.length(), ma.length + mb.length + 1);
        let q = Formula::forall("w", Formula::not(a.clone()));
        prop_assert_eq!(measures(&q).depth, ma.depth + 1);
        prop_assert_eq!(measures(&q).length, ma.length + 3);
        prop_assert_eq!(a.canonical_tokens().len(), ma.length);
    }

    #[test]
    fn subformulas_contain_the_formula(f in arb_arith_formula()) {
        let subs = f.subformulas();
        prop_assert!(subs.contains(&f));
        prop_assert!(subs.iter().all(|g| g.depth() <= f.depth() && g.length() <= f.length()));
    }

    #[test]
    fn renaming_bound_variables_apart_keeps_meaning(f in arb_arith_formula()) {
        let g = f.rename_bound_apart("b");
        prop_assert_eq!(g.free_vars(), f.free_vars());
        prop_assert_eq!(measures(&g), measures(&f));
    }
}
