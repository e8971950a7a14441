#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use fulfillment_core::logic::{enumerate_formulas, Symbol};
use fulfillment_core::structures::StructureTables;
use fulfillment_core::{Formula, LnModel, PartialStructure, Signature, Term};
use proptest::prelude::*;

/// `{P/1, R/2, f/1, c}`.
pub fn rel_sig() -> Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| {
        Arc::new(
            Signature::new(vec![Symbol::new("P", 1), Symbol::new("R", 2)], vec![Symbol::new("f", 1)], vec!["c".into()])
                .unwrap(),
        )
    })
    .clone()
}

/// Raw material for one chain; [`ChainSeed::build`] turns it into a valid
/// chain by construction.
#[derive(Clone, Debug)]
pub struct ChainSeed {
    pub len: usize,
    pub size: usize,
    pub bytes: Vec<u8>,
}

impl ChainSeed {
    /// Each element gets a first level; `c` is element 0 and lives at level
    /// 0. An element first appearing below the top sends `f` one level up at
    /// most, so every level is a substructure of the next.
    pub fn build(&self) -> LnModel {
        let mut b = self.bytes.iter().copied().cycle();
        let mut next = move || b.next().unwrap_or(0) as usize;
        let n = self.len;
        let k = self.size;
        let first: Vec<usize> = (0..k).map(|e| if e == 0 { 0 } else { next() % n }).collect();
        let dom = |i: usize| -> BTreeSet<u64> { (0..k).filter(|e| first[*e] <= i).map(|e| e as u64).collect() };
        let top_dom = dom(n - 1);
        let mut f = BTreeMap::new();
        for (e, &lvl) in first.iter().enumerate() {
            let target: Vec<u64> = dom((lvl + 1).min(n - 1)).into_iter().collect();
            let defined = lvl + 1 < n || next() % 3 != 0;
            if defined {
                f.insert(vec![e as u64], target[next() % target.len()]);
            }
        }
        let p: BTreeSet<Vec<u64>> = top_dom.iter().filter(|_| next() % 2 == 0).map(|e| vec![*e]).collect();
        let mut r = BTreeSet::new();
        for a in &top_dom {
            for b2 in &top_dom {
                if next() % 3 == 0 {
                    r.insert(vec![*a, *b2]);
                }
            }
        }
        let top = PartialStructure::from_tables(
            rel_sig(),
            StructureTables {
                domain: top_dom,
                constants: [("c".to_string(), 0)].into(),
                relations: [("P".to_string(), p), ("R".to_string(), r)].into(),
                functions: [("f".to_string(), f)].into(),
            },
        )
        .unwrap();
        let levels = (0..n).map(|i| top.restrict(&dom(i)).unwrap()).collect();
        LnModel::new(levels).unwrap()
    }
}

pub fn arb_chain(lens: std::ops::RangeInclusive<usize>, max_size: usize) -> impl Strategy<Value = LnModel> {
    (lens, 1..=max_size, proptest::collection::vec(any::<u8>(), 24))
        .prop_map(|(len, size, bytes)| ChainSeed { len, size, bytes }.build())
}

/// The first formulas in `x` over [`rel_sig`].
pub fn rel_formulas() -> &'static [Formula] {
    static F: OnceLock<Vec<Formula>> = OnceLock::new();
    F.get_or_init(|| enumerate_formulas(&rel_sig(), 3000))
}

pub fn arb_rel_formula() -> impl Strategy<Value = Formula> {
    (0..rel_formulas().len()).prop_map(|i| rel_formulas()[i].clone())
}

fn arb_term(vars: &'static [&'static str]) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![proptest::sample::select(vars).prop_map(Term::var), Just(Term::constant("0")),];
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("S", vec![t])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("+", vec![a, b])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app("*", vec![a, b])),
        ]
    })
}

/// Random arithmetic formulas over variables `x`, `y`, `z`.
pub fn arb_arith_formula() -> impl Strategy<Value = Formula> {
    const VARS: &[&str] = &["x", "y", "z"];
    let atom = prop_oneof![
        (arb_term(VARS), arb_term(VARS)).prop_map(|(a, b)| Formula::eq(a, b)),
        (arb_term(VARS), arb_term(VARS)).prop_map(|(a, b)| Formula::less(a, b)),
    ];
    atom.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (proptest::sample::select(VARS), inner.clone()).prop_map(|(v, f)| Formula::exists(v, f)),
            (proptest::sample::select(VARS), inner).prop_map(|(v, f)| Formula::forall(v, f)),
        ]
    })
}

pub fn contains_forall(f: &Formula) -> bool {
    let mut found = false;
    f.visit(&mut |g| found |= matches!(g, Formula::Forall(..)));
    found
}
