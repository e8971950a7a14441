//! Seeded random chains and formulas over `{P/1, R/2, f/1, c}`.
//!
//! Case `i` of a suite draws from its own ChaCha8 stream, so a case does
//! not depend on how the suite is split across workers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use fulfillment_core::logic::Symbol;
use fulfillment_core::structures::StructureTables;
use fulfillment_core::{Formula, LnModel, PartialStructure, Signature, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `{P/1, R/2, f/1, c}`.
pub fn relational_signature() -> Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| {
        let sig =
            Signature::new(vec![Symbol::new("P", 1), Symbol::new("R", 2)], vec![Symbol::new("f", 1)], vec!["c".into()]);
        Arc::new(sig.unwrap_or_else(|e| unreachable!("fixed signature: {e}")))
    })
    .clone()
}

pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}

/// A chain of `len` levels over `size` elements, valid by construction.
///
/// Each element gets a first level (`c` is element 0 and sits at level 0),
/// level `i` is the induced substructure on the elements that appeared by
/// `i`, and `f` of an element that first appears below the top lands at most
/// one level higher.
pub fn random_chain(rng: &mut impl Rng, len: usize, size: usize) -> LnModel {
    assert!(len >= 1 && size >= 1, "chains need a level and an element");
    let first: Vec<usize> = (0..size).map(|e| if e == 0 { 0 } else { rng.gen_range(0..len) }).collect();
    let dom = |i: usize| -> BTreeSet<u64> { (0..size).filter(|e| first[*e] <= i).map(|e| e as u64).collect() };
    let top_dom = dom(len - 1);
    let mut f = BTreeMap::new();
    for (e, lvl) in first.iter().enumerate() {
        let target: Vec<u64> = dom((lvl + 1).min(len - 1)).into_iter().collect();
        if lvl + 1 < len || rng.gen_ratio(2, 3) {
            f.insert(vec![e as u64], target[rng.gen_range(0..target.len())]);
        }
    }
    let p: BTreeSet<Vec<u64>> = top_dom.iter().filter(|_| rng.gen_bool(0.5)).map(|e| vec![*e]).collect();
    let mut r = BTreeSet::new();
    for a in &top_dom {
        for b in &top_dom {
            if rng.gen_ratio(1, 3) {
                r.insert(vec![*a, *b]);
            }
        }
    }
    let tables = StructureTables {
        domain: top_dom,
        constants: [("c".to_string(), 0)].into(),
        relations: [("P".to_string(), p), ("R".to_string(), r)].into(),
        functions: [("f".to_string(), f)].into(),
    };
    let top = PartialStructure::from_tables(relational_signature(), tables)
        .unwrap_or_else(|e| unreachable!("generated tables are valid: {e}"));
    let levels = (0..len).map(|i| top.restrict(&dom(i)).unwrap_or_else(|e| unreachable!("restriction: {e}"))).collect();
    LnModel::new(levels).unwrap_or_else(|e| unreachable!("generated levels form a chain: {e}"))
}

const VARS: [&str; 3] = ["x", "y", "z"];

fn random_term(rng: &mut impl Rng, depth: usize) -> Term {
    if depth > 0 && rng.gen_ratio(1, 4) {
        return Term::app("f", vec![random_term(rng, depth - 1)]);
    }
    if rng.gen_ratio(1, 4) {
        Term::constant("c")
    } else {
        Term::var(*VARS.choose(rng).unwrap_or(&"x"))
    }
}

fn random_atom(rng: &mut impl Rng) -> Formula {
    match rng.gen_range(0..3) {
        0 => Formula::rel("P", vec![random_term(rng, 2)]),
        1 => Formula::rel("R", vec![random_term(rng, 1), random_term(rng, 1)]),
        _ => Formula::eq(random_term(rng, 1), random_term(rng, 1)),
    }
}

fn grow(rng: &mut impl Rng, budget: usize) -> Formula {
    if budget < 5 || rng.gen_ratio(1, 4) {
        return random_atom(rng);
    }
    match rng.gen_range(0..5) {
        0 => Formula::not(grow(rng, budget - 1)),
        1 | 2 => {
            let left = rng.gen_range(2..budget - 2);
            let (a, b) = (grow(rng, left), grow(rng, budget - 1 - left));
            if rng.gen_bool(0.5) {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        q => {
            let v = *VARS.choose(rng).unwrap_or(&"y");
            let body = grow(rng, budget - 2);
            if q == 3 {
                Formula::exists(v, body)
            } else {
                Formula::forall(v, body)
            }
        }
    }
}

/// A formula of at most `max_len` tokens whose free variables are among
/// `free`.
pub fn random_formula(rng: &mut impl Rng, max_len: usize, free: &[&str]) -> Formula {
    loop {
        let f = grow(rng, max_len);
        if f.length() <= max_len && f.free_vars().iter().all(|v| free.contains(&v.as_str())) {
            return f;
        }
    }
}

/// A sentence of at most `max_len` tokens, closing the free variables of a
/// random formula with randomly chosen quantifiers.
pub fn random_sentence(rng: &mut impl Rng, max_len: usize) -> Formula {
    loop {
        let mut f = grow(rng, max_len);
        for v in f.free_vars() {
            f = if rng.gen_bool(0.5) { Formula::exists(v, f) } else { Formula::forall(v, f) };
        }
        if f.length() <= max_len {
            return f;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chains_are_valid_and_reproducible() {
        for case in 0..200 {
            let mut a = case_rng(7, case);
            let mut b = case_rng(7, case);
            let len = 1 + case as usize % 5;
            let v = random_chain(&mut a, len, 1 + case as usize % 4);
            assert_eq!(v.len(), len);
            assert_eq!(v, random_chain(&mut b, len, 1 + case as usize % 4));
        }
    }

    #[test]
    fn streams_differ_between_cases() {
        let draws: BTreeSet<u64> = (0..32).map(|c| case_rng(1, c).gen()).collect();
        assert_eq!(draws.len(), 32);
    }

    #[test]
    fn formulas_respect_length_and_variables() {
        let mut rng = case_rng(3, 0);
        for _ in 0..500 {
            let f = random_formula(&mut rng, 14, &["x"]);
            assert!(f.length() <= 14);
            assert!(f.free_vars().iter().all(|v| v == "x"));
            let s = random_sentence(&mut rng, 12);
            assert!(s.is_sentence() && s.length() <= 12);
        }
    }

    #[test]
    fn generated_formulas_parse_back() {
        let sig = relational_signature();
        let mut rng = case_rng(5, 0);
        for _ in 0..200 {
            let f = random_formula(&mut rng, 14, &["x", "y", "z"]);
            let text = fulfillment_core::render_formula(&f);
            assert_eq!(fulfillment_core::parse_formula(&text, &sig), Ok(f));
        }
    }
}
