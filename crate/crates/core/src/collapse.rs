//! The collapse of a chain for a sentence: a level-wise shrinking that keeps
//! every subformula verdict, together with the size bound `Col` and an
//! independent checker.
//!
//! The construction is a hull. `B_0` is the set of constant values (or the
//! least element of `A_0` when there are none); every higher level is
//! `U ∩ A_k` for one growing set `U`. Elements are added until nothing
//! changes:
//!
//! * `f(b)` for `b` from `B_{k-1}`, evaluated in `A_k`;
//! * values of terms of the sentence at parameters from `B_k` that are
//!   defined in `A_k`;
//! * for every subsequence `S` of the chain, every subformula and every
//!   parameter tuple from `U`: the least witness of a fulfilled existential
//!   and the least counterexample of a failed universal;
//! * for every subsequence `S` and every subformula with one free variable:
//!   the least element of the top of `S`, and the least element of the first
//!   level of `S`, that fulfills it.
//!
//! Closing over all subsequences makes condition 5 hold by construction and
//! keeps minimal witnesses of any subsequence inside the collapse.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::fulfillment::{
    explain_from, fulfills_on, least_fulfilling, ChainError, FulfillmentError, FulfillmentVerdict, LnModel,
    UndefinedReason,
};
use crate::logic::{Formula, Signature, Term};
use crate::structures::{for_each_tuple, Assignment, Element, PartialStructure};

/// Arguments of `Col(i, j, k, l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ColParams {
    /// Level index.
    pub i: usize,
    /// Largest function arity.
    pub j: usize,
    /// `|φ|`.
    pub k: usize,
    /// `|L|`.
    pub l: usize,
}

impl ColParams {
    pub fn for_formula(i: usize, sig: &Signature, f: &Formula) -> Self {
        ColParams { i, j: sig.max_function_arity(), k: f.length(), l: sig.cardinality() }
    }
}

fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for t in 0..r {
        acc = acc * BigUint::from(n - t) / BigUint::from(t + 1);
    }
    acc
}

/// `Col(i, j, k, l)`, exactly.
///
/// `Col(0) = max(l, 1)` and
/// `Col(i+1) = B* + C(k,2)·B*^k + [Σ_{m<i} C(i,m)]·B**^k·C(k,2)·2` with
/// `B* = Col(i) + Col(i)^j·l` and `B** = B* + C(k,2)·B*^k`.
pub fn col_bound(p: ColParams) -> BigUint {
    let k = p.k as u32;
    let ck2 = binomial(p.k, 2);
    let mut col = BigUint::from(p.l.max(1));
    for i in 0..p.i {
        let star = &col + col.pow(p.j as u32) * BigUint::from(p.l);
        let star_k = star.pow(k);
        let star2 = &star + &ck2 * &star_k;
        let sum = binomial_sum(i, 0..i);
        col = star + &ck2 * star_k + sum * star2.pow(k) * &ck2 * BigUint::from(2u32);
    }
    col
}

/// `Col(i, j, k, l)` when it is at most `cap`, `None` otherwise. Cheap even
/// when the exact value is astronomically large.
pub fn col_bound_capped(p: ColParams, cap: u64) -> Option<u64> {
    let cap = cap as u128;
    let bounded = |x: Option<u128>| x.filter(|v| *v <= cap);
    let pow = |b: u128, e: usize| -> Option<u128> {
        let mut acc: u128 = 1;
        for _ in 0..e {
            acc = bounded(acc.checked_mul(b))?;
        }
        Some(acc)
    };
    let ck2 = (p.k as u128) * (p.k.saturating_sub(1) as u128) / 2;
    let mut col = bounded(Some(p.l.max(1) as u128))?;
    for i in 0..p.i {
        let star = bounded(col.checked_add(pow(col, p.j)?.checked_mul(p.l as u128)?))?;
        let star_k = pow(star, p.k)?;
        let star2 = bounded(star.checked_add(ck2.checked_mul(star_k)?))?;
        let sum = binomial_sum(i, 0..i).to_u128()?;
        let extra =
            if sum == 0 { 0 } else { bounded(pow(star2, p.k)?.checked_mul(sum)?.checked_mul(ck2)?.checked_mul(2))? };
        col = bounded(star.checked_add(ck2.checked_mul(star_k)?)?.checked_add(extra))?;
    }
    Some(col as u64)
}

// Σ_{m in range} C(i, m).
fn binomial_sum(i: usize, range: core::ops::Range<usize>) -> BigUint {
    range.map(|m| binomial(i, m)).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CollapseError {
    NotASentence,
    /// The sentence needs `dp ≤ n - 2`.
    TooDeep {
        depth: usize,
        len: usize,
    },
    Undefined(UndefinedReason),
    Fulfillment(FulfillmentError),
    Chain(ChainError),
}

impl fmt::Display for CollapseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollapseError::NotASentence => write!(f, "the formula has free variables"),
            CollapseError::TooDeep { depth, len } => {
                write!(f, "depth {depth} is larger than chain length {len} minus 2")
            }
            CollapseError::Undefined(r) => {
                write!(f, "fulfillment of the sentence is undefined ({})", r.as_str())
            }
            CollapseError::Fulfillment(e) => write!(f, "{e}"),
            CollapseError::Chain(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CollapseError {}

impl From<FulfillmentError> for CollapseError {
    fn from(e: FulfillmentError) -> Self {
        CollapseError::Fulfillment(e)
    }
}

impl From<ChainError> for CollapseError {
    fn from(e: ChainError) -> Self {
        CollapseError::Chain(e)
    }
}

/// Output of [`f_collapse`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseResult {
    /// `B_0, .., B_{n-1}` as subsets of the original levels.
    pub universes: Vec<BTreeSet<Element>>,
    /// The chain of induced substructures on `universes`.
    pub collapsed: LnModel,
    /// Order-preserving bijection from `∪B` onto `{0, .., |∪B| - 1}`.
    pub renaming: BTreeMap<Element, Element>,
    /// `collapsed` transported along `renaming`: the F-collapse proper.
    pub renamed: LnModel,
    /// Number of fulfillment evaluations the construction performed.
    pub evaluations: u64,
}

/// Nonempty strictly increasing index tuples below `n`, lexicographically.
pub fn subsequences(n: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for i in start..n {
            cur.push(i);
            out.push(cur.clone());
            go(i + 1, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), &mut out);
    out
}

fn check_preconditions(v: &LnModel, f: &Formula) -> Result<(), CollapseError> {
    if !f.is_sentence() {
        return Err(CollapseError::NotASentence);
    }
    let depth = f.depth();
    if depth + 2 > v.len() {
        return Err(CollapseError::TooDeep { depth, len: v.len() });
    }
    if let FulfillmentVerdict::Undefined(r) = crate::fulfillment::fulfills(v, f, &Assignment::new())? {
        return Err(CollapseError::Undefined(r));
    }
    Ok(())
}

/// `B_0`: constant values, or the least element of `A_0` without constants.
pub fn base_universe(v: &LnModel) -> BTreeSet<Element> {
    let a0 = &v.levels()[0];
    let mut b0: BTreeSet<Element> = a0.constants().values().copied().collect();
    if b0.is_empty() {
        b0.extend(a0.domain().min());
    }
    b0
}

fn level_universes(v: &LnModel, b0: &BTreeSet<Element>, u: &BTreeSet<Element>) -> Vec<BTreeSet<Element>> {
    v.levels()
        .iter()
        .enumerate()
        .map(|(k, a)| if k == 0 { b0.clone() } else { u.iter().copied().filter(|e| a.contains(*e)).collect() })
        .collect()
}

fn assignment(vars: &[String], tuple: &[Element]) -> Assignment {
    vars.iter().cloned().zip(tuple.iter().copied()).collect()
}

struct Sub {
    formula: Formula,
    free: Vec<String>,
}

/// Runs the hull construction and returns the universes.
fn hull(v: &LnModel, f: &Formula) -> Result<(Vec<BTreeSet<Element>>, u64), CollapseError> {
    let levels: Vec<&PartialStructure> = v.levels().iter().collect();
    let n = levels.len();
    let b0 = base_universe(v);
    let mut u = b0.clone();
    let subs: Vec<Sub> =
        f.subformulas().into_iter().map(|g| Sub { free: g.free_vars().into_iter().collect(), formula: g }).collect();
    let terms: Vec<(Term, Vec<String>)> =
        f.all_terms().into_iter().map(|t| (t.clone(), t.vars().into_iter().collect())).collect();
    let contexts = subsequences(n);
    let sig = v.levels()[0].signature().clone();
    let mut done: BTreeSet<(usize, usize, Vec<Element>)> = BTreeSet::new();
    let mut evaluations = 0u64;
    loop {
        let before = u.len();
        let bs = level_universes(v, &b0, &u);
        let mut add = BTreeSet::new();
        for k in 1..n {
            let prev: Vec<Element> = bs[k - 1].iter().copied().collect();
            for sym in sig.functions() {
                for_each_tuple(&prev, sym.arity, |t| {
                    if let Ok(Some(val)) = levels[k].apply(&sym.name, t) {
                        add.insert(val);
                    }
                    true
                });
            }
        }
        for (k, level) in levels.iter().enumerate() {
            let elems: Vec<Element> = bs[k].iter().copied().collect();
            for (t, vars) in &terms {
                let mut failure = None;
                for_each_tuple(&elems, vars.len(), |tuple| {
                    match level.eval_term(t, &assignment(vars, tuple)) {
                        Ok(Some(val)) => {
                            add.insert(val);
                        }
                        Ok(None) => {}
                        Err(e) => failure = Some(e),
                    }
                    failure.is_none()
                });
                if let Some(e) = failure {
                    return Err(FulfillmentError::Eval(e).into());
                }
            }
        }
        for (ci, ctx) in contexts.iter().enumerate() {
            let chain: Vec<&PartialStructure> = ctx.iter().map(|i| levels[*i]).collect();
            let top = chain[chain.len() - 1];
            let first = chain[0];
            let in_top: Vec<Element> = u.iter().copied().filter(|e| top.contains(*e)).collect();
            for (si, sub) in subs.iter().enumerate() {
                if matches!(sub.formula, Formula::Exists(..) | Formula::Forall(..)) {
                    let mut pending = Vec::new();
                    for_each_tuple(&in_top, sub.free.len(), |tuple| {
                        if !done.contains(&(ci, si, tuple.to_vec())) {
                            pending.push(tuple.to_vec());
                        }
                        true
                    });
                    for tuple in pending {
                        let a = assignment(&sub.free, &tuple);
                        // universal instances reach subformulas with every floor
                        for floor in 0..chain.len() - 1 {
                            let ex = explain_from(&chain, &sub.formula, &a, floor)?;
                            evaluations += 1;
                            add.extend(ex.witness);
                            add.extend(ex.counterexample);
                        }
                        done.insert((ci, si, tuple));
                    }
                }
                if sub.free.len() == 1 && done.insert((ci, si + subs.len(), Vec::new())) {
                    let var = &sub.free[0];
                    let empty = Assignment::new();
                    let best_top = least_fulfilling(&chain, &sub.formula, var, &empty, top.domain().iter())?;
                    let best_first = least_fulfilling(&chain, &sub.formula, var, &empty, first.domain().iter())?;
                    evaluations += 2;
                    add.extend(best_top);
                    add.extend(best_first);
                }
            }
        }
        u.extend(add);
        if u.len() == before {
            break;
        }
    }
    Ok((level_universes(v, &b0, &u), evaluations))
}

/// The collapse of `v` for the sentence `f`.
pub fn f_collapse(v: &LnModel, f: &Formula) -> Result<CollapseResult, CollapseError> {
    check_preconditions(v, f)?;
    let (universes, evaluations) = hull(v, f)?;
    build_result(v, universes, evaluations)
}

/// Assembles a result from explicit universes. Exposed so that tampered
/// results can be fed to [`verify_collapse`].
pub fn build_result(
    v: &LnModel,
    universes: Vec<BTreeSet<Element>>,
    evaluations: u64,
) -> Result<CollapseResult, CollapseError> {
    let levels = v
        .levels()
        .iter()
        .zip(&universes)
        .map(|(a, b)| a.restrict(b))
        .collect::<Result<Vec<_>, _>>()
        .map_err(ChainError::from)?;
    let collapsed = LnModel::new(levels)?;
    let all: BTreeSet<Element> = universes.iter().flatten().copied().collect();
    let renaming: BTreeMap<Element, Element> = all.iter().enumerate().map(|(i, e)| (*e, i as Element)).collect();
    let renamed = collapsed.relabel(&renaming)?;
    Ok(CollapseResult { universes, collapsed, renaming, renamed, evaluations })
}

/// Outcome of [`verify_collapse`]. Conditions are numbered as in the lemma.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseReport {
    pub sizes: Vec<u64>,
    /// `Col(i, ..)` for each level, `None` when it exceeds `u64`.
    pub bounds: Vec<Option<u64>>,
    pub conditions: [bool; 5],
    /// The renamed chain is isomorphic to the collapsed one via the renaming,
    /// which is order preserving onto an initial segment.
    pub renaming_ok: bool,
    pub failures: Vec<String>,
    /// Verdict comparisons performed for conditions 4 and 5.
    pub comparisons: u64,
}

impl CollapseReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| *c) && self.renaming_ok
    }
}

/// Re-checks every condition of the lemma for `r` against `v` and `f`,
/// without reusing anything from the construction.
pub fn verify_collapse(v: &LnModel, r: &CollapseResult, f: &Formula) -> Result<CollapseReport, CollapseError> {
    let sig = v.levels()[0].signature().clone();
    let mut failures = Vec::new();
    let mut conditions = [true; 5];
    let n = v.len();
    let sizes: Vec<u64> = r.universes.iter().map(|b| b.len() as u64).collect();

    let l = sig.cardinality().max(1) as u64;
    if sizes.first().is_some_and(|s| *s > l) {
        conditions[0] = false;
        failures.push(format!("condition 1: |B_0| = {} exceeds {l}", sizes[0]));
    }

    let bounds: Vec<Option<u64>> =
        (0..n).map(|i| col_bound_capped(ColParams::for_formula(i, &sig, f), u64::MAX)).collect();
    for (i, (s, b)) in sizes.iter().zip(&bounds).enumerate() {
        if b.is_some_and(|b| *s > b) {
            conditions[1] = false;
            failures.push(format!("condition 2: |B_{i}| = {s} exceeds Col"));
        }
    }

    if r.universes.len() != n {
        conditions[2] = false;
        failures.push(format!("condition 3: {} universes for {n} levels", r.universes.len()));
    }
    for (i, (b, a)) in r.universes.iter().zip(v.levels()).enumerate() {
        if let Some(e) = b.iter().find(|e| !a.contains(**e)) {
            conditions[2] = false;
            failures.push(format!("condition 3: {e} is in B_{i} but not in A_{i}"));
        }
    }
    let restricted: Result<Vec<PartialStructure>, _> =
        v.levels().iter().zip(&r.universes).map(|(a, b)| a.restrict(b)).collect();
    let chain_b = match restricted.map_err(ChainError::from).and_then(LnModel::new) {
        Ok(c) => Some(c),
        Err(e) => {
            conditions[2] = false;
            failures.push(format!("condition 3: collapsed levels do not form a chain: {e}"));
            None
        }
    };

    let union: BTreeSet<Element> = r.universes.iter().flatten().copied().collect();
    let mut comparisons = 0u64;
    if let Some(chain_b) = &chain_b {
        let pool: Vec<Element> = union.iter().copied().collect();
        let la: Vec<&PartialStructure> = v.levels().iter().collect();
        let lb: Vec<&PartialStructure> = chain_b.levels().iter().collect();
        for sub in f.subformulas() {
            let vars: Vec<String> = sub.free_vars().into_iter().collect();
            let mut failure = None;
            for_each_tuple(&pool, vars.len(), |tuple| {
                let a = assignment(&vars, tuple);
                comparisons += 1;
                match (fulfills_on(&la, &sub, &a), fulfills_on(&lb, &sub, &a)) {
                    (Ok(x), Ok(y)) if x == y => {}
                    (Ok(x), Ok(y)) => {
                        failures.push(format!(
                            "condition 4: {} at {:?}: {x} in the chain, {y} in the collapse",
                            crate::logic::render_formula(&sub),
                            tuple
                        ));
                        conditions[3] = false;
                    }
                    (Err(e), _) | (_, Err(e)) => failure = Some(e),
                }
                failure.is_none()
            });
            if let Some(e) = failure {
                return Err(e.into());
            }
        }
    }

    let levels: Vec<&PartialStructure> = v.levels().iter().collect();
    for idx in subsequences(n).into_iter().filter(|s| s.len() >= 3) {
        let drop_second: Vec<&PartialStructure> =
            idx.iter().enumerate().filter(|(p, _)| *p != 2).map(|(_, i)| levels[*i]).collect();
        let drop_third: Vec<&PartialStructure> =
            idx.iter().enumerate().filter(|(p, _)| *p != 1).map(|(_, i)| levels[*i]).collect();
        for sub in f.subformulas() {
            let vars: Vec<String> = sub.free_vars().into_iter().collect();
            if vars.len() != 1 {
                continue;
            }
            let empty = Assignment::new();
            let top = levels[idx[idx.len() - 1]];
            let x1 = least_fulfilling(&drop_second, &sub, &vars[0], &empty, top.domain().iter())?;
            let x2 = least_fulfilling(&drop_third, &sub, &vars[0], &empty, top.domain().iter())?;
            comparisons += 1;
            if x1 != x2 {
                for x in x1.into_iter().chain(x2) {
                    if !union.contains(&x) {
                        conditions[4] = false;
                        failures.push(format!(
                            "condition 5: least witness {x} of {} on {:?} is not in the collapse",
                            crate::logic::render_formula(&sub),
                            idx
                        ));
                    }
                }
            }
        }
    }

    let onto_initial = r.renaming.len() == union.len()
        && r.renaming.keys().copied().eq(union.iter().copied())
        && r.renaming.values().copied().eq(0..union.len() as Element);
    let renaming_ok = onto_initial && chain_b.as_ref().is_some_and(|c| c.is_isomorphism(&r.renamed, &r.renaming));
    if !renaming_ok {
        failures.push("renaming is not an order-preserving isomorphism onto an initial segment".into());
    }

    Ok(CollapseReport { sizes, bounds, conditions, renaming_ok, failures, comparisons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Symbol};
    use crate::structures::StructureTables;
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn col_bound_values() {
        let p = |i, j, k, l| ColParams { i, j, k, l };
        assert_eq!(col_bound(p(0, 3, 9, 4)), BigUint::from(4u32));
        assert_eq!(col_bound(p(0, 3, 9, 0)), BigUint::from(1u32));
        assert_eq!(col_bound(p(1, 1, 2, 1)), BigUint::from(6u32));
        assert_eq!(col_bound(p(2, 1, 2, 1)), BigUint::from(48828u32));
        assert_eq!(col_bound_capped(p(2, 1, 2, 1), u64::MAX), Some(48828));
        assert_eq!(col_bound_capped(p(2, 1, 2, 1), 48827), None);
        assert_eq!(col_bound_capped(p(4, 2, 9, 5), u64::MAX), None);
    }

    #[test]
    fn subsequence_order() {
        assert_eq!(subsequences(3), vec![vec![0], vec![0, 1], vec![0, 1, 2], vec![0, 2], vec![1], vec![1, 2], vec![2]]);
    }

    fn unary_chain(domains: &[&[Element]], p: &[Element]) -> (Arc<Signature>, LnModel) {
        let sig = Arc::new(Signature::new(vec![Symbol::new("P", 1)], vec![], vec![]).unwrap());
        let levels = domains
            .iter()
            .map(|d| {
                let dom: BTreeSet<Element> = d.iter().copied().collect();
                let mut t = StructureTables { domain: dom.clone(), ..Default::default() };
                t.relations.insert("P".into(), p.iter().filter(|e| dom.contains(e)).map(|e| vec![*e]).collect());
                PartialStructure::from_tables(sig.clone(), t).unwrap()
            })
            .collect();
        (sig.clone(), LnModel::new(levels).unwrap())
    }

    #[test]
    fn existential_witness_survives() {
        let (sig, v) = unary_chain(&[&[0], &[0, 1, 2], &[0, 1, 2, 3]], &[2]);
        let f = parse_formula("exists x. P(x)", &sig).unwrap();
        let r = f_collapse(&v, &f).unwrap();
        assert!(r.universes[1].contains(&2));
        let report = verify_collapse(&v, &r, &f).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn deleting_the_witness_breaks_equivalence() {
        let (sig, v) = unary_chain(&[&[0], &[0, 1, 2], &[0, 1, 2, 3]], &[2]);
        let f = parse_formula("exists x. P(x)", &sig).unwrap();
        let r = f_collapse(&v, &f).unwrap();
        let tampered: Vec<BTreeSet<Element>> =
            r.universes.iter().map(|b| b.iter().copied().filter(|e| *e != 2).collect()).collect();
        let bad = build_result(&v, tampered, 0).unwrap();
        let report = verify_collapse(&v, &bad, &f).unwrap();
        assert!(!report.conditions[3]);
        assert!(!report.passed());
    }

    #[test]
    fn constant_chain_of_a_point() {
        let (sig, v) = unary_chain(&[&[0], &[0], &[0]], &[0]);
        let f = parse_formula("forall x. P(x)", &sig).unwrap();
        let r = f_collapse(&v, &f).unwrap();
        assert_eq!(r.renamed, v);
        assert!(verify_collapse(&v, &r, &f).unwrap().passed());
    }

    #[test]
    fn base_is_the_constants() {
        let v = LnModel::from_segments(&[2, 5, 26]).unwrap();
        let f = parse_formula("forall x. !(0 = S(x))", v.top().signature()).unwrap();
        let r = f_collapse(&v, &f).unwrap();
        assert_eq!(r.universes[0], BTreeSet::from([0]));
        let report = verify_collapse(&v, &r, &f).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn preconditions() {
        let v = LnModel::from_segments(&[2, 5]).unwrap();
        let sig = v.top().signature().clone();
        let f = parse_formula("forall x. x = x", &sig).unwrap();
        assert_eq!(f_collapse(&v, &f), Err(CollapseError::TooDeep { depth: 1, len: 2 }));
        let g = parse_formula("x = x", &sig).unwrap();
        assert_eq!(f_collapse(&v, &g), Err(CollapseError::NotASentence));
    }
}
