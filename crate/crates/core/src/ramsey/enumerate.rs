//! Exhaustive enumeration of partial structures and `(L,n)`-models over a
//! small universe.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::RamseyError;
use crate::fulfillment::{fulfills_on, FulfillmentVerdict, LnModel};
use crate::logic::{Formula, Signature};
use crate::structures::{for_each_tuple, Assignment, Element, PartialStructure, StructureTables};

/// Limits for exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumCap {
    /// Largest universe accepted.
    pub universe: usize,
    /// Most structures or chains produced.
    pub items: u64,
}

impl Default for EnumCap {
    fn default() -> Self {
        EnumCap { universe: 4, items: 1_000_000 }
    }
}

/// Number of partial structures with domain a nonempty subset of a
/// universe of size `u`: `Σ_s C(u,s)·s^#c·Π_R 2^(s^a)·Π_f (s+1)^(s^a)`.
/// `None` on overflow.
pub fn count_structures(sig: &Signature, u: usize) -> Option<u128> {
    let mut total = 0u128;
    for s in 1..=u as u128 {
        let mut term = binom(u as u128, s)?;
        for _ in sig.constants() {
            term = term.checked_mul(s)?;
        }
        for r in sig.relations() {
            let tuples = u32::try_from(s.checked_pow(r.arity as u32)?).ok()?;
            term = term.checked_mul(2u128.checked_pow(tuples)?)?;
        }
        for f in sig.functions() {
            let tuples = u32::try_from(s.checked_pow(f.arity as u32)?).ok()?;
            term = term.checked_mul((s + 1).checked_pow(tuples)?)?;
        }
        total = total.checked_add(term)?;
    }
    Some(total)
}

fn binom(n: u128, k: u128) -> Option<u128> {
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Every partial structure whose domain is a nonempty subset of `universe`,
/// ordered by domain (as a bitmask over the sorted universe), then constants,
/// relations and functions.
pub fn enumerate_structures(
    sig: &Arc<Signature>,
    universe: &BTreeSet<Element>,
    cap: EnumCap,
) -> Result<Vec<PartialStructure>, RamseyError> {
    if universe.len() > cap.universe {
        return Err(RamseyError::CapExceeded { what: "universe", limit: cap.universe as u64 });
    }
    let count = count_structures(sig, universe.len())
        .ok_or(RamseyError::CapExceeded { what: "structure count", limit: cap.items })?;
    if count > cap.items as u128 {
        return Err(RamseyError::CapExceeded { what: "structure count", limit: cap.items });
    }
    let elems: Vec<Element> = universe.iter().copied().collect();
    let mut out = Vec::with_capacity(count as usize);
    for mask in 1u64..1 << elems.len() {
        let dom: Vec<Element> = elems.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
        structures_on(sig, &dom, &mut out)?;
    }
    Ok(out)
}

// One slot per constant, relation tuple and function tuple, each an odometer
// digit: constants range over the domain, relation tuples over {out, in} and
// function tuples over {undefined} ∪ domain.
fn structures_on(sig: &Arc<Signature>, dom: &[Element], out: &mut Vec<PartialStructure>) -> Result<(), RamseyError> {
    enum Slot {
        Const(usize),
        Rel(usize, Vec<Element>),
        Fun(usize, Vec<Element>),
    }
    let mut slots = Vec::new();
    let mut radix = Vec::new();
    for (ci, _) in sig.constants().iter().enumerate() {
        slots.push(Slot::Const(ci));
        radix.push(dom.len() as u32);
    }
    for (ri, r) in sig.relations().iter().enumerate() {
        for_each_tuple(dom, r.arity, |t| {
            slots.push(Slot::Rel(ri, t.to_vec()));
            radix.push(2);
            true
        });
    }
    for (fi, f) in sig.functions().iter().enumerate() {
        for_each_tuple(dom, f.arity, |t| {
            slots.push(Slot::Fun(fi, t.to_vec()));
            radix.push(dom.len() as u32 + 1);
            true
        });
    }
    let mut digits = alloc::vec![0u32; slots.len()];
    loop {
        let mut t = StructureTables { domain: dom.iter().copied().collect(), ..Default::default() };
        for r in sig.relations() {
            t.relations.insert(r.name.clone(), BTreeSet::new());
        }
        for f in sig.functions() {
            t.functions.insert(f.name.clone(), BTreeMap::new());
        }
        for (slot, d) in slots.iter().zip(&digits) {
            match slot {
                Slot::Const(ci) => {
                    t.constants.insert(sig.constants()[*ci].clone(), dom[*d as usize]);
                }
                Slot::Rel(ri, tuple) if *d == 1 => {
                    if let Some(set) = t.relations.get_mut(&sig.relations()[*ri].name) {
                        set.insert(tuple.clone());
                    }
                }
                Slot::Fun(fi, tuple) if *d > 0 => {
                    if let Some(map) = t.functions.get_mut(&sig.functions()[*fi].name) {
                        map.insert(tuple.clone(), dom[*d as usize - 1]);
                    }
                }
                _ => {}
            }
        }
        out.push(PartialStructure::from_tables(sig.clone(), t)?);
        if !next_mixed(&mut digits, &radix) {
            return Ok(());
        }
    }
}

fn next_mixed(digits: &mut [u32], radix: &[u32]) -> bool {
    for (d, r) in digits.iter_mut().zip(radix).rev() {
        if *d + 1 < *r {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

/// A fixed list of structures together with its substructure graph; chains
/// are index sequences along the graph.
#[derive(Clone, Debug)]
pub struct StructureFamily {
    members: Vec<PartialStructure>,
    next: Vec<Vec<usize>>,
}

impl StructureFamily {
    /// With `allow_repeats` a structure may follow itself in a chain.
    pub fn new(members: Vec<PartialStructure>, allow_repeats: bool) -> Result<Self, RamseyError> {
        let mut next = Vec::with_capacity(members.len());
        for (i, a) in members.iter().enumerate() {
            let mut succ = Vec::new();
            for (j, b) in members.iter().enumerate() {
                if (i != j || allow_repeats) && a.is_substructure(b)? {
                    succ.push(j);
                }
            }
            next.push(succ);
        }
        Ok(StructureFamily { members, next })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[PartialStructure] {
        &self.members
    }

    /// Members that may follow member `i`.
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.next[i]
    }

    pub fn levels(&self, indices: &[usize]) -> Vec<&PartialStructure> {
        indices.iter().map(|i| &self.members[*i]).collect()
    }

    pub fn chain(&self, indices: &[usize]) -> Result<LnModel, RamseyError> {
        Ok(LnModel::new(indices.iter().map(|i| self.members[*i].clone()).collect())?)
    }

    /// Calls `f` on every chain of length `len` whose first member is
    /// `first`, in lexicographic order of indices. `f` returns `false` to
    /// stop; the return value reports whether the walk ran to completion.
    pub fn for_each_chain_from(&self, first: usize, len: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        fn go(fam: &StructureFamily, cur: &mut Vec<usize>, len: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
            if cur.len() == len {
                return f(cur);
            }
            let last = cur[cur.len() - 1];
            for &j in &fam.next[last] {
                cur.push(j);
                let go_on = go(fam, cur, len, f);
                cur.pop();
                if !go_on {
                    return false;
                }
            }
            true
        }
        if len == 0 || first >= self.members.len() {
            return true;
        }
        go(self, &mut alloc::vec![first], len, f)
    }

    pub fn for_each_chain(&self, len: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        (0..self.members.len()).all(|i| self.for_each_chain_from(i, len, f))
    }

    pub fn count_chains(&self, len: usize) -> u64 {
        let mut n = 0;
        self.for_each_chain(len, &mut |_| {
            n += 1;
            true
        });
        n
    }
}

/// Every `(L,n)`-model whose levels have domains inside `universe`.
pub fn enumerate_ln_models(
    sig: &Arc<Signature>,
    n: usize,
    universe: &BTreeSet<Element>,
    cap: EnumCap,
) -> Result<Vec<LnModel>, RamseyError> {
    if n == 0 || universe.is_empty() {
        return Ok(Vec::new());
    }
    let family = StructureFamily::new(enumerate_structures(sig, universe, cap)?, true)?;
    let mut out = Vec::new();
    let mut failure = None;
    family.for_each_chain(n, &mut |idx| {
        if out.len() as u64 >= cap.items {
            failure = Some(RamseyError::CapExceeded { what: "chain count", limit: cap.items });
            return false;
        }
        match family.chain(idx) {
            Ok(c) => out.push(c),
            Err(e) => {
                failure = Some(e);
                return false;
            }
        }
        true
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Outcome of [`completeness_probe`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProbeReport {
    pub chains: u64,
    /// Chains on which fulfillment of the sentence is defined.
    pub defined: u64,
    pub fulfilled: u64,
    pub defined_false: u64,
    pub first_counterexample: Option<LnModel>,
    pub first_fulfilling: Option<LnModel>,
}

impl ProbeReport {
    pub fn no_defined_false(&self) -> bool {
        self.defined_false == 0
    }

    /// Appends `later`, keeping the earliest examples.
    pub fn merge(&mut self, later: ProbeReport) {
        self.chains += later.chains;
        self.defined += later.defined;
        self.fulfilled += later.fulfilled;
        self.defined_false += later.defined_false;
        if self.first_counterexample.is_none() {
            self.first_counterexample = later.first_counterexample;
        }
        if self.first_fulfilling.is_none() {
            self.first_fulfilling = later.first_fulfilling;
        }
    }

    /// Evaluates `f` on the chains of `family` of length `n` that start at
    /// member `first`; the probe is the merge of these shards in order.
    pub fn shard(family: &StructureFamily, f: &Formula, n: usize, first: usize) -> Result<ProbeReport, RamseyError> {
        let mut report = ProbeReport::default();
        let mut failure = None;
        let empty = Assignment::new();
        family.for_each_chain_from(first, n, &mut |idx| {
            report.chains += 1;
            match fulfills_on(&family.levels(idx), f, &empty) {
                Ok(FulfillmentVerdict::True) => {
                    report.defined += 1;
                    report.fulfilled += 1;
                    if report.first_fulfilling.is_none() {
                        report.first_fulfilling = family.chain(idx).ok();
                    }
                }
                Ok(FulfillmentVerdict::False) => {
                    report.defined += 1;
                    report.defined_false += 1;
                    if report.first_counterexample.is_none() {
                        report.first_counterexample = family.chain(idx).ok();
                    }
                }
                Ok(FulfillmentVerdict::Undefined(_)) => {}
                Err(e) => {
                    failure = Some(e.into());
                    return false;
                }
            }
            true
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(report),
        }
    }
}

/// Evaluates the sentence `f` on every `(L,n)`-model over `universe`.
pub fn completeness_probe(
    f: &Formula,
    n: usize,
    sig: &Arc<Signature>,
    universe: &BTreeSet<Element>,
    cap: EnumCap,
) -> Result<ProbeReport, RamseyError> {
    if !f.is_sentence() {
        return Err(RamseyError::Precondition("the probed formula must be a sentence".into()));
    }
    if f.depth() >= n {
        return Err(RamseyError::Precondition("the depth must be below the chain length".into()));
    }
    let family = StructureFamily::new(enumerate_structures(sig, universe, cap)?, true)?;
    let mut report = ProbeReport::default();
    for first in 0..family.len() {
        report.merge(ProbeReport::shard(&family, f, n, first)?);
        if report.chains > cap.items {
            return Err(RamseyError::CapExceeded { what: "chain count", limit: cap.items });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Symbol};
    use alloc::vec;

    fn p_c() -> Arc<Signature> {
        Arc::new(Signature::new(vec![Symbol::new("P", 1)], vec![], vec!["c".into()]).unwrap())
    }

    fn universe(n: u64) -> BTreeSet<Element> {
        (0..n).collect()
    }

    #[test]
    fn structure_counts() {
        let sig = p_c();
        assert_eq!(enumerate_structures(&sig, &universe(1), EnumCap::default()).unwrap().len(), 2);
        assert_eq!(enumerate_structures(&sig, &universe(2), EnumCap::default()).unwrap().len(), 12);
        assert_eq!(count_structures(&sig, 2), Some(12));
        let f = Arc::new(Signature::new(vec![], vec![Symbol::new("f", 1)], vec![]).unwrap());
        // {0}: f(0) undefined or 0; {1}: same; {0,1}: 3^2
        let all = enumerate_structures(&f, &universe(2), EnumCap::default()).unwrap();
        assert_eq!(all.len(), 13);
        assert_eq!(count_structures(&f, 2), Some(13));
        let distinct: BTreeSet<_> = all.iter().map(|s| s.canonical_key()).collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn chain_counts() {
        let sig = p_c();
        assert_eq!(enumerate_ln_models(&sig, 1, &universe(1), EnumCap::default()).unwrap().len(), 2);
        assert!(enumerate_ln_models(&sig, 2, &BTreeSet::new(), EnumCap::default()).unwrap().is_empty());
        // chains S0 ⊆ S1 of nonempty subsets of {0,1}: |S0|·2^|S1| each
        let expected: u64 = [(1, 1), (1, 2), (1, 1), (1, 2), (2, 2)].iter().map(|(s0, s1)| s0 * (1u64 << s1)).sum();
        assert_eq!(enumerate_ln_models(&sig, 2, &universe(2), EnumCap::default()).unwrap().len() as u64, expected);
    }

    #[test]
    fn caps() {
        let sig = p_c();
        let tight = EnumCap { universe: 1, items: 100 };
        assert!(matches!(
            enumerate_structures(&sig, &universe(2), tight),
            Err(RamseyError::CapExceeded { what: "universe", .. })
        ));
        let few = EnumCap { universe: 4, items: 5 };
        assert!(enumerate_structures(&sig, &universe(2), few).is_err());
    }

    #[test]
    fn probes() {
        let sig = p_c();
        let u = universe(2);
        let valid = parse_formula("forall x. x = x", &sig).unwrap();
        let r = completeness_probe(&valid, 3, &sig, &u, EnumCap::default()).unwrap();
        assert!(r.no_defined_false() && r.defined > 0);
        let contra = parse_formula("P(c) & !P(c)", &sig).unwrap();
        let r = completeness_probe(&contra, 3, &sig, &u, EnumCap::default()).unwrap();
        assert_eq!(r.fulfilled, 0);
        assert!(r.defined > 0);
        let some = parse_formula("exists x. P(x)", &sig).unwrap();
        let r = completeness_probe(&some, 3, &sig, &u, EnumCap::default()).unwrap();
        assert!(r.fulfilled > 0 && r.defined_false > 0);
        assert!(completeness_probe(&some, 1, &sig, &u, EnumCap::default()).is_err());
    }

    #[test]
    fn families_without_repeats() {
        let sig = p_c();
        let all = enumerate_structures(&sig, &universe(1), EnumCap::default()).unwrap();
        let fam = StructureFamily::new(all, false).unwrap();
        // P(0) and ¬P(0) are not substructures of each other
        assert_eq!(fam.count_chains(2), 0);
        assert_eq!(fam.count_chains(1), 2);
    }
}
