//! Colorings of chains of structures: least witnesses, the deleted-index
//! pair coloring, boundedness audits and homogeneous chains.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::enumerate::StructureFamily;
use super::RamseyError;
use crate::collapse::{col_bound_capped, f_collapse, ColParams};
use crate::fulfillment::{fulfills_on, least_fulfilling, FulfillmentVerdict};
use crate::logic::{Formula, Signature, LESS};
use crate::structures::{Assignment, Element, PartialStructure};

/// How the first level is ordered when looking for a least witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WitnessOrder {
    /// The external order of element names.
    Numeric,
    /// The `<` relation of the top model, which must be linear on `A_0`.
    TopModelLess,
}

fn unary_var(f: &Formula) -> Result<String, RamseyError> {
    let free = f.free_vars();
    if free.len() != 1 {
        return Err(RamseyError::NotUnary(free.len()));
    }
    Ok(free.into_iter().next().unwrap_or_default())
}

fn ordered_first_level(levels: &[&PartialStructure], order: WitnessOrder) -> Result<Vec<Element>, RamseyError> {
    let (Some(first), Some(top)) = (levels.first(), levels.last()) else {
        return Ok(Vec::new());
    };
    let elems: Vec<Element> = first.domain().iter().collect();
    match order {
        WitnessOrder::Numeric => Ok(elems),
        WitnessOrder::TopModelLess => {
            if top.signature().relation_arity(LESS) != Some(2) {
                return Err(RamseyError::NotLinear);
            }
            // a tournament is a linear order iff its scores are distinct
            let mut ranked = Vec::with_capacity(elems.len());
            for &b in &elems {
                let mut below = 0usize;
                for &c in &elems {
                    let lt = top.holds(LESS, &[c, b]).map_err(crate::fulfillment::FulfillmentError::from)?;
                    let gt = top.holds(LESS, &[b, c]).map_err(crate::fulfillment::FulfillmentError::from)?;
                    if (c == b && (lt || gt)) || (c != b && lt == gt) {
                        return Err(RamseyError::NotLinear);
                    }
                    below += usize::from(lt);
                }
                ranked.push((below, b));
            }
            ranked.sort_unstable();
            if ranked.iter().enumerate().any(|(i, (r, _))| *r != i) {
                return Err(RamseyError::NotLinear);
            }
            Ok(ranked.into_iter().map(|(_, b)| b).collect())
        }
    }
}

/// Least `b ∈ A_0` in `order` with `levels ⊨* f(b)`.
pub fn min_witness_on(
    levels: &[&PartialStructure],
    f: &Formula,
    order: WitnessOrder,
) -> Result<Option<Element>, RamseyError> {
    let var = unary_var(f)?;
    let candidates = ordered_first_level(levels, order)?;
    Ok(least_fulfilling(levels, f, &var, &Assignment::new(), candidates)?)
}

/// [`min_witness_on`] for a whole chain.
pub fn min_witness(
    v: &crate::fulfillment::LnModel,
    f: &Formula,
    order: WitnessOrder,
) -> Result<Option<Element>, RamseyError> {
    let levels: Vec<&PartialStructure> = v.levels().iter().collect();
    min_witness_on(&levels, f, order)
}

/// 0 when deleting level 1 and deleting level 2 give the same least
/// witness, 1 otherwise.
pub fn pair_coloring_on(levels: &[&PartialStructure], f: &Formula, order: WitnessOrder) -> Result<u32, RamseyError> {
    if levels.len() < 3 {
        return Err(RamseyError::Precondition("pair coloring needs at least three levels".into()));
    }
    let without = |k: usize| -> Vec<&PartialStructure> {
        levels.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, s)| *s).collect()
    };
    let drop_second = min_witness_on(&without(1), f, order)?;
    let drop_third = min_witness_on(&without(2), f, order)?;
    match (drop_second, drop_third) {
        (Some(a), Some(b)) => Ok(u32::from(a != b)),
        _ => Err(RamseyError::MissingWitness),
    }
}

pub fn pair_coloring(v: &crate::fulfillment::LnModel, f: &Formula, order: WitnessOrder) -> Result<u32, RamseyError> {
    let levels: Vec<&PartialStructure> = v.levels().iter().collect();
    pair_coloring_on(&levels, f, order)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColoringRule {
    Constant(u32),
    /// [`pair_coloring`] of the chain.
    MinWitnessComparison(WitnessOrder),
    /// Colors by canonical chain key, with a fallback for missing keys.
    Table {
        colors: BTreeMap<String, u32>,
        default: Option<u32>,
    },
}

/// A coloring of `(L, arity)`-models whose top universe lies below
/// `universe` and which fulfill `φ(b)` for some `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainColoring {
    arity: usize,
    phi: Formula,
    var: String,
    colors: u32,
    universe: u64,
    rule: ColoringRule,
}

fn chain_key(levels: &[&PartialStructure]) -> String {
    let keys: Vec<String> = levels.iter().map(|s| s.canonical_key()).collect();
    keys.join("<")
}

impl ChainColoring {
    pub fn new(
        arity: usize,
        phi: Formula,
        colors: u32,
        universe: u64,
        rule: ColoringRule,
    ) -> Result<Self, RamseyError> {
        let var = unary_var(&phi)?;
        if arity == 0 || colors == 0 {
            return Err(RamseyError::Precondition("arity and color count must be positive".into()));
        }
        Ok(ChainColoring { arity, phi, var, colors, universe, rule })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn phi(&self) -> &Formula {
        &self.phi
    }

    pub fn colors(&self) -> u32 {
        self.colors
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn rule(&self) -> &ColoringRule {
        &self.rule
    }

    /// `∃x φ(x)`, the sentence collapses are taken for.
    pub fn existential(&self) -> Formula {
        Formula::exists(self.var.clone(), self.phi.clone())
    }

    /// Length `arity`, top universe below the bound and `φ(b)` fulfilled for
    /// some `b` in the top model.
    pub fn in_domain(&self, levels: &[&PartialStructure]) -> Result<bool, RamseyError> {
        let Some(top) = levels.last() else {
            return Ok(false);
        };
        if levels.len() != self.arity || top.domain().max().is_some_and(|m| m >= self.universe) {
            return Ok(false);
        }
        let mut a = Assignment::new();
        for b in top.domain().iter() {
            a.insert(self.var.clone(), b);
            if fulfills_on(levels, &self.phi, &a)? == FulfillmentVerdict::True {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `None` outside the domain.
    pub fn color(&self, levels: &[&PartialStructure]) -> Result<Option<u32>, RamseyError> {
        if !self.in_domain(levels)? {
            return Ok(None);
        }
        let c = match &self.rule {
            ColoringRule::Constant(c) => *c,
            ColoringRule::MinWitnessComparison(order) => pair_coloring_on(levels, &self.phi, *order)?,
            ColoringRule::Table { colors, default } => match colors.get(&chain_key(levels)) {
                Some(c) => *c,
                None => default.ok_or_else(|| RamseyError::InvalidColoring("chain missing from the table".into()))?,
            },
        };
        Ok(Some(c))
    }
}

/// Every `k`-subset of `0..n`, lexicographically.
fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    go(n, k, 0, &mut cur, &mut out);
    out
}

/// A chain on which the color of some subsequence changes under collapse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundednessCounterexample {
    /// Family indices of the audited chain.
    pub chain: Vec<usize>,
    /// Positions of the subsequence inside the chain.
    pub positions: Vec<usize>,
    pub original: Option<u32>,
    /// Color of the same positions in the renamed collapse, `None` when it
    /// left the domain or could not be colored.
    pub collapsed: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundednessReport {
    /// Chains of length `arity` examined.
    pub domain_chains: u64,
    pub in_domain: u64,
    /// Domain chains the rule failed to color, by family indices.
    pub uncolored: Vec<Vec<usize>>,
    /// Colors at or above the color count.
    pub out_of_range: Vec<Vec<usize>>,
    /// Longer chains whose subsequences all lie in the domain.
    pub chains_audited: u64,
    pub collapses: u64,
    pub comparisons: u64,
    pub counterexamples: Vec<BoundednessCounterexample>,
    /// Total number of counterexamples; only the first few are kept.
    pub counterexample_count: u64,
}

impl BoundednessReport {
    pub fn passed(&self) -> bool {
        self.uncolored.is_empty() && self.out_of_range.is_empty() && self.counterexample_count == 0
    }
}

const KEPT_COUNTEREXAMPLES: usize = 16;

/// Audits the coloring on `family`: domain and range on every chain of
/// length `arity`, then invariance under F-collapse for `∃x φ(x)` on every
/// chain of length `arity..=max_len` whose `arity`-subsequences are all in
/// the domain.
pub fn is_bounded_coloring(
    c: &ChainColoring,
    family: &StructureFamily,
    max_len: usize,
) -> Result<BoundednessReport, RamseyError> {
    let mut report = BoundednessReport::default();
    let mut memo: BTreeMap<Vec<usize>, Option<u32>> = BTreeMap::new();
    let mut failure = None;
    family.for_each_chain(c.arity, &mut |idx| {
        report.domain_chains += 1;
        let levels = family.levels(idx);
        let colored = match c.in_domain(&levels) {
            Ok(false) => None,
            Ok(true) => {
                report.in_domain += 1;
                match c.color(&levels) {
                    Ok(col) => col,
                    Err(RamseyError::MissingWitness | RamseyError::InvalidColoring(_)) => {
                        report.uncolored.push(idx.to_vec());
                        None
                    }
                    Err(e) => {
                        failure = Some(e);
                        return false;
                    }
                }
            }
            Err(e) => {
                failure = Some(e);
                return false;
            }
        };
        if colored.is_some_and(|col| col >= c.colors) {
            report.out_of_range.push(idx.to_vec());
        }
        memo.insert(idx.to_vec(), colored);
        true
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let sentence = c.existential();
    for len in c.arity..=max_len.max(c.arity) {
        let subsets = index_subsets(len, c.arity);
        let mut outcome: Result<(), RamseyError> = Ok(());
        family.for_each_chain(len, &mut |idx| {
            let subs: Vec<(Vec<usize>, u32)> = subsets
                .iter()
                .filter_map(|pos| {
                    let key: Vec<usize> = pos.iter().map(|p| idx[*p]).collect();
                    memo.get(&key).copied().flatten().map(|col| (pos.clone(), col))
                })
                .collect();
            if subs.len() != subsets.len() {
                return true;
            }
            report.chains_audited += 1;
            let mut run = || -> Result<(), RamseyError> {
                let chain = family.chain(idx)?;
                let collapse = f_collapse(&chain, &sentence)?;
                report.collapses += 1;
                let renamed: Vec<&PartialStructure> = collapse.renamed.levels().iter().collect();
                for (pos, original) in &subs {
                    let sub: Vec<&PartialStructure> = pos.iter().map(|p| renamed[*p]).collect();
                    report.comparisons += 1;
                    let collapsed = match c.color(&sub) {
                        Ok(col) => col,
                        Err(RamseyError::MissingWitness | RamseyError::InvalidColoring(_)) => None,
                        Err(e) => return Err(e),
                    };
                    if collapsed != Some(*original) {
                        report.counterexample_count += 1;
                        if report.counterexamples.len() < KEPT_COUNTEREXAMPLES {
                            report.counterexamples.push(BoundednessCounterexample {
                                chain: idx.to_vec(),
                                positions: pos.clone(),
                                original: Some(*original),
                                collapsed,
                            });
                        }
                    }
                }
                Ok(())
            };
            match run() {
                Ok(()) => true,
                Err(e) => {
                    outcome = Err(e);
                    false
                }
            }
        });
        outcome?;
    }
    Ok(report)
}

/// Work done by a search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub colorings: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomogOutcome {
    /// Family indices of the chain and its constant color.
    Found { chain: Vec<usize>, color: u32 },
    /// The search space was exhausted.
    NoneExists,
    /// The node budget ran out first.
    BoundExceeded,
}

struct HomogSearch<'a> {
    c: &'a ChainColoring,
    family: &'a StructureFamily,
    max_nodes: u64,
    stats: SearchStats,
    memo: BTreeMap<Vec<usize>, Option<u32>>,
    subsets: Vec<Vec<Vec<usize>>>,
}

impl HomogSearch<'_> {
    fn color_of(&mut self, key: Vec<usize>) -> Result<Option<u32>, RamseyError> {
        if let Some(c) = self.memo.get(&key) {
            return Ok(*c);
        }
        self.stats.colorings += 1;
        let col = match self.c.color(&self.family.levels(&key)) {
            Ok(col) => col,
            Err(RamseyError::MissingWitness | RamseyError::InvalidColoring(_)) => None,
            Err(e) => return Err(e),
        };
        self.memo.insert(key, col);
        Ok(col)
    }

    // Subsequences that use the newest level, colored consistently?
    fn consistent(&mut self, cur: &[usize], color: &mut Option<u32>) -> Result<bool, RamseyError> {
        let arity = self.c.arity;
        if cur.len() < arity {
            return Ok(true);
        }
        let last = cur.len() - 1;
        while self.subsets.len() < cur.len() {
            let l = self.subsets.len();
            self.subsets.push(index_subsets(l, arity - 1));
        }
        for i in 0..self.subsets[last].len() {
            let mut key: Vec<usize> = self.subsets[last][i].iter().map(|p| cur[*p]).collect();
            key.push(cur[last]);
            match (self.color_of(key)?, *color) {
                (None, _) => return Ok(false),
                (Some(k), None) => *color = Some(k),
                (Some(k), Some(d)) if k != d => return Ok(false),
                _ => {}
            }
        }
        Ok(true)
    }

    fn extend(
        &mut self,
        cur: &mut Vec<usize>,
        color: Option<u32>,
        target: usize,
    ) -> Result<Option<HomogOutcome>, RamseyError> {
        if cur.len() == target {
            return Ok(color.map(|c| HomogOutcome::Found { chain: cur.clone(), color: c }));
        }
        let last = cur[cur.len() - 1];
        let succ: Vec<usize> = self.family.successors(last).to_vec();
        for j in succ {
            if !self.fits(j) {
                continue;
            }
            self.stats.nodes += 1;
            if self.stats.nodes > self.max_nodes {
                return Ok(Some(HomogOutcome::BoundExceeded));
            }
            cur.push(j);
            let mut col = color;
            if self.consistent(cur, &mut col)? {
                if let Some(found) = self.extend(cur, col, target)? {
                    return Ok(Some(found));
                }
            }
            cur.pop();
        }
        Ok(None)
    }

    fn fits(&self, j: usize) -> bool {
        self.family.members()[j].domain().max().is_some_and(|m| m < self.c.universe)
    }
}

/// A chain `⟨A_0, .., A_{k̄-1}⟩` from `family` with `k̄ ≥ k`, `|A_0| + m < k̄`,
/// every `arity`-subsequence in the domain of `c` and `c` constant on them.
/// Exhaustive up to `max_nodes` extension steps.
///
/// Prefixes of a homogeneous chain are homogeneous, so chains of length
/// exactly `max(k, |A_0| + m + 1, arity)` are searched.
pub fn find_homog_subseq(
    c: &ChainColoring,
    family: &StructureFamily,
    k: usize,
    m: usize,
    max_nodes: u64,
) -> Result<(HomogOutcome, SearchStats), RamseyError> {
    let mut search =
        HomogSearch { c, family, max_nodes, stats: SearchStats::default(), memo: BTreeMap::new(), subsets: Vec::new() };
    for first in 0..family.len() {
        if !search.fits(first) {
            continue;
        }
        let size = usize::try_from(family.members()[first].domain().len()).unwrap_or(usize::MAX);
        let target = k.max(size.saturating_add(m).saturating_add(1)).max(c.arity);
        search.stats.nodes += 1;
        if search.stats.nodes > max_nodes {
            return Ok((HomogOutcome::BoundExceeded, search.stats));
        }
        let mut cur = alloc::vec![first];
        let mut col = None;
        if search.consistent(&cur, &mut col)? {
            if let Some(out) = search.extend(&mut cur, col, target)? {
                return Ok((out, search.stats));
            }
        }
    }
    Ok((HomogOutcome::NoneExists, search.stats))
}

/// Parameters of one instance of the Bounded Coloring Principle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BcpInstance {
    pub r: u32,
    pub n: usize,
    pub sig: Arc<Signature>,
    pub phi: Formula,
    /// Largest function arity of the signature.
    pub j: usize,
    pub m: usize,
    pub k: usize,
    /// Universe bound `Col(k, j, |∃x φ(x)|, |L|) + 1`, clipped to a cap.
    pub universe: u64,
    /// Whether the cap was smaller than the bound.
    pub clipped: bool,
}

impl BcpInstance {
    pub fn new(
        r: u32,
        n: usize,
        sig: Arc<Signature>,
        phi: Formula,
        m: usize,
        k: usize,
        universe_cap: u64,
    ) -> Result<Self, RamseyError> {
        let var = unary_var(&phi)?;
        let l = sig.cardinality();
        if k < n || k < l + m {
            return Err(RamseyError::Precondition(alloc::format!(
                "need k >= n and k >= |L| + m, got k = {k}, n = {n}, |L| = {l}, m = {m}"
            )));
        }
        let j = sig.max_function_arity();
        let len = Formula::exists(var, phi.clone()).length();
        let bound = col_bound_capped(ColParams { i: k, j, k: len, l }, universe_cap).and_then(|b| b.checked_add(1));
        let (universe, clipped) = match bound {
            Some(b) if b <= universe_cap => (b, false),
            _ => (universe_cap, true),
        };
        Ok(BcpInstance { r, n, sig, phi, j, m, k, universe, clipped })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BcpOutcome {
    Witness {
        chain: Vec<usize>,
        color: u32,
    },
    /// The coloring has no homogeneous chain of the required shape.
    Counterexample,
    BoundExceeded,
}

/// Runs [`find_homog_subseq`] for every supplied coloring. Colorings must
/// match the instance (arity `n`, at most `r` colors, the instance's `φ` and
/// universe); boundedness itself is audited separately with
/// [`is_bounded_coloring`].
pub fn check_bcp_instance(
    b: &BcpInstance,
    colorings: &[ChainColoring],
    family: &StructureFamily,
    max_nodes: u64,
) -> Result<Vec<(BcpOutcome, SearchStats)>, RamseyError> {
    colorings
        .iter()
        .map(|c| {
            if c.arity != b.n || c.colors > b.r || c.phi != b.phi || c.universe != b.universe {
                return Err(RamseyError::Precondition("coloring does not match the instance".to_string()));
            }
            let (out, stats) = find_homog_subseq(c, family, b.k, b.m, max_nodes)?;
            let out = match out {
                HomogOutcome::Found { chain, color } => BcpOutcome::Witness { chain, color },
                HomogOutcome::NoneExists => BcpOutcome::Counterexample,
                HomogOutcome::BoundExceeded => BcpOutcome::BoundExceeded,
            };
            Ok((out, stats))
        })
        .collect()
}
