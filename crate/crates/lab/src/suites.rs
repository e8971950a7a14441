//! Seeded experiment suites, shared by the command-line front end and the
//! acceptance checks.

use std::collections::BTreeSet;
use std::sync::Arc;

use fulfillment_core::arithmetic::enlarge_with_constants;
use fulfillment_core::collapse::{col_bound_capped, f_collapse, verify_collapse, ColParams, CollapseError};
use fulfillment_core::logic::{Symbol, LESS, ZERO};
use fulfillment_core::ramsey::{
    enumerate_structures, find_homog_subseq, is_bounded_coloring, BoundednessReport, ChainColoring, ColoringRule,
    EnumCap, HomogOutcome, ProbeReport, SearchStats, StructureFamily, WitnessOrder,
};
use fulfillment_core::structures::StructureTables;
use fulfillment_core::{
    fulfills, parse_formula, render_formula, Assignment, Formula, FulfillmentVerdict, LnModel, PartialStructure,
    Signature,
};
use rand::seq::IteratorRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::formats::{chain_json, collapse_report_json};
use crate::generators::{case_rng, random_chain, random_formula, random_sentence};
use crate::LabError;

/// Runs `f` on shards `0..shards` with `workers` threads; results come back
/// in shard order whatever the scheduling.
pub fn run_sharded<T, F>(workers: usize, shards: usize, f: F) -> Result<Vec<T>, LabError>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::Internal(format!("worker pool: {e}")))?;
    Ok(pool.install(|| (0..shards).into_par_iter().map(&f).collect()))
}

const MAX_ATTEMPTS: usize = 10_000;

// ---------------------------------------------------------------------------
// end extension

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndExtensionCase {
    pub index: u64,
    pub formula: String,
    pub depth: usize,
    pub x: Option<u64>,
    pub chain: Value,
    pub new_top: Value,
    pub before: Value,
    pub after: Value,
    pub has_forall: bool,
    #[serde(skip)]
    pub verdicts: (FulfillmentVerdict, FulfillmentVerdict),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EndExtensionSummary {
    pub cases: u64,
    /// Cases whose verdict before extending is defined.
    pub defined: u64,
    pub agree: u64,
    pub mismatches: u64,
    pub mismatches_with_forall: u64,
    pub forall_cases: u64,
    pub forall_free_defined: u64,
    pub forall_free_changed: u64,
    /// The first mismatching cases, in case order.
    pub examples: Vec<EndExtensionCase>,
}

impl EndExtensionSummary {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

fn contains_forall(f: &Formula) -> bool {
    let mut found = false;
    f.visit(&mut |g| found |= matches!(g, Formula::Forall(..)));
    found
}

/// One case: a chain of 2 to 4 levels over at most 4 elements, a formula
/// in `x` of at most 14 tokens with `dp < len - 1`, and a value of `x` in
/// `A_0` at which every parameter term is defined in `A_0`. The chain is
/// end-extended by the top of a random one-level-longer chain.
pub fn end_extension_case(seed: u64, index: u64) -> Result<EndExtensionCase, LabError> {
    let mut rng = case_rng(seed, index);
    for _ in 0..MAX_ATTEMPTS {
        let len = rng.gen_range(2..=4);
        let size = rng.gen_range(1..=4);
        let long = random_chain(&mut rng, len + 1, size);
        let short = long.slice(0, len - 1).map_err(internal)?;
        let new_top = long.top().clone();
        let extended = short.end_extend(new_top.clone()).map_err(internal)?;
        let f = random_formula(&mut rng, 14, &["x"]);
        if f.depth() + 1 >= len {
            continue;
        }
        let mut a = Assignment::new();
        let x = if f.free_vars().is_empty() {
            None
        } else {
            let b = short.levels()[0].domain().iter().choose(&mut rng).unwrap_or(0);
            a.insert("x".into(), b);
            Some(b)
        };
        let low = &short.levels()[0];
        let mut terms_low = true;
        for t in f.parameter_terms() {
            terms_low &= low.eval_term(&t, &a).map_err(internal)?.is_some();
        }
        if !terms_low {
            continue;
        }
        let before = fulfills(&short, &f, &a).map_err(internal)?;
        let after = fulfills(&extended, &f, &a).map_err(internal)?;
        return Ok(EndExtensionCase {
            index,
            formula: render_formula(&f),
            depth: f.depth(),
            x,
            chain: chain_json(&short),
            new_top: chain_json(&LnModel::new(vec![new_top]).map_err(internal)?),
            before: crate::formats::verdict_json(before),
            after: crate::formats::verdict_json(after),
            has_forall: contains_forall(&f),
            verdicts: (before, after),
        });
    }
    Err(LabError::Internal(format!("case {index}: no admissible draw")))
}

pub fn end_extension_suite(
    seed: u64,
    cases: u64,
    workers: usize,
    keep: usize,
) -> Result<EndExtensionSummary, LabError> {
    let all = run_sharded(workers, cases as usize, |i| end_extension_case(seed, i as u64))?;
    let mut s = EndExtensionSummary::default();
    for case in all {
        let case = case?;
        s.cases += 1;
        s.forall_cases += u64::from(case.has_forall);
        let (before, after) = case.verdicts;
        if !before.is_defined() {
            continue;
        }
        s.defined += 1;
        if !case.has_forall {
            s.forall_free_defined += 1;
            s.forall_free_changed += u64::from(before != after);
        }
        if before == after {
            s.agree += 1;
        } else {
            s.mismatches += 1;
            s.mismatches_with_forall += u64::from(case.has_forall);
            if s.examples.len() < keep {
                s.examples.push(case);
            }
        }
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// collapse

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollapseInstance {
    pub index: u64,
    pub sentence: String,
    pub chain_len: usize,
    pub level_sizes: Vec<u64>,
    pub verdict: Value,
    /// Draws rejected because the sentence was undefined on the chain.
    pub rejected: u64,
    pub evaluations: u64,
    pub report: Value,
    pub passed: bool,
    #[serde(skip)]
    pub sizes: Vec<u64>,
    #[serde(skip)]
    pub bounds: Vec<Option<u64>>,
    #[serde(skip)]
    pub comparisons: u64,
}

/// One instance: a chain of 3 or 4 levels over at most 4 elements and a
/// sentence of at most 12 tokens with `dp ≤ n - 2` whose fulfillment on the
/// chain is defined.
pub fn collapse_instance(seed: u64, index: u64) -> Result<CollapseInstance, LabError> {
    let mut rng = case_rng(seed, index);
    let mut rejected = 0;
    for _ in 0..MAX_ATTEMPTS {
        let len = rng.gen_range(3..=4);
        let size = rng.gen_range(1..=4);
        let v = random_chain(&mut rng, len, size);
        let s = random_sentence(&mut rng, 12);
        if s.depth() + 2 > len {
            continue;
        }
        let r = match f_collapse(&v, &s) {
            Ok(r) => r,
            Err(CollapseError::Undefined(_)) => {
                rejected += 1;
                continue;
            }
            Err(e) => return Err(internal(e)),
        };
        let report = verify_collapse(&v, &r, &s).map_err(internal)?;
        let verdict = fulfills(&v, &s, &Assignment::new()).map_err(internal)?;
        return Ok(CollapseInstance {
            index,
            sentence: render_formula(&s),
            chain_len: len,
            level_sizes: v.levels().iter().map(|l| l.domain().len()).collect(),
            verdict: crate::formats::verdict_json(verdict),
            rejected,
            evaluations: r.evaluations,
            report: collapse_report_json(&report),
            passed: report.passed(),
            sizes: report.sizes.clone(),
            bounds: report.bounds.clone(),
            comparisons: report.comparisons,
        });
    }
    Err(LabError::Internal(format!("instance {index}: no admissible draw")))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CollapseSuiteSummary {
    pub instances: u64,
    pub passed: u64,
    pub evaluations: u64,
    pub comparisons: u64,
    pub rejected: u64,
    /// Largest `|B_i|` seen at each level.
    pub max_sizes: Vec<u64>,
    /// Smallest `Col(i, ..)` seen at each level; `None` beyond `u64`.
    pub min_bounds: Vec<Option<u64>>,
    pub failures: Vec<CollapseInstance>,
}

impl CollapseSuiteSummary {
    pub fn all_passed(&self) -> bool {
        self.instances > 0 && self.passed == self.instances
    }
}

pub fn collapse_suite(seed: u64, count: u64, workers: usize) -> Result<CollapseSuiteSummary, LabError> {
    let all = run_sharded(workers, count as usize, |i| collapse_instance(seed, i as u64))?;
    let mut s = CollapseSuiteSummary::default();
    for inst in all {
        let inst = inst?;
        s.instances += 1;
        s.passed += u64::from(inst.passed);
        s.evaluations += inst.evaluations;
        s.comparisons += inst.comparisons;
        s.rejected += inst.rejected;
        for (i, size) in inst.sizes.iter().enumerate() {
            if s.max_sizes.len() <= i {
                s.max_sizes.push(0);
                s.min_bounds.push(None);
            }
            s.max_sizes[i] = s.max_sizes[i].max(*size);
            s.min_bounds[i] = match (s.min_bounds[i], inst.bounds[i]) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        if !inst.passed {
            s.failures.push(inst);
        }
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// completeness probes and enumeration

/// [`fulfillment_core::ramsey::completeness_probe`] sharded by first member.
pub fn probe(
    f: &Formula,
    n: usize,
    sig: &Arc<Signature>,
    universe: &BTreeSet<u64>,
    cap: EnumCap,
    workers: usize,
) -> Result<ProbeReport, LabError> {
    if !f.is_sentence() {
        return Err(LabError::input("the probed formula must be a sentence"));
    }
    if f.depth() >= n {
        return Err(LabError::input(format!("depth {} must be below the chain length {n}", f.depth())));
    }
    let family = StructureFamily::new(enumerate_structures(sig, universe, cap)?, true)?;
    let shards = run_sharded(workers, family.len(), |first| ProbeReport::shard(&family, f, n, first))?;
    let mut report = ProbeReport::default();
    for s in shards {
        report.merge(s?);
    }
    if report.chains > cap.items {
        return Err(LabError::Cap(format!("{} chains exceed the cap of {}", report.chains, cap.items)));
    }
    Ok(report)
}

/// Structures over `universe` and the number of chains of each length up
/// to `n`.
pub fn enumerate(
    sig: &Arc<Signature>,
    n: usize,
    universe: &BTreeSet<u64>,
    cap: EnumCap,
    workers: usize,
) -> Result<(StructureFamily, Vec<u64>), LabError> {
    let family = StructureFamily::new(enumerate_structures(sig, universe, cap)?, true)?;
    let mut counts = Vec::with_capacity(n);
    for len in 1..=n {
        let per_first = run_sharded(workers, family.len(), |first| {
            let mut c = 0u64;
            family.for_each_chain_from(first, len, &mut |_| {
                c += 1;
                c <= cap.items
            });
            c
        })?;
        let total: u64 = per_first.iter().sum();
        if total > cap.items {
            return Err(LabError::Cap(format!("chains of length {len} exceed the cap of {}", cap.items)));
        }
        counts.push(total);
    }
    Ok((family, counts))
}

// ---------------------------------------------------------------------------
// the pair coloring of `∃x (0 < x)`

pub const PHI_SOURCE: &str = "0 < x";

/// Arithmetic plus `c_0` and `c_1`.
pub fn segment_signature() -> Result<Arc<Signature>, LabError> {
    Ok(Arc::new(enlarge_with_constants(&Signature::arithmetic(), 2).map_err(internal)?))
}

/// `{<, 0, c_1}`.
pub fn order_signature() -> Arc<Signature> {
    let sig = Signature::new(vec![Symbol::new(LESS, 2)], vec![], vec![ZERO.into(), "c_1".into()]);
    Arc::new(sig.unwrap_or_else(|e| unreachable!("fixed signature: {e}")))
}

/// `M_2 .. M_max` over [`segment_signature`], without repeats.
pub fn segment_family(max: u64) -> Result<StructureFamily, LabError> {
    let sig = segment_signature()?;
    let members = (2..=max)
        .map(|t| PartialStructure::segment(sig.clone(), t).map_err(internal))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StructureFamily::new(members, false)?)
}

/// The orders `({0..t-1}, <)` with `0 ↦ 0` and `c_1 ↦ 1`, for `2 ≤ t ≤ max`.
pub fn order_family(max: u64) -> Result<StructureFamily, LabError> {
    let sig = order_signature();
    let members = (2..=max)
        .map(|t| {
            let lt = (0..t).flat_map(|a| (a + 1..t).map(move |b| vec![a, b])).collect();
            let tables = StructureTables {
                domain: (0..t).collect(),
                constants: [(ZERO.to_string(), 0), ("c_1".to_string(), 1)].into(),
                relations: [(LESS.to_string(), lt)].into(),
                functions: Default::default(),
            };
            PartialStructure::from_tables(sig.clone(), tables).map_err(internal)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StructureFamily::new(members, false)?)
}

/// `Col(i, j, |∃x φ(x)|, |L|) + 1`, clipped to `cap`; the flag reports
/// clipping.
pub fn clipped_universe(i: usize, sig: &Signature, phi: &Formula, cap: u64) -> (u64, bool) {
    let len = Formula::exists("x", phi.clone()).length();
    let p = ColParams { i, j: sig.max_function_arity(), k: len, l: sig.cardinality() };
    match col_bound_capped(p, cap).and_then(|b| b.checked_add(1)) {
        Some(b) if b <= cap => (b, false),
        _ => (cap, true),
    }
}

/// The coloring of `arity`-chains comparing least witnesses of `φ` after
/// deleting level 1 and level 2.
pub fn pair_coloring(sig: &Signature, arity: usize, universe: u64) -> Result<ChainColoring, LabError> {
    let phi = parse_formula(PHI_SOURCE, sig).map_err(internal)?;
    Ok(ChainColoring::new(arity, phi, 2, universe, ColoringRule::MinWitnessComparison(WitnessOrder::TopModelLess))?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditSummary {
    pub arity: usize,
    pub max_len: usize,
    pub universe: u64,
    pub clipped: bool,
    pub family_size: usize,
    pub domain_chains: u64,
    pub in_domain: u64,
    pub uncolored: usize,
    pub out_of_range: usize,
    pub chains_audited: u64,
    pub collapses: u64,
    pub comparisons: u64,
    pub counterexamples: u64,
    pub passed: bool,
}

impl AuditSummary {
    pub fn new(
        c: &ChainColoring,
        family: &StructureFamily,
        max_len: usize,
        clipped: bool,
        r: &BoundednessReport,
    ) -> Self {
        AuditSummary {
            arity: c.arity(),
            max_len,
            universe: c.universe(),
            clipped,
            family_size: family.len(),
            domain_chains: r.domain_chains,
            in_domain: r.in_domain,
            uncolored: r.uncolored.len(),
            out_of_range: r.out_of_range.len(),
            chains_audited: r.chains_audited,
            collapses: r.collapses,
            comparisons: r.comparisons,
            counterexamples: r.counterexample_count,
            passed: r.passed(),
        }
    }
}

/// Exhaustive boundedness audit of [`pair_coloring`] on the segments
/// `M_t` with `t` up to the clipped universe bound `Col(arity, ..) + 1`.
pub fn segment_audit(arity: usize, max_len: usize, cap: u64) -> Result<AuditSummary, LabError> {
    let sig = segment_signature()?;
    let phi = parse_formula(PHI_SOURCE, &sig).map_err(internal)?;
    let (universe, clipped) = clipped_universe(arity, &sig, &phi, cap);
    let family = segment_family(universe)?;
    let c = pair_coloring(&sig, arity, universe)?;
    let r = is_bounded_coloring(&c, &family, max_len)?;
    Ok(AuditSummary::new(&c, &family, max_len, clipped, &r))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomogeneousCheck {
    pub family: String,
    pub arity: usize,
    pub m: usize,
    pub k: usize,
    pub outcome: String,
    pub chain: Vec<usize>,
    pub first_size: Option<u64>,
    pub color: Option<u32>,
    /// `m > 4` and `|A_0| < k̄ - m - n - 1` with `n = arity - 1`.
    pub side_conditions: bool,
    pub nodes: u64,
    pub colorings: u64,
}

impl HomogeneousCheck {
    /// A found chain meeting the side conditions has constant color 0.
    pub fn claim_holds(&self) -> bool {
        self.outcome != "bound-exceeded" && (!self.side_conditions || self.color == Some(0))
    }
}

/// Searches `family` for a chain homogeneous for `c` long enough that the
/// side conditions hold, i.e. of length above `|A_0| + m + n + 1`.
pub fn homogeneous_check(
    name: &str,
    c: &ChainColoring,
    family: &StructureFamily,
    m: usize,
    k: usize,
    max_nodes: u64,
) -> Result<HomogeneousCheck, LabError> {
    let n = c.arity().saturating_sub(1);
    let (out, stats): (HomogOutcome, SearchStats) = find_homog_subseq(c, family, k, m + n + 1, max_nodes)?;
    let mut check = HomogeneousCheck {
        family: name.to_string(),
        arity: c.arity(),
        m,
        k,
        outcome: String::new(),
        chain: Vec::new(),
        first_size: None,
        color: None,
        side_conditions: false,
        nodes: stats.nodes,
        colorings: stats.colorings,
    };
    match out {
        HomogOutcome::Found { chain, color } => {
            let first = family.members()[chain[0]].domain().len();
            check.outcome = "found".into();
            check.side_conditions = m > 4 && (first as usize) + m + n + 1 < chain.len();
            check.first_size = Some(first);
            check.chain = chain;
            check.color = Some(color);
        }
        HomogOutcome::NoneExists => check.outcome = "none-exists".into(),
        HomogOutcome::BoundExceeded => check.outcome = "bound-exceeded".into(),
    }
    Ok(check)
}

fn internal(e: impl std::fmt::Display) -> LabError {
    LabError::Internal(e.to_string())
}
