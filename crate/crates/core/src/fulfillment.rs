//! Chains of partial structures and the fulfillment relation `⊨*`.
//!
//! Conventions fixed here (the definition leaves them open):
//!
//! * Eligible indices. `i` ranges over `0..=min(n - dp - 1, n - 2)` and the
//!   least `i` whose level `A_{i+1}` defines every parameter term is used.
//! * `∃y ψ` looks for the least `b ∈ A_{i+1}` with the slice
//!   `A_{i+1}, .., A_{n-1}` fulfilling `ψ(b)`.
//! * `∀y ψ` requires every `b ∈ A_J`, `J = n - dp(∀y ψ) - 1`, to be fulfilled
//!   on the whole chain. Since levels are nested this covers every level up
//!   to `J`.
//! * Inside a quantifier an undefined instance counts as "not fulfilled": it
//!   is never a witness and it refutes a universal.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::logic::{Formula, Term};
use crate::structures::{Assignment, Element, EvalError, PartialStructure, StructureError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UndefinedReason {
    /// `n - dp - 1 < 0`: the chain is too short for the formula.
    NoEligibleIndex,
    /// A parameter only appears above every eligible level.
    ParameterInTopModel,
    /// Parameters are low enough but some term stays undefined.
    TermUndefined,
}

impl UndefinedReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UndefinedReason::NoEligibleIndex => "no-eligible-index",
            UndefinedReason::ParameterInTopModel => "parameter-in-top-model",
            UndefinedReason::TermUndefined => "term-undefined",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FulfillmentVerdict {
    True,
    False,
    Undefined(UndefinedReason),
}

impl FulfillmentVerdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            FulfillmentVerdict::True
        } else {
            FulfillmentVerdict::False
        }
    }

    pub fn is_true(self) -> bool {
        self == FulfillmentVerdict::True
    }

    pub fn is_defined(self) -> bool {
        !matches!(self, FulfillmentVerdict::Undefined(_))
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            FulfillmentVerdict::True => Some(true),
            FulfillmentVerdict::False => Some(false),
            FulfillmentVerdict::Undefined(_) => None,
        }
    }
}

impl fmt::Display for FulfillmentVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FulfillmentVerdict::True => f.write_str("true"),
            FulfillmentVerdict::False => f.write_str("false"),
            FulfillmentVerdict::Undefined(r) => write!(f, "undefined ({})", r.as_str()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainError {
    Empty,
    SignatureMismatch(usize),
    /// `A_i ⊆ A_{i+1}` fails for this `i`.
    ChainViolation(usize),
    IndexOutOfRange {
        i: usize,
        j: usize,
        len: usize,
    },
    Structure(StructureError),
}

impl fmt::Display for ChainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainError::Empty => write!(f, "a chain needs at least one structure"),
            ChainError::SignatureMismatch(i) => {
                write!(f, "structure {i} has a different signature from structure 0")
            }
            ChainError::ChainViolation(i) => {
                write!(f, "structure {i} is not a substructure of structure {}", i + 1)
            }
            ChainError::IndexOutOfRange { i, j, len } => {
                write!(f, "slice [{i}, {j}] is out of range for a chain of length {len}")
            }
            ChainError::Structure(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ChainError {}

impl From<StructureError> for ChainError {
    fn from(e: StructureError) -> Self {
        ChainError::Structure(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FulfillmentError {
    Eval(EvalError),
    /// Assignment values must be elements of the top model.
    OutsideTopModel {
        var: String,
        value: Element,
    },
}

impl fmt::Display for FulfillmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FulfillmentError::Eval(e) => write!(f, "{e}"),
            FulfillmentError::OutsideTopModel { var, value } => {
                write!(f, "value {value} of `{var}` is not in the top model")
            }
        }
    }
}

impl core::error::Error for FulfillmentError {}

impl From<EvalError> for FulfillmentError {
    fn from(e: EvalError) -> Self {
        FulfillmentError::Eval(e)
    }
}

/// A validated chain `A_0 ⊆ A_1 ⊆ .. ⊆ A_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LnModel {
    levels: Vec<PartialStructure>,
}

impl LnModel {
    pub fn new(levels: Vec<PartialStructure>) -> Result<Self, ChainError> {
        let first = levels.first().ok_or(ChainError::Empty)?;
        if let Some(i) = levels.iter().position(|s| s.signature() != first.signature()) {
            return Err(ChainError::SignatureMismatch(i));
        }
        for (i, w) in levels.windows(2).enumerate() {
            if !w[0].is_substructure(&w[1])? {
                return Err(ChainError::ChainViolation(i));
            }
        }
        Ok(LnModel { levels })
    }

    /// `⟨M_{m_0}, .., M_{m_{n-1}}⟩` over the arithmetic base.
    pub fn from_segments(ms: &[u64]) -> Result<Self, ChainError> {
        let levels = ms.iter().map(|m| crate::structures::make_segment(*m)).collect::<Result<Vec<_>, _>>()?;
        LnModel::new(levels)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn levels(&self) -> &[PartialStructure] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> Option<&PartialStructure> {
        self.levels.get(i)
    }

    pub fn top(&self) -> &PartialStructure {
        &self.levels[self.levels.len() - 1]
    }

    pub fn into_levels(self) -> Vec<PartialStructure> {
        self.levels
    }

    /// `A^{[i, j]}`.
    pub fn slice(&self, i: usize, j: usize) -> Result<Self, ChainError> {
        if i > j || j >= self.len() {
            return Err(ChainError::IndexOutOfRange { i, j, len: self.len() });
        }
        Ok(LnModel { levels: self.levels[i..=j].to_vec() })
    }

    /// `⟨A, top⟩`.
    pub fn end_extend(&self, top: PartialStructure) -> Result<Self, ChainError> {
        if top.signature() != self.top().signature() {
            return Err(ChainError::SignatureMismatch(self.len()));
        }
        if !self.top().is_substructure(&top)? {
            return Err(ChainError::ChainViolation(self.len() - 1));
        }
        let mut levels = self.levels.clone();
        levels.push(top);
        Ok(LnModel { levels })
    }

    /// The subsequence at `indices`, which must be strictly increasing.
    /// Subsequences of chains are chains, so no re-validation happens.
    pub fn subsequence(&self, indices: &[usize]) -> Result<Self, ChainError> {
        if indices.is_empty() {
            return Err(ChainError::Empty);
        }
        let len = self.len();
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices[indices.len() - 1] >= len {
            return Err(ChainError::IndexOutOfRange { i: indices[0], j: indices[indices.len() - 1], len });
        }
        Ok(LnModel { levels: indices.iter().map(|i| self.levels[*i].clone()).collect() })
    }

    /// Levels joined by `<`, each rendered with its canonical key.
    pub fn canonical_key(&self) -> String {
        let keys: Vec<String> = self.levels.iter().map(PartialStructure::canonical_key).collect();
        keys.join("<")
    }

    /// Isomorphism of chains: a bijection of top domains restricting to an
    /// isomorphism `A_i → B_i` at every level.
    pub fn is_isomorphism(&self, other: &LnModel, map: &BTreeMap<Element, Element>) -> bool {
        if self.len() != other.len() || !self.top().is_isomorphism(other.top(), map) {
            return false;
        }
        self.levels.iter().zip(&other.levels).all(|(a, b)| {
            let part: BTreeMap<Element, Element> =
                a.domain().iter().filter_map(|e| map.get(&e).map(|v| (e, *v))).collect();
            part.len() as u64 == a.domain().len() && a.is_isomorphism(b, &part)
        })
    }

    /// Transports every level along `map`.
    pub fn relabel(&self, map: &BTreeMap<Element, Element>) -> Result<Self, ChainError> {
        let levels = self
            .levels
            .iter()
            .map(|s| {
                let part: BTreeMap<Element, Element> =
                    s.domain().iter().filter_map(|e| map.get(&e).map(|v| (e, *v))).collect();
                s.relabel(&part)
            })
            .collect::<Result<Vec<_>, _>>()?;
        LnModel::new(levels)
    }
}

/// How a verdict was reached at the outermost formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub verdict: FulfillmentVerdict,
    /// The least eligible index `i_a`, when it exists.
    pub index: Option<usize>,
    /// Least witness of a fulfilled existential.
    pub witness: Option<Element>,
    /// Least element refuting a universal.
    pub counterexample: Option<Element>,
    /// Highest level the universal ranged over, or the level of the
    /// counterexample.
    pub universal_level: Option<usize>,
}

/// `A ⊨* f(a)`.
pub fn fulfills(v: &LnModel, f: &Formula, a: &Assignment) -> Result<FulfillmentVerdict, FulfillmentError> {
    let levels: Vec<&PartialStructure> = v.levels.iter().collect();
    fulfills_on(&levels, f, a)
}

/// Same as [`fulfills`] for a chain given as references; the caller
/// guarantees the chain condition.
pub fn fulfills_on(
    levels: &[&PartialStructure],
    f: &Formula,
    a: &Assignment,
) -> Result<FulfillmentVerdict, FulfillmentError> {
    Ok(explain_on(levels, f, a)?.verdict)
}

/// [`fulfills`] together with the index and witness choices made at the
/// outermost formula.
pub fn explain(v: &LnModel, f: &Formula, a: &Assignment) -> Result<Explanation, FulfillmentError> {
    let levels: Vec<&PartialStructure> = v.levels.iter().collect();
    explain_on(&levels, f, a)
}

pub fn explain_on(levels: &[&PartialStructure], f: &Formula, a: &Assignment) -> Result<Explanation, FulfillmentError> {
    explain_from(levels, f, a, 0)
}

/// [`explain_on`] with the eligible index forced to be at least `floor`.
/// This is how an instance drawn from level `floor` by an enclosing
/// universal is evaluated.
pub fn explain_from(
    levels: &[&PartialStructure],
    f: &Formula,
    a: &Assignment,
    floor: usize,
) -> Result<Explanation, FulfillmentError> {
    check_assignment(levels, f, a)?;
    let node = Node::new(f);
    let mut ex = Explanation {
        verdict: FulfillmentVerdict::Undefined(UndefinedReason::NoEligibleIndex),
        index: None,
        witness: None,
        counterexample: None,
        universal_level: None,
    };
    ex.verdict = eval(levels, &node, a, floor, Some(&mut ex))?;
    Ok(ex)
}

/// The least eligible index `i_a`, or `None` when fulfillment is undefined.
pub fn least_term_index(v: &LnModel, f: &Formula, a: &Assignment) -> Result<Option<usize>, FulfillmentError> {
    let levels: Vec<&PartialStructure> = v.levels.iter().collect();
    check_assignment(&levels, f, a)?;
    let node = Node::new(f);
    Ok(preamble(&levels, &node, a, 0)?.ok())
}

fn check_assignment(levels: &[&PartialStructure], f: &Formula, a: &Assignment) -> Result<(), FulfillmentError> {
    let Some(top) = levels.last() else {
        return Ok(());
    };
    for var in f.free_vars() {
        let value = *a.get(&var).ok_or_else(|| EvalError::UnassignedVariable(var.clone()))?;
        if !top.contains(value) {
            return Err(FulfillmentError::OutsideTopModel { var, value });
        }
    }
    Ok(())
}

/// A formula annotated with the data every evaluation of it needs.
#[derive(Debug)]
pub(crate) struct Node<'f> {
    pub(crate) formula: &'f Formula,
    pub(crate) depth: usize,
    params: Vec<Term>,
    free: Vec<String>,
    kids: Vec<Node<'f>>,
}

impl<'f> Node<'f> {
    pub(crate) fn new(f: &'f Formula) -> Self {
        let kids = match f {
            Formula::Rel(..) | Formula::Eq(..) => Vec::new(),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => {
                alloc::vec![Node::new(g)]
            }
            Formula::And(x, y) | Formula::Or(x, y) => alloc::vec![Node::new(x), Node::new(y)],
        };
        // Largest terms first: they fail fastest.
        let mut params: Vec<Term> = f.parameter_terms().into_iter().collect();
        params.sort_by_key(|t| core::cmp::Reverse(t.token_count()));
        Node { formula: f, depth: f.depth(), params, free: f.free_vars().into_iter().collect(), kids }
    }
}

fn preamble(
    levels: &[&PartialStructure],
    node: &Node<'_>,
    a: &Assignment,
    floor: usize,
) -> Result<Result<usize, UndefinedReason>, FulfillmentError> {
    let n = levels.len();
    if n < 2 || n < node.depth + 1 || floor > (n - node.depth - 1).min(n - 2) {
        return Ok(Err(UndefinedReason::NoEligibleIndex));
    }
    let hi = (n - node.depth - 1).min(n - 2);
    for i in floor..=hi {
        let level = levels[i + 1];
        let mut all = true;
        for t in &node.params {
            if level.eval_term(t, a)?.is_none() {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Ok(i));
        }
    }
    let highest = levels[hi + 1];
    if node.free.iter().any(|v| a.get(v).is_some_and(|e| !highest.contains(*e))) {
        Ok(Err(UndefinedReason::ParameterInTopModel))
    } else {
        Ok(Err(UndefinedReason::TermUndefined))
    }
}

fn eval(
    levels: &[&PartialStructure],
    node: &Node<'_>,
    a: &Assignment,
    floor: usize,
    mut trace: Option<&mut Explanation>,
) -> Result<FulfillmentVerdict, FulfillmentError> {
    let i = match preamble(levels, node, a, floor)? {
        Ok(i) => i,
        Err(reason) => return Ok(FulfillmentVerdict::Undefined(reason)),
    };
    if let Some(t) = trace.as_deref_mut() {
        t.index = Some(i);
    }
    let n = levels.len();
    let verdict = match node.formula {
        Formula::Rel(..) | Formula::Eq(..) => match levels[n - 1].satisfies_atomic(node.formula, a)? {
            Some(b) => FulfillmentVerdict::from_bool(b),
            None => FulfillmentVerdict::Undefined(UndefinedReason::TermUndefined),
        },
        Formula::Not(_) => match eval(levels, &node.kids[0], a, floor, None)? {
            FulfillmentVerdict::True => FulfillmentVerdict::False,
            FulfillmentVerdict::False => FulfillmentVerdict::True,
            u => u,
        },
        Formula::And(..) | Formula::Or(..) => {
            let conj = matches!(node.formula, Formula::And(..));
            let x = eval(levels, &node.kids[0], a, floor, None)?;
            let y = eval(levels, &node.kids[1], a, floor, None)?;
            match (x.as_bool(), y.as_bool()) {
                (Some(p), Some(q)) => FulfillmentVerdict::from_bool(if conj { p && q } else { p || q }),
                _ if x.is_defined() => y,
                _ => x,
            }
        }
        Formula::Exists(var, _) => {
            let rest = &levels[i + 1..];
            let mut inner = a.clone();
            let mut found = None;
            for b in levels[i + 1].domain().iter() {
                inner.insert(var.clone(), b);
                if eval(rest, &node.kids[0], &inner, 0, None)?.is_true() {
                    found = Some(b);
                    break;
                }
            }
            if let Some(t) = trace.as_deref_mut() {
                t.witness = found;
            }
            FulfillmentVerdict::from_bool(found.is_some())
        }
        Formula::Forall(var, _) => {
            let top = n - node.depth - 1;
            let mut inner = a.clone();
            let mut refuted = None;
            'levels: for j in i..=top {
                for b in levels[j].domain().iter() {
                    inner.insert(var.clone(), b);
                    if !eval(levels, &node.kids[0], &inner, j, None)?.is_true() {
                        refuted = Some((j, b));
                        break 'levels;
                    }
                }
            }
            if let Some(t) = trace {
                t.counterexample = refuted.map(|(_, b)| b);
                t.universal_level = Some(refuted.map_or(top, |(j, _)| j));
            }
            FulfillmentVerdict::from_bool(refuted.is_none())
        }
    };
    Ok(verdict)
}

/// Least `b` in `candidates` (in iteration order) with `levels ⊨* f(b)`
/// for the free variable `var`, keeping the rest of `a` fixed.
pub fn least_fulfilling(
    levels: &[&PartialStructure],
    f: &Formula,
    var: &str,
    a: &Assignment,
    candidates: impl IntoIterator<Item = Element>,
) -> Result<Option<Element>, FulfillmentError> {
    let node = Node::new(f);
    let Some(top) = levels.last() else {
        return Ok(None);
    };
    let mut inner = a.clone();
    for b in candidates {
        if !top.contains(b) {
            continue;
        }
        inner.insert(var.to_string(), b);
        if eval(levels, &node, &inner, 0, None)?.is_true() {
            return Ok(Some(b));
        }
    }
    Ok(None)
}
