//! Finite partial structures.
//!
//! Relations and constants are total; function symbols may be partial. The
//! arithmetic segments `M_n` are stored intensionally: `x + y` is defined iff
//! the true sum lies in the domain, and so on. Any structure can be turned
//! into explicit tables with [`PartialStructure::materialize`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::logic::{Formula, Signature, Term, LESS, PLUS, SUCC, TIMES, ZERO};

/// Domain elements are natural numbers; their numeric order is the fixed
/// external well-order used for every "least element" choice.
pub type Element = u64;

/// Values of free variables.
pub type Assignment = BTreeMap<String, Element>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureError {
    EmptyDomain,
    SignatureMismatch,
    UnknownSymbol(String),
    MissingConstant(String),
    ArityMismatch { symbol: String, expected: usize, found: usize },
    OutOfDomain { symbol: String, element: Element },
    NotArithmetic(String),
    NotInjective,
}

impl fmt::Display for StructureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureError::EmptyDomain => write!(f, "domain must be nonempty"),
            StructureError::SignatureMismatch => write!(f, "structures have different signatures"),
            StructureError::UnknownSymbol(s) => write!(f, "symbol `{s}` is not in the signature"),
            StructureError::MissingConstant(c) => write!(f, "constant `{c}` is not interpreted"),
            StructureError::ArityMismatch { symbol, expected, found } => {
                write!(f, "`{symbol}` has arity {expected} but a tuple of length {found} was given")
            }
            StructureError::OutOfDomain { symbol, element } => {
                write!(f, "interpretation of `{symbol}` uses {element}, which is outside the domain")
            }
            StructureError::NotArithmetic(why) => write!(f, "not an arithmetic signature: {why}"),
            StructureError::NotInjective => write!(f, "relabelling map is not injective"),
        }
    }
}

impl core::error::Error for StructureError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    UnassignedVariable(String),
    UnknownSymbol(String),
    NotAtomic,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnassignedVariable(v) => write!(f, "variable `{v}` has no value"),
            EvalError::UnknownSymbol(s) => write!(f, "symbol `{s}` is not interpreted"),
            EvalError::NotAtomic => write!(f, "formula is not atomic"),
        }
    }
}

impl core::error::Error for EvalError {}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `{0, .., n-1}`.
    Range(u64),
    Set(BTreeSet<Element>),
}

impl Domain {
    pub fn contains(&self, e: Element) -> bool {
        match self {
            Domain::Range(n) => e < *n,
            Domain::Set(s) => s.contains(&e),
        }
    }

    pub fn len(&self) -> u64 {
        match self {
            Domain::Range(n) => *n,
            Domain::Set(s) => s.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min(&self) -> Option<Element> {
        match self {
            Domain::Range(0) => None,
            Domain::Range(_) => Some(0),
            Domain::Set(s) => s.first().copied(),
        }
    }

    pub fn max(&self) -> Option<Element> {
        match self {
            Domain::Range(n) => n.checked_sub(1),
            Domain::Set(s) => s.last().copied(),
        }
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> DomainIter<'_> {
        match self {
            Domain::Range(n) => DomainIter::Range(0..*n),
            Domain::Set(s) => DomainIter::Set(s.iter()),
        }
    }

    pub fn to_set(&self) -> BTreeSet<Element> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &Domain) -> bool {
        match (self, other) {
            (Domain::Range(a), Domain::Range(b)) => a <= b,
            (_, Domain::Range(b)) => self.max().is_none_or(|m| m < *b),
            _ => self.iter().all(|e| other.contains(e)),
        }
    }
}

#[derive(Clone, Debug)]
pub enum DomainIter<'a> {
    Range(core::ops::Range<u64>),
    Set(alloc::collections::btree_set::Iter<'a, Element>),
}

impl Iterator for DomainIter<'_> {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        match self {
            DomainIter::Range(r) => r.next(),
            DomainIter::Set(s) => s.next().copied(),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            DomainIter::Range(r) => r.size_hint(),
            DomainIter::Set(s) => s.size_hint(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RelationInterp {
    /// Numeric order on the domain.
    Less,
    Table(BTreeSet<Vec<Element>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FunctionInterp {
    /// `x + 1`, `x + y`, `x * y`; defined iff the value is in the domain.
    Succ,
    Add,
    Mul,
    Table(BTreeMap<Vec<Element>, Element>),
}

impl FunctionInterp {
    fn is_intensional(&self) -> bool {
        !matches!(self, FunctionInterp::Table(_))
    }

    fn raw(&self, args: &[Element]) -> Option<Element> {
        match (self, args) {
            (FunctionInterp::Succ, [a]) => a.checked_add(1),
            (FunctionInterp::Add, [a, b]) => a.checked_add(*b),
            (FunctionInterp::Mul, [a, b]) => a.checked_mul(*b),
            (FunctionInterp::Table(t), _) => t.get(args).copied(),
            _ => None,
        }
    }
}

/// A finite partial structure over a shared signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialStructure {
    sig: Arc<Signature>,
    domain: Domain,
    constants: BTreeMap<String, Element>,
    relations: BTreeMap<String, RelationInterp>,
    functions: BTreeMap<String, FunctionInterp>,
}

/// Explicit description of a structure, validated by
/// [`PartialStructure::from_tables`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructureTables {
    pub domain: BTreeSet<Element>,
    pub constants: BTreeMap<String, Element>,
    pub relations: BTreeMap<String, BTreeSet<Vec<Element>>>,
    pub functions: BTreeMap<String, BTreeMap<Vec<Element>, Element>>,
}

/// Value of an added constant `c_<k>` in arithmetic structures.
pub fn indexed_constant_value(name: &str) -> Option<Element> {
    let digits = name.strip_prefix("c_")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// The arithmetic segment `M_n` over the base signature.
pub fn make_segment(n: u64) -> Result<PartialStructure, StructureError> {
    PartialStructure::segment(Arc::new(Signature::arithmetic()), n)
}

impl PartialStructure {
    /// `M_n` over `sig`, which must be the arithmetic base plus any number of
    /// constants `c_<k>`, interpreted as `k`.
    pub fn segment(sig: Arc<Signature>, n: u64) -> Result<Self, StructureError> {
        if n == 0 {
            return Err(StructureError::EmptyDomain);
        }
        if !sig.is_arithmetic_base() {
            return Err(StructureError::NotArithmetic("missing 0, S, +, * or <".into()));
        }
        if sig.relations().len() != 1 || sig.functions().len() != 3 {
            return Err(StructureError::NotArithmetic("extra relation or function symbols".into()));
        }
        let mut constants = BTreeMap::new();
        for c in sig.constants() {
            let v = if c == ZERO {
                0
            } else {
                indexed_constant_value(c)
                    .ok_or_else(|| StructureError::NotArithmetic(format!("constant `{c}` has no fixed value")))?
            };
            if v >= n {
                return Err(StructureError::OutOfDomain { symbol: c.clone(), element: v });
            }
            constants.insert(c.clone(), v);
        }
        let relations = BTreeMap::from([(LESS.to_string(), RelationInterp::Less)]);
        let functions = BTreeMap::from([
            (SUCC.to_string(), FunctionInterp::Succ),
            (PLUS.to_string(), FunctionInterp::Add),
            (TIMES.to_string(), FunctionInterp::Mul),
        ]);
        Ok(PartialStructure { sig, domain: Domain::Range(n), constants, relations, functions })
    }

    /// Builds an explicit structure. Relations not listed are empty and
    /// functions not listed are nowhere defined.
    pub fn from_tables(sig: Arc<Signature>, t: StructureTables) -> Result<Self, StructureError> {
        if t.domain.is_empty() {
            return Err(StructureError::EmptyDomain);
        }
        let inside = |symbol: &str, e: Element| {
            if t.domain.contains(&e) {
                Ok(())
            } else {
                Err(StructureError::OutOfDomain { symbol: symbol.to_string(), element: e })
            }
        };
        for (c, v) in &t.constants {
            if !sig.has_constant(c) {
                return Err(StructureError::UnknownSymbol(c.clone()));
            }
            inside(c, *v)?;
        }
        if let Some(c) = sig.constants().iter().find(|c| !t.constants.contains_key(*c)) {
            return Err(StructureError::MissingConstant(c.clone()));
        }
        let mut relations = BTreeMap::new();
        for r in sig.relations() {
            relations.insert(r.name.clone(), RelationInterp::Table(BTreeSet::new()));
        }
        for (name, tuples) in t.relations {
            let arity = sig.relation_arity(&name).ok_or(StructureError::UnknownSymbol(name.clone()))?;
            for tup in &tuples {
                check_arity(&name, arity, tup.len())?;
                tup.iter().try_for_each(|e| inside(&name, *e))?;
            }
            relations.insert(name, RelationInterp::Table(tuples));
        }
        let mut functions = BTreeMap::new();
        for f in sig.functions() {
            functions.insert(f.name.clone(), FunctionInterp::Table(BTreeMap::new()));
        }
        for (name, graph) in t.functions {
            let arity = sig.function_arity(&name).ok_or(StructureError::UnknownSymbol(name.clone()))?;
            for (args, v) in &graph {
                check_arity(&name, arity, args.len())?;
                args.iter().try_for_each(|e| inside(&name, *e))?;
                inside(&name, *v)?;
            }
            functions.insert(name, FunctionInterp::Table(graph));
        }
        Ok(PartialStructure { sig, domain: Domain::Set(t.domain), constants: t.constants, relations, functions })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn signature_arc(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn contains(&self, e: Element) -> bool {
        self.domain.contains(e)
    }

    pub fn constant(&self, name: &str) -> Option<Element> {
        self.constants.get(name).copied()
    }

    pub fn constants(&self) -> &BTreeMap<String, Element> {
        &self.constants
    }

    /// True for `M_n` as produced by [`PartialStructure::segment`].
    pub fn is_pure_segment(&self) -> bool {
        matches!(self.domain, Domain::Range(_))
            && self.relations.values().all(|r| *r == RelationInterp::Less)
            && self.functions.values().all(FunctionInterp::is_intensional)
    }

    /// `f(args)`, or `None` when undefined. Arguments outside the domain
    /// give `None`.
    pub fn apply(&self, f: &str, args: &[Element]) -> Result<Option<Element>, EvalError> {
        let interp = self.functions.get(f).ok_or_else(|| EvalError::UnknownSymbol(f.to_string()))?;
        if !args.iter().all(|a| self.domain.contains(*a)) {
            return Ok(None);
        }
        Ok(interp.raw(args).filter(|v| self.domain.contains(*v)))
    }

    pub fn holds(&self, r: &str, args: &[Element]) -> Result<bool, EvalError> {
        match self.relations.get(r) {
            Some(RelationInterp::Less) => Ok(args.len() == 2 && args[0] < args[1]),
            Some(RelationInterp::Table(t)) => Ok(t.contains(args)),
            None => Err(EvalError::UnknownSymbol(r.to_string())),
        }
    }

    /// Evaluates `t` under `a`. A variable whose value lies outside the
    /// domain denotes nothing here, so it evaluates to `None` like any other
    /// undefined term.
    pub fn eval_term(&self, t: &Term, a: &Assignment) -> Result<Option<Element>, EvalError> {
        match t {
            Term::Var(v) => {
                let e = *a.get(v).ok_or_else(|| EvalError::UnassignedVariable(v.clone()))?;
                Ok(self.domain.contains(e).then_some(e))
            }
            Term::Const(c) => {
                self.constants.get(c).copied().map(Some).ok_or_else(|| EvalError::UnknownSymbol(c.clone()))
            }
            Term::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                let mut defined = true;
                // Evaluate every argument so that unassigned variables are
                // reported even when an earlier argument is undefined.
                for arg in args {
                    match self.eval_term(arg, a)? {
                        Some(v) => vals.push(v),
                        None => defined = false,
                    }
                }
                if !defined {
                    return Ok(None);
                }
                self.apply(f, &vals)
            }
        }
    }

    /// Truth of an atomic formula; `None` when some term is undefined.
    pub fn satisfies_atomic(&self, f: &Formula, a: &Assignment) -> Result<Option<bool>, EvalError> {
        let (name, args): (Option<&str>, Vec<&Term>) = match f {
            Formula::Eq(x, y) => (None, alloc::vec![x, y]),
            Formula::Rel(r, ts) => (Some(r.as_str()), ts.iter().collect()),
            _ => return Err(EvalError::NotAtomic),
        };
        let mut vals = Vec::with_capacity(args.len());
        let mut defined = true;
        for t in args {
            match self.eval_term(t, a)? {
                Some(v) => vals.push(v),
                None => defined = false,
            }
        }
        if let Some(r) = name {
            if !self.relations.contains_key(r) {
                return Err(EvalError::UnknownSymbol(r.to_string()));
            }
        }
        if !defined {
            return Ok(None);
        }
        match name {
            None => Ok(Some(vals[0] == vals[1])),
            Some(r) => self.holds(r, &vals).map(Some),
        }
    }

    /// Classical satisfaction with the strict three-valued reading: any
    /// undefined instance of a connective or quantifier makes the whole
    /// formula undefined. Meant for debugging and for total structures.
    pub fn satisfies(&self, f: &Formula, a: &Assignment) -> Result<Option<bool>, EvalError> {
        match f {
            Formula::Rel(..) | Formula::Eq(..) => self.satisfies_atomic(f, a),
            Formula::Not(g) => Ok(self.satisfies(g, a)?.map(|b| !b)),
            Formula::And(x, y) => {
                let (p, q) = (self.satisfies(x, a)?, self.satisfies(y, a)?);
                Ok(p.zip(q).map(|(p, q)| p && q))
            }
            Formula::Or(x, y) => {
                let (p, q) = (self.satisfies(x, a)?, self.satisfies(y, a)?);
                Ok(p.zip(q).map(|(p, q)| p || q))
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let existential = matches!(f, Formula::Exists(..));
                let mut inner = a.clone();
                let mut result = !existential;
                for e in self.domain.iter() {
                    inner.insert(v.clone(), e);
                    match self.satisfies(g, &inner)? {
                        None => return Ok(None),
                        Some(b) if existential => result |= b,
                        Some(b) => result &= b,
                    }
                }
                Ok(Some(result))
            }
        }
    }

    /// `self ⊆ other` in the strong sense: an induced substructure on which
    /// every function of `other` is defined.
    pub fn is_substructure(&self, other: &PartialStructure) -> Result<bool, StructureError> {
        if self.sig != other.sig {
            return Err(StructureError::SignatureMismatch);
        }
        if !self.domain.is_subset(&other.domain) || self.constants != other.constants {
            return Ok(false);
        }
        if let (Domain::Range(m), Domain::Range(n), true, true) =
            (&self.domain, &other.domain, self.is_pure_segment(), other.is_pure_segment())
        {
            // Intensional operations are monotone, so the largest tuple
            // decides whether everything is defined above.
            let top = m - 1;
            return Ok(self.functions.values().all(|f| {
                let args: &[Element] = if matches!(f, FunctionInterp::Succ) { &[top] } else { &[top, top] };
                f.raw(args).is_some_and(|v| v < *n)
            }));
        }
        let elems: Vec<Element> = self.domain.iter().collect();
        for sym in self.sig.relations() {
            let (ra, rb) = (&self.relations[&sym.name], &other.relations[&sym.name]);
            if *ra == RelationInterp::Less && *rb == RelationInterp::Less {
                continue;
            }
            let mut ok = true;
            for_each_tuple(&elems, sym.arity, |t| {
                ok = self.holds(&sym.name, t).ok() == other.holds(&sym.name, t).ok();
                ok
            });
            if !ok {
                return Ok(false);
            }
        }
        for sym in self.sig.functions() {
            let mut ok = true;
            for_each_tuple(&elems, sym.arity, |t| {
                let up = other.apply(&sym.name, t).ok().flatten();
                let here = self.apply(&sym.name, t).ok().flatten();
                ok = match up {
                    None => false,
                    Some(v) => here == self.domain.contains(v).then_some(v),
                };
                ok
            });
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every function symbol is defined on every tuple.
    pub fn is_total(&self) -> bool {
        self.is_substructure(self).unwrap_or(false)
    }

    /// The induced partial structure on `subset`, which must lie in the
    /// domain and contain every constant.
    pub fn restrict(&self, subset: &BTreeSet<Element>) -> Result<Self, StructureError> {
        if subset.is_empty() {
            return Err(StructureError::EmptyDomain);
        }
        if let Some(e) = subset.iter().find(|e| !self.domain.contains(**e)) {
            return Err(StructureError::OutOfDomain { symbol: "domain".into(), element: *e });
        }
        if let Some((c, v)) = self.constants.iter().find(|(_, v)| !subset.contains(*v)) {
            return Err(StructureError::OutOfDomain { symbol: c.clone(), element: *v });
        }
        let inside = |t: &[Element]| t.iter().all(|e| subset.contains(e));
        let relations = self
            .relations
            .iter()
            .map(|(k, r)| {
                let r = match r {
                    RelationInterp::Less => RelationInterp::Less,
                    RelationInterp::Table(t) => {
                        RelationInterp::Table(t.iter().filter(|x| inside(x)).cloned().collect())
                    }
                };
                (k.clone(), r)
            })
            .collect();
        let functions = self
            .functions
            .iter()
            .map(|(k, f)| {
                let f = match f {
                    FunctionInterp::Table(t) => FunctionInterp::Table(
                        t.iter()
                            .filter(|(args, v)| inside(args) && subset.contains(v))
                            .map(|(a, v)| (a.clone(), *v))
                            .collect(),
                    ),
                    other => other.clone(),
                };
                (k.clone(), f)
            })
            .collect();
        Ok(PartialStructure {
            sig: self.sig.clone(),
            domain: Domain::Set(subset.clone()),
            constants: self.constants.clone(),
            relations,
            functions,
        })
    }

    /// Explicit tables for every symbol. Cost is `|domain|^arity` per symbol.
    pub fn tables(&self) -> StructureTables {
        let elems: Vec<Element> = self.domain.iter().collect();
        let mut relations = BTreeMap::new();
        for sym in self.sig.relations() {
            let mut set = BTreeSet::new();
            for_each_tuple(&elems, sym.arity, |t| {
                if self.holds(&sym.name, t).unwrap_or(false) {
                    set.insert(t.to_vec());
                }
                true
            });
            relations.insert(sym.name.clone(), set);
        }
        let mut functions = BTreeMap::new();
        for sym in self.sig.functions() {
            let mut graph = BTreeMap::new();
            for_each_tuple(&elems, sym.arity, |t| {
                if let Ok(Some(v)) = self.apply(&sym.name, t) {
                    graph.insert(t.to_vec(), v);
                }
                true
            });
            functions.insert(sym.name.clone(), graph);
        }
        StructureTables { domain: elems.into_iter().collect(), constants: self.constants.clone(), relations, functions }
    }

    /// The same structure with every symbol given by an explicit table.
    pub fn materialize(&self) -> Self {
        let t = self.tables();
        PartialStructure {
            sig: self.sig.clone(),
            domain: Domain::Set(t.domain),
            constants: t.constants,
            relations: t.relations.into_iter().map(|(k, v)| (k, RelationInterp::Table(v))).collect(),
            functions: t.functions.into_iter().map(|(k, v)| (k, FunctionInterp::Table(v))).collect(),
        }
    }

    /// Transports the structure along an injective map defined on the domain.
    pub fn relabel(&self, map: &BTreeMap<Element, Element>) -> Result<Self, StructureError> {
        let image: BTreeSet<Element> = map.values().copied().collect();
        if image.len() != map.len() {
            return Err(StructureError::NotInjective);
        }
        let g = |e: &Element| {
            map.get(e).copied().ok_or(StructureError::OutOfDomain { symbol: "relabel".into(), element: *e })
        };
        let gs = |t: &Vec<Element>| t.iter().map(g).collect::<Result<Vec<_>, _>>();
        let t = self.tables();
        let tables = StructureTables {
            domain: t.domain.iter().map(g).collect::<Result<_, _>>()?,
            constants: t
                .constants
                .iter()
                .map(|(c, v)| Ok((c.clone(), g(v)?)))
                .collect::<Result<_, StructureError>>()?,
            relations: t
                .relations
                .iter()
                .map(|(r, set)| Ok((r.clone(), set.iter().map(gs).collect::<Result<_, _>>()?)))
                .collect::<Result<_, StructureError>>()?,
            functions: t
                .functions
                .iter()
                .map(|(f, graph)| {
                    let graph =
                        graph.iter().map(|(args, v)| Ok((gs(args)?, g(v)?))).collect::<Result<_, StructureError>>()?;
                    Ok((f.clone(), graph))
                })
                .collect::<Result<_, StructureError>>()?,
        };
        PartialStructure::from_tables(self.sig.clone(), tables)
    }

    /// Checks that `map` is an isomorphism from `self` onto `other`:
    /// a bijection of domains preserving constants, relations and function
    /// graphs including definedness.
    pub fn is_isomorphism(&self, other: &PartialStructure, map: &BTreeMap<Element, Element>) -> bool {
        if self.sig != other.sig || self.domain.len() != other.domain.len() {
            return false;
        }
        if map.len() as u64 != self.domain.len()
            || !self.domain.iter().all(|e| map.get(&e).is_some_and(|v| other.contains(*v)))
        {
            return false;
        }
        let image: BTreeSet<&Element> = map.values().collect();
        if image.len() != map.len() {
            return false;
        }
        self.preserves(other, map, None)
    }

    // Checks every tuple (or only tuples containing `focus`) over the
    // currently mapped part of the domain.
    fn preserves(&self, other: &PartialStructure, map: &BTreeMap<Element, Element>, focus: Option<Element>) -> bool {
        for (c, v) in &self.constants {
            if let Some(w) = map.get(v) {
                if other.constants.get(c) != Some(w) {
                    return false;
                }
            }
        }
        let elems: Vec<Element> = map.keys().copied().collect();
        let relevant = |t: &[Element]| focus.is_none_or(|f| t.contains(&f));
        for sym in self.sig.relations() {
            let mut ok = true;
            for_each_tuple(&elems, sym.arity, |t| {
                if relevant(t) {
                    let u: Vec<Element> = t.iter().map(|e| map[e]).collect();
                    ok = self.holds(&sym.name, t).ok() == other.holds(&sym.name, &u).ok();
                }
                ok
            });
            if !ok {
                return false;
            }
        }
        for sym in self.sig.functions() {
            let mut ok = true;
            for_each_tuple(&elems, sym.arity, |t| {
                if relevant(t) {
                    let u: Vec<Element> = t.iter().map(|e| map[e]).collect();
                    let here = self.apply(&sym.name, t).ok().flatten();
                    let there = other.apply(&sym.name, &u).ok().flatten();
                    ok = match (here, there) {
                        (None, None) => true,
                        (Some(x), Some(y)) => map.get(&x).is_none_or(|gx| *gx == y),
                        _ => false,
                    };
                }
                ok
            });
            if !ok {
                return false;
            }
        }
        true
    }

    /// Searches for an isomorphism onto `other` by backtracking, extending a
    /// partial map in ascending order of the domain.
    pub fn is_isomorphic(&self, other: &PartialStructure) -> Option<BTreeMap<Element, Element>> {
        if self.sig != other.sig || self.domain.len() != other.domain.len() {
            return None;
        }
        let mut map = BTreeMap::new();
        for (c, v) in &self.constants {
            let w = *other.constants.get(c)?;
            if let Some(prev) = map.insert(*v, w) {
                if prev != w {
                    return None;
                }
            }
        }
        let image: BTreeSet<Element> = map.values().copied().collect();
        if image.len() != map.len() || !self.preserves(other, &map, None) {
            return None;
        }
        let todo: Vec<Element> = self.domain.iter().filter(|e| !map.contains_key(e)).collect();
        let targets: Vec<Element> = other.domain.iter().filter(|e| !image.contains(e)).collect();
        let mut used = alloc::vec![false; targets.len()];
        if self.extend_iso(other, &todo, &targets, &mut used, &mut map) {
            Some(map)
        } else {
            None
        }
    }

    fn extend_iso(
        &self,
        other: &PartialStructure,
        todo: &[Element],
        targets: &[Element],
        used: &mut [bool],
        map: &mut BTreeMap<Element, Element>,
    ) -> bool {
        let Some((&e, rest)) = todo.split_first() else {
            return self.is_isomorphism(other, map);
        };
        for k in 0..targets.len() {
            if used[k] {
                continue;
            }
            map.insert(e, targets[k]);
            used[k] = true;
            if self.preserves(other, map, Some(e)) && self.extend_iso(other, rest, targets, used, map) {
                return true;
            }
            used[k] = false;
            map.remove(&e);
        }
        false
    }

    /// A deterministic textual key: `seg(n)` for arithmetic segments,
    /// otherwise a full listing of the tables.
    pub fn canonical_key(&self) -> String {
        if let (Domain::Range(n), true) = (&self.domain, self.is_pure_segment()) {
            return format!("seg({n})");
        }
        let t = self.tables();
        let mut out = String::from("{");
        let list = |v: &[Element]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        out.push_str(&format!("D[{}]", list(&t.domain.iter().copied().collect::<Vec<_>>())));
        for (c, v) in &t.constants {
            out.push_str(&format!(";{c}={v}"));
        }
        for (r, set) in &t.relations {
            let tuples: Vec<String> = set.iter().map(|x| format!("({})", list(x))).collect();
            out.push_str(&format!(";{r}[{}]", tuples.join("")));
        }
        for (f, graph) in &t.functions {
            let entries: Vec<String> = graph.iter().map(|(a, v)| format!("({})>{v}", list(a))).collect();
            out.push_str(&format!(";{f}[{}]", entries.join("")));
        }
        out.push('}');
        out
    }
}

fn check_arity(symbol: &str, expected: usize, found: usize) -> Result<(), StructureError> {
    if expected == found {
        Ok(())
    } else {
        Err(StructureError::ArityMismatch { symbol: symbol.to_string(), expected, found })
    }
}

/// Calls `f` on every tuple of length `arity` over `elems` in lexicographic
/// order, stopping early when `f` returns false.
pub fn for_each_tuple(elems: &[Element], arity: usize, mut f: impl FnMut(&[Element]) -> bool) {
    if elems.is_empty() && arity > 0 {
        return;
    }
    let mut idx = alloc::vec![0usize; arity];
    let mut tuple: Vec<Element> = idx.iter().map(|_| elems[0]).collect();
    loop {
        if !f(&tuple) {
            return;
        }
        let mut pos = arity;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                tuple[pos] = elems[idx[pos]];
                break;
            }
            idx[pos] = 0;
            tuple[pos] = elems[0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Symbol};
    use alloc::vec;

    fn m(n: u64) -> PartialStructure {
        make_segment(n).unwrap()
    }

    fn atom(s: &PartialStructure, src: &str) -> Option<bool> {
        let f = parse_formula(src, s.signature()).unwrap();
        s.satisfies_atomic(&f, &Assignment::new()).unwrap()
    }

    #[test]
    fn key_example_values() {
        assert_eq!(atom(&m(6), "1+1 = 2"), Some(true));
        assert_eq!(atom(&m(6), "3*4 = 0"), None);
        assert_eq!(atom(&m(5), "2 < 3"), Some(true));
        let s1 = m(1);
        assert_eq!(s1.eval_term(&Term::numeral(1), &Assignment::new()), Ok(None));
        assert_eq!(make_segment(0), Err(StructureError::EmptyDomain));
    }

    #[test]
    fn term_evaluation() {
        let s = m(6);
        let a = Assignment::new();
        assert_eq!(s.eval_term(&Term::numeral(2), &a), Ok(Some(2)));
        let t = Term::app("+", vec![Term::app("*", vec![Term::numeral(3), Term::numeral(4)]), Term::numeral(0)]);
        assert_eq!(s.eval_term(&t, &a), Ok(None));
        let x = Assignment::from([("x".to_string(), 9)]);
        let sx = Term::app("S", vec![Term::var("x")]);
        assert_eq!(m(10).eval_term(&sx, &x), Ok(None));
        assert_eq!(m(10).eval_term(&sx, &a), Err(EvalError::UnassignedVariable("x".into())));
    }

    #[test]
    fn segment_inclusions() {
        assert!(m(2).is_substructure(&m(5)).unwrap());
        // n > m^2 is sufficient, not necessary: 1+1, 1*1 and S(1) are below 4
        assert!(m(2).is_substructure(&m(4)).unwrap());
        assert!(!m(3).is_substructure(&m(4)).unwrap());
        assert!(!m(2).is_substructure(&m(2)).unwrap());
        assert!(m(5).is_substructure(&m(26)).unwrap());
        assert!(!m(5).is_substructure(&m(5)).unwrap());
        assert!(!m(5).is_total());
        // the general path agrees with the fast path
        assert!(m(2).materialize().is_substructure(&m(5)).unwrap());
        assert!(m(2).materialize().is_substructure(&m(4)).unwrap());
        assert!(!m(3).materialize().is_substructure(&m(4)).unwrap());
    }

    #[test]
    fn relational_structures_are_total() {
        let sig = Arc::new(Signature::new(vec![Symbol::new("P", 1)], vec![], vec!["c".into()]).unwrap());
        let s = PartialStructure::from_tables(
            sig,
            StructureTables {
                domain: BTreeSet::from([0, 1]),
                constants: BTreeMap::from([("c".into(), 0)]),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(s.is_total());
    }

    #[test]
    fn explicit_total_function() {
        let sig = Arc::new(Signature::new(vec![], vec![Symbol::new("f", 1)], vec![]).unwrap());
        let mut t = StructureTables { domain: BTreeSet::from([0, 1]), ..Default::default() };
        t.functions.insert("f".into(), BTreeMap::from([(vec![0], 1), (vec![1], 0)]));
        let s = PartialStructure::from_tables(sig, t).unwrap();
        assert!(s.is_total());
    }

    #[test]
    fn isomorphisms() {
        let a = m(2);
        assert_eq!(a.is_isomorphic(&a), Some(BTreeMap::from([(0, 0), (1, 1)])));
        // relabelled copy of M_2 on {5, 7}, with 0 still interpreted at 5
        let map = BTreeMap::from([(0, 5), (1, 7)]);
        let b = a.relabel(&map).unwrap();
        assert_eq!(b.constant("0"), Some(5));
        assert_eq!(a.is_isomorphic(&b), Some(map));
        assert_eq!(a.is_isomorphic(&m(3)), None);
    }

    #[test]
    fn restriction_is_induced() {
        let s = m(10).restrict(&BTreeSet::from([0, 1, 3])).unwrap();
        assert_eq!(s.apply("S", &[0]), Ok(Some(1)));
        assert_eq!(s.apply("S", &[1]), Ok(None));
        assert_eq!(s.apply("+", &[1, 1]), Ok(None));
        assert!(m(10).restrict(&BTreeSet::from([1])).is_err());
    }

    #[test]
    fn intensional_matches_tables() {
        let s = m(7);
        let e = s.materialize();
        for x in 0..7 {
            for y in 0..7 {
                assert_eq!(s.apply("*", &[x, y]), e.apply("*", &[x, y]));
                assert_eq!(s.holds("<", &[x, y]), e.holds("<", &[x, y]));
            }
        }
    }

    #[test]
    fn enlarged_constants() {
        let sig = Signature::arithmetic().with_constants((0..4).map(|k| format!("c_{k}"))).unwrap();
        let s = PartialStructure::segment(Arc::new(sig.clone()), 5).unwrap();
        assert_eq!(s.constant("c_3"), Some(3));
        assert!(PartialStructure::segment(Arc::new(sig), 3).is_err());
    }

    #[test]
    fn classical_debug_satisfier() {
        let sig = Signature::arithmetic();
        let f = parse_formula("forall x. x+0 = x", &sig).unwrap();
        assert_eq!(m(4).satisfies(&f, &Assignment::new()), Ok(Some(true)));
        let g = parse_formula("forall x. x < S(x)", &sig).unwrap();
        assert_eq!(m(4).satisfies(&g, &Assignment::new()), Ok(None));
    }

    #[test]
    fn tuple_iteration_order() {
        let mut seen = Vec::new();
        for_each_tuple(&[1, 2], 2, |t| {
            seen.push(t.to_vec());
            true
        });
        assert_eq!(seen, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        let mut count = 0;
        for_each_tuple(&[1, 2], 0, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 1);
    }

    #[test]
    fn canonical_keys() {
        assert_eq!(m(5).canonical_key(), "seg(5)");
        assert_ne!(m(2).materialize().canonical_key(), "seg(2)");
    }
}
