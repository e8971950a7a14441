use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::signature::{LESS, SUCC, ZERO};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(name.into(), args)
    }

    /// `S(S(...S(0)))` with `n` successors.
    pub fn numeral(n: u64) -> Self {
        let mut t = Term::Const(ZERO.to_string());
        for _ in 0..n {
            t = Term::App(SUCC.to_string(), alloc::vec![t]);
        }
        t
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Every subterm, the term itself included.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            if let Term::App(_, args) = t {
                stack.extend(args.iter());
            }
        }
        out
    }

    pub fn token_count(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::token_count).sum::<usize>(),
        }
    }

    fn push_tokens(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) | Term::Const(v) => out.push(v.clone()),
            Term::App(f, args) => {
                out.push(f.clone());
                args.iter().for_each(|a| a.push_tokens(out));
            }
        }
    }

    fn rename_var(&self, from: &str, to: &str) -> Term {
        match self {
            Term::Var(v) if v == from => Term::Var(to.to_string()),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename_var(from, to)).collect()),
        }
    }
}

/// First-order formulas over the connectives the fulfillment relation knows
/// about. Implication and bounded quantifiers are desugared by the parser.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn rel(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Rel(name.into(), args)
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Eq(a, b)
    }

    pub fn less(a: Term, b: Term) -> Self {
        Formula::Rel(LESS.to_string(), alloc::vec![a, b])
    }

    /// `a <= b` as `a < b | a = b`.
    pub fn less_eq(a: Term, b: Term) -> Self {
        Formula::or(Formula::less(a.clone(), b.clone()), Formula::Eq(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `a -> b`, stored as `!a | b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(var.into(), Box::new(body))
    }

    /// Left-nested conjunction; `None` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::or)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Rel(..) | Formula::Eq(..))
    }

    /// `dp`: the number of quantifier occurrences.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Rel(..) | Formula::Eq(..) => 0,
            Formula::Not(f) => f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) => a.depth() + b.depth(),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.depth(),
        }
    }

    /// `|φ|`: number of tokens in the canonical prefix serialization.
    pub fn length(&self) -> usize {
        match self {
            Formula::Rel(_, args) => 1 + args.iter().map(Term::token_count).sum::<usize>(),
            Formula::Eq(a, b) => 1 + a.token_count() + b.token_count(),
            Formula::Not(f) => 1 + f.length(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.length() + b.length(),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 2 + f.length(),
        }
    }

    /// Canonical prefix serialization, one token per symbol occurrence.
    pub fn canonical_tokens(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.length());
        self.push_tokens(&mut out);
        out
    }

    fn push_tokens(&self, out: &mut Vec<String>) {
        match self {
            Formula::Rel(r, args) => {
                out.push(r.clone());
                args.iter().for_each(|a| a.push_tokens(out));
            }
            Formula::Eq(a, b) => {
                out.push("=".to_string());
                a.push_tokens(out);
                b.push_tokens(out);
            }
            Formula::Not(f) => {
                out.push("!".to_string());
                f.push_tokens(out);
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                out.push(if matches!(self, Formula::And(..)) { "&" } else { "|" }.to_string());
                a.push_tokens(out);
                b.push_tokens(out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                out.push(if matches!(self, Formula::Exists(..)) { "exists" } else { "forall" }.to_string());
                out.push(v.clone());
                f.push_tokens(out);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Rel(_, args) => {
                for v in args.iter().flat_map(Term::vars) {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            Formula::Eq(a, b) => {
                for v in a.vars().into_iter().chain(b.vars()) {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Rel(_, args) => args.iter().for_each(|t| out.extend(t.vars())),
            Formula::Eq(a, b) => {
                out.extend(a.vars());
                out.extend(b.vars());
            }
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal over the formula tree.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Rel(..) | Formula::Eq(..) => {}
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// All subtrees, deduplicated structurally.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| {
            out.insert(g.clone());
        });
        out
    }

    /// Term occurrences (including subterms) whose variables are all free in
    /// the formula. These are the terms that must be defined before the
    /// formula can be evaluated on a chain.
    pub fn parameter_terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.collect_param_terms(&mut Vec::new(), &mut out);
        out
    }

    fn collect_param_terms(&self, bound: &mut Vec<String>, out: &mut BTreeSet<Term>) {
        let take = |t: &Term, out: &mut BTreeSet<Term>| {
            for s in t.subterms() {
                if s.vars().iter().all(|v| !bound.contains(v)) {
                    out.insert(s.clone());
                }
            }
        };
        match self {
            Formula::Rel(_, args) => args.iter().for_each(|t| take(t, out)),
            Formula::Eq(a, b) => {
                take(a, out);
                take(b, out);
            }
            Formula::Not(f) => f.collect_param_terms(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_param_terms(bound, out);
                b.collect_param_terms(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_param_terms(bound, out);
                bound.pop();
            }
        }
    }

    /// Every term occurring in the formula, with all of its subterms.
    pub fn all_terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| match g {
            Formula::Rel(_, args) => args.iter().flat_map(Term::subterms).for_each(|t| {
                out.insert(t.clone());
            }),
            Formula::Eq(a, b) => a.subterms().into_iter().chain(b.subterms()).for_each(|t| {
                out.insert(t.clone());
            }),
            _ => {}
        });
        out
    }

    /// Renames free occurrences of `from` to `to`. The caller guarantees that
    /// `to` is not bound anywhere in the formula.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|t| t.rename_var(from, to)).collect()),
            Formula::Eq(a, b) => Formula::Eq(a.rename_var(from, to), b.rename_var(from, to)),
            Formula::Not(f) => Formula::not(f.rename_free(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Exists(v, _) | Formula::Forall(v, _) if v == from => self.clone(),
            Formula::Exists(v, f) => Formula::exists(v.clone(), f.rename_free(from, to)),
            Formula::Forall(v, f) => Formula::forall(v.clone(), f.rename_free(from, to)),
        }
    }

    /// Renames every bound variable to `{prefix}{k}` for a running counter
    /// `k`, so that bound names are distinct from each other and from
    /// anything not starting with `prefix`.
    pub fn rename_bound_apart(&self, prefix: &str) -> Formula {
        let mut counter = 0usize;
        self.rename_bound_inner(prefix, &mut counter)
    }

    fn rename_bound_inner(&self, prefix: &str, counter: &mut usize) -> Formula {
        match self {
            Formula::Rel(..) | Formula::Eq(..) => self.clone(),
            Formula::Not(f) => Formula::not(f.rename_bound_inner(prefix, counter)),
            Formula::And(a, b) => {
                Formula::and(a.rename_bound_inner(prefix, counter), b.rename_bound_inner(prefix, counter))
            }
            Formula::Or(a, b) => {
                Formula::or(a.rename_bound_inner(prefix, counter), b.rename_bound_inner(prefix, counter))
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let fresh = alloc::format!("{prefix}{counter}");
                *counter += 1;
                let body = f.rename_bound_inner(prefix, counter).rename_free(v, &fresh);
                if matches!(self, Formula::Exists(..)) {
                    Formula::exists(fresh, body)
                } else {
                    Formula::forall(fresh, body)
                }
            }
        }
    }
}

/// `dp(φ)` and `|φ|` together.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntacticMeasures {
    pub depth: usize,
    pub length: usize,
}

pub fn measures(f: &Formula) -> SyntacticMeasures {
    SyntacticMeasures { depth: f.depth(), length: f.length() }
}
