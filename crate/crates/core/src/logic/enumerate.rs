//! Deterministic enumeration of formulas with exactly one free variable `x`.
//!
//! Formulas are produced shortest first; within a length they are ordered
//! lexicographically by their canonical prefix tokens. A quantifier nested
//! under `d` others binds `v{d}`, so the enumeration never produces two
//! alpha-equivalent spellings of the same formula.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::signature::Signature;
use super::syntax::{Formula, Term};

/// The free variable of enumerated formulas.
pub const ENUM_VAR: &str = "x";

struct Gen<'a> {
    sig: &'a Signature,
    terms: BTreeMap<(usize, usize), Vec<Term>>,
    formulas: BTreeMap<(usize, usize), Vec<Formula>>,
}

impl<'a> Gen<'a> {
    fn scope(d: usize) -> Vec<String> {
        let mut vars = alloc::vec![ENUM_VAR.to_string()];
        vars.extend((0..d).map(|i| format!("v{i}")));
        vars
    }

    // Terms with exactly `size` tokens using variables in scope at depth `d`.
    fn terms(&mut self, size: usize, d: usize) -> Vec<Term> {
        if let Some(t) = self.terms.get(&(size, d)) {
            return t.clone();
        }
        let mut out = Vec::new();
        if size == 1 {
            out.extend(self.sig.constants().iter().map(|c| Term::Const(c.clone())));
            out.extend(Self::scope(d).into_iter().map(Term::Var));
        } else if size > 1 {
            for f in self.sig.functions().to_vec() {
                for args in self.tuples(size - 1, f.arity, d) {
                    out.push(Term::App(f.name.clone(), args));
                }
            }
        }
        self.terms.insert((size, d), out.clone());
        out
    }

    // Argument lists of `arity` terms whose sizes sum to `total`.
    fn tuples(&mut self, total: usize, arity: usize, d: usize) -> Vec<Vec<Term>> {
        if arity == 0 {
            return if total == 0 { alloc::vec![Vec::new()] } else { Vec::new() };
        }
        let mut out = Vec::new();
        if total < arity {
            return out;
        }
        for first in 1..=total - (arity - 1) {
            let heads = self.terms(first, d);
            if heads.is_empty() {
                continue;
            }
            let tails = self.tuples(total - first, arity - 1, d);
            for h in &heads {
                for t in &tails {
                    let mut v = Vec::with_capacity(arity);
                    v.push(h.clone());
                    v.extend(t.iter().cloned());
                    out.push(v);
                }
            }
        }
        out
    }

    fn formulas(&mut self, len: usize, d: usize) -> Vec<Formula> {
        if let Some(f) = self.formulas.get(&(len, d)) {
            return f.clone();
        }
        let mut out = Vec::new();
        if len >= 2 {
            for r in self.sig.relations().to_vec() {
                for args in self.tuples(len - 1, r.arity, d) {
                    out.push(Formula::Rel(r.name.clone(), args));
                }
            }
            for mut pair in self.tuples(len - 1, 2, d) {
                let b = pair.pop().unwrap_or_else(|| Term::var(ENUM_VAR));
                let a = pair.pop().unwrap_or_else(|| Term::var(ENUM_VAR));
                out.push(Formula::Eq(a, b));
            }
            for g in self.formulas(len - 1, d) {
                out.push(Formula::not(g));
            }
            for left in 1..len - 1 {
                let right = len - 1 - left;
                let ls = self.formulas(left, d);
                if ls.is_empty() {
                    continue;
                }
                let rs = self.formulas(right, d);
                for a in &ls {
                    for b in &rs {
                        out.push(Formula::and(a.clone(), b.clone()));
                        out.push(Formula::or(a.clone(), b.clone()));
                    }
                }
            }
        }
        if len >= 3 {
            let v = format!("v{d}");
            for g in self.formulas(len - 2, d + 1) {
                out.push(Formula::exists(v.clone(), g.clone()));
                out.push(Formula::forall(v.clone(), g));
            }
        }
        self.formulas.insert((len, d), out.clone());
        out
    }
}

/// The first `k` formulas whose only free variable is `x`, in
/// length-then-lexicographic order of canonical tokens.
pub fn enumerate_formulas(sig: &Signature, k: usize) -> Vec<Formula> {
    let mut out = Vec::with_capacity(k);
    let mut gen = Gen { sig, terms: BTreeMap::new(), formulas: BTreeMap::new() };
    let mut len = 1;
    while out.len() < k {
        let mut batch: Vec<(Vec<String>, Formula)> = gen
            .formulas(len, 0)
            .into_iter()
            .filter(|f| {
                let fv = f.free_vars();
                fv.len() == 1 && fv.contains(ENUM_VAR)
            })
            .map(|f| (f.canonical_tokens(), f))
            .collect();
        batch.sort();
        out.extend(batch.into_iter().map(|(_, f)| f).take(k - out.len()));
        len += 1;
    }
    out
}
