//! First-order syntax: signatures, terms, formulas, the text grammar and the
//! two syntactic measures `dp` and `|φ|`.

mod enumerate;
mod parser;
mod render;
mod signature;
mod syntax;

use alloc::collections::BTreeSet;

pub use enumerate::{enumerate_formulas, ENUM_VAR};
pub use parser::{parse_formula, parse_term, ParseError, ParseErrorKind};
pub use render::{render_formula, render_term};
pub use signature::{Signature, SignatureError, Symbol, LESS, PLUS, SUCC, TIMES, ZERO};
pub use syntax::{measures, Formula, SyntacticMeasures, Term};

pub fn depth(f: &Formula) -> usize {
    f.depth()
}

pub fn length(f: &Formula) -> usize {
    f.length()
}

pub fn subformulas(f: &Formula) -> BTreeSet<Formula> {
    f.subformulas()
}
