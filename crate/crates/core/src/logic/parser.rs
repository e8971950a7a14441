//! Recursive-descent parser for the textual formula grammar.
//!
//! ```text
//! formula  := disj ("->" formula)?
//! disj     := conj ("|" conj)*
//! conj     := unary ("&" unary)*
//! unary    := "!" unary | quant | atom | "(" formula ")"
//! quant    := ("forall" | "exists") ident ("<" term)? "." formula
//! atom     := R "(" term,* ")" | term ("=" | "!=" | "<" | "<=") term
//! term     := prod ("+" prod)*
//! prod     := primary ("*" primary)*
//! primary  := numeral | ident | f "(" term,* ")" | "(" term ")"
//! ```
//!
//! Implication, `!=`, `<=` and bounded quantifiers are desugared on the way
//! in, so the resulting tree only uses the connectives `!`, `&`, `|` and the
//! two quantifiers.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::signature::{Signature, LESS, PLUS, SUCC, TIMES, ZERO};
use super::syntax::{Formula, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredSymbol(String),
    ArityMismatch { symbol: String, expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source text.
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error at {}: {msg}", self.position),
            ParseErrorKind::UndeclaredSymbol(s) => {
                write!(f, "undeclared symbol `{s}` at {}", self.position)
            }
            ParseErrorKind::ArityMismatch { symbol, expected, found } => {
                write!(f, "`{symbol}` expects {expected} argument(s), found {found} at {}", self.position)
            }
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Not,
    Arrow,
    Eq,
    Neq,
    Lt,
    Le,
    Plus,
    Star,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => alloc::format!("`{s}`"),
        Tok::Num(n) => alloc::format!("`{n}`"),
        Tok::End => "end of input".to_string(),
        other => alloc::format!("{other:?}"),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = bytes.get(i + 1).copied();
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'+' => Tok::Plus,
            b'*' => Tok::Star,
            b'=' => Tok::Eq,
            b'-' if two == Some(b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'!' if two == Some(b'=') => {
                i += 1;
                Tok::Neq
            }
            b'!' => Tok::Not,
            b'<' if two == Some(b'=') => {
                i += 1;
                Tok::Le
            }
            b'<' => Tok::Lt,
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..=i];
                let n = text.parse::<u64>().map_err(|_| ParseError {
                    kind: ParseErrorKind::Syntax(alloc::format!("numeral `{text}` too large")),
                    position: start,
                })?;
                Tok::Num(n)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_' || bytes[i + 1] == b'\'')
                {
                    i += 1;
                }
                Tok::Ident(src[start..=i].to_string())
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax(alloc::format!("unexpected character `{ch}`")),
                    position: start,
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: &'a Signature,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, kind: ParseErrorKind) -> PResult<T> {
        Err(ParseError { kind, position: self.offset() })
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.err(ParseErrorKind::Syntax(alloc::format!(
                "expected {}, found {}",
                describe(&want),
                describe(self.peek())
            )))
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(k) if k == "forall" || k == "exists" => self.quantifier(k == "exists"),
            Tok::LParen => {
                let save = self.pos;
                match self.atom() {
                    Ok(f) => Ok(f),
                    Err(_) => {
                        self.pos = save;
                        self.bump();
                        let f = self.formula()?;
                        self.expect(Tok::RParen)?;
                        Ok(f)
                    }
                }
            }
            _ => self.atom(),
        }
    }

    fn quantifier(&mut self, existential: bool) -> PResult<Formula> {
        self.bump();
        let var = match self.peek().clone() {
            Tok::Ident(v) if v != "forall" && v != "exists" => {
                if self.sig.declares(&v) {
                    return self.err(ParseErrorKind::Syntax(alloc::format!("cannot bind declared symbol `{v}`")));
                }
                self.bump();
                v
            }
            other => {
                return self.err(ParseErrorKind::Syntax(alloc::format!(
                    "expected a variable after quantifier, found {}",
                    describe(&other)
                )))
            }
        };
        let bound = if *self.peek() == Tok::Lt {
            self.require_relation(LESS, 2)?;
            self.bump();
            Some(self.term()?)
        } else {
            None
        };
        self.expect(Tok::Dot)?;
        let body = self.formula()?;
        Ok(match (existential, bound) {
            (true, None) => Formula::exists(var, body),
            (false, None) => Formula::forall(var, body),
            (true, Some(t)) => {
                let guard = Formula::less(Term::Var(var.clone()), t);
                Formula::exists(var, Formula::and(guard, body))
            }
            (false, Some(t)) => {
                let guard = Formula::less(Term::Var(var.clone()), t);
                Formula::forall(var, Formula::implies(guard, body))
            }
        })
    }

    fn require_relation(&self, name: &str, arity: usize) -> PResult<()> {
        match self.sig.relation_arity(name) {
            Some(a) if a == arity => Ok(()),
            Some(a) => self.err(ParseErrorKind::ArityMismatch { symbol: name.to_string(), expected: a, found: arity }),
            None => self.err(ParseErrorKind::UndeclaredSymbol(name.to_string())),
        }
    }

    fn require_function(&self, name: &str, arity: usize) -> PResult<()> {
        match self.sig.function_arity(name) {
            Some(a) if a == arity => Ok(()),
            Some(a) => self.err(ParseErrorKind::ArityMismatch { symbol: name.to_string(), expected: a, found: arity }),
            None => self.err(ParseErrorKind::UndeclaredSymbol(name.to_string())),
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        if let Tok::Ident(name) = self.peek().clone() {
            if self.sig.relation_arity(&name).is_some() && *self.peek_at(1) == Tok::LParen {
                let at = self.offset();
                self.bump();
                let args = self.arguments()?;
                let expected = self.sig.relation_arity(&name).unwrap_or(0);
                if args.len() != expected {
                    return Err(ParseError {
                        kind: ParseErrorKind::ArityMismatch { symbol: name, expected, found: args.len() },
                        position: at,
                    });
                }
                return Ok(Formula::Rel(name, args));
            }
        }
        let lhs = self.term()?;
        let op = self.peek().clone();
        match op {
            Tok::Eq | Tok::Neq | Tok::Lt | Tok::Le => {
                if matches!(op, Tok::Lt | Tok::Le) {
                    self.require_relation(LESS, 2)?;
                }
                self.bump();
                let rhs = self.term()?;
                Ok(match op {
                    Tok::Eq => Formula::eq(lhs, rhs),
                    Tok::Neq => Formula::not(Formula::eq(lhs, rhs)),
                    Tok::Lt => Formula::less(lhs, rhs),
                    _ => Formula::less_eq(lhs, rhs),
                })
            }
            other => self.err(ParseErrorKind::Syntax(alloc::format!(
                "expected `=`, `!=`, `<` or `<=`, found {}",
                describe(&other)
            ))),
        }
    }

    fn arguments(&mut self) -> PResult<Vec<Term>> {
        self.expect(Tok::LParen)?;
        let mut args = alloc::vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.product()?;
        while *self.peek() == Tok::Plus {
            self.require_function(PLUS, 2)?;
            self.bump();
            let rhs = self.product()?;
            t = Term::App(PLUS.to_string(), alloc::vec![t, rhs]);
        }
        Ok(t)
    }

    fn product(&mut self) -> PResult<Term> {
        let mut t = self.primary()?;
        while *self.peek() == Tok::Star {
            self.require_function(TIMES, 2)?;
            self.bump();
            let rhs = self.primary()?;
            t = Term::App(TIMES.to_string(), alloc::vec![t, rhs]);
        }
        Ok(t)
    }

    fn primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Num(n) => {
                if !self.sig.has_constant(ZERO) {
                    return self.err(ParseErrorKind::UndeclaredSymbol(ZERO.to_string()));
                }
                if n > 0 {
                    self.require_function(SUCC, 1)?;
                }
                self.bump();
                Ok(Term::numeral(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(name) if name == "forall" || name == "exists" => {
                self.err(ParseErrorKind::Syntax(alloc::format!("unexpected keyword `{name}`")))
            }
            Tok::Ident(name) => {
                let at = self.offset();
                if *self.peek_at(1) == Tok::LParen {
                    if self.sig.relation_arity(&name).is_some() {
                        return self.err(ParseErrorKind::Syntax(alloc::format!("relation `{name}` used as a term")));
                    }
                    let Some(expected) = self.sig.function_arity(&name) else {
                        return self.err(ParseErrorKind::UndeclaredSymbol(name));
                    };
                    self.bump();
                    let args = self.arguments()?;
                    if args.len() != expected {
                        return Err(ParseError {
                            kind: ParseErrorKind::ArityMismatch { symbol: name, expected, found: args.len() },
                            position: at,
                        });
                    }
                    return Ok(Term::App(name, args));
                }
                if self.sig.function_arity(&name).is_some() || self.sig.relation_arity(&name).is_some() {
                    return self.err(ParseErrorKind::Syntax(alloc::format!("`{name}` needs arguments")));
                }
                self.bump();
                if self.sig.has_constant(&name) {
                    Ok(Term::Const(name))
                } else {
                    Ok(Term::Var(name))
                }
            }
            other => self.err(ParseErrorKind::Syntax(alloc::format!("expected a term, found {}", describe(&other)))),
        }
    }
}

/// Parses `text` against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, sig };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err(ParseErrorKind::Syntax(alloc::format!("unexpected trailing {}", describe(p.peek()))));
    }
    Ok(f)
}

/// Parses a term on its own, e.g. for assignments given as text.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, sig };
    let t = p.term()?;
    if *p.peek() != Tok::End {
        return p.err(ParseErrorKind::Syntax("unexpected trailing input".to_string()));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::signature::Symbol;
    use alloc::vec;

    fn arith() -> Signature {
        Signature::arithmetic()
    }

    #[test]
    fn first_q_axiom_shape() {
        let f = parse_formula("forall x. !(0 = S(x))", &arith()).unwrap();
        assert_eq!(
            f,
            Formula::forall("x", Formula::not(Formula::eq(Term::constant("0"), Term::app("S", vec![Term::var("x")]))))
        );
    }

    #[test]
    fn atomic_equality() {
        let f = parse_formula("0 = 0", &arith()).unwrap();
        assert_eq!(f, Formula::eq(Term::constant("0"), Term::constant("0")));
        assert_eq!(f.depth(), 0);
    }

    #[test]
    fn implication_is_desugared() {
        let sig = Signature::new(vec![Symbol::new("P", 1)], vec![], vec!["c".into()]).unwrap();
        let f = parse_formula("P(c) -> P(c)", &sig).unwrap();
        let p = Formula::rel("P", vec![Term::constant("c")]);
        assert_eq!(f, Formula::or(Formula::not(p.clone()), p));
    }

    #[test]
    fn numerals_expand_to_successors() {
        let f = parse_formula("3 = x", &arith()).unwrap();
        assert_eq!(f, Formula::eq(Term::numeral(3), Term::var("x")));
    }

    #[test]
    fn precedence_of_arithmetic() {
        let f = parse_formula("x + y * z = x", &arith()).unwrap();
        let expected = Term::app("+", vec![Term::var("x"), Term::app("*", vec![Term::var("y"), Term::var("z")])]);
        assert_eq!(f, Formula::eq(expected, Term::var("x")));
    }

    #[test]
    fn bounded_quantifiers() {
        let f = parse_formula("exists y < x. y = y", &arith()).unwrap();
        let g = Formula::exists(
            "y",
            Formula::and(Formula::less(Term::var("y"), Term::var("x")), Formula::eq(Term::var("y"), Term::var("y"))),
        );
        assert_eq!(f, g);
        let f = parse_formula("forall y < x. y = y", &arith()).unwrap();
        let g = Formula::forall(
            "y",
            Formula::implies(
                Formula::less(Term::var("y"), Term::var("x")),
                Formula::eq(Term::var("y"), Term::var("y")),
            ),
        );
        assert_eq!(f, g);
    }

    #[test]
    fn parenthesised_terms_and_formulas() {
        let sig = arith();
        assert!(parse_formula("(x + y) * z = 0", &sig).is_ok());
        assert!(parse_formula("(x = y) & (0 < x)", &sig).is_ok());
        assert!(parse_formula("((x = y))", &sig).is_ok());
    }

    #[test]
    fn errors_carry_positions() {
        let sig = arith();
        let e = parse_formula("0 = ", &sig).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(e.position, 4);

        let e = parse_formula("f(x) = 0", &sig).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UndeclaredSymbol("f".into()));
        assert_eq!(e.position, 0);

        let e = parse_formula("S(x, x) = 0", &sig).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::ArityMismatch { symbol: "S".into(), expected: 1, found: 2 });

        let e = parse_formula("0 = 0 0", &sig).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn less_requires_declared_relation() {
        let sig = Signature::new(vec![], vec![], vec!["c".into()]).unwrap();
        let e = parse_formula("c < c", &sig).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UndeclaredSymbol("<".into()));
    }
}
