use alloc::format;
use alloc::string::{String, ToString};

use super::signature::{LESS, PLUS, SUCC, TIMES, ZERO};
use super::syntax::{Formula, Term};

const QUANT: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const UNARY: u8 = 3;

/// Renders a formula in the surface syntax accepted by the parser, with the
/// minimum parentheses needed for `parse(render(f)) == f`.
pub fn render_formula(f: &Formula) -> String {
    formula(f, QUANT)
}

pub fn render_term(t: &Term) -> String {
    term(t, 0)
}

fn formula(f: &Formula, ctx: u8) -> String {
    let (own, text) = match f {
        Formula::Rel(r, args) if r == LESS && args.len() == 2 => {
            (UNARY, format!("{} < {}", term(&args[0], 0), term(&args[1], 0)))
        }
        Formula::Rel(r, args) => {
            let parts: alloc::vec::Vec<String> = args.iter().map(|a| term(a, 0)).collect();
            (UNARY, format!("{r}({})", parts.join(", ")))
        }
        Formula::Eq(a, b) => (UNARY, format!("{} = {}", term(a, 0), term(b, 0))),
        Formula::Not(inner) => {
            let body =
                if is_infix_atom(inner) { format!("({})", formula(inner, QUANT)) } else { formula(inner, UNARY) };
            (UNARY, format!("!{body}"))
        }
        Formula::And(a, b) => (AND, format!("{} & {}", formula(a, AND), formula(b, UNARY))),
        Formula::Or(a, b) => (OR, format!("{} | {}", formula(a, OR), formula(b, AND))),
        Formula::Exists(v, body) => (QUANT, format!("exists {v}. {}", formula(body, QUANT))),
        Formula::Forall(v, body) => (QUANT, format!("forall {v}. {}", formula(body, QUANT))),
    };
    if own < ctx {
        format!("({text})")
    } else {
        text
    }
}

fn is_infix_atom(f: &Formula) -> bool {
    match f {
        Formula::Eq(..) => true,
        Formula::Rel(r, args) => r == LESS && args.len() == 2,
        _ => false,
    }
}

fn numeral_value(t: &Term) -> Option<u64> {
    let mut n = 0u64;
    let mut cur = t;
    loop {
        match cur {
            Term::Const(c) if c == ZERO => return Some(n),
            Term::App(f, args) if f == SUCC && args.len() == 1 => {
                n += 1;
                cur = &args[0];
            }
            _ => return None,
        }
    }
}

// Term precedence: 1 for `+`, 2 for `*`, 3 for primaries.
fn term(t: &Term, ctx: u8) -> String {
    let (own, text) = match t {
        Term::Var(v) | Term::Const(v) => (3, v.clone()),
        Term::App(f, args) if (f == PLUS || f == TIMES) && args.len() == 2 => {
            let p = if f == PLUS { 1 } else { 2 };
            (p, format!("{}{f}{}", term(&args[0], p), term(&args[1], p + 1)))
        }
        Term::App(..) if numeral_value(t).is_some() => (3, numeral_value(t).unwrap_or_default().to_string()),
        Term::App(f, args) => {
            let parts: alloc::vec::Vec<String> = args.iter().map(|a| term(a, 0)).collect();
            (3, format!("{f}({})", parts.join(",")))
        }
    };
    if own < ctx {
        format!("({text})")
    } else {
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parser::parse_formula;
    use crate::logic::signature::Signature;

    fn round_trip(src: &str) -> String {
        let sig = Signature::arithmetic();
        let f = parse_formula(src, &sig).unwrap();
        let out = render_formula(&f);
        assert_eq!(parse_formula(&out, &sig).unwrap(), f, "{src} -> {out}");
        out
    }

    #[test]
    fn renders_compactly() {
        assert_eq!(round_trip("forall x. x+0 = x"), "forall x. x+0 = x");
        assert_eq!(round_trip("forall x. !(0 = S(x))"), "forall x. !(0 = S(x))");
        assert_eq!(round_trip("(x+y)*z = 2"), "(x+y)*z = 2");
        assert_eq!(round_trip("x+(y+z) = x*(y*z)"), "x+(y+z) = x*(y*z)");
    }

    #[test]
    fn quantifier_scope_is_preserved() {
        assert_eq!(round_trip("(exists y. x < y) & x = x"), "(exists y. x < y) & x = x");
        assert_eq!(round_trip("x = x & exists y. x < y"), "x = x & (exists y. x < y)");
        assert_eq!(round_trip("!exists y. x < y"), "!(exists y. x < y)");
    }

    #[test]
    fn connective_grouping() {
        round_trip("x = x | (y = y | z = z)");
        round_trip("(x = x | y = y) & z = z");
        round_trip("x = x & (y = y & z = z)");
        round_trip("x <= y -> y <= x");
    }
}
