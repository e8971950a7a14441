//! Square-increasing chains of arithmetic segments, Robinson's `Q`, least
//! number principle instances and the prime-coding formula.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::fulfillment::{fulfills, ChainError, FulfillmentError, FulfillmentVerdict, LnModel};
use crate::logic::{parse_formula, Formula, Signature, SignatureError, Term, TIMES, ZERO};
use crate::structures::{Assignment, Domain};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArithmeticError {
    /// `m_{index}^2 < m_{index+1}` fails.
    NotSquareIncreasing {
        index: usize,
    },
    EmptySegment,
    NotArithmetic,
    FreeVariables {
        expected: usize,
        found: usize,
    },
    NoFormulas,
    ExpansionTooLarge {
        disjuncts: u128,
        limit: u128,
    },
    ValueTooLarge,
    Chain(ChainError),
    Fulfillment(FulfillmentError),
}

impl fmt::Display for ArithmeticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticError::NotSquareIncreasing { index } => {
                write!(f, "not square increasing: m_{index}^2 < m_{} fails", index + 1)
            }
            ArithmeticError::EmptySegment => write!(f, "segments must have at least one element"),
            ArithmeticError::NotArithmetic => write!(f, "the chain is not over the arithmetic base"),
            ArithmeticError::FreeVariables { expected, found } => {
                write!(f, "expected {expected} free variable(s), found {found}")
            }
            ArithmeticError::NoFormulas => write!(f, "at least one formula is required"),
            ArithmeticError::ExpansionTooLarge { disjuncts, limit } => {
                write!(f, "exponent expansion needs {disjuncts} disjuncts, limit is {limit}")
            }
            ArithmeticError::ValueTooLarge => write!(f, "coded value does not fit in 64 bits"),
            ArithmeticError::Chain(e) => write!(f, "{e}"),
            ArithmeticError::Fulfillment(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ArithmeticError {}

impl From<ChainError> for ArithmeticError {
    fn from(e: ChainError) -> Self {
        ArithmeticError::Chain(e)
    }
}

impl From<FulfillmentError> for ArithmeticError {
    fn from(e: FulfillmentError) -> Self {
        ArithmeticError::Fulfillment(e)
    }
}

/// Strictly increasing with `m_i^2 < m_{i+1}`.
pub fn validate_sq_inc(ms: &[u64]) -> bool {
    first_violation(ms).is_none()
}

fn first_violation(ms: &[u64]) -> Option<usize> {
    ms.windows(2).position(|w| !(w[0] < w[1] && w[0].checked_mul(w[0]).is_some_and(|sq| sq < w[1])))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SquareIncreasingSeq(Vec<u64>);

impl SquareIncreasingSeq {
    pub fn new(ms: Vec<u64>) -> Result<Self, ArithmeticError> {
        if let Some(index) = first_violation(&ms) {
            return Err(ArithmeticError::NotSquareIncreasing { index });
        }
        if ms.first() == Some(&0) {
            return Err(ArithmeticError::EmptySegment);
        }
        Ok(SquareIncreasingSeq(ms))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

/// `⟨M_{m_0}, .., M_{m_{n-1}}⟩`.
pub fn make_sq_models(seq: &SquareIncreasingSeq) -> Result<LnModel, ArithmeticError> {
    Ok(LnModel::from_segments(seq.as_slice())?)
}

const Q_SOURCES: [&str; 7] = [
    "forall x. !(0 = S(x))",
    "forall x. forall y. S(x) = S(y) -> x = y",
    "forall x. x != 0 -> exists y. x = S(y)",
    "forall x. x+0 = x",
    "forall x. forall y. x+S(y) = S(x+y)",
    "forall x. x*0 = 0",
    "forall x. forall y. x*S(y) = x*y+x",
];

/// `∀x ∃y (x ≤ y ∧ x ≠ y)`.
pub const NO_GREATEST_SOURCE: &str = "forall x. exists y. x <= y & x != y";

fn parse_fixed(src: &str) -> Formula {
    match parse_formula(src, &Signature::arithmetic()) {
        Ok(f) => f,
        Err(e) => unreachable!("built-in formula `{src}` failed to parse: {e}"),
    }
}

/// Axioms `q1`..`q7` of Robinson's `Q`, implications desugared.
pub fn q_axioms() -> Vec<Formula> {
    Q_SOURCES.iter().map(|s| parse_fixed(s)).collect()
}

pub fn no_greatest_element() -> Formula {
    parse_fixed(NO_GREATEST_SOURCE)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QCheckReport {
    /// Verdicts for `q1`..`q7`.
    pub axioms: Vec<FulfillmentVerdict>,
    pub no_greatest: FulfillmentVerdict,
    /// Square increasing, at least three levels and `m_0 > 1`.
    pub hypotheses_hold: bool,
}

impl QCheckReport {
    pub fn all_true(&self) -> bool {
        self.axioms.iter().all(|v| v.is_true()) && self.no_greatest.is_true()
    }
}

/// Evaluates the seven axioms and the no-greatest-element sentence.
pub fn check_q(v: &LnModel) -> Result<QCheckReport, ArithmeticError> {
    if !v.top().signature().is_arithmetic_base() {
        return Err(ArithmeticError::NotArithmetic);
    }
    let empty = Assignment::new();
    let axioms = q_axioms().iter().map(|f| fulfills(v, f, &empty)).collect::<Result<Vec<_>, _>>()?;
    let no_greatest = fulfills(v, &no_greatest_element(), &empty)?;
    let sizes: Option<Vec<u64>> = v
        .levels()
        .iter()
        .map(|s| match s.domain() {
            Domain::Range(n) if s.is_pure_segment() => Some(*n),
            _ => None,
        })
        .collect();
    let hypotheses_hold = sizes.is_some_and(|ms| validate_sq_inc(&ms) && ms.len() >= 3 && ms[0] > 1);
    Ok(QCheckReport { axioms, no_greatest, hypotheses_hold })
}

/// `sig` plus constants `c_0, .., c_{bound-1}`.
pub fn enlarge_with_constants(sig: &Signature, bound: u64) -> Result<Signature, SignatureError> {
    sig.with_constants((0..bound).map(|k| format!("c_{k}")))
}

/// A variable name based on `base` that does not occur in `avoid`.
pub fn fresh_var(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..).map(|k| format!("{base}{k}")).find(|v| !avoid.contains(v)).unwrap_or_else(|| base.to_string())
}

fn single_free_var(f: &Formula) -> Result<String, ArithmeticError> {
    let free = f.free_vars();
    if free.len() != 1 {
        return Err(ArithmeticError::FreeVariables { expected: 1, found: free.len() });
    }
    Ok(free.into_iter().next().unwrap_or_default())
}

/// `LNP(φ) := ∃x φ(x) → ∃x ∀y (φ(x) ∧ (φ(y) → x ≤ y))`, with `x` and `y`
/// fresh. The depth is `3·dp(φ) + 3`.
pub fn lnp(f: &Formula) -> Result<Formula, ArithmeticError> {
    let v = single_free_var(f)?;
    // `v` itself is renamed away, so it may be reused
    let mut avoid = f.all_vars();
    avoid.remove(&v);
    let x = fresh_var("x", &avoid);
    let mut avoid_y = avoid.clone();
    avoid_y.insert(x.clone());
    let y = fresh_var("y", &avoid_y);
    let at = |name: &str| f.rename_free(&v, name);
    let hypothesis = Formula::exists(x.clone(), at(&x));
    let least = Formula::exists(
        x.clone(),
        Formula::forall(
            y.clone(),
            Formula::and(at(&x), Formula::implies(at(&y), Formula::less_eq(Term::var(&*x), Term::var(&*y)))),
        ),
    );
    Ok(Formula::implies(hypothesis, least))
}

/// The first `k` primes.
pub fn first_primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2u64;
    while out.len() < k {
        if out.iter().take_while(|p| *p * *p <= c).all(|p| !c.is_multiple_of(*p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Most disjuncts [`prime_code_psi`] will build.
pub const MAX_PSI_DISJUNCTS: u128 = 4096;

fn number_term(sig: &Signature, value: u64) -> Term {
    let name = format!("c_{value}");
    if sig.has_constant(&name) {
        Term::Const(name)
    } else {
        Term::numeral(value)
    }
}

/// `ψ(x) := ∃n_0..n_{k-1} [x = p_0^{n_0}..p_{k-1}^{n_{k-1}} ∧ ⋀_i (∃y φ_i(y) → φ_i(n_i))]`.
///
/// Exponentiation is not in the language, so the first conjunct is the
/// disjunction over all exponent vectors `e ∈ [0, cap]^k` of
/// `⋀_i n_i = e_i ∧ x = Π_i p_i^{e_i}`, with powers written as repeated
/// products. Numbers are written with the constants `c_<v>` when `sig`
/// declares them and as numerals otherwise.
pub fn prime_code_psi(fs: &[Formula], cap: u64, sig: &Signature) -> Result<Formula, ArithmeticError> {
    if fs.is_empty() {
        return Err(ArithmeticError::NoFormulas);
    }
    let k = fs.len();
    let disjuncts = (cap as u128 + 1).checked_pow(k as u32).unwrap_or(u128::MAX);
    if disjuncts > MAX_PSI_DISJUNCTS {
        return Err(ArithmeticError::ExpansionTooLarge { disjuncts, limit: MAX_PSI_DISJUNCTS });
    }
    let primes = first_primes(k);
    let mut parts = Vec::with_capacity(k);
    for (i, f) in fs.iter().enumerate() {
        let v = single_free_var(f)?;
        parts.push((f.rename_bound_apart(&format!("q{i}_")), v));
    }
    let x = "x".to_string();
    let ns: Vec<String> = (0..k).map(|i| format!("n{i}")).collect();
    let ys: Vec<String> = (0..k).map(|i| format!("y{i}")).collect();

    let mut exps = alloc::vec![0u64; k];
    let mut options = Vec::new();
    loop {
        let mut value: u64 = 1;
        let mut factors = Vec::new();
        for (p, e) in primes.iter().zip(&exps) {
            for _ in 0..*e {
                value = value.checked_mul(*p).ok_or(ArithmeticError::ValueTooLarge)?;
                factors.push(number_term(sig, *p));
            }
        }
        let product = factors
            .into_iter()
            .reduce(|a, b| Term::App(TIMES.to_string(), alloc::vec![a, b]))
            .unwrap_or_else(|| number_term(sig, 1));
        let mut conj: Vec<Formula> =
            ns.iter().zip(&exps).map(|(n, e)| Formula::eq(Term::var(&**n), number_term(sig, *e))).collect();
        conj.push(Formula::eq(Term::var(&*x), product));
        options.extend(Formula::conjunction(conj));
        // next exponent vector, last coordinate fastest
        let mut pos = k;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            if exps[pos] < cap {
                exps[pos] += 1;
                break;
            }
            exps[pos] = 0;
        }
        if exps.iter().all(|e| *e == 0) {
            break;
        }
    }
    let coding = Formula::disjunction(options).ok_or(ArithmeticError::NoFormulas)?;
    let clauses = parts.iter().enumerate().map(|(i, (f, v))| {
        Formula::or(Formula::not(Formula::exists(ys[i].clone(), f.rename_free(v, &ys[i]))), f.rename_free(v, &ns[i]))
    });
    let body = Formula::conjunction(core::iter::once(coding).chain(clauses)).ok_or(ArithmeticError::NoFormulas)?;
    Ok(ns.iter().rev().fold(body, |acc, n| Formula::exists(n.clone(), acc)))
}

/// `{0, .., m-1}` with `S`, `+`, `*` taken mod `m`: a total finite structure
/// for checking closed arithmetic sentences with the debug satisfier.
pub fn modular_structure(
    sig: alloc::sync::Arc<Signature>,
    m: u64,
) -> Result<crate::structures::PartialStructure, crate::structures::StructureError> {
    use crate::structures::{indexed_constant_value, StructureTables};
    use alloc::collections::BTreeMap;
    let mut t = StructureTables { domain: (0..m).collect(), ..Default::default() };
    for c in sig.constants() {
        let v = if c == ZERO { 0 } else { indexed_constant_value(c).unwrap_or(0) % m };
        t.constants.insert(c.clone(), v);
    }
    let mut succ = BTreeMap::new();
    let mut add = BTreeMap::new();
    let mut mul = BTreeMap::new();
    for a in 0..m {
        succ.insert(alloc::vec![a], (a + 1) % m);
        for b in 0..m {
            add.insert(alloc::vec![a, b], (a + b) % m);
            mul.insert(alloc::vec![a, b], (a * b) % m);
        }
    }
    t.functions.insert("S".into(), succ);
    t.functions.insert("+".into(), add);
    t.functions.insert("*".into(), mul);
    let mut less = BTreeSet::new();
    for a in 0..m {
        for b in a + 1..m {
            less.insert(alloc::vec![a, b]);
        }
    }
    t.relations.insert("<".into(), less);
    crate::structures::PartialStructure::from_tables(sig, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::render_formula;
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn square_increasing_validation() {
        assert!(validate_sq_inc(&[2, 5, 26, 677]));
        assert!(!validate_sq_inc(&[2, 4]));
        assert!(validate_sq_inc(&[]));
        assert!(validate_sq_inc(&[7]));
        assert!(validate_sq_inc(&[2, 5, 26, 677, 458330]));
        assert_eq!(SquareIncreasingSeq::new(vec![3, 8]), Err(ArithmeticError::NotSquareIncreasing { index: 0 }));
    }

    #[test]
    fn sq_models() {
        let s = SquareIncreasingSeq::new(vec![2, 5, 26]).unwrap();
        assert_eq!(make_sq_models(&s).unwrap().len(), 3);
    }

    #[test]
    fn axiom_list() {
        let q = q_axioms();
        assert_eq!(q.len(), 7);
        assert_eq!(render_formula(&q[3]), "forall x. x+0 = x");
        let depths: Vec<usize> = q.iter().map(Formula::depth).collect();
        assert_eq!(depths, [1, 2, 2, 1, 2, 1, 2]);
    }

    #[test]
    fn q_on_minimal_chains() {
        for ms in [&[2u64, 5, 26][..], &[2, 5, 26, 677]] {
            let v = LnModel::from_segments(ms).unwrap();
            let r = check_q(&v).unwrap();
            assert!(r.all_true(), "{ms:?}: {r:?}");
            assert!(r.hypotheses_hold);
        }
    }

    #[test]
    fn hypotheses_flag() {
        // a valid chain that is not square increasing
        let v = LnModel::from_segments(&[2, 3, 5]).unwrap();
        assert!(!check_q(&v).unwrap().hypotheses_hold);
    }

    #[test]
    fn lnp_shape_and_depth() {
        let sig = Signature::arithmetic();
        let phi = parse_formula("x = x", &sig).unwrap();
        let l = lnp(&phi).unwrap();
        let expected =
            parse_formula("(exists x. x = x) -> exists x. forall y. x = x & (y = y -> x <= y)", &sig).unwrap();
        assert_eq!(l, expected);
        assert_eq!(l.depth(), 3);
        assert_eq!(parse_formula(&render_formula(&l), &sig).unwrap(), l);

        let psi = parse_formula("exists y. x = S(y)", &sig).unwrap();
        let l = lnp(&psi).unwrap();
        assert_eq!(l.depth(), 3 * psi.depth() + 3);
        assert!(l.is_sentence());
        assert!(lnp(&parse_formula("x = y", &sig).unwrap()).is_err());

        // bound names of the argument are avoided
        let chi = parse_formula("exists x. z < x", &sig).unwrap();
        let l = lnp(&chi).unwrap();
        assert!(render_formula(&l).starts_with("!(exists x1. exists x. x1 < x)"));
    }

    #[test]
    fn primes() {
        assert_eq!(first_primes(3), [2, 3, 5]);
        assert_eq!(first_primes(6), [2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn psi_expansion() {
        let sig = Signature::arithmetic();
        let phi = parse_formula("x = x", &sig).unwrap();
        let psi = prime_code_psi(&[phi], 2, &sig).unwrap();
        assert_eq!(psi.free_vars(), BTreeSet::from(["x".to_string()]));
        let text = render_formula(&psi);
        for atom in ["x = 1", "x = 2", "x = 2*2"] {
            assert!(text.contains(atom), "{atom} missing from {text}");
        }
        assert_eq!(parse_formula(&text, &sig).unwrap(), psi);
        assert!(matches!(
            prime_code_psi(&vec![parse_formula("x = x", &sig).unwrap(); 3], 20, &sig),
            Err(ArithmeticError::ExpansionTooLarge { .. })
        ));
    }

    #[test]
    fn psi_of_one_holds_without_witnesses() {
        let sig = Signature::arithmetic();
        // no element is its own successor mod 7
        let phi = parse_formula("x = S(x)", &sig).unwrap();
        let chi = parse_formula("x = S(S(x))", &sig).unwrap();
        let psi = prime_code_psi(&[phi, chi], 1, &sig).unwrap();
        let s = modular_structure(Arc::new(sig), 7).unwrap();
        assert!(s.is_total());
        let a = Assignment::from([("x".to_string(), 1)]);
        assert_eq!(s.satisfies(&psi, &a), Ok(Some(true)));
        let a = Assignment::from([("x".to_string(), 4)]);
        assert_eq!(s.satisfies(&psi, &a), Ok(Some(false)));
    }

    #[test]
    fn psi_uses_declared_constants() {
        let sig = enlarge_with_constants(&Signature::arithmetic(), 4).unwrap();
        let phi = parse_formula("x = x", &sig).unwrap();
        let psi = prime_code_psi(&[phi], 1, &sig).unwrap();
        assert!(render_formula(&psi).contains("x = c_2"));
    }

    #[test]
    fn enlarging() {
        let base = Signature::arithmetic();
        assert_eq!(enlarge_with_constants(&base, 0).unwrap(), base);
        assert_eq!(enlarge_with_constants(&base, 4).unwrap().constants().len(), 5);
        let twice = enlarge_with_constants(&enlarge_with_constants(&base, 1).unwrap(), 1);
        assert!(twice.is_err());
    }
}
