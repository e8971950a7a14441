use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// A relation or function symbol together with its arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Symbol { name: name.into(), arity }
    }
}

/// Name of the constant zero in the arithmetic base signature.
pub const ZERO: &str = "0";
/// Successor.
pub const SUCC: &str = "S";
pub const PLUS: &str = "+";
pub const TIMES: &str = "*";
pub const LESS: &str = "<";

const RESERVED: &[&str] = &["forall", "exists", "="];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignatureError {
    DuplicateSymbol(String),
    ZeroArity(String),
    InvalidName(String),
}

impl fmt::Display for SignatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignatureError::DuplicateSymbol(s) => write!(f, "symbol `{s}` declared twice"),
            SignatureError::ZeroArity(s) => write!(f, "symbol `{s}` must have arity at least 1"),
            SignatureError::InvalidName(s) => write!(f, "`{s}` is not a valid symbol name"),
        }
    }
}

impl core::error::Error for SignatureError {}

/// A finite first-order signature. Equality is a logical symbol and is not
/// part of the signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: Vec<Symbol>,
    functions: Vec<Symbol>,
    constants: Vec<String>,
}

impl Signature {
    pub fn new(relations: Vec<Symbol>, functions: Vec<Symbol>, constants: Vec<String>) -> Result<Self, SignatureError> {
        let mut seen: Vec<&str> = Vec::new();
        let names = relations
            .iter()
            .map(|s| (s.name.as_str(), Some(s.arity)))
            .chain(functions.iter().map(|s| (s.name.as_str(), Some(s.arity))))
            .chain(constants.iter().map(|c| (c.as_str(), None)));
        for (name, arity) in names {
            if name.is_empty() || RESERVED.contains(&name) || name.contains(char::is_whitespace) {
                return Err(SignatureError::InvalidName(name.to_string()));
            }
            if arity == Some(0) {
                return Err(SignatureError::ZeroArity(name.to_string()));
            }
            if seen.contains(&name) {
                return Err(SignatureError::DuplicateSymbol(name.to_string()));
            }
            seen.push(name);
        }
        Ok(Signature { relations, functions, constants })
    }

    /// The language of arithmetic: `0`, `S`, `+`, `*` and `<`.
    pub fn arithmetic() -> Self {
        Signature {
            relations: alloc::vec![Symbol::new(LESS, 2)],
            functions: alloc::vec![Symbol::new(SUCC, 1), Symbol::new(PLUS, 2), Symbol::new(TIMES, 2)],
            constants: alloc::vec![ZERO.to_string()],
        }
    }

    /// True when the signature contains the arithmetic symbols with their
    /// standard arities.
    pub fn is_arithmetic_base(&self) -> bool {
        self.has_constant(ZERO)
            && self.function_arity(SUCC) == Some(1)
            && self.function_arity(PLUS) == Some(2)
            && self.function_arity(TIMES) == Some(2)
            && self.relation_arity(LESS) == Some(2)
    }

    pub fn relations(&self) -> &[Symbol] {
        &self.relations
    }

    pub fn functions(&self) -> &[Symbol] {
        &self.functions
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|s| s.name == name).map(|s| s.arity)
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.iter().find(|s| s.name == name).map(|s| s.arity)
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    pub fn declares(&self, name: &str) -> bool {
        self.has_constant(name) || self.relation_arity(name).is_some() || self.function_arity(name).is_some()
    }

    /// `|L|`: number of constant, relation and function symbols.
    pub fn cardinality(&self) -> usize {
        self.relations.len() + self.functions.len() + self.constants.len()
    }

    /// Largest arity of a function symbol, 0 for purely relational signatures.
    pub fn max_function_arity(&self) -> usize {
        self.functions.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    /// Adds constants, failing on a name clash.
    pub fn with_constants<I>(&self, names: I) -> Result<Self, SignatureError>
    where
        I: IntoIterator<Item = String>,
    {
        let mut constants = self.constants.clone();
        constants.extend(names);
        Signature::new(self.relations.clone(), self.functions.clone(), constants)
    }
}
