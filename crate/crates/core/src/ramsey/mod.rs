//! Colorings and homogeneous-set searches: classical Paris-Harrington sets,
//! colorings of chains of structures, the Bounded Coloring Principle, and
//! exhaustive enumeration of `(L,n)`-models for completeness probes.

mod chains;
mod enumerate;
mod homogeneous;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::collapse::CollapseError;
use crate::fulfillment::{ChainError, FulfillmentError};
use crate::structures::StructureError;

pub use chains::{
    check_bcp_instance, find_homog_subseq, is_bounded_coloring, min_witness, pair_coloring, BcpInstance, BcpOutcome,
    BoundednessCounterexample, BoundednessReport, ChainColoring, ColoringRule, HomogOutcome, SearchStats, WitnessOrder,
};
pub use enumerate::{
    completeness_probe, count_structures, enumerate_ln_models, enumerate_structures, EnumCap, ProbeReport,
    StructureFamily,
};
pub use homogeneous::{find_homogeneous, for_each_subset, ph_number, sq_inc_homogeneous, TupleColoring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RamseyError {
    NotTotal(Vec<u64>),
    ColorOutOfRange {
        color: u32,
        colors: u32,
    },
    InvalidColoring(String),
    GuardExceeded,
    CapExceeded {
        what: &'static str,
        limit: u64,
    },
    /// The formula must have exactly one free variable.
    NotUnary(usize),
    /// `<` of the top model is not a linear order on the candidates.
    NotLinear,
    MissingWitness,
    /// A side condition of an instance fails.
    Precondition(String),
    Chain(ChainError),
    Fulfillment(FulfillmentError),
    Collapse(CollapseError),
    Structure(StructureError),
}

impl fmt::Display for RamseyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RamseyError::NotTotal(t) => write!(f, "coloring is undefined on {t:?}"),
            RamseyError::ColorOutOfRange { color, colors } => {
                write!(f, "color {color} is not below {colors}")
            }
            RamseyError::InvalidColoring(m) => write!(f, "invalid coloring: {m}"),
            RamseyError::GuardExceeded => write!(f, "search guard exceeded"),
            RamseyError::CapExceeded { what, limit } => write!(f, "{what} exceeds the cap of {limit}"),
            RamseyError::NotUnary(k) => write!(f, "expected one free variable, found {k}"),
            RamseyError::NotLinear => write!(f, "`<` is not a linear order on the first level"),
            RamseyError::MissingWitness => write!(f, "no least witness on a deleted-index subchain"),
            RamseyError::Precondition(m) => write!(f, "{m}"),
            RamseyError::Chain(e) => write!(f, "{e}"),
            RamseyError::Fulfillment(e) => write!(f, "{e}"),
            RamseyError::Collapse(e) => write!(f, "{e}"),
            RamseyError::Structure(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for RamseyError {}

impl From<ChainError> for RamseyError {
    fn from(e: ChainError) -> Self {
        RamseyError::Chain(e)
    }
}

impl From<FulfillmentError> for RamseyError {
    fn from(e: FulfillmentError) -> Self {
        RamseyError::Fulfillment(e)
    }
}

impl From<CollapseError> for RamseyError {
    fn from(e: CollapseError) -> Self {
        RamseyError::Collapse(e)
    }
}

impl From<StructureError> for RamseyError {
    fn from(e: StructureError) -> Self {
        RamseyError::Structure(e)
    }
}
