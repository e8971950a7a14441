//! Experiment plumbing around `fulfillment-core`: JSON formats, seeded
//! generators, the suites behind the acceptance checks, and the commands the
//! `fulfillment-lab` binary dispatches to.
//!
//! Every command returns a [`report::RunReport`] whose serialization depends
//! only on the configuration and seed, never on the worker count or on
//! wall-clock time.

pub mod commands;
pub mod formats;
pub mod generators;
pub mod report;
pub mod suites;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const TRUE: i32 = 0;
    pub const FALSE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const UNDEFINED: i32 = 3;
    pub const CAP: i32 = 4;
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("input error: {0}")]
    Input(String),
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Internal(String),
}

impl LabError {
    pub fn input(msg: impl Into<String>) -> Self {
        LabError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Input(_) => exit::INPUT,
            LabError::Cap(_) => exit::CAP,
            LabError::Io(_) | LabError::Internal(_) => exit::INPUT,
        }
    }
}

impl From<fulfillment_core::ramsey::RamseyError> for LabError {
    fn from(e: fulfillment_core::ramsey::RamseyError) -> Self {
        use fulfillment_core::ramsey::RamseyError;
        match e {
            RamseyError::CapExceeded { .. } | RamseyError::GuardExceeded => LabError::Cap(e.to_string()),
            RamseyError::Precondition(_)
            | RamseyError::NotUnary(_)
            | RamseyError::ColorOutOfRange { .. }
            | RamseyError::InvalidColoring(_) => LabError::Input(e.to_string()),
            other => LabError::Internal(other.to_string()),
        }
    }
}
