//! Finite partial first-order structures, length-`n` chains of them
//! ("(L,n)-models"), the three-valued fulfillment relation evaluated over
//! such chains, the collapse construction that shrinks a chain while
//! preserving fulfillment of a fixed sentence, and the Ramsey-style coloring
//! searches built on top of all of it.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of immutable inputs; IO, file formats and the command-line front
//! end live in the `fulfillment-lab` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod arithmetic;
pub mod collapse;
pub mod fulfillment;
pub mod logic;
pub mod ramsey;
pub mod structures;

pub use fulfillment::{fulfills, FulfillmentVerdict, LnModel, UndefinedReason};
pub use logic::{parse_formula, render_formula, Formula, Signature, Term};
pub use structures::{Assignment, Element, PartialStructure};
