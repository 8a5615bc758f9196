//! Rule programs compiled to logic-gate activation networks.
//!
//! A small Prolog/ASP-like rule language is parsed ([`dsl`]), grounded over
//! finite domains ([`ground`]) and compiled into circuits of stateful
//! channels, stateless AND/OR/XOR gates and non-deterministic generators
//! ([`circuit`]). Circuits are then read three ways:
//!
//! * digitally, by fixpoint propagation and model enumeration ([`digital`]);
//! * probabilistically, by weighted enumeration of independent rule
//!   switches, plus the conditional-probability forms of the four
//!   dependency patterns ([`prob`]);
//! * as concept vectors, through merge, contrast, fusion and detachment
//!   ([`vectors`]).
//!
//! [`classify`] labels each rule with its dependency form and inferential
//! mechanism, and [`learn`] proposes new rules from co-activation data.

pub mod circuit;
pub mod classify;
pub mod cli;
pub mod digital;
pub mod dsl;
pub mod error;
pub mod ground;
pub mod learn;
pub mod prob;
pub mod scorer;
pub mod vectors;

pub use error::{Error, ParseError, Result};
