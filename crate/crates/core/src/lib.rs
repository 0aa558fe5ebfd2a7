//! Factored space models over finite sample spaces.
//!
//! A factored space is a finite sample space written as a product of finite
//! factors. This crate computes histories of variables (the minimal set of
//! factors a variable depends on under conditioning), structural independence
//! and structural time, exact conditional-independence checks under
//! factorizing distributions, and the construction of a factored space model
//! from a Bayesian network.
//!
//! Points are encoded in mixed radix with factor 0 as the fastest-varying
//! digit. Every table, bitset and file format in the workspace uses this order.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod bitset;
mod error;
mod weights;

pub mod bayes;
pub mod distribution;
pub mod history;
pub mod relations;
pub mod space;
pub mod subset;
pub mod variable;

pub use bayes::{Cpt, Dag, EquivalenceReport, FsmConstruction};
pub use distribution::{
    FactorizingDistribution, GeneralDistribution, IndependenceVerdict, Rational,
};
pub use error::{Error, Result};
pub use history::Conditioning;
pub use relations::{Axiom, AxiomReport};
pub use space::{Event, FactorId, FactoredSpace, FamilySet, PartialPoint, Point};
pub use subset::IndexSubset;
pub use variable::Variable;
