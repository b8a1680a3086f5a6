//! Finite relational structures chained by linear orders.
//!
//! A structure `Y` is chainable over a finite set `F` and a linear order on
//! the rest of the domain when every order-preserving partial map of that
//! order, extended by the identity on `F`, is a partial automorphism of `Y`.
//! This crate decides chainability, searches for kernels, counts ages,
//! extracts the quantifier-free definitions of `Y` over the companion order
//! with constants, and classifies the set of all chaining orders.

pub mod chainability;
pub mod corpus;
pub mod error;
pub mod gpw;
pub mod logic;
pub mod morphism;
pub mod random;
pub mod structure;
pub mod verify;

pub use chainability::{
    age_forms, age_subset, check_profile_bound, check_trace_isomorphism, find_chain_order,
    is_chainable_with, kernel, profile, ChainWitness, KernelReport, ProfileReport,
};
pub use error::{Error, Result};
pub use gpw::{
    classify_family, classify_orders, enumerate_chaining_orders, ChainOrderFamily,
    ClassifiedFamily, GpwCase, GpwClassification,
};
pub use morphism::{
    canonical_form, enumerate_partial_automorphisms, find_isomorphism, is_partial_automorphism,
    CanonicalForm, PartialMap,
};
pub use structure::{Companion, Signature, Structure, Symbol, Tuple};
