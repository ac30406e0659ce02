//! Exact arithmetic and structure-constant machinery for small nonassociative algebras.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod field;
pub mod linalg;
pub mod tensor;
pub mod identities;
pub mod invariants;
pub mod isomorphism;
pub mod extension;
pub mod degeneration;
