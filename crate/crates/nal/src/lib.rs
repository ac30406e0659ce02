//! Catalog, reports and command-line plumbing on top of `nal-core`.

pub mod catalog;
pub mod report;
pub mod reproduce;
