//! Polysemy-aware controlled natural language toolkit.
//!
//! Merges monosemous micro-ontologies into a sense inventory, disambiguates
//! factual narrative texts against it, compiles the result into
//! delete/insert updates through procedural verb templates, executes them
//! into a trace of knowledge-base snapshots and answers temporal queries
//! over that trace.

pub mod dl;
pub mod rdf;
pub mod reasoner;
pub mod templates;
pub mod parser;
pub mod merge;
pub mod wsd;
pub mod exec;
pub mod query;
pub mod pipeline;
