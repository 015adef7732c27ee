//! Simulation of a periodical graph-publication game.
//!
//! A data owner repeatedly publishes pseudonymised, perturbed snapshots of a
//! growing social graph; an active adversary plants sybil accounts between
//! publications and tries to re-identify its victims in every release. The
//! crate provides the graph primitives, a preferential-attachment generator,
//! a temporal edge-list loader, the defender (pseudonyms plus cumulative
//! edge noise), the adversary and its re-identification attack, utility and
//! effectiveness metrics, and a deterministic multi-trial harness.

#![forbid(unsafe_code)]

pub mod adversary;
pub mod consistency;
pub mod datasets;
pub mod defender;
pub mod error;
pub mod graph;
pub mod harness;
pub mod ingest;
pub mod metrics;
pub mod reident;
pub mod synth;
