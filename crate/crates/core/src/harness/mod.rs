//! Experiment orchestration: configuration, seed fan-out, the per-trial
//! game loop, and result files.

pub mod config;
pub mod game;
pub mod report;
pub mod seeds;
