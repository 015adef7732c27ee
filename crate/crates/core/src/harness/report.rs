//! CSV and text outputs for a finished experiment.
//!
//! `results.csv` is covered by the determinism contract: identical config
//! and seed must reproduce it byte for byte. Wall-clock numbers therefore
//! live in a separate `timings.csv`.

use crate::error::Result;
use crate::harness::game::RunReport;
use std::io::Write;
use std::path::Path;

pub const RESULTS_HEADER: &str = "trial,snapshot,n_vertices,n_edges,n_sybils,n_victims,\
n_candidates,n_mappings_selected,success_prob,success_prob_refined,edge_edit_pct,\
lcc_var,degree_kl";

pub fn write_results_csv<W: Write>(mut w: W, report: &RunReport) -> Result<()> {
    writeln!(w, "{}", RESULTS_HEADER)?;
    for t in &report.trials {
        for r in t.rows() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                t.trial,
                r.snapshot,
                r.n_vertices,
                r.n_edges,
                r.n_sybils,
                r.n_victims,
                r.n_candidates,
                r.n_mappings_selected,
                r.success_prob,
                r.success_prob_refined,
                r.edge_edit_pct,
                r.lcc_var,
                r.degree_kl
            )?;
        }
    }
    Ok(())
}

pub fn write_timings_csv<W: Write>(mut w: W, report: &RunReport) -> Result<()> {
    writeln!(w, "trial,snapshot,retrieval_secs,matching_secs")?;
    for t in &report.trials {
        for r in t.rows() {
            writeln!(w, "{},{},{},{}", t.trial, r.snapshot, r.retrieval_secs, r.matching_secs)?;
        }
    }
    Ok(())
}

/// Writes `results.csv`, `timings.csv` and `config.resolved.txt` into `dir`,
/// plus `failures.txt` when any trial failed. Creates the directory.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_results_csv(std::fs::File::create(dir.join("results.csv"))?, report)?;
    write_timings_csv(std::fs::File::create(dir.join("timings.csv"))?, report)?;
    std::fs::write(dir.join("config.resolved.txt"), report.config.resolved_text())?;
    let failures = report.failures();
    if !failures.is_empty() {
        let mut f = std::fs::File::create(dir.join("failures.txt"))?;
        for (trial, msg) in failures {
            writeln!(f, "trial {}: {}", trial, msg)?;
        }
    }
    Ok(())
}
