//! The publication game: per release the adversary edits their sybil
//! subgraph and victim set, the defender pseudonymizes and noises the graph,
//! and the adversary attacks the release and refines earlier attempts.

use crate::adversary::AdversaryState;
use crate::consistency::Release;
use crate::defender::{add_cumulative_noise, pseudonymize, NoiseLedger, PseudonymLedger};
use crate::error::{Result, SimError};
use crate::graph::{DynamicGraph, VertexId};
use crate::harness::config::{CutSpec, ExperimentConfig, SourceSpec};
use crate::harness::seeds::{role_rng, role_seed, trial_seed, Role};
use crate::ingest;
use crate::metrics::{self, UtilityReport};
use crate::reident::{execute_attack, refine_attempt, AttackParams, AttackTimings};
use crate::synth::{self, SynthConfig};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// One row of the per-snapshot results table. Emitted only for snapshots
/// that were attacked.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRow {
    pub snapshot: Release,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_sybils: usize,
    pub n_victims: usize,
    pub n_candidates: usize,
    /// Mapping count of the candidate the adversary committed to.
    pub n_mappings_selected: usize,
    pub success_prob: f64,
    pub success_prob_refined: f64,
    pub edge_edit_pct: f64,
    pub lcc_var: f64,
    pub degree_kl: f64,
    pub retrieval_secs: f64,
    pub matching_secs: f64,
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub trial: u32,
    /// Rows for the attacked snapshots, or the error that sank the trial.
    pub outcome: std::result::Result<Vec<SnapshotRow>, String>,
}

impl TrialResult {
    pub fn rows(&self) -> &[SnapshotRow] {
        match &self.outcome {
            Ok(rows) => rows,
            Err(_) => &[],
        }
    }
}

/// Mean and sample variance of one metric over trials.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub var: f64,
    pub n: usize,
}

impl Summary {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n < 2 {
            0.0
        } else {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        };
        Self { mean, var, n }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SnapshotAggregate {
    pub success: Summary,
    pub success_refined: Summary,
    pub edge_edit_pct: Summary,
    pub lcc_var: Summary,
    pub degree_kl: Summary,
    pub candidates: Summary,
    pub mappings_selected: Summary,
    pub retrieval_secs: Summary,
    pub matching_secs: Summary,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub aggregates: BTreeMap<Release, SnapshotAggregate>,
}

impl RunReport {
    pub fn successful_trials(&self) -> usize {
        self.trials.iter().filter(|t| t.outcome.is_ok()).count()
    }

    pub fn failures(&self) -> Vec<(u32, &str)> {
        self.trials
            .iter()
            .filter_map(|t| t.outcome.as_ref().err().map(|e| (t.trial, e.as_str())))
            .collect()
    }

    pub fn mean_success(&self, snapshot: Release) -> Option<f64> {
        self.aggregates.get(&snapshot).map(|a| a.success.mean)
    }

    pub fn mean_success_refined(&self, snapshot: Release) -> Option<f64> {
        self.aggregates.get(&snapshot).map(|a| a.success_refined.mean)
    }

    /// Mean of the per-snapshot refined success means, the single number
    /// used when comparing whole configurations.
    pub fn overall_success(&self) -> f64 {
        if self.aggregates.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.aggregates.values().map(|a| a.success_refined.mean).sum();
        sum / self.aggregates.len() as f64
    }
}

/// Per-trial input resolved once per experiment.
enum Prepared {
    Synthetic { n0: usize, me: usize, nv: usize, r_delta: f64, snapshots: usize },
    Loaded(DynamicGraph),
}

fn prepare_source(cfg: &ExperimentConfig) -> Result<Prepared> {
    match &cfg.source {
        SourceSpec::Synthetic { n0, me, nv, r_delta, snapshots } => Ok(Prepared::Synthetic {
            n0: *n0,
            me: *me,
            nv: *nv,
            r_delta: *r_delta,
            snapshots: *snapshots,
        }),
        SourceSpec::EdgeList { dataset, format, cuts, include_isolated } => {
            let tel = ingest::load_edge_list_path(dataset, *format)?;
            let cut_times = match cuts {
                CutSpec::Explicit(ts) => ts.clone(),
                CutSpec::Every { start, step } => {
                    let (lo, hi) = tel.time_span().ok_or_else(|| {
                        SimError::Config("dataset has no timestamps to cut".into())
                    })?;
                    ingest::periodic_cuts(start.unwrap_or(lo), hi, *step)?
                }
            };
            let dg = ingest::take_snapshots(&tel, &cut_times, *include_isolated)?;
            Ok(Prepared::Loaded(dg))
        }
    }
}

struct AttackedRelease {
    n_vertices: usize,
    n_edges: usize,
    utility: UtilityReport,
    timings: AttackTimings,
}

fn run_trial(cfg: &ExperimentConfig, prepared: &Prepared, trial: u32) -> Result<Vec<SnapshotRow>> {
    let ts = trial_seed(cfg.master_seed, trial as u64);
    let dynamic = match prepared {
        Prepared::Synthetic { n0, me, nv, r_delta, snapshots } => synth::generate(&SynthConfig {
            n0: *n0,
            me: *me,
            nv: *nv,
            r_delta: *r_delta,
            snapshots: *snapshots,
            seed: role_seed(ts, Role::Synth),
        })?,
        Prepared::Loaded(dg) => dg.clone(),
    };
    let mut rng_adv = role_rng(ts, Role::Adversary);
    let mut rng_def = role_rng(ts, Role::Defender);
    let mut rng_att = role_rng(ts, Role::Attack);

    let mut state = AdversaryState::new();
    let mut pledger = PseudonymLedger::new();
    let mut nledger = NoiseLedger::new();
    let mut last_released_n: Option<usize> = None;
    let mut attacked: BTreeMap<Release, AttackedRelease> = BTreeMap::new();

    for i in 1..=dynamic.len() as Release {
        let legit = dynamic.snapshot(i)?;

        // adversary, before the release goes out
        if i <= cfg.creation_end {
            let base = state.compose(legit)?;
            state.create_sybil_subgraph(&base, i, &mut rng_adv)?;
        } else {
            let cap_basis = last_released_n.unwrap_or_else(|| legit.vertex_count());
            state.update_sybil_subgraph(cap_basis, i, &mut rng_adv)?;
            if !state.history.is_empty() {
                let targets = state.select_uncertain_victims()?;
                state.perturb_fingerprints(&targets, &mut rng_adv)?;
            }
        }
        let composed = state.compose(legit)?;
        state.target_new_victims(&composed, last_released_n, cfg.victim_bounds, i, &mut rng_adv)?;
        let g_plus = state.compose(legit)?;

        // defender publishes
        let (bare, release_map) = pseudonymize(&g_plus, &mut pledger, &mut rng_def)?;
        let g_star = add_cumulative_noise(&bare, &mut nledger, cfg.noise_ratio, i, &mut rng_def)?;
        state.index.record_release(i, &g_star);
        last_released_n = Some(g_star.vertex_count());

        // adversary reacts to the release: refine old attempts, attack new
        if cfg.refine_depth > 0 {
            let sybils_now = state.sybils().clone();
            let lo = i.saturating_sub(cfg.refine_depth);
            let due: Vec<Release> = state.history.range(lo..i).map(|(&k, _)| k).collect();
            for j in due {
                let attempt = state.history.get_mut(&j).unwrap();
                refine_attempt(attempt, &g_star, &sybils_now, cfg.temporal)?;
            }
        }
        if i >= cfg.first_attack {
            let truth: BTreeMap<VertexId, VertexId> = state
                .victims()
                .iter()
                .map(|&y| Ok((y, release_map.image(y)?)))
                .collect::<Result<_>>()?;
            let params = AttackParams {
                theta: cfg.theta.resolve(i),
                eta: cfg.eta.resolve(state.sybil_order().len()),
                temporal: cfg.temporal,
            };
            let (attempt, timings) =
                execute_attack(&state, &g_star, &g_plus, i, &truth, &params, &mut rng_att)?;
            let utility = metrics::utility_report(&g_plus, &g_star, &release_map)?;
            attacked.insert(
                i,
                AttackedRelease {
                    n_vertices: g_star.vertex_count(),
                    n_edges: g_star.edge_count(),
                    utility,
                    timings,
                },
            );
            state.history.insert(i, attempt);
        }
    }

    let rows = attacked
        .into_iter()
        .map(|(i, info)| {
            let attempt = &state.history[&i];
            SnapshotRow {
                snapshot: i,
                n_vertices: info.n_vertices,
                n_edges: info.n_edges,
                n_sybils: attempt.sybil_order.len(),
                n_victims: attempt.victims.len(),
                n_candidates: attempt.candidates.len(),
                n_mappings_selected: attempt
                    .selected
                    .map(|ix| attempt.mappings[ix].len())
                    .unwrap_or(0),
                success_prob: attempt.success,
                success_prob_refined: attempt.effective_success(),
                edge_edit_pct: info.utility.edge_edit_pct,
                lcc_var: info.utility.lcc_variation,
                degree_kl: info.utility.degree_kl,
                retrieval_secs: info.timings.retrieval.as_secs_f64(),
                matching_secs: info.timings.matching.as_secs_f64(),
            }
        })
        .collect();
    Ok(rows)
}

fn aggregate_rows(trials: &[TrialResult]) -> BTreeMap<Release, SnapshotAggregate> {
    let mut by_snapshot: BTreeMap<Release, Vec<&SnapshotRow>> = BTreeMap::new();
    for t in trials {
        for row in t.rows() {
            by_snapshot.entry(row.snapshot).or_default().push(row);
        }
    }
    by_snapshot
        .into_iter()
        .map(|(snap, rows)| {
            let pull = |f: &dyn Fn(&SnapshotRow) -> f64| {
                Summary::from_values(&rows.iter().map(|&r| f(r)).collect::<Vec<_>>())
            };
            let agg = SnapshotAggregate {
                success: pull(&|r| r.success_prob),
                success_refined: pull(&|r| r.success_prob_refined),
                edge_edit_pct: pull(&|r| r.edge_edit_pct),
                lcc_var: pull(&|r| r.lcc_var),
                degree_kl: pull(&|r| r.degree_kl),
                candidates: pull(&|r| r.n_candidates as f64),
                mappings_selected: pull(&|r| r.n_mappings_selected as f64),
                retrieval_secs: pull(&|r| r.retrieval_secs),
                matching_secs: pull(&|r| r.matching_secs),
            };
            (snap, agg)
        })
        .collect()
}

/// Runs every trial of the experiment, in parallel, and aggregates. A trial
/// failure is recorded and logged but does not abort the others.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let prepared = prepare_source(cfg)?;
    let trials: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let outcome = run_trial(cfg, &prepared, t).map_err(|e| {
                let msg = e.to_string();
                log::error!("trial {} failed: {}", t, msg);
                msg
            });
            TrialResult { trial: t, outcome }
        })
        .collect();
    let aggregates = aggregate_rows(&trials);
    Ok(RunReport { config: cfg.clone(), trials, aggregates })
}

/// Pools several reports of the same configuration into one, as if their
/// trials had run in a single experiment.
pub fn aggregate(reports: &[RunReport]) -> Result<RunReport> {
    let first = reports
        .first()
        .ok_or_else(|| SimError::Precondition("nothing to aggregate".into()))?;
    let strip = |c: &ExperimentConfig| {
        let mut c = c.clone();
        c.out_dir = None;
        c
    };
    let reference = strip(&first.config);
    let mut trials = Vec::new();
    let mut offset = 0u32;
    for rep in reports {
        if strip(&rep.config) != reference {
            return Err(SimError::Precondition(
                "cannot aggregate reports with different configurations".into(),
            ));
        }
        for t in &rep.trials {
            trials.push(TrialResult { trial: offset + t.trial, outcome: t.outcome.clone() });
        }
        offset += rep.trials.len() as u32;
    }
    let aggregates = aggregate_rows(&trials);
    Ok(RunReport { config: first.config.clone(), trials, aggregates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{EtaSpec, ThetaSpec};

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            source: SourceSpec::Synthetic {
                n0: 5,
                me: 2,
                nv: 16,
                r_delta: 0.2,
                snapshots: 3,
            },
            trials: 2,
            master_seed: 11,
            noise_ratio: 0.0,
            theta: ThetaSpec::Const(6),
            eta: EtaSpec::Const(1),
            temporal: true,
            victim_bounds: (1, 2),
            first_attack: 2,
            creation_end: 2,
            refine_depth: 1,
            out_dir: None,
        }
    }

    #[test]
    fn experiment_emits_rows_for_attacked_snapshots_only() {
        let report = run_experiment(&tiny_config()).unwrap();
        assert_eq!(report.successful_trials(), 2);
        for t in &report.trials {
            let rows = t.rows();
            assert_eq!(rows.len(), 2);
            assert_eq!(rows[0].snapshot, 2);
            assert_eq!(rows[1].snapshot, 3);
            for row in rows {
                assert!(row.n_sybils >= 1);
                assert!(row.n_victims >= 1);
                assert!((0.0..=1.0).contains(&row.success_prob));
                assert!((0.0..=1.0).contains(&row.success_prob_refined));
            }
        }
        assert_eq!(report.aggregates.len(), 2);
    }

    #[test]
    fn reruns_reproduce_rows_exactly() {
        let a = run_experiment(&tiny_config()).unwrap();
        let b = run_experiment(&tiny_config()).unwrap();
        for (ta, tb) in a.trials.iter().zip(&b.trials) {
            assert_eq!(ta.rows().len(), tb.rows().len());
            for (ra, rb) in ta.rows().iter().zip(tb.rows()) {
                // timing fields are excluded from the determinism contract
                let mut ra = ra.clone();
                let mut rb = rb.clone();
                ra.retrieval_secs = 0.0;
                ra.matching_secs = 0.0;
                rb.retrieval_secs = 0.0;
                rb.matching_secs = 0.0;
                assert_eq!(ra, rb);
            }
        }
    }

    #[test]
    fn different_seeds_give_different_graphs() {
        let mut c2 = tiny_config();
        c2.master_seed = 12;
        let a = run_experiment(&tiny_config()).unwrap();
        let b = run_experiment(&c2).unwrap();
        let edges_a: Vec<usize> = a.trials[0].rows().iter().map(|r| r.n_edges).collect();
        let edges_b: Vec<usize> = b.trials[0].rows().iter().map(|r| r.n_edges).collect();
        assert_ne!(edges_a, edges_b);
    }

    #[test]
    fn aggregation_pools_trials() {
        let a = run_experiment(&tiny_config()).unwrap();
        let merged = aggregate(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(merged.trials.len(), 4);
        let snap = *merged.aggregates.keys().next().unwrap();
        // identical halves: same mean, padded count
        assert_eq!(
            merged.aggregates[&snap].success.mean,
            a.aggregates[&snap].success.mean
        );
        assert_eq!(merged.aggregates[&snap].success.n, 4);

        let mut other = a.clone();
        other.config.master_seed = 99;
        assert!(aggregate(&[a, other]).is_err());
    }

    #[test]
    fn summary_statistics_are_sample_based() {
        let s = Summary::from_values(&[0.4, 0.6]);
        assert!((s.mean - 0.5).abs() < 1e-12);
        assert!((s.var - 0.02).abs() < 1e-12);
        let z = Summary::from_values(&[0.7]);
        assert_eq!(z.var, 0.0);
        assert_eq!(Summary::from_values(&[]).n, 0);
    }
}
