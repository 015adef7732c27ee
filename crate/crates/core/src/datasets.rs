//! Bundled deterministic sample dataset.
//!
//! A stand-in for a small pet-community friendship network: 1898 members
//! joining over nine years, 16750 friendships formed by preferential
//! attachment at join time. The generator is seeded with a fixed constant,
//! so every build produces byte-identical output. Useful for exercising the
//! ingest pipeline and the dataset-driven game without shipping third-party
//! data.

use crate::error::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::io::Write;
use std::path::Path;

pub const SAMPLE_COMMUNITY_VERTICES: usize = 1898;
pub const SAMPLE_COMMUNITY_EDGES: usize = 16750;
/// First join date, 2004-01-01 UTC.
pub const SAMPLE_COMMUNITY_START: i64 = 1_072_915_200;
/// Half a Julian year in seconds; eighteen of these cover the full span.
pub const SEMIANNUAL_STEP: i64 = 15_778_800;
/// Last join date, exactly eighteen semiannual steps after the first.
pub const SAMPLE_COMMUNITY_END: i64 = SAMPLE_COMMUNITY_START + 18 * SEMIANNUAL_STEP;

const SAMPLE_SEED: u64 = 0x5eed_da7a_5e7_0001;

/// The sample dataset as konect-format text (`u v weight timestamp`).
pub fn sample_community_text() -> String {
    let n = SAMPLE_COMMUNITY_VERTICES as u64;
    let span = SAMPLE_COMMUNITY_END - SAMPLE_COMMUNITY_START;
    let join = |v: u64| SAMPLE_COMMUNITY_START + span * (v - 1) as i64 / (n - 1) as i64;

    // per-vertex edge budgets summing to the exact total
    let mut budget = vec![0usize; n as usize + 1];
    let mut total = 0usize;
    for v in 2..=n {
        budget[v as usize] = ((v - 1) as usize).min(8);
        total += budget[v as usize];
    }
    let mut v = 10u64;
    while total < SAMPLE_COMMUNITY_EDGES {
        budget[v as usize] += 1;
        total += 1;
        v += 1;
    }
    assert_eq!(total, SAMPLE_COMMUNITY_EDGES);

    // preferential attachment over join order: targets drawn from the
    // endpoint-repetition list, duplicates retried then resolved by scan
    let mut rng = ChaCha20Rng::seed_from_u64(SAMPLE_SEED);
    let mut ends: Vec<u32> = Vec::with_capacity(2 * SAMPLE_COMMUNITY_EDGES);
    let mut out = String::with_capacity(24 * SAMPLE_COMMUNITY_EDGES);
    out.push_str("% sample pet-community friendship network\n");
    out.push_str("% undirected, weight 1, timestamp = later member's join date\n");
    for v in 2..=n {
        let t = join(v);
        let mut picked: Vec<u64> = Vec::with_capacity(budget[v as usize]);
        for _ in 0..budget[v as usize] {
            let mut choice = None;
            for _ in 0..32 {
                let cand = if ends.is_empty() {
                    1
                } else {
                    ends[rng.gen_range(0..ends.len())] as u64
                };
                if !picked.contains(&cand) {
                    choice = Some(cand);
                    break;
                }
            }
            let target = choice.unwrap_or_else(|| {
                (1..v).find(|c| !picked.contains(c)).expect("budget exceeds predecessors")
            });
            picked.push(target);
        }
        for &target in &picked {
            out.push_str(&format!("{} {} 1 {}\n", target, v, t));
            ends.push(target as u32);
            ends.push(v as u32);
        }
    }
    out
}

/// Writes the sample dataset to `path` in konect format.
pub fn write_sample_community(path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(sample_community_text().as_bytes())?;
    Ok(())
}

/// The eighteen semiannual cut timestamps covering the sample's full span.
pub fn semiannual_cuts() -> Vec<i64> {
    (1..=18).map(|k| SAMPLE_COMMUNITY_START + k * SEMIANNUAL_STEP).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_edge_list, take_snapshots, EdgeListFormat};

    #[test]
    fn sample_has_exact_counts_and_span() {
        let tel = load_edge_list(sample_community_text().as_bytes(), EdgeListFormat::Konect)
            .unwrap();
        assert_eq!(tel.external_ids().len(), SAMPLE_COMMUNITY_VERTICES);
        assert_eq!(tel.records.len(), SAMPLE_COMMUNITY_EDGES);
        assert_eq!(tel.self_loops_rejected, 0);
        let (lo, hi) = tel.time_span().unwrap();
        assert!(lo >= SAMPLE_COMMUNITY_START && hi <= SAMPLE_COMMUNITY_END);
        let cuts = semiannual_cuts();
        assert!(*cuts.last().unwrap() >= hi);
    }

    #[test]
    fn sample_is_deterministic() {
        assert_eq!(sample_community_text(), sample_community_text());
    }

    #[test]
    fn semiannual_snapshots_are_monotone_and_nonempty() {
        let tel = load_edge_list(sample_community_text().as_bytes(), EdgeListFormat::Konect)
            .unwrap();
        let dg = take_snapshots(&tel, &semiannual_cuts(), false).unwrap();
        assert_eq!(dg.snapshots.len(), 18);
        for w in dg.snapshots.windows(2) {
            for v in w[0].vertices() {
                assert!(w[1].contains(v));
            }
            for (a, b) in w[0].edges() {
                assert!(w[1].has_edge(a, b));
            }
        }
        let last = dg.snapshots.last().unwrap();
        assert_eq!(last.vertex_count(), SAMPLE_COMMUNITY_VERTICES);
        assert_eq!(last.edge_count(), SAMPLE_COMMUNITY_EDGES);
    }
}
