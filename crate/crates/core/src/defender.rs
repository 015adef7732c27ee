//! Data-owner side of the game: pseudonymisation and cumulative edge noise.
//!
//! Pseudonyms are sticky. A real vertex keeps the pseudonym it got in its
//! first release forever, so consecutive releases stay linkable by design
//! and the noise ledger can be replayed across releases.
//!
//! Noise is cumulative: each release first replays every surviving past
//! flip on the freshly pseudonymised graph, then applies a batch of new
//! uniform random flips sized relative to the replayed graph.

use crate::consistency::Release;
use crate::error::{Result, SimError};
use crate::graph::{edge_key, Graph, IdSpace, IsomorphismMap, VertexId};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};

/// Persistent real -> pseudonym assignment across all releases.
#[derive(Clone, Debug, Default)]
pub struct PseudonymLedger {
    map: IsomorphismMap,
    next: u32,
}

impl PseudonymLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// The full mapping accumulated so far (all vertices ever released).
    pub fn mapping(&self) -> &IsomorphismMap {
        &self.map
    }

    pub fn pseudonym_of(&self, v: VertexId) -> Option<VertexId> {
        self.map.image_opt(v)
    }
}

/// Relabels the owner's graph for release. New vertices draw fresh
/// pseudonyms in random order (so pseudonym numbers carry no join-order
/// signal); previously seen vertices keep their pseudonym. Returns the
/// released-side graph and the mapping restricted to this release.
pub fn pseudonymize(
    g_plus: &Graph,
    ledger: &mut PseudonymLedger,
    rng: &mut impl Rng,
) -> Result<(Graph, IsomorphismMap)> {
    if g_plus.space() != IdSpace::Real {
        return Err(SimError::SpaceMismatch { expected: "real", got: g_plus.space().name() });
    }
    let mut fresh: Vec<VertexId> =
        g_plus.vertices().filter(|&v| ledger.map.image_opt(v).is_none()).collect();
    fresh.shuffle(rng);
    for v in fresh {
        ledger.map.insert(v, VertexId::pseudo(ledger.next))?;
        ledger.next += 1;
    }
    let release_map = ledger.map.restricted_to(&g_plus.vertices().collect());
    let released = g_plus.apply_isomorphism(&release_map)?;
    Ok((released, release_map))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FlipKind {
    Add,
    Remove,
}

/// One recorded edge flip, endpoints canonical, in pseudonym space.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct NoiseFlip {
    pub a: VertexId,
    pub b: VertexId,
    pub kind: FlipKind,
    pub release: Release,
}

/// Ordered history of all noise ever applied.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NoiseLedger {
    flips: Vec<NoiseFlip>,
}

impl NoiseLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    pub fn flips(&self) -> &[NoiseFlip] {
        &self.flips
    }

    pub fn serialize<W: Write>(&self, mut w: W) -> Result<()> {
        for f in &self.flips {
            let tag = match f.kind {
                FlipKind::Add => "ADD",
                FlipKind::Remove => "DEL",
            };
            writeln!(w, "{} {} {} @{}", tag, f.a.index(), f.b.index(), f.release)?;
        }
        Ok(())
    }

    pub fn deserialize<R: Read>(r: R) -> Result<Self> {
        let mut flips = Vec::new();
        for (lineno, line) in BufReader::new(r).lines().enumerate() {
            let lineno = lineno + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| SimError::Parse { line: lineno, msg: msg.into() };
            if toks.len() != 4 {
                return Err(bad("expected 'ADD|DEL a b @release'"));
            }
            let kind = match toks[0] {
                "ADD" => FlipKind::Add,
                "DEL" => FlipKind::Remove,
                _ => return Err(bad("flip kind must be ADD or DEL")),
            };
            let a: u32 = toks[1].parse().map_err(|_| bad("bad endpoint"))?;
            let b: u32 = toks[2].parse().map_err(|_| bad("bad endpoint"))?;
            let release: Release = toks[3]
                .strip_prefix('@')
                .ok_or_else(|| bad("release must be prefixed with @"))?
                .parse()
                .map_err(|_| bad("bad release"))?;
            let (a, b) = edge_key(VertexId::pseudo(a), VertexId::pseudo(b));
            flips.push(NoiseFlip { a, b, kind, release });
        }
        Ok(NoiseLedger { flips })
    }
}

/// Replays the ledger on a pseudonymised graph and adds
/// `round(omega * |E|)` fresh flips, recording them in the ledger.
///
/// Replay semantics: flips whose endpoints no longer exist are purged for
/// good; an add-flip re-ensures presence; a remove-flip re-ensures absence
/// and stays a recorded no-op even when the edge already vanished on its
/// own. Fresh flips pick unordered vertex pairs uniformly, never flipping
/// the same pair twice within one release.
pub fn add_cumulative_noise(
    g_pseudo: &Graph,
    ledger: &mut NoiseLedger,
    omega: f64,
    release: Release,
    rng: &mut impl Rng,
) -> Result<Graph> {
    if g_pseudo.space() != IdSpace::Pseudo {
        return Err(SimError::SpaceMismatch { expected: "pseudo", got: g_pseudo.space().name() });
    }
    if !(0.0..=1.0).contains(&omega) {
        return Err(SimError::Config(format!("noise ratio {} outside [0, 1]", omega)));
    }

    let mut g = g_pseudo.clone();
    ledger.flips.retain(|f| g.contains(f.a) && g.contains(f.b));
    for f in &ledger.flips {
        match f.kind {
            FlipKind::Add => {
                g.insert_edge(f.a, f.b)?;
            }
            FlipKind::Remove => {
                g.remove_edge(f.a, f.b);
            }
        }
    }

    // round half-up
    let m = (omega * g.edge_count() as f64 + 0.5).floor() as usize;
    if m == 0 {
        return Ok(g);
    }
    let vertices: Vec<VertexId> = g.vertices().collect();
    let n = vertices.len();
    if n < 2 {
        return Err(SimError::Precondition("cannot flip edges with fewer than 2 vertices".into()));
    }
    let max_pairs = n * (n - 1) / 2;
    if m > max_pairs {
        return Err(SimError::Capacity(format!(
            "{} flips requested but only {} distinct pairs exist",
            m, max_pairs
        )));
    }
    let mut touched: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    while touched.len() < m {
        let a = vertices[rng.gen_range(0..n)];
        let b = vertices[rng.gen_range(0..n)];
        if a == b {
            continue;
        }
        let (a, b) = edge_key(a, b);
        if !touched.insert((a, b)) {
            continue;
        }
        let kind = if g.has_edge(a, b) {
            g.remove_edge(a, b);
            FlipKind::Remove
        } else {
            g.insert_edge(a, b)?;
            FlipKind::Add
        };
        ledger.flips.push(NoiseFlip { a, b, kind, release });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn r(i: u32) -> VertexId {
        VertexId::real(i)
    }

    fn line_graph(n: u32) -> Graph {
        let mut g = Graph::new(IdSpace::Real);
        for i in 0..n.saturating_sub(1) {
            g.insert_edge(r(i), r(i + 1)).unwrap();
        }
        g
    }

    #[test]
    fn pseudonyms_are_sticky() {
        let mut ledger = PseudonymLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let g1 = line_graph(4);
        let (_, m1) = pseudonymize(&g1, &mut ledger, &mut rng).unwrap();
        let mut g2 = line_graph(4);
        g2.insert_edge(r(3), r(4)).unwrap();
        let (_, m2) = pseudonymize(&g2, &mut ledger, &mut rng).unwrap();
        for v in g1.vertices() {
            assert_eq!(m1.image(v).unwrap(), m2.image(v).unwrap());
        }
        assert!(m2.image(r(4)).is_ok());
    }

    #[test]
    fn release_map_covers_exactly_current_vertices() {
        let mut ledger = PseudonymLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (rel, map) = pseudonymize(&line_graph(5), &mut ledger, &mut rng).unwrap();
        assert_eq!(map.len(), 5);
        assert_eq!(rel.vertex_count(), 5);
        assert_eq!(rel.edge_count(), 4);
        assert_eq!(rel.space(), IdSpace::Pseudo);
        assert_eq!(rel.degree_sequence(), vec![1, 1, 2, 2, 2]);
    }

    fn released(n: u32) -> Graph {
        let mut ledger = PseudonymLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        pseudonymize(&line_graph(n), &mut ledger, &mut rng).unwrap().0
    }

    #[test]
    fn zero_noise_is_identity() {
        let g = released(6);
        let mut ledger = NoiseLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let out = add_cumulative_noise(&g, &mut ledger, 0.0, 1, &mut rng).unwrap();
        assert_eq!(out, g);
        assert!(ledger.is_empty());
    }

    #[test]
    fn flip_count_rounds_half_up() {
        // 10 edges, omega 0.05: round(0.5) = 1 flip
        let g = released(11);
        assert_eq!(g.edge_count(), 10);
        let mut ledger = NoiseLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let out = add_cumulative_noise(&g, &mut ledger, 0.05, 1, &mut rng).unwrap();
        assert_eq!(ledger.len(), 1);
        let f = ledger.flips()[0];
        match f.kind {
            FlipKind::Add => {
                assert_eq!(out.edge_count(), 11);
                assert!(!g.has_edge(f.a, f.b) && out.has_edge(f.a, f.b));
            }
            FlipKind::Remove => {
                assert_eq!(out.edge_count(), 9);
                assert!(g.has_edge(f.a, f.b) && !out.has_edge(f.a, f.b));
            }
        }
    }

    #[test]
    fn fresh_flip_count_is_exact() {
        let g = released(101);
        let mut ledger = NoiseLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        add_cumulative_noise(&g, &mut ledger, 0.025, 1, &mut rng).unwrap();
        // round(0.025 * 100) = 3 after half-up rounding of 2.5
        assert_eq!(ledger.len(), 3);
        let pairs: BTreeSet<_> = ledger.flips().iter().map(|f| (f.a, f.b)).collect();
        assert_eq!(pairs.len(), 3, "no pair flipped twice in one release");
    }

    #[test]
    fn replay_restores_past_flips() {
        let g = released(8);
        let mut ledger = NoiseLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let noisy1 = add_cumulative_noise(&g, &mut ledger, 0.3, 1, &mut rng).unwrap();
        let after = ledger.clone();
        // replay only: same ledger, omega 0, fresh pseudonymised graph
        let noisy2 = add_cumulative_noise(&g, &mut ledger, 0.0, 2, &mut rng).unwrap();
        assert_eq!(noisy1, noisy2);
        assert_eq!(ledger, after, "replay alone never grows the ledger");
    }

    #[test]
    fn stale_remove_flip_is_a_retained_noop() {
        let mut g = released(5);
        let mut ledger = NoiseLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        // force a remove flip by noising until one appears
        let mut out;
        loop {
            out = add_cumulative_noise(&g, &mut ledger, 0.25, 1, &mut rng).unwrap();
            if ledger.flips().iter().any(|f| f.kind == FlipKind::Remove) {
                break;
            }
        }
        let _ = out;
        let f = *ledger.flips().iter().find(|f| f.kind == FlipKind::Remove).unwrap();
        // the underlying edge disappears organically from the source graph
        g.remove_edge(f.a, f.b);
        let n_before = ledger.len();
        let replayed = add_cumulative_noise(&g, &mut ledger, 0.0, 2, &mut rng).unwrap();
        assert!(!replayed.has_edge(f.a, f.b));
        assert_eq!(ledger.len(), n_before, "stale flip stays recorded");
    }

    #[test]
    fn flips_on_vanished_vertices_are_purged() {
        let g = released(6);
        let mut ledger = NoiseLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        add_cumulative_noise(&g, &mut ledger, 0.4, 1, &mut rng).unwrap();
        assert!(!ledger.is_empty());
        let victim = ledger.flips()[0].a;
        let mut g2 = g.clone();
        g2.remove_vertex(victim).unwrap();
        add_cumulative_noise(&g2, &mut ledger, 0.0, 2, &mut rng).unwrap();
        assert!(ledger.flips().iter().all(|f| f.a != victim && f.b != victim));
    }

    #[test]
    fn ledger_serialization_round_trips() {
        let g = released(10);
        let mut ledger = NoiseLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        add_cumulative_noise(&g, &mut ledger, 0.3, 1, &mut rng).unwrap();
        add_cumulative_noise(&g, &mut ledger, 0.3, 2, &mut rng).unwrap();
        let mut buf = Vec::new();
        ledger.serialize(&mut buf).unwrap();
        let back = NoiseLedger::deserialize(buf.as_slice()).unwrap();
        assert_eq!(ledger, back);
    }

    #[test]
    fn noise_ratio_validated() {
        let g = released(5);
        let mut ledger = NoiseLedger::new();
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        assert!(add_cumulative_noise(&g, &mut ledger, -0.1, 1, &mut rng).is_err());
        assert!(add_cumulative_noise(&g, &mut ledger, 1.5, 1, &mut rng).is_err());
    }
}
