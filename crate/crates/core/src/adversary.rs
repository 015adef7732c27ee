//! Active adversary: sybil accounts, victim targeting, fingerprints.
//!
//! The adversary owns a set of sybil vertices arranged along a creation
//! order. Consecutive sybils always share an edge (a path), non-consecutive
//! ones are wired with probability 0.5. Each victim's fingerprint is the
//! subset of sybils it is connected to; fingerprints stay unique and
//! non-empty so a victim can be recognised from the sybils' neighbourhoods
//! after release.
//!
//! The adversary only ever touches edges with at least one sybil endpoint.
//! Legitimate edges belong to the data owner and are never edited here.

use crate::consistency::{Release, TemporalIndex};
use crate::error::{Result, SimError};
use crate::graph::{edge_key, Graph, VertexId};
use crate::reident::AttackAttempt;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Sybil ids start here so they never collide with legitimate users.
const SYBIL_BASE: u32 = 1 << 30;

/// Number of resampling attempts before fingerprint assignment gives up.
/// Bounds worst-case time when the pattern space is nearly exhausted.
const FINGERPRINT_ATTEMPTS: usize = 64;

/// Edits the adversary applied to the owner's graph in one step.
#[derive(Clone, Debug, Default)]
pub struct GraphDelta {
    pub added_vertices: Vec<VertexId>,
    pub removed_vertices: Vec<VertexId>,
    pub added_edges: Vec<(VertexId, VertexId)>,
    pub removed_edges: Vec<(VertexId, VertexId)>,
}

impl GraphDelta {
    pub fn is_empty(&self) -> bool {
        self.added_vertices.is_empty()
            && self.removed_vertices.is_empty()
            && self.added_edges.is_empty()
            && self.removed_edges.is_empty()
    }
}

/// Maximum sybil count the adversary allows itself against a graph of
/// `n_vertices` users: floor(log2 n).
pub fn sybil_budget(n_vertices: usize) -> usize {
    if n_vertices < 2 { 0 } else { usize::BITS as usize - 1 - n_vertices.leading_zeros() as usize }
}

#[derive(Clone, Debug, Default)]
pub struct AdversaryState {
    /// Sybils in creation order; consecutive entries are path-linked.
    order: Vec<VertexId>,
    sybils: BTreeSet<VertexId>,
    /// Adversary-controlled edges, canonical, each touching >= 1 sybil.
    overlay: BTreeSet<(VertexId, VertexId)>,
    /// victim -> set of adjacent sybils; mirrors overlay exactly.
    fingerprints: BTreeMap<VertexId, BTreeSet<VertexId>>,
    /// Victims in targeting order.
    victim_order: Vec<VertexId>,
    next_sybil: u32,
    /// Temporal knowledge the adversary accumulates.
    pub index: TemporalIndex,
    /// Past re-identification attempts, keyed by release.
    pub history: BTreeMap<Release, AttackAttempt>,
}

impl AdversaryState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sybil_order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn sybils(&self) -> &BTreeSet<VertexId> {
        &self.sybils
    }

    pub fn victims(&self) -> &[VertexId] {
        &self.victim_order
    }

    pub fn fingerprints(&self) -> &BTreeMap<VertexId, BTreeSet<VertexId>> {
        &self.fingerprints
    }

    pub fn is_sybil(&self, v: VertexId) -> bool {
        self.sybils.contains(&v)
    }

    /// Owner graph as the adversary intends it: legitimate snapshot plus all
    /// sybil vertices and adversary edges.
    pub fn compose(&self, legit: &Graph) -> Result<Graph> {
        let mut g = legit.clone();
        for &s in &self.sybils {
            g.insert_vertex(s)?;
        }
        for &(a, b) in &self.overlay {
            if g.contains(a) && g.contains(b) {
                g.insert_edge(a, b)?;
            } else {
                log::debug!("overlay edge ({}, {}) skipped, endpoint absent", a, b);
            }
        }
        Ok(g)
    }

    fn add_overlay_edge(&mut self, a: VertexId, b: VertexId, delta: &mut GraphDelta) {
        let key = edge_key(a, b);
        if self.overlay.insert(key) {
            delta.added_edges.push(key);
        }
    }

    fn remove_overlay_edge(&mut self, a: VertexId, b: VertexId, delta: &mut GraphDelta) {
        let key = edge_key(a, b);
        if self.overlay.remove(&key) {
            delta.removed_edges.push(key);
        }
    }

    /// Appends one sybil: path edge to the current last sybil, probability
    /// 0.5 edges to every earlier one, probability 0.5 fingerprint bits for
    /// every existing victim.
    fn append_sybil(
        &mut self,
        release: Release,
        rng: &mut impl Rng,
        delta: &mut GraphDelta,
    ) -> VertexId {
        let s = VertexId::real(SYBIL_BASE + self.next_sybil);
        self.next_sybil += 1;
        if let Some(&last) = self.order.last() {
            self.add_overlay_edge(last, s, delta);
        }
        if self.order.len() >= 2 {
            for &t in &self.order[..self.order.len() - 1].to_vec() {
                if rng.gen_bool(0.5) {
                    self.add_overlay_edge(t, s, delta);
                }
            }
        }
        self.order.push(s);
        self.sybils.insert(s);
        self.index.record_sybil_created(s, release);
        delta.added_vertices.push(s);
        for y in self.victim_order.clone() {
            if rng.gen_bool(0.5) {
                self.add_overlay_edge(s, y, delta);
                self.fingerprints.get_mut(&y).unwrap().insert(s);
            }
        }
        s
    }

    /// Replaces the sybil at position `j`: a fresh sybil takes its place in
    /// the order, bridges to both path neighbours, gets probability 0.5
    /// edges to the remaining sybils and inherits every victim edge of the
    /// vertex it replaces. The old sybil vanishes with all its edges.
    pub(crate) fn replace_sybil_at(
        &mut self,
        j: usize,
        release: Release,
        rng: &mut impl Rng,
        delta: &mut GraphDelta,
    ) {
        let old = self.order[j];
        let inherited: Vec<VertexId> = self
            .victim_order
            .iter()
            .copied()
            .filter(|y| self.fingerprints[y].contains(&old))
            .collect();
        // drop the old sybil and everything incident to it
        let incident: Vec<(VertexId, VertexId)> = self
            .overlay
            .iter()
            .copied()
            .filter(|&(a, b)| a == old || b == old)
            .collect();
        for (a, b) in incident {
            self.remove_overlay_edge(a, b, delta);
        }
        for y in &inherited {
            self.fingerprints.get_mut(y).unwrap().remove(&old);
        }
        self.sybils.remove(&old);
        delta.removed_vertices.push(old);

        let s = VertexId::real(SYBIL_BASE + self.next_sybil);
        self.next_sybil += 1;
        self.order[j] = s;
        self.sybils.insert(s);
        self.index.record_sybil_created(s, release);
        delta.added_vertices.push(s);
        if j > 0 {
            self.add_overlay_edge(self.order[j - 1], s, delta);
        }
        if j + 1 < self.order.len() {
            self.add_overlay_edge(s, self.order[j + 1], delta);
        }
        for k in 0..self.order.len() {
            if k != j && k.abs_diff(j) != 1 && rng.gen_bool(0.5) {
                self.add_overlay_edge(self.order[k], s, delta);
            }
        }
        for y in inherited {
            self.add_overlay_edge(s, y, delta);
            self.fingerprints.get_mut(&y).unwrap().insert(s);
        }
    }

    /// Rewrites victim `y`'s fingerprint to `pattern`, editing edges to match.
    fn set_fingerprint(
        &mut self,
        y: VertexId,
        pattern: BTreeSet<VertexId>,
        delta: &mut GraphDelta,
    ) {
        let current = self.fingerprints[&y].clone();
        for &s in current.difference(&pattern) {
            self.remove_overlay_edge(s, y, delta);
        }
        for &s in pattern.difference(&current) {
            self.add_overlay_edge(s, y, delta);
        }
        self.fingerprints.insert(y, pattern);
    }

    fn random_pattern(&self, rng: &mut impl Rng) -> BTreeSet<VertexId> {
        self.order.iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
    }

    fn pattern_taken(&self, pattern: &BTreeSet<VertexId>, exclude: Option<VertexId>) -> bool {
        self.fingerprints
            .iter()
            .any(|(&y, fp)| Some(y) != exclude && fp == pattern)
    }

    /// Resamples fingerprints until all are unique and non-empty. Needed
    /// after sybil additions extend everyone's pattern space.
    fn repair_fingerprints(&mut self, rng: &mut impl Rng, delta: &mut GraphDelta) -> Result<()> {
        for y in self.victim_order.clone() {
            let fp = &self.fingerprints[&y];
            let broken = fp.is_empty() || self.pattern_taken(fp, Some(y));
            if !broken {
                continue;
            }
            let mut fixed = false;
            for _ in 0..FINGERPRINT_ATTEMPTS {
                let pattern = self.random_pattern(rng);
                if !pattern.is_empty() && !self.pattern_taken(&pattern, Some(y)) {
                    self.set_fingerprint(y, pattern, delta);
                    fixed = true;
                    break;
                }
            }
            if !fixed {
                return Err(SimError::Capacity(format!(
                    "could not find a unique non-empty fingerprint for {} among {} sybils",
                    y,
                    self.order.len()
                )));
            }
        }
        Ok(())
    }

    /// Creation-window step. The first call plants a single scout sybil, the
    /// second call tops up to the full budget; the budget is floor(log2 of
    /// the current graph size). Keeping all but one sybil out of the first
    /// release means their first-presence marks land in the small second
    /// arrival cohort, which keeps later candidate retrieval narrow.
    pub fn create_sybil_subgraph(
        &mut self,
        g_plus: &Graph,
        release: Release,
        rng: &mut impl Rng,
    ) -> Result<GraphDelta> {
        let mut delta = GraphDelta::default();
        let budget = sybil_budget(g_plus.vertex_count());
        let goal = if self.order.is_empty() { 1 } else { budget };
        while self.order.len() < goal {
            self.append_sybil(release, rng, &mut delta);
        }
        self.repair_fingerprints(rng, &mut delta)?;
        Ok(delta)
    }

    /// Between-releases maintenance once the creation window is over: grow
    /// towards the budget implied by the last release, then replace a few
    /// existing sybils with fresh ones.
    ///
    /// Exactly max(1, |S|/4) sybils are replaced, oldest first. Regular
    /// turnover serves two purposes: a removed sybil takes the noise that
    /// had accumulated on its edges with it, and the replacement's
    /// first-presence mark moves into the newest arrival cohort, so the
    /// temporal filter keeps candidate pools small at every position.
    pub fn update_sybil_subgraph(
        &mut self,
        last_release_vertices: usize,
        release: Release,
        rng: &mut impl Rng,
    ) -> Result<GraphDelta> {
        if self.order.is_empty() {
            return Err(SimError::Precondition(
                "cannot update a sybil subgraph before creating one".into(),
            ));
        }
        let mut delta = GraphDelta::default();
        let budget = sybil_budget(last_release_vertices);
        while self.order.len() < budget {
            self.append_sybil(release, rng, &mut delta);
        }

        let n_replace = (self.order.len() / 4).max(1);
        let mut by_age: Vec<usize> = (0..self.order.len()).collect();
        by_age.sort_by_key(|&j| (self.index.alpha_plus(self.order[j]).unwrap_or(0), j));
        let mut chosen: Vec<usize> = by_age.into_iter().take(n_replace).collect();
        chosen.sort_unstable();
        for j in chosen {
            self.replace_sybil_at(j, release, rng, &mut delta);
        }
        self.repair_fingerprints(rng, &mut delta)?;
        Ok(delta)
    }

    /// Picks fresh victims among untargeted legitimate vertices and gives
    /// each a unique non-empty fingerprint. The requested count is drawn
    /// uniformly from `bounds` and clamped by the untargeted pool, by the
    /// remaining fingerprint capacity (2^|S| - 1 patterns) and, when a
    /// release already happened, by its vertex count.
    pub fn target_new_victims(
        &mut self,
        g_plus: &Graph,
        last_release_vertices: Option<usize>,
        bounds: (usize, usize),
        release: Release,
        rng: &mut impl Rng,
    ) -> Result<GraphDelta> {
        if self.order.is_empty() {
            return Err(SimError::Precondition("cannot target victims without sybils".into()));
        }
        if bounds.0 > bounds.1 {
            return Err(SimError::Config("victim bounds out of order".into()));
        }
        let mut delta = GraphDelta::default();
        let mut pool: Vec<VertexId> = g_plus
            .vertices()
            .filter(|&v| !self.sybils.contains(&v) && !self.fingerprints.contains_key(&v))
            .collect();
        let pattern_cap = (1usize << self.order.len().min(usize::BITS as usize - 1))
            .saturating_sub(1)
            .saturating_sub(self.victim_order.len());
        let release_cap = last_release_vertices
            .map(|n| n.saturating_sub(self.victim_order.len()))
            .unwrap_or(usize::MAX);
        let r = rng
            .gen_range(bounds.0..=bounds.1)
            .min(pool.len())
            .min(pattern_cap)
            .min(release_cap);
        let (chosen, _) = pool.partial_shuffle(rng, r);
        for &mut y in chosen {
            let mut assigned = false;
            for _ in 0..FINGERPRINT_ATTEMPTS {
                let pattern = self.random_pattern(rng);
                if !pattern.is_empty() && !self.pattern_taken(&pattern, None) {
                    self.fingerprints.insert(y, BTreeSet::new());
                    self.set_fingerprint(y, pattern, &mut delta);
                    self.victim_order.push(y);
                    self.index.record_targeted(y, release);
                    assigned = true;
                    break;
                }
            }
            if !assigned {
                return Err(SimError::Capacity(format!(
                    "no unique fingerprint found for new victim {} after {} attempts",
                    y, FINGERPRINT_ATTEMPTS
                )));
            }
        }
        Ok(delta)
    }

    /// Ranks the previous attempt's victims by how uncertain their mapping
    /// was: for each victim the mapping distribution over pseudonyms gets an
    /// entropy score, and all victims tied at the maximum are returned.
    pub fn select_uncertain_victims(&self) -> Result<Vec<VertexId>> {
        let (_, attempt) = self.history.iter().next_back().ok_or_else(|| {
            SimError::Precondition("no past re-identification attempt recorded".into())
        })?;
        let n_candidates = attempt.candidates.len();
        let mut scored: Vec<(VertexId, f64)> = Vec::with_capacity(attempt.victims.len());
        for &y in &attempt.victims {
            let mut weight: BTreeMap<VertexId, f64> = BTreeMap::new();
            if n_candidates > 0 {
                for maps in &attempt.mappings {
                    if maps.is_empty() {
                        continue;
                    }
                    let share = 1.0 / (maps.len() as f64 * n_candidates as f64);
                    for m in maps {
                        if let Some(&x) = m.0.get(&y) {
                            *weight.entry(x).or_insert(0.0) += share;
                        }
                    }
                }
            }
            let entropy: f64 = weight
                .values()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.ln())
                .sum();
            scored.push((y, entropy));
        }
        let max = scored.iter().map(|&(_, h)| h).fold(f64::NEG_INFINITY, f64::max);
        Ok(scored.into_iter().filter(|&(_, h)| h == max).map(|(y, _)| y).collect())
    }

    /// Flips exactly one fingerprint bit per given victim, keeping every
    /// fingerprint unique and non-empty. A victim whose flips all collide is
    /// left unchanged.
    pub fn perturb_fingerprints(
        &mut self,
        targets: &[VertexId],
        rng: &mut impl Rng,
    ) -> Result<GraphDelta> {
        let mut delta = GraphDelta::default();
        for &y in targets {
            if !self.fingerprints.contains_key(&y) {
                return Err(SimError::Precondition(format!("{} is not a victim", y)));
            }
            let mut sybils = self.order.clone();
            sybils.shuffle(rng);
            let mut flipped = false;
            for s in sybils {
                let mut pattern = self.fingerprints[&y].clone();
                if !pattern.remove(&s) {
                    pattern.insert(s);
                }
                if !pattern.is_empty() && !self.pattern_taken(&pattern, Some(y)) {
                    self.set_fingerprint(y, pattern, &mut delta);
                    flipped = true;
                    break;
                }
            }
            if !flipped {
                log::debug!("no legal fingerprint flip for {}, left unchanged", y);
            }
        }
        Ok(delta)
    }
}
