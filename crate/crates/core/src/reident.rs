//! Re-identification attack: candidate retrieval, fingerprint matching,
//! success scoring and post-release refinement.
//!
//! Retrieval walks ordered tuples of released vertices that could be the
//! sybils, pruning every prefix by temporal consistency and by structural
//! dissimilarity against the adversary's own record of the sybil subgraph.
//! Matching then assigns victims to neighbours of each candidate tuple by
//! maximising fingerprint similarity.

use crate::adversary::AdversaryState;
use crate::consistency::{removal_count_consistent, Release, TemporalIndex};
use crate::error::{Result, SimError};
use crate::graph::{Graph, VertexId};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

/// Knobs shared by retrieval and matching.
#[derive(Clone, Copy, Debug)]
pub struct AttackParams {
    /// Structural dissimilarity tolerance for candidate prefixes.
    pub theta: u64,
    /// Minimum fingerprint similarity for a victim assignment to count.
    pub eta: usize,
    /// Apply the temporal consistency gates. When false the attack treats
    /// every released vertex as a possible sybil and every neighbour as a
    /// possible victim, as a static attacker would.
    pub temporal: bool,
}

/// One injective victim-to-pseudonym assignment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct VictimMapping(pub BTreeMap<VertexId, VertexId>);

/// Everything recorded about one attack on one release. The graph and the
/// adversary data are deep copies from attack time, so later refinement can
/// re-derive results against the state the attack actually saw.
#[derive(Clone, Debug)]
pub struct AttackAttempt {
    pub release: Release,
    pub g_star: Graph,
    pub sybil_order: Vec<VertexId>,
    pub sybils: BTreeSet<VertexId>,
    pub victims: Vec<VertexId>,
    pub fingerprints: BTreeMap<VertexId, BTreeSet<VertexId>>,
    /// True victim pseudonyms, used for scoring only. The attack logic
    /// itself never reads this.
    pub truth: BTreeMap<VertexId, VertexId>,
    pub candidates: Vec<Vec<VertexId>>,
    pub mappings: Vec<Vec<VictimMapping>>,
    /// Candidate the adversary committed to, if any.
    pub selected: Option<usize>,
    pub eta: usize,
    pub success: f64,
    pub refined: Option<RefinedAttempt>,
}

/// Attack result after pruning candidates against a newer release.
#[derive(Clone, Debug)]
pub struct RefinedAttempt {
    pub candidates: Vec<Vec<VertexId>>,
    pub mappings: Vec<Vec<VictimMapping>>,
    pub success: f64,
}

impl AttackAttempt {
    /// Refined success when a refinement happened, original otherwise.
    pub fn effective_success(&self) -> f64 {
        self.refined.as_ref().map(|r| r.success).unwrap_or(self.success)
    }
}

/// Wall-clock cost of one attack, split by phase.
#[derive(Clone, Copy, Debug, Default)]
pub struct AttackTimings {
    pub retrieval: Duration,
    pub matching: Duration,
}

/// Structural dissimilarity between an ordered sybil prefix in the
/// adversary's graph and an equally long candidate prefix in the released
/// graph: the number of internal edge disagreements over unordered position
/// pairs, plus the total gap between external degrees (degree minus internal
/// neighbours) position by position.
pub fn structural_dissimilarity(
    g_plus: &Graph,
    sybil_prefix: &[VertexId],
    g_star: &Graph,
    candidate_prefix: &[VertexId],
) -> Result<u64> {
    if sybil_prefix.len() != candidate_prefix.len() {
        return Err(SimError::Precondition("prefix lengths differ".into()));
    }
    let distinct: BTreeSet<_> = candidate_prefix.iter().collect();
    if distinct.len() != candidate_prefix.len() {
        return Err(SimError::Precondition("candidate prefix repeats a vertex".into()));
    }
    let l = sybil_prefix.len();
    let mut mismatches = 0u64;
    for a in 0..l {
        for b in a + 1..l {
            let in_plus = g_plus.has_edge(sybil_prefix[a], sybil_prefix[b]);
            let in_star = g_star.has_edge(candidate_prefix[a], candidate_prefix[b]);
            if in_plus != in_star {
                mismatches += 1;
            }
        }
    }
    let mut degree_gap = 0u64;
    for k in 0..l {
        let s = sybil_prefix[k];
        let x = candidate_prefix[k];
        let int_s = sybil_prefix.iter().filter(|&&t| t != s && g_plus.has_edge(s, t)).count();
        let int_x =
            candidate_prefix.iter().filter(|&&t| t != x && g_star.has_edge(x, t)).count();
        let ext_s = g_plus.degree(s)? - int_s;
        let ext_x = g_star.degree(x)? - int_x;
        degree_gap += ext_s.abs_diff(ext_x) as u64;
    }
    Ok(mismatches + degree_gap)
}

/// Dense-index view of the released graph, shared by retrieval internals.
struct DenseStar {
    verts: Vec<VertexId>,
    adj: Vec<Vec<u32>>,
    deg: Vec<u32>,
}

impl DenseStar {
    fn build(g_star: &Graph) -> Self {
        let verts: Vec<VertexId> = g_star.vertices().collect();
        let idx: BTreeMap<VertexId, u32> =
            verts.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let mut adj = Vec::with_capacity(verts.len());
        let mut deg = Vec::with_capacity(verts.len());
        for &v in &verts {
            // neighbour sets iterate in id order and the id-to-dense map is
            // monotone, so each list comes out sorted
            let row: Vec<u32> = g_star.neighbors(v).unwrap().iter().map(|u| idx[u]).collect();
            deg.push(row.len() as u32);
            adj.push(row);
        }
        Self { verts, adj, deg }
    }

    fn has(&self, a: u32, b: u32) -> bool {
        self.adj[a as usize].binary_search(&b).is_ok()
    }
}

struct RetrievalSearch<'a> {
    star: &'a DenseStar,
    theta: u64,
    m: usize,
    /// Sybil adjacency as bitmasks over positions.
    sybil_bits: Vec<u64>,
    /// sigma[l][k]: external degree of sybil k w.r.t. the first l positions.
    sigma: Vec<Vec<u32>>,
    /// Per level: eligible vertices ascending, and the same sorted by degree.
    pools: Vec<Pool>,
    chosen: Vec<u32>,
    int_cnt: Vec<u32>,
    used: Vec<bool>,
    d_mis: u64,
    visited: u64,
    out: Vec<Vec<VertexId>>,
}

#[derive(Clone, Default)]
struct Pool {
    by_id: Vec<u32>,
    by_degree: Vec<(u32, u32)>,
}

impl Pool {
    fn from_ids(ids: Vec<u32>, deg: &[u32]) -> Self {
        let mut by_degree: Vec<(u32, u32)> = ids.iter().map(|&v| (deg[v as usize], v)).collect();
        by_degree.sort_unstable();
        Self { by_id: ids, by_degree }
    }

    fn degree_range(&self, lo: u32, hi: u32) -> &[(u32, u32)] {
        let a = self.by_degree.partition_point(|&(d, _)| d < lo);
        let b = self.by_degree.partition_point(|&(d, _)| d <= hi);
        &self.by_degree[a..b]
    }
}

impl<'a> RetrievalSearch<'a> {
    /// Checks the prefix extended with `c` against the tolerance. On success
    /// returns the new internal mismatch count and the adjacency mask of `c`
    /// over the current prefix, for the incremental bookkeeping.
    fn try_extend(&self, c: u32) -> Option<(u64, u64)> {
        let l = self.chosen.len();
        let mut a_mask = 0u64;
        for (k, &p) in self.chosen.iter().enumerate() {
            if self.star.has(p, c) {
                a_mask |= 1 << k;
            }
        }
        let b_mask = self.sybil_bits[l] & ((1u64 << l) - 1);
        let d_new = self.d_mis + ((a_mask ^ b_mask).count_ones() as u64);
        let sigma_next = &self.sigma[l + 1];
        let mut total = d_new;
        for (k, &p) in self.chosen.iter().enumerate() {
            let int_k = self.int_cnt[k] + ((a_mask >> k) & 1) as u32;
            let ext = self.star.deg[p as usize] - int_k;
            total += ext.abs_diff(sigma_next[k]) as u64;
            if total > self.theta {
                return None;
            }
        }
        let int_c = a_mask.count_ones();
        let ext_c = self.star.deg[c as usize] - int_c;
        total += ext_c.abs_diff(sigma_next[l]) as u64;
        if total > self.theta {
            return None;
        }
        Some((d_new, a_mask))
    }

    fn descend(&mut self) {
        let l = self.chosen.len();
        if l == self.m {
            self.out
                .push(self.chosen.iter().map(|&c| self.star.verts[c as usize]).collect());
            return;
        }
        // a vertex not adjacent to anything chosen has dissimilarity
        // fixed + |degree - sigma|, so the fixed part gives a degree window
        // for non-neighbours; neighbours of the prefix get checked one by one
        let b_mask = self.sybil_bits[l] & ((1u64 << l) - 1);
        let sigma_next = &self.sigma[l + 1];
        let mut fixed = self.d_mis + b_mask.count_ones() as u64;
        for (k, &p) in self.chosen.iter().enumerate() {
            let ext = self.star.deg[p as usize] - self.int_cnt[k];
            fixed += ext.abs_diff(sigma_next[k]) as u64;
        }

        let pool = &self.pools[l];
        let mut frontier: Vec<u32> = Vec::new();
        let mut prefix_adjacent: BTreeSet<u32> = BTreeSet::new();
        for &p in &self.chosen {
            for &v in &self.star.adj[p as usize] {
                if !self.used[v as usize] && pool.by_id.binary_search(&v).is_ok() {
                    prefix_adjacent.insert(v);
                }
            }
        }
        frontier.extend(prefix_adjacent.iter().copied());
        if fixed <= self.theta {
            let budget = self.theta - fixed;
            let target = sigma_next[l];
            let lo = target.saturating_sub(budget.min(u32::MAX as u64) as u32);
            let hi = target.saturating_add(budget.min(u32::MAX as u64) as u32);
            for &(_, v) in pool.degree_range(lo, hi) {
                if !self.used[v as usize] && !prefix_adjacent.contains(&v) {
                    frontier.push(v);
                }
            }
        }
        frontier.sort_unstable();

        for c in frontier {
            self.visited += 1;
            let Some((d_new, a_mask)) = self.try_extend(c) else { continue };
            let saved_d = self.d_mis;
            self.d_mis = d_new;
            for k in 0..self.chosen.len() {
                self.int_cnt[k] += ((a_mask >> k) & 1) as u32;
            }
            self.chosen.push(c);
            self.int_cnt.push(a_mask.count_ones());
            self.used[c as usize] = true;
            self.descend();
            self.used[c as usize] = false;
            self.int_cnt.pop();
            self.chosen.pop();
            for k in 0..self.chosen.len() {
                self.int_cnt[k] -= ((a_mask >> k) & 1) as u32;
            }
            self.d_mis = saved_d;
        }
    }
}

/// All ordered tuples of released vertices whose every prefix stays within
/// the dissimilarity tolerance of the corresponding sybil prefix, and, in
/// temporal mode, whose members first appeared exactly when the matching
/// sybil was created. Tuples come out in lexicographic vertex order.
pub fn retrieve_sybil_candidates(
    g_star: &Graph,
    g_plus: &Graph,
    sybil_order: &[VertexId],
    index: &TemporalIndex,
    params: &AttackParams,
) -> Result<Vec<Vec<VertexId>>> {
    let m = sybil_order.len();
    if m == 0 {
        return Err(SimError::Precondition("no sybils to look for".into()));
    }
    if m > 63 {
        return Err(SimError::Capacity(format!("{} sybils exceed the supported 63", m)));
    }
    let star = DenseStar::build(g_star);
    let n = star.verts.len();
    if n < m {
        return Ok(Vec::new());
    }

    let mut sybil_bits = vec![0u64; m];
    let mut deg_plus = vec![0u32; m];
    for k in 0..m {
        deg_plus[k] = g_plus.degree(sybil_order[k])? as u32;
        for j in 0..m {
            if j != k && g_plus.has_edge(sybil_order[k], sybil_order[j]) {
                sybil_bits[k] |= 1 << j;
            }
        }
    }
    // sigma[l][k] for k < l: degree of sybil k minus its neighbours among
    // the first l sybils
    let mut sigma = vec![Vec::new(); m + 1];
    for l in 1..=m {
        let mask = (1u64 << l) - 1;
        sigma[l] = (0..l)
            .map(|k| deg_plus[k] - (sybil_bits[k] & mask).count_ones())
            .collect();
    }

    let pools: Vec<Pool> = if params.temporal {
        let mut buckets: BTreeMap<Release, Vec<u32>> = BTreeMap::new();
        for (i, &v) in star.verts.iter().enumerate() {
            let first = index.alpha_star(v).ok_or_else(|| {
                SimError::Precondition(format!("{} missing from the release record", v))
            })?;
            buckets.entry(first).or_default().push(i as u32);
        }
        sybil_order
            .iter()
            .map(|&s| {
                let created = index.alpha_plus(s).ok_or_else(|| {
                    SimError::Precondition(format!("{} is not a recorded sybil", s))
                })?;
                Ok(buckets
                    .get(&created)
                    .map(|ids| Pool::from_ids(ids.clone(), &star.deg))
                    .unwrap_or_default())
            })
            .collect::<Result<_>>()?
    } else {
        let all = Pool::from_ids((0..n as u32).collect(), &star.deg);
        vec![all; m]
    };

    let mut search = RetrievalSearch {
        star: &star,
        theta: params.theta,
        m,
        sybil_bits,
        sigma,
        pools,
        chosen: Vec::with_capacity(m),
        int_cnt: Vec::with_capacity(m),
        used: vec![false; n],
        d_mis: 0,
        visited: 0,
        out: Vec::new(),
    };
    search.descend();
    log::debug!(
        "retrieval over {} vertices, {} sybils, theta {}: {} extensions tried, {} candidates",
        n,
        m,
        params.theta,
        search.visited,
        search.out.len()
    );
    Ok(search.out)
}

/// Fingerprint similarity matrix entry: the number of sybil positions where
/// the candidate neighbourhood of `u` and the victim's fingerprint agree on
/// a present edge. Gated to zero when below `eta` or, in temporal mode, when
/// the pseudonym is younger than the victim's first targeting.
fn gated_similarity(
    cand_mask: u64,
    victim_mask: u64,
    eta: usize,
    def2_ok: bool,
) -> u64 {
    let sim = (cand_mask & victim_mask).count_ones() as u64;
    if !def2_ok || (sim as usize) < eta {
        0
    } else {
        sim
    }
}

/// All maximum-total-similarity injective assignments of victims to
/// neighbours of the candidate tuple. Empty when any victim has no positive
/// similarity option.
pub fn match_fingerprints(
    g_star: &Graph,
    candidate: &[VertexId],
    victims: &[VertexId],
    fingerprints: &BTreeMap<VertexId, BTreeSet<VertexId>>,
    sybil_order: &[VertexId],
    index: &TemporalIndex,
    params: &AttackParams,
) -> Result<Vec<VictimMapping>> {
    match_fingerprints_scored(g_star, candidate, victims, fingerprints, sybil_order, index, params)
        .map(|(maps, _)| maps)
}

/// As `match_fingerprints`, also reporting the best total similarity so
/// alignments of the same vertex set can be compared against each other.
pub fn match_fingerprints_scored(
    g_star: &Graph,
    candidate: &[VertexId],
    victims: &[VertexId],
    fingerprints: &BTreeMap<VertexId, BTreeSet<VertexId>>,
    sybil_order: &[VertexId],
    index: &TemporalIndex,
    params: &AttackParams,
) -> Result<(Vec<VictimMapping>, u64)> {
    if candidate.len() != sybil_order.len() {
        return Err(SimError::Precondition("candidate length differs from sybil count".into()));
    }
    if victims.is_empty() {
        return Err(SimError::Precondition("no victims to match".into()));
    }
    let cand_set: BTreeSet<VertexId> = candidate.iter().copied().collect();
    let mut pool: BTreeSet<VertexId> = BTreeSet::new();
    for &x in candidate {
        for &u in g_star.neighbors(x)? {
            if !cand_set.contains(&u) {
                pool.insert(u);
            }
        }
    }
    let pool: Vec<VertexId> = pool.into_iter().collect();
    if pool.len() < victims.len() {
        return Ok((Vec::new(), 0));
    }

    let mut cand_masks = vec![0u64; pool.len()];
    for (ui, &u) in pool.iter().enumerate() {
        for (k, &x) in candidate.iter().enumerate() {
            if g_star.has_edge(u, x) {
                cand_masks[ui] |= 1 << k;
            }
        }
    }
    let mut victim_masks = vec![0u64; victims.len()];
    for (j, y) in victims.iter().enumerate() {
        let fp = fingerprints
            .get(y)
            .ok_or_else(|| SimError::Precondition(format!("{} has no fingerprint", y)))?;
        for (k, s) in sybil_order.iter().enumerate() {
            if fp.contains(s) {
                victim_masks[j] |= 1 << k;
            }
        }
    }

    // per victim: viable pool vertices, best similarity first
    let mut viable: Vec<Vec<(u32, u64)>> = Vec::with_capacity(victims.len());
    for (j, &y) in victims.iter().enumerate() {
        let mut row: Vec<(u32, u64)> = Vec::new();
        for (ui, &u) in pool.iter().enumerate() {
            let def2_ok = if params.temporal { index.targeted_consistent(u, y)? } else { true };
            let sim = gated_similarity(cand_masks[ui], victim_masks[j], params.eta, def2_ok);
            if sim > 0 {
                row.push((ui as u32, sim));
            }
        }
        if row.is_empty() {
            return Ok((Vec::new(), 0));
        }
        row.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        viable.push(row);
    }

    // most constrained victims first: larger fingerprints carry more signal
    let mut order: Vec<usize> = (0..victims.len()).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(victim_masks[j].count_ones()));

    // total similarity still reachable from each depth on, ignoring
    // injectivity: sum of the per-victim row maxima for the rest of the order
    let mut suffix_max = vec![0u64; order.len() + 1];
    for d in (0..order.len()).rev() {
        let row_max = viable[order[d]].first().map_or(0, |&(_, s)| s);
        suffix_max[d] = suffix_max[d + 1] + row_max;
    }

    let mut search = AssignmentSearch {
        viable: &viable,
        order: &order,
        suffix_max: &suffix_max,
        used: vec![false; pool.len()],
        assignment: Vec::with_capacity(victims.len()),
        best: 0,
        winners: Vec::new(),
        nodes: 0,
        gave_up: false,
    };
    search.descend(0, 0);
    if search.gave_up {
        // too many equally good assignments to enumerate: each would carry a
        // vanishing share anyway, so the candidate is abandoned outright
        log::debug!(
            "matching gave up: {} victims, {} pool vertices, {} nodes",
            victims.len(),
            pool.len(),
            search.nodes
        );
        return Ok((Vec::new(), 0));
    }

    let best = search.best;
    let mappings = search
        .winners
        .into_iter()
        .map(|w| {
            let map: BTreeMap<VertexId, VertexId> = order
                .iter()
                .zip(&w)
                .map(|(&j, &ui)| (victims[j], pool[ui as usize]))
                .collect();
            VictimMapping(map)
        })
        .collect();
    Ok((mappings, best))
}

/// Work cap for one assignment search; beyond it the candidate is dropped.
const ASSIGN_NODE_BUDGET: u64 = 2_000_000;
/// Cap on equally-best assignments kept; more means the set is effectively
/// worthless to the adversary and the candidate is dropped.
const ASSIGN_WINNER_BUDGET: usize = 4096;

struct AssignmentSearch<'a> {
    viable: &'a [Vec<(u32, u64)>],
    order: &'a [usize],
    suffix_max: &'a [u64],
    used: Vec<bool>,
    assignment: Vec<u32>,
    best: u64,
    winners: Vec<Vec<u32>>,
    nodes: u64,
    gave_up: bool,
}

impl AssignmentSearch<'_> {
    fn descend(&mut self, depth: usize, total: u64) {
        if self.gave_up {
            return;
        }
        if depth == self.order.len() {
            if total > self.best {
                self.best = total;
                self.winners.clear();
            }
            if total == self.best {
                if self.winners.len() == ASSIGN_WINNER_BUDGET {
                    self.gave_up = true;
                    return;
                }
                self.winners.push(self.assignment.clone());
            }
            return;
        }
        if total + self.suffix_max[depth] < self.best {
            return;
        }
        for i in 0..self.viable[self.order[depth]].len() {
            let (ui, sim) = self.viable[self.order[depth]][i];
            if self.used[ui as usize] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > ASSIGN_NODE_BUDGET {
                self.gave_up = true;
                return;
            }
            self.used[ui as usize] = true;
            self.assignment.push(ui);
            self.descend(depth + 1, total + sim);
            self.assignment.pop();
            self.used[ui as usize] = false;
            if self.gave_up {
                return;
            }
        }
    }
}

/// Probability that uniformly picking a candidate set and then one of its
/// best mappings re-identifies every victim correctly.
pub fn success_probability(
    candidates: &[Vec<VertexId>],
    mappings: &[Vec<VictimMapping>],
    truth: &BTreeMap<VertexId, VertexId>,
) -> f64 {
    if candidates.is_empty() {
        return 0.0;
    }
    let mut acc = 0.0;
    for maps in mappings {
        if maps.is_empty() {
            continue;
        }
        if maps.iter().any(|m| &m.0 == truth) {
            acc += 1.0 / maps.len() as f64;
        }
    }
    acc / candidates.len() as f64
}

/// Runs retrieval plus matching against one release and scores the outcome.
pub fn execute_attack(
    state: &AdversaryState,
    g_star: &Graph,
    g_plus: &Graph,
    release: Release,
    truth: &BTreeMap<VertexId, VertexId>,
    params: &AttackParams,
    rng: &mut impl Rng,
) -> Result<(AttackAttempt, AttackTimings)> {
    if state.victims().is_empty() {
        return Err(SimError::Precondition("attack requires at least one victim".into()));
    }
    let t0 = Instant::now();
    let tuples =
        retrieve_sybil_candidates(g_star, g_plus, state.sybil_order(), &state.index, params)?;
    let retrieval = t0.elapsed();

    // candidates are vertex sets: alignments of the same set are one
    // candidate, and its mapping set pools the best-scoring alignments
    let t1 = Instant::now();
    let mut groups: Vec<(BTreeSet<VertexId>, Vec<Vec<VertexId>>)> = Vec::new();
    for tuple in tuples {
        let key: BTreeSet<VertexId> = tuple.iter().copied().collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, orderings)) => orderings.push(tuple),
            None => groups.push((key, vec![tuple])),
        }
    }
    let mut candidates = Vec::with_capacity(groups.len());
    let mut mappings = Vec::with_capacity(groups.len());
    for (_, orderings) in groups {
        let mut best_total = 0u64;
        let mut pooled: Vec<VictimMapping> = Vec::new();
        for ordering in &orderings {
            let (maps, total) = match_fingerprints_scored(
                g_star,
                ordering,
                state.victims(),
                state.fingerprints(),
                state.sybil_order(),
                &state.index,
                params,
            )?;
            if maps.is_empty() {
                continue;
            }
            if total > best_total {
                best_total = total;
                pooled.clear();
            }
            if total == best_total {
                pooled.extend(maps);
            }
        }
        pooled.sort();
        pooled.dedup();
        if !pooled.is_empty() {
            candidates.push(orderings.into_iter().next().unwrap());
            mappings.push(pooled);
        }
    }
    let matching = t1.elapsed();

    let selected = if candidates.is_empty() { None } else { Some(rng.gen_range(0..candidates.len())) };
    let success = success_probability(&candidates, &mappings, truth);
    if candidates.len() > 1 {
        log::debug!("release {}: {} candidates", release, candidates.len());
        for (c, m) in candidates.iter().zip(&mappings) {
            let ids: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            log::debug!("  candidate {:?} with {} mappings", ids, m.len());
        }
    }
    let attempt = AttackAttempt {
        release,
        g_star: g_star.clone(),
        sybil_order: state.sybil_order().to_vec(),
        sybils: state.sybils().clone(),
        victims: state.victims().to_vec(),
        fingerprints: state.fingerprints().clone(),
        truth: truth.clone(),
        candidates,
        mappings,
        selected,
        eta: params.eta,
        success,
        refined: None,
    };
    Ok((attempt, AttackTimings { retrieval, matching }))
}

/// Prunes an earlier attempt's candidates using the next release: a
/// candidate survives only if it lost exactly as many vertices as the sybil
/// set did. Matching is candidate-local, so the surviving candidates keep
/// the mappings computed at attack time; only the aggregate gets rescored.
/// Repeated calls chain, each further narrowing the survivors.
pub fn refine_attempt(
    attempt: &mut AttackAttempt,
    next_released: &Graph,
    next_sybils: &BTreeSet<VertexId>,
    temporal: bool,
) -> Result<()> {
    if !temporal {
        return Ok(());
    }
    let (base_cands, base_maps): (&[Vec<VertexId>], &[Vec<VictimMapping>]) =
        match &attempt.refined {
            Some(r) => (&r.candidates, &r.mappings),
            None => (&attempt.candidates, &attempt.mappings),
        };
    let mut candidates = Vec::new();
    let mut mappings = Vec::new();
    for (cand, maps) in base_cands.iter().zip(base_maps) {
        if removal_count_consistent(cand, next_released, &attempt.sybils, next_sybils) {
            candidates.push(cand.clone());
            mappings.push(maps.clone());
        }
    }
    let success = success_probability(&candidates, &mappings, &attempt.truth);
    attempt.refined = Some(RefinedAttempt { candidates, mappings, success });
    Ok(())
}
