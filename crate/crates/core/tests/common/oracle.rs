//! Candidate retrieval and fingerprint matching checked against brute-force
//! enumeration on small random instances.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use reidsim::consistency::TemporalIndex;
use reidsim::graph::{Graph, IdSpace, VertexId};
use reidsim::reident::{
    match_fingerprints, retrieve_sybil_candidates, structural_dissimilarity, AttackParams,
    VictimMapping,
};
use std::collections::{BTreeMap, BTreeSet};

pub struct Instance {
    pub g_plus: Graph,
    pub g_star: Graph,
    pub sybil_order: Vec<VertexId>,
    pub victims: Vec<VertexId>,
    pub fingerprints: BTreeMap<VertexId, BTreeSet<VertexId>>,
    pub index: TemporalIndex,
    pub params: AttackParams,
}

/// A random joint instance: a real graph with a marked sybil tuple, a
/// pseudonymised copy with a few flipped edges, release metadata, victims
/// with distinct fingerprints, and attack knobs.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n: u32 = rng.gen_range(4..=12);
    let m: usize = rng.gen_range(1..=3usize.min(n as usize / 2));
    let releases: u32 = rng.gen_range(1..=3);

    let mut g_plus = Graph::new(IdSpace::Real);
    for v in 0..n {
        g_plus.insert_vertex(VertexId::real(v)).unwrap();
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(0.35) {
                g_plus.insert_edge(VertexId::real(u), VertexId::real(v)).unwrap();
            }
        }
    }

    // born[v] is the release in which v (and its pseudonym) first appears
    let born: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=releases)).collect();

    let mut ids: Vec<u32> = (0..n).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    let sybil_order: Vec<VertexId> = ids[..m].iter().map(|&v| VertexId::real(v)).collect();

    // pseudonym permutation
    let mut perm: Vec<u32> = (0..n).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let pseudo = |v: VertexId| VertexId::pseudo(perm[v.index() as usize]);

    let mut g_star = Graph::new(IdSpace::Pseudo);
    for v in 0..n {
        g_star.insert_vertex(pseudo(VertexId::real(v))).unwrap();
    }
    for (a, b) in g_plus.edges().collect::<Vec<_>>() {
        g_star.insert_edge(pseudo(a), pseudo(b)).unwrap();
    }
    for _ in 0..rng.gen_range(0..=2) {
        let a = VertexId::pseudo(rng.gen_range(0..n));
        let b = VertexId::pseudo(rng.gen_range(0..n));
        if a == b {
            continue;
        }
        if g_star.has_edge(a, b) {
            g_star.remove_edge(a, b);
        } else {
            g_star.insert_edge(a, b).unwrap();
        }
    }

    let mut index = TemporalIndex::new();
    for &s in &sybil_order {
        index.record_sybil_created(s, born[s.index() as usize]);
    }
    for r in 1..=releases {
        let mut seen = Graph::new(IdSpace::Pseudo);
        for v in 0..n {
            if born[v as usize] <= r {
                seen.insert_vertex(pseudo(VertexId::real(v))).unwrap();
            }
        }
        index.record_release(r, &seen);
    }

    // victims among non-sybils, pairwise distinct non-empty fingerprints
    let sybil_set: BTreeSet<VertexId> = sybil_order.iter().copied().collect();
    let non_sybils: Vec<VertexId> = (0..n)
        .map(VertexId::real)
        .filter(|v| !sybil_set.contains(v))
        .collect();
    let v_count = rng.gen_range(1..=2usize.min(non_sybils.len())).min((1 << m) - 1);
    let mut victims = Vec::new();
    let mut fingerprints: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    let mut pick = non_sybils.clone();
    for _ in 0..v_count {
        let y = pick.swap_remove(rng.gen_range(0..pick.len()));
        let fp = loop {
            let fp: BTreeSet<VertexId> =
                sybil_order.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            if !fp.is_empty() && !fingerprints.values().any(|f| *f == fp) {
                break fp;
            }
        };
        index.record_targeted(y, rng.gen_range(1..=releases));
        victims.push(y);
        fingerprints.insert(y, fp);
    }

    let params = AttackParams {
        theta: rng.gen_range(0..=4),
        eta: rng.gen_range(1..=2),
        temporal: seed % 4 != 3,
    };
    Instance { g_plus, g_star, sybil_order, victims, fingerprints, index, params }
}

/// Every ordered tuple of distinct released vertices that passes the
/// first-use gate and stays within theta at every prefix length.
fn brute_force_retrieval(inst: &Instance) -> BTreeSet<Vec<VertexId>> {
    let verts: Vec<VertexId> = inst.g_star.vertices().collect();
    let m = inst.sybil_order.len();
    let mut out = BTreeSet::new();
    let mut tuple: Vec<VertexId> = Vec::with_capacity(m);
    fn extend(
        inst: &Instance,
        verts: &[VertexId],
        tuple: &mut Vec<VertexId>,
        out: &mut BTreeSet<Vec<VertexId>>,
    ) {
        let m = inst.sybil_order.len();
        if tuple.len() == m {
            out.insert(tuple.clone());
            return;
        }
        for &x in verts {
            if tuple.contains(&x) {
                continue;
            }
            tuple.push(x);
            let l = tuple.len();
            let ok_temporal = !inst.params.temporal
                || inst
                    .index
                    .first_use_consistent(tuple, &inst.sybil_order[..l])
                    .unwrap();
            let ok_theta = ok_temporal
                && structural_dissimilarity(
                    &inst.g_plus,
                    &inst.sybil_order[..l],
                    &inst.g_star,
                    tuple,
                )
                .unwrap()
                    <= inst.params.theta;
            if ok_theta {
                extend(inst, verts, tuple, out);
            }
            tuple.pop();
        }
    }
    extend(inst, &verts, &mut tuple, &mut out);
    out
}

/// Similarity as independently restated: positions where the pool vertex
/// borders the candidate and the sybil is in the fingerprint, gated by the
/// eta floor and, in temporal mode, by first-targeted consistency.
fn oracle_similarity(inst: &Instance, candidate: &[VertexId], u: VertexId, y: VertexId) -> u64 {
    if inst.params.temporal && !inst.index.targeted_consistent(u, y).unwrap() {
        return 0;
    }
    let fp = &inst.fingerprints[&y];
    let mut sim = 0u64;
    for (k, &x) in candidate.iter().enumerate() {
        if inst.g_star.has_edge(u, x) && fp.contains(&inst.sybil_order[k]) {
            sim += 1;
        }
    }
    if (sim as usize) < inst.params.eta {
        0
    } else {
        sim
    }
}

/// All injective assignments with positive per-victim similarity, reduced
/// to the set attaining the maximum total.
fn brute_force_matching(inst: &Instance, candidate: &[VertexId]) -> BTreeSet<VictimMapping> {
    let cand_set: BTreeSet<VertexId> = candidate.iter().copied().collect();
    let mut pool = BTreeSet::new();
    for &x in candidate {
        for &u in inst.g_star.neighbors(x).unwrap() {
            if !cand_set.contains(&u) {
                pool.insert(u);
            }
        }
    }
    let pool: Vec<VertexId> = pool.into_iter().collect();

    let mut best = 0u64;
    let mut winners: BTreeSet<VictimMapping> = BTreeSet::new();
    let mut assignment: Vec<(VertexId, VertexId)> = Vec::new();
    fn assign(
        inst: &Instance,
        candidate: &[VertexId],
        pool: &[VertexId],
        j: usize,
        total: u64,
        assignment: &mut Vec<(VertexId, VertexId)>,
        best: &mut u64,
        winners: &mut BTreeSet<VictimMapping>,
    ) {
        if j == inst.victims.len() {
            if total > *best {
                *best = total;
                winners.clear();
            }
            if total == *best {
                winners.insert(VictimMapping(assignment.iter().copied().collect()));
            }
            return;
        }
        let y = inst.victims[j];
        for &u in pool {
            if assignment.iter().any(|&(_, taken)| taken == u) {
                continue;
            }
            let sim = oracle_similarity(inst, candidate, u, y);
            if sim == 0 {
                continue;
            }
            assignment.push((y, u));
            assign(inst, candidate, pool, j + 1, total + sim, assignment, best, winners);
            assignment.pop();
        }
    }
    assign(inst, candidate, &pool, 0, 0, &mut assignment, &mut best, &mut winners);
    winners
}

/// Checks `instances` random instances against the brute-force oracles and
/// returns how many candidates went through the matching comparison.
/// Panics on the first divergence.
pub fn check_instances(instances: u64) -> usize {
    let mut checked_candidates = 0usize;
    for seed in 0..instances {
        let inst = random_instance(seed);
        let got: BTreeSet<Vec<VertexId>> = retrieve_sybil_candidates(
            &inst.g_star,
            &inst.g_plus,
            &inst.sybil_order,
            &inst.index,
            &inst.params,
        )
        .unwrap()
        .into_iter()
        .collect();
        let want = brute_force_retrieval(&inst);
        assert_eq!(got, want, "retrieval mismatch on instance {}", seed);

        for candidate in &got {
            let got_maps: BTreeSet<VictimMapping> = match_fingerprints(
                &inst.g_star,
                candidate,
                &inst.victims,
                &inst.fingerprints,
                &inst.sybil_order,
                &inst.index,
                &inst.params,
            )
            .unwrap()
            .into_iter()
            .collect();
            let want_maps = brute_force_matching(&inst, candidate);
            assert_eq!(
                got_maps, want_maps,
                "matching mismatch on instance {} candidate {:?}",
                seed, candidate
            );
            checked_candidates += 1;
        }
    }
    // the instance mix must actually exercise matching
    assert!(checked_candidates > 50, "only {} candidates seen", checked_candidates);
    checked_candidates
}
