//! Simple undirected graphs over tagged vertex ids.
//!
//! Every vertex id carries an identity-space tag: `Real` ids name actual
//! users, `Pseudo` ids name pseudonyms in a published graph. A graph holds
//! vertices of exactly one space, so code that accidentally mixes a real id
//! into a pseudonymised graph (or vice versa) fails loudly instead of
//! silently producing garbage.

use crate::error::{Result, SimError};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Identity space a vertex id belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum IdSpace {
    Real,
    Pseudo,
}

impl IdSpace {
    pub fn name(self) -> &'static str {
        match self {
            IdSpace::Real => "real",
            IdSpace::Pseudo => "pseudo",
        }
    }
}

/// Opaque vertex identity. Ordering is (space, index), so ids sort
/// deterministically and never collide across spaces.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId {
    space: IdSpace,
    index: u32,
}

impl VertexId {
    pub fn real(index: u32) -> Self {
        VertexId { space: IdSpace::Real, index }
    }

    pub fn pseudo(index: u32) -> Self {
        VertexId { space: IdSpace::Pseudo, index }
    }

    pub fn index(self) -> u32 {
        self.index
    }

    pub fn space(self) -> IdSpace {
        self.space
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.space {
            IdSpace::Real => 'r',
            IdSpace::Pseudo => 'p',
        };
        write!(f, "{}{}", tag, self.index)
    }
}

/// Canonical form of an undirected edge: endpoints in ascending order.
pub fn edge_key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v { (u, v) } else { (v, u) }
}

/// Undirected simple graph. No self-loops, no parallel edges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    space: IdSpace,
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
    n_edges: usize,
}

impl Graph {
    pub fn new(space: IdSpace) -> Self {
        Graph { space, adj: BTreeMap::new(), n_edges: 0 }
    }

    pub fn space(&self) -> IdSpace {
        self.space
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    fn check_space(&self, v: VertexId) -> Result<()> {
        if v.space() != self.space {
            return Err(SimError::SpaceMismatch {
                expected: self.space.name(),
                got: v.space().name(),
            });
        }
        Ok(())
    }

    /// Inserts a vertex with no incident edges. Returns false if it was
    /// already present.
    pub fn insert_vertex(&mut self, v: VertexId) -> Result<bool> {
        self.check_space(v)?;
        if self.adj.contains_key(&v) {
            return Ok(false);
        }
        self.adj.insert(v, BTreeSet::new());
        Ok(true)
    }

    /// Inserts the edge (u, v), creating missing endpoints. Returns true if
    /// the edge was new.
    pub fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        self.check_space(u)?;
        self.check_space(v)?;
        if u == v {
            return Err(SimError::SelfLoop(u));
        }
        let new = self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);
        if new {
            self.n_edges += 1;
        }
        Ok(new)
    }

    /// Removes the edge if present. Unknown endpoints count as absent.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        let removed = match self.adj.get_mut(&u) {
            Some(n) => n.remove(&v),
            None => false,
        };
        if removed {
            self.adj.get_mut(&v).map(|n| n.remove(&u));
            self.n_edges -= 1;
        }
        removed
    }

    /// Removes a vertex together with all incident edges.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<()> {
        let neighbours = self.adj.remove(&v).ok_or(SimError::UnknownVertex(v))?;
        self.n_edges -= neighbours.len();
        for u in neighbours {
            self.adj.get_mut(&u).map(|n| n.remove(&v));
        }
        Ok(())
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(&u).map_or(false, |n| n.contains(&v))
    }

    /// Degree of a vertex. Distinguishes an unknown vertex (error) from an
    /// isolated one (Ok(0)).
    pub fn degree(&self, v: VertexId) -> Result<usize> {
        self.adj.get(&v).map(|n| n.len()).ok_or(SimError::UnknownVertex(v))
    }

    pub fn neighbors(&self, v: VertexId) -> Result<&BTreeSet<VertexId>> {
        self.adj.get(&v).ok_or(SimError::UnknownVertex(v))
    }

    /// Ascending vertex iteration.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    /// Edges in canonical (min, max) form, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj.iter().flat_map(|(&u, nbrs)| {
            nbrs.iter().copied().filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    pub fn edge_set(&self) -> BTreeSet<(VertexId, VertexId)> {
        self.edges().collect()
    }

    /// Subgraph on `keep`: the kept vertices and every edge with both
    /// endpoints kept. Vertices of `keep` absent from the graph are ignored.
    pub fn induced_subgraph(&self, keep: &BTreeSet<VertexId>) -> Graph {
        let mut g = Graph::new(self.space);
        for &v in keep {
            if let Some(nbrs) = self.adj.get(&v) {
                let kept = g.adj.entry(v).or_default();
                kept.extend(nbrs.iter().copied().filter(|u| keep.contains(u)));
            }
        }
        g.n_edges = g.adj.values().map(|n| n.len()).sum::<usize>() / 2;
        g
    }

    /// Subgraph on `seed` plus all its neighbours, keeping only edges with
    /// at least one endpoint in `seed`.
    pub fn weakly_induced_subgraph(&self, seed: &BTreeSet<VertexId>) -> Graph {
        let mut g = Graph::new(self.space);
        for &v in seed {
            if let Some(nbrs) = self.adj.get(&v) {
                g.adj.entry(v).or_default();
                for &u in nbrs {
                    g.adj.entry(v).or_default().insert(u);
                    g.adj.entry(u).or_default().insert(v);
                }
            }
        }
        g.n_edges = g.adj.values().map(|n| n.len()).sum::<usize>() / 2;
        g
    }

    /// Relabels the graph through a bijection. Every vertex must be mapped.
    pub fn apply_isomorphism(&self, map: &IsomorphismMap) -> Result<Graph> {
        let mut g = Graph::new(map.target_space().unwrap_or(self.space));
        for v in self.vertices() {
            let image = map.image(v)?;
            g.adj.entry(image).or_default();
        }
        for (u, v) in self.edges() {
            g.insert_edge(map.image(u)?, map.image(v)?)?;
        }
        Ok(g)
    }

    /// Degree sequence in ascending order.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.adj.values().map(|n| n.len()).collect();
        d.sort_unstable();
        d
    }
}

/// Injective vertex relabeling, kept bidirectional so inversion is O(log n).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IsomorphismMap {
    fwd: BTreeMap<VertexId, VertexId>,
    inv: BTreeMap<VertexId, VertexId>,
}

impl IsomorphismMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds source -> image. Fails if the source is already mapped or the
    /// image is already used (injectivity).
    pub fn insert(&mut self, source: VertexId, image: VertexId) -> Result<()> {
        if self.fwd.contains_key(&source) {
            return Err(SimError::DuplicateMapping(source));
        }
        if self.inv.contains_key(&image) {
            return Err(SimError::DuplicateMapping(image));
        }
        self.fwd.insert(source, image);
        self.inv.insert(image, source);
        Ok(())
    }

    pub fn image(&self, source: VertexId) -> Result<VertexId> {
        self.fwd.get(&source).copied().ok_or(SimError::MissingMapping(source))
    }

    pub fn preimage(&self, image: VertexId) -> Result<VertexId> {
        self.inv.get(&image).copied().ok_or(SimError::MissingMapping(image))
    }

    pub fn image_opt(&self, source: VertexId) -> Option<VertexId> {
        self.fwd.get(&source).copied()
    }

    pub fn preimage_opt(&self, image: VertexId) -> Option<VertexId> {
        self.inv.get(&image).copied()
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.fwd.iter().map(|(&s, &i)| (s, i))
    }

    /// Restriction of the map to the given sources.
    pub fn restricted_to(&self, sources: &BTreeSet<VertexId>) -> IsomorphismMap {
        let mut m = IsomorphismMap::new();
        for (&s, &i) in &self.fwd {
            if sources.contains(&s) {
                m.fwd.insert(s, i);
                m.inv.insert(i, s);
            }
        }
        m
    }

    fn target_space(&self) -> Option<IdSpace> {
        self.fwd.values().next().map(|v| v.space())
    }
}

/// A sequence of graph snapshots plus the first snapshot (1-based) in which
/// each vertex appears.
#[derive(Clone, Debug)]
pub struct DynamicGraph {
    pub snapshots: Vec<Graph>,
    pub first_seen: BTreeMap<VertexId, u32>,
}

impl DynamicGraph {
    pub fn snapshot(&self, release: u32) -> Result<&Graph> {
        self.snapshots
            .get(release.checked_sub(1).ok_or_else(|| {
                SimError::Precondition("snapshot numbering starts at 1".into())
            })? as usize)
            .ok_or_else(|| SimError::Precondition(format!("no snapshot {}", release)))
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(i: u32) -> VertexId {
        VertexId::real(i)
    }

    fn path3() -> Graph {
        // a - b - c
        let mut g = Graph::new(IdSpace::Real);
        g.insert_edge(r(0), r(1)).unwrap();
        g.insert_edge(r(1), r(2)).unwrap();
        g
    }

    #[test]
    fn insert_and_query() {
        let mut g = path3();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(r(1), r(0)));
        assert!(!g.has_edge(r(0), r(2)));
        // duplicate insert is a no-op
        assert!(!g.insert_edge(r(1), r(0)).unwrap());
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn self_loop_rejected() {
        let mut g = Graph::new(IdSpace::Real);
        assert!(matches!(g.insert_edge(r(3), r(3)), Err(SimError::SelfLoop(_))));
    }

    #[test]
    fn space_mixing_rejected() {
        let mut g = Graph::new(IdSpace::Real);
        let err = g.insert_edge(r(0), VertexId::pseudo(1));
        assert!(matches!(err, Err(SimError::SpaceMismatch { .. })));
    }

    #[test]
    fn unknown_vertex_vs_isolated() {
        let mut g = Graph::new(IdSpace::Real);
        g.insert_vertex(r(7)).unwrap();
        assert_eq!(g.degree(r(7)).unwrap(), 0);
        assert!(matches!(g.degree(r(8)), Err(SimError::UnknownVertex(_))));
    }

    #[test]
    fn induced_drops_outside_edges() {
        // induced on {a, c} of a - b - c keeps both vertices and no edge
        let g = path3();
        let keep: BTreeSet<_> = [r(0), r(2)].into_iter().collect();
        let sub = g.induced_subgraph(&keep);
        assert_eq!(sub.vertex_count(), 2);
        assert_eq!(sub.edge_count(), 0);
    }

    #[test]
    fn weakly_induced_star_center() {
        // whole star survives when the seed is the hub
        let mut g = Graph::new(IdSpace::Real);
        for leaf in 1..=4 {
            g.insert_edge(r(0), r(leaf)).unwrap();
        }
        let seed: BTreeSet<_> = [r(0)].into_iter().collect();
        let sub = g.weakly_induced_subgraph(&seed);
        assert_eq!(sub.vertex_count(), 5);
        assert_eq!(sub.edge_count(), 4);
    }

    #[test]
    fn weakly_induced_keeps_only_seed_touching_edges() {
        // triangle a-b-c plus leaf d on b; seed {a}: edge b-c must not appear
        let mut g = path3();
        g.insert_edge(r(0), r(2)).unwrap();
        g.insert_edge(r(1), r(3)).unwrap();
        let seed: BTreeSet<_> = [r(0)].into_iter().collect();
        let sub = g.weakly_induced_subgraph(&seed);
        assert!(sub.contains(r(1)) && sub.contains(r(2)));
        assert!(!sub.contains(r(3)));
        assert!(sub.has_edge(r(0), r(1)));
        assert!(sub.has_edge(r(0), r(2)));
        assert!(!sub.has_edge(r(1), r(2)));
    }

    #[test]
    fn subgraph_chain_is_nested() {
        let mut g = path3();
        g.insert_edge(r(2), r(3)).unwrap();
        g.insert_edge(r(3), r(0)).unwrap();
        let seed: BTreeSet<_> = [r(0), r(1)].into_iter().collect();
        let ind = g.induced_subgraph(&seed);
        let weak = g.weakly_induced_subgraph(&seed);
        let ind_edges = ind.edge_set();
        let weak_edges = weak.edge_set();
        let all_edges = g.edge_set();
        assert!(ind_edges.is_subset(&weak_edges));
        assert!(weak_edges.is_subset(&all_edges));
    }

    #[test]
    fn isomorphism_preserves_structure() {
        // triangle relabeled to pseudonyms keeps degree sequence (2, 2, 2)
        let mut g = path3();
        g.insert_edge(r(0), r(2)).unwrap();
        let mut m = IsomorphismMap::new();
        for (i, p) in [(0, 10), (1, 11), (2, 12)] {
            m.insert(r(i), VertexId::pseudo(p)).unwrap();
        }
        let h = g.apply_isomorphism(&m).unwrap();
        assert_eq!(h.space(), IdSpace::Pseudo);
        assert_eq!(h.vertex_count(), 3);
        assert_eq!(h.edge_count(), 3);
        assert_eq!(h.degree_sequence(), vec![2, 2, 2]);
    }

    #[test]
    fn isomorphism_requires_total_map() {
        let g = path3();
        let mut m = IsomorphismMap::new();
        m.insert(r(0), VertexId::pseudo(0)).unwrap();
        m.insert(r(1), VertexId::pseudo(1)).unwrap();
        assert!(matches!(g.apply_isomorphism(&m), Err(SimError::MissingMapping(_))));
    }

    #[test]
    fn isomorphism_map_is_injective() {
        let mut m = IsomorphismMap::new();
        m.insert(r(0), VertexId::pseudo(5)).unwrap();
        assert!(matches!(
            m.insert(r(1), VertexId::pseudo(5)),
            Err(SimError::DuplicateMapping(_))
        ));
        assert!(matches!(
            m.insert(r(0), VertexId::pseudo(6)),
            Err(SimError::DuplicateMapping(_))
        ));
        assert_eq!(m.preimage(VertexId::pseudo(5)).unwrap(), r(0));
    }

    #[test]
    fn remove_vertex_drops_incident_edges() {
        let mut g = path3();
        g.remove_vertex(r(1)).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 0);
        assert!(!g.has_edge(r(0), r(1)));
    }
}
