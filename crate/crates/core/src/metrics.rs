//! Utility measures comparing the owner's graph with what was released.
//!
//! All three treat the owner's graph (sybils included) as ground truth, so
//! adversary edits never count as perturbation; only the defender's noise
//! does.

use crate::error::{Result, SimError};
use crate::graph::{edge_key, Graph, IsomorphismMap};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UtilityReport {
    pub edge_edit_pct: f64,
    pub lcc_variation: f64,
    pub degree_kl: f64,
}

/// Fraction of edges flipped by the release: symmetric difference between
/// the relabelled original edge set and the released one, over the original
/// edge count. Unbounded above when the release adds more than it keeps.
pub fn edge_edit_percentage(
    g_plus: &Graph,
    g_star: &Graph,
    phi: &IsomorphismMap,
) -> Result<f64> {
    if g_plus.edge_count() == 0 {
        return Err(SimError::Precondition(
            "edge edit fraction undefined on an edgeless graph".into(),
        ));
    }
    let mut mapped: BTreeSet<_> = BTreeSet::new();
    for (u, v) in g_plus.edges() {
        mapped.insert(edge_key(phi.image(u)?, phi.image(v)?));
    }
    let released = g_star.edge_set();
    let diff = mapped.symmetric_difference(&released).count();
    Ok(diff as f64 / g_plus.edge_count() as f64)
}

/// Local clustering coefficient: closed wedges over possible wedges, zero
/// below degree two.
fn local_cc(g: &Graph, v: crate::graph::VertexId) -> Result<f64> {
    let neigh: Vec<_> = g.neighbors(v)?.iter().copied().collect();
    let d = neigh.len();
    if d < 2 {
        return Ok(0.0);
    }
    let mut closed = 0usize;
    for i in 0..d {
        for j in i + 1..d {
            if g.has_edge(neigh[i], neigh[j]) {
                closed += 1;
            }
        }
    }
    Ok(2.0 * closed as f64 / (d * (d - 1)) as f64)
}

/// Mean local clustering coefficient over all vertices.
pub fn avg_lcc(g: &Graph) -> Result<f64> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(SimError::Precondition("clustering undefined on an empty graph".into()));
    }
    let mut total = 0.0;
    for v in g.vertices() {
        total += local_cc(g, v)?;
    }
    Ok(total / n as f64)
}

/// Relative change of the average clustering coefficient,
/// |avg(original) - avg(released)| / avg(original).
pub fn avg_lcc_variation(g_plus: &Graph, g_star: &Graph) -> Result<f64> {
    let a = avg_lcc(g_plus)?;
    if a == 0.0 {
        return Err(SimError::Precondition(
            "clustering variation undefined when the original average is zero".into(),
        ));
    }
    let b = avg_lcc(g_star)?;
    Ok((a - b).abs() / a)
}

/// Kullback-Leibler divergence between two aligned probability vectors,
/// natural log. Bins where `p` is zero contribute nothing; a zero `q` bin
/// under positive `p` makes the divergence undefined.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(SimError::Precondition("distributions differ in length".into()));
    }
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(SimError::Precondition(
                "divergence undefined: unmatched support".into(),
            ));
        }
        acc += pi * (pi / qi).ln();
    }
    Ok(acc)
}

fn degree_pmf(g: &Graph, support: &[usize], lambda: f64) -> Result<Vec<f64>> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for v in g.vertices() {
        *counts.entry(g.degree(v)?).or_insert(0) += 1;
    }
    let n = g.vertex_count() as f64;
    let total = n + lambda * support.len() as f64;
    Ok(support
        .iter()
        .map(|d| (counts.get(d).copied().unwrap_or(0) as f64 + lambda) / total)
        .collect())
}

/// Divergence of the released degree distribution from the original one.
/// Both empirical distributions get add-lambda smoothing over the union of
/// observed degree values, with lambda shrinking as graphs grow, so the
/// result is finite even when supports differ and is exactly zero for
/// identical graphs.
pub fn degree_kl_divergence(g_plus: &Graph, g_star: &Graph) -> Result<f64> {
    if g_plus.vertex_count() == 0 || g_star.vertex_count() == 0 {
        return Err(SimError::Precondition(
            "degree divergence undefined on an empty graph".into(),
        ));
    }
    let mut support: BTreeSet<usize> = BTreeSet::new();
    for v in g_plus.vertices() {
        support.insert(g_plus.degree(v)?);
    }
    for v in g_star.vertices() {
        support.insert(g_star.degree(v)?);
    }
    let support: Vec<usize> = support.into_iter().collect();
    let lambda = 1.0 / (2.0 * g_plus.vertex_count().max(g_star.vertex_count()) as f64);
    let p = degree_pmf(g_plus, &support, lambda)?;
    let q = degree_pmf(g_star, &support, lambda)?;
    kl_divergence(&p, &q)
}

/// All three utility measures for one release.
pub fn utility_report(
    g_plus: &Graph,
    g_star: &Graph,
    phi: &IsomorphismMap,
) -> Result<UtilityReport> {
    Ok(UtilityReport {
        edge_edit_pct: edge_edit_percentage(g_plus, g_star, phi)?,
        lcc_variation: avg_lcc_variation(g_plus, g_star)?,
        degree_kl: degree_kl_divergence(g_plus, g_star)?,
    })
}
