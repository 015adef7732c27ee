//! Temporal edge-list loading and snapshot cutting.
//!
//! Two line formats are understood:
//! * `plain`: `#` comments; edge lines `u v t_created [t_removed]`;
//!   optional vertex records `v <id> <t_first_seen>` for vertices that may
//!   be isolated (for example users known only by their joining date).
//! * `konect`: `%` comments; edge lines `u v [weight [timestamp]]`, a
//!   missing timestamp counts as 0. No removals, no vertex records.
//!
//! External ids are non-negative integers. Edges are undirected: records
//! are normalised to (min, max) and exact duplicates collapse. Self-loops
//! are dropped with a warning count rather than an error.

use crate::error::{Result, SimError};
use crate::graph::{DynamicGraph, Graph, IdSpace, VertexId};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeListFormat {
    Plain,
    Konect,
}

impl std::str::FromStr for EdgeListFormat {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(EdgeListFormat::Plain),
            "konect" => Ok(EdgeListFormat::Konect),
            other => Err(SimError::Config(format!("unknown edge-list format '{}'", other))),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct EdgeRecord {
    pub u: u64,
    pub v: u64,
    pub created: i64,
    pub removed: Option<i64>,
}

/// Parsed temporal edge list in canonical order.
#[derive(Clone, Debug, Default)]
pub struct TemporalEdgeList {
    pub records: Vec<EdgeRecord>,
    /// Explicit vertex records: id -> first-seen timestamp.
    pub vertex_first_seen: BTreeMap<u64, i64>,
    pub self_loops_rejected: usize,
}

impl TemporalEdgeList {
    /// Every external id mentioned anywhere, ascending.
    pub fn external_ids(&self) -> Vec<u64> {
        let mut ids: BTreeSet<u64> = self.vertex_first_seen.keys().copied().collect();
        for r in &self.records {
            ids.insert(r.u);
            ids.insert(r.v);
        }
        ids.into_iter().collect()
    }

    /// Earliest and latest timestamp mentioned by any record.
    pub fn time_span(&self) -> Option<(i64, i64)> {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for r in &self.records {
            lo = lo.min(r.created);
            hi = hi.max(r.created);
            if let Some(t) = r.removed {
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
        for &t in self.vertex_first_seen.values() {
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if lo <= hi { Some((lo, hi)) } else { None }
    }
}

fn parse_field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| SimError::Parse {
        line,
        msg: format!("cannot parse {} from '{}'", what, tok),
    })
}

pub fn load_edge_list<R: Read>(reader: R, format: EdgeListFormat) -> Result<TemporalEdgeList> {
    let mut tel = TemporalEdgeList::default();
    let comment = match format {
        EdgeListFormat::Plain => '#',
        EdgeListFormat::Konect => '%',
    };
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with(comment) {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if format == EdgeListFormat::Plain && toks[0] == "v" {
            if toks.len() != 3 {
                return Err(SimError::Parse {
                    line: lineno,
                    msg: "vertex record needs exactly 'v <id> <t_first_seen>'".into(),
                });
            }
            let id = parse_field(toks[1], lineno, "vertex id")?;
            let t = parse_field(toks[2], lineno, "timestamp")?;
            tel.vertex_first_seen.entry(id).or_insert(t);
            continue;
        }
        let (u, v, created, removed) = match format {
            EdgeListFormat::Plain => {
                if toks.len() < 3 || toks.len() > 4 {
                    return Err(SimError::Parse {
                        line: lineno,
                        msg: "edge line needs 'u v t_created [t_removed]'".into(),
                    });
                }
                let u = parse_field(toks[0], lineno, "endpoint")?;
                let v = parse_field(toks[1], lineno, "endpoint")?;
                let created = parse_field(toks[2], lineno, "creation time")?;
                let removed = match toks.get(3) {
                    Some(t) => Some(parse_field(*t, lineno, "removal time")?),
                    None => None,
                };
                (u, v, created, removed)
            }
            EdgeListFormat::Konect => {
                if toks.len() < 2 || toks.len() > 4 {
                    return Err(SimError::Parse {
                        line: lineno,
                        msg: "edge line needs 'u v [weight [timestamp]]'".into(),
                    });
                }
                let u = parse_field(toks[0], lineno, "endpoint")?;
                let v = parse_field(toks[1], lineno, "endpoint")?;
                let created = match toks.len() {
                    4 => parse_field(toks[3], lineno, "timestamp")?,
                    3 => parse_field(toks[2], lineno, "timestamp")?,
                    _ => 0,
                };
                (u, v, created, None)
            }
        };
        if u == v {
            tel.self_loops_rejected += 1;
            log::warn!("line {}: dropped self-loop on {}", lineno, u);
            continue;
        }
        if let Some(t_rem) = removed {
            if t_rem <= created {
                return Err(SimError::Parse {
                    line: lineno,
                    msg: format!("removal time {} not after creation time {}", t_rem, created),
                });
            }
        }
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        tel.records.push(EdgeRecord { u, v, created, removed });
    }
    tel.records.sort_unstable();
    tel.records.dedup();
    Ok(tel)
}

pub fn load_edge_list_path(path: &Path, format: EdgeListFormat) -> Result<TemporalEdgeList> {
    load_edge_list(std::fs::File::open(path)?, format)
}

/// Cuts the edge list into snapshots at the given strictly increasing
/// timestamps. An edge belongs to snapshot i when it was created at or
/// before the cut and not removed at or before it. A vertex belongs to a
/// snapshot once its first edge exists; with `include_isolated`, once its
/// explicit vertex record says it joined.
pub fn take_snapshots(
    tel: &TemporalEdgeList,
    cuts: &[i64],
    include_isolated: bool,
) -> Result<DynamicGraph> {
    if cuts.is_empty() {
        return Err(SimError::Config("need at least one cut timestamp".into()));
    }
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::Config("cut timestamps must strictly increase".into()));
    }

    // stable external -> internal mapping over everything ever mentioned
    let ids = tel.external_ids();
    let to_internal: BTreeMap<u64, VertexId> = ids
        .iter()
        .enumerate()
        .map(|(i, &ext)| (ext, VertexId::real(i as u32)))
        .collect();

    let mut first_edge_seen: BTreeMap<u64, i64> = BTreeMap::new();
    for r in &tel.records {
        let e = first_edge_seen.entry(r.u).or_insert(r.created);
        *e = (*e).min(r.created);
        let e = first_edge_seen.entry(r.v).or_insert(r.created);
        *e = (*e).min(r.created);
    }
    let mut appears_at: BTreeMap<u64, i64> = first_edge_seen.clone();
    if include_isolated {
        for (&id, &t) in &tel.vertex_first_seen {
            appears_at
                .entry(id)
                .and_modify(|e| *e = (*e).min(t))
                .or_insert(t);
        }
    }

    let mut dg = DynamicGraph { snapshots: Vec::new(), first_seen: Default::default() };
    for (i, &ts) in cuts.iter().enumerate() {
        let release = i as u32 + 1;
        let mut g = Graph::new(IdSpace::Real);
        for (&ext, &t) in &appears_at {
            if t <= ts {
                g.insert_vertex(to_internal[&ext]).unwrap();
            }
        }
        for r in &tel.records {
            if r.created <= ts && r.removed.map_or(true, |t| t > ts) {
                g.insert_edge(to_internal[&r.u], to_internal[&r.v])?;
            }
        }
        for v in g.vertices() {
            dg.first_seen.entry(v).or_insert(release);
        }
        dg.snapshots.push(g);
    }
    Ok(dg)
}

/// Evenly spaced cuts covering (min_t, max_t]: the first cut is one step
/// after `min_t`, the last is the first one at or beyond `max_t`.
pub fn periodic_cuts(min_t: i64, max_t: i64, step: i64) -> Result<Vec<i64>> {
    if step <= 0 {
        return Err(SimError::Config("cut period must be positive".into()));
    }
    if max_t < min_t {
        return Err(SimError::Config("empty time span".into()));
    }
    let mut cuts = Vec::new();
    let mut t = min_t;
    loop {
        t += step;
        cuts.push(t);
        if t >= max_t {
            break;
        }
    }
    Ok(cuts)
}

/// Writes a dynamic graph back out in `plain` format, using release numbers
/// as timestamps: vertex records carry first-seen releases, edge records the
/// first release containing the edge, plus a removal release for edges that
/// later disappear. Loading the output with cuts 1..=n reproduces the
/// snapshots.
pub fn write_dynamic_graph<W: Write>(mut w: W, dg: &DynamicGraph) -> Result<()> {
    writeln!(w, "# temporal edge list, timestamps are release numbers")?;
    for (&v, &release) in &dg.first_seen {
        writeln!(w, "v {} {}", v.index(), release)?;
    }
    // presence intervals per edge; an edge removed and later re-created
    // yields one record per interval
    let mut intervals: BTreeMap<(u32, u32), Vec<(u32, Option<u32>)>> = BTreeMap::new();
    let mut open: BTreeSet<(u32, u32)> = BTreeSet::new();
    for (i, g) in dg.snapshots.iter().enumerate() {
        let release = i as u32 + 1;
        let current: BTreeSet<(u32, u32)> =
            g.edges().map(|(a, b)| (a.index(), b.index())).collect();
        let vanished: Vec<_> = open.difference(&current).copied().collect();
        for key in vanished {
            intervals.get_mut(&key).unwrap().last_mut().unwrap().1 = Some(release);
            open.remove(&key);
        }
        let fresh: Vec<_> = current.difference(&open).copied().collect();
        for key in fresh {
            intervals.entry(key).or_default().push((release, None));
            open.insert(key);
        }
    }
    for (&(a, b), spans) in &intervals {
        for &(c, r) in spans {
            match r {
                Some(r) => writeln!(w, "{} {} {} {}", a, b, c, r)?,
                None => writeln!(w, "{} {} {}", a, b, c)?,
            }
        }
    }
    Ok(())
}
