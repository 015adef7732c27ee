//! Temporal bookkeeping for the publication game.
//!
//! Three first-occurrence maps drive every temporal check:
//! * `alpha_plus(v)`: first release in which vertex v existed in the owner's
//!   graph. The attacker only ever learns this for its own sybils, so the
//!   index records it for sybils alone; evaluation code that needs the map
//!   for everyone uses [`OmniscientIndex`] instead.
//! * `alpha_star(x)`: first release in which pseudonym x was used.
//! * `beta_plus(y)`: release before which victim y was first targeted.
//!
//! All three are write-once per key: later releases never rewrite history.

use crate::error::{Result, SimError};
use crate::graph::{Graph, VertexId};
use std::collections::{BTreeMap, BTreeSet};

/// 1-based release (snapshot) number.
pub type Release = u32;

/// What the adversary legitimately knows about time.
#[derive(Clone, Debug, Default)]
pub struct TemporalIndex {
    alpha_plus: BTreeMap<VertexId, Release>,
    alpha_star: BTreeMap<VertexId, Release>,
    beta_plus: BTreeMap<VertexId, Release>,
}

impl TemporalIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records that sybil `s` first joined the owner's graph before `release`.
    /// A second registration for the same sybil is ignored; first write wins.
    pub fn record_sybil_created(&mut self, s: VertexId, release: Release) {
        self.alpha_plus.entry(s).or_insert(release);
    }

    /// Records that victim `y` was first targeted before `release`.
    pub fn record_targeted(&mut self, y: VertexId, release: Release) {
        self.beta_plus.entry(y).or_insert(release);
    }

    /// Registers one published graph: every pseudonym not seen before gets
    /// `release` as its first-use time.
    pub fn record_release(&mut self, release: Release, g_star: &Graph) {
        for x in g_star.vertices() {
            self.alpha_star.entry(x).or_insert(release);
        }
    }

    pub fn alpha_plus(&self, s: VertexId) -> Option<Release> {
        self.alpha_plus.get(&s).copied()
    }

    pub fn alpha_star(&self, x: VertexId) -> Option<Release> {
        self.alpha_star.get(&x).copied()
    }

    pub fn beta_plus(&self, y: VertexId) -> Option<Release> {
        self.beta_plus.get(&y).copied()
    }

    /// First-use-as-sybil check: position by position, the candidate
    /// pseudonym must have first appeared exactly when the sybil joined.
    pub fn first_use_consistent(
        &self,
        candidates: &[VertexId],
        sybils: &[VertexId],
    ) -> Result<bool> {
        if candidates.len() != sybils.len() {
            return Err(SimError::Precondition(
                "candidate prefix and sybil prefix differ in length".into(),
            ));
        }
        for (&x, &s) in candidates.iter().zip(sybils) {
            let ax = self
                .alpha_star(x)
                .ok_or_else(|| SimError::Precondition(format!("{} was never released", x)))?;
            let ap = self
                .alpha_plus(s)
                .ok_or_else(|| SimError::Precondition(format!("{} is not a known sybil", s)))?;
            if ax != ap {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// First-time-targeted check: pseudonym `x` may stand for victim `y` only
    /// if `x` was already in use when `y` was first targeted.
    pub fn targeted_consistent(&self, x: VertexId, y: VertexId) -> Result<bool> {
        let ax = self
            .alpha_star(x)
            .ok_or_else(|| SimError::Precondition(format!("{} was never released", x)))?;
        let by = self
            .beta_plus(y)
            .ok_or_else(|| SimError::Precondition(format!("{} is not a victim", y)))?;
        Ok(ax <= by)
    }
}

/// Sybil-removal-count check: a candidate set may survive into the next
/// release only if it lost exactly as many members as the sybil set did.
pub fn removal_count_consistent(
    candidate: &[VertexId],
    next_released: &Graph,
    sybils_prev: &BTreeSet<VertexId>,
    sybils_next: &BTreeSet<VertexId>,
) -> bool {
    let vanished_candidates =
        candidate.iter().filter(|&&x| !next_released.contains(x)).count();
    let removed_sybils = sybils_prev.difference(sybils_next).count();
    vanished_candidates == removed_sybils
}

/// Full first-presence map, usable only by evaluation code. Attack code must
/// go through [`TemporalIndex`] so it cannot peek at legitimate users' join
/// times.
#[derive(Clone, Debug, Default)]
pub struct OmniscientIndex {
    alpha_plus: BTreeMap<VertexId, Release>,
}

impl OmniscientIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_presence(&mut self, release: Release, g_plus: &Graph) {
        for v in g_plus.vertices() {
            self.alpha_plus.entry(v).or_insert(release);
        }
    }

    pub fn alpha_plus(&self, v: VertexId) -> Option<Release> {
        self.alpha_plus.get(&v).copied()
    }
}
