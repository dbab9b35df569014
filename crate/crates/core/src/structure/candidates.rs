//! Enumerating the structure changes available from a model.

use std::collections::BTreeSet;
use std::fmt;

use super::delete::{deletable, delete_edge};
use super::merge::{merge_creates_cycle, merge_states, Changed};
use crate::counts::CountTable;
use crate::em::Smoothing;
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StructureChange {
    Merge(StateId, StateId),
    DeleteEdge(StateId, StateId),
}

impl StructureChange {
    pub fn apply(&self, hmm: &Hmm, counts: &CountTable, smoothing: &Smoothing) -> Result<Changed> {
        match *self {
            StructureChange::Merge(p, q) => merge_states(hmm, counts, p, q, smoothing),
            StructureChange::DeleteEdge(a, b) => delete_edge(hmm, counts, a, b, smoothing),
        }
    }
}

impl fmt::Display for StructureChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureChange::Merge(p, q) => write!(f, "merge\t{p}\t{q}"),
            StructureChange::DeleteEdge(a, b) => write!(f, "delete\t{a}\t{b}"),
        }
    }
}

/// Which state pairs are considered for merging.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Pruning {
    /// Every pair of interior states.
    #[default]
    AllPairs,
    /// Only pairs that share a parent or a child.
    SharedNeighbor,
}

impl std::str::FromStr for Pruning {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-pairs" => Ok(Pruning::AllPairs),
            "shared-neighbor" => Ok(Pruning::SharedNeighbor),
            _ => Err(Error::Config(format!(
                "unknown pruning mode {s:?} (expected all-pairs or shared-neighbor)"
            ))),
        }
    }
}

/// All acyclic merges of interior states, then all edges that can be
/// deleted, each group ordered by the topological positions involved.
pub fn enumerate_candidates(hmm: &Hmm, pruning: Pruning) -> Vec<StructureChange> {
    let states = hmm.states();
    let interior: Vec<StateId> = states
        .iter()
        .copied()
        .filter(|s| !Hmm::is_sentinel(*s))
        .collect();
    let descendants = hmm.descendants();
    let neighbors = |q: StateId| -> BTreeSet<(bool, StateId)> {
        let mut out: BTreeSet<(bool, StateId)> =
            hmm.successors(q).map(|(s, _)| (true, s)).collect();
        out.extend(hmm.predecessors(q).into_iter().map(|(s, _)| (false, s)));
        out
    };
    let neigh: Vec<BTreeSet<(bool, StateId)>> = match pruning {
        Pruning::AllPairs => Vec::new(),
        Pruning::SharedNeighbor => interior.iter().map(|q| neighbors(*q)).collect(),
    };

    let mut out = Vec::new();
    for (a, &p) in interior.iter().enumerate() {
        for (b, &q) in interior.iter().enumerate().skip(a + 1) {
            if pruning == Pruning::SharedNeighbor && neigh[a].is_disjoint(&neigh[b]) {
                continue;
            }
            if !merge_creates_cycle(hmm, &descendants, p, q) {
                out.push(StructureChange::Merge(p, q));
            }
        }
    }
    for &a in states {
        for (b, _) in hmm.successors(a) {
            if deletable(hmm, a, b) {
                out.push(StructureChange::DeleteEdge(a, b));
            }
        }
    }
    // successors() is ordered by id; order deletions topologically.
    let ord = |s: StateId| hmm.ordinal(s).unwrap_or(usize::MAX);
    let first_delete = out
        .iter()
        .position(|c| matches!(c, StructureChange::DeleteEdge(..)))
        .unwrap_or(out.len());
    out[first_delete..].sort_by_key(|c| match c {
        StructureChange::DeleteEdge(a, b) | StructureChange::Merge(a, b) => (ord(*a), ord(*b)),
    });
    out
}
