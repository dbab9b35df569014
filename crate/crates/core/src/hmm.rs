//! The Left-to-Right HMM with null emissions.
//!
//! States are kept in a topological order. The initial state is always
//! [`Hmm::INITIAL`] and sits first; the final state is always [`Hmm::FINAL`]
//! and sits last. Transitions may only go forward in that order, except for
//! self-loops. Emissions happen on arrival at a state; the initial state's
//! `"<"` is implied by the start of every sequence.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use crate::symbol::{Emission, Symbol};

/// Row sums must match 1 within this tolerance.
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StateId(pub u32);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// First invariant found broken by [`Hmm::validate`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("state order must start with the initial state and end with the final state")]
    SentinelPlacement,
    #[error("state {0} listed twice")]
    DuplicateState(StateId),
    #[error("transition {0}->{1} references an unknown state")]
    UnknownState(StateId, StateId),
    #[error("emission row for unknown state {0}")]
    UnknownEmissionState(StateId),
    #[error("final state has outgoing transition to {0}")]
    FinalHasOutgoing(StateId),
    #[error("initial state has incoming transition from {0}")]
    InitialHasIncoming(StateId),
    #[error("transition {0}->{1} goes against the topological order")]
    BackwardEdge(StateId, StateId),
    #[error("probability {value} out of range at {location}")]
    BadProbability { location: String, value: f64 },
    #[error("transition row of state {state} sums to {sum}")]
    TransitionRowSum { state: StateId, sum: f64 },
    #[error("emission row of state {state} sums to {sum}")]
    EmissionRowSum { state: StateId, sum: f64 },
    #[error("initial state must emit \"<\" with probability 1")]
    InitialEmission,
    #[error("final state must emit \">\" with probability 1")]
    FinalEmission,
    #[error("state {0} emits a sentinel")]
    SentinelEmittedElsewhere(StateId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hmm {
    order: Vec<StateId>,
    ordinal: BTreeMap<StateId, usize>,
    trans: BTreeMap<StateId, BTreeMap<StateId, f64>>,
    emit: BTreeMap<StateId, BTreeMap<Emission, f64>>,
    next_id: u32,
}

impl Hmm {
    pub const INITIAL: StateId = StateId(0);
    pub const FINAL: StateId = StateId(1);

    /// Assembles a model from raw tables without checking invariants; call
    /// [`Hmm::validate`] before trusting the result. Rows for the two
    /// sentinels' emissions are filled in when missing, zero entries are
    /// dropped, and `order` is used as the topological order.
    pub fn from_parts(
        order: Vec<StateId>,
        trans: BTreeMap<StateId, BTreeMap<StateId, f64>>,
        mut emit: BTreeMap<StateId, BTreeMap<Emission, f64>>,
    ) -> Self {
        emit.entry(Self::INITIAL)
            .or_insert_with(|| BTreeMap::from([(Emission::Symbol(Symbol::start()), 1.0)]));
        emit.entry(Self::FINAL)
            .or_insert_with(|| BTreeMap::from([(Emission::Symbol(Symbol::end()), 1.0)]));
        let next_id = order.iter().map(|s| s.0 + 1).max().unwrap_or(2).max(2);
        let mut hmm = Hmm {
            ordinal: BTreeMap::new(),
            order,
            trans,
            emit,
            next_id,
        };
        hmm.prune_zeros();
        hmm.reindex();
        hmm
    }

    /// `q0 -> qn` with nothing in between.
    pub fn trivial() -> Self {
        Self::from_parts(
            vec![Self::INITIAL, Self::FINAL],
            BTreeMap::from([(Self::INITIAL, BTreeMap::from([(Self::FINAL, 1.0)]))]),
            BTreeMap::new(),
        )
    }

    fn reindex(&mut self) {
        self.ordinal = self
            .order
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect();
    }

    fn prune_zeros(&mut self) {
        for row in self.trans.values_mut() {
            row.retain(|_, p| *p != 0.0);
        }
        self.trans.retain(|_, row| !row.is_empty());
        for row in self.emit.values_mut() {
            row.retain(|_, p| *p != 0.0);
        }
    }

    /// States in topological order.
    pub fn states(&self) -> &[StateId] {
        &self.order
    }

    pub fn n_states(&self) -> usize {
        self.order.len()
    }

    pub fn contains(&self, q: StateId) -> bool {
        self.ordinal.contains_key(&q)
    }

    pub fn ordinal(&self, q: StateId) -> Option<usize> {
        self.ordinal.get(&q).copied()
    }

    pub fn is_sentinel(q: StateId) -> bool {
        q == Self::INITIAL || q == Self::FINAL
    }

    pub fn transition(&self, from: StateId, to: StateId) -> f64 {
        self.trans
            .get(&from)
            .and_then(|r| r.get(&to))
            .copied()
            .unwrap_or(0.0)
    }

    /// Outgoing transitions of `q`, ordered by target id.
    pub fn successors(&self, q: StateId) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.trans
            .get(&q)
            .into_iter()
            .flat_map(|r| r.iter().map(|(s, p)| (*s, *p)))
    }

    /// Incoming transitions of `q`, ordered by source id.
    pub fn predecessors(&self, q: StateId) -> Vec<(StateId, f64)> {
        self.trans
            .iter()
            .filter_map(|(s, row)| row.get(&q).map(|p| (*s, *p)))
            .collect()
    }

    pub fn emission(&self, q: StateId, o: &Emission) -> f64 {
        self.emit
            .get(&q)
            .and_then(|r| r.get(o))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn null_probability(&self, q: StateId) -> f64 {
        self.emission(q, &Emission::Null)
    }

    pub fn emissions(&self, q: StateId) -> impl Iterator<Item = (&Emission, f64)> + '_ {
        self.emit
            .get(&q)
            .into_iter()
            .flat_map(|r| r.iter().map(|(o, p)| (o, *p)))
    }

    /// Number of nonzero transitions, self-loops included.
    pub fn n_transitions(&self) -> usize {
        self.trans.values().map(BTreeMap::len).sum()
    }

    /// All symbols with nonzero emission probability, sentinels included.
    pub fn alphabet(&self) -> BTreeSet<Symbol> {
        self.emit
            .values()
            .flat_map(|r| r.keys())
            .filter_map(|o| o.symbol().cloned())
            .collect()
    }

    /// [`Hmm::from_parts`] that never hands out an id this model used.
    pub(crate) fn rebuilt(
        &self,
        order: Vec<StateId>,
        trans: BTreeMap<StateId, BTreeMap<StateId, f64>>,
        emit: BTreeMap<StateId, BTreeMap<Emission, f64>>,
    ) -> Hmm {
        let mut out = Hmm::from_parts(order, trans, emit);
        out.next_id = out.next_id.max(self.next_id);
        out
    }

    pub(crate) fn set_trans_row(&mut self, q: StateId, row: BTreeMap<StateId, f64>) {
        let row: BTreeMap<_, _> = row.into_iter().filter(|(_, p)| *p != 0.0).collect();
        if row.is_empty() {
            self.trans.remove(&q);
        } else {
            self.trans.insert(q, row);
        }
    }

    pub(crate) fn set_emit_row(&mut self, q: StateId, row: BTreeMap<Emission, f64>) {
        let row: BTreeMap<_, _> = row.into_iter().filter(|(_, p)| *p != 0.0).collect();
        self.emit.insert(q, row);
    }

    pub(crate) fn remove_transition(&mut self, from: StateId, to: StateId) {
        if let Some(row) = self.trans.get_mut(&from) {
            row.remove(&to);
            if row.is_empty() {
                self.trans.remove(&from);
            }
        }
    }

    /// Appends fresh states just before the final state; returns their ids.
    pub(crate) fn add_states(&mut self, count: usize) -> Vec<StateId> {
        let fin = self.order.pop().expect("final state present");
        let ids: Vec<StateId> = (0..count)
            .map(|k| StateId(self.next_id + k as u32))
            .collect();
        self.next_id += count as u32;
        self.order.extend(ids.iter().copied());
        self.order.push(fin);
        self.reindex();
        ids
    }

    /// Checks every structural and stochastic invariant; returns the first
    /// failure.
    pub fn validate(&self) -> Result<(), Violation> {
        if self.order.len() < 2
            || self.order[0] != Self::INITIAL
            || *self.order.last().unwrap() != Self::FINAL
        {
            return Err(Violation::SentinelPlacement);
        }
        if self.ordinal.len() != self.order.len() {
            let mut seen = BTreeSet::new();
            for s in &self.order {
                if !seen.insert(*s) {
                    return Err(Violation::DuplicateState(*s));
                }
            }
        }
        if let Some((to, _)) = self.successors(Self::FINAL).next() {
            return Err(Violation::FinalHasOutgoing(to));
        }
        for (from, row) in &self.trans {
            for (to, p) in row {
                let (Some(a), Some(b)) = (self.ordinal(*from), self.ordinal(*to)) else {
                    return Err(Violation::UnknownState(*from, *to));
                };
                if *to == Self::INITIAL {
                    return Err(Violation::InitialHasIncoming(*from));
                }
                if a > b {
                    return Err(Violation::BackwardEdge(*from, *to));
                }
                if !(p.is_finite() && *p >= 0.0 && *p <= 1.0 + ROW_TOLERANCE) {
                    return Err(Violation::BadProbability {
                        location: format!("transition {from}->{to}"),
                        value: *p,
                    });
                }
            }
        }
        for (q, row) in &self.emit {
            if !self.contains(*q) {
                return Err(Violation::UnknownEmissionState(*q));
            }
            for (o, p) in row {
                if !(p.is_finite() && *p >= 0.0 && *p <= 1.0 + ROW_TOLERANCE) {
                    return Err(Violation::BadProbability {
                        location: format!("emission {o} at state {q}"),
                        value: *p,
                    });
                }
            }
        }
        let start = Emission::Symbol(Symbol::start());
        let end = Emission::Symbol(Symbol::end());
        let initial_row: Vec<_> = self.emissions(Self::INITIAL).collect();
        if initial_row.len() != 1 || *initial_row[0].0 != start || initial_row[0].1 != 1.0 {
            return Err(Violation::InitialEmission);
        }
        let final_row: Vec<_> = self.emissions(Self::FINAL).collect();
        if final_row.len() != 1 || *final_row[0].0 != end || final_row[0].1 != 1.0 {
            return Err(Violation::FinalEmission);
        }
        for q in &self.order {
            if *q == Self::FINAL {
                continue;
            }
            let sum: f64 = self.successors(*q).map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Violation::TransitionRowSum { state: *q, sum });
            }
            if *q == Self::INITIAL {
                continue;
            }
            let mut sum = 0.0;
            for (o, p) in self.emissions(*q) {
                if *o == start || *o == end {
                    return Err(Violation::SentinelEmittedElsewhere(*q));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Violation::EmissionRowSum { state: *q, sum });
            }
        }
        Ok(())
    }

    /// States reachable from each state by one or more non-self edges.
    pub(crate) fn descendants(&self) -> BTreeMap<StateId, BTreeSet<StateId>> {
        let mut out: BTreeMap<StateId, BTreeSet<StateId>> = BTreeMap::new();
        for q in self.order.iter().rev() {
            let mut set = BTreeSet::new();
            for (c, _) in self.successors(*q) {
                if c != *q {
                    set.insert(c);
                    if let Some(d) = out.get(&c) {
                        set.extend(d.iter().copied());
                    }
                }
            }
            out.insert(*q, set);
        }
        out
    }

    /// Returns a copy with states relabelled into another valid topological
    /// order. `order` must be a permutation of [`Hmm::states`].
    pub fn with_order(&self, order: Vec<StateId>) -> Hmm {
        let mut out = self.clone();
        out.order = order;
        out.reindex();
        out
    }
}

/// Kahn's algorithm; ties resolved by `rank` (smaller first). Returns `None`
/// on a non-self cycle.
pub(crate) fn topological_order(
    states: &[StateId],
    trans: &BTreeMap<StateId, BTreeMap<StateId, f64>>,
    rank: &BTreeMap<StateId, usize>,
) -> Option<Vec<StateId>> {
    let members: BTreeSet<StateId> = states.iter().copied().collect();
    let mut indegree: BTreeMap<StateId, usize> = states.iter().map(|s| (*s, 0)).collect();
    for (from, row) in trans {
        for to in row.keys() {
            if from != to && members.contains(from) && members.contains(to) {
                *indegree.get_mut(to).unwrap() += 1;
            }
        }
    }
    let key = |s: StateId| (rank.get(&s).copied().unwrap_or(usize::MAX), s);
    let mut heap: BinaryHeap<Reverse<(usize, StateId)>> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(s, _)| Reverse(key(*s)))
        .collect();
    let mut out = Vec::with_capacity(states.len());
    while let Some(Reverse((_, s))) = heap.pop() {
        out.push(s);
        if let Some(row) = trans.get(&s) {
            for to in row.keys() {
                if *to != s {
                    if let Some(d) = indegree.get_mut(to) {
                        *d -= 1;
                        if *d == 0 {
                            heap.push(Reverse(key(*to)));
                        }
                    }
                }
            }
        }
    }
    (out.len() == states.len()).then_some(out)
}
