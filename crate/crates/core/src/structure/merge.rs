//! Merging two states into one.

use std::collections::{BTreeMap, BTreeSet};

use crate::counts::CountTable;
use crate::em::{m_step_rows, Smoothing};
use crate::error::{Error, Result};
use crate::hmm::{topological_order, Hmm, StateId};

/// Whether merging `p` and `q` would close a cycle through some other
/// state, i.e. one reaches the other along a path of length two or more.
pub(crate) fn merge_creates_cycle(
    hmm: &Hmm,
    descendants: &BTreeMap<StateId, BTreeSet<StateId>>,
    p: StateId,
    q: StateId,
) -> bool {
    let via = |a: StateId, b: StateId| {
        hmm.successors(a)
            .any(|(x, _)| x != a && x != b && descendants.get(&x).is_some_and(|d| d.contains(&b)))
    };
    via(p, q) || via(q, p)
}

/// Result of a structure change: the new model and counts, plus the states
/// whose rows (or count terms) may differ from before.
#[derive(Clone, Debug)]
pub struct Changed {
    pub hmm: Hmm,
    pub counts: CountTable,
    pub touched: BTreeSet<StateId>,
}

/// Replaces `p` and `q` by a single state that keeps the id of whichever
/// comes first in the topological order. Counts of the two states are
/// added, an edge between them becomes a self-loop, and the rows of the
/// merged state and of its parents are re-estimated from the new counts;
/// every other row is kept.
pub fn merge_states(
    hmm: &Hmm,
    counts: &CountTable,
    p: StateId,
    q: StateId,
    smoothing: &Smoothing,
) -> Result<Changed> {
    if p == q {
        return Err(Error::InvalidMerge(
            p,
            q,
            "a state cannot merge with itself",
        ));
    }
    let (Some(op), Some(oq)) = (hmm.ordinal(p), hmm.ordinal(q)) else {
        return Err(Error::InvalidMerge(p, q, "unknown state"));
    };
    if Hmm::is_sentinel(p) || Hmm::is_sentinel(q) {
        return Err(Error::InvalidMerge(p, q, "sentinel states never merge"));
    }
    let (keep, drop) = if op < oq { (p, q) } else { (q, p) };
    let map = |s: StateId| if s == drop { keep } else { s };

    let mut parents: BTreeSet<StateId> = BTreeSet::new();
    for (s, _) in hmm.predecessors(p).into_iter().chain(hmm.predecessors(q)) {
        parents.insert(map(s));
    }

    let mut trans: BTreeMap<StateId, BTreeMap<StateId, f64>> = BTreeMap::new();
    for &s in hmm.states() {
        for (t, pr) in hmm.successors(s) {
            *trans
                .entry(map(s))
                .or_default()
                .entry(map(t))
                .or_insert(0.0) += pr;
        }
    }
    let mut emit: BTreeMap<StateId, BTreeMap<_, f64>> = BTreeMap::new();
    for &s in hmm.states() {
        for (o, pr) in hmm.emissions(s) {
            *emit
                .entry(map(s))
                .or_default()
                .entry(o.clone())
                .or_insert(0.0) += pr;
        }
    }
    let rank: BTreeMap<StateId, usize> = hmm
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, i))
        .collect();
    let states: Vec<StateId> = hmm
        .states()
        .iter()
        .copied()
        .filter(|s| *s != drop)
        .collect();
    let order = topological_order(&states, &trans, &rank).ok_or(Error::InvalidMerge(
        p,
        q,
        "merge would create a cycle",
    ))?;
    let merged = hmm.rebuilt(order, trans, emit);

    let counts = counts.remap(map);
    let mut rows = parents.clone();
    rows.insert(keep);
    let merged = m_step_rows(&merged, &counts, &rows, smoothing);

    let mut touched = rows;
    touched.insert(drop);
    Ok(Changed {
        hmm: merged,
        counts,
        touched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::fixtures::sym;
    use crate::pta::build_pta;
    use crate::symbol::seq;

    fn no_smoothing() -> Smoothing {
        Smoothing {
            pseudocount: 0.0,
            ..Smoothing::default()
        }
    }

    #[test]
    fn merging_branch_tails() {
        let (h, c) = build_pta(&[seq(&["a", "b"]), seq(&["a", "c"])]).unwrap();
        let (sb, sc) = (h.states()[2], h.states()[3]);
        let m = merge_states(&h, &c, sb, sc, &no_smoothing()).unwrap();
        m.hmm.validate().unwrap();
        assert_eq!(m.hmm.n_states(), 4);
        assert_eq!(m.counts.visits(sb), 2.0);
        assert!((m.hmm.emission(sb, &sym("b")) - 0.5).abs() < 1e-12);
        assert!((m.hmm.emission(sb, &sym("c")) - 0.5).abs() < 1e-12);
        let sa = h.states()[1];
        assert_eq!(m.hmm.transition(sa, sb), 1.0);
        assert_eq!(m.counts.total_visits(), c.total_visits());
        assert_eq!(m.counts.total_transitions(), c.total_transitions());
    }

    #[test]
    fn edge_between_merged_states_becomes_self_loop() {
        let (h, c) = build_pta(&[seq(&["a", "a"])]).unwrap();
        let (s1, s2) = (h.states()[1], h.states()[2]);
        let m = merge_states(&h, &c, s1, s2, &Smoothing::default()).unwrap();
        m.hmm.validate().unwrap();
        assert_eq!(m.counts.transition(s1, s1), 1.0);
        assert_eq!(m.counts.visits(s1), 2.0);
        assert!(m.hmm.transition(s1, s1) > 0.0);
    }

    #[test]
    fn cycles_and_sentinels_are_rejected() {
        let (h, c) = build_pta(&[seq(&["a", "b", "c"])]).unwrap();
        let (s1, s3) = (h.states()[1], h.states()[3]);
        assert!(matches!(
            merge_states(&h, &c, s1, s3, &Smoothing::default()),
            Err(Error::InvalidMerge(..))
        ));
        assert!(merge_states(&h, &c, Hmm::INITIAL, s1, &Smoothing::default()).is_err());
        assert!(merge_states(&h, &c, s1, s1, &Smoothing::default()).is_err());
    }
}
