//! Deleting an edge and re-routing its evidence over null-emitting paths.

use std::collections::{BTreeMap, BTreeSet};

use super::merge::Changed;
use crate::counts::CountTable;
use crate::em::{m_step_rows, Smoothing};
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};
use crate::symbol::Emission;

/// Path weights between `qs` and `qe` that avoid the direct edge and pass
/// only through states able to emit nothing.
pub(crate) struct Reroute {
    /// States strictly between `qs` and `qe`, in topological order.
    pub interior: Vec<StateId>,
    /// Weight of leaving each state (after any self-loops); `qs` is 1.
    pub leave: BTreeMap<StateId, f64>,
    /// Weight of reaching `qe` from having just arrived at each state.
    pub finish: BTreeMap<StateId, f64>,
    /// Total weight of all alternative paths.
    pub z: f64,
}

fn self_loop(hmm: &Hmm, j: StateId) -> f64 {
    hmm.transition(j, j) * hmm.null_probability(j)
}

pub(crate) fn reroute(hmm: &Hmm, qs: StateId, qe: StateId) -> Option<Reroute> {
    let (os, oe) = (hmm.ordinal(qs)?, hmm.ordinal(qe)?);
    if os >= oe {
        return None;
    }
    let interior: Vec<StateId> = hmm.states()[os + 1..oe]
        .iter()
        .copied()
        .filter(|j| hmm.null_probability(*j) > 0.0 && self_loop(hmm, *j) < 1.0)
        .collect();

    let mut leave: BTreeMap<StateId, f64> = BTreeMap::from([(qs, 1.0)]);
    for &j in &interior {
        let lam = hmm.null_probability(j);
        let arrive: f64 = hmm
            .predecessors(j)
            .into_iter()
            .filter(|(p, _)| *p != j)
            .filter_map(|(p, t)| leave.get(&p).map(|a| a * t))
            .sum::<f64>()
            * lam;
        if arrive > 0.0 {
            leave.insert(j, arrive / (1.0 - self_loop(hmm, j)));
        }
    }
    let z: f64 = hmm
        .predecessors(qe)
        .into_iter()
        .filter(|(p, _)| *p != qs && *p != qe)
        .filter_map(|(p, t)| leave.get(&p).map(|a| a * t))
        .sum();

    let mut finish: BTreeMap<StateId, f64> = BTreeMap::from([(qe, 1.0)]);
    for &j in interior.iter().rev() {
        let mut b = 0.0;
        for (c, t) in hmm.successors(j) {
            if c == j {
                continue;
            }
            let w = if c == qe {
                1.0
            } else {
                hmm.null_probability(c)
            };
            if let Some(f) = finish.get(&c) {
                b += t * w * f;
            }
        }
        if b > 0.0 {
            finish.insert(j, b / (1.0 - self_loop(hmm, j)));
        }
    }
    Some(Reroute {
        interior,
        leave,
        finish,
        z,
    })
}

/// Whether `qs → qe` has an alternative route to take over its evidence.
pub(crate) fn deletable(hmm: &Hmm, qs: StateId, qe: StateId) -> bool {
    qs != qe && hmm.transition(qs, qe) > 0.0 && reroute(hmm, qs, qe).is_some_and(|r| r.z > 0.0)
}

/// Removes the edge `qs → qe`. Its count `N` is spread over the other
/// paths from `qs` to `qe` whose interior states emit nothing, in
/// proportion to each path's probability, so exactly `N` leaves `qs` and
/// `N` arrives at `qe`. The observations the edge emitted at `qe` are
/// shared out among the rerouted arrivals. Rows of `qs` and of the interior
/// states are re-estimated.
pub fn delete_edge(
    hmm: &Hmm,
    counts: &CountTable,
    qs: StateId,
    qe: StateId,
    smoothing: &Smoothing,
) -> Result<Changed> {
    if qs == qe {
        return Err(Error::InvalidDeletion(
            qs,
            qe,
            "self-loops are not deletion candidates",
        ));
    }
    if !(hmm.transition(qs, qe) > 0.0) {
        return Err(Error::InvalidDeletion(qs, qe, "no such transition"));
    }
    let r = reroute(hmm, qs, qe).ok_or(Error::InvalidDeletion(qs, qe, "unknown state"))?;
    if !(r.z > 0.0) {
        return Err(Error::NoRedistributionPath(qs, qe));
    }

    let mut counts = counts.clone();
    let (n, emitted) = counts.take_edge(qs, qe);
    let emitted_total: f64 = emitted.values().sum();
    let arrivals_at_end: Vec<(Emission, f64)> = if emitted_total > 0.0 {
        emitted
            .into_iter()
            .map(|(o, c)| (o, c / emitted_total))
            .collect()
    } else {
        Vec::new()
    };

    let mut sources = vec![qs];
    sources.extend(
        r.interior
            .iter()
            .copied()
            .filter(|j| r.leave.contains_key(j)),
    );
    for &x in &sources {
        let Some(&lx) = r.leave.get(&x) else { continue };
        for (c, t) in hmm.successors(x) {
            if x == qs && (c == qe || c == qs) {
                continue;
            }
            let Some(&fc) = r.finish.get(&c) else {
                continue;
            };
            let flow = if c == x {
                lx * self_loop(hmm, x) * fc / r.z * n
            } else {
                let w = if c == qe {
                    1.0
                } else {
                    hmm.null_probability(c)
                };
                lx * t * w * fc / r.z * n
            };
            if flow <= 0.0 {
                continue;
            }
            counts.add_transition(x, c, flow);
            if c == qe {
                for (o, share) in &arrivals_at_end {
                    counts.add_emission(x, c, o.clone(), flow * share);
                }
            } else {
                counts.add_emission(x, c, Emission::Null, flow);
            }
        }
    }
    for &j in &r.interior {
        if let (Some(l), Some(f)) = (r.leave.get(&j), r.finish.get(&j)) {
            let visits = l * f / r.z * n;
            if visits > 0.0 {
                counts.add_visits(j, visits);
            }
        }
    }

    let mut out = hmm.clone();
    out.remove_transition(qs, qe);
    let mut rows: BTreeSet<StateId> = BTreeSet::from([qs]);
    rows.extend(
        r.interior
            .iter()
            .copied()
            .filter(|j| r.leave.contains_key(j) && r.finish.contains_key(j)),
    );
    let out = m_step_rows(&out, &counts, &rows, smoothing);
    let mut touched = rows;
    touched.insert(qe);
    Ok(Changed {
        hmm: out,
        counts,
        touched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::fixtures::sym;

    fn id(k: u32) -> StateId {
        StateId(k)
    }

    /// q0 → s1 → qn plus the shortcut q0 → qn.
    fn diamond() -> (Hmm, CountTable) {
        let s1 = id(2);
        let h = Hmm::from_parts(
            vec![Hmm::INITIAL, s1, Hmm::FINAL],
            BTreeMap::from([
                (Hmm::INITIAL, BTreeMap::from([(s1, 0.5), (Hmm::FINAL, 0.5)])),
                (s1, BTreeMap::from([(Hmm::FINAL, 1.0)])),
            ]),
            BTreeMap::from([(s1, BTreeMap::from([(sym("a"), 0.5), (Emission::Null, 0.5)]))]),
        );
        let mut c = CountTable::new();
        let end = Emission::Symbol(crate::symbol::Symbol::end());
        c.add_visits(Hmm::INITIAL, 3.0);
        c.add_visits(s1, 1.0);
        c.add_visits(Hmm::FINAL, 3.0);
        c.add_transition(Hmm::INITIAL, s1, 1.0);
        c.add_emission(Hmm::INITIAL, s1, sym("a"), 1.0);
        c.add_transition(s1, Hmm::FINAL, 1.0);
        c.add_emission(s1, Hmm::FINAL, end.clone(), 1.0);
        c.add_transition(Hmm::INITIAL, Hmm::FINAL, 2.0);
        c.add_emission(Hmm::INITIAL, Hmm::FINAL, end, 2.0);
        (h, c)
    }

    #[test]
    fn single_path_takes_all_mass() {
        let (h, c) = diamond();
        let s1 = id(2);
        let d = delete_edge(&h, &c, Hmm::INITIAL, Hmm::FINAL, &Smoothing::default()).unwrap();
        d.hmm.validate().unwrap();
        assert!((d.counts.transition(Hmm::INITIAL, s1) - 3.0).abs() < 1e-12);
        assert!((d.counts.transition(s1, Hmm::FINAL) - 3.0).abs() < 1e-12);
        assert!((d.counts.visits(s1) - 3.0).abs() < 1e-12);
        assert!((d.counts.emission(Hmm::INITIAL, s1, &Emission::Null) - 2.0).abs() < 1e-12);
        assert_eq!(d.counts.transition(Hmm::INITIAL, Hmm::FINAL), 0.0);
        assert_eq!(d.hmm.transition(Hmm::INITIAL, Hmm::FINAL), 0.0);
        d.counts.check(1e-9).unwrap();
    }

    #[test]
    fn parallel_paths_split_by_probability() {
        // q0 → {s1 (0.2), s2 (0.1), qn (0.7)}, s1/s2 → qn, both emit λ
        // with probability 1, so the two paths weigh 0.2 and 0.1.
        let (s1, s2) = (id(2), id(3));
        let h = Hmm::from_parts(
            vec![Hmm::INITIAL, s1, s2, Hmm::FINAL],
            BTreeMap::from([
                (
                    Hmm::INITIAL,
                    BTreeMap::from([(s1, 0.2), (s2, 0.1), (Hmm::FINAL, 0.7)]),
                ),
                (s1, BTreeMap::from([(Hmm::FINAL, 1.0)])),
                (s2, BTreeMap::from([(Hmm::FINAL, 1.0)])),
            ]),
            BTreeMap::from([
                (s1, BTreeMap::from([(Emission::Null, 1.0)])),
                (s2, BTreeMap::from([(Emission::Null, 1.0)])),
            ]),
        );
        let mut c = CountTable::new();
        c.add_visits(Hmm::INITIAL, 3.0);
        c.add_transition(Hmm::INITIAL, Hmm::FINAL, 3.0);
        c.add_emission(
            Hmm::INITIAL,
            Hmm::FINAL,
            Emission::Symbol(crate::symbol::Symbol::end()),
            3.0,
        );
        c.add_visits(Hmm::FINAL, 3.0);
        let d = delete_edge(&h, &c, Hmm::INITIAL, Hmm::FINAL, &Smoothing::default()).unwrap();
        assert!((d.counts.transition(Hmm::INITIAL, s1) - 2.0).abs() < 1e-12);
        assert!((d.counts.transition(Hmm::INITIAL, s2) - 1.0).abs() < 1e-12);
        d.counts.check(1e-9).unwrap();
    }

    #[test]
    fn no_null_path_is_rejected() {
        let (mut h, c) = diamond();
        h.set_emit_row(id(2), BTreeMap::from([(sym("a"), 1.0)]));
        assert!(matches!(
            delete_edge(&h, &c, Hmm::INITIAL, Hmm::FINAL, &Smoothing::default()),
            Err(Error::NoRedistributionPath(..))
        ));
        assert!(!deletable(&h, Hmm::INITIAL, Hmm::FINAL));
    }

    #[test]
    fn self_loops_are_rerouted_geometrically() {
        // s1 has a null self-loop; flow through it must still conserve N.
        let (mut h, c) = diamond();
        let s1 = id(2);
        h.set_trans_row(s1, BTreeMap::from([(s1, 0.4), (Hmm::FINAL, 0.6)]));
        let d = delete_edge(&h, &c, Hmm::INITIAL, Hmm::FINAL, &Smoothing::default()).unwrap();
        let added_in = d.counts.transition(Hmm::INITIAL, s1) - 1.0;
        let added_out = d.counts.transition(s1, Hmm::FINAL) - 1.0;
        assert!((added_in - 2.0).abs() < 1e-12);
        assert!((added_out - 2.0).abs() < 1e-12);
        // expected self-loops per pass: ρ/(1−ρ) with ρ = 0.4·0.5
        let rho: f64 = 0.2;
        assert!((d.counts.transition(s1, s1) - 2.0 * rho / (1.0 - rho)).abs() < 1e-12);
        d.counts.check(1e-9).unwrap();
    }
}
