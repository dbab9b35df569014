//! Expected (or raw) counts of state visits, transitions and
//! transition/observation pairs.

use std::collections::BTreeMap;

use crate::hmm::StateId;
use crate::symbol::Emission;

/// `visits[q] = C(q)`, `trans[q][q'] = C(q→q')` and
/// `emit[q'][(q, o)] = C(q, q'↑o)`. Emission counts are grouped by the
/// arrival state because that is how the M-step and the likelihood
/// consume them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CountTable {
    visits: BTreeMap<StateId, f64>,
    trans: BTreeMap<StateId, BTreeMap<StateId, f64>>,
    emit: BTreeMap<StateId, BTreeMap<(StateId, Emission), f64>>,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn visits(&self, q: StateId) -> f64 {
        self.visits.get(&q).copied().unwrap_or(0.0)
    }

    pub fn transition(&self, from: StateId, to: StateId) -> f64 {
        self.trans
            .get(&from)
            .and_then(|r| r.get(&to))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn emission(&self, from: StateId, to: StateId, o: &Emission) -> f64 {
        self.emit
            .get(&to)
            .and_then(|r| r.get(&(from, o.clone())))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn add_visits(&mut self, q: StateId, c: f64) {
        *self.visits.entry(q).or_insert(0.0) += c;
    }

    pub fn add_transition(&mut self, from: StateId, to: StateId, c: f64) {
        *self.trans.entry(from).or_default().entry(to).or_insert(0.0) += c;
    }

    pub fn add_emission(&mut self, from: StateId, to: StateId, o: Emission, c: f64) {
        *self
            .emit
            .entry(to)
            .or_default()
            .entry((from, o))
            .or_insert(0.0) += c;
    }

    /// `(q', C(q→q'))` for every recorded successor of `q`.
    pub fn outgoing(&self, q: StateId) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.trans
            .get(&q)
            .into_iter()
            .flat_map(|r| r.iter().map(|(s, c)| (*s, *c)))
    }

    /// `((q, o), C(q, q'↑o))` for every emission recorded on arrival at `q'`.
    pub fn arrivals(&self, q: StateId) -> impl Iterator<Item = (&(StateId, Emission), f64)> + '_ {
        self.emit
            .get(&q)
            .into_iter()
            .flat_map(|r| r.iter().map(|(k, c)| (k, *c)))
    }

    /// `Σ_q C(q, q'↑o)` per symbol for arrival state `q'`.
    pub fn emission_totals(&self, q: StateId) -> BTreeMap<Emission, f64> {
        let mut out = BTreeMap::new();
        for ((_, o), c) in self.arrivals(q) {
            *out.entry(o.clone()).or_insert(0.0) += c;
        }
        out
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.visits.keys().copied()
    }

    /// Every `(q, q', C(q→q'))`.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, StateId, f64)> + '_ {
        self.trans
            .iter()
            .flat_map(|(a, r)| r.iter().map(move |(b, c)| (*a, *b, *c)))
    }

    /// Every `(q, q', o, C(q, q'↑o))`.
    pub fn emissions(&self) -> impl Iterator<Item = (StateId, StateId, &Emission, f64)> + '_ {
        self.emit
            .iter()
            .flat_map(|(to, r)| r.iter().map(move |((from, o), c)| (*from, *to, o, *c)))
    }

    pub fn total_visits(&self) -> f64 {
        self.visits.values().sum()
    }

    pub fn total_transitions(&self) -> f64 {
        self.trans.values().flat_map(|r| r.values()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.visits.values().all(|c| *c == 0.0)
            && self
                .trans
                .values()
                .flat_map(|r| r.values())
                .all(|c| *c == 0.0)
            && self
                .emit
                .values()
                .flat_map(|r| r.values())
                .all(|c| *c == 0.0)
    }

    /// Adds `weight * other` into `self`.
    pub fn accumulate(&mut self, other: &CountTable, weight: f64) {
        for (q, c) in &other.visits {
            self.add_visits(*q, weight * c);
        }
        for (a, b, c) in other.transitions() {
            self.add_transition(a, b, weight * c);
        }
        for (a, b, o, c) in other.emissions() {
            self.add_emission(a, b, o.clone(), weight * c);
        }
    }

    /// Re-keys every entry through `map` (used when two states merge).
    pub(crate) fn remap(&self, map: impl Fn(StateId) -> StateId) -> CountTable {
        let mut out = CountTable::new();
        for (q, c) in &self.visits {
            out.add_visits(map(*q), *c);
        }
        for (a, b, c) in self.transitions() {
            out.add_transition(map(a), map(b), c);
        }
        for (a, b, o, c) in self.emissions() {
            out.add_emission(map(a), map(b), o.clone(), c);
        }
        out
    }

    /// Drops the edge and all of its emission entries; returns them.
    pub(crate) fn take_edge(
        &mut self,
        from: StateId,
        to: StateId,
    ) -> (f64, BTreeMap<Emission, f64>) {
        let n = self
            .trans
            .get_mut(&from)
            .and_then(|r| r.remove(&to))
            .unwrap_or(0.0);
        let mut emitted = BTreeMap::new();
        if let Some(r) = self.emit.get_mut(&to) {
            let keys: Vec<_> = r.keys().filter(|(f, _)| *f == from).cloned().collect();
            for k in keys {
                let c = r.remove(&k).unwrap();
                emitted.insert(k.1, c);
            }
        }
        (n, emitted)
    }

    /// Checks nonnegativity, `Σ_o C(q,q'↑o) = C(q→q')` and
    /// `Σ_q' C(q→q') <= C(q)` within `tol`.
    pub fn check(&self, tol: f64) -> Result<(), String> {
        for (q, c) in &self.visits {
            if *c < -tol || !c.is_finite() {
                return Err(format!("C({q}) = {c}"));
            }
        }
        for (a, b, c) in self.transitions() {
            if c < -tol || !c.is_finite() {
                return Err(format!("C({a}->{b}) = {c}"));
            }
        }
        let mut per_edge: BTreeMap<(StateId, StateId), f64> = BTreeMap::new();
        for (a, b, o, c) in self.emissions() {
            if c < -tol || !c.is_finite() {
                return Err(format!("C({a},{b}^{o}) = {c}"));
            }
            *per_edge.entry((a, b)).or_insert(0.0) += c;
        }
        for (a, b, c) in self.transitions() {
            let e = per_edge.remove(&(a, b)).unwrap_or(0.0);
            if (e - c).abs() > tol {
                return Err(format!(
                    "emissions on {a}->{b} sum to {e}, transition count is {c}"
                ));
            }
        }
        if let Some(((a, b), e)) = per_edge.into_iter().find(|(_, e)| e.abs() > tol) {
            return Err(format!(
                "emissions on {a}->{b} sum to {e} without a transition count"
            ));
        }
        for (q, row) in &self.trans {
            let out: f64 = row.values().sum();
            if out > self.visits(*q) + tol {
                return Err(format!(
                    "outgoing count {out} of {q} exceeds visits {}",
                    self.visits(*q)
                ));
            }
        }
        Ok(())
    }
}
