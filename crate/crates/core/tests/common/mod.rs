//! Brute-force oracles and random fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use script_hmm::{CountTable, Emission, Hmm, StateId, Symbol};

pub fn sym(s: &str) -> Symbol {
    Symbol::new(s).unwrap()
}

pub fn alphabet(k: usize) -> Vec<Symbol> {
    (0..k).map(|i| sym(&format!("s{i}"))).collect()
}

/// A random valid Left-to-Right model with `interior` states between the
/// sentinels. States with a null emission never get a self-loop, so every
/// path has a bounded number of null steps.
pub fn random_hmm(seed: u64, interior: usize, symbols: usize, max_null: f64) -> Hmm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<StateId> = (0..interior).map(|k| StateId(k as u32 + 2)).collect();
    let mut order = vec![Hmm::INITIAL];
    order.extend(&ids);
    order.push(Hmm::FINAL);
    let alpha = alphabet(symbols);

    let mut emit = BTreeMap::new();
    let mut has_null = BTreeMap::new();
    for &q in &ids {
        let mut row: BTreeMap<Emission, f64> = BTreeMap::new();
        let null = if rng.gen_bool(0.5) {
            rng.gen_range(0.05..=max_null.max(0.05))
        } else {
            0.0
        };
        let chosen: Vec<&Symbol> = alpha.iter().filter(|_| rng.gen_bool(0.6)).collect();
        let chosen = if chosen.is_empty() {
            vec![&alpha[rng.gen_range(0..symbols)]]
        } else {
            chosen
        };
        let w: Vec<f64> = chosen.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = w.iter().sum();
        for (s, x) in chosen.iter().zip(&w) {
            row.insert(Emission::Symbol((*s).clone()), (1.0 - null) * x / total);
        }
        if null > 0.0 {
            row.insert(Emission::Null, null);
        }
        has_null.insert(q, null > 0.0);
        emit.insert(q, row);
    }

    let mut trans = BTreeMap::new();
    for (k, &q) in order.iter().enumerate().take(order.len() - 1) {
        let later = &order[k + 1..];
        let mut targets: Vec<StateId> = later
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        if targets.is_empty() {
            targets.push(later[rng.gen_range(0..later.len())]);
        }
        if q != Hmm::INITIAL && !has_null[&q] && rng.gen_bool(0.3) {
            targets.push(q);
        }
        let w: Vec<f64> = targets.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = w.iter().sum();
        trans.insert(
            q,
            targets
                .iter()
                .zip(&w)
                .map(|(t, x)| (*t, x / total))
                .collect(),
        );
    }
    let h = Hmm::from_parts(order, trans, emit);
    h.validate().unwrap();
    h
}

/// All sentinel-wrapped sequences over `alpha` with at most `max_len`
/// interior symbols.
pub fn all_sequences(alpha: &[Symbol], max_len: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for a in alpha {
                let mut t: Vec<Symbol> = s.clone();
                t.push(a.clone());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.into_iter()
        .map(|b| {
            let mut s = vec![Symbol::start()];
            s.extend(b);
            s.push(Symbol::end());
            s
        })
        .collect()
}

/// Probability of `obs` and its posterior expected counts, by enumerating
/// every state path of at most `max_steps` transitions together with every
/// way of placing null emissions along it.
/// Visited states, `(from, to, emission)` per step, and probability.
type Path = (Vec<StateId>, Vec<(StateId, StateId, Emission)>, f64);

pub fn brute_force(hmm: &Hmm, obs: &[Symbol], max_steps: usize) -> (f64, CountTable) {
    struct Walk<'a> {
        hmm: &'a Hmm,
        obs: &'a [Symbol],
        max_steps: usize,
        paths: Vec<Path>,
    }
    fn go(
        w: &mut Walk,
        q: StateId,
        i: usize,
        p: f64,
        states: &mut Vec<StateId>,
        steps: &mut Vec<(StateId, StateId, Emission)>,
    ) {
        if q == Hmm::FINAL {
            if i + 1 == w.obs.len() {
                w.paths.push((states.clone(), steps.clone(), p));
            }
            return;
        }
        if steps.len() == w.max_steps {
            return;
        }
        let succ: Vec<(StateId, f64)> = w.hmm.successors(q).collect();
        for (c, tp) in succ {
            let em: Vec<(Emission, f64)> =
                w.hmm.emissions(c).map(|(o, x)| (o.clone(), x)).collect();
            for (o, ep) in em {
                let next_i = match &o {
                    Emission::Null => i,
                    Emission::Symbol(s) if i + 1 < w.obs.len() && *s == w.obs[i + 1] => i + 1,
                    Emission::Symbol(_) => continue,
                };
                states.push(c);
                steps.push((q, c, o));
                go(w, c, next_i, p * tp * ep, states, steps);
                states.pop();
                steps.pop();
            }
        }
    }
    let mut w = Walk {
        hmm,
        obs,
        max_steps,
        paths: Vec::new(),
    };
    go(
        &mut w,
        Hmm::INITIAL,
        0,
        1.0,
        &mut vec![Hmm::INITIAL],
        &mut Vec::new(),
    );
    let z: f64 = w.paths.iter().map(|(_, _, p)| p).sum();
    let mut counts = CountTable::new();
    if z > 0.0 {
        for (states, steps, p) in &w.paths {
            let weight = p / z;
            for q in states {
                counts.add_visits(*q, weight);
            }
            for (a, b, o) in steps {
                counts.add_transition(*a, *b, weight);
                counts.add_emission(*a, *b, o.clone(), weight);
            }
        }
    }
    (z, counts)
}

/// Largest absolute difference between two count tables over every entry
/// either of them has.
pub fn count_distance(a: &CountTable, b: &CountTable) -> f64 {
    let mut d: f64 = 0.0;
    for t in [a, b] {
        for q in t.states() {
            d = d.max((a.visits(q) - b.visits(q)).abs());
        }
        for (x, y, _) in t.transitions() {
            d = d.max((a.transition(x, y) - b.transition(x, y)).abs());
        }
        for (x, y, o, _) in t.emissions() {
            d = d.max((a.emission(x, y, o) - b.emission(x, y, o)).abs());
        }
    }
    d
}

/// `hmm` with an extra edge `from → to` taking probability `p` from the
/// rest of `from`'s row.
pub fn with_extra_edge(hmm: &Hmm, from: StateId, to: StateId, p: f64) -> Hmm {
    let mut trans: BTreeMap<StateId, BTreeMap<StateId, f64>> = BTreeMap::new();
    for &q in hmm.states() {
        let mut row: BTreeMap<StateId, f64> = hmm.successors(q).collect();
        if q == from {
            row.values_mut().for_each(|x| *x *= 1.0 - p);
            *row.entry(to).or_insert(0.0) += p;
        }
        if !row.is_empty() {
            trans.insert(q, row);
        }
    }
    let emit = hmm
        .states()
        .iter()
        .map(|&q| (q, hmm.emissions(q).map(|(o, x)| (o.clone(), x)).collect()))
        .collect();
    Hmm::from_parts(hmm.states().to_vec(), trans, emit)
}

/// Topological orders of `hmm`'s states (self-loops ignored) that keep
/// the sentinels at the ends, up to `limit` of them.
pub fn topological_orders(hmm: &Hmm, limit: usize) -> Vec<Vec<StateId>> {
    fn rec(hmm: &Hmm, placed: &mut Vec<StateId>, out: &mut Vec<Vec<StateId>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if placed.len() == hmm.n_states() {
            out.push(placed.clone());
            return;
        }
        for &q in hmm.states() {
            if placed.contains(&q) || (q == Hmm::FINAL && placed.len() + 1 < hmm.n_states()) {
                continue;
            }
            let ready = hmm
                .predecessors(q)
                .iter()
                .all(|(p, _)| *p == q || placed.contains(p));
            if ready {
                placed.push(q);
                rec(hmm, placed, out, limit);
                placed.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(hmm, &mut vec![Hmm::INITIAL], &mut out, limit);
    out
}

pub fn prob(lp: script_hmm::inference::LogProb) -> f64 {
    lp.value().map_or(0.0, f64::exp)
}
