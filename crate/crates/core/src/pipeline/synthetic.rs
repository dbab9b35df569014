//! Known scripts to sample benchmark corpora from.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};
use crate::sample::sample_with;
use crate::symbol::{Emission, Symbol};

/// Successor indices with probabilities; `None` is the final state.
type Successors<'a> = &'a [(Option<usize>, f64)];

/// Builds a script from interior states `2..` listed as
/// `(label, [(successor index, probability)])`, where successor index
/// `None` is the final state and `Some(k)` is the `k`-th listed state.
/// The first listed state is entered from the initial state. Each state
/// emits its label, or nothing with probability `null`.
fn script(states: &[(&str, Successors)], null: f64) -> Result<Hmm> {
    if !(0.0..1.0).contains(&null) {
        return Err(Error::Config(format!(
            "null probability must lie in [0, 1), got {null}"
        )));
    }
    let id = |k: usize| StateId(k as u32 + 2);
    let mut order = vec![Hmm::INITIAL];
    order.extend((0..states.len()).map(id));
    order.push(Hmm::FINAL);
    let mut trans = BTreeMap::from([(Hmm::INITIAL, BTreeMap::from([(id(0), 1.0)]))]);
    let mut emit = BTreeMap::new();
    for (k, (label, next)) in states.iter().enumerate() {
        let row = next
            .iter()
            .map(|(s, p)| (s.map_or(Hmm::FINAL, id), *p))
            .collect();
        trans.insert(id(k), row);
        let mut e = BTreeMap::from([(Emission::Symbol(Symbol::new(label)?), 1.0 - null)]);
        if null > 0.0 {
            e.insert(Emission::Null, null);
        }
        emit.insert(id(k), e);
    }
    let hmm = Hmm::from_parts(order, trans, emit);
    hmm.validate()?;
    Ok(hmm)
}

/// A six-event script with one two-way branch:
/// `a → (b → c | d → e) → f`, taking the first branch with probability 0.6.
pub fn branching_script(null: f64) -> Result<Hmm> {
    script(
        &[
            ("a", &[(Some(1), 0.6), (Some(3), 0.4)]),
            ("b", &[(Some(2), 1.0)]),
            ("c", &[(Some(5), 1.0)]),
            ("d", &[(Some(4), 1.0)]),
            ("e", &[(Some(5), 1.0)]),
            ("f", &[(None, 1.0)]),
        ],
        null,
    )
}

/// A straight chain emitting `labels` in order.
pub fn chain_script(labels: &[&str], null: f64) -> Result<Hmm> {
    let rows: Vec<Vec<(Option<usize>, f64)>> = (0..labels.len())
        .map(|k| {
            vec![(
                if k + 1 < labels.len() {
                    Some(k + 1)
                } else {
                    None
                },
                1.0,
            )]
        })
        .collect();
    let states: Vec<(&str, Successors)> = labels
        .iter()
        .zip(&rows)
        .map(|(l, r)| (*l, r.as_slice()))
        .collect();
    if states.is_empty() {
        return Ok(Hmm::trivial());
    }
    script(&states, null)
}

/// A random Left-to-Right script over `n_states` interior states and
/// `alphabet` symbols `s0, s1, ...`. Each state jumps forward to one or two
/// later states (or the end), and emits one or two symbols plus nothing with
/// probability `null`.
pub fn random_script(seed: u64, n_states: usize, alphabet: usize, null: f64) -> Result<Hmm> {
    if n_states == 0 || alphabet == 0 {
        return Err(Error::Config(
            "random script needs at least one state and one symbol".into(),
        ));
    }
    if !(0.0..1.0).contains(&null) {
        return Err(Error::Config(format!(
            "null probability must lie in [0, 1), got {null}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |k: usize| StateId(k as u32 + 2);
    let mut order = vec![Hmm::INITIAL];
    order.extend((0..n_states).map(id));
    order.push(Hmm::FINAL);
    // Target k ∈ (from, n_states]; n_states stands for the final state.
    let target = |k: usize| if k == n_states { Hmm::FINAL } else { id(k) };
    let mut trans = BTreeMap::new();
    trans.insert(Hmm::INITIAL, BTreeMap::from([(id(0), 1.0)]));
    for k in 0..n_states {
        let mut row = BTreeMap::new();
        row.insert(target(k + 1), 1.0);
        if k + 2 <= n_states && rng.gen_bool(0.5) {
            let skip = rng.gen_range(k + 2..=n_states);
            let p: f64 = rng.gen_range(0.2..0.8);
            row.insert(target(k + 1), p);
            row.insert(target(skip), 1.0 - p);
        }
        trans.insert(id(k), row);
    }
    let mut emit = BTreeMap::new();
    for k in 0..n_states {
        let mut row = BTreeMap::new();
        let a = rng.gen_range(0..alphabet);
        let sym = |i: usize| Emission::Symbol(Symbol::new(&format!("s{i}")).expect("valid label"));
        if alphabet > 1 && rng.gen_bool(0.5) {
            let b = (a + rng.gen_range(1..alphabet)) % alphabet;
            let p: f64 = rng.gen_range(0.5..0.9);
            row.insert(sym(a), (1.0 - null) * p);
            row.insert(sym(b), (1.0 - null) * (1.0 - p));
        } else {
            row.insert(sym(a), 1.0 - null);
        }
        if null > 0.0 {
            row.insert(Emission::Null, null);
        }
        emit.insert(id(k), row);
    }
    let hmm = Hmm::from_parts(order, trans, emit);
    hmm.validate()?;
    Ok(hmm)
}

/// Samples `n` narratives with at least one event each; draws that come
/// out empty are discarded and redrawn.
pub fn generate(hmm: &Hmm, n: usize, seed: u64) -> Result<Corpus> {
    const MAX_STEPS: usize = 10_000;
    const MAX_EMPTY_IN_A_ROW: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut empty = 0;
    while out.len() < n {
        let s = sample_with(hmm, &mut rng, MAX_STEPS)?;
        if s.len() > 2 {
            out.push(s);
            empty = 0;
        } else {
            empty += 1;
            if empty == MAX_EMPTY_IN_A_ROW {
                return Err(Error::Config("model almost never emits an event".into()));
            }
        }
    }
    Corpus::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branching_paths() {
        let h = branching_script(0.0).unwrap();
        let c = generate(&h, 200, 3).unwrap();
        for s in &c {
            let body: Vec<&str> = s[1..s.len() - 1].iter().map(Symbol::as_str).collect();
            assert!(
                body == ["a", "b", "c", "f"] || body == ["a", "d", "e", "f"],
                "{body:?}"
            );
        }
        let upper = c.iter().filter(|s| s[2].as_str() == "b").count();
        assert!((upper as f64 / 200.0 - 0.6).abs() < 0.1);
    }

    #[test]
    fn generation_is_reproducible_and_nonempty() {
        let h = chain_script(&["x"], 0.5).unwrap();
        let a = generate(&h, 50, 9).unwrap();
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|s| s.len() == 3));
        assert_eq!(a.to_text(), generate(&h, 50, 9).unwrap().to_text());
    }

    #[test]
    fn random_scripts_are_valid() {
        for seed in 0..50 {
            let h = random_script(seed, 5, 4, 0.2).unwrap();
            assert_eq!(h.n_states(), 7);
            h.validate().unwrap();
        }
    }
}
