mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use script_hmm::em::{m_step, Smoothing};
use script_hmm::inference::{sequence_likelihood, Horizon};
use script_hmm::pipeline::{generate, random_script};
use script_hmm::pta::build_pta;
use script_hmm::structure::{
    delete_edge, enumerate_candidates, learn, merge_states, Pruning, SearchConfig, StructureChange,
};
use script_hmm::{CountTable, Hmm, StateId, Symbol};

fn raw() -> Smoothing {
    Smoothing {
        pseudocount: 0.0,
        null_emissions: false,
        vocabulary: None,
    }
}

fn small_corpus() -> impl Strategy<Value = Vec<Vec<Symbol>>> {
    let body = prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 0..=5);
    prop::collection::vec(body, 1..=5).prop_map(|bodies| {
        bodies
            .into_iter()
            .map(|b| {
                let mut s = vec![Symbol::start()];
                s.extend(b.iter().map(|x| sym(x)));
                s.push(Symbol::end());
                s
            })
            .collect()
    })
}

fn out_of(c: &CountTable, q: StateId) -> f64 {
    c.outgoing(q).map(|(_, x)| x).sum()
}

fn into(c: &CountTable, q: StateId) -> f64 {
    c.transitions()
        .filter(|(_, b, _)| *b == q)
        .map(|(_, _, x)| x)
        .sum()
}

/// A PTA fit with smoothing so that null emissions are available.
fn smoothed_pta(seed: u64, n: usize) -> (Hmm, CountTable) {
    let gen = random_script(seed, 4, 3, 0.2).unwrap();
    let corpus = generate(&gen, n, seed).unwrap();
    let (pta, counts) = build_pta(corpus.narratives()).unwrap();
    (m_step(&pta, &counts, &Smoothing::default()), counts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pta_reproduces_empirical_frequencies(corpus in small_corpus()) {
        let (pta, counts) = build_pta(&corpus).unwrap();
        let h = m_step(&pta, &counts, &raw());
        prop_assert!(h.validate().is_ok());
        let mut freq: BTreeMap<&Vec<Symbol>, usize> = BTreeMap::new();
        for s in &corpus {
            *freq.entry(s).or_insert(0) += 1;
        }
        for (s, c) in freq {
            let t = Horizon::default().for_sequence(s.len(), &h);
            let p = prob(sequence_likelihood(&h, s, t));
            prop_assert!((p - c as f64 / corpus.len() as f64).abs() < 1e-12, "{s:?}: {p}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn merges_conserve_counts(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (h, counts) = smoothed_pta(seed, 8);
        let merges: Vec<(StateId, StateId)> = enumerate_candidates(&h, Pruning::AllPairs)
            .into_iter()
            .filter_map(|c| match c { StructureChange::Merge(p, q) => Some((p, q)), _ => None })
            .collect();
        prop_assume!(!merges.is_empty());
        let (p, q) = *pick.get(&merges);
        let out = merge_states(&h, &counts, p, q, &Smoothing::default()).unwrap();
        prop_assert!(out.hmm.validate().is_ok());
        prop_assert!(!out.hmm.contains(q));
        prop_assert!((out.counts.total_visits() - counts.total_visits()).abs() <= 1e-9);
        prop_assert!((out.counts.total_transitions() - counts.total_transitions()).abs() <= 1e-9);
        prop_assert!(out.counts.check(1e-9).is_ok());
    }

    #[test]
    fn deletions_conserve_rerouted_mass(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (h, counts) = smoothed_pta(seed, 8);
        let edges: Vec<(StateId, StateId)> = enumerate_candidates(&h, Pruning::AllPairs)
            .into_iter()
            .filter_map(|c| match c { StructureChange::DeleteEdge(a, b) => Some((a, b)), _ => None })
            .collect();
        prop_assume!(!edges.is_empty());
        let (a, b) = *pick.get(&edges);
        let n = counts.transition(a, b);
        let out = delete_edge(&h, &counts, a, b, &Smoothing::default()).unwrap();
        prop_assert!(out.hmm.validate().is_ok());
        prop_assert_eq!(out.hmm.transition(a, b), 0.0);
        prop_assert_eq!(out.counts.transition(a, b), 0.0);
        // the mass N that used the edge now leaves `a` and reaches `b` by other edges
        prop_assert!((out_of(&out.counts, a) - out_of(&counts, a)).abs() <= 1e-9);
        prop_assert!((into(&out.counts, b) - into(&counts, b)).abs() <= 1e-9);
        prop_assert!(out.counts.total_transitions() >= counts.total_transitions() + n - 1e-9);
        prop_assert!(out.counts.check(1e-9).is_ok());
    }
}

#[test]
fn search_scores_rise_and_models_stay_acyclic() {
    for seed in 0..6 {
        let gen = random_script(seed, 4, 3, 0.15).unwrap();
        let corpus = generate(&gen, 30, seed).unwrap();
        let cfg = SearchConfig {
            batch_size: 10,
            ..SearchConfig::default()
        };
        let l = learn(corpus.narratives(), &cfg).unwrap();
        l.hmm.validate().unwrap();
        for trace in &l.scores {
            for w in trace.windows(2) {
                assert!(w[1] > w[0], "seed {seed}: {} -> {}", w[0], w[1]);
            }
        }
        // every training narrative remains possible
        for s in &corpus {
            let t = Horizon::default().for_sequence(s.len(), &l.hmm);
            assert!(sequence_likelihood(&l.hmm, s, t).is_reachable());
        }
    }
}

#[test]
fn search_is_deterministic() {
    let gen = random_script(11, 4, 3, 0.15).unwrap();
    let corpus = generate(&gen, 20, 5).unwrap();
    let cfg = SearchConfig::default();
    let a = learn(corpus.narratives(), &cfg).unwrap();
    let b = learn(corpus.narratives(), &cfg).unwrap();
    assert_eq!(
        script_hmm::model_file::to_text(&a.hmm, &a.counts),
        script_hmm::model_file::to_text(&b.hmm, &b.counts)
    );
}
