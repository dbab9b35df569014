mod common;

use proptest::prelude::*;
use script_hmm::em::{em_fit, m_step, EmConfig, Smoothing};
use script_hmm::inference::{expected_counts, Horizon};
use script_hmm::pipeline::{generate, random_script};
use script_hmm::pta::build_pta;
use script_hmm::{Emission, Hmm, Symbol};

fn row_sums_ok(h: &Hmm) -> bool {
    h.states().iter().filter(|q| **q != Hmm::FINAL).all(|&q| {
        let t: f64 = h.successors(q).map(|(_, p)| p).sum();
        let e: f64 = h.emissions(q).map(|(_, p)| p).sum();
        (t - 1.0).abs() <= 1e-12 && (e - 1.0).abs() <= 1e-12
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn objective_never_decreases(seed in any::<u64>(), pc in 0.1f64..2.0) {
        let gen = random_script(seed, 4, 3, 0.2).unwrap();
        let corpus = generate(&gen, 40, seed).unwrap();
        let (pta, counts) = build_pta(corpus.narratives()).unwrap();
        let smoothing = Smoothing { pseudocount: pc, ..Smoothing::default() };
        let start = m_step(&pta, &counts, &smoothing);
        let cfg = EmConfig { smoothing, max_iters: 30, ..EmConfig::default() };
        let fit = em_fit(&start, corpus.narratives(), &cfg).unwrap();
        for w in fit.objective.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-8, "{} -> {}", w[0], w[1]);
        }
        prop_assert!(row_sums_ok(&fit.hmm));
        prop_assert!(fit.hmm.validate().is_ok());
        prop_assert_eq!(fit.hmm.emission(Hmm::INITIAL, &Emission::Symbol(Symbol::start())), 1.0);
        prop_assert_eq!(fit.hmm.emission(Hmm::FINAL, &Emission::Symbol(Symbol::end())), 1.0);
    }

    #[test]
    fn m_step_rows_are_stochastic(seed in any::<u64>(), pc in 0.0f64..3.0, null in any::<bool>()) {
        let gen = random_script(seed, 4, 3, 0.2).unwrap();
        let corpus = generate(&gen, 20, seed).unwrap();
        let counts = expected_counts(&gen, corpus.narratives(), Horizon::default()).unwrap().counts;
        let h = m_step(&gen, &counts, &Smoothing { pseudocount: pc, null_emissions: null, vocabulary: None });
        prop_assert!(row_sums_ok(&h));
        if !null {
            prop_assert!(h.states().iter().all(|q| h.emission(*q, &Emission::Null) == 0.0));
        }
    }
}
