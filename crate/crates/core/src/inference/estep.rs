//! Corpus-level expected counts.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::posteriors::{sequence_counts, trellis};
use super::{CompiledHmm, Horizon, UNDERFLOW};
use crate::corpus::check_wrapped;
use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::hmm::Hmm;
use crate::symbol::Symbol;

/// Result of one E-step over a corpus.
#[derive(Clone, Debug)]
pub struct EStep {
    pub counts: CountTable,
    /// `Σ log P(s)` over reachable narratives.
    pub log_likelihood: f64,
    /// Indices of narratives with zero probability under the model.
    pub skipped: Vec<usize>,
    /// Number of narratives that contributed.
    pub reachable: usize,
}

/// Sums per-sequence posteriors over `narratives`. Identical narratives are
/// processed once and weighted by their multiplicity; unreachable ones are
/// skipped and reported.
pub fn expected_counts<S: AsRef<[Symbol]> + Sync>(
    hmm: &Hmm,
    narratives: &[S],
    horizon: Horizon,
) -> Result<EStep> {
    let mut groups: BTreeMap<&[Symbol], Vec<usize>> = BTreeMap::new();
    for (index, s) in narratives.iter().enumerate() {
        let s = s.as_ref();
        check_wrapped(s).map_err(|reason| Error::MalformedNarrative { index, reason })?;
        groups.entry(s).or_default().push(index);
    }
    let groups: Vec<(&[Symbol], Vec<usize>)> = groups.into_iter().collect();
    let c = CompiledHmm::new(hmm);

    let per_seq: Vec<Option<(f64, CountTable)>> = groups
        .par_iter()
        .map(|(s, _)| {
            let enc = c.encode(s).ok()?;
            let tr = trellis(&c, &enc, horizon.for_sequence(s.len(), hmm));
            if !(tr.z >= UNDERFLOW) {
                return None;
            }
            Some((tr.z, sequence_counts(&c, &enc, s, &tr)))
        })
        .collect();

    let mut out = EStep {
        counts: CountTable::new(),
        log_likelihood: 0.0,
        skipped: Vec::new(),
        reachable: 0,
    };
    for ((_, idx), r) in groups.iter().zip(per_seq) {
        match r {
            Some((z, counts)) => {
                let k = idx.len() as f64;
                out.counts.accumulate(&counts, k);
                out.log_likelihood += k * z.ln();
                out.reachable += idx.len();
            }
            None => out.skipped.extend(idx),
        }
    }
    out.skipped.sort_unstable();
    if !out.skipped.is_empty() {
        log::warn!(
            "{} narrative(s) unreachable under the model; skipped",
            out.skipped.len()
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::fixtures::{m0, sym};
    use crate::hmm::StateId;
    use crate::symbol::Emission;

    const S1: StateId = StateId(2);

    #[test]
    fn single_observed_narrative() {
        let e = expected_counts(&m0(), &[crate::symbol::seq(&["a"])], Horizon::default()).unwrap();
        assert!((e.counts.visits(S1) - 1.0).abs() < 1e-12);
        assert!((e.counts.transition(Hmm::INITIAL, S1) - 1.0).abs() < 1e-12);
        assert!((e.counts.emission(Hmm::INITIAL, S1, &sym("a")) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_narratives_sum() {
        let corpus = [crate::symbol::seq(&["a"]), crate::symbol::seq(&[])];
        let e = expected_counts(&m0(), &corpus, Horizon::default()).unwrap();
        assert!((e.counts.visits(S1) - 2.0).abs() < 1e-12);
        assert!((e.counts.emission(Hmm::INITIAL, S1, &Emission::Null) - 1.0).abs() < 1e-12);
        assert!((e.log_likelihood - (0.7f64.ln() + 0.3f64.ln())).abs() < 1e-12);
        e.counts.check(1e-9).unwrap();
    }

    #[test]
    fn empty_corpus_gives_zero_table() {
        let none: [Vec<Symbol>; 0] = [];
        let e = expected_counts(&m0(), &none, Horizon::default()).unwrap();
        assert!(e.counts.is_zero());
        assert_eq!(e.reachable, 0);
    }

    #[test]
    fn unreachable_narratives_are_skipped() {
        let corpus = [
            crate::symbol::seq(&["zz"]),
            crate::symbol::seq(&["a"]),
            crate::symbol::seq(&["zz"]),
        ];
        let e = expected_counts(&m0(), &corpus, Horizon::default()).unwrap();
        assert_eq!(e.skipped, vec![0, 2]);
        assert_eq!(e.reachable, 1);
    }

    #[test]
    fn duplicates_weigh_by_multiplicity() {
        let corpus = vec![crate::symbol::seq(&["a"]); 7];
        let e = expected_counts(&m0(), &corpus, Horizon::default()).unwrap();
        assert!((e.counts.visits(S1) - 7.0).abs() < 1e-12);
    }
}
