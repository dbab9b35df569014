//! Filling a single missing event.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::{CompiledHmm, Horizon, LogProb};
use crate::error::{Error, Result};
use crate::hmm::Hmm;
use crate::symbol::Symbol;

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub symbol: Symbol,
    pub log_lik: LogProb,
}

/// Ranks every vocabulary symbol by the likelihood of `gapped` with that
/// symbol inserted at position `gap`. `vocabulary` maps each candidate to
/// its training frequency, which breaks ties (higher first), followed by
/// lexicographic order.
pub fn predict_missing(
    hmm: &Hmm,
    gapped: &[Symbol],
    gap: usize,
    vocabulary: &BTreeMap<Symbol, usize>,
    horizon: Horizon,
) -> Result<Vec<Prediction>> {
    if gap == 0 || gap >= gapped.len() {
        return Err(Error::BadGap {
            gap,
            len: gapped.len(),
        });
    }
    if vocabulary.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let c = CompiledHmm::new(hmm);
    let t_max = horizon.for_sequence(gapped.len() + 1, hmm);
    let mut filled = Vec::with_capacity(gapped.len() + 1);
    filled.extend_from_slice(&gapped[..gap]);
    filled.push(Symbol::start());
    filled.extend_from_slice(&gapped[gap..]);

    let mut out: Vec<(Prediction, usize)> = vocabulary
        .iter()
        .map(|(v, freq)| {
            filled[gap] = v.clone();
            let p = Prediction {
                symbol: v.clone(),
                log_lik: c.log_likelihood(&filled, t_max),
            };
            (p, *freq)
        })
        .collect();
    out.sort_by(|(a, fa), (b, fb)| {
        b.log_lik
            .partial_cmp(&a.log_lik)
            .unwrap_or(Ordering::Equal)
            .then(fb.cmp(fa))
            .then_with(|| a.symbol.cmp(&b.symbol))
    });
    Ok(out.into_iter().map(|(p, _)| p).collect())
}
