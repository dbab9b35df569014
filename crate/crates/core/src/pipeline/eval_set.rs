//! Train/test splitting and gap construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::symbol::Symbol;

/// A held-out narrative with one interior event removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestItem {
    /// The narrative without the removed event, sentinels included.
    pub gapped: Vec<Symbol>,
    /// Index in `gapped` where the removed event belongs.
    pub gap: usize,
    pub truth: Symbol,
}

impl TestItem {
    /// Removes the event at `position` (an interior index) of `narrative`.
    pub fn new(narrative: &[Symbol], position: usize) -> Result<Self> {
        if position == 0 || position + 1 >= narrative.len() {
            return Err(Error::BadGap {
                gap: position,
                len: narrative.len(),
            });
        }
        let mut gapped = narrative.to_vec();
        let truth = gapped.remove(position);
        Ok(TestItem {
            gapped,
            gap: position,
            truth,
        })
    }
}

#[derive(Clone, Debug)]
pub struct EvalSet {
    pub train: Corpus,
    pub test: Vec<TestItem>,
    /// Held-out narratives with no interior event to remove.
    pub excluded: usize,
}

/// Holds out `round(split · N)` narratives chosen by a seeded shuffle and
/// removes one uniformly chosen interior event from each. Both parts keep
/// the corpus order.
pub fn make_eval_set(corpus: &Corpus, split: f64, seed: u64) -> Result<EvalSet> {
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::Config(format!(
            "split must lie in (0, 1), got {split}"
        )));
    }
    let n = corpus.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let n_test = (split * n as f64).round() as usize;
    let mut held = vec![false; n];
    for &i in &idx[..n_test] {
        held[i] = true;
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut excluded = 0;
    for (i, s) in corpus.iter().enumerate() {
        if !held[i] {
            train.push(s.clone());
        } else if s.len() <= 2 {
            excluded += 1;
        } else {
            let pos = rng.gen_range(1..s.len() - 1);
            test.push(TestItem::new(s, pos)?);
        }
    }
    if excluded > 0 {
        log::warn!("{excluded} held-out narrative(s) without events excluded");
    }
    Ok(EvalSet {
        train: Corpus::new(train)?,
        test,
        excluded,
    })
}
