//! Prediction methods compared by the evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::baselines::Baselines;
use super::eval_set::TestItem;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::hmm::Hmm;
use crate::inference::{predict_missing, Horizon};
use crate::scoring::ScoreMode;
use crate::structure::{learn, Learned, SearchConfig};
use crate::symbol::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Structure search with null emissions, exact scoring and EM.
    SemHmm,
    /// As [`Method::SemHmm`] with the local likelihood approximation.
    SemHmmApprox,
    /// Merges and deletions without null emissions or EM; parameters come
    /// from count updates only.
    Bmm,
    /// As [`Method::Bmm`] but re-fit by EM after each batch.
    BmmEm,
    Conditional,
    Frequency,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::SemHmm,
        Method::SemHmmApprox,
        Method::BmmEm,
        Method::Bmm,
        Method::Conditional,
        Method::Frequency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SemHmm => "sem-hmm",
            Method::SemHmmApprox => "sem-hmm-approx",
            Method::Bmm => "bmm",
            Method::BmmEm => "bmm-em",
            Method::Conditional => "conditional",
            Method::Frequency => "frequency",
        }
    }

    /// Whether the method learns a model (and so depends on the batch size).
    pub fn is_hmm(self) -> bool {
        !matches!(self, Method::Conditional | Method::Frequency)
    }

    /// Search settings for this method, derived from `base` with batches of
    /// `batch_size` narratives. `None` for the baselines.
    pub fn search_config(self, base: &SearchConfig, batch_size: usize) -> Option<SearchConfig> {
        let mut c = base.clone();
        c.batch_size = batch_size;
        match self {
            Method::SemHmm => c.score.mode = ScoreMode::Exact,
            Method::SemHmmApprox => c.score.mode = ScoreMode::Approx,
            Method::Bmm | Method::BmmEm => {
                c.score.mode = ScoreMode::Exact;
                c.em.smoothing.null_emissions = false;
                c.run_em = self == Method::BmmEm;
            }
            Method::Conditional | Method::Frequency => return None,
        }
        Some(c)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod {
                name: s.to_string(),
                valid: Method::ALL.map(Method::name).join(", "),
            })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    /// Fraction correct; `None` without test items.
    pub fn fraction(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

/// Trains `method` on `train` and counts its top-1 predictions that match
/// the removed event.
pub fn run_method(
    method: Method,
    train: &Corpus,
    test: &[TestItem],
    base: &SearchConfig,
    batch_size: usize,
) -> Result<Accuracy> {
    let baselines = Baselines::new(train);
    let hits: Vec<bool> = match method.search_config(base, batch_size) {
        None => test
            .iter()
            .map(|t| {
                let guess = match method {
                    Method::Frequency => baselines.frequency(t),
                    _ => baselines.conditional(t),
                };
                guess.as_ref() == Some(&t.truth)
            })
            .collect(),
        Some(config) => {
            let learned = learn(train.narratives(), &config)?;
            return model_accuracy(
                &learned.hmm,
                baselines.frequencies(),
                test,
                config.em.horizon,
            );
        }
    };
    Ok(Accuracy {
        correct: hits.iter().filter(|h| **h).count(),
        total: hits.len(),
    })
}

/// Top-1 gap-filling accuracy of a given model, choosing among the
/// symbols of `vocabulary` (with their training frequencies).
pub fn model_accuracy(
    hmm: &Hmm,
    vocabulary: &BTreeMap<Symbol, usize>,
    test: &[TestItem],
    horizon: Horizon,
) -> Result<Accuracy> {
    let hits: Vec<bool> = test
        .par_iter()
        .map(|t| {
            let ranked = predict_missing(hmm, &t.gapped, t.gap, vocabulary, horizon)?;
            Ok(ranked.first().map(|p| &p.symbol) == Some(&t.truth))
        })
        .collect::<Result<_>>()?;
    Ok(Accuracy {
        correct: hits.iter().filter(|h| **h).count(),
        total: hits.len(),
    })
}

/// Learns a model of `train` with `method`'s settings.
pub fn train_method(
    method: Method,
    train: &Corpus,
    base: &SearchConfig,
    batch_size: usize,
) -> Result<Learned> {
    let config = method
        .search_config(base, batch_size)
        .ok_or_else(|| Error::Config(format!("{method} does not learn a model")))?;
    learn(train.narratives(), &config)
}
