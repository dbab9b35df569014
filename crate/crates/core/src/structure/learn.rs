//! Greedy structure search over batches of narratives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use super::candidates::{enumerate_candidates, Pruning, StructureChange};
use super::merge::Changed;
use crate::counts::CountTable;
use crate::em::{em_fit, m_step, m_step_rows, EmConfig, Smoothing};
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};
use crate::inference::expected_counts;
use crate::pta::build_pta;
use crate::scoring::{
    log_likelihood_exact, log_prior, mine_constraints, ApproxLikelihood, ConstraintSet,
    ScoreConfig, ScoreMode,
};
use crate::symbol::Symbol;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Narratives added per batch.
    pub batch_size: usize,
    pub pruning: Pruning,
    pub em: EmConfig,
    pub score: ScoreConfig,
    /// Re-fit parameters by EM after each batch. Without it parameters
    /// come only from count updates.
    pub run_em: bool,
    /// Use these instead of mining constraints from the corpus.
    pub constraints: Option<ConstraintSet>,
    /// Keep a record of every evaluated candidate.
    pub record: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            batch_size: 10,
            pruning: Pruning::AllPairs,
            em: EmConfig::default(),
            score: ScoreConfig::default(),
            run_em: true,
            constraints: None,
            record: false,
        }
    }
}

impl SearchConfig {
    pub fn check(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        self.em.check()?;
        self.score.check()
    }

    fn smoothing(&self) -> &Smoothing {
        &self.em.smoothing
    }
}

/// One evaluated candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchEvent {
    pub batch: usize,
    pub change: StructureChange,
    /// Score change relative to the current model; `None` if the change
    /// could not be applied.
    pub delta: Option<f64>,
    pub accepted: bool,
}

impl fmt::Display for SearchEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let delta = self
            .delta
            .map_or("rejected".to_string(), |d| format!("{d:.6}"));
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.batch, self.change, delta, self.accepted
        )
    }
}

#[derive(Clone, Debug)]
pub struct Learned {
    pub hmm: Hmm,
    pub counts: CountTable,
    pub constraints: ConstraintSet,
    /// Per batch: the score after joining the batch, then after each
    /// accepted change.
    pub scores: Vec<Vec<f64>>,
    pub events: Vec<SearchEvent>,
}

/// Adds a prefix tree of `batch` that shares only the two sentinels with
/// `hmm`, and estimates the new rows and the initial state's row.
fn join_batch<S: AsRef<[Symbol]>>(
    hmm: Option<&Hmm>,
    counts: &CountTable,
    batch: &[S],
    smoothing: &Smoothing,
) -> Result<(Hmm, CountTable)> {
    let (pta, pta_counts) = build_pta(batch)?;
    let Some(hmm) = hmm else {
        let h = m_step(&pta, &pta_counts, smoothing);
        return Ok((h, pta_counts));
    };
    let fresh: Vec<StateId> = pta.states()[1..pta.n_states() - 1].to_vec();
    let mut out = hmm.clone();
    let ids = out.add_states(fresh.len());
    let map: BTreeMap<StateId, StateId> = fresh.iter().copied().zip(ids.iter().copied()).collect();
    let to = |s: StateId| map.get(&s).copied().unwrap_or(s);

    let mut q0_row: BTreeMap<StateId, f64> = out.successors(Hmm::INITIAL).collect();
    for (s, p) in pta.successors(Hmm::INITIAL) {
        *q0_row.entry(to(s)).or_insert(0.0) += p;
    }
    out.set_trans_row(Hmm::INITIAL, q0_row);
    for &s in &fresh {
        out.set_trans_row(to(s), pta.successors(s).map(|(t, p)| (to(t), p)).collect());
        out.set_emit_row(
            to(s),
            pta.emissions(s).map(|(o, p)| (o.clone(), p)).collect(),
        );
    }
    let mut counts = counts.clone();
    counts.accumulate(&pta_counts.remap(to), 1.0);
    let mut rows: BTreeSet<StateId> = ids.into_iter().collect();
    rows.insert(Hmm::INITIAL);
    Ok((m_step_rows(&out, &counts, &rows, smoothing), counts))
}

struct Scorer<'a, S> {
    seen: &'a [S],
    constraints: &'a ConstraintSet,
    config: &'a ScoreConfig,
}

impl<S: AsRef<[Symbol]> + Sync> Scorer<'_, S> {
    fn full(&self, hmm: &Hmm, counts: &CountTable) -> Result<(f64, Option<ApproxLikelihood>)> {
        let prior = log_prior(hmm, self.constraints, self.config);
        match self.config.mode {
            ScoreMode::Exact => Ok((
                prior + log_likelihood_exact(hmm, self.seen, self.config.horizon),
                None,
            )),
            ScoreMode::Approx => {
                let cache = ApproxLikelihood::new(hmm, counts)?;
                Ok((prior + cache.total(), Some(cache)))
            }
        }
    }

    fn changed(
        &self,
        c: &Changed,
        cache: Option<&ApproxLikelihood>,
    ) -> Result<(f64, Option<ApproxLikelihood>)> {
        let prior = log_prior(&c.hmm, self.constraints, self.config);
        match (self.config.mode, cache) {
            (ScoreMode::Approx, Some(cache)) => {
                let mut cache = cache.clone();
                cache.update(&c.hmm, &c.counts, &c.touched)?;
                Ok((prior + cache.total(), Some(cache)))
            }
            _ => self.full(&c.hmm, &c.counts),
        }
    }
}

/// Learns a script from `narratives`: each batch of `batch_size`
/// narratives is added as a prefix tree, then the single best merge or
/// edge deletion is applied while it strictly improves the score. After
/// each batch EM re-fits parameters on every narrative seen so far.
pub fn learn<S: AsRef<[Symbol]> + Sync>(
    narratives: &[S],
    config: &SearchConfig,
) -> Result<Learned> {
    config.check()?;
    if narratives.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let constraints = match &config.constraints {
        Some(c) => c.clone(),
        None => mine_constraints(narratives, &config.score.mining),
    };
    let smoothing = config.smoothing();
    let mut hmm: Option<Hmm> = None;
    let mut counts = CountTable::new();
    let mut scores = Vec::new();
    let mut events = Vec::new();

    for (batch, start) in (0..narratives.len()).step_by(config.batch_size).enumerate() {
        let end = (start + config.batch_size).min(narratives.len());
        let (mut cur, c) = join_batch(hmm.as_ref(), &counts, &narratives[start..end], smoothing)?;
        counts = c;
        let seen = &narratives[..end];
        let scorer = Scorer {
            seen,
            constraints: &constraints,
            config: &config.score,
        };
        let (mut score, mut cache) = scorer.full(&cur, &counts)?;
        let mut trace = vec![score];

        loop {
            let candidates = enumerate_candidates(&cur, config.pruning);
            let results: Vec<Option<(f64, Changed, Option<ApproxLikelihood>)>> = candidates
                .par_iter()
                .map(|change| {
                    let changed = change.apply(&cur, &counts, smoothing).ok()?;
                    let (s, cache) = scorer.changed(&changed, cache.as_ref()).ok()?;
                    Some((s, changed, cache))
                })
                .collect();
            let mut best: Option<usize> = None;
            let mut best_score = score;
            for (k, r) in results.iter().enumerate() {
                if let Some((s, _, _)) = r {
                    if *s > best_score {
                        best_score = *s;
                        best = Some(k);
                    }
                }
            }
            for (k, (change, r)) in candidates.iter().zip(&results).enumerate() {
                let e = SearchEvent {
                    batch,
                    change: *change,
                    delta: r.as_ref().map(|(s, _, _)| s - score),
                    accepted: best == Some(k),
                };
                log::debug!("{e}");
                if config.record {
                    events.push(e);
                }
            }
            let Some(k) = best else { break };
            let (s, changed, c) = results
                .into_iter()
                .nth(k)
                .flatten()
                .expect("best candidate exists");
            cur = changed.hmm;
            counts = changed.counts;
            cache = c;
            score = s;
            trace.push(score);
        }
        log::info!(
            "batch {batch}: {} narratives seen, {} states, score {score:.4}",
            end,
            cur.n_states()
        );

        if config.run_em {
            let fit = em_fit(&cur, seen, &config.em)?;
            cur = fit.hmm;
            counts = expected_counts(&cur, seen, config.em.horizon)?.counts;
        }
        scores.push(trace);
        hmm = Some(cur);
    }

    Ok(Learned {
        hmm: hmm.expect("at least one batch"),
        counts,
        constraints,
        scores,
        events,
    })
}
