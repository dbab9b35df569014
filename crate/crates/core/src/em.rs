//! Parameter estimation: the MAP M-step and the EM loop.

use std::collections::{BTreeMap, BTreeSet};

use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};
use crate::inference::{expected_counts, Horizon};
use crate::symbol::{Emission, Symbol};

/// How counts become probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Smoothing {
    /// Added to every allowed entry of a row.
    pub pseudocount: f64,
    /// Whether interior states may emit the null observation.
    pub null_emissions: bool,
    /// When set, every interior emission row is smoothed over all of these
    /// symbols instead of only the ones already in the row.
    pub vocabulary: Option<BTreeSet<Symbol>>,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing {
            pseudocount: 1.0,
            null_emissions: true,
            vocabulary: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmConfig {
    pub max_iters: usize,
    /// Stop once `|ΔLL / LL|` drops below this.
    pub rel_tol: f64,
    pub horizon: Horizon,
    pub smoothing: Smoothing,
    /// Smooth emission rows over the corpus vocabulary.
    pub full_vocabulary: bool,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iters: 100,
            rel_tol: 1e-6,
            horizon: Horizon::default(),
            smoothing: Smoothing::default(),
            full_vocabulary: false,
        }
    }
}

impl EmConfig {
    pub fn check(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config("rel_tol must be positive".into()));
        }
        if !(self.smoothing.pseudocount >= 0.0) {
            return Err(Error::Config("pseudocount must be nonnegative".into()));
        }
        if !(self.horizon.multiplier >= 1.0) {
            return Err(Error::Config(
                "horizon multiplier must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Normalizes `(key, count)` pairs with a pseudocount; uniform when every
/// entry is zero. Zero results are dropped.
fn normalize<K: Ord>(entries: BTreeMap<K, f64>, pc: f64) -> BTreeMap<K, f64> {
    let k = entries.len() as f64;
    let total: f64 = entries.values().map(|c| c + pc).sum();
    if total > 0.0 {
        let mut row: BTreeMap<K, f64> = entries
            .into_iter()
            .map(|(q, c)| (q, (c + pc) / total))
            .filter(|(_, p)| *p > 0.0)
            .collect();
        let s: f64 = row.values().sum();
        row.values_mut().for_each(|p| *p /= s);
        row
    } else {
        entries.into_keys().map(|q| (q, 1.0 / k)).collect()
    }
}

pub(crate) fn transition_row(
    hmm: &Hmm,
    counts: &CountTable,
    q: StateId,
    pc: f64,
) -> BTreeMap<StateId, f64> {
    let mut allowed: BTreeMap<StateId, f64> = hmm.successors(q).map(|(s, _)| (s, 0.0)).collect();
    for (s, c) in counts.outgoing(q) {
        if c > 0.0 {
            allowed.insert(s, c);
        }
    }
    normalize(allowed, pc)
}

pub(crate) fn emission_row(
    hmm: &Hmm,
    counts: &CountTable,
    q: StateId,
    s: &Smoothing,
) -> BTreeMap<Emission, f64> {
    let mut allowed: BTreeMap<Emission, f64> =
        hmm.emissions(q).map(|(o, _)| (o.clone(), 0.0)).collect();
    for (o, c) in counts.emission_totals(q) {
        if c > 0.0 {
            allowed.insert(o, c);
        }
    }
    if let Some(v) = &s.vocabulary {
        for o in v {
            allowed.entry(Emission::Symbol(o.clone())).or_insert(0.0);
        }
    }
    if s.null_emissions {
        allowed.entry(Emission::Null).or_insert(0.0);
    } else {
        allowed.remove(&Emission::Null);
    }
    normalize(allowed, s.pseudocount)
}

/// Re-estimates every row of `hmm` from `counts`, keeping the structure.
/// A state's transitions may go to its current successors and to any
/// state it has a positive count towards; the sentinels' emissions stay
/// pinned.
pub fn m_step(hmm: &Hmm, counts: &CountTable, smoothing: &Smoothing) -> Hmm {
    let all: BTreeSet<StateId> = hmm.states().iter().copied().collect();
    m_step_rows(hmm, counts, &all, smoothing)
}

/// [`m_step`] restricted to the rows of `rows`; other rows are copied.
pub fn m_step_rows(
    hmm: &Hmm,
    counts: &CountTable,
    rows: &BTreeSet<StateId>,
    smoothing: &Smoothing,
) -> Hmm {
    let mut out = hmm.clone();
    for &q in rows {
        if !hmm.contains(q) || q == Hmm::FINAL {
            continue;
        }
        out.set_trans_row(q, transition_row(hmm, counts, q, smoothing.pseudocount));
        if !Hmm::is_sentinel(q) {
            out.set_emit_row(q, emission_row(hmm, counts, q, smoothing));
        }
    }
    out
}

/// `pc · Σ log θ` over the free entries of every row: the log density of
/// the Dirichlet prior that the pseudocount encodes, up to a constant.
pub fn log_prior_density(hmm: &Hmm, pseudocount: f64) -> f64 {
    if pseudocount == 0.0 {
        return 0.0;
    }
    let mut s = 0.0;
    for &q in hmm.states() {
        if q == Hmm::FINAL {
            continue;
        }
        s += hmm.successors(q).map(|(_, p)| p.ln()).sum::<f64>();
        if !Hmm::is_sentinel(q) {
            s += hmm.emissions(q).map(|(_, p)| p.ln()).sum::<f64>();
        }
    }
    pseudocount * s
}

#[derive(Clone, Debug)]
pub struct EmFit {
    pub hmm: Hmm,
    /// Corpus log-likelihood at the start of each iteration.
    pub trace: Vec<f64>,
    /// Log-likelihood plus the prior term at the same points.
    pub objective: Vec<f64>,
    pub converged: bool,
}

/// Alternates E- and M-steps until the relative change in corpus
/// log-likelihood falls below `rel_tol` or `max_iters` passes have run.
pub fn em_fit<S: AsRef<[Symbol]> + Sync>(
    hmm: &Hmm,
    narratives: &[S],
    config: &EmConfig,
) -> Result<EmFit> {
    config.check()?;
    if narratives.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut smoothing = config.smoothing.clone();
    if config.full_vocabulary && smoothing.vocabulary.is_none() {
        let v: BTreeSet<Symbol> = narratives
            .iter()
            .flat_map(|s| {
                let s = s.as_ref();
                s[1..s.len().saturating_sub(1).max(1)].to_vec()
            })
            .collect();
        smoothing.vocabulary = Some(v);
    }
    let mut cur = hmm.clone();
    let mut fit = EmFit {
        hmm: cur.clone(),
        trace: Vec::new(),
        objective: Vec::new(),
        converged: false,
    };
    for iter in 0..config.max_iters {
        let e = expected_counts(&cur, narratives, config.horizon)?;
        if e.reachable == 0 {
            return Err(Error::ModelExcludesCorpus);
        }
        let ll = e.log_likelihood;
        let delta = fit.trace.last().map(|prev| ll - prev);
        log::info!(
            "{iter}\t{ll}\t{}",
            delta.map_or("-".to_string(), |d| d.to_string())
        );
        fit.trace.push(ll);
        fit.objective
            .push(ll + log_prior_density(&cur, smoothing.pseudocount));
        cur = m_step(&cur, &e.counts, &smoothing);
        if let Some(d) = delta {
            if (d / ll.abs().max(f64::MIN_POSITIVE)).abs() < config.rel_tol {
                fit.converged = true;
                break;
            }
        }
    }
    fit.hmm = cur;
    Ok(fit)
}
