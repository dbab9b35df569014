//! Exact and approximate corpus log-likelihood.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::corpus::distinct;
use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};
use crate::inference::{CompiledHmm, Horizon};
use crate::symbol::Symbol;

/// `Σ log P(s)` over the narratives; unreachable ones contribute the
/// underflow floor.
pub fn log_likelihood_exact<S: AsRef<[Symbol]>>(
    hmm: &Hmm,
    narratives: &[S],
    horizon: Horizon,
) -> f64 {
    let groups = distinct(narratives);
    let c = CompiledHmm::new(hmm);
    let terms: Vec<f64> = groups
        .par_iter()
        .map(|(s, k)| {
            let t_max = horizon.for_sequence(s.len(), hmm);
            *k as f64 * c.log_likelihood(s, t_max).or_floor()
        })
        .collect();
    terms.iter().sum()
}

fn transition_term(hmm: &Hmm, counts: &CountTable, q: StateId) -> Result<f64> {
    let mut s = 0.0;
    for (to, c) in counts.outgoing(q) {
        if c <= 0.0 {
            continue;
        }
        let p = hmm.transition(q, to);
        if p <= 0.0 {
            return Err(Error::InconsistentCount(format!("transition {q}->{to}")));
        }
        s += c * p.ln();
    }
    Ok(s)
}

fn emission_term(hmm: &Hmm, counts: &CountTable, q: StateId) -> Result<f64> {
    let mut s = 0.0;
    for (o, c) in counts.emission_totals(q) {
        if c <= 0.0 {
            continue;
        }
        let p = hmm.emission(q, &o);
        if p <= 0.0 {
            return Err(Error::InconsistentCount(format!(
                "emission {o} at state {q}"
            )));
        }
        s += c * p.ln();
    }
    Ok(s)
}

/// Complete-data log-likelihood with expected counts in place of observed
/// ones: `Σ C(q→q') log T(q'|q) + Σ C(q,q'↑o) log Ω(o|q')`.
pub fn log_likelihood_approx(hmm: &Hmm, counts: &CountTable) -> Result<f64> {
    Ok(ApproxLikelihood::new(hmm, counts)?.total())
}

/// Per-state cache of the approximate log-likelihood, so that a structure
/// change only recomputes the rows it touched.
#[derive(Clone, Debug, Default)]
pub struct ApproxLikelihood {
    terms: BTreeMap<StateId, (f64, f64)>,
}

impl ApproxLikelihood {
    pub fn new(hmm: &Hmm, counts: &CountTable) -> Result<Self> {
        let mut out = ApproxLikelihood::default();
        let all: BTreeSet<StateId> = hmm
            .states()
            .iter()
            .copied()
            .chain(counts.states())
            .collect();
        out.update(hmm, counts, &all)?;
        Ok(out)
    }

    /// Recomputes the terms of `touched` states; states no longer in the
    /// model drop out.
    pub fn update(
        &mut self,
        hmm: &Hmm,
        counts: &CountTable,
        touched: &BTreeSet<StateId>,
    ) -> Result<()> {
        for &q in touched {
            if hmm.contains(q) {
                let t = (
                    transition_term(hmm, counts, q)?,
                    emission_term(hmm, counts, q)?,
                );
                self.terms.insert(q, t);
            } else {
                self.terms.remove(&q);
            }
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.terms.values().map(|(a, b)| a + b).sum()
    }
}
