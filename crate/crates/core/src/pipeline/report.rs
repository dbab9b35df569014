//! Evaluation over domains and the resulting report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::RunConfig;
use super::eval_set::make_eval_set;
use super::method::{run_method, Accuracy, Method};
use crate::corpus::Corpus;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct DomainResult {
    pub name: String,
    pub narratives: usize,
    pub test_items: usize,
    /// Held-out narratives without an event to remove.
    pub excluded: usize,
    pub accuracy: BTreeMap<(Method, usize), Accuracy>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub methods: Vec<Method>,
    pub batch_sizes: Vec<usize>,
    pub domains: Vec<DomainResult>,
    /// Domains left out by the size filter.
    pub skipped: Vec<String>,
}

impl EvalReport {
    /// Accuracy averaged over domains with test items, each domain weighted
    /// equally.
    pub fn mean(&self, method: Method, r: usize) -> Option<f64> {
        let xs: Vec<f64> = self
            .domains
            .iter()
            .filter_map(|d| d.accuracy.get(&(method, r)).and_then(Accuracy::fraction))
            .collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }

    pub fn test_items(&self) -> usize {
        self.domains.iter().map(|d| d.test_items).sum()
    }

    /// One row per method, one column per batch size, in percent.
    pub fn table(&self) -> String {
        let width = self
            .methods
            .iter()
            .map(|m| m.name().len())
            .max()
            .unwrap_or(0)
            .max(6);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}", "method");
        for r in &self.batch_sizes {
            let _ = write!(out, "  {:>7}", format!("r={r}"));
        }
        out.push('\n');
        for m in &self.methods {
            let _ = write!(out, "{:<width$}", m.name());
            for r in &self.batch_sizes {
                let cell = self
                    .mean(*m, *r)
                    .map_or("-".to_string(), |a| format!("{:.1}", 100.0 * a));
                let _ = write!(out, "  {cell:>7}");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{} domain(s), {} test item(s){}",
            self.domains.len(),
            self.test_items(),
            if self.skipped.is_empty() {
                String::new()
            } else {
                format!(", {} domain(s) skipped", self.skipped.len())
            }
        );
        out
    }

    /// Tab-separated `domain method r correct total accuracy` rows, one per
    /// domain and cell, then `*` rows with the averages.
    pub fn rows(&self) -> String {
        let mut out = String::from("domain\tmethod\tr\tcorrect\ttotal\taccuracy\n");
        for d in &self.domains {
            for m in &self.methods {
                for r in &self.batch_sizes {
                    let a = d.accuracy.get(&(*m, *r)).copied().unwrap_or_default();
                    let frac = a.fraction().map_or("NA".to_string(), |f| format!("{f:.6}"));
                    let _ = writeln!(
                        out,
                        "{}\t{m}\t{r}\t{}\t{}\t{frac}",
                        d.name, a.correct, a.total
                    );
                }
            }
        }
        for m in &self.methods {
            for r in &self.batch_sizes {
                let frac = self
                    .mean(*m, *r)
                    .map_or("NA".to_string(), |f| format!("{f:.6}"));
                let _ = writeln!(out, "*\t{m}\t{r}\t\t{}\t{frac}", self.test_items());
            }
        }
        out
    }
}

/// Whether a domain is large enough to evaluate.
pub fn domain_qualifies(corpus: &Corpus, config: &RunConfig) -> bool {
    let types: BTreeSet<_> = corpus.vocabulary();
    corpus.len() >= config.min_narratives && types.len() >= config.min_event_types
}

fn evaluate_domain(name: &str, corpus: &Corpus, config: &RunConfig) -> Result<DomainResult> {
    let set = make_eval_set(corpus, config.split, config.seed)?;
    let mut accuracy = BTreeMap::new();
    for &m in &config.methods {
        if m.is_hmm() {
            for &r in &config.batch_sizes {
                accuracy.insert(
                    (m, r),
                    run_method(m, &set.train, &set.test, &config.search, r)?,
                );
            }
        } else {
            let a = run_method(m, &set.train, &set.test, &config.search, 1)?;
            for &r in &config.batch_sizes {
                accuracy.insert((m, r), a);
            }
        }
    }
    log::info!("domain {name}: {} test item(s)", set.test.len());
    Ok(DomainResult {
        name: name.to_string(),
        narratives: corpus.len(),
        test_items: set.test.len(),
        excluded: set.excluded,
        accuracy,
    })
}

/// Evaluates every method and batch size on each domain. Domains run in
/// parallel; the report lists them in input order.
pub fn evaluate(domains: &[(String, Corpus)], config: &RunConfig) -> Result<EvalReport> {
    config.check()?;
    let filter = config.domain_filter.unwrap_or(domains.len() > 1);
    let (kept, skipped): (Vec<_>, Vec<_>) = domains
        .iter()
        .partition(|(_, c)| !filter || domain_qualifies(c, config));
    for (name, _) in &skipped {
        log::warn!("domain {name} skipped: too few narratives or event types");
    }
    let results = kept
        .par_iter()
        .map(|(name, c)| evaluate_domain(name, c, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        methods: config.methods.clone(),
        batch_sizes: config.batch_sizes.clone(),
        domains: results,
        skipped: skipped.into_iter().map(|(n, _)| n.clone()).collect(),
    })
}
