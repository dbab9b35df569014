//! Run settings and their flat `key = value` file format.

use std::path::Path;

use super::method::Method;
use crate::error::{Error, Result};
use crate::extraction::{ExtractConfig, SimilarityMatrix, WordSimilarity};
use crate::scoring::FollowMode;
use crate::structure::SearchConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Fraction of each domain's narratives held out for testing.
    pub split: f64,
    pub seed: u64,
    /// Batch sizes to evaluate.
    pub batch_sizes: Vec<usize>,
    pub methods: Vec<Method>,
    pub search: SearchConfig,
    pub extract: ExtractConfig,
    /// Skip domains with fewer than `min_narratives` narratives or
    /// `min_event_types` event types. `None` applies the filter only when
    /// there is more than one domain.
    pub domain_filter: Option<bool>,
    pub min_narratives: usize,
    pub min_event_types: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            split: 0.4,
            seed: 0,
            batch_sizes: vec![2, 5, 10],
            methods: Method::ALL.to_vec(),
            search: SearchConfig::default(),
            extract: ExtractConfig::default(),
            domain_filter: None,
            min_narratives: 50,
            min_event_types: 3,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true or false, got {value:?}"
        ))),
    }
}

fn list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

impl RunConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::Config(format!(
                "split must lie in (0, 1), got {}",
                self.split
            )));
        }
        if self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            return Err(Error::Config(
                "batch sizes must be a nonempty list of positive integers".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if !(0.0..=1.0).contains(&self.extract.threshold) {
            return Err(Error::Config("threshold must lie in [0, 1]".into()));
        }
        self.extract.similarity.check()?;
        self.search.check()
    }

    /// Sets one setting by name. Dashes and underscores in `key` are
    /// interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let s = &mut self.search;
        match key.as_str() {
            "split" => self.split = num(&key, value)?,
            "seed" => self.seed = num(&key, value)?,
            "r" | "batch_size" | "batch_sizes" => self.batch_sizes = list(value, |v| num(&key, v))?,
            "method" | "methods" => self.methods = list(value, str::parse)?,
            "kappa_q" => s.score.kappa_q = num(&key, value)?,
            "kappa_t" => s.score.kappa_t = num(&key, value)?,
            "kappa_c" => s.score.kappa_c = num(&key, value)?,
            "p0" => s.score.mining.p0 = num(&key, value)?,
            "significance" => s.score.mining.significance = num(&key, value)?,
            "min_opportunities" => s.score.mining.min_opportunities = num(&key, value)?,
            "follow" => {
                s.score.mining.follow = match value {
                    "immediate" => FollowMode::Immediate,
                    "eventual" => FollowMode::Eventual,
                    _ => {
                        return Err(Error::Config(format!(
                            "follow: expected immediate or eventual, got {value:?}"
                        )))
                    }
                }
            }
            "mode" => s.score.mode = value.parse()?,
            "horizon" => {
                let m: f64 = num(&key, value)?;
                if !(m >= 1.0) {
                    return Err(Error::Config("horizon must be at least 1".into()));
                }
                s.score.horizon.multiplier = m;
                s.em.horizon.multiplier = m;
            }
            "pruning" => s.pruning = value.parse()?,
            "run_em" => s.run_em = flag(&key, value)?,
            "max_iters" => s.em.max_iters = num(&key, value)?,
            "rel_tol" => s.em.rel_tol = num(&key, value)?,
            "pseudocount" => s.em.smoothing.pseudocount = num(&key, value)?,
            "null_emissions" => s.em.smoothing.null_emissions = flag(&key, value)?,
            "full_vocabulary" => s.em.full_vocabulary = flag(&key, value)?,
            "threshold" => self.extract.threshold = num(&key, value)?,
            "linkage" => self.extract.linkage = value.parse()?,
            "verb_weight" => self.extract.similarity.verb_weight = num(&key, value)?,
            "object_weight" => self.extract.similarity.object_weight = num(&key, value)?,
            "similarity_matrix" => {
                self.extract.similarity.words =
                    WordSimilarity::Matrix(SimilarityMatrix::load(Path::new(value))?)
            }
            "domain_filter" => self.domain_filter = Some(flag(&key, value)?),
            "min_narratives" => self.min_narratives = num(&key, value)?,
            "min_event_types" => self.min_event_types = num(&key, value)?,
            _ => return Err(Error::Config(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the current settings. Blank
    /// lines and lines starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, "expected key = value"))?;
            self.set(k, v)
                .map_err(|e| Error::parse(n + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text).map_err(|e| e.with_path(path))
    }
}
