//! Evaluation harness: held-out gap prediction, baselines, reports and
//! synthetic corpora.

mod baselines;
mod config;
mod eval_set;
mod method;
mod report;
mod synthetic;

pub use baselines::Baselines;
pub use config::RunConfig;
pub use eval_set::{make_eval_set, EvalSet, TestItem};
pub use method::{model_accuracy, run_method, train_method, Accuracy, Method};
pub use report::{domain_qualifies, evaluate, DomainResult, EvalReport};
pub use synthetic::{branching_script, chain_script, generate, random_script};

use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Reads one domain from a corpus file, or one domain per file (sorted by
/// name, named by file stem) from a directory.
pub fn load_domains(path: &Path) -> Result<Vec<(String, Corpus)>> {
    let stem = |p: &Path| {
        p.file_stem().map_or_else(
            || p.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        )
    };
    if !path.is_dir() {
        return Ok(vec![(stem(path), Corpus::load(path)?)]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let p = entry.map_err(|e| Error::io(path, e))?.path();
        let hidden = p
            .file_name()
            .is_some_and(|n| n.to_string_lossy().starts_with('.'));
        if p.is_file() && !hidden {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    files
        .iter()
        .map(|p| Ok((stem(p), Corpus::load(p)?)))
        .collect()
}
