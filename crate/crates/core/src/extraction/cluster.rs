//! Agglomerative clustering of sentences into event types.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::sentence::Sentence;
use super::similarity::{similarity, SimilaritySpec};
use crate::error::{Error, Result};
use crate::symbol::Symbol;

/// How the similarity of two clusters derives from their members'.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Linkage {
    #[default]
    Average,
    Single,
    Complete,
}

impl std::str::FromStr for Linkage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            _ => Err(Error::Config(format!(
                "unknown linkage {s:?} (expected average, single or complete)"
            ))),
        }
    }
}

/// A partition of sentences into labelled clusters. Clusters are numbered
/// by their first member.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    assignment: Vec<usize>,
    labels: Vec<Symbol>,
}

impl Clustering {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Cluster index of each sentence.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn labels(&self) -> &[Symbol] {
        &self.labels
    }

    pub fn label_of(&self, sentence: usize) -> &Symbol {
        &self.labels[self.assignment[sentence]]
    }

    /// Member sentence indices of each cluster.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.labels.len()];
        for (s, c) in self.assignment.iter().enumerate() {
            out[*c].push(s);
        }
        out
    }
}

fn pairwise(sentences: &[Sentence], spec: &SimilaritySpec) -> Result<Vec<f64>> {
    let n = sentences.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Ok(1.0)
                    } else if j < i {
                        Ok(0.0)
                    } else {
                        similarity(&sentences[i], &sentences[j], spec)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut m: Vec<f64> = rows.into_iter().flatten().collect();
    for i in 0..n {
        for j in 0..i {
            m[i * n + j] = m[j * n + i];
        }
    }
    Ok(m)
}

/// Repeatedly merges the two most similar clusters while their similarity
/// is at least `threshold`. Ties go to the pair with the smallest indices.
/// Each cluster is named by its most frequent verb (ties lexicographic),
/// with `_2`, `_3`, … appended to repeated names.
pub fn cluster(
    sentences: &[Sentence],
    spec: &SimilaritySpec,
    threshold: f64,
    linkage: Linkage,
) -> Result<Clustering> {
    spec.check()?;
    let n = sentences.len();
    let mut sim = pairwise(sentences, spec)?;
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut parent: Vec<usize> = (0..n).collect();

    // best[i] = most similar active j > i, smallest j on ties.
    let best_of = |sim: &[f64], active: &[bool], i: usize| -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for j in i + 1..n {
            if active[j] && best.is_none_or(|(b, _)| sim[i * n + j] > b) {
                best = Some((sim[i * n + j], j));
            }
        }
        best
    };
    let mut best: Vec<Option<(f64, usize)>> = (0..n).map(|i| best_of(&sim, &active, i)).collect();

    loop {
        let mut pick: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if let (true, Some((s, j))) = (active[i], best[i]) {
                if pick.is_none_or(|(b, _, _)| s > b) {
                    pick = Some((s, i, j));
                }
            }
        }
        let Some((s, i, j)) = pick else { break };
        if s < threshold {
            break;
        }
        // Merge j into i.
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let (a, b) = (sim[i * n + k], sim[j * n + k]);
            let v = match linkage {
                Linkage::Average => {
                    (size[i] as f64 * a + size[j] as f64 * b) / (size[i] + size[j]) as f64
                }
                Linkage::Single => a.max(b),
                Linkage::Complete => a.min(b),
            };
            sim[i * n + k] = v;
            sim[k * n + i] = v;
        }
        size[i] += size[j];
        active[j] = false;
        parent[j] = i;
        for k in 0..n {
            if !active[k] {
                continue;
            }
            let stale = k == i
                || best[k].is_some_and(|(_, b)| b == i || b == j)
                || (k < i
                    && best[k].is_some_and(|(b, bj)| {
                        sim[k * n + i] > b || (sim[k * n + i] == b && i < bj)
                    }));
            if stale {
                best[k] = best_of(&sim, &active, k);
            }
        }
    }

    // Resolve each sentence to its root; number clusters by first member.
    let root = |mut s: usize| {
        while parent[s] != s {
            s = parent[s];
        }
        s
    };
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut assignment = Vec::with_capacity(n);
    for s in 0..n {
        let r = root(s);
        let next = index.len();
        assignment.push(*index.entry(r).or_insert(next));
    }
    let mut verbs: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); index.len()];
    for (s, c) in assignment.iter().enumerate() {
        *verbs[*c].entry(sentences[s].verb.as_str()).or_insert(0) += 1;
    }
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    let mut labels = Vec::with_capacity(verbs.len());
    for v in &verbs {
        // BTreeMap iterates lexicographically, so max_by_key on a
        // reversed iterator keeps the smallest word among ties.
        let (word, _) = v
            .iter()
            .rev()
            .max_by_key(|(_, n)| **n)
            .expect("nonempty cluster");
        let k = used.entry(word.to_string()).or_insert(0);
        *k += 1;
        let name = if *k == 1 {
            word.to_string()
        } else {
            format!("{word}_{k}")
        };
        labels.push(Symbol::new(&name).map_err(|_| Error::InvalidLabel(name.clone()))?);
    }
    Ok(Clustering { assignment, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::similarity::{SimilarityMatrix, WordSimilarity};

    fn s(verb: &str, object: &str) -> Sentence {
        Sentence {
            text: format!("{verb} {object}"),
            verb: verb.into(),
            object: Some(object.into()),
        }
    }

    #[test]
    fn identical_sentences_form_one_cluster() {
        let v = vec![s("open", "door"); 4];
        let c = cluster(&v, &SimilaritySpec::default(), 0.55, Linkage::Average).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.labels()[0].as_str(), "open");
    }

    #[test]
    fn unrelated_groups_stay_apart() {
        let v = vec![
            s("open", "door"),
            s("xy", "zq"),
            s("open", "door"),
            s("xy", "zq"),
        ];
        let c = cluster(&v, &SimilaritySpec::default(), 0.5, Linkage::Average).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.assignment(), &[0, 1, 0, 1]);
    }

    #[test]
    fn matrix_similarity_merges_synonyms() {
        let mut m = SimilarityMatrix::default();
        m.insert("hear", "listen", 0.9);
        let spec = SimilaritySpec {
            words: WordSimilarity::Matrix(m),
            ..SimilaritySpec::default()
        };
        let v = vec![
            s("hear", "doorbell"),
            s("listen", "doorbell"),
            s("hear", "doorbell"),
        ];
        let c = cluster(&v, &spec, 0.6, Linkage::Average).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.labels()[0].as_str(), "hear");
    }

    #[test]
    fn duplicate_labels_get_suffixes() {
        let v = vec![s("open", "door"), s("open", "xyzzy"), s("walk", "door")];
        let c = cluster(&v, &SimilaritySpec::default(), 0.99, Linkage::Average).unwrap();
        let names: Vec<&str> = c.labels().iter().map(Symbol::as_str).collect();
        assert_eq!(names, ["open", "open_2", "walk"]);
    }

    #[test]
    fn verb_ties_resolve_lexicographically() {
        let v = vec![s("shut", "door"), s("close", "door")];
        let c = cluster(&v, &SimilaritySpec::default(), 0.0, Linkage::Average).unwrap();
        assert_eq!(c.labels()[0].as_str(), "close");
    }
}
