//! Sentence similarity from verb and object word similarity.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::sentence::Sentence;
use crate::error::{Error, Result};

/// Word-pair similarities read from a file of `word1 word2 value` lines.
/// Pairs are symmetric; a word is always fully similar to itself.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimilarityMatrix {
    pairs: BTreeMap<(String, String), f64>,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl SimilarityMatrix {
    pub fn insert(&mut self, a: &str, b: &str, value: f64) {
        self.pairs
            .insert(key(&a.to_lowercase(), &b.to_lowercase()), value);
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        if a == b {
            return Some(1.0);
        }
        self.pairs.get(&key(a, b)).copied()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = SimilarityMatrix::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(
                    n + 1,
                    format!("expected 3 fields, found {}", f.len()),
                ));
            }
            let v: f64 = f[2].parse().map_err(|_| {
                Error::parse(n + 1, format!("value: expected a number, found {:?}", f[2]))
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::parse(n + 1, format!("value: {v} is outside [0, 1]")));
            }
            m.insert(f[0], f[1], v);
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SimilarityMatrix::parse(&text).map_err(|e| e.with_path(path))
    }
}

/// Dice coefficient of the character-bigram sets, or 1 for equal words.
pub fn lexical_similarity(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let bigrams = |s: &str| -> BTreeSet<(char, char)> {
        let c: Vec<char> = s.chars().collect();
        c.windows(2).map(|w| (w[0], w[1])).collect()
    };
    let (x, y) = (bigrams(a), bigrams(b));
    if x.is_empty() && y.is_empty() {
        return 0.0;
    }
    2.0 * x.intersection(&y).count() as f64 / (x.len() + y.len()) as f64
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum WordSimilarity {
    #[default]
    Lexical,
    Matrix(SimilarityMatrix),
}

impl WordSimilarity {
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        match self {
            WordSimilarity::Lexical => Ok(lexical_similarity(a, b)),
            WordSimilarity::Matrix(m) => m
                .get(a, b)
                .ok_or_else(|| Error::MissingSimilarity(a.to_string(), b.to_string())),
        }
    }
}

/// Weighted combination of verb and object similarity.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilaritySpec {
    pub verb_weight: f64,
    pub object_weight: f64,
    pub words: WordSimilarity,
}

impl Default for SimilaritySpec {
    fn default() -> Self {
        SimilaritySpec {
            verb_weight: 0.7,
            object_weight: 0.3,
            words: WordSimilarity::Lexical,
        }
    }
}

impl SimilaritySpec {
    pub fn check(&self) -> Result<()> {
        let (a, b) = (self.verb_weight, self.object_weight);
        if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) {
            return Err(Error::Config(
                "similarity weights must be nonnegative and not both zero".into(),
            ));
        }
        Ok(())
    }
}

/// `(w_v · PS(verbs) + w_o · PS(objects)) / (w_v + w_o)`. Two missing
/// objects count as identical, one missing object as unrelated.
pub fn similarity(s1: &Sentence, s2: &Sentence, spec: &SimilaritySpec) -> Result<f64> {
    let verbs = spec.words.similarity(&s1.verb, &s2.verb)?;
    let objects = match (&s1.object, &s2.object) {
        (None, None) => 1.0,
        (Some(a), Some(b)) => spec.words.similarity(a, b)?,
        _ => 0.0,
    };
    Ok((spec.verb_weight * verbs + spec.object_weight * objects)
        / (spec.verb_weight + spec.object_weight))
}
