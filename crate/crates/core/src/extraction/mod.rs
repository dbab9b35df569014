//! Turning raw narratives (one sentence per line, blank lines between
//! narratives) into a corpus of event labels.

mod cluster;
mod sentence;
mod similarity;

pub use cluster::{cluster, Clustering, Linkage};
pub use sentence::{parse_sentence, tokens, Sentence, Stopwords};
pub use similarity::{
    lexical_similarity, similarity, SimilarityMatrix, SimilaritySpec, WordSimilarity,
};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractConfig {
    pub similarity: SimilaritySpec,
    /// Clusters stop merging below this similarity.
    pub threshold: f64,
    pub linkage: Linkage,
    pub stopwords: Stopwords,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            similarity: SimilaritySpec::default(),
            threshold: 0.55,
            linkage: Linkage::Average,
            stopwords: Stopwords::default(),
        }
    }
}

/// Splits text into narratives at blank lines; each nonblank line is one
/// sentence. Lines starting with `#` are comments.
pub fn parse_narratives(text: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut cur: Vec<String> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(line.to_string());
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Replaces each sentence by its cluster label. `narratives` gives, in
/// order, how many clustered sentences each narrative contributed; empty
/// narratives are dropped with a warning.
pub fn corpus_from_narratives(lengths: &[usize], clustering: &Clustering) -> Result<Corpus> {
    let total: usize = lengths.iter().sum();
    if total != clustering.assignment().len() {
        return Err(Error::Config(format!(
            "narratives hold {total} sentences but the clustering covers {}",
            clustering.assignment().len()
        )));
    }
    let mut bodies = Vec::new();
    let mut next = 0;
    let mut empty = 0;
    for &len in lengths {
        if len == 0 {
            empty += 1;
            continue;
        }
        bodies.push(
            (next..next + len)
                .map(|s| clustering.label_of(s).clone())
                .collect(),
        );
        next += len;
    }
    if empty > 0 {
        log::warn!("{empty} empty narrative(s) dropped");
    }
    Ok(Corpus::from_bodies(bodies))
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub corpus: Corpus,
    pub sentences: Vec<Sentence>,
    pub clustering: Clustering,
    /// Sentences with no content words, dropped from their narratives.
    pub dropped: Vec<String>,
}

/// Parses every sentence, clusters them, and relabels the narratives.
pub fn extract(narratives: &[Vec<String>], config: &ExtractConfig) -> Result<Extraction> {
    let mut sentences = Vec::new();
    let mut lengths = Vec::with_capacity(narratives.len());
    let mut dropped = Vec::new();
    for n in narratives {
        let mut len = 0;
        for text in n {
            match parse_sentence(text, &config.stopwords) {
                Ok(s) => {
                    sentences.push(s);
                    len += 1;
                }
                Err(Error::NoContentTokens(t)) => dropped.push(t),
                Err(e) => return Err(e),
            }
        }
        lengths.push(len);
    }
    if !dropped.is_empty() {
        log::warn!(
            "{} sentence(s) without content words dropped",
            dropped.len()
        );
    }
    let clustering = cluster(
        &sentences,
        &config.similarity,
        config.threshold,
        config.linkage,
    )?;
    let corpus = corpus_from_narratives(&lengths, &clustering)?;
    Ok(Extraction {
        corpus,
        sentences,
        clustering,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::seq;

    #[test]
    fn blocks_split_at_blank_lines() {
        let n = parse_narratives("a\nb\n\n\nc\n# note\n\n");
        assert_eq!(
            n,
            vec![
                vec!["a".to_string(), "b".to_string()],
                vec!["c".to_string()]
            ]
        );
    }

    #[test]
    fn labels_follow_sentence_order() {
        let text = "Open the door.\nWalk to the door.\nOpen the door.\n";
        let ex = extract(&parse_narratives(text), &ExtractConfig::default()).unwrap();
        assert_eq!(ex.corpus.narratives()[0], seq(&["open", "walk", "open"]));
    }

    #[test]
    fn doorbell_narrative() {
        let text = "Hear the doorbell.\nWalk to the door.\nOpen the door.\nAllow the people in.\nClose the door.\n";
        let ex = extract(&parse_narratives(text), &ExtractConfig::default()).unwrap();
        assert_eq!(
            ex.corpus.narratives()[0],
            seq(&["hear", "walk", "open", "allow", "close"])
        );
    }

    #[test]
    fn empty_narratives_are_dropped() {
        let narratives = vec![vec!["Wait.".to_string()], vec!["the".to_string()]];
        let ex = extract(&narratives, &ExtractConfig::default()).unwrap();
        assert_eq!(ex.corpus.len(), 1);
        assert_eq!(ex.dropped, vec!["the".to_string()]);
    }
}
