//! Verb/object extraction from short imperative sentences.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "again", "all", "an", "and", "any", "are", "as", "at", "be", "been",
    "before", "being", "but", "by", "can", "could", "did", "do", "does", "each", "for", "from",
    "had", "has", "have", "he", "her", "here", "him", "his", "how", "i", "if", "in", "into", "is",
    "it", "its", "just", "me", "my", "no", "not", "now", "of", "off", "on", "once", "one", "or",
    "our", "out", "over", "own", "she", "should", "so", "some", "than", "that", "the", "their",
    "them", "then", "there", "these", "they", "this", "those", "through", "to", "too", "until",
    "up", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "will",
    "with", "would", "you", "your", "yours", "yourself",
];

/// Words skipped when looking for the verb and the object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords(STOPWORDS.iter().map(|s| s.to_string()).collect())
    }
}

impl Stopwords {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        Stopwords(words.into_iter().map(|w| w.into().to_lowercase()).collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub verb: String,
    pub object: Option<String>,
}

/// Lowercased tokens with everything but letters and digits removed.
pub fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            t.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// The verb is the first content word and the object the last one, when
/// the sentence has more than one.
pub fn parse_sentence(text: &str, stopwords: &Stopwords) -> Result<Sentence> {
    let content: Vec<String> = tokens(text)
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect();
    let Some(verb) = content.first().cloned() else {
        return Err(Error::NoContentTokens(text.to_string()));
    };
    let object = (content.len() > 1).then(|| content[content.len() - 1].clone());
    Ok(Sentence {
        text: text.to_string(),
        verb,
        object,
    })
}
