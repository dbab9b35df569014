//! Narrative corpora and the plain-text corpus format.
//!
//! One narrative per line, whitespace-separated event labels without
//! sentinels; lines starting with `#` are comments and blank lines are
//! ignored. Sentinels are added on load and stripped on save.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::symbol::Symbol;

/// An ordered collection of sentinel-wrapped narratives.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    narratives: Vec<Vec<Symbol>>,
}

/// Checks that `s` is `"<" body ">"` with no sentinel inside the body.
pub fn check_wrapped(s: &[Symbol]) -> std::result::Result<(), String> {
    if s.len() < 2 {
        return Err(format!(
            "length {} is shorter than the two sentinels",
            s.len()
        ));
    }
    if s[0] != Symbol::start() {
        return Err("does not begin with \"<\"".into());
    }
    if s[s.len() - 1] != Symbol::end() {
        return Err("does not end with \">\"".into());
    }
    if let Some(p) = s[1..s.len() - 1].iter().position(Symbol::is_sentinel) {
        return Err(format!(
            "sentinel inside the narrative at position {}",
            p + 1
        ));
    }
    Ok(())
}

impl Corpus {
    /// Wraps already sentinel-delimited narratives, validating each.
    pub fn new(narratives: Vec<Vec<Symbol>>) -> Result<Self> {
        for (index, s) in narratives.iter().enumerate() {
            check_wrapped(s).map_err(|reason| Error::MalformedNarrative { index, reason })?;
        }
        Ok(Corpus { narratives })
    }

    /// Adds sentinels around each body.
    pub fn from_bodies(bodies: Vec<Vec<Symbol>>) -> Self {
        let narratives = bodies
            .into_iter()
            .map(|b| {
                let mut s = Vec::with_capacity(b.len() + 2);
                s.push(Symbol::start());
                s.extend(b);
                s.push(Symbol::end());
                s
            })
            .collect();
        Corpus { narratives }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut bodies = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let body = line
                .split_whitespace()
                .map(|t| Symbol::new(t).map_err(|e| Error::parse(n + 1, e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            bodies.push(body);
        }
        Ok(Corpus::from_bodies(bodies))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Corpus::parse(&text).map_err(|e| e.with_path(path))
    }

    /// Serializes to the corpus format. Empty-body narratives have no line
    /// representation and are dropped.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.narratives {
            let body = &s[1..s.len() - 1];
            if body.is_empty() {
                continue;
            }
            let line: Vec<&str> = body.iter().map(Symbol::as_str).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn narratives(&self) -> &[Vec<Symbol>] {
        &self.narratives
    }

    pub fn len(&self) -> usize {
        self.narratives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.narratives.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec<Symbol>> {
        self.narratives.iter()
    }

    /// Interior symbols appearing anywhere in the corpus.
    pub fn vocabulary(&self) -> BTreeSet<Symbol> {
        self.interior().cloned().collect()
    }

    /// Occurrence count of each interior symbol.
    pub fn frequencies(&self) -> BTreeMap<Symbol, usize> {
        let mut out = BTreeMap::new();
        for s in self.interior() {
            *out.entry(s.clone()).or_insert(0) += 1;
        }
        out
    }

    fn interior(&self) -> impl Iterator<Item = &Symbol> {
        self.narratives.iter().flat_map(|s| &s[1..s.len() - 1])
    }

    /// Distinct narratives with their multiplicities, sorted.
    pub fn distinct(&self) -> Vec<(Vec<Symbol>, usize)> {
        distinct(&self.narratives)
    }
}

impl FromIterator<Vec<Symbol>> for Corpus {
    /// Collects sentinel-wrapped narratives without re-validating them.
    fn from_iter<I: IntoIterator<Item = Vec<Symbol>>>(iter: I) -> Self {
        Corpus {
            narratives: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Vec<Symbol>;
    type IntoIter = std::slice::Iter<'a, Vec<Symbol>>;
    fn into_iter(self) -> Self::IntoIter {
        self.narratives.iter()
    }
}

pub(crate) fn distinct<S: AsRef<[Symbol]>>(narratives: &[S]) -> Vec<(Vec<Symbol>, usize)> {
    let mut map: BTreeMap<&[Symbol], usize> = BTreeMap::new();
    for s in narratives {
        *map.entry(s.as_ref()).or_insert(0) += 1;
    }
    map.into_iter().map(|(s, n)| (s.to_vec(), n)).collect()
}
