//! Frequency and bigram baselines for gap prediction.

use std::collections::{BTreeMap, BTreeSet};

use super::eval_set::TestItem;
use crate::corpus::Corpus;
use crate::symbol::Symbol;

/// Training statistics the baselines predict from.
#[derive(Clone, Debug, Default)]
pub struct Baselines {
    frequency: BTreeMap<Symbol, usize>,
    /// `follows[p][x]`: how often event `x` comes right after `p` (which may
    /// be `"<"`).
    follows: BTreeMap<Symbol, BTreeMap<Symbol, usize>>,
}

/// Largest count; ties go to the smallest symbol.
fn argmax<'a>(counts: impl Iterator<Item = (&'a Symbol, usize)>) -> Option<&'a Symbol> {
    let mut best: Option<(&Symbol, usize)> = None;
    for (s, n) in counts {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((s, n));
        }
    }
    best.map(|(s, _)| s)
}

impl Baselines {
    pub fn new(train: &Corpus) -> Self {
        let mut follows: BTreeMap<Symbol, BTreeMap<Symbol, usize>> = BTreeMap::new();
        for s in train {
            for w in s.windows(2) {
                if w[1] != Symbol::end() {
                    *follows
                        .entry(w[0].clone())
                        .or_default()
                        .entry(w[1].clone())
                        .or_insert(0) += 1;
                }
            }
        }
        Baselines {
            frequency: train.frequencies(),
            follows,
        }
    }

    pub fn frequencies(&self) -> &BTreeMap<Symbol, usize> {
        &self.frequency
    }

    /// The most frequent training event missing from the observed
    /// narrative, or the most frequent event overall when none is missing.
    pub fn frequency(&self, item: &TestItem) -> Option<Symbol> {
        let seen: BTreeSet<&Symbol> = item.gapped.iter().collect();
        argmax(
            self.frequency
                .iter()
                .filter(|(s, _)| !seen.contains(s))
                .map(|(s, n)| (s, *n)),
        )
        .or_else(|| argmax(self.frequency.iter().map(|(s, n)| (s, *n))))
        .cloned()
    }

    /// The event that most often follows the one before the gap; falls
    /// back to [`Baselines::frequency`] when that event was never followed.
    pub fn conditional(&self, item: &TestItem) -> Option<Symbol> {
        let prev = &item.gapped[item.gap - 1];
        self.follows
            .get(prev)
            .and_then(|row| argmax(row.iter().map(|(s, n)| (s, *n))))
            .cloned()
            .or_else(|| self.frequency(item))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::seq;

    fn item(body: &[&str], pos: usize) -> TestItem {
        TestItem::new(&seq(body), pos).unwrap()
    }

    #[test]
    fn frequency_skips_observed_events() {
        let mut bodies = vec![seq(&["a"]); 5];
        bodies.extend(vec![seq(&["b"]); 3]);
        let b = Baselines::new(&Corpus::new(bodies).unwrap());
        assert_eq!(b.frequency(&item(&["a", "x"], 2)).unwrap().as_str(), "b");
        assert_eq!(
            b.frequency(&item(&["a", "b", "x"], 3)).unwrap().as_str(),
            "a"
        );
        assert_eq!(b.frequency(&item(&["x"], 1)).unwrap().as_str(), "a");
    }

    #[test]
    fn conditional_uses_bigrams() {
        let mut bodies = vec![seq(&["a", "b"]); 3];
        bodies.push(seq(&["a", "c"]));
        let b = Baselines::new(&Corpus::new(bodies).unwrap());
        assert_eq!(b.conditional(&item(&["a", "x"], 2)).unwrap().as_str(), "b");
        assert_eq!(b.conditional(&item(&["x", "b"], 1)).unwrap().as_str(), "a");
        // "q" never seen: frequency fallback ("a" is the most frequent
        // event not in the narrative).
        assert_eq!(b.conditional(&item(&["q", "x"], 2)).unwrap().as_str(), "a");
    }
}
