//! Mined ordering constraints of the form "X never follows Y".

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::hmm::Hmm;
use crate::symbol::{Emission, Symbol};

/// What counts as "X follows Y".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FollowMode {
    /// X is the next event after Y.
    #[default]
    Immediate,
    /// X occurs anywhere after Y in the same narrative.
    Eventual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiningConfig {
    /// Baseline violation rate under the null hypothesis.
    pub p0: f64,
    /// Include a rule when the one-sided p-value is below this.
    pub significance: f64,
    /// Pairs with fewer opportunities are skipped.
    pub min_opportunities: usize,
    pub follow: FollowMode,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            p0: 0.05,
            significance: 0.01,
            min_opportunities: 20,
            follow: FollowMode::Immediate,
        }
    }
}

/// "`later` never follows `earlier`", with the evidence it was mined from:
/// `opportunities` occurrences of `earlier` with some event after them,
/// `violations` of which were followed by `later`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Constraint {
    pub later: Symbol,
    pub earlier: Symbol,
    pub opportunities: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    rules: Vec<Constraint>,
}

/// `z = (v/n − p0) / sqrt(p0 (1 − p0) / n)`.
pub fn z_statistic(n: usize, v: usize, p0: f64) -> f64 {
    let n = n as f64;
    (v as f64 / n - p0) / (p0 * (1.0 - p0) / n).sqrt()
}

/// One-sided p-value of observing a rate this low if the true rate is `p0`.
pub fn p_value(n: usize, v: usize, p0: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.cdf(z_statistic(n, v, p0))
}

impl ConstraintSet {
    pub fn new(mut rules: Vec<Constraint>) -> Result<Self> {
        for r in &rules {
            if r.later == r.earlier {
                return Err(Error::Config(format!(
                    "constraint relates {} to itself",
                    r.later
                )));
            }
            if r.later.is_sentinel() || r.earlier.is_sentinel() {
                return Err(Error::Config(
                    "constraints may not involve sentinels".into(),
                ));
            }
            if r.violations > r.opportunities {
                return Err(Error::Config(format!(
                    "constraint {} NEVER_FOLLOWS {} has more violations than opportunities",
                    r.later, r.earlier
                )));
            }
        }
        rules.sort();
        rules.dedup_by(|a, b| a.later == b.later && a.earlier == b.earlier);
        Ok(ConstraintSet { rules })
    }

    pub fn rules(&self) -> &[Constraint] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let _ = writeln!(
                out,
                "{} NEVER_FOLLOWS {} {} {}",
                r.later, r.earlier, r.opportunities, r.violations
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 || f[1] != "NEVER_FOLLOWS" {
                return Err(Error::parse(n + 1, "expected \"X NEVER_FOLLOWS Y n v\""));
            }
            let sym = |s: &str| Symbol::new(s).map_err(|e| Error::parse(n + 1, e.to_string()));
            let int = |s: &str, name: &str| {
                s.parse::<usize>().map_err(|_| {
                    Error::parse(n + 1, format!("{name}: expected a count, found {s:?}"))
                })
            };
            rules.push(Constraint {
                later: sym(f[0])?,
                earlier: sym(f[2])?,
                opportunities: int(f[3], "n")?,
                violations: int(f[4], "v")?,
            });
        }
        ConstraintSet::new(rules).map_err(|e| match e {
            Error::Config(m) => Error::parse(0, m),
            e => e,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ConstraintSet::parse(&text).map_err(|e| e.with_path(path))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Tests every ordered pair of interior symbols and keeps the rules whose
/// follow rate is significantly below `p0`.
pub fn mine_constraints<S: AsRef<[Symbol]>>(
    narratives: &[S],
    config: &MiningConfig,
) -> ConstraintSet {
    // For each earlier symbol Y: opportunities, and per later symbol X the
    // number of opportunities where X follows.
    let mut opportunities: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut follows: BTreeMap<(Symbol, Symbol), usize> = BTreeMap::new();
    let mut vocabulary: BTreeSet<Symbol> = BTreeSet::new();
    for s in narratives {
        let s = s.as_ref();
        if s.len() < 2 {
            continue;
        }
        let body = &s[1..s.len() - 1];
        vocabulary.extend(body.iter().cloned());
        for (k, y) in body.iter().enumerate() {
            if k + 1 >= body.len() {
                continue;
            }
            *opportunities.entry(y.clone()).or_insert(0) += 1;
            let after: BTreeSet<&Symbol> = match config.follow {
                FollowMode::Immediate => BTreeSet::from([&body[k + 1]]),
                FollowMode::Eventual => body[k + 1..].iter().collect(),
            };
            for x in after {
                *follows.entry((x.clone(), y.clone())).or_insert(0) += 1;
            }
        }
    }
    let vocabulary: Vec<Symbol> = vocabulary.into_iter().collect();
    let rules: Vec<Constraint> = vocabulary
        .par_iter()
        .flat_map_iter(|y| {
            let n = opportunities.get(y).copied().unwrap_or(0);
            let vocabulary = &vocabulary;
            let follows = &follows;
            vocabulary.iter().filter_map(move |x| {
                if x == y || n == 0 || n < config.min_opportunities {
                    return None;
                }
                let v = follows.get(&(x.clone(), y.clone())).copied().unwrap_or(0);
                (p_value(n, v, config.p0) < config.significance).then(|| Constraint {
                    later: x.clone(),
                    earlier: y.clone(),
                    opportunities: n,
                    violations: v,
                })
            })
        })
        .collect();
    ConstraintSet::new(rules).expect("mined rules are well formed")
}

/// For each state, the symbols that can be output immediately after the
/// state's own output: those of successors, looking through successors
/// that may emit nothing.
fn next_outputs(hmm: &Hmm) -> BTreeMap<crate::hmm::StateId, BTreeSet<Symbol>> {
    let mut out: BTreeMap<_, BTreeSet<Symbol>> = BTreeMap::new();
    for &q in hmm.states().iter().rev() {
        let mut set = BTreeSet::new();
        for (c, _) in hmm.successors(q) {
            set.extend(hmm.emissions(c).filter_map(|(o, _)| o.symbol().cloned()));
            if c != q && hmm.null_probability(c) > 0.0 {
                if let Some(more) = out.get(&c) {
                    set.extend(more.iter().cloned());
                }
            }
        }
        out.insert(q, set);
    }
    out
}

/// Number of rules the model can break, i.e. rules `(X, Y)` for which some
/// output of the model has `X` right after `Y`.
pub fn count_violations(hmm: &Hmm, constraints: &ConstraintSet) -> usize {
    if constraints.is_empty() {
        return 0;
    }
    let next = next_outputs(hmm);
    let mut can_follow: BTreeSet<(&Symbol, &Symbol)> = BTreeSet::new();
    for &q in hmm.states() {
        for (o, _) in hmm.emissions(q) {
            if let Emission::Symbol(y) = o {
                for x in &next[&q] {
                    can_follow.insert((x, y));
                }
            }
        }
    }
    constraints
        .rules()
        .iter()
        .filter(|r| can_follow.contains(&(&r.later, &r.earlier)))
        .count()
}
