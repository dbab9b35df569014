//! Two-index Forward–Backward with null emissions.
//!
//! The trellis is indexed by state, time step `t` (number of transitions
//! taken) and observation index `i` (number of symbols after `"<"` already
//! produced). Null emissions advance `t` but not `i`. Because null
//! self-loops make the set of paths infinite, every computation is
//! truncated at a horizon `T_max`; see [`Horizon`].

mod estep;
mod posteriors;
mod predict;
mod trellis;

use std::collections::BTreeMap;
use std::fmt;

pub use estep::{expected_counts, EStep};
pub use posteriors::{posteriors, Posteriors};
pub use predict::{predict_missing, Prediction};
pub use trellis::{backward, forward, Lattice};

use crate::corpus::check_wrapped;
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};
use crate::symbol::{Emission, Symbol};

/// Probabilities below this are treated as zero.
pub const UNDERFLOW: f64 = 1e-300;

/// `T_max = ceil(multiplier · (m + |Q|))` where `m` is the index of the
/// final observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Horizon {
    pub multiplier: f64,
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon { multiplier: 1.0 }
    }
}

impl Horizon {
    pub fn t_max(&self, m: usize, n_states: usize) -> usize {
        ((m + n_states) as f64 * self.multiplier)
            .ceil()
            .max(m as f64) as usize
    }

    /// Horizon for a full sentinel-wrapped sequence of `len` symbols.
    pub fn for_sequence(&self, len: usize, hmm: &Hmm) -> usize {
        self.t_max(len.saturating_sub(1), hmm.n_states())
    }
}

/// A log-probability where zero probability is an explicit value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogProb {
    Finite(f64),
    Unreachable,
}

impl LogProb {
    pub fn from_prob(z: f64) -> Self {
        if z < UNDERFLOW || !z.is_finite() {
            LogProb::Unreachable
        } else {
            LogProb::Finite(z.ln())
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            LogProb::Finite(x) => Some(x),
            LogProb::Unreachable => None,
        }
    }

    /// The log-probability, with unreachable mapped to `ln(UNDERFLOW)`.
    pub fn or_floor(self) -> f64 {
        self.value().unwrap_or_else(|| UNDERFLOW.ln())
    }

    pub fn is_reachable(self) -> bool {
        matches!(self, LogProb::Finite(_))
    }
}

impl PartialOrd for LogProb {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use LogProb::*;
        match (self, other) {
            (Unreachable, Unreachable) => Some(std::cmp::Ordering::Equal),
            (Unreachable, Finite(_)) => Some(std::cmp::Ordering::Less),
            (Finite(_), Unreachable) => Some(std::cmp::Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogProb::Finite(x) => write!(f, "{x}"),
            LogProb::Unreachable => f.write_str("unreachable"),
        }
    }
}

/// Dense, index-based view of a model for the dynamic programs. State
/// indices follow the model's topological order, so index 0 is the initial
/// state and `n - 1` the final one.
#[derive(Clone, Debug)]
pub struct CompiledHmm {
    ids: Vec<StateId>,
    parents: Vec<Vec<(usize, f64)>>,
    children: Vec<Vec<(usize, f64)>>,
    null: Vec<f64>,
    columns: BTreeMap<Symbol, usize>,
    emit: Vec<f64>,
}

impl CompiledHmm {
    pub fn new(hmm: &Hmm) -> Self {
        let ids = hmm.states().to_vec();
        let n = ids.len();
        let index: BTreeMap<StateId, usize> =
            ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let columns: BTreeMap<Symbol, usize> = hmm
            .alphabet()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let ncols = columns.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut null = vec![0.0; n];
        let mut emit = vec![0.0; n * ncols];
        for (k, q) in ids.iter().enumerate() {
            for (s, p) in hmm.successors(*q) {
                let j = index[&s];
                children[k].push((j, p));
                parents[j].push((k, p));
            }
            for (o, p) in hmm.emissions(*q) {
                match o {
                    Emission::Null => null[k] = p,
                    Emission::Symbol(s) => emit[k * ncols + columns[s]] = p,
                }
            }
        }
        for row in &mut parents {
            row.sort_by_key(|(k, _)| *k);
        }
        CompiledHmm {
            ids,
            parents,
            children,
            null,
            columns,
            emit,
        }
    }

    pub fn n_states(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[StateId] {
        &self.ids
    }

    /// Maps a sentinel-wrapped sequence to alphabet columns.
    pub(crate) fn encode(&self, obs: &[Symbol]) -> Result<Vec<usize>> {
        check_wrapped(obs).map_err(|reason| Error::MalformedNarrative { index: 0, reason })?;
        obs.iter()
            .enumerate()
            .map(|(position, s)| {
                self.columns
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::UnknownSymbol {
                        symbol: s.to_string(),
                        position,
                    })
            })
            .collect()
    }

    /// `e[j * (m + 1) + i] = Ω(o_i | q_j)`.
    pub(crate) fn emission_table(&self, enc: &[usize]) -> Vec<f64> {
        let ncols = self.columns.len();
        let w = enc.len();
        let mut e = vec![0.0; self.ids.len() * w];
        for j in 0..self.ids.len() {
            for (i, col) in enc.iter().enumerate() {
                e[j * w + i] = self.emit[j * ncols + col];
            }
        }
        e
    }

    /// `log P(obs)` under the truncated path distribution.
    pub fn log_likelihood(&self, obs: &[Symbol], t_max: usize) -> LogProb {
        match self.encode(obs) {
            Ok(enc) => LogProb::from_prob(trellis::likelihood(self, &enc, t_max)),
            Err(_) => LogProb::Unreachable,
        }
    }
}

/// `log P(obs)`, i.e. the log of the normalizer `z`; malformed sequences and
/// sequences with symbols outside the model alphabet are unreachable.
pub fn sequence_likelihood(hmm: &Hmm, obs: &[Symbol], t_max: usize) -> LogProb {
    CompiledHmm::new(hmm).log_likelihood(obs, t_max)
}
