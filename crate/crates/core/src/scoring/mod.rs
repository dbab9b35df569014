//! The structure score: a prior over model size and constraint violations
//! plus the corpus log-likelihood.

mod constraints;
mod likelihood;

pub use constraints::{
    count_violations, mine_constraints, p_value, z_statistic, Constraint, ConstraintSet,
    FollowMode, MiningConfig,
};
pub use likelihood::{log_likelihood_approx, log_likelihood_exact, ApproxLikelihood};

use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::hmm::Hmm;
use crate::inference::Horizon;
use crate::symbol::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ScoreMode {
    /// Forward algorithm over every narrative.
    #[default]
    Exact,
    /// Expected complete-data likelihood from the count table.
    Approx,
}

impl std::str::FromStr for ScoreMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ScoreMode::Exact),
            "approx" => Ok(ScoreMode::Approx),
            _ => Err(Error::Config(format!(
                "unknown scoring mode {s:?} (expected exact or approx)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreConfig {
    /// Penalty per state.
    pub kappa_q: f64,
    /// Penalty per nonzero transition, self-loops included.
    pub kappa_t: f64,
    /// Penalty per violated constraint.
    pub kappa_c: f64,
    pub mining: MiningConfig,
    pub mode: ScoreMode,
    pub horizon: Horizon,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            kappa_q: 1.0,
            kappa_t: 1.0,
            kappa_c: 1.0,
            mining: MiningConfig::default(),
            mode: ScoreMode::Exact,
            horizon: Horizon::default(),
        }
    }
}

impl ScoreConfig {
    pub fn check(&self) -> Result<()> {
        for (name, k) in [
            ("kappa_q", self.kappa_q),
            ("kappa_t", self.kappa_t),
            ("kappa_c", self.kappa_c),
        ] {
            if !(k >= 0.0) {
                return Err(Error::Config(format!("{name} must be nonnegative")));
            }
        }
        let s = self.mining.significance;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Config("significance must lie in (0, 1)".into()));
        }
        let p0 = self.mining.p0;
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::Config("p0 must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// `−(κq |Q| + κt |T| + κc |C|)`, dropping the model-independent
/// normalizer.
pub fn log_prior(hmm: &Hmm, constraints: &ConstraintSet, config: &ScoreConfig) -> f64 {
    let mut s =
        config.kappa_q * hmm.n_states() as f64 + config.kappa_t * hmm.n_transitions() as f64;
    if config.kappa_c != 0.0 {
        s += config.kappa_c * count_violations(hmm, constraints) as f64;
    }
    -s
}

/// Log posterior of the structure up to a constant.
pub fn score<S: AsRef<[Symbol]>>(
    hmm: &Hmm,
    counts: &CountTable,
    narratives: &[S],
    constraints: &ConstraintSet,
    config: &ScoreConfig,
) -> Result<f64> {
    let ll = match config.mode {
        ScoreMode::Exact => log_likelihood_exact(hmm, narratives, config.horizon),
        ScoreMode::Approx => log_likelihood_approx(hmm, counts)?,
    };
    Ok(log_prior(hmm, constraints, config) + ll)
}
