//! State and transition posteriors of a single sequence.

use super::trellis::{backward_lattice, forward_lattice, Lattice};
use super::{CompiledHmm, UNDERFLOW};
use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};
use crate::symbol::{Emission, Symbol};

/// Posteriors of one sequence. Transition posteriors are kept with time
/// marginalized out, as the counts they feed are time-independent.
#[derive(Clone, Debug)]
pub struct Posteriors {
    z: f64,
    gamma: Lattice,
    counts: CountTable,
}

impl Posteriors {
    /// `P(obs)` under the truncated model.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Probability of being in `q` after `t` steps with `i` symbols
    /// produced, given the whole sequence.
    pub fn gamma(&self, q: StateId, t: usize, i: usize) -> f64 {
        self.gamma.get(q, t, i)
    }

    /// Expected number of visits to `q`.
    pub fn visits(&self, q: StateId) -> f64 {
        self.counts.visits(q)
    }

    /// Expected number of `q → q'` transitions that emit `o` on arrival.
    pub fn delta(&self, q: StateId, q2: StateId, o: &Emission) -> f64 {
        self.counts.emission(q, q2, o)
    }

    /// The same posteriors as a count table for one sequence.
    pub fn counts(&self) -> &CountTable {
        &self.counts
    }
}

/// `cum_q(s, i) = Σ_{τ <= s} β_q(τ, i)`, stored in the lattice layout.
fn cumulative(mut beta: Lattice) -> Lattice {
    let n = beta.n();
    let w = beta.m() + 1;
    let size = n * w;
    let data = beta.data_mut();
    for t in 1..data.len() / size {
        let (head, tail) = data.split_at_mut(t * size);
        let prev = &head[(t - 1) * size..];
        for (c, p) in tail[..size].iter_mut().zip(prev) {
            *c += p;
        }
    }
    beta
}

pub(crate) struct Trellis {
    pub z: f64,
    pub alpha: Lattice,
    pub cum: Lattice,
}

pub(crate) fn trellis(c: &CompiledHmm, enc: &[usize], t_max: usize) -> Trellis {
    let alpha = forward_lattice(c, enc, t_max);
    let m = enc.len() - 1;
    let mut z = 0.0;
    for t in 0..=t_max {
        for q in 0..c.n_states() {
            z += alpha.at(q, t, m);
        }
    }
    let cum = cumulative(backward_lattice(c, enc, t_max));
    Trellis { z, alpha, cum }
}

/// Expected counts of one sequence, normalized by `z`.
pub(crate) fn sequence_counts(
    c: &CompiledHmm,
    enc: &[usize],
    obs: &[Symbol],
    tr: &Trellis,
) -> CountTable {
    let n = c.n_states();
    let t_max = tr.alpha.t_max();
    let m = enc.len() - 1;
    let e = c.emission_table(enc);
    let w = m + 1;
    let inv_z = 1.0 / tr.z;
    let mut out = CountTable::new();

    for q in 0..n {
        let mut g = 0.0;
        for t in 0..=t_max {
            let a = tr.alpha.row(q, t);
            let b = tr.cum.row(q, t_max - t);
            g += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        }
        if g > 0.0 {
            out.add_visits(c.ids[q], g * inv_z);
        }
    }

    // Per edge: mass arriving with a null emission, and per observation
    // index the mass arriving with `o_{i+1}`.
    let mut by_index = vec![0.0; w];
    for k in 0..n {
        for &(j, tp) in &c.children[k] {
            let lam = c.null[j];
            let ej = &e[j * w..j * w + w];
            let mut null_mass = 0.0;
            by_index.iter_mut().for_each(|v| *v = 0.0);
            for t in 0..t_max {
                let a = tr.alpha.row(k, t);
                let b = tr.cum.row(j, t_max - t - 1);
                if lam > 0.0 {
                    null_mass += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                }
                for i in 0..m {
                    by_index[i] += a[i] * b[i + 1];
                }
            }
            let (from, to) = (c.ids[k], c.ids[j]);
            let mut total = 0.0;
            let null_mass = tp * lam * null_mass * inv_z;
            if null_mass > 0.0 {
                out.add_emission(from, to, Emission::Null, null_mass);
                total += null_mass;
            }
            for i in 0..m {
                let v = tp * ej[i + 1] * by_index[i] * inv_z;
                if v > 0.0 {
                    out.add_emission(from, to, Emission::Symbol(obs[i + 1].clone()), v);
                    total += v;
                }
            }
            if total > 0.0 {
                out.add_transition(from, to, total);
            }
        }
    }
    out
}

/// `z`, `γ` and `δ` for one sentinel-wrapped sequence.
pub fn posteriors(hmm: &Hmm, obs: &[Symbol], t_max: usize) -> Result<Posteriors> {
    let c = CompiledHmm::new(hmm);
    let enc = c.encode(obs)?;
    let tr = trellis(&c, &enc, t_max);
    if !(tr.z >= UNDERFLOW) {
        return Err(Error::Unreachable);
    }
    let counts = sequence_counts(&c, &enc, obs, &tr);
    let mut gamma = tr.alpha.clone();
    let w = enc.len();
    for q in 0..c.n_states() {
        for t in 0..=t_max {
            for i in 0..w {
                let idx = gamma.idx(q, t, i);
                gamma.data_mut()[idx] *= tr.cum.at(q, t_max - t, i) / tr.z;
            }
        }
    }
    Ok(Posteriors {
        z: tr.z,
        gamma,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::fixtures::{m0, sym};
    use crate::symbol::seq;
    use std::collections::BTreeMap;

    const S1: StateId = StateId(2);

    #[test]
    fn m0_observed() {
        let p = posteriors(&m0(), &seq(&["a"]), 5).unwrap();
        assert!((p.z() - 0.7).abs() < 1e-15);
        assert!((p.visits(S1) - 1.0).abs() < 1e-12);
        assert!((p.gamma(S1, 1, 1) - 1.0).abs() < 1e-12);
        assert!((p.delta(Hmm::INITIAL, S1, &sym("a")) - 1.0).abs() < 1e-12);
        p.counts().check(1e-9).unwrap();
    }

    #[test]
    fn m0_null() {
        let p = posteriors(&m0(), &seq(&[]), 5).unwrap();
        assert!((p.z() - 0.3).abs() < 1e-15);
        assert!((p.delta(Hmm::INITIAL, S1, &Emission::Null) - 1.0).abs() < 1e-12);
        assert_eq!(p.delta(Hmm::INITIAL, S1, &sym("a")), 0.0);
    }

    #[test]
    fn impossible_observation_is_unreachable() {
        // s1 emits only "a"; "b" is in the alphabet through s2.
        let (s2, s1) = (StateId(3), S1);
        let order = vec![Hmm::INITIAL, s1, s2, Hmm::FINAL];
        let trans = BTreeMap::from([
            (Hmm::INITIAL, BTreeMap::from([(s1, 1.0)])),
            (s1, BTreeMap::from([(Hmm::FINAL, 1.0)])),
            (s2, BTreeMap::from([(Hmm::FINAL, 1.0)])),
        ]);
        let emit = BTreeMap::from([
            (s1, BTreeMap::from([(sym("a"), 1.0)])),
            (s2, BTreeMap::from([(sym("b"), 1.0)])),
        ]);
        let h = Hmm::from_parts(order, trans, emit);
        assert!(matches!(
            posteriors(&h, &seq(&["b"]), 5),
            Err(Error::Unreachable)
        ));
        // Outside the alphabet altogether.
        assert!(posteriors(&m0(), &seq(&["b"]), 5).is_err());
    }

    #[test]
    fn gamma_mass_per_step_is_at_most_one() {
        let p = posteriors(&m0(), &seq(&[]), 6).unwrap();
        for t in 0..=6 {
            let s: f64 = [Hmm::INITIAL, S1, Hmm::FINAL]
                .iter()
                .flat_map(|q| (0..2).map(move |i| (*q, i)))
                .map(|(q, i)| p.gamma(q, t, i))
                .sum();
            assert!(s <= 1.0 + 1e-9);
        }
    }
}
