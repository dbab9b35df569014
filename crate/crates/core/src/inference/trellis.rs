//! Forward and backward lattices.

use super::CompiledHmm;
use crate::error::Result;
use crate::hmm::{Hmm, StateId};
use crate::symbol::Symbol;

/// A dense `(t, state, i)` table of forward or backward values.
#[derive(Clone, Debug)]
pub struct Lattice {
    ids: Vec<StateId>,
    n: usize,
    w: usize,
    t_max: usize,
    data: Vec<f64>,
}

impl Lattice {
    fn zeros(ids: &[StateId], m: usize, t_max: usize) -> Self {
        let n = ids.len();
        let w = m + 1;
        Lattice {
            ids: ids.to_vec(),
            n,
            w,
            t_max,
            data: vec![0.0; (t_max + 1) * n * w],
        }
    }

    #[inline]
    pub(crate) fn idx(&self, q: usize, t: usize, i: usize) -> usize {
        (t * self.n + q) * self.w + i
    }

    /// Value at state `q`, time `t`, observation index `i`; zero outside
    /// the table.
    pub fn get(&self, q: StateId, t: usize, i: usize) -> f64 {
        match self.ids.iter().position(|s| *s == q) {
            Some(k) if t <= self.t_max && i < self.w => self.data[self.idx(k, t, i)],
            _ => 0.0,
        }
    }

    #[inline]
    pub(crate) fn at(&self, q: usize, t: usize, i: usize) -> f64 {
        self.data[self.idx(q, t, i)]
    }

    /// Row of observation indices for state `q` at time `t`.
    #[inline]
    pub(crate) fn row(&self, q: usize, t: usize) -> &[f64] {
        let s = self.idx(q, t, 0);
        &self.data[s..s + self.w]
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    /// Index of the last observation (`">"`).
    pub fn m(&self) -> usize {
        self.w - 1
    }

    pub fn states(&self) -> &[StateId] {
        &self.ids
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn layer_mut(&mut self, t: usize) -> (&[f64], &mut [f64]) {
        let size = self.n * self.w;
        let (head, tail) = self.data.split_at_mut(t * size);
        (&head[(t - 1) * size..], &mut tail[..size])
    }
}

/// One forward step from `prev` into `cur` (both `n * w`, `cur` zeroed).
/// Returns whether any entry of `cur` is nonzero.
#[inline]
fn forward_step(
    c: &CompiledHmm,
    e: &[f64],
    w: usize,
    imax: usize,
    prev: &[f64],
    cur: &mut [f64],
) -> bool {
    let n = c.n_states();
    let mut any = false;
    for j in 1..n {
        let lam = c.null[j];
        let ej = &e[j * w..j * w + w];
        let row = &mut cur[j * w..j * w + w];
        for &(k, tp) in &c.parents[j] {
            let pk = &prev[k * w..k * w + w];
            if lam > 0.0 {
                let f = tp * lam;
                for i in 0..=imax {
                    row[i] += f * pk[i];
                }
            }
            for i in 1..=imax {
                row[i] += tp * ej[i] * pk[i - 1];
            }
        }
        any |= row[..=imax].iter().any(|v| *v != 0.0);
    }
    any
}

/// `α_q(t, i)` for every state, `t <= t_max` and `i <= m`.
pub(crate) fn forward_lattice(c: &CompiledHmm, enc: &[usize], t_max: usize) -> Lattice {
    let w = enc.len();
    let m = w - 1;
    let e = c.emission_table(enc);
    let mut lat = Lattice::zeros(&c.ids, m, t_max);
    lat.data[0] = 1.0;
    for t in 1..=t_max {
        let imax = t.min(m);
        let (prev, cur) = lat.layer_mut(t);
        if !forward_step(c, &e, w, imax, prev, cur) {
            break;
        }
    }
    lat
}

/// `β_q(t, i)`: probability of producing `o_{i+1..m}` in exactly `t` more
/// steps from `q`.
pub(crate) fn backward_lattice(c: &CompiledHmm, enc: &[usize], t_max: usize) -> Lattice {
    let w = enc.len();
    let m = w - 1;
    let n = c.n_states();
    let e = c.emission_table(enc);
    let mut lat = Lattice::zeros(&c.ids, m, t_max);
    let last = lat.idx(n - 1, 0, m);
    lat.data[last] = 1.0;
    for t in 1..=t_max {
        let imin = m.saturating_sub(t);
        let (prev, cur) = lat.layer_mut(t);
        let mut any = false;
        for j in 0..n {
            let row = &mut cur[j * w..j * w + w];
            for &(k, tp) in &c.children[j] {
                let lam = c.null[k];
                let ek = &e[k * w..k * w + w];
                let bk = &prev[k * w..k * w + w];
                if lam > 0.0 {
                    let f = tp * lam;
                    for i in imin..=m {
                        row[i] += f * bk[i];
                    }
                }
                for i in imin..m {
                    row[i] += tp * ek[i + 1] * bk[i + 1];
                }
            }
            any |= row.iter().any(|v| *v != 0.0);
        }
        if !any {
            break;
        }
    }
    lat
}

/// `z = Σ_t Σ_q α_q(t, m)` with two rolling layers.
pub(crate) fn likelihood(c: &CompiledHmm, enc: &[usize], t_max: usize) -> f64 {
    let w = enc.len();
    let m = w - 1;
    let n = c.n_states();
    let e = c.emission_table(enc);
    let mut prev = vec![0.0; n * w];
    let mut cur = vec![0.0; n * w];
    prev[0] = 1.0;
    let mut z = 0.0;
    for t in 1..=t_max {
        cur.iter_mut().for_each(|v| *v = 0.0);
        let imax = t.min(m);
        if !forward_step(c, &e, w, imax, &prev, &mut cur) {
            break;
        }
        for q in 0..n {
            z += cur[q * w + m];
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    z
}

/// Forward lattice `α` of `obs` (sentinel-wrapped) truncated at `t_max`.
pub fn forward(hmm: &Hmm, obs: &[Symbol], t_max: usize) -> Result<Lattice> {
    let c = CompiledHmm::new(hmm);
    let enc = c.encode(obs)?;
    Ok(forward_lattice(&c, &enc, t_max))
}

/// Backward lattice `β` of `obs` (sentinel-wrapped) truncated at `t_max`.
pub fn backward(hmm: &Hmm, obs: &[Symbol], t_max: usize) -> Result<Lattice> {
    let c = CompiledHmm::new(hmm);
    let enc = c.encode(obs)?;
    Ok(backward_lattice(&c, &enc, t_max))
}
