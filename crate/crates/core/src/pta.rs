//! Prefix tree acceptor construction.

use std::collections::BTreeMap;

use crate::corpus::check_wrapped;
use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};
use crate::symbol::{Emission, Symbol};

/// Builds the tree-shaped model that generates exactly the given narratives.
///
/// Narratives are inserted one at a time; each walks the existing tree while
/// its symbols match and branches at the first difference. Every branch ends
/// in the shared final state. Each interior state emits its symbol with
/// probability 1, transition probabilities are the empirical branching
/// fractions, and the returned counts are the raw traversal counts.
pub fn build_pta<S: AsRef<[Symbol]>>(narratives: &[S]) -> Result<(Hmm, CountTable)> {
    if narratives.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut children: BTreeMap<(StateId, Symbol), StateId> = BTreeMap::new();
    let mut symbol_of: BTreeMap<StateId, Symbol> = BTreeMap::new();
    let mut order = vec![Hmm::INITIAL];
    let mut next = 2u32;
    let mut counts = CountTable::new();

    for (index, s) in narratives.iter().enumerate() {
        let s = s.as_ref();
        check_wrapped(s).map_err(|reason| Error::MalformedNarrative { index, reason })?;
        let mut cur = Hmm::INITIAL;
        counts.add_visits(cur, 1.0);
        for o in &s[1..s.len() - 1] {
            let child = *children.entry((cur, o.clone())).or_insert_with(|| {
                let id = StateId(next);
                next += 1;
                order.push(id);
                symbol_of.insert(id, o.clone());
                id
            });
            counts.add_transition(cur, child, 1.0);
            counts.add_emission(cur, child, Emission::Symbol(o.clone()), 1.0);
            counts.add_visits(child, 1.0);
            cur = child;
        }
        counts.add_transition(cur, Hmm::FINAL, 1.0);
        counts.add_emission(cur, Hmm::FINAL, Emission::Symbol(Symbol::end()), 1.0);
        counts.add_visits(Hmm::FINAL, 1.0);
    }
    order.push(Hmm::FINAL);

    let mut trans = BTreeMap::new();
    for q in &order {
        let total = counts.visits(*q);
        let row: BTreeMap<StateId, f64> =
            counts.outgoing(*q).map(|(s, c)| (s, c / total)).collect();
        if !row.is_empty() {
            trans.insert(*q, row);
        }
    }
    let emit = symbol_of
        .into_iter()
        .map(|(q, o)| (q, BTreeMap::from([(Emission::Symbol(o), 1.0)])))
        .collect();
    Ok((Hmm::from_parts(order, trans, emit), counts))
}
