//! Exact language equivalence of nondeterministic parity automata through
//! determinisation, complementation, Buchi intersection and emptiness.

use std::collections::BTreeMap;

use crate::automaton::{Automaton, AutomatonBuilder, AutomatonClass, Priority, StateId};
use crate::error::{Error, Result};
use crate::formula::TransitionFormula;
use crate::lasso::{npw_emptiness, LassoWord};
use crate::transform::safra::{complement_dpw, determinise_npw, npw_to_nbw};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactVerdict {
    Equivalent,
    Counterexample(LassoWord),
}

impl ExactVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, ExactVerdict::Equivalent)
    }
}

/// Buchi intersection with the usual two-phase flag: phase 0 waits for an
/// accepting transition of the left automaton, phase 1 for one of the right,
/// and completing the handshake is the accepting event.
fn buchi_intersection(left: &Automaton, right: &Automaton) -> Result<Automaton> {
    if left.alphabet() != right.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    type Key = (StateId, StateId, u8);
    let start: Key = (left.initial(), right.initial(), 0);
    let mut ids: BTreeMap<Key, StateId> = [(start, 0)].into();
    let mut order = vec![start];
    let mut frontier = vec![start];
    let mut rows: BTreeMap<(StateId, usize), Vec<(StateId, Priority)>> = BTreeMap::new();
    while let Some((ql, qr, phase)) = frontier.pop() {
        let sid = ids[&(ql, qr, phase)];
        for a in 0..left.letter_count() {
            let mut targets = Vec::new();
            for tl in left.targets(ql, a) {
                for tr in right.targets(qr, a) {
                    let left_acc = left.priority(ql, a, tl) == 2;
                    let right_acc = right.priority(qr, a, tr) == 2;
                    let (next_phase, priority) = match phase {
                        0 => (u8::from(left_acc), 1),
                        _ => {
                            if right_acc {
                                (0, 2)
                            } else {
                                (1, 1)
                            }
                        }
                    };
                    let key = (tl, tr, next_phase);
                    let tid = *ids.entry(key).or_insert_with(|| {
                        order.push(key);
                        frontier.push(key);
                        order.len() - 1
                    });
                    targets.push((tid, priority));
                }
            }
            rows.insert((sid, a), targets);
        }
    }
    let mut b = AutomatonBuilder::from_letters(left.alphabet().to_vec());
    b.add_states(order.len());
    let mut sink = None;
    if rows.values().any(|t| t.is_empty()) {
        sink = Some(b.add_state());
    }
    for ((q, a), mut targets) in rows {
        targets.sort_unstable();
        targets.dedup();
        if targets.is_empty() {
            let s = sink.unwrap();
            b.transition(q, a, TransitionFormula::atom(s), &[(s, 1)]);
        } else {
            let f = TransitionFormula::any_of(targets.iter().map(|(t, _)| *t));
            b.transition(q, a, f, &targets);
        }
    }
    if let Some(s) = sink {
        for a in 0..left.letter_count() {
            b.transition(s, a, TransitionFormula::atom(s), &[(s, 1)]);
        }
    }
    Ok(b.build())
}

/// A lasso accepted by `a` but not by `b`, if any.
fn difference_witness(a: &Automaton, b: &Automaton) -> Result<Option<LassoWord>> {
    let left = npw_to_nbw(a)?;
    let right = npw_to_nbw(&complement_dpw(&determinise_npw(b)?)?)?;
    npw_emptiness(&buchi_intersection(&left, &right)?)
}

/// Exact equivalence of two nondeterministic (or deterministic) parity
/// automata, with a witness lasso from the symmetric difference on failure.
pub fn exact_equiv(a: &Automaton, b: &Automaton) -> Result<ExactVerdict> {
    for aut in [a, b] {
        if !matches!(
            aut.classify(),
            AutomatonClass::Nondeterministic | AutomatonClass::Deterministic
        ) {
            return Err(Error::NotNondeterministic);
        }
    }
    if a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    if let Some(w) = difference_witness(a, b)? {
        return Ok(ExactVerdict::Counterexample(w));
    }
    if let Some(w) = difference_witness(b, a)? {
        return Ok(ExactVerdict::Counterexample(w));
    }
    Ok(ExactVerdict::Equivalent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::membership;

    fn inf_a() -> Automaton {
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 2);
        b.uniform(q, 1, TransitionFormula::atom(q), 1);
        b.build()
    }

    fn fin_a() -> Automaton {
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 1);
        b.uniform(q, 1, TransitionFormula::atom(q), 0);
        b.build()
    }

    #[test]
    fn self_equivalence() {
        assert!(exact_equiv(&inf_a(), &inf_a()).unwrap().is_equivalent());
    }

    #[test]
    fn inf_a_differs_from_fin_a_with_valid_witness() {
        let (x, y) = (inf_a(), fin_a());
        match exact_equiv(&x, &y).unwrap() {
            ExactVerdict::Counterexample(w) => {
                assert_ne!(membership(&x, &w).unwrap(), membership(&y, &w).unwrap());
            }
            ExactVerdict::Equivalent => panic!("languages differ on a^omega"),
        }
    }
}
