//! Box-based alternation removal: the deterministic automaton of universally
//! accepting box words, and the nondeterministic box automaton over the
//! original alphabet that guesses one box per letter.

use std::collections::BTreeMap;

use crate::automaton::{Automaton, AutomatonBuilder, Priority, StateId};
use crate::error::Result;
use crate::formula::TransitionFormula;
use crate::product::{all_boxes, Box};
use crate::transform::safra::{complement_dpw, determinise_npw};

/// A deterministic parity automaton over the box alphabet of some automaton.
#[derive(Clone, Debug)]
pub struct UnivAccDpw {
    /// Letter `i` of this automaton is `boxes[i]`.
    pub dpw: Automaton,
    pub boxes: Vec<Box>,
}

fn box_letter_name(b: &Box, i: usize) -> String {
    let _ = b;
    format!("x{i}")
}

/// The nondeterministic path automaton over the box alphabet: it guesses a
/// path through the boxes and carries the dual acceptance, so it recognises
/// the box words with at least one rejecting path.
pub fn path_guessing_npw(aut: &Automaton) -> (Automaton, Vec<Box>) {
    let boxes = all_boxes(aut);
    let letters: Vec<String> =
        boxes.iter().enumerate().map(|(i, b)| box_letter_name(b, i)).collect();
    let mut b = AutomatonBuilder::from_letters(letters).initial(aut.initial());
    b.add_states(aut.state_count());
    for q in aut.states() {
        for (i, bx) in boxes.iter().enumerate() {
            let targets: Vec<StateId> = bx.targets(q).collect();
            debug_assert!(!targets.is_empty(), "boxes relate every state");
            let priorities: Vec<(StateId, Priority)> = targets
                .iter()
                .map(|t| (*t, aut.priority(q, bx.letter, *t) + 1))
                .collect();
            b.transition(q, i, TransitionFormula::any_of(targets.iter().copied()), &priorities);
        }
    }
    (b.build(), boxes)
}

/// The deterministic parity automaton recognising exactly the universally
/// accepting box words: determinise the path-guessing automaton and
/// complement the result.
pub fn build_univ_acc_dpw(aut: &Automaton) -> Result<UnivAccDpw> {
    let (path_npw, boxes) = path_guessing_npw(aut);
    let det = determinise_npw(&path_npw)?;
    Ok(UnivAccDpw { dpw: complement_dpw(&det)?, boxes })
}

/// The box automaton: same states as the universal-acceptance automaton, but
/// over the original alphabet; reading a letter guesses one of its boxes and
/// follows the deterministic transition over it. Parallel guesses reaching
/// the same state under different priorities are split apart by recording the
/// entry priority in the state.
pub fn box_automaton(aut: &Automaton) -> Result<Automaton> {
    let univ = build_univ_acc_dpw(aut)?;
    let dpw = &univ.dpw;
    // Box ids grouped by original letter.
    let mut per_letter: Vec<Vec<usize>> = vec![Vec::new(); aut.letter_count()];
    for (i, b) in univ.boxes.iter().enumerate() {
        per_letter[b.letter].push(i);
    }

    let mut ids: BTreeMap<(StateId, Priority), StateId> = BTreeMap::new();
    let mut order: Vec<(StateId, Priority)> = Vec::new();
    let mut intern = |key: (StateId, Priority),
                      order: &mut Vec<(StateId, Priority)>,
                      frontier: &mut Vec<(StateId, Priority)>|
     -> StateId {
        *ids.entry(key).or_insert_with(|| {
            order.push(key);
            frontier.push(key);
            order.len() - 1
        })
    };
    let mut frontier = Vec::new();
    let start = (dpw.initial(), 0);
    intern(start, &mut order, &mut frontier);
    let mut rows: BTreeMap<(StateId, usize), Vec<(StateId, Priority)>> = BTreeMap::new();
    while let Some((p, entry)) = frontier.pop() {
        let sid = ids[&(p, entry)];
        for a in 0..aut.letter_count() {
            let mut targets: Vec<(StateId, Priority)> = Vec::new();
            for &bi in &per_letter[a] {
                let t = dpw
                    .targets(p, bi)
                    .into_iter()
                    .next()
                    .expect("deterministic over boxes");
                let pr = dpw.priority(p, bi, t);
                let tid = intern((t, pr), &mut order, &mut frontier);
                targets.push((tid, pr));
            }
            targets.sort_unstable();
            targets.dedup();
            rows.insert((sid, a), targets);
        }
    }

    let mut b = AutomatonBuilder::from_letters(aut.alphabet().to_vec());
    b.add_states(order.len());
    for ((q, a), targets) in rows {
        let f = TransitionFormula::any_of(targets.iter().map(|(t, _)| *t));
        b.transition(q, a, f, &targets);
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::AutomatonClass;
    use crate::generate::fixtures;
    use crate::lasso::{bounded_equiv, lassos_up_to, membership, LassoWord};

    /// Are all paths of the box lasso accepting? Direct product oracle: no
    /// reachable cycle of odd maximal priority in the lasso-versus-state
    /// graph.
    fn univ_acc_oracle(aut: &Automaton, boxes: &[Box], w: &LassoWord) -> bool {
        let len = w.len();
        let n = aut.state_count();
        let node = |i: usize, q: StateId| i * n + q;
        let mut edges = Vec::new();
        let mut seen = vec![false; len * n];
        let mut frontier = vec![node(0, aut.initial())];
        seen[node(0, aut.initial())] = true;
        while let Some(x) = frontier.pop() {
            let (i, q) = (x / n, x % n);
            let bx = &boxes[w.letter_at(i)];
            let j = if i + 1 == len { w.prefix.len() } else { i + 1 };
            for t in bx.targets(q) {
                edges.push((x, node(j, t), aut.priority(q, bx.letter, t)));
                if !seen[node(j, t)] {
                    seen[node(j, t)] = true;
                    frontier.push(node(j, t));
                }
            }
        }
        let odds: std::collections::BTreeSet<Priority> =
            edges.iter().map(|e| e.2).filter(|p| p % 2 == 1).collect();
        // A rejecting path exists iff some cycle has odd maximal priority.
        !odds
            .into_iter()
            .any(|cap| crate::lasso::graph_has_capped_cycle(&edges, cap))
    }

    #[test]
    fn univ_acc_dpw_on_deterministic_all_even() {
        let mut b = AutomatonBuilder::new(&["a"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 2);
        let aut = b.build();
        let univ = build_univ_acc_dpw(&aut).unwrap();
        assert_eq!(univ.boxes.len(), 1);
        // Every box word is universally accepting: the single box lasso.
        let w = LassoWord::new(vec![], vec![0]).unwrap();
        assert!(membership(&univ.dpw, &w).unwrap());
    }

    #[test]
    fn univ_acc_dpw_matches_path_oracle_on_figure() {
        let aut = fixtures().remove("fig-one-step").unwrap();
        let univ = build_univ_acc_dpw(&aut).unwrap();
        for w in lassos_up_to(univ.boxes.len(), 2, 2) {
            let expect = univ_acc_oracle(&aut, &univ.boxes, &w);
            let got = membership(&univ.dpw, &w).unwrap();
            assert_eq!(got, expect, "box word {w:?}");
        }
    }

    #[test]
    fn box_automaton_of_deterministic_is_equivalent() {
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_states(2);
        b.transition(q[0], 0, TransitionFormula::atom(q[1]), &[(q[1], 2)]);
        b.transition(q[0], 1, TransitionFormula::atom(q[0]), &[(q[0], 1)]);
        b.transition(q[1], 0, TransitionFormula::atom(q[1]), &[(q[1], 2)]);
        b.transition(q[1], 1, TransitionFormula::atom(q[0]), &[(q[0], 1)]);
        let aut = b.build();
        let boxed = box_automaton(&aut).unwrap();
        assert_eq!(boxed.classify(), AutomatonClass::Deterministic);
        assert!(bounded_equiv(&aut, &boxed, 4, 4).unwrap().is_equivalent());
    }

    #[test]
    fn box_automaton_of_cyclic_figure_is_equivalent() {
        let aut = fixtures().remove("fig-ex-alt-gfg").unwrap();
        let boxed = box_automaton(&aut).unwrap();
        assert!(matches!(
            boxed.classify(),
            AutomatonClass::Nondeterministic | AutomatonClass::Deterministic
        ));
        assert!(bounded_equiv(&aut, &boxed, 3, 3).unwrap().is_equivalent());
    }
}
