//! Determinisation of nondeterministic Buchi automata through compact Safra
//! trees, plus the parity-to-Buchi front end and parity complementation.

use std::collections::BTreeMap;

use crate::automaton::{
    compress_map, Automaton, AutomatonBuilder, AutomatonClass, Priority, StateId,
};
use crate::error::{check_guard, Error, Result};
use crate::formula::TransitionFormula;

fn require_nondet(aut: &Automaton) -> Result<()> {
    match aut.classify() {
        AutomatonClass::Nondeterministic | AutomatonClass::Deterministic => Ok(()),
        _ => Err(Error::NotNondeterministic),
    }
}

/// Buchi degeneralisation of a nondeterministic parity automaton: one copy
/// per even priority `p`, entered by guessing that from now on no priority
/// above `p` occurs and `p` recurs. Transitions of priority exactly `p`
/// inside (or into) copy `p` are the accepting ones.
pub fn npw_to_nbw(aut: &Automaton) -> Result<Automaton> {
    require_nondet(aut)?;
    let trimmed = aut.trim();
    let n = trimmed.state_count();
    let evens: Vec<Priority> =
        trimmed.index().into_iter().filter(|p| p % 2 == 0).collect();
    // State layout: master copy first, then one block per even priority.
    let copies = 1 + evens.len();
    let id = |q: StateId, copy: usize| copy * n + q;
    let mut b = AutomatonBuilder::from_letters(trimmed.alphabet().to_vec());
    b.add_states(n * copies);
    let mut sink: Option<StateId> = None;
    let mut rows: Vec<(StateId, usize, Vec<(StateId, Priority)>)> = Vec::new();
    for q in 0..n {
        for a in 0..trimmed.letter_count() {
            let mut master: Vec<(StateId, Priority)> = Vec::new();
            for t in trimmed.targets(q, a) {
                let p = trimmed.priority(q, a, t);
                master.push((id(t, 0), 1));
                for (ci, cap) in evens.iter().enumerate() {
                    if p <= *cap {
                        master.push((id(t, ci + 1), if p == *cap { 2 } else { 1 }));
                    }
                }
            }
            rows.push((q, a, master));
            for (ci, cap) in evens.iter().enumerate() {
                let targets: Vec<(StateId, Priority)> = trimmed
                    .targets(q, a)
                    .into_iter()
                    .filter(|t| trimmed.priority(q, a, *t) <= *cap)
                    .map(|t| {
                        (id(t, ci + 1), if trimmed.priority(q, a, t) == *cap { 2 } else { 1 })
                    })
                    .collect();
                rows.push((id(q, ci + 1), a, targets));
            }
        }
    }
    let need_sink = rows.iter().any(|(_, _, ts)| ts.is_empty());
    if need_sink {
        sink = Some(b.add_state());
    }
    for (q, a, targets) in rows {
        if targets.is_empty() {
            let s = sink.unwrap();
            b.transition(q, a, TransitionFormula::atom(s), &[(s, 1)]);
        } else {
            let f = TransitionFormula::any_of(targets.iter().map(|(t, _)| *t));
            b.transition(q, a, f, &targets);
        }
    }
    if let Some(s) = sink {
        for a in 0..trimmed.letter_count() {
            b.transition(s, a, TransitionFormula::atom(s), &[(s, 1)]);
        }
    }
    Ok(b.build().trim())
}

/// A compact Safra tree. Nodes are kept in age order (index 0 is the oldest,
/// the root); `parent[0]` is unused. Labels are bitmasks over the state-split
/// automaton.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Tree {
    parent: Vec<usize>,
    label: Vec<u64>,
}

impl Tree {
    fn children_union(&self, v: usize) -> u64 {
        self.parent
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, p)| **p == v)
            .map(|(c, _)| self.label[c])
            .fold(0, |acc, l| acc | l)
    }
}

/// One Safra step: spawn, powerset, steal, reap, flash, compact. Returns the
/// new tree and the emitted min-parity priority (0-based node ranks; deletion
/// of rank `r` gives `2r + 1`, a flash gives `2r + 2`).
fn safra_step(
    tree: &Tree,
    succ: &dyn Fn(u64) -> u64,
    accepting: u64,
    neutral: Priority,
) -> (Tree, Priority) {
    let mut parent = tree.parent.clone();
    let mut label = tree.label.clone();
    // Spawn a youngest child for every node seeing accepting states.
    let live_before = label.len();
    for v in 0..live_before {
        if label[v] & accepting != 0 {
            parent.push(v);
            label.push(label[v] & accepting);
        }
    }
    // Powerset.
    for l in label.iter_mut() {
        *l = succ(*l);
    }
    // Steal: intersect with the (already processed) parent, then remove what
    // older siblings took.
    let mut taken: Vec<u64> = vec![0; label.len()];
    for v in 1..label.len() {
        let p = parent[v];
        label[v] &= label[p];
        label[v] &= !taken[p];
        taken[p] |= label[v];
    }
    // Reap empty nodes; subtrees of empty nodes are empty by containment.
    let mut deleted = vec![false; label.len()];
    let mut odd_event: Option<usize> = None;
    for v in 0..label.len() {
        if label[v] == 0 {
            deleted[v] = true;
            if odd_event.is_none() {
                odd_event = Some(v);
            }
        }
    }
    // Flash: a node whose children now cover it drops its whole subtree.
    let mut even_event: Option<usize> = None;
    for v in 0..label.len() {
        if deleted[v] || label[v] == 0 {
            continue;
        }
        let mut union = 0u64;
        let mut has_child = false;
        for c in (v + 1)..label.len() {
            if !deleted[c] && parent[c] == v {
                union |= label[c];
                has_child = true;
            }
        }
        if has_child && union == label[v] {
            if even_event.is_none() {
                even_event = Some(v);
            }
            // Drop all descendants.
            let mut in_subtree = vec![false; label.len()];
            in_subtree[v] = true;
            for c in (v + 1)..label.len() {
                if in_subtree[parent[c]] {
                    in_subtree[c] = true;
                    deleted[c] = true;
                }
            }
        }
    }
    // Compact, preserving age order.
    let mut remap = vec![usize::MAX; label.len()];
    let mut new_parent = Vec::new();
    let mut new_label = Vec::new();
    for v in 0..label.len() {
        if deleted[v] {
            continue;
        }
        remap[v] = new_label.len();
        new_parent.push(if v == 0 { 0 } else { remap[parent[v]] });
        new_label.push(label[v]);
    }
    let priority = match (odd_event, even_event) {
        (Some(d), Some(f)) => {
            if d < f {
                2 * d as Priority + 1
            } else {
                2 * f as Priority + 2
            }
        }
        (Some(d), None) => 2 * d as Priority + 1,
        (None, Some(f)) => 2 * f as Priority + 2,
        (None, None) => neutral,
    };
    (Tree { parent: new_parent, label: new_label }, priority)
}

/// Determinises a nondeterministic Buchi automaton into a deterministic
/// parity automaton. Transition-based acceptance is first pushed into a
/// state split; output priorities come from the tree events, older nodes
/// dominating, and are compressed at the end.
pub fn safra_determinise(aut: &Automaton) -> Result<Automaton> {
    require_nondet(aut)?;
    if !aut.is_buchi() {
        return Err(Error::NotBuchi);
    }
    let trimmed = aut.trim();
    let n = trimmed.state_count();
    // Split states: (q, entered-by-accepting-transition).
    let split = |q: StateId, acc: bool| -> usize { 2 * q + usize::from(acc) };
    let split_count = 2 * n;
    if split_count > 64 {
        return Err(Error::TooLarge {
            what: "Safra state split",
            size: split_count,
            unit: "states",
            guard: 64,
        });
    }
    let mut accepting = 0u64;
    for q in 0..n {
        accepting |= 1 << split(q, true);
    }
    // Per (split state, letter) successor masks.
    let letters = trimmed.letter_count();
    let mut succ_mask = vec![0u64; split_count * letters];
    for q in 0..n {
        for a in 0..letters {
            let mut mask = 0u64;
            for t in trimmed.targets(q, a) {
                mask |= 1 << split(t, trimmed.priority(q, a, t) == 2);
            }
            succ_mask[split(q, false) * letters + a] = mask;
            succ_mask[split(q, true) * letters + a] = mask;
        }
    }

    let neutral: Priority = 2 * (split_count as Priority + 1) + 1;
    let initial = Tree { parent: vec![0], label: vec![1 << split(trimmed.initial(), false)] };

    let mut trees: Vec<Tree> = vec![initial.clone()];
    let mut ids: BTreeMap<Tree, usize> = [(initial, 0)].into();
    let mut frontier = vec![0usize];
    let mut transitions: Vec<(usize, usize, usize, Priority)> = Vec::new();
    while let Some(s) = frontier.pop() {
        check_guard("Safra determinisation", trees.len(), "states")?;
        for a in 0..letters {
            let step_succ = |mask: u64| -> u64 {
                let mut out = 0u64;
                for s in 0..split_count {
                    if mask & (1 << s) != 0 {
                        out |= succ_mask[s * letters + a];
                    }
                }
                out
            };
            let (tree, pr) = safra_step(&trees[s], &step_succ, accepting, neutral);
            let t = *ids.entry(tree.clone()).or_insert_with(|| {
                trees.push(tree);
                frontier.push(trees.len() - 1);
                trees.len() - 1
            });
            transitions.push((s, a, t, pr));
        }
    }

    // Convert min-parity events to the max-parity convention and compress.
    let cap = 2 * neutral + 2;
    let mut b = AutomatonBuilder::from_letters(trimmed.alphabet().to_vec());
    b.add_states(trees.len());
    let mut by_source: BTreeMap<(usize, usize), (usize, Priority)> = BTreeMap::new();
    for (s, a, t, pr) in transitions {
        by_source.insert((s, a), (t, cap - pr));
    }
    for ((s, a), (t, pr)) in by_source {
        b.transition(s, a, TransitionFormula::atom(t), &[(t, pr)]);
    }
    Ok(b.build().compress_priorities())
}

/// Determinisation pipeline for nondeterministic parity automata.
pub fn determinise_npw(aut: &Automaton) -> Result<Automaton> {
    safra_determinise(&npw_to_nbw(aut)?)
}

/// Complement of a deterministic parity automaton: same structure, every
/// priority shifted up by one.
pub fn complement_dpw(aut: &Automaton) -> Result<Automaton> {
    if aut.classify() != AutomatonClass::Deterministic {
        return Err(Error::NotDeterministic);
    }
    Ok(aut.map_priorities(|_, p| p + 1).compress_priorities())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::{bounded_equiv, lassos_up_to, membership};

    fn inf_a_nbw() -> Automaton {
        // Guess the point from which a recurs: classic nondeterministic
        // two-state Buchi automaton for "infinitely many a".
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_states(2);
        b.transition(
            q[0],
            0,
            TransitionFormula::any_of([q[0], q[1]]),
            &[(q[0], 1), (q[1], 2)],
        );
        b.transition(q[0], 1, TransitionFormula::atom(q[0]), &[(q[0], 1)]);
        b.transition(q[1], 0, TransitionFormula::atom(q[1]), &[(q[1], 2)]);
        b.transition(q[1], 1, TransitionFormula::atom(q[1]), &[(q[1], 1)]);
        b.build()
    }

    #[test]
    fn deterministic_buchi_keeps_its_language() {
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 2);
        b.uniform(q, 1, TransitionFormula::atom(q), 1);
        let aut = b.build();
        let det = safra_determinise(&aut).unwrap();
        assert_eq!(det.classify(), AutomatonClass::Deterministic);
        assert!(bounded_equiv(&aut, &det, 4, 4).unwrap().is_equivalent());
    }

    #[test]
    fn nondeterministic_inf_a_determinises() {
        let aut = inf_a_nbw();
        let det = safra_determinise(&aut).unwrap();
        assert_eq!(det.classify(), AutomatonClass::Deterministic);
        assert!(bounded_equiv(&aut, &det, 6, 6).unwrap().is_equivalent());
    }

    #[test]
    fn complement_accepts_exactly_the_rest() {
        let det = safra_determinise(&inf_a_nbw()).unwrap();
        let comp = complement_dpw(&det).unwrap();
        for w in lassos_up_to(2, 4, 4) {
            let a = membership(&det, &w).unwrap();
            let b = membership(&comp, &w).unwrap();
            assert!(a ^ b, "both or neither accept {w:?}");
        }
    }

    #[test]
    fn cobuchi_npw_to_nbw_preserves_language() {
        // Nondeterministic coBuchi: eventually only b.
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_states(2);
        b.transition(
            q[0],
            0,
            TransitionFormula::any_of([q[0], q[1]]),
            &[(q[0], 1), (q[1], 1)],
        );
        b.transition(
            q[0],
            1,
            TransitionFormula::any_of([q[0], q[1]]),
            &[(q[0], 1), (q[1], 0)],
        );
        b.transition(q[1], 0, TransitionFormula::atom(q[1]), &[(q[1], 1)]);
        b.transition(q[1], 1, TransitionFormula::atom(q[1]), &[(q[1], 0)]);
        let aut = b.build();
        let nbw = npw_to_nbw(&aut).unwrap();
        assert!(nbw.is_buchi());
        assert!(bounded_equiv(&aut, &nbw, 4, 4).unwrap().is_equivalent());
    }
}
