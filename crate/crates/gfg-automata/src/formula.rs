//! Positive Boolean formulas over state ids, used as transition conditions.

use std::collections::BTreeSet;
use std::fmt;

use crate::automaton::StateId;

/// A positive Boolean formula over states: atoms, conjunctions, disjunctions.
///
/// Canonical form: `And`/`Or` nodes have at least two children and a node never
/// directly nests a child of the same kind; single-child nodes collapse to the
/// child. The smart constructors [`TransitionFormula::and`] and
/// [`TransitionFormula::or`] maintain this. Empty child lists are representable
/// (so that validation can report them) but never produced by the constructors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionFormula {
    Atom(StateId),
    And(Vec<TransitionFormula>),
    Or(Vec<TransitionFormula>),
}

use TransitionFormula::{And, Atom, Or};

impl TransitionFormula {
    pub fn atom(q: StateId) -> Self {
        Atom(q)
    }

    /// Conjunction in canonical form: flattens nested `And`s, collapses singletons.
    pub fn and(children: Vec<TransitionFormula>) -> Self {
        Self::node(children, true)
    }

    /// Disjunction in canonical form: flattens nested `Or`s, collapses singletons.
    pub fn or(children: Vec<TransitionFormula>) -> Self {
        Self::node(children, false)
    }

    fn node(children: Vec<TransitionFormula>, conj: bool) -> Self {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match (conj, c) {
                (true, And(gs)) => flat.extend(gs),
                (false, Or(gs)) => flat.extend(gs),
                (_, other) => flat.push(other),
            }
        }
        // Duplicate children are idempotent under both connectives.
        let mut seen = BTreeSet::new();
        flat.retain(|c| seen.insert(c.clone()));
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        if conj {
            And(flat)
        } else {
            Or(flat)
        }
    }

    /// Conjunction of plain state atoms.
    pub fn all_of(states: impl IntoIterator<Item = StateId>) -> Self {
        Self::and(states.into_iter().map(Atom).collect())
    }

    /// Disjunction of plain state atoms.
    pub fn any_of(states: impl IntoIterator<Item = StateId>) -> Self {
        Self::or(states.into_iter().map(Atom).collect())
    }

    /// All state ids appearing as atoms.
    pub fn atoms(&self) -> BTreeSet<StateId> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<StateId>) {
        match self {
            Atom(q) => {
                out.insert(*q);
            }
            And(cs) | Or(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn len(&self) -> usize {
        match self {
            Atom(_) => 1,
            And(cs) | Or(cs) => 1 + cs.iter().map(|c| c.len()).sum::<usize>(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the formula is a single atom.
    pub fn as_single_atom(&self) -> Option<StateId> {
        match self {
            Atom(q) => Some(*q),
            _ => None,
        }
    }

    /// True for an atom or a disjunction of atoms.
    pub fn is_disjunctive(&self) -> bool {
        match self {
            Atom(_) => true,
            Or(cs) => cs.iter().all(|c| matches!(c, Atom(_))),
            And(_) => false,
        }
    }

    /// True for an atom or a conjunction of atoms.
    pub fn is_conjunctive(&self) -> bool {
        match self {
            Atom(_) => true,
            And(cs) => cs.iter().all(|c| matches!(c, Atom(_))),
            Or(_) => false,
        }
    }

    /// Evaluates the formula under the valuation `true_states`.
    pub fn eval(&self, true_states: &BTreeSet<StateId>) -> bool {
        match self {
            Atom(q) => true_states.contains(q),
            And(cs) => cs.iter().all(|c| c.eval(true_states)),
            Or(cs) => cs.iter().any(|c| c.eval(true_states)),
        }
    }

    /// Swaps conjunctions and disjunctions throughout.
    pub fn dual(&self) -> Self {
        match self {
            Atom(q) => Atom(*q),
            And(cs) => Or(cs.iter().map(|c| c.dual()).collect()),
            Or(cs) => And(cs.iter().map(|c| c.dual()).collect()),
        }
    }

    /// Substitutes `false` for every atom in `removed` and simplifies.
    ///
    /// `None` means the whole formula became false: a conjunction dies with any
    /// dead child, a disjunction only when all children die.
    pub fn without_states(&self, removed: &BTreeSet<StateId>) -> Option<Self> {
        match self {
            Atom(q) => (!removed.contains(q)).then_some(Atom(*q)),
            And(cs) => {
                let kept: Option<Vec<_>> = cs.iter().map(|c| c.without_states(removed)).collect();
                kept.map(Self::and)
            }
            Or(cs) => {
                let kept: Vec<_> = cs.iter().filter_map(|c| c.without_states(removed)).collect();
                (!kept.is_empty()).then(|| Self::or(kept))
            }
        }
    }

    /// Renames every atom through `map`.
    pub fn rename(&self, map: &dyn Fn(StateId) -> StateId) -> Self {
        match self {
            Atom(q) => Atom(map(*q)),
            And(cs) => Self::and(cs.iter().map(|c| c.rename(map)).collect()),
            Or(cs) => Self::or(cs.iter().map(|c| c.rename(map)).collect()),
        }
    }

    /// The inclusion-minimal sets of states whose assignment to true satisfies
    /// the formula.
    pub fn minimal_models(&self) -> BTreeSet<BTreeSet<StateId>> {
        let models = self.models_rec();
        prune_non_minimal(models)
    }

    fn models_rec(&self) -> BTreeSet<BTreeSet<StateId>> {
        match self {
            Atom(q) => [BTreeSet::from([*q])].into(),
            Or(cs) => prune_non_minimal(cs.iter().flat_map(|c| c.models_rec()).collect()),
            And(cs) => {
                let mut acc: BTreeSet<BTreeSet<StateId>> = [BTreeSet::new()].into();
                for c in cs {
                    let part = c.models_rec();
                    let mut next = BTreeSet::new();
                    for m in &acc {
                        for p in &part {
                            next.insert(m.union(p).copied().collect());
                        }
                    }
                    acc = prune_non_minimal(next);
                }
                acc
            }
        }
    }
}

fn prune_non_minimal(models: BTreeSet<BTreeSet<StateId>>) -> BTreeSet<BTreeSet<StateId>> {
    models
        .iter()
        .filter(|m| !models.iter().any(|other| other != *m && other.is_subset(m)))
        .cloned()
        .collect()
}

impl fmt::Display for TransitionFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(node: &TransitionFormula, f: &mut fmt::Formatter<'_>, parent_or: bool) -> fmt::Result {
            match node {
                Atom(q) => write!(f, "q{q}"),
                And(cs) => {
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            write!(f, " & ")?;
                        }
                        go(c, f, false)?;
                    }
                    Ok(())
                }
                Or(cs) => {
                    if parent_or {
                        write!(f, "(")?;
                    }
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            write!(f, " | ")?;
                        }
                        match c {
                            And(_) => {
                                write!(f, "(")?;
                                go(c, f, false)?;
                                write!(f, ")")?;
                            }
                            _ => go(c, f, true)?,
                        }
                    }
                    if parent_or {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_one_step_q0() -> TransitionFormula {
        TransitionFormula::or(vec![
            TransitionFormula::all_of([0, 1]),
            TransitionFormula::all_of([1, 2]),
        ])
    }

    #[test]
    fn constructors_canonicalise() {
        let f = TransitionFormula::or(vec![TransitionFormula::atom(3)]);
        assert_eq!(f, Atom(3));
        let g = TransitionFormula::and(vec![
            TransitionFormula::all_of([0, 1]),
            TransitionFormula::atom(2),
        ]);
        assert_eq!(g, TransitionFormula::all_of([0, 1, 2]));
    }

    #[test]
    fn minimal_models_of_figure_formula() {
        let f = fig_one_step_q0();
        let expected: BTreeSet<BTreeSet<StateId>> =
            [BTreeSet::from([0, 1]), BTreeSet::from([1, 2])].into();
        assert_eq!(f.minimal_models(), expected);
        assert_eq!(
            TransitionFormula::atom(4).minimal_models(),
            BTreeSet::from([BTreeSet::from([4])])
        );
    }

    /// Truth-table oracle: minimal models equal the minimal satisfying
    /// assignments found by enumerating all subsets.
    fn brute_minimal_models(f: &TransitionFormula) -> BTreeSet<BTreeSet<StateId>> {
        let atoms: Vec<StateId> = f.atoms().into_iter().collect();
        let mut sat = BTreeSet::new();
        for mask in 0..(1u32 << atoms.len()) {
            let set: BTreeSet<StateId> = atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, q)| *q)
                .collect();
            if f.eval(&set) {
                sat.insert(set);
            }
        }
        sat.iter()
            .filter(|m| !sat.iter().any(|o| o != *m && o.is_subset(m)))
            .cloned()
            .collect()
    }

    #[test]
    fn minimal_models_match_truth_table_on_random_formulas() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        fn gen(next: &mut dyn FnMut() -> u64, depth: u32) -> TransitionFormula {
            if depth == 0 || next() % 3 == 0 {
                return TransitionFormula::atom((next() % 4) as usize);
            }
            let n = 2 + (next() % 2) as usize;
            let children = (0..n).map(|_| gen(next, depth - 1)).collect();
            if next() % 2 == 0 {
                TransitionFormula::and(children)
            } else {
                TransitionFormula::or(children)
            }
        }
        for _ in 0..200 {
            let f = gen(&mut next, 3);
            assert_eq!(f.minimal_models(), brute_minimal_models(&f), "formula {f}");
        }
    }

    #[test]
    fn without_states_prunes_per_connective() {
        let f = fig_one_step_q0();
        // Dropping q2 kills the second disjunct only.
        let removed = BTreeSet::from([2]);
        assert_eq!(f.without_states(&removed), Some(TransitionFormula::all_of([0, 1])));
        // Dropping q1 kills both disjuncts.
        let removed = BTreeSet::from([1]);
        assert_eq!(f.without_states(&removed), None);
    }
}
