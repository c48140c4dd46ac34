//! Alternating parity automata over infinite words, with acceptance on
//! transitions: a path is accepting iff the highest priority it sees
//! infinitely often is even.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::TransitionFormula;

pub type StateId = usize;
pub type LetterId = usize;
pub type Priority = u32;

/// Key of a syntactic transition: `(source, letter, target)`.
pub type TransitionKey = (StateId, LetterId, StateId);

/// An alternating parity automaton.
///
/// `delta` is total over states and letters. `priority` is defined for exactly
/// the syntactic transitions, i.e. triples `(q, a, q')` where `q'` occurs as an
/// atom in `delta(q, a)`. [`Automaton::validate`] checks both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Vec<String>,
    state_count: usize,
    initial: StateId,
    delta: Vec<Vec<TransitionFormula>>,
    priority: BTreeMap<TransitionKey, Priority>,
}

/// Transition-mode classification. Deterministic subsumes nondeterministic and
/// universal and is reported in preference to both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AutomatonClass {
    Deterministic,
    Nondeterministic,
    Universal,
    Alternating,
}

impl fmt::Display for AutomatonClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AutomatonClass::Deterministic => "deterministic",
            AutomatonClass::Nondeterministic => "nondeterministic",
            AutomatonClass::Universal => "universal",
            AutomatonClass::Alternating => "alternating",
        };
        write!(f, "{s}")
    }
}

/// One structural defect found by [`Automaton::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    DanglingAtom { state: StateId, letter: LetterId, atom: StateId },
    MissingPriority { transition: TransitionKey },
    StrayPriority { transition: TransitionKey },
    EmptyFormula { state: StateId, letter: LetterId },
    DuplicateLetter { letter: String },
    InitialOutOfRange { initial: StateId },
    DeltaShape { detail: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DanglingAtom { state, letter, atom } => {
                write!(f, "delta({state}, letter {letter}) mentions unknown state {atom}")
            }
            Diagnostic::MissingPriority { transition: (q, a, t) } => {
                write!(f, "no priority for syntactic transition ({q}, letter {a}, {t})")
            }
            Diagnostic::StrayPriority { transition: (q, a, t) } => {
                write!(f, "priority entry for non-syntactic transition ({q}, letter {a}, {t})")
            }
            Diagnostic::EmptyFormula { state, letter } => {
                write!(f, "delta({state}, letter {letter}) contains an empty connective")
            }
            Diagnostic::DuplicateLetter { letter } => write!(f, "duplicate letter `{letter}`"),
            Diagnostic::InitialOutOfRange { initial } => {
                write!(f, "initial state {initial} out of range")
            }
            Diagnostic::DeltaShape { detail } => write!(f, "delta is not total: {detail}"),
        }
    }
}

impl Automaton {
    /// Assembles an automaton without checking the invariants; pair with
    /// [`Automaton::validate`] when the parts come from outside.
    pub fn from_parts(
        alphabet: Vec<String>,
        state_count: usize,
        initial: StateId,
        delta: Vec<Vec<TransitionFormula>>,
        priority: BTreeMap<TransitionKey, Priority>,
    ) -> Self {
        Automaton { alphabet, state_count, initial, delta, priority }
    }

    /// Assembles and validates, turning diagnostics into an error.
    pub fn new(
        alphabet: Vec<String>,
        state_count: usize,
        initial: StateId,
        delta: Vec<Vec<TransitionFormula>>,
        priority: BTreeMap<TransitionKey, Priority>,
    ) -> Result<Self> {
        let a = Self::from_parts(alphabet, state_count, initial, delta, priority);
        let diags = a.validate();
        if diags.is_empty() {
            Ok(a)
        } else {
            Err(Error::Invalid(
                diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "),
            ))
        }
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn letter_count(&self) -> usize {
        self.alphabet.len()
    }

    pub fn letter_id(&self, symbol: &str) -> Result<LetterId> {
        self.alphabet
            .iter()
            .position(|l| l == symbol)
            .ok_or_else(|| Error::UnknownLetter(symbol.to_string()))
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.state_count
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn formula(&self, q: StateId, a: LetterId) -> &TransitionFormula {
        &self.delta[q][a]
    }

    pub fn priority(&self, q: StateId, a: LetterId, target: StateId) -> Priority {
        self.priority[&(q, a, target)]
    }

    pub fn priority_map(&self) -> &BTreeMap<TransitionKey, Priority> {
        &self.priority
    }

    /// The set of priorities in use.
    pub fn index(&self) -> BTreeSet<Priority> {
        self.priority.values().copied().collect()
    }

    pub fn is_buchi(&self) -> bool {
        self.index().iter().all(|p| *p == 1 || *p == 2)
    }

    pub fn is_cobuchi(&self) -> bool {
        self.index().iter().all(|p| *p == 0 || *p == 1)
    }

    /// Syntactic transitions from `q` on `a`, in ascending target order.
    pub fn targets(&self, q: StateId, a: LetterId) -> BTreeSet<StateId> {
        self.delta[q][a].atoms()
    }

    /// All syntactic transitions of the automaton.
    pub fn transitions(&self) -> impl Iterator<Item = TransitionKey> + '_ {
        self.states().flat_map(move |q| {
            (0..self.letter_count()).flat_map(move |a| {
                self.targets(q, a).into_iter().map(move |t| (q, a, t))
            })
        })
    }

    /// Diagnoses every violated structural invariant; empty means well-formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for l in &self.alphabet {
            if !seen.insert(l.clone()) {
                out.push(Diagnostic::DuplicateLetter { letter: l.clone() });
            }
        }
        if self.initial >= self.state_count {
            out.push(Diagnostic::InitialOutOfRange { initial: self.initial });
        }
        if self.delta.len() != self.state_count {
            out.push(Diagnostic::DeltaShape {
                detail: format!("{} rows for {} states", self.delta.len(), self.state_count),
            });
            return out;
        }
        let mut syntactic = BTreeSet::new();
        for (q, row) in self.delta.iter().enumerate() {
            if row.len() != self.alphabet.len() {
                out.push(Diagnostic::DeltaShape {
                    detail: format!("state {q} has {} columns for {} letters", row.len(), self.alphabet.len()),
                });
                continue;
            }
            for (a, f) in row.iter().enumerate() {
                if has_empty_connective(f) {
                    out.push(Diagnostic::EmptyFormula { state: q, letter: a });
                }
                for atom in f.atoms() {
                    if atom >= self.state_count {
                        out.push(Diagnostic::DanglingAtom { state: q, letter: a, atom });
                    } else {
                        syntactic.insert((q, a, atom));
                    }
                }
            }
        }
        for key in &syntactic {
            if !self.priority.contains_key(key) {
                out.push(Diagnostic::MissingPriority { transition: *key });
            }
        }
        for key in self.priority.keys() {
            if !syntactic.contains(key) {
                out.push(Diagnostic::StrayPriority { transition: *key });
            }
        }
        out
    }

    /// Classifies by transition mode; deterministic wins over the other two.
    pub fn classify(&self) -> AutomatonClass {
        let all = self.delta.iter().flatten();
        if all.clone().all(|f| f.as_single_atom().is_some()) {
            AutomatonClass::Deterministic
        } else if all.clone().all(|f| f.is_disjunctive()) {
            AutomatonClass::Nondeterministic
        } else if all.clone().all(|f| f.is_conjunctive()) {
            AutomatonClass::Universal
        } else {
            AutomatonClass::Alternating
        }
    }

    /// The dual automaton: conjunctions and disjunctions swapped, every
    /// priority increased by one. Recognises the complement language.
    pub fn dual(&self) -> Automaton {
        Automaton {
            alphabet: self.alphabet.clone(),
            state_count: self.state_count,
            initial: self.initial,
            delta: self
                .delta
                .iter()
                .map(|row| row.iter().map(|f| f.dual()).collect())
                .collect(),
            priority: self.priority.iter().map(|(k, p)| (*k, p + 1)).collect(),
        }
    }

    /// Restricts to `keep`, pruning formulas per connective: a conjunction dies
    /// with any removed child, a disjunction when all children are removed. A
    /// state whose formula for some letter dies entirely is routed to a fresh
    /// rejecting sink for that letter.
    pub fn restrict(&self, keep: &BTreeSet<StateId>) -> Result<Automaton> {
        if !keep.contains(&self.initial) {
            return Err(Error::InitialRemoved(self.initial));
        }
        let kept: Vec<StateId> = self.states().filter(|q| keep.contains(q)).collect();
        let removed: BTreeSet<StateId> = self.states().filter(|q| !keep.contains(q)).collect();
        let new_id: BTreeMap<StateId, StateId> =
            kept.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        let sink = kept.len();
        let mut needs_sink = false;

        let mut delta = Vec::with_capacity(kept.len());
        let mut priority = BTreeMap::new();
        for &q in &kept {
            let mut row = Vec::with_capacity(self.alphabet.len());
            for a in 0..self.alphabet.len() {
                let pruned = self.delta[q][a].without_states(&removed);
                let f = match pruned {
                    Some(f) => f.rename(&|atom| new_id[&atom]),
                    None => {
                        needs_sink = true;
                        TransitionFormula::atom(sink)
                    }
                };
                for t in f.atoms() {
                    let p = if t == sink {
                        1
                    } else {
                        self.priority[&(q, a, kept[t])]
                    };
                    priority.insert((new_id[&q], a, t), p);
                }
                row.push(f);
            }
            delta.push(row);
        }
        let mut state_count = kept.len();
        if needs_sink {
            state_count += 1;
            let mut row = Vec::with_capacity(self.alphabet.len());
            for a in 0..self.alphabet.len() {
                row.push(TransitionFormula::atom(sink));
                priority.insert((sink, a, sink), 1);
            }
            delta.push(row);
        }
        Ok(Automaton {
            alphabet: self.alphabet.clone(),
            state_count,
            initial: new_id[&self.initial],
            delta,
            priority,
        })
    }

    /// States reachable from the initial state through syntactic transitions.
    pub fn reachable_states(&self) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([self.initial]);
        let mut frontier = vec![self.initial];
        while let Some(q) = frontier.pop() {
            for a in 0..self.alphabet.len() {
                for t in self.delta[q][a].atoms() {
                    if t < self.state_count && seen.insert(t) {
                        frontier.push(t);
                    }
                }
            }
        }
        seen
    }

    /// Restriction to the reachable part.
    pub fn trim(&self) -> Automaton {
        self.restrict(&self.reachable_states()).expect("initial state is reachable")
    }

    /// Copy with one extra state looping on itself with the given priority on
    /// every letter. Returns the new automaton and the sink id.
    pub fn with_sink(&self, loop_priority: Priority) -> (Automaton, StateId) {
        let sink = self.state_count;
        let mut delta = self.delta.clone();
        delta.push(vec![TransitionFormula::atom(sink); self.alphabet.len()]);
        let mut priority = self.priority.clone();
        for a in 0..self.alphabet.len() {
            priority.insert((sink, a, sink), loop_priority);
        }
        (
            Automaton {
                alphabet: self.alphabet.clone(),
                state_count: sink + 1,
                initial: self.initial,
                delta,
                priority,
            },
            sink,
        )
    }

    /// Remaps every priority through `f`.
    pub fn map_priorities(&self, f: impl Fn(TransitionKey, Priority) -> Priority) -> Automaton {
        Automaton {
            priority: self.priority.iter().map(|(k, p)| (*k, f(*k, *p))).collect(),
            ..self.clone()
        }
    }

    /// Compresses the priority set onto the smallest parity-preserving range,
    /// e.g. `{2,5,7}` becomes `{0,1,3}`... no: `{0,3,5}`. Order and parities
    /// are preserved, gaps collapse.
    pub fn compress_priorities(&self) -> Automaton {
        let map = compress_map(&self.index());
        self.map_priorities(|_, p| map[&p])
    }
}

/// Parity-preserving order-preserving compression of a priority set.
pub fn compress_map(used: &BTreeSet<Priority>) -> BTreeMap<Priority, Priority> {
    let mut map = BTreeMap::new();
    let mut next: Option<Priority> = None;
    for &p in used {
        let np = match next {
            None => p % 2,
            Some(prev) => {
                if prev % 2 == p % 2 {
                    prev
                } else {
                    prev + 1
                }
            }
        };
        map.insert(p, np);
        next = Some(np);
    }
    map
}

fn has_empty_connective(f: &TransitionFormula) -> bool {
    match f {
        TransitionFormula::Atom(_) => false,
        TransitionFormula::And(cs) | TransitionFormula::Or(cs) => {
            cs.is_empty() || cs.iter().any(has_empty_connective)
        }
    }
}

/// Convenience builder used by transforms, generators and tests.
pub struct AutomatonBuilder {
    alphabet: Vec<String>,
    initial: StateId,
    rows: Vec<Vec<Option<TransitionFormula>>>,
    priority: BTreeMap<TransitionKey, Priority>,
}

impl AutomatonBuilder {
    pub fn new(alphabet: &[&str]) -> Self {
        AutomatonBuilder {
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
            initial: 0,
            rows: Vec::new(),
            priority: BTreeMap::new(),
        }
    }

    pub fn from_letters(alphabet: Vec<String>) -> Self {
        AutomatonBuilder { alphabet, initial: 0, rows: Vec::new(), priority: BTreeMap::new() }
    }

    pub fn initial(mut self, q: StateId) -> Self {
        self.initial = q;
        self
    }

    pub fn add_state(&mut self) -> StateId {
        self.rows.push(vec![None; self.alphabet.len()]);
        self.rows.len() - 1
    }

    pub fn add_states(&mut self, n: usize) -> Vec<StateId> {
        (0..n).map(|_| self.add_state()).collect()
    }

    /// Sets `delta(q, a)` and the priorities of the formula's atoms.
    pub fn transition(
        &mut self,
        q: StateId,
        a: LetterId,
        f: TransitionFormula,
        priorities: &[(StateId, Priority)],
    ) {
        for (t, p) in priorities {
            self.priority.insert((q, a, *t), *p);
        }
        self.rows[q][a] = Some(f);
    }

    /// Sets `delta(q, a)` with one shared priority on all its transitions.
    pub fn uniform(&mut self, q: StateId, a: LetterId, f: TransitionFormula, p: Priority) {
        for t in f.atoms() {
            self.priority.insert((q, a, t), p);
        }
        self.rows[q][a] = Some(f);
    }

    /// Fills every unset cell with a transition to `sink` at priority `p`.
    pub fn complete_with(&mut self, sink: StateId, p: Priority) {
        for q in 0..self.rows.len() {
            for a in 0..self.alphabet.len() {
                if self.rows[q][a].is_none() {
                    self.priority.insert((q, a, sink), p);
                    self.rows[q][a] = Some(TransitionFormula::atom(sink));
                }
            }
        }
    }

    pub fn build(self) -> Automaton {
        let state_count = self.rows.len();
        let delta = self
            .rows
            .into_iter()
            .enumerate()
            .map(|(q, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(a, f)| f.unwrap_or_else(|| panic!("delta({q}, letter {a}) unset")))
                    .collect()
            })
            .collect();
        Automaton::from_parts(self.alphabet, state_count, self.initial, delta, self.priority)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::fixtures;

    fn one_state_loop() -> Automaton {
        let mut b = AutomatonBuilder::new(&["a"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 2);
        b.build()
    }

    #[test]
    fn validate_well_formed_single_state() {
        assert!(one_state_loop().validate().is_empty());
    }

    #[test]
    fn validate_reports_stray_priority() {
        let mut a = one_state_loop();
        a.priority.insert((0, 0, 5), 1);
        let diags = a.validate();
        assert_eq!(diags.len(), 1);
        assert!(matches!(diags[0], Diagnostic::StrayPriority { transition: (0, 0, 5) }));
    }

    #[test]
    fn validate_reports_missing_priority_and_dangling_atom() {
        let mut b = AutomatonBuilder::new(&["a"]);
        let q = b.add_state();
        b.transition(q, 0, TransitionFormula::any_of([q, 7]), &[]);
        let a = b.build();
        let diags = a.validate();
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::DanglingAtom { atom: 7, .. })));
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::MissingPriority { .. })));
    }

    #[test]
    fn fig_one_step_fixture_is_valid_and_alternating() {
        let a = fixtures().remove("fig-one-step").unwrap();
        assert!(a.validate().is_empty());
        assert_eq!(a.classify(), AutomatonClass::Alternating);
    }

    #[test]
    fn classify_basics() {
        assert_eq!(one_state_loop().classify(), AutomatonClass::Deterministic);
        let mut b = AutomatonBuilder::new(&["a"]);
        let q = b.add_state();
        let r = b.add_state();
        b.uniform(q, 0, TransitionFormula::any_of([q, r]), 1);
        b.uniform(r, 0, TransitionFormula::atom(r), 2);
        assert_eq!(b.build().classify(), AutomatonClass::Nondeterministic);
    }

    #[test]
    fn dual_twice_shifts_priorities_by_two() {
        let a = fixtures().remove("fig-one-step").unwrap();
        let dd = a.dual().dual();
        for (k, p) in a.priority_map() {
            assert_eq!(dd.priority_map()[k], p + 2);
        }
        assert_eq!(dd.delta, a.delta);
        assert_eq!(a.dual().classify(), AutomatonClass::Alternating);
    }

    #[test]
    fn classify_dual_swaps_nondeterministic_and_universal() {
        let mut b = AutomatonBuilder::new(&["a"]);
        let q = b.add_state();
        let r = b.add_state();
        b.uniform(q, 0, TransitionFormula::any_of([q, r]), 1);
        b.uniform(r, 0, TransitionFormula::atom(r), 2);
        let a = b.build();
        assert_eq!(a.classify(), AutomatonClass::Nondeterministic);
        assert_eq!(a.dual().classify(), AutomatonClass::Universal);
    }

    #[test]
    fn restrict_keep_all_is_identity_up_to_canonical_form() {
        let a = fixtures().remove("fig-one-step").unwrap();
        let keep = a.states().collect();
        let r = a.restrict(&keep).unwrap();
        assert_eq!(r, a);
    }

    #[test]
    fn restrict_drops_q2_from_figure_automaton() {
        // delta(q0, a) = (q0 & q1) | (q1 & q2) loses its second disjunct,
        // delta(q1, a) = q1 & q2 dies and is routed to a fresh sink.
        let a = fixtures().remove("fig-one-step").unwrap();
        let r = a.restrict(&BTreeSet::from([0, 1])).unwrap();
        assert_eq!(r.state_count(), 3);
        assert_eq!(*r.formula(0, 0), TransitionFormula::all_of([0, 1]));
        assert_eq!(*r.formula(1, 0), TransitionFormula::atom(2));
        assert_eq!(r.priority(1, 0, 2), 1);
        assert!(r.validate().is_empty());
    }

    #[test]
    fn restrict_requires_initial() {
        let a = fixtures().remove("fig-one-step").unwrap();
        assert!(matches!(
            a.restrict(&BTreeSet::from([1, 2])),
            Err(Error::InitialRemoved(0))
        ));
    }

    #[test]
    fn compress_priorities_preserves_parity_and_order() {
        let used: BTreeSet<Priority> = [2, 5, 7, 8].into();
        let map = compress_map(&used);
        assert_eq!(map[&2], 0);
        assert_eq!(map[&5], 1);
        assert_eq!(map[&7], 1);
        assert_eq!(map[&8], 2);
    }
}
