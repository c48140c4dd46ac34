//! Test-case factories: figure fixtures, seeded random automata, the
//! three-priority combinator over a GFG coBuchi base, and the NFA-universality
//! reduction.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{Automaton, AutomatonBuilder, AutomatonClass, Priority, StateId};
use crate::error::{Error, Result};
use crate::formula::TransitionFormula;

/// Seeded configuration for [`random_automaton`].
#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub min_states: usize,
    pub max_states: usize,
    pub alphabet_size: usize,
    pub min_priority: Priority,
    pub max_priority: Priority,
    /// Expected number of atoms per transition condition.
    pub density: f64,
    pub class: ClassConstraint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassConstraint {
    Deterministic,
    Nondeterministic,
    Universal,
    /// Free mix of conjunctions and disjunctions.
    Alternating,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_states == 0 || self.min_states > self.max_states {
            return Err(Error::Invalid("empty state range".into()));
        }
        if self.alphabet_size == 0 || self.alphabet_size > 26 {
            return Err(Error::Invalid("alphabet size must be within 1..=26".into()));
        }
        if self.min_priority > self.max_priority {
            return Err(Error::Invalid("empty priority range".into()));
        }
        if self.density <= 0.0 {
            return Err(Error::Invalid("density must be positive".into()));
        }
        Ok(())
    }
}

fn letter_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

/// Seeded, reproducible automaton satisfying the class constraint; always
/// validates cleanly.
pub fn random_automaton(cfg: &GeneratorConfig) -> Result<Automaton> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = rng.gen_range(cfg.min_states..=cfg.max_states);
    let mut b = AutomatonBuilder::from_letters(letter_names(cfg.alphabet_size));
    b.add_states(n);

    let mut atoms = |rng: &mut ChaCha8Rng| -> Vec<StateId> {
        let mut count = 1;
        // Geometric tail so the expected atom count tracks the density.
        let extra = (cfg.density - 1.0).max(0.0);
        let p_more = extra / (1.0 + extra);
        while count < n && rng.gen_bool(p_more) {
            count += 1;
        }
        let mut pool: Vec<StateId> = (0..n).collect();
        let mut picked = Vec::with_capacity(count);
        for _ in 0..count {
            let i = rng.gen_range(0..pool.len());
            picked.push(pool.swap_remove(i));
        }
        picked.sort_unstable();
        picked
    };

    for q in 0..n {
        for a in 0..cfg.alphabet_size {
            let f = match cfg.class {
                ClassConstraint::Deterministic => {
                    TransitionFormula::atom(rng.gen_range(0..n))
                }
                ClassConstraint::Nondeterministic => {
                    TransitionFormula::any_of(atoms(&mut rng))
                }
                ClassConstraint::Universal => TransitionFormula::all_of(atoms(&mut rng)),
                ClassConstraint::Alternating => {
                    // Up to two levels: a connective over groups of atoms.
                    let groups: Vec<TransitionFormula> = {
                        let picked = atoms(&mut rng);
                        let mut gs = Vec::new();
                        let mut it = picked.into_iter().peekable();
                        while it.peek().is_some() {
                            let take = 1 + rng.gen_range(0..2);
                            let chunk: Vec<StateId> = it.by_ref().take(take).collect();
                            gs.push(if rng.gen_bool(0.5) {
                                TransitionFormula::all_of(chunk)
                            } else {
                                TransitionFormula::any_of(chunk)
                            });
                        }
                        gs
                    };
                    if rng.gen_bool(0.5) {
                        TransitionFormula::or(groups)
                    } else {
                        TransitionFormula::and(groups)
                    }
                }
            };
            let priorities: Vec<(StateId, Priority)> = f
                .atoms()
                .into_iter()
                .map(|t| (t, rng.gen_range(cfg.min_priority..=cfg.max_priority)))
                .collect();
            b.transition(q, a, f, &priorities);
        }
    }
    let aut = b.build();
    debug_assert!(aut.validate().is_empty());
    Ok(aut)
}

/// The three figure automata plus canonical sinks, keyed by name.
///
/// Figure automata marked with accepting states are encoded transition-based
/// by giving every transition into an accepting state the even priority.
pub fn fixtures() -> BTreeMap<String, Automaton> {
    let mut out = BTreeMap::new();

    // Three-state alternating parity automaton of the one-step-arena figure.
    {
        let mut b = AutomatonBuilder::new(&["a"]);
        let q = b.add_states(3);
        b.transition(
            q[0],
            0,
            TransitionFormula::or(vec![
                TransitionFormula::all_of([q[0], q[1]]),
                TransitionFormula::all_of([q[1], q[2]]),
            ]),
            &[(q[0], 3), (q[1], 2), (q[2], 6)],
        );
        b.transition(q[1], 0, TransitionFormula::all_of([q[1], q[2]]), &[(q[1], 4), (q[2], 5)]);
        b.transition(q[2], 0, TransitionFormula::any_of([q[1], q[2]]), &[(q[1], 3), (q[2], 5)]);
        out.insert("fig-one-step".to_string(), b.build());
    }

    // Alternating weak automaton: a finitely often and c infinitely often.
    // States: 0 choice loop, 1 watch (accepting), 2 await c, 3 done
    // (accepting), 4 rejecting sink.
    {
        let mut b = AutomatonBuilder::new(&["a", "b", "c"]);
        let s = b.add_states(5);
        let (a, bb, c) = (0, 1, 2);
        b.transition(s[0], a, TransitionFormula::atom(s[0]), &[(s[0], 1)]);
        b.transition(
            s[0],
            bb,
            TransitionFormula::any_of([s[0], s[1]]),
            &[(s[0], 1), (s[1], 2)],
        );
        b.transition(
            s[0],
            c,
            TransitionFormula::any_of([s[0], s[1]]),
            &[(s[0], 1), (s[1], 2)],
        );
        b.transition(
            s[1],
            bb,
            TransitionFormula::all_of([s[1], s[2]]),
            &[(s[1], 2), (s[2], 1)],
        );
        b.transition(s[1], c, TransitionFormula::atom(s[1]), &[(s[1], 2)]);
        b.transition(s[2], bb, TransitionFormula::atom(s[2]), &[(s[2], 1)]);
        b.transition(s[2], c, TransitionFormula::atom(s[3]), &[(s[3], 2)]);
        b.transition(s[3], bb, TransitionFormula::atom(s[3]), &[(s[3], 2)]);
        b.transition(s[3], c, TransitionFormula::atom(s[3]), &[(s[3], 2)]);
        b.complete_with(s[4], 1);
        out.insert("fig-ex-alt".to_string(), b.build());
    }

    // Its cyclic variant: the await state returns to the watch state on c.
    {
        let mut b = AutomatonBuilder::new(&["a", "b", "c"]);
        let t = b.add_states(4);
        let (_a, bb, c) = (0, 1, 2);
        b.transition(t[0], 0, TransitionFormula::atom(t[0]), &[(t[0], 1)]);
        b.transition(
            t[0],
            bb,
            TransitionFormula::any_of([t[0], t[1]]),
            &[(t[0], 1), (t[1], 2)],
        );
        b.transition(
            t[0],
            c,
            TransitionFormula::any_of([t[0], t[1]]),
            &[(t[0], 1), (t[1], 2)],
        );
        b.transition(
            t[1],
            bb,
            TransitionFormula::all_of([t[1], t[2]]),
            &[(t[1], 2), (t[2], 1)],
        );
        b.transition(t[1], c, TransitionFormula::atom(t[1]), &[(t[1], 2)]);
        b.transition(t[2], bb, TransitionFormula::atom(t[2]), &[(t[2], 1)]);
        b.transition(t[2], c, TransitionFormula::atom(t[1]), &[(t[1], 2)]);
        b.complete_with(t[3], 1);
        out.insert("fig-ex-alt-gfg".to_string(), b.build());
    }

    // Nondeterministic coBuchi companion of the previous fixture: every
    // conjunction widened to a disjunction, good transitions demoted to
    // coBuchi priorities. Input for the normalisation pipeline.
    {
        let alt = out["fig-ex-alt-gfg"].clone();
        let mut b = AutomatonBuilder::new(&["a", "b", "c"]);
        b.add_states(alt.state_count());
        for q in alt.states() {
            for a in 0..alt.letter_count() {
                let f = TransitionFormula::any_of(alt.formula(q, a).atoms());
                let priorities: Vec<(StateId, Priority)> = f
                    .atoms()
                    .into_iter()
                    .map(|tgt| (tgt, if alt.priority(q, a, tgt) == 2 { 0 } else { 1 }))
                    .collect();
                b.transition(q, a, f, &priorities);
            }
        }
        out.insert("fig-ex-alt-gfg-ncw".to_string(), b.build());
    }

    // Canonical sinks: the all-accepting one doubles as the trivial DCW base
    // for the combinator.
    {
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 0);
        b.uniform(q, 1, TransitionFormula::atom(q), 0);
        out.insert("trivial-dcw".to_string(), b.build());
    }
    {
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 1);
        b.uniform(q, 1, TransitionFormula::atom(q), 1);
        out.insert("rejecting-sink".to_string(), b.build());
    }
    out
}

/// Joins a GFG coBuchi base and its dual under a fresh initial state: reading
/// the first alphabet letter commits to the base (accepting transitions keep
/// priority 0), reading the second commits to the dual as a universal Buchi
/// part (its accepting transitions get priority 2). The result accepts
/// `a . L(base)` together with `b . complement(L(base))` and stays GFG when
/// the base is.
pub fn combinator_cn(base: &Automaton) -> Result<Automaton> {
    if !matches!(
        base.classify(),
        AutomatonClass::Nondeterministic | AutomatonClass::Deterministic
    ) || !base.is_cobuchi()
    {
        return Err(Error::NotNcw);
    }
    if base.letter_count() < 2 {
        return Err(Error::BadAlphabet);
    }
    if !crate::decide::is_gfg_ncw_g2(base)? {
        return Err(Error::BaseNotGfg);
    }
    let n = base.state_count();
    let dual = base.dual();
    let mut b = AutomatonBuilder::from_letters(base.alphabet().to_vec());
    let init = b.add_state();
    let base_off = 1;
    let dual_off = 1 + n;
    b.add_states(2 * n);
    b.transition(init, 0, TransitionFormula::atom(base_off + base.initial()), &[(
        base_off + base.initial(),
        1,
    )]);
    b.transition(init, 1, TransitionFormula::atom(dual_off + base.initial()), &[(
        dual_off + base.initial(),
        1,
    )]);
    for (copy, offset) in [(base, base_off), (&dual, dual_off)] {
        for q in copy.states() {
            for a in 0..copy.letter_count() {
                let f = copy.formula(q, a).rename(&|t| t + offset);
                let priorities: Vec<(StateId, Priority)> = copy
                    .formula(q, a)
                    .atoms()
                    .into_iter()
                    .map(|t| (t + offset, copy.priority(q, a, t)))
                    .collect();
                b.transition(q + offset, a, f, &priorities);
            }
        }
    }
    // Letters beyond the two committing ones leave the fresh initial state
    // for a rejecting sink.
    if base.letter_count() > 2 {
        let sink = b.add_state();
        b.complete_with(sink, 1);
    }
    Ok(b.build())
}

/// Finite-word NFA over `{a, b}`, the input shape of [`pspace_reduction`].
#[derive(Clone, Debug)]
pub struct NfaSpec {
    pub states: usize,
    pub initial: StateId,
    /// `(state, letter, state)` with letters 0 (`a`) and 1 (`b`).
    pub transitions: BTreeSet<(StateId, usize, StateId)>,
    pub accepting: BTreeSet<StateId>,
}

impl NfaSpec {
    fn check(&self) -> Result<()> {
        if self.initial >= self.states {
            return Err(Error::Invalid("NFA initial state out of range".into()));
        }
        for (q, l, t) in &self.transitions {
            if *q >= self.states || *t >= self.states {
                return Err(Error::Invalid("NFA transition out of range".into()));
            }
            if *l > 1 {
                return Err(Error::BadAlphabet);
            }
        }
        Ok(())
    }
}

/// Subset-construction universality check over `{a, b}`: is `L(N)` all of
/// `{a, b}^*`?
pub fn nfa_universal(n: &NfaSpec) -> bool {
    let step = |set: &BTreeSet<StateId>, letter: usize| -> BTreeSet<StateId> {
        set.iter()
            .flat_map(|q| {
                n.transitions
                    .iter()
                    .filter(move |(s, l, _)| s == q && *l == letter)
                    .map(|(_, _, t)| *t)
            })
            .collect()
    };
    let start: BTreeSet<StateId> = [n.initial].into();
    let mut seen = BTreeSet::from([start.clone()]);
    let mut frontier = vec![start];
    while let Some(set) = frontier.pop() {
        if set.intersection(&n.accepting).next().is_none() {
            return false;
        }
        for letter in 0..2 {
            let next = step(&set, letter);
            if seen.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    true
}

/// The universality reduction: an alternating weak automaton over `{a, b, #}`
/// in which Eve must guess the second letter before it arrives and the dual
/// NFA runs universally afterwards, with `#` closing finite words against an
/// accepting or rejecting sink. Eve can resolve the guess online iff the dual
/// NFA is empty, i.e. iff the input NFA is universal.
pub fn pspace_reduction(n: &NfaSpec) -> Result<Automaton> {
    n.check()?;
    let mut b = AutomatonBuilder::new(&["a", "b", "#"]);
    let init = b.add_state();
    let guess = [b.add_state(), b.add_state()];
    let nfa_off = 3;
    b.add_states(n.states);
    let accept_sink = b.add_state();
    let reject_sink = b.add_state();

    for first in 0..2 {
        b.transition(
            init,
            first,
            TransitionFormula::any_of([guess[0], guess[1]]),
            &[(guess[0], 1), (guess[1], 1)],
        );
    }
    b.transition(init, 2, TransitionFormula::atom(reject_sink), &[(reject_sink, 1)]);
    for (g, expected) in guess.iter().zip(0..2) {
        for letter in 0..2 {
            let target = if letter == expected { nfa_off + n.initial } else { reject_sink };
            b.transition(*g, letter, TransitionFormula::atom(target), &[(target, 1)]);
        }
        b.transition(*g, 2, TransitionFormula::atom(reject_sink), &[(reject_sink, 1)]);
    }
    for q in 0..n.states {
        for letter in 0..2 {
            let targets: Vec<StateId> = n
                .transitions
                .iter()
                .filter(|(s, l, _)| *s == q && *l == letter)
                .map(|(_, _, t)| nfa_off + t)
                .collect();
            let (f, priorities): (TransitionFormula, Vec<(StateId, Priority)>) =
                if targets.is_empty() {
                    // The NFA branch dies, so its dual accepts whatever comes.
                    (TransitionFormula::atom(accept_sink), vec![(accept_sink, 1)])
                } else {
                    (
                        TransitionFormula::all_of(targets.iter().copied()),
                        targets.iter().map(|t| (*t, 1)).collect(),
                    )
                };
            b.transition(nfa_off + q, letter, f, &priorities);
        }
        // On #: the dual NFA accepts exactly at non-accepting input states.
        let target = if n.accepting.contains(&q) { reject_sink } else { accept_sink };
        b.transition(nfa_off + q, 2, TransitionFormula::atom(target), &[(target, 1)]);
    }
    for letter in 0..3 {
        b.transition(accept_sink, letter, TransitionFormula::atom(accept_sink), &[(
            accept_sink,
            2,
        )]);
        b.transition(reject_sink, letter, TransitionFormula::atom(reject_sink), &[(
            reject_sink,
            1,
        )]);
    }
    Ok(b.build())
}

/// Seeded random NFA over `{a, b}` with up to `max_states` states.
pub fn random_nfa(seed: u64, max_states: usize) -> NfaSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = rng.gen_range(1..=max_states);
    let mut transitions = BTreeSet::new();
    for q in 0..states {
        for l in 0..2 {
            for t in 0..states {
                // Bias toward denser automata so universal instances occur.
                if rng.gen_bool(0.55) {
                    transitions.insert((q, l, t));
                }
            }
        }
    }
    let mut accepting = BTreeSet::new();
    for q in 0..states {
        if rng.gen_bool(0.6) {
            accepting.insert(q);
        }
    }
    NfaSpec { states, initial: 0, transitions, accepting }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        for (name, aut) in fixtures() {
            assert!(aut.validate().is_empty(), "{name}");
        }
    }

    #[test]
    fn fixture_classes() {
        let fs = fixtures();
        assert_eq!(fs["fig-one-step"].classify(), AutomatonClass::Alternating);
        assert_eq!(fs["fig-ex-alt"].classify(), AutomatonClass::Alternating);
        assert_eq!(fs["fig-ex-alt-gfg"].classify(), AutomatonClass::Alternating);
        assert_eq!(
            fs["fig-ex-alt-gfg-ncw"].classify(),
            AutomatonClass::Nondeterministic
        );
        assert!(fs["fig-ex-alt-gfg-ncw"].is_cobuchi());
        assert_eq!(fs["trivial-dcw"].classify(), AutomatonClass::Deterministic);
    }

    #[test]
    fn same_seed_same_automaton() {
        let cfg = GeneratorConfig {
            seed: 7,
            min_states: 1,
            max_states: 3,
            alphabet_size: 2,
            min_priority: 0,
            max_priority: 3,
            density: 1.6,
            class: ClassConstraint::Alternating,
        };
        assert_eq!(random_automaton(&cfg).unwrap(), random_automaton(&cfg).unwrap());
    }

    #[test]
    fn random_sweep_validates() {
        for seed in 0..1000 {
            let cfg = GeneratorConfig {
                seed,
                min_states: 1,
                max_states: 4,
                alphabet_size: 2,
                min_priority: 0,
                max_priority: 3,
                density: 1.8,
                class: match seed % 4 {
                    0 => ClassConstraint::Deterministic,
                    1 => ClassConstraint::Nondeterministic,
                    2 => ClassConstraint::Universal,
                    _ => ClassConstraint::Alternating,
                },
            };
            let aut = random_automaton(&cfg).unwrap();
            assert!(aut.validate().is_empty(), "seed {seed}");
            if cfg.class == ClassConstraint::Deterministic {
                assert_eq!(aut.classify(), AutomatonClass::Deterministic);
            }
        }
    }

    #[test]
    fn universality_oracle_on_tiny_nfas() {
        // Single accepting state looping on both letters: universal.
        let n = NfaSpec {
            states: 1,
            initial: 0,
            transitions: [(0, 0, 0), (0, 1, 0)].into(),
            accepting: [0].into(),
        };
        assert!(nfa_universal(&n));
        // Accepts only the word "a".
        let n = NfaSpec {
            states: 2,
            initial: 0,
            transitions: [(0, 0, 1)].into(),
            accepting: [1].into(),
        };
        assert!(!nfa_universal(&n));
    }
}
