//! Two-player arenas with colored edges and omega-regular winning conditions.
//!
//! Positions are dense ids owned by Eve or Adam. Edges carry either an epsilon
//! label or a letter plus one color per declared track. Conditions are either
//! max-parity over track 0 or an Emerson-Lei formula over `Inf`/`Fin` atoms on
//! `(track, value)` colors.

pub mod brute;
pub mod compile;
pub mod safety;
pub mod zielonka;

pub use brute::{brute_force_solve, verify_parity_solution};
pub use compile::{compile_emerson_lei, CompiledGame, MAX_COLORS};
pub use safety::solve_safety;
pub use zielonka::solve_parity;

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{LetterId, Priority};

pub type PosId = usize;
pub type EdgeId = usize;
pub type TrackId = usize;

/// A color is a value on one track.
pub type Color = (TrackId, Priority);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Player {
    Eve,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eve => Player::Adam,
            Player::Adam => Player::Eve,
        }
    }

    /// The player favoured by a max-parity priority.
    pub fn of_priority(p: Priority) -> Player {
        if p % 2 == 0 {
            Player::Eve
        } else {
            Player::Adam
        }
    }
}

/// An edge of the arena. Epsilon edges carry no letter and no colors;
/// labelled edges carry a letter and exactly one color per track.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: PosId,
    pub target: PosId,
    pub letter: Option<LetterId>,
    pub colors: Vec<Priority>,
}

impl Edge {
    pub fn eps(source: PosId, target: PosId) -> Edge {
        Edge { source, target, letter: None, colors: Vec::new() }
    }

    pub fn labelled(source: PosId, target: PosId, letter: LetterId, colors: Vec<Priority>) -> Edge {
        Edge { source, target, letter: Some(letter), colors }
    }

    pub fn is_eps(&self) -> bool {
        self.letter.is_none()
    }
}

/// Positive Boolean formula over `Inf`/`Fin` color atoms; `Fin(c)` is the
/// negation of `Inf(c)`, so the shape is closed under dualisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElFormula {
    True,
    False,
    Inf(Color),
    Fin(Color),
    And(Vec<ElFormula>),
    Or(Vec<ElFormula>),
}

impl ElFormula {
    pub fn and(children: Vec<ElFormula>) -> ElFormula {
        let mut flat = Vec::new();
        for c in children {
            match c {
                ElFormula::True => {}
                ElFormula::False => return ElFormula::False,
                ElFormula::And(gs) => flat.extend(gs),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => ElFormula::True,
            1 => flat.pop().unwrap(),
            _ => ElFormula::And(flat),
        }
    }

    pub fn or(children: Vec<ElFormula>) -> ElFormula {
        let mut flat = Vec::new();
        for c in children {
            match c {
                ElFormula::False => {}
                ElFormula::True => return ElFormula::True,
                ElFormula::Or(gs) => flat.extend(gs),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => ElFormula::False,
            1 => flat.pop().unwrap(),
            _ => ElFormula::Or(flat),
        }
    }

    /// Max-parity acceptance on one track, given the set of values that can
    /// occur there. The smallest value never needs to be mentioned: some value
    /// occurs infinitely often on every play, so "everything above is finite"
    /// already pins it down.
    pub fn parity(track: TrackId, used: &BTreeSet<Priority>) -> ElFormula {
        let Some(&min) = used.iter().next() else {
            return ElFormula::False;
        };
        let mut disjuncts = Vec::new();
        for &p in used.iter().filter(|p| **p % 2 == 0) {
            let mut conj = Vec::new();
            if p != min {
                conj.push(ElFormula::Inf((track, p)));
            }
            for &above in used.iter().filter(|q| **q > p) {
                conj.push(ElFormula::Fin((track, above)));
            }
            disjuncts.push(ElFormula::and(conj));
        }
        ElFormula::or(disjuncts)
    }

    /// De Morgan dual: the condition satisfied exactly when `self` is not.
    pub fn negated(&self) -> ElFormula {
        match self {
            ElFormula::True => ElFormula::False,
            ElFormula::False => ElFormula::True,
            ElFormula::Inf(c) => ElFormula::Fin(*c),
            ElFormula::Fin(c) => ElFormula::Inf(*c),
            ElFormula::And(cs) => ElFormula::or(cs.iter().map(|c| c.negated()).collect()),
            ElFormula::Or(cs) => ElFormula::and(cs.iter().map(|c| c.negated()).collect()),
        }
    }

    /// Colors mentioned anywhere in the formula.
    pub fn colors(&self) -> BTreeSet<Color> {
        let mut out = BTreeSet::new();
        self.collect_colors(&mut out);
        out
    }

    fn collect_colors(&self, out: &mut BTreeSet<Color>) {
        match self {
            ElFormula::True | ElFormula::False => {}
            ElFormula::Inf(c) | ElFormula::Fin(c) => {
                out.insert(*c);
            }
            ElFormula::And(cs) | ElFormula::Or(cs) => {
                cs.iter().for_each(|c| c.collect_colors(out))
            }
        }
    }

    /// Evaluates the formula against the set of colors seen infinitely often.
    pub fn eval(&self, inf: &BTreeSet<Color>) -> bool {
        match self {
            ElFormula::True => true,
            ElFormula::False => false,
            ElFormula::Inf(c) => inf.contains(c),
            ElFormula::Fin(c) => !inf.contains(c),
            ElFormula::And(cs) => cs.iter().all(|c| c.eval(inf)),
            ElFormula::Or(cs) => cs.iter().any(|c| c.eval(inf)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WinningCondition {
    /// Arena only; a condition is attached later.
    Unset,
    /// Max-parity over track 0: Eve wins iff the highest color seen
    /// infinitely often is even.
    Parity,
    EmersonLei(ElFormula),
}

/// A game arena plus winning condition.
#[derive(Clone, Debug)]
pub struct Game {
    pub owners: Vec<Player>,
    pub edges: Vec<Edge>,
    pub initial: PosId,
    pub tracks: usize,
    pub condition: WinningCondition,
    /// Terminal positions are only allowed in partial games.
    pub partial: bool,
    /// Optional debug names, index-aligned with `owners`.
    pub names: Option<Vec<String>>,
}

impl Game {
    pub fn position_count(&self) -> usize {
        self.owners.len()
    }

    /// Outgoing edge ids per position, in ascending edge-id order.
    pub fn adjacency(&self) -> Vec<Vec<EdgeId>> {
        let mut adj = vec![Vec::new(); self.owners.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.source].push(i);
        }
        adj
    }

    pub fn name_of(&self, p: PosId) -> String {
        match &self.names {
            Some(ns) => ns[p].clone(),
            None => format!("v{p}"),
        }
    }

    /// The color values occurring on any edge, per track.
    pub fn used_colors(&self) -> Vec<BTreeSet<Priority>> {
        let mut used = vec![BTreeSet::new(); self.tracks];
        for e in &self.edges {
            for (t, v) in e.colors.iter().enumerate() {
                used[t].insert(*v);
            }
        }
        used
    }
}

/// Winner per position plus positional strategies on the winning regions.
///
/// Positional strategies exist for parity and safety solutions. Solutions of
/// Emerson-Lei games carry strategies with memory instead; the positional maps
/// stay empty in that case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameSolution {
    pub winner: Vec<Player>,
    pub eve_strategy: BTreeMap<PosId, EdgeId>,
    pub adam_strategy: BTreeMap<PosId, EdgeId>,
    pub eve_memory: Option<StrategyWithMemory>,
    pub adam_memory: Option<StrategyWithMemory>,
}

impl GameSolution {
    pub fn positional(
        winner: Vec<Player>,
        eve_strategy: BTreeMap<PosId, EdgeId>,
        adam_strategy: BTreeMap<PosId, EdgeId>,
    ) -> GameSolution {
        GameSolution { winner, eve_strategy, adam_strategy, eve_memory: None, adam_memory: None }
    }

    pub fn eve_wins_initial(&self, g: &Game) -> bool {
        self.winner[g.initial] == Player::Eve
    }
}

/// A finite-memory strategy: a memory set with deterministic updates on edges
/// and a choice function on (memory, owned position) pairs. Both maps are
/// defined on the reachable pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyWithMemory {
    pub memory_count: usize,
    pub initial_memory: usize,
    pub update: BTreeMap<(usize, EdgeId), usize>,
    pub choice: BTreeMap<(usize, PosId), EdgeId>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_formula_mentions_all_but_the_smallest_value() {
        let used: BTreeSet<Priority> = [0, 1, 2, 3].into();
        let f = ElFormula::parity(7, &used);
        let colors = f.colors();
        assert!(!colors.contains(&(7, 0)));
        assert_eq!(colors, [(7, 1), (7, 2), (7, 3)].into());
    }

    #[test]
    fn parity_formula_semantics_on_small_sets() {
        let used: BTreeSet<Priority> = [0, 1, 2, 3].into();
        let f = ElFormula::parity(0, &used);
        // Simulate every nonempty subset of used values as the inf-set and
        // compare with direct max-parity evaluation. Values not mentioned in
        // the formula (here 0) simply never show up in the inf-set we pass.
        for mask in 1u32..16 {
            let inf_vals: BTreeSet<Priority> =
                (0..4).filter(|b| mask & (1 << b) != 0).map(|b| b as Priority).collect();
            let expect = inf_vals.iter().max().unwrap() % 2 == 0;
            let inf: BTreeSet<Color> = inf_vals
                .iter()
                .filter(|v| f.colors().contains(&(0, **v)))
                .map(|v| (0, *v))
                .collect();
            assert_eq!(f.eval(&inf), expect, "inf-set {inf_vals:?}");
        }
    }

    #[test]
    fn negation_flips_eval() {
        let used: BTreeSet<Priority> = [1, 2].into();
        let f = ElFormula::parity(0, &used);
        let g = f.negated();
        for inf in [BTreeSet::new(), BTreeSet::from([(0, 2)])] {
            assert_ne!(f.eval(&inf), g.eval(&inf));
        }
    }
}
