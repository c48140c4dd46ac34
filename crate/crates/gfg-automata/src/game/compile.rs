//! Emerson-Lei to parity compilation through a latest-appearance record.
//!
//! The monitor keeps the tracked colors ordered by most recent occurrence.
//! When a color at (zero-based) depth `d` of the record occurs, the window of
//! the `d + 1` most recent colors is exactly the set of colors seen since the
//! previous occurrence of something at least that deep; the window of maximal
//! depth hit infinitely often converges to the set of colors seen infinitely
//! often. Hitting depth `d` therefore emits `2(d + 1)` when the window
//! satisfies the formula and `2(d + 1) + 1` otherwise, and the play satisfies
//! the formula iff the maximum priority emitted infinitely often is even.
//! Edges carrying no tracked color emit `0` or `1` according to the formula's
//! value on the empty set.

use std::collections::BTreeMap;

use super::{
    Color, Edge, EdgeId, ElFormula, Game, GameSolution, PosId, StrategyWithMemory,
    WinningCondition,
};
use crate::automaton::Priority;
use crate::error::{check_guard, Error, Result};

/// Hard cap on tracked colors; the record space is factorial in this count.
pub const MAX_COLORS: usize = 8;

pub type MemId = usize;

/// Result of compiling a game with an Emerson-Lei condition.
#[derive(Clone, Debug)]
pub struct CompiledGame {
    pub game: Game,
    /// Compiled position id to (original position, memory).
    pub origin: Vec<(PosId, MemId)>,
    /// Compiled edge id to original edge id.
    pub edge_origin: Vec<EdgeId>,
    /// Memory id to record, most recent color first.
    pub memories: Vec<Vec<usize>>,
    pub initial_memory: MemId,
    /// Tracked colors, indexed by the entries of a record.
    pub colors: Vec<Color>,
}

impl CompiledGame {
    /// Compiled position for an original position under a memory, if reachable.
    pub fn compiled_id(&self, pos: PosId, mem: MemId) -> Option<PosId> {
        self.origin.iter().position(|o| *o == (pos, mem))
    }

    /// Memory reached from `mem` after crossing the original edge.
    pub fn step_memory(&self, mem: MemId, edge: &Edge) -> Vec<usize> {
        let mut record = self.memories[mem].clone();
        for idx in self.crossed(edge) {
            let at = record.iter().position(|c| *c == idx).unwrap();
            record.remove(at);
            record.insert(0, idx);
        }
        record
    }

    fn crossed(&self, edge: &Edge) -> Vec<usize> {
        let mut out = Vec::new();
        if edge.is_eps() {
            return out;
        }
        for (t, v) in edge.colors.iter().enumerate() {
            if let Some(idx) = self.colors.iter().position(|c| *c == (t, *v)) {
                out.push(idx);
            }
        }
        out
    }

    /// Lifts a positional solution of the compiled game to strategies with
    /// appearance-record memory on the original game. Returns (Eve, Adam).
    pub fn lift(&self, sol: &GameSolution) -> (StrategyWithMemory, StrategyWithMemory) {
        let mut eve = BTreeMap::new();
        let mut adam = BTreeMap::new();
        for (cid, &(pos, mem)) in self.origin.iter().enumerate() {
            if let Some(cedge) = sol.eve_strategy.get(&cid) {
                eve.insert((mem, pos), self.edge_origin[*cedge]);
            }
            if let Some(cedge) = sol.adam_strategy.get(&cid) {
                adam.insert((mem, pos), self.edge_origin[*cedge]);
            }
        }
        let mut update = BTreeMap::new();
        for (cedge, &oedge) in self.edge_origin.iter().enumerate() {
            let from_mem = self.origin[self.game.edges[cedge].source].1;
            let to_mem = self.origin[self.game.edges[cedge].target].1;
            update.insert((from_mem, oedge), to_mem);
        }
        let mk = |choice: BTreeMap<(usize, PosId), EdgeId>| StrategyWithMemory {
            memory_count: self.memories.len(),
            initial_memory: self.initial_memory,
            update: update.clone(),
            choice,
        };
        (mk(eve), mk(adam))
    }
}

/// Compiles an Emerson-Lei game into a parity game over the product with the
/// appearance-record monitor, preserving winners position-wise.
pub fn compile_emerson_lei(g: &Game) -> Result<CompiledGame> {
    compile_seeded(g, &[g.initial])
}

/// Like [`compile_emerson_lei`] but additionally explores the product from
/// every given position under the initial record, so each seed has a compiled
/// image. The priority emitted along a play only depends on its tail, so the
/// initial record is sound for any start.
pub fn compile_seeded(g: &Game, seeds: &[PosId]) -> Result<CompiledGame> {
    let formula = match &g.condition {
        WinningCondition::EmersonLei(f) => f.clone(),
        WinningCondition::Parity => {
            // Already parity: express it as a formula so one code path serves.
            let used = g.used_colors();
            ElFormula::parity(0, used.first().unwrap_or(&Default::default()))
        }
        WinningCondition::Unset => {
            return Err(Error::Invalid("game has no winning condition".into()))
        }
    };
    let occurring: Vec<std::collections::BTreeSet<Priority>> = g.used_colors();
    let mentioned = formula.colors();
    let colors: Vec<Color> = mentioned
        .iter()
        .copied()
        .filter(|(t, v)| *t < g.tracks && occurring[*t].contains(v))
        .collect();
    if colors.len() > MAX_COLORS {
        return Err(Error::TooManyColors(colors.len(), MAX_COLORS));
    }

    // The formula evaluated on a window of tracked colors; colors mentioned
    // but never occurring count as finite.
    let satisfied = |window: &[usize]| -> bool {
        let inf: std::collections::BTreeSet<Color> =
            window.iter().map(|i| colors[*i]).collect();
        formula.eval(&inf)
    };
    let neutral: Priority = if satisfied(&[]) { 0 } else { 1 };

    let adj = g.adjacency();
    let initial_record: Vec<usize> = (0..colors.len()).collect();

    let mut memories: Vec<Vec<usize>> = vec![initial_record.clone()];
    let mut mem_ids: BTreeMap<Vec<usize>, MemId> = [(initial_record, 0)].into();
    let mut origin: Vec<(PosId, MemId)> = Vec::new();
    let mut ids: BTreeMap<(PosId, MemId), PosId> = BTreeMap::new();
    let mut owners = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut edge_origin: Vec<EdgeId> = Vec::new();
    let mut frontier = Vec::new();
    for &s in seeds {
        if ids.contains_key(&(s, 0)) {
            continue;
        }
        let id = origin.len();
        ids.insert((s, 0), id);
        origin.push((s, 0));
        owners.push(g.owners[s]);
        frontier.push(id);
    }
    frontier.reverse();

    while let Some(cid) = frontier.pop() {
        let (pos, mem) = origin[cid];
        for &eid in &adj[pos] {
            let e = &g.edges[eid];
            let mut record = memories[mem].clone();
            let mut emitted: Option<Priority> = None;
            if !e.is_eps() {
                for (t, v) in e.colors.iter().enumerate() {
                    let Some(idx) = colors.iter().position(|c| *c == (t, *v)) else {
                        continue;
                    };
                    let depth = record.iter().position(|c| *c == idx).unwrap();
                    let window: Vec<usize> = record[..=depth].to_vec();
                    let p = 2 * (depth as Priority + 1) + if satisfied(&window) { 0 } else { 1 };
                    emitted = Some(emitted.map_or(p, |q: Priority| q.max(p)));
                    record.remove(depth);
                    record.insert(0, idx);
                }
            }
            let new_mem = *mem_ids.entry(record.clone()).or_insert_with(|| {
                memories.push(record.clone());
                memories.len() - 1
            });
            let target_key = (e.target, new_mem);
            let tid = match ids.get(&target_key) {
                Some(t) => *t,
                None => {
                    let t = origin.len();
                    ids.insert(target_key, t);
                    origin.push(target_key);
                    owners.push(g.owners[e.target]);
                    frontier.push(t);
                    check_guard("compiled parity game", origin.len(), "positions")?;
                    t
                }
            };
            let new_edge = if e.is_eps() {
                Edge::eps(cid, tid)
            } else {
                Edge::labelled(cid, tid, e.letter.unwrap(), vec![emitted.unwrap_or(neutral)])
            };
            edges.push(new_edge);
            edge_origin.push(eid);
        }
    }

    let initial = ids.get(&(g.initial, 0)).copied().unwrap_or(0);
    Ok(CompiledGame {
        game: Game {
            owners,
            edges,
            initial,
            tracks: 1,
            condition: WinningCondition::Parity,
            partial: g.partial,
            names: None,
        },
        origin,
        edge_origin,
        memories,
        initial_memory: 0,
        colors,
    })
}

/// Convenience: compile and solve, then report winners on the original
/// positions that are reachable under the initial memory.
pub fn compile_and_solve(g: &Game) -> Result<(CompiledGame, GameSolution)> {
    let compiled = compile_emerson_lei(g)?;
    let sol = super::zielonka::solve_parity(&compiled.game)?;
    Ok((compiled, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Player, WinningCondition};

    /// A one-position Buchi game: Adam picks color 2 or 1 on a single track.
    #[test]
    fn degenerate_monitor_matches_direct_parity() {
        let g = Game {
            owners: vec![Player::Adam],
            edges: vec![
                Edge::labelled(0, 0, 0, vec![2]),
                Edge::labelled(0, 0, 0, vec![1]),
            ],
            initial: 0,
            tracks: 1,
            condition: WinningCondition::EmersonLei(ElFormula::Inf((0, 2))),
            partial: false,
            names: None,
        };
        let (compiled, sol) = compile_and_solve(&g).unwrap();
        // Adam can avoid color 2 forever.
        assert_eq!(sol.winner[compiled.game.initial], Player::Adam);

        let mut eve_g = g.clone();
        eve_g.owners = vec![Player::Eve];
        let (compiled, sol) = compile_and_solve(&eve_g).unwrap();
        assert_eq!(sol.winner[compiled.game.initial], Player::Eve);
    }

    #[test]
    fn disjunction_of_two_tracks_lets_eve_pick_either() {
        // Eve alternates freely over two tracks; she wins if track 0 shows 2
        // infinitely often or track 1 does. Adam owns nothing.
        let f = ElFormula::or(vec![ElFormula::Inf((0, 2)), ElFormula::Inf((1, 2))]);
        let g = Game {
            owners: vec![Player::Eve],
            edges: vec![
                Edge::labelled(0, 0, 0, vec![1, 2]),
                Edge::labelled(0, 0, 0, vec![2, 1]),
            ],
            initial: 0,
            tracks: 2,
            condition: WinningCondition::EmersonLei(f.clone()),
            partial: false,
            names: None,
        };
        let (compiled, sol) = compile_and_solve(&g).unwrap();
        assert_eq!(sol.winner[compiled.game.initial], Player::Eve);

        // Conjunction instead: still Eve, she can alternate both tracks.
        let mut g2 = g.clone();
        g2.condition = WinningCondition::EmersonLei(ElFormula::and(vec![
            ElFormula::Inf((0, 2)),
            ElFormula::Inf((1, 2)),
        ]));
        let (compiled, sol) = compile_and_solve(&g2).unwrap();
        assert_eq!(sol.winner[compiled.game.initial], Player::Eve);

        // Adam in charge defeats the conjunction but not the tautology-ish
        // disjunction with both colors on every edge.
        let mut g3 = g2.clone();
        g3.owners = vec![Player::Adam];
        let (compiled, sol) = compile_and_solve(&g3).unwrap();
        assert_eq!(sol.winner[compiled.game.initial], Player::Adam);
    }

    #[test]
    fn too_many_colors_is_rejected() {
        let edges = (0..9u32)
            .map(|v| Edge::labelled(0, 0, 0, vec![v]))
            .collect::<Vec<_>>();
        let f = ElFormula::or((1..9u32).map(|v| ElFormula::Inf((0, v))).collect());
        let g = Game {
            owners: vec![Player::Eve],
            edges,
            initial: 0,
            tracks: 1,
            condition: WinningCondition::EmersonLei(ElFormula::and(vec![
                f,
                ElFormula::Fin((0, 0)),
            ])),
            partial: false,
            names: None,
        };
        assert!(matches!(
            compile_emerson_lei(&g),
            Err(Error::TooManyColors(9, MAX_COLORS))
        ));
    }
}
