//! Exhaustive game solving for desk-scale cross-checks.
//!
//! Parity games are solved by enumerating Eve's (resp. Adam's) positional
//! strategies restricted to what the strategy itself reaches and analysing the
//! cycles available to the opponent in the fixed graph. Emerson-Lei games are
//! solved the same way on the product with the appearance-record monitor, with
//! plays judged by evaluating the formula on the colors of the reached cycle
//! rather than through the monitor's emitted priorities.

use std::collections::{BTreeMap, BTreeSet};

use super::compile::compile_emerson_lei;
use super::{
    Color, EdgeId, ElFormula, Game, GameSolution, Player, PosId, WinningCondition,
};
use crate::error::{Error, Result};

const MAX_BRUTE_POSITIONS: usize = 16;
const MAX_STRATEGY_TESTS: usize = 1 << 22;

/// A fixed directed graph view with per-edge tracked color sets.
struct Graph {
    succ: Vec<Vec<(PosId, EdgeId)>>,
    owners: Vec<Player>,
    /// Tracked colors per edge (already intersected with the formula's).
    edge_colors: Vec<BTreeSet<Color>>,
}

/// Enumerates `player`'s positional strategies, restricted to positions the
/// strategy actually reaches from `start`. Returns the first strategy for
/// which `test` succeeds.
fn search_strategy(
    graph: &Graph,
    player: Player,
    starts: &[PosId],
    budget: &mut usize,
    test: &mut dyn FnMut(&BTreeMap<PosId, EdgeId>) -> bool,
) -> Result<Option<BTreeMap<PosId, EdgeId>>> {
    fn reachable_unset(
        graph: &Graph,
        player: Player,
        starts: &[PosId],
        choice: &BTreeMap<PosId, EdgeId>,
    ) -> Option<PosId> {
        let mut seen = BTreeSet::new();
        let mut frontier: Vec<PosId> = starts.to_vec();
        let mut pending: Option<PosId> = None;
        while let Some(u) = frontier.pop() {
            if !seen.insert(u) {
                continue;
            }
            if graph.owners[u] == player {
                match choice.get(&u) {
                    Some(e) => {
                        let t = graph.succ[u].iter().find(|(_, id)| id == e).unwrap().0;
                        frontier.push(t);
                    }
                    None => {
                        if !graph.succ[u].is_empty() {
                            pending = Some(pending.map_or(u, |p| p.min(u)));
                        }
                    }
                }
            } else {
                for (t, _) in &graph.succ[u] {
                    frontier.push(*t);
                }
            }
        }
        pending
    }

    fn go(
        graph: &Graph,
        player: Player,
        starts: &[PosId],
        choice: &mut BTreeMap<PosId, EdgeId>,
        budget: &mut usize,
        test: &mut dyn FnMut(&BTreeMap<PosId, EdgeId>) -> bool,
    ) -> Result<Option<BTreeMap<PosId, EdgeId>>> {
        match reachable_unset(graph, player, starts, choice) {
            None => {
                if *budget == 0 {
                    return Err(Error::TooLarge {
                        what: "strategy enumeration",
                        size: MAX_STRATEGY_TESTS,
                        unit: "tests",
                        guard: MAX_STRATEGY_TESTS,
                    });
                }
                *budget -= 1;
                Ok(test(choice).then(|| choice.clone()))
            }
            Some(u) => {
                for (_, e) in &graph.succ[u] {
                    choice.insert(u, *e);
                    if let Some(found) = go(graph, player, starts, choice, budget, test)? {
                        return Ok(Some(found));
                    }
                }
                choice.remove(&u);
                Ok(None)
            }
        }
    }

    let mut choice = BTreeMap::new();
    go(graph, player, starts, &mut choice, budget, test)
}

/// Does a lasso reachable from `start` in the graph restricted by `fixed`
/// (choices of the strategy player) have an inf-set satisfying `accept`?
/// The free player picks the path.
fn free_player_has_lasso(
    graph: &Graph,
    fixed_player: Player,
    fixed: &BTreeMap<PosId, EdgeId>,
    start: PosId,
    accept: &ElFormula,
) -> bool {
    // Restricted successor view.
    let succ = |u: PosId| -> Vec<(PosId, EdgeId)> {
        if graph.owners[u] == fixed_player {
            match fixed.get(&u) {
                Some(e) => graph.succ[u]
                    .iter()
                    .filter(|(_, id)| id == e)
                    .copied()
                    .collect(),
                None => Vec::new(),
            }
        } else {
            graph.succ[u].clone()
        }
    };

    // Reachable set.
    let mut reach = BTreeSet::new();
    let mut frontier = vec![start];
    while let Some(u) = frontier.pop() {
        if !reach.insert(u) {
            continue;
        }
        for (t, _) in succ(u) {
            frontier.push(t);
        }
    }

    // Over each SCC and each color subset, look for a strongly connected
    // subgraph whose color set satisfies the condition.
    let reach: Vec<PosId> = reach.into_iter().collect();
    let sccs = sccs_of(&reach, &succ);
    for scc in &sccs {
        let scc_set: BTreeSet<PosId> = scc.iter().copied().collect();
        let mut scc_edges: Vec<(PosId, PosId, EdgeId)> = Vec::new();
        for &u in scc {
            for (t, e) in succ(u) {
                if scc_set.contains(&t) {
                    scc_edges.push((u, t, e));
                }
            }
        }
        if scc_edges.is_empty() {
            continue;
        }
        let palette: Vec<Color> = scc_edges
            .iter()
            .flat_map(|(_, _, e)| graph.edge_colors[*e].iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut tested: BTreeSet<BTreeSet<Color>> = BTreeSet::new();
        for mask in 0..(1u32 << palette.len()) {
            let allowed: BTreeSet<Color> = palette
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| *c)
                .collect();
            let sub: Vec<(PosId, PosId, EdgeId)> = scc_edges
                .iter()
                .copied()
                .filter(|(_, _, e)| graph.edge_colors[*e].is_subset(&allowed))
                .collect();
            if sub.is_empty() {
                continue;
            }
            let nodes: Vec<PosId> = sub
                .iter()
                .flat_map(|(u, t, _)| [*u, *t])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let sub_succ = |u: PosId| -> Vec<(PosId, EdgeId)> {
                sub.iter()
                    .filter(|(s, _, _)| *s == u)
                    .map(|(_, t, e)| (*t, *e))
                    .collect()
            };
            for comp in sccs_of(&nodes, &sub_succ) {
                let comp_set: BTreeSet<PosId> = comp.iter().copied().collect();
                let mut colors = BTreeSet::new();
                let mut has_edge = false;
                for (u, t, e) in &sub {
                    if comp_set.contains(u) && comp_set.contains(t) {
                        has_edge = true;
                        colors.extend(graph.edge_colors[*e].iter().copied());
                    }
                }
                if has_edge && tested.insert(colors.clone()) && accept.eval(&colors) {
                    return true;
                }
            }
        }
    }
    false
}

/// Tarjan over an explicit node list and successor function.
fn sccs_of(nodes: &[PosId], succ: &dyn Fn(PosId) -> Vec<(PosId, EdgeId)>) -> Vec<Vec<PosId>> {
    let index: BTreeMap<PosId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = nodes.len();
    let mut low = vec![0usize; n];
    let mut num = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut out = Vec::new();

    // Iterative Tarjan to avoid recursion limits.
    enum Frame {
        Enter(usize),
        Resume(usize, usize),
    }
    for root in 0..n {
        if num[root] != usize::MAX {
            continue;
        }
        let mut work = vec![Frame::Enter(root)];
        while let Some(frame) = work.pop() {
            match frame {
                Frame::Enter(v) => {
                    num[v] = counter;
                    low[v] = counter;
                    counter += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    work.push(Frame::Resume(v, 0));
                }
                Frame::Resume(v, mut i) => {
                    let succs: Vec<usize> = succ(nodes[v])
                        .into_iter()
                        .filter_map(|(t, _)| index.get(&t).copied())
                        .collect();
                    let mut descended = false;
                    while i < succs.len() {
                        let w = succs[i];
                        i += 1;
                        if num[w] == usize::MAX {
                            work.push(Frame::Resume(v, i));
                            work.push(Frame::Enter(w));
                            descended = true;
                            break;
                        } else if on_stack[w] {
                            low[v] = low[v].min(num[w]);
                        }
                    }
                    if descended {
                        continue;
                    }
                    if low[v] == num[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp.push(nodes[w]);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        out.push(comp);
                    }
                    if let Some(Frame::Resume(p, _)) = work.last() {
                        low[*p] = low[*p].min(low[v]);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn graph_of(g: &Game, tracked: &BTreeSet<Color>) -> Graph {
    let mut succ = vec![Vec::new(); g.owners.len()];
    let mut edge_colors = Vec::with_capacity(g.edges.len());
    for (i, e) in g.edges.iter().enumerate() {
        succ[e.source].push((e.target, i));
        let mut cs = BTreeSet::new();
        if !e.is_eps() {
            for (t, v) in e.colors.iter().enumerate() {
                if tracked.contains(&(t, *v)) {
                    cs.insert((t, *v));
                }
            }
        }
        edge_colors.push(cs);
    }
    Graph { succ, owners: g.owners.clone(), edge_colors }
}

/// Exact solution of a small parity or Emerson-Lei game by strategy
/// enumeration; the oracle counterpart of [`super::solve_parity`] and of
/// compile-then-solve.
pub fn brute_force_solve(g: &Game) -> Result<GameSolution> {
    if g.owners.len() > MAX_BRUTE_POSITIONS {
        return Err(Error::TooLarge {
            what: "brute-force game",
            size: g.owners.len(),
            unit: "positions",
            guard: MAX_BRUTE_POSITIONS,
        });
    }
    match &g.condition {
        WinningCondition::Parity => {
            let used: BTreeSet<u32> = g.used_colors().first().cloned().unwrap_or_default();
            let formula = ElFormula::parity(0, &used);
            // The parity formula is evaluated on cycle color sets directly, so
            // every used value must be tracked, including the minimum that the
            // compiled monitor can elide.
            let tracked: BTreeSet<Color> = used.iter().map(|v| (0usize, *v)).collect();
            let starts: Vec<PosId> = (0..g.owners.len()).collect();
            solve_by_enumeration(&graph_of(g, &tracked), &formula, &starts)
        }
        WinningCondition::EmersonLei(f) => {
            let all: Vec<PosId> = (0..g.owners.len()).collect();
            let compiled = super::compile::compile_seeded(g, &all)?;
            let tracked: BTreeSet<Color> = compiled.colors.iter().copied().collect();
            // Judge plays by the original colors, not the monitor's output.
            let mut graph = graph_of(&compiled.game, &BTreeSet::new());
            for (ce, oe) in compiled.edge_origin.iter().enumerate() {
                let orig = &g.edges[*oe];
                let mut cs = BTreeSet::new();
                if !orig.is_eps() {
                    for (t, v) in orig.colors.iter().enumerate() {
                        if tracked.contains(&(t, *v)) {
                            cs.insert((t, *v));
                        }
                    }
                }
                graph.edge_colors[ce] = cs;
            }
            // Winner of an original position is the winner of its compiled
            // image under the initial memory.
            let start_of: BTreeMap<PosId, PosId> = all
                .iter()
                .map(|v| {
                    (*v, compiled.compiled_id(*v, compiled.initial_memory).expect("seeded"))
                })
                .collect();
            let starts: Vec<PosId> = all.iter().map(|v| start_of[v]).collect();
            let sol = solve_by_enumeration(&graph, f, &starts)?;
            let winner = all.iter().map(|v| sol.winner[start_of[v]]).collect();
            Ok(GameSolution {
                winner,
                eve_strategy: BTreeMap::new(),
                adam_strategy: BTreeMap::new(),
                eve_memory: None,
                adam_memory: None,
            })
        }
        WinningCondition::Unset => Err(Error::Invalid("game has no winning condition".into())),
    }
}

/// Core enumeration: winner per graph node, with uniform positional
/// strategies recovered over the winning regions.
fn solve_by_enumeration(
    graph: &Graph,
    formula: &ElFormula,
    starts: &[PosId],
) -> Result<GameSolution> {
    let n = graph.owners.len();
    let violated = formula.negated();
    let mut budget = MAX_STRATEGY_TESTS;
    let mut eve_wins = vec![false; n];
    for &s in starts {
        let found = search_strategy(graph, Player::Eve, &[s], &mut budget, &mut |choice| {
            !free_player_has_lasso(graph, Player::Eve, choice, s, &violated)
        })?;
        eve_wins[s] = found.is_some();
    }
    // Determinacy cross-check: Adam must win exactly the complement.
    for &s in starts {
        let found = search_strategy(graph, Player::Adam, &[s], &mut budget, &mut |choice| {
            !free_player_has_lasso(graph, Player::Adam, choice, s, formula)
        })?;
        debug_assert_eq!(
            found.is_some(),
            !eve_wins[s],
            "determinacy violated at node {s}"
        );
        if found.is_some() == eve_wins[s] {
            return Err(Error::Invalid(format!(
                "brute-force determinacy check failed at node {s}"
            )));
        }
    }

    // Uniform strategies over the winning regions.
    let eve_region: Vec<PosId> = starts.iter().copied().filter(|s| eve_wins[*s]).collect();
    let adam_region: Vec<PosId> = starts.iter().copied().filter(|s| !eve_wins[*s]).collect();
    let eve_strategy = if eve_region.is_empty() {
        Some(BTreeMap::new())
    } else {
        search_strategy(graph, Player::Eve, &eve_region, &mut budget, &mut |choice| {
            eve_region
                .iter()
                .all(|s| !free_player_has_lasso(graph, Player::Eve, choice, *s, &violated))
        })?
    };
    let adam_strategy = if adam_region.is_empty() {
        Some(BTreeMap::new())
    } else {
        search_strategy(graph, Player::Adam, &adam_region, &mut budget, &mut |choice| {
            adam_region
                .iter()
                .all(|s| !free_player_has_lasso(graph, Player::Adam, choice, *s, formula))
        })?
    };
    let (Some(eve_strategy), Some(adam_strategy)) = (eve_strategy, adam_strategy) else {
        return Err(Error::Invalid(
            "no uniform positional strategy found over a winning region".into(),
        ));
    };

    Ok(GameSolution::positional(
        (0..n)
            .map(|u| if eve_wins[u] { Player::Eve } else { Player::Adam })
            .collect(),
        eve_strategy,
        adam_strategy,
    ))
}

/// Replays a claimed parity solution: regions must be closed under the
/// winner's strategy and all opponent moves, and the opponent must not reach
/// any cycle of the wrong parity inside the region.
pub fn verify_parity_solution(g: &Game, sol: &GameSolution) -> std::result::Result<(), String> {
    if g.condition != WinningCondition::Parity {
        return Err("not a parity game".into());
    }
    let used: BTreeSet<u32> = g.used_colors().first().cloned().unwrap_or_default();
    let tracked: BTreeSet<Color> = used.iter().map(|v| (0usize, *v)).collect();
    let graph = graph_of(g, &tracked);
    let accept = ElFormula::parity(0, &used);
    for (player, strategy) in [
        (Player::Eve, &sol.eve_strategy),
        (Player::Adam, &sol.adam_strategy),
    ] {
        let losing = match player {
            Player::Eve => accept.negated(),
            Player::Adam => accept.clone(),
        };
        for u in 0..g.owners.len() {
            if sol.winner[u] != player {
                continue;
            }
            // Region closure under the strategy and all opponent moves.
            let mut frontier = vec![u];
            let mut seen = BTreeSet::new();
            while let Some(v) = frontier.pop() {
                if !seen.insert(v) {
                    continue;
                }
                if sol.winner[v] != player {
                    return Err(format!(
                        "strategy of {player:?} leaves the winning region at {v}"
                    ));
                }
                if g.owners[v] == player {
                    let e = strategy
                        .get(&v)
                        .ok_or_else(|| format!("{player:?} strategy undefined at {v}"))?;
                    frontier.push(g.edges[*e].target);
                } else {
                    for (t, _) in &graph.succ[v] {
                        frontier.push(*t);
                    }
                }
            }
            if free_player_has_lasso(&graph, player, strategy, u, &losing) {
                return Err(format!(
                    "{player:?} strategy loses a play from position {u}"
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::zielonka::{parity_game, solve_parity};
    use crate::game::Edge;

    #[test]
    fn single_position_games_match_the_solver() {
        for p in 0..4 {
            let g = parity_game(vec![Player::Eve], vec![Edge::labelled(0, 0, 0, vec![p])], 0);
            let fast = solve_parity(&g).unwrap();
            let slow = brute_force_solve(&g).unwrap();
            assert_eq!(fast.winner, slow.winner, "priority {p}");
        }
    }

    #[test]
    fn strategies_from_brute_force_verify() {
        let g = parity_game(
            vec![Player::Eve, Player::Adam],
            vec![
                Edge::labelled(0, 0, 0, vec![1]),
                Edge::labelled(0, 1, 0, vec![2]),
                Edge::labelled(1, 0, 0, vec![3]),
                Edge::labelled(1, 1, 0, vec![2]),
            ],
            0,
        );
        let sol = brute_force_solve(&g).unwrap();
        verify_parity_solution(&g, &sol).unwrap();
        let fast = solve_parity(&g).unwrap();
        assert_eq!(fast.winner, sol.winner);
        verify_parity_solution(&g, &fast).unwrap();
    }
}
