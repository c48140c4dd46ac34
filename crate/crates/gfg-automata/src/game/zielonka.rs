//! Recursive parity-game solver with positional strategy extraction.
//!
//! Edge priorities are handled by splitting every labelled edge into an
//! intermediate node carrying the priority; plain positions carry the minimal
//! priority in use, which never changes the maximum seen infinitely often
//! because every infinite play crosses labelled edges infinitely often.

use std::collections::BTreeMap;

use super::{Edge, EdgeId, Game, GameSolution, Player, PosId, WinningCondition};
use crate::automaton::Priority;
use crate::error::{check_guard, Error, Result};

struct Arena {
    owner: Vec<Player>,
    priority: Vec<Priority>,
    /// Successor node together with the game edge realising the move.
    succ: Vec<Vec<(usize, EdgeId)>>,
    /// Predecessors, for attractor computation.
    pred: Vec<Vec<usize>>,
    /// Game position represented by the node, if any.
    position: Vec<Option<PosId>>,
}

fn build_arena(g: &Game) -> Result<Arena> {
    let n = g.owners.len();
    check_guard("parity arena", n + g.edges.len(), "nodes")?;
    let neutral = g
        .edges
        .iter()
        .filter(|e| !e.is_eps())
        .filter_map(|e| e.colors.first().copied())
        .min()
        .unwrap_or(0);
    let mut owner: Vec<Player> = g.owners.clone();
    let mut priority = vec![neutral; n];
    let mut succ: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); n];
    let mut position: Vec<Option<PosId>> = (0..n).map(Some).collect();
    for (i, e) in g.edges.iter().enumerate() {
        if e.is_eps() {
            succ[e.source].push((e.target, i));
        } else {
            let mid = owner.len();
            owner.push(Player::Adam);
            priority.push(*e.colors.first().ok_or_else(|| {
                Error::Invalid(format!("labelled edge {i} carries no color on a parity game"))
            })?);
            succ.push(vec![(e.target, i)]);
            position.push(None);
            succ[e.source].push((mid, i));
        }
    }
    for (u, ss) in succ.iter().enumerate() {
        if ss.is_empty() {
            return Err(Error::Invalid(format!(
                "position {} is terminal; parity games must be total",
                g.name_of(u.min(n.saturating_sub(1)))
            )));
        }
    }
    let mut pred = vec![Vec::new(); owner.len()];
    for (u, ss) in succ.iter().enumerate() {
        for (v, _) in ss {
            pred[*v].push(u);
        }
    }
    Ok(Arena { owner, priority, succ, pred, position })
}

/// Attractor of `targets` for `player` inside `alive`. Fills `strategy` for
/// the attracting player on newly attracted nodes, picking the smallest edge
/// at attraction time.
fn attractor(
    arena: &Arena,
    alive: &[bool],
    player: Player,
    targets: &[usize],
    strategy: &mut [Option<(usize, EdgeId)>],
) -> Vec<bool> {
    let n = arena.owner.len();
    let mut inset = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    let mut escapes = vec![0usize; n];
    for u in 0..n {
        if alive[u] {
            escapes[u] = arena.succ[u].iter().filter(|(v, _)| alive[*v]).count();
        }
    }
    for &t in targets {
        if alive[t] && !inset[t] {
            inset[t] = true;
            queue.push_back(t);
        }
    }
    while let Some(v) = queue.pop_front() {
        let mut preds: Vec<usize> = arena.pred[v].iter().copied().filter(|u| alive[*u]).collect();
        preds.sort_unstable();
        preds.dedup();
        for u in preds {
            if inset[u] {
                continue;
            }
            if arena.owner[u] == player {
                inset[u] = true;
                if strategy[u].is_none() {
                    let edge = arena
                        .succ[u]
                        .iter()
                        .find(|(w, _)| alive[*w] && inset[*w])
                        .copied()
                        .expect("attracted node has a successor in the set");
                    strategy[u] = Some(edge);
                }
                queue.push_back(u);
            } else {
                escapes[u] -= arena.succ[u].iter().filter(|(w, _)| *w == v).count();
                if escapes[u] == 0 {
                    inset[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    inset
}

fn zielonka(
    arena: &Arena,
    alive: Vec<bool>,
    winner: &mut [Option<Player>],
    strategy: &mut [Option<(usize, EdgeId)>],
) {
    let nodes: Vec<usize> = (0..arena.owner.len()).filter(|u| alive[*u]).collect();
    if nodes.is_empty() {
        return;
    }
    let d = nodes.iter().map(|u| arena.priority[*u]).max().unwrap();
    let player = Player::of_priority(d);
    let targets: Vec<usize> =
        nodes.iter().copied().filter(|u| arena.priority[*u] == d).collect();

    let mut attr_strategy = vec![None; arena.owner.len()];
    let attr = attractor(arena, &alive, player, &targets, &mut attr_strategy);

    let mut sub = alive.clone();
    for u in &nodes {
        if attr[*u] {
            sub[*u] = false;
        }
    }
    let mut sub_winner = vec![None; arena.owner.len()];
    let mut sub_strategy = vec![None; arena.owner.len()];
    zielonka(arena, sub.clone(), &mut sub_winner, &mut sub_strategy);

    let opponent_nodes: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|u| sub[*u] && sub_winner[*u] == Some(player.opponent()))
        .collect();

    if opponent_nodes.is_empty() {
        // `player` wins everywhere: subgame strategy inside, attractor
        // strategy on the attractor, any in-game move on the target set.
        for &u in &nodes {
            winner[u] = Some(player);
            if arena.owner[u] != player {
                continue;
            }
            if sub[u] {
                strategy[u] = sub_strategy[u];
            } else if let Some(e) = attr_strategy[u] {
                strategy[u] = Some(e);
            } else {
                strategy[u] =
                    arena.succ[u].iter().find(|(v, _)| alive[*v]).copied();
            }
        }
    } else {
        let mut opp_strategy = vec![None; arena.owner.len()];
        let opp_attr =
            attractor(arena, &alive, player.opponent(), &opponent_nodes, &mut opp_strategy);
        let mut rest = alive.clone();
        for u in &nodes {
            if opp_attr[*u] {
                rest[*u] = false;
            }
        }
        zielonka(arena, rest, winner, strategy);
        for &u in &nodes {
            if !opp_attr[u] {
                continue;
            }
            winner[u] = Some(player.opponent());
            if arena.owner[u] != player.opponent() {
                continue;
            }
            if sub[u] && sub_winner[u] == Some(player.opponent()) {
                strategy[u] = sub_strategy[u];
            } else if let Some(e) = opp_strategy[u] {
                strategy[u] = Some(e);
            } else {
                // Node of the opponent region without an attractor edge: it
                // lies in the original target set; any move into the attractor
                // keeps the play in the opponent's region.
                strategy[u] = arena.succ[u]
                    .iter()
                    .find(|(v, _)| alive[*v] && opp_attr[*v])
                    .or_else(|| arena.succ[u].iter().find(|(v, _)| alive[*v]))
                    .copied();
            }
        }
    }
}

/// Solves a total max-parity game exactly, returning winning regions and
/// positional strategies for both players.
pub fn solve_parity(g: &Game) -> Result<GameSolution> {
    if g.condition != WinningCondition::Parity {
        return Err(Error::NotParity);
    }
    let arena = build_arena(g)?;
    let mut winner = vec![None; arena.owner.len()];
    let mut strategy = vec![None; arena.owner.len()];
    zielonka(&arena, vec![true; arena.owner.len()], &mut winner, &mut strategy);

    let n = g.owners.len();
    let mut eve_strategy = BTreeMap::new();
    let mut adam_strategy = BTreeMap::new();
    for u in 0..n {
        let w = winner[u].expect("solved every node");
        if g.owners[u] != w {
            continue;
        }
        if let Some((_, edge)) = strategy[u] {
            match w {
                Player::Eve => eve_strategy.insert(u, edge),
                Player::Adam => adam_strategy.insert(u, edge),
            };
        }
    }
    Ok(GameSolution::positional(
        (0..n).map(|u| winner[u].unwrap()).collect(),
        eve_strategy,
        adam_strategy,
    ))
}

/// Restriction of an edge-based game to a single-track parity game; used by
/// tests that build games directly.
pub fn parity_game(
    owners: Vec<Player>,
    edges: Vec<Edge>,
    initial: PosId,
) -> Game {
    Game {
        owners,
        edges,
        initial,
        tracks: 1,
        condition: WinningCondition::Parity,
        partial: false,
        names: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loop_game(p: Priority) -> Game {
        parity_game(vec![Player::Eve], vec![Edge::labelled(0, 0, 0, vec![p])], 0)
    }

    #[test]
    fn even_self_loop_is_won_by_eve() {
        let sol = solve_parity(&loop_game(0)).unwrap();
        assert_eq!(sol.winner, vec![Player::Eve]);
        assert_eq!(sol.eve_strategy[&0], 0);
    }

    #[test]
    fn odd_self_loop_is_won_by_adam() {
        let sol = solve_parity(&loop_game(1)).unwrap();
        assert_eq!(sol.winner, vec![Player::Adam]);
    }

    #[test]
    fn eve_prefers_even_cycle() {
        // Eve at 0 chooses between an odd loop and a path to an even loop.
        let g = parity_game(
            vec![Player::Eve, Player::Adam],
            vec![
                Edge::labelled(0, 0, 0, vec![1]),
                Edge::labelled(0, 1, 0, vec![1]),
                Edge::labelled(1, 1, 0, vec![2]),
            ],
            0,
        );
        let sol = solve_parity(&g).unwrap();
        assert_eq!(sol.winner, vec![Player::Eve, Player::Eve]);
        assert_eq!(sol.eve_strategy[&0], 1);
    }

    #[test]
    fn terminal_position_is_rejected() {
        let g = parity_game(
            vec![Player::Eve, Player::Adam],
            vec![Edge::labelled(0, 1, 0, vec![2])],
            0,
        );
        assert!(solve_parity(&g).is_err());
    }

    #[test]
    fn epsilon_chains_are_respected() {
        // Adam picks between two epsilon moves leading to an even and an odd
        // loop; he takes the odd one.
        let g = parity_game(
            vec![Player::Adam, Player::Eve, Player::Eve],
            vec![
                Edge::eps(0, 1),
                Edge::eps(0, 2),
                Edge::labelled(1, 1, 0, vec![2]),
                Edge::labelled(2, 2, 0, vec![3]),
            ],
            0,
        );
        let sol = solve_parity(&g).unwrap();
        assert_eq!(sol.winner[0], Player::Adam);
        assert_eq!(sol.winner[1], Player::Eve);
        assert_eq!(sol.winner[2], Player::Adam);
        assert_eq!(sol.adam_strategy[&0], 1);
    }
}
