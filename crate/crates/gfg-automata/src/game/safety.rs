//! Safety games with immediate-win and immediate-loss edges.
//!
//! Traversing an `eve_immediate_win` edge ends the play as a win for Eve,
//! an `eve_immediate_loss` edge as a win for Adam, and Eve wins every
//! infinite play. Adam therefore wins exactly the positions from which he can
//! force a loss edge to be traversed; that region is his attractor.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{EdgeId, Game, GameSolution, Player, PosId};
use crate::error::{Error, Result};

pub fn solve_safety(
    g: &Game,
    eve_immediate_win: &BTreeSet<EdgeId>,
    eve_immediate_loss: &BTreeSet<EdgeId>,
) -> Result<GameSolution> {
    if !eve_immediate_win.is_disjoint(eve_immediate_loss) {
        return Err(Error::Invalid("win and loss edge sets overlap".into()));
    }
    let n = g.owners.len();
    let adj = g.adjacency();

    // An edge is "bad" when traversing it is or leads to a loss for Eve.
    // Adam-owned positions enter the attractor as soon as one bad edge exists;
    // Eve-owned ones when every edge is bad (win edges never are).
    let mut in_attr = vec![false; n];
    let mut adam_strategy: BTreeMap<PosId, EdgeId> = BTreeMap::new();
    let mut queue: VecDeque<PosId> = VecDeque::new();

    let bad = |edge: EdgeId, in_attr: &[bool]| -> bool {
        if eve_immediate_win.contains(&edge) {
            return false;
        }
        eve_immediate_loss.contains(&edge) || in_attr[g.edges[edge].target]
    };

    // Seed with positions that are already lost for Eve.
    for u in 0..n {
        if adj[u].is_empty() {
            continue;
        }
        let lost = match g.owners[u] {
            Player::Adam => adj[u].iter().any(|e| eve_immediate_loss.contains(e)),
            Player::Eve => adj[u].iter().all(|e| eve_immediate_loss.contains(e)),
        };
        if lost {
            in_attr[u] = true;
            if g.owners[u] == Player::Adam {
                let e = adj[u].iter().find(|e| eve_immediate_loss.contains(e)).unwrap();
                adam_strategy.insert(u, *e);
            }
            queue.push_back(u);
        }
    }

    // Backward propagation. Positions are re-examined when a successor joins.
    let mut preds: Vec<Vec<PosId>> = vec![Vec::new(); n];
    for e in &g.edges {
        preds[e.target].push(e.source);
    }
    while let Some(v) = queue.pop_front() {
        let mut ps = preds[v].clone();
        ps.sort_unstable();
        ps.dedup();
        for u in ps {
            if in_attr[u] || adj[u].is_empty() {
                continue;
            }
            let attracted = match g.owners[u] {
                Player::Adam => adj[u].iter().any(|e| bad(*e, &in_attr)),
                Player::Eve => adj[u].iter().all(|e| bad(*e, &in_attr)),
            };
            if attracted {
                in_attr[u] = true;
                if g.owners[u] == Player::Adam {
                    let e = adj[u].iter().find(|e| bad(**e, &in_attr)).unwrap();
                    adam_strategy.insert(u, *e);
                }
                queue.push_back(u);
            }
        }
    }

    let mut eve_strategy = BTreeMap::new();
    for u in 0..n {
        if in_attr[u] || g.owners[u] != Player::Eve || adj[u].is_empty() {
            continue;
        }
        let e = adj[u]
            .iter()
            .find(|e| !bad(**e, &in_attr))
            .expect("a non-attracted Eve position keeps a safe move");
        eve_strategy.insert(u, *e);
    }

    let winner = (0..n)
        .map(|u| if in_attr[u] { Player::Adam } else { Player::Eve })
        .collect();
    Ok(GameSolution::positional(winner, eve_strategy, adam_strategy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::zielonka::parity_game;
    use crate::game::Edge;

    fn two_position_game() -> Game {
        // Adam at 0 picks between staying and moving to Eve's 1; Eve loops.
        let mut g = parity_game(
            vec![Player::Adam, Player::Eve],
            vec![
                Edge::labelled(0, 0, 0, vec![0]),
                Edge::labelled(0, 1, 0, vec![0]),
                Edge::labelled(1, 1, 0, vec![0]),
            ],
            0,
        );
        g.condition = super::super::WinningCondition::Unset;
        g
    }

    #[test]
    fn no_marked_edges_means_eve_wins_everywhere() {
        let g = two_position_game();
        let sol = solve_safety(&g, &BTreeSet::new(), &BTreeSet::new()).unwrap();
        assert_eq!(sol.winner, vec![Player::Eve, Player::Eve]);
    }

    #[test]
    fn adam_wins_where_he_controls_a_loss_edge() {
        let g = two_position_game();
        let loss = BTreeSet::from([1]);
        let sol = solve_safety(&g, &BTreeSet::new(), &loss).unwrap();
        assert_eq!(sol.winner[0], Player::Adam);
        assert_eq!(sol.winner[1], Player::Eve);
        assert_eq!(sol.adam_strategy[&0], 1);
    }

    #[test]
    fn win_edges_shield_eve() {
        // Eve's only move is marked as an immediate win; marking the same
        // position's alternative as loss must not attract it.
        let g = parity_game(
            vec![Player::Eve],
            vec![
                Edge::labelled(0, 0, 0, vec![0]),
                Edge::labelled(0, 0, 0, vec![0]),
            ],
            0,
        );
        let sol =
            solve_safety(&g, &BTreeSet::from([0]), &BTreeSet::from([1])).unwrap();
        assert_eq!(sol.winner, vec![Player::Eve]);
        assert_eq!(sol.eve_strategy[&0], 0);
    }
}
