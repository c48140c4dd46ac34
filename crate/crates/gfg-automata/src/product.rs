//! Synchronised products of arenas with automata, one-step arenas, and box
//! enumeration.

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{Automaton, LetterId, Priority, StateId};
use crate::error::{check_guard, Error, Result};
use crate::formula::TransitionFormula;
use crate::game::{Edge, Game, Player, PosId, WinningCondition};

/// A per-letter transition relation realised by one positional choice of
/// Eve's on the one-step arena.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Box {
    pub letter: LetterId,
    pub relation: BTreeSet<(StateId, StateId)>,
}

impl Box {
    pub fn targets(&self, q: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.relation
            .range((q, 0)..=(q, usize::MAX))
            .map(|(_, t)| *t)
    }
}

/// A position of a synchronised product.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProductPos {
    /// `(v, q)`: arena position and automaton state.
    State(PosId, StateId),
    /// `(v', q, pending label, subformula)`: the players are resolving the
    /// transition condition of `q` over the letter in the pending label,
    /// which also carries the arena edge's colors to be re-emitted.
    Formula(PosId, StateId, LetterId, Vec<Priority>, TransitionFormula),
}

/// A synchronised product arena together with its position meanings.
#[derive(Clone, Debug)]
pub struct Product {
    pub game: Game,
    pub positions: Vec<ProductPos>,
}

impl Product {
    pub fn state_pos(&self, v: PosId, q: StateId) -> Option<PosId> {
        self.positions
            .iter()
            .position(|p| matches!(p, ProductPos::State(pv, pq) if *pv == v && *pq == q))
    }
}

/// How product exploration is seeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Seeding {
    /// Every `(v, q)` pair, the paper's convention.
    AllPairs,
    /// Only what is reachable from `(initial of r, initial of A)`.
    Reachable,
}

/// The synchronised product of an arena with an alternating automaton.
///
/// Non-epsilon edges of `r` must carry letters of `a`'s alphabet. The product
/// appends the automaton's priority as one extra color track; the arena edge's
/// colors are held pending through the formula positions and re-emitted on the
/// closing transition.
pub fn synchronized_product(r: &Game, aut: &Automaton, seeding: Seeding) -> Result<Product> {
    for e in &r.edges {
        if let Some(l) = e.letter {
            if l >= aut.letter_count() {
                return Err(Error::LabelMismatch);
            }
        }
    }
    let mut positions: Vec<ProductPos> = Vec::new();
    let mut ids: BTreeMap<ProductPos, PosId> = BTreeMap::new();
    let mut owners: Vec<Player> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let adj = r.adjacency();

    let owner_of = |p: &ProductPos| -> Player {
        match p {
            ProductPos::State(v, _) => r.owners[*v],
            ProductPos::Formula(_, _, _, _, TransitionFormula::Or(_)) => Player::Eve,
            ProductPos::Formula(..) => Player::Adam,
        }
    };

    let mut frontier: Vec<PosId> = Vec::new();
    let mut intern =
        |p: ProductPos,
         positions: &mut Vec<ProductPos>,
         owners: &mut Vec<Player>,
         frontier: &mut Vec<PosId>|
         -> PosId {
            if let Some(id) = ids.get(&p) {
                return *id;
            }
            let id = positions.len();
            owners.push(owner_of(&p));
            ids.insert(p.clone(), id);
            positions.push(p);
            frontier.push(id);
            id
        };

    match seeding {
        Seeding::AllPairs => {
            for v in 0..r.owners.len() {
                for q in aut.states() {
                    intern(ProductPos::State(v, q), &mut positions, &mut owners, &mut frontier);
                }
            }
            frontier.reverse();
        }
        Seeding::Reachable => {
            intern(
                ProductPos::State(r.initial, aut.initial()),
                &mut positions,
                &mut owners,
                &mut frontier,
            );
        }
    }

    while let Some(id) = frontier.pop() {
        check_guard("synchronised product", positions.len(), "positions")?;
        match positions[id].clone() {
            ProductPos::State(v, q) => {
                for &eid in &adj[v] {
                    let e = &r.edges[eid];
                    match e.letter {
                        None => {
                            let t = intern(
                                ProductPos::State(e.target, q),
                                &mut positions,
                                &mut owners,
                                &mut frontier,
                            );
                            edges.push(Edge::eps(id, t));
                        }
                        Some(a) => {
                            let t = intern(
                                ProductPos::Formula(
                                    e.target,
                                    q,
                                    a,
                                    e.colors.clone(),
                                    aut.formula(q, a).clone(),
                                ),
                                &mut positions,
                                &mut owners,
                                &mut frontier,
                            );
                            edges.push(Edge::eps(id, t));
                        }
                    }
                }
            }
            ProductPos::Formula(v, q, a, pending, f) => match &f {
                TransitionFormula::Atom(target) => {
                    let t = intern(
                        ProductPos::State(v, *target),
                        &mut positions,
                        &mut owners,
                        &mut frontier,
                    );
                    let mut colors = pending.clone();
                    colors.push(aut.priority(q, a, *target));
                    edges.push(Edge::labelled(id, t, a, colors));
                }
                TransitionFormula::And(cs) | TransitionFormula::Or(cs) => {
                    for c in cs {
                        let t = intern(
                            ProductPos::Formula(v, q, a, pending.clone(), c.clone()),
                            &mut positions,
                            &mut owners,
                            &mut frontier,
                        );
                        edges.push(Edge::eps(id, t));
                    }
                }
            },
        }
    }

    let initial = ids
        .get(&ProductPos::State(r.initial, aut.initial()))
        .copied()
        .unwrap_or(0);
    let names = positions
        .iter()
        .map(|p| match p {
            ProductPos::State(v, q) => format!("({},q{q})", r.name_of(*v)),
            ProductPos::Formula(v, q, a, _, f) => {
                format!("({},q{q},{},{f})", r.name_of(*v), aut.alphabet()[*a])
            }
        })
        .collect();
    Ok(Product {
        game: Game {
            owners,
            edges,
            initial,
            tracks: r.tracks + 1,
            condition: WinningCondition::Unset,
            partial: r.partial,
            names: Some(names),
        },
        positions,
    })
}

/// The two-position arena with one `a`-labelled transition.
pub fn single_step_arena(letter: LetterId) -> Game {
    Game {
        owners: vec![Player::Eve, Player::Adam],
        edges: vec![Edge::labelled(0, 1, letter, vec![])],
        initial: 0,
        tracks: 0,
        condition: WinningCondition::Unset,
        partial: true,
        names: Some(vec!["v".into(), "v'".into()]),
    }
}

/// The one-position letter arena: `owner` picks any letter forever.
pub fn letter_arena(owner: Player, letter_count: usize) -> Game {
    Game {
        owners: vec![owner],
        edges: (0..letter_count).map(|a| Edge::labelled(0, 0, a, vec![])).collect(),
        initial: 0,
        tracks: 0,
        condition: WinningCondition::Unset,
        partial: false,
        names: Some(vec!["v".into()]),
    }
}

/// The one-step arena of an automaton over one letter: the partial arena in
/// which the players resolve every `delta(q, a)` once.
pub fn one_step_arena(aut: &Automaton, letter: &str) -> Result<Product> {
    let a = aut.letter_id(letter)?;
    synchronized_product(&single_step_arena(a), aut, Seeding::AllPairs)
}

/// All boxes of the automaton over one letter: the distinct transition
/// relations realisable by Eve's positional choices on the one-step arena,
/// with strategies inducing equal relations merged.
pub fn enumerate_boxes(aut: &Automaton, letter: &str) -> Result<Vec<Box>> {
    let a = aut.letter_id(letter)?;
    Ok(enumerate_boxes_by_id(aut, a))
}

pub fn enumerate_boxes_by_id(aut: &Automaton, a: LetterId) -> Vec<Box> {
    // Per state, the sets of atoms Adam can reach under each of Eve's
    // choices; boxes are products of one alternative per state.
    let mut alternatives: Vec<Vec<BTreeSet<StateId>>> = Vec::new();
    for q in aut.states() {
        let mut alts = reach_sets(aut.formula(q, a));
        alts.sort();
        alts.dedup();
        alternatives.push(alts);
    }
    let mut relations: BTreeSet<BTreeSet<(StateId, StateId)>> = BTreeSet::new();
    let mut current: Vec<usize> = vec![0; aut.state_count()];
    loop {
        let mut rel = BTreeSet::new();
        for (q, idx) in current.iter().enumerate() {
            for t in &alternatives[q][*idx] {
                rel.insert((q, *t));
            }
        }
        relations.insert(rel);
        // Odometer over the per-state alternatives.
        let mut pos = 0;
        loop {
            if pos == current.len() {
                return relations
                    .into_iter()
                    .map(|relation| Box { letter: a, relation })
                    .collect();
            }
            current[pos] += 1;
            if current[pos] < alternatives[pos].len() {
                break;
            }
            current[pos] = 0;
            pos += 1;
        }
    }
}

/// The reachable-atom sets of a formula, one per combination of Eve's
/// disjunction choices inside it.
fn reach_sets(f: &TransitionFormula) -> Vec<BTreeSet<StateId>> {
    match f {
        TransitionFormula::Atom(q) => vec![BTreeSet::from([*q])],
        TransitionFormula::Or(cs) => cs.iter().flat_map(reach_sets).collect(),
        TransitionFormula::And(cs) => {
            let mut acc: Vec<BTreeSet<StateId>> = vec![BTreeSet::new()];
            for c in cs {
                let parts = reach_sets(c);
                let mut next = Vec::with_capacity(acc.len() * parts.len());
                for m in &acc {
                    for p in &parts {
                        next.push(m.union(p).copied().collect());
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// All boxes over all letters, ordered by letter then relation. The order is
/// the box-alphabet order used by the dealternation transforms.
pub fn all_boxes(aut: &Automaton) -> Vec<Box> {
    (0..aut.letter_count())
        .flat_map(|a| enumerate_boxes_by_id(aut, a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::fixtures;

    #[test]
    fn figure_one_step_arena_has_documented_shape() {
        let aut = fixtures().remove("fig-one-step").unwrap();
        let p = one_step_arena(&aut, "a").unwrap();
        let entries = p
            .positions
            .iter()
            .filter(|x| matches!(x, ProductPos::State(0, _)))
            .count();
        let exits = p
            .positions
            .iter()
            .filter(|x| matches!(x, ProductPos::State(1, _)))
            .count();
        let formulas = p
            .positions
            .iter()
            .filter(|x| matches!(x, ProductPos::Formula(..)))
            .count();
        assert_eq!(entries, 3);
        assert_eq!(exits, 3);
        // One node per distinct subformula of each state's condition:
        // q0 contributes 6, q1 contributes 3, q2 contributes 3.
        assert_eq!(formulas, 12);
        // Exactly two binary choices belong to Eve.
        let eve_choices = p
            .positions
            .iter()
            .enumerate()
            .filter(|(i, x)| {
                matches!(x, ProductPos::Formula(..)) && p.game.owners[*i] == Player::Eve
            })
            .count();
        assert_eq!(eve_choices, 2);
    }

    #[test]
    fn figure_boxes_match_figure_two() {
        let aut = fixtures().remove("fig-one-step").unwrap();
        let boxes = enumerate_boxes(&aut, "a").unwrap();
        let rel = |pairs: &[(usize, usize)]| pairs.iter().copied().collect::<BTreeSet<_>>();
        let expected = vec![
            rel(&[(0, 0), (0, 1), (1, 1), (1, 2), (2, 1)]),
            rel(&[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]),
            rel(&[(0, 1), (0, 2), (1, 1), (1, 2), (2, 1)]),
            rel(&[(0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]),
        ];
        let got: Vec<_> = boxes.into_iter().map(|b| b.relation).collect();
        assert_eq!(got.len(), 4);
        for e in &expected {
            assert!(got.contains(e), "missing box {e:?}");
        }
    }

    #[test]
    fn deterministic_automaton_has_one_box_per_letter() {
        use crate::automaton::AutomatonBuilder;
        use crate::formula::TransitionFormula;
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_state();
        let r = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(r), 1);
        b.uniform(q, 1, TransitionFormula::atom(q), 1);
        b.uniform(r, 0, TransitionFormula::atom(r), 2);
        b.uniform(r, 1, TransitionFormula::atom(q), 1);
        let aut = b.build();
        for letter in ["a", "b"] {
            let boxes = enumerate_boxes(&aut, letter).unwrap();
            assert_eq!(boxes.len(), 1);
            assert_eq!(boxes[0].relation.len(), 2);
        }
    }

    #[test]
    fn universal_automaton_has_one_box_per_letter() {
        use crate::automaton::AutomatonBuilder;
        use crate::formula::TransitionFormula;
        let mut b = AutomatonBuilder::new(&["a"]);
        let q = b.add_state();
        let r = b.add_state();
        b.uniform(q, 0, TransitionFormula::all_of([q, r]), 1);
        b.uniform(r, 0, TransitionFormula::all_of([q, r]), 2);
        let aut = b.build();
        let boxes = enumerate_boxes(&aut, "a").unwrap();
        assert_eq!(boxes.len(), 1);
        assert_eq!(boxes[0].relation.len(), 4);
    }

    #[test]
    fn single_edge_product_is_isomorphic_to_one_step_arena() {
        let aut = fixtures().remove("fig-one-step").unwrap();
        let direct = one_step_arena(&aut, "a").unwrap();
        let via_product =
            synchronized_product(&single_step_arena(0), &aut, Seeding::AllPairs).unwrap();
        assert_eq!(direct.positions, via_product.positions);
        assert_eq!(direct.game.edges, via_product.game.edges);
    }

    /// Replay check: every pair in a box is witnessed by a play on the
    /// one-step arena under the corresponding choices, and vice versa.
    #[test]
    fn box_relations_agree_with_arena_replay() {
        let aut = fixtures().remove("fig-one-step").unwrap();
        let arena = one_step_arena(&aut, "a").unwrap();
        let adj = arena.game.adjacency();
        // For each box, walk the arena allowing only Eve moves that stay
        // within the box's reachable relation and collect exits per entry.
        for b in enumerate_boxes(&aut, "a").unwrap() {
            for q in aut.states() {
                let entry = arena.state_pos(0, q).unwrap();
                let expected: BTreeSet<StateId> = b.targets(q).collect();
                // Exits reachable when Eve plays toward the box: she picks
                // children whose reachable atoms stay within the target set.
                let mut seen = BTreeSet::new();
                let mut stack = vec![entry];
                let mut exits = BTreeSet::new();
                while let Some(p) = stack.pop() {
                    if !seen.insert(p) {
                        continue;
                    }
                    match &arena.positions[p] {
                        ProductPos::State(1, t) => {
                            exits.insert(*t);
                        }
                        _ => {
                            for &e in &adj[p] {
                                let target = arena.game.edges[e].target;
                                let ok = match &arena.positions[target] {
                                    ProductPos::Formula(_, _, _, _, f)
                                        if arena.game.owners[p] == Player::Eve =>
                                    {
                                        // Eve only descends into children that
                                        // can realise a subset of the box.
                                        reach_sets(f).iter().any(|s| s.is_subset(&expected))
                                    }
                                    _ => true,
                                };
                                if ok {
                                    stack.push(target);
                                }
                            }
                        }
                    }
                }
                assert_eq!(exits, expected, "state {q} of box {:?}", b.relation);
            }
        }
    }
}
