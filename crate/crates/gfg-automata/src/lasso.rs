//! Ultimately periodic words and the membership oracle.
//!
//! A lasso `u . v^omega` is the desk-scale probe for omega-language questions:
//! membership of a lasso in the language of an alternating automaton reduces
//! to a finite parity game on the lasso's positions.

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{Automaton, AutomatonClass, LetterId, Priority, StateId};
use crate::error::{Error, Result};
use crate::game::{solve_parity, Edge, Game, Player, WinningCondition};
use crate::product::{synchronized_product, Seeding};

/// The word `prefix . cycle^omega`; the cycle is nonempty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LassoWord {
    pub prefix: Vec<LetterId>,
    pub cycle: Vec<LetterId>,
}

impl LassoWord {
    pub fn new(prefix: Vec<LetterId>, cycle: Vec<LetterId>) -> Result<LassoWord> {
        if cycle.is_empty() {
            return Err(Error::Invalid("lasso cycle must be nonempty".into()));
        }
        Ok(LassoWord { prefix, cycle })
    }

    /// Parses against an alphabet: per-character when all letters are single
    /// characters, comma-separated otherwise.
    pub fn parse(aut: &Automaton, prefix: &str, cycle: &str) -> Result<LassoWord> {
        let part = |s: &str| -> Result<Vec<LetterId>> {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            let symbols: Vec<String> = if s.contains(',') {
                s.split(',').map(|x| x.to_string()).collect()
            } else if aut.alphabet().iter().all(|l| l.chars().count() == 1) {
                s.chars().map(|c| c.to_string()).collect()
            } else {
                vec![s.to_string()]
            };
            symbols.iter().map(|sym| aut.letter_id(sym)).collect()
        };
        LassoWord::new(part(prefix)?, part(cycle)?)
    }

    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Letter at position `i` of the infinite word.
    pub fn letter_at(&self, i: usize) -> LetterId {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn display(&self, aut: &Automaton) -> String {
        let show = |w: &[LetterId]| {
            w.iter().map(|l| aut.alphabet()[*l].clone()).collect::<Vec<_>>().join("")
        };
        format!("{}({})^w", show(&self.prefix), show(&self.cycle))
    }
}

/// The lasso arena: positions `0..len`, position `i` steps to `i + 1` with the
/// final position wrapping back to `|prefix|`.
pub fn lasso_arena(w: &LassoWord) -> Game {
    let len = w.len();
    let edges = (0..len)
        .map(|i| {
            let target = if i + 1 == len { w.prefix.len() } else { i + 1 };
            Edge::labelled(i, target, w.letter_at(i), vec![])
        })
        .collect();
    Game {
        owners: vec![Player::Eve; len],
        edges,
        initial: 0,
        tracks: 0,
        condition: WinningCondition::Unset,
        partial: false,
        names: None,
    }
}

/// Does the automaton accept `u . v^omega`? Decided by solving the finite
/// model-checking game on the lasso arena.
pub fn lasso_membership(aut: &Automaton, w: &LassoWord) -> Result<bool> {
    let mut product = synchronized_product(&lasso_arena(w), aut, Seeding::Reachable)?;
    product.game.condition = WinningCondition::Parity;
    let sol = solve_parity(&product.game)?;
    Ok(sol.eve_wins_initial(&product.game))
}

/// Run-graph membership for nondeterministic (or deterministic) automata:
/// the lasso is accepted iff the product graph has a reachable cycle whose
/// maximum priority is even. Used as the fast path in sweeps and as an
/// independent oracle against the game route.
pub fn nondet_lasso_membership(aut: &Automaton, w: &LassoWord) -> Result<bool> {
    if !matches!(
        aut.classify(),
        AutomatonClass::Nondeterministic | AutomatonClass::Deterministic
    ) {
        return Err(Error::NotNondeterministic);
    }
    let len = w.len();
    let node = |i: usize, q: StateId| i * aut.state_count() + q;
    let mut edges: Vec<(usize, usize, Priority)> = Vec::new();
    let mut reach = vec![false; len * aut.state_count()];
    let mut frontier = vec![node(0, aut.initial())];
    reach[node(0, aut.initial())] = true;
    let mut out: BTreeMap<usize, Vec<(usize, Priority)>> = BTreeMap::new();
    while let Some(n) = frontier.pop() {
        let (i, q) = (n / aut.state_count(), n % aut.state_count());
        let a = w.letter_at(i);
        let j = if i + 1 == len { w.prefix.len() } else { i + 1 };
        for t in aut.targets(q, a) {
            let m = node(j, t);
            let p = aut.priority(q, a, t);
            edges.push((n, m, p));
            out.entry(n).or_default().push((m, p));
            if !reach[m] {
                reach[m] = true;
                frontier.push(m);
            }
        }
    }
    // Accepting cycle: for some even p, a cycle through a p-edge using only
    // priorities <= p.
    let evens: BTreeSet<Priority> =
        edges.iter().map(|(_, _, p)| *p).filter(|p| p % 2 == 0).collect();
    for p in evens {
        if graph_has_capped_cycle(&edges, p) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Is there a cycle through an edge of priority exactly `cap` using only
/// edges of priority at most `cap`? All listed edges are reachable.
pub(crate) fn graph_has_capped_cycle(edges: &[(usize, usize, Priority)], cap: Priority) -> bool {
    let sub: Vec<(usize, usize, Priority)> =
        edges.iter().copied().filter(|(_, _, p)| *p <= cap).collect();
    let comp = scc_index(&sub);
    sub.iter()
        .any(|(u, v, p)| *p == cap && comp[u] == comp[v])
}

/// Component index per node of the listed edges.
fn scc_index(edges: &[(usize, usize, Priority)]) -> BTreeMap<usize, usize> {
    let nodes: Vec<usize> = edges
        .iter()
        .flat_map(|(u, v, _)| [*u, *v])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let id: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut succ = vec![Vec::new(); nodes.len()];
    for (u, v, _) in edges {
        succ[id[u]].push(id[v]);
    }
    let mut comp = BTreeMap::new();
    let mut index = vec![usize::MAX; nodes.len()];
    let mut low = vec![0; nodes.len()];
    let mut on_stack = vec![false; nodes.len()];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut comp_count = 0;

    enum Frame {
        Enter(usize),
        Resume(usize, usize),
    }
    for root in 0..nodes.len() {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![Frame::Enter(root)];
        while let Some(f) = work.pop() {
            match f {
                Frame::Enter(v) => {
                    index[v] = next_index;
                    low[v] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    work.push(Frame::Resume(v, 0));
                }
                Frame::Resume(v, mut i) => {
                    let mut descended = false;
                    while i < succ[v].len() {
                        let w = succ[v][i];
                        i += 1;
                        if index[w] == usize::MAX {
                            work.push(Frame::Resume(v, i));
                            work.push(Frame::Enter(w));
                            descended = true;
                            break;
                        } else if on_stack[w] {
                            low[v] = low[v].min(index[w]);
                        }
                    }
                    if descended {
                        continue;
                    }
                    if low[v] == index[v] {
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp.insert(nodes[w], comp_count);
                            if w == v {
                                break;
                            }
                        }
                        comp_count += 1;
                    }
                    if let Some(Frame::Resume(p, _)) = work.last() {
                        low[*p] = low[*p].min(low[v]);
                    }
                }
            }
        }
    }
    comp
}

/// Membership through the cheapest sound route for the automaton's class.
pub fn membership(aut: &Automaton, w: &LassoWord) -> Result<bool> {
    match aut.classify() {
        AutomatonClass::Nondeterministic | AutomatonClass::Deterministic => {
            nondet_lasso_membership(aut, w)
        }
        _ => lasso_membership(aut, w),
    }
}

/// Verdict of a bounded-lasso equivalence sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundedVerdict {
    EquivalentUpToBound,
    Counterexample(LassoWord),
}

impl BoundedVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, BoundedVerdict::EquivalentUpToBound)
    }
}

/// All lassos with `|u| <= max_prefix` and `1 <= |v| <= max_cycle`, ordered by
/// total length, then prefix length, then letters; the canonical sweep order.
pub fn lassos_up_to(letters: usize, max_prefix: usize, max_cycle: usize) -> Vec<LassoWord> {
    let mut words: Vec<Vec<LetterId>> = vec![vec![]];
    let mut by_len: Vec<Vec<Vec<LetterId>>> = vec![vec![vec![]]];
    for len in 1..=(max_prefix.max(max_cycle)) {
        let mut level = Vec::new();
        for w in &by_len[len - 1] {
            for a in 0..letters {
                let mut x = w.clone();
                x.push(a);
                level.push(x);
            }
        }
        words.extend(level.iter().cloned());
        by_len.push(level);
    }
    let mut out = Vec::new();
    for total in 1..=(max_prefix + max_cycle) {
        for plen in 0..=max_prefix.min(total.saturating_sub(1)) {
            let clen = total - plen;
            if clen == 0 || clen > max_cycle {
                continue;
            }
            for p in &by_len[plen] {
                for c in &by_len[clen] {
                    out.push(LassoWord { prefix: p.clone(), cycle: c.clone() });
                }
            }
        }
    }
    out
}

/// Sweeps all lassos within the bounds and reports the first (canonical-order)
/// lasso on which the two automata disagree.
pub fn bounded_equiv(
    a: &Automaton,
    b: &Automaton,
    max_prefix: usize,
    max_cycle: usize,
) -> Result<BoundedVerdict> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    for w in lassos_up_to(a.letter_count(), max_prefix, max_cycle) {
        if membership(a, &w)? != membership(b, &w)? {
            return Ok(BoundedVerdict::Counterexample(w));
        }
    }
    Ok(BoundedVerdict::EquivalentUpToBound)
}

/// Emptiness of a nondeterministic parity automaton, with a witness lasso on
/// nonemptiness: search for a reachable cycle of even maximal priority.
pub fn npw_emptiness(aut: &Automaton) -> Result<Option<LassoWord>> {
    if !matches!(
        aut.classify(),
        AutomatonClass::Nondeterministic | AutomatonClass::Deterministic
    ) {
        return Err(Error::NotNondeterministic);
    }
    let reach = aut.reachable_states();
    let mut edges: Vec<(StateId, LetterId, StateId, Priority)> = Vec::new();
    for &q in &reach {
        for a in 0..aut.letter_count() {
            for t in aut.targets(q, a) {
                edges.push((q, a, t, aut.priority(q, a, t)));
            }
        }
    }
    let evens: BTreeSet<Priority> =
        edges.iter().map(|e| e.3).filter(|p| p % 2 == 0).collect();
    for cap in evens {
        let sub: Vec<(usize, usize, Priority)> = edges
            .iter()
            .filter(|(_, _, _, p)| *p <= cap)
            .map(|(q, _, t, p)| (*q, *t, *p))
            .collect();
        let comp = scc_index(&sub);
        let Some(&(s, a, t, _)) = edges
            .iter()
            .find(|(q, _, t, p)| *p == cap && comp.get(q) == comp.get(t) && comp.contains_key(q))
        else {
            continue;
        };
        // Witness: reach t from the initial state freely, then cycle
        // t -> ... -> s -> t inside the capped component.
        let prefix = shortest_path(aut, aut.initial(), t, None)?;
        let mut cycle = shortest_path(aut, t, s, Some((cap, &comp)))?;
        cycle.push(a);
        return Ok(Some(LassoWord::new(prefix, cycle)?));
    }
    Ok(None)
}

/// Letters along a shortest transition path; `within` caps priorities and
/// restricts to one component.
fn shortest_path(
    aut: &Automaton,
    from: StateId,
    to: StateId,
    within: Option<(Priority, &BTreeMap<usize, usize>)>,
) -> Result<Vec<LetterId>> {
    let mut prev: BTreeMap<StateId, (StateId, LetterId)> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(q) = queue.pop_front() {
        if q == to {
            let mut letters = Vec::new();
            let mut cur = to;
            while cur != from {
                let (p, a) = prev[&cur];
                letters.push(a);
                cur = p;
            }
            letters.reverse();
            return Ok(letters);
        }
        for a in 0..aut.letter_count() {
            for t in aut.targets(q, a) {
                if let Some((cap, comp)) = within {
                    if aut.priority(q, a, t) > cap
                        || comp.get(&q) != comp.get(&t)
                        || !comp.contains_key(&t)
                    {
                        continue;
                    }
                }
                if seen.insert(t) {
                    prev.insert(t, (q, a));
                    queue.push_back(t);
                }
            }
        }
    }
    Err(Error::Invalid(format!("no path from {from} to {to}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::AutomatonBuilder;
    use crate::formula::TransitionFormula;

    fn inf_a() -> Automaton {
        // Buchi: accepting exactly the words with infinitely many a's.
        let mut b = AutomatonBuilder::new(&["a", "b"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 2);
        b.uniform(q, 1, TransitionFormula::atom(q), 1);
        b.build()
    }

    #[test]
    fn deterministic_membership_matches_simulation() {
        let aut = inf_a();
        let w = LassoWord::parse(&aut, "b", "ab").unwrap();
        assert!(lasso_membership(&aut, &w).unwrap());
        assert!(nondet_lasso_membership(&aut, &w).unwrap());
        let w = LassoWord::parse(&aut, "aaa", "b").unwrap();
        assert!(!lasso_membership(&aut, &w).unwrap());
        assert!(!nondet_lasso_membership(&aut, &w).unwrap());
    }

    #[test]
    fn lasso_order_is_by_length_then_lexicographic() {
        let ws = lassos_up_to(2, 1, 2);
        assert_eq!(ws[0], LassoWord { prefix: vec![], cycle: vec![0] });
        assert_eq!(ws[1], LassoWord { prefix: vec![], cycle: vec![1] });
        let total: Vec<usize> = ws.iter().map(|w| w.len()).collect();
        let mut sorted = total.clone();
        sorted.sort_unstable();
        assert_eq!(total, sorted);
    }

    #[test]
    fn bounded_equiv_self_is_equivalent() {
        let aut = inf_a();
        assert!(bounded_equiv(&aut, &aut, 3, 3).unwrap().is_equivalent());
    }

    #[test]
    fn bounded_equiv_detects_dual() {
        let aut = inf_a();
        let verdict = bounded_equiv(&aut, &aut.dual(), 3, 3).unwrap();
        match verdict {
            BoundedVerdict::Counterexample(w) => {
                // The canonical first lasso already separates them.
                assert_eq!(w, LassoWord { prefix: vec![], cycle: vec![0] });
            }
            _ => panic!("dual must differ"),
        }
    }

    #[test]
    fn emptiness_of_all_odd_automaton() {
        let mut b = AutomatonBuilder::new(&["a"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 1);
        assert!(npw_emptiness(&b.build()).unwrap().is_none());
    }

    #[test]
    fn emptiness_witness_on_even_loop() {
        let mut b = AutomatonBuilder::new(&["a"]);
        let q = b.add_state();
        b.uniform(q, 0, TransitionFormula::atom(q), 2);
        let w = npw_emptiness(&b.build()).unwrap().unwrap();
        assert_eq!(w, LassoWord { prefix: vec![], cycle: vec![0] });
    }

    #[test]
    fn emptiness_agrees_with_bounded_sweep_on_inf_a() {
        let aut = inf_a();
        let w = npw_emptiness(&aut).unwrap().unwrap();
        assert!(nondet_lasso_membership(&aut, &w).unwrap());
    }
}
