//! Graph algorithms on game structure: attractors and end components.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::game::{Game, Owner, StateId, StateSet};

/// Least set containing `target` and closed under: `existential` owners need
/// one successor inside, the other player needs all successors inside.
/// Random states count as existential. Returns the set and each member's layer.
pub(crate) fn attractor(game: &Game, target: &StateSet, existential: Owner) -> (StateSet, Vec<Option<usize>>) {
    let n = game.len();
    let pred = game.predecessors();
    let mut layer = vec![None; n];
    let mut set = StateSet::empty(n);
    // remaining successors outside the set, for universal states
    let mut missing: Vec<usize> = game.states().map(|s| game.successors(s).len()).collect();
    let mut frontier: Vec<StateId> = target.iter().filter(|s| s.index() < n).collect();
    for &s in &frontier {
        set.insert(s);
        layer[s.index()] = Some(0);
    }
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for t in frontier {
            for &s in &pred[t.index()] {
                if set.contains(s) {
                    continue;
                }
                let owner = game.owner(s);
                let join = if owner == existential || owner == Owner::Random {
                    true
                } else {
                    missing[s.index()] -= 1;
                    missing[s.index()] == 0
                };
                if join {
                    set.insert(s);
                    layer[s.index()] = Some(depth);
                    next.push(s);
                }
            }
        }
        frontier = next;
    }
    (set, layer)
}

/// Maximal end components inside `candidates`.
///
/// Random states must keep all their edges inside a component; player states
/// may use any edge accepted by `allowed` and need at least one inside.
pub(crate) fn end_components(
    game: &Game,
    candidates: &StateSet,
    allowed: impl Fn(StateId, StateId) -> bool,
) -> Vec<Vec<StateId>> {
    let n = game.len();
    let mut alive = StateSet::from_fn(n, |s| candidates.contains(s));
    loop {
        let mut graph = DiGraph::<StateId, ()>::new();
        let mut node = vec![None; n];
        for s in alive.iter() {
            node[s.index()] = Some(graph.add_node(s));
        }
        for s in alive.iter() {
            for &t in game.successors(s) {
                if game.owner(s) != Owner::Random && !allowed(s, t) {
                    continue;
                }
                if let (Some(a), Some(b)) = (node[s.index()], node[t.index()]) {
                    graph.add_edge(a, b, ());
                }
            }
        }
        let sccs = tarjan_scc(&graph);
        let mut comp = vec![usize::MAX; n];
        for (i, c) in sccs.iter().enumerate() {
            for ix in c {
                comp[graph[*ix].index()] = i;
            }
        }
        let mut removed = false;
        for s in alive.clone().iter() {
            let c = comp[s.index()];
            let inside = |t: &StateId| comp[t.index()] == c;
            let keep = match game.owner(s) {
                Owner::Random => game.successors(s).iter().all(inside),
                _ => game.successors(s).iter().any(|t| allowed(s, *t) && inside(t)),
            };
            if !keep {
                alive.remove(s);
                removed = true;
            }
        }
        if !removed {
            return sccs
                .into_iter()
                .map(|c| {
                    let mut v: Vec<StateId> = c.into_iter().map(|ix| graph[ix]).collect();
                    v.sort();
                    v
                })
                .collect();
        }
    }
}
