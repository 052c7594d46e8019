//! Countable finitely-branching games given by a successor generator, and
//! their certified finite truncations.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use num_traits::One;

use crate::game::{Game, GameBuilder, Owner, StateId, StateSet};
use crate::rational::Rational;

/// Result of expanding one state of a [`LazyGame`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion<S> {
    pub owner: Owner,
    pub successors: Vec<S>,
    /// Aligned with `successors`; present exactly for random states.
    pub weights: Option<Vec<Rational>>,
    /// Membership in the reachability/safety target.
    pub target: bool,
    /// Membership in the Büchi set.
    pub buchi: bool,
}

/// A game presented by its initial state and a pure successor function.
///
/// `expand` must be deterministic: calling it twice on the same state returns
/// the same expansion.
pub trait LazyGame {
    type State: Clone + Eq + Hash;

    fn initial(&self) -> Self::State;

    fn expand(&self, state: &Self::State) -> Expansion<Self::State>;

    /// Identifier used for the state in materialized games. Must be unique,
    /// non-empty and free of whitespace.
    fn name(&self, state: &Self::State) -> String;

    fn branching_bound(&self) -> Option<usize> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SinkMode {
    /// Absorbing state outside every target and Büchi set.
    Pessimistic,
    /// Absorbing state inside every target and Büchi set.
    Optimistic,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TruncateError {
    #[error("expansion of `{state}` returned {got} successors, over the branching bound {bound}")]
    OverBound { state: String, got: usize, bound: usize },
    #[error("expansion of `{state}` returned no successors")]
    Empty { state: String },
    #[error("expansion of `{state}` returned {weights} weights for {successors} successors")]
    Weights { state: String, successors: usize, weights: usize },
    #[error("two lazy states share the name `{0}`")]
    NameClash(String),
}

/// A finite game obtained from a [`LazyGame`] by breadth-first expansion.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub game: Game,
    pub depth: usize,
    pub mode: SinkMode,
    pub initial: StateId,
    pub sink: StateId,
    /// Expanded states with at least one edge redirected to the sink.
    pub frontier: StateSet,
    /// Target flags of the expanded states, plus the sink when optimistic.
    pub target: StateSet,
    /// Büchi flags of the expanded states, plus the sink when optimistic.
    pub buchi: StateSet,
    /// BFS distance of every expanded state from the initial one.
    pub distance: Vec<usize>,
}

impl Truncation {
    pub fn state(&self, name: &str) -> Option<StateId> {
        self.game.id(name)
    }
}

pub const SINK_NAME: &str = "sink";

/// Materializes all states within `depth` steps of the initial state and
/// redirects every edge leaving that set to a single absorbing sink.
pub fn truncate<L: LazyGame>(base: &L, depth: usize, mode: SinkMode) -> Result<Truncation, TruncateError> {
    let mut index: HashMap<L::State, usize> = HashMap::new();
    let mut order: Vec<(L::State, Expansion<L::State>)> = Vec::new();
    let mut distance = Vec::new();
    let mut queue = VecDeque::new();

    let init = base.initial();
    index.insert(init.clone(), 0);
    distance.push(0);
    queue.push_back(init);

    while let Some(s) = queue.pop_front() {
        let exp = checked_expand(base, &s)?;
        let d = distance[index[&s]];
        if d < depth {
            for t in &exp.successors {
                if !index.contains_key(t) {
                    index.insert(t.clone(), distance.len());
                    distance.push(d + 1);
                    queue.push_back(t.clone());
                }
            }
        }
        order.push((s, exp));
    }

    let mut b = GameBuilder::new();
    for (s, exp) in &order {
        let name = base.name(s);
        if name == SINK_NAME {
            return Err(TruncateError::NameClash(name));
        }
        b.add_state(name.clone(), exp.owner)
            .map_err(|_| TruncateError::NameClash(name))?;
    }
    let sink = b.state(SINK_NAME, Owner::Random);
    b.prob_edge(sink, sink, Rational::one());

    let n = order.len() + 1;
    let mut frontier = StateSet::empty(n);
    let mut target = StateSet::empty(n);
    let mut buchi = StateSet::empty(n);

    for (i, (_, exp)) in order.iter().enumerate() {
        let s = StateId(i);
        if exp.target {
            target.insert(s);
        }
        if exp.buchi {
            buchi.insert(s);
        }
        let mut sink_weight: Option<Rational> = None;
        let mut sink_edge = false;
        for (k, t) in exp.successors.iter().enumerate() {
            match index.get(t) {
                Some(&j) => match &exp.weights {
                    Some(w) => {
                        b.prob_edge(s, StateId(j), w[k].clone());
                    }
                    None => {
                        b.edge(s, StateId(j));
                    }
                },
                None => {
                    sink_edge = true;
                    if let Some(w) = &exp.weights {
                        *sink_weight.get_or_insert_with(Rational::default) += &w[k];
                    }
                }
            }
        }
        if sink_edge {
            frontier.insert(s);
            match sink_weight {
                Some(w) => {
                    b.prob_edge(s, sink, w);
                }
                None => {
                    b.edge(s, sink);
                }
            }
        }
    }
    if mode == SinkMode::Optimistic {
        target.insert(sink);
        buchi.insert(sink);
    }

    Ok(Truncation {
        game: b.build_unchecked(),
        depth,
        mode,
        initial: StateId(0),
        sink,
        frontier,
        target,
        buchi,
        distance,
    })
}

fn checked_expand<L: LazyGame>(base: &L, s: &L::State) -> Result<Expansion<L::State>, TruncateError> {
    let exp = base.expand(s);
    if exp.successors.is_empty() {
        return Err(TruncateError::Empty { state: base.name(s) });
    }
    if let Some(bound) = base.branching_bound() {
        if exp.successors.len() > bound {
            return Err(TruncateError::OverBound {
                state: base.name(s),
                got: exp.successors.len(),
                bound,
            });
        }
    }
    if let Some(w) = &exp.weights {
        if w.len() != exp.successors.len() {
            return Err(TruncateError::Weights {
                state: base.name(s),
                successors: exp.successors.len(),
                weights: w.len(),
            });
        }
    }
    Ok(exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{Fig2, GamblersRuin};
    use crate::rational::ratio;

    /// Infinite binary tree of max states, used to probe branching bounds.
    struct Tree {
        bound: Option<usize>,
        fanout: usize,
    }

    impl LazyGame for Tree {
        type State = u64;
        fn initial(&self) -> u64 {
            1
        }
        fn expand(&self, s: &u64) -> Expansion<u64> {
            Expansion {
                owner: Owner::Max,
                successors: (0..self.fanout as u64).map(|k| s * self.fanout as u64 + k).collect(),
                weights: None,
                target: false,
                buchi: false,
            }
        }
        fn name(&self, s: &u64) -> String {
            format!("n{s}")
        }
        fn branching_bound(&self) -> Option<usize> {
            self.bound
        }
    }

    #[test]
    fn depth_zero_is_initial_plus_sink() {
        let t = truncate(&Fig2, 0, SinkMode::Pessimistic).unwrap();
        assert_eq!(t.game.len(), 2);
        let i = t.state("i").unwrap();
        assert_eq!(t.game.successors(i), &[t.sink]);
        assert_eq!(t.game.weights(i), &[Rational::one()]);
        assert!(t.game.validate().is_empty());
        assert!(t.frontier.contains(i));
    }

    #[test]
    fn gamblers_ruin_depth_five() {
        let ruin = GamblersRuin::unbounded(ratio(3, 5), 1);
        let t = truncate(&ruin, 5, SinkMode::Pessimistic).unwrap();
        // wealth 0..=6 plus the sink; wealth 6's upward edge goes to the sink
        assert_eq!(t.game.len(), 8);
        let w6 = t.state("w6").unwrap();
        assert!(t.frontier.contains(w6));
        assert_eq!(t.frontier.len(), 1);
        assert!(t.game.has_edge(w6, t.sink));
        assert!(!t.target.contains(t.sink));
        assert!(t.game.validate().is_empty());
    }

    #[test]
    fn optimistic_sink_joins_targets() {
        let t = truncate(&Fig2, 6, SinkMode::Optimistic).unwrap();
        assert!(t.target.contains(t.sink));
        assert!(t.buchi.contains(t.sink));
        assert!(t.game.is_absorbing(t.sink));
    }

    #[test]
    fn over_bound_expansion_is_an_error() {
        let tree = Tree {
            bound: Some(2),
            fanout: 3,
        };
        assert!(matches!(
            truncate(&tree, 2, SinkMode::Pessimistic),
            Err(TruncateError::OverBound { got: 3, bound: 2, .. })
        ));
    }

    #[test]
    fn state_count_respects_branching_bound() {
        let tree = Tree {
            bound: Some(2),
            fanout: 2,
        };
        for depth in 0..8 {
            let t = truncate(&tree, depth, SinkMode::Pessimistic).unwrap();
            let bound: usize = 1 + (0..=depth as u32).map(|k| 2usize.pow(k)).sum::<usize>();
            assert!(t.game.len() <= bound);
            assert_eq!(t.game.len(), bound);
        }
    }

    #[test]
    fn shallower_truncation_embeds_into_deeper() {
        for d in 0..8 {
            let small = truncate(&Fig2, d, SinkMode::Pessimistic).unwrap();
            let large = truncate(&Fig2, d + 3, SinkMode::Pessimistic).unwrap();
            for s in small.game.states().filter(|s| *s != small.sink) {
                let name = small.game.name(s);
                let l = large.state(name).expect("state kept at larger depth");
                assert_eq!(small.game.owner(s), large.game.owner(l));
                if !small.frontier.contains(s) {
                    let a: Vec<&str> = small.game.successors(s).iter().map(|t| small.game.name(*t)).collect();
                    let b: Vec<&str> = large.game.successors(l).iter().map(|t| large.game.name(*t)).collect();
                    assert_eq!(a, b, "edges of {name}");
                    assert_eq!(small.game.weights(s), large.game.weights(l));
                }
            }
        }
    }
}
