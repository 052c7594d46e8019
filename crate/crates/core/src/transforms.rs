//! Value-based game transformations.

use std::fmt;

use crate::game::{Game, Owner, StateId, StateSet};
use crate::rational::Rational;
use crate::valuation::{reach_and_plus, solve_reach};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    Increasing,
    Decreasing,
    Preserving,
}

impl EdgeClass {
    fn of(from: &Rational, to: &Rational) -> EdgeClass {
        match to.cmp(from) {
            std::cmp::Ordering::Greater => EdgeClass::Increasing,
            std::cmp::Ordering::Less => EdgeClass::Decreasing,
            std::cmp::Ordering::Equal => EdgeClass::Preserving,
        }
    }
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeClass::Increasing => "increasing",
            EdgeClass::Decreasing => "decreasing",
            EdgeClass::Preserving => "preserving",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("{owner} edge {from} -> {to} is value-{class}, which no finite game allows")]
    ImpossibleEdge {
        owner: &'static str,
        from: StateId,
        to: StateId,
        class: EdgeClass,
    },
}

/// Every edge of a game labelled by how the value changes along it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub values: Vec<Rational>,
    pub edges: Vec<(StateId, StateId, EdgeClass)>,
}

impl Classification {
    pub fn get(&self, s: StateId, t: StateId) -> Option<EdgeClass> {
        self.edges.iter().find(|(a, b, _)| *a == s && *b == t).map(|e| e.2)
    }

    /// Edges of `owner` with the given class.
    pub fn owned<'a>(&'a self, game: &'a Game, owner: Owner, class: EdgeClass) -> impl Iterator<Item = (StateId, StateId)> + 'a {
        self.edges
            .iter()
            .filter(move |(s, _, c)| game.owner(*s) == owner && *c == class)
            .map(|(s, t, _)| (*s, *t))
    }
}

/// Removes Min edges that increase the reach value.
pub fn rvi(game: &Game, target: &StateSet) -> Game {
    rvi_with_values(game, &solve_reach(game, target).values)
}

pub(crate) fn rvi_with_values(game: &Game, v: &[Rational]) -> Game {
    game.filter_player_edges(|s, t| !(game.owner(s) == Owner::Min && v[t.index()] > v[s.index()]))
}

/// Classifies every edge with respect to reach values, or to values of
/// visiting the target after at least one step when `plus` is set.
///
/// With reach values, Max edges never increase and Min edges leaving
/// non-target states never decrease the value; a violation is reported as an
/// error. With `plus` only the Max
/// half of that fact holds (a Min edge into the target may lose value), so
/// only Max edges are checked.
pub fn classify_transitions(game: &Game, target: &StateSet, plus: bool) -> Result<Classification, TransformError> {
    let (reach, after_step) = reach_and_plus(game, target);
    let values = if plus { after_step } else { reach };
    let mut edges = Vec::with_capacity(game.edge_count());
    for (s, t) in game.edges() {
        let class = EdgeClass::of(&values[s.index()], &values[t.index()]);
        let bad = match game.owner(s) {
            Owner::Max => class == EdgeClass::Increasing,
            Owner::Min => !plus && class == EdgeClass::Decreasing && !target.contains(s),
            Owner::Random => false,
        };
        if bad {
            return Err(TransformError::ImpossibleEdge {
                owner: game.owner(s).keyword(),
                from: s,
                to: t,
                class,
            });
        }
        edges.push((s, t, class));
    }
    Ok(Classification { values, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{random_game, Fig2};
    use crate::game::GameBuilder;
    use crate::lazy::{truncate, SinkMode};
    use crate::rational::ratio;

    #[test]
    fn removes_the_increasing_min_edge() {
        // m chooses between a 3/10 coin and a 7/10 coin
        let mut b = GameBuilder::new();
        let m = b.state("m", Owner::Min);
        let lo = b.state("lo", Owner::Random);
        let hi = b.state("hi", Owner::Random);
        let t = b.state("t", Owner::Max);
        let z = b.state("z", Owner::Max);
        b.edge(m, hi).edge(m, lo);
        b.prob_edge(lo, t, ratio(3, 10)).prob_edge(lo, z, ratio(7, 10));
        b.prob_edge(hi, t, ratio(7, 10)).prob_edge(hi, z, ratio(3, 10));
        b.edge(t, t).edge(z, z);
        let g = b.build().unwrap();
        let target = StateSet::from_ids(5, [t]);
        let r = rvi(&g, &target);
        assert_eq!(r.successors(m), &[lo]);
        assert_eq!(solve_reach(&r, &target).values, solve_reach(&g, &target).values);
    }

    #[test]
    fn no_min_states_means_no_change() {
        let mut b = GameBuilder::new();
        let a = b.state("a", Owner::Max);
        let t = b.state("t", Owner::Max);
        b.edge(a, t).edge(a, a).edge(t, t);
        let g = b.build().unwrap();
        assert_eq!(rvi(&g, &StateSet::from_ids(2, [t])), g);
    }

    #[test]
    fn idempotent_and_value_preserving() {
        for seed in 0..40 {
            let (g, target, _) = random_game(seed, 10);
            let once = rvi(&g, &target);
            assert_eq!(rvi(&once, &target), once);
            assert_eq!(solve_reach(&once, &target).values, solve_reach(&g, &target).values);
            for s in g.states().filter(|s| g.owner(*s) != Owner::Min) {
                assert_eq!(once.successors(s), g.successors(s));
            }
            for s in g.states() {
                assert!(!once.successors(s).is_empty());
            }
        }
    }

    #[test]
    fn coin_has_one_edge_of_each_kind() {
        let mut b = GameBuilder::new();
        let r = b.state("r", Owner::Random);
        let t = b.state("t", Owner::Max);
        let z = b.state("z", Owner::Max);
        b.prob_edge(r, z, ratio(1, 2)).prob_edge(r, t, ratio(1, 2));
        b.edge(t, t).edge(z, z);
        let g = b.build().unwrap();
        let c = classify_transitions(&g, &StateSet::from_ids(3, [t]), false).unwrap();
        assert_eq!(c.get(r, z), Some(EdgeClass::Decreasing));
        assert_eq!(c.get(r, t), Some(EdgeClass::Increasing));
    }

    #[test]
    fn fig2_ladder_edges_preserve_value() {
        let tr = truncate(&Fig2, 10, SinkMode::Optimistic).unwrap();
        let c = classify_transitions(&tr.game, &tr.target, false).unwrap();
        let s = |n: &str| tr.state(n).unwrap();
        assert_eq!(c.get(s("s0"), s("s1")), Some(EdgeClass::Preserving));
        assert_eq!(c.get(s("s3"), s("r3")), Some(EdgeClass::Decreasing));
    }

    #[test]
    fn ownership_facts_hold_on_random_games() {
        for seed in 0..40 {
            let (g, target, _) = random_game(seed, 10);
            assert!(classify_transitions(&g, &target, false).is_ok());
            assert!(classify_transitions(&g, &target, true).is_ok());
        }
    }
}
