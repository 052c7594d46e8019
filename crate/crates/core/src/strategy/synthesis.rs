//! Optimal memoryless deterministic strategies and threshold decisions.

use std::fmt;

use num_traits::{One, Zero};

use super::{MdStrategy, StrategyError};
use crate::game::{Game, Owner, Player, StateId, StateSet};
use crate::qualitative::{almost_sure_buchi, reach_peeling, BuchiPeeling};
use crate::rational::{self, Rational};
use crate::transforms::rvi_with_values;
use crate::valuation::{reach_and_plus, solve_reach};

/// The Max strategy found by policy iteration; optimal for reachability.
pub fn optimal_max_md(game: &Game, target: &StateSet) -> MdStrategy {
    let sol = solve_reach(game, target);
    MdStrategy::from_fn(game, Player::Max, |s| sol.max_choice[s.index()])
}

/// Optimal Min strategy for reachability: keep the value on every step.
pub fn optimal_min_md(game: &Game, target: &StateSet) -> MdStrategy {
    let v = solve_reach(game, target).values;
    min_keep_value(game, &v)
}

fn min_keep_value(game: &Game, v: &[Rational]) -> MdStrategy {
    MdStrategy::from_fn(game, Player::Min, |s| {
        let succ = game.successors(s);
        succ.iter().copied().find(|t| v[t.index()] == v[s.index()]).unwrap_or(succ[0])
    })
}

/// Max edges leaving non-target states that lower the value `v`.
fn decreasing_max_edges(game: &Game, target: &StateSet, v: &[Rational]) -> Vec<(StateId, StateId)> {
    game.states_of(Owner::Max)
        .filter(|s| !target.contains(*s))
        .flat_map(|s| {
            game.successors(s)
                .iter()
                .filter(move |t| v[t.index()] < v[s.index()])
                .map(move |t| (s, *t))
        })
        .collect()
}

fn named(game: &Game, edges: &[(StateId, StateId)]) -> Vec<(String, String)> {
    edges
        .iter()
        .map(|(s, t)| (game.name(*s).to_string(), game.name(*t).to_string()))
        .collect()
}

/// Distance-to-target ranks along value-preserving moves, for states of
/// positive value. Max and random states need one ranked preserving move,
/// Min states need all their preserving moves ranked.
fn value_ranks(game: &Game, target: &StateSet, v: &[Rational]) -> Vec<Option<usize>> {
    let n = game.len();
    let mut rank: Vec<Option<usize>> = (0..n).map(|s| target.contains(StateId(s)).then_some(0)).collect();
    let keeps = |s: StateId, t: StateId| v[t.index()] == v[s.index()];
    for layer in 1.. {
        let joins: Vec<StateId> = game
            .states()
            .filter(|s| rank[s.index()].is_none() && !v[s.index()].is_zero())
            .filter(|&s| {
                let succ = game.successors(s);
                match game.owner(s) {
                    Owner::Random => succ.iter().any(|t| rank[t.index()].is_some()),
                    Owner::Max => succ.iter().any(|&t| keeps(s, t) && rank[t.index()].is_some()),
                    Owner::Min => succ.iter().filter(|&&t| keeps(s, t)).all(|t| rank[t.index()].is_some()),
                }
            })
            .collect();
        if joins.is_empty() {
            break;
        }
        for s in joins {
            rank[s.index()] = Some(layer);
        }
    }
    rank
}

/// The value-preserving successor of least rank, first in list on ties.
fn rank_choice(game: &Game, v: &[Rational], rank: &[Option<usize>], s: StateId) -> StateId {
    let succ = game.successors(s);
    succ.iter()
        .copied()
        .filter(|t| v[t.index()] == v[s.index()])
        .min_by_key(|t| rank[t.index()].unwrap_or(usize::MAX))
        .unwrap_or(succ[0])
}

/// Optimal Max strategy for reachability on games where no Max move from
/// a non-target state lowers the value: always move closer to the target
/// while keeping the value.
pub fn optimal_max_md_no_decrease(game: &Game, target: &StateSet) -> Result<MdStrategy, StrategyError> {
    let v = solve_reach(game, target).values;
    let bad = decreasing_max_edges(game, target, &v);
    if !bad.is_empty() {
        return Err(StrategyError::Decreasing(named(game, &bad)));
    }
    Ok(rank_strategy(game, target, &v))
}

fn rank_strategy(game: &Game, target: &StateSet, v: &[Rational]) -> MdStrategy {
    let rank = value_ranks(game, target, v);
    MdStrategy::from_fn(game, Player::Max, |s| rank_choice(game, v, &rank, s))
}

/// Min's choice at `s` for visiting the target after at least one step,
/// given reach values and after-one-step values of the same game.
pub(crate) fn reachplus_min_choice(game: &Game, target: &StateSet, reach: &[Rational], plus: &[Rational], s: StateId) -> StateId {
    let succ = game.successors(s);
    let find = |p: &dyn Fn(StateId) -> bool| succ.iter().copied().find(|t| p(*t));
    if !target.contains(s) {
        return find(&|t| reach[t.index()] == reach[s.index()]).unwrap_or(succ[0]);
    }
    if plus[s.index()].is_one() {
        return succ[0];
    }
    find(&|t| !target.contains(t) && plus[t.index()] == plus[s.index()])
        .or_else(|| find(&|t| reach[t.index()] == plus[s.index()]))
        .unwrap_or(succ[0])
}

/// Optimal Min strategy for visiting the target after at least one step.
pub fn reachplus_min_md(game: &Game, target: &StateSet) -> MdStrategy {
    let (reach, plus) = reach_and_plus(game, target);
    MdStrategy::from_fn(game, Player::Min, |s| reachplus_min_choice(game, target, &reach, &plus, s))
}

/// Optimal Max strategy for visiting the target after at least one step,
/// on games where no Max move lowers that value.
pub fn reachplus_max_md(game: &Game, target: &StateSet) -> Result<MdStrategy, StrategyError> {
    let (reach, plus) = reach_and_plus(game, target);
    let bad: Vec<(StateId, StateId)> = game
        .states_of(Owner::Max)
        .flat_map(|s| {
            let plus = &plus;
            game.successors(s)
                .iter()
                .filter(move |t| plus[t.index()] < plus[s.index()])
                .map(move |t| (s, *t))
        })
        .collect();
    if !bad.is_empty() {
        return Err(StrategyError::Decreasing(named(game, &bad)));
    }
    let rank = value_ranks(game, target, &reach);
    Ok(MdStrategy::from_fn(game, Player::Max, |s| {
        if !target.contains(s) {
            return rank_choice(game, &reach, &rank, s);
        }
        let succ = game.successors(s);
        succ.iter()
            .copied()
            .find(|t| target.contains(*t) || plus[t.index()] == plus[s.index()])
            .unwrap_or(succ[0])
    }))
}

/// Strategies winning the almost-sure Büchi game from the respective regions.
#[derive(Debug, Clone)]
pub struct BuchiPair {
    /// Wins with probability 1 from every state of Max's region.
    pub sigma: MdStrategy,
    /// Keeps the Büchi probability below 1 from every state of Min's region.
    pub pi: MdStrategy,
    pub peeling: BuchiPeeling,
}

pub fn buchi_md_pair(game: &Game, buchi: &StateSet) -> BuchiPair {
    let peeling = almost_sure_buchi(game, buchi);
    let wins = &peeling.partition.max_wins;
    let first = |s: StateId| game.successors(s)[0];
    let sigma = if wins.is_empty() {
        MdStrategy::first_choice(game, Player::Max)
    } else {
        let sub = game.subgame(wins);
        // Every state of the region revisits the Büchi set almost surely, so
        // the after-one-step values are 1 there and no Max move lowers them.
        let inner = reachplus_max_md(&sub, &buchi.intersection(wins))
            .expect("the almost-sure region has no value-decreasing Max moves");
        MdStrategy::from_fn(game, Player::Max, |s| {
            if wins.contains(s) {
                inner.choice(s).unwrap_or_else(|| first(s))
            } else {
                first(s)
            }
        })
    };
    let pi = MdStrategy::from_fn(game, Player::Min, |s| {
        let i = s.index();
        match peeling.layer[i] {
            Some(0) => peeling.layer0_choice[i].unwrap_or_else(|| first(s)),
            Some(_) => peeling.witness[i].unwrap_or_else(|| first(s)),
            None => first(s),
        }
    });
    BuchiPair { sigma, pi, peeling }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Max,
    Min,
    OutOfScope,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Max => "max",
            Winner::Min => "min",
            Winner::OutOfScope => "out-of-scope",
        })
    }
}

/// Which argument settled a threshold question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    ValueBelow,
    ValueAbove,
    /// No value-decreasing Max moves.
    Case1,
    /// Removing value-increasing Min moves changes nothing.
    Case2,
    /// The threshold is 1.
    Case3,
    /// Strict threshold equal to the value.
    Case4,
    /// Non-strict threshold 0.
    Trivial,
    NoneApplicable,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reason::ValueBelow => "value<c",
            Reason::ValueAbove => "value>c-finite-horizon",
            Reason::Case1 => "case-1",
            Reason::Case2 => "case-2",
            Reason::Case3 => "case-3",
            Reason::Case4 => "case-4",
            Reason::Trivial => "trivial",
            Reason::NoneApplicable => "none-applicable",
        })
    }
}

/// Outcome of deciding `P(Reach T) >= c` (or `> c` when strict) from one state.
#[derive(Debug, Clone)]
pub struct ThresholdVerdict {
    pub winner: Winner,
    /// An MD strategy of the winner that wins from every state meeting the
    /// same comparison; absent when out of scope.
    pub strategy: Option<MdStrategy>,
    pub reason: Reason,
    pub value: Rational,
}

pub fn threshold_decide(
    game: &Game,
    target: &StateSet,
    s: StateId,
    c: &Rational,
    strict: bool,
) -> Result<ThresholdVerdict, StrategyError> {
    if !rational::is_probability(c) {
        return Err(StrategyError::BadThreshold(rational::format(c)));
    }
    let sol = solve_reach(game, target);
    let v = &sol.values;
    let value = v[s.index()].clone();
    let verdict = |winner, strategy, reason| ThresholdVerdict {
        winner,
        strategy,
        reason,
        value: value.clone(),
    };
    if value < *c {
        return Ok(verdict(Winner::Min, Some(min_keep_value(game, v)), Reason::ValueBelow));
    }
    if value > *c {
        let sigma = MdStrategy::from_fn(game, Player::Max, |s| sol.max_choice[s.index()]);
        return Ok(verdict(Winner::Max, Some(sigma), Reason::ValueAbove));
    }
    if strict {
        return Ok(verdict(Winner::Min, Some(min_keep_value(game, v)), Reason::Case4));
    }
    if c.is_zero() {
        return Ok(verdict(Winner::Max, Some(MdStrategy::first_choice(game, Player::Max)), Reason::Trivial));
    }
    if decreasing_max_edges(game, target, v).is_empty() {
        return Ok(verdict(Winner::Max, Some(rank_strategy(game, target, v)), Reason::Case1));
    }
    let reason = if rvi_with_values(game, v) == *game {
        Reason::Case2
    } else if c.is_one() {
        Reason::Case3
    } else {
        return Ok(verdict(Winner::OutOfScope, None, Reason::NoneApplicable));
    };
    Ok(verdict(Winner::Max, Some(peeled_max(game, target)), reason))
}

/// Max strategy read off the residual game of the reach peeling loop, where
/// no Max move lowers the value any more.
fn peeled_max(game: &Game, target: &StateSet) -> MdStrategy {
    let residual = reach_peeling(game, target).residual;
    let target = target_in(&residual, target);
    let v = solve_reach(&residual, &target).values;
    let rank = value_ranks(&residual, &target, &v);
    MdStrategy::from_fn(game, Player::Max, |s| {
        let t = rank_choice(&residual, &v, &rank, s);
        if game.has_edge(s, t) {
            t
        } else {
            game.successors(s)[0]
        }
    })
}

/// The target set widened to the residual game's universe.
fn target_in(residual: &Game, target: &StateSet) -> StateSet {
    StateSet::from_fn(residual.len(), |s| s.index() < target.universe() && target.contains(s))
}
