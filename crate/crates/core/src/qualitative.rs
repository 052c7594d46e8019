//! Almost-sure and positive-probability winning regions.
//!
//! The peeling loops below are the finite instances of the transfinite
//! subgame sequences: on a finite game they stabilise after finitely many
//! rounds, and each round is one exact value computation followed by one
//! deletion or removal sweep.

use num_traits::One;

use crate::game::{Game, Owner, StateId, StateSet};
use crate::graph::attractor;
use crate::rational::Rational;
use crate::strategy::synthesis::reachplus_min_choice;
use crate::transforms::rvi;
use crate::valuation::{reach_and_plus, solve_reach};

/// A partition of the states into the two players' winning regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinningPartition {
    pub max_wins: StateSet,
    pub min_wins: StateSet,
    /// Number of value computations (or sweeps) performed.
    pub rounds: usize,
    /// Round in which a state left Max's region; `None` for Max's states.
    pub index: Vec<Option<usize>>,
}

impl WinningPartition {
    fn from_index(index: Vec<Option<usize>>, rounds: usize) -> Self {
        let n = index.len();
        let max_wins = StateSet::from_fn(n, |s| index[s.index()].is_none());
        WinningPartition {
            min_wins: max_wins.complement(),
            max_wins,
            rounds,
            index,
        }
    }
}

/// States from which Max can reach `target` with positive probability.
pub fn positive_reach_set(game: &Game, target: &StateSet) -> StateSet {
    attractor(game, target, Owner::Max).0
}

/// Record of the reachability peeling loop.
#[derive(Debug, Clone)]
pub struct ReachPeeling {
    /// Partition for reaching the target with probability 1.
    pub partition: WinningPartition,
    /// First round whose value at the state is below its value in the input.
    pub drop_index: Vec<Option<usize>>,
    /// Deleted Max edges with the round that found them value-decreasing.
    pub deleted: Vec<(usize, StateId, StateId)>,
    /// Exact values per round, on the original states.
    pub values: Vec<Vec<Rational>>,
    /// The last subgame; it may carry one extra losing sink after the
    /// original states, used to patch Max dead ends.
    pub residual: Game,
}

/// Almost-sure reachability by iterated deletion of value-decreasing Max
/// edges, starting from the game with value-increasing Min edges removed.
pub fn almost_sure_reach(game: &Game, target: &StateSet) -> WinningPartition {
    reach_peeling(game, target).partition
}

pub fn reach_peeling(game: &Game, target: &StateSet) -> ReachPeeling {
    let n = game.len();
    let mut g = rvi(game, target);
    let mut sink: Option<StateId> = None;
    let mut values_log: Vec<Vec<Rational>> = Vec::new();
    let mut deleted = Vec::new();
    let mut drop_index = vec![None; n];
    let mut as_index = vec![None; n];
    loop {
        let round = values_log.len();
        let v = solve_reach(&g, target).values;
        let original = values_log.first().unwrap_or(&v);
        for s in 0..n {
            if drop_index[s].is_none() && v[s] < original[s] {
                drop_index[s] = Some(round);
            }
            if as_index[s].is_none() && !v[s].is_one() {
                as_index[s] = Some(round);
            }
        }
        let decreasing: Vec<(StateId, StateId)> = g
            .states_of(Owner::Max)
            .filter(|s| Some(*s) != sink && !target.contains(*s))
            .flat_map(|s| {
                let v = &v;
                g.successors(s)
                    .iter()
                    .filter(move |t| v[t.index()] < v[s.index()])
                    .map(move |t| (s, *t))
            })
            .collect();
        values_log.push(v[..n].to_vec());
        if decreasing.is_empty() {
            break;
        }
        deleted.extend(decreasing.iter().map(|(s, t)| (round, *s, *t)));
        g = g.filter_player_edges(|s, t| !decreasing.contains(&(s, t)));
        for s in 0..n {
            let s = StateId(s);
            if g.successors(s).is_empty() {
                let z = *sink.get_or_insert_with(|| {
                    let id = StateId(g.len());
                    let name = g.fresh_name("lose");
                    g.push_state(name, Owner::Max, vec![id], Vec::new())
                });
                g.set_successors(s, vec![z], Vec::new());
            }
        }
    }
    ReachPeeling {
        partition: WinningPartition::from_index(as_index, values_log.len()),
        drop_index,
        deleted,
        values: values_log,
        residual: g,
    }
}

/// Record of the Büchi peeling loop.
#[derive(Debug, Clone)]
pub struct BuchiPeeling {
    pub partition: WinningPartition,
    /// Closure layer within the removal round; 0 for states whose value
    /// was below 1 in that round's subgame.
    pub layer: Vec<Option<usize>>,
    /// For Min states added by the closure: a successor removed in an
    /// earlier layer of the same round.
    pub witness: Vec<Option<StateId>>,
    /// For Min states of layer 0: the value-optimal choice for reaching the
    /// Büchi set after at least one step, in that round's subgame.
    pub layer0_choice: Vec<Option<StateId>>,
}

/// Almost-sure Büchi winning region by repeated removal of the states that
/// cannot revisit the Büchi set with probability 1, closed backwards under
/// Min and random edges.
pub fn almost_sure_buchi(game: &Game, buchi: &StateSet) -> BuchiPeeling {
    let n = game.len();
    let mut alive = StateSet::full(n);
    let mut index = vec![None; n];
    let mut layer = vec![None; n];
    let mut witness = vec![None; n];
    let mut layer0_choice = vec![None; n];
    let mut rounds = 0;
    while !alive.is_empty() {
        let round = rounds;
        rounds += 1;
        let sub = game.subgame(&alive);
        let target = buchi.intersection(&alive);
        let (reach, plus) = reach_and_plus(&sub, &target);
        let mut removed = StateSet::from_fn(n, |s| alive.contains(s) && !plus[s.index()].is_one());
        if removed.is_empty() {
            break;
        }
        for s in removed.iter() {
            layer[s.index()] = Some(0);
            if game.owner(s) == Owner::Min {
                layer0_choice[s.index()] = Some(reachplus_min_choice(&sub, &target, &reach, &plus, s));
            }
        }
        let mut depth = 0;
        loop {
            depth += 1;
            let mut next = Vec::new();
            for s in alive.iter().filter(|s| !removed.contains(*s)) {
                let succ = sub.successors(s);
                let joins = match game.owner(s) {
                    Owner::Min | Owner::Random => succ.iter().any(|t| removed.contains(*t)),
                    Owner::Max => succ.iter().all(|t| removed.contains(*t)),
                };
                if joins {
                    if game.owner(s) == Owner::Min {
                        witness[s.index()] = succ.iter().find(|t| removed.contains(**t)).copied();
                    }
                    next.push(s);
                }
            }
            if next.is_empty() {
                break;
            }
            for s in next {
                removed.insert(s);
                layer[s.index()] = Some(depth);
            }
        }
        for s in removed.iter() {
            index[s.index()] = Some(round);
            alive.remove(s);
        }
    }
    BuchiPeeling {
        partition: WinningPartition::from_index(index, rounds),
        layer,
        witness,
        layer0_choice,
    }
}

/// Almost-sure safety: the complement of Min's positive-reach attractor.
pub fn almost_sure_safety(game: &Game, target: &StateSet) -> WinningPartition {
    let (_, layer) = attractor(game, target, Owner::Min);
    WinningPartition::from_index(layer, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{fig2_with_u, ladder, random_game, Fig2};
    use crate::game::GameBuilder;
    use crate::lazy::{truncate, SinkMode};
    use crate::rational::ratio;

    fn check_partition(p: &WinningPartition, n: usize) {
        assert!(p.max_wins.is_disjoint(&p.min_wins));
        assert_eq!(p.max_wins.union(&p.min_wins), StateSet::full(n));
        for s in (0..n).map(StateId) {
            assert_eq!(p.index[s.index()].is_none(), p.max_wins.contains(s));
        }
    }

    #[test]
    fn positive_reach_examples() {
        let mut b = GameBuilder::new();
        let t = b.state("t", Owner::Max);
        let x = b.state("x", Owner::Max);
        b.edge(t, t).edge(x, x);
        let g = b.build().unwrap();
        assert_eq!(positive_reach_set(&g, &StateSet::from_ids(2, [t])), StateSet::from_ids(2, [t]));
        assert!(positive_reach_set(&g, &StateSet::empty(2)).is_empty());

        let tr = truncate(&Fig2, 10, SinkMode::Optimistic).unwrap();
        let set = positive_reach_set(&tr.game, &tr.target);
        for s in tr.game.states() {
            let name = tr.game.name(s);
            assert_eq!(set.contains(s), name != "r0" && name != "rp0", "{name}");
        }
    }

    #[test]
    fn full_target_wins_in_one_round() {
        let (g, _, _) = random_game(11, 10);
        let p = almost_sure_reach(&g, &StateSet::full(g.len()));
        assert_eq!(p.max_wins, StateSet::full(g.len()));
        assert_eq!(p.rounds, 1);
    }

    #[test]
    fn reach_peeling_stops_quickly_on_ladders() {
        // On a finite game the reach peeling cannot escalate: values are
        // unchanged by deleting value-decreasing Max edges.
        for k in 1..=6 {
            let lg = ladder(k);
            let p = reach_peeling(&lg.game, &lg.target);
            assert_eq!(p.partition.max_wins, lg.game.ids(["w", "bot"]).unwrap());
            assert_eq!(p.partition.rounds, 2);
            assert!(p.values.iter().all(|v| *v == p.values[0]));
            for (_, s, _) in &p.deleted {
                assert_eq!(lg.game.owner(*s), Owner::Max);
            }
        }
    }

    #[test]
    fn ladder_buchi_rounds_escalate() {
        for k in 1..=8 {
            let lg = ladder(k);
            let p = almost_sure_buchi(&lg.game, &lg.buchi);
            assert_eq!(p.partition.rounds, k + 1, "k = {k}");
            assert_eq!(p.partition.max_wins, lg.game.ids(["w", "bot"]).unwrap());
            check_partition(&p.partition, lg.game.len());
        }
    }

    #[test]
    fn u_is_not_almost_sure_winning() {
        let g = fig2_with_u(8).unwrap();
        let u = g.game.id("u").unwrap();
        let p = almost_sure_reach(&g.game, &g.target);
        assert!(p.min_wins.contains(u));
    }

    #[test]
    fn buchi_examples() {
        let mut b = GameBuilder::new();
        let a = b.state("a", Owner::Min);
        let t = b.state("t", Owner::Max);
        let z = b.state("z", Owner::Max);
        b.edge(a, t).edge(a, z).edge(t, t).edge(z, z);
        let g = b.build().unwrap();
        let p = almost_sure_buchi(&g, &StateSet::from_ids(3, [t]));
        assert_eq!(p.partition.max_wins, StateSet::from_ids(3, [t]));
        assert_eq!(p.layer0_choice[a.index()], Some(z));
        let p = almost_sure_buchi(&g, &StateSet::empty(3));
        assert!(p.partition.max_wins.is_empty());
        assert_eq!(p.partition.min_wins, StateSet::full(3));
    }

    #[test]
    fn fig2_initial_state_is_losing_for_buchi() {
        for depth in 3..=8 {
            let tr = truncate(&Fig2, depth, SinkMode::Pessimistic).unwrap();
            let p = almost_sure_buchi(&tr.game, &tr.buchi);
            assert!(p.partition.min_wins.contains(tr.initial));
            check_partition(&p.partition, tr.game.len());
        }
    }

    #[test]
    fn safety_examples() {
        let mut b = GameBuilder::new();
        let z = b.state("z", Owner::Max);
        let r = b.state("r", Owner::Random);
        let t = b.state("t", Owner::Max);
        b.edge(z, z).edge(t, t);
        b.prob_edge(r, t, ratio(1, 10)).prob_edge(r, z, ratio(9, 10));
        let g = b.build().unwrap();
        let p = almost_sure_safety(&g, &StateSet::from_ids(3, [t]));
        assert!(p.max_wins.contains(z));
        assert!(p.min_wins.contains(r));
    }

    #[test]
    fn safety_complements_swapped_attractor() {
        for seed in 0..30 {
            let (g, target, _) = random_game(seed, 10);
            let p = almost_sure_safety(&g, &target);
            let opp = positive_reach_set(&g.swap_roles(), &target);
            assert_eq!(p.max_wins, opp.complement());
        }
    }

    #[test]
    fn partitions_on_random_games() {
        for seed in 0..30 {
            let (g, target, buchi) = random_game(seed, 10);
            check_partition(&almost_sure_reach(&g, &target), g.len());
            check_partition(&almost_sure_buchi(&g, &buchi).partition, g.len());
            check_partition(&almost_sure_safety(&g, &target), g.len());
        }
    }

    #[test]
    fn enlarging_the_target_never_shrinks_max_wins() {
        for seed in 0..20 {
            let (g, target, buchi) = random_game(seed, 9);
            let more = target.union(&StateSet::from_ids(g.len(), [StateId(seed as usize % g.len())]));
            assert!(almost_sure_reach(&g, &target).max_wins.is_subset(&almost_sure_reach(&g, &more).max_wins));
            let more_b = buchi.union(&more);
            assert!(almost_sure_buchi(&g, &buchi)
                .partition
                .max_wins
                .is_subset(&almost_sure_buchi(&g, &more_b).partition.max_wins));
        }
    }
}
