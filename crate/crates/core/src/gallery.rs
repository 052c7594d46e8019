//! Example games: the two-ladder game with value 1/2 and no optimal
//! strategies, a ladder family whose almost-sure Büchi region needs one
//! peeling round per level, gambler's ruin, and seeded random games.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{Game, GameBuilder, Owner, StateId, StateSet};
use crate::lazy::{truncate, Expansion, LazyGame, SinkMode, Truncation, TruncateError};
use crate::rational::{int, pow2_neg, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GalleryError {
    #[error("win probability {0} must lie strictly between 0 and 1")]
    BadProbability(String),
    #[error("parameter {name} = {value} is below the minimum {min}")]
    TooSmall { name: &'static str, value: usize, min: usize },
    #[error(transparent)]
    Truncate(#[from] TruncateError),
}

/// A finite game with its reachability target and Büchi set.
#[derive(Debug, Clone)]
pub struct GalleryGame {
    pub game: Game,
    pub target: StateSet,
    pub buchi: StateSet,
}

/// States of the two-ladder game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fig2State {
    Init,
    /// Max ladder.
    S(u32),
    /// Min ladder; every rung is a Büchi state.
    Sp(u32),
    /// Exit chain of the Max ladder: value 1 - 2^-i.
    R(u32),
    /// Exit chain of the Min ladder: value 2^-i for i >= 1.
    Rp(u32),
    T,
}

/// The infinite two-ladder game. From `i` a fair coin picks the Max ladder
/// `s0 s1 ...` or the Min ladder `sp0 sp1 ...`. Leaving the Max ladder at
/// `s_j` gives `r_j`, which reaches `t` with probability `1 - 2^-j`; leaving the
/// Min ladder at `sp_j` (j >= 1) gives `rp_j`, which reaches `t` with
/// probability `2^-j`. `t` is the target; the Büchi set is `t` plus the
/// whole Min ladder. The value of `i` is 1/2 for both objectives, and
/// neither player has an optimal strategy.
#[derive(Debug, Clone, Copy, Default)]
pub struct Fig2;

impl LazyGame for Fig2 {
    type State = Fig2State;

    fn initial(&self) -> Fig2State {
        Fig2State::Init
    }

    fn expand(&self, s: &Fig2State) -> Expansion<Fig2State> {
        use Fig2State::*;
        let half = || Some(vec![ratio(1, 2), ratio(1, 2)]);
        let (owner, successors, weights) = match *s {
            Init => (Owner::Random, vec![S(0), Sp(0)], half()),
            S(j) => (Owner::Max, vec![S(j + 1), R(j)], None),
            Sp(0) => (Owner::Min, vec![Sp(1)], None),
            Sp(j) => (Owner::Min, vec![Sp(j + 1), Rp(j)], None),
            R(0) | Rp(0) | T => (Owner::Random, vec![*s], Some(vec![Rational::one()])),
            R(j) => (Owner::Random, vec![T, R(j - 1)], half()),
            Rp(j) => {
                let p = pow2_neg(j);
                (Owner::Random, vec![T, Rp(0)], Some(vec![p.clone(), int(1) - p]))
            }
        };
        Expansion {
            owner,
            successors,
            weights,
            target: *s == T,
            buchi: matches!(s, T | Sp(_)),
        }
    }

    fn name(&self, s: &Fig2State) -> String {
        match s {
            Fig2State::Init => "i".to_string(),
            Fig2State::S(j) => format!("s{j}"),
            Fig2State::Sp(j) => format!("sp{j}"),
            Fig2State::R(j) => format!("r{j}"),
            Fig2State::Rp(j) => format!("rp{j}"),
            Fig2State::T => "t".to_string(),
        }
    }

    fn branching_bound(&self) -> Option<usize> {
        Some(2)
    }
}

/// Truncation of the two-ladder game.
pub fn fig2(depth: usize, mode: SinkMode) -> Result<Truncation, GalleryError> {
    Ok(truncate(&Fig2, depth, mode)?)
}

/// Pessimistic truncation of the two-ladder game plus a Min state `u` with
/// edges to `s0` and `t`. Needs `t` in the truncation, i.e. depth >= 4.
pub fn fig2_with_u(depth: usize) -> Result<GalleryGame, GalleryError> {
    if depth < 4 {
        return Err(GalleryError::TooSmall {
            name: "depth",
            value: depth,
            min: 4,
        });
    }
    let tr = fig2(depth, SinkMode::Pessimistic)?;
    let mut game = tr.game;
    let s0 = game.require("s0").expect("s0 is one step from i");
    let t = game.require("t").expect("t is four steps from i");
    let u = game.push_state("u".to_string(), Owner::Min, vec![s0, t], Vec::new());
    let n = game.len();
    let widen = |set: &StateSet| StateSet::from_fn(n, |s| s != u && set.contains(s));
    Ok(GalleryGame {
        target: widen(&tr.target),
        buchi: widen(&tr.buchi),
        game,
    })
}

/// Ladder family with `k` levels above the two ⊥ states `w` and `bot`.
///
/// Level 1 is `x1 -> g1`, where the coin `g1` goes to `bot` or to the
/// absorbing `leak`. Level j >= 2 has the Büchi state `x_j` (Max, may drop to
/// `x_{j-1}` or flip the coin `g_j`), the coin `g_j` (back to `x_j` or on to
/// `h_j`) and `h_j` (Max, may drop to `x_{j-1}` or loop). Each level only
/// revisits the Büchi set surely while the level below exists, so the
/// almost-sure Büchi peeling removes one level per round: `k + 1` rounds in
/// all, with `{w, bot}` left. With target `{bot}` every ladder state has
/// value 1/2; `w` may also enter the top level, a value-decreasing move.
pub fn ladder(k: usize) -> GalleryGame {
    assert!(k >= 1, "ladder needs at least one level");
    let mut b = GameBuilder::new();
    let bot = b.state("bot", Owner::Random);
    let w = b.state("w", Owner::Max);
    let leak = b.state("leak", Owner::Random);
    b.prob_edge(bot, bot, int(1)).prob_edge(leak, leak, int(1));
    let mut buchi = vec![bot];
    let x1 = b.state("x1", Owner::Max);
    let g1 = b.state("g1", Owner::Random);
    b.edge(x1, g1);
    b.prob_edge(g1, bot, ratio(1, 2)).prob_edge(g1, leak, ratio(1, 2));
    buchi.push(x1);
    let mut below = x1;
    for j in 2..=k {
        let x = b.state(format!("x{j}"), Owner::Max);
        let g = b.state(format!("g{j}"), Owner::Random);
        let h = b.state(format!("h{j}"), Owner::Max);
        b.edge(x, below).edge(x, g);
        b.prob_edge(g, x, ratio(1, 2)).prob_edge(g, h, ratio(1, 2));
        b.edge(h, below).edge(h, h);
        buchi.push(x);
        below = x;
    }
    b.edge(w, bot).edge(w, below);
    let game = b.build().expect("ladder is well formed");
    let n = game.len();
    GalleryGame {
        target: StateSet::from_ids(n, [bot]),
        buchi: StateSet::from_ids(n, buchi),
        game,
    }
}

/// Gambler's ruin on wealth `0..=cap`: every interior state wins one unit
/// with probability `p` and loses one otherwise. `w0` (ruin) is the target;
/// `w0` and `w{cap}` are absorbing.
pub fn gamblers_ruin(p: &Rational, cap: usize) -> Result<GalleryGame, GalleryError> {
    check_probability(p)?;
    if cap < 1 {
        return Err(GalleryError::TooSmall {
            name: "cap",
            value: cap,
            min: 1,
        });
    }
    let mut b = GameBuilder::new();
    let ids: Vec<StateId> = (0..=cap).map(|w| b.state(format!("w{w}"), Owner::Random)).collect();
    for w in 0..=cap {
        if w == 0 || w == cap {
            b.prob_edge(ids[w], ids[w], int(1));
        } else {
            b.prob_edge(ids[w], ids[w - 1], int(1) - p).prob_edge(ids[w], ids[w + 1], p.clone());
        }
    }
    let game = b.build().expect("gambler's ruin is well formed");
    let n = game.len();
    Ok(GalleryGame {
        target: StateSet::from_ids(n, [ids[0]]),
        buchi: StateSet::from_ids(n, [ids[0]]),
        game,
    })
}

fn check_probability(p: &Rational) -> Result<(), GalleryError> {
    if p.is_zero() || *p >= int(1) || *p < int(0) {
        return Err(GalleryError::BadProbability(crate::rational::format(p)));
    }
    Ok(())
}

/// Gambler's ruin without an upper wealth bound, started at `start`.
#[derive(Debug, Clone)]
pub struct GamblersRuin {
    p: Rational,
    start: u64,
}

impl GamblersRuin {
    /// Panics unless `0 < p < 1`.
    pub fn unbounded(p: Rational, start: u64) -> Self {
        check_probability(&p).expect("win probability");
        GamblersRuin { p, start }
    }
}

impl LazyGame for GamblersRuin {
    type State = u64;

    fn initial(&self) -> u64 {
        self.start
    }

    fn expand(&self, &w: &u64) -> Expansion<u64> {
        let (successors, weights) = if w == 0 {
            (vec![0], vec![Rational::one()])
        } else {
            (vec![w - 1, w + 1], vec![int(1) - &self.p, self.p.clone()])
        };
        Expansion {
            owner: Owner::Random,
            successors,
            weights: Some(weights),
            target: w == 0,
            buchi: w == 0,
        }
    }

    fn name(&self, w: &u64) -> String {
        format!("w{w}")
    }

    fn branching_bound(&self) -> Option<usize> {
        Some(2)
    }
}

/// Seeded random game on `n` states with a reachability target and a Büchi
/// set. Every state gets one to three successors; random weights have
/// small denominators. The number of memoryless
/// deterministic strategy pairs stays at most 4096.
pub fn random_game(seed: u64, n: usize) -> (Game, StateSet, StateSet) {
    assert!(n >= 2, "random games need at least two states");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let owners: Vec<Owner> = (0..n)
        .map(|_| match rng.gen_range(0..3) {
            0 => Owner::Max,
            1 => Owner::Min,
            _ => Owner::Random,
        })
        .collect();
    let mut b = GameBuilder::new();
    for (i, o) in owners.iter().enumerate() {
        b.state(format!("q{i}"), *o);
    }
    let mut pairs: u64 = 1;
    for (i, &o) in owners.iter().enumerate() {
        let s = StateId(i);
        let want: usize = rng.gen_range(1..=3);
        let mut succ: Vec<StateId> = Vec::new();
        while succ.len() < want.min(n) {
            let t = StateId(rng.gen_range(0..n));
            if !succ.contains(&t) {
                succ.push(t);
            }
        }
        if o != Owner::Random {
            while pairs * succ.len() as u64 > 4096 {
                succ.pop();
            }
            pairs *= succ.len() as u64;
            for t in succ {
                b.edge(s, t);
            }
        } else {
            let raw: Vec<i64> = succ.iter().map(|_| rng.gen_range(1..=4)).collect();
            let total: i64 = raw.iter().sum();
            for (t, w) in succ.into_iter().zip(raw) {
                b.prob_edge(s, t, ratio(w, total));
            }
        }
    }
    let game = b.build().expect("random games are well formed");
    let mut target = StateSet::empty(n);
    target.insert(StateId(rng.gen_range(0..n)));
    if rng.gen_bool(0.5) {
        target.insert(StateId(rng.gen_range(0..n)));
    }
    let mut buchi = StateSet::empty(n);
    for s in 0..n {
        if rng.gen_bool(0.3) {
            buchi.insert(StateId(s));
        }
    }
    (game, target, buchi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qualitative::almost_sure_buchi;
    use crate::valuation::solve_reach;

    #[test]
    fn gallery_games_validate() {
        for depth in 0..=14 {
            for mode in [SinkMode::Pessimistic, SinkMode::Optimistic] {
                assert!(fig2(depth, mode).unwrap().game.validate().is_empty());
            }
            if depth >= 4 {
                assert!(fig2_with_u(depth).unwrap().game.validate().is_empty());
            }
            if depth >= 1 {
                assert!(ladder(depth).game.validate().is_empty());
                assert!(gamblers_ruin(&ratio(3, 5), depth).unwrap().game.validate().is_empty());
            }
        }
        assert!(fig2_with_u(3).is_err());
        assert!(gamblers_ruin(&int(1), 5).is_err());
    }

    #[test]
    fn ladder_values() {
        for k in 1..=5 {
            let lg = ladder(k);
            let v = solve_reach(&lg.game, &lg.target).values;
            for s in lg.game.states() {
                let expected = match lg.game.name(s) {
                    "bot" | "w" => int(1),
                    "leak" => int(0),
                    _ => ratio(1, 2),
                };
                assert_eq!(v[s.index()], expected, "{}", lg.game.name(s));
            }
            let p = almost_sure_buchi(&lg.game, &lg.buchi);
            assert_eq!(p.partition.rounds, k + 1);
            let x1 = lg.game.id("x1").unwrap();
            assert_eq!(p.partition.index[x1.index()], Some(0));
            let top = lg.game.id(&format!("x{k}")).unwrap();
            assert_eq!(p.partition.index[top.index()], Some(k - 1));
        }
    }

    #[test]
    fn ruin_values_symmetric_walk() {
        let g = gamblers_ruin(&ratio(1, 2), 10).unwrap();
        let v = solve_reach(&g.game, &g.target).values;
        for (w, x) in v.iter().enumerate() {
            assert_eq!(*x, int(1) - ratio(w as i64, 10));
        }
    }

    #[test]
    fn u_choices() {
        let g = fig2_with_u(8).unwrap();
        let v = solve_reach(&g.game, &g.target).values;
        let u = g.game.id("u").unwrap();
        let s0 = g.game.id("s0").unwrap();
        assert_eq!(v[u.index()], v[s0.index()]);
        assert_eq!(v[s0.index()], int(1) - pow2_neg(6));
    }

    #[test]
    fn random_games_are_reproducible_and_bounded() {
        for seed in 0..50 {
            let (a, ta, ba) = random_game(seed, 12);
            let (b, tb, bb) = random_game(seed, 12);
            assert_eq!((a.clone(), ta, ba), (b, tb, bb));
            let pairs: usize = a
                .states()
                .filter(|s| a.owner(*s) != Owner::Random)
                .map(|s| a.successors(s).len())
                .product();
            assert!(pairs <= 4096);
        }
    }
}
