//! Brute-force reference solvers.
//!
//! Everything here is deliberately naive and self-contained: dense Gaussian
//! elimination, reachability by explicit search, strongly connected
//! components by mutual reachability. None of it shares code with the
//! production solvers, so agreement between the two is evidence.

use num_traits::{One, Zero};

use crate::game::{Game, Owner, Player, StateId, StateSet};
use crate::objective::{Objective, ObjectiveKind};
use crate::rational::Rational;

/// Largest number of strategy pairs the enumeration oracle accepts.
pub const MAX_PAIRS: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{0} strategy pairs exceed the enumeration bound of {MAX_PAIRS}")]
    TooManyPairs(u128),
    #[error("the oracle does not handle {0} objectives")]
    Unsupported(ObjectiveKind),
    #[error("both players have a choice somewhere; expected a one-player game")]
    BothActive,
}

/// Values of several objectives over one target, by enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleValues {
    pub reach: Vec<Rational>,
    pub safety: Vec<Rational>,
    pub reach_plus: Vec<Rational>,
    pub buchi: Vec<Rational>,
    pub cobuchi: Vec<Rational>,
}

/// Sparse Markov chain: row `s` lists `(t, p)`.
type Rows = Vec<Vec<(usize, Rational)>>;

fn induced(game: &Game, sigma: &[usize], pi: &[usize]) -> Rows {
    game.states()
        .map(|s| match game.owner(s) {
            Owner::Max => vec![(game.successors(s)[sigma[s.index()]].index(), Rational::one())],
            Owner::Min => vec![(game.successors(s)[pi[s.index()]].index(), Rational::one())],
            Owner::Random => game.distribution(s).map(|(t, p)| (t.index(), p.clone())).collect(),
        })
        .collect()
}

/// `reach[s][t]`: t is reachable from s (including s itself).
fn closure(rows: &Rows) -> Vec<Vec<bool>> {
    let n = rows.len();
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(x) = stack.pop() {
                for (y, _) in &rows[x] {
                    if !seen[*y] {
                        seen[*y] = true;
                        stack.push(*y);
                    }
                }
            }
            seen
        })
        .collect()
}

/// Probability of ever reaching `good` in the chain.
fn absorption(rows: &Rows, good: &[bool]) -> Vec<Rational> {
    let n = rows.len();
    let reach = closure(rows);
    let maybe: Vec<usize> = (0..n)
        .filter(|&s| !good[s] && (0..n).any(|t| good[t] && reach[s][t]))
        .collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &s) in maybe.iter().enumerate() {
        pos[s] = i;
    }
    let m = maybe.len();
    // (I - P) x = b over the undecided states, augmented column at index m
    let mut a = vec![vec![Rational::zero(); m + 1]; m];
    for (i, &s) in maybe.iter().enumerate() {
        a[i][i] += Rational::one();
        for (t, p) in &rows[s] {
            if good[*t] {
                a[i][m] += p;
            } else if pos[*t] != usize::MAX {
                a[i][pos[*t]] -= p;
            }
        }
    }
    let x = gauss(a);
    (0..n)
        .map(|s| {
            if good[s] {
                Rational::one()
            } else if pos[s] != usize::MAX {
                x[pos[s]].clone()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

/// Solves a square system given as an augmented matrix; the system must be
/// nonsingular.
fn gauss(mut a: Vec<Vec<Rational>>) -> Vec<Rational> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero()).expect("nonsingular system");
        a.swap(col, pivot);
        let inv = Rational::one() / &a[col][col];
        for x in &mut a[col][col..] {
            *x = &*x * &inv;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= &f * y;
                }
            }
        }
    }
    a.into_iter().map(|row| row[m].clone()).collect()
}

/// States in bottom components of the chain that contain a Büchi state.
fn good_bottoms(rows: &Rows, buchi: &StateSet) -> Vec<bool> {
    let n = rows.len();
    let reach = closure(rows);
    (0..n)
        .map(|s| {
            let bottom = (0..n).all(|t| !reach[s][t] || reach[t][s]);
            bottom && (0..n).any(|t| reach[s][t] && buchi.contains(StateId(t)))
        })
        .collect()
}

/// Mixed-radix enumeration of all choices of one player.
fn choices(game: &Game, owner: Owner) -> Vec<Vec<usize>> {
    let owned: Vec<StateId> = game.states_of(owner).collect();
    let mut all = Vec::new();
    let mut cur = vec![0usize; game.len()];
    loop {
        all.push(cur.clone());
        let mut k = 0;
        loop {
            if k == owned.len() {
                return all;
            }
            let s = owned[k].index();
            cur[s] += 1;
            if cur[s] < game.successors(owned[k]).len() {
                break;
            }
            cur[s] = 0;
            k += 1;
        }
    }
}

fn pair_count(game: &Game) -> u128 {
    game.states()
        .filter(|s| game.owner(*s) != Owner::Random)
        .map(|s| game.successors(s).len() as u128)
        .fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// Max-min values over all memoryless deterministic strategy pairs, with
/// `target` for reachability and safety and `buchi` for the tail objectives.
pub fn md_enumeration_values(game: &Game, target: &StateSet, buchi: &StateSet) -> Result<OracleValues, OracleError> {
    let pairs = pair_count(game);
    if pairs > MAX_PAIRS {
        return Err(OracleError::TooManyPairs(pairs));
    }
    let n = game.len();
    let in_target: Vec<bool> = (0..n).map(|s| target.contains(StateId(s))).collect();
    let sigmas = choices(game, Owner::Max);
    let pis = choices(game, Owner::Min);

    let lowest = |n: usize| vec![Rational::zero(); n];
    let mut best = [lowest(n), lowest(n), lowest(n), lowest(n), lowest(n)];
    for sigma in &sigmas {
        // per state: min over pi of reach, plus, buchi; max over pi of reach, buchi
        let mut worst: [Option<Vec<Rational>>; 5] = Default::default();
        for pi in &pis {
            let rows = induced(game, sigma, pi);
            let reach = absorption(&rows, &in_target);
            let plus: Vec<Rational> = rows
                .iter()
                .map(|row| row.iter().map(|(t, p)| p * &reach[*t]).sum())
                .collect();
            let buchi_v = absorption(&rows, &good_bottoms(&rows, buchi));
            let cands = [&reach, &plus, &buchi_v, &reach, &buchi_v];
            for (k, v) in cands.into_iter().enumerate() {
                let minimize = k < 3;
                match &mut worst[k] {
                    None => worst[k] = Some(v.clone()),
                    Some(w) => {
                        for (a, b) in w.iter_mut().zip(v) {
                            if (minimize && b < a) || (!minimize && b > a) {
                                *a = b.clone();
                            }
                        }
                    }
                }
            }
        }
        for (k, w) in worst.into_iter().enumerate() {
            let w = w.expect("at least one Min strategy");
            for (a, b) in best[k].iter_mut().zip(w) {
                // safety and co-Büchi keep their complements
                let b = if k < 3 { b } else { Rational::one() - b };
                if b > *a {
                    *a = b;
                }
            }
        }
    }
    let [reach, reach_plus, buchi_v, safety, cobuchi] = best;
    Ok(OracleValues {
        reach,
        safety,
        reach_plus,
        buchi: buchi_v,
        cobuchi,
    })
}

/// Enumeration oracle for one objective.
pub fn md_enumeration_oracle(game: &Game, objective: &Objective) -> Result<Vec<Rational>, OracleError> {
    let t = &objective.target;
    let v = md_enumeration_values(game, t, t)?;
    Ok(match objective.kind {
        ObjectiveKind::Reach => v.reach,
        ObjectiveKind::Safety => v.safety,
        ObjectiveKind::ReachPlus => v.reach_plus,
        ObjectiveKind::Buchi => v.buchi,
        ObjectiveKind::CoBuchi => v.cobuchi,
        k @ ObjectiveKind::ReachWithin(_) => return Err(OracleError::Unsupported(k)),
    })
}

/// Maximal end components of the one-player game inside `candidates`.
fn mecs(game: &Game, candidates: &[bool]) -> Vec<bool> {
    let n = game.len();
    let mut alive = candidates.to_vec();
    loop {
        let rows: Rows = game
            .states()
            .map(|s| {
                if alive[s.index()] {
                    game.successors(s)
                        .iter()
                        .filter(|t| alive[t.index()])
                        .map(|t| (t.index(), Rational::one()))
                        .collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let reach = closure(&rows);
        let same = |s: usize, t: usize| reach[s][t] && reach[t][s];
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let succ = game.successors(StateId(s));
            let keep = match game.owner(StateId(s)) {
                Owner::Random => succ.iter().all(|t| alive[t.index()] && same(s, t.index())),
                _ => succ.iter().any(|t| alive[t.index()] && same(s, t.index())),
            };
            if !keep {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            return alive;
        }
    }
}

/// Largest probability the active `owner` can achieve of reaching `goal`,
/// by policy iteration with strict improvement.
fn max_reach(game: &Game, owner: Owner, goal: &[bool]) -> Vec<Rational> {
    let n = game.len();
    let mut choice = vec![0usize; n];
    loop {
        let rows: Rows = game
            .states()
            .map(|s| match game.owner(s) {
                Owner::Random => game.distribution(s).map(|(t, p)| (t.index(), p.clone())).collect(),
                _ => vec![(game.successors(s)[choice[s.index()]].index(), Rational::one())],
            })
            .collect();
        let v = absorption(&rows, goal);
        let mut improved = false;
        for s in game.states_of(owner) {
            let i = s.index();
            if goal[i] {
                continue;
            }
            let cur = &v[game.successors(s)[choice[i]].index()];
            if let Some(k) = game.successors(s).iter().position(|t| v[t.index()] > *cur) {
                choice[i] = k;
                improved = true;
            }
        }
        if !improved {
            return v;
        }
    }
}

fn active(game: &Game, player: Player) -> bool {
    game.states_of(player.owner()).any(|s| game.successors(s).len() > 1)
}

/// Exact Büchi values of a game in which at most one player has choices.
pub fn mdp_buchi_exact(game: &Game, buchi: &StateSet) -> Result<Vec<Rational>, OracleError> {
    let n = game.len();
    let max_active = active(game, Player::Max);
    let min_active = active(game, Player::Min);
    if max_active && min_active {
        return Err(OracleError::BothActive);
    }
    if min_active {
        // Min maximizes the chance of staying outside the Büchi set forever.
        let outside: Vec<bool> = (0..n).map(|s| !buchi.contains(StateId(s))).collect();
        let trap = mecs(game, &outside);
        let v = max_reach(game, Owner::Min, &trap);
        return Ok(v.into_iter().map(|x| Rational::one() - x).collect());
    }
    let comps = mecs(game, &vec![true; n]);
    let rows: Rows = game
        .states()
        .map(|s| {
            if comps[s.index()] {
                game.successors(s).iter().filter(|t| comps[t.index()]).map(|t| (t.index(), Rational::one())).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let reach = closure(&rows);
    // an end component is accepting when it contains a Büchi state
    let accepting: Vec<bool> = (0..n)
        .map(|s| comps[s] && (0..n).any(|t| buchi.contains(StateId(t)) && comps[t] && reach[s][t] && reach[t][s]))
        .collect();
    Ok(max_reach(game, Owner::Max, &accepting))
}
