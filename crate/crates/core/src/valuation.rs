//! Quantitative values of finite games and certified intervals for lazy games.

use num_traits::{One, Signed, Zero};

use crate::chain::Chain;
use crate::game::{Game, Owner, StateId, StateSet};
use crate::graph::{attractor, end_components};
use crate::lazy::{truncate, LazyGame, SinkMode, Truncation, TruncateError};
use crate::objective::ObjectiveKind;
use crate::rational::{self, Rational};
use crate::strategy::synthesis::buchi_md_pair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    /// Exact rationals by policy iteration.
    Exact,
    /// Bounded value iteration in floating point, stopped once the certified
    /// gap between lower and upper iterates is at most `tol`.
    Iterate { tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValueVector {
    Exact(Vec<Rational>),
    /// Approximate values with a sound bound on the sup-norm error.
    Approx { values: Vec<f64>, error_bound: f64 },
}

impl ValueVector {
    pub fn len(&self) -> usize {
        match self {
            ValueVector::Exact(v) => v.len(),
            ValueVector::Approx { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        match self {
            ValueVector::Exact(v) => Some(v),
            ValueVector::Approx { .. } => None,
        }
    }

    /// Exact values; panics on approximate vectors.
    pub fn unwrap_exact(self) -> Vec<Rational> {
        match self {
            ValueVector::Exact(v) => v,
            ValueVector::Approx { .. } => panic!("approximate value vector"),
        }
    }

    pub fn error_bound(&self) -> f64 {
        match self {
            ValueVector::Exact(_) => 0.0,
            ValueVector::Approx { error_bound, .. } => *error_bound,
        }
    }

    pub fn get_f64(&self, s: StateId) -> f64 {
        match self {
            ValueVector::Exact(v) => rational::to_f64(&v[s.index()]),
            ValueVector::Approx { values, .. } => values[s.index()],
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get_f64(StateId(i))).collect()
    }

    /// `p/q` for exact entries, 12 significant digits otherwise.
    pub fn render(&self, s: StateId) -> String {
        match self {
            ValueVector::Exact(v) => rational::format(&v[s.index()]),
            ValueVector::Approx { values, .. } => format_float(values[s.index()]),
        }
    }

    /// Statewise `1 - v`, keeping the error bound.
    pub fn complement(&self) -> ValueVector {
        match self {
            ValueVector::Exact(v) => ValueVector::Exact(v.iter().map(|x| Rational::one() - x).collect()),
            ValueVector::Approx { values, error_bound } => ValueVector::Approx {
                values: values.iter().map(|x| 1.0 - x).collect(),
                error_bound: *error_bound,
            },
        }
    }
}

/// Formats with 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = 12 - 1 - x.abs().log10().floor() as i32;
    let s = format!("{:.*}", digits.max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValuationError {
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("epsilon must be positive")]
    BadEpsilon,
    #[error("value iteration stopped after {iterations} iterations with gap {gap}")]
    NotConverged { iterations: usize, gap: f64 },
    #[error("objective {0} is not supported here")]
    Unsupported(ObjectiveKind),
    #[error(transparent)]
    Truncate(#[from] TruncateError),
}

/// Exact reach values with the optimal strategy pair found by policy iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachSolution {
    pub values: Vec<Rational>,
    /// Successor chosen at every Max state (first successor elsewhere).
    pub max_choice: Vec<StateId>,
    /// Best response of Min to `max_choice` (first successor elsewhere).
    pub min_choice: Vec<StateId>,
}

/// One application of the reachability Bellman operator.
pub fn bellman_step(game: &Game, target: &StateSet, v: &ValueVector) -> ValueVector {
    match v {
        ValueVector::Exact(x) => ValueVector::Exact(step_exact(game, target, x)),
        ValueVector::Approx { values, error_bound } => ValueVector::Approx {
            values: step_f64(game, target, values, &float_weights(game)),
            error_bound: *error_bound,
        },
    }
}

fn indicator(game: &Game, target: &StateSet) -> Vec<Rational> {
    game.states()
        .map(|s| if target.contains(s) { Rational::one() } else { Rational::zero() })
        .collect()
}

/// Max/min/average over successors, ignoring target membership of `s`.
fn one_step(game: &Game, s: StateId, v: &[Rational]) -> Rational {
    let succ = game.successors(s);
    match game.owner(s) {
        Owner::Max => succ.iter().map(|t| &v[t.index()]).max().cloned().unwrap_or_default(),
        Owner::Min => succ.iter().map(|t| &v[t.index()]).min().cloned().unwrap_or_default(),
        Owner::Random => game.distribution(s).map(|(t, p)| p * &v[t.index()]).sum(),
    }
}

fn step_exact(game: &Game, target: &StateSet, v: &[Rational]) -> Vec<Rational> {
    game.states()
        .map(|s| if target.contains(s) { Rational::one() } else { one_step(game, s, v) })
        .collect()
}

fn float_weights(game: &Game) -> Vec<Vec<f64>> {
    game.states()
        .map(|s| game.weights(s).iter().map(rational::to_f64).collect())
        .collect()
}

fn one_step_f64(game: &Game, s: StateId, v: &[f64], w: &[Vec<f64>]) -> f64 {
    let succ = game.successors(s);
    match game.owner(s) {
        Owner::Max => succ.iter().map(|t| v[t.index()]).fold(0.0, f64::max),
        Owner::Min => succ.iter().map(|t| v[t.index()]).fold(1.0, f64::min),
        Owner::Random => succ.iter().zip(&w[s.index()]).map(|(t, p)| p * v[t.index()]).sum(),
    }
}

fn step_f64(game: &Game, target: &StateSet, v: &[f64], w: &[Vec<f64>]) -> Vec<f64> {
    game.states()
        .map(|s| if target.contains(s) { 1.0 } else { one_step_f64(game, s, v, w) })
        .collect()
}

/// Exact reachability values and strategies by policy iteration.
///
/// Max switches only on strict improvement, to the first best successor;
/// each Max strategy is evaluated against Min's exact best response.
pub fn solve_reach(game: &Game, target: &StateSet) -> ReachSolution {
    let mut sigma: Vec<StateId> = game.states().map(|s| game.successors(s)[0]).collect();
    loop {
        let (values, pi) = min_best_response(game, target, &sigma);
        let mut changed = false;
        for s in game.states_of(Owner::Max) {
            if target.contains(s) {
                continue;
            }
            let best = one_step(game, s, &values);
            if best > values[sigma[s.index()].index()] {
                sigma[s.index()] = first_with_value(game, s, &values, &best);
                changed = true;
            }
        }
        if !changed {
            return ReachSolution {
                values,
                max_choice: sigma,
                min_choice: pi,
            };
        }
    }
}

fn first_with_value(game: &Game, s: StateId, v: &[Rational], x: &Rational) -> StateId {
    *game
        .successors(s)
        .iter()
        .find(|t| v[t.index()] == *x)
        .expect("extremum is attained by a successor")
}

/// Min's optimal response to a fixed Max strategy, by policy iteration
/// after fixing the states where Min can avoid the target forever.
fn min_best_response(game: &Game, target: &StateSet, sigma: &[StateId]) -> (Vec<Rational>, Vec<StateId>) {
    let n = game.len();
    let mut avoid = StateSet::from_fn(n, |s| !target.contains(s));
    loop {
        let mut changed = false;
        for s in avoid.clone().iter() {
            let succ = game.successors(s);
            let keep = match game.owner(s) {
                Owner::Max => avoid.contains(sigma[s.index()]),
                Owner::Random => succ.iter().all(|t| avoid.contains(*t)),
                Owner::Min => succ.iter().any(|t| avoid.contains(*t)),
            };
            if !keep {
                avoid.remove(s);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut pi: Vec<StateId> = game
        .states()
        .map(|s| {
            let succ = game.successors(s);
            if game.owner(s) == Owner::Min && avoid.contains(s) {
                *succ.iter().find(|t| avoid.contains(**t)).expect("avoid set is closed")
            } else {
                succ[0]
            }
        })
        .collect();
    let mask: Vec<bool> = game.states().map(|s| target.contains(s)).collect();
    loop {
        let chain = Chain::induced(game, |s| match game.owner(s) {
            Owner::Max => sigma[s.index()],
            _ => pi[s.index()],
        });
        let values = chain.reach_probabilities(&mask);
        let mut changed = false;
        for s in game.states_of(Owner::Min) {
            if target.contains(s) || avoid.contains(s) {
                continue;
            }
            let best = one_step(game, s, &values);
            if best < values[pi[s.index()].index()] {
                pi[s.index()] = first_with_value(game, s, &values, &best);
                changed = true;
            }
        }
        if !changed {
            return (values, pi);
        }
    }
}

const MAX_ITERATIONS: usize = 2_000_000;
const TIE: f64 = 1e-12;

/// Bounded value iteration: lower iterates from the target indicator, upper
/// iterates from 1 on the positive-reach region, with end components deflated
/// so the upper bound cannot get stuck above the true value.
fn iterate_reach(game: &Game, target: &StateSet, tol: f64) -> Result<ValueVector, ValuationError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(ValuationError::BadTolerance(tol));
    }
    let n = game.len();
    let (positive, _) = attractor(game, target, Owner::Max);
    let w = float_weights(game);
    let mut lo: Vec<f64> = game.states().map(|s| if target.contains(s) { 1.0 } else { 0.0 }).collect();
    let mut hi: Vec<f64> = game.states().map(|s| if positive.contains(s) { 1.0 } else { 0.0 }).collect();
    let open = StateSet::from_fn(n, |s| positive.contains(s) && !target.contains(s));
    let mut gap = 1.0;
    for it in 0..MAX_ITERATIONS {
        gap = open.iter().map(|s| hi[s.index()] - lo[s.index()]).fold(0.0, f64::max);
        if gap <= tol {
            return Ok(ValueVector::Approx {
                values: lo,
                error_bound: gap,
            });
        }
        lo = step_f64(game, target, &lo, &w);
        let mut next = step_f64(game, target, &hi, &w);
        for s in game.states() {
            if !positive.contains(s) {
                next[s.index()] = 0.0;
            }
            // keep the upper iterates monotone against rounding
            next[s.index()] = next[s.index()].min(hi[s.index()]);
        }
        hi = next;
        if it % deflate_period(n) == 0 {
            deflate(game, &open, &lo, &mut hi);
        }
    }
    Err(ValuationError::NotConverged {
        iterations: MAX_ITERATIONS,
        gap,
    })
}

fn deflate_period(n: usize) -> usize {
    if n <= 256 {
        1
    } else {
        16
    }
}

fn deflate(game: &Game, open: &StateSet, lo: &[f64], hi: &mut [f64]) {
    let optimal_for_min = |s: StateId, t: StateId| {
        if game.owner(s) != Owner::Min {
            return true;
        }
        let best = game.successors(s).iter().map(|u| lo[u.index()]).fold(1.0, f64::min);
        lo[t.index()] <= best + TIE
    };
    for comp in end_components(game, open, optimal_for_min) {
        let mut exit: f64 = 0.0;
        for &s in &comp {
            if game.owner(s) == Owner::Max {
                for t in game.successors(s) {
                    if comp.binary_search(t).is_err() {
                        exit = exit.max(hi[t.index()]);
                    }
                }
            }
        }
        for s in comp {
            hi[s.index()] = hi[s.index()].min(exit);
        }
    }
}

/// Reachability values.
pub fn value_reach(game: &Game, target: &StateSet, mode: SolveMode) -> Result<ValueVector, ValuationError> {
    match mode {
        SolveMode::Exact => Ok(ValueVector::Exact(solve_reach(game, target).values)),
        SolveMode::Iterate { tol } => iterate_reach(game, target, tol),
    }
}

/// Safety values, as the complement of the opponent's reach values.
pub fn value_safety(game: &Game, target: &StateSet, mode: SolveMode) -> Result<ValueVector, ValuationError> {
    Ok(value_reach(&game.swap_roles(), target, mode)?.complement())
}

/// Exactly `n` Bellman steps from the target indicator.
pub fn value_reach_within(game: &Game, target: &StateSet, n: usize) -> Vec<Rational> {
    let mut v = indicator(game, target);
    for _ in 0..n {
        v = step_exact(game, target, &v);
    }
    v
}

/// Least `n` with `value_reach_within(n)(s) > value_reach(s) - eps`.
pub fn epsilon_horizon(game: &Game, target: &StateSet, s: StateId, eps: &Rational) -> Result<usize, ValuationError> {
    if !eps.is_positive() {
        return Err(ValuationError::BadEpsilon);
    }
    let goal = &solve_reach(game, target).values[s.index()] - eps;
    let mut v = indicator(game, target);
    let mut n = 0;
    while v[s.index()] <= goal {
        v = step_exact(game, target, &v);
        n += 1;
    }
    Ok(n)
}

/// Exact reach values and values for reaching the target after at least one step.
pub(crate) fn reach_and_plus(game: &Game, target: &StateSet) -> (Vec<Rational>, Vec<Rational>) {
    let reach = solve_reach(game, target).values;
    let plus = game.states().map(|s| one_step(game, s, &reach)).collect();
    (reach, plus)
}

/// Values for visiting the target after at least one step.
pub fn value_reachplus(game: &Game, target: &StateSet, mode: SolveMode) -> Result<ValueVector, ValuationError> {
    Ok(match value_reach(game, target, mode)? {
        ValueVector::Exact(v) => ValueVector::Exact(game.states().map(|s| one_step(game, s, &v)).collect()),
        ValueVector::Approx { values, error_bound } => {
            let w = float_weights(game);
            ValueVector::Approx {
                values: game.states().map(|s| one_step_f64(game, s, &values, &w)).collect(),
                error_bound,
            }
        }
    })
}

/// Büchi values by strategy improvement for Max.
///
/// Each Max strategy is evaluated exactly against Min's best response: in
/// the resulting Min-only game, Min maximises the probability of reaching an
/// end component that avoids the Büchi set. Max switches only on strict
/// improvement, so the values increase strictly at every switch.
pub fn value_buchi(game: &Game, buchi: &StateSet, mode: SolveMode) -> Result<ValueVector, ValuationError> {
    if let SolveMode::Iterate { tol } = mode {
        if tol.is_nan() || tol <= 0.0 {
            return Err(ValuationError::BadTolerance(tol));
        }
    }
    let sigma = solve_buchi(game, buchi).1;
    let (fixed, escape) = buchi_escape(game, buchi, &sigma);
    Ok(match mode {
        SolveMode::Exact => ValueVector::Exact(solve_reach(&fixed, &escape).values).complement(),
        SolveMode::Iterate { tol } => iterate_reach(&fixed, &escape, tol)?.complement(),
    })
}

/// Exact Büchi values and an optimal Max choice per state.
pub(crate) fn solve_buchi(game: &Game, buchi: &StateSet) -> (Vec<Rational>, Vec<StateId>) {
    // Start from an almost-sure winning strategy on Max's winning region.
    let start = buchi_md_pair(game, buchi).sigma;
    let mut sigma: Vec<StateId> = game
        .states()
        .map(|s| start.choice(s).unwrap_or_else(|| game.successors(s)[0]))
        .collect();
    let mut previous: Option<Vec<Rational>> = None;
    loop {
        let (fixed, escape) = buchi_escape(game, buchi, &sigma);
        let values: Vec<Rational> = solve_reach(&fixed, &escape).values.iter().map(|x| Rational::one() - x).collect();
        if let Some(old) = &previous {
            assert!(
                values.iter().zip(old).all(|(a, b)| a >= b) && values != *old,
                "Büchi strategy improvement must increase the values"
            );
        }
        let mut changed = false;
        for s in game.states_of(Owner::Max) {
            let best = one_step(game, s, &values);
            if best > values[sigma[s.index()].index()] {
                sigma[s.index()] = first_with_value(game, s, &values, &best);
                changed = true;
            }
        }
        if !changed {
            changed = cooperative_switch(game, buchi, &values, &mut sigma);
        }
        if !changed {
            return (values, sigma);
        }
        previous = Some(values);
    }
}

/// Improvement when no single successor is strictly better.
///
/// Max keeps only value-preserving edges and Min's moves to strictly higher
/// values lead to a winning sink. Wherever Max then wins almost surely at a
/// value below 1, Max adopts that winning strategy.
fn cooperative_switch(game: &Game, buchi: &StateSet, values: &[Rational], sigma: &mut [StateId]) -> bool {
    let n = game.len();
    let mut h = game.clone();
    let top = h.push_state(game.fresh_name("top"), Owner::Random, vec![StateId(n)], vec![Rational::one()]);
    for s in game.states() {
        let v = &values[s.index()];
        let keep: Vec<StateId> = game.successors(s).iter().copied().filter(|t| values[t.index()] == *v).collect();
        match game.owner(s) {
            Owner::Max => h.set_successors(s, keep, Vec::new()),
            Owner::Min => {
                let up = game.successors(s).iter().any(|t| values[t.index()] > *v);
                let succ = if up { keep.into_iter().chain([top]).collect() } else { keep };
                h.set_successors(s, succ, Vec::new());
            }
            Owner::Random => {}
        }
    }
    let mut accepting = StateSet::from_fn(n + 1, |s| s.index() < n && buchi.contains(s));
    accepting.insert(top);
    let pair = buchi_md_pair(&h, &accepting);
    let wins = &pair.peeling.partition.max_wins;
    if !game.states().any(|s| wins.contains(s) && !values[s.index()].is_one()) {
        return false;
    }
    for s in game.states_of(Owner::Max) {
        if wins.contains(s) {
            if let Some(t) = pair.sigma.choice(s) {
                sigma[s.index()] = t;
            }
        }
    }
    true
}

/// The game with Max fixed to `sigma` and roles swapped, together with the
/// union of its end components that avoid `buchi`.
fn buchi_escape(game: &Game, buchi: &StateSet, sigma: &[StateId]) -> (Game, StateSet) {
    let mut fixed = game.clone();
    for s in game.states_of(Owner::Max) {
        fixed.fix_choice(s, sigma[s.index()]);
    }
    let outside = StateSet::from_fn(game.len(), |s| !buchi.contains(s));
    let mut escape = StateSet::empty(game.len());
    for comp in end_components(&fixed, &outside, |_, _| true) {
        for s in comp {
            escape.insert(s);
        }
    }
    (fixed.swap_roles(), escape)
}

/// Co-Büchi values, as the complement of the opponent's Büchi values.
pub fn value_cobuchi(game: &Game, buchi: &StateSet, mode: SolveMode) -> Result<ValueVector, ValuationError> {
    Ok(value_buchi(&game.swap_roles(), buchi, mode)?.complement())
}

/// Values of any objective kind. Bounded reachability is always exact.
pub fn value(game: &Game, kind: ObjectiveKind, target: &StateSet, mode: SolveMode) -> Result<ValueVector, ValuationError> {
    match kind {
        ObjectiveKind::Reach => value_reach(game, target, mode),
        ObjectiveKind::ReachWithin(n) => Ok(ValueVector::Exact(value_reach_within(game, target, n))),
        ObjectiveKind::ReachPlus => value_reachplus(game, target, mode),
        ObjectiveKind::Safety => value_safety(game, target, mode),
        ObjectiveKind::Buchi => value_buchi(game, target, mode),
        ObjectiveKind::CoBuchi => value_cobuchi(game, target, mode),
    }
}

/// Certified bounds for a lazy game from a pair of truncations.
#[derive(Debug, Clone)]
pub struct IntervalValues {
    pub depth: usize,
    pub kind: ObjectiveKind,
    pub lower: ValueVector,
    pub upper: ValueVector,
    /// The pessimistic truncation; both truncations share its state indices.
    pub truncation: Truncation,
}

impl IntervalValues {
    pub fn initial(&self) -> (Rational, Rational) {
        let i = self.truncation.initial.index();
        let l = self.lower.exact().expect("exact bounds")[i].clone();
        let u = self.upper.exact().expect("exact bounds")[i].clone();
        (l, u)
    }

    pub fn at(&self, name: &str) -> Option<(Rational, Rational)> {
        let s = self.truncation.state(name)?.index();
        Some((self.lower.exact()?[s].clone(), self.upper.exact()?[s].clone()))
    }
}

/// Exact lower and upper bounds at every expanded state.
///
/// The lower bound uses the sink that hurts Max: the pessimistic sink for
/// reach and Büchi, the optimistic one for safety and co-Büchi.
pub fn interval_values<L: LazyGame>(base: &L, kind: ObjectiveKind, depth: usize) -> Result<IntervalValues, ValuationError> {
    let pess = truncate(base, depth, SinkMode::Pessimistic)?;
    let opt = truncate(base, depth, SinkMode::Optimistic)?;
    let solve = |t: &Truncation| -> Result<ValueVector, ValuationError> {
        match kind {
            ObjectiveKind::Reach | ObjectiveKind::Safety => value(&t.game, kind, &t.target, SolveMode::Exact),
            ObjectiveKind::Buchi | ObjectiveKind::CoBuchi => value(&t.game, kind, &t.buchi, SolveMode::Exact),
            k => Err(ValuationError::Unsupported(k)),
        }
    };
    let (lower, upper) = match kind {
        ObjectiveKind::Reach | ObjectiveKind::Buchi => (solve(&pess)?, solve(&opt)?),
        _ => (solve(&opt)?, solve(&pess)?),
    };
    Ok(IntervalValues {
        depth,
        kind,
        lower,
        upper,
        truncation: pess,
    })
}
