//! Finite turn-based stochastic games.
//!
//! States are dense indices into per-state tables. Every state has an ordered,
//! duplicate-free successor list; random states additionally carry exact
//! rational weights aligned with that list. Successor order is significant:
//! every tie-break in the solvers picks the first candidate in list order.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed};

use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Who resolves the choice at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    Max,
    Min,
    Random,
}

impl Owner {
    pub fn keyword(self) -> &'static str {
        match self {
            Owner::Max => "max",
            Owner::Min => "min",
            Owner::Random => "rand",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Owner> {
        match s {
            "max" => Some(Owner::Max),
            "min" => Some(Owner::Min),
            "rand" => Some(Owner::Random),
            _ => None,
        }
    }
}

/// One of the two strategic players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Max,
    Min,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Max => Player::Min,
            Player::Min => Player::Max,
        }
    }

    pub fn owner(self) -> Owner {
        match self {
            Player::Max => Owner::Max,
            Player::Min => Owner::Min,
        }
    }

    pub fn keyword(self) -> &'static str {
        self.owner().keyword()
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A set of states of one particular game, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct StateSet {
    bits: Vec<bool>,
}

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet { bits: vec![false; n] }
    }

    pub fn full(n: usize) -> Self {
        StateSet { bits: vec![true; n] }
    }

    pub fn from_ids(n: usize, ids: impl IntoIterator<Item = StateId>) -> Self {
        let mut set = StateSet::empty(n);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn from_fn(n: usize, f: impl Fn(StateId) -> bool) -> Self {
        StateSet {
            bits: (0..n).map(|i| f(StateId(i))).collect(),
        }
    }

    /// Number of states of the game this set belongs to.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn contains(&self, s: StateId) -> bool {
        self.bits.get(s.0).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, s: StateId) -> bool {
        if s.0 >= self.bits.len() {
            self.bits.resize(s.0 + 1, false);
        }
        !std::mem::replace(&mut self.bits[s.0], true)
    }

    pub fn remove(&mut self, s: StateId) -> bool {
        match self.bits.get_mut(s.0) {
            Some(b) => std::mem::replace(b, false),
            None => false,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| StateId(i))
    }

    pub fn complement(&self) -> StateSet {
        StateSet {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let n = self.bits.len().max(other.bits.len());
        StateSet::from_fn(n, |s| self.contains(s) || other.contains(s))
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let n = self.bits.len().max(other.bits.len());
        StateSet::from_fn(n, |s| self.contains(s) && other.contains(s))
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        StateSet::from_fn(self.bits.len(), |s| self.contains(s) && !other.contains(s))
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.iter().all(|s| other.contains(s))
    }

    pub fn is_disjoint(&self, other: &StateSet) -> bool {
        self.iter().all(|s| !other.contains(s))
    }
}

/// A broken game invariant, reported by [`Game::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DeadEnd { state: StateId },
    DanglingSuccessor { state: StateId, successor: StateId },
    DuplicateEdge { state: StateId, successor: StateId },
    NonPositiveWeight { state: StateId, successor: StateId, weight: Rational },
    WeightSum { state: StateId, sum: Rational },
    WeightCount { state: StateId, successors: usize, weights: usize },
    WeightOnOwnedState { state: StateId },
}

impl Violation {
    pub fn state(&self) -> StateId {
        match self {
            Violation::DeadEnd { state }
            | Violation::DanglingSuccessor { state, .. }
            | Violation::DuplicateEdge { state, .. }
            | Violation::NonPositiveWeight { state, .. }
            | Violation::WeightSum { state, .. }
            | Violation::WeightCount { state, .. }
            | Violation::WeightOnOwnedState { state } => *state,
        }
    }

    /// Human-readable description using the game's state names.
    pub fn describe(&self, game: &Game) -> String {
        let name = |s: StateId| {
            if s.0 < game.len() {
                game.name(s).to_string()
            } else {
                s.to_string()
            }
        };
        match self {
            Violation::DeadEnd { state } => format!("state {} has no successor", name(*state)),
            Violation::DanglingSuccessor { state, successor } => {
                format!("state {} has an edge to unknown state {}", name(*state), successor)
            }
            Violation::DuplicateEdge { state, successor } => format!(
                "state {} lists successor {} more than once",
                name(*state),
                name(*successor)
            ),
            Violation::NonPositiveWeight { state, successor, weight } => format!(
                "random state {} has non-positive weight {} on edge to {}",
                name(*state),
                rational::format(weight),
                name(*successor)
            ),
            Violation::WeightSum { state, sum } => format!(
                "weights of random state {} sum to {}, expected 1/1",
                name(*state),
                rational::format(sum)
            ),
            Violation::WeightCount { state, successors, weights } => format!(
                "random state {} has {} successors but {} weights",
                name(*state),
                successors,
                weights
            ),
            Violation::WeightOnOwnedState { state } => {
                format!("player state {} carries probability weights", name(*state))
            }
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum GameError {
    #[error("invalid game: {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),
    #[error("duplicate state name `{0}`")]
    DuplicateName(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
}

/// A finite turn-based stochastic game graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    names: Vec<String>,
    by_name: HashMap<String, StateId>,
    owners: Vec<Owner>,
    succ: Vec<Vec<StateId>>,
    weights: Vec<Vec<Rational>>,
}

impl Game {
    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.len()).map(StateId)
    }

    pub fn owner(&self, s: StateId) -> Owner {
        self.owners[s.0]
    }

    pub fn successors(&self, s: StateId) -> &[StateId] {
        &self.succ[s.0]
    }

    /// Weights aligned with [`Game::successors`]; empty for player states.
    pub fn weights(&self, s: StateId) -> &[Rational] {
        &self.weights[s.0]
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s.0]
    }

    pub fn id(&self, name: &str) -> Option<StateId> {
        self.by_name.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<StateId, GameError> {
        self.id(name).ok_or_else(|| GameError::UnknownState(name.to_string()))
    }

    pub fn ids<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<StateSet, GameError> {
        let mut set = StateSet::empty(self.len());
        for n in names {
            set.insert(self.require(n)?);
        }
        Ok(set)
    }

    pub fn states_of(&self, owner: Owner) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(move |s| self.owner(*s) == owner)
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, s: StateId, t: StateId) -> bool {
        self.succ[s.0].contains(&t)
    }

    /// All edges in state order, then successor-list order.
    pub fn edges(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.states()
            .flat_map(move |s| self.successors(s).iter().map(move |t| (s, *t)))
    }

    /// Outgoing distribution of a random state as `(successor, weight)` pairs.
    pub fn distribution(&self, s: StateId) -> impl Iterator<Item = (StateId, &Rational)> + '_ {
        self.succ[s.0].iter().copied().zip(self.weights[s.0].iter())
    }

    /// Predecessor lists, in increasing source order.
    pub fn predecessors(&self) -> Vec<Vec<StateId>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (s, t) in self.edges() {
            if t.0 < self.len() {
                pred[t.0].push(s);
            }
        }
        pred
    }

    /// A state whose only successor is itself.
    pub fn is_absorbing(&self, s: StateId) -> bool {
        self.succ[s.0] == [s]
    }

    /// Checks every structural invariant; an empty list means the game is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for s in self.states() {
            let succ = &self.succ[s.0];
            if succ.is_empty() {
                out.push(Violation::DeadEnd { state: s });
            }
            let mut seen = Vec::with_capacity(succ.len());
            for &t in succ {
                if t.0 >= self.len() {
                    out.push(Violation::DanglingSuccessor { state: s, successor: t });
                } else if seen.contains(&t) {
                    out.push(Violation::DuplicateEdge { state: s, successor: t });
                }
                seen.push(t);
            }
            let w = &self.weights[s.0];
            match self.owners[s.0] {
                Owner::Random => {
                    if w.len() != succ.len() {
                        out.push(Violation::WeightCount {
                            state: s,
                            successors: succ.len(),
                            weights: w.len(),
                        });
                        continue;
                    }
                    for (t, p) in succ.iter().zip(w) {
                        if !p.is_positive() {
                            out.push(Violation::NonPositiveWeight {
                                state: s,
                                successor: *t,
                                weight: p.clone(),
                            });
                        }
                    }
                    let sum: Rational = w.iter().sum();
                    if !succ.is_empty() && !sum.is_one() {
                        out.push(Violation::WeightSum { state: s, sum });
                    }
                }
                Owner::Max | Owner::Min => {
                    if !w.is_empty() {
                        out.push(Violation::WeightOnOwnedState { state: s });
                    }
                }
            }
        }
        out
    }

    pub fn check(self) -> Result<Game, GameError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(GameError::Invalid(v))
        }
    }

    /// Exchanges the roles of the two players.
    pub fn swap_roles(&self) -> Game {
        let mut g = self.clone();
        for o in &mut g.owners {
            *o = match *o {
                Owner::Max => Owner::Min,
                Owner::Min => Owner::Max,
                Owner::Random => Owner::Random,
            };
        }
        g
    }

    /// Keeps only player edges for which `keep` holds. Random states are
    /// untouched. May create dead ends.
    pub fn filter_player_edges(&self, mut keep: impl FnMut(StateId, StateId) -> bool) -> Game {
        let mut g = self.clone();
        for s in self.states() {
            if self.owner(s) != Owner::Random {
                g.succ[s.0].retain(|t| keep(s, *t));
            }
        }
        g
    }

    /// Restriction to `alive`, keeping state indices. Player edges leaving
    /// `alive` are dropped, and every state outside `alive` becomes an
    /// isolated absorbing state. Random states in `alive` must have all their
    /// successors in `alive`.
    pub fn subgame(&self, alive: &StateSet) -> Game {
        let mut g = self.clone();
        for s in self.states() {
            if !alive.contains(s) {
                g.succ[s.0] = vec![s];
                g.weights[s.0] = if self.owner(s) == Owner::Random {
                    vec![Rational::one()]
                } else {
                    Vec::new()
                };
                continue;
            }
            match self.owner(s) {
                Owner::Random => {
                    debug_assert!(
                        self.succ[s.0].iter().all(|t| alive.contains(*t)),
                        "random state leaves the subgame"
                    );
                }
                _ => g.succ[s.0].retain(|t| alive.contains(*t)),
            }
        }
        g
    }

    /// Replaces the successor list of a player state by the single successor `t`.
    pub fn fix_choice(&mut self, s: StateId, t: StateId) {
        debug_assert!(self.owner(s) != Owner::Random);
        self.succ[s.0] = vec![t];
    }

    /// A player owning some state with at least two successors.
    pub fn is_active(&self, player: Player) -> bool {
        self.states_of(player.owner())
            .any(|s| self.successors(s).len() > 1)
    }

    /// Appends a fresh state; used by solvers that patch dead ends.
    pub(crate) fn push_state(&mut self, name: String, owner: Owner, succ: Vec<StateId>, weights: Vec<Rational>) -> StateId {
        let id = StateId(self.len());
        self.by_name.insert(name.clone(), id);
        self.names.push(name);
        self.owners.push(owner);
        self.succ.push(succ);
        self.weights.push(weights);
        id
    }

    pub(crate) fn set_successors(&mut self, s: StateId, succ: Vec<StateId>, weights: Vec<Rational>) {
        self.succ[s.0] = succ;
        self.weights[s.0] = weights;
    }

    /// Name not used by any state, derived from `base`.
    pub(crate) fn fresh_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.by_name.contains_key(&name) {
            name.push('\'');
        }
        name
    }
}

/// Incremental construction of a [`Game`].
#[derive(Debug, Default, Clone)]
pub struct GameBuilder {
    names: Vec<String>,
    by_name: HashMap<String, StateId>,
    owners: Vec<Owner>,
    succ: Vec<Vec<StateId>>,
    weights: Vec<Vec<Rational>>,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, name: impl Into<String>, owner: Owner) -> Result<StateId, GameError> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(GameError::DuplicateName(name));
        }
        let id = StateId(self.owners.len());
        self.by_name.insert(name.clone(), id);
        self.names.push(name);
        self.owners.push(owner);
        self.succ.push(Vec::new());
        self.weights.push(Vec::new());
        Ok(id)
    }

    /// Adds a state, panicking on a duplicate name. For programmatic builders.
    pub fn state(&mut self, name: impl Into<String>, owner: Owner) -> StateId {
        self.add_state(name, owner).expect("duplicate state name")
    }

    pub fn id(&self, name: &str) -> Option<StateId> {
        self.by_name.get(name).copied()
    }

    pub fn owner(&self, s: StateId) -> Owner {
        self.owners[s.0]
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn edge(&mut self, from: StateId, to: StateId) -> &mut Self {
        self.succ[from.0].push(to);
        self
    }

    pub fn prob_edge(&mut self, from: StateId, to: StateId, p: Rational) -> &mut Self {
        self.succ[from.0].push(to);
        self.weights[from.0].push(p);
        self
    }

    /// Builds without checking invariants; use [`Game::validate`] afterwards.
    pub fn build_unchecked(self) -> Game {
        Game {
            names: self.names,
            by_name: self.by_name,
            owners: self.owners,
            succ: self.succ,
            weights: self.weights,
        }
    }

    pub fn build(self) -> Result<Game, GameError> {
        self.build_unchecked().check()
    }
}
