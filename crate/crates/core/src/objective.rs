//! Objectives over a target set, their finite-prefix verdicts and duals.

use std::fmt;
use std::str::FromStr;

use crate::game::{Game, StateId, StateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    Reach,
    /// Visit the target at some position `<= n` (position 0 is the start).
    ReachWithin(usize),
    /// Visit the target after at least one step.
    ReachPlus,
    Safety,
    Buchi,
    CoBuchi,
}

impl ObjectiveKind {
    /// Objectives whose undecided prefixes count as failures in estimates.
    pub fn is_reach_like(self) -> bool {
        matches!(
            self,
            ObjectiveKind::Reach | ObjectiveKind::ReachWithin(_) | ObjectiveKind::ReachPlus
        )
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveKind::Reach => f.write_str("reach"),
            ObjectiveKind::ReachWithin(n) => write!(f, "reach<={n}"),
            ObjectiveKind::ReachPlus => f.write_str("reachplus"),
            ObjectiveKind::Safety => f.write_str("safety"),
            ObjectiveKind::Buchi => f.write_str("buchi"),
            ObjectiveKind::CoBuchi => f.write_str("cobuchi"),
        }
    }
}

impl FromStr for ObjectiveKind {
    type Err = ObjectiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s {
            "reach" => ObjectiveKind::Reach,
            "reachplus" => ObjectiveKind::ReachPlus,
            "safety" => ObjectiveKind::Safety,
            "buchi" => ObjectiveKind::Buchi,
            "cobuchi" => ObjectiveKind::CoBuchi,
            _ => {
                let n = s
                    .strip_prefix("reach<=")
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| ObjectiveError::UnknownKind(s.to_string()))?;
                ObjectiveKind::ReachWithin(n)
            }
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ObjectiveError {
    #[error("unknown objective `{0}`")]
    UnknownKind(String),
    #[error("objective {0} has no dual")]
    NoDual(ObjectiveKind),
    #[error("target mentions state #{state} but the game has {states} states")]
    TargetOutOfRange { state: usize, states: usize },
    #[error("play prefix is empty")]
    EmptyPrefix,
    #[error("play prefix uses a missing edge {0} -> {1}")]
    NotAnEdge(StateId, StateId),
}

/// An objective kind together with its target set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub target: StateSet,
}

impl Objective {
    pub fn new(kind: ObjectiveKind, target: StateSet) -> Self {
        Objective { kind, target }
    }

    /// Reach <-> Safety and Büchi <-> co-Büchi over the same target.
    pub fn dual(&self) -> Result<Objective, ObjectiveError> {
        let kind = match self.kind {
            ObjectiveKind::Reach => ObjectiveKind::Safety,
            ObjectiveKind::Safety => ObjectiveKind::Reach,
            ObjectiveKind::Buchi => ObjectiveKind::CoBuchi,
            ObjectiveKind::CoBuchi => ObjectiveKind::Buchi,
            k => return Err(ObjectiveError::NoDual(k)),
        };
        Ok(Objective::new(kind, self.target.clone()))
    }

    /// Attaches the objective to a game, checking the target fits.
    pub fn bind<'g>(&self, game: &'g Game) -> Result<BoundObjective<'g>, ObjectiveError> {
        if let Some(s) = self.target.iter().find(|s| s.index() >= game.len()) {
            return Err(ObjectiveError::TargetOutOfRange {
                state: s.index(),
                states: game.len(),
            });
        }
        let target = StateSet::from_fn(game.len(), |s| self.target.contains(s));
        let live = graph_can_reach(game, &target);
        Ok(BoundObjective {
            game,
            kind: self.kind,
            target,
            live,
        })
    }
}

/// States with some path into `target` in the game graph.
pub(crate) fn graph_can_reach(game: &Game, target: &StateSet) -> StateSet {
    let pred = game.predecessors();
    let mut seen = target.clone();
    let mut stack: Vec<StateId> = target.iter().collect();
    while let Some(t) = stack.pop() {
        for &s in &pred[t.index()] {
            if seen.insert(s) {
                stack.push(s);
            }
        }
    }
    seen
}

/// A finite play prefix checked against the edges of a game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayPrefix {
    states: Vec<StateId>,
}

impl PlayPrefix {
    pub fn new(game: &Game, states: Vec<StateId>) -> Result<Self, ObjectiveError> {
        if states.is_empty() {
            return Err(ObjectiveError::EmptyPrefix);
        }
        for w in states.windows(2) {
            if !game.has_edge(w[0], w[1]) {
                return Err(ObjectiveError::NotAnEdge(w[0], w[1]));
            }
        }
        Ok(PlayPrefix { states })
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    SatisfiedForever,
    ViolatedForever,
    Undecided,
}

/// An objective attached to a particular game.
#[derive(Debug, Clone)]
pub struct BoundObjective<'g> {
    game: &'g Game,
    kind: ObjectiveKind,
    target: StateSet,
    /// States from which the target is still reachable in the graph.
    live: StateSet,
}

impl<'g> BoundObjective<'g> {
    pub fn game(&self) -> &'g Game {
        self.game
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    pub fn target(&self) -> &StateSet {
        &self.target
    }

    pub fn decided(&self, prefix: &PlayPrefix) -> Verdict {
        let mut m = self.monitor();
        let mut v = Verdict::Undecided;
        for &s in prefix.states() {
            v = m.step(s);
        }
        v
    }

    pub fn monitor(&self) -> Monitor<'_, 'g> {
        Monitor {
            obj: self,
            position: 0,
            hit: false,
            verdict: Verdict::Undecided,
        }
    }

    fn absorbing(&self, s: StateId) -> bool {
        self.game.is_absorbing(s)
    }
}

/// Incremental verdict computation, one state at a time.
#[derive(Debug, Clone)]
pub struct Monitor<'a, 'g> {
    obj: &'a BoundObjective<'g>,
    position: usize,
    hit: bool,
    verdict: Verdict,
}

impl Monitor<'_, '_> {
    /// Feeds the next state of the play and returns the verdict so far.
    pub fn step(&mut self, s: StateId) -> Verdict {
        let pos = self.position;
        self.position += 1;
        if self.verdict != Verdict::Undecided {
            self.hit |= self.obj.target.contains(s);
            return self.verdict;
        }
        let o = self.obj;
        let in_t = o.target.contains(s);
        self.hit |= in_t;
        let live = o.live.contains(s);
        self.verdict = match o.kind {
            ObjectiveKind::Reach => {
                if in_t {
                    Verdict::SatisfiedForever
                } else if !live {
                    Verdict::ViolatedForever
                } else {
                    Verdict::Undecided
                }
            }
            ObjectiveKind::ReachWithin(n) => {
                if in_t && pos <= n {
                    Verdict::SatisfiedForever
                } else if pos >= n || !live {
                    Verdict::ViolatedForever
                } else {
                    Verdict::Undecided
                }
            }
            ObjectiveKind::ReachPlus => {
                if in_t && pos >= 1 {
                    Verdict::SatisfiedForever
                } else if pos == 0 {
                    let g = o.game;
                    if g.successors(s).iter().any(|t| o.live.contains(*t)) {
                        Verdict::Undecided
                    } else {
                        Verdict::ViolatedForever
                    }
                } else if !live {
                    Verdict::ViolatedForever
                } else {
                    Verdict::Undecided
                }
            }
            ObjectiveKind::Safety => {
                if in_t {
                    Verdict::ViolatedForever
                } else if !live {
                    Verdict::SatisfiedForever
                } else {
                    Verdict::Undecided
                }
            }
            ObjectiveKind::Buchi => {
                if o.absorbing(s) {
                    if in_t {
                        Verdict::SatisfiedForever
                    } else {
                        Verdict::ViolatedForever
                    }
                } else if !live {
                    Verdict::ViolatedForever
                } else {
                    Verdict::Undecided
                }
            }
            ObjectiveKind::CoBuchi => {
                if o.absorbing(s) {
                    if in_t {
                        Verdict::ViolatedForever
                    } else {
                        Verdict::SatisfiedForever
                    }
                } else if !live {
                    Verdict::SatisfiedForever
                } else {
                    Verdict::Undecided
                }
            }
        };
        self.verdict
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    /// Number of states fed so far.
    pub fn position(&self) -> usize {
        self.position
    }

    pub fn has_visited_target(&self) -> bool {
        self.hit
    }
}
