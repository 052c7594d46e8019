//! Strategy representations and their text formats.
//!
//! An [`MdStrategy`] fixes one successor per owned state. A
//! [`TransducerStrategy`] is a finite-memory randomized strategy: at state
//! `s` in memory mode `m` it draws the successor from `successor(m, s)`, then
//! draws the next mode from `update(m, s)`. Every state of the play, owned or
//! not, updates the memory.

pub mod synthesis;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed};

use crate::game::{Game, Player, StateId};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("{player} strategy chooses {successor} at {state}, which is not an edge")]
    NotAnEdge {
        player: Player,
        state: String,
        successor: String,
    },
    #[error("{player} strategy has no choice at its state {0}", player = .1)]
    Missing(String, Player),
    #[error("{player} strategy chooses at {state}, which it does not own")]
    WrongOwner { player: Player, state: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("distribution for ({mode}, {state}) {problem}")]
    BadDistribution {
        mode: String,
        state: String,
        problem: String,
    },
    #[error("Max has value-decreasing transitions: {}", render_edges(.0))]
    Decreasing(Vec<(String, String)>),
    #[error("threshold {0} is outside [0, 1]")]
    BadThreshold(String),
}

fn render_edges(v: &[(String, String)]) -> String {
    v.iter().map(|(a, b)| format!("{a} -> {b}")).collect::<Vec<_>>().join(", ")
}

/// A memoryless deterministic strategy of one player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdStrategy {
    player: Player,
    choice: Vec<Option<StateId>>,
}

impl MdStrategy {
    /// Checks that `choice` is total on the player's states and uses edges only.
    pub fn new(game: &Game, player: Player, choice: Vec<Option<StateId>>) -> Result<Self, StrategyError> {
        let s = MdStrategy { player, choice };
        s.check(game)?;
        Ok(s)
    }

    pub(crate) fn from_fn(game: &Game, player: Player, mut f: impl FnMut(StateId) -> StateId) -> Self {
        let choice = game
            .states()
            .map(|s| (game.owner(s) == player.owner()).then(|| f(s)))
            .collect();
        MdStrategy { player, choice }
    }

    /// Picks the first successor everywhere.
    pub fn first_choice(game: &Game, player: Player) -> Self {
        Self::from_fn(game, player, |s| game.successors(s)[0])
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn choice(&self, s: StateId) -> Option<StateId> {
        self.choice.get(s.index()).copied().flatten()
    }

    pub fn choices(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.choice
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|t| (StateId(i), t)))
    }

    pub fn check(&self, game: &Game) -> Result<(), StrategyError> {
        for s in game.states() {
            let owned = game.owner(s) == self.player.owner();
            match (owned, self.choice(s)) {
                (true, None) => return Err(StrategyError::Missing(game.name(s).to_string(), self.player)),
                (false, Some(_)) => {
                    return Err(StrategyError::WrongOwner {
                        player: self.player,
                        state: game.name(s).to_string(),
                    })
                }
                (true, Some(t)) if !game.has_edge(s, t) => {
                    return Err(StrategyError::NotAnEdge {
                        player: self.player,
                        state: game.name(s).to_string(),
                        successor: name_or_id(game, t),
                    })
                }
                _ => {}
            }
        }
        if self.choice.len() > game.len() && self.choice[game.len()..].iter().any(Option::is_some) {
            return Err(StrategyError::WrongOwner {
                player: self.player,
                state: "<out of range>".to_string(),
            });
        }
        Ok(())
    }

    /// The game with every owned state restricted to its chosen successor.
    pub fn apply(&self, game: &Game) -> Game {
        let mut g = game.clone();
        for (s, t) in self.choices() {
            g.fix_choice(s, t);
        }
        g
    }

    pub fn to_transducer(&self, game: &Game) -> TransducerStrategy {
        TransducerStrategy {
            player: self.player,
            modes: vec!["m0".to_string()],
            initial: 0,
            update: BTreeMap::new(),
            successor: self
                .choices()
                .filter(|(s, _)| s.index() < game.len())
                .map(|(s, t)| ((0, s), vec![(t, Rational::one())]))
                .collect(),
        }
    }

    /// Recovers the MD strategy from a single-mode Dirac transducer.
    pub fn from_transducer(game: &Game, t: &TransducerStrategy) -> Option<MdStrategy> {
        if t.modes.len() != 1 {
            return None;
        }
        let mut choice = vec![None; game.len()];
        for ((_, s), dist) in &t.successor {
            match dist.as_slice() {
                [(succ, p)] if p.is_one() => choice[s.index()] = Some(*succ),
                _ => return None,
            }
        }
        Some(MdStrategy {
            player: t.player,
            choice,
        })
    }

    pub fn write(&self, game: &Game) -> String {
        let mut out = format!("strategy {} md\n", self.player.keyword());
        for (s, t) in self.choices() {
            let _ = writeln!(out, "choose {} {}", game.name(s), game.name(t));
        }
        out
    }
}

fn name_or_id(game: &Game, s: StateId) -> String {
    if s.index() < game.len() {
        game.name(s).to_string()
    } else {
        s.to_string()
    }
}

/// A finite-memory randomized strategy given as a probabilistic transducer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransducerStrategy {
    pub player: Player,
    pub modes: Vec<String>,
    pub initial: usize,
    /// Memory update on observing a state; absent entries keep the mode.
    pub update: BTreeMap<(usize, StateId), Vec<(usize, Rational)>>,
    /// Successor distribution at an owned state.
    pub successor: BTreeMap<(usize, StateId), Vec<(StateId, Rational)>>,
}

impl TransducerStrategy {
    /// Checks distributions, edges, and that every (mode, owned state) pair
    /// has a successor distribution.
    pub fn check(&self, game: &Game) -> Result<(), StrategyError> {
        let bad = |m: usize, s: StateId, problem: String| StrategyError::BadDistribution {
            mode: self.modes.get(m).cloned().unwrap_or_else(|| m.to_string()),
            state: name_or_id(game, s),
            problem,
        };
        if self.initial >= self.modes.len() {
            return Err(StrategyError::Parse {
                line: 0,
                message: "initial mode out of range".to_string(),
            });
        }
        let check_weights = |m: usize, s: StateId, w: &mut dyn Iterator<Item = &Rational>| {
            let mut sum = Rational::default();
            for p in w {
                if !p.is_positive() {
                    return Err(bad(m, s, format!("has non-positive weight {}", rational::format(p))));
                }
                sum += p;
            }
            if !sum.is_one() {
                return Err(bad(m, s, format!("sums to {}", rational::format(&sum))));
            }
            Ok(())
        };
        for (&(m, s), dist) in &self.update {
            if m >= self.modes.len() || s.index() >= game.len() || dist.iter().any(|(n, _)| *n >= self.modes.len()) {
                return Err(bad(m, s, "mentions an unknown mode or state".to_string()));
            }
            check_weights(m, s, &mut dist.iter().map(|(_, p)| p))?;
        }
        for (&(m, s), dist) in &self.successor {
            if m >= self.modes.len() || s.index() >= game.len() {
                return Err(bad(m, s, "mentions an unknown mode or state".to_string()));
            }
            if game.owner(s) != self.player.owner() {
                return Err(StrategyError::WrongOwner {
                    player: self.player,
                    state: game.name(s).to_string(),
                });
            }
            if let Some((t, _)) = dist.iter().find(|(t, _)| !game.has_edge(s, *t)) {
                return Err(StrategyError::NotAnEdge {
                    player: self.player,
                    state: game.name(s).to_string(),
                    successor: name_or_id(game, *t),
                });
            }
            check_weights(m, s, &mut dist.iter().map(|(_, p)| p))?;
        }
        for s in game.states_of(self.player.owner()) {
            for m in 0..self.modes.len() {
                if !self.successor.contains_key(&(m, s)) {
                    return Err(StrategyError::Missing(
                        format!("{} (mode {})", game.name(s), self.modes[m]),
                        self.player,
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn write(&self, game: &Game) -> String {
        let mut out = format!("strategy {} transducer\n", self.player.keyword());
        let _ = writeln!(out, "modes {}", self.modes.join(" "));
        let _ = writeln!(out, "initial {}", self.modes[self.initial]);
        for ((m, s), dist) in &self.update {
            let _ = write!(out, "update {} {}", self.modes[*m], game.name(*s));
            for (n, p) in dist {
                let _ = write!(out, " {}:{}", self.modes[*n], rational::format(p));
            }
            out.push('\n');
        }
        for ((m, s), dist) in &self.successor {
            let _ = write!(out, "successor {} {}", self.modes[*m], game.name(*s));
            for (t, p) in dist {
                let _ = write!(out, " {}:{}", game.name(*t), rational::format(p));
            }
            out.push('\n');
        }
        out
    }
}

/// Either strategy form, as read from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Md(MdStrategy),
    Transducer(TransducerStrategy),
}

impl Strategy {
    pub fn player(&self) -> Player {
        match self {
            Strategy::Md(s) => s.player,
            Strategy::Transducer(t) => t.player,
        }
    }

    pub fn into_transducer(self, game: &Game) -> TransducerStrategy {
        match self {
            Strategy::Md(s) => s.to_transducer(game),
            Strategy::Transducer(t) => t,
        }
    }
}

fn perr(line: usize, message: impl Into<String>) -> StrategyError {
    StrategyError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses either strategy format against a game and checks it.
pub fn parse_strategy(game: &Game, text: &str) -> Result<Strategy, StrategyError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty strategy file"))?;
    let (player, form) = match header.as_slice() {
        ["strategy", p, f] => {
            let player = match *p {
                "max" => Player::Max,
                "min" => Player::Min,
                _ => return Err(perr(hline, format!("unknown player `{p}`"))),
            };
            (player, *f)
        }
        _ => return Err(perr(hline, "expected `strategy max|min md|transducer`")),
    };
    let state = |line: usize, name: &str| game.id(name).ok_or_else(|| perr(line, format!("unknown state `{name}`")));

    match form {
        "md" => {
            let mut choice = vec![None; game.len()];
            for (line, toks) in lines {
                match toks.as_slice() {
                    ["choose", s, t] => {
                        let s = state(line, s)?;
                        if choice[s.index()].is_some() {
                            return Err(perr(line, format!("second choice for `{}`", game.name(s))));
                        }
                        choice[s.index()] = Some(state(line, t)?);
                    }
                    _ => return Err(perr(line, "expected `choose <state> <successor>`")),
                }
            }
            Ok(Strategy::Md(MdStrategy::new(game, player, choice)?))
        }
        "transducer" => {
            let mut modes: Vec<String> = Vec::new();
            let mut initial = None;
            let mut update = BTreeMap::new();
            let mut successor = BTreeMap::new();
            for (line, toks) in lines {
                let mode = |modes: &[String], name: &str| {
                    modes
                        .iter()
                        .position(|m| m == name)
                        .ok_or_else(|| perr(line, format!("unknown mode `{name}`")))
                };
                let pair = |tok: &str| -> Result<(String, Rational), StrategyError> {
                    let (a, p) = tok
                        .rsplit_once(':')
                        .ok_or_else(|| perr(line, format!("expected `<name>:<p/q>`, got `{tok}`")))?;
                    let p = rational::parse(p).map_err(|e| perr(line, e.to_string()))?;
                    Ok((a.to_string(), p))
                };
                match toks[0] {
                    "modes" if modes.is_empty() && toks.len() > 1 => {
                        modes = toks[1..].iter().map(|s| s.to_string()).collect();
                    }
                    "initial" if toks.len() == 2 => initial = Some(mode(&modes, toks[1])?),
                    "update" if toks.len() >= 4 => {
                        let m = mode(&modes, toks[1])?;
                        let s = state(line, toks[2])?;
                        let mut dist = Vec::new();
                        for tok in &toks[3..] {
                            let (n, p) = pair(tok)?;
                            dist.push((mode(&modes, &n)?, p));
                        }
                        if update.insert((m, s), dist).is_some() {
                            return Err(perr(line, "duplicate update row"));
                        }
                    }
                    "successor" if toks.len() >= 4 => {
                        let m = mode(&modes, toks[1])?;
                        let s = state(line, toks[2])?;
                        let mut dist = Vec::new();
                        for tok in &toks[3..] {
                            let (t, p) = pair(tok)?;
                            dist.push((state(line, &t)?, p));
                        }
                        if successor.insert((m, s), dist).is_some() {
                            return Err(perr(line, "duplicate successor row"));
                        }
                    }
                    _ => return Err(perr(line, format!("unexpected line `{}`", toks.join(" ")))),
                }
            }
            let t = TransducerStrategy {
                player,
                initial: initial.ok_or_else(|| perr(hline, "missing `initial` line"))?,
                modes,
                update,
                successor,
            };
            t.check(game)?;
            Ok(Strategy::Transducer(t))
        }
        other => Err(perr(hline, format!("unknown strategy form `{other}`"))),
    }
}
