//! Monte Carlo estimation of objective probabilities under a strategy pair.
//!
//! Play `k` draws from ChaCha8 seeded with the configured seed on stream `k`,
//! so each play is reproducible on its own and the estimate does not depend
//! on how plays are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::game::{Game, Owner, Player, StateId};
use crate::objective::{BoundObjective, ObjectiveKind, Verdict};
use crate::rational;
use crate::strategy::{StrategyError, TransducerStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub samples: usize,
    /// Maximum number of moves per play.
    pub horizon: usize,
    pub seed: u64,
    /// Trailing window used to score undecided Büchi and co-Büchi plays.
    pub buchi_window: usize,
}

impl SimConfig {
    pub fn new(samples: usize, horizon: usize, seed: u64) -> Self {
        SimConfig {
            samples,
            horizon,
            seed,
            buchi_window: horizon.clamp(1, 100),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub half_width: f64,
    /// Share of plays whose verdict was settled within the horizon.
    pub decided_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("expected a {expected} strategy, got a {got} strategy")]
    OwnerMismatch { expected: Player, got: Player },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("start state #{0} is not in the game")]
    BadStart(usize),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Cumulative distributions as floats, for sampling.
type Table = Vec<Option<Vec<(usize, f64)>>>;

fn cumulative<'a>(dist: impl Iterator<Item = (usize, &'a rational::Rational)>) -> Vec<(usize, f64)> {
    let mut acc = 0.0;
    dist.map(|(t, p)| {
        acc += rational::to_f64(p);
        (t, acc)
    })
    .collect()
}

fn draw(rng: &mut ChaCha8Rng, cdf: &[(usize, f64)]) -> usize {
    let x: f64 = rng.gen::<f64>() * cdf.last().map_or(1.0, |e| e.1);
    cdf.iter().find(|(_, c)| x < *c).unwrap_or(&cdf[cdf.len() - 1]).0
}

/// A transducer compiled into dense lookup tables indexed by `mode * n + s`.
struct Compiled {
    n: usize,
    initial: usize,
    update: Table,
    successor: Table,
}

impl Compiled {
    fn new(game: &Game, t: &TransducerStrategy) -> Self {
        let n = game.len();
        let mut update = vec![None; t.modes.len() * n];
        let mut successor = vec![None; t.modes.len() * n];
        for (&(m, s), d) in &t.update {
            update[m * n + s.index()] = Some(cumulative(d.iter().map(|(k, p)| (*k, p))));
        }
        for (&(m, s), d) in &t.successor {
            successor[m * n + s.index()] = Some(cumulative(d.iter().map(|(k, p)| (k.index(), p))));
        }
        Compiled {
            n,
            initial: t.initial,
            update,
            successor,
        }
    }

    fn choose(&self, rng: &mut ChaCha8Rng, mode: usize, s: usize) -> usize {
        let cdf = self.successor[mode * self.n + s].as_ref().expect("checked transducer");
        draw(rng, cdf)
    }

    fn observe(&self, rng: &mut ChaCha8Rng, mode: usize, s: usize) -> usize {
        match &self.update[mode * self.n + s] {
            Some(cdf) => draw(rng, cdf),
            None => mode,
        }
    }
}

/// Estimates the probability of `objective` from `s0` under `sigma` (Max)
/// and `pi` (Min).
pub fn sample_plays(
    objective: &BoundObjective<'_>,
    s0: StateId,
    sigma: &TransducerStrategy,
    pi: &TransducerStrategy,
    cfg: &SimConfig,
) -> Result<Estimate, SimError> {
    let game = objective.game();
    for (strategy, expected) in [(sigma, Player::Max), (pi, Player::Min)] {
        if strategy.player != expected {
            return Err(SimError::OwnerMismatch {
                expected,
                got: strategy.player,
            });
        }
        strategy.check(game)?;
    }
    if cfg.samples == 0 || cfg.horizon == 0 || cfg.buchi_window == 0 || cfg.buchi_window > cfg.horizon {
        return Err(SimError::Config(format!(
            "need samples >= 1 and horizon >= buchi-window >= 1, got samples {}, horizon {}, window {}",
            cfg.samples, cfg.horizon, cfg.buchi_window
        )));
    }
    if s0.index() >= game.len() {
        return Err(SimError::BadStart(s0.index()));
    }
    let random: Table = game
        .states()
        .map(|s| (game.owner(s) == Owner::Random).then(|| cumulative(game.distribution(s).map(|(t, p)| (t.index(), p)))))
        .collect();
    let players = (Compiled::new(game, sigma), Compiled::new(game, pi));

    let outcomes: Vec<(f64, bool)> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| play(objective, s0, &random, &players, cfg, k as u64))
        .collect();
    let total = cfg.samples as f64;
    let mean = outcomes.iter().map(|o| o.0).sum::<f64>() / total;
    let decided = outcomes.iter().filter(|o| o.1).count() as f64 / total;
    Ok(Estimate {
        mean,
        half_width: 1.96 * (mean * (1.0 - mean) / total).max(0.0).sqrt(),
        decided_fraction: decided,
    })
}

/// One play: its score and whether the verdict was settled.
fn play(
    objective: &BoundObjective<'_>,
    s0: StateId,
    random: &Table,
    (sigma, pi): &(Compiled, Compiled),
    cfg: &SimConfig,
    k: u64,
) -> (f64, bool) {
    let game = objective.game();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(k);
    let mut monitor = objective.monitor();
    let (mut m_sigma, mut m_pi) = (sigma.initial, pi.initial);
    let mut s = s0.index();
    let mut verdict = monitor.step(s0);
    let mut last_hit = objective.target().contains(s0).then_some(0usize);
    let mut steps = 0;
    while verdict == Verdict::Undecided && steps < cfg.horizon {
        let next = match game.owner(StateId(s)) {
            Owner::Max => sigma.choose(&mut rng, m_sigma, s),
            Owner::Min => pi.choose(&mut rng, m_pi, s),
            Owner::Random => draw(&mut rng, random[s].as_ref().expect("random state")),
        };
        m_sigma = sigma.observe(&mut rng, m_sigma, s);
        m_pi = pi.observe(&mut rng, m_pi, s);
        s = next;
        steps += 1;
        verdict = monitor.step(StateId(s));
        if objective.target().contains(StateId(s)) {
            last_hit = Some(steps);
        }
    }
    match verdict {
        Verdict::SatisfiedForever => (1.0, true),
        Verdict::ViolatedForever => (0.0, true),
        Verdict::Undecided => {
            let recent = last_hit.is_some_and(|h| steps - h < cfg.buchi_window);
            let score = match objective.kind() {
                ObjectiveKind::Safety => true,
                ObjectiveKind::Buchi => recent,
                ObjectiveKind::CoBuchi => !recent,
                ObjectiveKind::Reach | ObjectiveKind::ReachWithin(_) | ObjectiveKind::ReachPlus => false,
            };
            (if score { 1.0 } else { 0.0 }, false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameBuilder, StateSet};
    use crate::gallery::{fig2, gamblers_ruin};
    use crate::lazy::SinkMode;
    use crate::objective::Objective;
    use crate::rational::ratio;
    use crate::strategy::MdStrategy;

    fn first(game: &Game, p: Player) -> TransducerStrategy {
        MdStrategy::first_choice(game, p).to_transducer(game)
    }

    #[test]
    fn deterministic_games_have_zero_width() {
        let mut b = GameBuilder::new();
        let a = b.state("a", Owner::Max);
        let m = b.state("m", Owner::Min);
        let t = b.state("t", Owner::Max);
        b.edge(a, m).edge(a, t).edge(m, t).edge(m, a).edge(t, t);
        let g = b.build().unwrap();
        let obj = Objective::new(ObjectiveKind::Reach, StateSet::from_ids(3, [t]));
        let bound = obj.bind(&g).unwrap();
        let est = sample_plays(&bound, a, &first(&g, Player::Max), &first(&g, Player::Min), &SimConfig::new(200, 50, 1)).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.half_width, 0.0);
    }

    #[test]
    fn r_chain_estimate() {
        let tr = fig2(8, SinkMode::Pessimistic).unwrap();
        let g = &tr.game;
        let bound = Objective::new(ObjectiveKind::Reach, tr.target.clone()).bind(g).unwrap();
        let r3 = tr.state("r3").unwrap();
        let cfg = SimConfig::new(20_000, 100, 7);
        let est = sample_plays(&bound, r3, &first(g, Player::Max), &first(g, Player::Min), &cfg).unwrap();
        assert!((est.mean - 0.875).abs() <= 3.0 * est.half_width, "{est:?}");
        let again = sample_plays(&bound, r3, &first(g, Player::Max), &first(g, Player::Min), &cfg).unwrap();
        assert_eq!(est, again);
        assert_eq!(est.decided_fraction, 1.0);
    }

    #[test]
    fn errors() {
        let g = gamblers_ruin(&ratio(3, 5), 6).unwrap();
        let bound = Objective::new(ObjectiveKind::Reach, g.target.clone()).bind(&g.game).unwrap();
        let max = first(&g.game, Player::Max);
        let s = StateId(2);
        assert!(matches!(
            sample_plays(&bound, s, &max, &max, &SimConfig::new(10, 10, 0)),
            Err(SimError::OwnerMismatch { .. })
        ));
        let min = first(&g.game, Player::Min);
        let mut cfg = SimConfig::new(10, 10, 0);
        cfg.buchi_window = 11;
        assert!(matches!(sample_plays(&bound, s, &max, &min, &cfg), Err(SimError::Config(_))));
    }
}
