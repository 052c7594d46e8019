//! Fixed benchmark instances shared by the solver benchmarks.

use ssg_core::gallery::{self, GalleryGame};
use ssg_core::lazy::SinkMode;
use ssg_core::rational::ratio;

/// Pessimistic truncation of the two-ladder game as a gallery game.
pub fn fig2(depth: usize) -> GalleryGame {
    let t = gallery::fig2(depth, SinkMode::Pessimistic).expect("fig2 truncates at any depth");
    GalleryGame {
        game: t.game,
        target: t.target,
        buchi: t.buchi,
    }
}

pub fn ladder(k: usize) -> GalleryGame {
    gallery::ladder(k)
}

/// Gambler's ruin with win probability 3/5.
pub fn ruin(cap: usize) -> GalleryGame {
    gallery::gamblers_ruin(&ratio(3, 5), cap).expect("3/5 is a valid probability")
}

/// Seeded random games of `n` states.
pub fn random(seeds: std::ops::Range<u64>, n: usize) -> Vec<GalleryGame> {
    seeds
        .map(|seed| {
            let (game, target, buchi) = gallery::random_game(seed, n);
            GalleryGame { game, target, buchi }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_well_formed() {
        for g in [fig2(6), ladder(4), ruin(10)].iter().chain(random(0..5, 12).iter()) {
            assert!(g.game.validate().is_empty());
            assert_eq!(g.target.universe(), g.game.len());
        }
    }
}
