//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};

use ssg_core::chain::Chain;
use ssg_core::gallery::{fig2, fig2_with_u, gamblers_ruin, ladder, random_game, Fig2, GalleryGame};
use ssg_core::lazy::SinkMode;
use ssg_core::objective::{Objective, ObjectiveKind};
use ssg_core::oracle::{md_enumeration_values, mdp_buchi_exact};
use ssg_core::qualitative::{almost_sure_buchi, almost_sure_reach, almost_sure_safety, WinningPartition};
use ssg_core::rational::{int, pow2_neg, ratio, to_f64, Rational};
use ssg_core::simulate::{sample_plays, SimConfig};
use ssg_core::strategy::synthesis::{
    buchi_md_pair, optimal_max_md, optimal_max_md_no_decrease, optimal_min_md, reachplus_max_md, reachplus_min_md,
};
use ssg_core::strategy::MdStrategy;
use ssg_core::transforms::rvi;
use ssg_core::valuation::{
    epsilon_horizon, interval_values, solve_reach, value_buchi, value_reach, value_reachplus, value_safety,
};
use ssg_core::{Game, Owner, SolveMode, StateId, StateSet};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Up to 12 states, seeds 0..100.
fn random_suite() -> Vec<(u64, Game, StateSet, StateSet)> {
    (0..100u64)
        .map(|seed| {
            let n = 4 + (seed % 9) as usize;
            let (g, t, b) = random_game(seed, n);
            (seed, g, t, b)
        })
        .collect()
}

fn gallery_suite() -> Vec<(String, GalleryGame)> {
    let mut out = Vec::new();
    for depth in [4, 6, 8] {
        for mode in [SinkMode::Pessimistic, SinkMode::Optimistic] {
            let tr = fig2(depth, mode).unwrap();
            out.push((
                format!("fig2 depth {depth} {mode:?}"),
                GalleryGame {
                    game: tr.game,
                    target: tr.target,
                    buchi: tr.buchi,
                },
            ));
        }
        out.push((format!("fig2+u depth {depth}"), fig2_with_u(depth).unwrap()));
    }
    for k in 1..=8 {
        out.push((format!("ladder {k}"), ladder(k)));
    }
    for p in [ratio(3, 5), ratio(1, 2), ratio(11, 20)] {
        out.push((format!("ruin p={p} cap=30"), gamblers_ruin(&p, 30).unwrap()));
    }
    out
}

fn c1_fig2_exact() -> Outcome {
    let tr = fig2(22, SinkMode::Pessimistic).unwrap();
    let v = solve_reach(&tr.game, &tr.target).values;
    let at = |name: &str| v[tr.state(name).unwrap().index()].clone();
    for i in 0..=20u32 {
        let got = at(&format!("r{i}"));
        ensure(got == int(1) - pow2_neg(i), || format!("val(r{i}) = {got}"))?;
    }
    for i in 1..=20u32 {
        let got = at(&format!("rp{i}"));
        ensure(got == pow2_neg(i), || format!("val(rp{i}) = {got}"))?;
    }
    ensure(at("rp0").is_zero(), || "val(rp0) != 0".into())?;
    Ok("r_i = 1-2^-i (i=0..20), rp_i = 2^-i (i=1..20), rp_0 = 0".into())
}

fn c2_fig2_intervals() -> Outcome {
    let half = ratio(1, 2);
    let mut prev_width: Option<Rational> = None;
    for depth in 4..=12usize {
        let iv = interval_values(&Fig2, ObjectiveKind::Buchi, depth).map_err(|e| e.to_string())?;
        let (lo, hi) = iv.initial();
        ensure(lo <= half && half <= hi, || format!("depth {depth}: [{lo}, {hi}] misses 1/2"))?;
        let gap = &half - &lo;
        ensure(gap <= pow2_neg(depth as u32 - 1), || format!("depth {depth}: 1/2 - lower = {gap}"))?;
        let width = &hi - &lo;
        if let Some(p) = &prev_width {
            ensure(width <= *p, || format!("depth {depth}: width {width} grew from {p}"))?;
        }
        prev_width = Some(width);
    }
    Ok(format!("width at depth 12 = {}", prev_width.unwrap()))
}

/// Probability of reaching `t` from `i` when Max leaves its ladder at `n` and
/// Min leaves its ladder at `m`, on a truncation deep enough for both.
fn ladder_outcome(tr: &ssg_core::lazy::Truncation, n: u32, m: u32) -> Rational {
    let g = &tr.game;
    let id = |name: String| tr.state(&name).unwrap();
    let chain = Chain::induced(g, |s| {
        let name = g.name(s);
        let succ = g.successors(s);
        match g.owner(s) {
            Owner::Max if name == format!("s{n}") => id(format!("r{n}")),
            Owner::Min if name == format!("sp{m}") => id(format!("rp{m}")),
            _ => succ[0],
        }
    });
    let mask: Vec<bool> = g.states().map(|s| tr.target.contains(s)).collect();
    chain.reach_probabilities(&mask)[tr.initial.index()].clone()
}

fn c3_non_determinacy() -> Outcome {
    let tr = fig2(16, SinkMode::Pessimistic).unwrap();
    let half = ratio(1, 2);
    let formula = |n: u32, m: u32| &half * (int(1) - pow2_neg(n)) + &half * pow2_neg(m);
    for n in 0..=10u32 {
        let mut inf: Option<Rational> = None;
        for m in 1..=12u32 {
            let got = ladder_outcome(&tr, n, m);
            ensure(got == formula(n, m), || format!("Max exit {n}, Min exit {m}: {got}"))?;
            inf = Some(inf.map_or(got.clone(), |x: Rational| x.min(got)));
        }
        let inf = inf.unwrap();
        ensure(inf < half, || format!("Max exit {n}: inf over Min exits = {inf}"))?;
    }
    for m in 1..=10u32 {
        let sup = (0..=12u32).map(|n| ladder_outcome(&tr, n, m)).max().unwrap();
        ensure(sup > half, || format!("Min exit {m}: sup over Max exits = {sup}"))?;
    }
    Ok("every Max exit n<=10 is beaten below 1/2, every Min exit m<=10 above 1/2".into())
}

/// Ruin probability from wealth `w`, independent closed form.
fn ruin_closed_form(p: &Rational, w: usize, cap: usize) -> Rational {
    let q = int(1) - p;
    if q == *p {
        return int(1) - ratio(w as i64, cap as i64);
    }
    let r = &q / p;
    let pw = |k: usize| (0..k).fold(int(1), |acc, _| acc * &r);
    (pw(w) - pw(cap)) / (int(1) - pw(cap))
}

fn ruin_closed_form_f64(p: f64, w: usize, cap: usize) -> f64 {
    let q = 1.0 - p;
    if (p - 0.5).abs() < 1e-15 {
        return 1.0 - w as f64 / cap as f64;
    }
    let r = q / p;
    (r.powi(w as i32) - r.powi(cap as i32)) / (1.0 - r.powi(cap as i32))
}

fn c4_gamblers_ruin() -> Outcome {
    let cap = 30;
    let mut worst: f64 = 0.0;
    for p in [ratio(3, 5), ratio(1, 2), ratio(11, 20)] {
        let g = gamblers_ruin(&p, cap).unwrap();
        let exact = value_reach(&g.game, &g.target, SolveMode::Exact).map_err(|e| e.to_string())?.unwrap_exact();
        let approx = value_reach(&g.game, &g.target, SolveMode::Iterate { tol: 1e-12 }).map_err(|e| e.to_string())?;
        for w in 0..=cap {
            let s = g.game.id(&format!("w{w}")).unwrap();
            let want = ruin_closed_form(&p, w, cap);
            ensure(exact[s.index()] == want, || format!("p={p} w={w}: {} != {want}", exact[s.index()]))?;
            let diff = (approx.get_f64(s) - ruin_closed_form_f64(to_f64(&p), w, cap)).abs();
            worst = worst.max(diff);
            ensure(diff <= 1e-9, || format!("p={p} w={w}: float error {diff:e}"))?;
            if w > 0 && w < cap {
                let v = &exact[s.index()];
                ensure(*v > int(0) && *v < int(1), || format!("p={p} w={w}: {v} not in (0,1)"))?;
            }
        }
    }
    Ok(format!("largest float error {worst:.2e}"))
}

fn c5_rvi() -> Outcome {
    let mut removed = 0;
    for (seed, g, t, _) in random_suite() {
        let once = rvi(&g, &t);
        ensure(rvi(&once, &t) == once, || format!("seed {seed}: not idempotent"))?;
        ensure(solve_reach(&once, &t).values == solve_reach(&g, &t).values, || format!("seed {seed}: values changed"))?;
        removed += g.edge_count() - once.edge_count();
    }
    Ok(format!("100 games, {removed} Min edges removed in total"))
}

fn check_partition(p: &WinningPartition, n: usize) -> bool {
    p.max_wins.is_disjoint(&p.min_wins)
        && p.max_wins.union(&p.min_wins) == StateSet::full(n)
        && (0..n).all(|s| p.index[s].is_none() == p.max_wins.contains(StateId(s)))
}

fn c6_partitions() -> Outcome {
    let mut games: Vec<(String, Game, StateSet, StateSet)> = random_suite()
        .into_iter()
        .map(|(seed, g, t, b)| (format!("seed {seed}"), g, t, b))
        .collect();
    games.extend(gallery_suite().into_iter().map(|(name, gg)| (name, gg.game, gg.target, gg.buchi)));
    for (name, g, t, b) in &games {
        let n = g.len();
        ensure(check_partition(&almost_sure_reach(g, t), n), || format!("{name}: reach partition"))?;
        ensure(check_partition(&almost_sure_buchi(g, b).partition, n), || format!("{name}: Büchi partition"))?;
        ensure(check_partition(&almost_sure_safety(g, t), n), || format!("{name}: safety partition"))?;
    }
    let mut reach_rounds = Vec::new();
    for k in 1..=8 {
        let lg = ladder(k);
        let p = almost_sure_buchi(&lg.game, &lg.buchi).partition;
        ensure(p.rounds == k + 1, || format!("ladder {k}: {} Büchi peeling rounds", p.rounds))?;
        let bot = lg.game.ids(["w", "bot"]).unwrap();
        ensure(p.max_wins == bot, || format!("ladder {k}: Büchi max-wins is not the bot states"))?;
        let r = almost_sure_reach(&lg.game, &lg.target);
        ensure(r.max_wins == bot, || format!("ladder {k}: reach max-wins is not the bot states"))?;
        reach_rounds.push(r.rounds);
    }
    Ok(format!(
        "{} games partitioned; ladder k=1..8 Büchi peeling rounds = k+1; reach peeling rounds {:?}",
        games.len(),
        reach_rounds
    ))
}

fn guaranteed(g: &Game, t: &StateSet, s: &MdStrategy) -> Vec<Rational> {
    solve_reach(&s.apply(g), t).values
}

fn plus_under(g: &Game, t: &StateSet, s: &MdStrategy) -> Vec<Rational> {
    value_reachplus(&s.apply(g), t, SolveMode::Exact).unwrap().unwrap_exact()
}

fn c7_certificates() -> Outcome {
    let mut games: Vec<(String, Game, StateSet, StateSet)> = random_suite()
        .into_iter()
        .map(|(seed, g, t, b)| (format!("seed {seed}"), g, t, b))
        .collect();
    games.extend(
        gallery_suite()
            .into_iter()
            .filter(|(_, gg)| gg.game.len() <= 40)
            .map(|(name, gg)| (name, gg.game, gg.target, gg.buchi)),
    );
    let (mut no_decrease, mut plus_max, mut buchi_checked) = (0, 0, 0);
    for (name, g, t, b) in &games {
        let v = solve_reach(g, t).values;
        ensure(guaranteed(g, t, &optimal_max_md(g, t)) == v, || format!("{name}: optimal Max"))?;
        ensure(guaranteed(g, t, &optimal_min_md(g, t)) == v, || format!("{name}: optimal Min"))?;
        if let Ok(sigma) = optimal_max_md_no_decrease(g, t) {
            no_decrease += 1;
            ensure(guaranteed(g, t, &sigma) == v, || format!("{name}: rank strategy"))?;
        }
        let plus = value_reachplus(g, t, SolveMode::Exact).unwrap().unwrap_exact();
        ensure(plus_under(g, t, &reachplus_min_md(g, t)) == plus, || format!("{name}: after-one-step Min"))?;
        if let Ok(sigma) = reachplus_max_md(g, t) {
            plus_max += 1;
            ensure(plus_under(g, t, &sigma) == plus, || format!("{name}: after-one-step Max"))?;
        }
        if g.len() > 16 {
            continue;
        }
        let pair = buchi_md_pair(g, b);
        let wins = &pair.peeling.partition.max_wins;
        let under_sigma = mdp_buchi_exact(&pair.sigma.apply(g), b).map_err(|e| e.to_string())?;
        let under_pi = mdp_buchi_exact(&pair.pi.apply(g), b).map_err(|e| e.to_string())?;
        for s in g.states() {
            if wins.contains(s) {
                ensure(under_sigma[s.index()].is_one(), || format!("{name}: sigma-hat gives {} at {}", under_sigma[s.index()], g.name(s)))?;
            } else {
                ensure(under_pi[s.index()] < int(1), || format!("{name}: pi-hat gives 1 at {}", g.name(s)))?;
            }
        }
        buchi_checked += 1;
    }
    Ok(format!(
        "{} games; rank strategy on {no_decrease}, after-one-step Max on {plus_max}, Büchi pair on {buchi_checked}",
        games.len()
    ))
}

fn c8_oracle() -> Outcome {
    let mut pairs_total = 0u128;
    for (seed, g, t, b) in random_suite() {
        let o = md_enumeration_values(&g, &t, &b).map_err(|e| format!("seed {seed}: {e}"))?;
        let exact = |r: Result<ssg_core::ValueVector, ssg_core::valuation::ValuationError>| r.unwrap().unwrap_exact();
        ensure(o.reach == exact(value_reach(&g, &t, SolveMode::Exact)), || format!("seed {seed}: reach"))?;
        ensure(o.safety == exact(value_safety(&g, &t, SolveMode::Exact)), || format!("seed {seed}: safety"))?;
        ensure(o.buchi == exact(value_buchi(&g, &b, SolveMode::Exact)), || format!("seed {seed}: Büchi"))?;
        pairs_total += g
            .states()
            .filter(|s| g.owner(*s) != Owner::Random)
            .map(|s| g.successors(s).len() as u128)
            .product::<u128>();
    }
    Ok(format!("100 games, {pairs_total} strategy pairs enumerated"))
}

fn c9_simulation() -> Outcome {
    let eps = ratio(1, 1000);
    let mut cases: Vec<(String, Game, StateSet, StateId)> = Vec::new();
    let tr = fig2(10, SinkMode::Pessimistic).unwrap();
    for start in ["i", "r3", "s0", "sp1"] {
        cases.push((format!("fig2 from {start}"), tr.game.clone(), tr.target.clone(), tr.state(start).unwrap()));
    }
    let u = fig2_with_u(8).unwrap();
    cases.push(("fig2+u from u".into(), u.game.clone(), u.target.clone(), u.game.id("u").unwrap()));
    let lg = ladder(4);
    for start in ["x4", "w"] {
        cases.push((format!("ladder 4 from {start}"), lg.game.clone(), lg.target.clone(), lg.game.id(start).unwrap()));
    }
    for p in [ratio(3, 5), ratio(1, 2)] {
        let g = gamblers_ruin(&p, 30).unwrap();
        cases.push((format!("ruin p={p} from w5"), g.game.clone(), g.target.clone(), g.game.id("w5").unwrap()));
    }
    let mut worst = 0.0f64;
    for (name, g, t, s0) in &cases {
        let sigma = optimal_max_md(g, t);
        let pi = optimal_min_md(g, t);
        let fixed = pi.apply(&sigma.apply(g));
        let exact = to_f64(&solve_reach(g, t).values[s0.index()]);
        let horizon = epsilon_horizon(&fixed, t, *s0, &eps).map_err(|e| format!("{name}: {e}"))?.max(1);
        let cfg = SimConfig::new(100_000, horizon, 2024);
        let bound = Objective::new(ObjectiveKind::Reach, t.clone()).bind(g).unwrap();
        let (st, pt) = (sigma.to_transducer(g), pi.to_transducer(g));
        let est = sample_plays(&bound, *s0, &st, &pt, &cfg).map_err(|e| e.to_string())?;
        let slack = 3.0 * est.half_width + 1e-3;
        let dev = (est.mean - exact).abs();
        ensure(dev <= slack, || format!("{name}: mean {} vs exact {exact} (slack {slack})", est.mean))?;
        worst = worst.max(dev / slack);
        let again = sample_plays(&bound, *s0, &st, &pt, &cfg).map_err(|e| e.to_string())?;
        ensure(again == est, || format!("{name}: rerun differs"))?;
    }
    Ok(format!("{} instances, largest deviation {:.2} of the allowed slack", cases.len(), worst))
}

/// Name, check and time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn main() {
    let criteria: [Criterion; 9] = [
        ("fig2-exact-values", c1_fig2_exact, 1),
        ("fig2-buchi-intervals", c2_fig2_intervals, 5),
        ("non-determinacy", c3_non_determinacy, 10),
        ("gamblers-ruin", c4_gamblers_ruin, 1),
        ("rvi", c5_rvi, 30),
        ("qualitative-partitions", c6_partitions, 60),
        ("md-certificates", c7_certificates, 60),
        ("oracle-equivalence", c8_oracle, 120),
        ("simulation", c9_simulation, 60),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget}s"))
            }
            r => r,
        };
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS ({elapsed:.2?}) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({elapsed:.2?}) {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
