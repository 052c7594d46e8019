use std::fs;
use std::io::Read as _;
use std::path::Path;

use ssg_core::format::{self, ParsedGame};
use ssg_core::gallery::{self, GalleryGame};
use ssg_core::lazy::SinkMode;
use ssg_core::qualitative::{almost_sure_buchi, almost_sure_reach, almost_sure_safety, WinningPartition};
use ssg_core::rational;
use ssg_core::simulate::{sample_plays, SimConfig};
use ssg_core::strategy::synthesis::{
    buchi_md_pair, optimal_max_md, optimal_min_md, reachplus_max_md, reachplus_min_md, threshold_decide, Winner,
};
use ssg_core::strategy::{parse_strategy, MdStrategy, TransducerStrategy};
use ssg_core::transforms::{classify_transitions, rvi};
use ssg_core::valuation::{format_float, value, ValueVector};
use ssg_core::{Game, Objective, ObjectiveKind, Player, SolveMode, StateId, StateSet};

use crate::args::{Cli, Command, EmitSet, Format, GalleryName, GameArgs, Mode, PlayerArg, SinkArg};
use crate::output::Report;
use crate::Failure;

pub fn run(cli: &Cli) -> Result<String, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Validate { game } => validate(game, format),
        Command::Solve { game, mode, tol, states } => solve(game, *mode, *tol, states.as_deref(), format),
        Command::WinningSet { game } => winning_set(game, format),
        Command::Strategy { game, player, out } => strategy(game, *player, out.as_deref(), format),
        Command::Transform { game, rvi, classify, plus } => transform(game, *rvi, *classify, *plus, format),
        Command::Simulate {
            game,
            from,
            samples,
            horizon,
            seed,
            sigma,
            pi,
        } => {
            let cfg = SimConfig::new(*samples, *horizon, *seed);
            simulate(game, from, cfg, sigma.as_deref(), pi.as_deref(), format)
        }
        Command::Gallery {
            name,
            param,
            cap,
            sink,
            emit,
            set,
        } => gallery_cmd(*name, param.as_deref(), *cap, *sink, *emit, *set, format),
        Command::Decide {
            game,
            threshold,
            strict,
            from,
        } => decide(game, threshold, *strict, from, format),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::input(format!("stdin: {e}")))?;
        return Ok(text);
    }
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ParsedGame, Failure> {
    let text = read_text(path)?;
    format::parse(&text).map_err(|e| Failure::input(format!("{}:\n{e}", path.display())))
}

/// The game, the objective kind and its target set.
fn load_objective(args: &GameArgs) -> Result<(Game, ObjectiveKind, StateSet), Failure> {
    let parsed = load(&args.game)?;
    let kind: ObjectiveKind = args.objective.parse().map_err(Failure::input)?;
    let target = match &args.target {
        Some(list) => format::parse_state_list(&parsed.game, list).map_err(Failure::input)?,
        None => parsed.target,
    };
    Ok((parsed.game, kind, target))
}

fn state(game: &Game, name: &str) -> Result<StateId, Failure> {
    game.id(name).ok_or_else(|| Failure::input(format!("unknown state `{name}`")))
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn validate(path: &Path, format: Format) -> Result<String, Failure> {
    let parsed = load(path)?;
    let g = &parsed.game;
    let mut r = Report::new(&["states", "edges", "targets"]);
    r.row(vec![
        g.len().to_string(),
        g.edge_count().to_string(),
        parsed.target.len().to_string(),
    ]);
    Ok(r.render(format))
}

fn solve(args: &GameArgs, mode: Mode, tol: f64, only: Option<&str>, format: Format) -> Result<String, Failure> {
    let (game, kind, target) = load_objective(args)?;
    let mode = match mode {
        Mode::Exact => SolveMode::Exact,
        Mode::Iterate => SolveMode::Iterate { tol },
    };
    let values = value(&game, kind, &target, mode).map_err(Failure::input)?;
    let shown = match only {
        Some(list) => format::parse_state_list(&game, list).map_err(Failure::input)?,
        None => StateSet::full(game.len()),
    };
    let approx = matches!(values, ValueVector::Approx { .. });
    let mut r = if approx {
        Report::new(&["state", "value", "error_bound"])
    } else {
        Report::new(&["state", "value"])
    };
    for s in shown.iter() {
        let mut row = vec![game.name(s).to_string(), values.render(s)];
        if approx {
            row.push(format_float(values.error_bound()));
        }
        r.row(row);
    }
    Ok(r.render(format))
}

fn winning_set(args: &GameArgs, format: Format) -> Result<String, Failure> {
    let (game, kind, target) = load_objective(args)?;
    let partition: WinningPartition = match kind {
        ObjectiveKind::Reach => almost_sure_reach(&game, &target),
        ObjectiveKind::Safety => almost_sure_safety(&game, &target),
        ObjectiveKind::Buchi => almost_sure_buchi(&game, &target).partition,
        other => return Err(Failure::input(format!("winning-set supports reach, safety and buchi, not {other}"))),
    };
    let mut r = Report::new(&["state", "winner", "index"]);
    for s in game.states() {
        let winner = if partition.max_wins.contains(s) { "max" } else { "min" };
        let index = partition.index[s.index()].map_or("-".to_string(), |i| i.to_string());
        r.row(vec![game.name(s).to_string(), winner.to_string(), index]);
    }
    Ok(r.render(format))
}

/// Copies the choices of a strategy computed on the role-swapped game.
fn relabel(game: &Game, s: &MdStrategy, player: Player) -> MdStrategy {
    let choice = game.states().map(|x| s.choice(x)).collect();
    MdStrategy::new(game, player, choice).expect("swapping roles keeps the edges")
}

/// A memoryless deterministic strategy for `player` suited to the objective:
/// optimal for reachability and safety, almost-sure certificates for Büchi
/// and co-Büchi.
fn synthesize(game: &Game, kind: ObjectiveKind, target: &StateSet, player: Player) -> Result<MdStrategy, Failure> {
    Ok(match (kind, player) {
        (ObjectiveKind::Reach | ObjectiveKind::ReachWithin(_), Player::Max) => optimal_max_md(game, target),
        (ObjectiveKind::Reach | ObjectiveKind::ReachWithin(_), Player::Min) => optimal_min_md(game, target),
        (ObjectiveKind::ReachPlus, Player::Max) => reachplus_max_md(game, target).map_err(Failure::input)?,
        (ObjectiveKind::ReachPlus, Player::Min) => reachplus_min_md(game, target),
        (ObjectiveKind::Safety, Player::Max) => relabel(game, &optimal_min_md(&game.swap_roles(), target), player),
        (ObjectiveKind::Safety, Player::Min) => relabel(game, &optimal_max_md(&game.swap_roles(), target), player),
        (ObjectiveKind::Buchi, Player::Max) => buchi_md_pair(game, target).sigma,
        (ObjectiveKind::Buchi, Player::Min) => buchi_md_pair(game, target).pi,
        (ObjectiveKind::CoBuchi, Player::Max) => relabel(game, &buchi_md_pair(&game.swap_roles(), target).pi, player),
        (ObjectiveKind::CoBuchi, Player::Min) => relabel(game, &buchi_md_pair(&game.swap_roles(), target).sigma, player),
    })
}

fn player(p: PlayerArg) -> Player {
    match p {
        PlayerArg::Max => Player::Max,
        PlayerArg::Min => Player::Min,
    }
}

fn strategy(args: &GameArgs, p: PlayerArg, out: Option<&Path>, format: Format) -> Result<String, Failure> {
    let (game, kind, target) = load_objective(args)?;
    let s = synthesize(&game, kind, &target, player(p))?;
    let text = s.write(&game);
    if let Some(path) = out {
        fs::write(path, &text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    if format == Format::Lines {
        return Ok(text);
    }
    let mut r = Report::new(&["state", "choice"]);
    for (a, b) in s.choices() {
        r.row(vec![game.name(a).to_string(), game.name(b).to_string()]);
    }
    Ok(r.render(format))
}

fn transform(args: &GameArgs, do_rvi: bool, classify: bool, plus: bool, format: Format) -> Result<String, Failure> {
    let (game, _, target) = load_objective(args)?;
    if do_rvi {
        return Ok(format::write(&rvi(&game, &target), &target));
    }
    if !classify {
        return Err(Failure::input("choose a transformation: --rvi or --classify"));
    }
    let c = classify_transitions(&game, &target, plus).map_err(Failure::input)?;
    let mut r = Report::new(&["from", "to", "owner", "class"]);
    for (s, t, class) in &c.edges {
        r.row(vec![
            game.name(*s).to_string(),
            game.name(*t).to_string(),
            game.owner(*s).keyword().to_string(),
            class.to_string(),
        ]);
    }
    Ok(r.render(format))
}

fn load_strategy(game: &Game, path: &Path, expected: Player) -> Result<TransducerStrategy, Failure> {
    let text = read_text(path)?;
    let s = parse_strategy(game, &text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    if s.player() != expected {
        return Err(Failure::input(format!(
            "{}: expected a {expected} strategy, got a {} strategy",
            path.display(),
            s.player()
        )));
    }
    Ok(s.into_transducer(game))
}

fn simulate(
    args: &GameArgs,
    from: &str,
    cfg: SimConfig,
    sigma: Option<&Path>,
    pi: Option<&Path>,
    format: Format,
) -> Result<String, Failure> {
    let (game, kind, target) = load_objective(args)?;
    let s0 = state(&game, from)?;
    let strategy_for = |path: Option<&Path>, p: Player| match path {
        Some(path) => load_strategy(&game, path, p),
        None => Ok(synthesize(&game, kind, &target, p)?.to_transducer(&game)),
    };
    let sigma = strategy_for(sigma, Player::Max)?;
    let pi = strategy_for(pi, Player::Min)?;
    let objective = Objective::new(kind, target.clone());
    let bound = objective.bind(&game).map_err(Failure::input)?;
    let est = sample_plays(&bound, s0, &sigma, &pi, &cfg).map_err(Failure::input)?;
    let mut r = Report::new(&["state", "mean", "half_width", "decided"]);
    r.row(vec![
        from.to_string(),
        format_float(est.mean),
        format_float(est.half_width),
        format_float(est.decided_fraction),
    ]);
    Ok(r.render(format))
}

fn param<T: std::str::FromStr>(raw: Option<&str>, default: T, what: &str) -> Result<T, Failure> {
    match raw {
        None => Ok(default),
        Some(text) => text
            .parse()
            .map_err(|_| Failure::input(format!("--param for {what} must be a non-negative integer, got `{text}`"))),
    }
}

fn gallery_cmd(
    name: GalleryName,
    raw: Option<&str>,
    cap: usize,
    sink: SinkArg,
    emit: bool,
    set: EmitSet,
    format: Format,
) -> Result<String, Failure> {
    let g: GalleryGame = match name {
        GalleryName::Fig2 => {
            let mode = match sink {
                SinkArg::Pessimistic => SinkMode::Pessimistic,
                SinkArg::Optimistic => SinkMode::Optimistic,
            };
            let t = gallery::fig2(param(raw, 8, "fig2")?, mode).map_err(Failure::input)?;
            GalleryGame {
                game: t.game,
                target: t.target,
                buchi: t.buchi,
            }
        }
        GalleryName::Fig2u => gallery::fig2_with_u(param(raw, 8, "fig2u")?).map_err(Failure::input)?,
        GalleryName::Ladder => {
            let k: usize = param(raw, 3, "ladder")?;
            if k == 0 {
                return Err(Failure::input("ladder needs at least one level"));
            }
            gallery::ladder(k)
        }
        GalleryName::Ruin => {
            let p = rational::parse(raw.unwrap_or("3/5")).map_err(Failure::input)?;
            gallery::gamblers_ruin(&p, cap).map_err(Failure::input)?
        }
    };
    if emit {
        let chosen = match set {
            EmitSet::Target => &g.target,
            EmitSet::Buchi => &g.buchi,
        };
        return Ok(format::write(&g.game, chosen));
    }
    let mut r = Report::new(&["state", "owner", "target", "buchi"]);
    for s in g.game.states() {
        r.row(vec![
            g.game.name(s).to_string(),
            g.game.owner(s).keyword().to_string(),
            yes_no(g.target.contains(s)),
            yes_no(g.buchi.contains(s)),
        ]);
    }
    Ok(r.render(format))
}

fn decide(args: &GameArgs, threshold: &str, strict: bool, from: &str, format: Format) -> Result<String, Failure> {
    let (game, kind, target) = load_objective(args)?;
    if kind != ObjectiveKind::Reach {
        return Err(Failure::input(format!("decide supports the reach objective only, not {kind}")));
    }
    let c = rational::parse(threshold).map_err(Failure::input)?;
    let s = state(&game, from)?;
    let verdict = threshold_decide(&game, &target, s, &c, strict).map_err(Failure::input)?;
    let mut r = Report::new(&["state", "value", "winner", "reason"]);
    r.row(vec![
        from.to_string(),
        rational::format(&verdict.value),
        verdict.winner.to_string(),
        verdict.reason.to_string(),
    ]);
    let text = r.render(format);
    if verdict.winner == Winner::OutOfScope {
        return Err(Failure::OutOfScope(text));
    }
    Ok(text)
}
