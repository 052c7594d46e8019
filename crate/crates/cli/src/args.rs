use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ssg", version, about = "Solve and analyse turn-based stochastic games")]
pub struct Cli {
    /// Output layout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Lines)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Lines,
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Iterate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlayerArg {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SinkArg {
    Pessimistic,
    Optimistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GalleryName {
    Fig2,
    Fig2u,
    Ladder,
    Ruin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmitSet {
    Target,
    Buchi,
}

/// A game file and the objective to evaluate on it.
#[derive(Debug, Args)]
pub struct GameArgs {
    /// Game file, or `-` for standard input.
    pub game: PathBuf,
    /// reach, reach<=N, reachplus, safety, buchi or cobuchi.
    #[arg(long, default_value = "reach")]
    pub objective: String,
    /// Comma-separated target (or Büchi) states; defaults to the file's `target` lines.
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a game file and report its size.
    Validate {
        game: PathBuf,
    },
    /// Values of every state.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Certified error bound for iterate mode.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Only report these comma-separated states.
        #[arg(long)]
        states: Option<String>,
    },
    /// Almost-sure winning regions.
    WinningSet {
        #[command(flatten)]
        game: GameArgs,
    },
    /// Synthesize a memoryless deterministic strategy.
    Strategy {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value_t = PlayerArg::Max)]
        player: PlayerArg,
        /// Also write the strategy file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Value-based game transformations.
    Transform {
        #[command(flatten)]
        game: GameArgs,
        /// Remove value-increasing Min edges and print the game.
        #[arg(long, conflicts_with = "classify")]
        rvi: bool,
        /// Label every edge as increasing, decreasing or preserving.
        #[arg(long)]
        classify: bool,
        /// Classify against the after-one-step reach values.
        #[arg(long, requires = "classify")]
        plus: bool,
    },
    /// Monte Carlo estimate of the objective under a strategy pair.
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        /// Start state.
        #[arg(long)]
        from: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1_000)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Max strategy file; defaults to a synthesized one.
        #[arg(long)]
        sigma: Option<PathBuf>,
        /// Min strategy file; defaults to a synthesized one.
        #[arg(long)]
        pi: Option<PathBuf>,
    },
    /// Built-in example games.
    Gallery {
        #[arg(value_enum)]
        name: GalleryName,
        /// Depth (fig2, fig2u), levels (ladder) or win probability p/q (ruin).
        #[arg(long)]
        param: Option<String>,
        /// Largest wealth for ruin.
        #[arg(long, default_value_t = 30)]
        cap: usize,
        #[arg(long, value_enum, default_value_t = SinkArg::Pessimistic)]
        sink: SinkArg,
        /// Print the game file instead of a summary.
        #[arg(long)]
        emit: bool,
        /// Which set the emitted `target` lines describe.
        #[arg(long, value_enum, default_value_t = EmitSet::Target)]
        set: EmitSet,
    },
    /// Decide whether Max can reach the target with probability at least c.
    Decide {
        #[command(flatten)]
        game: GameArgs,
        /// The threshold c as p/q.
        #[arg(long)]
        threshold: String,
        /// Ask for probability strictly greater than c.
        #[arg(long)]
        strict: bool,
        /// State to decide from.
        #[arg(long)]
        from: String,
    },
}
