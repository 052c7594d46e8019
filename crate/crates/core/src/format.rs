//! Line-oriented text format for games.
//!
//! ```text
//! # comment
//! state s max
//! state r rand
//! edge s r
//! edge r s 1/2
//! target s
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::game::{Game, GameBuilder, Owner, StateId, StateSet, Violation};
use crate::rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}", render_invalid(.0))]
    Invalid(Vec<(usize, String)>),
}

fn render_invalid(v: &[(usize, String)]) -> String {
    v.iter()
        .map(|(l, m)| format!("line {l}: {m}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A parsed game plus the `target` lines and declaration line numbers.
#[derive(Debug, Clone)]
pub struct ParsedGame {
    pub game: Game,
    pub target: StateSet,
    /// 1-based line of each state's declaration.
    pub state_lines: Vec<usize>,
}

impl ParsedGame {
    pub fn line_of(&self, v: &Violation) -> usize {
        self.state_lines[v.state().index()]
    }
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses a game and checks every structural invariant.
pub fn parse(text: &str) -> Result<ParsedGame, FormatError> {
    let parsed = parse_unchecked(text)?;
    let violations = parsed.game.validate();
    if violations.is_empty() {
        Ok(parsed)
    } else {
        Err(FormatError::Invalid(
            violations
                .iter()
                .map(|v| (parsed.line_of(v), v.describe(&parsed.game)))
                .collect(),
        ))
    }
}

/// Parses the syntax only; the resulting game may violate invariants.
pub fn parse_unchecked(text: &str) -> Result<ParsedGame, FormatError> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, toks)| !toks.is_empty())
        .collect();

    let mut b = GameBuilder::new();
    let mut state_lines = Vec::new();
    let mut declared: HashMap<&str, usize> = HashMap::new();
    for (line, toks) in &lines {
        match toks[0] {
            "state" => {
                if toks.len() != 3 {
                    return Err(syntax(*line, "expected `state <id> max|min|rand`"));
                }
                let owner = Owner::from_keyword(toks[2])
                    .ok_or_else(|| syntax(*line, format!("unknown owner `{}`", toks[2])))?;
                if let Some(first) = declared.get(toks[1]) {
                    return Err(syntax(
                        *line,
                        format!("state `{}` already declared on line {first}", toks[1]),
                    ));
                }
                declared.insert(toks[1], *line);
                b.state(toks[1], owner);
                state_lines.push(*line);
            }
            "edge" | "target" => {}
            other => return Err(syntax(*line, format!("unknown keyword `{other}`"))),
        }
    }

    let lookup = |b: &GameBuilder, line: usize, name: &str| {
        b.id(name)
            .ok_or_else(|| syntax(line, format!("undeclared state `{name}`")))
    };
    let mut targets = Vec::new();
    for (line, toks) in &lines {
        match toks[0] {
            "edge" => {
                if toks.len() != 3 && toks.len() != 4 {
                    return Err(syntax(*line, "expected `edge <src> <dst> [p/q]`"));
                }
                let src = lookup(&b, *line, toks[1])?;
                let dst = lookup(&b, *line, toks[2])?;
                match (b.owner(src), toks.get(3)) {
                    (Owner::Random, Some(w)) => {
                        let p = rational::parse(w).map_err(|e| syntax(*line, e.to_string()))?;
                        b.prob_edge(src, dst, p);
                    }
                    (Owner::Random, None) => {
                        return Err(syntax(*line, format!("edge from random state `{}` needs a weight", toks[1])))
                    }
                    (_, Some(_)) => {
                        return Err(syntax(*line, format!("edge from player state `{}` takes no weight", toks[1])))
                    }
                    (_, None) => {
                        b.edge(src, dst);
                    }
                }
            }
            "target" => {
                if toks.len() < 2 {
                    return Err(syntax(*line, "expected `target <id>...`"));
                }
                for name in &toks[1..] {
                    targets.push(lookup(&b, *line, name)?);
                }
            }
            _ => {}
        }
    }
    let n = b.len();
    Ok(ParsedGame {
        game: b.build_unchecked(),
        target: StateSet::from_ids(n, targets),
        state_lines,
    })
}

/// Serializes a game; `parse(write(g, t))` reproduces `g` and `t`.
pub fn write(game: &Game, target: &StateSet) -> String {
    let mut out = String::new();
    for s in game.states() {
        let _ = writeln!(out, "state {} {}", game.name(s), game.owner(s).keyword());
    }
    for s in game.states() {
        let w = game.weights(s);
        for (k, t) in game.successors(s).iter().enumerate() {
            match w.get(k) {
                Some(p) if game.owner(s) == Owner::Random => {
                    let _ = writeln!(out, "edge {} {} {}", game.name(s), game.name(*t), rational::format(p));
                }
                _ => {
                    let _ = writeln!(out, "edge {} {}", game.name(s), game.name(*t));
                }
            }
        }
    }
    for s in target.iter().filter(|s| s.index() < game.len()) {
        let _ = writeln!(out, "target {}", game.name(s));
    }
    out
}

/// Resolves a comma-separated list of state names.
pub fn parse_state_list(game: &Game, list: &str) -> Result<StateSet, String> {
    let mut set = StateSet::empty(game.len());
    for name in list.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let id: StateId = game.id(name).ok_or_else(|| format!("unknown state `{name}`"))?;
        set.insert(id);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const SAMPLE: &str = "\
# two states
state a max
state r rand   # coin
edge a r
edge a a
edge r a 1/3
edge r r 2/3
target a
";

    #[test]
    fn parses_sample() {
        let p = parse(SAMPLE).unwrap();
        let a = p.game.id("a").unwrap();
        let r = p.game.id("r").unwrap();
        assert_eq!(p.game.successors(a), &[r, a]);
        assert_eq!(p.game.weights(r), &[ratio(1, 3), ratio(2, 3)]);
        assert!(p.target.contains(a));
        assert_eq!(p.state_lines, vec![2, 3]);
    }

    #[test]
    fn round_trips() {
        let p = parse(SAMPLE).unwrap();
        let q = parse(&write(&p.game, &p.target)).unwrap();
        assert_eq!(p.game, q.game);
        assert_eq!(p.target, q.target);
    }

    #[test]
    fn weight_sum_error_names_the_line() {
        let text = "state r rand\nstate a max\nedge a a\nedge r a 1/2\nedge r r 1/3\n";
        let err = parse(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 1:"), "{msg}");
        assert!(msg.contains("5/6"), "{msg}");
    }

    #[test]
    fn strict_syntax_errors() {
        let cases = [
            ("stat a max\n", 1),
            ("state a max\nstate a min\n", 2),
            ("state a max\nedge b a\n", 2),
            ("state a max\nedge a a 1/2\n", 2),
            ("state r rand\nedge r r\n", 2),
            ("state a boss\n", 1),
            ("state a max\nedge a a\ntarget zz\n", 3),
        ];
        for (text, line) in cases {
            match parse(text) {
                Err(FormatError::Syntax { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn dead_end_reported_as_invalid() {
        assert!(matches!(parse("state a max\n"), Err(FormatError::Invalid(_))));
    }
}
