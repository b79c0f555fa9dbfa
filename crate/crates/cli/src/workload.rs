//! Line-oriented workload files: `insert s e bw`, `delete s e bw`,
//! `query s e`, `advance now`. `#` starts a comment.

use std::fmt;
use std::path::Path;

use advseg_core::harness::Op;
use advseg_core::{Bandwidth, Slot};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Insert {
        start: Slot,
        end: Slot,
        bandwidth: Bandwidth,
    },
    Delete {
        start: Slot,
        end: Slot,
        bandwidth: Bandwidth,
    },
    Query {
        start: Slot,
        end: Slot,
    },
    Advance {
        now: Slot,
    },
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Insert { start, end, bandwidth } => write!(f, "insert {start} {end} {bandwidth}"),
            Command::Delete { start, end, bandwidth } => write!(f, "delete {start} {end} {bandwidth}"),
            Command::Query { start, end } => write!(f, "query {start} {end}"),
            Command::Advance { now } => write!(f, "advance {now}"),
        }
    }
}

impl From<&Op> for Command {
    fn from(op: &Op) -> Self {
        match op {
            Op::Insert(r) => Command::Insert {
                start: r.interval.start(),
                end: r.interval.end(),
                bandwidth: r.bandwidth,
            },
            Op::Delete(r) => Command::Delete {
                start: r.interval.start(),
                end: r.interval.end(),
                bandwidth: r.bandwidth,
            },
            Op::Query(q) => Command::Query {
                start: q.start(),
                end: q.end(),
            },
        }
    }
}

/// A parsed command with its 1-based source line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line {
    pub number: usize,
    pub command: Command,
}

pub fn load(path: &Path) -> CliResult<Vec<Line>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, path)
}

pub fn parse(text: &str, path: &Path) -> CliResult<Vec<Line>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap();
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&op, args)) = tokens.split_first() else {
            continue;
        };
        let err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line: number,
            message,
        };
        let arity = match op {
            "insert" | "delete" => 3,
            "query" => 2,
            "advance" => 1,
            _ => return Err(err(format!("unknown operation `{op}`"))),
        };
        if args.len() != arity {
            return Err(err(format!("`{op}` takes {arity} arguments, got {}", args.len())));
        }
        let slot = |t: &str| t.parse::<Slot>().map_err(|_| err(format!("invalid slot `{t}`")));
        let bandwidth = |t: &str| {
            t.parse::<Bandwidth>()
                .map_err(|_| err(format!("invalid bandwidth `{t}`")))
        };
        let command = match op {
            "insert" => Command::Insert {
                start: slot(args[0])?,
                end: slot(args[1])?,
                bandwidth: bandwidth(args[2])?,
            },
            "delete" => Command::Delete {
                start: slot(args[0])?,
                end: slot(args[1])?,
                bandwidth: bandwidth(args[2])?,
            },
            "query" => Command::Query {
                start: slot(args[0])?,
                end: slot(args[1])?,
            },
            _ => Command::Advance { now: slot(args[0])? },
        };
        lines.push(Line { number, command });
    }
    Ok(lines)
}
