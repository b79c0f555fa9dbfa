//! Library side of the `advseg` binary: config and workload parsing plus
//! the subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod workload;

use std::io::Write;
use std::path::PathBuf;

use advseg_core::harness::OpMix;
use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "advseg", version, about = "Advance-reservation segment tree tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Replay a workload file and print query results.
    Replay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workload: PathBuf,
        /// Admit inserts only if they fit under the configured capacity.
        #[arg(long)]
        check_capacity: bool,
        /// Answer queries through a finger.
        #[arg(long, conflicts_with = "window")]
        finger: bool,
        /// Treat slots as absolute time on a wrapping window.
        #[arg(long)]
        window: bool,
    },
    /// Compare the tree against a brute-force oracle on a seeded workload.
    Difftest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        ops: usize,
        /// Insert, delete and query fractions.
        #[arg(long, default_value = "0.4,0.2,0.4", value_parser = parse_mix)]
        mix: OpMix,
    },
    /// Touched-node counts and timings per operation kind, as CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        ops: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a seeded workload file to standard output.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1_000)]
        ops: usize,
        #[arg(long, default_value = "0.4,0.2,0.4", value_parser = parse_mix)]
        mix: OpMix,
        /// Append deletes that cancel every outstanding reservation.
        #[arg(long)]
        inverse: bool,
    },
    /// Print the tree shape for a config.
    Info {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_mix(s: &str) -> Result<OpMix, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid fraction `{}`", p.trim()))
        })
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [insert, delete, query] => Ok(OpMix { insert, delete, query }),
        _ => Err(format!(
            "expected three fractions `insert,delete,query`, got {}",
            parts.len()
        )),
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, diag: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Cmd::Replay {
            config,
            workload,
            check_capacity,
            finger,
            window,
        } => {
            let (file, tree_config) = config::load(&config)?;
            let lines = workload::load(&workload)?;
            let flags = commands::ReplayFlags {
                check_capacity,
                finger,
                window,
            };
            commands::replay(&file, tree_config, &workload, &lines, flags, out)
        }
        Cmd::Difftest { config, seed, ops, mix } => {
            let (_, tree_config) = config::load(&config)?;
            commands::difftest(&tree_config, seed, ops, mix, out, diag)
        }
        Cmd::Bench { config, ops, seed } => {
            let (_, tree_config) = config::load(&config)?;
            commands::bench(&tree_config, ops, seed, out)
        }
        Cmd::Generate {
            config,
            seed,
            ops,
            mix,
            inverse,
        } => {
            let (_, tree_config) = config::load(&config)?;
            commands::generate_workload(&tree_config, seed, ops, mix, inverse, out)
        }
        Cmd::Info { config } => {
            let (file, tree_config) = config::load(&config)?;
            commands::info(&file, &tree_config, out)
        }
    }
}
