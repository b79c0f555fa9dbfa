use std::io::Write;
use std::path::Path;
use std::time::Instant;

use advseg_core::harness::{differential_run, generate, Op, OpKind, OpMix, WorkloadSpec};
use advseg_core::{Admission, Bandwidth, Finger, Interval, Reservation, Tree, TreeConfig, WrappingWindow};

use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};
use crate::workload::{Command, Line};

#[derive(Debug, Clone, Copy, Default)]
pub struct ReplayFlags {
    pub check_capacity: bool,
    pub finger: bool,
    pub window: bool,
}

enum Engine {
    Plain { tree: Tree, finger: Option<Finger> },
    Window(WrappingWindow),
}

impl Engine {
    fn insert(
        &mut self,
        start: u64,
        end: u64,
        bandwidth: Bandwidth,
        capacity: Option<Bandwidth>,
    ) -> advseg_core::Result<Option<Admission>> {
        match self {
            Engine::Plain { tree, finger } => {
                if let Some(f) = finger {
                    f.invalidate();
                }
                let r = Reservation::from_slots(start, end, bandwidth)?;
                match capacity {
                    Some(cap) => tree.insert_checked(&r, cap).map(Some),
                    None => tree.insert(&r).map(|_| None),
                }
            }
            Engine::Window(w) => match capacity {
                Some(cap) => w.reserve_abs(start, end, bandwidth, cap).map(Some),
                None => w.insert_abs(start, end, bandwidth).map(|_| None),
            },
        }
    }

    fn delete(&mut self, start: u64, end: u64, bandwidth: Bandwidth) -> advseg_core::Result<()> {
        match self {
            Engine::Plain { tree, finger } => {
                if let Some(f) = finger {
                    f.invalidate();
                }
                tree.delete(&Reservation::from_slots(start, end, bandwidth)?)
            }
            Engine::Window(w) => w.release_abs(start, end, bandwidth),
        }
    }

    fn query(&mut self, start: u64, end: u64) -> advseg_core::Result<Bandwidth> {
        match self {
            Engine::Plain { tree, finger } => {
                let q = Interval::new(start, end)?;
                match finger {
                    Some(f) => f.query(tree, q),
                    None => tree.max_reserved(q),
                }
            }
            Engine::Window(w) => w.query_abs(start, end),
        }
    }
}

/// Applies `lines` in order. Queries print their maximum, capacity-checked
/// inserts print `admitted` or `rejected`.
pub fn replay(
    file: &ConfigFile,
    config: TreeConfig,
    workload: &Path,
    lines: &[Line],
    flags: ReplayFlags,
    out: &mut dyn Write,
) -> CliResult<()> {
    let capacity = match (flags.check_capacity, file.capacity) {
        (false, _) => None,
        (true, Some(c)) => Some(c),
        (true, None) => {
            return Err(CliError::Range(
                "--check-capacity needs a `capacity` key in the config".into(),
            ))
        }
    };
    if flags.finger && flags.window {
        return Err(CliError::Usage("--finger cannot be combined with --window".into()));
    }
    let mut engine = if flags.window {
        Engine::Window(WrappingWindow::new(config, 0)?)
    } else {
        Engine::Plain {
            tree: Tree::new(config)?,
            finger: flags.finger.then(Finger::new),
        }
    };

    for line in lines {
        let at = |source| CliError::AtLine {
            path: workload.to_path_buf(),
            line: line.number,
            source,
        };
        match line.command {
            Command::Insert { start, end, bandwidth } => {
                match engine.insert(start, end, bandwidth, capacity).map_err(at)? {
                    Some(Admission::Admitted) => writeln!(out, "admitted"),
                    Some(Admission::Rejected) => writeln!(out, "rejected"),
                    None => Ok(()),
                }
                .map_err(io_err)?;
            }
            Command::Delete { start, end, bandwidth } => engine.delete(start, end, bandwidth).map_err(at)?,
            Command::Query { start, end } => {
                let max = engine.query(start, end).map_err(at)?;
                writeln!(out, "{max}").map_err(io_err)?;
            }
            Command::Advance { now } => match &mut engine {
                Engine::Window(w) => w.advance(now).map_err(at)?,
                Engine::Plain { .. } => {
                    return Err(CliError::Range(format!(
                        "{}:{}: `advance` needs --window",
                        workload.display(),
                        line.number
                    )))
                }
            },
        }
    }
    Ok(())
}

/// Differential run against the slot oracle. Prints the summary CSV to
/// `out`; on divergence the shrunk reproduction goes to `diag` as workload
/// lines.
pub fn difftest(
    config: &TreeConfig,
    seed: u64,
    ops: usize,
    mix: OpMix,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> CliResult<()> {
    let spec = WorkloadSpec::new(seed, ops).with_mix(mix);
    let report = differential_run(config, &spec)?;
    writeln!(out, "{}", advseg_core::harness::Report::CSV_HEADER).map_err(io_err)?;
    writeln!(out, "{}", report.csv_row()).map_err(io_err)?;
    if report.is_clean() {
        return Ok(());
    }
    if let Some(d) = &report.first_divergence {
        writeln!(diag, "# first divergence at op {}: {:?}", d.op_index, d.kind).map_err(io_err)?;
        for op in &d.reproduction {
            writeln!(diag, "{}", Command::from(op)).map_err(io_err)?;
        }
    }
    Err(CliError::Mismatch {
        mismatches: report.mismatches + report.store_errors,
        audit_failures: report.audit_failures,
    })
}

pub const BENCH_HEADER: &str = "op,count,avg_touched,max_touched,ns_per_op";

#[derive(Debug, Clone, Copy, Default)]
struct BenchRow {
    count: u64,
    touched: u64,
    max_touched: usize,
    nanos: u128,
}

/// Replays a seeded workload on a tree, reporting touched nodes and wall
/// time per operation kind.
pub fn bench(config: &TreeConfig, ops: usize, seed: u64, out: &mut dyn Write) -> CliResult<()> {
    let workload = generate(&WorkloadSpec::new(seed, ops), config.leaves())?;
    let mut tree = Tree::new(config.clone())?;
    let mut rows = [BenchRow::default(); 3];
    for op in &workload {
        let began = Instant::now();
        match op {
            Op::Insert(r) => tree.insert(r)?,
            Op::Delete(r) => tree.delete(r)?,
            Op::Query(q) => {
                std::hint::black_box(tree.max_reserved(*q)?);
            }
        }
        let nanos = began.elapsed().as_nanos();
        let row = &mut rows[op.kind() as usize];
        row.count += 1;
        row.touched += tree.last_touched() as u64;
        row.max_touched = row.max_touched.max(tree.last_touched());
        row.nanos += nanos;
    }

    writeln!(out, "{BENCH_HEADER}").map_err(io_err)?;
    for kind in OpKind::ALL {
        let row = rows[kind as usize];
        let per = |total: f64| if row.count == 0 { 0.0 } else { total / row.count as f64 };
        writeln!(
            out,
            "{},{},{:.2},{},{:.0}",
            kind.name(),
            row.count,
            per(row.touched as f64),
            row.max_touched,
            per(row.nanos as f64)
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Writes a seeded workload file. With `inverse`, appends deletes of every
/// reservation still outstanding and a final full-span query, which then
/// reports 0.
pub fn generate_workload(
    config: &TreeConfig,
    seed: u64,
    ops: usize,
    mix: OpMix,
    inverse: bool,
    out: &mut dyn Write,
) -> CliResult<()> {
    let workload = generate(&WorkloadSpec::new(seed, ops).with_mix(mix), config.leaves())?;
    let mut outstanding: Vec<Reservation> = Vec::new();
    for op in &workload {
        writeln!(out, "{}", Command::from(op)).map_err(io_err)?;
        match op {
            Op::Insert(r) => outstanding.push(*r),
            Op::Delete(r) => {
                let i = outstanding
                    .iter()
                    .rposition(|o| o == r)
                    .expect("generated delete is outstanding");
                outstanding.remove(i);
            }
            Op::Query(_) => {}
        }
    }
    if inverse {
        writeln!(out, "# inverse suffix").map_err(io_err)?;
        for r in outstanding.iter().rev() {
            writeln!(out, "{}", Command::from(&Op::Delete(*r))).map_err(io_err)?;
        }
        writeln!(out, "query 0 {}", config.leaves()).map_err(io_err)?;
    }
    Ok(())
}

/// Shape of the configured tree, one `key: value` per line.
pub fn info(file: &ConfigFile, config: &TreeConfig, out: &mut dyn Write) -> CliResult<()> {
    let layout = advseg_core::level_table(config)?;
    let divisors: Vec<String> = config.divisors().iter().map(u32::to_string).collect();
    let mut lines = vec![
        format!("divisors: {}", divisors.join(",")),
        format!("granularity_g: {}", config.granularity()),
        format!("origin: {}", config.origin()),
        format!("span_seconds: {}", config.span()),
        format!("leaves: {}", config.leaves()),
        format!("levels: {}", config.levels()),
        format!("nodes: {}", layout.len()),
    ];
    if let Some(c) = file.capacity {
        lines.push(format!("capacity: {c}"));
    }
    for l in 1..=layout.levels() {
        lines.push(format!(
            "level {l}: nodes {}..={} slots_per_node {}",
            layout.sigma(l),
            layout.delta(l),
            layout.slots_per_node(l)
        ));
    }
    for line in lines {
        writeln!(out, "{line}").map_err(io_err)?;
    }
    Ok(())
}

fn io_err(source: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source,
    }
}
