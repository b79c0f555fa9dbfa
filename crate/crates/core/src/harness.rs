//! Brute-force oracle, seeded workload generator and differential runner.
//!
//! [`SlotOracle`] keeps one counter per slot and answers every query by a
//! linear scan. [`differential_run`] replays the same operation sequence
//! against a tree and the oracle in lockstep and reports any divergence
//! together with a shrunk reproduction.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Bandwidth, Interval, Reservation, Slot, TreeConfig};
use crate::error::{Error, Result};
use crate::tree::{AuditViolation, Tree};

/// Largest universe the oracle accepts.
pub const ORACLE_MAX_LEAVES: Slot = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Insert(Reservation),
    Delete(Reservation),
    Query(Interval),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Insert,
    Delete,
    Query,
}

impl OpKind {
    pub const ALL: [OpKind; 3] = [OpKind::Insert, OpKind::Delete, OpKind::Query];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Insert => "insert",
            OpKind::Delete => "delete",
            OpKind::Query => "query",
        }
    }
}

impl Op {
    pub fn kind(&self) -> OpKind {
        match self {
            Op::Insert(_) => OpKind::Insert,
            Op::Delete(_) => OpKind::Delete,
            Op::Query(_) => OpKind::Query,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Insert(r) => write!(f, "insert {} {} {}", r.interval.start(), r.interval.end(), r.bandwidth),
            Op::Delete(r) => write!(f, "delete {} {} {}", r.interval.start(), r.interval.end(), r.bandwidth),
            Op::Query(q) => write!(f, "query {} {}", q.start(), q.end()),
        }
    }
}

/// One counter per slot plus the multiset of outstanding reservations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotOracle {
    loads: Vec<Bandwidth>,
    ledger: HashMap<Reservation, usize>,
}

impl SlotOracle {
    pub fn new(leaves: Slot) -> Self {
        SlotOracle {
            loads: vec![0; leaves as usize],
            ledger: HashMap::new(),
        }
    }

    pub fn loads(&self) -> &[Bandwidth] {
        &self.loads
    }

    pub fn leaves(&self) -> Slot {
        self.loads.len() as Slot
    }

    /// Number of outstanding reservations, counting duplicates.
    pub fn outstanding(&self) -> usize {
        self.ledger.values().sum()
    }

    fn check(&self, iv: Interval) -> Result<std::ops::Range<usize>> {
        if iv.end() > self.leaves() {
            return Err(Error::IntervalOutOfRange {
                start: iv.start(),
                end: iv.end(),
                universe: self.leaves(),
            });
        }
        Ok(iv.start() as usize..iv.end() as usize)
    }

    pub fn max(&self, q: Interval) -> Result<Bandwidth> {
        let range = self.check(q)?;
        Ok(self.loads[range].iter().copied().max().unwrap_or(0))
    }

    fn add(&mut self, iv: Interval, bandwidth: Bandwidth) -> Result<()> {
        let range = self.check(iv)?;
        for load in &mut self.loads[range] {
            *load += bandwidth;
        }
        Ok(())
    }

    /// Applies `op`; queries return their answer.
    pub fn apply(&mut self, op: &Op) -> Result<Option<Bandwidth>> {
        match op {
            Op::Insert(r) => {
                self.add(r.interval, r.bandwidth)?;
                *self.ledger.entry(*r).or_insert(0) += 1;
                Ok(None)
            }
            Op::Delete(r) => {
                match self.ledger.get_mut(r) {
                    Some(count) if *count > 0 => {
                        *count -= 1;
                        if *count == 0 {
                            self.ledger.remove(r);
                        }
                    }
                    _ => {
                        return Err(Error::NotInLedger {
                            start: r.interval.start(),
                            end: r.interval.end(),
                            bandwidth: r.bandwidth,
                        })
                    }
                }
                self.add(r.interval, -r.bandwidth)?;
                Ok(None)
            }
            Op::Query(q) => self.max(*q).map(Some),
        }
    }

    /// Loads rebuilt from scratch out of the ledger.
    pub fn loads_from_ledger(&self) -> Vec<Bandwidth> {
        let mut loads = vec![0; self.loads.len()];
        for (r, &count) in &self.ledger {
            for load in &mut loads[r.interval.start() as usize..r.interval.end() as usize] {
                *load += r.bandwidth * count as Bandwidth;
            }
        }
        loads
    }
}

/// Free-function form of [`SlotOracle::apply`].
pub fn oracle_apply(oracle: &mut SlotOracle, op: &Op) -> Result<Option<Bandwidth>> {
    oracle.apply(op)
}

/// Relative frequency of each operation kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpMix {
    pub insert: f64,
    pub delete: f64,
    pub query: f64,
}

impl Default for OpMix {
    fn default() -> Self {
        OpMix {
            insert: 0.4,
            delete: 0.2,
            query: 0.4,
        }
    }
}

/// Relative frequency of short (1..=4 slots), medium (around `sqrt(n)`)
/// and near-full-span intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthMix {
    pub short: f64,
    pub medium: f64,
    pub long: f64,
}

impl Default for LengthMix {
    fn default() -> Self {
        LengthMix {
            short: 1.0 / 3.0,
            medium: 1.0 / 3.0,
            long: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub seed: u64,
    pub ops: usize,
    pub mix: OpMix,
    pub lengths: LengthMix,
    /// Inclusive bandwidth range of generated reservations.
    pub bandwidth: (Bandwidth, Bandwidth),
}

impl WorkloadSpec {
    pub fn new(seed: u64, ops: usize) -> Self {
        WorkloadSpec {
            seed,
            ops,
            mix: OpMix::default(),
            lengths: LengthMix::default(),
            bandwidth: (1, 100),
        }
    }

    pub fn with_mix(mut self, mix: OpMix) -> Self {
        self.mix = mix;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fractions = |name: &str, parts: [f64; 3]| -> Result<()> {
            if parts.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidWorkload(format!("{name} fractions must be non-negative")));
            }
            let sum: f64 = parts.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidWorkload(format!("{name} fractions sum to {sum}, not 1")));
            }
            Ok(())
        };
        fractions("op", [self.mix.insert, self.mix.delete, self.mix.query])?;
        fractions("length", [self.lengths.short, self.lengths.medium, self.lengths.long])?;
        let (lo, hi) = self.bandwidth;
        if lo <= 0 || hi < lo {
            return Err(Error::InvalidWorkload(format!("bad bandwidth range {lo}..={hi}")));
        }
        Ok(())
    }
}

fn pick<R: Rng>(rng: &mut R, weights: [f64; 3]) -> usize {
    let x: f64 = rng.random::<f64>() * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if x < acc {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Draws a random interval in `[0, leaves)` following `lengths`.
pub fn random_interval<R: Rng>(rng: &mut R, leaves: Slot, lengths: &LengthMix) -> Interval {
    let root = (leaves as f64).sqrt().round().max(1.0) as Slot;
    let (lo, hi) = match pick(rng, [lengths.short, lengths.medium, lengths.long]) {
        0 => (1, 4),
        1 => ((root / 2).max(1), 2 * root),
        _ => (leaves.saturating_sub(root).max(1), leaves),
    };
    let hi = hi.min(leaves);
    let lo = lo.min(hi);
    let len = rng.random_range(lo..=hi);
    let start = rng.random_range(0..=leaves - len);
    Interval::new_unchecked(start, start + len)
}

/// Deterministic operation sequence for a universe of `leaves` slots. Every
/// delete replays an outstanding insert; with nothing outstanding an insert
/// is generated instead.
pub fn generate(spec: &WorkloadSpec, leaves: Slot) -> Result<Vec<Op>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut outstanding: Vec<Reservation> = Vec::new();
    let mut ops = Vec::with_capacity(spec.ops);
    let (bw_lo, bw_hi) = spec.bandwidth;
    for _ in 0..spec.ops {
        let kind = pick(&mut rng, [spec.mix.insert, spec.mix.delete, spec.mix.query]);
        let op = match kind {
            1 if !outstanding.is_empty() => {
                let i = rng.random_range(0..outstanding.len());
                Op::Delete(outstanding.swap_remove(i))
            }
            2 => Op::Query(random_interval(&mut rng, leaves, &spec.lengths)),
            _ => {
                let r = Reservation::new(
                    random_interval(&mut rng, leaves, &spec.lengths),
                    rng.random_range(bw_lo..=bw_hi),
                );
                outstanding.push(r);
                Op::Insert(r)
            }
        };
        ops.push(op);
    }
    Ok(ops)
}

/// Anything that can stand in for the tree in a differential run.
pub trait ReservationStore {
    fn insert(&mut self, r: &Reservation) -> Result<()>;
    fn delete(&mut self, r: &Reservation) -> Result<()>;
    fn max_reserved(&self, q: Interval) -> Result<Bandwidth>;
    /// Nodes touched by the last operation.
    fn last_touched(&self) -> usize;
    fn audit(&self) -> std::result::Result<(), AuditViolation>;
}

impl ReservationStore for Tree {
    fn insert(&mut self, r: &Reservation) -> Result<()> {
        Tree::insert(self, r)
    }

    fn delete(&mut self, r: &Reservation) -> Result<()> {
        Tree::delete(self, r)
    }

    fn max_reserved(&self, q: Interval) -> Result<Bandwidth> {
        Tree::max_reserved(self, q)
    }

    fn last_touched(&self) -> usize {
        Tree::last_touched(self)
    }

    fn audit(&self) -> std::result::Result<(), AuditViolation> {
        Tree::audit(self)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpStats {
    pub count: u64,
    pub total_touched: u64,
    pub max_touched: usize,
}

impl OpStats {
    pub fn record(&mut self, touched: usize) {
        self.count += 1;
        self.total_touched += touched as u64;
        self.max_touched = self.max_touched.max(touched);
    }

    pub fn avg_touched(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total_touched as f64 / self.count as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DivergenceKind {
    /// A query answered differently.
    Mismatch { expected: Bandwidth, actual: Bandwidth },
    /// The store failed an operation the oracle accepted.
    StoreError(Error),
    /// The `mv` audit failed after a mutation.
    Audit(AuditViolation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// Position of the first diverging operation in the original sequence.
    pub op_index: usize,
    pub kind: DivergenceKind,
    /// A shortened sequence that still diverges.
    pub reproduction: Vec<Op>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub ops: usize,
    pub mismatches: u64,
    pub audit_failures: u64,
    pub store_errors: u64,
    pub max_touched: usize,
    pub insert: OpStats,
    pub delete: OpStats,
    pub query: OpStats,
    pub first_divergence: Option<Divergence>,
}

impl Report {
    pub const CSV_HEADER: &'static str = "ops,mismatches,max_touched,audit_failures";

    pub fn is_clean(&self) -> bool {
        self.mismatches == 0 && self.audit_failures == 0 && self.store_errors == 0
    }

    pub fn stats(&self, kind: OpKind) -> &OpStats {
        match kind {
            OpKind::Insert => &self.insert,
            OpKind::Delete => &self.delete,
            OpKind::Query => &self.query,
        }
    }

    fn stats_mut(&mut self, kind: OpKind) -> &mut OpStats {
        match kind {
            OpKind::Insert => &mut self.insert,
            OpKind::Delete => &mut self.delete,
            OpKind::Query => &mut self.query,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.ops, self.mismatches, self.max_touched, self.audit_failures
        )
    }

    /// Human-readable summary, one fact per line.
    pub fn text_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("ops {}", self.ops),
            format!("mismatches {}", self.mismatches),
            format!("audit_failures {}", self.audit_failures),
            format!("store_errors {}", self.store_errors),
            format!("max_touched {}", self.max_touched),
        ];
        for kind in OpKind::ALL {
            let s = self.stats(kind);
            lines.push(format!(
                "{} count {} avg_touched {:.2} max_touched {}",
                kind.name(),
                s.count,
                s.avg_touched(),
                s.max_touched
            ));
        }
        if let Some(d) = &self.first_divergence {
            lines.push(format!("first divergence at op {}: {:?}", d.op_index, d.kind));
            lines.push(format!("reproduction ({} ops):", d.reproduction.len()));
            lines.extend(d.reproduction.iter().map(|op| format!("  {op}")));
        }
        lines
    }
}

/// Options for [`run_ops`].
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Full audit after every `audit_every`-th mutation, and after the last
    /// operation. 0 disables audits.
    pub audit_every: usize,
    /// Reproductions longer than this are only prefix-truncated, not
    /// shrunk op by op.
    pub shrink_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            audit_every: 64,
            shrink_limit: 400,
        }
    }
}

/// First divergence of `store` from the oracle on `ops`, checking every
/// query and auditing after every mutation. `None` if the sequence is not
/// valid for the oracle or does not diverge.
fn first_divergence<S: ReservationStore>(
    store: &mut S,
    leaves: Slot,
    ops: &[Op],
) -> Option<Option<(usize, DivergenceKind)>> {
    let mut oracle = SlotOracle::new(leaves);
    for (i, op) in ops.iter().enumerate() {
        let expected = oracle.apply(op).ok()?;
        if let Some(kind) = step(store, op, expected).1 {
            return Some(Some((i, kind)));
        }
        if !matches!(op, Op::Query(_)) {
            if let Err(v) = store.audit() {
                return Some(Some((i, DivergenceKind::Audit(v))));
            }
        }
    }
    Some(None)
}

/// Runs one op on the store; returns touched count and divergence, if any.
fn step<S: ReservationStore>(store: &mut S, op: &Op, expected: Option<Bandwidth>) -> (usize, Option<DivergenceKind>) {
    let outcome = match op {
        Op::Insert(r) => store.insert(r).map(|_| None),
        Op::Delete(r) => store.delete(r).map(|_| None),
        Op::Query(q) => store.max_reserved(*q).map(Some),
    };
    let touched = store.last_touched();
    match (outcome, expected) {
        (Err(e), _) => (touched, Some(DivergenceKind::StoreError(e))),
        (Ok(Some(actual)), Some(expected)) if actual != expected => {
            (touched, Some(DivergenceKind::Mismatch { expected, actual }))
        }
        _ => (touched, None),
    }
}

/// Greedy shrink: drop ops one at a time, last to first, keeping each
/// removal that leaves a valid sequence that still diverges.
fn shrink<S: ReservationStore>(make: &impl Fn() -> S, leaves: Slot, mut ops: Vec<Op>) -> Vec<Op> {
    let mut i = ops.len();
    while i > 0 {
        i -= 1;
        if ops.len() == 1 {
            break;
        }
        let mut candidate = ops.clone();
        candidate.remove(i);
        if let Some(Some(_)) = first_divergence(&mut make(), leaves, &candidate) {
            ops = candidate;
            if let Some(Some((at, _))) = first_divergence(&mut make(), leaves, &ops) {
                ops.truncate(at + 1);
                i = i.min(ops.len());
            }
        }
    }
    ops
}

/// Replays `ops` on a store built by `make` and on a [`SlotOracle`] in
/// lockstep.
pub fn run_ops<S: ReservationStore>(
    make: impl Fn() -> S,
    leaves: Slot,
    ops: &[Op],
    options: RunOptions,
) -> Result<Report> {
    let mut store = make();
    let mut oracle = SlotOracle::new(leaves);
    let mut report = Report {
        ops: ops.len(),
        mismatches: 0,
        audit_failures: 0,
        store_errors: 0,
        max_touched: 0,
        insert: OpStats::default(),
        delete: OpStats::default(),
        query: OpStats::default(),
        first_divergence: None,
    };
    let mut first: Option<(usize, DivergenceKind)> = None;
    let mut mutations = 0usize;

    for (i, op) in ops.iter().enumerate() {
        let expected = oracle.apply(op)?;
        let (touched, divergence) = step(&mut store, op, expected);
        report.stats_mut(op.kind()).record(touched);
        report.max_touched = report.max_touched.max(touched);
        let mut divergence = divergence;
        match &divergence {
            Some(DivergenceKind::Mismatch { .. }) => report.mismatches += 1,
            Some(DivergenceKind::StoreError(_)) => report.store_errors += 1,
            _ => {}
        }
        if !matches!(op, Op::Query(_)) {
            mutations += 1;
            let due = options.audit_every > 0 && (mutations.is_multiple_of(options.audit_every) || i + 1 == ops.len());
            if due {
                if let Err(v) = store.audit() {
                    report.audit_failures += 1;
                    divergence = divergence.or(Some(DivergenceKind::Audit(v)));
                }
            }
        }
        if first.is_none() {
            first = divergence.map(|d| (i, d));
        }
    }

    if let Some((op_index, kind)) = first {
        let prefix = ops[..=op_index].to_vec();
        // the audit may have been sampled, so locate the exact first failure
        let reproduction = match first_divergence(&mut make(), leaves, &prefix) {
            Some(Some((at, _))) => {
                let prefix = prefix[..=at].to_vec();
                if prefix.len() <= options.shrink_limit {
                    shrink(&make, leaves, prefix)
                } else {
                    prefix
                }
            }
            _ => prefix,
        };
        report.first_divergence = Some(Divergence {
            op_index,
            kind,
            reproduction,
        });
    }
    Ok(report)
}

/// Generates the workload described by `spec` and replays it against a
/// fresh tree for `config` and the oracle.
pub fn differential_run(config: &TreeConfig, spec: &WorkloadSpec) -> Result<Report> {
    differential_run_with(config, spec, RunOptions::default())
}

pub fn differential_run_with(config: &TreeConfig, spec: &WorkloadSpec, options: RunOptions) -> Result<Report> {
    let leaves = config.leaves();
    if leaves > ORACLE_MAX_LEAVES {
        return Err(Error::OracleTooLarge {
            leaves,
            cap: ORACLE_MAX_LEAVES,
        });
    }
    let template = Tree::new(config.clone())?;
    let ops = generate(spec, leaves)?;
    run_ops(|| template.clone(), leaves, &ops, options)
}

/// True if `ops` diverges when replayed on a store from `make`.
pub fn reproduces<S: ReservationStore>(make: impl Fn() -> S, leaves: Slot, ops: &[Op]) -> bool {
    matches!(first_divergence(&mut make(), leaves, ops), Some(Some(_)))
}
