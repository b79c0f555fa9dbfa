use thiserror::Error;

use crate::config::{Bandwidth, Slot};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("divisor X_{level} = {value} is invalid, every divisor must be at least 2")]
    InvalidDivisor { level: usize, value: u32 },

    #[error("granularity must be positive")]
    ZeroGranularity,

    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),

    #[error("empty interval [{start}, {end}), start must be below end")]
    EmptyInterval { start: Slot, end: Slot },

    #[error("interval [{start}, {end}) lies outside the universe [0, {universe})")]
    IntervalOutOfRange { start: Slot, end: Slot, universe: Slot },

    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(Bandwidth),

    #[error("capacity must be non-negative, got {0}")]
    NegativeCapacity(Bandwidth),

    #[error("timestamp {timestamp} lies outside the universe [{origin}, {end})")]
    TimestampOutOfRange { timestamp: i64, origin: i64, end: i64 },

    #[error("level {level} out of range 1..={levels}")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("node {node} is not on level {level}")]
    NodeOutOfRange { level: usize, node: usize },

    #[error("child ordinal {ordinal} out of range for divisor {divisor}")]
    ChildOutOfRange { ordinal: usize, divisor: u32 },

    #[error("finger is stale: the tree was mutated after the finger was last used")]
    StaleFinger,

    #[error("time went backwards: {now} is earlier than {last}")]
    TimeRegression { now: Slot, last: Slot },

    #[error("interval [{start}, {end}) starts before the current time {now}")]
    IntervalInPast { start: Slot, end: Slot, now: Slot },

    #[error("interval [{start}, {end}) ends beyond the horizon {horizon_end}")]
    BeyondHorizon { start: Slot, end: Slot, horizon_end: Slot },

    #[error("a wrapping window needs a root divisor of 2, got {0:?}")]
    WindowRootDivisor(Option<u32>),

    #[error("reservation {start}..{end} x {bandwidth} is not outstanding")]
    NotInLedger {
        start: Slot,
        end: Slot,
        bandwidth: Bandwidth,
    },

    #[error("universe of {leaves} slots exceeds the oracle cap of {cap}")]
    OracleTooLarge { leaves: Slot, cap: Slot },

    #[error("invalid workload spec: {0}")]
    InvalidWorkload(String),
}
