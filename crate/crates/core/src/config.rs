//! Universe configuration and the value types shared by every module.
//!
//! Time is slotted: slot `t` covers `[origin + t*g, origin + (t+1)*g)` in
//! abstract time units. All intervals are half-open in slot units.

use std::fmt;

use crate::error::{Error, Result};

/// Amount of the reserved resource. Signed so that deletion can be expressed
/// as a negative update.
pub type Bandwidth = i64;

/// Slot index inside a universe.
pub type Slot = u64;

/// Divisor set for a 32-day month of five-minute slots (9216 leaves).
pub const PAPER_MONTH_DIVISORS: [u32; 12] = [2, 2, 2, 2, 2, 3, 2, 2, 2, 3, 2, 2];

/// Named configurations shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 32 days at 5 minute granularity.
    PaperMonth5Min,
    /// 1024 leaves, all levels binary, one time unit per slot.
    Binary1024,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::PaperMonth5Min, Preset::Binary1024];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PaperMonth5Min => "paper-month-5min",
            Preset::Binary1024 => "binary-1024",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn divisors(self) -> Vec<u32> {
        match self {
            Preset::PaperMonth5Min => PAPER_MONTH_DIVISORS.to_vec(),
            Preset::Binary1024 => vec![2; 10],
        }
    }

    /// Granularity in seconds used when a config file does not override it.
    pub fn default_granularity(self) -> u64 {
        match self {
            Preset::PaperMonth5Min => 300,
            Preset::Binary1024 => 1,
        }
    }

    pub fn config(self, origin: i64) -> Result<TreeConfig> {
        TreeConfig::new(self.default_granularity(), self.divisors(), origin)
    }
}

/// Shape of a tree: granularity, per-level branching factors and the time
/// origin. Validated on construction, so a `TreeConfig` value always
/// describes a buildable tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeConfig {
    granularity: u64,
    divisors: Vec<u32>,
    origin: i64,
    leaves: u64,
    span: u64,
}

impl TreeConfig {
    pub fn new(granularity: u64, divisors: Vec<u32>, origin: i64) -> Result<Self> {
        if granularity == 0 {
            return Err(Error::ZeroGranularity);
        }
        let mut leaves: u64 = 1;
        for (i, &x) in divisors.iter().enumerate() {
            if x < 2 {
                return Err(Error::InvalidDivisor { level: i + 1, value: x });
            }
            leaves = leaves.checked_mul(u64::from(x)).ok_or(Error::Overflow("leaf count"))?;
        }
        let span = leaves
            .checked_mul(granularity)
            .ok_or(Error::Overflow("universe span"))?;
        let span_i64 = i64::try_from(span).map_err(|_| Error::Overflow("universe span"))?;
        origin.checked_add(span_i64).ok_or(Error::Overflow("universe end"))?;
        Ok(TreeConfig {
            granularity,
            divisors,
            origin,
            leaves,
            span,
        })
    }

    /// Binary tree with `levels - 1` divisors of 2, unit granularity, origin 0.
    pub fn binary(levels: usize) -> Result<Self> {
        TreeConfig::new(1, vec![2; levels.saturating_sub(1)], 0)
    }

    pub fn granularity(&self) -> u64 {
        self.granularity
    }

    pub fn divisors(&self) -> &[u32] {
        &self.divisors
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    /// Number of levels, root and leaf level included.
    pub fn levels(&self) -> usize {
        self.divisors.len() + 1
    }

    /// Number of leaves, i.e. slots in the universe.
    pub fn leaves(&self) -> u64 {
        self.leaves
    }

    /// Size of the universe in abstract time units.
    pub fn span(&self) -> u64 {
        self.span
    }

    /// Slot containing `timestamp`.
    pub fn slot_of(&self, timestamp: i64) -> Result<Slot> {
        // span fits i64, checked in new()
        let end = self.origin + self.span as i64;
        if timestamp < self.origin || timestamp >= end {
            return Err(Error::TimestampOutOfRange {
                timestamp,
                origin: self.origin,
                end,
            });
        }
        Ok((timestamp - self.origin) as u64 / self.granularity)
    }

    /// Checks that `interval` lies inside `[0, leaves)`.
    pub fn check_interval(&self, interval: Interval) -> Result<()> {
        if interval.end > self.leaves {
            return Err(Error::IntervalOutOfRange {
                start: interval.start,
                end: interval.end,
                universe: self.leaves,
            });
        }
        Ok(())
    }
}

/// Half-open slot range `[start, end)`, never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    start: Slot,
    end: Slot,
}

impl Interval {
    pub fn new(start: Slot, end: Slot) -> Result<Self> {
        if start >= end {
            return Err(Error::EmptyInterval { start, end });
        }
        Ok(Interval { start, end })
    }

    pub(crate) fn new_unchecked(start: Slot, end: Slot) -> Self {
        debug_assert!(start < end);
        Interval { start, end }
    }

    pub fn start(&self) -> Slot {
        self.start
    }

    pub fn end(&self) -> Slot {
        self.end
    }

    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn contains_slot(&self, slot: Slot) -> bool {
        self.start <= slot && slot < self.end
    }

    /// Smallest interval covering both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A constant amount of bandwidth held over an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reservation {
    pub interval: Interval,
    pub bandwidth: Bandwidth,
}

impl Reservation {
    pub fn new(interval: Interval, bandwidth: Bandwidth) -> Self {
        Reservation { interval, bandwidth }
    }

    /// Convenience constructor from raw slot bounds.
    pub fn from_slots(start: Slot, end: Slot, bandwidth: Bandwidth) -> Result<Self> {
        Ok(Reservation::new(Interval::new(start, end)?, bandwidth))
    }
}
