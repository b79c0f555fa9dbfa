//! Absolute-time facade over a fixed tree.
//!
//! The physical tree spans `2H` slots, where `H` is the horizon: how far
//! into the future reservations may reach. Absolute slot `a` lives at
//! physical slot `(a - origin) mod 2H`. The window keeps the current time in
//! the earlier of its two logical halves; once time moves past that half,
//! the half is expired and its subtree is zeroed and reused for the slots
//! `2H` further ahead.
//!
//! The root divisor must be 2 so that each half is exactly one root subtree.

use crate::config::{Bandwidth, Interval, Reservation, Slot, TreeConfig};
use crate::error::{Error, Result};
use crate::tree::{Admission, Tree};

#[derive(Debug, Clone)]
pub struct WrappingWindow {
    tree: Tree,
    horizon: Slot,
    origin: Slot,
    window_start: Slot,
    now: Slot,
    wraps: u64,
    half_resets: u64,
}

/// A physical interval, possibly split in two at the end of the array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mapped {
    One(Interval),
    Two(Interval, Interval),
}

impl WrappingWindow {
    /// Creates a window whose current time is absolute slot `start`.
    pub fn new(config: TreeConfig, start: Slot) -> Result<Self> {
        match config.divisors().first() {
            Some(2) => {}
            other => return Err(Error::WindowRootDivisor(other.copied())),
        }
        let horizon = config.leaves() / 2;
        Ok(WrappingWindow {
            tree: Tree::new(config)?,
            horizon,
            origin: start,
            window_start: start,
            now: start,
            wraps: 0,
            half_resets: 0,
        })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    /// Horizon `H` in slots.
    pub fn horizon(&self) -> Slot {
        self.horizon
    }

    pub fn now(&self) -> Slot {
        self.now
    }

    /// Absolute slot at which the earlier logical half begins.
    pub fn window_start(&self) -> Slot {
        self.window_start
    }

    /// Absolute slot mapped to physical slot 0.
    pub fn origin(&self) -> Slot {
        self.origin
    }

    /// Root child (0 or 1) currently holding the earlier logical half.
    pub fn earlier_half(&self) -> usize {
        (((self.window_start - self.origin) / self.horizon) % 2) as usize
    }

    /// Number of half boundaries crossed so far.
    pub fn wraps(&self) -> u64 {
        self.wraps
    }

    /// Number of subtree resets performed so far. At most 2 per call to
    /// [`WrappingWindow::advance`], however far time jumps.
    pub fn half_resets(&self) -> u64 {
        self.half_resets
    }

    /// Moves the current time forward to `now`, recycling every half that
    /// has fully expired.
    pub fn advance(&mut self, now: Slot) -> Result<()> {
        if now < self.now {
            return Err(Error::TimeRegression { now, last: self.now });
        }
        let crossed = (now - self.window_start) / self.horizon;
        if crossed > 0 {
            let first = self.earlier_half();
            for i in 0..crossed.min(2) as usize {
                self.tree.reset_root_child((first + i) % 2);
                self.half_resets += 1;
            }
            self.window_start += crossed * self.horizon;
            self.wraps += crossed;
        }
        self.now = now;
        Ok(())
    }

    fn map(&self, start: Slot, end: Slot) -> Result<Mapped> {
        let interval = Interval::new(start, end)?;
        if start < self.now {
            return Err(Error::IntervalInPast {
                start,
                end,
                now: self.now,
            });
        }
        let horizon_end = self.now + self.horizon;
        if end > horizon_end {
            return Err(Error::BeyondHorizon {
                start,
                end,
                horizon_end,
            });
        }
        let span = 2 * self.horizon;
        let ps = (start - self.origin) % span;
        let pe = ps + interval.len();
        Ok(if pe <= span {
            Mapped::One(Interval::new_unchecked(ps, pe))
        } else {
            Mapped::Two(Interval::new_unchecked(ps, span), Interval::new_unchecked(0, pe - span))
        })
    }

    /// Capacity-checked reservation of absolute slots `[start, end)`, which
    /// must lie within `[now, now + H)`.
    pub fn reserve_abs(
        &mut self,
        start: Slot,
        end: Slot,
        bandwidth: Bandwidth,
        capacity: Bandwidth,
    ) -> Result<Admission> {
        match self.map(start, end)? {
            Mapped::One(iv) => self.tree.insert_checked(&Reservation::new(iv, bandwidth), capacity),
            Mapped::Two(a, b) => {
                let first = Reservation::new(a, bandwidth);
                if !self.tree.insert_checked(&first, capacity)?.is_admitted() {
                    return Ok(Admission::Rejected);
                }
                match self.tree.insert_checked(&Reservation::new(b, bandwidth), capacity) {
                    Ok(Admission::Admitted) => Ok(Admission::Admitted),
                    other => {
                        self.tree.delete(&first)?;
                        other
                    }
                }
            }
        }
    }

    /// Unconditional reservation of absolute slots `[start, end)`.
    pub fn insert_abs(&mut self, start: Slot, end: Slot, bandwidth: Bandwidth) -> Result<()> {
        match self.map(start, end)? {
            Mapped::One(iv) => self.tree.insert(&Reservation::new(iv, bandwidth)),
            Mapped::Two(a, b) => {
                let first = Reservation::new(a, bandwidth);
                self.tree.insert(&first)?;
                self.tree.insert(&Reservation::new(b, bandwidth)).inspect_err(|_| {
                    let _ = self.tree.delete(&first);
                })
            }
        }
    }

    /// Releases a reservation made earlier over absolute slots
    /// `[start, end)`. The interval must still lie within `[now, now + H)`.
    pub fn release_abs(&mut self, start: Slot, end: Slot, bandwidth: Bandwidth) -> Result<()> {
        match self.map(start, end)? {
            Mapped::One(iv) => self.tree.delete(&Reservation::new(iv, bandwidth)),
            Mapped::Two(a, b) => {
                let first = Reservation::new(a, bandwidth);
                self.tree.delete(&first)?;
                self.tree.delete(&Reservation::new(b, bandwidth)).inspect_err(|_| {
                    let _ = self.tree.insert(&first);
                })
            }
        }
    }

    /// Largest load over absolute slots `[start, end)`.
    pub fn query_abs(&self, start: Slot, end: Slot) -> Result<Bandwidth> {
        match self.map(start, end)? {
            Mapped::One(iv) => self.tree.max_reserved(iv),
            Mapped::Two(a, b) => {
                let left = self.tree.max_reserved(a)?;
                let touched = self.tree.last_touched();
                let right = self.tree.max_reserved(b)?;
                self.tree.report_touched(touched + self.tree.last_touched());
                Ok(left.max(right))
            }
        }
    }
}
