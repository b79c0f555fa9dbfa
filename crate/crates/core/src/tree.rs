//! The reservation tree.
//!
//! Every node stores two values:
//!
//! * `nv`, the bandwidth reserved over exactly the node's whole interval;
//! * `mv`, the largest amount reserved anywhere strictly below the node,
//!   not counting the node's own `nv`.
//!
//! The load of slot `t` is the sum of `nv` along the root-to-leaf path of `t`,
//! and for every internal node `mv = max over children (nv_c + mv_c)`. An
//! update walks at most two root-to-leaf paths (the edges of the interval)
//! and adds the bandwidth to the canonical nodes between them, so all
//! operations run in `O(L * max X)` time regardless of how many reservations
//! the tree holds.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::config::{Bandwidth, Interval, Reservation, Slot, TreeConfig};
use crate::error::{Error, Result};
use crate::layout::LevelTable;

/// Per-node pair of values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct NodeRecord {
    pub nv: Bandwidth,
    pub mv: Bandwidth,
}

/// Outcome of a capacity-checked insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Admitted,
    Rejected,
}

impl Admission {
    pub fn is_admitted(self) -> bool {
        self == Admission::Admitted
    }
}

/// First node whose `mv` disagrees with its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditViolation {
    pub index: usize,
    pub level: usize,
    pub expected: i128,
    pub found: Bandwidth,
}

impl std::fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "node {} (level {}): mv is {}, expected {}",
            self.index, self.level, self.found, self.expected
        )
    }
}

/// Order in which the children overlapped by an update are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    LeftToRight,
    /// The larger of the two edge parts first, then the middle children,
    /// then the smaller edge part.
    LargestEdgeFirst,
}

struct ChildOrder {
    first: usize,
    count: usize,
    swap_edges: bool,
    pos: usize,
}

impl Iterator for ChildOrder {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.pos == self.count {
            return None;
        }
        let pos = self.pos;
        self.pos += 1;
        let last = self.first + self.count - 1;
        Some(if !self.swap_edges {
            self.first + pos
        } else if pos == 0 {
            last
        } else if pos == self.count - 1 {
            self.first
        } else {
            self.first + pos
        })
    }
}

/// Where an interrupted update stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    /// Nothing was changed at or below this node.
    Enter(usize),
    /// All children of this node were updated but its `mv` was not.
    Leave(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    Capacity,
    Overflow,
}

#[derive(Debug, Clone, Copy)]
struct Stop {
    mark: Mark,
    reason: Reason,
}

struct Update {
    bandwidth: Bandwidth,
    capacity: Option<Bandwidth>,
    order: Order,
    touched: usize,
}

/// An advance-reservation segment tree over a fixed slotted universe.
///
/// The shape is fixed by the [`TreeConfig`]; no operation ever allocates or
/// moves a node. Mutations need `&mut self`; any number of readers may call
/// [`Tree::max_reserved`] concurrently.
#[derive(Debug)]
pub struct Tree {
    config: TreeConfig,
    layout: LevelTable,
    nodes: Vec<NodeRecord>,
    epoch: u64,
    last_touched: AtomicUsize,
}

impl Clone for Tree {
    fn clone(&self) -> Self {
        Tree {
            config: self.config.clone(),
            layout: self.layout.clone(),
            nodes: self.nodes.clone(),
            epoch: self.epoch,
            last_touched: AtomicUsize::new(self.last_touched()),
        }
    }
}

/// Builds an empty tree for `config`.
pub fn build(config: TreeConfig) -> Result<Tree> {
    Tree::new(config)
}

impl Tree {
    pub fn new(config: TreeConfig) -> Result<Self> {
        let layout = LevelTable::new(config.divisors())?;
        let nodes = vec![NodeRecord::default(); layout.len()];
        Ok(Tree {
            config,
            layout,
            nodes,
            epoch: 0,
            last_touched: AtomicUsize::new(0),
        })
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn layout(&self) -> &LevelTable {
        &self.layout
    }

    pub fn leaves(&self) -> Slot {
        self.layout.leaves()
    }

    /// The whole node array, index 0 holding node 1.
    pub fn records(&self) -> &[NodeRecord] {
        &self.nodes
    }

    /// Record of node `index` (1-based).
    pub fn record(&self, index: usize) -> Option<NodeRecord> {
        index.checked_sub(1).and_then(|i| self.nodes.get(i)).copied()
    }

    /// Overwrites a record without repairing anything. Meant for fault
    /// injection in tests; the tree is inconsistent afterwards unless the
    /// caller knows better.
    pub fn set_record(&mut self, index: usize, record: NodeRecord) {
        self.nodes[index - 1] = record;
        self.epoch += 1;
    }

    /// Mutation counter, bumped by every operation that may change a record.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Nodes read or written by the most recent operation.
    pub fn last_touched(&self) -> usize {
        self.last_touched.load(Ordering::Relaxed)
    }

    fn set_touched(&self, touched: usize) {
        self.last_touched.store(touched, Ordering::Relaxed);
    }

    fn check_reservation(&self, r: &Reservation) -> Result<()> {
        self.config.check_interval(r.interval)?;
        if r.bandwidth <= 0 {
            return Err(Error::NonPositiveBandwidth(r.bandwidth));
        }
        Ok(())
    }

    /// Adds `r.bandwidth` to every slot of `r.interval`.
    pub fn insert(&mut self, r: &Reservation) -> Result<()> {
        self.check_reservation(r)?;
        self.update(r.interval, r.bandwidth, None, Order::LeftToRight)
            .map(|_| ())
    }

    /// Removes a reservation previously added with [`Tree::insert`]. The tree
    /// keeps no ledger, so removing something never inserted is not
    /// detected and simply makes the affected loads negative.
    pub fn delete(&mut self, r: &Reservation) -> Result<()> {
        self.check_reservation(r)?;
        self.update(r.interval, -r.bandwidth, None, Order::LeftToRight)
            .map(|_| ())
    }

    /// Inserts `r` only if the resulting load stays within `capacity` on
    /// every slot of the interval. A rejected call leaves the tree exactly
    /// as it was.
    pub fn insert_checked(&mut self, r: &Reservation, capacity: Bandwidth) -> Result<Admission> {
        self.check_reservation(r)?;
        if capacity < 0 {
            return Err(Error::NegativeCapacity(capacity));
        }
        self.update(r.interval, r.bandwidth, Some(capacity), Order::LargestEdgeFirst)
    }

    /// Largest total reservation over any slot of `q`.
    pub fn max_reserved(&self, q: Interval) -> Result<Bandwidth> {
        self.config.check_interval(q)?;
        let mut touched = 0;
        let res = self.max_below(1, 1, 0, q.start(), q.end(), &mut touched);
        self.set_touched(touched);
        res
    }

    /// Total reserved at `slot`, summed along the root-to-leaf path.
    pub fn load_at(&self, slot: Slot) -> Result<Bandwidth> {
        let q = Interval::new(slot, slot + 1)?;
        self.config.check_interval(q)?;
        let mut node = 1;
        let mut total: Bandwidth = 0;
        for level in 1..=self.layout.levels() {
            total = total
                .checked_add(self.nodes[node - 1].nv)
                .ok_or(Error::Overflow("slot load"))?;
            if level < self.layout.levels() {
                let child_size = self.layout.slots_per_node(level + 1);
                let start = self.layout.node_start(level, node);
                let ordinal = ((slot - start) / child_size) as usize;
                node = self.layout.child_unchecked(level, node, ordinal);
            }
        }
        Ok(total)
    }

    /// Checks the `mv` equation at every internal node and `mv == 0` at every
    /// leaf. Levels are scanned from the leaves up, so the reported violation
    /// is the deepest one (lowest index within its level).
    pub fn audit(&self) -> std::result::Result<(), AuditViolation> {
        let levels = self.layout.levels();
        for level in (1..=levels).rev() {
            for node in self.layout.sigma(level)..=self.layout.delta(level) {
                let found = self.nodes[node - 1].mv;
                let expected = match self.layout.divisor(level) {
                    None => 0,
                    Some(x) => (0..x as usize)
                        .map(|c| {
                            let r = self.nodes[self.layout.child_unchecked(level, node, c) - 1];
                            i128::from(r.nv) + i128::from(r.mv)
                        })
                        .max()
                        .unwrap_or(0),
                };
                if i128::from(found) != expected {
                    return Err(AuditViolation {
                        index: node,
                        level,
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(())
    }

    fn update(
        &mut self,
        interval: Interval,
        bandwidth: Bandwidth,
        capacity: Option<Bandwidth>,
        order: Order,
    ) -> Result<Admission> {
        self.epoch += 1;
        let mut up = Update {
            bandwidth,
            capacity,
            order,
            touched: 0,
        };
        let outcome = self.apply(1, 1, 0, interval.start(), interval.end(), 0, &mut up);
        let mut touched = up.touched;
        let result = match outcome {
            Ok(()) => Ok(Admission::Admitted),
            Err(stop) => {
                touched += self.cleanup(interval, bandwidth, stop.mark, order);
                match stop.reason {
                    Reason::Capacity => Ok(Admission::Rejected),
                    Reason::Overflow => Err(Error::Overflow("bandwidth")),
                }
            }
        };
        self.set_touched(touched);
        result
    }

    #[inline]
    fn children(&self, level: usize, node_start: Slot, start: Slot, end: Slot, order: Order) -> (Slot, ChildOrder) {
        let child_size = self.layout.slots_per_node(level + 1);
        let first = ((start - node_start) / child_size) as usize;
        let last = ((end - 1 - node_start) / child_size) as usize;
        let swap_edges = order == Order::LargestEdgeFirst && last > first && {
            let left_part = node_start + (first as Slot + 1) * child_size - start;
            let right_part = end - (node_start + last as Slot * child_size);
            right_part > left_part
        };
        (
            child_size,
            ChildOrder {
                first,
                count: last - first + 1,
                swap_edges,
                pos: 0,
            },
        )
    }

    /// Recomputes `mv` of an internal node from all of its children. Leaves
    /// the record untouched on overflow.
    fn recompute_mv(&mut self, level: usize, node: usize) -> Option<()> {
        let x = self.layout.divisor(level)? as usize;
        let mut best: Option<Bandwidth> = None;
        for c in 0..x {
            let r = self.nodes[self.layout.child_unchecked(level, node, c) - 1];
            let v = r.nv.checked_add(r.mv)?;
            best = Some(best.map_or(v, |b| b.max(v)));
        }
        self.nodes[node - 1].mv = best?;
        Some(())
    }

    #[allow(clippy::too_many_arguments)]
    fn apply(
        &mut self,
        level: usize,
        node: usize,
        node_start: Slot,
        start: Slot,
        end: Slot,
        prefix: Bandwidth,
        up: &mut Update,
    ) -> std::result::Result<(), Stop> {
        up.touched += 1;
        let rec = self.nodes[node - 1];
        let size = self.layout.slots_per_node(level);
        let overflow = |mark| Stop {
            mark,
            reason: Reason::Overflow,
        };

        if start == node_start && end == node_start + size {
            let nv = rec.nv.checked_add(up.bandwidth).ok_or(overflow(Mark::Enter(node)))?;
            let load = nv
                .checked_add(rec.mv)
                .and_then(|v| v.checked_add(prefix))
                .ok_or(overflow(Mark::Enter(node)))?;
            if let Some(cap) = up.capacity {
                if load > cap {
                    return Err(Stop {
                        mark: Mark::Enter(node),
                        reason: Reason::Capacity,
                    });
                }
            }
            self.nodes[node - 1].nv = nv;
            return Ok(());
        }

        let child_prefix = prefix.checked_add(rec.nv).ok_or(overflow(Mark::Enter(node)))?;
        let (child_size, order) = self.children(level, node_start, start, end, up.order);
        let visited = order.count;
        for ordinal in order {
            let child = self.layout.child_unchecked(level, node, ordinal);
            let child_start = node_start + ordinal as Slot * child_size;
            let s = start.max(child_start);
            let e = end.min(child_start + child_size);
            self.apply(level + 1, child, child_start, s, e, child_prefix, up)?;
        }
        // siblings outside the interval are read by the mv recomputation
        up.touched += self.layout.divisor(level).unwrap_or(0) as usize - visited;
        self.recompute_mv(level, node).ok_or(overflow(Mark::Leave(node)))
    }

    /// Undoes an interrupted [`Tree::apply`] by replaying it with the
    /// opposite sign up to `mark`. Returns the number of nodes touched.
    fn cleanup(&mut self, interval: Interval, bandwidth: Bandwidth, mark: Mark, order: Order) -> usize {
        let mut touched = 0;
        self.cleanup_rec(
            1,
            1,
            0,
            interval.start(),
            interval.end(),
            bandwidth,
            mark,
            order,
            &mut touched,
        );
        touched
    }

    /// Returns true once the mark has been reached.
    #[allow(clippy::too_many_arguments)]
    fn cleanup_rec(
        &mut self,
        level: usize,
        node: usize,
        node_start: Slot,
        start: Slot,
        end: Slot,
        bandwidth: Bandwidth,
        mark: Mark,
        order: Order,
        touched: &mut usize,
    ) -> bool {
        *touched += 1;
        if mark == Mark::Enter(node) {
            return true;
        }
        let size = self.layout.slots_per_node(level);
        if start == node_start && end == node_start + size {
            // restores a value that was stored before, cannot overflow
            self.nodes[node - 1].nv -= bandwidth;
            return false;
        }
        let (child_size, children) = self.children(level, node_start, start, end, order);
        let visited = children.count;
        let mut halted = false;
        for ordinal in children {
            let child = self.layout.child_unchecked(level, node, ordinal);
            let child_start = node_start + ordinal as Slot * child_size;
            let s = start.max(child_start);
            let e = end.min(child_start + child_size);
            if self.cleanup_rec(level + 1, child, child_start, s, e, bandwidth, mark, order, touched) {
                halted = true;
                break;
            }
        }
        *touched += self.layout.divisor(level).unwrap_or(0) as usize - visited;
        let restored = self.recompute_mv(level, node);
        debug_assert!(restored.is_some());
        halted || mark == Mark::Leave(node)
    }

    /// Maximum load over `[start, end)` relative to the node, i.e. excluding
    /// the `nv` of its strict ancestors.
    pub(crate) fn max_below(
        &self,
        level: usize,
        node: usize,
        node_start: Slot,
        start: Slot,
        end: Slot,
        touched: &mut usize,
    ) -> Result<Bandwidth> {
        *touched += 1;
        let rec = self.nodes[node - 1];
        let size = self.layout.slots_per_node(level);
        let overflow = Error::Overflow("query result");
        if start == node_start && end == node_start + size {
            return rec.nv.checked_add(rec.mv).ok_or(overflow);
        }
        let (child_size, children) = self.children(level, node_start, start, end, Order::LeftToRight);
        let mut best: Option<Bandwidth> = None;
        for ordinal in children {
            let child = self.layout.child_unchecked(level, node, ordinal);
            let child_start = node_start + ordinal as Slot * child_size;
            let s = start.max(child_start);
            let e = end.min(child_start + child_size);
            let v = if s == child_start && e == child_start + child_size {
                // wholly covered middle child
                *touched += 1;
                let c = self.nodes[child - 1];
                c.nv.checked_add(c.mv).ok_or(overflow.clone())?
            } else {
                self.max_below(level + 1, child, child_start, s, e, touched)?
            };
            best = Some(best.map_or(v, |b| b.max(v)));
        }
        // at least one child overlaps a non-empty interval
        rec.nv.checked_add(best.unwrap_or(0)).ok_or(overflow)
    }

    /// Records the touch count of an operation run outside this module.
    pub(crate) fn report_touched(&self, touched: usize) {
        self.set_touched(touched);
    }

    /// Zeroes every record in the subtree of root child `ordinal` and
    /// repairs the root. Used by the wrapping window to recycle a half.
    pub(crate) fn reset_root_child(&mut self, ordinal: usize) {
        self.epoch += 1;
        let levels = self.layout.levels();
        let Some(x) = self.layout.divisor(1) else {
            return;
        };
        for level in 2..=levels {
            let per_child = self.layout.nodes_on_level(level) / x as usize;
            let first = self.layout.sigma(level) + ordinal * per_child;
            self.nodes[first - 1..first - 1 + per_child].fill(NodeRecord::default());
        }
        let repaired = self.recompute_mv(1, 1);
        debug_assert!(repaired.is_some());
    }
}
