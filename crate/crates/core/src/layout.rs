//! Pointer-free layout of the tree in a flat array.
//!
//! Nodes are numbered from 1 level by level (heap order). Level `l` starts at
//! index `sigma(l)` and holds `X_1 * ... * X_{l-1}` nodes; the children of
//! node `N` on level `l` are `sigma(l+1) + (N - sigma(l)) * X_l + c` for
//! `0 <= c < X_l`. Levels are 1-based as well, the root is on level 1 and the
//! leaves on level `L`.

use crate::config::{Interval, Slot, TreeConfig};
use crate::error::{Error, Result};

/// Per-level offsets and interval sizes. Every vector is indexed by
/// `level - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelTable {
    divisors: Vec<u32>,
    delta: Vec<usize>,
    sigma: Vec<usize>,
    width: Vec<usize>,
    slots_per_node: Vec<Slot>,
}

/// Builds the level table for `config`.
pub fn level_table(config: &TreeConfig) -> Result<LevelTable> {
    LevelTable::new(config.divisors())
}

impl LevelTable {
    pub fn new(divisors: &[u32]) -> Result<Self> {
        let levels = divisors.len() + 1;
        let mut delta = Vec::with_capacity(levels);
        let mut sigma = Vec::with_capacity(levels);
        let mut width = Vec::with_capacity(levels);

        let mut nodes_here: usize = 1;
        let mut total: usize = 0;
        for l in 0..levels {
            if l > 0 {
                let x = divisors[l - 1];
                if x < 2 {
                    return Err(Error::InvalidDivisor { level: l, value: x });
                }
                nodes_here = nodes_here
                    .checked_mul(x as usize)
                    .ok_or(Error::Overflow("nodes per level"))?;
            }
            sigma.push(total + 1);
            total = total.checked_add(nodes_here).ok_or(Error::Overflow("array size"))?;
            delta.push(total);
            width.push(nodes_here);
        }

        // bottom-up so the table is built by multiplication only
        let mut slots_per_node = vec![1 as Slot; levels];
        for l in (0..levels - 1).rev() {
            slots_per_node[l] = slots_per_node[l + 1]
                .checked_mul(Slot::from(divisors[l]))
                .ok_or(Error::Overflow("interval size"))?;
        }

        Ok(LevelTable {
            divisors: divisors.to_vec(),
            delta,
            sigma,
            width,
            slots_per_node,
        })
    }

    /// Number of levels `L`.
    pub fn levels(&self) -> usize {
        self.delta.len()
    }

    /// Total node count, `delta(L)`.
    pub fn len(&self) -> usize {
        self.delta[self.delta.len() - 1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of leaves `n`.
    pub fn leaves(&self) -> Slot {
        self.slots_per_node[0]
    }

    /// Nodes on levels `1..=level`.
    pub fn delta(&self, level: usize) -> usize {
        self.delta[level - 1]
    }

    /// Index of the first node on `level`.
    pub fn sigma(&self, level: usize) -> usize {
        self.sigma[level - 1]
    }

    /// Number of nodes on `level`.
    pub fn nodes_on_level(&self, level: usize) -> usize {
        self.width[level - 1]
    }

    /// Interval size, in slots, of every node on `level`.
    pub fn slots_per_node(&self, level: usize) -> Slot {
        self.slots_per_node[level - 1]
    }

    /// Branching factor `X_level`, `None` on the leaf level.
    pub fn divisor(&self, level: usize) -> Option<u32> {
        self.divisors.get(level - 1).copied()
    }

    pub fn divisors(&self) -> &[u32] {
        &self.divisors
    }

    pub fn delta_table(&self) -> &[usize] {
        &self.delta
    }

    pub fn sigma_table(&self) -> &[usize] {
        &self.sigma
    }

    fn check_node(&self, level: usize, node: usize) -> Result<()> {
        if level == 0 || level > self.levels() {
            return Err(Error::LevelOutOfRange {
                level,
                levels: self.levels(),
            });
        }
        if node < self.sigma(level) || node > self.delta(level) {
            return Err(Error::NodeOutOfRange { level, node });
        }
        Ok(())
    }

    /// Index of child `ordinal` of `node` on `level`.
    pub fn child_index(&self, level: usize, node: usize, ordinal: usize) -> Result<usize> {
        self.check_node(level, node)?;
        let x = self.divisor(level).ok_or(Error::LevelOutOfRange {
            level,
            levels: self.levels() - 1,
        })?;
        if ordinal >= x as usize {
            return Err(Error::ChildOutOfRange { ordinal, divisor: x });
        }
        Ok(self.child_unchecked(level, node, ordinal))
    }

    #[inline]
    pub(crate) fn child_unchecked(&self, level: usize, node: usize, ordinal: usize) -> usize {
        self.sigma[level] + (node - self.sigma[level - 1]) * self.divisors[level - 1] as usize + ordinal
    }

    /// Index of the parent of `node`, `None` for the root.
    pub fn parent_index(&self, level: usize, node: usize) -> Result<Option<usize>> {
        self.check_node(level, node)?;
        if level == 1 {
            return Ok(None);
        }
        let x = self.divisors[level - 2] as usize;
        Ok(Some(self.sigma(level - 1) + (node - self.sigma(level)) / x))
    }

    /// Slot range covered by `node` on `level`.
    pub fn node_interval(&self, level: usize, node: usize) -> Result<Interval> {
        self.check_node(level, node)?;
        Ok(self.interval_unchecked(level, node))
    }

    #[inline]
    pub(crate) fn node_start(&self, level: usize, node: usize) -> Slot {
        (node - self.sigma[level - 1]) as Slot * self.slots_per_node[level - 1]
    }

    #[inline]
    pub(crate) fn interval_unchecked(&self, level: usize, node: usize) -> Interval {
        let start = self.node_start(level, node);
        Interval::new_unchecked(start, start + self.slots_per_node[level - 1])
    }

    /// Level holding flat index `node`.
    pub fn level_of(&self, node: usize) -> Option<usize> {
        if node == 0 || node > self.len() {
            return None;
        }
        Some(self.delta.partition_point(|&d| d < node) + 1)
    }

    /// Index of the leaf covering `slot`.
    pub fn leaf_of(&self, slot: Slot) -> Option<usize> {
        if slot >= self.leaves() {
            return None;
        }
        Some(self.sigma(self.levels()) + slot as usize)
    }
}
