//! Restarting queries from inside the tree.
//!
//! A [`Finger`] remembers the root-to-node path of the previous query, down
//! to the deepest node that contained it, together with the sum of `nv` of
//! every node above each path entry. The next query merges its interval with
//! the previous one, binary-searches the path for the deepest node that
//! still contains the merged interval and resumes the descent there, seeded
//! with that entry's accumulated `nv`.

use crate::config::{Bandwidth, Interval, Slot};
use crate::error::{Error, Result};
use crate::tree::Tree;

/// One step of a remembered root-to-node path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathEntry {
    pub level: usize,
    pub index: usize,
    /// Sum of `nv` over the strict ancestors of this node.
    pub prefix_nv: Bandwidth,
}

/// Per-session traversal state. Not stored in the tree; every caller owns
/// its own finger.
#[derive(Debug, Clone, Default)]
pub struct Finger {
    last: Option<Interval>,
    path: Vec<PathEntry>,
    valid: bool,
    epoch: u64,
    probes: usize,
    restart: Option<PathEntry>,
}

impl Finger {
    /// An empty finger; the first query through it starts at the root.
    pub fn new() -> Self {
        Finger::default()
    }

    /// Forgets the remembered path. Idempotent.
    pub fn invalidate(&mut self) {
        self.valid = false;
        self.path.clear();
        self.last = None;
    }

    /// True if the finger holds a path (it may still be stale with respect
    /// to a tree that was mutated since).
    pub fn is_valid(&self) -> bool {
        self.valid
    }

    /// Whether the finger can be used on `tree` as it is now.
    pub fn is_current(&self, tree: &Tree) -> bool {
        self.valid && self.epoch == tree.epoch()
    }

    pub fn last_interval(&self) -> Option<Interval> {
        self.last
    }

    pub fn path(&self) -> &[PathEntry] {
        &self.path
    }

    /// Containment tests performed by the level search of the last query.
    pub fn last_probes(&self) -> usize {
        self.probes
    }

    /// Node the last query resumed from.
    pub fn last_restart(&self) -> Option<PathEntry> {
        self.restart
    }

    /// Same as [`Tree::max_reserved`], resuming from the remembered path.
    ///
    /// An invalidated or empty finger falls back to a root traversal. A
    /// finger that was valid but has since seen the tree mutate yields
    /// [`Error::StaleFinger`]; call [`Finger::invalidate`] and retry.
    pub fn query(&mut self, tree: &Tree, q: Interval) -> Result<Bandwidth> {
        query_with_finger(tree, self, q)
    }
}

/// Deepest path position whose node contains `merged`. Position 0 is the
/// root and always qualifies, so only positions `1..len` are probed.
fn search_path(tree: &Tree, path: &[PathEntry], merged: &Interval, probes: &mut usize) -> usize {
    let layout = tree.layout();
    let contains = |e: &PathEntry| layout.interval_unchecked(e.level, e.index).contains(merged);
    // invariant: path[lo] contains, path[hi..] does not
    let (mut lo, mut hi) = (0, path.len());
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        *probes += 1;
        if contains(&path[mid]) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!(contains(&path[lo]));
    debug_assert!(path.get(lo + 1).is_none_or(|e| !contains(e)));
    lo
}

/// Answers `q` starting from inside the tree when the finger allows it, and
/// updates the finger to the path of `q`.
pub fn query_with_finger(tree: &Tree, finger: &mut Finger, q: Interval) -> Result<Bandwidth> {
    tree.config().check_interval(q)?;
    let layout = tree.layout();
    let mut probes = 0;

    if finger.valid && !finger.path.is_empty() {
        if finger.epoch != tree.epoch() {
            return Err(Error::StaleFinger);
        }
        let merged = finger.last.map_or(q, |last| last.hull(&q));
        let keep = search_path(tree, &finger.path, &merged, &mut probes);
        finger.path.truncate(keep + 1);
    } else {
        finger.path.clear();
        finger.path.push(PathEntry {
            level: 1,
            index: 1,
            prefix_nv: 0,
        });
    }
    let restart = *finger.path.last().expect("path holds at least the root");

    // descend while q fits inside a single child
    let levels = layout.levels();
    let mut touched = 0;
    let mut cur = restart;
    loop {
        let iv = layout.interval_unchecked(cur.level, cur.index);
        if cur.level == levels || iv == q {
            break;
        }
        let child_size: Slot = layout.slots_per_node(cur.level + 1);
        let first = (q.start() - iv.start()) / child_size;
        let last = (q.end() - 1 - iv.start()) / child_size;
        if first != last {
            break;
        }
        touched += 1;
        let nv = tree.records()[cur.index - 1].nv;
        cur = PathEntry {
            level: cur.level + 1,
            index: layout.child_unchecked(cur.level, cur.index, first as usize),
            prefix_nv: cur.prefix_nv.checked_add(nv).ok_or(Error::Overflow("finger prefix"))?,
        };
        finger.path.push(cur);
    }

    let start = layout.node_start(cur.level, cur.index);
    let below = tree.max_below(cur.level, cur.index, start, q.start(), q.end(), &mut touched);
    tree.report_touched(touched);
    let value = below?
        .checked_add(cur.prefix_nv)
        .ok_or(Error::Overflow("query result"))?;

    finger.last = Some(q);
    finger.valid = true;
    finger.epoch = tree.epoch();
    finger.probes = probes;
    finger.restart = Some(restart);
    Ok(value)
}
