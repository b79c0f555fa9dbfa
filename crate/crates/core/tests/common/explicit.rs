//! Pointer-based reference tree. Same algorithms as the flat tree, but every
//! node owns its children and stores its own interval.

use advseg_core::harness::ReservationStore;
use advseg_core::{AuditViolation, Bandwidth, Error, Interval, NodeRecord, Reservation, Result};

#[derive(Debug, Clone)]
pub struct Node {
    start: u64,
    end: u64,
    nv: Bandwidth,
    mv: Bandwidth,
    children: Vec<Node>,
}

impl Node {
    fn build(start: u64, end: u64, divisors: &[u32]) -> Node {
        let children = match divisors.split_first() {
            None => Vec::new(),
            Some((&x, rest)) => {
                let step = (end - start) / u64::from(x);
                (0..u64::from(x))
                    .map(|c| Node::build(start + c * step, start + (c + 1) * step, rest))
                    .collect()
            }
        };
        Node {
            start,
            end,
            nv: 0,
            mv: 0,
            children,
        }
    }

    fn add(&mut self, start: u64, end: u64, bw: Bandwidth) {
        if start == self.start && end == self.end {
            self.nv += bw;
            return;
        }
        for child in &mut self.children {
            let s = start.max(child.start);
            let e = end.min(child.end);
            if s < e {
                child.add(s, e, bw);
            }
        }
        self.mv = self.children.iter().map(|c| c.nv + c.mv).max().unwrap();
    }

    fn max(&self, start: u64, end: u64) -> Bandwidth {
        if start == self.start && end == self.end {
            return self.nv + self.mv;
        }
        let below = self
            .children
            .iter()
            .filter_map(|c| {
                let s = start.max(c.start);
                let e = end.min(c.end);
                (s < e).then(|| c.max(s, e))
            })
            .max()
            .unwrap();
        self.nv + below
    }

    fn audit(&self) -> bool {
        if self.children.is_empty() {
            return self.mv == 0;
        }
        self.mv == self.children.iter().map(|c| c.nv + c.mv).max().unwrap() && self.children.iter().all(Node::audit)
    }
}

#[derive(Debug, Clone)]
pub struct ExplicitTree {
    root: Node,
    leaves: u64,
}

impl ExplicitTree {
    pub fn new(divisors: &[u32]) -> Self {
        let leaves = divisors.iter().map(|&x| u64::from(x)).product();
        ExplicitTree {
            root: Node::build(0, leaves, divisors),
            leaves,
        }
    }

    /// Records in breadth-first order, the order of the flat array.
    pub fn records(&self) -> Vec<NodeRecord> {
        let mut out = Vec::new();
        let mut level = vec![&self.root];
        while !level.is_empty() {
            out.extend(level.iter().map(|n| NodeRecord { nv: n.nv, mv: n.mv }));
            level = level.iter().flat_map(|n| n.children.iter()).collect();
        }
        out
    }

    fn check(&self, iv: Interval) -> Result<()> {
        if iv.end() > self.leaves {
            return Err(Error::IntervalOutOfRange {
                start: iv.start(),
                end: iv.end(),
                universe: self.leaves,
            });
        }
        Ok(())
    }
}

impl ReservationStore for ExplicitTree {
    fn insert(&mut self, r: &Reservation) -> Result<()> {
        self.check(r.interval)?;
        self.root.add(r.interval.start(), r.interval.end(), r.bandwidth);
        Ok(())
    }

    fn delete(&mut self, r: &Reservation) -> Result<()> {
        self.check(r.interval)?;
        self.root.add(r.interval.start(), r.interval.end(), -r.bandwidth);
        Ok(())
    }

    fn max_reserved(&self, q: Interval) -> Result<Bandwidth> {
        self.check(q)?;
        Ok(self.root.max(q.start(), q.end()))
    }

    fn last_touched(&self) -> usize {
        0
    }

    fn audit(&self) -> std::result::Result<(), AuditViolation> {
        if self.root.audit() {
            Ok(())
        } else {
            Err(AuditViolation {
                index: 0,
                level: 0,
                expected: 0,
                found: 0,
            })
        }
    }
}
