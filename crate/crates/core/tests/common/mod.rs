#![allow(dead_code)]

pub mod explicit;

use advseg_core::{Interval, Reservation, Slot};
use rand::Rng;

/// Prints one result line per acceptance criterion and fails the test if the
/// criterion does not hold.
pub fn verdict(name: &str, ok: bool, detail: impl std::fmt::Display) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {name}: {detail}");
    assert!(ok, "{name}: {detail}");
}

pub fn interval<R: Rng>(rng: &mut R, leaves: Slot) -> Interval {
    let a = rng.random_range(0..leaves);
    let b = rng.random_range(0..leaves);
    Interval::new(a.min(b), a.max(b) + 1).unwrap()
}

pub fn reservation<R: Rng>(rng: &mut R, leaves: Slot, max_bw: i64) -> Reservation {
    Reservation::new(interval(rng, leaves), rng.random_range(1..=max_bw))
}

pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}
