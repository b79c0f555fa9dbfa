//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p advseg-core --test acceptance -- --nocapture` to see them.

mod common;

use std::collections::HashMap;

use advseg_core::harness::{differential_run, generate, run_ops, RunOptions, SlotOracle, WorkloadSpec};
use advseg_core::{
    Admission, Finger, Interval, NodeRecord, Preset, Reservation, Slot, Tree, TreeConfig, WrappingWindow,
};
use common::explicit::ExplicitTree;
use common::{ceil_log2, verdict};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn binary(leaves_log2: usize) -> TreeConfig {
    TreeConfig::binary(leaves_log2 + 1).unwrap()
}

#[test]
fn oracle_equivalence() {
    let configs = [
        ("binary n=64", binary(6)),
        ("binary n=512", binary(9)),
        ("binary n=4096", binary(12)),
        ("paper-month n=9216", Preset::PaperMonth5Min.config(0).unwrap()),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (name, cfg)) in configs.iter().enumerate() {
        let report = differential_run(cfg, &WorkloadSpec::new(1000 + i as u64, 100_000)).unwrap();
        ok &= report.ops == 100_000 && report.mismatches == 0 && report.audit_failures == 0 && report.is_clean();
        detail.push(format!(
            "{name}: {} ops, {} mismatches, {} audit failures",
            report.ops, report.mismatches, report.audit_failures
        ));
    }
    verdict("oracle equivalence", ok, detail.join("; "));
}

/// Largest touched-node counts of inserts and queries over a seeded random
/// workload of `ops` operations.
fn touch_maxima(cfg: &TreeConfig, seed: u64, ops: usize) -> (usize, usize) {
    let workload = generate(&WorkloadSpec::new(seed, ops), cfg.leaves()).unwrap();
    let template = Tree::new(cfg.clone()).unwrap();
    let report = run_ops(|| template.clone(), cfg.leaves(), &workload, RunOptions::default()).unwrap();
    assert!(report.is_clean());
    (report.insert.max_touched, report.query.max_touched)
}

#[test]
fn touch_bound() {
    let mut ok = true;
    let mut detail = Vec::new();
    for lg in [8usize, 10, 12] {
        let bound = 4 * lg - 7;
        let (insert, query) = touch_maxima(&binary(lg), 7, 10_000);
        ok &= insert <= bound && query <= bound;
        detail.push(format!(
            "n=2^{lg}: insert max {insert}, query max {query}, bound {bound}"
        ));
    }
    verdict("touch bound 4 lg n - 7", ok, detail.join("; "));
}

#[test]
fn paper_config_reproduction() {
    let cfg = Preset::PaperMonth5Min.config(0).unwrap();
    let tree = Tree::new(cfg.clone()).unwrap();
    let ok = cfg.divisors() == [2, 2, 2, 2, 2, 3, 2, 2, 2, 3, 2, 2]
        && cfg.granularity() == 300
        && cfg.leaves() == 9216
        && cfg.span() == 32 * 24 * 60 * 60
        && tree.leaves() == 9216
        && tree.records().iter().all(|r| *r == NodeRecord::default());
    verdict(
        "paper config reproduction",
        ok,
        format!(
            "n = {}, span = {} s = {} days",
            cfg.leaves(),
            cfg.span(),
            cfg.span() / 86_400
        ),
    );
}

#[test]
fn logarithmic_scaling() {
    let maxima: Vec<(usize, usize)> = (8..=14)
        .map(|lg| {
            let (insert, query) = touch_maxima(&binary(lg), 11, 10_000);
            (lg, insert.max(query))
        })
        .collect();
    let ok = maxima.windows(2).all(|w| w[1].1 <= w[0].1 + 4);
    let detail = maxima
        .iter()
        .map(|(lg, m)| format!("2^{lg}:{m}"))
        .collect::<Vec<_>>()
        .join(" ");
    verdict("logarithmic scaling (<= 4 per level)", ok, detail);
}

#[test]
fn inverse_property() {
    let cfg = binary(10);
    let fresh = Tree::new(cfg.clone()).unwrap();
    let mut tree = fresh.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut batch: Vec<Reservation> = (0..10_000)
        .map(|_| common::reservation(&mut rng, cfg.leaves(), 1_000))
        .collect();

    // each pair in isolation on a loaded tree
    let mut pairwise = true;
    for r in batch.iter().take(2_000) {
        let before = tree.records().to_vec();
        tree.insert(r).unwrap();
        tree.delete(r).unwrap();
        pairwise &= tree.records() == &before[..];
        tree.insert(r).unwrap();
    }
    for r in batch.iter().take(2_000) {
        tree.delete(r).unwrap();
    }

    // all inserted, then deleted in a different order
    for r in &batch {
        tree.insert(r).unwrap();
    }
    batch.shuffle(&mut rng);
    for r in &batch {
        tree.delete(r).unwrap();
    }
    let restored = tree.records() == fresh.records();
    verdict(
        "inverse property",
        pairwise && restored,
        format!("10^4 pairs, pairwise identity {pairwise}, bulk restore {restored}"),
    );
}

#[test]
fn admission_atomicity() {
    let cfg = binary(9);
    let capacity = 1_000;
    let mut tree = Tree::new(cfg.clone()).unwrap();
    let mut oracle = SlotOracle::new(cfg.leaves());
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let (mut admitted, mut rejected, mut bad) = (0, 0, 0);
    let mut admitted_set = Vec::new();

    for i in 0..10_000 {
        // keep the tree near capacity by releasing old reservations
        if i % 4 == 3 && !admitted_set.is_empty() {
            let r: Reservation = admitted_set.swap_remove(rng.random_range(0..admitted_set.len()));
            tree.delete(&r).unwrap();
            oracle.apply(&advseg_core::harness::Op::Delete(r)).unwrap();
        }
        let r = common::reservation(&mut rng, cfg.leaves(), 400);
        let expected = oracle.max(r.interval).unwrap() + r.bandwidth <= capacity;
        let before = tree.records().to_vec();
        let mut plain = tree.clone();
        plain.insert(&r).unwrap();

        match tree.insert_checked(&r, capacity).unwrap() {
            Admission::Admitted => {
                admitted += 1;
                if !expected || tree.records() != plain.records() {
                    bad += 1;
                }
                oracle.apply(&advseg_core::harness::Op::Insert(r)).unwrap();
                admitted_set.push(r);
            }
            Admission::Rejected => {
                rejected += 1;
                if expected || tree.records() != &before[..] {
                    bad += 1;
                }
            }
        }
    }
    let ok = bad == 0 && tree.audit().is_ok() && admitted > 0 && rejected > 0;
    verdict(
        "admission atomicity",
        ok,
        format!("{admitted} admitted, {rejected} rejected, {bad} wrong or non-atomic"),
    );
}

#[test]
fn finger_equivalence() {
    let cfg = binary(12);
    let leaves = cfg.leaves();
    let mut tree = Tree::new(cfg.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..3_000 {
        tree.insert(&common::reservation(&mut rng, leaves, 100)).unwrap();
    }
    let probe_bound = ceil_log2(tree.layout().levels()) + 1;

    let mut finger = Finger::new();
    let (mut mismatches, mut max_probes, mut mutations) = (0, 0, 0);
    let mut center = leaves / 2;
    for pair in 0..10_000 {
        if pair % 500 == 499 {
            tree.insert(&common::reservation(&mut rng, leaves, 100)).unwrap();
            finger.invalidate();
            mutations += 1;
        }
        // drift the locality center and query two nearby intervals
        center = (center + rng.random_range(0..64)) % leaves;
        for _ in 0..2 {
            let len = 1 << rng.random_range(0..10u32);
            let start = center.saturating_sub(rng.random_range(0..len)).min(leaves - 1);
            let end = (start + len).min(leaves);
            let q = Interval::new(start, end).unwrap();
            let got = finger.query(&tree, q).unwrap();
            if got != tree.max_reserved(q).unwrap() {
                mismatches += 1;
            }
            max_probes = max_probes.max(finger.last_probes());
        }
    }
    let ok = mismatches == 0 && max_probes <= probe_bound;
    verdict(
        "finger equivalence",
        ok,
        format!(
            "20000 queries, {mismatches} mismatches, max probes {max_probes} <= {probe_bound}, {mutations} invalidations"
        ),
    );
}

#[test]
fn window_transparency() {
    let cfg = binary(6); // 64 physical slots, horizon 32
    let capacity = 500;
    let mut window = WrappingWindow::new(cfg, 1_000).unwrap();
    let horizon = window.horizon();
    let mut loads: HashMap<Slot, i64> = HashMap::new();
    let abs_max = |loads: &HashMap<Slot, i64>, s: Slot, e: Slot| {
        (s..e).map(|t| loads.get(&t).copied().unwrap_or(0)).max().unwrap()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut held: Vec<(Slot, Slot, i64)> = Vec::new();
    let (mut mismatches, mut audit_failures, mut dirty_halves) = (0, 0, 0);
    let mut last_wraps = 0;

    for _ in 0..10_000 {
        let now = window.now();
        match rng.random_range(0..10) {
            0..=1 => {
                window.advance(now + rng.random_range(1..=3)).unwrap();
                if window.wraps() != last_wraps {
                    last_wraps = window.wraps();
                    audit_failures += window.tree().audit().is_err() as u32;
                    // the half just recycled now holds the later logical half
                    let later = 1 - window.earlier_half();
                    let tree = window.tree();
                    let layout = tree.layout();
                    for level in 2..=layout.levels() {
                        let per = layout.nodes_on_level(level) / 2;
                        let first = layout.sigma(level) + later * per;
                        if (first..first + per).any(|i| tree.record(i).unwrap() != NodeRecord::default()) {
                            dirty_halves += 1;
                        }
                    }
                    let now = window.now();
                    held.retain(|&(s, _, _)| s >= now);
                }
            }
            2..=5 => {
                let start = now + rng.random_range(0..horizon);
                let end = rng.random_range(start + 1..=now + horizon);
                let bw = rng.random_range(1..=200);
                let expected = abs_max(&loads, start, end) + bw <= capacity;
                let got = window.reserve_abs(start, end, bw, capacity).unwrap().is_admitted();
                if got != expected {
                    mismatches += 1;
                }
                if got {
                    for t in start..end {
                        *loads.entry(t).or_insert(0) += bw;
                    }
                    held.push((start, end, bw));
                }
            }
            6 => {
                let now = window.now();
                held.retain(|&(s, _, _)| s >= now);
                if !held.is_empty() {
                    let (s, e, bw) = held.swap_remove(rng.random_range(0..held.len()));
                    window.release_abs(s, e, bw).unwrap();
                    for t in s..e {
                        *loads.get_mut(&t).unwrap() -= bw;
                    }
                }
            }
            _ => {
                let start = now + rng.random_range(0..horizon);
                let end = rng.random_range(start + 1..=now + horizon);
                if window.query_abs(start, end).unwrap() != abs_max(&loads, start, end) {
                    mismatches += 1;
                }
            }
        }
    }
    let wraps = window.wraps();
    let ok = mismatches == 0 && audit_failures == 0 && dirty_halves == 0 && wraps >= 6;
    verdict(
        "window transparency",
        ok,
        format!("{wraps} wraps, {mismatches} mismatches, {audit_failures} audit failures, {dirty_halves} dirty halves"),
    );
}

#[test]
fn layout_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let (mut configs, mut diverged) = (0, 0);
    for trial in 0..40 {
        let levels = rng.random_range(1..=6);
        let divisors: Vec<u32> = (1..levels).map(|_| rng.random_range(2..=5)).collect();
        let cfg = TreeConfig::new(1, divisors.clone(), 0).unwrap();
        let ops = generate(&WorkloadSpec::new(trial, 2_000), cfg.leaves()).unwrap();

        let mut flat = Tree::new(cfg.clone()).unwrap();
        let mut explicit = ExplicitTree::new(&divisors);
        use advseg_core::harness::{Op, ReservationStore};
        let mut same = true;
        for op in &ops {
            match op {
                Op::Insert(r) => {
                    flat.insert(r).unwrap();
                    ReservationStore::insert(&mut explicit, r).unwrap();
                }
                Op::Delete(r) => {
                    flat.delete(r).unwrap();
                    ReservationStore::delete(&mut explicit, r).unwrap();
                }
                Op::Query(q) => {
                    same &= flat.max_reserved(*q).unwrap() == explicit.max_reserved(*q).unwrap();
                }
            }
            same &= flat.records() == &explicit.records()[..];
        }
        configs += 1;
        diverged += (!same) as u32;
    }
    verdict(
        "layout equivalence",
        diverged == 0,
        format!("{configs} random configs (X in 2..=5, L <= 6), {diverged} diverged"),
    );
}
