//! Acceptance gate: every suite runs at full scale with its runtime budget
//! and prints one PASS/FAIL line (visible with `--nocapture`).

use std::time::{Duration, Instant};

use wimwc_core::props::{self, CriterionOutcome};

const SEED: u64 = 7;

fn gate(outcome: CriterionOutcome, elapsed: Duration, budget: Option<Duration>) {
    let within = budget.map(|b| elapsed <= b).unwrap_or(true);
    println!(
        "{} {:<30} [{:>8.2?}] {}",
        if outcome.passed && within { "PASS" } else { "FAIL" },
        outcome.name,
        elapsed,
        outcome.detail
    );
    assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
    if let Some(b) = budget {
        assert!(
            elapsed <= b,
            "{} took {:?}, budget {:?}",
            outcome.name,
            elapsed,
            b
        );
    }
}

#[test]
fn criterion_01_nonnegativity() {
    let t = Instant::now();
    let o = props::nonnegativity_suite(SEED, 1000);
    gate(o, t.elapsed(), Some(Duration::from_secs(30)));
}

#[test]
fn criterion_02_k2_reduction() {
    let t = Instant::now();
    let o = props::reduction_suite(SEED, 200);
    gate(o, t.elapsed(), None);
}

#[test]
fn criterion_03_total_correlation_identities() {
    let t = Instant::now();
    let o = props::identity_suite(SEED, 200);
    gate(o, t.elapsed(), None);
}

#[test]
fn criterion_04_partition_floor() {
    let t = Instant::now();
    let o = props::partition_floor_suite(SEED, 300);
    gate(o, t.elapsed(), Some(Duration::from_secs(60)));
}

#[test]
fn criterion_05_processing_and_noise() {
    let t = Instant::now();
    let o = props::processing_suite(SEED, 200);
    gate(o, t.elapsed(), None);
}

#[test]
fn criterion_06_dependence_balance() {
    let t = Instant::now();
    let o = props::dependence_balance_suite(SEED, 200);
    gate(o, t.elapsed(), Some(Duration::from_secs(120)));
}

#[test]
fn criterion_07_key_bound_sanity() {
    let t = Instant::now();
    let o = props::key_bound_sanity_suite(SEED);
    gate(o, t.elapsed(), None);
}

#[test]
fn criterion_08_optimizer_integrity() {
    let t = Instant::now();
    let o = props::optimizer_integrity_suite(SEED);
    gate(o, t.elapsed(), None);
}

#[test]
fn criterion_09_mac_region() {
    let t = Instant::now();
    let o = props::mac_region_suite(SEED);
    gate(o, t.elapsed(), Some(Duration::from_secs(600)));
}

#[test]
fn criterion_10_polytope_lp() {
    let t = Instant::now();
    let o = props::polytope_lp_suite(SEED, 100);
    gate(o, t.elapsed(), None);
}
