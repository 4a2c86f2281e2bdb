//! Full verification battery as an integration target: one test per
//! criterion, so the harness prints one pass/fail line for each. The same
//! battery backs the CLI `verify` subcommand.

use bianchi_heights::acceptance::{format_line, run_criterion};

const SEED: u64 = 271828;

fn check(index: usize) {
    let r = run_criterion(index, SEED);
    println!("{}", format_line(&r));
    assert!(r.passed, "criterion {index} ({}) failed: {}", r.name, r.detail);
}

#[test]
fn criterion_01_gauss_sum_oracle() {
    check(1);
}

#[test]
fn criterion_02_two_variable_sum_oracle() {
    check(2);
}

#[test]
fn criterion_03_ramanujan_exact() {
    check(3);
}

#[test]
fn criterion_04_local_density_counts() {
    check(4);
}

#[test]
fn criterion_05_series_term_identity() {
    check(5);
}

#[test]
fn criterion_06_paired_factorization() {
    check(6);
}

#[test]
fn criterion_07_circle_exactness() {
    check(7);
}

#[test]
fn criterion_08_membership_experiment() {
    check(8);
}

#[test]
fn criterion_09_ball_growth() {
    check(9);
}

#[test]
fn criterion_10_row_rigidity() {
    check(10);
}

#[test]
fn criterion_11_monitored_trends() {
    check(11);
}

#[test]
fn criterion_12_congruence_counts() {
    check(12);
}
