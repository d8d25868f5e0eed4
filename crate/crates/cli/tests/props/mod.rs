//! Property suites, one module per library module. Each property runs
//! [`CASES`] generated cases from a fixed-seed generator, so failures
//! reproduce exactly.

#![allow(dead_code)]

pub mod calibrate;
pub mod cleanse;
pub mod cli;
pub mod gen;
pub mod optics;
pub mod statcore;
pub mod synthgen;
pub mod timeseries;

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 1000;

pub type Property = fn() -> Result<(), String>;

/// Runs `test` over `CASES` values of `strategy`.
pub fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        max_global_rejects: 100 * CASES,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// `|a − b| ≤ tol · max(|a|, |b|, floor)`.
pub fn close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}

/// Every property, as `(module, name, runner)`.
pub fn all() -> Vec<(&'static str, &'static str, Property)> {
    let mut v = Vec::new();
    for (module, list) in [
        ("timeseries", timeseries::PROPERTIES),
        ("statcore", statcore::PROPERTIES),
        ("optics", optics::PROPERTIES),
        ("synthgen", synthgen::PROPERTIES),
        ("cleanse", cleanse::PROPERTIES),
        ("calibrate", calibrate::PROPERTIES),
        ("evaluate", evaluate::PROPERTIES),
        ("cli", cli::PROPERTIES),
    ] {
        v.extend(list.iter().map(|&(name, f)| (module, name, f)));
    }
    v
}
