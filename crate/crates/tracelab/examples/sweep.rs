#![allow(clippy::manual_is_multiple_of)]

//! Extended validation sweep beyond the acceptance suite: every
//! two-prime discriminant up to 35 at two Gaussian widths, the four-prime
//! discriminant 210, fourteen extra Hecke pairs, exact area identities up
//! to 1000 and counting identities up to trace 120.
//!
//! Run with `cargo run --release --example sweep`.

use tracelab::arith;
use tracelab::correspondence::*;
use tracelab::embeddings::CountCache;
use tracelab::selberg_transform::TestFunction;
use tracelab::trace_geometry::{GeometryConfig, TruncationBudget};

fn main() {
    let config = GeometryConfig::default();
    // Laplace correspondence across all two-prime discs up to 35, both widths
    for d in [6u64, 10, 14, 15, 21, 22, 26, 33, 34, 35] {
        for a in [0.5f64, 1.0] {
            let f = TestFunction::gaussian(a).unwrap();
            let budget = TruncationBudget::default_laplace(&f, arith::omega(d).unwrap());
            let counts = CountCache::new();
            let start = std::time::Instant::now();
            let v = verify_theorem1(d, &f, &budget, 1e-8, &config, &counts).unwrap();
            println!(
                "laplace d={d:<3} a={a}: |diff|={:.2e} budget={:.2e} pass={} tmax={} [{:?}]",
                v.abs_diff,
                v.error_budget,
                v.pass,
                budget.t_max,
                start.elapsed()
            );
            assert!(v.pass && v.error_budget < 1e-8);
        }
    }
    // four-prime discriminant
    let f = TestFunction::gaussian(1.0).unwrap();
    let budget = TruncationBudget::default_laplace(&f, 4);
    let counts = CountCache::new();
    let start = std::time::Instant::now();
    let v = verify_theorem1(210, &f, &budget, 1e-8, &config, &counts).unwrap();
    println!(
        "laplace d=210 a=1: |diff|={:.2e} budget={:.2e} pass={} tmax={} [{:?}]",
        v.abs_diff,
        v.error_budget,
        v.pass,
        budget.t_max,
        start.elapsed()
    );
    assert!(v.pass && v.error_budget < 1e-8);

    // Hecke correspondence: extra (d, p) pairs
    for (d, p) in [
        (6u64, 11u64),
        (6, 13),
        (10, 7),
        (14, 3),
        (14, 5),
        (15, 2),
        (15, 7),
        (21, 2),
        (22, 3),
        (26, 5),
        (33, 2),
        (34, 3),
        (35, 2),
        (35, 3),
    ] {
        let f = TestFunction::gaussian(1.0).unwrap();
        let budget = TruncationBudget::default_hecke(&f, p, arith::omega(d).unwrap());
        let counts = CountCache::new();
        let start = std::time::Instant::now();
        let v = verify_theorem2(d, p, &f, &budget, 1e-8, &config, &counts).unwrap();
        println!(
            "hecke d={d:<3} p={p:<2}: |diff|={:.2e} budget={:.2e} pass={} tmax={} [{:?}]",
            v.abs_diff,
            v.error_budget,
            v.pass,
            budget.t_max,
            start.elapsed()
        );
        assert!(v.pass && v.error_budget < 1e-8);
        assert!(v.sub_checks[0].pass);
    }
    // area identities for every admissible d up to 1000
    let mut n = 0;
    for d in 2..=1000u64 {
        if arith::is_squarefree(d).unwrap() {
            let om = arith::omega(d).unwrap();
            if om >= 2 && om % 2 == 0 {
                assert!(verify_area_identity(d).unwrap().pass, "d={d}");
                n += 1;
            }
        }
    }
    println!("area identities exact for {n} discriminants up to 1000");
    // counting identities deeper: t up to 120 for the ten discs
    let counts = CountCache::new();
    for d in [6u64, 10, 14, 15, 21, 22, 26, 33, 34, 35] {
        let verdicts = verify_counting_identities(d, 120, &counts).unwrap();
        assert!(verdicts.iter().all(|v| v.pass), "d={d}");
    }
    println!("counting identities exact for ten discriminants, t <= 120");
    println!("sweep complete");
}
