//! Finite-difference audit of every analytic gradient: the sigmoid and
//! log-softmax heads, the termination gradient, and the two interest-policy
//! gradients (with respect to the interest logits and to the base policy's
//! weights). Each family gets a fuzzed batch compared against central
//! differences.
//!
//! Run with `cargo run --release --example gradient_check`.

use ioc::gradcheck::{check_all, report_csv, DEFAULT_FD_STEP, DEFAULT_FD_TOLERANCE};

fn main() {
    let reports = check_all(1, 500, DEFAULT_FD_TOLERANCE, DEFAULT_FD_STEP);
    for r in &reports {
        println!("{}", r.one_line());
    }
    std::fs::write("gradcheck.csv", report_csv(&reports)).expect("write gradcheck.csv");
    eprintln!("per-family summary written to gradcheck.csv");
    if reports.iter().any(|r| !r.pass) {
        std::process::exit(1);
    }
}
