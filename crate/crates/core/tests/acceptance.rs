//! Runs every acceptance criterion and prints one line per criterion.
//!
//! The quick suite runs first so its wall time can be checked; the full suite
//! then supplies criteria 1 to 11. Set `MAXCLADE_WORKERS` to change the pool.

use std::process::ExitCode;
use std::time::Instant;

use maxclade::verify::{criterion_12, run_criteria, Context, Scale, SuiteTimes, VerifyOptions};

fn workers() -> usize {
    std::env::var("MAXCLADE_WORKERS")
        .ok()
        .and_then(|w| w.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn main() -> ExitCode {
    let workers = workers();
    let quick = VerifyOptions {
        scale: Scale::Quick,
        workers,
        ..Default::default()
    };
    let full = VerifyOptions {
        scale: Scale::Full,
        ..quick.clone()
    };

    let start = Instant::now();
    let quick_reports = run_criteria(&quick, &Context::new(), |_| {});
    let quick_time = start.elapsed();
    let quick_failed: Vec<u32> = quick_reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.id)
        .collect();
    println!(
        "quick suite: {:.1} s, failing criteria {:?}",
        quick_time.as_secs_f64(),
        quick_failed
    );

    let start = Instant::now();
    let mut reports = run_criteria(&full, &Context::new(), |r| println!("{r}"));
    let times = SuiteTimes {
        quick: Some(quick_time),
        full: Some(start.elapsed()),
    };
    let r12 = criterion_12(&full, times);
    println!("{r12}");
    reports.push(r12);

    let passed = reports.iter().filter(|r| r.passed()).count();
    println!("acceptance: {passed}/{} criteria passed", reports.len());
    if passed == reports.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
