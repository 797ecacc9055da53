//! The split-input scenario: honest group A1 inputs one value, A2 another,
//! and the Byzantine group F sides with A2 while withholding from A1.
//! ACOOL terminates; the legacy wiring (first BUA straight into ABBA) stalls.

use acool::sim::{run, scenario_split_input};

fn main() {
    let (n, t) = (10, 3);
    let mut acool_ok = 0;
    let mut legacy_stuck = 0;
    let seeds = 20;
    for seed in 0..seeds {
        let cfg = scenario_split_input(n, t, None).unwrap().with_seed(seed);
        let report = run(&cfg).unwrap();
        if report.ok() {
            acool_ok += 1;
        }
        let mut legacy = cfg.clone();
        legacy.legacy_cool = true;
        let report = run(&legacy).unwrap();
        if !report.liveness_ok {
            legacy_stuck += 1;
        }
    }
    println!("n={n} t={t}: ACOOL ok on {acool_ok}/{seeds} seeds");
    println!("legacy wiring failed to terminate on {legacy_stuck}/{seeds} seeds");
}
