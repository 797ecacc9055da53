//! Reliable agreement and reliable broadcast, with and without a faulty leader.

use acool::rba::RbcMode;
use acool::sim::{run, AdversaryKind, InputSpec, ProtocolKind, SimConfig};

fn main() {
    let (n, t) = (7, 2);
    let rba = SimConfig::new(ProtocolKind::Rba, n, t).with_inputs(InputSpec::Same);
    let r = run(&rba).unwrap();
    println!("RBA common input: {:?}, outputs agree: {}", r.outcome, r.checks.consistency);

    for mode in [RbcMode::Balanced, RbcMode::Unbalanced] {
        let mut cfg = SimConfig::new(ProtocolKind::Rbc, n, t).with_len(4096);
        cfg.rbc_mode = mode;
        let r = run(&cfg).unwrap();
        println!(
            "RBC {mode:?} honest leader: {:?}, total bits {}, leader egress {}",
            r.outcome, r.metrics.total_bits, r.metrics.leader_egress_bits
        );
    }

    // A Byzantine leader may make honest nodes output nothing, but never
    // different values.
    let mut cfg = SimConfig::new(ProtocolKind::Rbc, n, t).with_adversary(AdversaryKind::RandomByzantine);
    cfg.leader = n - 1;
    for seed in 0..5 {
        let r = run(&cfg.clone().with_seed(seed)).unwrap();
        println!(
            "RBC Byzantine leader seed {seed}: {:?} safety ok {} liveness ok {}",
            r.outcome,
            r.safety_ok(),
            r.liveness_ok
        );
    }
}
