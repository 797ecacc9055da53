//! A fault-free ACOOL run: every node inputs the same value and decides it.

use acool::sim::{run, ProtocolKind, SimConfig};

fn main() {
    let cfg = SimConfig::new(ProtocolKind::Acool, 7, 2).with_len(1024).with_seed(1);
    let report = run(&cfg).unwrap();
    println!("outcome: {:?} after {} steps", report.outcome, report.steps);
    println!("safety ok: {}, liveness ok: {}", report.safety_ok(), report.liveness_ok);
    println!(
        "total bits: {} ({} messages), ratio to max(nl, nt log q): {:.2}",
        report.metrics.total_bits,
        report.metrics.messages,
        report.metrics.ratio()
    );
    for (tag, bits) in &report.metrics.bits_by_tag {
        println!("  {tag:>14}: {bits}");
    }
    let first = report.outputs[0].clone();
    assert!(report.outputs.iter().all(|o| *o == first));
}
