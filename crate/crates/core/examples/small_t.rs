//! Committee variant for t much smaller than n: only 3t + 1 nodes run the
//! full protocol and disperse the decision to everyone else.

use acool::sim::{run, ProtocolKind, SimConfig};
use acool::small_t::{committee_size, use_small_t};

fn main() {
    let (n, t, len) = (31, 2, 4096);
    println!("committee size {} of {n}; use committee: {}", committee_size(t), use_small_t(n, t, 2.0));
    for protocol in [ProtocolKind::Acool, ProtocolKind::SmallT] {
        let r = run(&SimConfig::new(protocol, n, t).with_len(len)).unwrap();
        println!(
            "{:>8}: {:?}, {} bits, {} messages",
            protocol.as_str(),
            r.outcome,
            r.metrics.total_bits,
            r.metrics.messages
        );
    }
}
