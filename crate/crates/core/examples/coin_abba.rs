//! The randomized binary agreement on its own: seven nodes with mixed inputs
//! exchange EST/AUX messages in random order until all decide.

use std::collections::VecDeque;

use acool::aba::{CoinAbba, CoinOracle};
use acool::msg::{ProtocolMsg, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let (n, t) = (7, 2);
    let coin = CoinOracle::new(42);
    let mut nodes: Vec<CoinAbba> = (0..n).map(|i| CoinAbba::new(n, t, i, coin, 0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pool: Vec<(usize, usize, ProtocolMsg)> = Vec::new();
    let mut outbox = VecDeque::new();
    for (i, node) in nodes.iter_mut().enumerate() {
        outbox.push_back((i, node.input(i % 2 == 0).messages));
    }
    let mut delivered = 0;
    loop {
        while let Some((from, msgs)) = outbox.pop_front() {
            for (target, msg) in msgs {
                match target {
                    Target::All => (0..n).for_each(|to| pool.push((from, to, msg.clone()))),
                    Target::Node(to) => pool.push((from, to, msg)),
                }
            }
        }
        if pool.is_empty() {
            break;
        }
        let (from, to, msg) = pool.swap_remove(rng.gen_range(0..pool.len()));
        delivered += 1;
        if let ProtocolMsg::Abba(m) = msg {
            let step = nodes[to].handle(from, m);
            outbox.push_back((to, step.messages));
        }
    }
    for (i, node) in nodes.iter().enumerate() {
        println!("node {i}: decided {:?} in round {}", node.output(), node.round());
    }
    println!("{delivered} messages delivered");
}
