//! Drive four BUA instances by hand with a FIFO queue and print each node's
//! success indicators and final vote.

use std::collections::VecDeque;

use acool::bua::{Bua, BuaConfig, BuaEvent};
use acool::ecc::derive_params;
use acool::msg::{ProtocolMsg, Target};

fn main() {
    let (n, t) = (4, 1);
    let params = derive_params(n, t, 64).unwrap();
    let mut nodes: Vec<Bua> = (0..n).map(|i| Bua::new(BuaConfig { tag: 1, params, self_id: i })).collect();

    // Node 3 holds a different value; the other three agree.
    let inputs: [&[u8]; 4] = [b"agreed!!", b"agreed!!", b"agreed!!", b"outlier!"];
    let mut queue: VecDeque<(usize, usize, ProtocolMsg)> = VecDeque::new();
    let push = |queue: &mut VecDeque<_>, from: usize, msgs: Vec<(Target, ProtocolMsg)>| {
        for (target, msg) in msgs {
            match target {
                Target::All => (0..n).for_each(|to| queue.push_back((from, to, msg.clone()))),
                Target::Node(to) => queue.push_back((from, to, msg)),
            }
        }
    };
    for (i, w) in inputs.iter().enumerate() {
        let step = nodes[i].input(w).unwrap();
        push(&mut queue, i, step.messages);
    }
    while let Some((from, to, msg)) = queue.pop_front() {
        let step = nodes[to].handle(from, msg);
        for ev in &step.events {
            if let BuaEvent::Final { s2, vote, .. } = ev {
                println!("node {to}: final s2={s2:?} vote={vote}");
            }
        }
        push(&mut queue, to, step.messages);
    }
    for (i, b) in nodes.iter().enumerate() {
        println!("node {i}: s1={:?} s2={:?} vote={:?}", b.s1(), b.s2(), b.vote());
    }
}
