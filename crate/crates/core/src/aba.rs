//! Asynchronous binary agreement used once per agreement instance.
//!
//! Two interchangeable implementations sit behind [`Abba`]:
//!
//! * `Oracle`: the node only reports its input; the harness decides with
//!   [`oracle_abba_decide`] once every honest participant has reported and
//!   hands the bit back through [`Abba::oracle_decision`].
//! * `Coin`: a round-based protocol over a perfect common coin. Each round runs
//!   a binary-value broadcast of `EST` messages (relay at `t + 1`, accept at
//!   `2t + 1`), then an `AUX` exchange that waits for `n - t` supporting votes.

use std::collections::{BTreeMap, BTreeSet};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::msg::{AbbaMsg, NodeId, ProtocolMsg, Target};

/// Rounds beyond this are not representable in the 8-bit round field and are
/// dropped on receipt.
pub const MAX_ROUND: u32 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AbbaKind {
    #[default]
    Oracle,
    Coin,
}

/// Common coin shared by all nodes: the bit for `(instance, round)` is the
/// same everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoinOracle {
    seed: u64,
}

impl CoinOracle {
    pub fn new(seed: u64) -> Self {
        CoinOracle { seed }
    }

    pub fn coin(&self, instance: u64, round: u32) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(instance);
        rng.set_word_pos(round as u128 * 16);
        rng.next_u32() & 1 == 1
    }
}

/// Adjudicated decision: the adversary's preferred bit if some honest node
/// proposed it, otherwise the bit every honest node proposed.
pub fn oracle_abba_decide(inputs: &BTreeMap<NodeId, bool>, adversary_hint: bool) -> bool {
    if inputs.values().any(|&b| b == adversary_hint) {
        adversary_hint
    } else {
        !adversary_hint
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct AbbaStep {
    pub messages: Vec<(Target, ProtocolMsg)>,
    /// Input reported to the harness (oracle mode only).
    pub oracle_input: Option<bool>,
    pub output: Option<bool>,
}

/// Input/output bookkeeping shared by both implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AbbaHandle {
    pub instance: u64,
    pub input: Option<bool>,
    pub output: Option<bool>,
}

#[derive(Debug, Clone)]
pub enum Abba {
    Oracle(AbbaHandle),
    Coin(Box<CoinAbba>),
}

impl Abba {
    pub fn new(kind: AbbaKind, n: usize, t: usize, self_id: NodeId, coin: CoinOracle) -> Self {
        match kind {
            AbbaKind::Oracle => Abba::Oracle(AbbaHandle::default()),
            AbbaKind::Coin => Abba::Coin(Box::new(CoinAbba::new(n, t, self_id, coin, 0))),
        }
    }

    pub fn handle_state(&self) -> AbbaHandle {
        match self {
            Abba::Oracle(h) => *h,
            Abba::Coin(c) => c.handle,
        }
    }

    pub fn has_input(&self) -> bool {
        self.handle_state().input.is_some()
    }

    pub fn output(&self) -> Option<bool> {
        self.handle_state().output
    }

    /// First input wins; later calls return an empty step.
    pub fn input(&mut self, bit: bool) -> AbbaStep {
        match self {
            Abba::Oracle(h) => {
                if h.input.is_some() {
                    return AbbaStep::default();
                }
                h.input = Some(bit);
                AbbaStep { oracle_input: Some(bit), ..AbbaStep::default() }
            }
            Abba::Coin(c) => c.input(bit),
        }
    }

    pub fn handle(&mut self, from: NodeId, msg: AbbaMsg) -> AbbaStep {
        match self {
            Abba::Oracle(_) => AbbaStep::default(),
            Abba::Coin(c) => c.handle(from, msg),
        }
    }

    pub fn oracle_decision(&mut self, bit: bool) -> AbbaStep {
        match self {
            Abba::Oracle(h) if h.output.is_none() => {
                h.output = Some(bit);
                AbbaStep { output: Some(bit), ..AbbaStep::default() }
            }
            _ => AbbaStep::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct RoundState {
    est_sent: [bool; 2],
    est_from: [BTreeSet<NodeId>; 2],
    bin_values: [bool; 2],
    /// Order in which values entered `bin_values`.
    first_bin: Option<bool>,
    aux_sent: bool,
    aux_from: BTreeMap<NodeId, bool>,
}

#[derive(Debug, Clone)]
pub struct CoinAbba {
    n: usize,
    t: usize,
    self_id: NodeId,
    coin: CoinOracle,
    handle: AbbaHandle,
    round: u32,
    est: Option<bool>,
    rounds: BTreeMap<u32, RoundState>,
    decided_round: Option<u32>,
    halted: bool,
}

impl CoinAbba {
    pub fn new(n: usize, t: usize, self_id: NodeId, coin: CoinOracle, instance: u64) -> Self {
        CoinAbba {
            n,
            t,
            self_id,
            coin,
            handle: AbbaHandle { instance, ..AbbaHandle::default() },
            round: 0,
            est: None,
            rounds: BTreeMap::new(),
            decided_round: None,
            halted: false,
        }
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    pub fn output(&self) -> Option<bool> {
        self.handle.output
    }

    pub fn input(&mut self, bit: bool) -> AbbaStep {
        if self.handle.input.is_some() {
            return AbbaStep::default();
        }
        self.handle.input = Some(bit);
        self.est = Some(bit);
        let mut step = AbbaStep::default();
        self.send_est(0, bit, &mut step);
        self.progress(&mut step);
        step
    }

    pub fn handle(&mut self, from: NodeId, msg: AbbaMsg) -> AbbaStep {
        let mut step = AbbaStep::default();
        if from >= self.n || self.halted {
            return step;
        }
        match msg {
            AbbaMsg::Est { round, bit } if round <= MAX_ROUND => {
                let t = self.t;
                let rs = self.rounds.entry(round).or_default();
                if !rs.est_from[bit as usize].insert(from) {
                    return step;
                }
                let count = rs.est_from[bit as usize].len();
                let relay = count > t && !rs.est_sent[bit as usize];
                if count > 2 * t && !rs.bin_values[bit as usize] {
                    rs.bin_values[bit as usize] = true;
                    rs.first_bin.get_or_insert(bit);
                }
                // relaying only makes sense once this node takes part
                if relay && self.handle.input.is_some() {
                    self.send_est(round, bit, &mut step);
                }
            }
            AbbaMsg::Aux { round, bit } if round <= MAX_ROUND => {
                let rs = self.rounds.entry(round).or_default();
                rs.aux_from.entry(from).or_insert(bit);
            }
            _ => return step,
        }
        self.progress(&mut step);
        step
    }

    fn send_est(&mut self, round: u32, bit: bool, step: &mut AbbaStep) {
        let rs = self.rounds.entry(round).or_default();
        if rs.est_sent[bit as usize] {
            return;
        }
        rs.est_sent[bit as usize] = true;
        step.messages.push((Target::All, ProtocolMsg::Abba(AbbaMsg::Est { round, bit })));
    }

    fn progress(&mut self, step: &mut AbbaStep) {
        while !self.halted && self.handle.input.is_some() {
            let r = self.round;
            // EST relays deferred while input was missing
            let pending: Vec<bool> = {
                let rs = self.rounds.entry(r).or_default();
                [false, true]
                    .into_iter()
                    .filter(|&b| rs.est_from[b as usize].len() > self.t && !rs.est_sent[b as usize])
                    .collect()
            };
            for b in pending {
                self.send_est(r, b, step);
            }
            let rs = self.rounds.get_mut(&r).expect("round entry exists");
            if !rs.aux_sent {
                if let Some(b) = rs.first_bin {
                    rs.aux_sent = true;
                    step.messages.push((Target::All, ProtocolMsg::Abba(AbbaMsg::Aux { round: r, bit: b })));
                }
            }
            let supported: Vec<bool> = rs
                .aux_from
                .values()
                .copied()
                .filter(|&b| rs.bin_values[b as usize])
                .collect();
            if supported.len() < self.n - self.t {
                return;
            }
            let has = [supported.contains(&false), supported.contains(&true)];
            let s = self.coin.coin(self.handle.instance, r);
            if has[0] != has[1] {
                let v = has[1];
                if v == s && self.handle.output.is_none() {
                    self.handle.output = Some(v);
                    self.decided_round = Some(r);
                    step.output = Some(v);
                } else if v == s && self.decided_round.is_some_and(|d| r > d) {
                    self.halted = true;
                }
                self.est = Some(v);
            } else {
                self.est = Some(s);
            }
            if self.halted || r >= MAX_ROUND {
                self.halted = true;
                return;
            }
            self.round = r + 1;
            let est = self.est.expect("estimate set");
            self.send_est(r + 1, est, step);
        }
    }

    pub fn self_id(&self) -> NodeId {
        self.self_id
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn oracle_rule() {
        let all_one: BTreeMap<_, _> = [(0, true), (1, true), (2, true)].into();
        assert!(oracle_abba_decide(&all_one, false));
        let mixed: BTreeMap<_, _> = [(0, true), (1, false), (2, true)].into();
        assert!(!oracle_abba_decide(&mixed, false));
        let zero: BTreeMap<_, _> = [(0, false)].into();
        assert!(!oracle_abba_decide(&zero, true));
    }

    #[test]
    fn coin_is_common_and_varies() {
        let c = CoinOracle::new(42);
        let bits: Vec<bool> = (0..64).map(|r| c.coin(0, r)).collect();
        assert_eq!(bits, (0..64).map(|r| CoinOracle::new(42).coin(0, r)).collect::<Vec<_>>());
        assert!(bits.iter().any(|&b| b) && bits.iter().any(|&b| !b));
    }

    #[test]
    fn oracle_handle_is_write_once() {
        let mut a = Abba::new(AbbaKind::Oracle, 4, 1, 0, CoinOracle::new(0));
        assert_eq!(a.input(true).oracle_input, Some(true));
        assert_eq!(a.input(false), AbbaStep::default());
        assert_eq!(a.oracle_decision(true).output, Some(true));
        assert_eq!(a.oracle_decision(false).output, None);
        assert_eq!(a.output(), Some(true));
    }

    /// Runs `n` coin instances over a randomly ordered network; `crashed`
    /// nodes never start. Returns the outputs of the live nodes.
    fn run_coin(inputs: &[Option<bool>], t: usize, seed: u64) -> Vec<Option<bool>> {
        let n = inputs.len();
        let coin = CoinOracle::new(seed);
        let mut nodes: Vec<CoinAbba> = (0..n).map(|i| CoinAbba::new(n, t, i, coin, 0)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut queue: Vec<(NodeId, NodeId, AbbaMsg)> = Vec::new();
        let push = |queue: &mut Vec<_>, from: NodeId, step: AbbaStep| {
            for (target, msg) in step.messages {
                let ProtocolMsg::Abba(m) = msg else { unreachable!() };
                assert_eq!(target, Target::All);
                for to in 0..n {
                    queue.push((from, to, m.clone()));
                }
            }
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for i in order {
            if let Some(b) = inputs[i] {
                let step = nodes[i].input(b);
                push(&mut queue, i, step);
            }
        }
        let mut steps = 0;
        while !queue.is_empty() && steps < 200_000 {
            steps += 1;
            let idx = rng.gen_range(0..queue.len());
            let (from, to, m) = queue.swap_remove(idx);
            if inputs[to].is_none() {
                continue;
            }
            let step = nodes[to].handle(from, m);
            push(&mut queue, to, step);
        }
        (0..n).filter(|&i| inputs[i].is_some()).map(|i| nodes[i].output()).collect()
    }

    #[test]
    fn unanimous_decides_in_round_zero_or_one() {
        for seed in 0..20 {
            let outs = run_coin(&[Some(true); 4], 1, seed);
            assert!(outs.iter().all(|&o| o == Some(true)), "seed {seed}: {outs:?}");
        }
    }

    #[test]
    fn all_input_vectors_agree_n4() {
        for mask in 0u32..16 {
            let inputs: Vec<Option<bool>> = (0..4).map(|i| Some(mask >> i & 1 == 1)).collect();
            for seed in 0..60 {
                let outs = run_coin(&inputs, 1, seed * 31 + mask as u64);
                let first = outs[0].expect("decided");
                assert!(outs.iter().all(|&o| o == Some(first)), "mask {mask} seed {seed}");
                if mask == 0 {
                    assert!(!first);
                }
                if mask == 15 {
                    assert!(first);
                }
            }
        }
    }

    #[test]
    fn tolerates_t_crashed() {
        for seed in 0..30 {
            let inputs = [Some(true), Some(false), Some(true), Some(false), Some(true), None, None];
            let outs = run_coin(&inputs, 2, seed);
            let first = outs[0].expect("decided");
            assert!(outs.iter().all(|&o| o == Some(first)));
        }
    }
}
