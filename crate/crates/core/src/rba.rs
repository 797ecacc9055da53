//! Reliable agreement (one BUA instance, READY quorum, coded dispersal) and
//! reliable broadcast built on it.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::bua::{Bua, BuaConfig, BuaEvent, Phase};
use crate::ecc::{ecc_encode, CodeParams, OecAccumulator, SymbolShare};
use crate::hmdm::{Hmdm, ReadyTally};
use crate::msg::{Decision, NodeId, ProtocolMsg, Target};
use crate::protocol::{Protocol, Step, TraceEvent};

#[derive(Debug, Clone, Copy)]
pub struct RbaConfig {
    pub params: CodeParams,
    pub self_id: NodeId,
    /// Record the value carried by this node's own READY trigger as a
    /// [`TraceEvent::RbaReadyValue`], for protocols that consume it.
    pub report_ready_value: bool,
}

impl RbaConfig {
    pub fn new(params: CodeParams, self_id: NodeId) -> Self {
        RbaConfig { params, self_id, report_ready_value: false }
    }
}

#[derive(Debug, Clone)]
pub struct Rba {
    cfg: RbaConfig,
    bua: Bua,
    ready: ReadyTally,
    /// Bit of the `S[2]` quorum that triggered this node's READY.
    quorum_bit: Option<bool>,
    collision_logged: bool,
    v_out: Option<bool>,
    src_final: Option<(Option<Vec<u8>>, Option<bool>)>,
    hmdm: Hmdm,
    output: Option<Decision>,
}

impl Rba {
    pub fn new(cfg: RbaConfig) -> Self {
        let p = cfg.params;
        Rba {
            cfg,
            bua: Bua::new(BuaConfig { tag: 0, params: p, self_id: cfg.self_id }),
            ready: ReadyTally::new(p.t),
            quorum_bit: None,
            collision_logged: false,
            v_out: None,
            src_final: None,
            hmdm: Hmdm::new(p),
            output: None,
        }
    }

    pub fn bua(&self) -> &Bua {
        &self.bua
    }

    pub fn v_out(&self) -> Option<bool> {
        self.v_out
    }

    pub fn has_input(&self) -> bool {
        self.bua.has_input()
    }

    /// Enters the dispersal phase as if `v_out = 1`, for callers that learn
    /// the binary outcome elsewhere.
    pub fn trigger_ph3(&mut self) -> Step {
        let mut step = Step::default();
        if self.output.is_none() {
            self.enter_ph3(&mut step);
            self.settle(&mut step);
        }
        step
    }

    fn terminate(&mut self, decision: Decision, step: &mut Step) {
        if self.output.is_none() {
            step.trace.push(TraceEvent::Output { decision: decision.clone() });
            self.output = Some(decision);
        }
    }

    fn enter_ph3(&mut self, step: &mut Step) {
        if self.hmdm.mode().is_some() {
            return;
        }
        let immediate = matches!(self.src_final, Some((_, Some(true))));
        self.hmdm.enter_ph3(immediate);
        if immediate {
            let w = self.src_final.as_ref().and_then(|f| f.0.clone()).unwrap_or_default();
            self.terminate(Decision::Value(w), step);
        }
    }

    fn send_ready(&mut self, bit: bool, step: &mut Step) {
        if self.ready.mark_sent(bit) {
            step.broadcast(ProtocolMsg::Ready(bit));
            step.trace.push(TraceEvent::ReadySent { bit });
        }
    }

    fn check_quorum(&mut self, step: &mut Step) {
        let quorum = self.cfg.params.n - self.cfg.params.t;
        let ones = self.bua.s1_phase2().len() >= quorum;
        let zeros = self.bua.s0_phase2().len() >= quorum;
        match self.quorum_bit {
            None if ones || zeros => {
                let bit = ones;
                self.quorum_bit = Some(bit);
                if self.cfg.report_ready_value {
                    step.trace.push(TraceEvent::RbaReadyValue { bit });
                }
                self.send_ready(bit, step);
            }
            Some(b) if !self.collision_logged && (if b { zeros } else { ones }) => {
                // both quorums at one node; the first one stays
                step.trace.push(TraceEvent::VoteCollision { bua: 0 });
                self.collision_logged = true;
            }
            _ => {}
        }
    }

    fn on_bua_events(&mut self, events: Vec<BuaEvent>, step: &mut Step) {
        for ev in events {
            match ev {
                BuaEvent::S1(bit) => step.trace.push(TraceEvent::BuaS1 { bua: 0, bit }),
                BuaEvent::S2(bit) => step.trace.push(TraceEvent::BuaS2 { bua: 0, bit }),
                BuaEvent::SetsUpdated(Phase::Two) => self.check_quorum(step),
                BuaEvent::Final { w, s2, vote } => {
                    step.trace.push(TraceEvent::BuaFinal { bua: 0, w: w.clone(), s2, vote });
                    self.src_final = Some((w, s2));
                }
                BuaEvent::SymbolDelivered { .. } | BuaEvent::SetsUpdated(Phase::One) => {}
            }
        }
    }

    fn settle(&mut self, step: &mut Step) {
        if self.output.is_some() {
            return;
        }
        self.hmdm.harvest(&self.bua, step);
        if let Some(w) = self.hmdm.poll(&self.bua, step) {
            self.terminate(Decision::Value(w), step);
        }
    }
}

impl Protocol for Rba {
    fn input(&mut self, w: &[u8]) -> Step {
        let mut step = Step::default();
        if self.output.is_some() {
            return step;
        }
        let Ok(s) = self.bua.input(w) else {
            return step;
        };
        step.trace.push(TraceEvent::BuaInput { bua: 0, w: w.to_vec() });
        step.messages.extend(s.messages);
        self.on_bua_events(s.events, &mut step);
        self.settle(&mut step);
        step
    }

    fn handle(&mut self, from: NodeId, msg: ProtocolMsg) -> Step {
        let mut step = Step::default();
        if self.output.is_some() || from >= self.cfg.params.n {
            return step;
        }
        match msg {
            ProtocolMsg::Symbol { bua: 0, .. } | ProtocolMsg::Si1 { bua: 0, .. } | ProtocolMsg::Si2 { bua: 0, .. } => {
                let s = self.bua.handle(from, msg);
                step.messages.extend(s.messages);
                self.on_bua_events(s.events, &mut step);
            }
            ProtocolMsg::Ready(bit) => {
                let action = self.ready.on_ready(from, bit);
                if let Some(b) = action.amplify {
                    step.broadcast(ProtocolMsg::Ready(b));
                    step.trace.push(TraceEvent::ReadySent { bit: b });
                }
                if let Some(b) = action.decide {
                    if self.v_out.is_none() {
                        self.v_out = Some(b);
                        if b {
                            self.enter_ph3(&mut step);
                        } else {
                            self.terminate(Decision::Bottom, &mut step);
                        }
                    }
                }
            }
            ProtocolMsg::CorrectSymbol(y) => self.hmdm.on_correct_symbol(from, y, &mut step),
            _ => {}
        }
        self.settle(&mut step);
        step
    }

    fn output(&self) -> Option<&Decision> {
        self.output.as_ref()
    }

    fn is_terminated(&self) -> bool {
        self.output.is_some()
    }

    fn decode_attempts(&self) -> usize {
        self.hmdm.attempts()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RbcMode {
    /// Leader sends one coded share per node; nodes echo and decode.
    #[default]
    Balanced,
    /// Leader sends the whole message to every node.
    Unbalanced,
}

#[derive(Debug, Clone, Copy)]
pub struct RbcConfig {
    pub params: CodeParams,
    pub self_id: NodeId,
    pub leader: NodeId,
    pub mode: RbcMode,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RbcError {
    #[error("only the leader takes an input")]
    NotLeader,
    #[error("leader input must be non-empty")]
    EmptyInput,
    #[error("leader input already given")]
    DuplicateInput,
    #[error("message does not fit the code: {0}")]
    Encode(#[from] crate::ecc::EccError),
}

#[derive(Debug, Clone)]
pub struct Rbc {
    cfg: RbcConfig,
    leader_input_done: bool,
    seen_leader: bool,
    seen_initial: BTreeSet<NodeId>,
    dispersal: OecAccumulator,
    w_i: Option<Vec<u8>>,
    inner: Rba,
}

impl Rbc {
    pub fn new(cfg: RbcConfig) -> Self {
        Rbc {
            cfg,
            leader_input_done: false,
            seen_leader: false,
            seen_initial: BTreeSet::new(),
            dispersal: OecAccumulator::new(cfg.params).require_non_empty(),
            w_i: None,
            inner: Rba::new(RbaConfig::new(cfg.params, cfg.self_id)),
        }
    }

    pub fn is_leader(&self) -> bool {
        self.cfg.self_id == self.cfg.leader
    }

    pub fn reconstructed(&self) -> Option<&[u8]> {
        self.w_i.as_deref()
    }

    pub fn inner(&self) -> &Rba {
        &self.inner
    }

    pub fn leader_input(&mut self, w: &[u8]) -> Result<Step, RbcError> {
        if !self.is_leader() {
            return Err(RbcError::NotLeader);
        }
        if w.is_empty() {
            return Err(RbcError::EmptyInput);
        }
        if self.leader_input_done {
            return Err(RbcError::DuplicateInput);
        }
        let mut step = Step::default();
        match self.cfg.mode {
            RbcMode::Balanced => {
                for share in ecc_encode(&self.cfg.params, w)? {
                    let j = share.index as usize - 1;
                    step.send(Target::Node(j), ProtocolMsg::Leader(share.symbol));
                }
            }
            RbcMode::Unbalanced => {
                if w.len() > self.cfg.params.capacity_bytes() {
                    return Err(RbcError::Encode(crate::ecc::EccError::MessageTooLong {
                        len: w.len(),
                        capacity: self.cfg.params.capacity_bytes(),
                    }));
                }
                step.broadcast(ProtocolMsg::LeaderMessage(w.to_vec()));
            }
        }
        self.leader_input_done = true;
        Ok(step)
    }

    fn set_w_i(&mut self, w: Vec<u8>, step: &mut Step) {
        if self.w_i.is_some() || w.is_empty() {
            return;
        }
        self.w_i = Some(w.clone());
        step.extend(self.inner.input(&w));
    }
}

impl Protocol for Rbc {
    fn input(&mut self, w: &[u8]) -> Step {
        self.leader_input(w).unwrap_or_default()
    }

    fn handle(&mut self, from: NodeId, msg: ProtocolMsg) -> Step {
        let mut step = Step::default();
        if self.inner.is_terminated() || from >= self.cfg.params.n {
            return step;
        }
        match msg {
            ProtocolMsg::Leader(y) => {
                if from == self.cfg.leader && !self.seen_leader {
                    self.seen_leader = true;
                    step.broadcast(ProtocolMsg::Initial(y));
                }
            }
            ProtocolMsg::Initial(y) => {
                if self.seen_initial.insert(from) && !self.dispersal.is_done() {
                    let share = SymbolShare { index: from as u32 + 1, symbol: y };
                    if let Ok(Some(w)) = self.dispersal.submit(share) {
                        self.set_w_i(w, &mut step);
                    }
                }
            }
            ProtocolMsg::LeaderMessage(w) => {
                if from == self.cfg.leader && !self.seen_leader {
                    self.seen_leader = true;
                    self.set_w_i(w, &mut step);
                }
            }
            other => step.extend(self.inner.handle(from, other)),
        }
        step
    }

    fn output(&self) -> Option<&Decision> {
        self.inner.output()
    }

    fn is_terminated(&self) -> bool {
        self.inner.is_terminated()
    }

    fn decode_attempts(&self) -> usize {
        self.dispersal.attempts() + self.inner.decode_attempts()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::derive_params;
    use std::collections::VecDeque;

    fn run_fifo<P: Protocol>(nodes: &mut [P], inputs: Vec<(NodeId, Vec<u8>)>) {
        let n = nodes.len();
        let mut queue: VecDeque<(NodeId, NodeId, ProtocolMsg)> = VecDeque::new();
        let push = |queue: &mut VecDeque<_>, from, step: Step| {
            for (target, msg) in step.messages {
                match target {
                    Target::All => (0..n).for_each(|to| queue.push_back((from, to, msg.clone()))),
                    Target::Node(to) => queue.push_back((from, to, msg)),
                }
            }
        };
        for (i, w) in inputs {
            let s = nodes[i].input(&w);
            push(&mut queue, i, s);
        }
        while let Some((from, to, msg)) = queue.pop_front() {
            let s = nodes[to].handle(from, msg);
            push(&mut queue, to, s);
        }
    }

    #[test]
    fn rba_same_input_outputs_it() {
        let params = derive_params(7, 2, 64).unwrap();
        let mut nodes: Vec<Rba> = (0..7).map(|i| Rba::new(RbaConfig::new(params, i))).collect();
        run_fifo(&mut nodes, (0..7).map(|i| (i, b"abc".to_vec())).collect());
        assert!(nodes.iter().all(|x| x.output() == Some(&Decision::Value(b"abc".to_vec()))));
    }

    #[test]
    fn rba_split_is_consistent() {
        let params = derive_params(7, 2, 64).unwrap();
        let mut nodes: Vec<Rba> = (0..7).map(|i| Rba::new(RbaConfig::new(params, i))).collect();
        let inputs = (0..7).map(|i| (i, if i < 5 { b"x".to_vec() } else { b"y".to_vec() })).collect();
        run_fifo(&mut nodes, inputs);
        let outs: BTreeSet<_> = nodes.iter().map(|x| x.output().cloned()).collect();
        assert_eq!(outs.len(), 1);
    }

    #[test]
    fn rbc_balanced_and_unbalanced() {
        for mode in [RbcMode::Balanced, RbcMode::Unbalanced] {
            let params = derive_params(7, 2, 256).unwrap();
            let mut nodes: Vec<Rbc> = (0..7)
                .map(|i| Rbc::new(RbcConfig { params, self_id: i, leader: 3, mode }))
                .collect();
            run_fifo(&mut nodes, vec![(3, b"broadcast me".to_vec())]);
            for node in &nodes {
                assert_eq!(node.output(), Some(&Decision::Value(b"broadcast me".to_vec())));
            }
        }
    }

    #[test]
    fn rbc_leader_checks() {
        let params = derive_params(7, 2, 64).unwrap();
        let cfg = |i| RbcConfig { params, self_id: i, leader: 0, mode: RbcMode::Balanced };
        assert_eq!(Rbc::new(cfg(1)).leader_input(b"w").unwrap_err(), RbcError::NotLeader);
        let mut leader = Rbc::new(cfg(0));
        assert_eq!(leader.leader_input(b"").unwrap_err(), RbcError::EmptyInput);
        let step = leader.leader_input(b"w").unwrap();
        assert_eq!(step.messages.len(), 7);
        assert!(step.messages.iter().all(|(_, m)| matches!(m, ProtocolMsg::Leader(_))));
    }

    #[test]
    fn rbc_rejects_empty_dispersal() {
        let params = derive_params(4, 1, 64).unwrap();
        let mut node = Rbc::new(RbcConfig { params, self_id: 1, leader: 0, mode: RbcMode::Balanced });
        let shares = ecc_encode(&params, b"").unwrap();
        for (j, s) in shares.into_iter().enumerate() {
            node.handle(j, ProtocolMsg::Initial(s.symbol));
        }
        assert!(node.reconstructed().is_none());
    }
}
