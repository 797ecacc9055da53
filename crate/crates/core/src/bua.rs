//! The asynchronous unique-agreement (BUA) state machine.
//!
//! Each node encodes its input, sends node `j` the pair `(y_j, y_i)` of its own
//! codeword, and sorts peers into the link sets `L1` (pair matches the local
//! encoding) and `L0` (mismatch). Two phases of success indicators follow:
//!
//! * phase 1: `s1 = 1` once `|L1| >= n - t`, `s1 = 0` once `|L0| >= t + 1`;
//! * phase 2: `s2 = 0` once `s1 = 0` or `|S0[1] ∪ L0| >= t + 1`, and `s2 = 1`
//!   once `s1 = 1` and `|S1[1] ∩ L1| >= n - t`.
//!
//! The vote is `1` after `n - t` phase-2 ones and `0` after `t + 1` phase-2
//! zeros, at which point the triple `(w, s2, vote)` is delivered. Everything
//! the enclosing protocol needs (symbols, indicators, the `S` sets) is reported
//! as [`BuaEvent`]s as soon as it changes.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::ecc::{ecc_encode, CodeParams, EccError, Symbol};
use crate::msg::{BuaTag, NodeId, ProtocolMsg, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuaEvent {
    /// The first SYMBOL pair from `from` has been compared and recorded.
    SymbolDelivered { from: NodeId, pair: (Symbol, Symbol) },
    S1(bool),
    /// An `S` set of the given phase gained a member.
    SetsUpdated(Phase),
    S2(bool),
    Final { w: Option<Vec<u8>>, s2: Option<bool>, vote: bool },
}

#[derive(Debug, Default)]
pub struct BuaStep {
    pub messages: Vec<(Target, ProtocolMsg)>,
    pub events: Vec<BuaEvent>,
}

impl BuaStep {
    fn extend(&mut self, other: BuaStep) {
        self.messages.extend(other.messages);
        self.events.extend(other.events);
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuaError {
    #[error("input already provided")]
    DuplicateInput,
    #[error("input must be non-empty")]
    EmptyInput,
    #[error(transparent)]
    Encode(#[from] EccError),
}

#[derive(Debug, Clone, Copy)]
pub struct BuaConfig {
    pub tag: BuaTag,
    pub params: CodeParams,
    pub self_id: NodeId,
}

#[derive(Debug, Clone)]
pub struct Bua {
    cfg: BuaConfig,
    w: Option<Vec<u8>>,
    own: Option<Vec<Symbol>>,
    l0: BTreeSet<NodeId>,
    l1: BTreeSet<NodeId>,
    s1_p1: BTreeSet<NodeId>,
    s0_p1: BTreeSet<NodeId>,
    s1_p2: BTreeSet<NodeId>,
    s0_p2: BTreeSet<NodeId>,
    s1: Option<bool>,
    s2: Option<bool>,
    vote: Option<bool>,
    seen_symbol: BTreeSet<NodeId>,
    pending: Vec<(NodeId, (Symbol, Symbol))>,
    delivered: BTreeMap<NodeId, (Symbol, Symbol)>,
    vote_collision: bool,
}

impl Bua {
    pub fn new(cfg: BuaConfig) -> Self {
        Bua {
            cfg,
            w: None,
            own: None,
            l0: BTreeSet::new(),
            l1: BTreeSet::new(),
            s1_p1: BTreeSet::new(),
            s0_p1: BTreeSet::new(),
            s1_p2: BTreeSet::new(),
            s0_p2: BTreeSet::new(),
            s1: None,
            s2: None,
            vote: None,
            seen_symbol: BTreeSet::new(),
            pending: Vec::new(),
            delivered: BTreeMap::new(),
            vote_collision: false,
        }
    }

    pub fn config(&self) -> &BuaConfig {
        &self.cfg
    }

    pub fn has_input(&self) -> bool {
        self.w.is_some()
    }

    pub fn input_value(&self) -> Option<&[u8]> {
        self.w.as_deref()
    }

    pub fn s1(&self) -> Option<bool> {
        self.s1
    }

    pub fn s2(&self) -> Option<bool> {
        self.s2
    }

    pub fn vote(&self) -> Option<bool> {
        self.vote
    }

    pub fn l0(&self) -> &BTreeSet<NodeId> {
        &self.l0
    }

    pub fn l1(&self) -> &BTreeSet<NodeId> {
        &self.l1
    }

    pub fn s1_phase1(&self) -> &BTreeSet<NodeId> {
        &self.s1_p1
    }

    pub fn s0_phase1(&self) -> &BTreeSet<NodeId> {
        &self.s0_p1
    }

    pub fn s1_phase2(&self) -> &BTreeSet<NodeId> {
        &self.s1_p2
    }

    pub fn s0_phase2(&self) -> &BTreeSet<NodeId> {
        &self.s0_p2
    }

    /// Pairs delivered so far, keyed by sender.
    pub fn delivered(&self) -> &BTreeMap<NodeId, (Symbol, Symbol)> {
        &self.delivered
    }

    /// Pair received from `j`, whether delivered or still waiting for this
    /// node's own input.
    pub fn received(&self, j: NodeId) -> Option<&(Symbol, Symbol)> {
        self.delivered.get(&j).or_else(|| self.pending.iter().find(|(f, _)| *f == j).map(|(_, p)| p))
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Both vote thresholds were crossed by the time the vote fired.
    pub fn vote_collision(&self) -> bool {
        self.vote_collision
    }

    fn n(&self) -> usize {
        self.cfg.params.n
    }

    fn t(&self) -> usize {
        self.cfg.params.t
    }

    pub fn input(&mut self, message: &[u8]) -> Result<BuaStep, BuaError> {
        if self.w.is_some() {
            return Err(BuaError::DuplicateInput);
        }
        if message.is_empty() {
            return Err(BuaError::EmptyInput);
        }
        let shares = ecc_encode(&self.cfg.params, message)?;
        let own: Vec<Symbol> = shares.into_iter().map(|s| s.symbol).collect();
        let me = self.cfg.self_id;
        let mut step = BuaStep::default();
        for (j, y_j) in own.iter().enumerate() {
            step.messages.push((
                Target::Node(j),
                ProtocolMsg::Symbol { bua: self.cfg.tag, pair: (y_j.clone(), own[me].clone()) },
            ));
        }
        self.w = Some(message.to_vec());
        self.own = Some(own);
        for (from, pair) in std::mem::take(&mut self.pending) {
            step.extend(self.compare_symbol(from, pair));
        }
        step.extend(self.check_guards());
        Ok(step)
    }

    pub fn on_symbol(&mut self, from: NodeId, pair: (Symbol, Symbol)) -> BuaStep {
        if from >= self.n() || !self.seen_symbol.insert(from) {
            return BuaStep::default();
        }
        if self.own.is_none() {
            self.pending.push((from, pair));
            return BuaStep::default();
        }
        let mut step = self.compare_symbol(from, pair);
        step.extend(self.check_guards());
        step
    }

    fn compare_symbol(&mut self, from: NodeId, pair: (Symbol, Symbol)) -> BuaStep {
        let own = self.own.as_ref().expect("compared only after encoding");
        let me = self.cfg.self_id;
        if pair.0 == own[me] && pair.1 == own[from] {
            self.l1.insert(from);
        } else {
            self.l0.insert(from);
        }
        self.delivered.insert(from, pair.clone());
        BuaStep {
            messages: Vec::new(),
            events: vec![BuaEvent::SymbolDelivered { from, pair }],
        }
    }

    pub fn on_si1(&mut self, from: NodeId, bit: bool) -> BuaStep {
        if from >= self.n() || self.s1_p1.contains(&from) || self.s0_p1.contains(&from) {
            return BuaStep::default();
        }
        if bit {
            self.s1_p1.insert(from);
        } else {
            self.s0_p1.insert(from);
        }
        let mut step = BuaStep {
            messages: Vec::new(),
            events: vec![BuaEvent::SetsUpdated(Phase::One)],
        };
        step.extend(self.check_guards());
        step
    }

    pub fn on_si2(&mut self, from: NodeId, bit: bool) -> BuaStep {
        if from >= self.n() || self.s1_p2.contains(&from) || self.s0_p2.contains(&from) {
            return BuaStep::default();
        }
        if bit {
            self.s1_p2.insert(from);
        } else {
            self.s0_p2.insert(from);
        }
        let mut step = BuaStep {
            messages: Vec::new(),
            events: vec![BuaEvent::SetsUpdated(Phase::Two)],
        };
        step.extend(self.check_guards());
        step
    }

    /// Dispatches a BUA wire message. Messages of other kinds are ignored.
    pub fn handle(&mut self, from: NodeId, msg: ProtocolMsg) -> BuaStep {
        match msg {
            ProtocolMsg::Symbol { pair, .. } => self.on_symbol(from, pair),
            ProtocolMsg::Si1 { bit, .. } => self.on_si1(from, bit),
            ProtocolMsg::Si2 { bit, .. } => self.on_si2(from, bit),
            _ => BuaStep::default(),
        }
    }

    /// Re-evaluates every guard in a fixed order until none fires.
    fn check_guards(&mut self) -> BuaStep {
        let (n, t, tag) = (self.n(), self.t(), self.cfg.tag);
        let mut step = BuaStep::default();
        loop {
            if self.s1.is_none() && self.l1.len() >= n - t {
                self.s1 = Some(true);
                step.messages.push((Target::All, ProtocolMsg::Si1 { bua: tag, bit: true }));
                step.events.push(BuaEvent::S1(true));
                continue;
            }
            if self.s1.is_none() && self.l0.len() > t {
                self.s1 = Some(false);
                step.messages.push((Target::All, ProtocolMsg::Si1 { bua: tag, bit: false }));
                step.events.push(BuaEvent::S1(false));
                continue;
            }
            if self.s2.is_none()
                && (self.s1 == Some(false) || self.s0_p1.union(&self.l0).count() > t)
            {
                self.s2 = Some(false);
                step.messages.push((Target::All, ProtocolMsg::Si2 { bua: tag, bit: false }));
                step.events.push(BuaEvent::S2(false));
                continue;
            }
            if self.s2.is_none()
                && self.s1 == Some(true)
                && self.s1_p1.intersection(&self.l1).count() >= n - t
            {
                self.s2 = Some(true);
                step.messages.push((Target::All, ProtocolMsg::Si2 { bua: tag, bit: true }));
                step.events.push(BuaEvent::S2(true));
                continue;
            }
            if self.vote.is_none() && self.s1_p2.len() >= n - t {
                self.vote = Some(true);
                self.vote_collision = self.s0_p2.len() > t;
                step.events.push(self.final_event());
                continue;
            }
            if self.vote.is_none() && self.s0_p2.len() > t {
                self.vote = Some(false);
                step.events.push(self.final_event());
                continue;
            }
            break;
        }
        step
    }

    fn final_event(&self) -> BuaEvent {
        BuaEvent::Final {
            w: self.w.clone(),
            s2: self.s2,
            vote: self.vote.expect("vote set before final"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::derive_params;

    fn bua(n: usize, t: usize, me: NodeId) -> Bua {
        let params = derive_params(n, t, 32).unwrap();
        Bua::new(BuaConfig { tag: 1, params, self_id: me })
    }

    fn pair_from(params: &CodeParams, w: &[u8], sender: NodeId, receiver: NodeId) -> (Symbol, Symbol) {
        let shares = ecc_encode(params, w).unwrap();
        (shares[receiver].symbol.clone(), shares[sender].symbol.clone())
    }

    #[test]
    fn input_sends_one_symbol_per_node() {
        let mut b = bua(4, 1, 2);
        let step = b.input(b"abcd").unwrap();
        assert_eq!(step.messages.len(), 4);
        let params = b.config().params;
        let shares = ecc_encode(&params, b"abcd").unwrap();
        for (j, (target, msg)) in step.messages.iter().enumerate() {
            assert_eq!(*target, Target::Node(j));
            let ProtocolMsg::Symbol { bua: 1, pair } = msg else { panic!("expected SYMBOL") };
            assert_eq!(pair.0, shares[j].symbol);
            assert_eq!(pair.1, shares[2].symbol);
        }
    }

    #[test]
    fn empty_and_duplicate_input() {
        let mut b = bua(4, 1, 0);
        assert_eq!(b.input(b"").unwrap_err(), BuaError::EmptyInput);
        assert!(!b.has_input());
        b.input(b"x").unwrap();
        assert_eq!(b.input(b"y").unwrap_err(), BuaError::DuplicateInput);
        assert_eq!(b.input_value(), Some(&b"x"[..]));
    }

    #[test]
    fn s1_fires_on_n_minus_t_matches() {
        let mut b = bua(4, 1, 0);
        let params = b.config().params;
        b.input(b"same").unwrap();
        for j in 0..2 {
            let step = b.on_symbol(j, pair_from(&params, b"same", j, 0));
            assert!(step.events.iter().all(|e| !matches!(e, BuaEvent::S1(_))));
        }
        let step = b.on_symbol(2, pair_from(&params, b"same", 2, 0));
        assert!(step.events.contains(&BuaEvent::S1(true)));
        assert!(step
            .messages
            .contains(&(Target::All, ProtocolMsg::Si1 { bua: 1, bit: true })));
        assert_eq!(b.s1(), Some(true));
    }

    #[test]
    fn s1_zero_on_t_plus_one_mismatches() {
        let mut b = bua(4, 1, 0);
        let params = b.config().params;
        b.input(b"mine").unwrap();
        b.on_symbol(1, pair_from(&params, b"othr", 1, 0));
        assert_eq!(b.s1(), None);
        let step = b.on_symbol(2, pair_from(&params, b"othr", 2, 0));
        assert!(step.events.contains(&BuaEvent::S1(false)));
        // s1 = 0 forces s2 = 0 in the same step
        assert!(step.events.contains(&BuaEvent::S2(false)));
        assert_eq!(b.s2(), Some(false));
    }

    #[test]
    fn malformed_pair_is_a_mismatch() {
        let mut b = bua(4, 1, 0);
        b.input(b"mine").unwrap();
        b.on_symbol(3, (Symbol(vec![1]), Symbol(vec![])));
        assert!(b.l0().contains(&3));
    }

    #[test]
    fn symbol_before_input_is_queued() {
        let mut early = bua(4, 1, 0);
        let params = early.config().params;
        let step = early.on_symbol(1, pair_from(&params, b"same", 1, 0));
        assert!(step.events.is_empty());
        assert_eq!(early.pending_len(), 1);
        let step = early.input(b"same").unwrap();
        assert!(step
            .events
            .iter()
            .any(|e| matches!(e, BuaEvent::SymbolDelivered { from: 1, .. })));
        assert_eq!(early.pending_len(), 0);

        let mut in_order = bua(4, 1, 0);
        in_order.input(b"same").unwrap();
        in_order.on_symbol(1, pair_from(&params, b"same", 1, 0));
        assert_eq!(early.l1(), in_order.l1());
        assert_eq!(early.l0(), in_order.l0());
    }

    #[test]
    fn vote_one_after_n_minus_t_si2_ones() {
        let mut b = bua(4, 1, 0);
        b.on_si2(1, true);
        b.on_si2(2, true);
        let step = b.on_si2(3, true);
        let fin = step.events.iter().find(|e| matches!(e, BuaEvent::Final { .. }));
        assert_eq!(fin, Some(&BuaEvent::Final { w: None, s2: None, vote: true }));
    }

    #[test]
    fn vote_zero_after_t_plus_one_si2_zeros() {
        let mut b = bua(4, 1, 0);
        b.input(b"w").unwrap();
        b.on_si2(1, false);
        let step = b.on_si2(2, false);
        assert!(step
            .events
            .iter()
            .any(|e| matches!(e, BuaEvent::Final { vote: false, .. })));
        assert_eq!(b.vote(), Some(false));
    }

    #[test]
    fn first_si_message_per_sender_wins() {
        let mut b = bua(4, 1, 0);
        b.on_si1(2, false);
        let step = b.on_si1(2, true);
        assert!(step.events.is_empty());
        assert!(b.s0_phase1().contains(&2));
        assert!(!b.s1_phase1().contains(&2));
    }

    #[test]
    fn duplicate_symbol_ignored() {
        let mut b = bua(4, 1, 0);
        let params = b.config().params;
        b.input(b"same").unwrap();
        b.on_symbol(1, pair_from(&params, b"same", 1, 0));
        let step = b.on_symbol(1, pair_from(&params, b"othr", 1, 0));
        assert!(step.events.is_empty());
        assert!(b.l0().is_empty());
    }
}
