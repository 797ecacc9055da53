//! The multi-valued asynchronous agreement built from two BUA instances, one
//! binary agreement, a binary reliable agreement on its output, and a final
//! coded dispersal.
//!
//! Flow at node `i`:
//!
//! 1. The input goes into BUA 1.
//! 2. BUA 2 gets the input back if BUA 1 reports `s2 = 1`. Otherwise it gets
//!    the value decoded online from NEWSYMBOL messages and from the symbols
//!    of BUA 1 peers that announced `s1 = 1`. A node that cannot settle in
//!    BUA 1 but sees a strong majority for its own symbol index sends that
//!    symbol as NEWSYMBOL.
//! 3. The BUA 2 vote (or a zero from BUA 1) is the binary agreement input.
//! 4. The agreement output is made reliable with READY amplification. A zero
//!    outputs `⊥`. A one outputs BUA 2's value when it reported `s2 = 1`, and
//!    otherwise decodes from calibrated CORRECTSYMBOL shares.

use std::collections::{BTreeMap, BTreeSet};

use crate::aba::{Abba, AbbaKind, AbbaStep, CoinOracle};
use crate::bua::{Bua, BuaConfig, BuaEvent, Phase};
use crate::ecc::{CodeParams, OecAccumulator, Symbol, SymbolShare};
use crate::hmdm::{Hmdm, ReadyTally};
use crate::msg::{BuaTag, Decision, NodeId, ProtocolMsg};
use crate::protocol::{Protocol, Step, TraceEvent};

#[derive(Debug, Clone, Copy)]
pub struct AcoolConfig {
    pub params: CodeParams,
    pub self_id: NodeId,
    pub abba: AbbaKind,
    pub coin: CoinOracle,
    /// Take the binary agreement output as final, without READY exchange.
    pub skip_brba: bool,
    /// Wire BUA 1 straight into the binary agreement, with no NEWSYMBOL path
    /// and no BUA 2. Used to reproduce the liveness problem of that wiring.
    pub legacy_cool: bool,
}

impl AcoolConfig {
    pub fn new(params: CodeParams, self_id: NodeId) -> Self {
        AcoolConfig {
            params,
            self_id,
            abba: AbbaKind::Oracle,
            coin: CoinOracle::new(0),
            skip_brba: false,
            legacy_cool: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AbbaSource {
    FinalVote,
    Bua1Zero,
}

#[derive(Debug, Clone)]
pub struct Acool {
    cfg: AcoolConfig,
    bua1: Bua,
    bua2: Bua,
    abba: Abba,
    abba_source: Option<AbbaSource>,
    w_input: Option<Vec<u8>>,
    w_tilde: Option<Vec<u8>>,
    oec_new: OecAccumulator,
    seen_new_symbol: BTreeSet<NodeId>,
    y_table: BTreeMap<Symbol, BTreeSet<NodeId>>,
    y_major: Option<Symbol>,
    ready: ReadyTally,
    v_out: Option<bool>,
    /// `(w, s2)` of the Final delivered by the BUA that feeds the dispersal.
    src_final: Option<(Option<Vec<u8>>, Option<bool>)>,
    hmdm: Hmdm,
    output: Option<Decision>,
}

impl Acool {
    pub fn new(cfg: AcoolConfig) -> Self {
        let p = cfg.params;
        let bua = |tag: BuaTag| Bua::new(BuaConfig { tag, params: p, self_id: cfg.self_id });
        Acool {
            cfg,
            bua1: bua(1),
            bua2: bua(2),
            abba: Abba::new(cfg.abba, p.n, p.t, cfg.self_id, cfg.coin),
            abba_source: None,
            w_input: None,
            w_tilde: None,
            oec_new: OecAccumulator::new(p),
            seen_new_symbol: BTreeSet::new(),
            y_table: BTreeMap::new(),
            y_major: None,
            ready: ReadyTally::new(p.t),
            v_out: None,
            src_final: None,
            hmdm: Hmdm::new(p),
            output: None,
        }
    }

    pub fn config(&self) -> &AcoolConfig {
        &self.cfg
    }

    pub fn bua1(&self) -> &Bua {
        &self.bua1
    }

    pub fn bua2(&self) -> &Bua {
        &self.bua2
    }

    pub fn w_tilde(&self) -> Option<&[u8]> {
        self.w_tilde.as_deref()
    }

    pub fn y_major(&self) -> Option<&Symbol> {
        self.y_major.as_ref()
    }

    pub fn v_out(&self) -> Option<bool> {
        self.v_out
    }

    pub fn abba(&self) -> &Abba {
        &self.abba
    }

    pub fn in_ph3(&self) -> bool {
        self.hmdm.mode().is_some()
    }

    fn t(&self) -> usize {
        self.cfg.params.t
    }

    fn n(&self) -> usize {
        self.cfg.params.n
    }

    fn src(&self) -> &Bua {
        if self.cfg.legacy_cool {
            &self.bua1
        } else {
            &self.bua2
        }
    }

    fn terminate(&mut self, decision: Decision, step: &mut Step) {
        if self.output.is_none() {
            step.trace.push(TraceEvent::Output { decision: decision.clone() });
            self.output = Some(decision);
        }
    }

    fn abba_input(&mut self, bit: bool, source: AbbaSource, step: &mut Step) {
        if self.abba.has_input() {
            if self.abba_source != Some(source) && self.abba.handle_state().input != Some(bit) {
                step.trace.push(TraceEvent::AbbaRace { ignored: bit });
            }
            return;
        }
        self.abba_source = Some(source);
        step.trace.push(TraceEvent::AbbaInput { bit });
        let s = self.abba.input(bit);
        self.absorb_abba(s, step);
    }

    fn absorb_abba(&mut self, s: AbbaStep, step: &mut Step) {
        step.messages.extend(s.messages);
        if s.oracle_input.is_some() {
            step.oracle_input = s.oracle_input;
        }
        if let Some(bit) = s.output {
            step.trace.push(TraceEvent::AbbaOutput { bit });
            if self.cfg.skip_brba {
                self.set_v_out(bit, step);
            } else if self.ready.mark_sent(bit) {
                step.broadcast(ProtocolMsg::Ready(bit));
                step.trace.push(TraceEvent::ReadySent { bit });
            }
        }
    }

    fn set_v_out(&mut self, bit: bool, step: &mut Step) {
        if self.v_out.is_some() {
            return;
        }
        self.v_out = Some(bit);
        if !bit {
            self.terminate(Decision::Bottom, step);
            return;
        }
        let immediate = matches!(self.src_final, Some((_, Some(true))));
        self.hmdm.enter_ph3(immediate);
        if immediate {
            let w = self.src_final.as_ref().and_then(|f| f.0.clone()).unwrap_or_default();
            self.terminate(Decision::Value(w), step);
        }
    }

    fn bua2_input(&mut self, w: Vec<u8>, step: &mut Step) {
        if self.cfg.legacy_cool || self.bua2.has_input() {
            return;
        }
        step.trace.push(TraceEvent::BuaInput { bua: 2, w: w.clone() });
        self.w_tilde = Some(w.clone());
        match self.bua2.input(&w) {
            Ok(s) => {
                step.messages.extend(s.messages);
                self.on_bua2_events(s.events, step);
            }
            // a decoded value always re-encodes, and inputs are checked on entry
            Err(_) => unreachable!("BUA 2 input is a valid non-empty message"),
        }
    }

    fn submit_new(&mut self, from: NodeId, symbol: Symbol, step: &mut Step) {
        if self.oec_new.is_done() {
            return;
        }
        let index = from as u32 + 1;
        if let Some(prev) = self.oec_new.share(index) {
            if *prev != symbol {
                step.trace.push(TraceEvent::OecConflict { from });
            }
            return;
        }
        if let Ok(Some(w)) = self.oec_new.submit(SymbolShare { index, symbol }) {
            if !w.is_empty() {
                self.bua2_input(w, step);
            }
        }
    }

    /// Symbols `y_j` of BUA 1 peers in the phase-1 one-set.
    fn harvest_bua1(&mut self, step: &mut Step) {
        if self.oec_new.is_done() {
            return;
        }
        let fresh: Vec<(NodeId, Symbol)> = self
            .bua1
            .s1_phase1()
            .iter()
            .filter(|&&j| !self.oec_new.contains(j as u32 + 1))
            .filter_map(|&j| self.bua1.delivered().get(&j).map(|p| (j, p.1.clone())))
            .collect();
        for (j, y) in fresh {
            self.submit_new(j, y, step);
        }
    }

    fn check_y_majority(&mut self, step: &mut Step) {
        if self.y_major.is_some() || self.bua1.s1() == Some(true) {
            return;
        }
        let (n, t) = (self.n(), self.t());
        let s0 = self.bua1.s0_phase2();
        let found = self.y_table.iter().find(|(_, ids)| {
            ids.len() >= n - 2 * t && ids.union(s0).count() >= n - t
        });
        if let Some((y, _)) = found {
            let y = y.clone();
            self.y_major = Some(y.clone());
            step.broadcast(ProtocolMsg::NewSymbol(y));
            step.trace.push(TraceEvent::NewSymbolSent);
        }
    }

    fn on_bua1_events(&mut self, events: Vec<BuaEvent>, step: &mut Step) {
        let legacy = self.cfg.legacy_cool;
        for ev in events {
            match ev {
                BuaEvent::SymbolDelivered { from, pair } => {
                    if legacy {
                        continue;
                    }
                    self.y_table.entry(pair.0).or_default().insert(from);
                    if self.bua1.s1_phase1().contains(&from) {
                        self.submit_new(from, pair.1, step);
                    }
                    self.check_y_majority(step);
                }
                BuaEvent::S1(bit) => {
                    step.trace.push(TraceEvent::BuaS1 { bua: 1, bit });
                }
                BuaEvent::SetsUpdated(Phase::One) => {
                    if !legacy {
                        self.harvest_bua1(step);
                    }
                }
                BuaEvent::SetsUpdated(Phase::Two) => {
                    if !legacy {
                        self.check_y_majority(step);
                    }
                }
                BuaEvent::S2(bit) => {
                    step.trace.push(TraceEvent::BuaS2 { bua: 1, bit });
                    if legacy {
                        continue;
                    }
                    if bit {
                        if let Some(w) = self.w_input.clone() {
                            self.bua2_input(w, step);
                        }
                    } else {
                        self.abba_input(false, AbbaSource::Bua1Zero, step);
                    }
                }
                BuaEvent::Final { w, s2, vote } => {
                    step.trace.push(TraceEvent::BuaFinal { bua: 1, w: w.clone(), s2, vote });
                    if self.bua1.vote_collision() {
                        step.trace.push(TraceEvent::VoteCollision { bua: 1 });
                    }
                    if legacy {
                        self.src_final = Some((w, s2));
                        self.abba_input(vote, AbbaSource::FinalVote, step);
                    } else if !vote {
                        self.abba_input(false, AbbaSource::Bua1Zero, step);
                    }
                }
            }
        }
    }

    fn on_bua2_events(&mut self, events: Vec<BuaEvent>, step: &mut Step) {
        for ev in events {
            match ev {
                BuaEvent::S1(bit) => step.trace.push(TraceEvent::BuaS1 { bua: 2, bit }),
                BuaEvent::S2(bit) => step.trace.push(TraceEvent::BuaS2 { bua: 2, bit }),
                BuaEvent::Final { w, s2, vote } => {
                    step.trace.push(TraceEvent::BuaFinal { bua: 2, w: w.clone(), s2, vote });
                    if self.bua2.vote_collision() {
                        step.trace.push(TraceEvent::VoteCollision { bua: 2 });
                    }
                    self.src_final = Some((w, s2));
                    self.abba_input(vote, AbbaSource::FinalVote, step);
                }
                BuaEvent::SymbolDelivered { .. } | BuaEvent::SetsUpdated(_) => {}
            }
        }
    }

    fn on_ready(&mut self, from: NodeId, bit: bool, step: &mut Step) {
        if self.cfg.skip_brba {
            return;
        }
        let action = self.ready.on_ready(from, bit);
        if let Some(b) = action.amplify {
            step.broadcast(ProtocolMsg::Ready(b));
            step.trace.push(TraceEvent::ReadySent { bit: b });
        }
        if let Some(b) = action.decide {
            self.set_v_out(b, step);
        }
    }

    /// Dispersal bookkeeping after every handler.
    fn settle(&mut self, step: &mut Step) {
        if self.output.is_some() {
            return;
        }
        let src = if self.cfg.legacy_cool { &self.bua1 } else { &self.bua2 };
        self.hmdm.harvest(src, step);
        if let Some(w) = self.hmdm.poll(src, step) {
            self.terminate(Decision::Value(w), step);
        }
    }

    pub fn oec_new_attempts(&self) -> usize {
        self.oec_new.attempts()
    }

    pub fn oec_final_attempts(&self) -> usize {
        self.hmdm.attempts()
    }

    /// Whether the dispersal source has delivered its Final.
    pub fn source_final(&self) -> bool {
        self.src_final.is_some() && self.src().vote().is_some()
    }
}

impl Protocol for Acool {
    fn input(&mut self, w: &[u8]) -> Step {
        let mut step = Step::default();
        if self.w_input.is_some() || w.is_empty() || self.output.is_some() {
            return step;
        }
        let Ok(s) = self.bua1.input(w) else {
            return step;
        };
        self.w_input = Some(w.to_vec());
        step.trace.push(TraceEvent::BuaInput { bua: 1, w: w.to_vec() });
        step.messages.extend(s.messages);
        self.on_bua1_events(s.events, &mut step);
        self.settle(&mut step);
        step
    }

    fn handle(&mut self, from: NodeId, msg: ProtocolMsg) -> Step {
        let mut step = Step::default();
        if self.output.is_some() || from >= self.n() {
            return step;
        }
        let legacy = self.cfg.legacy_cool;
        match msg {
            ProtocolMsg::Symbol { bua: 1, .. }
            | ProtocolMsg::Si1 { bua: 1, .. }
            | ProtocolMsg::Si2 { bua: 1, .. } => {
                let s = self.bua1.handle(from, msg);
                step.messages.extend(s.messages);
                self.on_bua1_events(s.events, &mut step);
            }
            ProtocolMsg::Symbol { bua: 2, .. }
            | ProtocolMsg::Si1 { bua: 2, .. }
            | ProtocolMsg::Si2 { bua: 2, .. }
                if !legacy =>
            {
                let s = self.bua2.handle(from, msg);
                step.messages.extend(s.messages);
                self.on_bua2_events(s.events, &mut step);
            }
            ProtocolMsg::NewSymbol(y) if !legacy => {
                if self.seen_new_symbol.insert(from) {
                    self.submit_new(from, y, &mut step);
                }
            }
            ProtocolMsg::Ready(bit) => self.on_ready(from, bit, &mut step),
            ProtocolMsg::CorrectSymbol(y) => self.hmdm.on_correct_symbol(from, y, &mut step),
            ProtocolMsg::Abba(m) => {
                let s = self.abba.handle(from, m);
                self.absorb_abba(s, &mut step);
            }
            _ => {}
        }
        self.settle(&mut step);
        step
    }

    fn abba_decided(&mut self, bit: bool) -> Step {
        let mut step = Step::default();
        if self.output.is_some() {
            return step;
        }
        let s = self.abba.oracle_decision(bit);
        self.absorb_abba(s, &mut step);
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
        self.oec_new.attempts() + self.hmdm.attempts()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::derive_params;
    use crate::msg::Target;
    use std::collections::VecDeque;

    /// Delivers everything in FIFO order, deciding the oracle agreement once
    /// every node has reported an input.
    fn run_fifo(nodes: &mut [Acool], inputs: &[&[u8]], hint: bool) {
        let n = nodes.len();
        let mut queue: VecDeque<(NodeId, NodeId, ProtocolMsg)> = VecDeque::new();
        let mut abba_inputs = BTreeMap::new();
        let mut decided = false;
        let push = |queue: &mut VecDeque<_>, abba_inputs: &mut BTreeMap<_, _>, from, step: Step| {
            if let Some(b) = step.oracle_input {
                abba_inputs.insert(from, b);
            }
            for (target, msg) in step.messages {
                match target {
                    Target::All => (0..n).for_each(|to| queue.push_back((from, to, msg.clone()))),
                    Target::Node(to) => queue.push_back((from, to, msg)),
                }
            }
        };
        for (i, w) in inputs.iter().enumerate() {
            let s = nodes[i].input(w);
            push(&mut queue, &mut abba_inputs, i, s);
        }
        loop {
            while let Some((from, to, msg)) = queue.pop_front() {
                let s = nodes[to].handle(from, msg);
                push(&mut queue, &mut abba_inputs, to, s);
            }
            if decided || abba_inputs.len() < n {
                break;
            }
            decided = true;
            let bit = crate::aba::oracle_abba_decide(&abba_inputs, hint);
            for (i, node) in nodes.iter_mut().enumerate() {
                let s = node.abba_decided(bit);
                push(&mut queue, &mut abba_inputs, i, s);
            }
        }
    }

    fn nodes(n: usize, t: usize) -> Vec<Acool> {
        let params = derive_params(n, t, 64).unwrap();
        (0..n).map(|i| Acool::new(AcoolConfig::new(params, i))).collect()
    }

    #[test]
    fn fault_free_same_input() {
        let mut ns = nodes(4, 1);
        run_fifo(&mut ns, &[b"m", b"m", b"m", b"m"], false);
        for node in &ns {
            assert_eq!(node.output(), Some(&Decision::Value(b"m".to_vec())));
            assert_eq!(node.w_tilde(), Some(&b"m"[..]));
        }
    }

    #[test]
    fn split_inputs_agree() {
        for hint in [false, true] {
            let mut ns = nodes(7, 2);
            run_fifo(&mut ns, &[b"a", b"a", b"a", b"a", b"b", b"b", b"b"], hint);
            let first = ns[0].output().cloned().expect("terminated");
            assert!(ns.iter().all(|x| x.output() == Some(&first)));
        }
    }

    #[test]
    fn second_input_ignored() {
        let mut ns = nodes(4, 1);
        let s = ns[0].input(b"x");
        assert_eq!(s.messages.len(), 4);
        assert!(ns[0].input(b"y").messages.is_empty());
    }

    #[test]
    fn ready_rules() {
        let mut ns = nodes(4, 1);
        let node = &mut ns[0];
        let s = node.handle(1, ProtocolMsg::Ready(false));
        assert!(s.messages.is_empty());
        let s = node.handle(2, ProtocolMsg::Ready(false));
        assert_eq!(s.messages, vec![(Target::All, ProtocolMsg::Ready(false))]);
        node.handle(3, ProtocolMsg::Ready(false));
        assert_eq!(node.output(), Some(&Decision::Bottom));
    }

    #[test]
    fn three_ready_ones_enter_ph3() {
        let mut ns = nodes(4, 1);
        let node = &mut ns[0];
        for j in 1..4 {
            node.handle(j, ProtocolMsg::Ready(true));
        }
        assert_eq!(node.v_out(), Some(true));
        assert!(node.in_ph3());
        assert!(node.output().is_none());
    }
}
