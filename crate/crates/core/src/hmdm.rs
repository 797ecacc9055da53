//! Pieces shared by the agreement and RBA compositions: the READY tally of the
//! binary reliable agreement and the final dispersal step (majority
//! calibration, CORRECTSYMBOL exchange, online decoding).

use std::collections::{BTreeMap, BTreeSet};

use crate::bua::Bua;
use crate::ecc::{CodeParams, OecAccumulator, Symbol, SymbolShare};
use crate::msg::{NodeId, ProtocolMsg};
use crate::protocol::{Step, TraceEvent};

/// READY messages per bit, counting only the first READY of each sender.
#[derive(Debug, Clone)]
pub struct ReadyTally {
    t: usize,
    seen: BTreeSet<NodeId>,
    by_bit: [BTreeSet<NodeId>; 2],
    sent: Option<bool>,
    decided: Option<bool>,
}

/// What one READY delivery asks the caller to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReadyAction {
    pub amplify: Option<bool>,
    pub decide: Option<bool>,
}

impl ReadyTally {
    pub fn new(t: usize) -> Self {
        ReadyTally {
            t,
            seen: BTreeSet::new(),
            by_bit: [BTreeSet::new(), BTreeSet::new()],
            sent: None,
            decided: None,
        }
    }

    pub fn sent(&self) -> Option<bool> {
        self.sent
    }

    pub fn decided(&self) -> Option<bool> {
        self.decided
    }

    pub fn count(&self, bit: bool) -> usize {
        self.by_bit[bit as usize].len()
    }

    /// Records that this node sent READY(bit). Returns `false` if a READY was
    /// already sent.
    pub fn mark_sent(&mut self, bit: bool) -> bool {
        if self.sent.is_some() {
            return false;
        }
        self.sent = Some(bit);
        true
    }

    pub fn on_ready(&mut self, from: NodeId, bit: bool) -> ReadyAction {
        let mut action = ReadyAction::default();
        if !self.seen.insert(from) {
            return action;
        }
        self.by_bit[bit as usize].insert(from);
        let c = self.count(bit);
        if c > self.t && self.sent.is_none() {
            self.sent = Some(bit);
            action.amplify = Some(bit);
        }
        if c > 2 * self.t && self.decided.is_none() {
            self.decided = Some(bit);
            action.decide = Some(bit);
        }
        action
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ph3Mode {
    /// The source BUA already delivered `s2 = 1`; output its value.
    Immediate,
    /// Calibrate a symbol by majority, send it, then decode.
    Calibrate,
}

#[derive(Debug, Clone)]
pub struct Hmdm {
    t: usize,
    oec: OecAccumulator,
    ph3: Option<Ph3Mode>,
    calibrated: Option<Symbol>,
}

impl Hmdm {
    pub fn new(params: CodeParams) -> Self {
        Hmdm { t: params.t, oec: OecAccumulator::new(params), ph3: None, calibrated: None }
    }

    pub fn mode(&self) -> Option<Ph3Mode> {
        self.ph3
    }

    pub fn decoded(&self) -> Option<&[u8]> {
        self.oec.decoded()
    }

    pub fn attempts(&self) -> usize {
        self.oec.attempts()
    }

    fn submit(&mut self, from: NodeId, symbol: Symbol, step: &mut Step) {
        if self.oec.is_done() {
            return;
        }
        let index = from as u32 + 1;
        if let Some(prev) = self.oec.share(index) {
            if *prev != symbol {
                step.trace.push(TraceEvent::OecConflict { from });
            }
            return;
        }
        let _ = self.oec.submit(SymbolShare { index, symbol });
    }

    pub fn on_correct_symbol(&mut self, from: NodeId, symbol: Symbol, step: &mut Step) {
        self.submit(from, symbol, step);
    }

    /// Feeds `y_j` of every `j` in the source's phase-2 one-set.
    pub fn harvest(&mut self, src: &Bua, step: &mut Step) {
        if self.oec.is_done() {
            return;
        }
        let fresh: Vec<(NodeId, Symbol)> = src
            .s1_phase2()
            .iter()
            .filter(|&&j| !self.oec.contains(j as u32 + 1))
            .filter_map(|&j| src.received(j).map(|p| (j, p.1.clone())))
            .collect();
        for (j, y) in fresh {
            self.submit(j, y, step);
        }
    }

    /// Entered once, when `v_out = 1`. The mode is fixed at this point.
    pub fn enter_ph3(&mut self, src_final_s2_one: bool) {
        if self.ph3.is_none() {
            self.ph3 = Some(if src_final_s2_one { Ph3Mode::Immediate } else { Ph3Mode::Calibrate });
        }
    }

    /// Advances the calibration path. Returns the decoded value once this node
    /// may output it.
    pub fn poll(&mut self, src: &Bua, step: &mut Step) -> Option<Vec<u8>> {
        if self.ph3 != Some(Ph3Mode::Calibrate) {
            return None;
        }
        if self.calibrated.is_none() {
            let mut tally: BTreeMap<&Symbol, usize> = BTreeMap::new();
            for j in src.s1_phase2() {
                if let Some(pair) = src.received(*j) {
                    *tally.entry(&pair.0).or_default() += 1;
                }
            }
            let y = tally.into_iter().find(|&(_, c)| c > self.t).map(|(y, _)| y.clone())?;
            step.broadcast(ProtocolMsg::CorrectSymbol(y.clone()));
            step.trace.push(TraceEvent::CorrectSymbolSent);
            self.calibrated = Some(y);
        }
        self.oec.decoded().map(<[u8]>::to_vec)
    }
}
