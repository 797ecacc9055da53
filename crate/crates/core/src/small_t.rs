//! Agreement for `t` much smaller than `n`: the first `3t + 1` nodes run the
//! full protocol among themselves and then push coded shares of the decision
//! to everyone else, who decode online.
//!
//! A `⊥` decision cannot be encoded, so committee members send a one-bit
//! marker instead and outsiders output `⊥` after `t + 1` markers.

use std::collections::BTreeSet;

use crate::aba::{AbbaKind, CoinOracle};
use crate::acool::{Acool, AcoolConfig};
use crate::ecc::{ecc_encode, CodeParams, OecAccumulator, SymbolShare};
use crate::msg::{Decision, NodeId, ProtocolMsg, ShmdmPayload, Target};
use crate::protocol::{Protocol, Step, TraceEvent};

/// Committee size for fault bound `t`.
pub fn committee_size(t: usize) -> usize {
    3 * t + 1
}

/// Whether the committee variant should replace the full protocol: by
/// default once `n` is at least twice the committee size.
pub fn use_small_t(n: usize, t: usize, ratio: f64) -> bool {
    n as f64 >= ratio * committee_size(t) as f64
}

#[derive(Debug, Clone, Copy)]
pub struct SmallTConfig {
    /// Code parameters for all `n` nodes; the committee uses the same field
    /// and chunking restricted to its own size.
    pub params: CodeParams,
    pub self_id: NodeId,
    pub abba: AbbaKind,
    pub coin: CoinOracle,
    pub skip_brba: bool,
}

#[derive(Debug, Clone)]
pub struct SmallT {
    cfg: SmallTConfig,
    committee: usize,
    inner: Option<Acool>,
    oec: OecAccumulator,
    seen: BTreeSet<NodeId>,
    bottoms: BTreeSet<NodeId>,
    output: Option<Decision>,
}

impl SmallT {
    pub fn new(cfg: SmallTConfig) -> Self {
        let committee = committee_size(cfg.params.t).min(cfg.params.n);
        let inner_params = cfg.params.with_nodes(committee);
        let inner = (cfg.self_id < committee).then(|| {
            Acool::new(AcoolConfig {
                params: inner_params,
                self_id: cfg.self_id,
                abba: cfg.abba,
                coin: cfg.coin,
                skip_brba: cfg.skip_brba,
                legacy_cool: false,
            })
        });
        SmallT {
            cfg,
            committee,
            inner,
            oec: OecAccumulator::new(inner_params),
            seen: BTreeSet::new(),
            bottoms: BTreeSet::new(),
            output: None,
        }
    }

    pub fn committee(&self) -> usize {
        self.committee
    }

    pub fn in_committee(&self) -> bool {
        self.inner.is_some()
    }

    pub fn inner(&self) -> Option<&Acool> {
        self.inner.as_ref()
    }

    /// Re-addresses the inner protocol's broadcasts to the committee and
    /// disperses its decision once it exists.
    fn lift(&mut self, inner: Step) -> Step {
        let mut step = Step {
            messages: Vec::with_capacity(inner.messages.len()),
            oracle_input: inner.oracle_input,
            trace: inner.trace,
        };
        for (target, msg) in inner.messages {
            match target {
                Target::All => {
                    for j in 0..self.committee {
                        step.send(Target::Node(j), msg.clone());
                    }
                }
                Target::Node(j) => step.send(Target::Node(j), msg),
            }
        }
        if self.output.is_some() {
            return step;
        }
        let Some(decision) = self.inner.as_ref().and_then(|a| a.output()).cloned() else {
            return step;
        };
        let outsiders = self.committee..self.cfg.params.n;
        match &decision {
            Decision::Value(w) => {
                let params = self.cfg.params.with_nodes(self.committee);
                let shares = ecc_encode(&params, w).expect("committee decision fits the code");
                let mine = shares[self.cfg.self_id].symbol.clone();
                for j in outsiders {
                    step.send(Target::Node(j), ProtocolMsg::Shmdm(ShmdmPayload::Share(mine.clone())));
                }
            }
            Decision::Bottom => {
                for j in outsiders {
                    step.send(Target::Node(j), ProtocolMsg::Shmdm(ShmdmPayload::Bottom));
                }
            }
        }
        self.output = Some(decision);
        step
    }

    fn finish(&mut self, decision: Decision, step: &mut Step) {
        if self.output.is_none() {
            step.trace.push(TraceEvent::Output { decision: decision.clone() });
            self.output = Some(decision);
        }
    }
}

impl Protocol for SmallT {
    fn input(&mut self, w: &[u8]) -> Step {
        match self.inner.as_mut() {
            Some(inner) => {
                let s = inner.input(w);
                self.lift(s)
            }
            // outsiders take no part in the agreement
            None => Step::default(),
        }
    }

    fn handle(&mut self, from: NodeId, msg: ProtocolMsg) -> Step {
        if self.output.is_some() {
            return Step::default();
        }
        if let ProtocolMsg::Shmdm(payload) = msg {
            let mut step = Step::default();
            if self.inner.is_some() || from >= self.committee || !self.seen.insert(from) {
                return step;
            }
            match payload {
                ShmdmPayload::Share(symbol) => {
                    let share = SymbolShare { index: from as u32 + 1, symbol };
                    if let Ok(Some(w)) = self.oec.submit(share) {
                        self.finish(Decision::Value(w), &mut step);
                    }
                }
                ShmdmPayload::Bottom => {
                    self.bottoms.insert(from);
                    if self.bottoms.len() > self.cfg.params.t {
                        self.finish(Decision::Bottom, &mut step);
                    }
                }
            }
            return step;
        }
        if from >= self.committee {
            return Step::default();
        }
        match self.inner.as_mut() {
            Some(inner) => {
                let s = inner.handle(from, msg);
                self.lift(s)
            }
            None => Step::default(),
        }
    }

    fn abba_decided(&mut self, bit: bool) -> Step {
        match self.inner.as_mut() {
            Some(inner) => {
                let s = inner.abba_decided(bit);
                self.lift(s)
            }
            None => Step::default(),
        }
    }

    fn output(&self) -> Option<&Decision> {
        self.output.as_ref()
    }

    fn is_terminated(&self) -> bool {
        self.output.is_some()
    }

    fn decode_attempts(&self) -> usize {
        self.oec.attempts() + self.inner.as_ref().map_or(0, |a| a.decode_attempts())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::derive_params;

    fn cfg(n: usize, t: usize, id: NodeId) -> SmallTConfig {
        SmallTConfig {
            params: derive_params(n, t, 64).unwrap(),
            self_id: id,
            abba: AbbaKind::Oracle,
            coin: CoinOracle::new(0),
            skip_brba: false,
        }
    }

    #[test]
    fn activation_rule() {
        assert!(use_small_t(10, 1, 2.0));
        assert!(!use_small_t(7, 2, 2.0));
        assert_eq!(committee_size(2), 7);
    }

    #[test]
    fn outsider_decodes_from_committee_shares() {
        let c = cfg(10, 1, 7);
        let mut node = SmallT::new(c);
        assert!(!node.in_committee());
        let shares = ecc_encode(&c.params.with_nodes(4), b"decided").unwrap();
        let s = node.handle(0, ProtocolMsg::Shmdm(ShmdmPayload::Share(shares[0].symbol.clone())));
        assert!(s.trace.is_empty());
        node.handle(1, ProtocolMsg::Shmdm(ShmdmPayload::Share(shares[1].symbol.clone())));
        assert_eq!(node.output(), Some(&Decision::Value(b"decided".to_vec())));
    }

    #[test]
    fn outsider_bottom_needs_t_plus_one_markers() {
        let mut node = SmallT::new(cfg(10, 1, 9));
        node.handle(0, ProtocolMsg::Shmdm(ShmdmPayload::Bottom));
        assert!(node.output().is_none());
        node.handle(0, ProtocolMsg::Shmdm(ShmdmPayload::Bottom));
        assert!(node.output().is_none());
        node.handle(2, ProtocolMsg::Shmdm(ShmdmPayload::Bottom));
        assert_eq!(node.output(), Some(&Decision::Bottom));
    }

    #[test]
    fn shmdm_from_outsider_dropped() {
        let mut node = SmallT::new(cfg(10, 1, 9));
        for j in 4..9 {
            node.handle(j, ProtocolMsg::Shmdm(ShmdmPayload::Bottom));
        }
        assert!(node.output().is_none());
    }

    #[test]
    fn committee_broadcast_stays_in_committee() {
        let mut node = SmallT::new(cfg(10, 1, 0));
        let s = node.input(b"w");
        assert_eq!(s.messages.len(), 4);
        assert!(s.messages.iter().all(|(t, _)| matches!(t, Target::Node(j) if *j < 4)));
    }
}
