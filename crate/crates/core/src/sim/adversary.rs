//! Byzantine behaviours. A Byzantine node runs one or two copies of the honest
//! code ("shadows") and the strategy rewrites what they send.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ecc::Symbol;
use crate::msg::{AbbaMsg, NodeId, ProtocolMsg, ShmdmPayload};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// No Byzantine nodes.
    #[default]
    None,
    /// Byzantine nodes never send anything.
    CrashSilent,
    /// Honest to even recipients, every symbol shifted and every bit flipped
    /// towards odd ones.
    EquivocateSymbols,
    /// Symbols replaced with random field elements.
    GarbageShares,
    /// Honest behaviour except that the victim set hears nothing.
    WithholdFromSubset,
    /// Two shadows with different inputs; each recipient talks to the shadow
    /// matching its own input group.
    SplitInputBuilder,
    /// Spurious READY to everyone, own READY suppressed.
    ReadySpammer,
    /// Per-message random choice among the behaviours above.
    RandomByzantine,
}

impl AdversaryKind {
    /// The seven Byzantine strategies, without `None`.
    pub const STRATEGIES: [AdversaryKind; 7] = [
        AdversaryKind::CrashSilent,
        AdversaryKind::EquivocateSymbols,
        AdversaryKind::GarbageShares,
        AdversaryKind::WithholdFromSubset,
        AdversaryKind::SplitInputBuilder,
        AdversaryKind::ReadySpammer,
        AdversaryKind::RandomByzantine,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AdversaryKind::None => "none",
            AdversaryKind::CrashSilent => "crash_silent",
            AdversaryKind::EquivocateSymbols => "equivocate_symbols",
            AdversaryKind::GarbageShares => "garbage_shares",
            AdversaryKind::WithholdFromSubset => "withhold_from_subset",
            AdversaryKind::SplitInputBuilder => "split_input_builder",
            AdversaryKind::ReadySpammer => "ready_spammer",
            AdversaryKind::RandomByzantine => "random_byzantine",
        }
    }

    pub fn shadows(&self) -> usize {
        if *self == AdversaryKind::SplitInputBuilder {
            2
        } else {
            1
        }
    }
}

fn shift(s: &Symbol, q: u32) -> Symbol {
    Symbol(s.0.iter().map(|&e| (e + 1) % q).collect())
}

fn random_symbol(s: &Symbol, q: u32, rng: &mut ChaCha8Rng) -> Symbol {
    Symbol(s.0.iter().map(|_| rng.gen_range(0..q)).collect())
}

fn map_symbols(msg: ProtocolMsg, mut f: impl FnMut(&Symbol) -> Symbol) -> ProtocolMsg {
    match msg {
        ProtocolMsg::Symbol { bua, pair } => ProtocolMsg::Symbol { bua, pair: (f(&pair.0), f(&pair.1)) },
        ProtocolMsg::NewSymbol(s) => ProtocolMsg::NewSymbol(f(&s)),
        ProtocolMsg::CorrectSymbol(s) => ProtocolMsg::CorrectSymbol(f(&s)),
        ProtocolMsg::Leader(s) => ProtocolMsg::Leader(f(&s)),
        ProtocolMsg::Initial(s) => ProtocolMsg::Initial(f(&s)),
        ProtocolMsg::Shmdm(ShmdmPayload::Share(s)) => ProtocolMsg::Shmdm(ShmdmPayload::Share(f(&s))),
        other => other,
    }
}

/// Flips every binary field; symbols and byte strings are left alone.
pub fn flip_bits(msg: ProtocolMsg) -> ProtocolMsg {
    match msg {
        ProtocolMsg::Si1 { bua, bit } => ProtocolMsg::Si1 { bua, bit: !bit },
        ProtocolMsg::Si2 { bua, bit } => ProtocolMsg::Si2 { bua, bit: !bit },
        ProtocolMsg::Ready(bit) => ProtocolMsg::Ready(!bit),
        ProtocolMsg::Abba(AbbaMsg::Est { round, bit }) => ProtocolMsg::Abba(AbbaMsg::Est { round, bit: !bit }),
        ProtocolMsg::Abba(AbbaMsg::Aux { round, bit }) => ProtocolMsg::Abba(AbbaMsg::Aux { round, bit: !bit }),
        other => other,
    }
}

/// Adds one to every symbol element, flips every bit and corrupts raw bytes.
pub fn perturb(msg: ProtocolMsg, q: u32) -> ProtocolMsg {
    match flip_bits(map_symbols(msg, |s| shift(s, q))) {
        ProtocolMsg::LeaderMessage(mut w) => {
            if let Some(b) = w.first_mut() {
                *b ^= 1;
            }
            ProtocolMsg::LeaderMessage(w)
        }
        other => other,
    }
}

/// Replaces symbols and raw bytes with random content of the same shape.
pub fn garbage(msg: ProtocolMsg, q: u32, rng: &mut ChaCha8Rng) -> ProtocolMsg {
    match map_symbols(msg, |s| random_symbol(s, q, rng)) {
        ProtocolMsg::LeaderMessage(w) => ProtocolMsg::LeaderMessage(w.iter().map(|_| rng.gen()).collect()),
        other => other,
    }
}

/// Per-node state of a Byzantine strategy.
#[derive(Debug, Clone, Default)]
pub struct ByzState {
    spammed: BTreeSet<NodeId>,
}

/// Everything a strategy may look at besides the message itself.
pub struct OutboundCtx<'a> {
    pub kind: AdversaryKind,
    pub q: u32,
    pub victims: &'a BTreeSet<NodeId>,
    /// Input group of each node, used to route split shadows.
    pub group: &'a [usize],
    pub shadow: usize,
}

impl ByzState {
    /// Rewrites one outbound message of a Byzantine node; the result is what
    /// actually goes on the wire, in order.
    pub fn outbound(
        &mut self,
        ctx: &OutboundCtx<'_>,
        to: NodeId,
        msg: ProtocolMsg,
        rng: &mut ChaCha8Rng,
    ) -> Vec<ProtocolMsg> {
        match ctx.kind {
            AdversaryKind::None => vec![msg],
            AdversaryKind::CrashSilent => vec![],
            AdversaryKind::EquivocateSymbols => {
                if to % 2 == 1 {
                    vec![perturb(msg, ctx.q)]
                } else {
                    vec![msg]
                }
            }
            AdversaryKind::GarbageShares => vec![garbage(msg, ctx.q, rng)],
            AdversaryKind::WithholdFromSubset => {
                if ctx.victims.contains(&to) {
                    vec![]
                } else {
                    vec![msg]
                }
            }
            AdversaryKind::SplitInputBuilder => {
                if ctx.group[to].min(1) == ctx.shadow {
                    vec![msg]
                } else {
                    vec![]
                }
            }
            AdversaryKind::ReadySpammer => {
                let mut out = Vec::with_capacity(2);
                if self.spammed.insert(to) {
                    out.push(ProtocolMsg::Ready(to.is_multiple_of(2)));
                }
                if !matches!(msg, ProtocolMsg::Ready(_)) {
                    out.push(msg);
                }
                out
            }
            AdversaryKind::RandomByzantine => {
                let roll: f64 = rng.gen();
                if roll < 0.40 {
                    vec![msg]
                } else if roll < 0.55 {
                    vec![]
                } else if roll < 0.70 {
                    vec![perturb(msg, ctx.q)]
                } else if roll < 0.85 {
                    vec![garbage(msg, ctx.q, rng)]
                } else {
                    vec![flip_bits(msg)]
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn ctx<'a>(kind: AdversaryKind, victims: &'a BTreeSet<NodeId>, group: &'a [usize]) -> OutboundCtx<'a> {
        OutboundCtx { kind, q: 257, victims, group, shadow: 0 }
    }

    #[test]
    fn perturb_shifts_and_flips() {
        let m = ProtocolMsg::NewSymbol(Symbol(vec![0, 256]));
        assert_eq!(perturb(m, 257), ProtocolMsg::NewSymbol(Symbol(vec![1, 0])));
        assert_eq!(perturb(ProtocolMsg::Ready(true), 257), ProtocolMsg::Ready(false));
    }

    #[test]
    fn withhold_and_split_routing() {
        let victims: BTreeSet<_> = [0, 1].into();
        let group = [0, 0, 1, 1];
        let mut st = ByzState::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = ctx(AdversaryKind::WithholdFromSubset, &victims, &group);
        assert!(st.outbound(&c, 1, ProtocolMsg::Ready(true), &mut rng).is_empty());
        assert_eq!(st.outbound(&c, 2, ProtocolMsg::Ready(true), &mut rng).len(), 1);
        let c = ctx(AdversaryKind::SplitInputBuilder, &victims, &group);
        assert_eq!(st.outbound(&c, 0, ProtocolMsg::Ready(true), &mut rng).len(), 1);
        assert!(st.outbound(&c, 3, ProtocolMsg::Ready(true), &mut rng).is_empty());
    }

    #[test]
    fn spammer_sends_one_ready_per_recipient() {
        let victims = BTreeSet::new();
        let c = ctx(AdversaryKind::ReadySpammer, &victims, &[]);
        let mut st = ByzState::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = st.outbound(&c, 2, ProtocolMsg::Ready(false), &mut rng);
        assert_eq!(a, vec![ProtocolMsg::Ready(true)]);
        let b = st.outbound(&c, 2, ProtocolMsg::Si1 { bua: 1, bit: true }, &mut rng);
        assert_eq!(b, vec![ProtocolMsg::Si1 { bua: 1, bit: true }]);
    }
}
