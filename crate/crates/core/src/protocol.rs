//! The event-driven interface every node-level protocol implements, and the
//! protocol trace the harness keeps for post-hoc property checks.

use serde::{Deserialize, Serialize};

use crate::msg::{BuaTag, Decision, NodeId, ProtocolMsg, Target};

/// Protocol-level facts recorded for every node of every run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    BuaInput {
        bua: BuaTag,
        #[serde(with = "hex::serde")]
        w: Vec<u8>,
    },
    BuaS1 { bua: BuaTag, bit: bool },
    BuaS2 { bua: BuaTag, bit: bool },
    BuaFinal {
        bua: BuaTag,
        #[serde(with = "opt_hex")]
        w: Option<Vec<u8>>,
        s2: Option<bool>,
        vote: bool,
    },
    /// Both vote thresholds held when the vote fired.
    VoteCollision { bua: BuaTag },
    AbbaInput { bit: bool },
    /// A second ABBA input source fired after the first had already won.
    AbbaRace { ignored: bool },
    AbbaOutput { bit: bool },
    ReadySent { bit: bool },
    /// Value `v*` of an RBA READY trigger, surfaced for an enclosing protocol.
    RbaReadyValue { bit: bool },
    NewSymbolSent,
    CorrectSymbolSent,
    /// A second write to an OEC slot carried a different symbol and was dropped.
    OecConflict { from: NodeId },
    Output { decision: Decision },
}

mod opt_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(bytes) => s.serialize_some(&hex::encode(bytes)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<u8>>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|h| hex::decode(h).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Debug, Default, Clone)]
pub struct Step {
    pub messages: Vec<(Target, ProtocolMsg)>,
    /// Input handed to the adjudicated binary agreement, if any.
    pub oracle_input: Option<bool>,
    pub trace: Vec<TraceEvent>,
}

impl Step {
    pub fn send(&mut self, target: Target, msg: ProtocolMsg) {
        self.messages.push((target, msg));
    }

    pub fn broadcast(&mut self, msg: ProtocolMsg) {
        self.messages.push((Target::All, msg));
    }

    pub fn extend(&mut self, other: Step) {
        self.messages.extend(other.messages);
        if other.oracle_input.is_some() {
            self.oracle_input = other.oracle_input;
        }
        self.trace.extend(other.trace);
    }
}

/// A node-level protocol state machine. Every handler runs to quiescence.
pub trait Protocol: Send {
    fn input(&mut self, w: &[u8]) -> Step;

    fn handle(&mut self, from: NodeId, msg: ProtocolMsg) -> Step;

    /// Decision of the adjudicated binary agreement.
    fn abba_decided(&mut self, _bit: bool) -> Step {
        Step::default()
    }

    fn output(&self) -> Option<&Decision>;

    fn is_terminated(&self) -> bool;

    /// Online decode attempts made so far, summed over accumulators.
    fn decode_attempts(&self) -> usize {
        0
    }
}
