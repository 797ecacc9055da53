//! Wire messages exchanged by every protocol in the crate.

use serde::{Deserialize, Serialize};

use crate::ecc::Symbol;

pub type NodeId = usize;

/// Which BUA instance a per-instance message belongs to. `0` is a standalone
/// BUA (the one inside RBA); the agreement protocol runs instances `1` and `2`.
pub type BuaTag = u8;

/// Where a protocol wants a message to go. `All` is expanded by the node to
/// the participants of the instance (the whole network, or a committee).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    All,
    Node(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbbaMsg {
    Est { round: u32, bit: bool },
    Aux { round: u32, bit: bool },
}

/// Payload of an SHMDM message: a coded share of the committee decision, or
/// the marker for a `⊥` decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShmdmPayload {
    Share(Symbol),
    Bottom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolMsg {
    /// `(y_j^{(i)}, y_i^{(i)})` from sender `i` to receiver `j`.
    Symbol { bua: BuaTag, pair: (Symbol, Symbol) },
    Si1 { bua: BuaTag, bit: bool },
    Si2 { bua: BuaTag, bit: bool },
    NewSymbol(Symbol),
    Ready(bool),
    CorrectSymbol(Symbol),
    Shmdm(ShmdmPayload),
    Leader(Symbol),
    Initial(Symbol),
    LeaderMessage(Vec<u8>),
    Abba(AbbaMsg),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MsgTag {
    #[serde(rename = "SYMBOL")]
    Symbol,
    #[serde(rename = "SI1")]
    Si1,
    #[serde(rename = "SI2")]
    Si2,
    #[serde(rename = "NEWSYMBOL")]
    NewSymbol,
    #[serde(rename = "READY")]
    Ready,
    #[serde(rename = "CORRECTSYMBOL")]
    CorrectSymbol,
    #[serde(rename = "SHMDM")]
    Shmdm,
    #[serde(rename = "LEADER")]
    Leader,
    #[serde(rename = "INITIAL")]
    Initial,
    #[serde(rename = "LEADERMESSAGE")]
    LeaderMessage,
    #[serde(rename = "EST")]
    Est,
    #[serde(rename = "AUX")]
    Aux,
    /// Harness side channel of the adjudicated binary agreement.
    #[serde(rename = "ABBA_ORACLE")]
    AbbaOracle,
}

impl MsgTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MsgTag::Symbol => "SYMBOL",
            MsgTag::Si1 => "SI1",
            MsgTag::Si2 => "SI2",
            MsgTag::NewSymbol => "NEWSYMBOL",
            MsgTag::Ready => "READY",
            MsgTag::CorrectSymbol => "CORRECTSYMBOL",
            MsgTag::Shmdm => "SHMDM",
            MsgTag::Leader => "LEADER",
            MsgTag::Initial => "INITIAL",
            MsgTag::LeaderMessage => "LEADERMESSAGE",
            MsgTag::Est => "EST",
            MsgTag::Aux => "AUX",
            MsgTag::AbbaOracle => "ABBA_ORACLE",
        }
    }
}

/// Bits used to carry a round number in EST/AUX messages.
pub const ABBA_ROUND_BITS: u64 = 8;

impl ProtocolMsg {
    pub fn tag(&self) -> MsgTag {
        match self {
            ProtocolMsg::Symbol { .. } => MsgTag::Symbol,
            ProtocolMsg::Si1 { .. } => MsgTag::Si1,
            ProtocolMsg::Si2 { .. } => MsgTag::Si2,
            ProtocolMsg::NewSymbol(_) => MsgTag::NewSymbol,
            ProtocolMsg::Ready(_) => MsgTag::Ready,
            ProtocolMsg::CorrectSymbol(_) => MsgTag::CorrectSymbol,
            ProtocolMsg::Shmdm(_) => MsgTag::Shmdm,
            ProtocolMsg::Leader(_) => MsgTag::Leader,
            ProtocolMsg::Initial(_) => MsgTag::Initial,
            ProtocolMsg::LeaderMessage(_) => MsgTag::LeaderMessage,
            ProtocolMsg::Abba(AbbaMsg::Est { .. }) => MsgTag::Est,
            ProtocolMsg::Abba(AbbaMsg::Aux { .. }) => MsgTag::Aux,
        }
    }

    /// Payload size for the communication accounting. Symbols cost
    /// `ceil(log2 q)` bits per element; identifiers and tags are free.
    pub fn payload_bits(&self, element_bits: u32) -> u64 {
        let sym = |s: &Symbol| s.len() as u64 * element_bits as u64;
        match self {
            ProtocolMsg::Symbol { pair, .. } => sym(&pair.0) + sym(&pair.1),
            ProtocolMsg::Si1 { .. } | ProtocolMsg::Si2 { .. } | ProtocolMsg::Ready(_) => 1,
            ProtocolMsg::NewSymbol(s)
            | ProtocolMsg::CorrectSymbol(s)
            | ProtocolMsg::Leader(s)
            | ProtocolMsg::Initial(s) => sym(s),
            ProtocolMsg::Shmdm(ShmdmPayload::Share(s)) => sym(s),
            ProtocolMsg::Shmdm(ShmdmPayload::Bottom) => 1,
            ProtocolMsg::LeaderMessage(w) => w.len() as u64 * 8,
            ProtocolMsg::Abba(_) => 1 + ABBA_ROUND_BITS,
        }
    }
}

/// A protocol's final decision: a value or the distinguished `⊥`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Value(#[serde(with = "hex::serde")] Vec<u8>),
    Bottom,
}

impl Decision {
    pub fn is_bottom(&self) -> bool {
        matches!(self, Decision::Bottom)
    }

    pub fn value(&self) -> Option<&[u8]> {
        match self {
            Decision::Value(v) => Some(v),
            Decision::Bottom => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_accounting() {
        let s = Symbol(vec![0; 5]);
        let m = ProtocolMsg::Symbol { bua: 1, pair: (s.clone(), s.clone()) };
        assert_eq!(m.payload_bits(9), 90);
        assert_eq!(ProtocolMsg::Ready(true).payload_bits(9), 1);
        assert_eq!(ProtocolMsg::LeaderMessage(vec![0; 4]).payload_bits(9), 32);
        assert_eq!(m.tag().as_str(), "SYMBOL");
    }

    #[test]
    fn decision_json() {
        let v = serde_json::to_string(&Decision::Value(vec![0xab, 1])).unwrap();
        assert_eq!(v, r#"{"value":"ab01"}"#);
        assert_eq!(serde_json::to_string(&Decision::Bottom).unwrap(), r#""bottom""#);
        let back: Decision = serde_json::from_str(&v).unwrap();
        assert_eq!(back, Decision::Value(vec![0xab, 1]));
    }
}
