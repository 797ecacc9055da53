//! Communication and round accounting for one run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::msg::{MsgTag, NodeId};

/// Tags that belong to the binary agreement rather than the composition.
pub fn is_abba_tag(tag: MsgTag) -> bool {
    matches!(tag, MsgTag::Est | MsgTag::Aux | MsgTag::AbbaOracle)
}

/// Counters collected while a run executes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Payload bits per message tag, including tags left out of `total_bits`.
    pub bits_by_tag: BTreeMap<String, u64>,
    pub total_bits: u64,
    /// Messages whose bits were counted.
    pub messages: u64,
    /// Longest causal chain seen by any honest node when it terminated.
    pub max_causal_round: u32,
    pub egress_bits: Vec<u64>,
    /// Bits the RBC leader put into LEADER / LEADERMESSAGE messages.
    pub leader_egress_bits: u64,
    pub decode_attempts: Vec<usize>,
    /// Inputs each honest node gave to the binary agreement.
    pub abba_inputs: Vec<usize>,
    /// Number of binary agreement instances that decided.
    pub abba_decisions: usize,
    /// `max(n l, n t ceil(log2 q))`.
    pub comparator_bits: f64,
    /// Deliveries forced by the fairness window.
    pub forced_deliveries: u64,
}

impl Metrics {
    pub fn new(n: usize) -> Self {
        Metrics {
            bits_by_tag: BTreeMap::new(),
            total_bits: 0,
            messages: 0,
            max_causal_round: 0,
            egress_bits: vec![0; n],
            leader_egress_bits: 0,
            decode_attempts: vec![0; n],
            abba_inputs: vec![0; n],
            abba_decisions: 0,
            comparator_bits: 0.0,
            forced_deliveries: 0,
        }
    }

    pub(crate) fn record(&mut self, from: NodeId, tag: MsgTag, bits: u64, into_total: bool) {
        *self.bits_by_tag.entry(tag.as_str().to_string()).or_default() += bits;
        self.egress_bits[from] += bits;
        if into_total {
            self.total_bits += bits;
            self.messages += 1;
        }
    }

    /// Measured bits over the comparator.
    pub fn ratio(&self) -> f64 {
        self.total_bits as f64 / self.comparator_bits
    }

    pub fn csv_header() -> &'static str {
        "total_bits,messages,max_causal_round,leader_egress_bits,abba_decisions,comparator_bits,ratio,forced_deliveries"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.4},{}",
            self.total_bits,
            self.messages,
            self.max_causal_round,
            self.leader_egress_bits,
            self.abba_decisions,
            self.comparator_bits,
            self.ratio(),
            self.forced_deliveries
        )
    }
}

/// The idealized cost `max(n l, n t ceil(log2 q))`.
pub fn comparator_bits(n: usize, t: usize, msg_len_bits: usize, q: u32) -> f64 {
    let nl = (n * msg_len_bits) as f64;
    let ntq = (n * t) as f64 * crate::field::ceil_log2(q as u64) as f64;
    nl.max(ntq)
}

/// One delivered message, for the newline-delimited event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: u64,
    pub from: NodeId,
    pub to: NodeId,
    pub tag: String,
    pub bits: u64,
    pub round: u32,
}
