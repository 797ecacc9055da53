//! Post-hoc property checks over the outputs and traces of one run.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::msg::{BuaTag, Decision, NodeId};
use crate::protocol::TraceEvent;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    /// No two honest nodes output different decisions.
    pub consistency: bool,
    /// `None` when the run's inputs make validity vacuous.
    pub validity: Option<bool>,
    /// At most one value is finalized with `s2 = 1` per BUA instance.
    pub unique_agreement: bool,
    /// At most two honest input values reach `s1 = 1` per BUA instance.
    pub s1_values: bool,
    /// No honest node gave the binary agreement more than one input.
    pub single_abba_input: bool,
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn safety_ok(&self) -> bool {
        self.consistency && self.validity != Some(false) && self.unique_agreement && self.s1_values && self.single_abba_input
    }
}

/// Distinct honest outputs, ignoring nodes without one.
pub fn distinct_outputs(outputs: &[Option<Decision>], honest: &[NodeId]) -> BTreeSet<Decision> {
    honest.iter().filter_map(|&i| outputs[i].clone()).collect()
}

/// `expected` is the value every honest node must output, if validity applies.
pub fn check_run(
    outputs: &[Option<Decision>],
    honest: &[NodeId],
    traces: &[Vec<TraceEvent>],
    expected: Option<&[u8]>,
) -> CheckReport {
    let mut violations = Vec::new();
    let distinct = distinct_outputs(outputs, honest);
    let consistency = distinct.len() <= 1;
    if !consistency {
        violations.push(format!("consistency: {} distinct honest outputs", distinct.len()));
    }

    let validity = expected.map(|w| {
        let want = Decision::Value(w.to_vec());
        let bad: Vec<NodeId> =
            honest.iter().copied().filter(|&i| outputs[i].as_ref().is_some_and(|d| *d != want)).collect();
        if !bad.is_empty() {
            violations.push(format!("validity: nodes {bad:?} output something other than the common input"));
        }
        bad.is_empty()
    });

    let mut finals: BTreeMap<BuaTag, BTreeSet<Vec<u8>>> = BTreeMap::new();
    let mut s1_inputs: BTreeMap<BuaTag, BTreeSet<Vec<u8>>> = BTreeMap::new();
    let mut single_abba_input = true;
    for &i in honest {
        let mut inputs: BTreeMap<BuaTag, &Vec<u8>> = BTreeMap::new();
        let mut abba = 0;
        for ev in &traces[i] {
            match ev {
                TraceEvent::BuaInput { bua, w } => {
                    inputs.insert(*bua, w);
                }
                TraceEvent::BuaS1 { bua, bit: true } => {
                    if let Some(w) = inputs.get(bua) {
                        s1_inputs.entry(*bua).or_default().insert((*w).clone());
                    }
                }
                TraceEvent::BuaFinal { bua, w: Some(w), s2: Some(true), .. } => {
                    finals.entry(*bua).or_default().insert(w.clone());
                }
                TraceEvent::AbbaInput { .. } => abba += 1,
                _ => {}
            }
        }
        if abba > 1 {
            single_abba_input = false;
            violations.push(format!("node {i} gave {abba} binary agreement inputs"));
        }
    }
    let unique_agreement = finals.values().all(|s| s.len() <= 1);
    for (bua, s) in finals.iter().filter(|(_, s)| s.len() > 1) {
        violations.push(format!("unique agreement: BUA {bua} finalized {} values with s2 = 1", s.len()));
    }
    let s1_values = s1_inputs.values().all(|s| s.len() <= 2);
    for (bua, s) in s1_inputs.iter().filter(|(_, s)| s.len() > 2) {
        violations.push(format!("BUA {bua}: {} distinct inputs reached s1 = 1", s.len()));
    }

    CheckReport { consistency, validity, unique_agreement, s1_values, single_abba_input, violations }
}
