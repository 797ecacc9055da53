//! Deterministic discrete-event simulation of an asynchronous network.
//!
//! A run is fully determined by its [`SimConfig`]: node inputs, delivery
//! order, Byzantine choices and the common coin are all drawn from ChaCha
//! streams keyed by the seed.

pub mod adversary;
pub mod checks;
pub mod metrics;
pub mod scenario;
pub mod scheduler;
pub mod sweep;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aba::{oracle_abba_decide, AbbaKind, CoinOracle};
use crate::acool::{Acool, AcoolConfig};
use crate::ecc::{derive_params, CodeParams, EccError};
use crate::msg::{Decision, MsgTag, NodeId, ProtocolMsg, Target};
use crate::protocol::{Protocol, Step, TraceEvent};
use crate::rba::{Rba, RbaConfig, Rbc, RbcConfig, RbcMode};
use crate::small_t::{committee_size, SmallT, SmallTConfig};

pub use adversary::AdversaryKind;
pub use checks::CheckReport;
pub use metrics::{LogRecord, Metrics};
pub use scenario::scenario_split_input;
pub use scheduler::SchedulerKind;
pub use sweep::{sweep, Grid, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ProtocolKind {
    #[default]
    Acool,
    Rba,
    Rbc,
    SmallT,
}

impl ProtocolKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolKind::Acool => "acool",
            ProtocolKind::Rba => "rba",
            ProtocolKind::Rbc => "rbc",
            ProtocolKind::SmallT => "small_t",
        }
    }
}

/// How node inputs are assigned. Generated values are `ceil(l / 8)` bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InputSpec {
    /// Every node gets the same value.
    #[default]
    Same,
    /// Nodes `0..a` get one value, the rest another.
    Split { a: usize },
    /// Every node gets its own random value.
    Random,
    /// One entry per node; `bottom` means the node gets no input.
    Explicit { values: Vec<Decision> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    pub msg_len_bits: usize,
    pub adversary: AdversaryKind,
    /// Byzantine ids; by default the last `t` participants (none when the
    /// adversary is `none`).
    pub byzantine: Option<Vec<NodeId>>,
    pub scheduler: SchedulerKind,
    pub inputs: InputSpec,
    pub skip_brba: bool,
    pub count_abba_bits: bool,
    pub count_byzantine_bits: bool,
    pub abba: AbbaKind,
    /// Wire the first BUA straight into the binary agreement, without the
    /// second BUA and without NEWSYMBOL.
    pub legacy_cool: bool,
    pub rbc_mode: RbcMode,
    pub leader: NodeId,
    pub event_cap: u64,
    /// Defaults to `8 n^2`.
    pub fairness_window: Option<u64>,
    pub record_log: bool,
    pub record_traces: bool,
    /// Nodes that `withhold_from_subset` starves and the adversarial
    /// scheduler delays; by default the first `n - 2t` honest participants.
    pub victims: Option<Vec<NodeId>>,
}

pub const DEFAULT_EVENT_CAP: u64 = 1_000_000;

impl SimConfig {
    pub fn new(protocol: ProtocolKind, n: usize, t: usize) -> Self {
        SimConfig {
            protocol,
            n,
            t,
            seed: 0,
            msg_len_bits: 256,
            adversary: AdversaryKind::None,
            byzantine: None,
            scheduler: SchedulerKind::Uniform,
            inputs: InputSpec::Same,
            skip_brba: false,
            count_abba_bits: false,
            count_byzantine_bits: false,
            abba: AbbaKind::Oracle,
            legacy_cool: false,
            rbc_mode: RbcMode::Balanced,
            leader: 0,
            event_cap: DEFAULT_EVENT_CAP,
            fairness_window: None,
            record_log: false,
            record_traces: false,
            victims: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_adversary(mut self, adversary: AdversaryKind) -> Self {
        self.adversary = adversary;
        self
    }

    pub fn with_scheduler(mut self, scheduler: SchedulerKind) -> Self {
        self.scheduler = scheduler;
        self
    }

    pub fn with_inputs(mut self, inputs: InputSpec) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with_len(mut self, msg_len_bits: usize) -> Self {
        self.msg_len_bits = msg_len_bits;
        self
    }

    pub fn params(&self) -> Result<CodeParams, EccError> {
        derive_params(self.n, self.t, self.msg_len_bits)
    }

    /// Nodes taking part in the agreement itself.
    pub fn participants(&self) -> usize {
        match self.protocol {
            ProtocolKind::SmallT => committee_size(self.t).min(self.n),
            _ => self.n,
        }
    }

    pub fn byzantine_set(&self) -> Vec<NodeId> {
        match &self.byzantine {
            Some(b) => b.clone(),
            None if self.adversary == AdversaryKind::None => vec![],
            None => {
                let p = self.participants();
                (p.saturating_sub(self.t)..p).collect()
            }
        }
    }

    pub fn victim_set(&self) -> Vec<NodeId> {
        if let Some(v) = &self.victims {
            return v.clone();
        }
        let byz: BTreeSet<_> = self.byzantine_set().into_iter().collect();
        let want = self.participants().saturating_sub(2 * self.t);
        (0..self.participants()).filter(|i| !byz.contains(i)).take(want).collect()
    }

    pub fn window(&self) -> u64 {
        self.fairness_window.unwrap_or(8 * (self.n * self.n) as u64)
    }

    pub fn validate(&self) -> Result<CodeParams, SimError> {
        let params = self.params()?;
        let byz = self.byzantine_set();
        if byz.len() > self.t {
            return Err(SimError::TooManyByzantine { count: byz.len(), t: self.t });
        }
        let ids = byz.iter().chain(self.victims.iter().flatten()).chain(std::iter::once(&self.leader));
        if let Some(&id) = ids.clone().find(|&&id| id >= self.n) {
            return Err(SimError::IdOutOfRange { id, n: self.n });
        }
        if let InputSpec::Explicit { values } = &self.inputs {
            if values.len() != self.n {
                return Err(SimError::InputCount { got: values.len(), n: self.n });
            }
        }
        let cap = params.capacity_bytes();
        for w in self.input_values().into_iter().flatten() {
            if w.len() > cap {
                return Err(SimError::Ecc(EccError::MessageTooLong { len: w.len(), capacity: cap }));
            }
        }
        Ok(params)
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    fn random_value(&self, rng: &mut ChaCha8Rng) -> Vec<u8> {
        let mut w = vec![0u8; self.msg_len_bits.div_ceil(8)];
        rng.fill_bytes(&mut w);
        w
    }

    /// The two generated values used by `Same` and `Split`; they differ.
    pub fn value_pair(&self) -> (Vec<u8>, Vec<u8>) {
        let a = self.random_value(&mut self.stream(STREAM_INPUTS));
        let mut b = a.clone();
        b[0] ^= 1;
        (a, b)
    }

    /// Per-node input, `None` for no input.
    pub fn input_values(&self) -> Vec<Option<Vec<u8>>> {
        let (a, b) = self.value_pair();
        match &self.inputs {
            InputSpec::Same => vec![Some(a); self.n],
            InputSpec::Split { a: cut } => {
                (0..self.n).map(|i| Some(if i < *cut { a.clone() } else { b.clone() })).collect()
            }
            InputSpec::Random => {
                let mut rng = self.stream(STREAM_RANDOM_INPUTS);
                (0..self.n).map(|_| Some(self.random_value(&mut rng))).collect()
            }
            InputSpec::Explicit { values } => values
                .iter()
                .map(|d| match d {
                    Decision::Value(w) => Some(w.clone()),
                    Decision::Bottom => None,
                })
                .collect(),
        }
    }
}

const STREAM_SCHEDULER: u64 = 0;
const STREAM_INPUTS: u64 = 1;
const STREAM_RANDOM_INPUTS: u64 = 2;
const STREAM_ADVERSARY: u64 = 3;
const STREAM_ORACLE: u64 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Ecc(#[from] EccError),
    #[error("{count} Byzantine nodes exceed t = {t}")]
    TooManyByzantine { count: usize, t: usize },
    #[error("node id {id} out of range for n = {n}")]
    IdOutOfRange { id: NodeId, n: usize },
    #[error("{got} explicit inputs for n = {n}")]
    InputCount { got: usize, n: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("empty sweep grid")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Every honest node produced an output.
    Terminated,
    /// No events left while some honest node had no output.
    Stalled,
    EventCapExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: SimConfig,
    pub outcome: Outcome,
    pub liveness_ok: bool,
    pub steps: u64,
    pub byzantine: Vec<NodeId>,
    pub outputs: Vec<Option<Decision>>,
    pub checks: CheckReport,
    pub metrics: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<Vec<TraceEvent>>>,
    #[serde(skip)]
    pub log: Option<Vec<LogRecord>>,
}

impl RunReport {
    pub fn safety_ok(&self) -> bool {
        self.checks.safety_ok()
    }

    pub fn ok(&self) -> bool {
        self.safety_ok() && self.liveness_ok
    }

    /// 0 on success, 2 on a property violation, 3 on a liveness failure.
    pub fn exit_code(&self) -> i32 {
        if !self.safety_ok() {
            2
        } else if !self.liveness_ok {
            3
        } else {
            0
        }
    }

    pub fn honest(&self) -> Vec<NodeId> {
        (0..self.config.n).filter(|i| !self.byzantine.contains(i)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The delivery log as newline-delimited JSON, empty unless recorded.
    pub fn log_ndjson(&self) -> String {
        let mut out = String::new();
        for r in self.log.iter().flatten() {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

pub fn build_node(cfg: &SimConfig, params: CodeParams, id: NodeId) -> Box<dyn Protocol> {
    let coin = CoinOracle::new(cfg.seed);
    match cfg.protocol {
        ProtocolKind::Acool => Box::new(Acool::new(AcoolConfig {
            params,
            self_id: id,
            abba: cfg.abba,
            coin,
            skip_brba: cfg.skip_brba,
            legacy_cool: cfg.legacy_cool,
        })),
        ProtocolKind::Rba => Box::new(Rba::new(RbaConfig::new(params, id))),
        ProtocolKind::Rbc => {
            Box::new(Rbc::new(RbcConfig { params, self_id: id, leader: cfg.leader, mode: cfg.rbc_mode }))
        }
        ProtocolKind::SmallT => Box::new(SmallT::new(SmallTConfig {
            params,
            self_id: id,
            abba: cfg.abba,
            coin,
            skip_brba: cfg.skip_brba,
        })),
    }
}

enum Event {
    Input { node: NodeId },
    Deliver { from: NodeId, to: NodeId, msg: ProtocolMsg, round: u32, bits: u64 },
    AbbaDecision { to: NodeId, bit: bool, round: u32 },
}

struct SimNode {
    shadows: Vec<Box<dyn Protocol>>,
    byz: Option<adversary::ByzState>,
    max_round: u32,
    trace: Vec<TraceEvent>,
    done: bool,
}

impl SimNode {
    fn finished(&self) -> bool {
        self.done || (self.byz.is_some() && self.shadows.iter().all(|s| s.is_terminated()))
    }
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    element_bits: u32,
    q: u32,
    nodes: Vec<SimNode>,
    inputs: Vec<Option<Vec<u8>>>,
    shadow_inputs: [Option<Vec<u8>>; 2],
    group: Vec<usize>,
    victims: BTreeSet<NodeId>,
    sched: scheduler::Scheduler<Event>,
    rng: ChaCha8Rng,
    adv_rng: ChaCha8Rng,
    oracle_hint: bool,
    oracle_inputs: BTreeMap<NodeId, bool>,
    oracle_round: u32,
    oracle_decided: bool,
    honest_participants: usize,
    metrics: Metrics,
    log: Option<Vec<LogRecord>>,
    now: u64,
}

impl Sim<'_> {
    fn is_byz(&self, i: NodeId) -> bool {
        self.nodes[i].byz.is_some()
    }

    fn send(&mut self, from: NodeId, to: NodeId, msg: ProtocolMsg) {
        let tag = msg.tag();
        let bits = msg.payload_bits(self.element_bits);
        let byz = self.is_byz(from);
        if !byz || self.cfg.count_byzantine_bits {
            let into_total = self.cfg.count_abba_bits || !metrics::is_abba_tag(tag);
            self.metrics.record(from, tag, bits, into_total);
            if self.cfg.protocol == ProtocolKind::Rbc
                && from == self.cfg.leader
                && matches!(tag, MsgTag::Leader | MsgTag::LeaderMessage)
            {
                self.metrics.leader_egress_bits += bits;
            }
        }
        if self.nodes[to].finished() {
            return;
        }
        let round = self.nodes[from].max_round + 1;
        let delayed = !byz && self.victims.contains(&to);
        self.sched.push(self.now, delayed, Event::Deliver { from, to, msg, round, bits });
    }

    fn dispatch(&mut self, i: NodeId, shadow: usize, step: Step) {
        let n = self.cfg.n;
        if self.nodes[i].byz.is_none() {
            self.nodes[i].trace.extend(step.trace);
            if let Some(bit) = step.oracle_input {
                self.oracle_input(i, bit);
            }
        }
        for (target, msg) in step.messages {
            let targets = match target {
                Target::All => 0..n,
                Target::Node(j) => j..j + 1,
            };
            for to in targets {
                let out = match self.nodes[i].byz.as_mut() {
                    None => vec![msg.clone()],
                    Some(st) => {
                        let ctx = adversary::OutboundCtx {
                            kind: self.cfg.adversary,
                            q: self.q,
                            victims: &self.victims,
                            group: &self.group,
                            shadow,
                        };
                        st.outbound(&ctx, to, msg.clone(), &mut self.adv_rng)
                    }
                };
                for m in out {
                    self.send(i, to, m);
                }
            }
        }
        let node = &mut self.nodes[i];
        if node.byz.is_none() && !node.done && node.shadows[0].is_terminated() {
            node.done = true;
            self.metrics.max_causal_round = self.metrics.max_causal_round.max(node.max_round);
        }
    }

    fn oracle_input(&mut self, i: NodeId, bit: bool) {
        if self.cfg.abba != AbbaKind::Oracle || self.oracle_inputs.contains_key(&i) {
            return;
        }
        self.oracle_inputs.insert(i, bit);
        self.oracle_round = self.oracle_round.max(self.nodes[i].max_round);
        self.metrics.record(i, MsgTag::AbbaOracle, 1, self.cfg.count_abba_bits);
        if !self.oracle_decided && self.oracle_inputs.len() == self.honest_participants {
            self.oracle_decided = true;
            self.metrics.abba_decisions += 1;
            let bit = oracle_abba_decide(&self.oracle_inputs, self.oracle_hint);
            let round = self.oracle_round + 1;
            for to in 0..self.cfg.participants() {
                self.sched.push(self.now, false, Event::AbbaDecision { to, bit, round });
            }
        }
    }

    fn give_input(&mut self, i: NodeId) {
        let node = &mut self.nodes[i];
        let split = node.byz.is_some() && self.cfg.adversary == AdversaryKind::SplitInputBuilder;
        let mut steps = Vec::new();
        for (s, p) in node.shadows.iter_mut().enumerate() {
            let w = if split { self.shadow_inputs[s].as_ref() } else { self.inputs[i].as_ref() };
            if let Some(w) = w {
                steps.push((s, p.input(w)));
            }
        }
        for (s, st) in steps {
            self.dispatch(i, s, st);
        }
    }

    fn deliver(&mut self, to: NodeId, f: impl Fn(&mut dyn Protocol) -> Step) {
        let steps: Vec<(usize, Step)> =
            self.nodes[to].shadows.iter_mut().enumerate().map(|(s, p)| (s, f(p.as_mut()))).collect();
        for (s, st) in steps {
            self.dispatch(to, s, st);
        }
    }

    fn all_honest_done(&self) -> bool {
        self.nodes.iter().all(|n| n.byz.is_some() || n.done)
    }
}

/// Executes one run to termination, quiescence or the event cap.
pub fn run(cfg: &SimConfig) -> Result<RunReport, SimError> {
    let params = cfg.validate()?;
    let byz_ids: BTreeSet<NodeId> = cfg.byzantine_set().into_iter().collect();
    let inputs = cfg.input_values();

    // input groups: position of each honest input among the distinct ones
    let mut distinct: Vec<&Vec<u8>> = Vec::new();
    for (i, w) in inputs.iter().enumerate() {
        if let Some(w) = w.as_ref().filter(|_| !byz_ids.contains(&i)) {
            if !distinct.contains(&w) {
                distinct.push(w);
            }
        }
    }
    let group: Vec<usize> = (0..cfg.n)
        .map(|i| match &inputs[i] {
            Some(w) if distinct.len() > 1 && !byz_ids.contains(&i) => {
                distinct.iter().position(|d| *d == w).unwrap_or(i % 2)
            }
            _ => i % 2,
        })
        .collect();
    let (a, b) = cfg.value_pair();
    let shadow_inputs = [
        Some(distinct.first().map_or(a, |w| (*w).clone())),
        Some(distinct.get(1).map_or(b, |w| (*w).clone())),
    ];

    let nodes = (0..cfg.n)
        .map(|i| {
            let byz = byz_ids.contains(&i);
            let copies = if byz { cfg.adversary.shadows() } else { 1 };
            SimNode {
                shadows: (0..copies).map(|_| build_node(cfg, params, i)).collect(),
                byz: byz.then(adversary::ByzState::default),
                max_round: 0,
                trace: Vec::new(),
                done: false,
            }
        })
        .collect();
    let honest_participants = (0..cfg.participants()).filter(|i| !byz_ids.contains(i)).count();

    let mut sim = Sim {
        cfg,
        element_bits: params.field().element_bits(),
        q: params.q,
        nodes,
        inputs: inputs.clone(),
        shadow_inputs,
        group,
        victims: cfg.victim_set().into_iter().collect(),
        sched: scheduler::Scheduler::new(cfg.scheduler, cfg.window()),
        rng: cfg.stream(STREAM_SCHEDULER),
        adv_rng: cfg.stream(STREAM_ADVERSARY),
        oracle_hint: cfg.stream(STREAM_ORACLE).gen(),
        oracle_inputs: BTreeMap::new(),
        oracle_round: 0,
        oracle_decided: false,
        honest_participants,
        metrics: Metrics::new(cfg.n),
        log: cfg.record_log.then(Vec::new),
        now: 0,
    };
    sim.metrics.comparator_bits = metrics::comparator_bits(cfg.n, cfg.t, cfg.msg_len_bits, params.q);

    for node in 0..cfg.n {
        let has_input = match cfg.protocol {
            ProtocolKind::Rbc => node == cfg.leader,
            _ => true,
        };
        if has_input {
            sim.sched.push(0, false, Event::Input { node });
        }
    }

    let outcome = loop {
        if sim.all_honest_done() {
            break Outcome::Terminated;
        }
        if sim.now >= cfg.event_cap {
            break Outcome::EventCapExceeded;
        }
        let Some(ev) = sim.sched.pop(sim.now, &mut sim.rng) else {
            break Outcome::Stalled;
        };
        sim.now += 1;
        match ev {
            Event::Input { node } => sim.give_input(node),
            Event::Deliver { from, to, msg, round, bits } => {
                if sim.nodes[to].finished() {
                    continue;
                }
                if let Some(log) = sim.log.as_mut() {
                    log.push(LogRecord { step: sim.now, from, to, tag: msg.tag().as_str().into(), bits, round });
                }
                let node = &mut sim.nodes[to];
                node.max_round = node.max_round.max(round);
                sim.deliver(to, |p| p.handle(from, msg.clone()));
            }
            Event::AbbaDecision { to, bit, round } => {
                if sim.nodes[to].finished() {
                    continue;
                }
                let node = &mut sim.nodes[to];
                node.max_round = node.max_round.max(round);
                sim.deliver(to, |p| p.abba_decided(bit));
            }
        }
    };

    let byzantine: Vec<NodeId> = byz_ids.iter().copied().collect();
    let honest: Vec<NodeId> = (0..cfg.n).filter(|i| !byz_ids.contains(i)).collect();
    let outputs: Vec<Option<Decision>> = sim
        .nodes
        .iter()
        .map(|n| if n.byz.is_some() { None } else { n.shadows[0].output().cloned() })
        .collect();
    let traces: Vec<Vec<TraceEvent>> = sim.nodes.iter_mut().map(|n| std::mem::take(&mut n.trace)).collect();

    let expected = expected_output(cfg, &inputs, &honest, &byz_ids);
    let checks = checks::check_run(&outputs, &honest, &traces, expected.as_deref());

    let mut metrics = sim.metrics;
    metrics.forced_deliveries = sim.sched.forced();
    for (i, node) in sim.nodes.iter().enumerate() {
        metrics.decode_attempts[i] = node.shadows[0].decode_attempts();
    }
    for &i in &honest {
        metrics.abba_inputs[i] = traces[i].iter().filter(|e| matches!(e, TraceEvent::AbbaInput { .. })).count();
    }
    if cfg.abba == AbbaKind::Coin {
        let bits: BTreeSet<bool> = honest
            .iter()
            .flat_map(|&i| &traces[i])
            .filter_map(|e| match e {
                TraceEvent::AbbaOutput { bit } => Some(*bit),
                _ => None,
            })
            .collect();
        metrics.abba_decisions = bits.len();
    }

    let any_output = honest.iter().any(|&i| outputs[i].is_some());
    let must_finish = match cfg.protocol {
        ProtocolKind::Acool | ProtocolKind::SmallT => true,
        ProtocolKind::Rba => expected.is_some(),
        ProtocolKind::Rbc => !byz_ids.contains(&cfg.leader),
    };
    let liveness_ok = outcome == Outcome::Terminated || (!must_finish && outcome == Outcome::Stalled && !any_output);

    Ok(RunReport {
        config: cfg.clone(),
        outcome,
        liveness_ok,
        steps: sim.now,
        byzantine,
        outputs,
        checks,
        metrics,
        traces: cfg.record_traces.then_some(traces),
        log: sim.log,
    })
}

/// The value every honest node must output, when validity applies: the
/// honest leader's input for RBC, otherwise the common honest input.
fn expected_output(
    cfg: &SimConfig,
    inputs: &[Option<Vec<u8>>],
    honest: &[NodeId],
    byz: &BTreeSet<NodeId>,
) -> Option<Vec<u8>> {
    if cfg.protocol == ProtocolKind::Rbc {
        return if byz.contains(&cfg.leader) { None } else { inputs[cfg.leader].clone() };
    }
    let first = inputs[*honest.first()?].clone()?;
    honest.iter().all(|&i| inputs[i].as_ref() == Some(&first)).then_some(first)
}

/// Runs `seeds` consecutive seeds starting at `cfg.seed`, in parallel; results
/// come back in seed order.
pub fn run_seeds(cfg: &SimConfig, seeds: u64) -> Result<Vec<RunReport>, SimError> {
    use rayon::prelude::*;
    (0..seeds)
        .into_par_iter()
        .map(|s| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(s);
            run(&c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fault_free_acool_terminates_with_input() {
        let cfg = SimConfig::new(ProtocolKind::Acool, 4, 1).with_seed(5);
        let r = run(&cfg).unwrap();
        assert_eq!(r.outcome, Outcome::Terminated);
        let (a, _) = cfg.value_pair();
        assert!(r.outputs.iter().all(|o| o == &Some(Decision::Value(a.clone()))));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn resilience_rejected() {
        let cfg = SimConfig::new(ProtocolKind::Acool, 3, 1);
        assert!(matches!(run(&cfg), Err(SimError::Ecc(EccError::ResilienceViolation { .. }))));
    }

    #[test]
    fn same_seed_same_report() {
        let cfg = SimConfig::new(ProtocolKind::Acool, 7, 2)
            .with_adversary(AdversaryKind::RandomByzantine)
            .with_inputs(InputSpec::Random)
            .with_seed(11);
        assert_eq!(run(&cfg).unwrap().to_json(), run(&cfg).unwrap().to_json());
    }
}
