//! The acceptance suite: nine criteria, each reduced to a pass/fail line.
//!
//! Shared by the `accept` subcommand and the `acceptance` integration test.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ecc::{derive_params, ecc_encode, OecAccumulator, Symbol, SymbolShare};
use crate::rba::RbcMode;
use crate::sim::sweep::{ratio_spread, Grid};
use crate::sim::{
    run, run_seeds, scenario_split_input, sweep, AdversaryKind, InputSpec, Outcome, ProtocolKind, RunReport,
    SchedulerKind, SimConfig,
};

pub const SAFETY_GRID: [(usize, usize); 3] = [(4, 1), (7, 2), (10, 3)];
pub const SCALING_NS: [usize; 5] = [4, 7, 13, 25, 49];
pub const SCALING_LEN: usize = 4096;
pub const SCALING_BAND: f64 = 3.0;
/// Message length of the safety grids; large enough for several chunks.
pub const GRID_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcceptOptions {
    pub quick: bool,
}

impl AcceptOptions {
    fn grid_seeds(&self) -> u64 {
        if self.quick {
            20
        } else {
            200
        }
    }

    fn scaled(&self, full: u64, quick: u64) -> u64 {
        if self.quick {
            quick
        } else {
            full
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {}. {}: {}", self.id, self.name, self.detail)
    }
}

fn input_mix(seed: u64, n: usize) -> InputSpec {
    match seed % 3 {
        0 => InputSpec::Same,
        1 => InputSpec::Split { a: n / 2 },
        _ => InputSpec::Random,
    }
}

/// Every strategy x scheduler x seed at one `(n, t)`, with `inputs` chosen per
/// seed.
pub fn adversary_grid(
    base: &SimConfig,
    seeds: u64,
    inputs: impl Fn(u64) -> InputSpec + Sync,
) -> Vec<RunReport> {
    use rayon::prelude::*;
    let mut cells = Vec::new();
    for adv in AdversaryKind::STRATEGIES {
        for sch in SchedulerKind::ALL {
            for seed in 0..seeds {
                cells.push((adv, sch, seed));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(adv, sch, seed)| {
            let cfg = base.clone().with_adversary(adv).with_scheduler(sch).with_seed(seed).with_inputs(inputs(seed));
            run(&cfg).expect("grid configuration is valid")
        })
        .collect()
}

/// Runs of the two safety grids, kept for criteria 1 to 4.
pub struct GridRuns {
    pub mixed: Vec<RunReport>,
    pub same: Vec<RunReport>,
}

pub fn grid_runs(opts: AcceptOptions) -> GridRuns {
    let seeds = opts.grid_seeds();
    let mut mixed = Vec::new();
    let mut same = Vec::new();
    for (n, t) in SAFETY_GRID {
        let base = SimConfig::new(ProtocolKind::Acool, n, t).with_len(GRID_LEN);
        mixed.extend(adversary_grid(&base, seeds, |s| input_mix(s, n)));
        same.extend(adversary_grid(&base, seeds, |_| InputSpec::Same));
    }
    GridRuns { mixed, same }
}

fn describe(r: &RunReport) -> String {
    let c = &r.config;
    format!(
        "{} n={} t={} adversary={} scheduler={} seed={} outcome={:?} {:?}",
        c.protocol.as_str(),
        c.n,
        c.t,
        c.adversary.as_str(),
        c.scheduler.as_str(),
        c.seed,
        r.outcome,
        r.checks.violations
    )
}

fn first_failure<'a>(runs: impl IntoIterator<Item = &'a RunReport>, ok: impl Fn(&RunReport) -> bool) -> Option<String> {
    runs.into_iter().find(|r| !ok(r)).map(describe)
}

pub fn criterion_1(g: &GridRuns) -> Criterion {
    let bad = g.mixed.iter().filter(|r| !r.checks.consistency).count();
    Criterion {
        id: 1,
        name: "safety sweep",
        pass: bad == 0,
        detail: match first_failure(&g.mixed, |r| r.checks.consistency) {
            None => format!("consistency held in {}/{} runs", g.mixed.len(), g.mixed.len()),
            Some(f) => format!("{bad} inconsistent runs, first: {f}"),
        },
    }
}

pub fn criterion_2(g: &GridRuns) -> Criterion {
    let ok = |r: &RunReport| r.checks.validity == Some(true) && r.outcome == Outcome::Terminated;
    let bad = g.same.iter().filter(|r| !ok(r)).count();
    Criterion {
        id: 2,
        name: "validity",
        pass: bad == 0,
        detail: match first_failure(&g.same, ok) {
            None => format!("every honest node output the common input in {} runs", g.same.len()),
            Some(f) => format!("{bad} runs failed, first: {f}"),
        },
    }
}

pub fn criterion_3(g: &GridRuns, opts: AcceptOptions) -> Criterion {
    let all = g.mixed.iter().chain(&g.same);
    let stuck = all.clone().filter(|r| !r.liveness_ok).count();
    let seeds = opts.scaled(50, 10);
    let mut scenario_ok = 0;
    let mut scenario_total = 0;
    let mut legacy_stuck = 0;
    let mut legacy_total = 0;
    let mut first = first_failure(all, |r| r.liveness_ok);
    for (n, t) in SAFETY_GRID {
        let base = scenario_split_input(n, t, None).expect("default partition is valid");
        for sch in SchedulerKind::ALL {
            for seed in 0..seeds {
                let cfg = base.clone().with_scheduler(sch).with_seed(seed);
                let r = run(&cfg).expect("scenario is valid");
                scenario_total += 1;
                if r.ok() {
                    scenario_ok += 1;
                } else if first.is_none() {
                    first = Some(describe(&r));
                }
                let mut legacy = cfg;
                legacy.legacy_cool = true;
                let r = run(&legacy).expect("scenario is valid");
                legacy_total += 1;
                if !r.liveness_ok {
                    legacy_stuck += 1;
                }
            }
        }
    }
    let pass = stuck == 0 && scenario_ok == scenario_total && legacy_stuck >= 1;
    let mut detail = format!(
        "grid runs without liveness failure {}/{}; split-input scenario terminated {scenario_ok}/{scenario_total}; \
         legacy wiring failed to terminate on {legacy_stuck}/{legacy_total}",
        g.mixed.len() + g.same.len() - stuck,
        g.mixed.len() + g.same.len()
    );
    if let Some(f) = first.filter(|_| !pass) {
        detail.push_str(&format!("; first failure: {f}"));
    }
    Criterion { id: 3, name: "termination", pass, detail }
}

pub fn criterion_4(g: &GridRuns) -> Criterion {
    let all = || g.mixed.iter().chain(&g.same);
    let ok = |r: &RunReport| r.checks.unique_agreement && r.checks.s1_values;
    let bad = all().filter(|r| !ok(r)).count();
    let total = all().count();
    Criterion {
        id: 4,
        name: "unique agreement",
        pass: bad == 0,
        detail: match first_failure(all(), ok) {
            None => format!("at most one s2=1 value per BUA and at most two s1=1 inputs in {total}/{total} runs"),
            Some(f) => format!("{bad} runs failed, first: {f}"),
        },
    }
}

pub fn criterion_5(opts: AcceptOptions) -> Criterion {
    let base = SimConfig::new(ProtocolKind::Acool, 4, 1);
    let grid = Grid::max_resilience(&SCALING_NS, &[SCALING_LEN], opts.scaled(3, 1));
    let rows = sweep(&base, &grid).expect("grid is non-empty");
    let spread = ratio_spread(&rows);

    // the binary agreement is instantiated once per run and every honest node
    // feeds it exactly once
    let mut abba_ok = true;
    for &n in &SCALING_NS {
        let cfg = SimConfig::new(ProtocolKind::Acool, n, (n - 1) / 3).with_len(SCALING_LEN);
        for r in run_seeds(&cfg, opts.scaled(3, 1)).expect("valid config") {
            let honest = r.honest();
            abba_ok &= r.metrics.abba_decisions == 1 && honest.iter().all(|&i| r.metrics.abba_inputs[i] == 1);
        }
    }
    let ratios: Vec<String> = rows.iter().map(|r| format!("n={}:{:.2}", r.n, r.mean_ratio)).collect();
    let rounds: Vec<String> = rows.iter().map(|r| format!("n={}:{:.1}", r.n, r.mean_rounds)).collect();
    let failures: usize = rows.iter().map(|r| r.failures).sum();
    Criterion {
        id: 5,
        name: "communication scaling",
        pass: spread <= SCALING_BAND && abba_ok && failures == 0,
        detail: format!(
            "bits / max(n l, n t log q) = [{}], max/min = {spread:.2} (band {SCALING_BAND}); \
             single binary agreement per run: {abba_ok}; causal depth [{}]",
            ratios.join(", "),
            rounds.join(", ")
        ),
    }
}

/// Independent decoders used as test oracles.
pub mod oracle {
    use crate::field::PrimeField;

    /// Every polynomial of degree `< k` over `GF(q)`, as coefficient vectors.
    pub fn all_polys(q: u32, k: usize) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for _ in 0..k {
            out = out.into_iter().flat_map(|p| (0..q).map(move |c| [p.clone(), vec![c]].concat())).collect();
        }
        out
    }

    pub fn evaluate(f: PrimeField, coeffs: &[u32], n: usize) -> Vec<u32> {
        (1..=n as u32)
            .map(|x| coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c)))
            .collect()
    }

    /// All polynomials whose evaluations at `1..=n` lie within Hamming
    /// distance `radius` of `word`.
    pub fn brute_force_decode(q: u32, k: usize, word: &[u32], radius: usize) -> Vec<Vec<u32>> {
        let f = PrimeField::new(q).expect("prime");
        all_polys(q, k)
            .into_iter()
            .filter(|p| {
                let cw = evaluate(f, p, word.len());
                cw.iter().zip(word).filter(|(a, b)| a != b).count() <= radius
            })
            .collect()
    }

    /// Every way to corrupt at most `max_errors` positions of a length-`n`
    /// word over `GF(q)`, as `(position, non-zero offset)` lists.
    pub fn error_patterns(q: u32, n: usize, max_errors: usize) -> Vec<Vec<(usize, u32)>> {
        let mut out = vec![vec![]];
        let mut frontier: Vec<Vec<(usize, u32)>> = vec![vec![]];
        for _ in 0..max_errors {
            let mut next = Vec::new();
            for pat in &frontier {
                let start = pat.last().map_or(0, |&(p, _)| p + 1);
                for pos in start..n {
                    for e in 1..q {
                        let mut p = pat.clone();
                        p.push((pos, e));
                        next.push(p);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

/// Outcome of the exhaustive GF(7) comparison: `(agreements, cases)`.
pub fn gf7_exhaustive() -> (usize, usize) {
    use crate::field::PrimeField;
    use crate::rs::ReedSolomon;
    let (q, n, k) = (7u32, 6usize, 2usize);
    let f = PrimeField::new(q).expect("prime");
    let rs = ReedSolomon::new(f, n, k).expect("valid code");
    let radius = (n - k) / 2;
    let patterns = oracle::error_patterns(q, n, radius);
    let mut agree = 0;
    let mut total = 0;
    for poly in oracle::all_polys(q, k) {
        let cw = oracle::evaluate(f, &poly, n);
        for pat in &patterns {
            let mut word = cw.clone();
            for &(pos, e) in pat {
                word[pos] = (word[pos] + e) % q;
            }
            let points: Vec<(u32, u32)> = word.iter().enumerate().map(|(i, &y)| (i as u32 + 1, y)).collect();
            let ours = rs.decode(&points).ok();
            let brute = oracle::brute_force_decode(q, k, &word, radius);
            total += 1;
            if brute.len() == 1 && ours.as_ref() == Some(&brute[0]) {
                agree += 1;
            }
        }
    }
    (agree, total)
}

/// Randomized online decoding at `(n, t) = (7, 2)`: up to `t` corrupted shares
/// in random arrival order. Returns `(successes, schedules, max attempts)`.
pub fn oec_schedules(schedules: usize, seed: u64) -> (usize, usize, usize) {
    let params = derive_params(7, 2, 64).expect("valid parameters");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = 0;
    let mut max_attempts = 0;
    for _ in 0..schedules {
        let msg: Vec<u8> = (0..rng.gen_range(1..=8)).map(|_| rng.gen()).collect();
        let mut shares = ecc_encode(&params, &msg).expect("fits");
        let bad = rng.gen_range(0..=params.t);
        for _ in 0..bad {
            let i = rng.gen_range(0..shares.len());
            let len = shares[i].symbol.len();
            shares[i].symbol = Symbol((0..len).map(|_| rng.gen_range(0..params.q)).collect());
        }
        for i in (1..shares.len()).rev() {
            shares.swap(i, rng.gen_range(0..=i));
        }
        let mut acc = OecAccumulator::new(params);
        let mut got = None;
        for SymbolShare { index, symbol } in shares {
            if let Ok(Some(w)) = acc.submit(SymbolShare { index, symbol }) {
                got = Some(w);
                break;
            }
        }
        max_attempts = max_attempts.max(acc.attempts());
        if got.as_deref() == Some(&msg[..]) && acc.attempts() <= params.t + 1 {
            ok += 1;
        }
    }
    (ok, schedules, max_attempts)
}

pub fn criterion_6(opts: AcceptOptions) -> Criterion {
    let (agree, cases) = gf7_exhaustive();
    let schedules = opts.scaled(10_000, 1_000) as usize;
    let (ok, total, max_attempts) = oec_schedules(schedules, 6);
    Criterion {
        id: 6,
        name: "ECC/OEC oracle",
        pass: agree == cases && ok == total,
        detail: format!(
            "GF(7) n=6 k=2 decoder matches brute force on {agree}/{cases} words; \
             OEC decoded within t+1 attempts in {ok}/{total} schedules (max {max_attempts})"
        ),
    }
}

pub fn criterion_7(opts: AcceptOptions) -> Criterion {
    let seeds = opts.scaled(100, 10);
    let (n, t) = (7, 2);
    let mut runs = adversary_grid(&SimConfig::new(ProtocolKind::Rba, n, t).with_len(GRID_LEN), seeds, |s| {
        input_mix(s, n)
    });
    let mut rbc = SimConfig::new(ProtocolKind::Rbc, n, t).with_len(GRID_LEN);
    runs.extend(adversary_grid(&rbc, seeds, |_| InputSpec::Random));
    rbc.leader = n - 1;
    let byz_leader = adversary_grid(&rbc, seeds, |_| InputSpec::Random);
    let byz_leader_outputs = byz_leader.iter().filter(|r| r.outputs.iter().any(Option::is_some)).count();
    runs.extend(byz_leader);
    let bad = runs.iter().filter(|r| !r.ok()).count();

    let mut egress = SimConfig::new(ProtocolKind::Rbc, n, t).with_len(SCALING_LEN);
    let params = egress.params().expect("valid parameters");
    let balanced = run(&egress).expect("valid config").metrics.leader_egress_bits;
    egress.rbc_mode = RbcMode::Unbalanced;
    let unbalanced = run(&egress).expect("valid config").metrics.leader_egress_bits;
    let bound = 1.5 * (SCALING_LEN as f64 + (n as u64 * params.symbol_bits()) as f64);
    let floor = (n * SCALING_LEN) as u64;
    let egress_ok = (balanced as f64) <= bound && unbalanced >= floor;

    let mut detail = format!(
        "RBA/RBC properties held in {}/{} runs ({byz_leader_outputs} Byzantine-leader runs with output); \
         balanced leader egress {balanced} <= {bound:.0}: {}; unbalanced {unbalanced} >= {floor}: {}",
        runs.len() - bad,
        runs.len(),
        balanced as f64 <= bound,
        unbalanced >= floor
    );
    if let Some(f) = first_failure(&runs, RunReport::ok) {
        detail.push_str(&format!("; first failure: {f}"));
    }
    Criterion { id: 7, name: "RBA/RBC", pass: bad == 0 && egress_ok, detail }
}

pub fn criterion_8(opts: AcceptOptions) -> Criterion {
    let seeds = opts.scaled(20, 3);
    let base = SimConfig::new(ProtocolKind::SmallT, 31, 2).with_len(GRID_LEN);
    let mut runs = adversary_grid(&base, seeds, |s| input_mix(s, 31));
    runs.extend(adversary_grid(&base, seeds, |_| InputSpec::Same));
    let bad = runs.iter().filter(|r| !r.ok()).count();
    let small = run(&SimConfig::new(ProtocolKind::SmallT, 31, 2).with_len(SCALING_LEN)).expect("valid");
    let full = run(&SimConfig::new(ProtocolKind::Acool, 31, 10).with_len(SCALING_LEN)).expect("valid");
    let (a, b) = (small.metrics.total_bits, full.metrics.total_bits);
    let mut detail = format!(
        "n=31 t=2 runs passing consistency/validity/termination {}/{}; bits {a} (t=2 committee) vs {b} (full, t=10)",
        runs.len() - bad,
        runs.len()
    );
    if let Some(f) = first_failure(&runs, RunReport::ok) {
        detail.push_str(&format!("; first failure: {f}"));
    }
    Criterion { id: 8, name: "small t", pass: bad == 0 && a < b, detail }
}

fn replay_identical(cfg: &SimConfig) -> bool {
    let mut cfg = cfg.clone();
    cfg.record_log = true;
    cfg.record_traces = true;
    let a = run(&cfg).expect("valid");
    let b = run(&cfg).expect("valid");
    a.to_json() == b.to_json() && a.log_ndjson() == b.log_ndjson()
}

pub fn criterion_9(opts: AcceptOptions) -> Criterion {
    let mut configs = Vec::new();
    for adv in AdversaryKind::STRATEGIES {
        for sch in SchedulerKind::ALL {
            configs.push(
                SimConfig::new(ProtocolKind::Acool, 7, 2)
                    .with_adversary(adv)
                    .with_scheduler(sch)
                    .with_inputs(InputSpec::Random)
                    .with_seed(opts.scaled(1000, 10)),
            );
        }
    }
    // a run that fails liveness on purpose
    let mut stuck = scenario_split_input(7, 2, None).expect("valid");
    stuck.legacy_cool = true;
    configs.push(stuck);
    let failing = configs.iter().filter(|c| !run(c).expect("valid").ok()).count();
    let identical = configs.iter().filter(|c| replay_identical(c)).count();
    Criterion {
        id: 9,
        name: "determinism",
        pass: identical == configs.len() && failing >= 1,
        detail: format!(
            "{identical}/{} configurations replayed byte-identically (report and event log), \
             including {failing} failing run(s)",
            configs.len()
        ),
    }
}

/// Runs every criterion in order.
pub fn run_all(opts: AcceptOptions) -> Vec<Criterion> {
    let g = grid_runs(opts);
    vec![
        criterion_1(&g),
        criterion_2(&g),
        criterion_3(&g, opts),
        criterion_4(&g),
        criterion_5(opts),
        criterion_6(opts),
        criterion_7(opts),
        criterion_8(opts),
        criterion_9(opts),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_pattern_count() {
        // 1 + 6*6 + 15*36
        assert_eq!(oracle::error_patterns(7, 6, 2).len(), 577);
        assert_eq!(oracle::all_polys(7, 2).len(), 49);
    }

    #[test]
    fn brute_force_finds_codeword() {
        let f = crate::field::PrimeField::new(7).unwrap();
        let cw = oracle::evaluate(f, &[3, 5], 6);
        assert_eq!(cw, vec![1, 6, 4, 2, 0, 5]);
        assert_eq!(oracle::brute_force_decode(7, 2, &cw, 2), vec![vec![3, 5]]);
    }
}
