//! Batch front-end for the simulator.
//!
//! Exit codes: 0 success, 1 bad arguments, 2 property violation, 3 liveness
//! failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use acool::aba::AbbaKind;
use acool::acceptance::{run_all, AcceptOptions};
use acool::rba::RbcMode;
use acool::sim::scenario::default_partition;
use acool::sim::sweep::{len_slope, ratio_spread, Grid, SweepRow};
use acool::sim::{
    run, run_seeds, scenario_split_input, sweep, AdversaryKind, InputSpec, Metrics, ProtocolKind, RunReport,
    SchedulerKind, SimConfig, SimError, DEFAULT_EVENT_CAP,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "acool-sim", version, about = "Asynchronous agreement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration (or several seeds) and print the report.
    Run(RunArgs),
    /// Sweep (n, t) and message length; prints a CSV table.
    Sweep(SweepArgs),
    /// List the built-in scenarios.
    ScenarioList,
    /// Run the acceptance suite and print a pass/fail table.
    Accept {
        /// Reduced seed counts, same assertions.
        #[arg(long, env = "ACOOL_QUICK")]
        quick: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    SplitInput,
}

#[derive(Clone, Copy, ValueEnum)]
enum Inputs {
    Same,
    Split,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "acool", env = "ACOOL_PROTOCOL")]
    protocol: ProtocolKind,
    /// Message length in bits.
    #[arg(long, default_value_t = 256, env = "ACOOL_LEN")]
    len: usize,
    #[arg(long, value_enum, default_value = "none", env = "ACOOL_ADVERSARY")]
    adversary: AdversaryKind,
    #[arg(long, value_enum, default_value = "uniform", env = "ACOOL_SCHEDULER")]
    scheduler: SchedulerKind,
    #[arg(long, value_enum, default_value = "oracle", env = "ACOOL_ABBA")]
    abba: AbbaKind,
    /// Let the binary agreement output set v_out directly.
    #[arg(long, env = "ACOOL_SKIP_BRBA")]
    skip_brba: bool,
    /// Include binary agreement traffic in total bits.
    #[arg(long, env = "ACOOL_COUNT_ABBA_BITS")]
    count_abba_bits: bool,
    /// Include Byzantine senders in the bit counts.
    #[arg(long, env = "ACOOL_COUNT_BYZANTINE_BITS")]
    count_byzantine_bits: bool,
    /// First BUA feeds the binary agreement directly (no second BUA).
    #[arg(long, env = "ACOOL_LEGACY_COOL")]
    legacy_cool: bool,
    #[arg(long, value_enum, default_value = "balanced", env = "ACOOL_RBC_MODE")]
    rbc_mode: RbcMode,
    #[arg(long, default_value_t = 0, env = "ACOOL_LEADER")]
    leader: usize,
    #[arg(long, value_enum, default_value = "same", env = "ACOOL_INPUTS")]
    inputs: Inputs,
    /// Comma-separated Byzantine ids (default: last t participants).
    #[arg(long, value_delimiter = ',', env = "ACOOL_BYZANTINE")]
    byzantine: Option<Vec<usize>>,
    /// Comma-separated victim ids (default: first n-2t honest participants).
    #[arg(long, value_delimiter = ',', env = "ACOOL_VICTIMS")]
    victims: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_EVENT_CAP, env = "ACOOL_EVENT_CAP")]
    event_cap: u64,
    /// Fairness window in steps (default 8 n^2).
    #[arg(long, env = "ACOOL_WINDOW")]
    window: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 4, env = "ACOOL_N")]
    n: usize,
    #[arg(long, default_value_t = 1, env = "ACOOL_T")]
    t: usize,
    #[arg(long, default_value_t = 0, env = "ACOOL_SEED")]
    seed: u64,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1, env = "ACOOL_SEEDS")]
    seeds: u64,
    #[arg(long, value_enum, env = "ACOOL_SCENARIO")]
    scenario: Option<Scenario>,
    /// Group sizes a1,a2,f for the split-input scenario.
    #[arg(long, value_delimiter = ',', num_args = 3, env = "ACOOL_PARTITION")]
    partition: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "json", env = "ACOOL_FORMAT")]
    format: Format,
    /// Include per-node protocol traces in the report.
    #[arg(long, env = "ACOOL_TRACES")]
    traces: bool,
    /// Write the delivery log as newline-delimited JSON.
    #[arg(long, env = "ACOOL_LOG")]
    log: Option<PathBuf>,
    #[arg(long, env = "ACOOL_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',', default_value = "4,7,13,25,49", env = "ACOOL_NS")]
    ns: Vec<usize>,
    /// Fault bound for every n (default (n - 1) / 3).
    #[arg(long, env = "ACOOL_T")]
    t: Option<usize>,
    /// Comma-separated message lengths in bits.
    #[arg(long, value_delimiter = ',', default_value = "4096", env = "ACOOL_LENS")]
    lens: Vec<usize>,
    #[arg(long, default_value_t = 3, env = "ACOOL_SEEDS")]
    seeds: u64,
    #[arg(long, env = "ACOOL_OUT")]
    out: Option<PathBuf>,
}

impl Common {
    fn apply(&self, cfg: &mut SimConfig) {
        cfg.protocol = self.protocol;
        cfg.msg_len_bits = self.len;
        cfg.adversary = self.adversary;
        cfg.scheduler = self.scheduler;
        cfg.abba = self.abba;
        cfg.skip_brba = self.skip_brba;
        cfg.count_abba_bits = self.count_abba_bits;
        cfg.count_byzantine_bits = self.count_byzantine_bits;
        cfg.legacy_cool = self.legacy_cool;
        cfg.rbc_mode = self.rbc_mode;
        cfg.leader = self.leader;
        cfg.event_cap = self.event_cap;
        cfg.fairness_window = self.window;
        if self.byzantine.is_some() {
            cfg.byzantine = self.byzantine.clone();
        }
        if self.victims.is_some() {
            cfg.victims = self.victims.clone();
        }
    }

    fn inputs(&self, n: usize) -> InputSpec {
        match self.inputs {
            Inputs::Same => InputSpec::Same,
            Inputs::Split => InputSpec::Split { a: n / 2 },
            Inputs::Random => InputSpec::Random,
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_run_config(args: &RunArgs) -> Result<SimConfig, SimError> {
    let mut cfg = match args.scenario {
        Some(Scenario::SplitInput) => {
            let sizes = args.partition.as_ref().map(|p| [p[0], p[1], p[2]]);
            let mut cfg = scenario_split_input(args.n, args.t, sizes)?;
            // the scenario fixes inputs, Byzantine set and behaviour
            let (inputs, byz, victims, adv) =
                (cfg.inputs.clone(), cfg.byzantine.clone(), cfg.victims.clone(), cfg.adversary);
            args.common.apply(&mut cfg);
            cfg.inputs = inputs;
            cfg.byzantine = byz;
            cfg.victims = victims;
            cfg.adversary = adv;
            cfg
        }
        None => {
            let mut cfg = SimConfig::new(args.common.protocol, args.n, args.t);
            args.common.apply(&mut cfg);
            cfg.inputs = args.common.inputs(args.n);
            cfg
        }
    };
    cfg.seed = args.seed;
    cfg.record_traces = args.traces;
    cfg.record_log = args.log.is_some();
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> Result<u8, String> {
    let cfg = build_run_config(&args).map_err(|e| e.to_string())?;
    let reports: Vec<RunReport> = if args.seeds <= 1 {
        vec![run(&cfg).map_err(|e| e.to_string())?]
    } else {
        run_seeds(&cfg, args.seeds).map_err(|e| e.to_string())?
    };
    let text = match args.format {
        Format::Json if reports.len() == 1 => reports[0].to_json() + "\n",
        Format::Json => serde_json::to_string_pretty(&reports).map_err(|e| e.to_string())? + "\n",
        Format::Csv => {
            let mut s = format!("seed,outcome,safety_ok,liveness_ok,{}\n", Metrics::csv_header());
            for r in &reports {
                s.push_str(&format!(
                    "{},{:?},{},{},{}\n",
                    r.config.seed,
                    r.outcome,
                    r.safety_ok(),
                    r.liveness_ok,
                    r.metrics.csv_row()
                ));
            }
            s
        }
    };
    emit(&args.out, &text)?;
    if let Some(path) = &args.log {
        let log: String = reports.iter().map(RunReport::log_ndjson).collect();
        fs::write(path, log).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(reports.iter().map(|r| r.exit_code() as u8).max().unwrap_or(0))
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, String> {
    let mut base = SimConfig::new(args.common.protocol, 4, 1);
    args.common.apply(&mut base);
    base.inputs = args.common.inputs(4);
    if args.ns.contains(&0) {
        return Err("node counts must be positive".into());
    }
    let mut grid = Grid::max_resilience(&args.ns, &args.lens, args.seeds);
    if let Some(t) = args.t {
        grid.nt.iter_mut().for_each(|p| p.1 = t);
    }
    let rows = sweep(&base, &grid).map_err(|e| e.to_string())?;
    let mut text = format!("{}\n", SweepRow::csv_header());
    for r in &rows {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    emit(&args.out, &text)?;
    eprintln!("ratio spread (max/min): {:.3}", ratio_spread(&rows));
    if args.lens.len() > 1 && args.ns.len() == 1 {
        eprintln!("bits per message bit (slope): {:.3}", len_slope(&rows));
    }
    Ok(if rows.iter().any(|r| r.failures > 0) { 2 } else { 0 })
}

fn cmd_scenario_list() -> u8 {
    println!("split-input  two honest input groups A1, A2 and a Byzantine group F holding A2's input");
    println!("             that withholds every message from A1; default sizes [n-2t, t, t]");
    for (n, t) in [(4, 1), (7, 2), (10, 3)] {
        let [a1, a2, f] = default_partition(n, t);
        println!("             n={n} t={t}: |A1|={a1} |A2|={a2} |F|={f}");
    }
    println!("             add --legacy-cool to run the same scenario without the second BUA");
    0
}

fn cmd_accept(quick: bool) -> u8 {
    let results = run_all(AcceptOptions { quick });
    for c in &results {
        println!("{c}");
    }
    let failed = results.iter().filter(|c| !c.pass).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        0
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ScenarioList => Ok(cmd_scenario_list()),
        Command::Accept { quick } => Ok(cmd_accept(quick)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
