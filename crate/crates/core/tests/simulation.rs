use acool::msg::Decision;
use acool::sim::sweep::{len_slope, Grid};
use acool::sim::{
    run, run_seeds, scenario_split_input, sweep, AdversaryKind, InputSpec, Outcome, ProtocolKind, SchedulerKind,
    SimConfig, SimError,
};

fn common_output(outputs: &[Option<Decision>], honest: &[usize]) -> Option<Decision> {
    let first = outputs[honest[0]].clone();
    assert!(honest.iter().all(|&i| outputs[i] == first), "honest outputs differ");
    first
}

#[test]
fn fault_free_n4_never_fails_liveness() {
    let cfg = SimConfig::new(ProtocolKind::Acool, 4, 1).with_len(64);
    let reports = run_seeds(&cfg, 1000).unwrap();
    for r in &reports {
        let expected = Decision::Value(r.config.value_pair().0);
        assert_eq!(r.outcome, Outcome::Terminated, "seed {}", r.config.seed);
        assert!(r.ok());
        assert_eq!(common_output(&r.outputs, &r.honest()), Some(expected.clone()));
    }
}

#[test]
fn split_scenario_terminates_and_legacy_stalls() {
    for (n, t) in [(4, 1), (7, 2), (10, 3)] {
        for seed in 0..10 {
            let cfg = scenario_split_input(n, t, None).unwrap().with_seed(seed);
            let r = run(&cfg).unwrap();
            assert_eq!(r.outcome, Outcome::Terminated, "n={n} seed={seed}");
            assert!(r.safety_ok());

            let mut legacy = cfg.clone();
            legacy.legacy_cool = true;
            let r = run(&legacy).unwrap();
            assert_ne!(r.outcome, Outcome::Terminated, "legacy n={n} seed={seed}");
            assert!(!r.liveness_ok);
            assert!(r.safety_ok());
        }
    }
}

#[test]
fn split_scenario_partitions() {
    let sizes = |n, t| {
        let cfg = scenario_split_input(n, t, None).unwrap();
        let Some(InputSpec::Explicit { values }) = Some(cfg.inputs.clone()) else { panic!() };
        let a = cfg.value_pair().0;
        let f = cfg.byzantine_set().len();
        let a1 = values.iter().filter(|v| **v == Decision::Value(a.clone())).count();
        (a1, n - a1 - f, f)
    };
    assert_eq!(sizes(4, 1), (2, 1, 1));
    assert_eq!(sizes(7, 2), (3, 2, 2));
    assert!(matches!(
        scenario_split_input(7, 2, Some([3, 2, 1])),
        Err(SimError::InvalidPartition { .. })
    ));
}

#[test]
fn ready_spammer_causes_no_divergence() {
    for (n, t) in [(4, 1), (7, 2)] {
        for inputs in [InputSpec::Same, InputSpec::Split { a: n / 2 }, InputSpec::Random] {
            let cfg = SimConfig::new(ProtocolKind::Acool, n, t)
                .with_adversary(AdversaryKind::ReadySpammer)
                .with_inputs(inputs)
                .with_len(64);
            for r in run_seeds(&cfg, 30).unwrap() {
                assert!(r.ok(), "{:?}", r.checks.violations);
            }
        }
    }
}

#[test]
fn every_strategy_and_scheduler_is_safe() {
    let (n, t) = (7, 2);
    for adv in AdversaryKind::STRATEGIES {
        for sch in SchedulerKind::ALL {
            let cfg = SimConfig::new(ProtocolKind::Acool, n, t)
                .with_adversary(adv)
                .with_scheduler(sch)
                .with_inputs(InputSpec::Random)
                .with_len(64);
            for r in run_seeds(&cfg, 5).unwrap() {
                assert!(r.ok(), "{} {} seed {}: {:?}", adv.as_str(), sch.as_str(), r.config.seed, r.checks.violations);
            }
        }
    }
}

#[test]
fn rbc_byzantine_leader_agreement_only() {
    let mut cfg = SimConfig::new(ProtocolKind::Rbc, 7, 2).with_adversary(AdversaryKind::EquivocateSymbols);
    cfg.leader = 6;
    for r in run_seeds(&cfg, 20).unwrap() {
        assert!(r.safety_ok(), "{:?}", r.checks.violations);
        assert!(r.liveness_ok);
        let honest = r.honest();
        let outs: Vec<_> = honest.iter().filter_map(|&i| r.outputs[i].clone()).collect();
        assert!(outs.is_empty() || outs.len() == honest.len());
    }
}

#[test]
fn small_t_outsiders_learn_the_value() {
    let cfg = SimConfig::new(ProtocolKind::SmallT, 10, 1).with_len(256);
    for r in run_seeds(&cfg, 10).unwrap() {
        let expected = Decision::Value(r.config.value_pair().0);
        assert_eq!(r.outcome, Outcome::Terminated);
        assert_eq!(r.outputs.iter().filter(|o| o.is_some()).count(), 10);
        assert_eq!(common_output(&r.outputs, &r.honest()), Some(expected.clone()));
    }
}

#[test]
fn small_t_bits_linear_in_n() {
    let bits: Vec<f64> = [10, 16, 22, 28]
        .iter()
        .map(|&n| {
            let reports = run_seeds(&SimConfig::new(ProtocolKind::SmallT, n, 1).with_len(4096), 8).unwrap();
            reports.iter().map(|r| r.metrics.total_bits as f64).sum::<f64>() / reports.len() as f64
        })
        .collect();
    let steps: Vec<f64> = bits.windows(2).map(|w| w[1] - w[0]).collect();
    for s in &steps {
        assert!((s / steps[0] - 1.0).abs() < 0.1, "increments {steps:?}");
    }
}

#[test]
fn small_t_beats_full_protocol_at_n31() {
    let len = 4096;
    let small = run(&SimConfig::new(ProtocolKind::SmallT, 31, 2).with_len(len)).unwrap();
    let full = run(&SimConfig::new(ProtocolKind::Acool, 31, 10).with_len(len)).unwrap();
    assert!(small.ok() && full.ok());
    assert!(small.metrics.total_bits < full.metrics.total_bits);
}

#[test]
fn bits_grow_linearly_in_length() {
    let base = SimConfig::new(ProtocolKind::Acool, 13, 4);
    let lens = [256, 1024, 4096, 16384, 65536];
    let rows = sweep(&base, &Grid::max_resilience(&[13], &lens, 1)).unwrap();
    // ratio to n * l flattens once n * l dominates
    let tail: Vec<f64> = rows[2..].iter().map(|r| r.mean_ratio).collect();
    for r in &tail {
        assert!((r / tail[tail.len() - 1] - 1.0).abs() < 0.02, "{tail:?}");
    }
    // marginal cost between the two largest lengths matches the fitted slope
    let marginal = (rows[4].mean_bits - rows[3].mean_bits) / (65536.0 - 16384.0);
    let slope = len_slope(&rows);
    assert!((marginal / slope - 1.0).abs() < 0.02, "marginal {marginal} slope {slope}");
    println!("slope {slope:.1} bits per message bit, {:.1} n", slope / 13.0);
}

#[test]
fn coin_abba_composition_is_safe() {
    let mut cfg = SimConfig::new(ProtocolKind::Acool, 7, 2)
        .with_adversary(AdversaryKind::RandomByzantine)
        .with_inputs(InputSpec::Split { a: 3 })
        .with_len(64);
    cfg.abba = acool::aba::AbbaKind::Coin;
    for r in run_seeds(&cfg, 20).unwrap() {
        assert!(r.ok(), "seed {}: {:?} {:?}", r.config.seed, r.outcome, r.checks.violations);
    }
}
