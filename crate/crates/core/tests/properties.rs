use std::collections::BTreeMap;

use acool::ecc::{derive_params, ecc_decode, ecc_encode, OecAccumulator, Symbol, SymbolShare};
use acool::sim::{run, AdversaryKind, InputSpec, ProtocolKind, SchedulerKind, SimConfig};
use proptest::prelude::*;

fn system() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=6).prop_flat_map(|t| (3 * t + 1..=3 * t + 4).prop_map(move |n| (n, t)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decode_corrects_up_to_radius(
        (n, t) in system(),
        msg in prop::collection::vec(any::<u8>(), 1..64),
        seed in any::<u64>(),
    ) {
        let params = derive_params(n, t, msg.len() * 8).unwrap();
        let shares = ecc_encode(&params, &msg).unwrap();
        let mut map: BTreeMap<u32, Symbol> = shares.iter().map(|s| (s.index, s.symbol.clone())).collect();
        let radius = (n - params.k) / 2;
        for i in 0..radius.min(t) {
            let idx = ((seed as usize + i * 7) % n) as u32 + 1;
            let sym = map.get_mut(&idx).unwrap();
            sym.0[0] = (sym.0[0] + 1) % params.q;
        }
        prop_assert_eq!(ecc_decode(&params, &map).unwrap(), msg);
    }

    #[test]
    fn oec_never_outputs_a_wrong_value(
        (n, t) in system(),
        msg in prop::collection::vec(any::<u8>(), 1..32),
        garbage_first in any::<bool>(),
        noise in any::<u32>(),
    ) {
        let params = derive_params(n, t, msg.len() * 8).unwrap();
        let shares = ecc_encode(&params, &msg).unwrap();
        let bad: Vec<SymbolShare> = shares[..t]
            .iter()
            .map(|s| SymbolShare {
                index: s.index,
                symbol: Symbol(s.symbol.0.iter().map(|&e| (e + 1 + noise % 5) % params.q).collect()),
            })
            .collect();
        let good = shares[t..].to_vec();
        let order: Vec<SymbolShare> = if garbage_first {
            bad.into_iter().chain(good).collect()
        } else {
            good.into_iter().chain(bad).collect()
        };
        let mut oec = OecAccumulator::new(params);
        let mut out = None;
        for s in order {
            if let Some(v) = oec.submit(s).unwrap() {
                out = Some(v);
                break;
            }
        }
        prop_assert_eq!(out, Some(msg));
    }

    #[test]
    fn random_configs_are_safe(
        (n, t) in (1usize..=2).prop_map(|t| (3 * t + 1, t)),
        adv in prop::sample::select(AdversaryKind::STRATEGIES.to_vec()),
        sch in prop::sample::select(SchedulerKind::ALL.to_vec()),
        seed in 0u64..10_000,
        random_inputs in any::<bool>(),
    ) {
        let inputs = if random_inputs { InputSpec::Random } else { InputSpec::Split { a: n / 2 } };
        let cfg = SimConfig::new(ProtocolKind::Acool, n, t)
            .with_adversary(adv)
            .with_scheduler(sch)
            .with_inputs(inputs)
            .with_len(32)
            .with_seed(seed);
        let r = run(&cfg).unwrap();
        prop_assert!(r.ok(), "{:?} {:?}", r.outcome, r.checks.violations);
        prop_assert_eq!(run(&cfg).unwrap(), r);
    }
}
