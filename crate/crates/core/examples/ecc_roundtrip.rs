//! Encode a message into n shares, corrupt t of them, and decode from the rest.

use std::collections::BTreeMap;

use acool::ecc::{derive_params, ecc_decode, ecc_encode, OecAccumulator, Symbol};

fn main() {
    let (n, t) = (13, 4);
    let message = b"the quick brown fox jumps over the lazy dog";
    let params = derive_params(n, t, message.len() * 8).expect("n >= 3t + 1");
    println!("n={n} t={t} k={} q={} chunks={}", params.k, params.q, params.chunks);

    let shares = ecc_encode(&params, message).unwrap();
    let mut received: BTreeMap<u32, Symbol> =
        shares.iter().map(|s| (s.index, s.symbol.clone())).collect();
    for idx in 1..=t as u32 {
        let sym = received.get_mut(&idx).unwrap();
        sym.0[0] = (sym.0[0] + 1) % params.q;
    }
    let decoded = ecc_decode(&params, &received).unwrap();
    assert_eq!(decoded, message);
    println!("decoded despite {t} corrupted shares: {}", String::from_utf8_lossy(&decoded));

    // Online error correction: feed shares one at a time, corrupted ones first.
    let mut oec = OecAccumulator::new(params);
    for share in shares.iter().rev() {
        let mut share = share.clone();
        if share.index as usize > n - t {
            share.symbol.0[0] = (share.symbol.0[0] + 7) % params.q;
        }
        if let Some(out) = oec.submit(share).unwrap() {
            println!(
                "OEC finished after {} shares ({} decode attempts, threshold {})",
                oec.len(),
                oec.attempts(),
                oec.threshold()
            );
            assert_eq!(out, message);
            break;
        }
    }
}
