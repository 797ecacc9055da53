//! Chunked Reed-Solomon coding of byte messages and the online error
//! correction (OEC) accumulator.
//!
//! A message is framed (4-byte big-endian length, payload, zero fill), split
//! into `chunks` independent codewords of `k` data elements each, and every
//! node's symbol concatenates its evaluation in each chunk. Decoding treats a
//! node's whole symbol as one position: a node is either in agreement with the
//! decoded codeword in every chunk or it counts as one error.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{next_prime, PrimeField};
use crate::rs::{ReedSolomon, RsError};

/// Bytes used by the length prefix in the framed message.
pub const LENGTH_PREFIX_BYTES: usize = 4;

/// Field floor; keeps one byte per element for the usual `q = 257`.
pub const MIN_FIELD: u32 = 257;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EccError {
    #[error("ResilienceViolation: n = {n} < 3t + 1 = {}", 3 * t + 1)]
    ResilienceViolation { n: usize, t: usize },
    #[error("message length must be at least one bit")]
    EmptyLength,
    #[error("message of {len} bytes exceeds capacity of {capacity} bytes")]
    MessageTooLong { len: usize, capacity: usize },
    #[error("no codeword within the unique decoding radius")]
    DecodeFailure,
    #[error("share from node index {0} submitted twice")]
    DuplicateShare(u32),
    #[error("accumulator already decoded")]
    AlreadyDecoded,
    #[error("invalid code parameters")]
    InvalidParams,
}

/// Parameters shared by every encoder and decoder in one protocol instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub q: u32,
    pub chunks: usize,
}

/// `k = max(1, floor(t / 3))`.
pub fn data_symbols(t: usize) -> usize {
    (t / 3).max(1)
}

/// Derives the code for `n` nodes tolerating `t` faults and messages of up to
/// `msg_len_bits` bits. The field is the smallest prime at least
/// `max(n + 1, 257)`.
pub fn derive_params(n: usize, t: usize, msg_len_bits: usize) -> Result<CodeParams, EccError> {
    if n < 3 * t + 1 {
        return Err(EccError::ResilienceViolation { n, t });
    }
    if msg_len_bits == 0 {
        return Err(EccError::EmptyLength);
    }
    let q = next_prime((n as u32 + 1).max(MIN_FIELD));
    let k = data_symbols(t);
    let per_elem = PrimeField::new(q).expect("prime").payload_bits() as usize;
    let framed_bits = (msg_len_bits.div_ceil(8) + LENGTH_PREFIX_BYTES) * 8;
    let chunks = framed_bits.div_ceil(k * per_elem).max(1);
    Ok(CodeParams { n, t, k, q, chunks })
}

impl CodeParams {
    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.q).expect("field modulus is prime")
    }

    pub fn rs(&self) -> ReedSolomon {
        ReedSolomon::new(self.field(), self.n, self.k).expect("valid RS parameters")
    }

    /// Same code restricted to the first `n` nodes (used by committees).
    pub fn with_nodes(&self, n: usize) -> CodeParams {
        CodeParams { n, ..*self }
    }

    /// Bits one symbol occupies in the accounting: `chunks * ceil(log2 q)`.
    pub fn symbol_bits(&self) -> u64 {
        self.chunks as u64 * self.field().element_bits() as u64
    }

    /// Largest message (bytes) that fits after framing.
    pub fn capacity_bytes(&self) -> usize {
        let bits = self.k * self.chunks * self.field().payload_bits() as usize;
        (bits / 8).saturating_sub(LENGTH_PREFIX_BYTES)
    }

    /// Threshold at which OEC attempts its first decode.
    pub fn oec_threshold(&self) -> usize {
        self.k + self.t
    }

    /// The idealized symbol size `max(l / k, log2 q)` for an `l`-bit message.
    pub fn idealized_symbol_bits(&self, msg_len_bits: usize) -> f64 {
        let per = msg_len_bits as f64 / self.k as f64;
        per.max((self.q as f64).log2())
    }
}

/// One node's coded symbol: one field element per chunk.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol(pub Vec<u32>);

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() <= 4 {
            write!(f, "Symbol{:?}", self.0)
        } else {
            write!(f, "Symbol[{}, {}, .. {} elems]", self.0[0], self.0[1], self.0.len())
        }
    }
}

impl Symbol {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// A symbol is well formed for `params` if it has one in-field element per
    /// chunk.
    pub fn is_well_formed(&self, params: &CodeParams) -> bool {
        self.0.len() == params.chunks && self.0.iter().all(|&e| e < params.q)
    }
}

/// A symbol tagged with its 1-based evaluation index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolShare {
    pub index: u32,
    pub symbol: Symbol,
}

impl SymbolShare {
    /// Wire form: index as u16, then each element as u32, all big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + 4 * self.symbol.len());
        out.extend_from_slice(&(self.index as u16).to_be_bytes());
        for e in &self.symbol.0 {
            out.extend_from_slice(&e.to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<SymbolShare> {
        if bytes.len() < 2 || !(bytes.len() - 2).is_multiple_of(4) {
            return None;
        }
        let index = u16::from_be_bytes([bytes[0], bytes[1]]) as u32;
        let elems = bytes[2..]
            .chunks_exact(4)
            .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Some(SymbolShare { index, symbol: Symbol(elems) })
    }
}

/// Encoding and decoding of whole messages into per-node symbols.
///
/// Only Reed-Solomon ships; the trait marks the seam where a different code
/// could be used by the accumulators.
pub trait SymbolCodec {
    fn nodes(&self) -> usize;
    fn threshold(&self) -> usize;
    fn encode(&self, message: &[u8]) -> Result<Vec<Symbol>, EccError>;
    fn decode(&self, shares: &BTreeMap<u32, Symbol>) -> Result<Vec<u8>, EccError>;
}

impl SymbolCodec for CodeParams {
    fn nodes(&self) -> usize {
        self.n
    }

    fn threshold(&self) -> usize {
        self.oec_threshold()
    }

    fn encode(&self, message: &[u8]) -> Result<Vec<Symbol>, EccError> {
        ecc_encode(self, message).map(|shares| shares.into_iter().map(|s| s.symbol).collect())
    }

    fn decode(&self, shares: &BTreeMap<u32, Symbol>) -> Result<Vec<u8>, EccError> {
        ecc_decode(self, shares)
    }
}

fn frame(params: &CodeParams, message: &[u8]) -> Result<Vec<u32>, EccError> {
    let capacity = params.capacity_bytes();
    if message.len() > capacity {
        return Err(EccError::MessageTooLong { len: message.len(), capacity });
    }
    let mut bytes = Vec::with_capacity(LENGTH_PREFIX_BYTES + message.len());
    bytes.extend_from_slice(&(message.len() as u32).to_be_bytes());
    bytes.extend_from_slice(message);
    let per = params.field().payload_bits();
    let total = params.k * params.chunks;
    let mut elems = Vec::with_capacity(total);
    let mut acc: u64 = 0;
    let mut acc_bits = 0u32;
    let mut iter = bytes.into_iter();
    while elems.len() < total {
        while acc_bits < per {
            acc = (acc << 8) | iter.next().unwrap_or(0) as u64;
            acc_bits += 8;
        }
        let shift = acc_bits - per;
        elems.push((acc >> shift) as u32);
        acc &= (1u64 << shift) - 1;
        acc_bits = shift;
    }
    Ok(elems)
}

fn unframe(params: &CodeParams, elems: &[u32]) -> Result<Vec<u8>, EccError> {
    let per = params.field().payload_bits();
    let limit = 1u64 << per;
    let mut bytes = Vec::with_capacity(elems.len() * per as usize / 8 + 1);
    let mut acc: u64 = 0;
    let mut acc_bits = 0u32;
    for &e in elems {
        if e as u64 >= limit {
            return Err(EccError::DecodeFailure);
        }
        acc = (acc << per) | e as u64;
        acc_bits += per;
        while acc_bits >= 8 {
            let shift = acc_bits - 8;
            bytes.push((acc >> shift) as u8);
            acc &= (1u64 << shift) - 1;
            acc_bits = shift;
        }
    }
    if acc != 0 || bytes.len() < LENGTH_PREFIX_BYTES {
        return Err(EccError::DecodeFailure);
    }
    let len = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
    let body = &bytes[LENGTH_PREFIX_BYTES..];
    if len > body.len() || body[len..].iter().any(|&b| b != 0) {
        return Err(EccError::DecodeFailure);
    }
    Ok(body[..len].to_vec())
}

/// Encodes `message` into `n` shares; share `j` holds the evaluation at
/// `x = j` of every chunk polynomial.
pub fn ecc_encode(params: &CodeParams, message: &[u8]) -> Result<Vec<SymbolShare>, EccError> {
    let rs = ReedSolomon::new(params.field(), params.n, params.k).ok_or(EccError::InvalidParams)?;
    let elems = frame(params, message)?;
    let mut symbols = vec![Vec::with_capacity(params.chunks); params.n];
    for chunk in elems.chunks(params.k) {
        for (j, y) in rs.encode(chunk).into_iter().enumerate() {
            symbols[j].push(y);
        }
    }
    Ok(symbols
        .into_iter()
        .enumerate()
        .map(|(j, elems)| SymbolShare { index: j as u32 + 1, symbol: Symbol(elems) })
        .collect())
}

/// Decodes from a partial set of shares (keyed by 1-based index). Succeeds iff
/// some message's codeword disagrees with at most `floor((m - k) / 2)` of the
/// `m` supplied shares; malformed shares count as disagreeing.
pub fn ecc_decode(params: &CodeParams, shares: &BTreeMap<u32, Symbol>) -> Result<Vec<u8>, EccError> {
    let rs = ReedSolomon::new(params.field(), params.n, params.k).ok_or(EccError::InvalidParams)?;
    let usable: Vec<(u32, &Symbol)> = shares
        .iter()
        .filter(|(&idx, _)| idx >= 1 && idx as usize <= params.n)
        .map(|(&idx, s)| (idx, s))
        .collect();
    let m = usable.len();
    if m < params.k {
        return Err(EccError::DecodeFailure);
    }
    let radius = (m - params.k) / 2;
    let malformed: Vec<bool> = usable.iter().map(|(_, s)| !s.is_well_formed(params)).collect();
    let mut suspect = malformed.clone();
    let mut coeffs = Vec::with_capacity(params.k * params.chunks);
    for c in 0..params.chunks {
        // Malformed shares are left out of the chunk decode and charged as
        // errors against the shared radius below.
        let mut points = Vec::with_capacity(m);
        let mut hint = Vec::with_capacity(m);
        for (pos, (idx, s)) in usable.iter().enumerate() {
            if !malformed[pos] {
                points.push((*idx, s.0[c]));
                hint.push(suspect[pos]);
            }
        }
        let bad_inputs = m - points.len();
        if bad_inputs > radius || points.len() < params.k {
            return Err(EccError::DecodeFailure);
        }
        let p = rs.decode_with_hint(&points, &hint).map_err(|e| match e {
            RsError::NoCodeword | RsError::BadPoints => EccError::DecodeFailure,
        })?;
        let mut pi = 0;
        for (pos, (idx, s)) in usable.iter().enumerate() {
            if malformed[pos] {
                continue;
            }
            if rs.field().eval_poly(&p, *idx) != s.0[c] {
                suspect[pos] = true;
            }
            pi += 1;
        }
        debug_assert_eq!(pi, points.len());
        coeffs.extend_from_slice(&p);
    }
    if suspect.iter().filter(|&&b| b).count() > radius {
        return Err(EccError::DecodeFailure);
    }
    unframe(params, &coeffs)
}

/// Accumulates shares one at a time and decodes as soon as a candidate is
/// confirmed by `k + t` matching shares.
#[derive(Debug, Clone)]
pub struct OecAccumulator<C: SymbolCodec = CodeParams> {
    codec: C,
    shares: BTreeMap<u32, Symbol>,
    decoded: Option<Vec<u8>>,
    attempts: usize,
    require_non_empty: bool,
}

impl<C: SymbolCodec> OecAccumulator<C> {
    pub fn new(codec: C) -> Self {
        OecAccumulator {
            codec,
            shares: BTreeMap::new(),
            decoded: None,
            attempts: 0,
            require_non_empty: false,
        }
    }

    /// Reject decoded messages that are empty (the dispersal phase of RBC).
    pub fn require_non_empty(mut self) -> Self {
        self.require_non_empty = true;
        self
    }

    pub fn is_done(&self) -> bool {
        self.decoded.is_some()
    }

    pub fn decoded(&self) -> Option<&[u8]> {
        self.decoded.as_deref()
    }

    pub fn contains(&self, index: u32) -> bool {
        self.shares.contains_key(&index)
    }

    /// The share stored for `index`, if any.
    pub fn share(&self, index: u32) -> Option<&Symbol> {
        self.shares.get(&index)
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    /// Number of decode attempts made so far.
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    pub fn threshold(&self) -> usize {
        self.codec.threshold()
    }

    /// Stores `share`; returns the message the first time a decode is
    /// confirmed. Decode failures are silent (`Ok(None)`).
    pub fn submit(&mut self, share: SymbolShare) -> Result<Option<Vec<u8>>, EccError> {
        if self.decoded.is_some() {
            return Err(EccError::AlreadyDecoded);
        }
        if self.shares.contains_key(&share.index) {
            return Err(EccError::DuplicateShare(share.index));
        }
        self.shares.insert(share.index, share.symbol);
        if self.shares.len() < self.codec.threshold() {
            return Ok(None);
        }
        self.attempts += 1;
        let Ok(candidate) = self.codec.decode(&self.shares) else {
            return Ok(None);
        };
        if self.require_non_empty && candidate.is_empty() {
            return Ok(None);
        }
        let Ok(reencoded) = self.codec.encode(&candidate) else {
            return Ok(None);
        };
        let matches = self
            .shares
            .iter()
            .filter(|(&idx, sym)| {
                (idx as usize)
                    .checked_sub(1)
                    .and_then(|i| reencoded.get(i))
                    == Some(*sym)
            })
            .count();
        if matches < self.codec.threshold() {
            return Ok(None);
        }
        self.decoded = Some(candidate.clone());
        Ok(Some(candidate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_small_system() {
        let p = derive_params(4, 1, 8).unwrap();
        assert_eq!((p.k, p.q), (1, 257));
        // one payload byte plus the 4-byte length prefix at one byte per chunk
        assert_eq!(p.chunks, 5);
        assert_eq!(p.symbol_bits(), 45);
    }

    #[test]
    fn params_k_is_floor_of_t_over_three() {
        let p = derive_params(31, 10, 80).unwrap();
        assert_eq!((p.k, p.q), (3, 257));
        assert_eq!(derive_params(10, 3, 8).unwrap().k, 1);
        assert_eq!(derive_params(1, 0, 8).unwrap().k, 1);
    }

    #[test]
    fn params_reject_low_resilience() {
        assert_eq!(
            derive_params(3, 1, 8),
            Err(EccError::ResilienceViolation { n: 3, t: 1 })
        );
        assert_eq!(derive_params(4, 1, 0), Err(EccError::EmptyLength));
    }

    #[test]
    fn field_grows_with_n() {
        let p = derive_params(400, 100, 64).unwrap();
        assert_eq!(p.q, 401);
        assert_eq!(p.field().payload_bits(), 8);
    }

    #[test]
    fn k_one_gives_constant_shares() {
        let p = derive_params(4, 1, 32).unwrap();
        let shares = ecc_encode(&p, b"abcd").unwrap();
        assert_eq!(shares.len(), 4);
        assert!(shares.windows(2).all(|w| w[0].symbol == w[1].symbol));
        assert_eq!(shares[2].index, 3);
    }

    #[test]
    fn too_long_message() {
        let p = derive_params(4, 1, 8).unwrap();
        assert_eq!(p.capacity_bytes(), 1);
        assert!(matches!(
            ecc_encode(&p, b"ab"),
            Err(EccError::MessageTooLong { len: 2, capacity: 1 })
        ));
    }

    #[test]
    fn roundtrip_all_shares() {
        let p = derive_params(13, 4, 200).unwrap();
        let msg: Vec<u8> = (0..25).collect();
        let shares = ecc_encode(&p, &msg).unwrap();
        let map = shares.into_iter().map(|s| (s.index, s.symbol)).collect();
        assert_eq!(ecc_decode(&p, &map).unwrap(), msg);
    }

    #[test]
    fn empty_message_roundtrips() {
        let p = derive_params(7, 2, 64).unwrap();
        let shares = ecc_encode(&p, b"").unwrap();
        let map = shares.into_iter().map(|s| (s.index, s.symbol)).collect();
        assert_eq!(ecc_decode(&p, &map).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn non_byte_field_roundtrip() {
        // q = 1031 packs 10 bits per element
        let p = derive_params(1030, 343, 96).unwrap();
        assert_eq!(p.q, 1031);
        let msg = b"twelve bytes".to_vec();
        let shares = ecc_encode(&p, &msg).unwrap();
        let map: BTreeMap<u32, Symbol> =
            shares.into_iter().take(400).map(|s| (s.index, s.symbol)).collect();
        assert_eq!(ecc_decode(&p, &map).unwrap(), msg);
    }

    #[test]
    fn decode_at_k_plus_t_without_errors() {
        let p = derive_params(7, 2, 64).unwrap();
        let msg = b"payload!".to_vec();
        let shares = ecc_encode(&p, &msg).unwrap();
        let map: BTreeMap<u32, Symbol> = shares
            .into_iter()
            .skip(4)
            .map(|s| (s.index, s.symbol))
            .collect();
        assert_eq!(map.len(), p.k + p.t);
        assert_eq!(ecc_decode(&p, &map).unwrap(), msg);
    }

    #[test]
    fn corruption_beyond_radius_at_k_plus_t_fails() {
        // k + t = 3 shares, one corrupted: 2*1 + 1 = 3 <= 3 would be inside
        // the radius, so use k + t = 3 with two corruptions.
        let p = derive_params(7, 2, 64).unwrap();
        let shares = ecc_encode(&p, b"payload!").unwrap();
        let mut map: BTreeMap<u32, Symbol> =
            shares.into_iter().take(3).map(|s| (s.index, s.symbol)).collect();
        for idx in [1u32, 2] {
            let s = map.get_mut(&idx).unwrap();
            s.0[0] = (s.0[0] + 1) % p.q;
        }
        assert_eq!(ecc_decode(&p, &map), Err(EccError::DecodeFailure));
    }

    #[test]
    fn malformed_share_counts_as_error() {
        let p = derive_params(7, 2, 64).unwrap();
        let msg = b"payload!".to_vec();
        let shares = ecc_encode(&p, &msg).unwrap();
        let mut map: BTreeMap<u32, Symbol> =
            shares.into_iter().map(|s| (s.index, s.symbol)).collect();
        map.insert(3, Symbol(vec![1, 2]));
        assert_eq!(ecc_decode(&p, &map).unwrap(), msg);
    }

    #[test]
    fn share_wire_format() {
        let share = SymbolShare { index: 3, symbol: Symbol(vec![1, 256]) };
        let bytes = share.to_bytes();
        assert_eq!(bytes, vec![0, 3, 0, 0, 0, 1, 0, 0, 1, 0]);
        assert_eq!(SymbolShare::from_bytes(&bytes).unwrap(), share);
        assert!(SymbolShare::from_bytes(&[0, 1, 2]).is_none());
    }

    #[test]
    fn oec_waits_for_threshold() {
        let p = derive_params(7, 2, 64).unwrap();
        let shares = ecc_encode(&p, b"hello").unwrap();
        let mut acc = OecAccumulator::new(p);
        let mut it = shares.into_iter();
        for _ in 0..p.oec_threshold() - 1 {
            assert_eq!(acc.submit(it.next().unwrap()).unwrap(), None);
        }
        assert_eq!(acc.submit(it.next().unwrap()).unwrap(), Some(b"hello".to_vec()));
        assert!(acc.is_done());
        assert_eq!(acc.attempts(), 1);
        assert_eq!(acc.submit(it.next().unwrap()), Err(EccError::AlreadyDecoded));
    }

    #[test]
    fn oec_duplicate_share() {
        let p = derive_params(7, 2, 64).unwrap();
        let shares = ecc_encode(&p, b"hello").unwrap();
        let mut acc = OecAccumulator::new(p);
        acc.submit(shares[0].clone()).unwrap();
        assert_eq!(acc.submit(shares[0].clone()), Err(EccError::DuplicateShare(1)));
    }

    #[test]
    fn oec_rejects_empty_when_asked() {
        let p = derive_params(4, 1, 8).unwrap();
        let shares = ecc_encode(&p, b"").unwrap();
        let mut acc = OecAccumulator::new(p).require_non_empty();
        for s in shares {
            assert_eq!(acc.submit(s).unwrap(), None);
        }
        assert!(!acc.is_done());
    }
}
