//! Parameter sweeps over `(n, t)` and message length, averaged over seeds.

use serde::{Deserialize, Serialize};

use super::{run_seeds, SimConfig, SimError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub nt: Vec<(usize, usize)>,
    pub lens: Vec<usize>,
    pub seeds: u64,
}

impl Grid {
    /// `t = (n - 1) / 3` for every `n`.
    pub fn max_resilience(ns: &[usize], lens: &[usize], seeds: u64) -> Self {
        Grid { nt: ns.iter().map(|&n| (n, (n - 1) / 3)).collect(), lens: lens.to_vec(), seeds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub protocol: String,
    pub n: usize,
    pub t: usize,
    pub len: usize,
    pub seeds: u64,
    pub mean_bits: f64,
    pub max_bits: u64,
    pub mean_rounds: f64,
    pub max_rounds: u32,
    pub comparator_bits: f64,
    pub mean_ratio: f64,
    /// Runs that failed a safety or liveness check.
    pub failures: usize,
}

impl SweepRow {
    pub fn csv_header() -> &'static str {
        "protocol,n,t,len,seeds,mean_bits,max_bits,mean_rounds,max_rounds,comparator_bits,mean_ratio,failures"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.1},{},{:.2},{},{:.0},{:.4},{}",
            self.protocol,
            self.n,
            self.t,
            self.len,
            self.seeds,
            self.mean_bits,
            self.max_bits,
            self.mean_rounds,
            self.max_rounds,
            self.comparator_bits,
            self.mean_ratio,
            self.failures
        )
    }
}

/// Runs `base` at every grid point over `grid.seeds` seeds.
pub fn sweep(base: &SimConfig, grid: &Grid) -> Result<Vec<SweepRow>, SimError> {
    if grid.nt.is_empty() || grid.lens.is_empty() || grid.seeds == 0 {
        return Err(SimError::EmptyGrid);
    }
    let mut rows = Vec::new();
    for &(n, t) in &grid.nt {
        for &len in &grid.lens {
            let mut cfg = base.clone();
            cfg.n = n;
            cfg.t = t;
            cfg.msg_len_bits = len;
            let reports = run_seeds(&cfg, grid.seeds)?;
            let k = reports.len() as f64;
            let bits: Vec<u64> = reports.iter().map(|r| r.metrics.total_bits).collect();
            let rounds: Vec<u32> = reports.iter().map(|r| r.metrics.max_causal_round).collect();
            let comparator = reports[0].metrics.comparator_bits;
            let mean_bits = bits.iter().sum::<u64>() as f64 / k;
            rows.push(SweepRow {
                protocol: cfg.protocol.as_str().into(),
                n,
                t,
                len,
                seeds: grid.seeds,
                mean_bits,
                max_bits: bits.iter().copied().max().unwrap_or(0),
                mean_rounds: rounds.iter().map(|&r| r as f64).sum::<f64>() / k,
                max_rounds: rounds.iter().copied().max().unwrap_or(0),
                comparator_bits: comparator,
                mean_ratio: mean_bits / comparator,
                failures: reports.iter().filter(|r| !r.ok()).count(),
            });
        }
    }
    Ok(rows)
}

/// Largest over smallest mean ratio across rows.
pub fn ratio_spread(rows: &[SweepRow]) -> f64 {
    let max = rows.iter().map(|r| r.mean_ratio).fold(f64::MIN, f64::max);
    let min = rows.iter().map(|r| r.mean_ratio).fold(f64::MAX, f64::min);
    max / min
}

/// Least-squares slope of mean bits against message length.
pub fn len_slope(rows: &[SweepRow]) -> f64 {
    let k = rows.len() as f64;
    let mx = rows.iter().map(|r| r.len as f64).sum::<f64>() / k;
    let my = rows.iter().map(|r| r.mean_bits).sum::<f64>() / k;
    let sxy: f64 = rows.iter().map(|r| (r.len as f64 - mx) * (r.mean_bits - my)).sum();
    let sxx: f64 = rows.iter().map(|r| (r.len as f64 - mx).powi(2)).sum();
    sxy / sxx
}
