//! Communication sweep over n at maximal resilience, then over message length.

use acool::sim::sweep::{len_slope, ratio_spread, Grid, SweepRow};
use acool::sim::{sweep, ProtocolKind, SimConfig};

fn main() {
    let base = SimConfig::new(ProtocolKind::Acool, 4, 1);
    let by_n = sweep(&base, &Grid::max_resilience(&[4, 7, 13], &[2048], 2)).unwrap();
    println!("{}", SweepRow::csv_header());
    by_n.iter().for_each(|r| println!("{}", r.csv_row()));
    println!("ratio spread across n: {:.2}", ratio_spread(&by_n));

    let by_len = sweep(&base, &Grid::max_resilience(&[13], &[256, 1024, 4096], 1)).unwrap();
    by_len.iter().for_each(|r| println!("{}", r.csv_row()));
    println!("bits per extra message bit at n=13: {:.1}", len_slope(&by_len));
}
