//! Delivery order policies. Every policy forces out the oldest pending event
//! once it has waited longer than the fairness window.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SchedulerKind {
    /// Pick a pending event uniformly at random.
    #[default]
    Uniform,
    /// Prefer the most recently sent event.
    LifoBiased,
    /// Deliver everything else before honest messages to the victim set.
    Adversarial,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 3] =
        [SchedulerKind::Uniform, SchedulerKind::LifoBiased, SchedulerKind::Adversarial];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchedulerKind::Uniform => "uniform",
            SchedulerKind::LifoBiased => "lifo_biased",
            SchedulerKind::Adversarial => "adversarial",
        }
    }
}

const LIFO_BIAS: f64 = 0.75;

/// Unordered pool with O(1) random removal and ordered access by sequence.
#[derive(Debug)]
struct Pool<E> {
    items: Vec<(u64, u64, E)>,
    /// seq -> position in `items`
    index: BTreeMap<u64, usize>,
}

impl<E> Pool<E> {
    fn new() -> Self {
        Pool { items: Vec::new(), index: BTreeMap::new() }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn push(&mut self, seq: u64, step: u64, e: E) {
        self.index.insert(seq, self.items.len());
        self.items.push((seq, step, e));
    }

    fn oldest(&self) -> Option<(u64, u64)> {
        let (&seq, &i) = self.index.first_key_value()?;
        Some((seq, self.items[i].1))
    }

    fn newest_pos(&self) -> Option<usize> {
        self.index.last_key_value().map(|(_, &i)| i)
    }

    fn pos_of(&self, seq: u64) -> usize {
        self.index[&seq]
    }

    fn take(&mut self, pos: usize) -> E {
        let (seq, _, e) = self.items.swap_remove(pos);
        self.index.remove(&seq);
        if let Some(moved) = self.items.get(pos) {
            self.index.insert(moved.0, pos);
        }
        e
    }
}

/// Pending events plus the policy that picks the next one.
#[derive(Debug)]
pub struct Scheduler<E> {
    kind: SchedulerKind,
    window: u64,
    next_seq: u64,
    fast: Pool<E>,
    slow: Pool<E>,
    forced: u64,
}

impl<E> Scheduler<E> {
    pub fn new(kind: SchedulerKind, window: u64) -> Self {
        Scheduler { kind, window, next_seq: 0, fast: Pool::new(), slow: Pool::new(), forced: 0 }
    }

    pub fn len(&self) -> usize {
        self.fast.len() + self.slow.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of deliveries forced by the fairness window.
    pub fn forced(&self) -> u64 {
        self.forced
    }

    /// Queues an event at logical time `now`. `delayed` marks events the
    /// adversarial policy holds back.
    pub fn push(&mut self, now: u64, delayed: bool, e: E) {
        let seq = self.next_seq;
        self.next_seq += 1;
        if delayed && self.kind == SchedulerKind::Adversarial {
            self.slow.push(seq, now, e);
        } else {
            self.fast.push(seq, now, e);
        }
    }

    pub fn pop(&mut self, now: u64, rng: &mut ChaCha8Rng) -> Option<E> {
        let oldest = match (self.fast.oldest(), self.slow.oldest()) {
            (Some(a), Some(b)) => Some(if a.0 < b.0 { (a, false) } else { (b, true) }),
            (Some(a), None) => Some((a, false)),
            (None, Some(b)) => Some((b, true)),
            (None, None) => return None,
        };
        if let Some(((seq, at), slow)) = oldest {
            if now.saturating_sub(at) > self.window {
                self.forced += 1;
                let pool = if slow { &mut self.slow } else { &mut self.fast };
                let pos = pool.pos_of(seq);
                return Some(pool.take(pos));
            }
        }
        let pool = if self.fast.len() > 0 { &mut self.fast } else { &mut self.slow };
        let pos = match self.kind {
            SchedulerKind::LifoBiased if rng.gen_bool(LIFO_BIAS) => pool.newest_pos()?,
            _ => rng.gen_range(0..pool.len()),
        };
        Some(pool.take(pos))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn drains_everything() {
        for kind in SchedulerKind::ALL {
            let mut s = Scheduler::new(kind, 1000);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for i in 0..50u32 {
                s.push(0, i % 3 == 0, i);
            }
            let mut got: Vec<u32> = std::iter::from_fn(|| s.pop(1, &mut rng)).collect();
            got.sort();
            assert_eq!(got, (0..50).collect::<Vec<_>>());
        }
    }

    #[test]
    fn window_forces_oldest() {
        let mut s = Scheduler::new(SchedulerKind::Adversarial, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        s.push(0, true, "held");
        for now in 1..=4 {
            s.push(now, false, "noise");
            assert_eq!(s.pop(now, &mut rng), Some("noise"));
        }
        s.push(5, false, "noise");
        assert_eq!(s.pop(5, &mut rng), Some("held"));
        assert_eq!(s.forced(), 1);
    }

    #[test]
    fn adversarial_prefers_fast() {
        let mut s = Scheduler::new(SchedulerKind::Adversarial, 100);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        s.push(0, true, 1);
        s.push(0, false, 2);
        s.push(0, false, 3);
        let order: Vec<_> = std::iter::from_fn(|| s.pop(0, &mut rng)).collect();
        assert_eq!(order[2], 1);
    }
}
