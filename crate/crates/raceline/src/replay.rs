//! Experience storage and the three training-data regimes: recent-episode
//! only, full experience replay, and the hybrid schedule that spends half
//! its epochs on each.

use std::collections::VecDeque;

use rand::Rng;

use crate::returns::{EpisodeTrace, Transition};
use crate::scalar::Scalar;

/// Which experiences feed the optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Only the most recent episode.
    Recent,
    /// Only the replay buffer (which includes the most recent episode).
    Memory,
    /// Replay buffer first, then the recent episode, half the epochs each.
    Both,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Recent, Regime::Memory, Regime::Both];

    pub fn name(self) -> &'static str {
        match self {
            Regime::Recent => "recent",
            Regime::Memory => "memory",
            Regime::Both => "both",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Regime::ALL.into_iter().find(|r| r.name() == name)
    }
}

/// One entry of an epoch schedule: where minibatches come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    Buffer,
    Recent,
}

/// Split `total_epochs` across data sources according to the regime.
///
/// `Both` trains on the buffer for ⌈total/2⌉ epochs and then on the recent
/// episode for ⌊total/2⌋, so the transition count fed to the optimizer
/// matches the single-source regimes; a zero half is dropped.
pub fn epoch_schedule(regime: Regime, total_epochs: usize) -> Vec<(SourceKind, usize)> {
    assert!(total_epochs >= 1, "need at least one epoch");
    match regime {
        Regime::Recent => vec![(SourceKind::Recent, total_epochs)],
        Regime::Memory => vec![(SourceKind::Buffer, total_epochs)],
        Regime::Both => {
            let buffer = total_epochs.div_ceil(2);
            let recent = total_epochs / 2;
            let mut plan = vec![(SourceKind::Buffer, buffer)];
            if recent > 0 {
                plan.push((SourceKind::Recent, recent));
            }
            plan
        }
    }
}

/// FIFO transition store with fixed capacity.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<F> {
    items: VecDeque<Transition<F>>,
    capacity: usize,
    inserted: u64,
}

impl<F: Scalar> ReplayBuffer<F> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        ReplayBuffer { items: VecDeque::with_capacity(capacity), capacity, inserted: 0 }
    }

    /// Append a finished episode's transitions in order, evicting the oldest
    /// stored transitions once over capacity.
    pub fn push_episode(&mut self, trace: &EpisodeTrace<F>) {
        for &t in trace.steps() {
            if self.items.len() == self.capacity {
                self.items.pop_front();
            }
            self.items.push_back(t);
            self.inserted += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total transitions ever inserted (monotone; ignores eviction).
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition<F>> {
        self.items.iter()
    }
}

/// Anything a minibatch can be drawn from.
pub trait MinibatchSource<F> {
    fn num_transitions(&self) -> usize;
    fn transition(&self, i: usize) -> &Transition<F>;
}

impl<F: Scalar> MinibatchSource<F> for ReplayBuffer<F> {
    fn num_transitions(&self) -> usize {
        self.items.len()
    }

    fn transition(&self, i: usize) -> &Transition<F> {
        &self.items[i]
    }
}

impl<F: Scalar> MinibatchSource<F> for [Transition<F>] {
    fn num_transitions(&self) -> usize {
        self.len()
    }

    fn transition(&self, i: usize) -> &Transition<F> {
        &self[i]
    }
}

impl<F: Scalar> MinibatchSource<F> for EpisodeTrace<F> {
    fn num_transitions(&self) -> usize {
        self.len()
    }

    fn transition(&self, i: usize) -> &Transition<F> {
        &self.steps()[i]
    }
}

/// Draw `n` transitions uniformly with replacement.
pub fn sample_minibatch<F: Scalar, S: MinibatchSource<F> + ?Sized, R: Rng + ?Sized>(
    source: &S,
    n: usize,
    rng: &mut R,
) -> Vec<Transition<F>> {
    let len = source.num_transitions();
    assert!(len > 0, "cannot sample from an empty source");
    (0..n).map(|_| *source.transition(rng.random_range(0..len))).collect()
}
