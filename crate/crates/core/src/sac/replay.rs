//! Fixed-capacity FIFO replay buffer with uniform sampling.

use rand::Rng;

use crate::rng::Stream;

/// One environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub done: bool,
}

/// A sampled minibatch, stored row-major.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub size: usize,
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: Vec<f64>,
    pub s_next: Vec<f64>,
    /// 1.0 for terminal transitions, 0.0 otherwise.
    pub done: Vec<f64>,
}

impl Batch {
    pub fn from_transitions(ts: &[Transition]) -> Self {
        let mut b = Batch {
            size: ts.len(),
            ..Default::default()
        };
        for t in ts {
            b.s.extend_from_slice(&t.s);
            b.a.extend_from_slice(&t.a);
            b.r.push(t.r);
            b.s_next.extend_from_slice(&t.s_next);
            b.done.push(if t.done { 1.0 } else { 0.0 });
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
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

    /// Append, overwriting the oldest entry once full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Entries from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity {
            0
        } else {
            self.next
        };
        self.items[split..].iter().chain(&self.items[..split])
    }

    pub fn sample_indices(&self, n: usize, rng: &mut Stream) -> Vec<usize> {
        assert!(!self.items.is_empty());
        (0..n)
            .map(|_| rng.random_range(0..self.items.len()))
            .collect()
    }

    pub fn sample(&self, n: usize, rng: &mut Stream) -> Batch {
        let idx = self.sample_indices(n, rng);
        let d_s = self.items[0].s.len();
        let d_a = self.items[0].a.len();
        let mut b = Batch {
            size: n,
            s: Vec::with_capacity(n * d_s),
            a: Vec::with_capacity(n * d_a),
            r: Vec::with_capacity(n),
            s_next: Vec::with_capacity(n * d_s),
            done: Vec::with_capacity(n),
        };
        for i in idx {
            let t = &self.items[i];
            b.s.extend_from_slice(&t.s);
            b.a.extend_from_slice(&t.a);
            b.r.push(t.r);
            b.s_next.extend_from_slice(&t.s_next);
            b.done.push(if t.done { 1.0 } else { 0.0 });
        }
        b
    }
}
