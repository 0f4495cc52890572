use std::collections::VecDeque;

use rand::Rng;

use crate::model::ParamVector;

/// FIFO buffer with uniform sampling (with replacement).
#[derive(Clone, Debug)]
pub struct ReplayBuffer<T> {
    items: VecDeque<T>,
    capacity: usize,
}

impl<T: Clone> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            items: VecDeque::with_capacity(capacity.min(1 << 20)),
            capacity: capacity.max(1),
        }
    }

    pub fn from_items(items: Vec<T>) -> Self {
        let capacity = items.len().max(1);
        ReplayBuffer {
            items: items.into(),
            capacity,
        }
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(item);
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

    /// Insertion order, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    pub fn sample<R: Rng>(&self, m: usize, rng: &mut R) -> Vec<T> {
        assert!(!self.items.is_empty(), "cannot sample from an empty buffer");
        (0..m)
            .map(|_| self.items[rng.gen_range(0..self.items.len())].clone())
            .collect()
    }
}

/// Periodically refreshed copy of the parameters used for bootstrap targets.
#[derive(Clone, Debug)]
pub struct FrozenTargetSchedule {
    frozen: ParamVector,
    refresh_every: usize,
    steps: usize,
}

impl FrozenTargetSchedule {
    pub fn new(initial: &[f64], refresh_every: usize) -> Self {
        FrozenTargetSchedule {
            frozen: ParamVector::from_vec(initial.to_vec()),
            refresh_every: refresh_every.max(1),
            steps: 0,
        }
    }

    /// Call once per SGD step with the pre-update parameters; copies them
    /// every `refresh_every` steps (starting with the first) and returns the
    /// parameters to use for targets.
    pub fn targets(&mut self, current: &[f64]) -> &[f64] {
        if self.steps.is_multiple_of(self.refresh_every) {
            self.frozen.copy_from_slice(current);
        }
        self.steps += 1;
        &self.frozen
    }

    pub fn refresh_every(&self) -> usize {
        self.refresh_every
    }
}
