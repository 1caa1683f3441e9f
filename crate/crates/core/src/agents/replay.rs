use rand::Rng;

use super::AgentError;
use crate::env::CoachAction;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Flattened observation stack.
    pub state: Vec<f64>,
    pub action: CoachAction,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring of transitions; once full, each push overwrites the
/// oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    state_len: usize,
    items: Vec<Transition>,
    /// Slot the next push writes once the ring is full.
    head: usize,
}

impl ReplayBuffer {
    /// # Panics
    ///
    /// If `capacity` is zero.
    pub fn new(capacity: usize, state_len: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            state_len,
            items: Vec::new(),
            head: 0,
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

    pub fn state_len(&self) -> usize {
        self.state_len
    }

    pub fn push(&mut self, t: Transition) -> Result<(), AgentError> {
        if t.state.len() != self.state_len || t.next_state.len() != self.state_len {
            return Err(AgentError::InvalidTransition(format!(
                "expected states of length {}, got {} and {}",
                self.state_len,
                t.state.len(),
                t.next_state.len()
            )));
        }
        if !t.reward.is_finite() {
            return Err(AgentError::InvalidTransition(format!("non-finite reward {}", t.reward)));
        }
        if t.state.iter().chain(&t.next_state).any(|v| !v.is_finite()) {
            return Err(AgentError::InvalidTransition("non-finite state entry".into()));
        }
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
        Ok(())
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> + '_ {
        let (newer, older) = self.items.split_at(self.head);
        older.iter().chain(newer)
    }

    /// `batch` draws, uniform with replacement over the current contents.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<&Transition>, AgentError> {
        if self.items.is_empty() {
            return Err(AgentError::EmptyBuffer);
        }
        Ok((0..batch).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect())
    }
}
