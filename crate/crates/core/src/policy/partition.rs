//! Maps from histories to a finite set of cells.
//!
//! A cell at depth `k` encodes `(s_0, a_0, s_1, ..., a_{k-1}, s_k)` in mixed radix:
//! `idx = s_0·(AS)^k + Σ_j (a_j·S + s_{j+1})·(AS)^{k-1-j}`, offset by the number of
//! cells at shallower depths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Partition {
    /// One cell per history of up to `horizon` steps.
    FullHistory { n_states: usize, n_actions: usize, horizon: usize },
    /// The last `window` state-action pairs plus the current state.
    SuffixWindow { n_states: usize, n_actions: usize, window: usize },
}

impl Partition {
    pub fn n_states(&self) -> usize {
        match *self {
            Partition::FullHistory { n_states, .. } | Partition::SuffixWindow { n_states, .. } => n_states,
        }
    }

    pub fn n_actions(&self) -> usize {
        match *self {
            Partition::FullHistory { n_actions, .. } | Partition::SuffixWindow { n_actions, .. } => n_actions,
        }
    }

    /// Deepest encoded depth.
    fn max_depth(&self) -> usize {
        match *self {
            Partition::FullHistory { horizon, .. } => horizon.saturating_sub(1),
            Partition::SuffixWindow { window, .. } => window,
        }
    }

    fn radix(&self) -> usize {
        self.n_states() * self.n_actions()
    }

    fn depth_size(&self, k: usize) -> usize {
        self.n_states() * self.radix().pow(k as u32)
    }

    fn offset(&self, k: usize) -> usize {
        (0..k).map(|j| self.depth_size(j)).sum()
    }

    pub fn n_cells(&self) -> usize {
        self.offset(self.max_depth() + 1)
    }

    fn split(&self, cell: usize) -> (usize, usize) {
        let mut k = 0;
        let mut off = 0;
        while cell >= off + self.depth_size(k) {
            off += self.depth_size(k);
            k += 1;
        }
        (k, cell - off)
    }

    pub fn root(&self, s: usize) -> usize {
        s
    }

    pub fn current_state(&self, cell: usize) -> usize {
        self.split(cell).1 % self.n_states()
    }

    /// Cell after taking `a` and landing in `s2`. `None` past the horizon of a full-history partition.
    pub fn next(&self, cell: usize, a: usize, s2: usize) -> Option<usize> {
        let (k, idx) = self.split(cell);
        let (n, r) = (self.n_states(), self.radix());
        let step = a * n + s2;
        if k < self.max_depth() {
            return Some(self.offset(k + 1) + idx * r + step);
        }
        match *self {
            Partition::FullHistory { .. } => None,
            Partition::SuffixWindow { window: 0, .. } => Some(s2),
            Partition::SuffixWindow { .. } => {
                // Drop the oldest state and action.
                let tail_weight = r.pow(k as u32 - 1);
                let second_state = (idx / tail_weight) % r % n;
                let rest = idx % tail_weight;
                Some(self.offset(k) + second_state * r.pow(k as u32) + rest * r + step)
            }
        }
    }

    /// Cell of a history `[s1, a1, ..., st]`.
    pub fn cell(&self, history: &[usize]) -> Result<usize> {
        let unmapped = || Error::InvalidPolicy(format!("history {history:?} is not covered by the partition"));
        if history.len().is_multiple_of(2) || history.iter().step_by(2).any(|&s| s >= self.n_states()) {
            return Err(unmapped());
        }
        if history.iter().skip(1).step_by(2).any(|&a| a >= self.n_actions()) {
            return Err(unmapped());
        }
        let mut cell = self.root(history[0]);
        for pair in history[1..].chunks(2) {
            cell = self.next(cell, pair[0], pair[1]).ok_or_else(unmapped)?;
        }
        Ok(cell)
    }
}
