use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::gradient::forward_layers;
use super::Partition;
use crate::error::{Error, Result};
use crate::mdp::{FiniteMdp, Policy};
use crate::scalar::Real;

/// `π(a|h) ∝ exp(w[cell(h)][a])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxPartitionPolicy<T> {
    partition: Partition,
    /// Row-major `[cell][a]`.
    weights: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawSoftmax<T: Real> {
    partition_spec: Partition,
    weights: Vec<Vec<T>>,
}

impl<T: Real> Serialize for SoftmaxPartitionPolicy<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawSoftmax {
            partition_spec: self.partition,
            weights: self.weights.chunks(self.partition.n_actions()).map(<[T]>::to_vec).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for SoftmaxPartitionPolicy<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSoftmax::<T>::deserialize(deserializer)?;
        Self::new(raw.partition_spec, raw.weights.into_iter().flatten().collect()).map_err(serde::de::Error::custom)
    }
}

/// Max-subtracted softmax of one weight row.
pub fn softmax<T: Real>(row: &[T]) -> Vec<T> {
    let m = row.iter().copied().fold(T::neg_infinity(), T::max);
    let mut p: Vec<T> = row.iter().map(|&w| (w - m).exp()).collect();
    let z: T = p.iter().copied().sum();
    p.iter_mut().for_each(|x| *x /= z);
    p
}

impl<T: Real> SoftmaxPartitionPolicy<T> {
    pub fn new(partition: Partition, weights: Vec<T>) -> Result<Self> {
        if weights.len() != partition.n_cells() * partition.n_actions() {
            return Err(Error::InvalidPolicy(format!(
                "expected {} weights, got {}",
                partition.n_cells() * partition.n_actions(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidPolicy("weights must be finite".into()));
        }
        Ok(Self { partition, weights })
    }

    /// All-zero weights: the uniform policy.
    pub fn zeros(partition: Partition) -> Self {
        Self { partition, weights: vec![T::zero(); partition.n_cells() * partition.n_actions()] }
    }

    /// Weights drawn i.i.d. from `N(0, scale²)`.
    pub fn random<R: Rng + ?Sized>(partition: Partition, scale: f64, rng: &mut R) -> Self {
        let n = partition.n_cells() * partition.n_actions();
        let weights = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                T::lit(scale * z)
            })
            .collect();
        Self { partition, weights }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn n_actions(&self) -> usize {
        self.partition.n_actions()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn n_params(&self) -> usize {
        self.weights.len()
    }

    /// Same partition, new weights (validated).
    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        Self::new(self.partition, weights)
    }

    pub fn row(&self, cell: usize) -> &[T] {
        let a = self.n_actions();
        &self.weights[cell * a..(cell + 1) * a]
    }

    pub fn cell_probs(&self, cell: usize) -> Vec<T> {
        softmax(self.row(cell))
    }

    /// `∇_w ln π(a|h)`: `1 − π(b|h)` at `(cell(h), b = a)`, `−π(b|h)` at `(cell(h), b ≠ a)`, zero elsewhere.
    pub fn log_policy_gradient(&self, history: &[usize], action: usize) -> Result<Vec<T>> {
        if action >= self.n_actions() {
            return Err(Error::InvalidPolicy(format!("action {action} out of range")));
        }
        let cell = self.partition.cell(history)?;
        let mut g = vec![T::zero(); self.weights.len()];
        self.add_log_gradient(cell, action, T::one(), &mut g);
        Ok(g)
    }

    /// `out += scale · ∇_w ln π(a|cell)`.
    pub(crate) fn add_log_gradient(&self, cell: usize, action: usize, scale: T, out: &mut [T]) {
        let n_a = self.n_actions();
        for (b, p) in self.cell_probs(cell).into_iter().enumerate() {
            let ind = if b == action { T::one() } else { T::zero() };
            out[cell * n_a + b] += scale * (ind - p);
        }
    }

    fn check_mdp(&self, mdp: &FiniteMdp<T>) -> Result<()> {
        if mdp.n_states() != self.partition.n_states() || mdp.n_actions() != self.n_actions() {
            return Err(Error::InvalidPolicy("policy partition does not match the MDP".into()));
        }
        if let Partition::FullHistory { horizon, .. } = self.partition {
            if horizon < mdp.horizon() {
                return Err(Error::InvalidPolicy("full-history partition is shorter than the horizon".into()));
            }
        }
        Ok(())
    }
}

impl<T: Real> Policy<T> for SoftmaxPartitionPolicy<T> {
    fn action_probs(&self, history: &[usize]) -> Result<Vec<T>> {
        Ok(self.cell_probs(self.partition.cell(history)?))
    }

    /// Exact, by propagating cell occupancies; no horizon guard.
    fn utility(&self, mdp: &FiniteMdp<T>) -> Result<T> {
        self.check_mdp(mdp)?;
        let layers = forward_layers(self, mdp);
        let discounts = mdp.discounts();
        let mut total = T::zero();
        for (t, layer) in layers.iter().enumerate() {
            for &(cell, d) in layer {
                let s = self.partition.current_state(cell);
                let exp_r: T = self.cell_probs(cell).iter().enumerate().map(|(a, &p)| p * mdp.reward(s, a)).sum();
                total += discounts[t] * d * exp_r;
            }
        }
        Ok(total)
    }
}

impl<T: Real> SoftmaxPartitionPolicy<T> {
    pub(crate) fn validate_for(&self, mdp: &FiniteMdp<T>) -> Result<()> {
        self.check_mdp(mdp)
    }
}
