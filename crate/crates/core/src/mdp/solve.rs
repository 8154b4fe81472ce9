use serde::{Deserialize, Serialize};

use super::{FiniteMdp, MarkovPolicy};
use crate::scalar::{argmax_lowest, Real};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BackwardInduction<T: Real> {
    /// `values[t][s]`: optimal discounted value-to-go from step `t` (0-based), in
    /// units of the reward at step `t`. `values[T]` is all zeros.
    pub values: Vec<Vec<T>>,
    /// Greedy action per `(t, s)`.
    pub actions: Vec<Vec<usize>>,
    pub policy: MarkovPolicy<T>,
    /// `U*(μ) = Σ_s σ(s) V_0(s)`.
    pub optimal_utility: T,
}

/// Finite-horizon dynamic programming; ties go to the lowest action index.
pub fn backward_induction<T: Real>(mdp: &FiniteMdp<T>) -> BackwardInduction<T> {
    let (n, m, horizon) = (mdp.n_states(), mdp.n_actions(), mdp.horizon());
    let gamma = mdp.discount();
    let mut values = vec![vec![T::zero(); n]; horizon + 1];
    let mut actions = vec![vec![0usize; n]; horizon];
    let mut q = vec![T::zero(); m];
    for t in (0..horizon).rev() {
        for s in 0..n {
            for (a, qa) in q.iter_mut().enumerate() {
                let future: T = mdp.p(s, a).iter().zip(&values[t + 1]).map(|(&p, &v)| p * v).sum();
                *qa = mdp.reward(s, a) + gamma * future;
            }
            let best = argmax_lowest(&q);
            actions[t][s] = best;
            values[t][s] = q[best];
        }
    }
    let optimal_utility = mdp.initial().iter().zip(&values[0]).map(|(&p, &v)| p * v).sum();
    let policy = MarkovPolicy::from_actions(m, &actions).expect("actions are in range");
    BackwardInduction { values, actions, policy, optimal_utility }
}
