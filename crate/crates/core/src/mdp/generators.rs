use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FiniteMdp, InitialState};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Random MDP: transition rows are i.i.d. `Exp(1)` draws, normalised. Reward is 1
/// for action 0 in the last state and 0 elsewhere; the agent starts in state 0.
/// Horizon 5, undiscounted.
pub fn gen_random_mdp<T: Real, R: Rng + ?Sized>(n_states: usize, n_actions: usize, rng: &mut R) -> Result<FiniteMdp<T>> {
    if n_states < 2 || n_actions == 0 {
        return Err(Error::InvalidMdp("random MDPs need at least two states and one action".into()));
    }
    let mut transition = Vec::with_capacity(n_states * n_actions * n_states);
    for _ in 0..n_states * n_actions {
        let row: Vec<f64> = (0..n_states).map(|_| rng.sample::<f64, _>(rand_distr::Exp1)).collect();
        let z: f64 = row.iter().sum();
        transition.extend(row.into_iter().map(|x| T::lit(x / z)));
    }
    let mut reward = vec![T::zero(); n_states * n_actions];
    reward[(n_states - 1) * n_actions] = T::one();
    FiniteMdp::new(n_states, n_actions, transition, reward, 5, T::one(), InitialState::State(0))
}

pub fn gen_random_mdp_seeded<T: Real>(n_states: usize, n_actions: usize, seed: u64) -> Result<FiniteMdp<T>> {
    gen_random_mdp(n_states, n_actions, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Constants of the Chain environment, scaled to rewards in `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainParams {
    /// Reward for the advance effect at the far end of the chain.
    pub far_reward: f64,
    /// Reward for the return effect (taken from any state).
    pub return_reward: f64,
    pub horizon: usize,
    pub discount: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self { far_reward: 1.0, return_reward: 0.2, horizon: 10, discount: 1.0 }
    }
}

pub fn chain_mdp<T: Real>(n_states: usize, slip: f64) -> Result<FiniteMdp<T>> {
    chain_mdp_with(n_states, slip, &ChainParams::default())
}

/// Chain: action 0 advances one state (staying at the end), action 1 returns to
/// state 0. With probability `slip` the other action's effect happens instead.
/// Rewards are the expectation over the realised effect.
pub fn chain_mdp_with<T: Real>(n_states: usize, slip: f64, params: &ChainParams) -> Result<FiniteMdp<T>> {
    if n_states < 2 {
        return Err(Error::InvalidMdp("chain needs at least two states".into()));
    }
    if !(0.0..=1.0).contains(&slip) {
        return Err(Error::InvalidMdp("slip must be a probability".into()));
    }
    let (n, last) = (n_states, n_states - 1);
    let mut transition = vec![T::zero(); n * 2 * n];
    let mut reward = vec![T::zero(); n * 2];
    for s in 0..n {
        let advance_to = (s + 1).min(last);
        let advance_reward = if s == last { params.far_reward } else { 0.0 };
        for (a, p_advance) in [(0usize, 1.0 - slip), (1, slip)] {
            let row = &mut transition[(s * 2 + a) * n..(s * 2 + a + 1) * n];
            row[advance_to] += T::lit(p_advance);
            row[0] += T::lit(1.0 - p_advance);
            reward[s * 2 + a] = T::lit(p_advance * advance_reward + (1.0 - p_advance) * params.return_reward);
        }
    }
    FiniteMdp::new(n, 2, transition, reward, params.horizon, T::lit(params.discount), InitialState::State(0))
}
