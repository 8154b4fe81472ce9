//! Posterior-sampling baseline: each episode plays the optimal policy of an MDP drawn from the belief.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MdpSet;
use crate::beliefs::BeliefVector;
use crate::error::{Error, Result};
use crate::mdp::{backward_induction, MarkovPolicy};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PsrlConfig {
    pub episode_length: usize,
    /// Defaults to `ceil(T / episode_length)`. Steps left over after the last
    /// full episode extend it.
    pub n_episodes: Option<usize>,
    pub n_mc: usize,
    /// Bayes-update the belief on observed transitions between episodes.
    pub update: bool,
}

impl Default for PsrlConfig {
    fn default() -> Self {
        Self { episode_length: 1, n_episodes: None, n_mc: 10_000, update: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate<T> {
    pub mean: T,
    pub se: T,
    pub n: usize,
}

impl<T: Real> McEstimate<T> {
    pub fn from_samples(samples: &[T]) -> Self {
        let n = samples.len();
        let nf = T::lit(n as f64);
        let mean = samples.iter().copied().sum::<T>() / nf;
        let var = if n > 1 {
            samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / T::lit((n - 1) as f64)
        } else {
            T::zero()
        };
        Self { mean, se: (var / nf).sqrt(), n }
    }
}

pub(crate) fn sample_index<T: Real, R: Rng + ?Sized>(weights: &[T], rng: &mut R) -> usize {
    let total: T = weights.iter().copied().sum();
    let mut u = T::lit(rng.random::<f64>()) * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > T::zero() {
            if u < w {
                return i;
            }
            u -= w;
            last = i;
        }
    }
    last
}

/// Monte-Carlo estimate of PSRL's Bayesian regret `E_{μ∼β}[U*(μ) − U(PSRL, μ)]`.
pub fn psrl_evaluate<T: Real, R: Rng + ?Sized>(
    set: &MdpSet<T>,
    belief: &BeliefVector<T>,
    config: &PsrlConfig,
    rng: &mut R,
) -> Result<McEstimate<T>> {
    set.check_belief(belief)?;
    let horizon = set.horizon();
    let len = config.episode_length;
    if len == 0 || config.n_mc == 0 {
        return Err(Error::Config("episode_length and n_mc must be positive".into()));
    }
    let n_episodes = config.n_episodes.unwrap_or(horizon.div_ceil(len));
    if n_episodes == 0 || len * n_episodes.saturating_sub(1) >= horizon {
        return Err(Error::Config(format!("{n_episodes} episodes of length {len} do not fit horizon {horizon}")));
    }
    let episode_of = |t: usize| (t / len).min(n_episodes - 1);
    let plans: Vec<Vec<Vec<usize>>> = set.mdps().iter().map(|m| backward_induction(m).actions).collect();
    let discounts = set.get(0).discounts();
    let initial = set.get(0).initial().to_vec();
    let mut samples = Vec::with_capacity(config.n_mc);
    let mut posterior = vec![T::zero(); set.len()];
    for _ in 0..config.n_mc {
        let truth = sample_index(belief.weights(), rng);
        let mdp = set.get(truth);
        posterior.copy_from_slice(belief.weights());
        let mut s = sample_index(&initial, rng);
        let mut current = None;
        let mut episode = usize::MAX;
        let mut utility = T::zero();
        for (t, &g) in discounts.iter().enumerate() {
            if episode_of(t) != episode {
                episode = episode_of(t);
                current = Some(sample_index(&posterior, rng));
            }
            let a = plans[current.expect("set at step 0")][t][s];
            utility += g * mdp.reward(s, a);
            let s2 = sample_index(mdp.p(s, a), rng);
            if config.update {
                for (w, m) in posterior.iter_mut().zip(set.mdps()) {
                    *w *= m.p(s, a)[s2];
                }
                let z: T = posterior.iter().copied().sum();
                posterior.iter_mut().for_each(|w| *w /= z);
            }
            s = s2;
        }
        samples.push(set.optimal_utilities()[truth] - utility);
    }
    Ok(McEstimate::from_samples(&samples))
}

/// The Markov policy PSRL induces with one-step episodes and no updates:
/// `π_t(a|s) = Σ_j β_j 1[a = a*_j(t, s)]`.
pub fn psrl_mixture_policy<T: Real>(set: &MdpSet<T>, belief: &BeliefVector<T>) -> Result<MarkovPolicy<T>> {
    set.check_belief(belief)?;
    let (n_s, n_a) = (set.n_states(), set.n_actions());
    let mut steps = vec![vec![T::zero(); n_s * n_a]; set.horizon()];
    for (m, &b) in set.mdps().iter().zip(belief.weights()) {
        for (t, row) in backward_induction(m).actions.iter().enumerate() {
            for (s, &a) in row.iter().enumerate() {
                steps[t][s * n_a + a] += b;
            }
        }
    }
    MarkovPolicy::new(n_s, n_a, steps)
}
