//! Helpers shared by the integration test targets. Everything here is written
//! against the public API only and avoids the crate's own evaluators, so it can
//! serve as an independent reference.
#![allow(dead_code)]

use minimax_bayes::game::solve_matrix_game;
use minimax_bayes::mdp::{gen_random_mdp_seeded, FiniteMdp, HistoryPolicyTree};
use minimax_bayes::regret::{pure_policy_payoffs, MdpSet, PURE_POLICY_LIMIT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` random MDPs with exponential transition rows and uniform random rewards.
pub fn random_set(n: usize, n_states: usize, n_actions: usize, horizon: usize, seed: u64) -> MdpSet<f64> {
    let mut r = rng(seed ^ 0x5eed);
    let mdps = (0..n)
        .map(|i| {
            let reward: Vec<f64> = (0..n_states * n_actions).map(|_| r.random::<f64>()).collect();
            gen_random_mdp_seeded::<f64>(n_states, n_actions, seed.wrapping_mul(1000).wrapping_add(i as u64))
                .unwrap()
                .with_horizon(horizon)
                .unwrap()
                .with_reward(reward)
                .unwrap()
        })
        .collect();
    MdpSet::new(mdps).unwrap()
}

/// The random MDPs of the acceptance tasks: `gen_random_mdp_seeded` with a shortened horizon.
pub fn plain_set(n: usize, n_states: usize, horizon: usize, seed: u64) -> MdpSet<f64> {
    let mdps = (0..n)
        .map(|i| gen_random_mdp_seeded::<f64>(n_states, 2, seed + i as u64).unwrap().with_horizon(horizon).unwrap())
        .collect();
    MdpSet::new(mdps).unwrap()
}

/// Exact utility of a tree policy by explicit recursion over histories.
pub fn tree_utility(tree: &HistoryPolicyTree<f64>, mdp: &FiniteMdp<f64>) -> f64 {
    fn go(tree: &HistoryPolicyTree<f64>, mdp: &FiniteMdp<f64>, h: &mut Vec<usize>, t: usize) -> f64 {
        if t == mdp.horizon() {
            return 0.0;
        }
        let s = *h.last().unwrap();
        let probs = tree.get(h).expect("tree covers reachable histories").to_vec();
        let mut v = 0.0;
        for (a, &pa) in probs.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            let mut q = mdp.reward(s, a);
            for (s2, &p) in mdp.p(s, a).iter().enumerate() {
                if p > 0.0 && t + 1 < mdp.horizon() {
                    h.push(a);
                    h.push(s2);
                    q += mdp.discount() * p * go(tree, mdp, h, t + 1);
                    h.pop();
                    h.pop();
                }
            }
            v += pa * q;
        }
        v
    }
    let mut total = 0.0;
    for (s, &p0) in mdp.initial().iter().enumerate() {
        if p0 > 0.0 {
            total += p0 * go(tree, mdp, &mut vec![s], 0);
        }
    }
    total
}

/// Optimal utility of one MDP by plain value iteration over the horizon.
pub fn optimal_utility(mdp: &FiniteMdp<f64>) -> f64 {
    let n = mdp.n_states();
    let mut v = vec![0.0; n];
    for _ in 0..mdp.horizon() {
        v = (0..n)
            .map(|s| {
                (0..mdp.n_actions())
                    .map(|a| mdp.reward(s, a) + mdp.discount() * mdp.p(s, a).iter().zip(&v).map(|(p, x)| p * x).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
    }
    mdp.initial().iter().zip(&v).map(|(p, x)| p * x).sum()
}

/// `U*(β)` by recursion on normalised posteriors.
pub fn bayes_value_oracle(set: &MdpSet<f64>, belief: &[f64]) -> f64 {
    fn go(set: &MdpSet<f64>, post: &[f64], s: usize, t: usize) -> f64 {
        if t == set.horizon() {
            return 0.0;
        }
        let gamma = set.get(0).discount();
        let mut best = f64::NEG_INFINITY;
        for a in 0..set.n_actions() {
            let mut q: f64 = post.iter().zip(set.mdps()).map(|(w, m)| w * m.reward(s, a)).sum();
            for s2 in 0..set.n_states() {
                let joint: Vec<f64> = post.iter().zip(set.mdps()).map(|(w, m)| w * m.p(s, a)[s2]).collect();
                let mass: f64 = joint.iter().sum();
                if mass > 0.0 {
                    let next: Vec<f64> = joint.iter().map(|x| x / mass).collect();
                    q += gamma * mass * go(set, &next, s2, t + 1);
                }
            }
            best = best.max(q);
        }
        best
    }
    let initial = set.get(0).initial().to_vec();
    initial.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(s, p)| p * go(set, belief, s, 0)).sum()
}

/// Minimax regret `min_π max_i R(π, μ_i)` over mixed strategies, by LP over pure policies.
pub fn game_value(set: &MdpSet<f64>) -> f64 {
    let payoffs = pure_policy_payoffs(set, PURE_POLICY_LIMIT).unwrap();
    solve_matrix_game(&payoffs.regrets).unwrap().value
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(a.abs()).max(1e-8)
}
