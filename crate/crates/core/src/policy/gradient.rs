//! Utility gradients and Hessians of softmax partition policies.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SoftmaxPartitionPolicy;
use crate::error::{Error, Result};
use crate::mdp::{FiniteMdp, MAX_TREE_HORIZON};
use crate::regret::sample_index;
use crate::scalar::Real;

/// Occupancy `Pr(cell at step t)` for each step, cells in increasing order.
pub(crate) fn forward_layers<T: Real>(policy: &SoftmaxPartitionPolicy<T>, mdp: &FiniteMdp<T>) -> Vec<Vec<(usize, T)>> {
    let part = policy.partition();
    let mut layers = Vec::with_capacity(mdp.horizon());
    let mut current: BTreeMap<usize, T> = BTreeMap::new();
    for (s, &p) in mdp.initial().iter().enumerate() {
        if p > T::zero() {
            *current.entry(part.root(s)).or_insert(T::zero()) += p;
        }
    }
    for t in 0..mdp.horizon() {
        let layer: Vec<(usize, T)> = current.into_iter().collect();
        let mut next = BTreeMap::new();
        if t + 1 < mdp.horizon() {
            for &(cell, d) in &layer {
                let s = part.current_state(cell);
                for (a, pa) in policy.cell_probs(cell).into_iter().enumerate() {
                    let w = d * pa;
                    if w <= T::zero() {
                        continue;
                    }
                    for (s2, &p) in mdp.p(s, a).iter().enumerate() {
                        if p > T::zero() {
                            let c2 = part.next(cell, a, s2).expect("partition covers the horizon");
                            *next.entry(c2).or_insert(T::zero()) += w * p;
                        }
                    }
                }
            }
        }
        layers.push(layer);
        current = next;
    }
    layers
}

/// Exact `∇_w U(π, μ)` by forward occupancies and backward action values:
/// `Σ_t γ^t Σ_c Pr_t(c) π(b|c) (Q_t(c, b) − V_t(c))`. No horizon guard.
pub fn utility_gradient<T: Real>(policy: &SoftmaxPartitionPolicy<T>, mdp: &FiniteMdp<T>) -> Result<Vec<T>> {
    policy.validate_for(mdp)?;
    let part = policy.partition();
    let n_a = policy.n_actions();
    let layers = forward_layers(policy, mdp);
    let discounts = mdp.discounts();
    let gamma = mdp.discount();
    let mut grad = vec![T::zero(); policy.n_params()];
    let mut v_next: HashMap<usize, T> = HashMap::new();
    for t in (0..mdp.horizon()).rev() {
        let mut v_here = HashMap::with_capacity(layers[t].len());
        for &(cell, d) in &layers[t] {
            let s = part.current_state(cell);
            let probs = policy.cell_probs(cell);
            let q: Vec<T> = (0..n_a)
                .map(|a| {
                    let mut q = mdp.reward(s, a);
                    if t + 1 < mdp.horizon() {
                        let future: T = mdp
                            .p(s, a)
                            .iter()
                            .enumerate()
                            .filter(|(_, &p)| p > T::zero())
                            .map(|(s2, &p)| {
                                let c2 = part.next(cell, a, s2).expect("partition covers the horizon");
                                p * v_next.get(&c2).copied().unwrap_or(T::zero())
                            })
                            .sum();
                        q += gamma * future;
                    }
                    q
                })
                .collect();
            let v: T = probs.iter().zip(&q).map(|(&p, &q)| p * q).sum();
            for b in 0..n_a {
                grad[cell * n_a + b] += discounts[t] * d * probs[b] * (q[b] - v);
            }
            v_here.insert(cell, v);
        }
        v_next = v_here;
    }
    Ok(grad)
}

type Visitor<'a, T> = dyn FnMut(T, T, &[(usize, usize)]) + 'a;

/// Visits every complete trajectory with positive probability:
/// `f(probability, utility, [(cell_t, a_t)])`.
fn for_each_trajectory<T: Real>(
    policy: &SoftmaxPartitionPolicy<T>,
    mdp: &FiniteMdp<T>,
    f: &mut Visitor<'_, T>,
) -> Result<()> {
    policy.validate_for(mdp)?;
    if mdp.horizon() > MAX_TREE_HORIZON {
        return Err(Error::HorizonGuard { horizon: mdp.horizon(), max: MAX_TREE_HORIZON });
    }
    struct Walk<'a, T: Real> {
        policy: &'a SoftmaxPartitionPolicy<T>,
        mdp: &'a FiniteMdp<T>,
        discounts: Vec<T>,
        steps: Vec<(usize, usize)>,
    }
    fn rec<T: Real>(w: &mut Walk<'_, T>, cell: usize, prob: T, util: T, f: &mut Visitor<'_, T>) {
        let t = w.steps.len();
        let part = w.policy.partition();
        let s = part.current_state(cell);
        for (a, pa) in w.policy.cell_probs(cell).into_iter().enumerate() {
            if pa <= T::zero() {
                continue;
            }
            let u = util + w.discounts[t] * w.mdp.reward(s, a);
            w.steps.push((cell, a));
            if t + 1 == w.mdp.horizon() {
                f(prob * pa, u, &w.steps);
            } else {
                for (s2, &p) in w.mdp.p(s, a).iter().enumerate() {
                    if p > T::zero() {
                        let c2 = part.next(cell, a, s2).expect("partition covers the horizon");
                        rec(w, c2, prob * pa * p, u, f);
                    }
                }
            }
            w.steps.pop();
        }
    }
    let mut walk = Walk { policy, mdp, discounts: mdp.discounts(), steps: Vec::with_capacity(mdp.horizon()) };
    for (s, &p0) in mdp.initial().iter().enumerate() {
        if p0 > T::zero() {
            rec(&mut walk, policy.partition().root(s), p0, T::zero(), f);
        }
    }
    Ok(())
}

/// `∇_w U = Σ_h U(h) Pr(h) Σ_t ∇_w ln π(a_t|h_t)` summed over all trajectories.
pub fn utility_gradient_enumerate<T: Real>(policy: &SoftmaxPartitionPolicy<T>, mdp: &FiniteMdp<T>) -> Result<Vec<T>> {
    let mut grad = vec![T::zero(); policy.n_params()];
    for_each_trajectory(policy, mdp, &mut |prob, util, steps| {
        for &(cell, a) in steps {
            policy.add_log_gradient(cell, a, prob * util, &mut grad);
        }
    })?;
    Ok(grad)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GradientEstimate<T: Real> {
    pub grad: Vec<T>,
    /// Per-component standard error.
    pub se: Vec<T>,
    pub n_samples: usize,
}

/// REINFORCE estimate from `n_samples` rollouts with a leave-one-out mean-return baseline.
pub fn utility_gradient_mc<T: Real, R: Rng + ?Sized>(
    policy: &SoftmaxPartitionPolicy<T>,
    mdp: &FiniteMdp<T>,
    n_samples: usize,
    rng: &mut R,
) -> Result<GradientEstimate<T>> {
    policy.validate_for(mdp)?;
    if n_samples == 0 {
        return Err(Error::Config("need at least one rollout".into()));
    }
    let part = policy.partition();
    let discounts = mdp.discounts();
    let mut rollouts = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut s = sample_index(mdp.initial(), rng);
        let mut cell = part.root(s);
        let mut util = T::zero();
        let mut steps = Vec::with_capacity(mdp.horizon());
        for (t, &g) in discounts.iter().enumerate() {
            let a = sample_index(&policy.cell_probs(cell), rng);
            util += g * mdp.reward(s, a);
            steps.push((cell, a));
            if t + 1 < mdp.horizon() {
                s = sample_index(mdp.p(s, a), rng);
                cell = part.next(cell, a, s).expect("partition covers the horizon");
            }
        }
        rollouts.push((util, steps));
    }
    let n = T::lit(n_samples as f64);
    let total: T = rollouts.iter().map(|(u, _)| *u).sum();
    let mut sum = vec![T::zero(); policy.n_params()];
    let mut sum_sq = vec![T::zero(); policy.n_params()];
    let mut term = vec![T::zero(); policy.n_params()];
    for (u, steps) in &rollouts {
        let baseline = if n_samples > 1 { (total - *u) / (n - T::one()) } else { T::zero() };
        term.iter_mut().for_each(|x| *x = T::zero());
        for &(cell, a) in steps {
            policy.add_log_gradient(cell, a, *u - baseline, &mut term);
        }
        for ((s, q), &x) in sum.iter_mut().zip(sum_sq.iter_mut()).zip(&term) {
            *s += x;
            *q += x * x;
        }
    }
    let grad: Vec<T> = sum.iter().map(|&s| s / n).collect();
    let se = if n_samples > 1 {
        sum_sq
            .iter()
            .zip(&grad)
            .map(|(&q, &m)| ((q / n - m * m).max(T::zero()) * n / (n - T::one()) / n).sqrt())
            .collect()
    } else {
        vec![T::infinity(); grad.len()]
    };
    Ok(GradientEstimate { grad, se, n_samples })
}

/// Exact Hessian `∇²_w U = G₁ + G₂` as dense row-major `n × n` matrices, where
/// `G₁ = Σ_h U(h) Pr(h) S_h S_hᵀ` with `S_h = Σ_t ∇ ln π(a_t|h_t)` and
/// `G₂ = Σ_h U(h) Pr(h) Σ_t ∇² ln π(a_t|h_t)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HessianParts<T: Real> {
    pub n: usize,
    pub g1: Vec<T>,
    pub g2: Vec<T>,
    pub hessian: Vec<T>,
}

pub fn utility_hessian<T: Real>(policy: &SoftmaxPartitionPolicy<T>, mdp: &FiniteMdp<T>) -> Result<HessianParts<T>> {
    let n = policy.n_params();
    let n_a = policy.n_actions();
    let mut g1 = vec![T::zero(); n * n];
    let mut g2 = vec![T::zero(); n * n];
    let mut score: BTreeMap<usize, T> = BTreeMap::new();
    for_each_trajectory(policy, mdp, &mut |prob, util, steps| {
        let w = prob * util;
        if w == T::zero() {
            return;
        }
        score.clear();
        for &(cell, a) in steps {
            let probs = policy.cell_probs(cell);
            for b in 0..n_a {
                let ind = if a == b { T::one() } else { T::zero() };
                *score.entry(cell * n_a + b).or_insert(T::zero()) += ind - probs[b];
                for c in 0..n_a {
                    // ∇² ln π(a|h) = −(diag π − π πᵀ) on the visited cell.
                    let h = if b == c { probs[b] * (probs[b] - T::one()) } else { probs[b] * probs[c] };
                    g2[(cell * n_a + b) * n + cell * n_a + c] += w * h;
                }
            }
        }
        for (&i, &si) in &score {
            for (&j, &sj) in &score {
                g1[i * n + j] += w * si * sj;
            }
        }
    })?;
    let hessian = g1.iter().zip(&g2).map(|(&a, &b)| a + b).collect();
    Ok(HessianParts { n, g1, g2, hessian })
}
