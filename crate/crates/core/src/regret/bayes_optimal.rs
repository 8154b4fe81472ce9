//! Exact Bayes-optimal policy for a belief over a finite MDP set.
//!
//! The information state at a history is the vector `w_i = β_i · Pr_i(states so far | actions)`.
//! Values are kept unnormalised (scaled by the history's marginal probability), so
//! `U*(β)` is the sum of the root values.

use serde::{Deserialize, Serialize};

use super::MdpSet;
use crate::beliefs::BeliefVector;
use crate::error::{Error, Result};
use crate::mdp::{HistoryPolicyTree, MAX_TREE_HORIZON};
use crate::scalar::{argmax_lowest, Real};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BayesOptimal<T: Real> {
    /// Deterministic; defined on every history any member MDP reaches under it.
    pub policy: HistoryPolicyTree<T>,
    /// `U*(β)`.
    pub value: T,
}

struct Solver<'a, T: Real> {
    set: &'a MdpSet<T>,
    discounts: Vec<T>,
    /// Scratch weight vectors, one per depth.
    scratch: Vec<Vec<T>>,
}

impl<'a, T: Real> Solver<'a, T> {
    fn new(set: &'a MdpSet<T>) -> Result<Self> {
        let horizon = set.horizon();
        if horizon > MAX_TREE_HORIZON {
            return Err(Error::HorizonGuard { horizon, max: MAX_TREE_HORIZON });
        }
        Ok(Self {
            set,
            discounts: set.get(0).discounts(),
            scratch: vec![vec![T::zero(); set.len()]; horizon + 1],
        })
    }

    fn children(&self, w: &[T], s: usize, a: usize, s2: usize, out: &mut [T]) -> bool {
        let mut any = false;
        for (i, m) in self.set.mdps().iter().enumerate() {
            out[i] = w[i] * m.p(s, a)[s2];
            any |= out[i] > T::zero();
        }
        any
    }

    /// Unnormalised value of the best action at state `s`, step `t`.
    fn value(&mut self, t: usize, s: usize, w: &[T]) -> T {
        let q = self.q_values(t, s, w);
        q[argmax_lowest(&q)]
    }

    fn q_values(&mut self, t: usize, s: usize, w: &[T]) -> Vec<T> {
        let set = self.set;
        let n_actions = set.n_actions();
        let mut q = vec![T::zero(); n_actions];
        for (a, qa) in q.iter_mut().enumerate() {
            let g = self.discounts[t];
            *qa = set.mdps().iter().zip(w).map(|(m, &wi)| wi * m.reward(s, a)).sum::<T>() * g;
            if t + 1 < set.horizon() {
                let mut child = std::mem::take(&mut self.scratch[t + 1]);
                for s2 in 0..set.n_states() {
                    if self.children(w, s, a, s2, &mut child) {
                        *qa += self.value(t + 1, s2, &child);
                    }
                }
                self.scratch[t + 1] = child;
            }
        }
        q
    }

    /// Records the greedy action along every history some member MDP reaches.
    ///
    /// Where the belief puts no mass on the history, the choice is made for the
    /// likelihood-weighted uniform belief instead, so the policy stays defined.
    fn extract(&mut self, history: &mut Vec<usize>, w: &[T], lik: &[T], tree: &mut HistoryPolicyTree<T>) {
        let t = history.len() / 2;
        let s = history[history.len() - 1];
        let w: Vec<T> = if w.iter().any(|&x| x > T::zero()) { w.to_vec() } else { lik.to_vec() };
        let q = self.q_values(t, s, &w);
        let a = argmax_lowest(&q);
        let mut probs = vec![T::zero(); self.set.n_actions()];
        probs[a] = T::one();
        tree.insert_unchecked(history.clone(), probs);
        if t + 1 >= self.set.horizon() {
            return;
        }
        let n = self.set.len();
        let (mut cw, mut cl) = (vec![T::zero(); n], vec![T::zero(); n]);
        for s2 in 0..self.set.n_states() {
            if self.children(lik, s, a, s2, &mut cl) {
                self.children(&w, s, a, s2, &mut cw);
                history.push(a);
                history.push(s2);
                self.extract(history, &cw, &cl, tree);
                history.pop();
                history.pop();
            }
        }
    }

    fn roots(&self, belief: &[T]) -> Vec<(usize, Vec<T>, Vec<T>)> {
        let set = self.set;
        let uniform = T::one() / T::lit(set.len() as f64);
        (0..set.n_states())
            .filter_map(|s| {
                let lik: Vec<T> = set.mdps().iter().map(|m| uniform * m.initial()[s]).collect();
                if lik.iter().all(|&x| x <= T::zero()) {
                    return None;
                }
                let w = set.mdps().iter().zip(belief).map(|(m, &b)| b * m.initial()[s]).collect();
                Some((s, w, lik))
            })
            .collect()
    }
}

/// `U*(β) = max_π U(π, β)` without materialising the policy.
pub fn bayes_optimal_value<T: Real>(set: &MdpSet<T>, belief: &BeliefVector<T>) -> Result<T> {
    set.check_belief(belief)?;
    let mut solver = Solver::new(set)?;
    let mut total = T::zero();
    for (s, w, _) in solver.roots(belief.weights()) {
        if w.iter().any(|&x| x > T::zero()) {
            total += solver.value(0, s, &w);
        }
    }
    Ok(total)
}

/// Deterministic history-dependent Bayes-optimal policy `π*(β)` and its value `U*(β)`.
/// Ties go to the lowest action index.
pub fn bayes_optimal_tree<T: Real>(set: &MdpSet<T>, belief: &BeliefVector<T>) -> Result<BayesOptimal<T>> {
    set.check_belief(belief)?;
    let mut solver = Solver::new(set)?;
    let mut tree = HistoryPolicyTree::new(set.n_actions());
    let mut value = T::zero();
    for (s, w, lik) in solver.roots(belief.weights()) {
        if w.iter().any(|&x| x > T::zero()) {
            value += solver.value(0, s, &w);
        }
        solver.extract(&mut vec![s], &w, &lik, &mut tree);
    }
    Ok(BayesOptimal { policy: tree, value })
}
