//! Policies and exact evaluation.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::FiniteMdp;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest horizon accepted by evaluators that enumerate histories.
pub const MAX_TREE_HORIZON: usize = 8;

/// A (possibly history-dependent) stochastic policy.
///
/// `history` is `[s1, a1, s2, ..., st]`: odd length, ending in the current state.
pub trait Policy<T: Real> {
    fn action_probs(&self, history: &[usize]) -> Result<Vec<T>>;

    /// Exact expected utility `U(π, μ)`.
    fn utility(&self, mdp: &FiniteMdp<T>) -> Result<T> {
        evaluate_tree_by_enumeration(self, mdp)
    }
}

impl<T: Real, P: Policy<T> + ?Sized> Policy<T> for &P {
    fn action_probs(&self, history: &[usize]) -> Result<Vec<T>> {
        (**self).action_probs(history)
    }

    fn utility(&self, mdp: &FiniteMdp<T>) -> Result<T> {
        (**self).utility(mdp)
    }
}

pub fn evaluate_policy<T: Real, P: Policy<T> + ?Sized>(mdp: &FiniteMdp<T>, policy: &P) -> Result<T> {
    policy.utility(mdp)
}

/// Forward pass over every history with positive probability.
///
/// Works for any policy; exponential in the horizon, so guarded at [`MAX_TREE_HORIZON`].
pub fn evaluate_tree_by_enumeration<T: Real, P: Policy<T> + ?Sized>(policy: &P, mdp: &FiniteMdp<T>) -> Result<T> {
    let horizon = mdp.horizon();
    if horizon > MAX_TREE_HORIZON {
        return Err(Error::HorizonGuard { horizon, max: MAX_TREE_HORIZON });
    }
    let discounts = mdp.discounts();
    let mut history = Vec::with_capacity(2 * horizon);
    let mut total = T::zero();
    for (s, &p0) in mdp.initial().iter().enumerate() {
        if p0 > T::zero() {
            history.push(s);
            total += p0 * enumerate_from(policy, mdp, &discounts, &mut history)?;
            history.pop();
        }
    }
    Ok(total)
}

fn enumerate_from<T: Real, P: Policy<T> + ?Sized>(
    policy: &P,
    mdp: &FiniteMdp<T>,
    discounts: &[T],
    history: &mut Vec<usize>,
) -> Result<T> {
    let t = history.len() / 2;
    let s = history[history.len() - 1];
    let probs = policy.action_probs(history)?;
    if probs.len() != mdp.n_actions() {
        return Err(Error::InvalidPolicy(format!(
            "history {history:?} has {} action probabilities, expected {}",
            probs.len(),
            mdp.n_actions()
        )));
    }
    let mut value = T::zero();
    for (a, &pa) in probs.iter().enumerate() {
        if pa <= T::zero() {
            continue;
        }
        let mut q = discounts[t] * mdp.reward(s, a);
        if t + 1 < mdp.horizon() {
            history.push(a);
            for (s2, &p) in mdp.p(s, a).iter().enumerate() {
                if p > T::zero() {
                    history.push(s2);
                    q += p * enumerate_from(policy, mdp, discounts, history)?;
                    history.pop();
                }
            }
            history.pop();
        }
        value += pa * q;
    }
    Ok(value)
}

fn check_rows<T: Real>(probs: &[T], n_actions: usize, what: &str) -> Result<()> {
    if n_actions == 0 || !probs.len().is_multiple_of(n_actions) {
        return Err(Error::InvalidPolicy(format!("{what}: table length not a multiple of the action count")));
    }
    for (i, row) in probs.chunks(n_actions).enumerate() {
        let ok = row.iter().all(|&p| p.is_finite() && p >= T::zero())
            && (row.iter().copied().sum::<T>() - T::one()).abs() <= T::tolerance();
        if !ok {
            return Err(Error::InvalidPolicy(format!("{what}: row {i} is not a distribution")));
        }
    }
    Ok(())
}

fn check_history(history: &[usize], n_states: usize) -> Result<usize> {
    if history.len().is_multiple_of(2) {
        return Err(Error::InvalidPolicy("history must end in a state".into()));
    }
    let s = history[history.len() - 1];
    if s >= n_states {
        return Err(Error::InvalidPolicy(format!("state {s} out of range")));
    }
    Ok(s)
}

/// Stationary policy `π(a|s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MemorylessPolicy<T: Real> {
    n_states: usize,
    n_actions: usize,
    probs: Vec<T>,
}

impl<T: Real> MemorylessPolicy<T> {
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<T>) -> Result<Self> {
        if probs.len() != n_states * n_actions {
            return Err(Error::InvalidPolicy("memoryless table has the wrong length".into()));
        }
        check_rows(&probs, n_actions, "memoryless policy")?;
        Ok(Self { n_states, n_actions, probs })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        let p = T::one() / T::lit(n_actions as f64);
        Self { n_states, n_actions, probs: vec![p; n_states * n_actions] }
    }

    pub fn deterministic(n_actions: usize, actions: &[usize]) -> Result<Self> {
        let mut probs = vec![T::zero(); actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::InvalidPolicy(format!("action {a} out of range")));
            }
            probs[s * n_actions + a] = T::one();
        }
        Ok(Self { n_states: actions.len(), n_actions, probs })
    }

    pub fn random<R: Rng + ?Sized>(n_states: usize, n_actions: usize, rng: &mut R) -> Self {
        let probs = (0..n_states).flat_map(|_| random_row::<T, R>(n_actions, rng)).collect();
        Self { n_states, n_actions, probs }
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[T] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }
}

impl<T: Real> Policy<T> for MemorylessPolicy<T> {
    fn action_probs(&self, history: &[usize]) -> Result<Vec<T>> {
        Ok(self.row(check_history(history, self.n_states)?).to_vec())
    }

    fn utility(&self, mdp: &FiniteMdp<T>) -> Result<T> {
        if mdp.n_states() != self.n_states || mdp.n_actions() != self.n_actions {
            return Err(Error::InvalidPolicy("policy shape does not match the MDP".into()));
        }
        Ok(forward_dp(mdp, |_, s| self.row(s)))
    }
}

/// Time-dependent memoryless policy `π_t(a|s)`; the form returned by backward induction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MarkovPolicy<T: Real> {
    n_states: usize,
    n_actions: usize,
    /// One `[s][a]` table per step.
    steps: Vec<Vec<T>>,
}

impl<T: Real> MarkovPolicy<T> {
    pub fn new(n_states: usize, n_actions: usize, steps: Vec<Vec<T>>) -> Result<Self> {
        for st in &steps {
            if st.len() != n_states * n_actions {
                return Err(Error::InvalidPolicy("Markov step table has the wrong length".into()));
            }
            check_rows(st, n_actions, "Markov policy")?;
        }
        Ok(Self { n_states, n_actions, steps })
    }

    /// Deterministic policy from an action table `actions[t][s]`.
    pub fn from_actions(n_actions: usize, actions: &[Vec<usize>]) -> Result<Self> {
        let n_states = actions.first().map_or(0, |a| a.len());
        let mut steps = Vec::with_capacity(actions.len());
        for row in actions {
            let mut st = vec![T::zero(); n_states * n_actions];
            for (s, &a) in row.iter().enumerate() {
                if a >= n_actions {
                    return Err(Error::InvalidPolicy(format!("action {a} out of range")));
                }
                st[s * n_actions + a] = T::one();
            }
            steps.push(st);
        }
        Ok(Self { n_states, n_actions, steps })
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    #[inline]
    pub fn row(&self, t: usize, s: usize) -> &[T] {
        &self.steps[t][s * self.n_actions..(s + 1) * self.n_actions]
    }
}

impl<T: Real> Policy<T> for MarkovPolicy<T> {
    fn action_probs(&self, history: &[usize]) -> Result<Vec<T>> {
        let s = check_history(history, self.n_states)?;
        let t = history.len() / 2;
        if t >= self.steps.len() {
            return Err(Error::MissingHistory { history: history.to_vec() });
        }
        Ok(self.row(t, s).to_vec())
    }

    fn utility(&self, mdp: &FiniteMdp<T>) -> Result<T> {
        if mdp.n_states() != self.n_states || mdp.n_actions() != self.n_actions {
            return Err(Error::InvalidPolicy("policy shape does not match the MDP".into()));
        }
        if self.steps.len() < mdp.horizon() {
            return Err(Error::InvalidPolicy("Markov policy is shorter than the horizon".into()));
        }
        Ok(forward_dp(mdp, |t, s| self.row(t, s)))
    }
}

/// State-distribution propagation for policies that only look at `(t, s)`.
fn forward_dp<'a, T: Real>(mdp: &FiniteMdp<T>, row: impl Fn(usize, usize) -> &'a [T]) -> T {
    let n = mdp.n_states();
    let mut dist = mdp.initial().to_vec();
    let mut next = vec![T::zero(); n];
    let mut total = T::zero();
    for (t, g) in mdp.discounts().into_iter().enumerate() {
        next.iter_mut().for_each(|x| *x = T::zero());
        for s in 0..n {
            let d = dist[s];
            if d == T::zero() {
                continue;
            }
            for (a, &pa) in row(t, s).iter().enumerate() {
                let w = d * pa;
                if w == T::zero() {
                    continue;
                }
                total += g * w * mdp.reward(s, a);
                for (s2, &p) in mdp.p(s, a).iter().enumerate() {
                    next[s2] += w * p;
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    total
}

pub(crate) fn random_row<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let mut row: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let z: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= z);
    row.into_iter().map(T::lit).collect()
}

/// Explicit table of action distributions keyed by history.
///
/// Histories never reached with positive probability may be omitted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HistoryPolicyTree<T> {
    n_actions: usize,
    nodes: HashMap<Vec<usize>, Vec<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct TreeNode<T: Real> {
    history: Vec<usize>,
    probs: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawTree<T: Real> {
    n_actions: usize,
    nodes: Vec<TreeNode<T>>,
}

impl<T: Real> Serialize for HistoryPolicyTree<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut nodes: Vec<TreeNode<T>> =
            self.nodes.iter().map(|(h, p)| TreeNode { history: h.clone(), probs: p.clone() }).collect();
        nodes.sort_by(|a, b| (a.history.len(), &a.history).cmp(&(b.history.len(), &b.history)));
        RawTree { n_actions: self.n_actions, nodes }.serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for HistoryPolicyTree<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawTree::<T>::deserialize(deserializer)?;
        let mut tree = HistoryPolicyTree::new(raw.n_actions);
        for node in raw.nodes {
            tree.insert(node.history, node.probs).map_err(serde::de::Error::custom)?;
        }
        Ok(tree)
    }
}

impl<T: Real> HistoryPolicyTree<T> {
    pub fn new(n_actions: usize) -> Self {
        Self { n_actions, nodes: HashMap::new() }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn insert(&mut self, history: Vec<usize>, probs: Vec<T>) -> Result<()> {
        if history.len().is_multiple_of(2) {
            return Err(Error::InvalidPolicy("history must end in a state".into()));
        }
        if history.len() / 2 >= MAX_TREE_HORIZON {
            return Err(Error::HorizonGuard { horizon: history.len() / 2 + 1, max: MAX_TREE_HORIZON });
        }
        if probs.len() != self.n_actions {
            return Err(Error::InvalidPolicy("node has the wrong number of actions".into()));
        }
        check_rows(&probs, self.n_actions, "tree node")?;
        self.nodes.insert(history, probs);
        Ok(())
    }

    pub(crate) fn insert_unchecked(&mut self, history: Vec<usize>, probs: Vec<T>) {
        self.nodes.insert(history, probs);
    }

    pub fn insert_action(&mut self, history: Vec<usize>, action: usize) -> Result<()> {
        if action >= self.n_actions {
            return Err(Error::InvalidPolicy(format!("action {action} out of range")));
        }
        let mut probs = vec![T::zero(); self.n_actions];
        probs[action] = T::one();
        self.insert(history, probs)
    }

    pub fn get(&self, history: &[usize]) -> Option<&[T]> {
        self.nodes.get(history).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], &[T])> {
        self.nodes.iter().map(|(h, p)| (h.as_slice(), p.as_slice()))
    }

    /// Deterministic choice at a node, if the node is a point mass.
    pub fn action(&self, history: &[usize]) -> Option<usize> {
        let p = self.nodes.get(history)?;
        p.iter().position(|&x| x == T::one())
    }

    /// Calls `f(history)` for every history of length up to `horizon` steps.
    fn for_each_history(n_states: usize, n_actions: usize, horizon: usize, f: &mut dyn FnMut(&[usize])) {
        fn rec(h: &mut Vec<usize>, n_s: usize, n_a: usize, horizon: usize, f: &mut dyn FnMut(&[usize])) {
            f(h);
            if h.len() / 2 + 1 >= horizon {
                return;
            }
            for a in 0..n_a {
                for s in 0..n_s {
                    h.push(a);
                    h.push(s);
                    rec(h, n_s, n_a, horizon, f);
                    h.pop();
                    h.pop();
                }
            }
        }
        let mut h = Vec::new();
        for s in 0..n_states {
            h.push(s);
            rec(&mut h, n_states, n_actions, horizon, f);
            h.pop();
        }
    }

    /// Materialises `policy` on every history up to `horizon` steps.
    pub fn from_policy<P: Policy<T> + ?Sized>(
        policy: &P,
        n_states: usize,
        n_actions: usize,
        horizon: usize,
    ) -> Result<Self> {
        if horizon > MAX_TREE_HORIZON {
            return Err(Error::HorizonGuard { horizon, max: MAX_TREE_HORIZON });
        }
        let mut tree = Self::new(n_actions);
        let mut err = None;
        Self::for_each_history(n_states, n_actions, horizon, &mut |h| {
            if err.is_none() {
                match policy.action_probs(h) {
                    Ok(p) => tree.insert_unchecked(h.to_vec(), p),
                    Err(e) => err = Some(e),
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(tree),
        }
    }

    /// Full tree with each node drawn uniformly from the simplex.
    pub fn random<R: Rng + ?Sized>(
        n_states: usize,
        n_actions: usize,
        horizon: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if horizon > MAX_TREE_HORIZON {
            return Err(Error::HorizonGuard { horizon, max: MAX_TREE_HORIZON });
        }
        let mut tree = Self::new(n_actions);
        Self::for_each_history(n_states, n_actions, horizon, &mut |h| {
            tree.insert_unchecked(h.to_vec(), random_row(n_actions, rng));
        });
        Ok(tree)
    }

    /// Behaviour-equivalent stochastic tree for a mixture of tree policies.
    ///
    /// Each node mixes the components' distributions with weights proportional
    /// to `w_k · Π_j π_k(a_j|h_j)`, the component's posterior after seeing the
    /// agent's own past actions. Histories no component reaches fall back to the
    /// prior mixture.
    pub fn behavioral_mixture(weights: &[T], trees: &[&HistoryPolicyTree<T>]) -> Result<Self> {
        if weights.len() != trees.len() || trees.is_empty() {
            return Err(Error::InvalidPolicy("mixture needs one weight per tree".into()));
        }
        let n_actions = trees[0].n_actions;
        if trees.iter().any(|t| t.n_actions != n_actions) {
            return Err(Error::InvalidPolicy("mixed trees disagree on the action count".into()));
        }
        let reach = |tree: &HistoryPolicyTree<T>, h: &[usize]| -> T {
            let mut r = T::one();
            for j in (1..h.len()).step_by(2) {
                match tree.get(&h[..j]) {
                    Some(p) => r *= p[h[j]],
                    None => return T::zero(),
                }
            }
            r
        };
        let mut keys: Vec<&Vec<usize>> = trees.iter().flat_map(|t| t.nodes.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut out = Self::new(n_actions);
        for h in keys {
            let mut num = vec![T::zero(); n_actions];
            let mut den = T::zero();
            let mut fallback = vec![T::zero(); n_actions];
            let mut fallback_den = T::zero();
            for (&w, tree) in weights.iter().zip(trees) {
                let Some(p) = tree.get(h) else { continue };
                let c = w * reach(tree, h);
                for a in 0..n_actions {
                    num[a] += c * p[a];
                    fallback[a] += w * p[a];
                }
                den += c;
                fallback_den += w;
            }
            let probs = if den > T::zero() {
                num.into_iter().map(|x| x / den).collect()
            } else if fallback_den > T::zero() {
                fallback.into_iter().map(|x| x / fallback_den).collect()
            } else {
                continue;
            };
            out.insert_unchecked(h.clone(), probs);
        }
        Ok(out)
    }
}

impl<T: Real> Policy<T> for HistoryPolicyTree<T> {
    fn action_probs(&self, history: &[usize]) -> Result<Vec<T>> {
        self.nodes.get(history).cloned().ok_or_else(|| Error::MissingHistory { history: history.to_vec() })
    }
}
