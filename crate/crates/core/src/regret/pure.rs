//! Enumeration of deterministic history-dependent policies.
//!
//! Only reduced strategies are listed: a choice is made at a history only if
//! some member MDP reaches it under the earlier choices.

use serde::{Deserialize, Serialize};

use super::MdpSet;
use crate::error::{Error, Result};
use crate::mdp::MAX_TREE_HORIZON;
use crate::scalar::Real;

/// Default cap on the number of enumerated policies.
pub const PURE_POLICY_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PurePolicyPayoffs<T: Real> {
    /// `utilities[j][i] = U(π_j, μ_i)`.
    pub utilities: Vec<Vec<T>>,
    /// `regrets[j][i] = R(π_j, μ_i)`.
    pub regrets: Vec<Vec<T>>,
}

fn reachable<T: Real>(set: &MdpSet<T>, lik: &[bool], s: usize, a: usize, s2: usize) -> Vec<bool> {
    set.mdps().iter().zip(lik).map(|(m, &l)| l && m.p(s, a)[s2] > T::zero()).collect()
}

fn count_node<T: Real>(set: &MdpSet<T>, t: usize, s: usize, lik: &[bool], cap: usize) -> usize {
    if t + 1 >= set.horizon() {
        return set.n_actions();
    }
    let mut total = 0usize;
    for a in 0..set.n_actions() {
        let mut prod = 1usize;
        for s2 in 0..set.n_states() {
            let child = reachable(set, lik, s, a, s2);
            if child.iter().any(|&x| x) {
                prod = prod.saturating_mul(count_node(set, t + 1, s2, &child, cap)).min(cap.saturating_add(1));
            }
        }
        total = total.saturating_add(prod).min(cap.saturating_add(1));
    }
    total
}

fn roots<T: Real>(set: &MdpSet<T>) -> Vec<(usize, Vec<bool>)> {
    (0..set.n_states())
        .filter_map(|s| {
            let lik: Vec<bool> = set.mdps().iter().map(|m| m.initial()[s] > T::zero()).collect();
            lik.iter().any(|&x| x).then_some((s, lik))
        })
        .collect()
}

/// Number of reduced deterministic policies, saturating just above `cap`.
pub fn count_pure_policies<T: Real>(set: &MdpSet<T>, cap: usize) -> usize {
    roots(set)
        .iter()
        .fold(1usize, |acc, (s, lik)| acc.saturating_mul(count_node(set, 0, *s, lik, cap)).min(cap.saturating_add(1)))
}

/// Per-MDP utility contributions of every reduced sub-policy rooted at `(t, s)`,
/// scaled by the probability `w_i` of reaching this history in MDP `i`.
fn enumerate_node<T: Real>(set: &MdpSet<T>, t: usize, s: usize, w: &[T], discounts: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    for a in 0..set.n_actions() {
        let base: Vec<T> =
            set.mdps().iter().zip(w).map(|(m, &wi)| wi * discounts[t] * m.reward(s, a)).collect();
        let mut partial = vec![base];
        if t + 1 < set.horizon() {
            for s2 in 0..set.n_states() {
                let child: Vec<T> = set.mdps().iter().zip(w).map(|(m, &wi)| wi * m.p(s, a)[s2]).collect();
                if child.iter().all(|&x| x <= T::zero()) {
                    continue;
                }
                let subs = enumerate_node(set, t + 1, s2, &child, discounts);
                partial = partial
                    .iter()
                    .flat_map(|p| subs.iter().map(move |q| p.iter().zip(q).map(|(&x, &y)| x + y).collect()))
                    .collect();
            }
        }
        out.extend(partial);
    }
    out
}

/// Utilities and regrets of all reduced deterministic tree policies against each MDP.
///
/// Fails when more than `limit` policies exist.
pub fn pure_policy_payoffs<T: Real>(set: &MdpSet<T>, limit: usize) -> Result<PurePolicyPayoffs<T>> {
    if set.horizon() > MAX_TREE_HORIZON {
        return Err(Error::HorizonGuard { horizon: set.horizon(), max: MAX_TREE_HORIZON });
    }
    let count = count_pure_policies(set, limit);
    if count > limit {
        return Err(Error::Config(format!("more than {limit} deterministic tree policies")));
    }
    let discounts = set.get(0).discounts();
    let mut utilities: Vec<Vec<T>> = vec![vec![T::zero(); set.len()]];
    for (s, _) in roots(set) {
        let w: Vec<T> = set.mdps().iter().map(|m| m.initial()[s]).collect();
        let subs = enumerate_node(set, 0, s, &w, &discounts);
        utilities = utilities
            .iter()
            .flat_map(|p| subs.iter().map(move |q| p.iter().zip(q).map(|(&x, &y)| x + y).collect()))
            .collect();
    }
    let regrets = utilities
        .iter()
        .map(|u| set.optimal_utilities().iter().zip(u).map(|(&o, &v)| o - v).collect())
        .collect();
    Ok(PurePolicyPayoffs { utilities, regrets })
}
