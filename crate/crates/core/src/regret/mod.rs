//! Bayes-optimal policies over finite MDP sets and the three regret notions.
//!
//! For a policy `π`, an MDP `μ` and a belief `β` over a finite set:
//! - regret `R(π, μ) = U*(μ) − U(π, μ)`,
//! - Bayes-optimal regret `R(π, β) = U*(β) − U(π, β)`,
//! - Bayesian regret `Ř(π, β) = Σ_i β_i R(π, μ_i)`.

mod bayes_optimal;
mod psrl;
mod pure;

use serde::{Deserialize, Serialize};

use crate::beliefs::BeliefVector;
use crate::error::{Error, Result};
use crate::mdp::{backward_induction, FiniteMdp, Policy};
use crate::scalar::{argmax_lowest, Real};

pub use bayes_optimal::{bayes_optimal_tree, bayes_optimal_value, BayesOptimal};
pub use psrl::{psrl_evaluate, psrl_mixture_policy, McEstimate, PsrlConfig};
pub(crate) use psrl::sample_index;
pub use pure::{count_pure_policies, pure_policy_payoffs, PurePolicyPayoffs, PURE_POLICY_LIMIT};

/// A finite set of MDPs sharing states, actions, horizon, discount and start distribution,
/// with their optimal utilities `U*(μ_i)` cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FiniteMdp<T>>", into = "Vec<FiniteMdp<T>>", bound = "T: Real")]
pub struct MdpSet<T: Real> {
    mdps: Vec<FiniteMdp<T>>,
    optimal: Vec<T>,
}

impl<T: Real> TryFrom<Vec<FiniteMdp<T>>> for MdpSet<T> {
    type Error = Error;

    fn try_from(mdps: Vec<FiniteMdp<T>>) -> Result<Self> {
        Self::new(mdps)
    }
}

impl<T: Real> From<MdpSet<T>> for Vec<FiniteMdp<T>> {
    fn from(set: MdpSet<T>) -> Self {
        set.mdps
    }
}

impl<T: Real> MdpSet<T> {
    pub fn new(mdps: Vec<FiniteMdp<T>>) -> Result<Self> {
        let first = mdps.first().ok_or_else(|| Error::InvalidMdp("MDP set is empty".into()))?;
        if let Some(i) = mdps.iter().position(|m| !m.same_shape(first)) {
            return Err(Error::InvalidMdp(format!(
                "MDP {i} differs from MDP 0 in shape, horizon, discount or start distribution"
            )));
        }
        let optimal = mdps.iter().map(|m| backward_induction(m).optimal_utility).collect();
        Ok(Self { mdps, optimal })
    }

    pub fn len(&self) -> usize {
        self.mdps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mdps.is_empty()
    }

    pub fn mdps(&self) -> &[FiniteMdp<T>] {
        &self.mdps
    }

    pub fn get(&self, i: usize) -> &FiniteMdp<T> {
        &self.mdps[i]
    }

    /// `U*(μ_i)` for each member.
    pub fn optimal_utilities(&self) -> &[T] {
        &self.optimal
    }

    pub fn n_states(&self) -> usize {
        self.mdps[0].n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.mdps[0].n_actions()
    }

    pub fn horizon(&self) -> usize {
        self.mdps[0].horizon()
    }

    pub fn utilities<P: Policy<T> + ?Sized>(&self, policy: &P) -> Result<Vec<T>> {
        self.mdps.iter().map(|m| policy.utility(m)).collect()
    }

    /// `R(π, μ_i)` for each member; the gradient of `Ř(π, ·)` in `β`.
    pub fn regrets<P: Policy<T> + ?Sized>(&self, policy: &P) -> Result<Vec<T>> {
        let u = self.utilities(policy)?;
        Ok(self.optimal.iter().zip(u).map(|(&o, v)| o - v).collect())
    }

    fn check_belief(&self, belief: &BeliefVector<T>) -> Result<()> {
        if belief.len() != self.len() {
            return Err(Error::InvalidBelief(format!(
                "belief has {} entries for {} MDPs",
                belief.len(),
                self.len()
            )));
        }
        Ok(())
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// `R(π, μ) = U*(μ) − U(π, μ)`.
pub fn regret<T: Real, P: Policy<T> + ?Sized>(policy: &P, mdp: &FiniteMdp<T>) -> Result<T> {
    Ok(backward_induction(mdp).optimal_utility - policy.utility(mdp)?)
}

/// `R(π, β) = U*(β) − U(π, β)`.
pub fn bayes_optimal_regret<T: Real, P: Policy<T> + ?Sized>(
    policy: &P,
    set: &MdpSet<T>,
    belief: &BeliefVector<T>,
) -> Result<T> {
    set.check_belief(belief)?;
    let u = set.utilities(policy)?;
    Ok(bayes_optimal_value(set, belief)? - dot(belief.weights(), &u))
}

/// `Ř(π, β) = Σ_i β_i R(π, μ_i)`.
pub fn bayesian_regret<T: Real, P: Policy<T> + ?Sized>(
    policy: &P,
    set: &MdpSet<T>,
    belief: &BeliefVector<T>,
) -> Result<T> {
    set.check_belief(belief)?;
    Ok(dot(belief.weights(), &set.regrets(policy)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RegretReport<T: Real> {
    /// Worst-case regret `max_i R(π, μ_i)`.
    pub regret: T,
    pub bayes_optimal_regret: T,
    pub bayesian_regret: T,
    /// Index of the MDP attaining `regret` (lowest on ties).
    pub argmax_mdp: usize,
}

pub fn regret_report<T: Real, P: Policy<T> + ?Sized>(
    policy: &P,
    set: &MdpSet<T>,
    belief: &BeliefVector<T>,
) -> Result<RegretReport<T>> {
    set.check_belief(belief)?;
    let u = set.utilities(policy)?;
    let regrets: Vec<T> = set.optimal.iter().zip(&u).map(|(&o, &v)| o - v).collect();
    let argmax_mdp = argmax_lowest(&regrets);
    Ok(RegretReport {
        regret: regrets[argmax_mdp],
        bayes_optimal_regret: bayes_optimal_value(set, belief)? - dot(belief.weights(), &u),
        bayesian_regret: dot(belief.weights(), &regrets),
        argmax_mdp,
    })
}
