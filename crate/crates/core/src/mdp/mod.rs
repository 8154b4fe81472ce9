//! Finite-horizon tabular MDPs.
//!
//! States and actions are 0-indexed. Utility is `Σ_{t=1}^T γ^{t-1} r_t` and a
//! history `[s1, a1, s2, ..., st]` alternates states and actions, ending in the
//! current state.

mod generators;
mod policy;
mod solve;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use generators::{chain_mdp, chain_mdp_with, gen_random_mdp, gen_random_mdp_seeded, ChainParams};
pub use policy::{
    evaluate_policy, evaluate_tree_by_enumeration, HistoryPolicyTree, MarkovPolicy, MemorylessPolicy, Policy,
    MAX_TREE_HORIZON,
};
pub use solve::{backward_induction, BackwardInduction};
pub(crate) use policy::random_row;

/// Start state: a fixed index or a distribution `σ` over states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState<T> {
    State(usize),
    Distribution(Vec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMdp<T>", into = "RawMdp<T>", bound = "T: Real")]
pub struct FiniteMdp<T: Real> {
    n_states: usize,
    n_actions: usize,
    /// Row-major `[s][a][s']`.
    transition: Vec<T>,
    /// Row-major `[s][a]`.
    reward: Vec<T>,
    horizon: usize,
    discount: T,
    initial_state: InitialState<T>,
    initial: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawMdp<T: Real> {
    n_states: usize,
    n_actions: usize,
    transition: Vec<Vec<Vec<T>>>,
    reward: Vec<Vec<T>>,
    horizon: usize,
    discount: T,
    initial_state: InitialState<T>,
}

impl<T: Real> TryFrom<RawMdp<T>> for FiniteMdp<T> {
    type Error = Error;

    fn try_from(raw: RawMdp<T>) -> Result<Self> {
        let (s, a) = (raw.n_states, raw.n_actions);
        if raw.transition.len() != s || raw.transition.iter().any(|r| r.len() != a || r.iter().any(|p| p.len() != s)) {
            return Err(Error::InvalidMdp(format!("transition must have shape [{s}][{a}][{s}]")));
        }
        if raw.reward.len() != s || raw.reward.iter().any(|r| r.len() != a) {
            return Err(Error::InvalidMdp(format!("reward must have shape [{s}][{a}]")));
        }
        let transition = raw.transition.into_iter().flatten().flatten().collect();
        let reward = raw.reward.into_iter().flatten().collect();
        FiniteMdp::new(s, a, transition, reward, raw.horizon, raw.discount, raw.initial_state)
    }
}

impl<T: Real> From<FiniteMdp<T>> for RawMdp<T> {
    fn from(m: FiniteMdp<T>) -> Self {
        let (s, a) = (m.n_states, m.n_actions);
        let transition = (0..s).map(|i| (0..a).map(|j| m.p(i, j).to_vec()).collect()).collect();
        let reward = (0..s).map(|i| m.reward[i * a..(i + 1) * a].to_vec()).collect();
        RawMdp {
            n_states: s,
            n_actions: a,
            transition,
            reward,
            horizon: m.horizon,
            discount: m.discount,
            initial_state: m.initial_state,
        }
    }
}

fn check_distribution<T: Real>(row: &[T]) -> bool {
    let tol = T::tolerance();
    row.iter().all(|&p| p.is_finite() && p >= T::zero()) && (row.iter().copied().sum::<T>() - T::one()).abs() <= tol
}

impl<T: Real> FiniteMdp<T> {
    /// Builds and validates an MDP from flat row-major tables.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<T>,
        reward: Vec<T>,
        horizon: usize,
        discount: T,
        initial_state: InitialState<T>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidMdp("need at least one state and one action".into()));
        }
        if transition.len() != n_states * n_actions * n_states {
            return Err(Error::InvalidMdp("transition table has the wrong length".into()));
        }
        if reward.len() != n_states * n_actions {
            return Err(Error::InvalidMdp("reward table has the wrong length".into()));
        }
        for (k, row) in transition.chunks(n_states).enumerate() {
            if !check_distribution(row) {
                return Err(Error::InvalidMdp(format!(
                    "transition row (s={}, a={}) is not a probability distribution",
                    k / n_actions,
                    k % n_actions
                )));
            }
        }
        if reward.iter().any(|&r| !(r >= T::zero() && r <= T::one())) {
            return Err(Error::InvalidMdp("rewards must lie in [0, 1]".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidMdp("horizon must be at least 1".into()));
        }
        if !(discount > T::zero() && discount <= T::one()) {
            return Err(Error::InvalidMdp("discount must lie in (0, 1]".into()));
        }
        let initial = match &initial_state {
            InitialState::State(s0) => {
                if *s0 >= n_states {
                    return Err(Error::InvalidMdp(format!("initial state {s0} out of range")));
                }
                let mut v = vec![T::zero(); n_states];
                v[*s0] = T::one();
                v
            }
            InitialState::Distribution(d) => {
                if d.len() != n_states || !check_distribution(d) {
                    return Err(Error::InvalidMdp("initial distribution is invalid".into()));
                }
                d.clone()
            }
        };
        Ok(Self { n_states, n_actions, transition, reward, horizon, discount, initial_state, initial })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn discount(&self) -> T {
        self.discount
    }

    pub fn initial_state(&self) -> &InitialState<T> {
        &self.initial_state
    }

    /// Initial distribution `σ`.
    pub fn initial(&self) -> &[T] {
        &self.initial
    }

    /// Next-state distribution `P(·|s,a)`.
    #[inline]
    pub fn p(&self, s: usize, a: usize) -> &[T] {
        let n = self.n_states;
        let start = (s * self.n_actions + a) * n;
        &self.transition[start..start + n]
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> T {
        self.reward[s * self.n_actions + a]
    }

    pub fn transition_table(&self) -> &[T] {
        &self.transition
    }

    pub fn reward_table(&self) -> &[T] {
        &self.reward
    }

    pub fn with_horizon(mut self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidMdp("horizon must be at least 1".into()));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn with_discount(mut self, discount: T) -> Result<Self> {
        if !(discount > T::zero() && discount <= T::one()) {
            return Err(Error::InvalidMdp("discount must lie in (0, 1]".into()));
        }
        self.discount = discount;
        Ok(self)
    }

    pub fn with_reward(self, reward: Vec<T>) -> Result<Self> {
        Self::new(
            self.n_states,
            self.n_actions,
            self.transition,
            reward,
            self.horizon,
            self.discount,
            self.initial_state,
        )
    }

    /// `Σ_{t=1}^T γ^{t-1}`, the largest attainable utility.
    pub fn max_utility(&self) -> T {
        let mut g = T::one();
        let mut total = T::zero();
        for _ in 0..self.horizon {
            total += g;
            g *= self.discount;
        }
        total
    }

    /// Same shape, horizon, discount and start distribution.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_states == other.n_states
            && self.n_actions == other.n_actions
            && self.horizon == other.horizon
            && self.discount == other.discount
            && self.initial == other.initial
    }

    /// Converts to another precision, renormalising rows.
    pub fn cast<U: Real>(&self) -> FiniteMdp<U> {
        let conv = |x: T| U::lit(x.to_f64_lossy());
        let mut transition: Vec<U> = self.transition.iter().map(|&x| conv(x)).collect();
        for row in transition.chunks_mut(self.n_states) {
            let z: U = row.iter().copied().sum();
            row.iter_mut().for_each(|x| *x /= z);
        }
        let initial_state = match &self.initial_state {
            InitialState::State(s) => InitialState::State(*s),
            InitialState::Distribution(d) => {
                let mut v: Vec<U> = d.iter().map(|&x| conv(x)).collect();
                let z: U = v.iter().copied().sum();
                v.iter_mut().for_each(|x| *x /= z);
                InitialState::Distribution(v)
            }
        };
        FiniteMdp::new(
            self.n_states,
            self.n_actions,
            transition,
            self.reward.iter().map(|&x| conv(x)).collect(),
            self.horizon,
            conv(self.discount),
            initial_state,
        )
        .expect("cast of a valid MDP is valid")
    }

    pub(crate) fn discounts(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.horizon);
        let mut g = T::one();
        for _ in 0..self.horizon {
            out.push(g);
            g *= self.discount;
        }
        out
    }
}
