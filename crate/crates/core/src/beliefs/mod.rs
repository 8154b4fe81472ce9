//! Priors over MDPs: finite simplex beliefs and Dirichlet-product priors.

mod dirichlet;
mod special;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use dirichlet::{
    beta_reward_score, clip_alpha, dirichlet_sample, dirichlet_score, dirichlet_score_clamped, log_density,
    BetaRewardPrior, BetaRewardScore, DirichletProductPrior, ALPHA_MAX, ALPHA_MIN, SCORE_LOG_FLOOR,
};
pub use special::{digamma, ln_gamma};

/// Probability vector over a finite MDP set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>", bound = "T: Real")]
pub struct BeliefVector<T: Real> {
    weights: Vec<T>,
}

impl<T: Real> TryFrom<Vec<T>> for BeliefVector<T> {
    type Error = Error;

    fn try_from(weights: Vec<T>) -> Result<Self> {
        Self::new(weights)
    }
}

impl<T: Real> From<BeliefVector<T>> for Vec<T> {
    fn from(b: BeliefVector<T>) -> Self {
        b.weights
    }
}

impl<T: Real> BeliefVector<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidBelief("belief must be nonempty".into()));
        }
        if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidBelief("weights must be finite and nonnegative".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::tolerance() {
            return Err(Error::InvalidBelief(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![T::one() / T::lit(n as f64); n] }
    }

    pub fn dirac(n: usize, i: usize) -> Self {
        let mut weights = vec![T::zero(); n];
        weights[i] = T::one();
        Self { weights }
    }

    /// Uniform draw from the simplex.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self { weights: crate::mdp::random_row(n, rng) }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `λ·self + (1−λ)·other`.
    pub fn mix(&self, other: &Self, lambda: T) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::InvalidBelief("beliefs have different lengths".into()));
        }
        let w = self.weights.iter().zip(&other.weights).map(|(&a, &b)| lambda * a + (T::one() - lambda) * b);
        Ok(Self { weights: w.collect() })
    }
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
///
/// Panics on non-finite input.
pub fn simplex_project<T: Real>(v: &[T]) -> BeliefVector<T> {
    assert!(!v.is_empty() && v.iter().all(|x| x.is_finite()), "simplex_project needs finite input");
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut css = T::zero();
    let mut theta = T::zero();
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - T::one()) / T::lit((j + 1) as f64);
        if uj - t > T::zero() {
            theta = t;
        }
    }
    let mut weights: Vec<T> = v.iter().map(|&x| (x - theta).max(T::zero())).collect();
    let total: T = weights.iter().copied().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    BeliefVector { weights }
}

/// Regular grid on the simplex with spacing `1/resolution`, in lexicographic order.
pub fn simplex_grid<T: Real>(n: usize, resolution: usize) -> Vec<BeliefVector<T>> {
    fn rec<T: Real>(prefix: &mut Vec<usize>, n: usize, left: usize, res: usize, out: &mut Vec<BeliefVector<T>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            let w = prefix.iter().map(|&k| T::lit(k as f64) / T::lit(res as f64)).collect();
            out.push(BeliefVector { weights: w });
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(prefix, n, left - k, res, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, resolution, resolution, &mut out);
    out
}
