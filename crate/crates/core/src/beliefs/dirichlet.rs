use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::special::{digamma, ln_gamma};
use crate::error::{Error, Result};
use crate::mdp::{FiniteMdp, InitialState};
use crate::scalar::Real;

/// Default clip box for Dirichlet parameters after a gradient step.
pub const ALPHA_MIN: f64 = 0.01;
pub const ALPHA_MAX: f64 = 100.0;
/// Floor applied to `μ` inside `ln μ` by [`dirichlet_score_clamped`].
pub const SCORE_LOG_FLOOR: f64 = 1e-12;

/// Independent `Beta(α, β)` reward means, one per `(s, a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BetaRewardPrior<T: Real> {
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
}

impl<T: Real> BetaRewardPrior<T> {
    /// From mean `p` and concentration `n`: `α = p·n`, `β = n·(1−p)`.
    pub fn from_mean_count(p: &[T], n: &[T]) -> Result<Self> {
        if p.len() != n.len() {
            return Err(Error::InvalidPrior("p and n differ in length".into()));
        }
        if p.iter().any(|&x| !(x > T::zero() && x < T::one())) || n.iter().any(|&x| !(x > T::zero())) {
            return Err(Error::InvalidPrior("need p in (0,1) and n > 0".into()));
        }
        let alpha = p.iter().zip(n).map(|(&p, &n)| p * n).collect();
        let beta = p.iter().zip(n).map(|(&p, &n)| n * (T::one() - p)).collect();
        Ok(Self { alpha, beta })
    }

    pub fn mean(&self) -> Vec<T> {
        self.alpha.iter().zip(&self.beta).map(|(&a, &b)| a / (a + b)).collect()
    }

    pub fn count(&self) -> Vec<T> {
        self.alpha.iter().zip(&self.beta).map(|(&a, &b)| a + b).collect()
    }
}

/// Product of independent Dirichlet priors over the rows `P(·|s,a)`.
///
/// Rewards are the fixed `reward` table unless a Beta reward prior is attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPrior<T>", into = "RawPrior<T>", bound = "T: Real")]
pub struct DirichletProductPrior<T: Real> {
    n_states: usize,
    n_actions: usize,
    alpha: Vec<T>,
    reward: Vec<T>,
    reward_prior: Option<BetaRewardPrior<T>>,
    horizon: usize,
    discount: T,
    initial_state: InitialState<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawPrior<T: Real> {
    alpha: Vec<Vec<Vec<T>>>,
    reward: Vec<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reward_prior: Option<RawRewardPrior<T>>,
    horizon: usize,
    discount: T,
    initial_state: InitialState<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawRewardPrior<T: Real> {
    alpha: Vec<Vec<T>>,
    beta: Vec<Vec<T>>,
}

impl<T: Real> TryFrom<RawPrior<T>> for DirichletProductPrior<T> {
    type Error = Error;

    fn try_from(raw: RawPrior<T>) -> Result<Self> {
        let n_states = raw.alpha.len();
        let n_actions = raw.alpha.first().map_or(0, Vec::len);
        if raw.alpha.iter().any(|r| r.len() != n_actions || r.iter().any(|row| row.len() != n_states)) {
            return Err(Error::InvalidPrior("alpha must have shape [S][A][S]".into()));
        }
        if raw.reward.len() != n_states || raw.reward.iter().any(|r| r.len() != n_actions) {
            return Err(Error::InvalidPrior("reward must have shape [S][A]".into()));
        }
        let reward_prior = raw.reward_prior.map(|rp| BetaRewardPrior {
            alpha: rp.alpha.into_iter().flatten().collect(),
            beta: rp.beta.into_iter().flatten().collect(),
        });
        let mut prior = Self::new(
            n_states,
            n_actions,
            raw.alpha.into_iter().flatten().flatten().collect(),
            raw.reward.into_iter().flatten().collect(),
            raw.horizon,
            raw.discount,
            raw.initial_state,
        )?;
        if let Some(rp) = reward_prior {
            prior = prior.with_reward_prior(rp)?;
        }
        Ok(prior)
    }
}

impl<T: Real> From<DirichletProductPrior<T>> for RawPrior<T> {
    fn from(p: DirichletProductPrior<T>) -> Self {
        let (s, a) = (p.n_states, p.n_actions);
        let nest2 = |v: &[T]| -> Vec<Vec<T>> { v.chunks(a).map(<[T]>::to_vec).collect() };
        RawPrior {
            alpha: (0..s).map(|i| (0..a).map(|j| p.alpha_row(i, j).to_vec()).collect()).collect(),
            reward: nest2(&p.reward),
            reward_prior: p
                .reward_prior
                .as_ref()
                .map(|rp| RawRewardPrior { alpha: nest2(&rp.alpha), beta: nest2(&rp.beta) }),
            horizon: p.horizon,
            discount: p.discount,
            initial_state: p.initial_state,
        }
    }
}

impl<T: Real> DirichletProductPrior<T> {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        alpha: Vec<T>,
        reward: Vec<T>,
        horizon: usize,
        discount: T,
        initial_state: InitialState<T>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 || alpha.len() != n_states * n_actions * n_states {
            return Err(Error::InvalidPrior("alpha table has the wrong shape".into()));
        }
        if alpha.iter().any(|&x| !(x > T::zero()) || !x.is_finite()) {
            return Err(Error::InvalidPrior("all alpha must be positive and finite".into()));
        }
        // Reuse MDP validation for reward, horizon, discount and start state.
        let probe = vec![T::one() / T::lit(n_states as f64); n_states * n_actions * n_states];
        FiniteMdp::new(n_states, n_actions, probe, reward.clone(), horizon, discount, initial_state.clone())
            .map_err(|e| Error::InvalidPrior(e.to_string()))?;
        Ok(Self { n_states, n_actions, alpha, reward, reward_prior: None, horizon, discount, initial_state })
    }

    /// Every entry of `α` equal to `value`.
    pub fn symmetric(
        n_states: usize,
        n_actions: usize,
        value: T,
        reward: Vec<T>,
        horizon: usize,
        discount: T,
        initial_state: InitialState<T>,
    ) -> Result<Self> {
        let alpha = vec![value; n_states * n_actions * n_states];
        Self::new(n_states, n_actions, alpha, reward, horizon, discount, initial_state)
    }

    pub fn with_reward_prior(mut self, rp: BetaRewardPrior<T>) -> Result<Self> {
        let n = self.n_states * self.n_actions;
        if rp.alpha.len() != n || rp.beta.len() != n {
            return Err(Error::InvalidPrior("reward prior must have one entry per (s, a)".into()));
        }
        if rp.alpha.iter().chain(&rp.beta).any(|&x| !(x > T::zero()) || !x.is_finite()) {
            return Err(Error::InvalidPrior("reward prior parameters must be positive".into()));
        }
        self.reward_prior = Some(rp);
        Ok(self)
    }

    /// Same prior with a new `α` table (validated).
    pub fn with_alpha(&self, alpha: Vec<T>) -> Result<Self> {
        if alpha.len() != self.alpha.len() {
            return Err(Error::InvalidPrior("alpha table has the wrong length".into()));
        }
        if alpha.iter().any(|&x| !(x > T::zero()) || !x.is_finite()) {
            return Err(Error::InvalidPrior("all alpha must be positive and finite".into()));
        }
        Ok(Self { alpha, ..self.clone() })
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

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn reward(&self) -> &[T] {
        &self.reward
    }

    pub fn reward_prior(&self) -> Option<&BetaRewardPrior<T>> {
        self.reward_prior.as_ref()
    }

    pub fn initial_state(&self) -> &InitialState<T> {
        &self.initial_state
    }

    pub fn alpha_row(&self, s: usize, a: usize) -> &[T] {
        let n = self.n_states;
        &self.alpha[(s * self.n_actions + a) * n..(s * self.n_actions + a + 1) * n]
    }

    /// Interpolates `α` (and nothing else) linearly: `λ·self + (1−λ)·other`.
    pub fn interpolate(&self, other: &Self, lambda: T) -> Result<Self> {
        let alpha = self.alpha.iter().zip(&other.alpha).map(|(&a, &b)| lambda * a + (T::one() - lambda) * b).collect();
        self.with_alpha(alpha)
    }
}

/// Draws a row from `Dirichlet(alpha)` in log space, so tiny `α` does not underflow to 0/0.
fn sample_dirichlet_row<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    // ln G = ln Gamma(α+1) + ln(U)/α with G ~ Gamma(α).
    let logs: Vec<f64> = alpha
        .iter()
        .map(|&a| {
            let g: f64 = Gamma::new(a + 1.0, 1.0).expect("positive shape").sample(rng);
            let u: f64 = 1.0 - rng.random::<f64>();
            g.ln() + u.ln() / a
        })
        .collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut row: Vec<f64> = logs.iter().map(|&l| (l - m).exp()).collect();
    let z: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= z);
    row
}

/// Samples an MDP: each row `P(·|s,a)` independently from its Dirichlet, and
/// rewards from the Beta prior when present.
pub fn dirichlet_sample<T: Real, R: Rng + ?Sized>(prior: &DirichletProductPrior<T>, rng: &mut R) -> FiniteMdp<T> {
    let n = prior.n_states;
    let mut transition = Vec::with_capacity(prior.alpha.len());
    let mut alpha_row = vec![0.0; n];
    for row in prior.alpha.chunks(n) {
        alpha_row.iter_mut().zip(row).for_each(|(d, &a)| *d = a.to_f64_lossy());
        transition.extend(sample_dirichlet_row(&alpha_row, rng).into_iter().map(T::lit));
    }
    let reward = match &prior.reward_prior {
        None => prior.reward.clone(),
        Some(rp) => rp
            .alpha
            .iter()
            .zip(&rp.beta)
            .map(|(&a, &b)| {
                let d = Beta::new(a.to_f64_lossy(), b.to_f64_lossy()).expect("positive parameters");
                T::lit(d.sample(rng))
            })
            .collect(),
    };
    FiniteMdp::new(
        n,
        prior.n_actions,
        transition,
        reward,
        prior.horizon,
        prior.discount,
        prior.initial_state.clone(),
    )
    .expect("sampled MDP is valid")
}

fn check_shape<T: Real>(prior: &DirichletProductPrior<T>, mdp: &FiniteMdp<T>) -> Result<()> {
    if prior.n_states != mdp.n_states() || prior.n_actions != mdp.n_actions() {
        return Err(Error::InvalidPrior("prior and MDP shapes differ".into()));
    }
    Ok(())
}

fn score_impl<T: Real>(
    prior: &DirichletProductPrior<T>,
    mdp: &FiniteMdp<T>,
    floor: Option<T>,
) -> Result<(Vec<T>, usize)> {
    check_shape(prior, mdp)?;
    let n = prior.n_states;
    let mut out = Vec::with_capacity(prior.alpha.len());
    let mut clamped = 0;
    for (row_idx, (alpha, mu)) in prior.alpha.chunks(n).zip(mdp.transition_table().chunks(n)).enumerate() {
        let total: T = alpha.iter().copied().sum();
        let psi_total = digamma(total);
        for (i, (&a, &m)) in alpha.iter().zip(mu).enumerate() {
            let m = match floor {
                Some(f) if m < f => {
                    clamped += 1;
                    f
                }
                None if m <= T::zero() => {
                    return Err(Error::Domain(format!(
                        "zero transition probability at (s={}, a={}, s'={i}) has no Dirichlet score",
                        row_idx / prior.n_actions,
                        row_idx % prior.n_actions
                    )))
                }
                _ => m,
            };
            out.push(psi_total - digamma(a) + m.ln());
        }
    }
    Ok((out, clamped))
}

/// `∂ ln β(μ) / ∂α_{s,a,i} = ψ(Σ_j α_{s,a,j}) − ψ(α_{s,a,i}) + ln μ_{s,a,i}`.
pub fn dirichlet_score<T: Real>(prior: &DirichletProductPrior<T>, mdp: &FiniteMdp<T>) -> Result<Vec<T>> {
    score_impl(prior, mdp, None).map(|(s, _)| s)
}

/// Score with `ln μ` floored at [`SCORE_LOG_FLOOR`]; also returns how many entries were clamped.
pub fn dirichlet_score_clamped<T: Real>(
    prior: &DirichletProductPrior<T>,
    mdp: &FiniteMdp<T>,
) -> Result<(Vec<T>, usize)> {
    score_impl(prior, mdp, Some(T::lit(SCORE_LOG_FLOOR)))
}

/// `ln β(μ)`: Dirichlet log densities of every row, plus the Beta reward terms if present.
pub fn log_density<T: Real>(prior: &DirichletProductPrior<T>, mdp: &FiniteMdp<T>) -> Result<T> {
    check_shape(prior, mdp)?;
    let n = prior.n_states;
    let mut total = T::zero();
    for (alpha, mu) in prior.alpha.chunks(n).zip(mdp.transition_table().chunks(n)) {
        let sum: T = alpha.iter().copied().sum();
        total += ln_gamma(sum);
        for (&a, &m) in alpha.iter().zip(mu) {
            total += (a - T::one()) * m.ln() - ln_gamma(a);
        }
    }
    if let Some(rp) = &prior.reward_prior {
        for ((&a, &b), &r) in rp.alpha.iter().zip(&rp.beta).zip(mdp.reward_table()) {
            total += ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + (a - T::one()) * r.ln() + (b - T::one()) * (T::one() - r).ln();
        }
    }
    Ok(total)
}

/// Score of the Beta reward prior, per `(s, a)`, in both parametrisations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BetaRewardScore<T: Real> {
    pub d_alpha: Vec<T>,
    pub d_beta: Vec<T>,
    /// Gradient in the mean/count form `α = p·n`, `β = n·(1−p)`.
    pub d_p: Vec<T>,
    pub d_n: Vec<T>,
}

pub fn beta_reward_score<T: Real>(prior: &DirichletProductPrior<T>, mdp: &FiniteMdp<T>) -> Result<BetaRewardScore<T>> {
    check_shape(prior, mdp)?;
    let rp = prior
        .reward_prior
        .as_ref()
        .ok_or_else(|| Error::InvalidPrior("prior has no reward component".into()))?;
    let k = rp.alpha.len();
    let mut out = BetaRewardScore {
        d_alpha: Vec::with_capacity(k),
        d_beta: Vec::with_capacity(k),
        d_p: Vec::with_capacity(k),
        d_n: Vec::with_capacity(k),
    };
    for ((&a, &b), &r) in rp.alpha.iter().zip(&rp.beta).zip(mdp.reward_table()) {
        if !(r > T::zero() && r < T::one()) {
            return Err(Error::Domain(format!("reward {r} must lie strictly inside (0, 1)")));
        }
        let (psi_a, psi_b, psi_ab) = (digamma(a), digamma(b), digamma(a + b));
        let (p, n) = (a / (a + b), a + b);
        let log_odds_term = -psi_a + psi_b + (r / (T::one() - r)).ln();
        out.d_alpha.push(psi_ab - psi_a + r.ln());
        out.d_beta.push(psi_ab - psi_b + (T::one() - r).ln());
        out.d_p.push(n * log_odds_term);
        out.d_n.push(p * log_odds_term + psi_ab - psi_b + (T::one() - r).ln());
    }
    Ok(out)
}

/// Componentwise projection of `α` onto `[min, max]`.
pub fn clip_alpha<T: Real>(alpha: &mut [T], min: T, max: T) {
    alpha.iter_mut().for_each(|a| *a = a.max(min).min(max));
}
