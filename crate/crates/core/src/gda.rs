//! Stochastic gradient descent-ascent on the Bayesian regret `Ř(π, β)`.
//!
//! The policy descends, the prior ascends, both from the same iterate:
//! `π_t = π_{t−1} − η_π g_π`, `β_t = P(β_{t−1} + η_β g_β)`, with `P` the simplex
//! projection for finite beliefs and box clipping for Dirichlet parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beliefs::{clip_alpha, dirichlet_sample, dirichlet_score_clamped, simplex_project, BeliefVector, DirichletProductPrior};
use crate::error::{Error, Result};
use crate::mdp::{backward_induction, FiniteMdp, Policy};
use crate::policy::{utility_gradient, SoftmaxPartitionPolicy};
use crate::regret::{sample_index, MdpSet};

/// Iterates whose weights exceed this magnitude abort the run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefKind {
    Finite,
    Dirichlet,
}

/// How the finite-belief policy gradient is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyGradientMode {
    /// `−Σ_i β_i ∇U(π, μ_i)`.
    Exact,
    /// Average over `batch` MDPs drawn from `β`.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputRule {
    /// One of `(π_1, β_1), ..., (π_T, β_T)`, uniformly at random.
    UniformIterate,
    LastIterate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GdaConfig {
    pub eta_policy: f64,
    pub eta_belief: f64,
    pub batch: usize,
    pub iterations: usize,
    pub seed: u64,
    pub belief_kind: BeliefKind,
    pub policy_gradient: PolicyGradientMode,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub output: OutputRule,
    /// Samples drawn at the output iterate to estimate the per-sample gradient variance.
    pub variance_probe: usize,
}

impl Default for GdaConfig {
    fn default() -> Self {
        Self {
            eta_policy: 0.05,
            eta_belief: 0.01,
            batch: 16,
            iterations: 5000,
            seed: 0,
            belief_kind: BeliefKind::Finite,
            policy_gradient: PolicyGradientMode::Exact,
            alpha_min: crate::beliefs::ALPHA_MIN,
            alpha_max: crate::beliefs::ALPHA_MAX,
            output: OutputRule::UniformIterate,
            variance_probe: 32,
        }
    }
}

impl GdaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_policy >= 0.0 && self.eta_belief >= 0.0) || !self.eta_policy.is_finite() || !self.eta_belief.is_finite()
        {
            return Err(Error::Config("step sizes must be finite and nonnegative".into()));
        }
        if self.batch == 0 || self.iterations == 0 {
            return Err(Error::Config("batch and iterations must be at least 1".into()));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max) {
            return Err(Error::Config("need 0 < alpha_min <= alpha_max".into()));
        }
        Ok(())
    }
}

/// The prior player's variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GdaPrior {
    Finite { mdps: MdpSet<f64>, belief: BeliefVector<f64> },
    Dirichlet { prior: DirichletProductPrior<f64> },
}

impl GdaPrior {
    pub fn kind(&self) -> BeliefKind {
        match self {
            GdaPrior::Finite { .. } => BeliefKind::Finite,
            GdaPrior::Dirichlet { .. } => BeliefKind::Dirichlet,
        }
    }

    /// Belief weights or flattened Dirichlet parameters.
    pub fn params(&self) -> &[f64] {
        match self {
            GdaPrior::Finite { belief, .. } => belief.weights(),
            GdaPrior::Dirichlet { prior } => prior.alpha(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StochasticGradients {
    /// Descent direction input: `∇_π Ř = −E_β ∇_π U`.
    pub g_policy: Vec<f64>,
    /// `∇_β Ř`: exact regrets for finite beliefs, score-function estimate for Dirichlet.
    pub g_belief: Vec<f64>,
    /// `E‖G_π − ∇_π Ř‖²` estimate; `None` when it cannot be formed from one sample.
    pub var_policy: Option<f64>,
    pub var_belief: Option<f64>,
    /// Estimate of `Ř(π, β)`.
    pub bayes_regret: f64,
    /// Transition probabilities floored inside `ln μ`.
    pub clamped: usize,
}

fn regret_and_gradient(policy: &SoftmaxPartitionPolicy<f64>, mdp: &FiniteMdp<f64>, optimal: f64) -> Result<(f64, Vec<f64>)> {
    let u = policy.utility(mdp)?;
    Ok((optimal - u, utility_gradient(policy, mdp)?))
}

/// Per-component mean and `Σ_j Var_j / M` over rows.
fn mean_and_variance(rows: &[Vec<f64>]) -> (Vec<f64>, Option<f64>) {
    let m = rows.len();
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        mean.iter_mut().zip(r).for_each(|(a, &b)| *a += b / m as f64);
    }
    if m < 2 {
        return (mean, None);
    }
    let total: f64 = rows.iter().map(|r| r.iter().zip(&mean).map(|(&x, &mu)| (x - mu) * (x - mu)).sum::<f64>()).sum();
    (mean, Some(total / (m - 1) as f64 / m as f64))
}

/// Gradient estimates at `(policy, prior)` from `batch` i.i.d. samples.
///
/// Sample draws are sequential on `rng`; the per-sample work runs on the rayon
/// pool and is collected in draw order, so results do not depend on thread count.
pub fn stochastic_gradients<R: Rng + ?Sized>(
    policy: &SoftmaxPartitionPolicy<f64>,
    prior: &GdaPrior,
    batch: usize,
    mode: PolicyGradientMode,
    rng: &mut R,
) -> Result<StochasticGradients> {
    if batch == 0 {
        return Err(Error::Config("batch must be at least 1".into()));
    }
    match prior {
        GdaPrior::Finite { mdps, belief } => {
            let per_mdp: Vec<(f64, Vec<f64>)> = mdps
                .mdps()
                .par_iter()
                .zip(mdps.optimal_utilities().par_iter())
                .map(|(m, &o)| regret_and_gradient(policy, m, o))
                .collect::<Result<_>>()?;
            let g_belief: Vec<f64> = per_mdp.iter().map(|(r, _)| *r).collect();
            let bayes_regret = g_belief.iter().zip(belief.weights()).map(|(r, b)| r * b).sum();
            let (g_policy, var_policy) = match mode {
                PolicyGradientMode::Exact => {
                    let mut g = vec![0.0; policy.n_params()];
                    for ((_, grad), &b) in per_mdp.iter().zip(belief.weights()) {
                        g.iter_mut().zip(grad).for_each(|(x, &y)| *x -= b * y);
                    }
                    (g, Some(0.0))
                }
                PolicyGradientMode::Sampled => {
                    let rows: Vec<Vec<f64>> = (0..batch)
                        .map(|_| per_mdp[sample_index(belief.weights(), rng)].1.iter().map(|x| -x).collect())
                        .collect();
                    mean_and_variance(&rows)
                }
            };
            Ok(StochasticGradients { g_policy, g_belief, var_policy, var_belief: Some(0.0), bayes_regret, clamped: 0 })
        }
        GdaPrior::Dirichlet { prior } => {
            let samples: Vec<FiniteMdp<f64>> = (0..batch).map(|_| dirichlet_sample(prior, rng)).collect();
            let per: Vec<(f64, Vec<f64>, Vec<f64>, usize)> = samples
                .par_iter()
                .map(|m| {
                    let optimal = backward_induction(m).optimal_utility;
                    let (r, g) = regret_and_gradient(policy, m, optimal)?;
                    let (score, clamped) = dirichlet_score_clamped(prior, m)?;
                    Ok((r, g, score, clamped))
                })
                .collect::<Result<_>>()?;
            let total_r: f64 = per.iter().map(|p| p.0).sum();
            let bayes_regret = total_r / batch as f64;
            let belief_rows: Vec<Vec<f64>> = per
                .iter()
                .map(|(r, _, score, _)| {
                    // Leave-one-out mean as baseline keeps the estimator unbiased.
                    let baseline = if batch > 1 { (total_r - r) / (batch - 1) as f64 } else { 0.0 };
                    score.iter().map(|s| (r - baseline) * s).collect()
                })
                .collect();
            let policy_rows: Vec<Vec<f64>> = per.iter().map(|(_, g, _, _)| g.iter().map(|x| -x).collect()).collect();
            let (g_belief, var_belief) = mean_and_variance(&belief_rows);
            let (g_policy, var_policy) = mean_and_variance(&policy_rows);
            let clamped = per.iter().map(|p| p.3).sum();
            Ok(StochasticGradients { g_policy, g_belief, var_policy, var_belief, bayes_regret, clamped })
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// Estimated `Ř(π_{t−1}, β_{t−1})` at the point where gradients were taken.
    pub bayes_regret_est: f64,
    pub gpi_norm: f64,
    /// Norm of the projected-gradient mapping `(P(β + η g) − β)/η`; the raw norm if `η_β = 0`.
    pub gbeta_norm: f64,
    /// `β_{t−1}` (belief weights or Dirichlet parameters).
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GdaTrace {
    pub rows: Vec<TraceRow>,
}

impl GdaTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with columns `iter, bayes_regret_est, gpi_norm, gbeta_norm, beta_1, ..., beta_n`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let n = self.rows.first().map_or(0, |r| r.beta.len());
        let mut header = vec!["iter".to_string(), "bayes_regret_est".into(), "gpi_norm".into(), "gbeta_norm".into()];
        header.extend((1..=n).map(|i| format!("beta_{i}")));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.iter.to_string(), r.bayes_regret_est.to_string(), r.gpi_norm.to_string(), r.gbeta_norm.to_string()];
            rec.extend(r.beta.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceReport {
    /// Per-sample `E‖G − ∇Ř‖²` at the output iterate; divide by the batch size for the batch estimator.
    pub policy: Option<f64>,
    pub belief: Option<f64>,
    pub batch: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GdaOutput {
    pub policy: SoftmaxPartitionPolicy<f64>,
    pub prior: GdaPrior,
    /// 1-based index `t` of the returned iterate `(π_t, β_t)`.
    pub chosen_iteration: usize,
    pub trace: GdaTrace,
    pub variance: VarianceReport,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn step_prior(prior: &GdaPrior, g: &[f64], eta: f64, config: &GdaConfig) -> Result<GdaPrior> {
    Ok(match prior {
        GdaPrior::Finite { mdps, belief } => {
            let moved: Vec<f64> = belief.weights().iter().zip(g).map(|(b, g)| b + eta * g).collect();
            GdaPrior::Finite { mdps: mdps.clone(), belief: simplex_project(&moved) }
        }
        GdaPrior::Dirichlet { prior } => {
            let mut alpha: Vec<f64> = prior.alpha().iter().zip(g).map(|(a, g)| a + eta * g).collect();
            clip_alpha(&mut alpha, config.alpha_min, config.alpha_max);
            GdaPrior::Dirichlet { prior: prior.with_alpha(alpha)? }
        }
    })
}

/// Runs simultaneous gradient descent-ascent and returns the selected iterate with the full trace.
pub fn gda_run(config: &GdaConfig, init_policy: SoftmaxPartitionPolicy<f64>, init_prior: GdaPrior) -> Result<GdaOutput> {
    config.validate()?;
    if init_prior.kind() != config.belief_kind {
        return Err(Error::Config("initial prior does not match belief_kind".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // Separate stream for the output draw, so it does not perturb the gradient samples.
    let mut pick_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let chosen_iteration = match config.output {
        OutputRule::UniformIterate => pick_rng.random_range(1..=config.iterations),
        OutputRule::LastIterate => config.iterations,
    };
    let mut policy = init_policy;
    let mut prior = init_prior;
    let mut trace = GdaTrace { rows: Vec::with_capacity(config.iterations) };
    let mut chosen = None;
    for t in 1..=config.iterations {
        let g = stochastic_gradients(&policy, &prior, config.batch, config.policy_gradient, &mut rng)?;
        let new_weights: Vec<f64> =
            policy.weights().iter().zip(&g.g_policy).map(|(w, d)| w - config.eta_policy * d).collect();
        let new_prior = step_prior(&prior, &g.g_belief, config.eta_belief, config)?;
        let gbeta_norm = if config.eta_belief > 0.0 {
            let diff: Vec<f64> =
                new_prior.params().iter().zip(prior.params()).map(|(a, b)| (a - b) / config.eta_belief).collect();
            norm(&diff)
        } else {
            norm(&g.g_belief)
        };
        trace.rows.push(TraceRow {
            iter: t,
            bayes_regret_est: g.bayes_regret,
            gpi_norm: norm(&g.g_policy),
            gbeta_norm,
            beta: prior.params().to_vec(),
        });
        let worst = new_weights.iter().chain(new_prior.params()).fold(0.0f64, |m, x| m.max(x.abs()));
        if !(worst <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence { iteration: t, value: worst });
        }
        policy = policy.with_weights(new_weights)?;
        prior = new_prior;
        if t == chosen_iteration {
            chosen = Some((policy.clone(), prior.clone()));
        }
    }
    let (policy, prior) = chosen.expect("chosen iteration lies in 1..=iterations");
    let mut probe_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let variance = if config.variance_probe >= 2 {
        let g = stochastic_gradients(&policy, &prior, config.variance_probe, PolicyGradientMode::Sampled, &mut probe_rng)?;
        let scale = config.variance_probe as f64;
        VarianceReport { policy: g.var_policy.map(|v| v * scale), belief: g.var_belief.map(|v| v * scale), batch: config.batch }
    } else {
        VarianceReport { policy: None, belief: None, batch: config.batch }
    };
    Ok(GdaOutput { policy, prior, chosen_iteration, trace, variance })
}
