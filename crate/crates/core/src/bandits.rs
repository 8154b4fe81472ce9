//! Bernoulli bandits with independent Beta priors, Gittins-index play and
//! Bayesian-regret surfaces over the prior.
//!
//! Indices are computed by calibration against a retirement option paying `λ` per
//! step. For a fixed `λ`, one backward pass over the truncated posterior lattice
//! decides continue-versus-retire at every state simultaneously, so the table is
//! built from a sweep over a `λ` grid. Each state's index is the root of
//! `Q_continue(λ) − λ/(1−γ)`, located by linear interpolation inside the bracketing
//! grid cell.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::regret::McEstimate;

/// Independent `Beta(a_k, b_k)` priors on the arm means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaProductPrior {
    arms: Vec<(f64, f64)>,
}

impl BetaProductPrior {
    pub fn new(arms: Vec<(f64, f64)>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidPrior("bandit prior needs at least one arm".into()));
        }
        if arms.iter().any(|&(a, b)| !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite())) {
            return Err(Error::InvalidPrior("Beta parameters must be positive and finite".into()));
        }
        Ok(Self { arms })
    }

    pub fn symmetric(k: usize, a: f64) -> Result<Self> {
        Self::new(vec![(a, a); k])
    }

    pub fn arms(&self) -> &[(f64, f64)] {
        &self.arms
    }

    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.arms.iter().map(|&(a, b)| Beta::new(a, b).expect("validated parameters").sample(rng)).collect()
    }
}

/// Number of `λ` grid cells used to bracket each index.
pub const LAMBDA_GRID: usize = 1000;

/// Gittins indices for one arm with base prior `Beta(a0, b0)` at every posterior
/// `Beta(a0 + s, b0 + f)` with `s + f ≤ n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GittinsTable {
    gamma: f64,
    n_max: usize,
    a0: f64,
    b0: f64,
    /// `indices[n][s]` for depth `n = s + f`.
    indices: Vec<Vec<f64>>,
    truncation_error: f64,
}

impl GittinsTable {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn prior(&self) -> (f64, f64) {
        (self.a0, self.b0)
    }

    /// Bound `γ^{n_max}/(1−γ)` on the value error from cutting the lattice at depth `n_max`.
    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    /// Index after `successes` and `failures`; the posterior mean beyond the table.
    pub fn index(&self, successes: usize, failures: usize) -> f64 {
        let n = successes + failures;
        if n <= self.n_max {
            self.indices[n][successes]
        } else {
            (self.a0 + successes as f64) / (self.a0 + self.b0 + n as f64)
        }
    }
}

/// Table over the integer lattice `a, b ≥ 1` (base prior `Beta(1, 1)`).
pub fn gittins_table(gamma: f64, n_max: usize) -> Result<GittinsTable> {
    gittins_table_for(1.0, 1.0, gamma, n_max)
}

pub fn gittins_table_for(a0: f64, b0: f64, gamma: f64, n_max: usize) -> Result<GittinsTable> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!("discount must lie in (0, 1), got {gamma}")));
    }
    if n_max < 2 {
        return Err(Error::Config("n_max must be at least 2".into()));
    }
    if !(a0 > 0.0 && b0 > 0.0) {
        return Err(Error::InvalidPrior("Beta parameters must be positive".into()));
    }
    let mean = |n: usize, s: usize| (a0 + s as f64) / (a0 + b0 + n as f64);
    let scale = 1.0 / (1.0 - gamma);
    // Per state: largest grid λ with continue strictly better, with its margin, and
    // the margin at the next grid point.
    let size = (n_max + 1) * (n_max + 2) / 2;
    let offset = |n: usize| n * (n + 1) / 2;
    let mut last_pos = vec![(0usize, 0.0f64); size];
    let mut first_neg = vec![None::<f64>; size];
    let mut next = vec![0.0; n_max + 1];
    let mut cur = vec![0.0; n_max + 1];
    for k in 0..=LAMBDA_GRID {
        let lambda = k as f64 / LAMBDA_GRID as f64;
        let retire = lambda * scale;
        for s in 0..=n_max {
            next[s] = mean(n_max, s).max(lambda) * scale;
        }
        for n in (0..n_max).rev() {
            for s in 0..=n {
                let p = mean(n, s);
                let q = p + gamma * (p * next[s + 1] + (1.0 - p) * next[s]);
                let d = q - retire;
                let id = offset(n) + s;
                if d > 0.0 {
                    last_pos[id] = (k, d);
                } else if first_neg[id].is_none() {
                    first_neg[id] = Some(d);
                }
                cur[s] = q.max(retire);
            }
            std::mem::swap(&mut cur, &mut next);
        }
    }
    let mut indices: Vec<Vec<f64>> = (0..=n_max).map(|n| vec![0.0; n + 1]).collect();
    for n in 0..=n_max {
        for s in 0..=n {
            if n == n_max {
                indices[n][s] = mean(n, s);
                continue;
            }
            let id = offset(n) + s;
            let (k, d_pos) = last_pos[id];
            let lo = k as f64 / LAMBDA_GRID as f64;
            indices[n][s] = match first_neg[id] {
                Some(d_neg) if k < LAMBDA_GRID => {
                    let h = 1.0 / LAMBDA_GRID as f64;
                    let t = if d_pos > d_neg { d_pos / (d_pos - d_neg) } else { 0.0 };
                    (lo + t * h).clamp(0.0, 1.0)
                }
                _ => lo,
            };
        }
    }
    Ok(GittinsTable { gamma, n_max, a0, b0, indices, truncation_error: gamma.powi(n_max as i32) * scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmRule {
    Gittins,
    /// Posterior mean.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BanditMcConfig {
    pub n_mc: usize,
    pub horizon_trunc: usize,
    /// Lattice depth of the index tables.
    pub n_max: usize,
}

impl Default for BanditMcConfig {
    fn default() -> Self {
        Self { n_mc: 10_000, horizon_trunc: 200, n_max: 200 }
    }
}

/// Index tables for each arm of `prior`, sharing tables between identical arms.
pub fn prior_tables(prior: &BetaProductPrior, gamma: f64, n_max: usize) -> Result<Vec<GittinsTable>> {
    let mut built: Vec<GittinsTable> = Vec::new();
    let mut out = Vec::with_capacity(prior.n_arms());
    for &(a, b) in prior.arms() {
        match built.iter().find(|t| t.prior() == (a, b)) {
            Some(t) => out.push(t.clone()),
            None => {
                let t = gittins_table_for(a, b, gamma, n_max)?;
                built.push(t.clone());
                out.push(t);
            }
        }
    }
    Ok(out)
}

/// One replication: `(max_k θ_k)(1−γ^H)/(1−γ) − Σ_{t<H} γ^t r_t`.
fn regret_sample<R: Rng + ?Sized>(
    prior: &BetaProductPrior,
    tables: &[GittinsTable],
    rule: ArmRule,
    gamma: f64,
    horizon: usize,
    rng: &mut R,
) -> f64 {
    let theta = prior.sample(rng);
    let k = theta.len();
    let mut succ = vec![0usize; k];
    let mut fail = vec![0usize; k];
    let mut reward = 0.0;
    let mut disc = 1.0;
    for _ in 0..horizon {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for arm in 0..k {
            let v = match rule {
                ArmRule::Gittins => tables[arm].index(succ[arm], fail[arm]),
                ArmRule::Greedy => {
                    let (a, b) = prior.arms()[arm];
                    (a + succ[arm] as f64) / (a + b + (succ[arm] + fail[arm]) as f64)
                }
            };
            if v > best_v {
                best_v = v;
                best = arm;
            }
        }
        if rng.random::<f64>() < theta[best] {
            reward += disc;
            succ[best] += 1;
        } else {
            fail[best] += 1;
        }
        disc *= gamma;
    }
    let best_mean = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    best_mean * (1.0 - gamma.powi(horizon as i32)) / (1.0 - gamma) - reward
}

/// Monte Carlo Bayesian regret of an index rule under `prior`.
///
/// Replication `i` uses its own ChaCha stream keyed by a base seed drawn from `rng`,
/// so the estimate does not depend on the thread count.
pub fn bandit_regret<R: Rng + ?Sized>(
    prior: &BetaProductPrior,
    rule: ArmRule,
    gamma: f64,
    cfg: &BanditMcConfig,
    rng: &mut R,
) -> Result<McEstimate<f64>> {
    let base: u64 = rng.random();
    bandit_regret_seeded(prior, rule, gamma, cfg, base)
}

pub fn bandit_regret_seeded(
    prior: &BetaProductPrior,
    rule: ArmRule,
    gamma: f64,
    cfg: &BanditMcConfig,
    seed: u64,
) -> Result<McEstimate<f64>> {
    if prior.n_arms() < 2 {
        return Err(Error::InvalidPrior("regret needs at least two arms".into()));
    }
    if cfg.n_mc == 0 {
        return Err(Error::Config("n_mc must be at least 1".into()));
    }
    let tables = match rule {
        ArmRule::Gittins => prior_tables(prior, gamma, cfg.n_max)?,
        ArmRule::Greedy => Vec::new(),
    };
    let samples: Vec<f64> = (0..cfg.n_mc)
        .into_par_iter()
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(i as u64);
            regret_sample(prior, &tables, rule, gamma, cfg.horizon_trunc, &mut r)
        })
        .collect();
    Ok(McEstimate::from_samples(&samples))
}

pub fn gittins_regret<R: Rng + ?Sized>(
    prior: &BetaProductPrior,
    gamma: f64,
    cfg: &BanditMcConfig,
    rng: &mut R,
) -> Result<McEstimate<f64>> {
    bandit_regret(prior, ArmRule::Gittins, gamma, cfg, rng)
}

/// `E[max(θ_1, θ_2)] = ∫ 1 − F_1(x) F_2(x) dx` by the midpoint rule.
fn expected_max_two(p1: (f64, f64), p2: (f64, f64)) -> f64 {
    const M: usize = 20_000;
    (0..M)
        .map(|i| {
            let x = (i as f64 + 0.5) / M as f64;
            1.0 - beta_reg(p1.0, p1.1, x) * beta_reg(p2.0, p2.1, x)
        })
        .sum::<f64>()
        / M as f64
}

/// Gittins-policy Bayesian regret for two arms over `horizon` steps, by exact
/// backward induction on the joint posterior lattice (no Monte Carlo).
///
/// Cost grows as `horizon⁴`; `horizon = 120` at `γ = 0.9` takes about a second.
pub fn gittins_regret_exact(prior: &BetaProductPrior, gamma: f64, horizon: usize) -> Result<f64> {
    if prior.n_arms() != 2 {
        return Err(Error::InvalidPrior("exact evaluation supports exactly two arms".into()));
    }
    let tables = prior_tables(prior, gamma, horizon.max(2))?;
    let arms = prior.arms();
    let mean = |k: usize, s: usize, f: usize| (arms[k].0 + s as f64) / (arms[k].0 + arms[k].1 + (s + f) as f64);
    // Depth-n layout: arm-1 pulls n1, arm-1 successes s1, arm-2 successes s2.
    let size = |n: usize| (0..=n).map(|m| (m + 1) * (n - m + 1)).sum::<usize>();
    let bases = |n: usize| -> Vec<usize> {
        let mut b = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for m in 0..=n {
            b.push(acc);
            acc += (m + 1) * (n - m + 1);
        }
        b
    };
    let mut next = vec![0.0; size(horizon)];
    for n in (0..horizon).rev() {
        let nb = bases(n + 1);
        let at = |n1: usize, s1: usize, s2: usize| nb[n1] + s1 * (n + 1 - n1 + 1) + s2;
        let cb = bases(n);
        let mut cur = vec![0.0; size(n)];
        for n1 in 0..=n {
            for s1 in 0..=n1 {
                for s2 in 0..=(n - n1) {
                    let (f1, f2) = (n1 - s1, n - n1 - s2);
                    let v = if tables[0].index(s1, f1) >= tables[1].index(s2, f2) {
                        let p = mean(0, s1, f1);
                        p * (1.0 + gamma * next[at(n1 + 1, s1 + 1, s2)]) + (1.0 - p) * gamma * next[at(n1 + 1, s1, s2)]
                    } else {
                        let p = mean(1, s2, f2);
                        p * (1.0 + gamma * next[at(n1, s1, s2 + 1)]) + (1.0 - p) * gamma * next[at(n1, s1, s2)]
                    };
                    cur[cb[n1] + s1 * (n - n1 + 1) + s2] = v;
                }
            }
        }
        next = cur;
    }
    let emax = expected_max_two(arms[0], arms[1]);
    Ok(emax * (1.0 - gamma.powi(horizon as i32)) / (1.0 - gamma) - next[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub a2: f64,
    pub b2: f64,
    pub regret: f64,
    pub se: f64,
}

/// Seed for cell `i`; cells are independent of each other and of evaluation order.
fn cell_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Gittins regret for `Beta(a1, b1) × Beta(a2, b2)` over the grid `a2s × b2s`.
pub fn regret_surface(
    fixed: (f64, f64),
    a2s: &[f64],
    b2s: &[f64],
    gamma: f64,
    cfg: &BanditMcConfig,
    seed: u64,
) -> Result<Vec<SurfaceCell>> {
    let cells: Vec<(f64, f64)> = a2s.iter().flat_map(|&a| b2s.iter().map(move |&b| (a, b))).collect();
    cells
        .par_iter()
        .enumerate()
        .map(|(i, &(a2, b2))| {
            let prior = BetaProductPrior::new(vec![fixed, (a2, b2)])?;
            let est = bandit_regret_seeded(&prior, ArmRule::Gittins, gamma, cfg, cell_seed(seed, i))?;
            Ok(SurfaceCell { a2, b2, regret: est.mean, se: est.se })
        })
        .collect()
}

pub fn write_surface_csv<W: Write>(cells: &[SurfaceCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in cells {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCasePrior {
    pub a_star: f64,
    pub regret: f64,
    pub se: f64,
    /// `(a, regret, se)` for every grid value.
    pub curve: Vec<(f64, f64, f64)>,
}

/// Grid search over symmetric `Beta(a, a)^K` priors. Every grid point uses the same
/// seed (common random numbers), which sharpens comparisons between neighbours.
pub fn worst_case_prior(k: usize, gamma: f64, grid: &[f64], cfg: &BanditMcConfig, seed: u64) -> Result<WorstCasePrior> {
    if grid.is_empty() {
        return Err(Error::Config("worst-case search needs a nonempty grid".into()));
    }
    let curve: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&a| {
            let prior = BetaProductPrior::symmetric(k, a)?;
            let est = bandit_regret_seeded(&prior, ArmRule::Gittins, gamma, cfg, seed)?;
            Ok((a, est.mean, est.se))
        })
        .collect::<Result<_>>()?;
    let best = curve.iter().copied().fold((f64::NAN, f64::NEG_INFINITY, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
    Ok(WorstCasePrior { a_star: best.0, regret: best.1, se: best.2, curve })
}
