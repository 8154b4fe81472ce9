//! Approximate-centroid cutting planes for the maximin belief over a finite MDP set.
//!
//! `Ř*(β) = min_π Ř(π, β)` is concave on the simplex, and the regret vector
//! `C = (R(π*(β_t), μ_i))_i` of the Bayes-optimal policy at `β_t` is a supergradient
//! there. Every maximiser therefore lies in `{β : Cᵀ(β − β_t) ≥ 0}`, so each
//! iteration keeps that side and moves to the centroid of what is left.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::beliefs::BeliefVector;
use crate::error::{Error, Result};
use crate::game::solve_matrix_game;
use crate::mdp::HistoryPolicyTree;
use crate::regret::{bayes_optimal_tree, MdpSet};

/// Cuts are stored as `cᵀβ ≥ b + CUT_INSET` so the closed polytope stays inside the open one.
pub const CUT_INSET: f64 = 1e-12;

/// `cᵀβ ≥ b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub c: Vec<f64>,
    pub b: f64,
}

impl Halfspace {
    pub fn slack(&self, x: &[f64]) -> f64 {
        dot(&self.c, x) - self.b
    }
}

/// The simplex intersected with a list of cuts, plus a point certifying it is nonempty.
///
/// Constraint `i < n` is the facet `β_i ≥ 0`; constraint `n + k` is cut `k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutPolytope {
    n: usize,
    cuts: Vec<Halfspace>,
    interior: Vec<f64>,
}

impl CutPolytope {
    pub fn simplex(n: usize) -> Self {
        assert!(n > 0, "simplex needs at least one vertex");
        Self { n, cuts: Vec::new(), interior: vec![1.0 / n as f64; n] }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn cuts(&self) -> &[Halfspace] {
        &self.cuts
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    /// All constraints, facets first.
    pub fn constraints(&self) -> Vec<Halfspace> {
        let mut out: Vec<Halfspace> = (0..self.n)
            .map(|i| {
                let mut c = vec![0.0; self.n];
                c[i] = 1.0;
                Halfspace { c, b: 0.0 }
            })
            .collect();
        out.extend(self.cuts.iter().cloned());
        out
    }

    /// Index of the first constraint `x` violates, if any.
    pub fn violated(&self, x: &[f64]) -> Option<usize> {
        if let Some(i) = x.iter().position(|&v| v < 0.0) {
            return Some(i);
        }
        self.cuts.iter().position(|h| h.slack(x) < 0.0).map(|k| self.n + k)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n && (x.iter().sum::<f64>() - 1.0).abs() < 1e-9 && self.violated(x).is_none()
    }

    /// Adds `cᵀβ ≥ b` (inset by [`CUT_INSET`]). The interior point is not updated.
    pub fn add_cut(&mut self, c: Vec<f64>, b: f64) {
        assert_eq!(c.len(), self.n);
        self.cuts.push(Halfspace { c, b: b + CUT_INSET });
    }

    /// Replaces the interior point; fails with the violated constraint.
    pub fn set_interior(&mut self, x: Vec<f64>) -> Result<()> {
        if let Some(facet) = self.violated(&x) {
            return Err(Error::Degenerate { facet });
        }
        self.interior = x;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HitAndRunConfig {
    /// Retained samples.
    pub n_samples: usize,
    pub burn_in: usize,
    /// Chain steps per retained sample.
    pub thin: usize,
}

impl Default for HitAndRunConfig {
    fn default() -> Self {
        Self { n_samples: 2000, burn_in: 500, thin: 5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HitAndRunSamples {
    pub samples: Vec<Vec<f64>>,
    pub centroid: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mean(rows: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n];
    for r in rows {
        m.iter_mut().zip(r).for_each(|(a, b)| *a += b);
    }
    m.iter_mut().for_each(|a| *a /= rows.len() as f64);
    m
}

/// Uniform samples from the polytope by hit-and-run in the simplex's affine hull.
///
/// Directions are isotropic Gaussians projected onto `Σβ = 0`; the step length is
/// uniform on the feasible chord through the current point.
pub fn hit_and_run<R: Rng + ?Sized>(
    polytope: &CutPolytope,
    cfg: &HitAndRunConfig,
    rng: &mut R,
) -> Result<HitAndRunSamples> {
    let n = polytope.n;
    if let Some(facet) = polytope.violated(&polytope.interior) {
        return Err(Error::Degenerate { facet });
    }
    if cfg.n_samples == 0 || cfg.thin == 0 {
        return Err(Error::Config("hit-and-run needs n_samples >= 1 and thin >= 1".into()));
    }
    if n == 1 {
        return Ok(HitAndRunSamples { samples: vec![vec![1.0]; cfg.n_samples], centroid: vec![1.0] });
    }
    let constraints = polytope.constraints();
    let mut x = polytope.interior.clone();
    let mut samples = Vec::with_capacity(cfg.n_samples);
    let total = cfg.burn_in + cfg.n_samples * cfg.thin;
    let mut d = vec![0.0; n];
    for step in 1..=total {
        loop {
            d.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let m = d.iter().sum::<f64>() / n as f64;
            d.iter_mut().for_each(|v| *v -= m);
            let norm = dot(&d, &d).sqrt();
            if norm > 1e-12 {
                d.iter_mut().for_each(|v| *v /= norm);
                break;
            }
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (k, h) in constraints.iter().enumerate() {
            let cd = dot(&h.c, &d);
            let s = h.slack(&x);
            if s < 0.0 {
                return Err(Error::Degenerate { facet: k });
            }
            if cd > 0.0 {
                lo = lo.max(-s / cd);
            } else if cd < 0.0 {
                hi = hi.min(-s / cd);
            }
        }
        if !(lo <= 0.0 && hi >= 0.0) {
            return Err(Error::Degenerate { facet: 0 });
        }
        let t = if hi > lo { rng.random_range(lo..=hi) } else { 0.0 };
        x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += t * di);
        // Keep roundoff from pushing the chain through a facet.
        x.iter_mut().for_each(|v| *v = v.max(0.0));
        if let Some(k) = polytope.violated(&x) {
            if k >= n {
                x.iter_mut().zip(&d).for_each(|(xi, di)| *xi -= t * di);
            }
        }
        if step > cfg.burn_in && (step - cfg.burn_in).is_multiple_of(cfg.thin) {
            samples.push(x.clone());
        }
    }
    let centroid = mean(&samples, n);
    Ok(HitAndRunSamples { samples, centroid })
}

/// `C_i = R(π*(β), μ_i)`: the per-MDP regrets of the Bayes-optimal policy at `β`.
pub fn regret_plane(set: &MdpSet<f64>, belief: &BeliefVector<f64>) -> Result<Vec<f64>> {
    let bo = bayes_optimal_tree(set, belief)?;
    set.regrets(&bo.policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CuttingPlaneConfig {
    pub iterations: usize,
    /// Stop when the regret plane is flat on the simplex: `‖C − mean(C)‖∞ < tol`.
    pub tol: f64,
    pub hit_and_run: HitAndRunConfig,
}

impl Default for CuttingPlaneConfig {
    fn default() -> Self {
        Self { iterations: 30, tol: 1e-4, hit_and_run: HitAndRunConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Iterations,
    /// The regret plane at the last centroid was flat.
    Converged,
    /// No hit-and-run sample survived the last cut; `last_beta` is the last valid centroid.
    EmptyPolytope { last_beta: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub iteration: usize,
    /// Query point `β_t`.
    pub centroid: Vec<f64>,
    /// Regret plane `C_t`.
    pub plane: Vec<f64>,
    /// `Ř*(β_t) = C_tᵀ β_t`.
    pub value: f64,
    pub policy_id: usize,
    /// Fraction of pre-cut samples on the kept side; `None` when no cut was made.
    pub volume_fraction: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuttingPlaneRun {
    pub beta_star: Vec<f64>,
    /// The query point with the largest `Ř*(β_t)`.
    pub best_beta: Vec<f64>,
    pub best_value: f64,
    /// Distinct best-response policies; `CutRecord::policy_id` indexes this list.
    pub best_responses: Vec<HistoryPolicyTree<f64>>,
    pub cuts: Vec<CutRecord>,
    pub stop: StopReason,
}

impl CuttingPlaneRun {
    pub fn volume_fractions(&self) -> Vec<f64> {
        self.cuts.iter().filter_map(|c| c.volume_fraction).collect()
    }
}

/// Runs the cutting-plane method with the exact Bayes-optimal oracle.
fn renormalise(x: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    clipped.iter().map(|v| v / total).collect()
}

pub fn cutting_plane_run<R: Rng + ?Sized>(
    set: &MdpSet<f64>,
    cfg: &CuttingPlaneConfig,
    rng: &mut R,
) -> Result<CuttingPlaneRun> {
    cutting_plane_run_with(set, cfg, rng, |b| Ok(bayes_optimal_tree(set, b)?.policy))
}

/// Runs the cutting-plane method with an arbitrary best-response oracle.
pub fn cutting_plane_run_with<R, F>(
    set: &MdpSet<f64>,
    cfg: &CuttingPlaneConfig,
    rng: &mut R,
    mut oracle: F,
) -> Result<CuttingPlaneRun>
where
    R: Rng + ?Sized,
    F: FnMut(&BeliefVector<f64>) -> Result<HistoryPolicyTree<f64>>,
{
    if cfg.iterations == 0 {
        return Err(Error::Config("cutting plane needs at least one iteration".into()));
    }
    let n = set.len();
    let mut poly = CutPolytope::simplex(n);
    let mut sampled = hit_and_run(&poly, &cfg.hit_and_run, rng)?;
    let mut best_responses: Vec<HistoryPolicyTree<f64>> = Vec::new();
    let mut cuts = Vec::new();
    let mut best_beta = renormalise(&sampled.centroid);
    let mut best_value = f64::NEG_INFINITY;
    let mut stop = StopReason::Iterations;

    for iteration in 0..cfg.iterations {
        // Hit-and-run accumulates rounding drift off the simplex.
        let beta_t = renormalise(&sampled.centroid);
        let belief = BeliefVector::new(beta_t.clone())?;
        let policy = oracle(&belief)?;
        let plane = set.regrets(&policy)?;
        let value = dot(&plane, &beta_t);
        let policy_id = match best_responses.iter().position(|p| *p == policy) {
            Some(id) => id,
            None => {
                best_responses.push(policy);
                best_responses.len() - 1
            }
        };
        if value > best_value {
            best_value = value;
            best_beta = beta_t.clone();
        }
        let m = plane.iter().sum::<f64>() / n as f64;
        if plane.iter().all(|c| (c - m).abs() < cfg.tol) {
            cuts.push(CutRecord { iteration, centroid: beta_t, plane, value, policy_id, volume_fraction: None });
            stop = StopReason::Converged;
            break;
        }
        let b = value;
        let kept: Vec<Vec<f64>> =
            sampled.samples.iter().filter(|x| dot(&plane, x) >= b + CUT_INSET).cloned().collect();
        let fraction = kept.len() as f64 / sampled.samples.len() as f64;
        cuts.push(CutRecord {
            iteration,
            centroid: beta_t.clone(),
            plane: plane.clone(),
            value,
            policy_id,
            volume_fraction: Some(fraction),
        });
        poly.add_cut(plane, b);
        if kept.is_empty() {
            stop = StopReason::EmptyPolytope { last_beta: beta_t };
            break;
        }
        poly.set_interior(mean(&kept, n))?;
        sampled = hit_and_run(&poly, &cfg.hit_and_run, rng)?;
    }
    let beta_star = match &stop {
        StopReason::EmptyPolytope { last_beta } => last_beta.clone(),
        StopReason::Converged => cuts.last().map(|c| c.centroid.clone()).unwrap_or_default(),
        StopReason::Iterations => renormalise(&sampled.centroid),
    };
    Ok(CuttingPlaneRun { beta_star, best_beta, best_value, best_responses, cuts, stop })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimaxMixture {
    /// Weight on each collected policy.
    pub weights: Vec<f64>,
    /// Nature's worst-case belief against the collected set.
    pub belief: Vec<f64>,
    /// `min_x max_i Σ_j x_j R(π_j, μ_i)`.
    pub value: f64,
}

impl MinimaxMixture {
    /// Behaviour-equivalent stochastic tree for the mixed strategy.
    pub fn policy(&self, policies: &[HistoryPolicyTree<f64>]) -> Result<HistoryPolicyTree<f64>> {
        let refs: Vec<&HistoryPolicyTree<f64>> = policies.iter().collect();
        HistoryPolicyTree::behavioral_mixture(&self.weights, &refs)
    }
}

/// Minimax mixture over `policies` against the Dirac beliefs on `set`.
pub fn minimax_mixture(set: &MdpSet<f64>, policies: &[HistoryPolicyTree<f64>]) -> Result<MinimaxMixture> {
    if policies.is_empty() {
        return Err(Error::InvalidPolicy("minimax mixture needs at least one policy".into()));
    }
    let loss: Vec<Vec<f64>> = policies.iter().map(|p| set.regrets(p)).collect::<Result<_>>()?;
    let sol = solve_matrix_game(&loss)?;
    Ok(MinimaxMixture { weights: sol.row_strategy, belief: sol.col_strategy, value: sol.value })
}
