//! Desk-scale experiment drivers. Each returns plain data plus a CSV writer;
//! the CLI adds file handling and manifests.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandits::{regret_surface, worst_case_prior, BanditMcConfig, SurfaceCell, WorstCasePrior};
use crate::beliefs::{simplex_grid, BeliefVector, DirichletProductPrior};
use crate::cutting_plane::{cutting_plane_run, minimax_mixture, CuttingPlaneConfig, CuttingPlaneRun, MinimaxMixture};
use crate::error::{Error, Result};
use crate::gda::{gda_run, BeliefKind, GdaConfig, GdaPrior, OutputRule};
use crate::mdp::{backward_induction, chain_mdp_with, gen_random_mdp, ChainParams, FiniteMdp, HistoryPolicyTree, InitialState, Policy};
use crate::policy::{Partition, SoftmaxPartitionPolicy};
use crate::regret::{bayes_optimal_tree, bayes_optimal_value, psrl_evaluate, MdpSet, PsrlConfig};

/// `n` random MDPs drawn from one ChaCha stream keyed by `seed`.
pub fn random_mdp_set(
    n: usize,
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    discount: f64,
    seed: u64,
) -> Result<MdpSet<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mdps = (0..n)
        .map(|_| gen_random_mdp::<f64, _>(n_states, n_actions, &mut rng)?.with_horizon(horizon)?.with_discount(discount))
        .collect::<Result<Vec<_>>>()?;
    MdpSet::new(mdps)
}

/// Parameters of a random finite MDP set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MdpSetSpec {
    pub n_mdps: usize,
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    pub discount: f64,
    pub seed: u64,
}

impl Default for MdpSetSpec {
    /// The two-MDP benchmark: 3 states, 2 actions, `T = 5`, `γ = 1`.
    fn default() -> Self {
        Self { n_mdps: 2, n_states: 3, n_actions: 2, horizon: 5, discount: 1.0, seed: 0 }
    }
}

impl MdpSetSpec {
    pub fn build(&self) -> Result<MdpSet<f64>> {
        random_mdp_set(self.n_mdps, self.n_states, self.n_actions, self.horizon, self.discount, self.seed)
    }

    fn validate(&self) -> Result<()> {
        if self.n_mdps == 0 || self.n_states < 2 || self.n_actions == 0 || self.horizon == 0 {
            return Err(Error::Config("MDP set needs n_mdps >= 1, n_states >= 2, n_actions >= 1, horizon >= 1".into()));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::Config("discount must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

fn regret_at(regrets: &[f64], belief: &[f64]) -> f64 {
    regrets.iter().zip(belief).map(|(r, b)| r * b).sum()
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

// ---------------------------------------------------------------- two-MDP curve

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoMdpCurveConfig {
    pub mdps: MdpSetSpec,
    /// Grid points are `k / resolution` for `k = 0..=resolution`.
    pub resolution: usize,
    pub psrl_n_mc: usize,
    pub cutting_plane: CuttingPlaneConfig,
    pub seed: u64,
}

impl Default for TwoMdpCurveConfig {
    fn default() -> Self {
        Self {
            mdps: MdpSetSpec::default(),
            resolution: 100,
            psrl_n_mc: 2000,
            cutting_plane: CuttingPlaneConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRow {
    /// Weight on the first MDP.
    pub beta: f64,
    /// `Ř(π*(β), β)`.
    pub bayes_optimal: f64,
    /// `Ř(π_j, β)` for each best response collected at the maximin search.
    pub best_responses: Vec<f64>,
    pub minimax: f64,
    pub psrl: f64,
    pub psrl_se: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoMdpCurve {
    pub beta_star: Vec<f64>,
    pub mixture: MinimaxMixture,
    pub rows: Vec<CurveRow>,
}

impl TwoMdpCurve {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let k = self.rows.first().map_or(0, |r| r.best_responses.len());
        let mut header = vec!["beta".to_string(), "bayes_optimal".into()];
        header.extend((0..k).map(|j| format!("best_response_{j}")));
        header.extend(["minimax".to_string(), "psrl".into(), "psrl_se".into()]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.beta.to_string(), r.bayes_optimal.to_string()];
            rec.extend(r.best_responses.iter().map(f64::to_string));
            rec.extend([r.minimax.to_string(), r.psrl.to_string(), r.psrl_se.to_string()]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn run_two_mdp_curve(cfg: &TwoMdpCurveConfig) -> Result<TwoMdpCurve> {
    cfg.mdps.validate()?;
    if cfg.mdps.n_mdps != 2 || cfg.resolution == 0 || cfg.psrl_n_mc == 0 {
        return Err(Error::Config("two-mdp-curve needs exactly 2 MDPs, resolution >= 1 and psrl_n_mc >= 1".into()));
    }
    let set = cfg.mdps.build()?;
    let run = cutting_plane_run(&set, &cfg.cutting_plane, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let mixture = minimax_mixture(&set, &run.best_responses)?;
    let br_regrets: Vec<Vec<f64>> = run.best_responses.iter().map(|p| set.regrets(p)).collect::<Result<_>>()?;
    let mix_regrets = set.regrets(&mixture.policy(&run.best_responses)?)?;
    let opt = set.optimal_utilities().to_vec();
    let psrl_cfg = PsrlConfig { n_mc: cfg.psrl_n_mc, ..PsrlConfig::default() };
    let rows = (0..=cfg.resolution)
        .into_par_iter()
        .map(|k| {
            let b = k as f64 / cfg.resolution as f64;
            let w = [b, 1.0 - b];
            let belief = BeliefVector::new(w.to_vec())?;
            let bayes_optimal = regret_at(&opt, &w) - bayes_optimal_value(&set, &belief)?;
            let psrl = psrl_evaluate(&set, &belief, &psrl_cfg, &mut seeded(cfg.seed, k as u64))?;
            Ok(CurveRow {
                beta: b,
                bayes_optimal,
                best_responses: br_regrets.iter().map(|r| regret_at(r, &w)).collect(),
                minimax: regret_at(&mix_regrets, &w),
                psrl: psrl.mean,
                psrl_se: psrl.se,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TwoMdpCurve { beta_star: run.beta_star, mixture, rows })
}

// ---------------------------------------------------------------- three-MDP grid

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThreeMdpGridConfig {
    pub mdps: MdpSetSpec,
    pub resolution: usize,
}

impl Default for ThreeMdpGridConfig {
    fn default() -> Self {
        Self { mdps: MdpSetSpec { n_mdps: 3, ..MdpSetSpec::default() }, resolution: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPoint {
    pub beta: Vec<f64>,
    /// `Ř(π*(β), β)`.
    pub value: f64,
    /// `(R(π*(β), μ_i))_i`, the gradient of `Ř(π*(β), ·)`.
    pub gradient: Vec<f64>,
    /// Gradient projected onto the simplex tangent space.
    pub tangent: Vec<f64>,
}

pub fn run_three_mdp_grid(cfg: &ThreeMdpGridConfig) -> Result<Vec<GridPoint>> {
    cfg.mdps.validate()?;
    if cfg.mdps.n_mdps != 3 || cfg.resolution == 0 {
        return Err(Error::Config("three-mdp-grid needs exactly 3 MDPs and resolution >= 1".into()));
    }
    let set = cfg.mdps.build()?;
    simplex_grid::<f64>(3, cfg.resolution)
        .par_iter()
        .map(|b| {
            let bo = bayes_optimal_tree(&set, b)?;
            let gradient = set.regrets(&bo.policy)?;
            let m = gradient.iter().sum::<f64>() / 3.0;
            Ok(GridPoint {
                beta: b.weights().to_vec(),
                value: regret_at(&gradient, b.weights()),
                tangent: gradient.iter().map(|g| g - m).collect(),
                gradient,
            })
        })
        .collect()
}

pub fn write_grid_csv<W: Write>(points: &[GridPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beta_1", "beta_2", "beta_3", "value", "grad_1", "grad_2", "grad_3", "tangent_1", "tangent_2", "tangent_3"])?;
    for p in points {
        let rec: Vec<String> = p
            .beta
            .iter()
            .chain(std::iter::once(&p.value))
            .chain(&p.gradient)
            .chain(&p.tangent)
            .map(f64::to_string)
            .collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- sixteen-MDP comparison

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SixteenMdpConfig {
    pub seeds: Vec<u64>,
    pub n_mdps: usize,
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    pub discount: f64,
    pub cutting_plane: CuttingPlaneConfig,
}

impl Default for SixteenMdpConfig {
    fn default() -> Self {
        Self {
            seeds: vec![1, 2, 3, 4, 5],
            n_mdps: 16,
            n_states: 3,
            n_actions: 2,
            horizon: 4,
            discount: 0.9,
            cutting_plane: CuttingPlaneConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SixteenMdpRow {
    pub seed: u64,
    /// `max_i R(π_minimax, μ_i)`.
    pub minimax: f64,
    /// `max_i R(π*(uniform), μ_i)`.
    pub uniform: f64,
    /// Value of the matrix game over the collected best responses.
    pub game_value: f64,
    pub n_policies: usize,
}

pub fn sixteen_mdp_row(cfg: &SixteenMdpConfig, seed: u64) -> Result<SixteenMdpRow> {
    let set = random_mdp_set(cfg.n_mdps, cfg.n_states, cfg.n_actions, cfg.horizon, cfg.discount, seed)?;
    let run: CuttingPlaneRun = cutting_plane_run(&set, &cfg.cutting_plane, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let mix = minimax_mixture(&set, &run.best_responses)?;
    let minimax_policy: HistoryPolicyTree<f64> = mix.policy(&run.best_responses)?;
    let worst = |r: Vec<f64>| r.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let minimax = worst(set.regrets(&minimax_policy)?);
    let uniform_policy = bayes_optimal_tree(&set, &BeliefVector::uniform(set.len()))?.policy;
    let uniform = worst(set.regrets(&uniform_policy)?);
    Ok(SixteenMdpRow { seed, minimax, uniform, game_value: mix.value, n_policies: run.best_responses.len() })
}

pub fn run_sixteen_mdp_compare(cfg: &SixteenMdpConfig) -> Result<Vec<SixteenMdpRow>> {
    if cfg.seeds.is_empty() || cfg.n_mdps == 0 {
        return Err(Error::Config("sixteen-mdp-compare needs seeds and at least one MDP".into()));
    }
    cfg.seeds.par_iter().map(|&s| sixteen_mdp_row(cfg, s)).collect()
}

pub fn write_sixteen_csv<W: Write>(rows: &[SixteenMdpRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- Dirichlet GDA robustness

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GdaDirichletConfig {
    pub n_states: usize,
    pub horizon: usize,
    /// Suffix-window length of the policy partition.
    pub window: usize,
    /// Slip probability of the Chain MDP that supplies the known reward and `δ(Chain)`.
    pub slip: f64,
    /// Symmetric concentration of the uniform prior `β¹`.
    pub uniform_alpha: f64,
    /// Concentration of the near-deterministic prior `β^D`.
    pub deterministic_alpha: f64,
    /// Training run for `(π*, β*)`; the two best-response runs reuse it with `η_β = 0`.
    pub gda: GdaConfig,
    pub n_eval: usize,
    pub seed: u64,
}

impl Default for GdaDirichletConfig {
    fn default() -> Self {
        Self {
            n_states: 3,
            horizon: 8,
            window: 2,
            slip: 0.2,
            uniform_alpha: 1.0,
            deterministic_alpha: 0.05,
            gda: GdaConfig {
                eta_policy: 0.05,
                eta_belief: 0.01,
                batch: 16,
                iterations: 5000,
                belief_kind: BeliefKind::Dirichlet,
                output: OutputRule::LastIterate,
                variance_probe: 0,
                ..GdaConfig::default()
            },
            n_eval: 10_000,
            seed: 0,
        }
    }
}

/// Evaluation prior: a Dirichlet product or a point mass.
#[derive(Debug, Clone)]
pub enum EvalPrior {
    Dirichlet(DirichletProductPrior<f64>),
    Dirac(FiniteMdp<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessCell {
    pub policy: String,
    pub prior: String,
    pub mean: f64,
    pub se: f64,
    pub median: f64,
    pub p999: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GdaDirichletResult {
    pub cells: Vec<RobustnessCell>,
    /// Learned `β*` parameters.
    pub beta_star: Vec<f64>,
    /// Per policy, the largest mean regret over the evaluation priors.
    pub max_mean: Vec<(String, f64)>,
}

pub const POLICY_NAMES: [&str; 3] = ["pi_uniform", "pi_minimax", "pi_beta_star"];
pub const PRIOR_NAMES: [&str; 6] = ["beta_uniform", "beta_star", "interp_1_3", "interp_2_3", "beta_deterministic", "chain"];

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Regret statistics of each policy under each prior, with common sampled MDPs across policies.
pub fn evaluate_robustness(
    policies: &[(String, SoftmaxPartitionPolicy<f64>)],
    priors: &[(String, EvalPrior)],
    n_eval: usize,
    seed: u64,
) -> Result<Vec<RobustnessCell>> {
    let mut cells = Vec::new();
    for (j, (prior_name, prior)) in priors.iter().enumerate() {
        let mdps: Vec<FiniteMdp<f64>> = match prior {
            EvalPrior::Dirac(m) => vec![m.clone()],
            EvalPrior::Dirichlet(p) => (0..n_eval)
                .into_par_iter()
                .map(|i| crate::beliefs::dirichlet_sample(p, &mut seeded(seed ^ j as u64, i as u64)))
                .collect(),
        };
        let optimal: Vec<f64> = mdps.par_iter().map(|m| backward_induction(m).optimal_utility).collect();
        for (policy_name, policy) in policies {
            let mut regrets: Vec<f64> = mdps
                .par_iter()
                .zip(&optimal)
                .map(|(m, &o)| Ok(o - policy.utility(m)?))
                .collect::<Result<_>>()?;
            let est = crate::regret::McEstimate::from_samples(&regrets);
            regrets.sort_by(f64::total_cmp);
            cells.push(RobustnessCell {
                policy: policy_name.clone(),
                prior: prior_name.clone(),
                mean: est.mean,
                se: est.se,
                median: quantile(&regrets, 0.5),
                p999: quantile(&regrets, 0.999),
            });
        }
    }
    Ok(cells)
}

pub fn run_gda_dirichlet(cfg: &GdaDirichletConfig) -> Result<GdaDirichletResult> {
    if cfg.n_states < 2 || cfg.horizon == 0 || cfg.window == 0 || cfg.n_eval == 0 {
        return Err(Error::Config("gda-dirichlet needs n_states >= 2, horizon, window and n_eval >= 1".into()));
    }
    let params = ChainParams { horizon: cfg.horizon, ..ChainParams::default() };
    let chain = chain_mdp_with::<f64>(cfg.n_states, cfg.slip, &params)?;
    let (n_s, n_a) = (cfg.n_states, 2);
    let uniform = DirichletProductPrior::symmetric(
        n_s,
        n_a,
        cfg.uniform_alpha,
        chain.reward_table().to_vec(),
        cfg.horizon,
        params.discount,
        InitialState::State(0),
    )?;
    let deterministic = uniform.with_alpha(vec![cfg.deterministic_alpha; uniform.alpha().len()])?;
    let partition = Partition::SuffixWindow { n_states: n_s, n_actions: n_a, window: cfg.window };
    let base = GdaConfig { belief_kind: BeliefKind::Dirichlet, ..cfg.gda.clone() };

    let train = |prior: &DirichletProductPrior<f64>, eta_belief: f64, seed: u64| {
        let c = GdaConfig { eta_belief, seed, ..base.clone() };
        gda_run(&c, SoftmaxPartitionPolicy::zeros(partition), GdaPrior::Dirichlet { prior: prior.clone() })
    };
    let pi_uniform = train(&uniform, 0.0, cfg.seed)?.policy;
    let minimax = train(&uniform, base.eta_belief, cfg.seed.wrapping_add(1))?;
    let GdaPrior::Dirichlet { prior: beta_star } = minimax.prior else {
        unreachable!("Dirichlet run returns a Dirichlet prior")
    };
    let pi_star = train(&beta_star, 0.0, cfg.seed.wrapping_add(2))?.policy;

    let policies = vec![
        (POLICY_NAMES[0].to_string(), pi_uniform),
        (POLICY_NAMES[1].to_string(), minimax.policy),
        (POLICY_NAMES[2].to_string(), pi_star),
    ];
    let priors = vec![
        (PRIOR_NAMES[0].to_string(), EvalPrior::Dirichlet(uniform.clone())),
        (PRIOR_NAMES[1].to_string(), EvalPrior::Dirichlet(beta_star.clone())),
        (PRIOR_NAMES[2].to_string(), EvalPrior::Dirichlet(uniform.interpolate(&beta_star, 1.0 / 3.0)?)),
        (PRIOR_NAMES[3].to_string(), EvalPrior::Dirichlet(uniform.interpolate(&beta_star, 2.0 / 3.0)?)),
        (PRIOR_NAMES[4].to_string(), EvalPrior::Dirichlet(deterministic)),
        (PRIOR_NAMES[5].to_string(), EvalPrior::Dirac(chain)),
    ];
    let cells = evaluate_robustness(&policies, &priors, cfg.n_eval, cfg.seed.wrapping_add(3))?;
    let max_mean = policies
        .iter()
        .map(|(name, _)| {
            let m = cells.iter().filter(|c| &c.policy == name).map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
            (name.clone(), m)
        })
        .collect();
    Ok(GdaDirichletResult { cells, beta_star: beta_star.alpha().to_vec(), max_mean })
}

pub fn write_robustness_csv<W: Write>(cells: &[RobustnessCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in cells {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- bandits and cutting plane

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[derive(Default)]
pub struct CutplaneConfig {
    pub mdps: MdpSetSpec,
    pub cutting_plane: CuttingPlaneConfig,
    pub seed: u64,
}


/// Run record: every cut and centroid, the best responses, and their minimax mixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutplaneRecord {
    pub run: CuttingPlaneRun,
    pub mixture: MinimaxMixture,
}

/// Cutting-plane run on `set` (the config's own set spec is ignored).
pub fn run_cutplane(set: &MdpSet<f64>, cfg: &CutplaneConfig) -> Result<CutplaneRecord> {
    let run = cutting_plane_run(set, &cfg.cutting_plane, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let mixture = minimax_mixture(set, &run.best_responses)?;
    Ok(CutplaneRecord { run, mixture })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BanditSurfaceConfig {
    pub fixed: (f64, f64),
    pub a2: Vec<f64>,
    pub b2: Vec<f64>,
    pub gamma: f64,
    pub mc: BanditMcConfig,
    pub seed: u64,
}

/// `0.5, 1, ..., 10`.
fn half_steps() -> Vec<f64> {
    (1..=20).map(|i| i as f64 * 0.5).collect()
}

impl Default for BanditSurfaceConfig {
    fn default() -> Self {
        Self { fixed: (1.0, 1.0), a2: half_steps(), b2: half_steps(), gamma: 0.9, mc: BanditMcConfig::default(), seed: 0 }
    }
}

pub fn run_bandit_surface(cfg: &BanditSurfaceConfig) -> Result<Vec<SurfaceCell>> {
    if cfg.a2.is_empty() || cfg.b2.is_empty() {
        return Err(Error::Config("bandit-surface needs nonempty a2 and b2 grids".into()));
    }
    regret_surface(cfg.fixed, &cfg.a2, &cfg.b2, cfg.gamma, &cfg.mc, cfg.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BanditWorstCaseConfig {
    pub arms: usize,
    pub gamma: f64,
    pub grid: Vec<f64>,
    pub mc: BanditMcConfig,
    pub seed: u64,
}

impl Default for BanditWorstCaseConfig {
    fn default() -> Self {
        Self { arms: 2, gamma: 0.9, grid: (1..=30).map(|i| i as f64 * 0.1).collect(), mc: BanditMcConfig::default(), seed: 0 }
    }
}

pub fn run_bandit_worst_case(cfg: &BanditWorstCaseConfig) -> Result<WorstCasePrior> {
    if !(2..=4).contains(&cfg.arms) {
        return Err(Error::Config("worst-case search supports 2 to 4 arms".into()));
    }
    worst_case_prior(cfg.arms, cfg.gamma, &cfg.grid, &cfg.mc, cfg.seed)
}

pub fn write_worst_case_csv<W: Write>(result: &WorstCasePrior, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "regret", "se"])?;
    for (a, r, se) in &result.curve {
        w.write_record([a.to_string(), r.to_string(), se.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- config file

/// One experiment, selected by its `kind` tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    TwoMdpCurve(TwoMdpCurveConfig),
    ThreeMdpGrid(ThreeMdpGridConfig),
    SixteenMdpCompare(SixteenMdpConfig),
    GdaDirichlet(GdaDirichletConfig),
    Cutplane(CutplaneConfig),
    BanditSurface(BanditSurfaceConfig),
    BanditWorstcase(BanditWorstCaseConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::TwoMdpCurve(_) => "two-mdp-curve",
            Self::ThreeMdpGrid(_) => "three-mdp-grid",
            Self::SixteenMdpCompare(_) => "sixteen-mdp-compare",
            Self::GdaDirichlet(_) => "gda-dirichlet",
            Self::Cutplane(_) => "cutplane",
            Self::BanditSurface(_) => "bandit-surface",
            Self::BanditWorstcase(_) => "bandit-worstcase",
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive_mc = |mc: &BanditMcConfig| {
            if mc.n_mc == 0 || mc.horizon_trunc == 0 || mc.n_max < 2 {
                Err(Error::Config("bandit MC needs n_mc, horizon_trunc >= 1 and n_max >= 2".into()))
            } else {
                Ok(())
            }
        };
        let gamma_ok = |g: f64| {
            if g > 0.0 && g < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("bandit discount must lie in (0, 1), got {g}")))
            }
        };
        match self {
            Self::TwoMdpCurve(c) => {
                c.mdps.validate()?;
                if c.mdps.n_mdps != 2 || c.resolution == 0 || c.psrl_n_mc == 0 {
                    return Err(Error::Config("two-mdp-curve needs n_mdps = 2, resolution and psrl_n_mc >= 1".into()));
                }
            }
            Self::ThreeMdpGrid(c) => {
                c.mdps.validate()?;
                if c.mdps.n_mdps != 3 || c.resolution == 0 {
                    return Err(Error::Config("three-mdp-grid needs n_mdps = 3 and resolution >= 1".into()));
                }
            }
            Self::SixteenMdpCompare(c) => {
                if c.seeds.is_empty() || c.n_mdps == 0 || c.horizon == 0 {
                    return Err(Error::Config("sixteen-mdp-compare needs seeds, n_mdps and horizon".into()));
                }
            }
            Self::GdaDirichlet(c) => {
                c.gda.validate()?;
                if c.n_states < 2 || c.window == 0 || c.n_eval == 0 || c.horizon == 0 {
                    return Err(Error::Config("gda-dirichlet needs n_states >= 2, window, horizon and n_eval >= 1".into()));
                }
            }
            Self::Cutplane(c) => {
                c.mdps.validate()?;
                if c.cutting_plane.iterations == 0 {
                    return Err(Error::Config("cutplane needs iterations >= 1".into()));
                }
            }
            Self::BanditSurface(c) => {
                positive_mc(&c.mc)?;
                gamma_ok(c.gamma)?;
                if c.a2.is_empty() || c.b2.is_empty() || c.a2.iter().chain(&c.b2).any(|&x| !(x > 0.0)) {
                    return Err(Error::Config("bandit-surface grids must be nonempty and positive".into()));
                }
            }
            Self::BanditWorstcase(c) => {
                positive_mc(&c.mc)?;
                gamma_ok(c.gamma)?;
                if !(2..=4).contains(&c.arms) || c.grid.is_empty() || c.grid.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::Config("bandit-worstcase needs 2-4 arms and a positive grid".into()));
                }
            }
        }
        Ok(())
    }
}
