use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use minimax_bayes::cutting_plane::CuttingPlaneConfig;
use minimax_bayes::experiments::{self as ex, ExperimentConfig};
use minimax_bayes::gda::{gda_run, GdaConfig, GdaPrior};
use minimax_bayes::policy::{Partition, SoftmaxPartitionPolicy};
use minimax_bayes::regret::MdpSet;

#[derive(Parser)]
#[command(name = "mmbrl", version, about = "Minimax-Bayes RL experiments")]
struct Cli {
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON config; its `kind` must match the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random MDP set as JSON.
    GenMdps {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        actions: usize,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
        #[arg(long, default_value_t = 1.0)]
        discount: f64,
        #[arg(long, default_value = "mdps.json")]
        out: PathBuf,
    },
    /// Bayesian regret of several policies along the belief segment of two MDPs.
    TwoMdpCurve {
        #[arg(long, default_value = "two_mdp_curve.csv")]
        out: PathBuf,
    },
    /// Regret surface and gradients over the 2-simplex of three MDPs.
    ThreeMdpGrid {
        #[arg(long, default_value = "three_mdp_grid.csv")]
        out: PathBuf,
    },
    /// Worst-case regret of the minimax and uniform-belief policies on 16-MDP sets.
    Compare16 {
        #[arg(long, default_value = "compare16.csv")]
        out: PathBuf,
    },
    /// Gradient descent-ascent from a config file; writes the per-iteration trace.
    Gda {
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
    },
    /// Train uniform, minimax and worst-case-response policies on a Dirichlet prior
    /// and compare them across six evaluation priors.
    GdaDirichlet {
        #[arg(long, default_value = "gda_dirichlet.csv")]
        out: PathBuf,
    },
    /// Cutting-plane search for the maximin belief.
    Cutplane {
        /// MDP set JSON (as written by gen-mdps); otherwise generated from the config.
        #[arg(long)]
        mdps: Option<PathBuf>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value = "run.json")]
        out: PathBuf,
    },
    /// Gittins-policy regret over a grid of second-arm priors.
    BanditSurface {
        #[arg(long, default_value = "bandit_surface.csv")]
        out: PathBuf,
    },
    /// Symmetric worst-case Beta prior search.
    BanditWorstcase {
        #[arg(long, default_value = "bandit_worstcase.csv")]
        out: PathBuf,
    },
}

/// Config accepted by the `gda` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GdaRunConfig {
    #[serde(default)]
    gda: GdaConfig,
    prior: GdaPrior,
    /// Defaults to the full-history partition for the prior's shape.
    #[serde(default)]
    partition: Option<Partition>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: Option<u64>,
    config_sha256: String,
    config: &'a serde_json::Value,
    outputs: Vec<String>,
}

fn read_config(path: Option<&Path>) -> Result<Option<String>> {
    path.map(|p| fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))).transpose()
}

/// Loads the experiment config for `kind`, or its defaults when no file is given.
fn experiment(cli: &Cli, default: ExperimentConfig) -> Result<ExperimentConfig> {
    let Some(text) = read_config(cli.config.as_deref())? else { return Ok(default) };
    let cfg = ExperimentConfig::from_json(&text)?;
    if cfg.kind() != default.kind() {
        bail!("config kind `{}` does not match subcommand `{}`", cfg.kind(), default.kind());
    }
    Ok(cfg)
}

fn out_path(cli: &Cli, out: &Path) -> PathBuf {
    if out.is_absolute() {
        out.to_path_buf()
    } else {
        cli.out_dir.join(out)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_manifest(cli: &Cli, command: &str, seed: Option<u64>, config: &impl Serialize, outputs: &[&Path]) -> Result<()> {
    let value = serde_json::to_value(config)?;
    let canonical = serde_json::to_vec(&value)?;
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config_sha256: hex::encode(Sha256::digest(&canonical)),
        config: &value,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = cli.out_dir.join(format!("{command}.manifest.json"));
    serde_json::to_writer_pretty(create(&path)?, &manifest)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::GenMdps { n, states, actions, horizon, discount, out } => {
            let mut spec = ex::MdpSetSpec {
                n_mdps: *n,
                n_states: *states,
                n_actions: *actions,
                horizon: *horizon,
                discount: *discount,
                seed: 0,
            };
            if let Some(text) = read_config(cli.config.as_deref())? {
                spec = serde_json::from_str(&text)?;
            }
            spec.seed = cli.seed.unwrap_or(spec.seed);
            let set = spec.build()?;
            let path = out_path(cli, out);
            serde_json::to_writer_pretty(create(&path)?, &set)?;
            write_manifest(cli, "gen-mdps", Some(spec.seed), &spec, &[&path])?;
        }
        Command::TwoMdpCurve { out } => {
            let ExperimentConfig::TwoMdpCurve(mut c) = experiment(cli, ExperimentConfig::TwoMdpCurve(Default::default()))?
            else {
                unreachable!()
            };
            c.seed = cli.seed.unwrap_or(c.seed);
            let curve = ex::run_two_mdp_curve(&c)?;
            let path = out_path(cli, out);
            curve.write_csv(create(&path)?)?;
            write_manifest(cli, "two-mdp-curve", Some(c.seed), &ExperimentConfig::TwoMdpCurve(c), &[&path])?;
        }
        Command::ThreeMdpGrid { out } => {
            let ExperimentConfig::ThreeMdpGrid(mut c) = experiment(cli, ExperimentConfig::ThreeMdpGrid(Default::default()))?
            else {
                unreachable!()
            };
            c.mdps.seed = cli.seed.unwrap_or(c.mdps.seed);
            let points = ex::run_three_mdp_grid(&c)?;
            let path = out_path(cli, out);
            ex::write_grid_csv(&points, create(&path)?)?;
            write_manifest(cli, "three-mdp-grid", Some(c.mdps.seed), &ExperimentConfig::ThreeMdpGrid(c), &[&path])?;
        }
        Command::Compare16 { out } => {
            let ExperimentConfig::SixteenMdpCompare(mut c) =
                experiment(cli, ExperimentConfig::SixteenMdpCompare(Default::default()))?
            else {
                unreachable!()
            };
            if let Some(s) = cli.seed {
                c.seeds = (0..c.seeds.len() as u64).map(|i| s + i).collect();
            }
            let rows = ex::run_sixteen_mdp_compare(&c)?;
            let path = out_path(cli, out);
            ex::write_sixteen_csv(&rows, create(&path)?)?;
            write_manifest(cli, "compare16", cli.seed, &ExperimentConfig::SixteenMdpCompare(c), &[&path])?;
        }
        Command::Gda { out } => {
            let Some(text) = read_config(cli.config.as_deref())? else {
                bail!("gda needs --config with `prior` (and optionally `gda`, `partition`)");
            };
            let mut c: GdaRunConfig = serde_json::from_str(&text)?;
            c.gda.seed = cli.seed.unwrap_or(c.gda.seed);
            c.gda.belief_kind = c.prior.kind();
            let partition = match c.partition {
                Some(p) => p,
                None => match &c.prior {
                    GdaPrior::Finite { mdps, .. } => Partition::FullHistory {
                        n_states: mdps.n_states(),
                        n_actions: mdps.n_actions(),
                        horizon: mdps.horizon(),
                    },
                    GdaPrior::Dirichlet { prior } => Partition::FullHistory {
                        n_states: prior.n_states(),
                        n_actions: prior.n_actions(),
                        horizon: prior.horizon(),
                    },
                },
            };
            c.partition = Some(partition);
            let output = gda_run(&c.gda, SoftmaxPartitionPolicy::zeros(partition), c.prior.clone())?;
            let path = out_path(cli, out);
            output.trace.write_csv(create(&path)?)?;
            let result = path.with_extension("output.json");
            serde_json::to_writer_pretty(create(&result)?, &output)?;
            write_manifest(cli, "gda", Some(c.gda.seed), &c, &[&path, &result])?;
        }
        Command::GdaDirichlet { out } => {
            let ExperimentConfig::GdaDirichlet(mut c) = experiment(cli, ExperimentConfig::GdaDirichlet(Default::default()))?
            else {
                unreachable!()
            };
            c.seed = cli.seed.unwrap_or(c.seed);
            let result = ex::run_gda_dirichlet(&c)?;
            let path = out_path(cli, out);
            ex::write_robustness_csv(&result.cells, create(&path)?)?;
            let summary = path.with_extension("summary.json");
            serde_json::to_writer_pretty(create(&summary)?, &result)?;
            write_manifest(cli, "gda-dirichlet", Some(c.seed), &ExperimentConfig::GdaDirichlet(c), &[&path, &summary])?;
        }
        Command::Cutplane { mdps, iters, out } => {
            let ExperimentConfig::Cutplane(mut c) = experiment(cli, ExperimentConfig::Cutplane(Default::default()))? else {
                unreachable!()
            };
            c.seed = cli.seed.unwrap_or(c.seed);
            if let Some(n) = iters {
                c.cutting_plane = CuttingPlaneConfig { iterations: *n, ..c.cutting_plane };
            }
            let set: MdpSet<f64> = match mdps {
                Some(p) => serde_json::from_reader(File::open(p).with_context(|| format!("opening {}", p.display()))?)?,
                None => c.mdps.build()?,
            };
            let record = ex::run_cutplane(&set, &c)?;
            let path = out_path(cli, out);
            serde_json::to_writer_pretty(create(&path)?, &record)?;
            #[derive(Serialize)]
            struct Resolved<'a> {
                #[serde(flatten)]
                config: &'a ex::CutplaneConfig,
                mdps_file: Option<&'a Path>,
                mdps_sha256: String,
            }
            let set_hash = hex::encode(Sha256::digest(serde_json::to_vec(&set)?));
            let resolved = Resolved { config: &c, mdps_file: mdps.as_deref(), mdps_sha256: set_hash };
            write_manifest(cli, "cutplane", Some(c.seed), &resolved, &[&path])?;
        }
        Command::BanditSurface { out } => {
            let ExperimentConfig::BanditSurface(mut c) = experiment(cli, ExperimentConfig::BanditSurface(Default::default()))?
            else {
                unreachable!()
            };
            c.seed = cli.seed.unwrap_or(c.seed);
            let cells = ex::run_bandit_surface(&c)?;
            let path = out_path(cli, out);
            minimax_bayes::bandits::write_surface_csv(&cells, create(&path)?)?;
            write_manifest(cli, "bandit-surface", Some(c.seed), &ExperimentConfig::BanditSurface(c), &[&path])?;
        }
        Command::BanditWorstcase { out } => {
            let ExperimentConfig::BanditWorstcase(mut c) =
                experiment(cli, ExperimentConfig::BanditWorstcase(Default::default()))?
            else {
                unreachable!()
            };
            c.seed = cli.seed.unwrap_or(c.seed);
            let result = ex::run_bandit_worst_case(&c)?;
            let path = out_path(cli, out);
            ex::write_worst_case_csv(&result, create(&path)?)?;
            println!("a* = {} (regret {:.5} ± {:.5})", result.a_star, result.regret, result.se);
            write_manifest(cli, "bandit-worstcase", Some(c.seed), &ExperimentConfig::BanditWorstcase(c), &[&path])?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    run(&cli)
}
