//! Experiment harness: deterministic Monte Carlo runs for perturbed random
//! matrices, lemma verification batteries and single-ring simulations.
//!
//! Exit codes: 0 all assertions passed, 1 assertion or runtime failure,
//! 2 usage error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use rmtlab::ensembles::Ensemble;
use rmtlab::ring::RingField;
use rmtlab_cli::config::{load_config_file, Experiment, ExperimentConfig};
use rmtlab_cli::run::{self, run_experiment};

#[derive(Parser)]
#[command(
    name = "rmtlab",
    version,
    about = "Monte Carlo laboratory for random unitary and orthogonal perturbations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Key=value config file; explicit flags override file entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed for all derived trial streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Results are identical for any value.
    #[arg(long)]
    threads: Option<usize>,
    /// Output path for the primary artifact.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TailArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Matrix dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Diagonal spec: zero | ident | neg-ident | scalar:<c> | diag:<list> | uniform:<lo>:<hi>.
    #[arg(long)]
    d: Option<String>,
    /// Perturbation ensemble: unitary | orthogonal | special_orthogonal.
    #[arg(long)]
    ensemble: Option<String>,
    /// Threshold grid: log:<lo>:<hi>:<points> | list:<v1,...>.
    #[arg(long = "t-grid")]
    t_grid: Option<String>,
    /// Monte Carlo trials.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Verifier name; see `lemma --list`.
    #[arg(long)]
    lemma: Option<String>,
    /// List the available verifiers and exit.
    #[arg(long, default_value_t = false)]
    list: bool,
    #[arg(long)]
    n: Option<usize>,
    /// Deterministic instances.
    #[arg(long)]
    instances: Option<u64>,
    /// Monte Carlo trials (statistical verifiers).
    #[arg(long)]
    trials: Option<u64>,
    /// Sampled test vectors per instance (minor verifiers).
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args, Debug)]
struct SingleRingArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<String>,
    /// Rotation field: complex | real.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    /// Annulus margin for the coverage report.
    #[arg(long)]
    margin: Option<f64>,
}

#[derive(Args, Debug)]
struct SrCheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<String>,
    /// Norm threshold M.
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    kappa1: Option<f64>,
    /// Number of grid points on the Im z = n^-kappa line.
    #[arg(long = "z-points")]
    z_points: Option<usize>,
    /// Evaluate the transform of the symmetrized singular-value measure.
    #[arg(long, default_value_t = false)]
    symmetrize: bool,
    /// Real shifts z for the log^2 integral estimate (comma separated).
    #[arg(long = "sr3-z")]
    sr3_z: Option<String>,
    /// Indicator exponent delta in n^-delta.
    #[arg(long = "delta-exp")]
    delta_exp: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Scale M of the rank-one family.
    #[arg(long = "m-param")]
    m_param: Option<f64>,
    #[arg(long)]
    draws: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Tail estimation of P(s_min(D + U) <= t) with CSV/JSON emission.
    Tail(TailArgs),
    /// Run one inequality verifier and emit its JSON report.
    Lemma(LemmaArgs),
    /// Eigenvalue clouds of U D V with annulus coverage.
    SingleRing(SingleRingArgs),
    /// Spectral condition battery for a prescribed singular-value law.
    SrCheck(SrCheckArgs),
    /// Rank-one family B = M[[1,i],[i,-1]]: determinant identity and
    /// poor invertibility under rotations.
    Counterexample(CounterexampleArgs),
    /// Run the whole verifier battery with trimmed defaults.
    VerifyAll(CommonArgs),
}

/// Flag > config file > default resolution.
struct Resolver {
    file: BTreeMap<String, String>,
}

impl Resolver {
    fn new(common: &CommonArgs) -> Result<Self> {
        let file = match &common.config {
            Some(path) => load_config_file(path)?,
            None => BTreeMap::new(),
        };
        Ok(Self { file })
    }

    fn get<T: FromStr + Clone>(&self, flag: &Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v.clone());
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map_err(|e| anyhow!("config key `{key}`: {e}")),
            None => Ok(default),
        }
    }
}

fn resolve_common(
    resolver: &Resolver,
    common: &CommonArgs,
    default_out: &str,
) -> Result<(u64, usize, PathBuf)> {
    let seed = resolver.get(&common.seed, "seed", 42u64)?;
    let threads = resolver.get(&common.threads, "threads", 0usize)?;
    let out = resolver.get(&common.out, "out", PathBuf::from(default_out))?;
    Ok((seed, threads, out))
}

fn build_config(command: &Command) -> Result<ExperimentConfig> {
    match command {
        Command::Tail(args) => {
            let r = Resolver::new(&args.common)?;
            let (seed, threads, out_path) = resolve_common(&r, &args.common, "tail.csv")?;
            let ensemble_name = r.get(&args.ensemble, "ensemble", "unitary".to_string())?;
            let n = r.get(&args.n, "n", 8)?;
            let d_spec = r.get(&args.d, "d", "uniform:1:2".to_string())?;
            let t_grid_spec = r.get(&args.t_grid, "t-grid", "log:1e-6:1e-1:25".to_string())?;
            // Validate the mini-grammars up front: bad specs are usage errors.
            rmtlab_cli::config::parse_d_spec(&d_spec, n)?;
            rmtlab_cli::config::parse_t_grid(&t_grid_spec)?;
            Ok(ExperimentConfig {
                experiment: Experiment::Tail {
                    n,
                    d_spec,
                    ensemble: Ensemble::from_str(&ensemble_name)?,
                    t_grid_spec,
                    trials: r.get(&args.trials, "trials", 10_000)?,
                },
                seed,
                threads,
                out_path,
            })
        }
        Command::Lemma(args) => {
            if args.list {
                for name in run::LEMMA_NAMES {
                    println!("{name}");
                }
                std::process::exit(0);
            }
            let r = Resolver::new(&args.common)?;
            let (seed, threads, out_path) = resolve_common(&r, &args.common, "lemma.json")?;
            let name = r
                .get(&args.lemma, "lemma", String::new())?
                .trim()
                .to_string();
            if name.is_empty() {
                return Err(anyhow!("`lemma` requires --lemma <name>; see --list"));
            }
            let (dn, di, dt, ds) = run::lemma_defaults(&name);
            if dn == 0 {
                return Err(anyhow!(
                    "unknown lemma `{name}` (expected one of {:?})",
                    run::LEMMA_NAMES
                ));
            }
            Ok(ExperimentConfig {
                experiment: Experiment::Lemma {
                    name,
                    n: r.get(&args.n, "n", dn)?,
                    instances: r.get(&args.instances, "instances", di)?,
                    trials: r.get(&args.trials, "trials", dt)?,
                    samples: r.get(&args.samples, "samples", ds)?,
                },
                seed,
                threads,
                out_path,
            })
        }
        Command::SingleRing(args) => {
            let r = Resolver::new(&args.common)?;
            let (seed, threads, out_path) = resolve_common(&r, &args.common, "ring.csv")?;
            let field_name = r.get(&args.field, "field", "complex".to_string())?;
            let n = r.get(&args.n, "n", 256)?;
            let d_spec = r.get(&args.d, "d", "uniform:1:2".to_string())?;
            rmtlab_cli::config::parse_d_spec(&d_spec, n)?;
            Ok(ExperimentConfig {
                experiment: Experiment::SingleRing {
                    n,
                    d_spec,
                    field: RingField::from_str(&field_name)?,
                    trials: r.get(&args.trials, "trials", 10)?,
                    margin: r.get(&args.margin, "margin", 0.15)?,
                },
                seed,
                threads,
                out_path,
            })
        }
        Command::SrCheck(args) => {
            let r = Resolver::new(&args.common)?;
            let (seed, threads, out_path) = resolve_common(&r, &args.common, "sr-check.json")?;
            let sr3_raw = r.get(&args.sr3_z, "sr3-z", "0.5,1.5,2.5".to_string())?;
            let sr3_z: Vec<f64> = if sr3_raw.trim().is_empty() {
                Vec::new()
            } else {
                sr3_raw
                    .split(',')
                    .map(|p| p.trim().parse::<f64>().context("sr3-z value"))
                    .collect::<Result<Vec<f64>>>()?
            };
            let n = r.get(&args.n, "n", 64)?;
            let d_spec = r.get(&args.d, "d", "uniform:1:2".to_string())?;
            rmtlab_cli::config::parse_d_spec(&d_spec, n)?;
            Ok(ExperimentConfig {
                experiment: Experiment::SrCheck {
                    n,
                    d_spec,
                    m_threshold: r.get(&args.m, "m", 2.5)?,
                    kappa: r.get(&args.kappa, "kappa", 0.5)?,
                    kappa1: r.get(&args.kappa1, "kappa1", 10.0)?,
                    z_points: r.get(&args.z_points, "z-points", 100)?,
                    symmetrize: args.symmetrize
                        || r.file.get("symmetrize").map(String::as_str) == Some("true"),
                    sr3_z,
                    delta_exp: r.get(&args.delta_exp, "delta-exp", 0.2)?,
                    trials: r.get(&args.trials, "trials", 500)?,
                },
                seed,
                threads,
                out_path,
            })
        }
        Command::Counterexample(args) => {
            let r = Resolver::new(&args.common)?;
            let (seed, threads, out_path) =
                resolve_common(&r, &args.common, "counterexample.json")?;
            Ok(ExperimentConfig {
                experiment: Experiment::Counterexample {
                    m_param: r.get(&args.m_param, "m-param", 100.0)?,
                    draws: r.get(&args.draws, "draws", 1000)?,
                },
                seed,
                threads,
                out_path,
            })
        }
        Command::VerifyAll(common) => {
            let r = Resolver::new(common)?;
            let (seed, threads, out_path) = resolve_common(&r, common, "verify-all.json")?;
            Ok(ExperimentConfig {
                experiment: Experiment::VerifyAll,
                seed,
                threads,
                out_path,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&config) {
        Ok(manifest) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&manifest).expect("manifest serializes")
            );
            if manifest.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
