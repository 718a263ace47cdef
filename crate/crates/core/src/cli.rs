//! The `maxstable` command-line front end.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::estimation::{self, EstimateOptions, EstimateReport, Estimator};
use crate::exactdist::PairDependence;
use crate::experiment::{self, McConfig};
use crate::kernels::KernelModel;
use crate::observations::Observations;
use crate::oracle;
use crate::simulator::simulate_with_stats;
use crate::sites::SiteSet;
use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "maxstable", version, about = "Moving-maximum max-stable processes: simulation, distributions, estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate replications at the configured sites.
    Simulate {
        config: PathBuf,
        /// Observation CSV to write.
        #[arg(short, long)]
        out: PathBuf,
        /// Sites CSV to write; defaults to the output path with `.sites.csv`.
        #[arg(long)]
        sites_out: Option<PathBuf>,
    },
    /// Evaluate `-log P{Z(0) <= w1, Z(t) <= w2}` on a grid.
    Dist {
        /// Config with a [model] section.
        config: PathBuf,
        /// Displacement `t`, one or two comma-separated coordinates. Defaults
        /// to the difference of the two configured sites.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Option<Vec<f64>>,
        /// Grid for w1.
        #[arg(long, value_delimiter = ',', required = true)]
        w1: Vec<f64>,
        /// Grid for w2; defaults to the w1 grid.
        #[arg(long, value_delimiter = ',')]
        w2: Option<Vec<f64>>,
        /// Integrate numerically instead of using the closed forms.
        #[arg(long)]
        oracle: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Estimate the dependence parameters from observations.
    Estimate {
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        sites: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        k: KArgs,
        /// pairwise, range, exp2d or general-normal; defaults by model.
        #[arg(long)]
        estimator: Option<Estimator>,
        #[arg(long)]
        beta_max: Option<f64>,
        /// JSON report; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Per-pair CSV. With a k grid, `_k<k>` is added before the extension.
        #[arg(long)]
        pairs_out: Option<PathBuf>,
    },
    /// Compare empirical and model-implied tail dependence per pair.
    Diagnose {
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        sites: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Repeated simulate-then-estimate experiment.
    Mc {
        config: PathBuf,
        /// Per-run CSV.
        #[arg(short, long)]
        out: PathBuf,
        /// Summary JSON; stdout when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// normal1d, dexp1d, t1d, normal2d, exp2d, t2d or gnormal2d.
    #[arg(long)]
    pub model: String,
    /// Scale parameter; only needed for diagnostics.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nu: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct KArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<usize>>,
}

fn usage(msg: impl std::fmt::Display) -> Error {
    Error::config(0, msg)
}

impl ModelArgs {
    /// Builds the model; with `fitted = false` missing scale parameters are
    /// filled with placeholders, since estimation ignores them.
    pub fn build(&self, fitted: bool) -> Result<KernelModel> {
        let need = |v: Option<f64>, name: &str| -> Result<f64> {
            match v {
                Some(x) => Ok(x),
                None if !fitted => Ok(1.0),
                None => Err(usage(format!("--{name} is required for model {}", self.model))),
            }
        };
        let beta = || need(self.beta, "beta");
        let m = match self.model.as_str() {
            "normal1d" => KernelModel::Normal1D { beta: beta()? },
            "dexp1d" => KernelModel::DoubleExp1D { beta: beta()? },
            "normal2d" => KernelModel::Normal2D { beta: beta()? },
            "exp2d" => KernelModel::Exp2D { beta: beta()? },
            "t1d" => KernelModel::StudentT1D {
                beta: beta()?,
                nu: self.nu.ok_or_else(|| usage("--nu is required for t1d"))?,
            },
            "t2d" => KernelModel::StudentT2D {
                beta: beta()?,
                alpha: self.alpha.ok_or_else(|| usage("--alpha is required for t2d"))?,
            },
            "gnormal2d" => KernelModel::GeneralNormal2D {
                beta1: need(self.beta1, "beta1")?,
                beta2: need(self.beta2, "beta2")?,
                rho: if fitted { need(self.rho, "rho")? } else { self.rho.unwrap_or(0.0) },
            },
            other => return Err(usage(format!("unknown model family '{other}'"))),
        };
        m.validate()?;
        Ok(m)
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, out, sites_out } => cmd_simulate(&config, &out, sites_out),
        Command::Dist {
            config,
            t,
            w1,
            w2,
            oracle,
            out,
        } => cmd_dist(&config, t, &w1, w2, oracle, out),
        Command::Estimate {
            obs,
            sites,
            model,
            k,
            estimator,
            beta_max,
            out,
            pairs_out,
        } => cmd_estimate(&obs, &sites, &model, &k, estimator, beta_max, out, pairs_out),
        Command::Diagnose {
            obs,
            sites,
            model,
            k,
            out,
        } => cmd_diagnose(&obs, &sites, &model, k, out),
        Command::Mc { config, out, summary } => cmd_mc(&config, &out, summary),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

fn cmd_simulate(config: &Path, out: &Path, sites_out: Option<PathBuf>) -> Result<()> {
    let cfg = Config::load(config)?;
    let model = cfg.require_model()?;
    let sites = cfg.require_sites()?;
    let n = cfg.require_n()?;
    let (z, stats) = simulate_with_stats(&model, sites, n, &cfg.sim)?;
    let mut w = create(out)?;
    z.write_csv(&mut w)?;
    w.flush()?;
    let sites_path = sites_out.unwrap_or_else(|| out.with_extension("sites.csv"));
    let mut w = create(&sites_path)?;
    sites.write_csv(&mut w)?;
    w.flush()?;
    let truncated = stats.truncated_mass.map_or("unknown".to_string(), |m| format!("{m:e}"));
    println!(
        "model={} d={} n={n} seed={} scheme={:?} points={} max_points_per_replication={} truncated_mass={truncated}",
        serde_json::to_string(&model).expect("model serializes"),
        sites.len(),
        cfg.sim.seed,
        stats.scheme,
        stats.total_points,
        stats.max_points_per_replication,
    );
    Ok(())
}

fn cmd_dist(config: &Path, t: Option<Vec<f64>>, w1: &[f64], w2: Option<Vec<f64>>, use_oracle: bool, out: Option<PathBuf>) -> Result<()> {
    let cfg = Config::load(config)?;
    let model = cfg.require_model()?;
    let t = match t {
        Some(t) => t,
        None => match &cfg.sites {
            Some(s) if s.len() == 2 => s.displacement(0, 1),
            _ => return Err(usage("give --t or configure exactly two sites")),
        },
    };
    if t.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: t.len(),
        });
    }
    let pd = PairDependence::new(model, &t)?;
    let pair = if model.dim() == 1 {
        SiteSet::new_1d(&[0.0, t[0]])?
    } else {
        SiteSet::new_2d(&[[0.0, 0.0], [t[0], t[1]]])?
    };
    let w2 = w2.unwrap_or_else(|| w1.to_vec());
    let mut w = output(out.as_deref())?;
    writeln!(w, "w1,w2,V,cdf")?;
    for &a in w1 {
        for &b in &w2 {
            if !(a > 0.0 && b > 0.0) {
                return Err(usage(format!("grid values must be positive, got ({a}, {b})")));
            }
            let v = if use_oracle {
                oracle::l_numeric(&model, &pair, &[1.0 / a, 1.0 / b])?
            } else {
                pd.neg_log_cdf(a, b)?
            };
            writeln!(w, "{a:.16e},{b:.16e},{v:.16e},{:.16e}", (-v).exp())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_inputs(obs: &Path, sites: &Path) -> Result<(Observations, SiteSet)> {
    let z = Observations::read_csv(open(obs)?)?;
    let s = SiteSet::read_csv(open(sites)?)?;
    if z.d() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            found: z.d(),
        });
    }
    Ok((z, s))
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    obs: &Path,
    sites: &Path,
    model: &ModelArgs,
    k: &KArgs,
    estimator: Option<Estimator>,
    beta_max: Option<f64>,
    out: Option<PathBuf>,
    pairs_out: Option<PathBuf>,
) -> Result<()> {
    let (z, s) = read_inputs(obs, sites)?;
    let model = model.build(false)?;
    let estimator = estimator.unwrap_or_else(|| Estimator::default_for(&model));
    let grid = match (k.k, &k.k_grid) {
        (Some(k), _) => vec![k],
        (None, Some(g)) => g.clone(),
        (None, None) => unreachable!("clap requires one of --k and --k-grid"),
    };
    let reports: Vec<EstimateReport> = grid
        .iter()
        .map(|&k| {
            let opts = EstimateOptions {
                k,
                beta_max,
                variances: true,
            };
            estimation::estimate(&z, &s, &model, estimator, &opts)
        })
        .collect::<Result<_>>()?;
    let mut w = output(out.as_deref())?;
    let json = if k.k.is_some() {
        serde_json::to_string_pretty(&reports[0])
    } else {
        serde_json::to_string_pretty(&reports)
    };
    writeln!(w, "{}", json.expect("report serializes"))?;
    w.flush()?;
    if let Some(p) = pairs_out {
        for r in &reports {
            let path = if k.k.is_some() { p.clone() } else { with_suffix(&p, &format!("_k{}", r.k)) };
            let mut w = create(&path)?;
            r.write_pairs_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn cmd_diagnose(obs: &Path, sites: &Path, model: &ModelArgs, k: usize, out: Option<PathBuf>) -> Result<()> {
    let (z, s) = read_inputs(obs, sites)?;
    let model = model.build(true)?;
    let d = estimation::model_diagnostic(&z, &s, &model, k)?;
    let mut w = output(out.as_deref())?;
    writeln!(w, "j,m,distance,R_hat,R_model,gap")?;
    for r in &d.pairs {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.j, r.m, r.distance, r.r_hat, r.model_r, r.gap
        )?;
    }
    w.flush()?;
    eprintln!("max_abs_gap={:.6}", d.max_abs_gap);
    Ok(())
}

fn cmd_mc(config: &Path, out: &Path, summary: Option<PathBuf>) -> Result<()> {
    let cfg = Config::load(config)?;
    let model = cfg.require_model()?;
    let mc = McConfig {
        model,
        sites: cfg.require_sites()?.clone(),
        n: cfg.require_n()?,
        k: cfg.require_k()?,
        runs: cfg.require_runs()?,
        seed: cfg.sim.seed,
        estimator: cfg.estimator.unwrap_or_else(|| Estimator::default_for(&model)),
        sim: cfg.sim,
        beta_max: cfg.beta_max,
    };
    let outcome = experiment::run(&mc)?;
    let mut w = create(out)?;
    outcome.write_csv(&mut w)?;
    w.flush()?;
    let mut w = output(summary.as_deref())?;
    writeln!(w, "{}", serde_json::to_string_pretty(&outcome.summary).expect("summary serializes"))?;
    w.flush()?;
    Ok(())
}
