use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rebk_core::bench::ProblemSource;
use rebk_core::io::parse_key_values;
use rebk_core::{Algorithm, Stepsize, StopMode};

#[derive(Debug, Parser)]
#[command(name = "rebk", version, about = "Randomized extended block Kaczmarz solvers and benchmarks")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic system, its solution and residual split to a directory.
    Generate(GenerateArgs),
    /// Run one solver on one system and report the result.
    Solve(SolveArgs),
    /// Run a multi-trial sweep and write CSV.
    Bench(BenchArgs),
    /// Print the convergence-rate constants for a matrix and partition.
    Rates(RatesArgs),
}

impl Command {
    pub fn config(&self) -> Option<&Path> {
        match self {
            Command::Generate(a) => a.config.as_deref(),
            Command::Solve(a) => a.config.as_deref(),
            Command::Bench(a) => a.config.as_deref(),
            Command::Rates(a) => a.config.as_deref(),
        }
    }
}

/// `M,N,RANK,KAPPA` for Type I or `M,N` for Type II.
#[derive(Debug, Args, Clone, Default)]
#[group(multiple = false)]
pub struct GeneratorArgs {
    /// Type I matrix `U D Vᵀ`: M,N,RANK,KAPPA.
    #[arg(long, value_name = "M,N,RANK,KAPPA", value_parser = parse_type1)]
    pub type1: Option<ProblemSource>,
    /// Type II Gaussian matrix: M,N.
    #[arg(long, value_name = "M,N", value_parser = parse_type2)]
    pub type2: Option<ProblemSource>,
}

impl GeneratorArgs {
    pub fn source(&self) -> Option<ProblemSource> {
        self.type1.clone().or_else(|| self.type2.clone())
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Add a residual in null(Aᵀ) to the right-hand side.
    #[arg(long)]
    pub inconsistent: bool,
    /// Scale of the added residual before projection.
    #[arg(long, default_value_t = 1.0)]
    pub perp_scale: f64,
    #[arg(long, env = "KACZMARZ_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Key-value file with defaults for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Directory written by `generate`. Supplies A.mtx, b.mtx and x_star.mtx.
    #[arg(long, conflicts_with_all = ["matrix", "rhs"])]
    pub dir: Option<PathBuf>,
    #[arg(long, requires = "rhs")]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Reference solution for the error-based stopping rule.
    #[arg(long)]
    pub x_star: Option<PathBuf>,
    #[arg(long, default_value = "REBK")]
    pub algo: Algorithm,
    /// Row block size.
    #[arg(long, default_value_t = 10)]
    pub tau: usize,
    /// Column block size; defaults to the row block size.
    #[arg(long)]
    pub tau_col: Option<usize>,
    /// Stepsize. A trailing `x` means multiples of 1/β_max.
    #[arg(long, default_value = "1x")]
    pub alpha: Stepsize,
    #[arg(long, env = "KACZMARZ_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: usize,
    /// Check the stopping rule every this many iterations.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// `oracle`, `residual` or `max-iters`. Defaults to `oracle` when a
    /// reference solution is available.
    #[arg(long)]
    pub stop: Option<StopMode>,
    /// Write the error curve as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Skip the rate constants, which need a full SVD.
    #[arg(long)]
    pub no_rates: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// One of the built-in experiment grids.
    #[arg(long, conflicts_with_all = ["type1", "type2", "matrix"])]
    pub preset: Option<String>,
    /// Run presets at their original sizes instead of the reduced ones.
    #[arg(long, requires = "preset")]
    pub paper_scale: bool,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Matrix file; also used by the `table3` preset.
    #[arg(long, conflicts_with_all = ["type1", "type2"])]
    pub matrix: Option<PathBuf>,
    /// Right-hand side for `--matrix`; generated per trial when absent.
    #[arg(long, requires = "matrix")]
    pub rhs: Option<PathBuf>,
    /// Generate consistent right-hand sides.
    #[arg(long)]
    pub consistent: bool,
    #[arg(long, value_delimiter = ',', default_value = "REK,RDBK,REBK")]
    pub algo: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<Stepsize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, env = "KACZMARZ_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Run trials one at a time so wall times are not shared.
    #[arg(long)]
    pub serial: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a whitespace-separated table for gnuplot.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[arg(long, conflicts_with_all = ["type1", "type2"])]
    pub matrix: Option<PathBuf>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, env = "KACZMARZ_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub tau: usize,
    #[arg(long)]
    pub tau_col: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1x")]
    pub alpha: Vec<Stepsize>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn numbers<T: std::str::FromStr>(s: &str, want: usize) -> Result<Vec<T>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != want {
        return Err(format!("expected {want} comma-separated values, got {}", parts.len()));
    }
    parts
        .iter()
        .map(|p| p.parse().map_err(|_| format!("bad number '{p}'")))
        .collect()
}

fn parse_type1(s: &str) -> Result<ProblemSource, String> {
    let v: Vec<f64> = numbers(s, 4)?;
    let int = |x: f64| {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(format!("'{x}' is not a size"))
        }
    };
    Ok(ProblemSource::Type1 {
        m: int(v[0])?,
        n: int(v[1])?,
        rank: int(v[2])?,
        kappa: v[3],
    })
}

fn parse_type2(s: &str) -> Result<ProblemSource, String> {
    let v: Vec<usize> = numbers(s, 2)?;
    Ok(ProblemSource::Type2 { m: v[0], n: v[1] })
}

/// Rewrites `argv` so entries of the config file come first and explicit
/// flags, which appear later, override them.
pub fn splice_config(argv: &[String], config: &Path) -> rebk_core::Result<Vec<String>> {
    let text = std::fs::read_to_string(config).map_err(|source| rebk_core::Error::Io {
        path: config.to_path_buf(),
        source,
    })?;
    let pairs = parse_key_values(config, &text)?;
    let mut out = argv[..2].to_vec();
    for (key, value) in pairs {
        let flag = format!("--{}", key.replace('_', "-"));
        match value.as_str() {
            "true" => out.push(flag),
            "false" => {}
            _ => {
                out.push(flag);
                out.push(value);
            }
        }
    }
    out.extend_from_slice(&argv[2..]);
    Ok(out)
}
