use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rebk_core::bench::{preset, run_bench, write_csv, write_gnuplot, BenchReport, BenchSpec, ProblemSource};
use rebk_core::io::{read_matrix_market, read_vector, write_matrix_market, write_metadata, write_vector};
use rebk_core::{
    gen_type1, gen_type2, make_rhs, svd, Axis, Error, Matrix, Partition, RateConstants, Solver,
    SolverConfig, StopMode, StoppingRule,
};

use crate::args::{BenchArgs, GenerateArgs, GeneratorArgs, RatesArgs, SolveArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
    NotConverged { iters: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::NotConverged { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Data(e) => write!(f, "{e}"),
            CliError::NotConverged { iters } => write!(f, "did not converge within {iters} iterations"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => CliError::Usage(m),
            e => CliError::Data(e),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| {
        CliError::Data(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn generate_matrix(source: &ProblemSource, seed: u64) -> Result<Matrix, CliError> {
    Ok(match *source {
        ProblemSource::Type1 { m, n, rank, kappa } => gen_type1(m, n, rank, kappa, seed)?,
        ProblemSource::Type2 { m, n } => gen_type2(m, n, seed)?,
        ProblemSource::File { .. } => unreachable!("generators only"),
    })
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let source = args
        .generator
        .source()
        .ok_or_else(|| CliError::Usage("generate needs --type1 or --type2".into()))?;
    let a = generate_matrix(&source, args.seed)?;
    let p = make_rhs(a, args.seed.wrapping_add(1), args.inconsistent, args.perp_scale)?;

    let dir = &args.out;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_matrix_market(&p.a, dir.join("A.mtx"))?;
    write_vector(&p.b, dir.join("b.mtx"))?;
    write_vector(p.x_star.as_ref().expect("generated"), dir.join("x_star.mtx"))?;
    write_vector(p.b_perp.as_ref().expect("generated"), dir.join("b_perp.mtx"))?;
    let meta = [
        ("source", source.label()),
        ("rows", p.a.rows().to_string()),
        ("cols", p.a.cols().to_string()),
        ("rank", p.meta.rank.to_string()),
        ("kappa_bound", match source {
            ProblemSource::Type1 { kappa, .. } => kappa.to_string(),
            _ => "none".into(),
        }),
        ("consistent", p.meta.consistent.to_string()),
        ("residual_norm", format!("{:e}", p.meta.residual_norm)),
        ("perp_scale", args.perp_scale.to_string()),
        ("seed", args.seed.to_string()),
    ]
    .map(|(k, v)| (k.to_string(), v));
    write_metadata(&meta, dir.join("meta.txt"))?;
    println!(
        "wrote {}x{} system (rank {}, {}) to {}",
        p.a.rows(),
        p.a.cols(),
        p.meta.rank,
        if p.meta.consistent { "consistent" } else { "inconsistent" },
        dir.display()
    );
    Ok(())
}

fn partitions(a: &Matrix, tau: usize, tau_col: Option<usize>) -> Result<(Partition, Partition), CliError> {
    Ok((
        Partition::contiguous_clamped(Axis::Row, a.rows(), tau)?,
        Partition::contiguous_clamped(Axis::Column, a.cols(), tau_col.unwrap_or(tau))?,
    ))
}

fn solve_inputs(args: &SolveArgs) -> Result<(PathBuf, PathBuf, Option<PathBuf>), CliError> {
    if let Some(dir) = &args.dir {
        let x_star = args.x_star.clone().or_else(|| Some(dir.join("x_star.mtx")).filter(|p| p.exists()));
        return Ok((dir.join("A.mtx"), dir.join("b.mtx"), x_star));
    }
    match (&args.matrix, &args.rhs) {
        (Some(m), Some(b)) => Ok((m.clone(), b.clone(), args.x_star.clone())),
        _ => Err(CliError::Usage("solve needs --dir or both --matrix and --rhs".into())),
    }
}

pub fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let (a_path, b_path, x_path) = solve_inputs(args)?;
    let a = read_matrix_market(&a_path)?;
    let b = read_vector(&b_path)?;
    let x_star = x_path.map(read_vector).transpose()?;
    let mode = args.stop.unwrap_or(if x_star.is_some() {
        StopMode::OracleError
    } else {
        StopMode::ResidualProxy
    });

    let mut config = SolverConfig::new(args.algo)
        .stepsize(args.alpha)
        .seed(args.seed)
        .max_iters(args.max_iters)
        .record_errors(args.out.is_some())
        .stop(StoppingRule {
            mode,
            tol: args.tol,
            check_stride: args.stride,
        });
    let (rows, cols) = if args.algo.is_block() {
        partitions(&a, args.tau, args.tau_col)?
    } else {
        partitions(&a, 1, None)?
    };
    if args.algo.is_block() {
        config = config.partitions(rows.clone(), cols.clone());
    }
    let solver = Solver::new(&a, config)?;
    let trace = solver.run(&b, x_star.as_deref())?;

    let mut out = io::stdout().lock();
    let _ = writeln!(out, "algorithm      {}", trace.algorithm);
    let _ = writeln!(out, "shape          {}x{}", a.rows(), a.cols());
    if args.algo.is_block() {
        let _ = writeln!(out, "blocks         {} row, {} col", rows.len(), cols.len());
    }
    if let Some(beta) = trace.beta_max {
        let _ = writeln!(out, "beta_max       {beta:.6}");
    }
    let _ = writeln!(out, "alpha          {:.6} ({})", trace.alpha, args.alpha);
    let _ = writeln!(out, "stop           {mode:?}, tol {:e}, stride {}", args.tol, args.stride);
    let _ = writeln!(out, "ITER           {}", trace.iters);
    let _ = writeln!(out, "converged      {}", trace.converged);
    let _ = writeln!(out, "final metric   {:e}", trace.final_metric);
    let _ = writeln!(out, "wall time      {:.4}s", trace.wall_time);
    let _ = writeln!(out, "guaranteed     {}", !trace.outside_guaranteed_regime());
    for w in &trace.warnings {
        let _ = writeln!(out, "warning        {w}");
    }
    if !args.no_rates {
        let rc = RateConstants::compute(&a, &rows, &cols, trace.alpha)?;
        let _ = writeln!(out, "rates          delta {:.6}, eta {:.6}, rho {:.6}, rho_hat {:.6}", rc.delta, rc.eta, rc.rho, rc.rho_hat);
        let _ = writeln!(out, "optimal alpha  {:.6} (delta {:.6})", rc.alpha_opt, rc.delta_opt);
    }
    drop(out);

    if let Some(path) = &args.out {
        let f = File::create(path).map_err(io_err(path))?;
        let mut w = csv::Writer::from_writer(f);
        let col = match mode {
            StopMode::ResidualProxy => "residual_proxy",
            _ => "error",
        };
        w.write_record(["iteration", col]).map_err(Error::from)?;
        for (k, e) in &trace.errors {
            w.write_record([k.to_string(), e.to_string()]).map_err(Error::from)?;
        }
        w.flush().map_err(io_err(path))?;
    }

    if trace.converged || mode == StopMode::MaxItersOnly {
        Ok(())
    } else {
        Err(CliError::NotConverged { iters: trace.iters })
    }
}

fn bench_specs(args: &BenchArgs) -> Result<Vec<BenchSpec>, CliError> {
    let mut specs = if let Some(name) = &args.preset {
        if args.paper_scale {
            eprintln!("warning: --paper-scale runs the original problem sizes; expect hours and gigabytes");
        }
        preset(name, args.paper_scale, args.matrix.as_deref())?
    } else {
        let source = match (&args.matrix, args.generator.source()) {
            (Some(m), _) => ProblemSource::File {
                matrix: m.clone(),
                rhs: args.rhs.clone(),
            },
            (None, Some(s)) => s,
            (None, None) => {
                return Err(CliError::Usage("bench needs --preset, --type1, --type2 or --matrix".into()))
            }
        };
        vec![BenchSpec::new(source, args.algo.clone())]
    };
    let explicit_algos = args.preset.is_none();
    for s in &mut specs {
        if explicit_algos {
            s.algorithms = args.algo.clone();
        }
        if args.consistent {
            s.inconsistent = false;
        }
        if let Some(t) = &args.tau {
            s.taus = t.clone();
        }
        if let Some(a) = &args.alpha {
            s.alphas = a.clone();
        }
        if let Some(t) = args.trials {
            s.trials = t;
        }
        if let Some(seed) = args.seed {
            s.seed = seed;
        }
        if let Some(tol) = args.tol {
            s.tol = tol;
        }
        if let Some(m) = args.max_iters {
            s.max_iters = m;
        }
        s.parallel = !args.serial;
    }
    Ok(specs)
}

fn print_summary(r: &BenchReport) {
    eprintln!("{}", r.problem);
    for s in &r.summaries {
        let tau = s.setting.tau.map_or("-".into(), |t| t.to_string());
        let alpha = s.setting.alpha.map_or("-".into(), |a| a.to_string());
        let iters = s.mean_iters.map_or("-".into(), |i| format!("{i:.0}"));
        let speedup = s.speedup.map_or(String::new(), |v| format!("  speed-up {v:.2}"));
        eprintln!(
            "  {:<6} tau {:>4}  alpha {:>6}  ITER {:>9}  converged {}/{}  time {:.4}s{}",
            s.setting.algorithm.name(),
            tau,
            alpha,
            iters,
            s.converged,
            s.trials,
            s.mean_wall_time,
            speedup
        );
    }
}

pub fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let specs = bench_specs(args)?;
    let mut reports = Vec::with_capacity(specs.len());
    for spec in &specs {
        let r = run_bench(spec)?;
        print_summary(&r);
        reports.push(r);
    }
    match &args.out {
        Some(path) => write_csv(&reports, BufWriter::new(File::create(path).map_err(io_err(path))?))?,
        None => write_csv(&reports, io::stdout().lock())?,
    }
    if let Some(path) = &args.gnuplot {
        let f = File::create(path).map_err(io_err(path))?;
        write_gnuplot(&reports, BufWriter::new(f)).map_err(io_err(path))?;
    }
    Ok(())
}

fn rates_matrix(matrix: &Option<PathBuf>, generator: &GeneratorArgs, seed: u64) -> Result<Matrix, CliError> {
    match (matrix, generator.source()) {
        (Some(path), _) => Ok(read_matrix_market(path)?),
        (None, Some(source)) => generate_matrix(&source, seed),
        (None, None) => Err(CliError::Usage("rates needs --matrix, --type1 or --type2".into())),
    }
}

pub fn rates(args: &RatesArgs) -> Result<(), CliError> {
    let a = rates_matrix(&args.matrix, &args.generator, args.seed)?;
    let (rows, cols) = partitions(&a, args.tau, args.tau_col)?;
    let f = svd(&a)?;
    let beta = rebk_core::compute_beta_max(&a, &rows, &cols)?;
    let base = RateConstants::new(&f, a.frobenius_norm_sq(), beta, 1.0);

    let mut out = io::stdout().lock();
    let _ = writeln!(out, "shape          = {}x{}", a.rows(), a.cols());
    let _ = writeln!(out, "rank           = {}", base.rank);
    let _ = writeln!(out, "sigma1_sq      = {:.6e}", base.sigma1_sq);
    let _ = writeln!(out, "sigma_r_sq     = {:.6e}", base.sigma_r_sq);
    let _ = writeln!(out, "fro_sq         = {:.6e}", base.fro_sq);
    let _ = writeln!(out, "beta_max_rows  = {:.6}", base.beta_max_rows);
    let _ = writeln!(out, "beta_max_cols  = {:.6}", base.beta_max_cols);
    let _ = writeln!(out, "beta_max       = {:.6}", base.beta_max);
    let _ = writeln!(out, "alpha_opt      = {:.6}", base.alpha_opt);
    let _ = writeln!(out, "delta_opt      = {:.6}", base.delta_opt);
    let _ = writeln!(out, "2/beta_max     = {:.6}", 2.0 / base.beta_max);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>8} {:>12} {:>10} {:>10} {:>10} {:>10} {:>11} {:>10}",
        "alpha", "value", "delta", "eta", "rho", "rho_hat", "guaranteed", "mean_conv"
    );
    let rows_out: Vec<(String, RateConstants)> = args
        .alpha
        .iter()
        .map(|s| (s.to_string(), base.with_alpha(s.resolve(base.beta_max))))
        .collect();
    for (label, c) in &rows_out {
        let _ = writeln!(
            out,
            "{:>8} {:>12.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>11} {:>10}",
            label, c.alpha, c.delta, c.eta, c.rho, c.rho_hat, c.guaranteed, c.mean_converges
        );
    }
    drop(out);

    if let Some(path) = &args.out {
        let f = File::create(path).map_err(io_err(path))?;
        let mut w = csv::Writer::from_writer(f);
        let header = [
            "alpha_spec", "alpha", "delta", "eta", "rho", "rho_hat", "guaranteed", "mean_converges",
            "beta_max_rows", "beta_max_cols", "beta_max", "alpha_opt", "delta_opt", "sigma1_sq", "sigma_r_sq",
            "fro_sq", "rank",
        ];
        w.write_record(header).map_err(Error::from)?;
        for (label, c) in &rows_out {
            w.write_record([
                label.clone(),
                c.alpha.to_string(),
                c.delta.to_string(),
                c.eta.to_string(),
                c.rho.to_string(),
                c.rho_hat.to_string(),
                c.guaranteed.to_string(),
                c.mean_converges.to_string(),
                c.beta_max_rows.to_string(),
                c.beta_max_cols.to_string(),
                c.beta_max.to_string(),
                c.alpha_opt.to_string(),
                c.delta_opt.to_string(),
                c.sigma1_sq.to_string(),
                c.sigma_r_sq.to_string(),
                c.fro_sq.to_string(),
                c.rank.to_string(),
            ])
            .map_err(Error::from)?;
        }
        w.flush().map_err(io_err(path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::InvalidArgument("x".into())).exit_code(), 1);
        assert_eq!(CliError::from(Error::NoResidualPossible).exit_code(), 2);
        assert_eq!(CliError::NotConverged { iters: 3 }.exit_code(), 3);
    }

    #[test]
    fn flags_override_preset_fields() {
        use clap::Parser;
        let cli = crate::args::Cli::try_parse_from([
            "rebk", "bench", "--preset", "table2", "--trials", "2", "--seed", "9", "--alpha", "1x",
        ])
        .unwrap();
        let crate::args::Command::Bench(b) = cli.command else { panic!() };
        let specs = bench_specs(&b).unwrap();
        assert_eq!(specs.len(), 4);
        assert!(specs.iter().all(|s| s.trials == 2 && s.seed == 9));
        assert_eq!(specs[0].alphas, vec![rebk_core::Stepsize::BetaMultiple(1.0)]);
        use rebk_core::Algorithm;
        assert_eq!(specs[0].algorithms, vec![Algorithm::Rek, Algorithm::Rdbk, Algorithm::Rebk]);
    }
}
