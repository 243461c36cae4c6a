//! Multi-trial benchmark sweeps with CSV output.
//!
//! A [`BenchSpec`] names one problem family and a grid of
//! (algorithm, block size, stepsize) settings. Every trial draws a fresh
//! problem from a child seed of the master seed; all settings within a
//! trial see the same problem and the same solver seed.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorizations::svd;
use crate::io::{read_matrix_market, read_vector};
use crate::matrix::Matrix;
use crate::partition::child_seed;
use crate::problem_gen::{gen_type1, gen_type2, make_rhs_with_svd, ProblemInstance};
use crate::solvers::{Algorithm, Solver, SolverConfig, Stepsize, StopMode, StoppingRule};

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSource {
    /// `U D Vᵀ` with prescribed rank and condition bound.
    Type1 { m: usize, n: usize, rank: usize, kappa: f64 },
    /// I.i.d. Gaussian entries.
    Type2 { m: usize, n: usize },
    /// A matrix file; the right-hand side is read from `rhs` or generated.
    File { matrix: PathBuf, rhs: Option<PathBuf> },
}

impl ProblemSource {
    pub fn label(&self) -> String {
        match self {
            ProblemSource::Type1 { m, n, rank, kappa } => format!("type1:{m}x{n}:r{rank}:k{kappa}"),
            ProblemSource::Type2 { m, n } => format!("type2:{m}x{n}"),
            ProblemSource::File { matrix, .. } => format!(
                "file:{}",
                matrix.file_stem().map_or_else(|| matrix.display().to_string(), |s| s.to_string_lossy().into_owned())
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub source: ProblemSource,
    pub inconsistent: bool,
    pub algorithms: Vec<Algorithm>,
    /// Block sizes for block algorithms; single-row methods ignore it.
    pub taus: Vec<usize>,
    /// Stepsizes for algorithms that take one.
    pub alphas: Vec<Stepsize>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iters: usize,
    /// Run trials on the rayon pool. Wall times then include contention.
    pub parallel: bool,
}

impl BenchSpec {
    pub fn new(source: ProblemSource, algorithms: Vec<Algorithm>) -> Self {
        BenchSpec {
            source,
            inconsistent: true,
            algorithms,
            taus: vec![10],
            alphas: vec![Stepsize::BetaMultiple(1.0)],
            trials: 10,
            seed: 0,
            tol: 1e-5,
            max_iters: 2_000_000,
            parallel: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("at least one algorithm is required"));
        }
        if self.algorithms.iter().any(|a| a.is_block()) && (self.taus.is_empty() || self.taus.contains(&0)) {
            return Err(Error::invalid("block algorithms need block sizes >= 1"));
        }
        if self.algorithms.iter().any(|a| a.uses_alpha()) && self.alphas.is_empty() {
            return Err(Error::invalid("stepsize-driven algorithms need at least one alpha"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }

    /// Settings in output order.
    pub fn settings(&self) -> Vec<Setting> {
        let mut out = Vec::new();
        for &algorithm in &self.algorithms {
            let taus: Vec<Option<usize>> = if algorithm.is_block() {
                self.taus.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            let alphas: Vec<Option<Stepsize>> = if algorithm.uses_alpha() {
                self.alphas.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for &tau in &taus {
                for &alpha in &alphas {
                    out.push(Setting { algorithm, tau, alpha });
                }
            }
        }
        out
    }
}

/// One point of the (algorithm, τ, α) grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Setting {
    pub algorithm: Algorithm,
    pub tau: Option<usize>,
    pub alpha: Option<Stepsize>,
}

impl Setting {
    fn config(&self, a: &Matrix, spec: &BenchSpec, seed: u64) -> Result<SolverConfig> {
        let mut c = SolverConfig::new(self.algorithm)
            .seed(seed)
            .max_iters(spec.max_iters)
            .stop(StoppingRule {
                mode: StopMode::OracleError,
                tol: spec.tol,
                check_stride: 1,
            });
        if let Some(tau) = self.tau {
            c = c.with_tau(a, tau)?;
        }
        if let Some(alpha) = self.alpha {
            c = c.stepsize(alpha);
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub setting: Setting,
    pub trial: usize,
    pub seed: u64,
    /// Stepsize actually used.
    pub alpha: f64,
    pub iters: usize,
    pub converged: bool,
    pub final_error: f64,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRecord {
    pub setting: Setting,
    pub trials: usize,
    pub converged: usize,
    pub mean_alpha: f64,
    /// Over converged trials only; `None` when no trial converged.
    pub mean_iters: Option<f64>,
    pub mean_wall_time: f64,
    /// REK mean time over this mean time, when REK is part of the spec.
    pub speedup: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub problem: String,
    pub trials: Vec<TrialRecord>,
    pub summaries: Vec<SummaryRecord>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn summarize(settings: &[Setting], trials: &[TrialRecord]) -> Vec<SummaryRecord> {
    let mut out: Vec<SummaryRecord> = settings
        .iter()
        .map(|s| {
            let rows: Vec<&TrialRecord> = trials.iter().filter(|t| t.setting == *s).collect();
            SummaryRecord {
                setting: *s,
                trials: rows.len(),
                converged: rows.iter().filter(|t| t.converged).count(),
                mean_alpha: mean(rows.iter().map(|t| t.alpha)).unwrap_or(f64::NAN),
                mean_iters: mean(rows.iter().filter(|t| t.converged).map(|t| t.iters as f64)),
                mean_wall_time: mean(rows.iter().map(|t| t.wall_time)).unwrap_or(f64::NAN),
                speedup: None,
            }
        })
        .collect();
    let baseline = out
        .iter()
        .find(|s| s.setting.algorithm == Algorithm::Rek)
        .map(|s| s.mean_wall_time);
    if let Some(base) = baseline {
        for s in &mut out {
            s.speedup = Some(base / s.mean_wall_time);
        }
    }
    out
}

/// Builds the problem for trial seed `ts`.
fn build_problem(spec: &BenchSpec, loaded: Option<&(Matrix, Option<Vec<f64>>)>, ts: u64) -> Result<ProblemInstance> {
    let a = match (&spec.source, loaded) {
        (ProblemSource::Type1 { m, n, rank, kappa }, _) => gen_type1(*m, *n, *rank, *kappa, child_seed(ts, 0))?,
        (ProblemSource::Type2 { m, n }, _) => gen_type2(*m, *n, child_seed(ts, 0))?,
        (ProblemSource::File { .. }, Some((a, _))) => a.clone(),
        (ProblemSource::File { .. }, None) => unreachable!("file sources are loaded up front"),
    };
    let f = svd(&a)?;
    let mut p = match loaded.and_then(|(_, b)| b.as_ref()) {
        Some(b) => {
            let mut p = ProblemInstance::without_oracle(a, b.clone(), spec.source.label())?;
            p.attach_oracle(&f)?;
            p
        }
        None => make_rhs_with_svd(a, &f, child_seed(ts, 1), spec.inconsistent, 1.0)?,
    };
    p.meta.source = spec.source.label();
    Ok(p)
}

fn run_trial(spec: &BenchSpec, settings: &[Setting], loaded: Option<&(Matrix, Option<Vec<f64>>)>, trial: usize) -> Result<Vec<TrialRecord>> {
    let ts = child_seed(spec.seed, trial as u64);
    let p = build_problem(spec, loaded, ts)?;
    let x_star = p.x_star.as_deref();
    let solver_seed = child_seed(ts, 2);
    settings
        .iter()
        .map(|s| {
            let solver = Solver::new(&p.a, s.config(&p.a, spec, solver_seed)?)?;
            let t = solver.run(&p.b, x_star)?;
            Ok(TrialRecord {
                setting: *s,
                trial,
                seed: solver_seed,
                alpha: t.alpha,
                iters: t.iters,
                converged: t.converged,
                final_error: t.final_metric,
                wall_time: t.wall_time,
            })
        })
        .collect()
}

/// Runs every setting on every trial. Rows come back grouped by setting,
/// trials in order, regardless of scheduling.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport> {
    spec.validate()?;
    let settings = spec.settings();
    let loaded = match &spec.source {
        ProblemSource::File { matrix, rhs } => Some((
            read_matrix_market(matrix)?,
            rhs.as_ref().map(read_vector).transpose()?,
        )),
        _ => None,
    };
    let per_trial: Vec<Vec<TrialRecord>> = if spec.parallel {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, &settings, loaded.as_ref(), t))
            .collect::<Result<_>>()?
    } else {
        (0..spec.trials)
            .map(|t| run_trial(spec, &settings, loaded.as_ref(), t))
            .collect::<Result<_>>()?
    };
    let mut trials: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let order = |s: &Setting| settings.iter().position(|x| x == s).unwrap_or(usize::MAX);
    trials.sort_by_key(|t| (order(&t.setting), t.trial));
    let summaries = summarize(&settings, &trials);
    Ok(BenchReport {
        problem: spec.source.label(),
        trials,
        summaries,
    })
}

pub const CSV_HEADER: [&str; 17] = [
    "kind",
    "problem",
    "algorithm",
    "tau",
    "alpha_spec",
    "alpha",
    "trial",
    "seed",
    "iters",
    "converged",
    "final_error",
    "wall_time",
    "n_trials",
    "n_converged",
    "mean_iters",
    "mean_wall_time",
    "speedup",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes trial rows followed by summary rows for each report. Every row
/// carries its full setting, so rows can be filtered independently.
pub fn write_csv<W: Write>(reports: &[BenchReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        for t in &r.trials {
            w.write_record([
                "trial".to_string(),
                r.problem.clone(),
                t.setting.algorithm.to_string(),
                opt(t.setting.tau),
                opt(t.setting.alpha),
                t.alpha.to_string(),
                t.trial.to_string(),
                t.seed.to_string(),
                t.iters.to_string(),
                t.converged.to_string(),
                t.final_error.to_string(),
                t.wall_time.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])?;
        }
        for s in &r.summaries {
            w.write_record([
                "summary".to_string(),
                r.problem.clone(),
                s.setting.algorithm.to_string(),
                opt(s.setting.tau),
                opt(s.setting.alpha),
                s.mean_alpha.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                s.trials.to_string(),
                s.converged.to_string(),
                opt(s.mean_iters),
                s.mean_wall_time.to_string(),
                opt(s.speedup),
            ])?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<csv>"),
        source,
    })
}

/// Whitespace-separated summary table for gnuplot: one block per report,
/// blocks separated by two blank lines.
pub fn write_gnuplot<W: Write>(reports: &[BenchReport], mut out: W) -> std::io::Result<()> {
    for (k, r) in reports.iter().enumerate() {
        if k > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# {}", r.problem)?;
        writeln!(out, "# algorithm tau alpha mean_iters mean_wall_time n_converged")?;
        for s in &r.summaries {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                s.setting.algorithm,
                s.setting.tau.map_or("-".into(), |t| t.to_string()),
                s.mean_alpha,
                s.mean_iters.map_or("nan".into(), |v| v.to_string()),
                s.mean_wall_time,
                s.converged
            )?;
        }
    }
    Ok(())
}

pub const PRESETS: [&str; 6] = ["table1", "table2", "table3", "fig1", "fig2", "fig3"];

/// Experiment grids mirroring the published tables and figures. Figure 2
/// and 3 shapes shrink tenfold unless `paper_scale` is set; `table3` needs
/// a matrix file.
pub fn preset(name: &str, paper_scale: bool, matrix: Option<&Path>) -> Result<Vec<BenchSpec>> {
    use Algorithm::{Rdbk, Rebk, Rek};
    let main = vec![Rek, Rdbk, Rebk];
    let spec = |source, algs: &Vec<Algorithm>, alphas: Vec<Stepsize>, taus: Vec<usize>| BenchSpec {
        alphas,
        taus,
        ..BenchSpec::new(source, algs.clone())
    };
    let scale = if paper_scale { 1 } else { 10 };
    let specs = match name {
        "table1" => {
            let rows = [
                (250, 500, 150),
                (500, 1000, 250),
                (500, 250, 150),
                (500, 250, 250),
                (1000, 500, 250),
                (1000, 500, 500),
            ];
            rows.iter()
                .flat_map(|&(m, n, rank)| [2.0, 10.0].map(|kappa| (m, n, rank, kappa)))
                .map(|(m, n, rank, kappa)| {
                    spec(
                        ProblemSource::Type1 { m, n, rank, kappa },
                        &main,
                        vec![Stepsize::BetaMultiple(1.75)],
                        vec![10],
                    )
                })
                .collect()
        }
        "table2" => [(250, 120), (500, 250), (750, 370), (1000, 500)]
            .iter()
            .map(|&(m, n)| {
                spec(
                    ProblemSource::Type2 { m, n },
                    &main,
                    vec![Stepsize::BetaMultiple(2.25)],
                    vec![10],
                )
            })
            .collect(),
        "table3" => {
            let path = matrix.ok_or_else(|| Error::invalid("table3 needs a matrix file"))?;
            vec![spec(
                ProblemSource::File {
                    matrix: path.to_path_buf(),
                    rhs: None,
                },
                &vec![Rek, Rebk],
                vec![Stepsize::BetaMultiple(1.0), Stepsize::Absolute(5.0)],
                vec![10],
            )]
        }
        "fig1" => {
            let alphas = [0.75, 1.25, 1.75, 2.25, 2.62].map(Stepsize::BetaMultiple).to_vec();
            vec![
                spec(
                    ProblemSource::Type1 { m: 500, n: 250, rank: 150, kappa: 2.0 },
                    &vec![Rebk],
                    alphas.clone(),
                    vec![10],
                ),
                spec(ProblemSource::Type2 { m: 500, n: 250 }, &vec![Rebk], alphas, vec![10]),
            ]
        }
        "fig2" => {
            let (m, n, rank) = (20000 / scale, 5000 / scale, 4500 / scale);
            let taus = vec![5, 10, 20, 50, 100, 200];
            let a = vec![Stepsize::BetaMultiple(1.75)];
            vec![
                spec(ProblemSource::Type1 { m, n, rank, kappa: 2.0 }, &vec![Rebk], a.clone(), taus.clone()),
                spec(ProblemSource::Type2 { m, n }, &vec![Rebk], a, taus),
            ]
        }
        "fig3" => {
            let n = 500 / scale;
            let a = vec![Stepsize::BetaMultiple(1.75)];
            (1..=10)
                .flat_map(|k| {
                    let m = 2000 * k / scale;
                    [
                        spec(ProblemSource::Type1 { m, n, rank: n / 2, kappa: 2.0 }, &main, a.clone(), vec![10]),
                        spec(ProblemSource::Type2 { m, n }, &main, a.clone(), vec![10]),
                    ]
                })
                .collect()
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown preset '{other}', expected one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchSpec {
        BenchSpec {
            trials: 3,
            seed: 9,
            taus: vec![4],
            alphas: vec![Stepsize::BetaMultiple(1.0), Stepsize::BetaMultiple(1.5)],
            ..BenchSpec::new(
                ProblemSource::Type1 { m: 30, n: 20, rank: 12, kappa: 2.0 },
                vec![Algorithm::Rek, Algorithm::Rdbk, Algorithm::Rebk],
            )
        }
    }

    #[test]
    fn settings_grid() {
        let s = small().settings();
        assert_eq!(s.len(), 1 + 1 + 2);
        assert_eq!(s[0], Setting { algorithm: Algorithm::Rek, tau: None, alpha: None });
        assert_eq!(s[3].alpha, Some(Stepsize::BetaMultiple(1.5)));
    }

    #[test]
    fn deterministic_and_ordered() {
        let a = run_bench(&small()).unwrap();
        let b = run_bench(&BenchSpec { parallel: false, ..small() }).unwrap();
        let strip = |r: &BenchReport| {
            r.trials
                .iter()
                .map(|t| (t.setting, t.trial, t.iters, t.converged, t.final_error.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
        assert!(a.trials.iter().all(|t| t.converged));
        assert_eq!(a.trials.len(), 4 * 3);
        for w in a.trials.windows(2) {
            if w[0].setting == w[1].setting {
                assert!(w[0].trial < w[1].trial);
            }
        }
    }

    #[test]
    fn aggregates_recompute() {
        let r = run_bench(&small()).unwrap();
        for s in &r.summaries {
            let rows: Vec<_> = r.trials.iter().filter(|t| t.setting == s.setting).collect();
            let sum: f64 = rows.iter().filter(|t| t.converged).map(|t| t.iters as f64).sum();
            assert_eq!(s.mean_iters, Some(sum / s.converged as f64));
        }
        let rek = &r.summaries[0];
        assert_eq!(rek.speedup, Some(1.0));
    }

    #[test]
    fn single_trial_aggregate_equals_trial() {
        let r = run_bench(&BenchSpec { trials: 1, ..small() }).unwrap();
        for (s, t) in r.summaries.iter().zip(&r.trials) {
            assert_eq!(s.mean_iters, Some(t.iters as f64));
            assert_eq!(s.mean_wall_time, t.wall_time);
        }
    }

    #[test]
    fn csv_shape() {
        let r = run_bench(&BenchSpec { trials: 2, ..small() }).unwrap();
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 4 * 2 + 4);
        assert!(rows.iter().all(|r| r.len() == CSV_HEADER.len()));
        assert_eq!(&rows[0][0], "trial");
        assert_eq!(&rows.last().unwrap()[0], "summary");
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(run_bench(&BenchSpec { trials: 0, ..small() }).is_err());
        assert!(run_bench(&BenchSpec { algorithms: vec![], ..small() }).is_err());
        assert!(run_bench(&BenchSpec { taus: vec![], ..small() }).is_err());
        assert!(preset("table9", false, None).is_err());
        assert!(preset("table3", false, None).is_err());
    }

    #[test]
    fn presets_scale() {
        let desk = preset("fig2", false, None).unwrap();
        assert_eq!(desk[0].source, ProblemSource::Type1 { m: 2000, n: 500, rank: 450, kappa: 2.0 });
        let full = preset("fig2", true, None).unwrap();
        assert_eq!(full[1].source, ProblemSource::Type2 { m: 20000, n: 5000 });
        assert_eq!(preset("table1", false, None).unwrap().len(), 12);
    }
}
