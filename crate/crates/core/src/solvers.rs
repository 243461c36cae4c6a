//! Randomized row/column-action solvers for `Ax = b`.
//!
//! | algorithm | x update                                   | z update                  |
//! |-----------|--------------------------------------------|---------------------------|
//! | RK        | one row, relaxed projection                | –                         |
//! | REK       | one row, against `b − z`                   | one column projection     |
//! | RBK       | row block, exact projection (`A_I†`)       | –                         |
//! | RDBK      | row block, exact projection against `b − z`| column block projection   |
//! | RABK      | row block, averaged (`A_Iᵀ/‖A_I‖_F²`)      | –                         |
//! | DSBGS     | row block × column block submatrix         | –                         |
//! | REBK      | row block, averaged against `b − z`        | column block, averaged    |
//!
//! Every run owns one random stream. Each iteration consumes a column draw
//! followed by a row draw; algorithms without a column update skip the
//! column draw. Runs of different algorithms with the same seed therefore
//! see the same row-draw positions, which makes the special-case identities
//! (REBK ≡ REK, REBK with `z⁰ = 0` ≡ RABK) hold bit for bit.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::factorizations::{svd, Svd};
use crate::matrix::{dist, dot, norm, Axis, Matrix};
use crate::partition::{BlockSampler, CellSampler, Partition, Rng};
use crate::problem_gen::ProblemInstance;
use crate::rates::{block_beta, cell_beta, BetaMax};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Rk,
    Rek,
    Rbk,
    Rdbk,
    Rabk,
    Dsbgs,
    Rebk,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Rk,
        Algorithm::Rek,
        Algorithm::Rbk,
        Algorithm::Rdbk,
        Algorithm::Rabk,
        Algorithm::Dsbgs,
        Algorithm::Rebk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rk => "RK",
            Algorithm::Rek => "REK",
            Algorithm::Rbk => "RBK",
            Algorithm::Rdbk => "RDBK",
            Algorithm::Rabk => "RABK",
            Algorithm::Dsbgs => "DSBGS",
            Algorithm::Rebk => "REBK",
        }
    }

    /// Maintains the auxiliary `z` sequence.
    pub fn is_extended(self) -> bool {
        matches!(self, Algorithm::Rek | Algorithm::Rdbk | Algorithm::Rebk)
    }

    /// Takes a stepsize. Projection methods and REK do not.
    pub fn uses_alpha(self) -> bool {
        matches!(
            self,
            Algorithm::Rk | Algorithm::Rabk | Algorithm::Dsbgs | Algorithm::Rebk
        )
    }

    /// Operates on user-chosen blocks (as opposed to single rows/columns).
    pub fn is_block(self) -> bool {
        !matches!(self, Algorithm::Rk | Algorithm::Rek)
    }

    fn needs_col_partition(self) -> bool {
        matches!(self, Algorithm::Rdbk | Algorithm::Dsbgs | Algorithm::Rebk)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown algorithm '{s}'")))
    }
}

/// A fixed stepsize, given directly or in units of `1/β_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stepsize {
    Absolute(f64),
    BetaMultiple(f64),
}

impl Stepsize {
    pub fn resolve(self, beta_max: f64) -> f64 {
        match self {
            Stepsize::Absolute(a) => a,
            Stepsize::BetaMultiple(c) => c / beta_max,
        }
    }
}

impl fmt::Display for Stepsize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stepsize::Absolute(a) => write!(f, "{a}"),
            Stepsize::BetaMultiple(c) => write!(f, "{c}x"),
        }
    }
}

/// Parses `"10.87"` as an absolute stepsize and `"1.75x"` as `1.75/β_max`.
impl FromStr for Stepsize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, multiple) = match s.strip_suffix(['x', 'X']) {
            Some(head) => (head, true),
            None => (s, false),
        };
        let v: f64 = num
            .parse()
            .map_err(|_| Error::invalid(format!("bad stepsize '{s}'")))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("stepsize must be positive, got '{s}'")));
        }
        Ok(if multiple {
            Stepsize::BetaMultiple(v)
        } else {
            Stepsize::Absolute(v)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopMode {
    /// `‖xᵏ − A†b‖₂ ≤ tol`.
    OracleError,
    /// `‖Aᵀ(Axᵏ − b)‖₂ ≤ tol · ‖A‖_F · ‖b‖₂`. Needs no reference solution.
    ResidualProxy,
    MaxItersOnly,
}

impl FromStr for StopMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" | "oracle-error" => Ok(StopMode::OracleError),
            "residual" | "residual-proxy" => Ok(StopMode::ResidualProxy),
            "max-iters" | "none" => Ok(StopMode::MaxItersOnly),
            other => Err(Error::invalid(format!("unknown stopping mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRule {
    pub mode: StopMode,
    pub tol: f64,
    /// Check every this many iterations. With a stride above 1 the reported
    /// iteration count is the first checkpoint below `tol`.
    pub check_stride: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            mode: StopMode::OracleError,
            tol: 1e-5,
            check_stride: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub row_partition: Option<Partition>,
    pub col_partition: Option<Partition>,
    pub stepsize: Stepsize,
    pub seed: u64,
    pub max_iters: usize,
    pub stop: StoppingRule,
    /// Keep the stopping metric at every checkpoint.
    pub record_errors: bool,
    /// Defaults to `0`.
    pub x0: Option<Vec<f64>>,
    /// Defaults to `b` for extended methods.
    pub z0: Option<Vec<f64>>,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SolverConfig {
            algorithm,
            row_partition: None,
            col_partition: None,
            stepsize: Stepsize::Absolute(1.0),
            seed: 0,
            max_iters: 1_000_000,
            stop: StoppingRule::default(),
            record_errors: false,
            x0: None,
            z0: None,
        }
    }

    /// Contiguous row and column partitions with block size `tau` (clamped
    /// to each axis length).
    pub fn with_tau(mut self, a: &Matrix, tau: usize) -> Result<Self> {
        self.row_partition = Some(Partition::contiguous_clamped(Axis::Row, a.rows(), tau)?);
        self.col_partition = Some(Partition::contiguous_clamped(Axis::Column, a.cols(), tau)?);
        Ok(self)
    }

    pub fn partitions(mut self, rows: Partition, cols: Partition) -> Self {
        self.row_partition = Some(rows);
        self.col_partition = Some(cols);
        self
    }

    pub fn stepsize(mut self, s: Stepsize) -> Self {
        self.stepsize = s;
        self
    }

    pub fn alpha(self, alpha: f64) -> Self {
        self.stepsize(Stepsize::Absolute(alpha))
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn stop(mut self, stop: StoppingRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.stop.tol = tol;
        self
    }

    pub fn record_errors(mut self, yes: bool) -> Self {
        self.record_errors = yes;
        self
    }

    pub fn x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn z0(mut self, z0: Vec<f64>) -> Self {
        self.z0 = Some(z0);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunWarning {
    /// The stepsize is at or beyond the window where mean-square convergence
    /// is proven. The run may still converge.
    OutsideGuaranteedRegime { alpha: f64, limit: f64 },
    /// `x⁰ ∉ range(Aᵀ)`: the iterates converge to something other than `A†b`.
    InitialXOutsideRowSpace,
    /// `z⁰ ∉ b + range(A)`: `z` does not converge to `b⊥`.
    InitialZOutsideAffineSet,
}

impl fmt::Display for RunWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunWarning::OutsideGuaranteedRegime { alpha, limit } => write!(
                f,
                "outside guaranteed regime: alpha = {alpha} >= {limit}"
            ),
            RunWarning::InitialXOutsideRowSpace => f.write_str("x0 is not in range(A^T)"),
            RunWarning::InitialZOutsideAffineSet => f.write_str("z0 is not in b + range(A)"),
        }
    }
}

/// Outcome of [`Solver::run`].
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub beta_max: Option<f64>,
    /// Iterations performed (ITER when converged).
    pub iters: usize,
    pub converged: bool,
    /// Stopping metric at the last checkpoint.
    pub final_metric: f64,
    /// `(k, metric)` at each checkpoint, when recording was requested.
    pub errors: Vec<(usize, f64)>,
    pub wall_time: f64,
    pub warnings: Vec<RunWarning>,
    pub x: Vec<f64>,
    pub z: Option<Vec<f64>>,
}

impl RunTrace {
    pub fn outside_guaranteed_regime(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, RunWarning::OutsideGuaranteedRegime { .. }))
    }
}

/// Iterate state. `z` is present for extended methods.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub z: Option<Vec<f64>>,
    pub k: usize,
    rng: Rng,
    buf: Vec<f64>,
}

impl SolverState {
    pub fn rng_mut(&mut self) -> &mut Rng {
        &mut self.rng
    }
}

/// A configured solver with all per-block data precomputed. Immutable once
/// built, so concurrent runs may share it.
#[derive(Debug)]
pub struct Solver<'a> {
    a: &'a Matrix,
    config: SolverConfig,
    alpha: f64,
    beta: Option<BetaMax>,
    rows: BlockSampler,
    cols: Option<BlockSampler>,
    cells: Option<CellSampler>,
    row_pinv: Vec<Svd>,
    col_basis: Vec<Svd>,
    warnings: Vec<RunWarning>,
    buf_len: usize,
}

impl<'a> Solver<'a> {
    pub fn new(a: &'a Matrix, config: SolverConfig) -> Result<Self> {
        let alg = config.algorithm;
        let (m, n) = a.shape();

        let row_p = match (&config.row_partition, alg.is_block()) {
            (Some(p), true) => p.clone(),
            (None, true) => {
                return Err(Error::invalid(format!("{alg} needs a row partition")));
            }
            (_, false) => Partition::singletons(Axis::Row, m)?,
        };
        let col_p = if alg == Algorithm::Rek {
            Some(Partition::singletons(Axis::Column, n)?)
        } else if alg.needs_col_partition() {
            Some(config.col_partition.clone().ok_or_else(|| {
                Error::invalid(format!("{alg} needs a column partition"))
            })?)
        } else {
            None
        };

        let rows = BlockSampler::new(a, row_p)?;
        rows.partition().check_matches(a, Axis::Row)?;
        let cols = match (&col_p, alg) {
            (Some(p), Algorithm::Rek | Algorithm::Rdbk | Algorithm::Rebk) => {
                Some(BlockSampler::new(a, p.clone())?)
            }
            _ => None,
        };
        let cells = match (&col_p, alg) {
            (Some(p), Algorithm::Dsbgs) => Some(CellSampler::new(a, rows.partition(), p)?),
            _ => None,
        };

        let beta = match alg {
            Algorithm::Rk => Some(BetaMax { rows: 1.0, cols: 1.0 }),
            Algorithm::Rabk => {
                let r = block_beta(a, rows.partition())?;
                Some(BetaMax { rows: r, cols: r })
            }
            Algorithm::Dsbgs => {
                let c = col_p.as_ref().expect("DSBGS has columns");
                let r = cell_beta(a, rows.partition(), c)?;
                Some(BetaMax { rows: r, cols: r })
            }
            Algorithm::Rebk => Some(BetaMax {
                rows: block_beta(a, rows.partition())?,
                cols: block_beta(a, cols.as_ref().expect("REBK has columns").partition())?,
            }),
            _ => None,
        };

        let alpha = if alg.uses_alpha() {
            let b = beta.map_or(1.0, |b| b.max());
            config.stepsize.resolve(b)
        } else {
            1.0
        };
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("stepsize must be positive, got {alpha}")));
        }

        let mut warnings = Vec::new();
        if let (Some(b), Algorithm::Rk | Algorithm::Rabk | Algorithm::Rebk) = (beta, alg) {
            let limit = 2.0 / b.max();
            if alpha >= limit {
                warnings.push(RunWarning::OutsideGuaranteedRegime { alpha, limit });
            }
        }

        let row_pinv = if matches!(alg, Algorithm::Rbk | Algorithm::Rdbk) {
            rows.partition()
                .blocks()
                .iter()
                .map(|blk| svd(&a.submatrix(Axis::Row, blk)?))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let col_basis = match (&cols, alg) {
            (Some(c), Algorithm::Rdbk) => c
                .partition()
                .blocks()
                .iter()
                .map(|blk| svd(&a.submatrix(Axis::Column, blk)?))
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };

        let buf_len = rows
            .partition()
            .max_block_len()
            .max(cols.as_ref().map_or(0, |c| c.partition().max_block_len()))
            .max(1);

        if let Some(x0) = &config.x0 {
            Error::check_len(n, x0.len())?;
        }
        if let Some(z0) = &config.z0 {
            Error::check_len(m, z0.len())?;
        }

        Ok(Solver {
            a,
            config,
            alpha,
            beta,
            rows,
            cols,
            cells,
            row_pinv,
            col_basis,
            warnings,
            buf_len,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> Option<BetaMax> {
        self.beta
    }

    pub fn row_sampler(&self) -> &BlockSampler {
        &self.rows
    }

    pub fn col_sampler(&self) -> Option<&BlockSampler> {
        self.cols.as_ref()
    }

    pub fn warnings(&self) -> &[RunWarning] {
        &self.warnings
    }

    /// `x⁰` and `z⁰` from the config (defaults `0` and `b`), stream seeded
    /// from the config seed.
    pub fn init_state(&self, b: &[f64]) -> Result<SolverState> {
        self.init_state_seeded(b, self.config.seed)
    }

    pub fn init_state_seeded(&self, b: &[f64], seed: u64) -> Result<SolverState> {
        Error::check_len(self.a.rows(), b.len())?;
        let x = self
            .config
            .x0
            .clone()
            .unwrap_or_else(|| vec![0.0; self.a.cols()]);
        let z = self
            .algorithm()
            .is_extended()
            .then(|| self.config.z0.clone().unwrap_or_else(|| b.to_vec()));
        Ok(SolverState {
            x,
            z,
            k: 0,
            rng: Rng::new(seed),
            buf: vec![0.0; self.buf_len],
        })
    }

    /// One iteration: draw blocks from the state's stream, then update.
    pub fn step(&self, s: &mut SolverState, b: &[f64]) {
        match self.algorithm() {
            Algorithm::Rk | Algorithm::Rbk | Algorithm::Rabk => {
                s.rng.skip();
                let i = self.rows.sample(&mut s.rng);
                match self.algorithm() {
                    Algorithm::Rk => self.rk_update(s, b, i),
                    Algorithm::Rbk => self.rbk_update(s, b, i),
                    _ => self.rabk_update(s, b, i),
                }
            }
            Algorithm::Rek | Algorithm::Rdbk | Algorithm::Rebk => {
                let cols = self.cols.as_ref().expect("extended solver has columns");
                let j = cols.sample(&mut s.rng);
                let i = self.rows.sample(&mut s.rng);
                match self.algorithm() {
                    Algorithm::Rek => self.rek_update(s, b, j, i),
                    Algorithm::Rdbk => self.rdbk_update(s, b, j, i),
                    _ => self.rebk_update(s, b, j, i),
                }
            }
            Algorithm::Dsbgs => {
                s.rng.skip();
                let (i, j) = self
                    .cells
                    .as_ref()
                    .expect("DSBGS has a cell sampler")
                    .sample(&mut s.rng);
                self.dsbgs_update(s, b, i, j);
            }
        }
        s.k += 1;
    }

    /// `x ← x − α/‖A_I‖_F² · A_Iᵀ (A_I x − b_I [+ z_I])`.
    fn averaged_x_update(&self, s: &mut SolverState, b: &[f64], block: usize, alpha: f64, use_z: bool) {
        let rows = self.rows.partition().block(block);
        let fro = self.rows.weights()[block];
        let buf = &mut s.buf[..rows.len()];
        self.a.rows_mul(rows, &s.x, buf);
        match (&s.z, use_z) {
            (Some(z), true) => {
                for (c, i) in buf.iter_mut().zip(rows.iter()) {
                    let r = *c - b[i] + z[i];
                    *c = -(alpha * r / fro);
                }
            }
            _ => {
                for (c, i) in buf.iter_mut().zip(rows.iter()) {
                    let r = *c - b[i];
                    *c = -(alpha * r / fro);
                }
            }
        }
        self.a.rows_tmul_add(rows, buf, &mut s.x);
    }

    /// `z ← z − α/‖A_J‖_F² · A_J A_Jᵀ z`.
    fn averaged_z_update(&self, s: &mut SolverState, block: usize, alpha: f64) {
        let cols_s = self.cols.as_ref().expect("extended solver has columns");
        let cols = cols_s.partition().block(block);
        let fro = cols_s.weights()[block];
        let z = s.z.as_mut().expect("extended state has z");
        let buf = &mut s.buf[..cols.len()];
        self.a.cols_tmul(cols, z, buf);
        for c in buf.iter_mut() {
            *c = -(alpha * *c / fro);
        }
        self.a.cols_mul_add(cols, buf, z);
    }

    /// Randomized Kaczmarz on row `i`:
    /// `x ← x − α (A_i x − b_i)/‖A_i‖² A_iᵀ`.
    pub fn rk_update(&self, s: &mut SolverState, b: &[f64], i: usize) {
        self.averaged_x_update(s, b, i, self.alpha, false);
    }

    /// Extended Kaczmarz with column `j` and row `i`: an exact column
    /// projection for `Aᵀz = 0`, then an exact row projection for
    /// `Ax = b − z`.
    pub fn rek_update(&self, s: &mut SolverState, b: &[f64], j: usize, i: usize) {
        self.averaged_z_update(s, j, 1.0);
        self.averaged_x_update(s, b, i, 1.0, true);
    }

    /// Block Kaczmarz: `x ← x − A_I† (A_I x − b_I)`.
    pub fn rbk_update(&self, s: &mut SolverState, b: &[f64], i: usize) {
        self.projected_x_update(s, b, i, false);
    }

    /// Double block Kaczmarz: `z ← z − A_J A_J† z`, then
    /// `x ← x − A_I† (A_I x − b_I + z_I)`.
    pub fn rdbk_update(&self, s: &mut SolverState, b: &[f64], j: usize, i: usize) {
        let basis = &self.col_basis[j];
        let z = s.z.as_mut().expect("extended state has z");
        for k in 0..basis.rank() {
            let u = basis.u_col(k);
            let c = dot(u, z);
            for (zi, &ui) in z.iter_mut().zip(u) {
                *zi -= c * ui;
            }
        }
        self.projected_x_update(s, b, i, true);
    }

    fn projected_x_update(&self, s: &mut SolverState, b: &[f64], block: usize, use_z: bool) {
        let rows = self.rows.partition().block(block);
        let f = &self.row_pinv[block];
        let buf = &mut s.buf[..rows.len()];
        self.a.rows_mul(rows, &s.x, buf);
        for (r, i) in buf.iter_mut().zip(rows.iter()) {
            *r -= b[i];
            if let (Some(z), true) = (&s.z, use_z) {
                *r += z[i];
            }
        }
        for k in 0..f.rank() {
            let c = dot(f.u_col(k), buf) / f.sigma()[k];
            for (xj, &vj) in s.x.iter_mut().zip(f.v_col(k)) {
                *xj -= c * vj;
            }
        }
    }

    /// Averaged block Kaczmarz with weights `‖A_l‖²/‖A_I‖_F²`:
    /// `x ← x − α/‖A_I‖_F² · A_Iᵀ (A_I x − b_I)`.
    pub fn rabk_update(&self, s: &mut SolverState, b: &[f64], i: usize) {
        self.averaged_x_update(s, b, i, self.alpha, false);
    }

    /// Doubly stochastic block Gauss–Seidel on cell `(I_i, J_j)`:
    /// `x_J ← x_J − α/‖A_{I,J}‖_F² · A_{I,J}ᵀ (A_I x − b_I)`.
    pub fn dsbgs_update(&self, s: &mut SolverState, b: &[f64], i: usize, j: usize) {
        let cells = self.cells.as_ref().expect("DSBGS has a cell sampler");
        let rows = self.rows.partition().block(i);
        let cols = self
            .config
            .col_partition
            .as_ref()
            .expect("DSBGS has columns")
            .block(j);
        let fro = cells.weight(i, j);
        let buf = &mut s.buf[..rows.len()];
        self.a.rows_mul(rows, &s.x, buf);
        for (c, r) in buf.iter_mut().zip(rows.iter()) {
            let res = *c - b[r];
            *c = -(self.alpha * res / fro);
        }
        self.a.rows_tmul_add_on(rows, cols, buf, &mut s.x);
    }

    /// Extended block Kaczmarz: an averaged column-block step for
    /// `Aᵀz = 0`, then an averaged row-block step for `Ax = b − z`.
    pub fn rebk_update(&self, s: &mut SolverState, b: &[f64], j: usize, i: usize) {
        self.averaged_z_update(s, j, self.alpha);
        self.averaged_x_update(s, b, i, self.alpha, true);
    }

    fn metric(&self, s: &SolverState, b: &[f64], x_star: Option<&[f64]>, scale: f64) -> f64 {
        match self.config.stop.mode {
            StopMode::OracleError | StopMode::MaxItersOnly => {
                x_star.map_or(f64::NAN, |xs| dist(&s.x, xs))
            }
            StopMode::ResidualProxy => {
                let mut r = self.a.matvec(&s.x).expect("dimensions checked");
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= bi;
                }
                norm(&self.a.tmatvec(&r).expect("dimensions checked")) / scale
            }
        }
    }

    fn hypothesis_warnings(&self, b: &[f64]) -> Result<Vec<RunWarning>> {
        let mut out = Vec::new();
        let x0 = self.config.x0.as_deref().filter(|x| x.iter().any(|v| *v != 0.0));
        let z0 = self
            .config
            .z0
            .as_deref()
            .filter(|_| self.algorithm().is_extended());
        if x0.is_none() && z0.is_none() {
            return Ok(out);
        }
        let f = svd(self.a)?;
        if let Some(x0) = x0 {
            if dist(&f.project_row_space(x0), x0) > 1e-8 * norm(x0) {
                out.push(RunWarning::InitialXOutsideRowSpace);
            }
        }
        if let Some(z0) = z0 {
            let d: Vec<f64> = z0.iter().zip(b).map(|(z, b)| z - b).collect();
            if dist(&f.project_range(&d), &d) > 1e-8 * norm(&d).max(norm(b)) {
                out.push(RunWarning::InitialZOutsideAffineSet);
            }
        }
        Ok(out)
    }

    /// Iterates from the configured initial point until the stopping rule
    /// fires or `max_iters` is reached.
    pub fn run(&self, b: &[f64], x_star: Option<&[f64]>) -> Result<RunTrace> {
        self.run_seeded(b, x_star, self.config.seed)
    }

    pub fn run_seeded(&self, b: &[f64], x_star: Option<&[f64]>, seed: u64) -> Result<RunTrace> {
        let stop = self.config.stop;
        if !(stop.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if stop.check_stride == 0 {
            return Err(Error::invalid("check stride must be at least 1"));
        }
        if stop.mode == StopMode::OracleError && x_star.is_none() {
            return Err(Error::MissingOracle);
        }
        if let Some(xs) = x_star {
            Error::check_len(self.a.cols(), xs.len())?;
        }
        let mut warnings = self.warnings.clone();
        warnings.extend(self.hypothesis_warnings(b)?);

        let scale = self.a.frobenius_norm() * norm(b).max(f64::MIN_POSITIVE);
        let started = Instant::now();
        let mut s = self.init_state_seeded(b, seed)?;
        let mut errors = Vec::new();
        let mut metric = self.metric(&s, b, x_star, scale);
        if self.config.record_errors {
            errors.push((0, metric));
        }
        let done = |m: f64| stop.mode != StopMode::MaxItersOnly && m <= stop.tol;
        let mut converged = done(metric);

        while !converged && s.k < self.config.max_iters {
            self.step(&mut s, b);
            if s.k % stop.check_stride == 0 || s.k == self.config.max_iters {
                metric = self.metric(&s, b, x_star, scale);
                if self.config.record_errors {
                    errors.push((s.k, metric));
                }
                converged = done(metric);
                if !metric.is_finite() && stop.mode != StopMode::MaxItersOnly {
                    break;
                }
            }
        }

        Ok(RunTrace {
            algorithm: self.algorithm(),
            alpha: self.alpha,
            beta_max: self.beta.map(|b| b.max()),
            iters: s.k,
            converged,
            final_metric: metric,
            errors,
            wall_time: started.elapsed().as_secs_f64(),
            warnings,
            x: s.x,
            z: s.z,
        })
    }
}

/// Solves `problem` with `config`, stopping against the problem's oracle
/// solution when the stopping rule asks for it.
pub fn run(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    let solver = Solver::new(&problem.a, config.clone())?;
    solver.run(&problem.b, problem.x_star.as_deref())
}
