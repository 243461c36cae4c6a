//! Synthetic test systems and right-hand sides with a known minimum-norm
//! least-squares solution.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::factorizations::{pinv_apply, residual_split, svd, Svd};
use crate::matrix::{dot, norm, Matrix};
use crate::partition::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemMeta {
    /// Numerical rank of `A` as measured by the oracle SVD.
    pub rank: usize,
    /// Upper bound on `σ₁/σ_r` when the generator guarantees one.
    pub kappa_bound: Option<f64>,
    pub consistent: bool,
    /// Seed the right-hand side was drawn from.
    pub seed: u64,
    /// `‖b⊥‖₂`.
    pub residual_norm: f64,
    pub source: String,
}

/// A linear system together with its oracle solution.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub a: Matrix,
    pub b: Vec<f64>,
    /// `A† b`, when known.
    pub x_star: Option<Vec<f64>>,
    /// `(I − A A†) b`, when known.
    pub b_perp: Option<Vec<f64>>,
    pub meta: ProblemMeta,
}

impl ProblemInstance {
    /// A system with no oracle attached, e.g. one read from disk.
    pub fn without_oracle(a: Matrix, b: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        Error::check_len(a.rows(), b.len())?;
        Ok(ProblemInstance {
            a,
            b,
            x_star: None,
            b_perp: None,
            meta: ProblemMeta {
                rank: 0,
                kappa_bound: None,
                consistent: false,
                seed: 0,
                residual_norm: f64::NAN,
                source: source.into(),
            },
        })
    }

    /// Fills in `x_star`, `b_perp`, rank and consistency from an SVD of `A`.
    pub fn attach_oracle(&mut self, f: &Svd) -> Result<()> {
        let x_star = pinv_apply(f, &self.b)?;
        let (_, b_perp) = residual_split(f, &self.b)?;
        self.meta.rank = f.rank();
        self.meta.residual_norm = norm(&b_perp);
        self.meta.consistent = self.meta.residual_norm <= 1e-8 * norm(&self.b);
        self.x_star = Some(x_star);
        self.b_perp = Some(b_perp);
        Ok(())
    }
}

fn gaussian_vec(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Orthonormalizes the columns of a column-major `rows × cols` matrix in
/// place: modified Gram–Schmidt with one reorthogonalization pass.
fn orthonormalize_columns(q: &mut [f64], rows: usize, cols: usize) {
    for k in 0..cols {
        let (done, rest) = q.split_at_mut(k * rows);
        let v = &mut rest[..rows];
        for _ in 0..2 {
            for j in 0..k {
                let qj = &done[j * rows..(j + 1) * rows];
                let c = dot(qj, v);
                for (vi, &qi) in v.iter_mut().zip(qj) {
                    *vi -= c * qi;
                }
            }
        }
        let nv = norm(v);
        v.iter_mut().for_each(|x| *x /= nv);
    }
}

/// Type I matrix `A = U D Vᵀ` with orthonormal `U` (`m × r`), `V` (`n × r`)
/// and `D` diagonal with entries uniform in `(1, κ)`, so `rank(A) = r` and
/// `σ₁/σ_r ≤ κ`.
pub fn gen_type1(m: usize, n: usize, r: usize, kappa: f64, seed: u64) -> Result<Matrix> {
    if m == 0 || n == 0 || r == 0 || r > m.min(n) {
        return Err(Error::invalid(format!(
            "type I needs 1 <= r <= min(m, n), got {m}x{n} with r = {r}"
        )));
    }
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!("type I needs kappa > 1, got {kappa}")));
    }
    let mut rng = Rng::new(seed);
    let mut u = gaussian_vec(&mut rng, m * r);
    let mut v = gaussian_vec(&mut rng, n * r);
    orthonormalize_columns(&mut u, m, r);
    orthonormalize_columns(&mut v, n, r);
    let d: Vec<f64> = (0..r).map(|_| 1.0 + (kappa - 1.0) * rng.uniform()).collect();

    let mut data = vec![0.0; m * n];
    for k in 0..r {
        let (uk, vk) = (&u[k * m..(k + 1) * m], &v[k * n..(k + 1) * n]);
        for i in 0..m {
            let s = uk[i] * d[k];
            let row = &mut data[i * n..(i + 1) * n];
            for (a, &vj) in row.iter_mut().zip(vk) {
                *a += s * vj;
            }
        }
    }
    Matrix::dense(m, n, data)
}

/// Type II matrix with i.i.d. standard normal entries.
pub fn gen_type2(m: usize, n: usize, seed: u64) -> Result<Matrix> {
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!("type II needs m, n >= 1, got {m}x{n}")));
    }
    let mut rng = Rng::new(seed);
    Matrix::dense(m, n, gaussian_vec(&mut rng, m * n))
}

/// Builds `b = A x_gen (+ r)` with `x_gen` standard normal and, when
/// `inconsistent`, `r = perp_scale · (I − A A†) w` for standard normal `w`.
pub fn make_rhs(a: Matrix, seed: u64, inconsistent: bool, perp_scale: f64) -> Result<ProblemInstance> {
    let f = svd(&a)?;
    make_rhs_with_svd(a, &f, seed, inconsistent, perp_scale)
}

pub fn make_rhs_with_svd(
    a: Matrix,
    f: &Svd,
    seed: u64,
    inconsistent: bool,
    perp_scale: f64,
) -> Result<ProblemInstance> {
    let mut rng = Rng::new(seed);
    let x_gen = gaussian_vec(&mut rng, a.cols());
    let w = inconsistent.then(|| gaussian_vec(&mut rng, a.rows()));
    let mut p = assemble_rhs(a, f, &x_gen, w.as_deref(), perp_scale)?;
    p.meta.seed = seed;
    Ok(p)
}

/// Deterministic core of [`make_rhs`] with explicit `x_gen` and `w`.
pub fn assemble_rhs(
    a: Matrix,
    f: &Svd,
    x_gen: &[f64],
    w: Option<&[f64]>,
    perp_scale: f64,
) -> Result<ProblemInstance> {
    Error::check_len(a.cols(), x_gen.len())?;
    let mut b = a.matvec(x_gen)?;
    if let Some(w) = w {
        Error::check_len(a.rows(), w.len())?;
        if f.rank() == a.rows() {
            return Err(Error::NoResidualPossible);
        }
        let (_, r) = residual_split(f, w)?;
        for (bi, ri) in b.iter_mut().zip(&r) {
            *bi += perp_scale * ri;
        }
    }
    let mut p = ProblemInstance::without_oracle(a, b, "generated")?;
    p.attach_oracle(f)?;
    Ok(p)
}
