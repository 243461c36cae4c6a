//! Thin SVD by one-sided (Hestenes) Jacobi rotations, and the pseudoinverse
//! oracle built on it.
//!
//! Jacobi always runs on the taller orientation. Inputs at least twice as tall
//! as wide are first reduced by a Householder QR so the rotations act on the
//! small triangular factor.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, norm_sq, Matrix};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(σ) Vᵀ`, truncated at the numerical rank.
///
/// `u` is `m × r` and `v` is `n × r`, both column-major.
#[derive(Clone, Debug)]
pub struct Svd {
    rows: usize,
    cols: usize,
    u: Vec<f64>,
    sigma: Vec<f64>,
    v: Vec<f64>,
    rank_tol: f64,
}

impl Svd {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }

    /// Smallest nonzero singular value `σ_r`.
    pub fn sigma_min(&self) -> f64 {
        self.sigma[self.sigma.len() - 1]
    }

    pub fn u_col(&self, k: usize) -> &[f64] {
        &self.u[k * self.rows..(k + 1) * self.rows]
    }

    pub fn v_col(&self, k: usize) -> &[f64] {
        &self.v[k * self.cols..(k + 1) * self.cols]
    }

    /// `Uᵀ y`.
    pub fn u_t_mul(&self, y: &[f64]) -> Vec<f64> {
        (0..self.rank()).map(|k| dot(self.u_col(k), y)).collect()
    }

    /// `Vᵀ x`.
    pub fn v_t_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rank()).map(|k| dot(self.v_col(k), x)).collect()
    }

    fn u_mul(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (k, &ck) in c.iter().enumerate() {
            for (o, &u) in out.iter_mut().zip(self.u_col(k)) {
                *o += u * ck;
            }
        }
        out
    }

    fn v_mul(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (k, &ck) in c.iter().enumerate() {
            for (o, &v) in out.iter_mut().zip(self.v_col(k)) {
                *o += v * ck;
            }
        }
        out
    }

    /// Orthogonal projection onto `range(A)`: `A A† y`.
    pub fn project_range(&self, y: &[f64]) -> Vec<f64> {
        self.u_mul(&self.u_t_mul(y))
    }

    /// Orthogonal projection onto `range(Aᵀ)`: `A† A x`.
    pub fn project_row_space(&self, x: &[f64]) -> Vec<f64> {
        self.v_mul(&self.v_t_mul(x))
    }

    /// `A x` reconstructed from the factors.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let c: Vec<f64> = self
            .v_t_mul(x)
            .iter()
            .zip(&self.sigma)
            .map(|(c, s)| c * s)
            .collect();
        self.u_mul(&c)
    }

    /// `U diag(σ) Vᵀ` as a dense matrix.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.rows, self.cols);
        let mut data = vec![0.0; m * n];
        for k in 0..self.rank() {
            let (u, v, s) = (self.u_col(k), self.v_col(k), self.sigma[k]);
            for i in 0..m {
                let us = u[i] * s;
                for j in 0..n {
                    data[i * n + j] += us * v[j];
                }
            }
        }
        Matrix::dense(m, n, data).expect("finite factors")
    }
}

/// Thin SVD truncated at `max(m, n) · ε · σ₁`.
pub fn svd(a: &Matrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let data = a.to_dense_vec();
    if let Some(p) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: p / n,
            col: p % n,
        });
    }
    if data.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroMatrix);
    }

    // Column-major storage of Aᵀ is the row-major storage of A.
    let (scaled_u, v, p, q, transposed) = if m >= n {
        let mut w = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                w[j * m + i] = data[i * n + j];
            }
        }
        let (w, v) = tall_svd(w, m, n);
        (w, v, m, n, false)
    } else {
        let (w, v) = tall_svd(data, n, m);
        (w, v, n, m, true)
    };

    let mut order: Vec<(f64, usize)> = (0..q)
        .map(|k| (norm(&scaled_u[k * p..(k + 1) * p]), k))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sigma1 = order[0].0;
    let rank_tol = m.max(n) as f64 * f64::EPSILON * sigma1;

    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut sigma = Vec::new();
    for &(s, k) in order.iter().take_while(|(s, _)| *s > rank_tol) {
        sigma.push(s);
        left.extend(scaled_u[k * p..(k + 1) * p].iter().map(|x| x / s));
        right.extend_from_slice(&v[k * q..(k + 1) * q]);
    }
    let (u, v) = if transposed { (right, left) } else { (left, right) };
    Ok(Svd {
        rows: m,
        cols: n,
        u,
        sigma,
        v,
        rank_tol,
    })
}

/// SVD of a column-major `p × q` matrix with `p ≥ q`. Returns `U diag(σ)`
/// (`p × q`, unnormalized columns) and `V` (`q × q`).
fn tall_svd(w: Vec<f64>, p: usize, q: usize) -> (Vec<f64>, Vec<f64>) {
    if q > 1 && p >= 2 * q {
        let (qf, mut r) = householder_qr(w, p, q);
        let v = jacobi(&mut r, q, q);
        // U diag(σ) = Q (R V)
        let mut out = vec![0.0; p * q];
        for k in 0..q {
            let rk = &r[k * q..(k + 1) * q];
            let col = &mut out[k * p..(k + 1) * p];
            for (l, &c) in rk.iter().enumerate() {
                if c != 0.0 {
                    for (o, &qv) in col.iter_mut().zip(&qf[l * p..(l + 1) * p]) {
                        *o += qv * c;
                    }
                }
            }
        }
        (out, v)
    } else {
        let mut w = w;
        let v = jacobi(&mut w, p, q);
        (w, v)
    }
}

/// One-sided Jacobi: rotates the columns of `w` (`p × q`, column-major)
/// until they are mutually orthogonal, returning the accumulated rotations.
fn jacobi(w: &mut [f64], p: usize, q: usize) -> Vec<f64> {
    let mut v = vec![0.0; q * q];
    for k in 0..q {
        v[k * q + k] = 1.0;
    }
    let tol = f64::EPSILON * p as f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..q.saturating_sub(1) {
            for j in i + 1..q {
                let (head, tail) = w.split_at_mut(j * p);
                let wi = &mut head[i * p..(i + 1) * p];
                let wj = &mut tail[..p];
                let alpha = norm_sq(wi);
                let beta = norm_sq(wj);
                let gamma = dot(wi, wj);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(wi, wj, c, s);
                let (vh, vt) = v.split_at_mut(j * q);
                rotate(&mut vh[i * q..(i + 1) * q], &mut vt[..q], c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    v
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Householder QR of a column-major `p × q` matrix (`p ≥ q`). Returns the
/// thin `Q` (`p × q`) and `R` (`q × q`), both column-major.
fn householder_qr(mut a: Vec<f64>, p: usize, q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(q);
    for k in 0..q {
        let x = &a[k * p + k..(k + 1) * p];
        let nx = norm(x);
        if nx == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -nx } else { nx };
        let mut hv = x.to_vec();
        hv[0] -= alpha;
        let hn = norm_sq(&hv);
        for j in k..q {
            let col = &mut a[j * p + k..(j + 1) * p];
            let s = 2.0 * dot(&hv, col) / hn;
            for (c, h) in col.iter_mut().zip(&hv) {
                *c -= s * h;
            }
        }
        reflectors.push(hv);
    }

    let mut r = vec![0.0; q * q];
    for j in 0..q {
        for i in 0..=j {
            r[j * q + i] = a[j * p + i];
        }
    }

    let mut qf = vec![0.0; p * q];
    for k in 0..q {
        qf[k * p + k] = 1.0;
    }
    for (k, hv) in reflectors.iter().enumerate().rev() {
        if hv.is_empty() {
            continue;
        }
        let hn = norm_sq(hv);
        for j in 0..q {
            let col = &mut qf[j * p + k..(j + 1) * p];
            let s = 2.0 * dot(hv, col) / hn;
            for (c, h) in col.iter_mut().zip(hv) {
                *c -= s * h;
            }
        }
    }
    (qf, r)
}

/// Minimum-norm least-squares solution `A† b = V diag(1/σ) Uᵀ b`.
pub fn pinv_apply(f: &Svd, b: &[f64]) -> Result<Vec<f64>> {
    Error::check_len(f.rows, b.len())?;
    let c: Vec<f64> = f
        .u_t_mul(b)
        .iter()
        .zip(&f.sigma)
        .map(|(c, s)| c / s)
        .collect();
    Ok(f.v_mul(&c))
}

/// Splits `b` into its component in `range(A)` and the remainder
/// `b⊥ = (I − A A†) b`, which lies in `null(Aᵀ)`.
pub fn residual_split(f: &Svd, b: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    Error::check_len(f.rows, b.len())?;
    let range = f.project_range(b);
    let perp = b.iter().zip(&range).map(|(b, r)| b - r).collect();
    Ok((range, perp))
}

pub fn numerical_rank(f: &Svd) -> usize {
    f.rank()
}
