//! Theoretical convergence constants for the extended block method and the
//! closed-form error bounds built from them.
//!
//! Notation: `‖A‖_F²` is `fro_sq`, `σ₁` and `σ_r` the largest and smallest
//! nonzero singular values, and `β` the largest spectral-to-Frobenius squared
//! norm ratio over the blocks of a partition.

use crate::error::{Error, Result};
use crate::factorizations::{svd, Svd};
use crate::matrix::{Axis, Matrix};
use crate::partition::Partition;

/// `δ = max_i |1 − α σ_i² / ‖A‖_F²|` over all nonzero singular values.
pub fn compute_delta(f: &Svd, fro_sq: f64, alpha: f64) -> f64 {
    f.sigma()
        .iter()
        .map(|s| (1.0 - alpha * s * s / fro_sq).abs())
        .fold(0.0, f64::max)
}

/// Stepsize minimizing `δ`, and the resulting `δ`:
/// `α* = 2‖A‖_F² / (σ₁² + σ_r²)`, `δ* = (σ₁² − σ_r²) / (σ₁² + σ_r²)`.
pub fn optimal_alpha(f: &Svd, fro_sq: f64) -> (f64, f64) {
    let s1 = f.sigma_max() * f.sigma_max();
    let sr = f.sigma_min() * f.sigma_min();
    (2.0 * fro_sq / (s1 + sr), (s1 - sr) / (s1 + sr))
}

/// Largest `‖block‖₂² / ‖block‖_F²` over the blocks of a partition.
///
/// A block with a single row or column has ratio exactly 1.
pub fn block_beta(a: &Matrix, p: &Partition) -> Result<f64> {
    p.check_matches(a, p.axis())?;
    let mut beta: f64 = 0.0;
    for (b, block) in p.blocks().iter().enumerate() {
        let view = a.block(p.axis(), block)?;
        let fro = view.frobenius_sq();
        if fro <= 0.0 {
            return Err(Error::ZeroBlock {
                axis: p.axis(),
                block: b,
            });
        }
        let ratio = if block.len() == 1 {
            1.0
        } else {
            (view.spectral_norm_sq()? / fro).min(1.0)
        };
        beta = beta.max(ratio);
    }
    Ok(beta)
}

/// Largest `‖A_{I,J}‖₂² / ‖A_{I,J}‖_F²` over the nonzero cells of a
/// row-by-column grid. Zero cells are never sampled and are skipped.
pub fn cell_beta(a: &Matrix, rows: &Partition, cols: &Partition) -> Result<f64> {
    rows.check_matches(a, Axis::Row)?;
    cols.check_matches(a, Axis::Column)?;
    let mut beta: f64 = 0.0;
    for rb in rows.blocks() {
        let strip = a.submatrix(Axis::Row, rb)?;
        for cb in cols.blocks() {
            let cell = strip.submatrix(Axis::Column, cb)?;
            let fro = cell.frobenius_norm_sq();
            if fro <= 0.0 {
                continue;
            }
            let ratio = if rb.len() == 1 || cb.len() == 1 {
                1.0
            } else {
                (cell.spectral_norm_sq()? / fro).min(1.0)
            };
            beta = beta.max(ratio);
        }
    }
    if beta == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(beta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaMax {
    pub rows: f64,
    pub cols: f64,
}

impl BetaMax {
    pub fn max(&self) -> f64 {
        self.rows.max(self.cols)
    }
}

pub fn compute_beta_max(a: &Matrix, row_p: &Partition, col_p: &Partition) -> Result<BetaMax> {
    if row_p.axis() != Axis::Row || col_p.axis() != Axis::Column {
        return Err(Error::invalid("expected a row partition and a column partition"));
    }
    Ok(BetaMax {
        rows: block_beta(a, row_p)?,
        cols: block_beta(a, col_p)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaRho {
    pub eta: f64,
    pub rho: f64,
    /// `max(η, ρ)`.
    pub rho_hat: f64,
    /// Whether `α < 2 / max(β_rows, β_cols)`, the window the mean-square
    /// bounds are proven for.
    pub guaranteed: bool,
}

/// `η = 1 − (2α − α² β_rows) σ_r² / ‖A‖_F²`, `ρ` likewise with `β_cols`.
pub fn compute_eta_rho(
    beta_rows: f64,
    beta_cols: f64,
    sigma_r_sq: f64,
    fro_sq: f64,
    alpha: f64,
) -> EtaRho {
    let rate = |beta: f64| 1.0 - (2.0 * alpha - alpha * alpha * beta) * sigma_r_sq / fro_sq;
    let eta = rate(beta_rows);
    let rho = rate(beta_cols);
    let beta_max = beta_rows.max(beta_cols);
    EtaRho {
        eta,
        rho,
        rho_hat: rate(beta_max),
        guaranteed: alpha > 0.0 && alpha < 2.0 / beta_max,
    }
}

/// Everything the bounds need for one (matrix, partitions, stepsize) choice.
#[derive(Clone, Debug, PartialEq)]
pub struct RateConstants {
    pub sigma1_sq: f64,
    pub sigma_r_sq: f64,
    pub fro_sq: f64,
    pub rank: usize,
    pub beta_max_rows: f64,
    pub beta_max_cols: f64,
    pub beta_max: f64,
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
    pub rho: f64,
    pub rho_hat: f64,
    pub alpha_opt: f64,
    pub delta_opt: f64,
    /// `α < 2/β_max`: the mean-square bounds apply.
    pub guaranteed: bool,
    /// `α < 2‖A‖_F²/σ₁²`: the expected iterate converges.
    pub mean_converges: bool,
}

impl RateConstants {
    pub fn new(f: &Svd, fro_sq: f64, beta: BetaMax, alpha: f64) -> Self {
        let sigma1_sq = f.sigma_max() * f.sigma_max();
        let sigma_r_sq = f.sigma_min() * f.sigma_min();
        let er = compute_eta_rho(beta.rows, beta.cols, sigma_r_sq, fro_sq, alpha);
        let (alpha_opt, delta_opt) = optimal_alpha(f, fro_sq);
        RateConstants {
            sigma1_sq,
            sigma_r_sq,
            fro_sq,
            rank: f.rank(),
            beta_max_rows: beta.rows,
            beta_max_cols: beta.cols,
            beta_max: beta.max(),
            alpha,
            delta: compute_delta(f, fro_sq, alpha),
            eta: er.eta,
            rho: er.rho,
            rho_hat: er.rho_hat,
            alpha_opt,
            delta_opt,
            guaranteed: er.guaranteed,
            mean_converges: alpha > 0.0 && alpha < 2.0 * fro_sq / sigma1_sq,
        }
    }

    /// Computes the SVD and block ratios from scratch.
    pub fn compute(a: &Matrix, row_p: &Partition, col_p: &Partition, alpha: f64) -> Result<Self> {
        let f = svd(a)?;
        let beta = compute_beta_max(a, row_p, col_p)?;
        Ok(RateConstants::new(&f, a.frobenius_norm_sq(), beta, alpha))
    }

    /// Same matrix and partitions, different stepsize.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let er = compute_eta_rho(
            self.beta_max_rows,
            self.beta_max_cols,
            self.sigma_r_sq,
            self.fro_sq,
            alpha,
        );
        // δ is attained at σ₁ or σ_r
        let delta = (1.0 - alpha * self.sigma1_sq / self.fro_sq)
            .abs()
            .max((1.0 - alpha * self.sigma_r_sq / self.fro_sq).abs());
        RateConstants {
            alpha,
            delta,
            eta: er.eta,
            rho: er.rho,
            rho_hat: er.rho_hat,
            guaranteed: er.guaranteed,
            mean_converges: alpha > 0.0 && alpha < 2.0 * self.fro_sq / self.sigma1_sq,
            ..self.clone()
        }
    }

    /// `ε = (1 − ρ̂) / (2ρ̂)`, which keeps `(1 + ε) ρ̂ < 1`.
    pub fn default_epsilon(&self) -> f64 {
        (1.0 - self.rho_hat) / (2.0 * self.rho_hat)
    }
}

/// Initial-error quantities the bounds are evaluated against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialErrors {
    /// `‖x⁰ − A†b‖₂`.
    pub x0_err: f64,
    /// `‖z⁰ − b⊥‖₂`.
    pub z0_perp_err: f64,
    /// `‖Aᵀ z⁰‖₂`.
    pub at_z0_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    /// Bound on `‖E[xᵏ] − A†b‖₂`:
    /// `δᵏ (‖x⁰ − A†b‖ + α k ‖Aᵀz⁰‖ / ‖A‖_F²)`.
    pub expected_error_norm: f64,
    /// Bound on `E‖xᵏ − A†b‖²` in summed form:
    /// `(1+ε)ᵏ ηᵏ ‖x⁰ − A†b‖² + (1 + 1/ε) α² β_rows ‖z⁰ − b⊥‖² / ‖A‖_F² · Σ_{l<k} ρ^{k−l} (1+ε)ˡ ηˡ`.
    pub mean_square: f64,
    /// The looser closed form
    /// `(1+ε)ᵏ ρ̂ᵏ (‖x⁰ − A†b‖² + (1+ε) α² β_rows ‖z⁰ − b⊥‖² / (ε² ‖A‖_F²))`.
    pub mean_square_closed: f64,
    /// Bound on `E‖zᵏ − b⊥‖²`: `ρᵏ ‖z⁰ − b⊥‖²`.
    pub z_mean_square: f64,
}

pub fn theorem_bounds(c: &RateConstants, init: &InitialErrors, k: u32, epsilon: f64) -> Bounds {
    let kf = k as f64;
    let expected_error_norm =
        c.delta.powi(k as i32) * (init.x0_err + c.alpha * kf * init.at_z0_norm / c.fro_sq);

    let grow = (1.0 + epsilon) * c.eta;
    let mut sum = 0.0;
    for l in 0..k {
        sum += c.rho.powi((k - l) as i32) * grow.powi(l as i32);
    }
    let z_term = c.alpha * c.alpha * c.beta_max_rows * init.z0_perp_err * init.z0_perp_err / c.fro_sq;
    let x0_sq = init.x0_err * init.x0_err;
    let mean_square = grow.powi(k as i32) * x0_sq + (1.0 + 1.0 / epsilon) * z_term * sum;

    let mean_square_closed = ((1.0 + epsilon) * c.rho_hat).powi(k as i32)
        * (x0_sq + (1.0 + epsilon) * z_term / (epsilon * epsilon));

    Bounds {
        expected_error_norm,
        mean_square,
        mean_square_closed,
        z_mean_square: c.rho.powi(k as i32) * init.z0_perp_err * init.z0_perp_err,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn diag34() -> Matrix {
        Matrix::diag(&[3.0, 4.0]).unwrap()
    }

    #[test]
    fn delta_examples() {
        let a = diag34();
        let f = svd(&a).unwrap();
        assert!(rel(compute_delta(&f, 25.0, 1.0), 0.64) < 1e-12);
        assert!(rel(compute_delta(&f, 25.0, 2.0), 0.28) < 1e-12);

        let i3 = Matrix::identity(3).unwrap();
        let g = svd(&i3).unwrap();
        assert!(compute_delta(&g, 3.0, 3.0) < 1e-15);
    }

    #[test]
    fn optimal_alpha_examples() {
        let f = svd(&diag34()).unwrap();
        let (a, d) = optimal_alpha(&f, 25.0);
        assert!(rel(a, 2.0) < 1e-12 && rel(d, 0.28) < 1e-12);

        let n = 5;
        let g = svd(&Matrix::identity(n).unwrap()).unwrap();
        let (a, d) = optimal_alpha(&g, n as f64);
        assert!(rel(a, n as f64) < 1e-12 && d.abs() < 1e-15);
    }

    #[test]
    fn beta_examples() {
        let a = diag34();
        let s = compute_beta_max(
            &a,
            &Partition::singletons(Axis::Row, 2).unwrap(),
            &Partition::singletons(Axis::Column, 2).unwrap(),
        )
        .unwrap();
        assert_eq!((s.rows, s.cols), (1.0, 1.0));

        let whole = Partition::contiguous(Axis::Row, 2, 2).unwrap();
        assert!(rel(block_beta(&a, &whole).unwrap(), 0.64) < 1e-12);

        let i6 = Matrix::identity(6).unwrap();
        let p = Partition::contiguous(Axis::Row, 6, 3).unwrap();
        assert!(rel(block_beta(&i6, &p).unwrap(), 1.0 / 3.0) < 1e-12);
    }

    #[test]
    fn cell_beta_skips_zero_cells() {
        // diag(3,4) in a 2x2 grid of 1x1 cells: the off-diagonal cells are zero
        let a = diag34();
        let rows = Partition::singletons(Axis::Row, 2).unwrap();
        let cols = Partition::singletons(Axis::Column, 2).unwrap();
        assert_eq!(cell_beta(&a, &rows, &cols).unwrap(), 1.0);

        let i6 = Matrix::identity(6).unwrap();
        let r = Partition::contiguous(Axis::Row, 6, 3).unwrap();
        let c = Partition::contiguous(Axis::Column, 6, 3).unwrap();
        assert!(rel(cell_beta(&i6, &r, &c).unwrap(), 1.0 / 3.0) < 1e-12);
        let whole = Partition::contiguous(Axis::Column, 6, 6).unwrap();
        assert!(rel(cell_beta(&i6, &r, &whole).unwrap(), block_beta(&i6, &r).unwrap()) < 1e-12);
    }

    #[test]
    fn eta_rho_examples() {
        let er = compute_eta_rho(1.0, 1.0, 9.0, 25.0, 1.0);
        assert!(rel(er.eta, 0.64) < 1e-12 && rel(er.rho, 0.64) < 1e-12);
        assert!(er.guaranteed);

        let beta = 0.3;
        let er = compute_eta_rho(beta, 0.2, 2.0, 40.0, 1.0 / beta);
        assert!(rel(er.rho_hat, 1.0 - 2.0 / (beta * 40.0)) < 1e-12);

        let er = compute_eta_rho(0.5, 0.5, 1.0, 10.0, 1e-12);
        assert!(er.eta > 1.0 - 1e-11 && er.rho < 1.0);

        assert!(!compute_eta_rho(0.5, 0.25, 1.0, 10.0, 4.0).guaranteed);
        assert!(compute_eta_rho(0.5, 0.25, 1.0, 10.0, 3.999).guaranteed);
    }

    #[test]
    fn bounds_at_k_zero_and_trivial_z() {
        let f = svd(&diag34()).unwrap();
        let c = RateConstants::new(&f, 25.0, BetaMax { rows: 1.0, cols: 1.0 }, 1.0);
        let init = InitialErrors {
            x0_err: 2.0,
            z0_perp_err: 3.0,
            at_z0_norm: 5.0,
        };
        let b = theorem_bounds(&c, &init, 0, c.default_epsilon());
        assert_eq!(b.expected_error_norm, 2.0);
        assert_eq!(b.mean_square, 4.0);

        let init = InitialErrors {
            x0_err: 1.0,
            z0_perp_err: 0.0,
            at_z0_norm: 0.0,
        };
        let c = c.with_alpha(2.0);
        let b = theorem_bounds(&c, &init, 10, 0.5);
        assert!(rel(b.expected_error_norm, 0.28f64.powi(10)) < 1e-12);
        assert!(rel(b.expected_error_norm, 2.9619e-6) < 1e-4);
    }

    #[test]
    fn with_alpha_matches_fresh_computation() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 0.5], [0.0, 1.0, -1.0], [2.0, 0.0, 1.0]]).unwrap();
        let rows = Partition::contiguous(Axis::Row, 3, 2).unwrap();
        let cols = Partition::contiguous(Axis::Column, 3, 2).unwrap();
        let c = RateConstants::compute(&a, &rows, &cols, 1.0).unwrap();
        let d = RateConstants::compute(&a, &rows, &cols, 1.7).unwrap();
        let e = c.with_alpha(1.7);
        assert!(rel(e.delta, d.delta) < 1e-12);
        assert_eq!(e.rho_hat, d.rho_hat);
    }
}
