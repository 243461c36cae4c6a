//! Browser demo. Each exported function takes plain numbers and returns a
//! JSON string, so the page needs nothing beyond `JSON.parse`.
//!
//! The solvers are driven step by step here rather than through
//! `rebk_core::run`, which reads the system clock.

use rebk_core::{
    gen_type1, gen_type2, make_rhs, Algorithm, Matrix, ProblemInstance, RateConstants, Solver, SolverConfig,
    Stepsize,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Type I when `rank > 0`, otherwise Type II.
#[derive(Clone, Copy, Debug)]
pub struct ProblemShape {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub kappa: f64,
    pub inconsistent: bool,
}

fn problem(shape: ProblemShape, seed: u64) -> Result<ProblemInstance, String> {
    let a = if shape.rank > 0 {
        gen_type1(shape.m, shape.n, shape.rank, shape.kappa, seed)
    } else {
        gen_type2(shape.m, shape.n, seed)
    }
    .map_err(|e| e.to_string())?;
    make_rhs(a, seed ^ 0x9e37_79b9, shape.inconsistent, 1.0).map_err(|e| e.to_string())
}

fn config(alg: Algorithm, a: &Matrix, tau: usize, alpha: Stepsize, seed: u64) -> Result<SolverConfig, String> {
    let c = SolverConfig::new(alg).stepsize(alpha).seed(seed);
    if alg.is_block() {
        c.with_tau(a, tau).map_err(|e| e.to_string())
    } else {
        Ok(c)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Steps until `‖x − A†b‖ ≤ tol` or `max_iters`, sampling the error every
/// `stride` steps.
fn trace(solver: &Solver, p: &ProblemInstance, tol: f64, max_iters: usize, stride: usize) -> (Vec<(usize, f64)>, bool) {
    let x_star = p.x_star.as_ref().expect("generated problems carry x_star");
    let mut s = solver.init_state(&p.b).expect("dimensions match");
    let mut points = vec![(0, dist(&s.x, x_star))];
    let mut err = points[0].1;
    while err > tol && s.k < max_iters && err.is_finite() {
        solver.step(&mut s, &p.b);
        err = dist(&s.x, x_star);
        if s.k.is_multiple_of(stride) || err <= tol {
            points.push((s.k, err));
        }
    }
    (points, err <= tol)
}

#[derive(Serialize)]
pub struct Curve {
    pub algorithm: String,
    pub alpha: f64,
    pub iters: usize,
    pub converged: bool,
    pub points: Vec<(usize, f64)>,
}

/// Error curves of REK, RDBK and REBK on one random system.
pub fn convergence_curves(shape: ProblemShape, tau: usize, alpha_multiple: f64, seed: u64) -> Result<Vec<Curve>, String> {
    let p = problem(shape, seed)?;
    let alpha = Stepsize::BetaMultiple(alpha_multiple);
    let max_iters = 200 * shape.m.max(shape.n);
    [Algorithm::Rek, Algorithm::Rdbk, Algorithm::Rebk]
        .into_iter()
        .map(|alg| {
            let solver = Solver::new(&p.a, config(alg, &p.a, tau, alpha, seed)?).map_err(|e| e.to_string())?;
            let stride = (max_iters / 2000).max(1);
            let (points, converged) = trace(&solver, &p, 1e-6, max_iters, stride);
            Ok(Curve {
                algorithm: alg.name().to_string(),
                alpha: solver.alpha(),
                iters: points.last().map_or(0, |p| p.0),
                converged,
                points,
            })
        })
        .collect()
}

#[derive(Serialize)]
pub struct SweepPoint {
    pub multiple: f64,
    pub alpha: f64,
    pub median_iters: Option<f64>,
    pub converged: usize,
    pub runs: usize,
}

/// Median REBK iteration count at each stepsize multiple of `1/β_max`.
pub fn stepsize_sweep(
    shape: ProblemShape,
    tau: usize,
    multiples: &[f64],
    runs: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>, String> {
    let p = problem(shape, seed)?;
    let max_iters = 500 * shape.m.max(shape.n);
    multiples
        .iter()
        .map(|&c| {
            let stepsize = Stepsize::BetaMultiple(c);
            let mut iters = Vec::new();
            let mut alpha = f64::NAN;
            for r in 0..runs {
                let cfg = config(Algorithm::Rebk, &p.a, tau, stepsize, seed.wrapping_add(r as u64 + 1))?;
                let solver = Solver::new(&p.a, cfg).map_err(|e| e.to_string())?;
                alpha = solver.alpha();
                let (points, ok) = trace(&solver, &p, 1e-5, max_iters, usize::MAX);
                if ok {
                    iters.push(points.last().expect("nonempty").0 as f64);
                }
            }
            iters.sort_by(f64::total_cmp);
            let median = match iters.len() {
                0 => None,
                l if l % 2 == 1 => Some(iters[l / 2]),
                l => Some(0.5 * (iters[l / 2 - 1] + iters[l / 2])),
            };
            Ok(SweepPoint {
                multiple: c,
                alpha,
                median_iters: median,
                converged: iters.len(),
                runs,
            })
        })
        .collect()
}

#[derive(Serialize)]
pub struct RatePoint {
    pub multiple: f64,
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
    pub rho: f64,
    pub rho_hat: f64,
    pub guaranteed: bool,
}

#[derive(Serialize)]
pub struct RateProfile {
    pub beta_max: f64,
    pub alpha_opt: f64,
    pub single_row_rate: f64,
    pub points: Vec<RatePoint>,
}

/// Rate constants on a grid of `steps` multiples of `1/β_max` in `(0, max_multiple]`.
pub fn rate_profile(shape: ProblemShape, tau: usize, max_multiple: f64, steps: usize, seed: u64) -> Result<RateProfile, String> {
    let p = problem(shape, seed)?;
    let cfg = config(Algorithm::Rebk, &p.a, tau, Stepsize::BetaMultiple(1.0), seed)?;
    let rows = cfg.row_partition.expect("set by with_tau");
    let cols = cfg.col_partition.expect("set by with_tau");
    let base = RateConstants::compute(&p.a, &rows, &cols, 1.0).map_err(|e| e.to_string())?;
    let steps = steps.max(1);
    let points = (1..=steps)
        .map(|i| {
            let multiple = max_multiple * i as f64 / steps as f64;
            let c = base.with_alpha(multiple / base.beta_max);
            RatePoint {
                multiple,
                alpha: c.alpha,
                delta: c.delta,
                eta: c.eta,
                rho: c.rho,
                rho_hat: c.rho_hat,
                guaranteed: c.guaranteed,
            }
        })
        .collect();
    Ok(RateProfile {
        beta_max: base.beta_max,
        alpha_opt: base.alpha_opt,
        single_row_rate: 1.0 - base.sigma_r_sq / base.fro_sq,
        points,
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

fn shape(m: usize, n: usize, rank: usize, kappa: f64, inconsistent: bool) -> ProblemShape {
    ProblemShape { m, n, rank, kappa, inconsistent }
}

#[wasm_bindgen(js_name = convergenceCurves)]
#[allow(clippy::too_many_arguments)]
pub fn convergence_curves_js(
    m: usize,
    n: usize,
    rank: usize,
    kappa: f64,
    inconsistent: bool,
    tau: usize,
    alpha_multiple: f64,
    seed: u32,
) -> Result<String, JsError> {
    to_json(convergence_curves(shape(m, n, rank, kappa, inconsistent), tau, alpha_multiple, seed as u64))
}

#[wasm_bindgen(js_name = stepsizeSweep)]
#[allow(clippy::too_many_arguments)]
pub fn stepsize_sweep_js(
    m: usize,
    n: usize,
    rank: usize,
    kappa: f64,
    inconsistent: bool,
    tau: usize,
    multiples: Vec<f64>,
    runs: usize,
    seed: u32,
) -> Result<String, JsError> {
    to_json(stepsize_sweep(shape(m, n, rank, kappa, inconsistent), tau, &multiples, runs, seed as u64))
}

#[wasm_bindgen(js_name = rateProfile)]
#[allow(clippy::too_many_arguments)]
pub fn rate_profile_js(
    m: usize,
    n: usize,
    rank: usize,
    kappa: f64,
    inconsistent: bool,
    tau: usize,
    max_multiple: f64,
    steps: usize,
    seed: u32,
) -> Result<String, JsError> {
    to_json(rate_profile(shape(m, n, rank, kappa, inconsistent), tau, max_multiple, steps, seed as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: ProblemShape = ProblemShape { m: 60, n: 30, rank: 20, kappa: 2.0, inconsistent: true };

    #[test]
    fn curves_reach_the_tolerance() {
        let curves = convergence_curves(SMALL, 5, 1.0, 1).unwrap();
        assert_eq!(curves.len(), 3);
        for c in &curves {
            assert!(c.converged, "{}", c.algorithm);
            assert_eq!(c.points[0].0, 0);
            assert!(c.points.last().unwrap().1 <= 1e-6);
        }
        assert!(curves[2].iters < curves[0].iters);
    }

    #[test]
    fn sweep_reports_every_multiple() {
        let s = stepsize_sweep(SMALL, 5, &[0.75, 1.75], 3, 2).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|p| p.converged == 3 && p.median_iters.is_some()));
    }

    #[test]
    fn profile_flags_the_boundary() {
        let r = rate_profile(SMALL, 5, 2.5, 5, 3).unwrap();
        let flags: Vec<bool> = r.points.iter().map(|p| p.guaranteed).collect();
        assert_eq!(flags, [true, true, true, false, false]);
        assert!(r.points[1].rho_hat < r.single_row_rate);
    }

    #[test]
    fn json_shape() {
        let json = to_json(rate_profile(SMALL, 5, 2.0, 2, 3)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 2);
        assert!(v["beta_max"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn bad_shapes_are_reported() {
        let bad = ProblemShape { rank: 99, ..SMALL };
        assert!(convergence_curves(bad, 5, 1.0, 1).is_err());
    }
}
