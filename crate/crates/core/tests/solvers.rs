use rebk_core::factorizations::svd;
use rebk_core::{
    gen_type1, gen_type2, make_rhs, run, Algorithm, Axis, Matrix, Partition, Solver, SolverConfig,
    Stepsize, StopMode, StoppingRule,
};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn block_config(alg: Algorithm, a: &Matrix, tau: usize) -> SolverConfig {
    SolverConfig::new(alg)
        .with_tau(a, tau)
        .unwrap()
        .stepsize(Stepsize::BetaMultiple(1.0))
}

#[test]
fn every_algorithm_solves_a_consistent_system() {
    let a = gen_type1(60, 30, 20, 2.0, 1).unwrap();
    let p = make_rhs(a, 2, false, 1.0).unwrap();
    for alg in Algorithm::ALL.into_iter().filter(|a| *a != Algorithm::Dsbgs) {
        let cfg = if alg.is_block() {
            block_config(alg, &p.a, 5)
        } else {
            SolverConfig::new(alg)
        };
        let t = run(&p, &cfg.seed(3)).unwrap();
        assert!(t.converged, "{alg} did not converge");
        assert!(dist(&t.x, p.x_star.as_ref().unwrap()) <= 1e-5);
    }
}

#[test]
fn dsbgs_solves_a_full_rank_system_with_a_damped_step() {
    // Column-restricted updates leave the row space, so only full column
    // rank systems have A†b as their limit.
    let a = gen_type2(60, 30, 1).unwrap();
    let p = make_rhs(a, 2, false, 1.0).unwrap();
    let cfg = block_config(Algorithm::Dsbgs, &p.a, 5).stepsize(Stepsize::BetaMultiple(0.5));
    let t = run(&p, &cfg.seed(3)).unwrap();
    assert!(t.converged);
}

#[test]
fn extended_methods_solve_inconsistent_systems() {
    let a = gen_type1(50, 70, 25, 3.0, 4).unwrap();
    let p = make_rhs(a, 5, true, 2.0).unwrap();
    assert!(!p.meta.consistent);
    for alg in [Algorithm::Rek, Algorithm::Rdbk, Algorithm::Rebk] {
        let cfg = if alg.is_block() { block_config(alg, &p.a, 7) } else { SolverConfig::new(alg) };
        let t = run(&p, &cfg.seed(6)).unwrap();
        assert!(t.converged, "{alg}");
        let z = t.z.unwrap();
        assert!(dist(&z, p.b_perp.as_ref().unwrap()) <= 1e-3 * norm(&p.b));
    }
}

#[test]
fn non_extended_methods_stall_on_inconsistent_systems() {
    let a = gen_type2(40, 10, 7).unwrap();
    let p = make_rhs(a, 8, true, 1.0).unwrap();
    let t = run(&p, &SolverConfig::new(Algorithm::Rk).seed(1).max_iters(20_000)).unwrap();
    assert!(!t.converged);
}

#[test]
fn iterates_stay_in_the_right_subspaces() {
    let a = gen_type1(30, 40, 12, 2.0, 9).unwrap();
    let f = svd(&a).unwrap();
    let p = make_rhs(a, 10, true, 1.0).unwrap();
    let solver = Solver::new(&p.a, block_config(Algorithm::Rebk, &p.a, 6).seed(11)).unwrap();
    let mut s = solver.init_state(&p.b).unwrap();
    let x_star = p.x_star.as_ref().unwrap();
    let b_perp = p.b_perp.as_ref().unwrap();
    for _ in 0..300 {
        solver.step(&mut s, &p.b);
        let ex: Vec<f64> = s.x.iter().zip(x_star).map(|(a, b)| a - b).collect();
        let ez: Vec<f64> = s.z.as_ref().unwrap().iter().zip(b_perp).map(|(a, b)| a - b).collect();
        assert!(dist(&f.project_row_space(&ex), &ex) <= 1e-10 * (1.0 + norm(&ex)));
        assert!(dist(&f.project_range(&ez), &ez) <= 1e-10 * (1.0 + norm(&ez)));
    }
}

#[test]
fn dsbgs_with_one_column_block_is_rabk() {
    let a = gen_type2(24, 12, 12).unwrap();
    let p = make_rhs(a, 13, false, 1.0).unwrap();
    let rows = Partition::contiguous(Axis::Row, 24, 4).unwrap();
    let cols = Partition::contiguous(Axis::Column, 12, 12).unwrap();
    let dsbgs = Solver::new(
        &p.a,
        SolverConfig::new(Algorithm::Dsbgs).partitions(rows.clone(), cols.clone()).alpha(1.3),
    )
    .unwrap();
    let rabk = Solver::new(&p.a, SolverConfig::new(Algorithm::Rabk).partitions(rows, cols).alpha(1.3)).unwrap();
    let mut s1 = dsbgs.init_state_seeded(&p.b, 4).unwrap();
    let mut s2 = rabk.init_state_seeded(&p.b, 4).unwrap();
    for _ in 0..500 {
        dsbgs.step(&mut s1, &p.b);
        rabk.step(&mut s2, &p.b);
        assert_eq!(s1.x, s2.x);
    }
}

#[test]
fn rk_is_rabk_with_unit_blocks() {
    let a = gen_type2(20, 8, 14).unwrap();
    let p = make_rhs(a, 15, false, 1.0).unwrap();
    let rk = Solver::new(&p.a, SolverConfig::new(Algorithm::Rk).alpha(0.9)).unwrap();
    let rabk = Solver::new(&p.a, SolverConfig::new(Algorithm::Rabk).with_tau(&p.a, 1).unwrap().alpha(0.9)).unwrap();
    let mut s1 = rk.init_state_seeded(&p.b, 1).unwrap();
    let mut s2 = rabk.init_state_seeded(&p.b, 1).unwrap();
    for _ in 0..500 {
        rk.step(&mut s1, &p.b);
        rabk.step(&mut s2, &p.b);
    }
    assert_eq!(s1.x, s2.x);
}

#[test]
fn sparse_and_dense_storage_agree() {
    let a = gen_type1(40, 25, 15, 2.0, 16).unwrap();
    let p = make_rhs(a, 17, true, 1.0).unwrap();
    let sparse = p.a.to_sparse();
    for alg in [Algorithm::Rek, Algorithm::Rebk, Algorithm::Rdbk, Algorithm::Dsbgs] {
        let cfg = if alg.is_block() { block_config(alg, &p.a, 5) } else { SolverConfig::new(alg) };
        let d = Solver::new(&p.a, cfg.clone().seed(2)).unwrap();
        let s = Solver::new(&sparse, cfg.seed(2)).unwrap();
        let mut sd = d.init_state(&p.b).unwrap();
        let mut ss = s.init_state(&p.b).unwrap();
        for _ in 0..200 {
            d.step(&mut sd, &p.b);
            s.step(&mut ss, &p.b);
        }
        assert!(dist(&sd.x, &ss.x) <= 1e-10 * (1.0 + norm(&sd.x)), "{alg}");
    }
}

#[test]
fn same_seed_same_run() {
    let a = gen_type2(50, 20, 18).unwrap();
    let p = make_rhs(a, 19, true, 1.0).unwrap();
    let cfg = block_config(Algorithm::Rebk, &p.a, 5).seed(77).record_errors(true);
    let t1 = run(&p, &cfg).unwrap();
    let t2 = run(&p, &cfg).unwrap();
    assert_eq!(t1.iters, t2.iters);
    assert_eq!(t1.errors, t2.errors);
    let t3 = run(&p, &cfg.clone().seed(78)).unwrap();
    assert_ne!(t1.x, t3.x);
}

#[test]
fn recorded_errors_follow_the_stride() {
    let a = gen_type2(30, 10, 20).unwrap();
    let p = make_rhs(a, 21, false, 1.0).unwrap();
    let cfg = SolverConfig::new(Algorithm::Rek)
        .record_errors(true)
        .stop(StoppingRule { mode: StopMode::OracleError, tol: 1e-5, check_stride: 25 });
    let t = run(&p, &cfg).unwrap();
    assert!(t.converged);
    assert_eq!(t.errors[0].0, 0);
    assert!(t.errors.iter().all(|(k, _)| k % 25 == 0));
    assert_eq!(t.iters % 25, 0);
    assert!(t.errors.last().unwrap().1 <= 1e-5);
}

#[test]
fn residual_proxy_stops_near_the_solution() {
    let a = gen_type1(60, 40, 30, 2.0, 22).unwrap();
    let p = make_rhs(a, 23, true, 1.0).unwrap();
    let cfg = block_config(Algorithm::Rebk, &p.a, 10)
        .stop(StoppingRule { mode: StopMode::ResidualProxy, tol: 1e-9, check_stride: 10 });
    let solver = Solver::new(&p.a, cfg).unwrap();
    let t = solver.run(&p.b, None).unwrap();
    assert!(t.converged);
    assert!(dist(&t.x, p.x_star.as_ref().unwrap()) <= 1e-5);
}

#[test]
fn stepsize_beyond_the_window_is_flagged_but_may_converge() {
    let a = gen_type1(100, 50, 30, 2.0, 24).unwrap();
    let p = make_rhs(a, 25, true, 1.0).unwrap();
    let cfg = SolverConfig::new(Algorithm::Rebk)
        .with_tau(&p.a, 10)
        .unwrap()
        .stepsize(Stepsize::BetaMultiple(2.1));
    let t = run(&p, &cfg.seed(4)).unwrap();
    assert!(t.outside_guaranteed_regime());
    assert!(t.converged);
}
