mod common;

use common::*;
use rand::Rng;
use tailcs::objective::{f_value, g_gradient, kkt_report, FactorPair, TailProblem};
use tailcs::phpp::{
    default_init, phpp_update_u, phpp_update_v, restricted_update_u, restricted_update_v,
    solve_phpp, solve_phpp_improved, PhppConfig, StopReason,
};
use tailcs::problem_gen::{generate_instance, Ensemble, NoiseModel};
use tailcs::reference::tail_lasso_oracle;
use tailcs::support::SupportSet;

#[test]
fn block_updates_are_prox_stationary() {
    let mut r = rng(11);
    for _ in 0..50 {
        let (m, n) = (r.random_range(3..12), r.random_range(3..20));
        let a = uniform_matrix(m, n, &mut r);
        let y = uniform_vector(m, 1.0, &mut r);
        let t: SupportSet = (0..n).filter(|_| r.random_bool(0.2)).collect();
        let lambda = r.random_range(1e-3..1.0);
        let p = TailProblem::new(&a, &y, lambda, t).unwrap();
        let mut cfg = PhppConfig::new(lambda);
        cfg.alpha = r.random_range(0.1..1e3);
        let w = random_pair(n, &mut r);
        let u1 = phpp_update_u(&p, &cfg, &w.u, &w.v).unwrap();
        let grad = g_gradient(
            &p,
            &FactorPair {
                u: u1.clone(),
                v: w.v.clone(),
            },
        )
        .unwrap();
        let res = &grad.u + (&u1 - &w.u) / cfg.alpha;
        assert!(
            res.norm() <= 1e-8 * (1.0 + u1.norm()),
            "u residual {}",
            res.norm()
        );
        let v1 = phpp_update_v(&p, &cfg, &u1, &w.v).unwrap();
        let grad = g_gradient(
            &p,
            &FactorPair {
                u: u1.clone(),
                v: v1.clone(),
            },
        )
        .unwrap();
        let res = &grad.v + (&v1 - &w.v) / cfg.alpha;
        assert!(
            res.norm() <= 1e-8 * (1.0 + v1.norm()),
            "v residual {}",
            res.norm()
        );
    }
}

#[test]
fn tiny_threshold_restriction_equals_full_update() {
    let mut r = rng(12);
    for _ in 0..30 {
        let (m, n) = (r.random_range(3..10), r.random_range(4..30));
        let a = uniform_matrix(m, n, &mut r);
        let y = uniform_vector(m, 1.0, &mut r);
        let t: SupportSet = (0..n).filter(|_| r.random_bool(0.3)).collect();
        let p = TailProblem::new(&a, &y, 0.05, t).unwrap();
        let mut cfg = PhppConfig::new(0.05);
        cfg.tau = f64::MIN_POSITIVE;
        let w = random_pair(n, &mut r);
        let s = SupportSet::above_threshold(w.v.as_slice(), cfg.tau);
        assert_eq!(s.len(), n);
        let full = phpp_update_u(&p, &cfg, &w.u, &w.v).unwrap();
        let rest = restricted_update_u(&p, &cfg, &w.u, &w.v, &s).unwrap();
        assert!((&full - &rest).amax() < 1e-10);
        let s_tilde = SupportSet::above_threshold(full.as_slice(), cfg.tau);
        let full_v = phpp_update_v(&p, &cfg, &full, &w.v).unwrap();
        let rest_v = restricted_update_v(&p, &cfg, &full, &w.v, &s_tilde).unwrap();
        assert!((full_v - rest_v).amax() < 1e-10);
    }
}

#[test]
fn descent_on_many_traces() {
    let mut total = 0;
    for seed in 0..20u64 {
        let inst = generate_instance(
            Ensemble::Gaussian,
            16,
            40,
            4,
            &NoiseModel::Gaussian { sigma: 0.01 },
            seed,
        )
        .unwrap();
        let lambda = 0.01;
        let mut cfg = PhppConfig::new(lambda);
        cfg.max_iters = 200;
        let t = SupportSet::new(vec![inst.truth.support.as_slice()[0]], 40).unwrap();
        let p = TailProblem::new(&inst.matrix, &inst.y, lambda, t).unwrap();
        let (_, trace) = solve_phpp(&p, &cfg, &default_init(&inst.matrix, &inst.y, seed)).unwrap();
        assert!(trace.max_descent_excess(cfg.alpha) <= 1e-12);
        assert!(trace.records.iter().enumerate().all(|(i, r)| r.iter == i));
        total += trace.iterations();
    }
    assert!(total >= 1000, "only {total} iterations");
}

#[test]
fn fixed_points_are_global_minimizers() {
    let mut r = rng(13);
    for seed in 0..10u64 {
        let inst = generate_instance(Ensemble::Gaussian, 20, 40, 4, &NoiseModel::None, 100 + seed)
            .unwrap();
        let lambda = r.random_range(1e-3..1e-1);
        let t = SupportSet::new(inst.truth.support.as_slice()[..2].to_vec(), 40).unwrap();
        let p = TailProblem::new(&inst.matrix, &inst.y, lambda, t).unwrap();
        let mut cfg = PhppConfig::new(lambda);
        cfg.step_tol = 1e-12;
        cfg.kkt_tol = 0.0;
        cfg.max_iters = 200_000;
        let (w, trace) = solve_phpp(&p, &cfg, &default_init(&inst.matrix, &inst.y, seed)).unwrap();
        assert_eq!(trace.status, StopReason::ConvergedStep, "seed {seed}");
        let z = w.product();
        let f = f_value(&p, &z).unwrap();
        let f_star = f_value(&p, &tail_lasso_oracle(&p, 1e-12).unwrap()).unwrap();
        assert!(
            (f - f_star).abs() / (1.0 + f_star) < 1e-7,
            "seed {seed}: {f} vs {f_star}"
        );
        assert!(kkt_report(&p, &z).unwrap().overall < 1e-6);
    }
}

#[test]
fn improved_solver_recovers_easy_instances() {
    let mut successes = 0;
    for seed in 0..20u64 {
        let inst =
            generate_instance(Ensemble::Gaussian, 64, 256, 6, &NoiseModel::None, seed).unwrap();
        let cfg = PhppConfig::new(0.1 / 64.0);
        let out = solve_phpp_improved(
            &inst.matrix,
            &inst.y,
            &cfg,
            &default_init(&inst.matrix, &inst.y, seed),
        )
        .unwrap();
        assert!(out.trace.records.iter().all(|r| r.t_size <= 64));
        if (&out.z - inst.truth.dense()).norm() <= 1e-4 {
            successes += 1;
        }
    }
    assert!(successes >= 19, "{successes}/20");
}

#[test]
fn improved_solver_support_schedule() {
    let inst = generate_instance(Ensemble::Gaussian, 8, 20, 2, &NoiseModel::None, 3).unwrap();
    let mut cfg = PhppConfig::new(0.1 / 8.0);
    cfg.k0 = 2;
    cfg.k_step = 3;
    cfg.max_iters = 6;
    cfg.step_tol = 0.0;
    cfg.kkt_tol = 0.0;
    let out = solve_phpp_improved(
        &inst.matrix,
        &inst.y,
        &cfg,
        &default_init(&inst.matrix, &inst.y, 3),
    )
    .unwrap();
    let sizes: Vec<usize> = out.trace.records.iter().map(|r| r.t_size).collect();
    assert_eq!(sizes, vec![2, 5, 8, 8, 8, 8]);
    assert_eq!(out.support.len(), 8);
}
