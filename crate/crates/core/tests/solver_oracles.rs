mod common;

use common::{gaussian_vec, random_design, random_problem, rel_diff, rng, Oracle};
use fusso::solver::{
    fit, fit_path, group_soft_threshold, kkt_residual, lambda_max, GroupProblem, LambdaGrid,
    SolverOptions,
};

fn tight() -> SolverOptions {
    SolverOptions {
        tol: 1e-12,
        rel_change_tol: 0.0,
        max_iter: 200_000,
        ..Default::default()
    }
}

#[test]
fn prox_matches_one_dimensional_search() {
    // The minimizer of ½‖x − v‖² + t‖x‖ lies on the ray through v; search
    // the scalar along it by golden section and compare.
    let mut r = rng(11);
    for case in 0..50 {
        let len = 1 + case % 6;
        let v = gaussian_vec(&mut r, len);
        let nv = v.iter().map(|q| q * q).sum::<f64>().sqrt();
        let t = nv * [0.0, 0.3, 0.9, 1.0, 1.7][case % 5] + 1e-3 * (case as f64);
        let f = |s: f64| 0.5 * (s - nv) * (s - nv) + t * s;
        let (mut lo, mut hi) = (0.0f64, nv);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let s = if f(0.0) <= f((lo + hi) / 2.0) {
            0.0
        } else {
            (lo + hi) / 2.0
        };
        let expect: Vec<f64> = v.iter().map(|q| q * s / nv).collect();
        let got = group_soft_threshold(&v, t);
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-6, "case {case}: {got:?} vs {expect:?}");
        }
        if s == 0.0 {
            assert!(
                got.iter().all(|&q| q == 0.0),
                "case {case}: zero must be exact"
            );
        }
    }
}

#[test]
fn zero_solution_at_and_above_lambda_max() {
    for seed in 0..100u64 {
        let rows = 5 + (seed as usize % 20);
        let prob = random_problem(
            1000 + seed,
            rows,
            2 + seed as usize % 7,
            1 + seed as usize % 4,
        );
        let lmax = lambda_max(&prob);
        for scale in [1.0, 1.5, 10.0] {
            let f = fit(&prob, lmax * scale, None, &SolverOptions::default()).unwrap();
            assert!(
                f.beta.iter().all(|&b| b == 0.0),
                "seed {seed} scale {scale}"
            );
            assert!(f.support.is_empty());
            assert!(kkt_residual(&prob, &f.beta, lmax * scale) <= 1e-12);
        }
    }
}

#[test]
fn every_returned_fit_meets_kkt_tolerance() {
    for seed in 0..20u64 {
        let prob = random_problem(2000 + seed, 30, 12, 3);
        let path = fit_path(
            &prob,
            &LambdaGrid::Geometric {
                count: 25,
                ratio: 1e-3,
            },
            &SolverOptions::default(),
        )
        .unwrap();
        for f in &path.fits {
            assert!(f.converged, "seed {seed} λ {}", f.lambda);
            assert!(
                f.kkt_residual <= 1e-6,
                "seed {seed} λ {}: {}",
                f.lambda,
                f.kkt_residual
            );
            assert!(kkt_residual(&prob, &f.beta, f.lambda) <= 1e-6);
        }
    }
}

#[test]
fn objective_never_increases_across_sweeps() {
    for seed in 0..20u64 {
        let prob = random_problem(3000 + seed, 25, 10, 4);
        let lmax = lambda_max(&prob);
        let opts = SolverOptions {
            trace_objective: true,
            ..Default::default()
        };
        for frac in [0.5, 0.1, 0.01] {
            let f = fit(&prob, lmax * frac, None, &opts).unwrap();
            assert!(f.objective_trace.len() >= 2);
            for w in f.objective_trace.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-12 * w[0].abs(),
                    "seed {seed}: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }
}

#[test]
fn solver_matches_accelerated_proximal_gradient_oracle() {
    // 8 rows, 12 columns: 4 blocks of width 3.
    for seed in 0..10u64 {
        let mut r = rng(4000 + seed);
        let d = random_design(&mut r, 8, 4, 3);
        let y = gaussian_vec(&mut r, 8);
        let oracle = Oracle::new(&d, &y);
        let prob = GroupProblem::new(d, y).unwrap();
        let lmax = lambda_max(&prob);
        for frac in [0.5, 0.2, 0.05] {
            let lambda = lmax * frac;
            let ours = fit(&prob, lambda, None, &tight()).unwrap();
            let reference = oracle.fista(lambda, 200_000);
            let a = oracle.objective(&ours.beta, lambda);
            let b = oracle.objective(&reference, lambda);
            assert!(
                ((a - b) / b).abs() <= 1e-6,
                "seed {seed} frac {frac}: {a} vs {b}"
            );
            assert!((prob.objective(&ours.beta, lambda) - a).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}

#[test]
fn scaling_equivariance() {
    for seed in 0..10u64 {
        let prob = random_problem(5000 + seed, 40, 6, 3);
        let lambda = 0.2 * lambda_max(&prob);
        let base = fit(&prob, lambda, None, &tight()).unwrap();
        for c in [0.01, 3.0, 250.0] {
            let y: Vec<f64> = prob.response().iter().map(|v| v * c).collect();
            let scaled = GroupProblem::new((**prob.design()).clone(), y).unwrap();
            let f = fit(&scaled, lambda * c, None, &tight()).unwrap();
            let expect: Vec<f64> = base.beta.iter().map(|v| v * c).collect();
            assert!(rel_diff(&f.beta, &expect) <= 1e-8, "seed {seed} c {c}");
            assert_eq!(f.support, base.support);
        }
    }
}

#[test]
fn block_and_row_permutation_equivariance() {
    for seed in 0..10u64 {
        let prob = random_problem(6000 + seed, 40, 6, 3);
        let d = prob.design();
        let lambda = 0.15 * lambda_max(&prob);
        let base = fit(&prob, lambda, None, &tight()).unwrap();

        let order = [3usize, 0, 5, 1, 4, 2];
        let permuted =
            GroupProblem::new(d.select_blocks(&order), prob.response().to_vec()).unwrap();
        let f = fit(&permuted, lambda, None, &tight()).unwrap();
        let expect: Vec<f64> = order.iter().flat_map(|&j| base.block(j).to_vec()).collect();
        assert!(rel_diff(&f.beta, &expect) <= 1e-8, "blocks, seed {seed}");

        let rows: Vec<usize> = (0..40).rev().collect();
        let y: Vec<f64> = rows.iter().map(|&i| prob.response()[i]).collect();
        let flipped = GroupProblem::new(d.select_rows(&rows), y).unwrap();
        let f = fit(&flipped, lambda, None, &tight()).unwrap();
        assert!(rel_diff(&f.beta, &base.beta) <= 1e-8, "rows, seed {seed}");
    }
}

#[test]
fn smooth_gradient_matches_finite_differences() {
    for seed in 0..10u64 {
        let prob = random_problem(7000 + seed, 15, 5, 3);
        let mut r = rng(7100 + seed);
        let beta = gaussian_vec(&mut r, prob.n_coefs());
        let g = prob.smooth_gradient(&beta);
        let h = 1e-6;
        for k in 0..beta.len() {
            let mut up = beta.clone();
            let mut dn = beta.clone();
            up[k] += h;
            dn[k] -= h;
            let fd = (prob.smooth_loss(&up) - prob.smooth_loss(&dn)) / (2.0 * h);
            assert!(
                (fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1.0),
                "seed {seed} k {k}: {fd} vs {}",
                g[k]
            );
        }
    }
}

#[test]
fn lambda_max_matches_oracle_gradient() {
    for seed in 0..20u64 {
        let prob = random_problem(8000 + seed, 12, 7, 2);
        let oracle = Oracle::new(prob.design(), prob.response());
        let g = oracle.grad(&vec![0.0; prob.n_coefs()]);
        let expect = g
            .chunks(2)
            .map(|b| b.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        assert!((lambda_max(&prob) - expect).abs() <= 1e-12 * expect);
    }
}

#[test]
fn ols_limit_has_tiny_kkt_residual() {
    // Full column rank, λ = 0: the solver must land on least squares.
    let prob = random_problem(9000, 60, 4, 3);
    let f = fit(&prob, 0.0, None, &tight()).unwrap();
    assert!(kkt_residual(&prob, &f.beta, 0.0) <= 1e-10);
}

#[test]
fn warm_start_does_not_change_solution() {
    let prob = random_problem(9100, 50, 8, 3);
    let lambda = 0.1 * lambda_max(&prob);
    let cold = fit(&prob, lambda, None, &tight()).unwrap();
    let init = vec![0.3; prob.n_coefs()];
    let warm = fit(&prob, lambda, Some(&init), &tight()).unwrap();
    assert!(rel_diff(&warm.beta, &cold.beta) <= 1e-8);
    assert_eq!(warm.support, cold.support);
}

#[test]
fn perturbing_a_converged_fit_increases_kkt_residual() {
    for seed in 0..10u64 {
        let prob = random_problem(9200 + seed, 30, 6, 3);
        let lambda = 0.2 * lambda_max(&prob);
        let f = fit(&prob, lambda, None, &tight()).unwrap();
        let base = kkt_residual(&prob, &f.beta, lambda);
        let mut r = rng(9300 + seed);
        let dir = gaussian_vec(&mut r, prob.n_coefs());
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let moved: Vec<f64> = f
            .beta
            .iter()
            .zip(&dir)
            .map(|(b, d)| b + 1e-3 * d / norm)
            .collect();
        assert!(kkt_residual(&prob, &moved, lambda) > base, "seed {seed}");
    }
}
