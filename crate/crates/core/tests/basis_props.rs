use fusso::basis::{
    design_matrix, eval_basis, grid_points, project, reconstruct, sobolev_weight, BasisIndex,
    CoefficientBlock, GridSample,
};
use fusso::FussoError;
use proptest::prelude::*;

/// Oracle: explicit double loop over grid points and basis indices with the
/// basis written out from its closed form.
fn oracle_phi(m: usize, x: f64) -> f64 {
    use std::f64::consts::PI;
    match m {
        1 => 1.0,
        _ if m.is_multiple_of(2) => 2f64.sqrt() * (2.0 * PI * (m / 2) as f64 * x).cos(),
        _ => 2f64.sqrt() * (2.0 * PI * ((m - 1) / 2) as f64 * x).sin(),
    }
}

#[test]
fn discrete_orthonormality() {
    for n in [4usize, 16, 64, 101] {
        for l in 1..n {
            for m in 1..n {
                let s: f64 = (1..=n)
                    .map(|k| {
                        let x = k as f64 / n as f64;
                        eval_basis(l, x).unwrap() * eval_basis(m, x).unwrap()
                    })
                    .sum::<f64>()
                    / n as f64;
                let expect = if l == m { 1.0 } else { 0.0 };
                assert!((s - expect).abs() <= 1e-10, "n={n} l={l} m={m}: {s}");
            }
        }
    }
}

#[test]
fn design_gram_is_identity_for_every_full_truncation() {
    for n in [4usize, 16, 64, 101] {
        let phi = design_matrix(n, n - 1).unwrap();
        let gram = phi.transpose() * &phi / n as f64;
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((gram[(a, b)] - expect).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn design_matrix_examples() {
    let ones = design_matrix(4, 1).unwrap();
    assert!(ones.iter().all(|&v| v == 1.0));
    let d = design_matrix(8, 3).unwrap();
    assert!((d[(7, 1)] - 2f64.sqrt()).abs() <= 1e-15);
    assert!(matches!(
        design_matrix(8, 8),
        Err(FussoError::TruncationTooLarge { m: 8, n: 8 })
    ));
}

#[test]
fn projection_matches_double_loop_oracle() {
    for (n, m) in [(4usize, 2usize), (7, 6), (25, 9)] {
        let y: Vec<f64> = (1..=n)
            .map(|k| (k as f64).sqrt() - 0.3 * k as f64)
            .collect();
        let got = project(&GridSample::new(y.clone()).unwrap(), m).unwrap();
        for mm in 1..=m {
            let mut s = 0.0;
            for k in 1..=n {
                s += oracle_phi(mm, k as f64 / n as f64) * y[k - 1];
            }
            assert!((got.0[mm - 1] - s / n as f64).abs() <= 1e-13);
        }
    }
}

#[test]
fn noiseless_basis_sample_projects_to_unit_vector() {
    let n = 12;
    for m in 1..n {
        let y = GridSample::from_fn(n, |x| BasisIndex::new(m).unwrap().value(x)).unwrap();
        let got = project(&y, n - 1).unwrap();
        for (k, v) in got.0.iter().enumerate() {
            let expect = if k + 1 == m { 1.0 } else { 0.0 };
            assert!((v - expect).abs() <= 1e-12);
        }
    }
}

#[test]
fn sobolev_weight_examples() {
    assert_eq!(sobolev_weight(1, 2.0), 1.0);
    assert_eq!(sobolev_weight(2, 2.0), 4.0);
    assert_eq!(sobolev_weight(3, 2.0), 4.0);
    assert_eq!(sobolev_weight(5, 1.0), 4.0);
}

#[test]
fn smooth_function_error_shrinks_with_truncation() {
    let f = |x: f64| x * (1.0 - x);
    let n = 200;
    let sample = GridSample::from_fn(n, f).unwrap();
    let fine: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
    let sup_err = |m: usize| {
        let rec = reconstruct(&project(&sample, m).unwrap(), &fine).unwrap();
        fine.iter()
            .zip(&rec)
            .map(|(x, r)| (f(*x) - r).abs())
            .fold(0.0, f64::max)
    };
    let (e5, e25) = (sup_err(5), sup_err(25));
    assert!(e25 < e5, "{e25} !< {e5}");
    assert!(e25 < 0.01);
}

#[test]
fn reconstruct_rejects_points_outside_unit_interval() {
    let b = CoefficientBlock(vec![1.0, 0.5]);
    assert!(matches!(
        reconstruct(&b, &[0.5, 1.2]),
        Err(FussoError::GridOutOfRange(_))
    ));
    assert_eq!(
        reconstruct(&CoefficientBlock::unit(1, 3), &[0.1, 0.9]).unwrap(),
        vec![1.0, 1.0]
    );
}

#[test]
fn grid_sample_validation() {
    assert!(GridSample::new(vec![1.0]).is_err());
    assert!(GridSample::new(vec![1.0, f64::NAN]).is_err());
    assert!(eval_basis(0, 0.5).is_err());
    assert!(eval_basis(1, -0.1).is_err());
}

fn sample_and_coeffs() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (3usize..40).prop_flat_map(|n| (Just(n), prop::collection::vec(-10.0f64..10.0, n)))
}

proptest! {
    #[test]
    fn eval_is_bounded(m in 1usize..200, x in 0.0f64..=1.0) {
        prop_assert!(eval_basis(m, x).unwrap().abs() <= 2f64.sqrt() + 1e-15);
    }

    #[test]
    fn projection_is_linear(
        (n, y1) in sample_and_coeffs(),
        seed in prop::collection::vec(-10.0f64..10.0, 40),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
    ) {
        let y2 = &seed[..n];
        let m = n - 1;
        let combo: Vec<f64> = y1.iter().zip(y2).map(|(u, v)| a * u + b * v).collect();
        let lhs = project(&GridSample::new(combo).unwrap(), m).unwrap();
        let p1 = project(&GridSample::new(y1.clone()).unwrap(), m).unwrap();
        let p2 = project(&GridSample::new(y2.to_vec()).unwrap(), m).unwrap();
        for k in 0..m {
            prop_assert!((lhs.0[k] - (a * p1.0[k] + b * p2.0[k])).abs() <= 1e-12);
        }
    }

    #[test]
    fn noiseless_round_trip(
        (n, raw) in sample_and_coeffs(),
        frac in 0.0f64..1.0,
    ) {
        let m = 1 + ((n - 2) as f64 * frac) as usize;
        let block = CoefficientBlock(raw[..m].to_vec());
        let grid = grid_points(n);
        let y = reconstruct(&block, &grid).unwrap();
        let back = reconstruct(&project(&GridSample::new(y.clone()).unwrap(), m).unwrap(), &grid).unwrap();
        for (u, v) in y.iter().zip(&back) {
            prop_assert!((u - v).abs() <= 1e-10);
        }
    }

    #[test]
    fn parseval_on_grid((n, y) in sample_and_coeffs()) {
        let coef = project(&GridSample::new(y).unwrap(), n - 1).unwrap();
        let rec = reconstruct(&coef, &grid_points(n)).unwrap();
        let lhs = rec.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let rhs = coef.norm().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }
}
