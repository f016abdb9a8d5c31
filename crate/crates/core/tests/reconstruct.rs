use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sensorplace::basis::{fit_custom, fit_svd, SvdOptions};
use sensorplace::optimizers::qr_select;
use sensorplace::reconstruct::{build_ls, build_rls, predict, score_rmse};
use sensorplace::uq::{two_pt_energy_landscape, uncertainty_heatmap};
use sensorplace::{BasisModes, GaussianPrior, Matrix, SensorSelection, SnapshotMatrix};
use sensorplace_testkit as tk;

fn basis(n: usize, r: usize, seed: u64) -> BasisModes {
    fit_custom(Matrix::from_rows(&tk::gaussian(n, r, seed)).unwrap()).unwrap()
}

fn sel(idx: &[usize], n: usize) -> SensorSelection {
    SensorSelection::new(idx.to_vec(), n).unwrap()
}

#[test]
fn ls_left_inverts_oversampled_rows() {
    let b = basis(40, 5, 3);
    let gamma = qr_select(&b, 5).unwrap();
    let mut idx = gamma.indices().to_vec();
    idx.extend((0..4).filter(|i| !gamma.indices().contains(i)));
    let extra = sel(&idx, 40);
    let rm = build_ls(&b, &extra).unwrap();
    let phi = b.modes().select_rows(extra.indices());
    assert!(rm.a_matrix().matmul(&phi).sub(&Matrix::identity(5)).max_abs() < 1e-8);
}

#[test]
fn exact_recovery_of_in_span_states() {
    let b = basis(30, 4, 9);
    let gamma = qr_select(&b, 4).unwrap();
    let rm = build_ls(&b, &gamma).unwrap();
    let a = [0.3, -1.2, 2.0, 0.7];
    let x = b.modes().matvec(&a);
    let y: Vec<f64> = gamma.indices().iter().map(|&i| x[i]).collect();
    let est = predict(&rm, &b, &y).unwrap();
    for (u, v) in est.coefficients.iter().zip(a) {
        assert!((u - v).abs() < 1e-8);
    }
    let again = b.modes().matvec(&est.coefficients);
    for (u, v) in est.state.iter().zip(&again) {
        assert!((u - v).abs() < 1e-12);
    }
}

#[test]
fn rls_approaches_ls_for_vague_prior() {
    for seed in 0..10 {
        let b = basis(25, 5, seed);
        let gamma = qr_select(&b, 5).unwrap();
        let ls = build_ls(&b, &gamma).unwrap();
        let rls = build_rls(&b, &gamma, &GaussianPrior::flat(5, 1e8, 1.0).unwrap()).unwrap();
        let rel = rls.a_matrix().sub(ls.a_matrix()).frobenius_norm() / ls.a_matrix().frobenius_norm();
        assert!(rel <= 1e-4, "seed {seed}: {rel}");
    }
}

#[test]
fn rmse_matches_naive_loop() {
    let b = basis(20, 3, 5);
    let gamma = qr_select(&b, 3).unwrap();
    let rm = build_rls(&b, &gamma, &GaussianPrior::flat(3, 2.0, 0.3).unwrap()).unwrap();
    let raw = tk::gaussian(7, 20, 77);
    let test = SnapshotMatrix::new(Matrix::from_rows(&raw).unwrap()).unwrap();
    let estimates: tk::Rows = raw
        .iter()
        .map(|x| {
            let y: Vec<f64> = gamma.indices().iter().map(|&i| x[i]).collect();
            predict(&rm, &b, &y).unwrap().state
        })
        .collect();
    let ours = score_rmse(&b, &rm, &test).unwrap();
    assert!((ours - tk::rmse_naive(&raw, &estimates)).abs() < 1e-12);
}

#[test]
fn in_span_test_scores_zero() {
    let b = basis(20, 3, 6);
    let gamma = qr_select(&b, 3).unwrap();
    let rm = build_ls(&b, &gamma).unwrap();
    let coeffs = Matrix::from_rows(&tk::gaussian(5, 3, 1)).unwrap();
    let test = SnapshotMatrix::new(coeffs.matmul(&b.modes().transpose())).unwrap();
    assert!(score_rmse(&b, &rm, &test).unwrap() <= 1e-8);
}

#[test]
fn centered_basis_restores_the_mean() {
    let raw: tk::Rows = tk::gaussian(12, 2, 3)
        .into_iter()
        .map(|c| {
            (0..8)
                .map(|j| 5.0 + c[0] * (j as f64).sin() + c[1] * (j as f64 * 0.5).cos())
                .collect()
        })
        .collect();
    let x = SnapshotMatrix::new(Matrix::from_rows(&raw).unwrap()).unwrap();
    let b = fit_svd(
        &x,
        2,
        &SvdOptions {
            center: true,
            randomized_seed: None,
        },
    )
    .unwrap();
    let gamma = qr_select(&b, 2).unwrap();
    let rm = build_ls(&b, &gamma).unwrap();
    assert!(score_rmse(&b, &rm, &x).unwrap() < 1e-8);
}

#[test]
fn monte_carlo_matches_analytic_sigma() {
    let b = basis(32, 4, 8);
    let gamma = qr_select(&b, 4).unwrap();
    let mut idx = gamma.indices().to_vec();
    idx.extend([30, 31].into_iter().filter(|i| !gamma.indices().contains(i)));
    let extra = sel(&idx, 32);
    let eta = 0.2;
    for rm in [
        build_ls(&b, &extra).unwrap(),
        build_rls(&b, &extra, &GaussianPrior::new(vec![2.0, 1.0, 0.5, 0.25], eta).unwrap()).unwrap(),
    ] {
        let sigma = uncertainty_heatmap(&b, &rm, eta).unwrap().sigma;
        let draws = 20_000;
        let normal = Normal::new(0.0, eta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut sum2 = vec![0.0; 32];
        for _ in 0..draws {
            let y: Vec<f64> = (0..extra.len()).map(|_| normal.sample(&mut rng)).collect();
            let est = predict(&rm, &b, &y).unwrap();
            sum2.iter_mut().zip(&est.state).for_each(|(s, v)| *s += v * v);
        }
        for (s2, s) in sum2.iter().zip(&sigma) {
            let empirical = (s2 / draws as f64).sqrt();
            assert!((empirical - s).abs() <= 0.05 * s, "{empirical} vs {s}");
        }
    }
}

#[test]
fn two_point_landscape_is_additive() {
    let b = basis(30, 5, 2);
    let prior = GaussianPrior::flat(5, 1.5, 0.8).unwrap();
    let both = two_pt_energy_landscape(&b, &prior, &sel(&[4, 11], 30)).unwrap().values;
    let a = two_pt_energy_landscape(&b, &prior, &sel(&[4], 30)).unwrap().values;
    let c = two_pt_energy_landscape(&b, &prior, &sel(&[11], 30)).unwrap().values;
    for i in 0..30 {
        assert!((both[i] - a[i] - c[i]).abs() < 1e-12);
    }
    assert_eq!(a[4], 0.0);
}

#[test]
fn orthogonal_reference_gives_flat_landscape() {
    let b = fit_custom(Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 2.0], [0.0, -1.0]]).unwrap()).unwrap();
    let prior = GaussianPrior::flat(2, 1.0, 1.0).unwrap();
    let l = two_pt_energy_landscape(&b, &prior, &sel(&[0], 4)).unwrap().values;
    assert!(l.iter().all(|&v| v == 0.0));
}

#[test]
fn sigma_scales_with_noise() {
    let b = basis(20, 3, 1);
    let rm = build_ls(&b, &qr_select(&b, 3).unwrap()).unwrap();
    let s1 = uncertainty_heatmap(&b, &rm, 0.1).unwrap().sigma;
    let s2 = uncertainty_heatmap(&b, &rm, 0.2).unwrap().sigma;
    let tiny = uncertainty_heatmap(&b, &rm, 1e-300).unwrap().sigma;
    for i in 0..20 {
        assert!((s2[i] - 2.0 * s1[i]).abs() <= 1e-15 * s2[i].max(1.0));
        assert!(tiny[i] < 1e-290);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn predict_is_linear(seed in 0u64..100_000, alpha in -3.0f64..3.0) {
        let b = basis(20, 4, seed);
        let gamma = qr_select(&b, 6).unwrap();
        let rm = build_rls(&b, &gamma, &GaussianPrior::flat(4, 1.0, 0.5).unwrap()).unwrap();
        let y1 = &tk::gaussian(1, 6, seed + 1)[0];
        let y2 = &tk::gaussian(1, 6, seed + 2)[0];
        let mix: Vec<f64> = y1.iter().zip(y2).map(|(a, b)| alpha * a + b).collect();
        let (p1, p2, pm) = (
            predict(&rm, &b, y1).unwrap().state,
            predict(&rm, &b, y2).unwrap().state,
            predict(&rm, &b, &mix).unwrap().state,
        );
        for i in 0..20 {
            prop_assert!((pm[i] - (alpha * p1[i] + p2[i])).abs() < 1e-12 * (1.0 + pm[i].abs()) * 10.0);
        }
    }

    #[test]
    fn rls_solves_its_system(seed in 0u64..100_000, p in 0usize..9) {
        let b = basis(20, 5, seed);
        // stride 7 is coprime to 20, so these are distinct
        let idx: Vec<usize> = (0..p).map(|k| (k * 7 + seed as usize) % 20).collect();
        let gamma = sel(&idx, 20);
        let s = [3.0, 2.0, 1.0, 0.5, 0.1];
        let prior = GaussianPrior::new(s.to_vec(), 0.3).unwrap();
        let rm = build_rls(&b, &gamma, &prior).unwrap();
        let phi = b.modes().select_rows(&idx);
        let inv_var: Vec<f64> = s.iter().map(|v| 1.0 / (v * v)).collect();
        let lhs = phi.t_matmul(&phi).scaled(1.0 / 0.09).add(&Matrix::from_diag(&inv_var));
        let resid = lhs.matmul(rm.a_matrix()).sub(&phi.transpose().scaled(1.0 / 0.09));
        prop_assert!(resid.max_abs() < 1e-9);
        let y = vec![1.0; idx.len()];
        prop_assert!(predict(&rm, &b, &y).unwrap().state.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rls_shrinks_isotropic(seed in 0u64..100_000, scale in 0.1f64..10.0) {
        let b = basis(20, 4, seed);
        let gamma = qr_select(&b, 4).unwrap();
        let ls = build_ls(&b, &gamma).unwrap();
        let rls = build_rls(&b, &gamma, &GaussianPrior::flat(4, scale, 1.0).unwrap()).unwrap();
        let y = &tk::gaussian(1, 4, seed + 5)[0];
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a_ls = predict(&ls, &b, y).unwrap().coefficients;
        let a_rls = predict(&rls, &b, y).unwrap().coefficients;
        prop_assert!(norm(&a_rls) <= norm(&a_ls) + 1e-10);
    }
}
