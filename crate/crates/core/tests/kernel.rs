use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use sgcp::kernel::{
    check_exponential_moment, covariance_matrix, kernel_eval, sample_gp, spectral_covariance_adaptive,
    spectral_covariance_quadrature, ExponentialMoment,
};
use sgcp::seed::rng_from_seed;
use sgcp::stats::{mean, variance};
use sgcp::{Error, Grid, KernelSpec, SpectralDensity};

const E_HALF_ONE_PLUS_ERF: f64 = 2.774_285_957_670_009_55;

#[test]
fn lag_sweep_matches_closed_form_both_routes() {
    for ell in [0.5, 1.0, 2.0, 4.0] {
        let sp = KernelSpec::spectral(SpectralDensity::SQUARED_EXPONENTIAL, ell).unwrap();
        for k in 0..=20 {
            let h = k as f64 / 20.0;
            let want = (-ell * ell * h * h).exp();
            assert!((spectral_covariance_quadrature(&sp, &[h]).unwrap() - want).abs() < 1e-6);
            assert!((spectral_covariance_adaptive(&sp, &[h]).unwrap() - want).abs() < 1e-6);
            let d2 = [h * 0.28, h * 0.96];
            assert!((spectral_covariance_quadrature(&sp, &d2).unwrap() - want).abs() < 1e-6);
        }
    }
    let sp = KernelSpec::spectral(SpectralDensity::SQUARED_EXPONENTIAL, 1.5).unwrap();
    let v = spectral_covariance_adaptive(&sp, &[0.3, 0.4]).unwrap();
    assert!((v - (-2.25f64 * 0.25).exp()).abs() < 1e-6);
}

#[test]
fn exponential_moment_oracles() {
    let unit = KernelSpec::spectral(SpectralDensity::Gaussian { variance: 1.0, mass: 1.0 }, 1.0).unwrap();
    match check_exponential_moment(&unit, 1) {
        ExponentialMoment::Finite(v) => assert!((v - E_HALF_ONE_PLUS_ERF).abs() < 1e-9, "{v}"),
        ExponentialMoment::Diverged => panic!("gaussian moment diverged"),
    }
    let se = KernelSpec::spectral(SpectralDensity::SQUARED_EXPONENTIAL, 1.0).unwrap();
    match check_exponential_moment(&se, 2) {
        ExponentialMoment::Finite(v) => assert!((v - 9.878_186_033_256_132).abs() < 1e-8, "{v}"),
        ExponentialMoment::Diverged => panic!("gaussian moment diverged"),
    }
    let cauchy = KernelSpec::spectral(SpectralDensity::Cauchy { scale: 1.0, mass: 1.0 }, 1.0).unwrap();
    assert_eq!(check_exponential_moment(&cauchy, 1), ExponentialMoment::Diverged);
    assert_eq!(check_exponential_moment(&cauchy, 2), ExponentialMoment::Diverged);
}

#[test]
fn gaussian_density_decreases_under_dilation() {
    let d = SpectralDensity::SQUARED_EXPONENTIAL;
    for dim in [1, 2, 3] {
        for r in [0.1, 0.7, 2.0] {
            let mut last = f64::INFINITY;
            for a in [0.5, 1.0, 1.5, 2.0, 3.0] {
                let v = d.density(a * r, dim);
                assert!(v < last);
                last = v;
            }
        }
    }
}

#[test]
fn gp_draws_match_moments() {
    let grid = Grid::new(1, 11).unwrap();
    let spec = KernelSpec::squared_exponential(2.0).unwrap();
    let mut rng = rng_from_seed(21);
    let reps = 10_000;
    let draws: Vec<Vec<f64>> = (0..reps).map(|_| sample_gp(&spec, &grid, &mut rng).unwrap().values).collect();
    let se = (1.0 / reps as f64).sqrt();
    for node in [0, 5, 10] {
        let col: Vec<f64> = draws.iter().map(|d| d[node]).collect();
        assert!(mean(&col).abs() < 3.0 * se);
        // Var of the sample variance of a standard normal is 2/(n-1).
        assert!((variance(&col) - 1.0).abs() < 3.0 * (2.0 / reps as f64).sqrt());
    }
    for (a, b) in [(0usize, 1usize), (2, 6)] {
        let k = kernel_eval(&spec, &grid.node(a), &grid.node(b)).unwrap();
        let prods: Vec<f64> = draws.iter().map(|d| d[a] * d[b]).collect();
        let se = (variance(&prods) / reps as f64).sqrt();
        assert!((mean(&prods) - k).abs() < 3.0 * se, "lag ({a},{b})");
    }
}

#[test]
fn gp_sampling_is_deterministic_and_guarded() {
    let grid = Grid::new(2, 8).unwrap();
    let spec = KernelSpec::squared_exponential(1.0).unwrap();
    let a = sample_gp(&spec, &grid, &mut rng_from_seed(3)).unwrap();
    let b = sample_gp(&spec, &grid, &mut rng_from_seed(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.values.len(), 64);
    let big = Grid::new(2, 65).unwrap();
    assert!(matches!(sample_gp(&spec, &big, &mut rng_from_seed(3)), Err(Error::TooManyNodes { .. })));
}

#[test]
fn covariance_is_strictly_decreasing_in_ell() {
    for h in [0.05, 0.3, 1.0] {
        let mut last = 1.0;
        for ell in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let k = kernel_eval(&KernelSpec::squared_exponential(ell).unwrap(), &[0.0], &[h]).unwrap();
            assert!(k < last);
            last = k;
        }
    }
}

#[test]
fn grid_covariance_is_positive_semidefinite() {
    for (dim, res) in [(1, 64), (2, 16)] {
        let cov = covariance_matrix(&KernelSpec::squared_exponential(1.0).unwrap(), &Grid::new(dim, res).unwrap()).unwrap();
        assert!(cov.symmetric_eigenvalues().min() >= -1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stationarity(s in prop::collection::vec(0.0f64..0.5, 2), t in prop::collection::vec(0.0f64..0.5, 2),
                    shift in prop::collection::vec(0.0f64..0.5, 2), ell in 0.1f64..5.0) {
        let spec = KernelSpec::squared_exponential(ell).unwrap();
        let s2: Vec<f64> = s.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let t2: Vec<f64> = t.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let k1 = kernel_eval(&spec, &s, &t).unwrap();
        let k2 = kernel_eval(&spec, &s2, &t2).unwrap();
        prop_assert!((k1 - k2).abs() < 1e-14);
        prop_assert_eq!(k1, kernel_eval(&spec, &t, &s).unwrap());
        prop_assert!(k1 > 0.0 && k1 <= 1.0);
    }

    #[test]
    fn gram_matrix_is_positive_semidefinite(seed in any::<u64>(), n in 2usize..=50, ell in 0.2f64..6.0) {
        let spec = KernelSpec::squared_exponential(ell).unwrap();
        let mut rng = rng_from_seed(seed);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        let gram = DMatrix::from_fn(n, n, |i, j| kernel_eval(&spec, &pts[i], &pts[j]).unwrap());
        prop_assert!(gram.symmetric_eigenvalues().min() >= -1e-8);
    }
}
