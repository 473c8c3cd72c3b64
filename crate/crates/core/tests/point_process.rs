use proptest::prelude::*;
use sgcp::point_process::{integrate_field, log_likelihood, simulate_thinning};
use sgcp::prior::intensity_from_latent;
use sgcp::seed::rng_from_seed;
use sgcp::stats::{correlation, mean, poisson_chi_square, variance};
use sgcp::{Error, Grid, IntensityField, LinkFunction, PointPattern};

fn line(res: usize) -> Grid {
    Grid::new(1, res).unwrap()
}

fn pattern(xs: &[f64]) -> PointPattern {
    PointPattern::new(1, xs.iter().map(|&x| vec![x]).collect()).unwrap()
}

#[test]
fn zero_intensity_never_produces_points() {
    let field = IntensityField::constant(line(16), 0.0).unwrap();
    let mut rng = rng_from_seed(1);
    for _ in 0..200 {
        assert!(simulate_thinning(1.0, &field, &mut rng).unwrap().is_empty());
    }
}

#[test]
fn constant_five_has_mean_count_five() {
    let field = IntensityField::constant(line(16), 5.0).unwrap();
    let mut rng = rng_from_seed(2);
    let counts: Vec<f64> = (0..10_000).map(|_| simulate_thinning(5.0, &field, &mut rng).unwrap().len() as f64).collect();
    let se = (5.0f64 / counts.len() as f64).sqrt();
    assert!((mean(&counts) - 5.0).abs() < 3.0 * se, "mean {}", mean(&counts));
}

#[test]
fn half_ceiling_field_has_mean_count_four() {
    let grid = line(32);
    let field = intensity_from_latent(LinkFunction::Logistic, 8.0, &vec![0.0; 32], grid).unwrap();
    assert!(field.values().iter().all(|&v| v == 4.0));
    let mut rng = rng_from_seed(3);
    let counts: Vec<f64> = (0..10_000).map(|_| simulate_thinning(8.0, &field, &mut rng).unwrap().len() as f64).collect();
    assert!((mean(&counts) - 4.0).abs() < 3.0 * (4.0f64 / 1e4).sqrt());
}

#[test]
fn thinning_bound_and_field_validity_are_enforced() {
    let field = IntensityField::from_fn(line(8), |s| 1.0 + s[0]).unwrap();
    let err = simulate_thinning(1.5, &field, &mut rng_from_seed(0)).unwrap_err();
    assert!(matches!(err, Error::ThinningBound { .. }));
    assert!(IntensityField::new(line(3), vec![1.0, -0.1, 1.0]).is_err());
    assert!(IntensityField::new(line(3), vec![1.0, 1.0]).is_err());
}

#[test]
fn disjoint_boxes_are_poisson_and_uncorrelated() {
    // Bilinear field, so the interpolant is the field itself.
    let grid = Grid::new(2, 9).unwrap();
    let field = IntensityField::from_fn(grid, |s| 1.0 + 2.0 * s[0] + s[1]).unwrap();
    let (mass_a, mass_b) = (0.5 + 0.25 + 0.25, 0.5 + 0.75 + 0.25);
    let mut rng = rng_from_seed(9);
    let reps = 10_000;
    let (mut a, mut b) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
    for _ in 0..reps {
        let p = simulate_thinning(4.0, &field, &mut rng).unwrap();
        a.push(p.count_in_box(&[0.0, 0.0], &[0.5, 1.0]));
        b.push(p.count_in_box(&[0.5, 0.0], &[1.0, 1.0]));
    }
    assert!(poisson_chi_square(&a, mass_a).unwrap().p_value > 0.01);
    assert!(poisson_chi_square(&b, mass_b).unwrap().p_value > 0.01);
    let fa: Vec<f64> = a.iter().map(|&c| c as f64).collect();
    let fb: Vec<f64> = b.iter().map(|&c| c as f64).collect();
    assert!(correlation(&fa, &fb).abs() < 3.0 / (reps as f64).sqrt());
    assert!((variance(&fa) / mass_a - 1.0).abs() < 0.1);
}

#[test]
fn simulation_is_deterministic_given_seed() {
    let field = IntensityField::from_fn(line(64), |s| 2.0 + (std::f64::consts::TAU * s[0]).sin()).unwrap();
    let a = simulate_thinning(3.0, &field, &mut rng_from_seed(9)).unwrap();
    let b = simulate_thinning(3.0, &field, &mut rng_from_seed(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn integration_examples() {
    assert_eq!(integrate_field(&IntensityField::constant(line(17), 2.0).unwrap()), 2.0);
    assert_eq!(integrate_field(&IntensityField::from_fn(line(11), |s| s[0]).unwrap()), 0.5);
    let sine = IntensityField::from_fn(line(256), |s| 2.0 + (std::f64::consts::TAU * s[0]).sin()).unwrap();
    assert!((integrate_field(&sine) - 2.0).abs() < 1e-4);
    let plane = IntensityField::from_fn(Grid::new(2, 5).unwrap(), |s| s[0] + 3.0 * s[1]).unwrap();
    assert!((integrate_field(&plane) - 2.0).abs() < 1e-15);
}

#[test]
fn likelihood_examples() {
    let two = IntensityField::constant(line(8), 2.0).unwrap();
    let p = pattern(&[0.1, 0.5, 0.9]);
    let single = log_likelihood(std::slice::from_ref(&p), &two).unwrap();
    assert!((single - (3.0 * 2f64.ln() - 1.0)).abs() < 1e-14);
    assert_eq!(log_likelihood(&[p.clone(), p.clone()], &two).unwrap(), 2.0 * single);

    let one = IntensityField::constant(line(8), 1.0).unwrap();
    assert_eq!(log_likelihood(&[p.clone(), pattern(&[0.3])], &one).unwrap(), 0.0);

    let hole = IntensityField::from_fn(line(3), |s| if s[0] == 0.0 { 0.0 } else { 1.0 }).unwrap();
    assert_eq!(log_likelihood(&[pattern(&[0.0])], &hole).unwrap(), f64::NEG_INFINITY);

    let flat = PointPattern::new(2, vec![vec![0.5, 0.5]]).unwrap();
    assert!(log_likelihood(&[flat], &two).is_err());
    assert_eq!(log_likelihood(&[], &two).unwrap(), 0.0);
}

#[test]
fn pattern_and_field_csv_roundtrip() {
    let p = PointPattern::new(2, vec![vec![0.1, 0.2], vec![1.0, 0.0]]).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf, &["seed=3".into()]).unwrap();
    assert_eq!(PointPattern::read_csv(buf.as_slice()).unwrap(), p);

    let f = IntensityField::from_fn(Grid::new(2, 4).unwrap(), |s| 1.0 + s[0] * s[1] / 3.0).unwrap();
    let mut buf = Vec::new();
    f.write_csv(&mut buf, &[]).unwrap();
    assert_eq!(IntensityField::read_csv(buf.as_slice()).unwrap(), f);
}

#[test]
fn malformed_csv_reports_line() {
    let text = "# comment\n1\n0.25\nabc\n";
    match PointPattern::read_csv(text.as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected parse error, got {other:?}"),
    }
    assert!(matches!(PointPattern::read_csv("1\n1.5\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    assert!(matches!(PointPattern::read_csv("2\n0.5\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
}

fn positive_field(res: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..5.0, res)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn likelihood_is_permutation_invariant(
        values in positive_field(9),
        xs in prop::collection::vec(0.0f64..=1.0, 0..12),
        ys in prop::collection::vec(0.0f64..=1.0, 0..12),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let field = IntensityField::new(line(9), values).unwrap();
        let mut rng = rng_from_seed(seed);
        let base = log_likelihood(&[pattern(&xs), pattern(&ys)], &field).unwrap();
        let (mut xs2, mut ys2) = (xs.clone(), ys.clone());
        xs2.shuffle(&mut rng);
        ys2.shuffle(&mut rng);
        let permuted = log_likelihood(&[pattern(&ys2), pattern(&xs2)], &field).unwrap();
        prop_assert!((base - permuted).abs() <= 1e-12 * (1.0 + base.abs()));
    }

    #[test]
    fn integral_is_monotone(values in positive_field(25), bumps in prop::collection::vec(0.0f64..2.0, 25)) {
        let grid = Grid::new(2, 5).unwrap();
        let lower = IntensityField::new(grid, values.clone()).unwrap();
        let upper = IntensityField::new(grid, values.iter().zip(&bumps).map(|(a, b)| a + b).collect()).unwrap();
        prop_assert!(integrate_field(&upper) >= integrate_field(&lower));
    }
}
