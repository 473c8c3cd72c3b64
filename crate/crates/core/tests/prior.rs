use proptest::prelude::*;
use sgcp::experiment::TruthSpec;
use sgcp::prior::{
    estimate_sqrt_link_lipschitz, link_eval, link_inverse, prior_small_ball_curve, prior_small_ball_probability,
    sample_prior_intensity, validate_length_scale_tail, validate_max_intensity_tail, w0_from_truth, GammaPrior,
    LengthScalePrior, LengthScaleTail, MaxIntensityPrior, MaxIntensityTail, ProbeRange,
};
use sgcp::seed::rng_from_seed;
use sgcp::stats::{mean, variance};
use sgcp::{Grid, IntensityField, LinkFunction, SgcpPrior};

const LINKS: [LinkFunction; 2] = [LinkFunction::Logistic, LinkFunction::NormalCdf];
const ONE_OVER_THREE_ROOT_THREE: f64 = 0.192_450_089_729_875_25;

#[test]
fn lipschitz_estimates() {
    let logistic = estimate_sqrt_link_lipschitz(LinkFunction::Logistic);
    assert!((logistic - ONE_OVER_THREE_ROOT_THREE).abs() < 1e-8, "{logistic}");
    assert!(logistic <= 0.25);
    let probit = estimate_sqrt_link_lipschitz(LinkFunction::NormalCdf);
    assert!(probit.is_finite() && probit > 0.0);
    assert!((probit - LinkFunction::NormalCdf.lipschitz_sqrt_bound()).abs() < 1e-8, "{probit}");
}

#[test]
fn forward_roundtrip_on_random_levels() {
    let mut rng = rng_from_seed(8);
    for link in LINKS {
        for _ in 0..100 {
            let y: f64 = rand::Rng::random_range(&mut rng, 0.01..0.99);
            let back = link_eval(link, link_inverse(link, y).unwrap());
            assert!((back - y).abs() < 1e-12, "{link:?} {y}");
        }
        assert_eq!(link_inverse(link, 0.5).unwrap(), 0.0);
        assert!(link_inverse(link, 0.0).is_err() && link_inverse(link, 1.0).is_err() && link_inverse(link, 1.2).is_err());
    }
    assert!((link_inverse(LinkFunction::Logistic, 0.75).unwrap() - 3f64.ln()).abs() < 1e-15);
}

#[test]
fn w0_examples() {
    let grid = Grid::new(1, 33).unwrap();
    let three = IntensityField::constant(grid, 3.0).unwrap();
    for link in LINKS {
        assert!(w0_from_truth(link, &three).unwrap().values.iter().all(|&w| w == 0.0));
    }
    let bump = IntensityField::from_fn(grid, |s| 4.0 - 3.0 * (s[0] - 0.5).powi(2)).unwrap();
    let w0 = w0_from_truth(LinkFunction::Logistic, &bump).unwrap();
    assert_eq!(w0.values[16], 0.0);

    let sine = TruthSpec::by_name("sine").unwrap().field(&Grid::new(1, 64).unwrap()).unwrap();
    for link in LINKS {
        let w0 = w0_from_truth(link, &sine).unwrap();
        let top = 2.0 * sine.max();
        for (w, l) in w0.values.iter().zip(sine.values()) {
            assert!((top * link.eval(*w) - l).abs() < 1e-10);
        }
    }
    let holed = IntensityField::from_fn(grid, |s| s[0]).unwrap();
    assert!(w0_from_truth(LinkFunction::Logistic, &holed).is_err());
}

fn gamma_ls(shape: f64, rate: f64, dim: usize) -> LengthScalePrior {
    LengthScalePrior::new(GammaPrior::new(shape, rate).unwrap(), dim).unwrap()
}

#[test]
fn length_scale_validator() {
    let probes = ProbeRange::default();
    for dim in [1, 2] {
        for (shape, rate) in [(2.0, 1.0), (1.0, 0.5), (5.0, 2.0)] {
            assert!(validate_length_scale_tail(&gamma_ls(shape, rate, dim), &probes).passed);
        }
    }
    let p = gamma_ls(2.0, 1.0, 1);
    // Small C1, large C2, matching exponent.
    let loose = p.with_tail(LengthScaleTail { c1: 1e-3, d1: 1.5, c2: 1e3, d2: 0.5, p: 1.0, q: 0.0 });
    assert!(validate_length_scale_tail(&loose, &probes).passed);
    // Dense and sparse probe grids agree.
    assert!(validate_length_scale_tail(&loose, &ProbeRange { points: 1000, ..probes }).passed);
    assert!(validate_length_scale_tail(&loose, &ProbeRange { points: 2, ..probes }).passed);

    let broken = p.with_tail(LengthScaleTail { d2: 1.2, ..p.tail });
    let report = validate_length_scale_tail(&broken, &probes);
    assert!(!report.passed);
    assert!(report.witness.is_some_and(|w| w.is_finite() && w >= probes.start));
    assert_eq!(report.constants["D2"], 1.2);
}

#[test]
fn max_intensity_validator() {
    let g21 = MaxIntensityPrior::new(GammaPrior::new(2.0, 1.0).unwrap());
    let tail = MaxIntensityTail { scale: 10.0, rate: 0.5, kappa: 1.0 };
    let window = ProbeRange { start: 1.0, end: 50.0, points: 64 };
    assert!(validate_max_intensity_tail(&g21.with_tail(tail), &window).passed);
    assert!(validate_max_intensity_tail(&g21.with_tail(MaxIntensityTail { scale: 10_000.0, ..tail }), &window).passed);
    let squared = validate_max_intensity_tail(&g21.with_tail(MaxIntensityTail { kappa: 2.0, ..tail }), &window);
    assert!(!squared.passed);
    assert!(squared.witness.is_some_and(f64::is_finite));

    let default = SgcpPrior::default_for_dim(1).unwrap();
    assert!(validate_max_intensity_tail(&default.max_intensity, &ProbeRange::default()).passed);
}

#[test]
fn validators_are_deterministic() {
    let p = SgcpPrior::default_for_dim(2).unwrap();
    let probes = ProbeRange::default();
    assert_eq!(validate_length_scale_tail(&p.length_scale, &probes), validate_length_scale_tail(&p.length_scale, &probes));
    assert_eq!(
        validate_max_intensity_tail(&p.max_intensity, &probes),
        validate_max_intensity_tail(&p.max_intensity, &probes)
    );
}

#[test]
fn prior_draws_stay_below_ceiling() {
    let prior = SgcpPrior::default_for_dim(1).unwrap();
    let grid = Grid::new(1, 32).unwrap();
    let mut rng = rng_from_seed(17);
    let mut mid = Vec::new();
    for _ in 0..4_000 {
        let d = sample_prior_intensity(&prior, &grid, &mut rng).unwrap();
        assert!(d.intensity.values().iter().all(|&v| v > 0.0 && v < d.lambda_star));
        mid.push(d.intensity.values()[10] / d.lambda_star);
    }
    let se = (variance(&mid) / mid.len() as f64).sqrt();
    assert!((mean(&mid) - 0.5).abs() < 3.0 * se);
}

#[test]
fn small_ball_probe_contract() {
    let prior = SgcpPrior::default_for_dim(1).unwrap();
    let grid = Grid::new(1, 16).unwrap();
    let truth = IntensityField::constant(grid, 4.0).unwrap();
    let deltas = [0.25, 0.5, 1.0, 2.0, 4.0, 100.0];
    let curve = prior_small_ball_curve(&prior, &truth, &deltas, 2_000, &mut rng_from_seed(4)).unwrap();
    assert!(curve.windows(2).all(|w| w[0].hits <= w[1].hits));
    assert!(curve[5].probability > 0.5);
    let single = prior_small_ball_probability(&prior, &truth, 1.0, 2_000, &mut rng_from_seed(4)).unwrap();
    assert_eq!(single, curve[2]);
    assert!(single.std_error > 0.0 && single.std_error < 0.02);

    assert!(prior_small_ball_curve(&prior, &truth, &[1.0], 999, &mut rng_from_seed(4)).is_err());
    assert!(prior_small_ball_curve(&prior, &truth, &[0.0], 1_000, &mut rng_from_seed(4)).is_err());
    let zero = IntensityField::constant(grid, 0.0).unwrap();
    assert!(prior_small_ball_curve(&prior, &zero, &[1.0], 1_000, &mut rng_from_seed(4)).is_err());
}

/// Absolute error that a correctly rounded forward evaluation forces on the
/// inverse: an ulp of `σ(x)` amplified by `1 / σ'(x)`.
fn conditioning(link: LinkFunction, x: f64) -> f64 {
    let y = link.eval(x);
    4.0 * f64::EPSILON * y.max(1.0 - y).min(1.0) / link.derivative(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inverse_after_eval_is_identity(x in -30.0f64..30.0) {
        let link = LinkFunction::Logistic;
        let back = link_inverse(link, link_eval(link, x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-12 + conditioning(link, x), "x = {x}, back = {back}");
    }

    #[test]
    fn probit_inverse_after_eval_is_identity(x in -30.0f64..8.0) {
        let link = LinkFunction::NormalCdf;
        let back = link_inverse(link, link_eval(link, x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-12 + conditioning(link, x), "x = {x}, back = {back}");
    }

    #[test]
    fn sqrt_link_is_lipschitz(x in -40.0f64..40.0, y in -40.0f64..40.0) {
        for link in LINKS {
            let c = link.lipschitz_sqrt_bound();
            prop_assert!((link.eval(x).sqrt() - link.eval(y).sqrt()).abs() <= c * (x - y).abs() * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn links_are_increasing_into_unit_interval(x in -30.0f64..30.0, dx in 1e-3f64..5.0) {
        for link in LINKS {
            let (a, b) = (link.eval(x), link.eval(x + dx));
            prop_assert!(a > 0.0 && b <= 1.0 && a <= b);
            if x + dx < 8.0 {
                prop_assert!(a < b && b < 1.0);
            }
        }
        prop_assert!((link_eval(LinkFunction::Logistic, x) + link_eval(LinkFunction::Logistic, -x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn enlarging_constants_never_breaks_a_pass(scale in 1.0f64..1e6, shape in 1.0f64..6.0, rate in 0.1f64..3.0) {
        let probes = ProbeRange::default();
        let ls = gamma_ls(shape, rate, 1);
        let base = validate_length_scale_tail(&ls, &probes);
        let wider = validate_length_scale_tail(&ls.with_tail(LengthScaleTail { c2: ls.tail.c2 * scale, ..ls.tail }), &probes);
        prop_assert!(!base.passed || wider.passed);

        let mi = MaxIntensityPrior::new(GammaPrior::new(shape, rate).unwrap());
        let base = validate_max_intensity_tail(&mi, &probes);
        let wider = validate_max_intensity_tail(&mi.with_tail(MaxIntensityTail { scale: mi.tail.scale * scale, ..mi.tail }), &probes);
        prop_assert!(!base.passed || wider.passed);
    }
}
