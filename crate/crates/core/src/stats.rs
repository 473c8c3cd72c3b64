//! Statistical diagnostics: goodness-of-fit tests, effective sample size,
//! batch-means standard errors, and trace stationarity z-scores.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

use crate::error::{invalid, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Median of a slice (average of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Linear-interpolation quantile.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Result of a goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov distribution tail `P(K > t)`.
fn kolmogorov_sf(t: f64) -> f64 {
    if t < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against a continuous cdf, with
/// Stephens' finite-sample correction of the asymptotic p-value.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> TestOutcome {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    TestOutcome { statistic: d, p_value: kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * d) }
}

/// Pearson chi-square goodness-of-fit test of integer counts against a
/// Poisson law. Cells `0..k` plus an upper tail cell are merged so that
/// every expected frequency is at least five.
pub fn poisson_chi_square(counts: &[usize], mean: f64) -> Result<TestOutcome> {
    if counts.is_empty() || !(mean > 0.0) {
        return Err(invalid("chi-square needs counts and a positive mean"));
    }
    let pois = Poisson::new(mean).map_err(|e| invalid(e.to_string()))?;
    let n = counts.len() as f64;
    // Build cells [0], [1], ..., [k-1], [k, inf) with expected >= 5.
    let mut edges = Vec::new();
    let mut acc = 0.0;
    let mut k = 0u64;
    loop {
        acc += pois.pmf(k) * n;
        let remaining = pois.sf(k) * n;
        if acc >= 5.0 {
            if remaining < 5.0 {
                break;
            }
            edges.push(k);
            acc = 0.0;
        }
        k += 1;
        if k > 10_000 {
            break;
        }
    }
    // Cells are (prev_edge, edge] with the last cell open-ended.
    let cells = edges.len() + 1;
    if cells < 2 {
        return Err(invalid("too few cells for a chi-square test"));
    }
    let cell_of = |c: u64| edges.iter().position(|&e| c <= e).unwrap_or(edges.len());
    let mut observed = vec![0.0; cells];
    for &c in counts {
        observed[cell_of(c as u64)] += 1.0;
    }
    let mut expected = vec![0.0; cells];
    let mut lower = 0.0;
    for (i, &e) in edges.iter().enumerate() {
        let upper = pois.cdf(e);
        expected[i] = (upper - lower) * n;
        lower = upper;
    }
    expected[cells - 1] = (1.0 - lower) * n;
    let stat: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let chi = ChiSquared::new((cells - 1) as f64).map_err(|e| invalid(e.to_string()))?;
    Ok(TestOutcome { statistic: stat, p_value: chi.sf(stat) })
}

/// Effective sample size from the autocorrelation function, truncated by
/// Geyer's initial positive sequence.
pub fn effective_sample_size(trace: &[f64]) -> f64 {
    let n = trace.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(trace);
    let centered: Vec<f64> = trace.iter().map(|x| x - m).collect();
    let c0: f64 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 0.0;
    }
    let acf = |lag: usize| -> f64 {
        centered[..n - lag].iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum::<f64>() / (n as f64 * c0)
    };
    let mut tau = 1.0;
    let mut lag = 1;
    while lag + 1 < n {
        let pair = acf(lag) + acf(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    (n as f64 / tau).min(n as f64)
}

/// Standard error of the mean of an autocorrelated trace by the method of
/// non-overlapping batch means.
pub fn batch_means_se(trace: &[f64], batches: usize) -> f64 {
    let size = trace.len() / batches.max(2);
    if size == 0 {
        return (variance(trace) / trace.len() as f64).sqrt();
    }
    let means: Vec<f64> = trace.chunks_exact(size).take(batches).map(mean).collect();
    (variance(&means) / means.len() as f64).sqrt()
}

/// Trace stationarity score: difference of the means of the first 10% and
/// last 50% of a trace, scaled by batch-means standard errors.
pub fn geweke_drift_z(trace: &[f64]) -> f64 {
    let n = trace.len();
    if n < 40 {
        return f64::NAN;
    }
    let a = &trace[..n / 10];
    let b = &trace[n / 2..];
    let se = (batch_means_se(a, 10).powi(2) + batch_means_se(b, 20).powi(2)).sqrt();
    if se == 0.0 {
        return if mean(a) == mean(b) { 0.0 } else { f64::INFINITY };
    }
    (mean(a) - mean(b)) / se
}
