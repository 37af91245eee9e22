//! Goodness-of-fit statistics for level spacings and window counts.

use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

/// Kolmogorov–Smirnov distance `sup_x |F_n(x) - (1 - e^{-rate·x})|`.
pub fn ks_distance_exponential(samples: &[f64], rate: f64) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() };
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value `P(√n D > √n d)` from the Kolmogorov distribution.
pub fn ks_p_value(distance: f64, n: usize) -> f64 {
    if n == 0 || !distance.is_finite() {
        return f64::NAN;
    }
    let sqrt_n = (n as f64).sqrt();
    // Stephens' small-sample correction
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * distance;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square of observed counts against `Poisson(mean)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins as `(first count, observed, expected)`; the last bin is a tail `k >= first`.
    pub bins: Vec<(u64, f64, f64)>,
}

/// Bins counts `0, 1, 2, ...` so that every bin expects at least
/// `min_expected` observations; the last bin absorbs the upper tail.
/// Returns `None` when fewer than two bins can be formed.
pub fn chi_square_poisson(counts: &[u64], mean: f64, min_expected: f64) -> Option<ChiSquareTest> {
    if counts.is_empty() || !(mean > 0.0) {
        return None;
    }
    let total = counts.len() as f64;
    let poisson = Poisson::new(mean).ok()?;
    let max_count = counts.iter().copied().max().unwrap_or(0);
    let observed_at = |k: u64| counts.iter().filter(|&&c| c == k).count() as f64;

    let mut bins: Vec<(u64, f64, f64)> = Vec::new();
    let mut start = 0u64;
    let mut obs = 0.0;
    let mut exp = 0.0;
    let mut k = 0u64;
    loop {
        obs += observed_at(k);
        exp += total * poisson.pmf(k);
        // expected mass strictly above k
        let tail_expected = total * poisson.sf(k);
        if exp >= min_expected && tail_expected >= min_expected {
            bins.push((start, obs, exp));
            start = k + 1;
            obs = 0.0;
            exp = 0.0;
        } else if tail_expected < min_expected {
            let rest: f64 = counts.iter().filter(|&&c| c > k).count() as f64;
            bins.push((start, obs + rest, exp + tail_expected));
            break;
        }
        k += 1;
        if k > max_count.max(1) * 4 + 1000 {
            break;
        }
    }
    if bins.len() < 2 {
        return None;
    }
    let statistic: f64 = bins.iter().map(|&(_, o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64).ok()?.sf(statistic);
    Some(ChiSquareTest {
        statistic,
        dof,
        p_value,
        bins,
    })
}

/// Ordinary least squares `y = intercept + slope·x` with coefficient of determination.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let rate = 2.0;
        let q: Vec<f64> = (0..n).map(|i| -((1.0 - (i as f64 + 0.5) / n as f64).ln()) / rate).collect();
        let d = ks_distance_exponential(&q, rate);
        assert_abs_diff_eq!(d, 0.5 / n as f64, epsilon = 1e-12);
        assert!(ks_distance_exponential(&q, 1.0) > 0.2);
    }

    #[test]
    fn ks_p_values() {
        assert!(ks_p_value(0.01, 100) > 0.99);
        // critical value 1.36/sqrt(n) is the 5% point
        let p = ks_p_value(1.358 / 400f64.sqrt(), 400);
        assert!((p - 0.05).abs() < 0.01, "{p}");
    }

    #[test]
    fn chi_square_accepts_poisson_and_rejects_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mean = 3.0;
        let dist = rand_distr_poisson(mean);
        let counts: Vec<u64> = (0..2000).map(|_| sample_inverse(&dist, rng.random())).collect();
        let t = chi_square_poisson(&counts, mean, 5.0).unwrap();
        assert!(t.p_value > 0.001, "{t:?}");
        let observed: f64 = t.bins.iter().map(|b| b.1).sum();
        let expected: f64 = t.bins.iter().map(|b| b.2).sum();
        assert_abs_diff_eq!(observed, 2000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(expected, 2000.0, epsilon = 1e-6);
        let constant = vec![3u64; 2000];
        assert!(chi_square_poisson(&constant, mean, 5.0).unwrap().p_value < 1e-10);
        assert!(chi_square_poisson(&[], mean, 5.0).is_none());
    }

    fn rand_distr_poisson(mean: f64) -> Vec<f64> {
        let p = Poisson::new(mean).unwrap();
        (0..60).map(|k| p.cdf(k)).collect()
    }

    fn sample_inverse(cdf: &[f64], u: f64) -> u64 {
        cdf.iter().position(|&c| u < c).unwrap_or(cdf.len()) as u64
    }

    #[test]
    fn exact_line_fit() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 1.5 * v).collect();
        let (slope, intercept, r2) = linear_fit(&x, &y);
        assert_abs_diff_eq!(slope, -1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(intercept, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r2, 1.0, epsilon = 1e-14);
    }
}
