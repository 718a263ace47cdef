//! Small goodness-of-fit helpers used by the tests and the Monte Carlo harness.

use crate::special::{normal_cdf, normal_sf};
use serde::{Deserialize, Serialize};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Two-sided Kolmogorov-Smirnov distance between the sample and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Large-sample critical value `sqrt(-ln(alpha/2) / 2) / sqrt(n)` of the KS
/// distance.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-0.5 * (0.5 * alpha).ln()).sqrt() / (n as f64).sqrt()
}

/// Anderson-Darling test of normality with mean and variance estimated from
/// the sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityTest {
    /// Small-sample adjusted statistic `A²(1 + 0.75/n + 2.25/n²)`.
    pub statistic: f64,
    pub p_value: f64,
}

impl NormalityTest {
    /// Critical value of the adjusted statistic at the 1% level.
    pub const CRITICAL_1PCT: f64 = 1.035;

    pub fn rejects_at_1pct(&self) -> bool {
        self.statistic > Self::CRITICAL_1PCT
    }
}

pub fn anderson_darling_normal(sample: &[f64]) -> NormalityTest {
    let n = sample.len();
    assert!(n >= 8, "Anderson-Darling needs at least 8 values");
    let m = mean(sample);
    let sd = variance(sample).sqrt();
    let mut z: Vec<f64> = sample.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let nf = n as f64;
    let sum: f64 = (0..n)
        .map(|i| {
            let lo = normal_cdf(z[i]).ln();
            let hi = normal_sf(z[n - 1 - i]).ln();
            (2 * i + 1) as f64 * (lo + hi)
        })
        .sum();
    let a2 = -nf - sum / nf;
    let stat = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    NormalityTest {
        statistic: stat,
        p_value: ad_p_value(stat),
    }
}

// piecewise fit of the null distribution of the adjusted statistic
fn ad_p_value(a: f64) -> f64 {
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    p.clamp(0.0, 1.0)
}
