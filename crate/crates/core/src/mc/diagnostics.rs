//! Normality diagnostics and goodness-of-fit helpers.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Kolmogorov–Smirnov distance to `N(0, 1)`.
    pub ks: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Mean and population variance of the standardized sample.
    pub mean: f64,
    pub variance: f64,
}

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// One-sample KS statistic of `sorted` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let c = cdf(z);
            (((i + 1) as f64 / n) - c).max(c - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Standardizes `(x - center) / scale` and compares with `N(0, 1)`.
pub fn normality(values: &[f64], center: f64, scale: f64) -> Result<Diagnostics> {
    if values.is_empty() {
        return Err(Error::InvalidConfig(
            "normality needs at least one value".into(),
        ));
    }
    if !(scale > f64::MIN_POSITIVE) || !scale.is_finite() {
        return Err(Error::DegenerateSample { scale });
    }
    let mut z: Vec<f64> = values.iter().map(|x| (x - center) / scale).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let m = |p: i32| z.iter().map(|x| (x - mean).powi(p)).sum::<f64>() / n;
    let (m2, m3, m4) = (m(2), m(3), m(4));
    Ok(Diagnostics {
        ks: ks_statistic(&z, std_normal_cdf),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        mean,
        variance: m2,
    })
}

/// Pearson chi-square statistic and upper-tail p-value.
///
/// `expected` holds probabilities of the listed cells; the remaining mass, if
/// any, forms one extra cell whose count is `total - Σ observed`.
pub fn chi_square_pvalue(observed: &[u64], expected: &[f64], total: u64) -> (f64, f64) {
    assert_eq!(observed.len(), expected.len());
    let t = total as f64;
    let mut stat = 0.0;
    let mut cells = 0;
    let (mut obs_rest, mut exp_rest) = (total as f64, 1.0);
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p * t;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
        obs_rest -= o as f64;
        exp_rest -= p;
    }
    if exp_rest * t > 1e-9 {
        let e = exp_rest * t;
        stat += (obs_rest - e).powi(2) / e;
        cells += 1;
    }
    let df = (cells - 1).max(1) as f64;
    let p = 1.0
        - ChiSquared::new(df)
            .expect("positive degrees of freedom")
            .cdf(stat);
    (stat, p)
}
