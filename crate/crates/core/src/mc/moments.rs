//! Running central moments up to order 6 with exact pairwise merging.

use serde::Serialize;

use crate::error::{Error, Result};

/// Highest central moment tracked.
pub const MAX_ORDER: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSummary {
    /// Identity of the statistic and configuration; merges require equal keys.
    pub key: String,
    pub count: u64,
    pub mean: f64,
    /// Central sums `Σ (x - mean)^p` for `p = 2..=6`.
    pub central_sums: [f64; MAX_ORDER - 1],
    pub min: f64,
    pub max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<Vec<f64>>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl MomentSummary {
    pub fn new(key: impl Into<String>, keep_raw: bool) -> Self {
        Self {
            key: key.into(),
            count: 0,
            mean: 0.0,
            central_sums: [0.0; MAX_ORDER - 1],
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            raw: keep_raw.then(Vec::new),
        }
    }

    pub fn from_values(key: impl Into<String>, values: &[f64], keep_raw: bool) -> Self {
        let mut s = Self::new(key, keep_raw);
        for &x in values {
            s.push(x);
        }
        s
    }

    fn sum(&self, p: usize) -> f64 {
        match p {
            0 => self.count as f64,
            1 => 0.0,
            p => self.central_sums[p - 2],
        }
    }

    /// Pairwise update of mean and central sums with a block of `nb` values.
    fn absorb(&mut self, nb: u64, mean_b: f64, sums_b: &[f64; MAX_ORDER - 1]) {
        if self.count == 0 {
            self.count = nb;
            self.mean = mean_b;
            self.central_sums = *sums_b;
            return;
        }
        let sum_b = |p: usize| {
            if p < 2 {
                [nb as f64, 0.0][p]
            } else {
                sums_b[p - 2]
            }
        };
        let (na, nbf) = (self.count as f64, nb as f64);
        let n = na + nbf;
        let delta = mean_b - self.mean;
        let mut next = [0.0; MAX_ORDER - 1];
        for p in 2..=MAX_ORDER {
            let mut m = self.sum(p) + sum_b(p);
            for k in 1..=p - 2 {
                m += binomial(p, k)
                    * delta.powi(k as i32)
                    * ((-nbf / n).powi(k as i32) * self.sum(p - k)
                        + (na / n).powi(k as i32) * sum_b(p - k));
            }
            m += (na * nbf / n * delta).powi(p as i32)
                * (1.0 / nbf.powi(p as i32 - 1) - (-1.0 / na).powi(p as i32 - 1));
            next[p - 2] = m;
        }
        self.central_sums = next;
        self.mean += delta * nbf / n;
        self.count += nb;
    }

    pub fn push(&mut self, x: f64) {
        self.absorb(1, x, &[0.0; MAX_ORDER - 1]);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        if let Some(raw) = &mut self.raw {
            raw.push(x);
        }
    }

    /// Appends `other` as if its samples followed this summary's.
    pub fn merge(&mut self, other: &MomentSummary) -> Result<()> {
        if self.key != other.key {
            return Err(Error::ConfigMismatch {
                left: self.key.clone(),
                right: other.key.clone(),
            });
        }
        if other.count == 0 {
            return Ok(());
        }
        self.absorb(other.count, other.mean, &other.central_sums);
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.raw = match (self.raw.take(), &other.raw) {
            (Some(mut a), Some(b)) => {
                a.extend_from_slice(b);
                Some(a)
            }
            _ => None,
        };
        Ok(())
    }

    /// Population central moment `(1/R) Σ (x - mean)^p`, `2 ≤ p ≤ 6`.
    pub fn central_moment(&self, p: usize) -> f64 {
        assert!(
            (2..=MAX_ORDER).contains(&p),
            "central moments are tracked for orders 2..=6"
        );
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum(p) / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.sum(2).max(0.0) / (self.count as f64 - 1.0)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn skewness(&self) -> f64 {
        self.central_moment(3) / self.central_moment(2).powf(1.5)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.central_moment(4) / self.central_moment(2).powi(2) - 3.0
    }

    /// `(1/R) Σ |x - mean|^p` from the stored raw values.
    pub fn abs_central_moment(&self, p: f64) -> Option<f64> {
        let raw = self.raw.as_ref()?;
        if raw.is_empty() {
            return None;
        }
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        Some(raw.iter().map(|x| (x - mean).abs().powf(p)).sum::<f64>() / raw.len() as f64)
    }
}

pub fn merge(a: &MomentSummary, b: &MomentSummary) -> Result<MomentSummary> {
    let mut out = a.clone();
    out.merge(b)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_central(values: &[f64], p: i32) -> f64 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter().map(|x| (x - mean).powi(p)).sum::<f64>() / values.len() as f64
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn merge_with_empty() {
        let s = MomentSummary::from_values("x", &[1.0, 4.0, 9.0], true);
        let e = MomentSummary::new("x", true);
        assert_eq!(merge(&s, &e).unwrap(), s);
        assert_eq!(merge(&e, &s).unwrap(), s);
    }

    #[test]
    fn two_points() {
        let a = MomentSummary::from_values("x", &[3.0], false);
        let b = MomentSummary::from_values("x", &[7.0], false);
        let m = merge(&a, &b).unwrap();
        assert_eq!(m.count, 2);
        assert_eq!(m.mean, 5.0);
        assert_eq!(m.central_sums[0], 8.0);
        assert_eq!(m.central_sums[1], 0.0);
        assert_eq!(m.central_sums[2], 32.0);
        assert_eq!((m.min, m.max), (3.0, 7.0));
    }

    #[test]
    fn key_mismatch() {
        let mut a = MomentSummary::new("F", false);
        let b = MomentSummary::from_values("G", &[1.0], false);
        assert!(matches!(a.merge(&b), Err(Error::ConfigMismatch { .. })));
    }

    #[test]
    fn seven_blocks_match_whole() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..10_000)
            .map(|_| (rng.random_range(0..400) as f64).sqrt() * 30.0 + 1e3)
            .collect();
        let whole = MomentSummary::from_values("x", &values, true);
        let mut merged = MomentSummary::new("x", true);
        for chunk in values.chunks(10_000 / 7 + 1) {
            merged
                .merge(&MomentSummary::from_values("x", chunk, true))
                .unwrap();
        }
        assert_eq!(merged.count, whole.count);
        assert_eq!(merged.raw, whole.raw);
        assert!(rel(merged.mean, whole.mean) < 1e-14);
        for p in 2..=6 {
            let d = direct_central(&values, p as i32);
            assert!(rel(merged.central_moment(p), d) < 1e-9, "order {p}");
            assert!(rel(whole.central_moment(p), d) < 1e-9, "order {p}");
        }
        let a2 = merged.abs_central_moment(2.0).unwrap();
        assert!(rel(a2, direct_central(&values, 2)) < 1e-12);
    }

    #[test]
    fn constant_sample() {
        let s = MomentSummary::from_values("x", &[2.0; 10], false);
        assert_eq!(s.variance(), 0.0);
        assert_eq!(s.central_sums, [0.0; 5]);
        assert!(s.abs_central_moment(1.0).is_none());
    }
}
