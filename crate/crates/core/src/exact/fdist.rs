//! Exact law of `F(T_n)` by convolution over the root split.
//!
//! For `n ≥ 2` the root is green with probability `2/n` (then `F = 1`);
//! otherwise both subtrees are nonempty and `F` is the sum of two
//! independent smaller copies:
//!
//! `P_n = (2/n) δ_1 + (1/n) Σ_{j=1}^{n-2} P_j * P_{n-1-j}`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::tables::{fringe_weight, CompensatedSum};

pub const DEFAULT_FDIST_LIMIT: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct FDist {
    /// `probs[n][m] = P(F(T_n) = m)`; trailing impossible values omitted.
    probs: Vec<Vec<f64>>,
}

/// Largest possible `F` for `n` nodes: every maximal clade holds at least two
/// of the `n + 1` external nodes.
fn support_max(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        n.div_ceil(2)
    }
}

pub fn build_f_dist(cap: usize) -> Result<FDist> {
    build_f_dist_with_limit(cap, DEFAULT_FDIST_LIMIT)
}

pub fn build_f_dist_with_limit(cap: usize, limit: usize) -> Result<FDist> {
    if cap > limit {
        return Err(Error::CapTooLarge { cap, limit });
    }
    let mut probs: Vec<Vec<f64>> = Vec::with_capacity(cap + 1);
    probs.push(vec![1.0]);
    if cap >= 1 {
        probs.push(vec![0.0, 1.0]);
    }
    for n in 2..=cap {
        let top = support_max(n);
        let inv_n = 1.0 / n as f64;
        let prev = &probs;
        let mut row: Vec<f64> = (0..=top)
            .into_par_iter()
            .map(|m| {
                // Σ_j Σ_a P_j[a] P_{n-1-j}[m-a], pairing j with n-1-j.
                let mut acc = CompensatedSum::default();
                for j in 1..=(n - 1) / 2 {
                    let k = n - 1 - j;
                    let (pj, pk) = (&prev[j], &prev[k]);
                    let lo = m.saturating_sub(pk.len() - 1);
                    let hi = m.min(pj.len() - 1);
                    if lo > hi {
                        continue;
                    }
                    let s: f64 = (lo..=hi).map(|a| pj[a] * pk[m - a]).sum();
                    if j == k {
                        acc.add(s);
                    } else {
                        acc.add(2.0 * s);
                    }
                }
                acc.value() * inv_n
            })
            .collect();
        row[1] += 2.0 * inv_n;
        probs.push(row);
    }
    Ok(FDist { probs })
}

impl FDist {
    pub fn cap(&self) -> usize {
        self.probs.len() - 1
    }

    /// `P(F(T_n) = m)` for `m = 0..=⌈n/2⌉`.
    pub fn pmf(&self, n: usize) -> &[f64] {
        &self.probs[n]
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.cap() {
            Err(Error::TableTooShort {
                needed: n as u64,
                have: self.cap() as u64,
            })
        } else {
            Ok(())
        }
    }

    fn expect<G: Fn(f64) -> f64>(&self, n: usize, g: G) -> f64 {
        let mut acc = CompensatedSum::default();
        for (m, p) in self.probs[n].iter().enumerate() {
            if *p != 0.0 {
                acc.add(p * g(m as f64));
            }
        }
        acc.value()
    }

    pub fn mean(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.expect(n, |m| m))
    }

    /// `E (F_n - ν_n)^k`.
    pub fn central_moment(&self, n: usize, k: u32) -> Result<f64> {
        let mean = self.mean(n)?;
        Ok(self.expect(n, |m| (m - mean).powi(k as i32)))
    }

    /// `E |F_n - ν_n|^p`.
    pub fn abs_central_moment(&self, n: usize, p: f64) -> Result<f64> {
        let mean = self.mean(n)?;
        Ok(self.expect(n, |m| (m - mean).abs().powf(p)))
    }

    /// `E |f(T_n)|^p = (2/n) E |1 - F(T_{n-1})|^p` for `n ≥ 2`, and 1 for `n = 1`.
    pub fn f_abs_moment(&self, n: usize, p: f64) -> Result<f64> {
        match n {
            0 => Ok(0.0),
            1 => Ok(1.0),
            _ => {
                self.check(n - 1)?;
                Ok(2.0 / n as f64 * self.expect(n - 1, |m| (1.0 - m).abs().powf(p)))
            }
        }
    }

    /// `E Σ_v |f(T_{n,v})|^p = (n+1) Σ_{k<n} 2/((k+1)(k+2)) E|f(T_k)|^p + E|f(T_n)|^p`.
    pub fn sum_f_abs(&self, n: usize, p: f64) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        self.check(n - 1)?;
        let mut acc = CompensatedSum::default();
        for k in 1..n {
            acc.add(fringe_weight(k as u64) * self.f_abs_moment(k, p)?);
        }
        Ok((n as f64 + 1.0) * acc.value() + self.f_abs_moment(n, p)?)
    }
}

/// Exact mean and variance of `X_n = F(T_n)`, or of `X_n^N` when a cutoff
/// is given, for `n = 0..=nmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountMoments {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Above the cutoff `X^N` splits additively over the root; at or below it
/// `X^N = F`, taken from `dist`. Without a cutoff the root-green split gives
/// `X = 1`. Each step conditions on the root split (law of total variance),
/// so the cost is `O(nmax^2)`.
pub fn count_moments(dist: &FDist, nmax: usize, cutoff: Option<usize>) -> Result<CountMoments> {
    let base = cutoff.unwrap_or(1).min(nmax);
    dist.check(base)?;
    let mut mean = vec![0.0; nmax + 1];
    let mut variance = vec![0.0; nmax + 1];
    for n in 0..=base {
        mean[n] = dist.mean(n)?;
        variance[n] = dist.central_moment(n, 2)?;
    }
    // Σ_{j<n} of mean and variance
    let (mut mean_sum, mut var_sum) = (CompensatedSum::default(), CompensatedSum::default());
    for j in 0..base {
        mean_sum.add(mean[j]);
        var_sum.add(variance[j]);
    }
    for n in base + 1..=nmax {
        mean_sum.add(mean[n - 1]);
        var_sum.add(variance[n - 1]);
        let inv_n = 1.0 / n as f64;
        // X_0 = 0, so dropping j = 0 and j = n - 1 only removes variance[n - 1]
        let (m, within, lo) = match cutoff {
            Some(_) => (2.0 * mean_sum.value() * inv_n, 2.0 * var_sum.value(), 0),
            None => (
                (2.0 + 2.0 * (mean_sum.value() - mean[n - 1])) * inv_n,
                2.0 * (var_sum.value() - variance[n - 1]),
                1,
            ),
        };
        let mut between = CompensatedSum::default();
        if cutoff.is_none() {
            between.add(2.0 * (1.0 - m) * (1.0 - m));
        }
        for j in lo..=(n - 1) / 2 {
            let d = mean[j] + mean[n - 1 - j] - m;
            between.add(if j == n - 1 - j { d * d } else { 2.0 * d * d });
        }
        mean[n] = m;
        variance[n] = (within + between.value()) * inv_n;
    }
    Ok(CountMoments { mean, variance })
}
