use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Default size bound for ψ tables, whose cost is quadratic.
pub const DEFAULT_PSI_MAX: u64 = 20_000;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Weight `2/((k+1)(k+2))` of fringe subtrees of size `k`.
#[inline]
pub(crate) fn fringe_weight(k: u64) -> f64 {
    let k = k as f64;
    2.0 / ((k + 1.0) * (k + 2.0))
}

/// `E Σ_v φ(T_v)` for a toll whose mean on size-`k` trees is `mean[k]`:
/// `(n+1) Σ_{k<n} 2/((k+1)(k+2)) mean[k] + mean[n]` for every `n` in
/// `0..mean.len()`.
pub(crate) fn additive_expectations(mean: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mean.len()];
    let mut prefix = CompensatedSum::default();
    for n in 1..mean.len() {
        out[n] = (n as f64 + 1.0) * prefix.value() + mean[n];
        prefix.add(fringe_weight(n as u64) * mean[n]);
    }
    out
}

/// Expected toll `μ_n = E f(T_n)` and expected maximal-clade count
/// `ν_n = E F(T_n)` for the random binary search tree, plus the variance
/// table `ψ_k` once [`ExactTables::build_psi`] has run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactTables {
    mu: Vec<f64>,
    nu: Vec<f64>,
    psi: Vec<f64>,
}

impl ExactTables {
    /// `μ_n` and `ν_n` for `n ≤ nmax` in `O(nmax)`.
    ///
    /// `μ_n = (2/n)(1 - ν_{n-1})` and `ν_n = (n+1) S_{n-1} + μ_n` with the
    /// running sum `S_m = Σ_{k ≤ m} 2 μ_k / ((k+1)(k+2))`.
    pub fn build(nmax: u64) -> Self {
        let len = nmax.max(1) as usize + 1;
        let mut mu = vec![0.0; len];
        let mut nu = vec![0.0; len];
        let mut s = CompensatedSum::default();
        for n in 1..len {
            mu[n] = if n == 1 {
                1.0
            } else {
                2.0 / n as f64 * (1.0 - nu[n - 1])
            };
            nu[n] = (n as f64 + 1.0) * s.value() + mu[n];
            s.add(fringe_weight(n as u64) * mu[n]);
        }
        Self {
            mu,
            nu,
            psi: Vec::new(),
        }
    }

    /// Tables with `ψ_k` for `k ≤ nmax` as well.
    pub fn build_with_psi(nmax: u64) -> Self {
        let mut t = Self::build(nmax);
        t.build_psi(nmax).expect("table covers its own size");
        t
    }

    pub fn nmax(&self) -> u64 {
        self.nu.len() as u64 - 1
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// `ψ_0..=ψ_kmax`; empty before [`Self::build_psi`].
    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn psi_max(&self) -> Option<u64> {
        (!self.psi.is_empty()).then(|| self.psi.len() as u64 - 1)
    }

    /// `ψ_k = (1/k) Σ_{j=1}^{k-2} (ν_j + ν_{k-1-j} - ν_k)^2 + (2/k)(ν_k - 1)^2`,
    /// the mean square of the martingale increment at a node of size `k`.
    pub fn build_psi(&mut self, kmax: u64) -> Result<()> {
        if kmax > self.nmax() {
            return Err(Error::TableTooShort {
                needed: kmax,
                have: self.nmax(),
            });
        }
        let nu = &self.nu;
        let mut psi = vec![0.0; kmax as usize + 1];
        for (k, slot) in psi.iter_mut().enumerate().skip(1) {
            let nk = nu[k];
            let mut acc = CompensatedSum::default();
            for j in 1..k.saturating_sub(1) {
                let d = nu[j] + nu[k - 1 - j] - nk;
                acc.add(d * d);
            }
            *slot = (acc.value() + 2.0 * (nk - 1.0) * (nk - 1.0)) / k as f64;
        }
        self.psi = psi;
        Ok(())
    }

    fn require_psi(&self, n: u64) -> Result<()> {
        match self.psi_max() {
            Some(k) if k >= n => Ok(()),
            k => Err(Error::TableTooShort {
                needed: n,
                have: k.unwrap_or(0),
            }),
        }
    }

    /// Exact `Var G(T_n) = (n+1) Σ_{k<n} 2 ψ_k / ((k+1)(k+2)) + ψ_n`.
    pub fn var_g(&self, n: u64) -> Result<f64> {
        self.require_psi(n)?;
        Ok(weighted_total(&self.psi, n))
    }

    /// `Var G(T_n)` for every `n ≤ ψ_max`.
    pub fn var_g_all(&self) -> Vec<f64> {
        additive_expectations(&self.psi)
    }

    /// Tables for the toll restricted to subtrees of at most `cutoff` nodes,
    /// covering sizes up to `nmax`.
    pub fn cutoff_tables(&self, cutoff: u64, nmax: u64) -> Result<CutoffTables> {
        if nmax > self.nmax() {
            return Err(Error::TableTooShort {
                needed: nmax,
                have: self.nmax(),
            });
        }
        let len = nmax as usize + 1;
        // E g'(T_k) = μ_k 1{k ≤ N}
        let mean: Vec<f64> = (0..len)
            .map(|k| if k as u64 <= cutoff { self.mu[k] } else { 0.0 })
            .collect();
        let nu_small = additive_expectations(&mean);
        let nu = &self.nu;
        let g_small = |k: usize| {
            if k as u64 <= cutoff {
                1.0 - nu[k - 1]
            } else {
                0.0
            }
        };
        let mut psi_small = vec![0.0; len];
        for (k, slot) in psi_small.iter_mut().enumerate().skip(1) {
            *slot = mean_square_increment(k, &nu_small, g_small(k));
        }
        Ok(CutoffTables {
            cutoff,
            nu_small,
            psi_small,
        })
    }

    /// Exact `Var G'(T_n)` where `G'` keeps the `g` tolls of subtrees with at
    /// most `cutoff` nodes.
    pub fn var_g_small(&self, n: u64, cutoff: u64) -> Result<f64> {
        let t = self.cutoff_tables(cutoff, n)?;
        Ok(t.var_g_small(n))
    }

    /// Rows `n, μ_n, ν_n, ψ_n` as CSV, `ψ` left blank where not built.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mu,nu,psi\n");
        for n in 0..=self.nmax() as usize {
            let psi = self
                .psi
                .get(n)
                .map(|p| format_sig17(*p))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{n},{},{},{psi}",
                format_sig17(self.mu[n]),
                format_sig17(self.nu[n])
            );
        }
        out
    }
}

/// `(1/k) Σ_{j=0}^{k-1} (g_j + ν'_j + ν'_{k-1-j} - ν'_k)^2` where the toll
/// `g_j` is `edge_toll` for `j ∈ {0, k-1}` and zero otherwise.
pub(crate) fn mean_square_increment(k: usize, nu: &[f64], edge_toll: f64) -> f64 {
    let nk = nu[k];
    let mut acc = CompensatedSum::default();
    for j in 0..k {
        let g = if j == 0 || j == k - 1 { edge_toll } else { 0.0 };
        let d = g + nu[j] + nu[k - 1 - j] - nk;
        acc.add(d * d);
    }
    acc.value() / k as f64
}

fn weighted_total(psi: &[f64], n: u64) -> f64 {
    let n = n as usize;
    if n == 0 {
        return 0.0;
    }
    let mut acc = CompensatedSum::default();
    for (k, p) in psi.iter().enumerate().take(n).skip(1) {
        acc.add(fringe_weight(k as u64) * p);
    }
    (n as f64 + 1.0) * acc.value() + psi[n]
}

/// `ν'_m = E G'(T_m)` and `ψ'_k` for a fixed small-clade cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffTables {
    pub cutoff: u64,
    pub nu_small: Vec<f64>,
    pub psi_small: Vec<f64>,
}

impl CutoffTables {
    pub fn nmax(&self) -> u64 {
        self.psi_small.len() as u64 - 1
    }

    pub fn var_g_small(&self, n: u64) -> f64 {
        weighted_total(&self.psi_small, n)
    }

    pub fn var_g_small_all(&self) -> Vec<f64> {
        additive_expectations(&self.psi_small)
    }
}

/// `α = (1 - e^{-2})/4`, the limit of `ν_n / n`.
pub fn alpha_closed() -> f64 {
    (1.0 - (-2.0f64).exp()) / 4.0
}

/// Truncation `Σ_{n ≤ nmax} 2μ_n/((n+1)(n+2))` of the series for `α`.
///
/// For `n ≥ 2` the terms equal `4/(n(n+1)(n+2)) (1 - ν_{n-1})`; the first
/// term is `1/3` because `μ_1 = 1`.
pub fn alpha_series(nmax: u64) -> f64 {
    let t = ExactTables::build(nmax);
    alpha_series_from(&t, nmax)
}

pub fn alpha_series_from(t: &ExactTables, nmax: u64) -> f64 {
    let mut acc = CompensatedSum::default();
    for n in 1..=nmax.min(t.nmax()) {
        acc.add(fringe_weight(n) * t.mu[n as usize]);
    }
    acc.value()
}

/// Formats with 17 significant digits, switching to exponent form for very
/// large or small magnitudes.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn first_values() {
        let t = ExactTables::build(4);
        assert_eq!(t.nu()[..2], [0.0, 1.0]);
        assert_eq!(t.mu()[..2], [0.0, 1.0]);
        assert!(close(t.nu()[2], 1.0, 1e-15) && close(t.mu()[2], 0.0, 1e-15));
        assert!(close(t.nu()[3], 4.0 / 3.0, 1e-15) && close(t.mu()[3], 0.0, 1e-15));
        assert!(close(t.nu()[4], 1.5, 1e-15) && close(t.mu()[4], -1.0 / 6.0, 1e-15));
    }

    #[test]
    fn mu_is_bounded() {
        let t = ExactTables::build(100_000);
        assert!(t.mu().iter().all(|m| m.abs() <= 2.0));
        for n in 2..=100 {
            assert!(close(
                t.mu()[n],
                2.0 / n as f64 * (1.0 - t.nu()[n - 1]),
                1e-15
            ));
        }
    }

    #[test]
    fn psi_small_values() {
        let t = ExactTables::build_with_psi(10);
        assert_eq!(t.psi()[1], 0.0);
        assert!(close(t.psi()[2], 0.0, 1e-15));
        assert!(close(t.psi()[3], 2.0 / 9.0, 1e-15));
        assert!(t.psi().iter().all(|&p| p >= 0.0));
        assert!(close(t.var_g(1).unwrap(), 0.0, 1e-15));
        assert!(close(t.var_g(3).unwrap(), 2.0 / 9.0, 1e-15));
        let all = t.var_g_all();
        for n in 0..=10 {
            assert!(close(all[n], t.var_g(n as u64).unwrap(), 1e-13));
        }
    }

    #[test]
    fn psi_requires_table() {
        let mut t = ExactTables::build(5);
        assert!(t.build_psi(6).is_err());
        assert!(t.var_g(2).is_err());
        t.build_psi(5).unwrap();
        assert!(t.var_g(6).is_err());
    }

    #[test]
    fn general_increment_matches_closed_psi() {
        let t = ExactTables::build_with_psi(300);
        for k in 1..=300usize {
            let general = mean_square_increment(k, t.nu(), 1.0 - t.nu()[k - 1]);
            assert!(
                close(general, t.psi()[k], 1e-9 * (1.0 + t.psi()[k])),
                "k={k}"
            );
        }
    }

    #[test]
    fn cutoff_variance_limits() {
        let t = ExactTables::build_with_psi(200);
        for n in [1u64, 5, 50, 200] {
            let full = t.var_g(n).unwrap();
            assert!(close(
                t.var_g_small(n, n).unwrap(),
                full,
                1e-9 * (1.0 + full)
            ));
            assert!(close(
                t.var_g_small(n, 10 * n).unwrap(),
                full,
                1e-9 * (1.0 + full)
            ));
            assert_eq!(t.var_g_small(n, 0).unwrap(), 0.0);
        }
        let c = t.cutoff_tables(20, 200).unwrap();
        for m in 0..=20usize {
            assert!(close(c.nu_small[m], t.nu()[m], 1e-12));
        }
        let all = c.var_g_small_all();
        assert!(close(all[150], c.var_g_small(150), 1e-9));
    }

    #[test]
    fn alpha_values() {
        assert!(close(alpha_closed(), 0.216_166_179_190_846_82, 1e-15));
        assert!(close(alpha_series(1), 1.0 / 3.0, 1e-15));
        let t = ExactTables::build(1000);
        let via_nu: f64 = 1.0 / 3.0
            + (2..=1000)
                .map(|n| {
                    let x = n as f64;
                    4.0 / (x * (x + 1.0) * (x + 2.0)) * (1.0 - t.nu()[n - 1])
                })
                .sum::<f64>();
        assert!(close(alpha_series_from(&t, 1000), via_nu, 1e-14));
        assert!((alpha_series(1_000_000) - alpha_closed()).abs() < 2e-5);
    }

    #[test]
    fn formatting() {
        assert_eq!(format_sig17(1.5), "1.5000000000000000");
        assert_eq!(format_sig17(-1.0 / 6.0), "-0.16666666666666666");
        assert_eq!(format_sig17(0.0), "0");
        assert_eq!(format_sig17(1e20), "1.0000000000000000e20");
    }

    #[test]
    fn csv_export() {
        let mut t = ExactTables::build(4);
        t.build_psi(3).unwrap();
        let csv = t.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "n,mu,nu,psi");
        assert_eq!(lines.len(), 6);
        assert!(lines[5].starts_with("4,-0.1666"));
        assert!(lines[5].ends_with(','));
    }
}
