//! Closed forms for the branching-process trees stopped by an exponential
//! clock of rate `λ` (`λ = 1` gives the limiting fringe tree).

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exact::tables::{CompensatedSum, ExactTables};

/// Stop criterion for series: absolute term below this value.
pub const SERIES_TOLERANCE: f64 = 1e-15;
pub const SERIES_MAX_TERMS: usize = 10_000;

/// A series value together with the number of terms summed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
}

/// Rising factorial `x (x+1) ⋯ (x+k-1)`; log-gamma differences once `k > 20`.
pub fn rising_factorial(x: f64, k: u64) -> f64 {
    if k <= 20 {
        (0..k).map(|i| x + i as f64).product()
    } else {
        ln_rising_factorial(x, k).exp()
    }
}

pub fn ln_rising_factorial(x: f64, k: u64) -> f64 {
    if k <= 20 {
        (0..k).map(|i| (x + i as f64).ln()).sum()
    } else {
        ln_gamma(x + k as f64) - ln_gamma(x)
    }
}

fn factorial(k: u64) -> f64 {
    rising_factorial(1.0, k)
}

/// `E f_k` for the fringe tree: `k(k+3)/((k+1)(k+2)) · 2^{k-1}/k!`.
pub fn e_fk_ct(k: u64) -> f64 {
    assert!(k >= 1, "chain length starts at 1");
    let kf = k as f64;
    kf * (kf + 3.0) / ((kf + 1.0) * (kf + 2.0)) * 2f64.powi(k as i32 - 1) / factorial(k)
}

/// Same value written as `2^{k-1}/k! - 2^k/(k+2)!`.
pub fn e_fk_ct_difference(k: u64) -> f64 {
    2f64.powi(k as i32 - 1) / factorial(k) - 2f64.powi(k as i32) / factorial(k + 2)
}

/// Probability that a fixed root chain `v_1 ⋯ v_k` with `gaps[i]` nodes
/// between consecutive members is green in the fringe tree:
/// `(k+3)/((k+1)(k+2)) Π_i (1/(i+2))^{ℓ_i + 1}`.
pub fn chain_green_prob(gaps: &[u64]) -> f64 {
    let k = gaps.len() as f64 + 1.0;
    let tail = (k + 3.0) / ((k + 1.0) * (k + 2.0));
    gaps.iter()
        .enumerate()
        .map(|(i, &l)| (1.0 / (i as f64 + 3.0)).powi(l as i32 + 1))
        .product::<f64>()
        * tail
}

/// `₁F₁(1; b; z) = Σ_j z^j / (b)^{(j)}`.
pub fn kummer_1f1_unit(b: f64, z: f64) -> Result<SeriesValue> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("1F1(1; b; z) needs b > 0, got {b}")));
    }
    let mut term = 1.0;
    let mut acc = CompensatedSum::default();
    for j in 0..SERIES_MAX_TERMS {
        acc.add(term);
        term *= z / (b + j as f64);
        if term.abs() < SERIES_TOLERANCE && (j as f64 + b) > z.abs() {
            return Ok(SeriesValue {
                value: acc.value(),
                terms: j + 1,
            });
        }
    }
    Err(Error::NonConvergence {
        terms: SERIES_MAX_TERMS,
    })
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "clock rate must be positive, got {lambda}"
        )))
    }
}

/// `E f_k(T^λ) = λ (2^{k-1}/λ^{(k)} - 2^k/λ^{(k+2)})`.
///
/// The factor `λ` is the chance that the doomsday clock, of rate `λ`, is the
/// one that stops the growth; it disappears at `λ = 1`.
pub fn e_fk_ct_lambda(k: u64, lambda: f64) -> Result<f64> {
    Ok(lambda * e_fk_ct_lambda_displayed(k, lambda)?)
}

/// `2^{k-1}/λ^{(k)} - 2^k/λ^{(k+2)}` without the leading `λ`, as it is
/// often written. Equal to [`e_fk_ct_lambda`] only at `λ = 1`.
pub fn e_fk_ct_lambda_displayed(k: u64, lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    if k == 0 {
        return Err(Error::Domain("chain length starts at 1".into()));
    }
    if k <= 20 {
        return Ok(2f64.powi(k as i32 - 1) / rising_factorial(lambda, k)
            - 2f64.powi(k as i32) / rising_factorial(lambda, k + 2));
    }
    let ln2 = std::f64::consts::LN_2;
    let a = ((k - 1) as f64 * ln2 - ln_rising_factorial(lambda, k)).exp();
    let b = (k as f64 * ln2 - ln_rising_factorial(lambda, k + 2)).exp();
    Ok(a - b)
}

/// `E f(T^λ) = λ (1/4 + (λ-1)/(2λ(λ+1)) - ₁F₁(1; λ; -2)/4)`.
pub fn e_f_ct_lambda(lambda: f64) -> Result<f64> {
    Ok(lambda * e_f_ct_lambda_displayed(lambda)?)
}

/// `1/4 + (λ-1)/(2λ(λ+1)) - ₁F₁(1; λ; -2)/4`, the alternating sum of
/// [`e_fk_ct_lambda_displayed`].
pub fn e_f_ct_lambda_displayed(lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    let m = kummer_1f1_unit(lambda, -2.0)?;
    Ok(0.25 + (lambda - 1.0) / (2.0 * lambda * (lambda + 1.0)) - 0.25 * m.value)
}

/// `E F(T^λ) = (λ+1)/(λ-1) E f(T^λ)`, finite only for `λ > 1`.
pub fn e_big_f_ct_lambda(lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    if lambda <= 1.0 {
        return Err(Error::Domain(format!("E F(T^λ) needs λ > 1, got {lambda}")));
    }
    Ok((lambda + 1.0) / (lambda - 1.0) * e_f_ct_lambda(lambda)?)
}

/// `P(|T^λ| = n) = λ n! / (2+λ)^{(n)}`.
pub fn ct_lambda_size_pmf(lambda: f64, n: u64) -> Result<f64> {
    check_rate(lambda)?;
    if n == 0 {
        return Ok(0.0);
    }
    if n <= 20 {
        Ok(lambda * factorial(n) / rising_factorial(2.0 + lambda, n))
    } else {
        Ok(lambda * (ln_gamma(n as f64 + 1.0) - ln_rising_factorial(2.0 + lambda, n)).exp())
    }
}

/// `|Σ_{n ≤ trunc} P(|T^λ| = n) ν_n - E F(T^λ)|`.
pub fn genfunc_residual(lambda: f64, trunc: u64, tables: &ExactTables) -> Result<f64> {
    let target = e_big_f_ct_lambda(lambda)?;
    if tables.nmax() < trunc {
        return Err(Error::TableTooShort {
            needed: trunc,
            have: tables.nmax(),
        });
    }
    let nu = tables.nu();
    let mut acc = CompensatedSum::default();
    // P(n) = P(n-1) · n / (n + 1 + λ)
    let mut pmf = ct_lambda_size_pmf(lambda, 1)?;
    for n in 1..=trunc {
        if n > 1 {
            pmf *= n as f64 / (n as f64 + 1.0 + lambda);
        }
        acc.add(pmf * nu[n as usize]);
    }
    Ok((acc.value() - target).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::alpha_closed;

    #[test]
    fn chain_expectations() {
        assert!((e_fk_ct(1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((e_fk_ct(2) - 5.0 / 6.0).abs() < 1e-15);
        for k in 1..=30 {
            let a = e_fk_ct(k);
            assert!((a - e_fk_ct_difference(k)).abs() <= 1e-15 * a.max(1e-300) + 1e-300);
        }
        let alt: f64 = (1..=30)
            .map(|k| if k % 2 == 1 { e_fk_ct(k) } else { -e_fk_ct(k) })
            .sum();
        assert!((alt - alpha_closed()).abs() < 1e-12);
    }

    #[test]
    fn chain_probability() {
        assert!((chain_green_prob(&[]) - 2.0 / 3.0).abs() < 1e-15);
        assert!((chain_green_prob(&[0]) - 5.0 / 36.0).abs() < 1e-15);
        // 2^{ℓ+1} chains per gap, summed over ℓ
        let s: f64 = (0..200)
            .map(|l| 2f64.powi(l as i32 + 1) * chain_green_prob(&[l]))
            .sum();
        assert!((s - 5.0 / 6.0).abs() < 1e-12);
        let s3: f64 = (0..120)
            .flat_map(|a| (0..120).map(move |b| (a, b)))
            .map(|(a, b)| 2f64.powi((a + b + 2) as i32) * chain_green_prob(&[a, b]))
            .sum();
        assert!((s3 - e_fk_ct(3)).abs() < 1e-12);
    }

    #[test]
    fn kummer_values() {
        let e = kummer_1f1_unit(1.0, -2.0).unwrap();
        assert!((e.value - (-2.0f64).exp()).abs() < 1e-15);
        let two = kummer_1f1_unit(2.0, -2.0).unwrap().value;
        assert!((two - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
        assert_eq!(kummer_1f1_unit(3.0, 0.0).unwrap().value, 1.0);
        assert!(kummer_1f1_unit(0.0, 1.0).is_err());
        assert_eq!(
            kummer_1f1_unit(1.0, 1e6),
            Err(Error::NonConvergence {
                terms: SERIES_MAX_TERMS
            })
        );
    }

    #[test]
    fn lambda_formulas() {
        assert!((e_f_ct_lambda(1.0).unwrap() - alpha_closed()).abs() < 1e-12);
        for k in 1..=10 {
            assert!((e_fk_ct_lambda(k, 1.0).unwrap() - e_fk_ct(k)).abs() < 1e-12);
        }
        for k in 18..=24 {
            let a = e_fk_ct_lambda(k, 1.0).unwrap();
            assert!((a - e_fk_ct(k)).abs() <= 1e-10 * e_fk_ct(k));
        }
        for n in 1..=20 {
            let p = ct_lambda_size_pmf(1.0, n).unwrap();
            assert!((p - 2.0 / ((n as f64 + 1.0) * (n as f64 + 2.0))).abs() < 1e-15);
        }
        let p21 = ct_lambda_size_pmf(1.0, 21).unwrap();
        assert!((p21 - 2.0 / (22.0 * 23.0)).abs() < 1e-12 * p21);
        assert!((ct_lambda_size_pmf(2.0, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!(e_big_f_ct_lambda(1.0).is_err());
        assert!(e_f_ct_lambda(-1.0).is_err());
        assert_eq!(e_f_ct_lambda(1.0), e_f_ct_lambda_displayed(1.0));
        let d = e_fk_ct_lambda_displayed(3, 2.5).unwrap();
        assert!((e_fk_ct_lambda(3, 2.5).unwrap() - 2.5 * d).abs() < 1e-15);
        // large λ: the tree is a single node, so f = 1 and f_1 = 1
        assert!((e_f_ct_lambda(1e4).unwrap() - 1.0).abs() < 1e-3);
        assert!((e_fk_ct_lambda(1, 1e4).unwrap() - 1.0).abs() < 1e-3);
        // alternating chain sum reproduces the closed form at other rates
        for lambda in [0.5, 2.0, 3.5] {
            let alt: f64 = (1..=60)
                .map(|k| {
                    let v = e_fk_ct_lambda(k, lambda).unwrap();
                    if k % 2 == 1 {
                        v
                    } else {
                        -v
                    }
                })
                .sum();
            assert!(
                (alt - e_f_ct_lambda(lambda).unwrap()).abs() < 1e-12,
                "λ={lambda}"
            );
        }
        let total: f64 = (1..=20_000)
            .map(|n| ct_lambda_size_pmf(2.0, n).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-3);
    }

    #[test]
    fn generating_function_residuals() {
        let tables = ExactTables::build(100_000);
        assert!(genfunc_residual(3.0, 100_000, &tables).unwrap() < 1e-3);
        assert!(genfunc_residual(10.0, 1_000, &tables).unwrap() < 1e-8);
        let r1 = genfunc_residual(2.0, 10_000, &tables).unwrap();
        let r2 = genfunc_residual(2.0, 20_000, &tables).unwrap();
        let ratio = r2 / r1;
        assert!((0.4..0.6).contains(&ratio), "ratio {ratio}");
        assert!(genfunc_residual(1.0, 10, &tables).is_err());
    }
}
