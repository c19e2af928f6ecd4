//! Exact rational `μ`, `ν`, `ψ` for small sizes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const RATIONAL_NMAX: u64 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalTables {
    pub mu: Vec<BigRational>,
    pub nu: Vec<BigRational>,
    pub psi: Vec<BigRational>,
}

fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

impl RationalTables {
    pub fn build(nmax: u64) -> Result<Self> {
        if nmax > RATIONAL_NMAX {
            return Err(Error::Domain(format!(
                "exact rational tables are limited to n ≤ {RATIONAL_NMAX}, got {nmax}"
            )));
        }
        let len = nmax.max(1) as usize + 1;
        let mut mu = vec![BigRational::zero(); len];
        let mut nu = vec![BigRational::zero(); len];
        let mut s = BigRational::zero();
        for n in 1..len {
            mu[n] = if n == 1 {
                BigRational::one()
            } else {
                int(2) / int(n as u64) * (BigRational::one() - &nu[n - 1])
            };
            nu[n] = int(n as u64 + 1) * &s + &mu[n];
            s += int(2) * &mu[n] / (int(n as u64 + 1) * int(n as u64 + 2));
        }
        let mut psi = vec![BigRational::zero(); len];
        for k in 1..len {
            let mut acc = BigRational::zero();
            for j in 1..k.saturating_sub(1) {
                let d = &nu[j] + &nu[k - 1 - j] - &nu[k];
                acc += &d * &d;
            }
            let e = &nu[k] - BigRational::one();
            psi[k] = (acc + int(2) * &e * &e) / int(k as u64);
        }
        Ok(Self { mu, nu, psi })
    }

    pub fn to_f64(values: &[BigRational]) -> Vec<f64> {
        values
            .iter()
            .map(|x| x.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}
