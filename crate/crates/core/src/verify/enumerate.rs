//! Exhaustive enumeration of binary search tree shapes with their
//! probabilities, used as an oracle for the exact recursions.

use std::collections::BTreeMap;

use crate::functionals::{clade_census, count_f};
use crate::tree::BinaryTree;

/// Pre-order left-size codes of every shape with `n` nodes, for each size up
/// to `nmax`.
pub fn shape_codes(nmax: usize) -> Vec<Vec<Vec<u32>>> {
    let mut all: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new()]];
    for n in 1..=nmax {
        let mut shapes = Vec::new();
        for l in 0..n {
            for a in &all[l] {
                for b in &all[n - 1 - l] {
                    let mut code = Vec::with_capacity(n);
                    code.push(l as u32);
                    code.extend_from_slice(a);
                    code.extend_from_slice(b);
                    shapes.push(code);
                }
            }
        }
        all.push(shapes);
    }
    all
}

/// Distribution facts for one size, accumulated over all shapes.
#[derive(Clone, Debug, Default)]
pub struct Enumerated {
    pub n: usize,
    pub shapes: usize,
    pub total_probability: f64,
    /// `P(F = m)`.
    pub f_law: BTreeMap<u64, f64>,
    /// `E #{green v : |T_v| = k}`.
    pub green_by_size: BTreeMap<u64, f64>,
}

impl Enumerated {
    pub fn mean_f(&self) -> f64 {
        self.f_law.iter().map(|(&m, &p)| m as f64 * p).sum()
    }

    pub fn var_f(&self) -> f64 {
        let mean = self.mean_f();
        self.f_law
            .iter()
            .map(|(&m, &p)| (m as f64 - mean).powi(2) * p)
            .sum()
    }

    pub fn f_prob(&self, m: u64) -> f64 {
        self.f_law.get(&m).copied().unwrap_or(0.0)
    }

    pub fn zk(&self, k: u64) -> f64 {
        self.green_by_size.get(&k).copied().unwrap_or(0.0)
    }
}

/// Enumerates every shape of size `1..=nmax`, weighting each by the product
/// of `1/|T_v|` over its nodes.
pub fn enumerate(nmax: usize) -> Vec<Enumerated> {
    let codes = shape_codes(nmax);
    let mut out = Vec::with_capacity(nmax + 1);
    for (n, shapes) in codes.iter().enumerate() {
        let mut e = Enumerated {
            n,
            shapes: shapes.len(),
            ..Default::default()
        };
        for code in shapes {
            let tree = BinaryTree::from_left_sizes(code).expect("valid code");
            let p = tree.bst_probability();
            e.total_probability += p;
            *e.f_law.entry(count_f(tree.whole())).or_insert(0.0) += p;
            for (k, c) in clade_census(&tree).counts {
                *e.green_by_size.entry(k).or_insert(0.0) += p * c as f64;
            }
        }
        out.push(e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_counts() {
        let counts: Vec<usize> = shape_codes(8).iter().map(|s| s.len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14, 42, 132, 429, 1430]);
    }

    #[test]
    fn n3_by_hand() {
        let e = &enumerate(3)[3];
        assert!((e.total_probability - 1.0).abs() < 1e-15);
        assert!((e.f_prob(2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.zk(1) - 4.0 / 3.0).abs() < 1e-15);
        assert!((e.var_f() - 2.0 / 9.0).abs() < 1e-15);
    }
}
