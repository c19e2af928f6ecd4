//! Expected clade census of `T_n`.

/// Expected number of nodes `v` with `|T_{n,v}| = k`.
pub fn expected_subtree_count(n: u64, k: u64) -> f64 {
    match k {
        0 => 0.0,
        k if k < n => 2.0 * (n as f64 + 1.0) / ((k as f64 + 1.0) * (k as f64 + 2.0)),
        k if k == n => 1.0,
        _ => 0.0,
    }
}

/// Probability that the root of `T_k` is green.
pub fn green_root_probability(k: u64) -> f64 {
    match k {
        0 => 0.0,
        1 => 1.0,
        k => 2.0 / k as f64,
    }
}

/// `E Z_{n,k}`: expected number of green nodes with `k` nodes below them
/// (clades of `k + 1` external nodes), counting subtrees by size and
/// conditioning on a green root.
pub fn expected_zk(n: u64, k: u64) -> f64 {
    expected_subtree_count(n, k) * green_root_probability(k)
}

/// The closed form `4n/(k(k+1)(k+2))` for `k < n`, `2/n` for `k = n`, as
/// usually quoted for clade sizes. It differs from [`expected_zk`] at small
/// sizes and at `k = 1`.
pub fn expected_zk_quoted(n: u64, k: u64) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    match k {
        0 => 0.0,
        k if k < n => 4.0 * nf / (kf * (kf + 1.0) * (kf + 2.0)),
        k if k == n => 2.0 / nf,
        _ => 0.0,
    }
}

/// `Σ_{k > cutoff} E Z_{n,k}`, a bound on `P(X_n ≠ X_n^N)`.
pub fn expected_large_clades(n: u64, cutoff: u64) -> f64 {
    (cutoff + 1..=n).map(|k| expected_zk(n, k)).sum()
}
