//! Per-tree functionals on a materialized [`BinaryTree`].
//!
//! A node is green when it has at most one child; in the phylogenetic tree it
//! is the parent of an external node and so carries a clade. `F(T)` counts the
//! green nodes with no green ancestor, i.e. the maximal clades.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::ExactTables;
use crate::tree::{BinaryTree, NodeId, Subtree};

/// Hard limit on chain depth; binomials beyond it are not tracked.
pub const MAX_CHAIN_DEPTH: usize = 64;

/// Green-node counts by subtree size. Entry `k` is the number of clades of
/// `k + 1` external nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CladeCensus {
    pub n: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl CladeCensus {
    pub fn get(&self, k: u64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// Number of green nodes.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Green nodes whose subtree has more than `cutoff` nodes.
    pub fn tail(&self, cutoff: u64) -> u64 {
        match cutoff.checked_add(1) {
            Some(lo) => self.counts.range(lo..).map(|(_, c)| c).sum(),
            None => 0,
        }
    }
}

/// Green chain counts: `any[k-1]` is `F_k`, `rooted[k-1]` is `f_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChainCounts {
    pub depth: usize,
    pub any: Vec<u64>,
    pub rooted: Vec<u64>,
    /// A binomial saturated at `u64::MAX`.
    pub overflow: bool,
}

impl ChainCounts {
    /// `Σ_k (-1)^{k-1} F_k`.
    pub fn alternating_any(&self) -> i128 {
        alternating(&self.any)
    }

    /// `Σ_k (-1)^{k-1} f_k`.
    pub fn alternating_rooted(&self) -> i128 {
        alternating(&self.rooted)
    }
}

fn alternating(xs: &[u64]) -> i128 {
    xs.iter()
        .enumerate()
        .map(|(i, &x)| if i % 2 == 0 { x as i128 } else { -(x as i128) })
        .sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Decomposition {
    pub cutoff: u64,
    pub f: i64,
    pub g: f64,
    pub h: f64,
    /// Number of maximal small clades, `X^N`.
    pub f_small: i64,
    pub f_large: i64,
    pub g_small: f64,
    pub g_large: f64,
    pub h_small: f64,
    pub h_large: f64,
}

/// Green root. The empty tree has none.
pub fn is_green(t: Subtree<'_>) -> bool {
    t.has_green_root()
}

/// `F(T_v)` for every node, by one reverse pre-order sweep.
pub fn subtree_f(tree: &BinaryTree) -> Vec<u64> {
    let mut f = vec![0u64; tree.len()];
    for v in tree.preorder().rev() {
        f[v as usize] = if tree.is_green(v) {
            1
        } else {
            let l = tree.left(v).expect("two children");
            let r = tree.right(v).expect("two children");
            f[l as usize] + f[r as usize]
        };
    }
    f
}

/// `F(T)`: number of maximal green nodes.
pub fn count_f(t: Subtree<'_>) -> u64 {
    let Some(root) = t.root() else {
        return 0;
    };
    let tree = t.tree();
    let mut total = 0;
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        if tree.is_green(v) {
            total += 1;
        } else {
            stack.extend(tree.right(v));
            stack.extend(tree.left(v));
        }
    }
    total
}

/// The toll `f(T) = F(T) - F(T_L) - F(T_R)`.
pub fn toll_f(t: Subtree<'_>) -> i64 {
    if t.is_empty() {
        return 0;
    }
    let (l, r) = (t.left(), t.right());
    match (l.is_empty(), r.is_empty()) {
        (true, true) => 1,
        (true, false) => 1 - count_f(r) as i64,
        (false, true) => 1 - count_f(l) as i64,
        (false, false) => 0,
    }
}

/// Tolls `f(T_v)` for every node in pre-order, in linear time.
pub fn tolls(tree: &BinaryTree) -> Vec<i64> {
    let fv = subtree_f(tree);
    tree.preorder()
        .map(|v| {
            let child_f = |c: Option<NodeId>| c.map_or(0, |c| fv[c as usize] as i64);
            fv[v as usize] as i64 - child_f(tree.left(v)) - child_f(tree.right(v))
        })
        .collect()
}

/// Additive functional `Σ_{v ∈ T} toll(T_v)`.
pub fn sum_additive<V, F>(tree: &BinaryTree, mut toll: F) -> V
where
    V: std::iter::Sum<V>,
    F: FnMut(Subtree<'_>) -> V,
{
    tree.preorder().map(|v| toll(tree.subtree(v))).sum()
}

/// Flags nodes that are green and have no flagged strict ancestor, where only
/// nodes passing `eligible` can be flagged.
fn topmost_green(tree: &BinaryTree, eligible: impl Fn(NodeId) -> bool) -> Vec<bool> {
    let mut covered = vec![false; tree.len()];
    let mut top = vec![false; tree.len()];
    for v in tree.preorder() {
        let c = covered[v as usize];
        let mark = !c && tree.is_green(v) && eligible(v);
        top[v as usize] = mark;
        for ch in [tree.left(v), tree.right(v)].into_iter().flatten() {
            covered[ch as usize] = c || mark;
        }
    }
    top
}

/// Subtree sizes of the maximal green nodes, in pre-order.
pub fn maximal_green(tree: &BinaryTree) -> Vec<u32> {
    let top = topmost_green(tree, |_| true);
    tree.preorder()
        .filter(|&v| top[v as usize])
        .map(|v| tree.size(v))
        .collect()
}

pub fn clade_census(tree: &BinaryTree) -> CladeCensus {
    let mut counts = BTreeMap::new();
    for v in tree.preorder().filter(|&v| tree.is_green(v)) {
        *counts.entry(tree.size(v) as u64).or_insert(0) += 1;
    }
    CladeCensus {
        n: tree.len() as u64,
        counts,
    }
}

/// `X^N`: green nodes of size at most `cutoff` with no such green ancestor.
pub fn count_f_small(tree: &BinaryTree, cutoff: u64) -> u64 {
    let top = topmost_green(tree, |v| tree.size(v) as u64 <= cutoff);
    top.iter().filter(|&&b| b).count() as u64
}

/// `X^N` as the additive functional with toll `f(T) 1{|T| ≤ cutoff}`.
pub fn count_f_small_by_tolls(tree: &BinaryTree, cutoff: u64) -> i64 {
    tolls(tree)
        .into_iter()
        .zip(tree.preorder())
        .filter(|&(_, v)| tree.size(v) as u64 <= cutoff)
        .map(|(f, _)| f)
        .sum()
}

/// Splits `F`, `X^N` and the `G`/`H` parts of the toll at `cutoff`.
///
/// `g(T) = 1 - ν_{|T|-1}` at green nodes (0 elsewhere) and
/// `h(T) = ν_{|C|} - F(C)` where `C` is the only possibly nonempty child of a
/// green root; `f = g + h`.
pub fn decompose(tree: &BinaryTree, tables: &ExactTables, cutoff: u64) -> Result<Decomposition> {
    let n = tree.len() as u64;
    if tables.nmax() < n {
        return Err(Error::TableTooShort {
            needed: n,
            have: tables.nmax(),
        });
    }
    let nu = tables.nu();
    let fv = subtree_f(tree);
    let toll = tolls(tree);
    let mut d = Decomposition {
        cutoff,
        ..Default::default()
    };
    for v in tree.preorder() {
        let size = tree.size(v) as u64;
        let small = size <= cutoff;
        let (g, h) = if tree.is_green(v) {
            let child = tree.left(v).or(tree.right(v));
            let (cs, cf) = child.map_or((0, 0), |c| (tree.size(c) as usize, fv[c as usize]));
            (1.0 - nu[size as usize - 1], nu[cs] - cf as f64)
        } else {
            (0.0, 0.0)
        };
        let f = toll[v as usize];
        d.f += f;
        d.g += g;
        d.h += h;
        if small {
            d.f_small += f;
            d.g_small += g;
            d.h_small += h;
        } else {
            d.f_large += f;
            d.g_large += g;
            d.h_large += h;
        }
    }
    Ok(d)
}

/// `C(d, j)` for `j < len`, saturating at `u64::MAX`.
pub(crate) fn binomial_row(d: u64, len: usize, out: &mut [u64]) -> bool {
    let mut overflow = false;
    let mut c: u128 = 1;
    for (j, slot) in out.iter_mut().enumerate().take(len) {
        let j = j as u64;
        if j > d {
            *slot = 0;
            continue;
        }
        if j > 0 && !overflow {
            c = c * (d - j + 1) as u128 / j as u128;
            if c > u64::MAX as u128 {
                overflow = true;
            }
        }
        *slot = if overflow { u64::MAX } else { c as u64 };
    }
    overflow
}

/// Green chain counts `F_k`, `f_k` for `k = 1..=depth`.
pub fn count_chains(tree: &BinaryTree, depth: usize) -> Result<ChainCounts> {
    if depth == 0 || depth > MAX_CHAIN_DEPTH {
        return Err(Error::InvalidConfig(format!(
            "chain depth must be in 1..={MAX_CHAIN_DEPTH}, got {depth}"
        )));
    }
    let mut out = ChainCounts {
        depth,
        any: vec![0; depth],
        rooted: vec![0; depth],
        overflow: false,
    };
    let Some(root) = tree.root() else {
        return Ok(out);
    };
    let root_green = tree.is_green(root);
    // green strict ancestors of each node
    let mut above = vec![0u64; tree.len()];
    let mut row = vec![0u64; depth];
    for v in tree.preorder() {
        let d = above[v as usize];
        let green = tree.is_green(v);
        if green {
            out.overflow |= binomial_row(d, depth, &mut row);
            for (acc, c) in out.any.iter_mut().zip(&row) {
                *acc = acc.saturating_add(*c);
            }
            if root_green && v != root {
                out.overflow |= binomial_row(d - 1, depth - 1, &mut row);
                for (acc, c) in out.rooted[1..].iter_mut().zip(&row) {
                    *acc = acc.saturating_add(*c);
                }
            }
        }
        let below = d + green as u64;
        for c in [tree.left(v), tree.right(v)].into_iter().flatten() {
            above[c as usize] = below;
        }
    }
    if root_green {
        out.rooted[0] = 1;
    }
    Ok(out)
}
