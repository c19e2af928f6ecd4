//! Functionals evaluated straight from split decisions.
//!
//! The evaluator asks a [`SplitSource`] for the left-subtree size of each node
//! in pre-order (left before right). Every statistic is accumulated on the
//! way down, so the explicit stack holds only subtrees still to visit: memory
//! is `O(depth)` and no tree is built. Fed from a
//! random source it samples the binary search tree on the fly; fed from
//! [`TreeSplits`] it replays a materialized tree. The random source consumes
//! the stream exactly like [`crate::tree::gen_bst_split`], so both routes see
//! the same tree for the same [`RngStream`].

use rand::Rng;

use crate::error::{Error, Result};
use crate::functionals::{binomial_row, ChainCounts, CladeCensus, MAX_CHAIN_DEPTH};
use crate::rng::{draw_left_size, RngStream};
use crate::tree::{BinaryTree, NodeId};

pub trait SplitSource {
    /// Left-subtree size of the next node in pre-order, which has `size` nodes.
    fn left_size(&mut self, size: u64) -> u64;
}

pub struct RandomSplits<'a, R: ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> SplitSource for RandomSplits<'_, R> {
    #[inline]
    fn left_size(&mut self, size: u64) -> u64 {
        draw_left_size(self.0, size)
    }
}

/// Replays the splits of a materialized tree.
pub struct TreeSplits<'a> {
    tree: &'a BinaryTree,
    next: NodeId,
}

impl<'a> TreeSplits<'a> {
    pub fn new(tree: &'a BinaryTree) -> Self {
        Self { tree, next: 0 }
    }
}

impl SplitSource for TreeSplits<'_> {
    fn left_size(&mut self, size: u64) -> u64 {
        let v = self.next;
        debug_assert_eq!(self.tree.size(v) as u64, size);
        self.next += 1;
        self.tree.left_size(v) as u64
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StreamConfig<'a> {
    /// Small-clade cutoff `N`; subtrees with at most `N` nodes are small.
    pub cutoff: u64,
    /// Number of chain orders to count; 0 disables chain counting.
    pub chain_depth: usize,
    /// `ν_0..=ν_n`, required for the `G`/`H` parts.
    pub nu: Option<&'a [f64]>,
    pub census: bool,
}

impl Default for StreamConfig<'_> {
    fn default() -> Self {
        Self {
            cutoff: u64::MAX,
            chain_depth: 0,
            nu: None,
            census: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GhParts {
    pub g: f64,
    pub h: f64,
    pub g_small: f64,
    pub g_large: f64,
    pub h_small: f64,
    pub h_large: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StreamStats {
    pub size: u64,
    pub height: u64,
    /// `F(T)` by the maximal-green recursion.
    pub f: u64,
    /// `Σ_v f(T_v)`.
    pub toll_sum: i64,
    /// `f(T)` for the whole tree.
    pub toll_root: i64,
    /// `X^N` by its direct definition.
    pub f_small: u64,
    /// `Σ_v f(T_v) 1{|T_v| ≤ N}`.
    pub toll_small_sum: i64,
    /// Green nodes with more than `N` nodes below them (large clades).
    pub large_green: u64,
    pub gh: Option<GhParts>,
    pub chains: Option<ChainCounts>,
    pub census: Option<CladeCensus>,
}

/// A subtree waiting to be visited, with what the walk knows about its
/// ancestors.
#[derive(Clone, Copy, Debug)]
struct Pending {
    size: u32,
    depth: u32,
    /// Green strict ancestors.
    above: u32,
    /// Some green strict ancestor is small.
    small_above: bool,
}

/// Reusable evaluator; keeps its stack and binomial cache between runs.
pub struct StreamEvaluator<'a> {
    cfg: StreamConfig<'a>,
    stack: Vec<Pending>,
    pascal: Vec<u64>,
    pascal_overflow: Vec<bool>,
}

impl<'a> StreamEvaluator<'a> {
    pub fn new(cfg: StreamConfig<'a>) -> Result<Self> {
        if cfg.chain_depth > MAX_CHAIN_DEPTH {
            return Err(Error::InvalidConfig(format!(
                "chain depth must be at most {MAX_CHAIN_DEPTH}, got {}",
                cfg.chain_depth
            )));
        }
        Ok(Self {
            cfg,
            stack: Vec::new(),
            pascal: Vec::new(),
            pascal_overflow: Vec::new(),
        })
    }

    /// Row `C(d, 0..K)` of the binomial cache.
    fn binomials(&mut self, d: u64) -> (&[u64], bool) {
        let k = self.cfg.chain_depth;
        while (self.pascal_overflow.len() as u64) <= d {
            let row_d = self.pascal_overflow.len() as u64;
            let start = self.pascal.len();
            self.pascal.resize(start + k, 0);
            let ovf = binomial_row(row_d, k, &mut self.pascal[start..]);
            self.pascal_overflow.push(ovf);
        }
        let start = d as usize * k;
        (
            &self.pascal[start..start + k],
            self.pascal_overflow[d as usize],
        )
    }

    /// Adds the chains ending at a green node with `above` green ancestors.
    fn add_chains(&mut self, ch: &mut ChainCounts, above: u32, is_root: bool, root_green: bool) {
        let (row, ovf) = self.binomials(above as u64);
        ch.overflow |= ovf;
        for (acc, c) in ch.any.iter_mut().zip(row) {
            *acc = acc.saturating_add(*c);
        }
        if root_green && !is_root {
            let (row, ovf) = self.binomials(above as u64 - 1);
            ch.overflow |= ovf;
            for (acc, c) in ch.rooted[1..].iter_mut().zip(row) {
                *acc = acc.saturating_add(*c);
            }
        }
    }

    /// Walks the tree in pre-order. Everything is accumulated top-down: a
    /// green node adds 1 to its own toll and takes 1 from the toll of its
    /// nearest green ancestor, whose child contains it.
    pub fn run<S: SplitSource + ?Sized>(&mut self, n: u64, src: &mut S) -> Result<StreamStats> {
        if n > u32::MAX as u64 {
            return Err(Error::InvalidConfig(format!(
                "tree size must fit in 32 bits, got {n}"
            )));
        }
        if let Some(nu) = self.cfg.nu {
            if (nu.len() as u64) <= n {
                return Err(Error::TableTooShort {
                    needed: n,
                    have: nu.len() as u64 - 1,
                });
            }
        }
        let k = self.cfg.chain_depth;
        let cutoff = self.cfg.cutoff;
        let nu = self.cfg.nu;
        let mut chains = (k > 0).then(|| ChainCounts {
            depth: k,
            any: vec![0; k],
            rooted: vec![0; k],
            overflow: false,
        });
        let mut census = self.cfg.census.then(|| vec![0u64; n as usize + 1]);
        let mut gh = nu.map(|_| GhParts::default());
        let mut st = StreamStats {
            size: n,
            ..Default::default()
        };
        let mut root_green = false;
        // green nodes whose nearest green ancestor is the root
        let mut under_root = 0i64;

        self.stack.clear();
        if n > 0 {
            self.stack.push(Pending {
                size: n as u32,
                depth: 1,
                above: 0,
                small_above: false,
            });
        }
        while let Some(p) = self.stack.pop() {
            let left = src.left_size(p.size as u64) as u32;
            let right = p.size - 1 - left;
            let green = left == 0 || right == 0;
            let small = p.size as u64 <= cutoff;
            st.height = st.height.max(p.depth as u64);
            if p.depth == 1 {
                root_green = green;
            }
            if green {
                st.f += (p.above == 0) as u64;
                st.f_small += (small && !p.small_above) as u64;
                st.large_green += !small as u64;
                st.toll_sum += 1 - (p.above > 0) as i64;
                st.toll_small_sum += small as i64 - p.small_above as i64;
                under_root += (root_green && p.above == 1) as i64;
                if let Some(c) = census.as_mut() {
                    c[p.size as usize] += 1;
                }
                if let (Some(parts), Some(nu)) = (gh.as_mut(), nu) {
                    let nu_child = nu[p.size as usize - 1];
                    let g = 1.0 - nu_child;
                    if small {
                        parts.g_small += g;
                        parts.h_small += nu_child;
                    } else {
                        parts.g_large += g;
                        parts.h_large += nu_child;
                    }
                    if p.small_above {
                        parts.h_small -= 1.0;
                    } else if p.above > 0 {
                        parts.h_large -= 1.0;
                    }
                }
                if let Some(ch) = chains.as_mut() {
                    self.add_chains(ch, p.above, p.depth == 1, root_green);
                }
            }
            let child = Pending {
                size: 0,
                depth: p.depth + 1,
                above: p.above + green as u32,
                small_above: p.small_above || (green && small),
            };
            if right > 0 {
                self.stack.push(Pending {
                    size: right,
                    ..child
                });
            }
            if left > 0 {
                self.stack.push(Pending {
                    size: left,
                    ..child
                });
            }
        }
        if n > 0 {
            st.toll_root = if root_green { 1 - under_root } else { 0 };
        }
        if let Some(parts) = gh.as_mut() {
            parts.g = parts.g_small + parts.g_large;
            parts.h = parts.h_small + parts.h_large;
        }
        if let Some(ch) = chains.as_mut() {
            ch.rooted[0] = root_green as u64;
        }
        st.gh = gh;
        st.chains = chains;
        st.census = census.map(|c| CladeCensus {
            n,
            counts: c
                .into_iter()
                .enumerate()
                .filter(|&(_, x)| x > 0)
                .map(|(k, x)| (k as u64, x))
                .collect(),
        });
        Ok(st)
    }
}

/// Samples one random binary search tree of `n` nodes from `stream` and
/// evaluates it without materializing it.
pub fn stream_bst(n: u64, stream: RngStream, cfg: StreamConfig<'_>) -> Result<StreamStats> {
    let mut rng = stream.rng();
    StreamEvaluator::new(cfg)?.run(n, &mut RandomSplits(&mut rng))
}

/// Evaluates a materialized tree through the streaming path.
pub fn stream_tree(tree: &BinaryTree, cfg: StreamConfig<'_>) -> Result<StreamStats> {
    StreamEvaluator::new(cfg)?.run(tree.len() as u64, &mut TreeSplits::new(tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactTables;
    use crate::functionals::{
        clade_census, count_chains, count_f, count_f_small, decompose, toll_f,
    };
    use crate::tree::{gen_bst_split, Side};

    #[test]
    fn empty_tree() {
        let s = stream_tree(
            &BinaryTree::empty(),
            StreamConfig {
                chain_depth: 3,
                census: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((s.f, s.toll_root, s.f_small, s.height), (0, 0, 0, 0));
        assert_eq!(s.chains.unwrap().any, vec![0; 3]);
        assert_eq!(s.census.unwrap().total(), 0);
    }

    #[test]
    fn path_of_three() {
        let t = BinaryTree::path(3, Side::Right);
        let s = stream_tree(
            &t,
            StreamConfig {
                cutoff: 2,
                chain_depth: 4,
                census: true,
                nu: None,
            },
        )
        .unwrap();
        assert_eq!(s.f, 1);
        assert_eq!(s.toll_root, 0);
        assert_eq!(s.f_small, 1);
        assert_eq!(s.toll_small_sum, 1);
        assert_eq!(s.large_green, 1);
        assert_eq!(s.height, 3);
        let ch = s.chains.unwrap();
        assert_eq!(ch.any, vec![3, 3, 1, 0]);
        assert_eq!(ch.rooted, vec![1, 2, 1, 0]);
    }

    #[test]
    fn matches_materialized_tree_on_the_same_stream() {
        let tables = ExactTables::build(400);
        for r in 0..200 {
            let n = 1 + (r * 7919) % 400;
            let stream = RngStream::new(99, r);
            let tree = gen_bst_split(n as u32, &mut stream.rng());
            let cutoff = (n as f64).sqrt().ceil() as u64;
            let cfg = StreamConfig {
                cutoff,
                chain_depth: 8,
                nu: Some(tables.nu()),
                census: true,
            };
            let s = stream_bst(n, stream, cfg).unwrap();
            assert_eq!(s, stream_tree(&tree, cfg).unwrap());
            assert_eq!(s.f, count_f(tree.whole()));
            assert_eq!(s.toll_sum, s.f as i64);
            assert_eq!(s.toll_root, toll_f(tree.whole()));
            assert_eq!(s.f_small, count_f_small(&tree, cutoff));
            assert_eq!(s.toll_small_sum, s.f_small as i64);
            assert_eq!(s.height, tree.height() as u64);
            assert_eq!(s.chains.as_ref().unwrap(), &count_chains(&tree, 8).unwrap());
            let census = clade_census(&tree);
            assert_eq!(s.large_green, census.tail(cutoff));
            assert_eq!(s.census.as_ref().unwrap(), &census);
            let d = decompose(&tree, &tables, cutoff).unwrap();
            let gh = s.gh.unwrap();
            assert!((gh.g - d.g).abs() < 1e-9 && (gh.h - d.h).abs() < 1e-9);
            assert!((gh.g_small - d.g_small).abs() < 1e-9);
            assert!((gh.h_large - d.h_large).abs() < 1e-9);
        }
    }

    #[test]
    fn short_table_is_rejected() {
        let tables = ExactTables::build(5);
        let cfg = StreamConfig {
            nu: Some(tables.nu()),
            ..Default::default()
        };
        assert!(matches!(
            stream_bst(6, RngStream::new(0, 0), cfg),
            Err(Error::TableTooShort { needed: 6, have: 5 })
        ));
    }

    #[test]
    fn very_deep_tree_streams() {
        let t = BinaryTree::path(1_000_000, Side::Left);
        let s = stream_tree(
            &t,
            StreamConfig {
                chain_depth: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.f, 1);
        assert_eq!(s.height, 1_000_000);
    }
}
