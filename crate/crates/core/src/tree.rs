//! Binary trees and the random tree generators.
//!
//! A [`BinaryTree`] is an arena of nodes stored in pre-order (root first, then
//! the left subtree, then the right subtree). The layout makes every bottom-up
//! computation a single reverse sweep and every top-down one a forward sweep,
//! so nothing in the crate needs recursion on the call stack.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::draw_left_size;

pub type NodeId = u32;

/// Default node cap for [`sample_ct_clock`].
pub const DEFAULT_CLOCK_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Node {
    left: Option<NodeId>,
    right: Option<NodeId>,
    size: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BinaryTree {
    nodes: Vec<Node>,
}

/// How a node of `n` nodes splits: `left` nodes go to the left subtree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitDecision {
    pub n: u64,
    pub left: u64,
}

impl SplitDecision {
    pub fn right(&self) -> u64 {
        self.n - 1 - self.left
    }
}

impl BinaryTree {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single() -> Self {
        Self::from_left_sizes(&[0]).expect("single node")
    }

    /// A path of `n` nodes where every child hangs on `side`.
    pub fn path(n: u32, side: Side) -> Self {
        let splits: Vec<u32> = match side {
            Side::Left => (0..n).rev().collect(),
            Side::Right => vec![0; n as usize],
        };
        Self::from_left_sizes_with_size(n, &splits).expect("valid path")
    }

    /// Rebuilds a tree from its pre-order sequence of left-subtree sizes.
    ///
    /// The total size is the length of the sequence; see [`Self::left_sizes`].
    pub fn from_left_sizes(splits: &[u32]) -> Result<Self> {
        Self::from_left_sizes_with_size(splits.len() as u32, splits)
    }

    fn from_left_sizes_with_size(n: u32, splits: &[u32]) -> Result<Self> {
        if splits.len() != n as usize {
            return Err(Error::MalformedSplits(format!(
                "expected {n} entries, got {}",
                splits.len()
            )));
        }
        let mut nodes = Vec::with_capacity(n as usize);
        // (size, parent, side)
        let mut stack: Vec<(u32, Option<(NodeId, Side)>)> = Vec::new();
        if n > 0 {
            stack.push((n, None));
        }
        let mut next = splits.iter();
        while let Some((size, parent)) = stack.pop() {
            let id = nodes.len() as NodeId;
            attach(&mut nodes, parent, id);
            let left = *next
                .next()
                .ok_or_else(|| Error::MalformedSplits("sequence too short".into()))?;
            if left >= size {
                return Err(Error::MalformedSplits(format!(
                    "left size {left} at node {id} of size {size}"
                )));
            }
            nodes.push(Node {
                left: None,
                right: None,
                size,
            });
            push_children(&mut stack, id, size, left);
        }
        if next.next().is_some() {
            return Err(Error::MalformedSplits("sequence too long".into()));
        }
        Ok(Self { nodes })
    }

    /// Binary search tree obtained by inserting `keys` in order.
    pub fn from_insertions(keys: &[u32]) -> Self {
        let mut links: Vec<[Option<NodeId>; 2]> = Vec::with_capacity(keys.len());
        for (i, &key) in keys.iter().enumerate() {
            let id = i as NodeId;
            links.push([None, None]);
            if i == 0 {
                continue;
            }
            let mut cur = 0usize;
            loop {
                let side = if key < keys[cur] { 0 } else { 1 };
                match links[cur][side] {
                    Some(next) => cur = next as usize,
                    None => {
                        links[cur][side] = Some(id);
                        break;
                    }
                }
            }
        }
        Self::from_links(&links, if keys.is_empty() { None } else { Some(0) })
    }

    /// Canonicalizes an arbitrary arena of `[left, right]` links into
    /// pre-order layout with cached sizes.
    pub(crate) fn from_links(links: &[[Option<NodeId>; 2]], root: Option<NodeId>) -> Self {
        let Some(root) = root else {
            return Self::empty();
        };
        let mut order = Vec::with_capacity(links.len());
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            let [l, r] = links[v as usize];
            if let Some(r) = r {
                stack.push(r);
            }
            if let Some(l) = l {
                stack.push(l);
            }
        }
        let mut new_id = vec![NodeId::MAX; links.len()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v as usize] = i as NodeId;
        }
        let mut nodes: Vec<Node> = order
            .iter()
            .map(|&v| {
                let [l, r] = links[v as usize];
                Node {
                    left: l.map(|c| new_id[c as usize]),
                    right: r.map(|c| new_id[c as usize]),
                    size: 1,
                }
            })
            .collect();
        for i in (0..nodes.len()).rev() {
            let mut s = 1;
            if let Some(l) = nodes[i].left {
                s += nodes[l as usize].size;
            }
            if let Some(r) = nodes[i].right {
                s += nodes[r as usize].size;
            }
            nodes[i].size = s;
        }
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> Option<NodeId> {
        (!self.nodes.is_empty()).then_some(0)
    }

    pub fn left(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v as usize].left
    }

    pub fn right(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v as usize].right
    }

    pub fn size(&self, v: NodeId) -> u32 {
        self.nodes[v as usize].size
    }

    pub fn left_size(&self, v: NodeId) -> u32 {
        self.left(v).map_or(0, |c| self.size(c))
    }

    pub fn right_size(&self, v: NodeId) -> u32 {
        self.right(v).map_or(0, |c| self.size(c))
    }

    /// Outdegree at most one.
    pub fn is_green(&self, v: NodeId) -> bool {
        let n = &self.nodes[v as usize];
        n.left.is_none() || n.right.is_none()
    }

    /// Node ids in pre-order; parents always precede their descendants.
    pub fn preorder(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        0..self.nodes.len() as NodeId
    }

    pub fn subtree(&self, v: NodeId) -> Subtree<'_> {
        Subtree {
            tree: self,
            root: Some(v),
        }
    }

    pub fn whole(&self) -> Subtree<'_> {
        Subtree {
            tree: self,
            root: self.root(),
        }
    }

    /// Pre-order left-subtree sizes; a complete shape code.
    pub fn left_sizes(&self) -> Vec<u32> {
        self.preorder().map(|v| self.left_size(v)).collect()
    }

    pub fn splits(&self) -> impl Iterator<Item = SplitDecision> + '_ {
        self.preorder().map(|v| SplitDecision {
            n: self.size(v) as u64,
            left: self.left_size(v) as u64,
        })
    }

    /// Number of nodes on the longest root path (0 for the empty tree).
    pub fn height(&self) -> u32 {
        let mut depth = vec![0u32; self.len()];
        let mut best = 0;
        for v in self.preorder() {
            let d = depth[v as usize] + 1;
            best = best.max(d);
            for c in [self.left(v), self.right(v)].into_iter().flatten() {
                depth[c as usize] = d;
            }
        }
        best
    }

    /// Probability of this shape under the random binary search tree model
    /// of the same size: the product of reciprocal subtree sizes.
    pub fn bst_probability(&self) -> f64 {
        self.preorder().map(|v| 1.0 / self.size(v) as f64).product()
    }
}

fn attach(nodes: &mut [Node], parent: Option<(NodeId, Side)>, id: NodeId) {
    if let Some((p, side)) = parent {
        match side {
            Side::Left => nodes[p as usize].left = Some(id),
            Side::Right => nodes[p as usize].right = Some(id),
        }
    }
}

fn push_children(stack: &mut Vec<(u32, Option<(NodeId, Side)>)>, id: NodeId, size: u32, left: u32) {
    let right = size - 1 - left;
    if right > 0 {
        stack.push((right, Some((id, Side::Right))));
    }
    if left > 0 {
        stack.push((left, Some((id, Side::Left))));
    }
}

/// A possibly empty subtree of a [`BinaryTree`].
#[derive(Clone, Copy, Debug)]
pub struct Subtree<'a> {
    tree: &'a BinaryTree,
    root: Option<NodeId>,
}

impl<'a> Subtree<'a> {
    pub fn tree(&self) -> &'a BinaryTree {
        self.tree
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn size(&self) -> u32 {
        self.root.map_or(0, |v| self.tree.size(v))
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn left(&self) -> Subtree<'a> {
        Subtree {
            tree: self.tree,
            root: self.root.and_then(|v| self.tree.left(v)),
        }
    }

    pub fn right(&self) -> Subtree<'a> {
        Subtree {
            tree: self.tree,
            root: self.root.and_then(|v| self.tree.right(v)),
        }
    }

    /// Root of this subtree is green. The empty tree has no green root.
    pub fn has_green_root(&self) -> bool {
        self.root.is_some_and(|v| self.tree.is_green(v))
    }

    /// Node ids of this subtree, in pre-order.
    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        match self.root {
            Some(v) => v..v + self.tree.size(v),
            None => 0..0,
        }
    }
}

/// Random binary search tree of `n` nodes by recursive uniform splits.
pub fn gen_bst_split<R: Rng + ?Sized>(n: u32, rng: &mut R) -> BinaryTree {
    let mut nodes = Vec::with_capacity(n as usize);
    let mut stack: Vec<(u32, Option<(NodeId, Side)>)> = Vec::new();
    if n > 0 {
        stack.push((n, None));
    }
    while let Some((size, parent)) = stack.pop() {
        let id = nodes.len() as NodeId;
        attach(&mut nodes, parent, id);
        let left = draw_left_size(rng, size as u64) as u32;
        nodes.push(Node {
            left: None,
            right: None,
            size,
        });
        push_children(&mut stack, id, size, left);
    }
    BinaryTree { nodes }
}

/// Random binary search tree of `n` nodes by inserting a uniformly random
/// permutation of `0..n`.
pub fn gen_bst_insert<R: Rng + ?Sized>(n: u32, rng: &mut R) -> BinaryTree {
    let mut keys: Vec<u32> = (0..n).collect();
    keys.shuffle(rng);
    BinaryTree::from_insertions(&keys)
}

/// Size of the stopped branching-process tree, with
/// `P(size = n) = 2/((n+1)(n+2))`.
///
/// Inverse-CDF sampling on the exact tail `P(size > n) = 2/(n+2)`, done in
/// integer arithmetic: with `U = k/2^53`, the result is the least `n` with
/// `2/(n+2) < U`.
pub fn sample_ct_size<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    const ONE: u64 = 1 << 53;
    let k = (rng.random::<u64>() >> 11) + 1; // 1..=2^53
    (2 * ONE) / k - 1
}

/// Grows the branching-process tree until an independent rate-`lambda`
/// clock fires.
///
/// With `m` nodes there are `m + 1` free child slots, each filled at rate 1,
/// so the next event is the stop with probability `lambda / (m + 1 + lambda)`
/// and otherwise a uniformly chosen free slot receives a node.
pub fn sample_ct_clock<R: Rng + ?Sized>(lambda: f64, rng: &mut R, cap: u64) -> Result<BinaryTree> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!(
            "clock rate must be positive, got {lambda}"
        )));
    }
    if cap == 0 {
        return Err(Error::InvalidConfig("cap must be at least 1".into()));
    }
    let mut links: Vec<[Option<NodeId>; 2]> = vec![[None, None]];
    let mut slots: Vec<(NodeId, u8)> = vec![(0, 0), (0, 1)];
    loop {
        let active = slots.len() as f64;
        if rng.random::<f64>() * (active + lambda) < lambda {
            break;
        }
        if links.len() as u64 >= cap {
            return Err(Error::CapExceeded {
                cap,
                replicate: None,
            });
        }
        let pick = rng.random_range(0..slots.len());
        let (parent, side) = slots.swap_remove(pick);
        let id = links.len() as NodeId;
        links[parent as usize][side as usize] = Some(id);
        links.push([None, None]);
        slots.push((id, 0));
        slots.push((id, 1));
    }
    Ok(BinaryTree::from_links(&links, Some(0)))
}
