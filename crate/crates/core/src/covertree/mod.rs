//! Compressed cover trees: one node per point, an integer level per node,
//! and per-node child lists grouped by level.
//!
//! A valid tree satisfies three conditions:
//! * root: `l(root) >= 1 + max` level of every other node;
//! * covering: every non-root `q` has `l(q) < l(parent)` and
//!   `d(q, parent) <= 2^(l(q)+1)`;
//! * separation: any two points with levels `>= i` are more than `2^i` apart.
//!
//! `Children(p)` conceptually contains `p` itself. The stored child lists do
//! not; callers that want the self-child add it explicitly.

mod build;
mod descendants;
mod format;
mod validate;

pub use build::{build_by_insertion, build_given_levels, build_seeded, check_level_span, MAX_COORDINATE_LEVEL_SPAN};
pub use descendants::{distinctive_descendants_brute, DescendantCache};
pub use format::{deserialize_tree, parse_tree, serialize_tree};
pub use validate::{validate_tree, ValidationReport, Violation};

use crate::error::{CctError, Result};
use crate::metric::{Level, PointId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverTree {
    levels: Vec<Level>,
    parents: Vec<Option<PointId>>,
    /// Non-self children, sorted by level descending then id ascending.
    children: Vec<Vec<PointId>>,
    root: PointId,
    l_max: Level,
    l_min: Level,
}

impl CoverTree {
    /// Assembles a tree from a level function and parent links, checking
    /// only that the links form a single rooted tree. Level order and the
    /// metric conditions are checked by [`validate_tree`].
    pub fn from_parts(levels: Vec<Level>, parents: Vec<Option<PointId>>) -> Result<Self> {
        let n = levels.len();
        if n == 0 {
            return Err(CctError::Input("empty point set".into()));
        }
        if parents.len() != n {
            return Err(CctError::TreeMismatch(format!(
                "{} levels but {} parent entries",
                n,
                parents.len()
            )));
        }
        let mut root = None;
        let mut children = vec![Vec::new(); n];
        for (p, parent) in parents.iter().enumerate() {
            match *parent {
                None => {
                    if let Some(r) = root {
                        return Err(CctError::Validation(format!("two roots: {r} and {p}")));
                    }
                    root = Some(p);
                }
                Some(a) => {
                    if a >= n {
                        return Err(CctError::UnknownPoint(a));
                    }
                    children[a].push(p);
                }
            }
        }
        let root = root.ok_or_else(|| CctError::Validation("no root".into()))?;
        // Every parent chain must reach the root within n steps.
        for start in 0..n {
            let mut x = start;
            let mut steps = 0;
            while let Some(a) = parents[x] {
                x = a;
                steps += 1;
                if steps > n {
                    return Err(CctError::Validation(format!("parent cycle through node {start}")));
                }
            }
        }
        for list in &mut children {
            list.sort_by(|&x, &y| levels[y].cmp(&levels[x]).then(x.cmp(&y)));
        }
        let non_root_max = (0..n).filter(|&p| p != root).map(|p| levels[p]).max();
        let l_max = non_root_max.map_or(levels[root], |m| m + 1);
        let l_min = *levels.iter().min().expect("nonempty");
        Ok(CoverTree {
            levels,
            parents,
            children,
            root,
            l_max,
            l_min,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn root(&self) -> PointId {
        self.root
    }

    #[inline]
    pub fn level(&self, p: PointId) -> Level {
        self.levels[p]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn parent(&self, p: PointId) -> Option<PointId> {
        self.parents[p]
    }

    pub fn parents(&self) -> &[Option<PointId>] {
        &self.parents
    }

    /// `1 +` the highest non-root level; the root's own level for a singleton.
    pub fn l_max(&self) -> Level {
        self.l_max
    }

    pub fn l_min(&self) -> Level {
        self.l_min
    }

    /// Non-self children, highest level first.
    #[inline]
    pub fn children(&self, p: PointId) -> &[PointId] {
        &self.children[p]
    }

    /// `Children(p, i)` without the self-child.
    pub fn children_at(&self, p: PointId, i: Level) -> &[PointId] {
        let list = &self.children[p];
        let lv = &self.levels;
        let start = list.partition_point(|&c| lv[c] > i);
        let end = start + list[start..].partition_point(|&c| lv[c] == i);
        &list[start..end]
    }

    /// Distinct child levels, descending.
    pub fn child_levels(&self, p: PointId) -> Vec<Level> {
        let mut out: Vec<Level> = self.children[p].iter().map(|&c| self.levels[c]).collect();
        out.dedup();
        out
    }

    /// Largest `j < i` with a child of `p` at level `j`, or `l_min - 1`.
    pub fn next_level(&self, p: PointId, i: Level) -> Level {
        let list = &self.children[p];
        let lv = &self.levels;
        let pos = list.partition_point(|&c| lv[c] >= i);
        list.get(pos).map_or(self.l_min - 1, |&c| lv[c])
    }

    /// Whether `p` has any child strictly below level `i`.
    pub fn has_child_below(&self, p: PointId, i: Level) -> bool {
        self.next_level(p, i) >= self.l_min
    }

    /// `E(p) = {t + 1}` along the chain `t_0 = l(p)`, `t_{k+1} = Next(p, t_k)`,
    /// stopping at the sentinel. Returned descending.
    pub fn essential_levels(&self, p: PointId) -> Vec<Level> {
        let mut out = vec![self.levels[p] + 1];
        let mut t = self.levels[p];
        loop {
            t = self.next_level(p, t);
            if t < self.l_min {
                break;
            }
            out.push(t + 1);
        }
        out
    }

    /// All descendants of `p` including `p`, sorted by id.
    pub fn descendants(&self, p: PointId) -> Vec<PointId> {
        let mut out = Vec::new();
        let mut stack = vec![p];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend_from_slice(&self.children[x]);
        }
        out.sort_unstable();
        out
    }

    /// `S_i(p)`: `p` plus the subtrees of its children below level `i`.
    /// Sorted by id.
    pub fn distinctive_descendants(&self, p: PointId, i: Level) -> Vec<PointId> {
        let mut out = vec![p];
        let list = &self.children[p];
        let start = list.partition_point(|&c| self.levels[c] >= i);
        let mut stack: Vec<PointId> = list[start..].to_vec();
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend_from_slice(&self.children[x]);
        }
        out.sort_unstable();
        out
    }

    /// Cover set `C_i = {p : l(p) >= i}`, sorted by id.
    pub fn cover_set(&self, i: Level) -> Vec<PointId> {
        (0..self.len()).filter(|&p| self.levels[p] >= i).collect()
    }

    /// Height set: every level occupied by a non-root node, plus `l_max`.
    /// Ascending. A singleton gives `{l(root)}`.
    pub fn height_set(&self) -> Vec<Level> {
        let mut h: Vec<Level> = (0..self.len())
            .filter(|&p| p != self.root)
            .map(|p| self.levels[p])
            .collect();
        h.push(self.l_max);
        h.sort_unstable();
        h.dedup();
        h
    }

    /// Node ids ordered by level ascending (ties by id): children before parents.
    pub fn bottom_up_order(&self) -> Vec<PointId> {
        let mut order: Vec<PointId> = (0..self.len()).collect();
        order.sort_by_key(|&p| (self.levels[p], p));
        order
    }

    /// Path `p, parent(p), ..., root`.
    pub fn path_to_root(&self, p: PointId) -> Vec<PointId> {
        let mut path = vec![p];
        let mut x = p;
        while let Some(a) = self.parents[x] {
            path.push(a);
            x = a;
        }
        path
    }

    pub fn essential_level_total(&self) -> usize {
        (0..self.len()).map(|p| self.essential_levels(p).len()).sum()
    }
}
