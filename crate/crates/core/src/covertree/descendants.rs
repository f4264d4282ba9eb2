use super::CoverTree;
use crate::error::{CctError, Result};
use crate::metric::{Level, PointId};

/// Cached sizes of distinctive descendant sets.
///
/// `S_i(p)` is `p` plus the subtrees of its children below level `i`, so
/// `|S_i(p)|` is piecewise constant in `i` and changes only at `l(c) + 1`
/// for children `c`. Each node stores one `(level, count)` breakpoint per
/// essential level, ascending by level.
#[derive(Clone, Debug)]
pub struct DescendantCache {
    levels: Vec<Level>,
    breakpoints: Vec<Vec<(Level, usize)>>,
    subtree: Vec<usize>,
}

impl DescendantCache {
    /// Bottom-up pass: every node's subtree size is final before its parent
    /// is visited, so each node is touched once plus once per child.
    pub fn new(tree: &CoverTree) -> Self {
        let n = tree.len();
        let mut subtree = vec![1usize; n];
        let mut breakpoints = vec![Vec::new(); n];
        for p in tree.bottom_up_order() {
            let kids = tree.children(p);
            // Children are stored highest level first; walk them upward.
            let mut bp: Vec<(Level, usize)> = Vec::new();
            let mut count = 1usize;
            let mut idx = kids.len();
            while idx > 0 {
                let lvl = tree.level(kids[idx - 1]);
                while idx > 0 && tree.level(kids[idx - 1]) == lvl {
                    count += subtree[kids[idx - 1]];
                    idx -= 1;
                }
                bp.push((lvl + 1, count));
            }
            subtree[p] = count;
            if bp.last().map_or(true, |&(l, _)| l != tree.level(p) + 1) {
                bp.push((tree.level(p) + 1, count));
            }
            breakpoints[p] = bp;
        }
        DescendantCache {
            levels: tree.levels().to_vec(),
            breakpoints,
            subtree,
        }
    }

    /// `|S_i(p)|`; errors when `i > l(p)`.
    pub fn count_at(&self, p: PointId, i: Level) -> Result<usize> {
        if i > self.levels[p] {
            return Err(CctError::Contract(format!(
                "distinctive count requested at level {i} above node {p} (level {})",
                self.levels[p]
            )));
        }
        Ok(self.count(p, i))
    }

    /// `|S_i(p)|` without the level check.
    #[inline]
    pub fn count(&self, p: PointId, i: Level) -> usize {
        let bp = &self.breakpoints[p];
        let pos = bp.partition_point(|&(l, _)| l <= i);
        if pos == 0 {
            1
        } else {
            bp[pos - 1].1
        }
    }

    pub fn subtree_size(&self, p: PointId) -> usize {
        self.subtree[p]
    }

    pub fn breakpoints(&self, p: PointId) -> &[(Level, usize)] {
        &self.breakpoints[p]
    }

    pub fn total_breakpoints(&self) -> usize {
        self.breakpoints.iter().map(Vec::len).sum()
    }
}

/// `S_i(p)` straight from the definition: descendants of `p` minus the
/// descendants of every `u` below `p` with `i <= l(u) <= l(p) - 1`.
/// Sorted by id.
pub fn distinctive_descendants_brute(tree: &CoverTree, p: PointId, i: Level) -> Vec<PointId> {
    let all = tree.descendants(p);
    if i >= tree.level(p) {
        return all;
    }
    let mut removed = vec![false; tree.len()];
    for &u in &all {
        let lu = tree.level(u);
        if u != p && i <= lu && lu < tree.level(p) {
            for w in tree.descendants(u) {
                removed[w] = true;
            }
        }
    }
    all.into_iter().filter(|&w| !removed[w]).collect()
}
