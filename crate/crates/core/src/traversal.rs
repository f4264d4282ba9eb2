//! Paired-tree traversal over a query tree and a reference tree, driven by
//! two hooks, with expansion accounting and the imbalance statistic.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::covertree::CoverTree;
use crate::error::{CctError, Result};
use crate::metric::{Level, PointId};

/// Callbacks that specialise the traversal into a concrete search.
pub trait TraversalHooks {
    /// Called once per frame that reaches the bottom reference level.
    fn final_candidates(&mut self, i: Level, j: Level, q: PointId, r_i: &[PointId]) -> Result<()>;

    /// Prunes `C(R_i)` to `R_{i-1}`. Must return a subset of `candidates`.
    fn update_candidates(
        &mut self,
        i: Level,
        j: Level,
        q: PointId,
        candidates: &[PointId],
    ) -> Result<Vec<PointId>>;
}

/// Hooks that never prune and record nothing.
#[derive(Debug, Default)]
pub struct NoPrune;

impl TraversalHooks for NoPrune {
    fn final_candidates(&mut self, _: Level, _: Level, _: PointId, _: &[PointId]) -> Result<()> {
        Ok(())
    }

    fn update_candidates(&mut self, _: Level, _: Level, _: PointId, c: &[PointId]) -> Result<Vec<PointId>> {
        Ok(c.to_vec())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraversalStats {
    pub reference_expansions: u64,
    pub query_expansions: u64,
    pub distance_calls: u64,
    pub max_candidate_width: usize,
    pub final_candidate_calls: u64,
}

impl TraversalStats {
    pub const CSV_HEADER: &'static str = "ref_expansions,query_expansions,distance_calls,max_width";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.reference_expansions, self.query_expansions, self.distance_calls, self.max_candidate_width
        )
    }

    pub fn key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ref_expansions={}", self.reference_expansions);
        let _ = writeln!(s, "query_expansions={}", self.query_expansions);
        let _ = writeln!(s, "distance_calls={}", self.distance_calls);
        let _ = writeln!(s, "max_width={}", self.max_candidate_width);
        let _ = writeln!(s, "final_candidate_calls={}", self.final_candidate_calls);
        s
    }
}

struct Frame {
    i: Level,
    j: Level,
    q: PointId,
    r: Vec<PointId>,
}

/// `C(R_i)`: `R_i` plus the children of its members at level exactly `i - 1`.
pub fn expand_candidates(tree_r: &CoverTree, r_i: &[PointId], i: Level) -> Vec<PointId> {
    let mut out = r_i.to_vec();
    for &p in r_i {
        out.extend_from_slice(tree_r.children_at(p, i - 1));
    }
    out
}

/// Runs the traversal from `(l_max(R), l_max(Q), root(Q), {root(R)})`.
///
/// A frame `(i, j, q, R_i)` performs a reference expansion while
/// `max(l_min(R), j) < i`: it prunes `C(R_i)` through the hook and jumps to
/// the next level `t = 1 + max Next(a, i - 1)` where a survivor has children.
/// Otherwise it performs a query expansion, spawning each child `q'` of `q`
/// at level `j - 1` and `q` itself with `j' = 1 + Next(q', j - 1)`. A query
/// node with no children left moves to `min(l_min(Q), l_min(R))` so that its
/// reference side always reaches `l_min(R)`. The self-copy is skipped unless
/// `j' < j`.
///
/// Iterative with an explicit stack, so tall trees cannot overflow.
pub fn paired_traversal<H: TraversalHooks>(
    tree_q: &CoverTree,
    tree_r: &CoverTree,
    hooks: &mut H,
) -> Result<TraversalStats> {
    let lmin_r = tree_r.l_min();
    let j_bottom = tree_q.l_min().min(lmin_r);
    let mut stats = TraversalStats::default();
    let wrap = |i, j, q| move |e: CctError| CctError::Traversal { i, j, q, source: Box::new(e) };

    let mut stack = vec![Frame {
        i: tree_r.l_max(),
        j: tree_q.l_max(),
        q: tree_q.root(),
        r: vec![tree_r.root()],
    }];
    while let Some(Frame { i, j, q, r }) = stack.pop() {
        stats.max_candidate_width = stats.max_candidate_width.max(r.len());
        if i == lmin_r {
            stats.final_candidate_calls += 1;
            hooks.final_candidates(i, j, q, &r).map_err(wrap(i, j, q))?;
        }
        if lmin_r.max(j) < i {
            stats.reference_expansions += 1;
            let candidates = expand_candidates(tree_r, &r, i);
            let next = hooks.update_candidates(i, j, q, &candidates).map_err(wrap(i, j, q))?;
            let t = 1 + next
                .iter()
                .map(|&a| tree_r.next_level(a, i - 1))
                .max()
                .unwrap_or(lmin_r - 1);
            stack.push(Frame { i: t, j, q, r: next });
        } else {
            stats.query_expansions += 1;
            let spawn = |qp: PointId| {
                if tree_q.has_child_below(qp, j - 1) {
                    1 + tree_q.next_level(qp, j - 1)
                } else {
                    j_bottom
                }
            };
            let self_j = spawn(q);
            if self_j < j {
                stack.push(Frame { i, j: self_j, q, r: r.clone() });
            }
            for &child in tree_q.children_at(q, j - 1).iter().rev() {
                stack.push(Frame { i, j: spawn(child), q: child, r: r.clone() });
            }
        }
    }
    Ok(stats)
}

/// `I(T(Q), T(R)) = sum over q of |H(T(R)) ∩ [l_min(R), l(q)]|`.
pub fn imbalance(tree_q: &CoverTree, tree_r: &CoverTree) -> u64 {
    let h = tree_r.height_set();
    (0..tree_q.len())
        .map(|q| h.partition_point(|&x| x <= tree_q.level(q)) as u64)
        .sum()
}

/// Closed form for a balanced `t`-ary tree with `m + 1` levels paired with
/// itself: `(1 + 1/(t-1)) |R| - (m+1)/(t-1)` with `|R| = (t^(m+1)-1)/(t-1)`.
pub fn balanced_imbalance_formula(t: u32, m: u32) -> Result<BigRational> {
    if t < 2 {
        return Err(CctError::Input(format!("branching factor t = {t} must be at least 2")));
    }
    let t_big = BigInt::from(t);
    let tm1 = BigRational::from_integer(&t_big - 1);
    let size = (BigRational::from_integer(num_traits::pow(t_big, m as usize + 1)) - BigRational::from_integer(1.into()))
        / &tm1;
    let one = BigRational::from_integer(1.into());
    Ok((&one + &one / &tm1) * size - BigRational::from_integer(BigInt::from(m + 1)) / tm1)
}
