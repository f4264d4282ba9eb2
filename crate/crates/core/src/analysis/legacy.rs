//! The earlier dual-tree all-nearest-neighbor recursion, run over compressed
//! trees by treating every node as present on all levels below its own.

use crate::covertree::CoverTree;
use crate::error::Result;
use crate::metric::{Counted, Level, Metric, PointId};
use crate::scalar::Scalar;
use crate::traversal::TraversalStats;

/// One reference expansion for the traced query: the new level `i - 1`,
/// the query level `j`, and the surviving set sorted by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub level: Level,
    pub j: Level,
    pub survivors: Vec<PointId>,
}

#[derive(Clone, Debug)]
pub struct LegacyOutput<S> {
    /// Nearest reference point per query, `(id, distance)`.
    pub nearest: Vec<(PointId, S)>,
    pub stats: TraversalStats,
    pub trace: Vec<TraceStep>,
}

impl<S: Scalar> LegacyOutput<S> {
    /// Queries whose answer is the query point itself (distance 0).
    pub fn trivial_count(&self) -> usize {
        self.nearest.iter().filter(|(_, d)| d.is_zero()).count()
    }
}

struct Frame {
    i: Level,
    j: Level,
    q: PointId,
    r: Vec<PointId>,
}

/// Runs `FindAllNN(root(Q), {root(R)})` from `(l_max(R), l_max(Q))`.
///
/// * `i = l_min(R)`: every query in `S_j(q)` takes the argmin over `R_i`.
/// * `j < i`: `C = R_i ∪` children at `i - 1`; keep `d(q,a) <= d(q,C) +
///   2^i + 2^{j+2}` and continue at `(i - 1, j)`.
/// * otherwise: continue at `(i, j - 1)` for `q` and its children at `j - 1`.
///
/// `trace` records the reference expansions of one query node.
pub fn legacy_findallnn<M: Metric>(
    metric: &M,
    q_points: &[M::Point],
    tree_q: &CoverTree,
    r_points: &[M::Point],
    tree_r: &CoverTree,
    trace: Option<PointId>,
) -> Result<LegacyOutput<M::Scalar>> {
    let counted = Counted::new(metric);
    let lmin_r = tree_r.l_min();
    let mut stats = TraversalStats::default();
    let mut best: Vec<Option<(PointId, M::Scalar)>> = vec![None; q_points.len()];
    let mut steps = Vec::new();

    let mut stack = vec![Frame {
        i: tree_r.l_max(),
        j: tree_q.l_max(),
        q: tree_q.root(),
        r: vec![tree_r.root()],
    }];
    while let Some(Frame { i, j, q, r }) = stack.pop() {
        stats.max_candidate_width = stats.max_candidate_width.max(r.len());
        if i <= lmin_r {
            stats.final_candidate_calls += 1;
            for qq in tree_q.distinctive_descendants(q, j) {
                for &a in &r {
                    let d = counted.distance(&q_points[qq], &r_points[a]);
                    let better = match &best[qq] {
                        None => true,
                        Some((b, bd)) => d < *bd || (d == *bd && a < *b),
                    };
                    if better {
                        best[qq] = Some((a, d));
                    }
                }
            }
        } else if j < i {
            stats.reference_expansions += 1;
            let mut cand = r.clone();
            for &p in &r {
                cand.extend_from_slice(tree_r.children_at(p, i - 1));
            }
            let dists: Vec<M::Scalar> = cand.iter().map(|&a| counted.distance(&q_points[q], &r_points[a])).collect();
            let dmin = dists
                .iter()
                .min_by(|a, b| a.total_cmp(b))
                .cloned()
                .expect("candidate set contains R_i");
            let bound = dmin + M::Scalar::pow2(i) + M::Scalar::pow2(j + 2);
            let next: Vec<PointId> = cand.into_iter().zip(dists).filter(|(_, d)| *d <= bound).map(|(a, _)| a).collect();
            if trace == Some(q) {
                let mut survivors = next.clone();
                survivors.sort_unstable();
                steps.push(TraceStep {
                    level: i - 1,
                    j,
                    survivors,
                });
            }
            stack.push(Frame { i: i - 1, j, q, r: next });
        } else {
            stats.query_expansions += 1;
            stack.push(Frame {
                i,
                j: j - 1,
                q,
                r: r.clone(),
            });
            for &c in tree_q.children_at(q, j - 1).iter().rev() {
                stack.push(Frame {
                    i,
                    j: j - 1,
                    q: c,
                    r: r.clone(),
                });
            }
        }
    }
    stats.distance_calls = counted.calls();
    let nearest = best
        .into_iter()
        .map(|b| b.expect("every query reaches the bottom level"))
        .collect();
    Ok(LegacyOutput {
        nearest,
        stats,
        trace: steps,
    })
}
