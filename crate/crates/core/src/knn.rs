//! All-k-nearest-neighbors: the brute-force scan, λ-point selection,
//! candidate pruning and the paired-tree solver.

use std::cmp::Ordering;

use num_traits::Zero;

use crate::covertree::{distinctive_descendants_brute, CoverTree, DescendantCache};
use crate::error::{CctError, Result};
use crate::metric::{Counted, Level, Metric, PointId};
use crate::scalar::Scalar;
use crate::traversal::{paired_traversal, TraversalHooks, TraversalStats};

fn by_distance_then_id<S: Scalar>(a: &(PointId, S), b: &(PointId, S)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// Bounded collection holding the `k` smallest `(id, distance)` pairs seen,
/// ordered by distance then id. Inserting an id already present is a no-op.
#[derive(Clone, Debug)]
pub struct NeighborBuffer<S> {
    k: usize,
    entries: Vec<(PointId, S)>,
}

impl<S: Scalar> NeighborBuffer<S> {
    pub fn new(k: usize) -> Self {
        NeighborBuffer {
            k,
            entries: Vec::with_capacity(k + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.k
    }

    /// Returns whether the entry was kept.
    pub fn insert(&mut self, id: PointId, d: S) -> bool {
        if self.k == 0 || self.entries.iter().any(|e| e.0 == id) {
            return false;
        }
        let entry = (id, d);
        let pos = self
            .entries
            .partition_point(|e| by_distance_then_id(e, &entry) == Ordering::Less);
        if pos >= self.k {
            return false;
        }
        self.entries.insert(pos, entry);
        self.entries.truncate(self.k);
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.k
    }

    pub fn entries(&self) -> &[(PointId, S)] {
        &self.entries
    }

    /// Largest kept distance once full.
    pub fn kth_distance(&self) -> Option<&S> {
        if self.is_full() {
            self.entries.last().map(|e| &e.1)
        } else {
            None
        }
    }

    pub fn into_vec(self) -> Vec<(PointId, S)> {
        self.entries
    }
}

/// Per-query neighbor lists, nearest first, indexed by query id.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnResult<S> {
    pub neighbors: Vec<Vec<(PointId, S)>>,
}

impl<S: Scalar> KnnResult<S> {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn distances(&self, q: PointId) -> Vec<S> {
        self.neighbors[q].iter().map(|e| e.1.clone()).collect()
    }

    /// Query ids whose distance lists differ from `other`'s.
    pub fn distance_mismatches(&self, other: &KnnResult<S>) -> Vec<PointId> {
        (0..self.len().max(other.len()))
            .filter(|&q| {
                let (a, b) = (self.neighbors.get(q), other.neighbors.get(q));
                match (a, b) {
                    (Some(a), Some(b)) => {
                        a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.1.total_cmp(&y.1) != Ordering::Equal)
                    }
                    _ => true,
                }
            })
            .collect()
    }
}

/// All reference points with their distance to `q`, sorted by distance then
/// id, minus the zero-distance point when `exclude_self` is set.
fn sorted_distances<M: Metric>(
    metric: &M,
    q: &M::Point,
    r_points: &[M::Point],
    exclude_self: bool,
) -> Vec<(PointId, M::Scalar)> {
    let mut all: Vec<(PointId, M::Scalar)> = r_points
        .iter()
        .enumerate()
        .map(|(id, r)| (id, metric.distance(q, r)))
        .filter(|(_, d)| !(exclude_self && d.is_zero()))
        .collect();
    all.sort_by(by_distance_then_id);
    all
}

/// `NN_1(q), ..., NN_{k_max}(q)`: `u` belongs to `NN_k(q)` when `d(q,u)` is
/// the `k`-th smallest distance counted with multiplicity. Each set is
/// sorted by id.
pub fn nn_sets<M: Metric>(
    metric: &M,
    q: &M::Point,
    r_points: &[M::Point],
    k_max: usize,
    exclude_self: bool,
) -> Result<Vec<Vec<PointId>>> {
    let all = sorted_distances(metric, q, r_points, exclude_self);
    if k_max == 0 || k_max > all.len() {
        return Err(CctError::KOutOfRange {
            k: k_max,
            available: all.len(),
        });
    }
    Ok((0..k_max)
        .map(|rank| {
            let d = &all[rank].1;
            all.iter()
                .filter(|e| e.1.total_cmp(d) == Ordering::Equal)
                .map(|e| e.0)
                .collect()
        })
        .collect())
}

/// Full scan of `Q x R`; ties go to the smaller id.
pub fn knn_bruteforce<M: Metric>(
    metric: &M,
    q_points: &[M::Point],
    r_points: &[M::Point],
    k: usize,
    exclude_self: bool,
) -> Result<KnnResult<M::Scalar>> {
    let mut neighbors = Vec::with_capacity(q_points.len());
    for q in q_points {
        let mut all = sorted_distances(metric, q, r_points, exclude_self);
        if k == 0 || k > all.len() {
            return Err(CctError::KOutOfRange { k, available: all.len() });
        }
        all.truncate(k);
        neighbors.push(all);
    }
    Ok(KnnResult { neighbors })
}

/// λ-point from precomputed `(candidate, d(q, candidate))` pairs.
///
/// Keeps the `k` nearest candidates, then walks them in increasing distance
/// until the distinctive counts at level `i` sum to `k`.
pub fn lambda_from_distances<S: Scalar>(
    cache: &DescendantCache,
    candidates: &[(PointId, S)],
    i: Level,
    k: usize,
) -> Result<(PointId, S)> {
    let mut heap = NeighborBuffer::new(k);
    for (id, d) in candidates {
        heap.insert(*id, d.clone());
    }
    let mut total = 0usize;
    for (id, d) in heap.into_vec() {
        total += cache.count(id, i);
        if total >= k {
            return Ok((id, d));
        }
    }
    Err(CctError::Contract(format!(
        "λ-point undefined: distinctive counts at level {i} sum to {total} < k = {k}"
    )))
}

/// λ-point of `q` over `candidates` (a subset of the cover set at level `i`).
pub fn lambda_point<M: Metric>(
    metric: &M,
    cache: &DescendantCache,
    q: &M::Point,
    r_points: &[M::Point],
    candidates: &[PointId],
    i: Level,
    k: usize,
) -> Result<PointId> {
    let dists: Vec<(PointId, M::Scalar)> = candidates
        .iter()
        .map(|&a| (a, metric.distance(q, &r_points[a])))
        .collect();
    lambda_from_distances(cache, &dists, i, k).map(|(id, _)| id)
}

/// Keeps the candidates within `d(q,λ) + 2^{i+1} + 2^{j+2}`, with λ taken
/// at level `i - 1`. Also returns λ and its distance.
fn prune<S: Scalar>(
    cache: &DescendantCache,
    dists: &[(PointId, S)],
    i: Level,
    j: Level,
    k: usize,
) -> Result<(Vec<PointId>, (PointId, S))> {
    let lambda = lambda_from_distances(cache, dists, i - 1, k)?;
    let bound = lambda.1.clone() + S::pow2(i + 1) + S::pow2(j + 2);
    let kept = dists.iter().filter(|(_, d)| *d <= bound).map(|(a, _)| *a).collect();
    Ok((kept, lambda))
}

/// `R_{i-1}` from `C(R_i)` for query `q` at level `j`.
#[allow(clippy::too_many_arguments)]
pub fn update_candidates<M: Metric>(
    metric: &M,
    cache: &DescendantCache,
    q: &M::Point,
    r_points: &[M::Point],
    candidates: &[PointId],
    i: Level,
    j: Level,
    k: usize,
) -> Result<Vec<PointId>> {
    let dists: Vec<(PointId, M::Scalar)> = candidates
        .iter()
        .map(|&a| (a, metric.distance(q, &r_points[a])))
        .collect();
    prune(cache, &dists, i, j, k).map(|(kept, _)| kept)
}

/// Merges every member of `r_i` into `buffer`.
pub fn final_candidates<M: Metric>(
    metric: &M,
    q: &M::Point,
    r_points: &[M::Point],
    r_i: &[PointId],
    buffer: &mut NeighborBuffer<M::Scalar>,
) {
    for &a in r_i {
        buffer.insert(a, metric.distance(q, &r_points[a]));
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KnnOptions {
    pub k: usize,
    pub exclude_self: bool,
    /// Check the candidate invariants against brute force at every
    /// reference expansion. Quadratic; meant for small inputs.
    pub verify: bool,
}

impl KnnOptions {
    pub fn new(k: usize) -> Self {
        KnnOptions {
            k,
            ..Default::default()
        }
    }
}

struct Oracle<S> {
    /// True `k`-smallest distances per query.
    kth: Vec<Vec<S>>,
    failures: Vec<String>,
}

struct KnnHooks<'a, M: Metric> {
    metric: &'a M,
    q_points: &'a [M::Point],
    r_points: &'a [M::Point],
    tree_q: &'a CoverTree,
    tree_r: &'a CoverTree,
    cache: DescendantCache,
    k: usize,
    buffers: Vec<NeighborBuffer<M::Scalar>>,
    oracle: Option<Oracle<M::Scalar>>,
}

impl<M: Metric> KnnHooks<'_, M> {
    fn check(&mut self, i: Level, j: Level, q: PointId, survivors: &[PointId], lambda: &(PointId, M::Scalar)) {
        let Some(oracle) = self.oracle.as_mut() else { return };
        let raw = self.metric;
        let mut pool: Vec<PointId> = survivors
            .iter()
            .flat_map(|&p| distinctive_descendants_brute(self.tree_r, p, i - 1))
            .collect();
        pool.sort_unstable();
        pool.dedup();
        for qp in distinctive_descendants_brute(self.tree_q, q, j) {
            let mut ds: Vec<M::Scalar> = pool
                .iter()
                .map(|&u| raw.distance(&self.q_points[qp], &self.r_points[u]))
                .collect();
            ds.sort_by(|a, b| a.total_cmp(b));
            ds.truncate(self.k);
            let want = &oracle.kth[qp];
            let same = ds.len() == want.len() && ds.iter().zip(want).all(|(a, b)| a.total_cmp(b) == Ordering::Equal);
            if !same {
                oracle.failures.push(format!(
                    "candidate loss at (i={i}, j={j}, q={q}): query {qp} lost a true neighbor"
                ));
            }
        }
        if let Some(kth) = oracle.kth[q].last() {
            let bound = kth.clone() + M::Scalar::pow2(i);
            if lambda.1 > bound {
                oracle.failures.push(format!(
                    "λ-point {} too far at (i={i}, j={j}, q={q}): {} > {}",
                    lambda.0,
                    lambda.1.to_f64(),
                    bound.to_f64()
                ));
            }
        }
    }
}

impl<M: Metric> TraversalHooks for KnnHooks<'_, M> {
    fn final_candidates(&mut self, _i: Level, _j: Level, q: PointId, r_i: &[PointId]) -> Result<()> {
        final_candidates(self.metric, &self.q_points[q], self.r_points, r_i, &mut self.buffers[q]);
        Ok(())
    }

    fn update_candidates(&mut self, i: Level, j: Level, q: PointId, candidates: &[PointId]) -> Result<Vec<PointId>> {
        let qp = &self.q_points[q];
        let dists: Vec<(PointId, M::Scalar)> = candidates
            .iter()
            .map(|&a| (a, self.metric.distance(qp, &self.r_points[a])))
            .collect();
        let (kept, lambda) = prune(&self.cache, &dists, i, j, self.k)?;
        self.check(i, j, q, &kept, &lambda);
        Ok(kept)
    }
}

fn check_sizes(tree: &CoverTree, points: usize, side: &str) -> Result<()> {
    if tree.len() != points {
        return Err(CctError::TreeMismatch(format!(
            "{side} tree has {} nodes, {side} point set has {points}",
            tree.len()
        )));
    }
    Ok(())
}

/// Paired-tree all-k-nearest-neighbors. With `exclude_self`, the search
/// runs for `k + 1` neighbors and drops the zero-distance one.
pub fn knn_paired<M: Metric>(
    metric: &M,
    q_points: &[M::Point],
    tree_q: &CoverTree,
    r_points: &[M::Point],
    tree_r: &CoverTree,
    opts: KnnOptions,
) -> Result<(KnnResult<M::Scalar>, TraversalStats)> {
    check_sizes(tree_q, q_points.len(), "query")?;
    check_sizes(tree_r, r_points.len(), "reference")?;
    let k = opts.k;
    if k == 0 || k > r_points.len() {
        return Err(CctError::KOutOfRange {
            k,
            available: r_points.len(),
        });
    }
    let k_search = if opts.exclude_self { (k + 1).min(r_points.len()) } else { k };

    let counted = Counted::new(metric);
    let oracle = if opts.verify {
        let truth = knn_bruteforce(metric, q_points, r_points, k_search, false)?;
        Some(Oracle {
            kth: (0..q_points.len()).map(|q| truth.distances(q)).collect(),
            failures: Vec::new(),
        })
    } else {
        None
    };
    let mut hooks = KnnHooks {
        metric: &counted,
        q_points,
        r_points,
        tree_q,
        tree_r,
        cache: DescendantCache::new(tree_r),
        k: k_search,
        buffers: vec![NeighborBuffer::new(k_search); q_points.len()],
        oracle,
    };
    let mut stats = paired_traversal(tree_q, tree_r, &mut hooks)?;
    stats.distance_calls = counted.calls();

    let mut neighbors = Vec::with_capacity(q_points.len());
    for (q, buf) in hooks.buffers.into_iter().enumerate() {
        let mut list = buf.into_vec();
        if opts.exclude_self {
            list.retain(|e| !e.1.is_zero());
        }
        if list.len() < k {
            return Err(CctError::KOutOfRange { k, available: list.len() });
        }
        list.truncate(k);
        if let Some(o) = hooks.oracle.as_mut() {
            let want = &o.kth[q];
            let got_all = list.iter().all(|e| want.iter().any(|w| w.total_cmp(&e.1) == Ordering::Equal));
            if !got_all {
                o.failures.push(format!("query {q}: final neighbors differ from brute force"));
            }
        }
        neighbors.push(list);
    }
    if let Some(o) = hooks.oracle {
        if !o.failures.is_empty() {
            return Err(CctError::Verification(o.failures));
        }
    }
    Ok((KnnResult { neighbors }, stats))
}
