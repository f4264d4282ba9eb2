use std::collections::{BTreeMap, HashMap};

use num_traits::Zero as _;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{validate_tree, CoverTree};
use crate::error::{CctError, Result};
use crate::metric::{Level, Metric, PointId};
use crate::scalar::{ceil_log2, Scalar};

/// Largest `l_max - l_min` accepted for coordinate data.
pub const MAX_COORDINATE_LEVEL_SPAN: Level = 64;

/// Uses the supplied levels and parents verbatim, then validates.
pub fn build_given_levels<M: Metric>(
    metric: &M,
    points: &[M::Point],
    levels: Vec<Level>,
    parents: Vec<Option<PointId>>,
) -> Result<CoverTree> {
    if levels.len() != points.len() {
        return Err(CctError::TreeMismatch(format!(
            "{} levels for {} points",
            levels.len(),
            points.len()
        )));
    }
    let tree = CoverTree::from_parts(levels, parents)?;
    let report = validate_tree(&tree, metric, points);
    if !report.passed() {
        return Err(CctError::Validation(report.to_string()));
    }
    Ok(tree)
}

/// Builds by inserting points in a seeded random order.
pub fn build_seeded<M: Metric>(metric: &M, points: &[M::Point], seed: u64) -> Result<CoverTree> {
    let mut order: Vec<PointId> = (0..points.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    build_by_insertion(metric, points, &order)
}

/// Rejects trees whose level range is too wide for coordinate data.
pub fn check_level_span(tree: &CoverTree) -> Result<()> {
    let span = tree.l_max() - tree.l_min();
    if span > MAX_COORDINATE_LEVEL_SPAN {
        return Err(CctError::Input(format!(
            "level span {span} exceeds {MAX_COORDINATE_LEVEL_SPAN}"
        )));
    }
    Ok(())
}

struct Builder {
    levels: Vec<Level>,
    parents: Vec<Option<PointId>>,
    children: Vec<BTreeMap<Level, Vec<PointId>>>,
    root: PointId,
}

/// Inserts points one at a time in `order`.
///
/// Each insertion descends level by level from the root. At level `i` the
/// candidates are the surviving set `Q_i` plus their children at `i - 1`;
/// descent stops once every candidate is farther than `2^i`. The point is
/// then attached at level `i - 1` under the deepest `Q_i` that still has a
/// member within `2^i`. Among admissible parents the one with the lowest
/// level wins, then the smallest id. The root level is finally set to
/// `1 +` the highest non-root level.
pub fn build_by_insertion<M: Metric>(metric: &M, points: &[M::Point], order: &[PointId]) -> Result<CoverTree> {
    let n = points.len();
    if n == 0 {
        return Err(CctError::Input("empty point set".into()));
    }
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(CctError::Input("insertion order is not a permutation".into()));
    }

    let root = order[0];
    let mut b = Builder {
        levels: vec![0; n],
        parents: vec![None; n],
        children: vec![BTreeMap::new(); n],
        root,
    };
    for &p in &order[1..] {
        insert(&mut b, metric, points, p)?;
    }

    let top = (0..n).filter(|&p| p != root).map(|p| b.levels[p]).max();
    b.levels[root] = top.map_or(0, |l| l + 1);
    CoverTree::from_parts(b.levels, b.parents)
}

fn insert<M: Metric>(b: &mut Builder, metric: &M, points: &[M::Point], p: PointId) -> Result<()> {
    let mut cache: HashMap<PointId, M::Scalar> = HashMap::new();
    let mut dist = |x: PointId| -> M::Scalar {
        cache
            .entry(x)
            .or_insert_with(|| metric.distance(&points[p], &points[x]))
            .clone()
    };

    let zero = M::Scalar::zero();
    let d_root = dist(b.root);
    if d_root <= zero {
        return Err(CctError::DuplicatePoint { first: b.root.min(p), second: b.root.max(p) });
    }
    let top = b.levels[b.root].max(ceil_log2(&d_root));
    b.levels[b.root] = top;

    // Frames that passed the "some candidate within 2^i" test.
    let mut frames: Vec<(Level, Vec<(PointId, M::Scalar)>)> = Vec::new();
    let mut i = top;
    let mut q: Vec<(PointId, M::Scalar)> = vec![(b.root, d_root)];
    loop {
        let mut cand = q.clone();
        for &(x, _) in &q {
            if let Some(kids) = b.children[x].get(&(i - 1)) {
                for &c in kids {
                    let d = dist(c);
                    if d <= zero {
                        return Err(CctError::DuplicatePoint { first: c.min(p), second: c.max(p) });
                    }
                    cand.push((c, d));
                }
            }
        }
        let radius = M::Scalar::pow2(i);
        if cand.iter().all(|(_, d)| *d > radius) {
            break;
        }
        let next: Vec<_> = cand.into_iter().filter(|(_, d)| *d <= radius).collect();
        frames.push((i, std::mem::replace(&mut q, next)));
        i -= 1;
    }

    while let Some((i, qi)) = frames.pop() {
        let radius = M::Scalar::pow2(i);
        let best = qi
            .iter()
            .filter(|(_, d)| *d <= radius)
            .map(|&(x, _)| x)
            .min_by_key(|&x| (b.levels[x], x));
        if let Some(parent) = best {
            let level = i - 1;
            b.levels[p] = level;
            b.parents[p] = Some(parent);
            b.children[parent].entry(level).or_default().push(p);
            return Ok(());
        }
    }
    unreachable!("the root frame always admits a parent")
}
