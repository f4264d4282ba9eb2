//! Direct checks of the structural bounds a valid cover tree must satisfy.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expansion::{aspect_ratio, expansion_constant};
use crate::covertree::{distinctive_descendants_brute, CoverTree};
use crate::error::Result;
use crate::metric::{Level, Metric, PointId};
use crate::scalar::Scalar;
use crate::traversal::expand_candidates;

/// Outcome of one family of checks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub checked: u64,
    pub skipped: u64,
    pub violations: Vec<String>,
}

impl BoundCheck {
    fn new(name: &'static str) -> Self {
        BoundCheck {
            name,
            ..Default::default()
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(detail());
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for BoundCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} checked, {} skipped, {} violations",
            self.name,
            self.checked,
            self.skipped,
            self.violations.len()
        )?;
        if let Some(v) = self.violations.first() {
            write!(f, " (first: {v})")?;
        }
        Ok(())
    }
}

/// `d(p, q) <= 2^{l(u)+2}` for every descendant `q` reached through child `u`.
pub fn descendant_distance_check<M: Metric>(tree: &CoverTree, metric: &M, points: &[M::Point]) -> BoundCheck {
    let mut check = BoundCheck::new("descendant distance");
    for p in 0..tree.len() {
        for &u in tree.children(p) {
            let bound = M::Scalar::pow2(tree.level(u) + 2);
            for q in tree.descendants(u) {
                let d = metric.distance(&points[p], &points[q]);
                check.record(d <= bound, || format!("d({p},{q}) = {} > {}", d.to_f64(), bound.to_f64()));
            }
        }
    }
    check
}

/// At most `c^4` children of any node on any one level.
pub fn width_check(tree: &CoverTree, c: f64) -> BoundCheck {
    let mut check = BoundCheck::new("children per level");
    let bound = c.powi(4);
    for p in 0..tree.len() {
        for level in tree.child_levels(p) {
            let count = tree.children_at(p, level).len();
            check.record(count as f64 <= bound, || {
                format!("node {p} has {count} children at level {level} > {bound}")
            });
        }
    }
    check
}

/// `|H| <= 1 + log2(Δ)` as stated, and the bound `|H| < 3 + log2(Δ)` that
/// follows from `l_max < log2(diam) + 1` and `l_min >= log2(d_min) - 1`.
pub fn height_checks<M: Metric>(tree: &CoverTree, metric: &M, points: &[M::Point]) -> Result<[BoundCheck; 2]> {
    let mut stated = BoundCheck::new("height <= 1 + log2(aspect ratio)");
    let mut corrected = BoundCheck::new("height < 3 + log2(aspect ratio)");
    if points.len() < 2 {
        stated.skipped += 1;
        corrected.skipped += 1;
        return Ok([stated, corrected]);
    }
    let delta = aspect_ratio(metric, points)?.ratio;
    let h = tree.height_set().len() as f64;
    stated.record(h <= 1.0 + delta.log2(), || format!("|H| = {h}, 1 + log2 Δ = {}", 1.0 + delta.log2()));
    corrected.record(h < 3.0 + delta.log2(), || format!("|H| = {h}, 3 + log2 Δ = {}", 3.0 + delta.log2()));
    Ok([stated, corrected])
}

/// `|B(p,t) ∩ C_i| <= c^μ` with `δ = 2^i`, `μ = ceil(log2(4t/δ + 1))`, for
/// random centers, levels and radii. Radii `t <= δ` are skipped.
pub fn packing_check<M: Metric>(
    tree: &CoverTree,
    metric: &M,
    points: &[M::Point],
    c: f64,
    trials: usize,
    seed: u64,
) -> BoundCheck {
    let mut check = BoundCheck::new("packing");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = tree.height_set();
    for _ in 0..trials {
        let p = rng.gen_range(0..points.len());
        let i = *levels.choose(&mut rng).expect("nonempty height set");
        let delta = f64::pow2(i);
        let t = delta * rng.gen_range(0.5..16.0);
        if t <= delta {
            check.skipped += 1;
            continue;
        }
        let count = tree
            .cover_set(i)
            .into_iter()
            .filter(|&a| metric.distance(&points[p], &points[a]).to_f64() <= t)
            .count();
        let mu = (4.0 * t / delta + 1.0).log2().ceil() as i32;
        let bound = c.powi(mu);
        check.record(count as f64 <= bound, || {
            format!("|B({p}, {t}) ∩ C_{i}| = {count} > c^{mu} = {bound}")
        });
    }
    check
}

fn brute_union(tree: &CoverTree, nodes: &[PointId], i: Level) -> Vec<PointId> {
    let mut out: Vec<PointId> = nodes
        .iter()
        .flat_map(|&p| distinctive_descendants_brute(tree, p, i))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Identities of distinctive descendant sets at every height-set level `i`:
/// disjointness over `C_i`, additivity of sizes, the radius `2^{i+1}`, and
/// `∪_{C(R_i)} S_{i-1} = ∪_{R_i} S_i` for random `R_i ⊆ C_i`.
pub fn distinctive_set_checks<M: Metric>(
    tree: &CoverTree,
    metric: &M,
    points: &[M::Point],
    seed: u64,
) -> [BoundCheck; 4] {
    let mut disjoint = BoundCheck::new("distinctive sets disjoint");
    let mut additive = BoundCheck::new("distinctive sizes add");
    let mut radius = BoundCheck::new("distinctive radius");
    let mut children = BoundCheck::new("child set equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = tree.len();
    for i in tree.height_set() {
        let cover = tree.cover_set(i);
        let mut owner: Vec<Option<PointId>> = vec![None; n];
        let mut total = 0usize;
        for &p in &cover {
            let set = distinctive_descendants_brute(tree, p, i);
            total += set.len();
            let bound = M::Scalar::pow2(i + 1);
            for &w in &set {
                if let Some(o) = owner[w] {
                    disjoint.record(false, || format!("{w} in S_{i}({o}) and S_{i}({p})"));
                } else {
                    disjoint.record(true, String::new);
                }
                owner[w] = Some(p);
                let d = metric.distance(&points[w], &points[p]);
                radius.record(d <= bound, || format!("d({w},{p}) = {} > 2^{}", d.to_f64(), i + 1));
            }
        }
        let union = owner.iter().filter(|o| o.is_some()).count();
        additive.record(union == total, || format!("level {i}: |union| = {union}, sum = {total}"));

        for _ in 0..4 {
            let subset: Vec<PointId> = cover.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            if subset.is_empty() {
                children.skipped += 1;
                continue;
            }
            let lhs = brute_union(tree, &expand_candidates(tree, &subset, i), i - 1);
            let rhs = brute_union(tree, &subset, i);
            children.record(lhs == rhs, || format!("level {i}: R_i = {subset:?}"));
        }
    }
    [disjoint, additive, radius, children]
}

/// Every structural check on one tree.
pub fn structural_checks<M: Metric>(
    tree: &CoverTree,
    metric: &M,
    points: &[M::Point],
    packing_trials: usize,
    seed: u64,
) -> Result<Vec<BoundCheck>> {
    let c = if points.len() >= 2 {
        expansion_constant(metric, points)?.c
    } else {
        2.0
    };
    let mut out = vec![descendant_distance_check(tree, metric, points), width_check(tree, c)];
    out.extend(height_checks(tree, metric, points)?);
    if points.len() >= 2 {
        out.push(packing_check(tree, metric, points, c, packing_trials, seed));
    }
    out.extend(distinctive_set_checks(tree, metric, points, seed));
    Ok(out)
}
