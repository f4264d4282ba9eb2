use std::collections::BTreeMap;
use std::fmt;

use super::CoverTree;
use crate::metric::{Level, Metric, PointId};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Size { tree: usize, points: usize },
    Root { root: PointId, root_level: Level, witness: PointId, witness_level: Level },
    CoveringLevel { child: PointId, parent: PointId },
    CoveringDistance { child: PointId, parent: PointId, distance: f64, bound: f64 },
    Separation { a: PointId, b: PointId, level: Level, distance: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Size { tree, points } => {
                write!(f, "tree/point-set mismatch: {tree} nodes, {points} points")
            }
            Violation::Root {
                root,
                root_level,
                witness,
                witness_level,
            } => write!(
                f,
                "root condition: root {root} at level {root_level}, node {witness} at level {witness_level}"
            ),
            Violation::CoveringLevel { child, parent } => {
                write!(f, "covering condition: parent {parent} not above child {child}")
            }
            Violation::CoveringDistance {
                child,
                parent,
                distance,
                bound,
            } => write!(
                f,
                "covering condition: d({child}, {parent}) = {distance} > {bound}"
            ),
            Violation::Separation { a, b, level, distance } => write!(
                f,
                "separation condition at level {level}: d({a}, {b}) = {distance} <= {}",
                2f64.powi(level)
            ),
        }
    }
}

/// Outcome of [`validate_tree`]. `min_separation` maps each height-set level
/// `i` to `d_min(C_i)` (absent when `C_i` is a single point).
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub min_separation: BTreeMap<Level, f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "valid")?;
            for (i, d) in &self.min_separation {
                write!(f, "; d_min(C_{i}) = {d} > {}", 2f64.powi(*i))?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            write!(f, "{}", parts.join("; "))
        }
    }
}

/// Checks the root, covering and separation conditions.
///
/// Separation is checked per pair at `min(l(a), l(b))`, the highest level
/// where both are present, which covers every cover set at once.
pub fn validate_tree<M: Metric>(tree: &CoverTree, metric: &M, points: &[M::Point]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = tree.len();
    if n != points.len() {
        report.violations.push(Violation::Size { tree: n, points: points.len() });
        return report;
    }
    let root = tree.root();
    for p in 0..n {
        if p != root && tree.level(p) >= tree.level(root) {
            report.violations.push(Violation::Root {
                root,
                root_level: tree.level(root),
                witness: p,
                witness_level: tree.level(p),
            });
        }
    }
    for p in 0..n {
        let Some(a) = tree.parent(p) else { continue };
        if tree.level(a) <= tree.level(p) {
            report.violations.push(Violation::CoveringLevel { child: p, parent: a });
        }
        let d = metric.distance(&points[p], &points[a]);
        let bound = M::Scalar::pow2(tree.level(p) + 1);
        if d > bound {
            report.violations.push(Violation::CoveringDistance {
                child: p,
                parent: a,
                distance: d.to_f64(),
                bound: bound.to_f64(),
            });
        }
    }

    // Closest pair whose shared top level is exactly `i`.
    let mut closest: BTreeMap<Level, M::Scalar> = BTreeMap::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let level = tree.level(a).min(tree.level(b));
            let d = metric.distance(&points[a], &points[b]);
            if d <= M::Scalar::pow2(level) {
                report.violations.push(Violation::Separation {
                    a,
                    b,
                    level,
                    distance: d.to_f64(),
                });
            }
            match closest.get_mut(&level) {
                Some(best) if *best <= d => {}
                Some(best) => *best = d,
                None => {
                    closest.insert(level, d);
                }
            }
        }
    }
    // d_min(C_i) is the minimum over pairs whose shared level is >= i.
    let height = tree.height_set();
    let mut suffix: Option<M::Scalar> = None;
    let mut entries: Vec<(Level, M::Scalar)> = closest.into_iter().collect();
    entries.reverse();
    let mut idx = 0;
    for &i in height.iter().rev() {
        while idx < entries.len() && entries[idx].0 >= i {
            let d = entries[idx].1.clone();
            suffix = Some(match suffix {
                Some(s) if s <= d => s,
                _ => d,
            });
            idx += 1;
        }
        if let Some(s) = &suffix {
            report.min_separation.insert(i, s.to_f64());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covertree::fixtures::*;
    use crate::metric::{Euclidean, MatrixMetric};

    #[test]
    fn even_line_passes_with_margins() {
        let pts = even_line_points();
        let (levels, parents) = even_line_tree_parts();
        let t = CoverTree::from_parts(levels, parents).unwrap();
        let r = validate_tree(&t, &Euclidean::new(), &pts);
        assert!(r.passed(), "{r}");
        assert_eq!(r.min_separation[&0], 2.0);
        assert_eq!(r.min_separation[&1], 4.0);
        assert_eq!(r.min_separation[&2], 8.0);
        assert!(!r.min_separation.contains_key(&3));
    }

    #[test]
    fn raised_level_fails_separation() {
        let pts = even_line_points();
        let (mut levels, parents) = even_line_tree_parts();
        levels[even_id(8)] = 3;
        let t = CoverTree::from_parts(levels, parents).unwrap();
        let r = validate_tree(&t, &Euclidean::new(), &pts);
        assert!(r.violations.contains(&Violation::Separation {
            a: even_id(8),
            b: even_id(16),
            level: 3,
            distance: 8.0
        }));
    }

    #[test]
    fn covering_distance_violation() {
        let pts = vec![vec![0.0], vec![3.0]];
        let t = CoverTree::from_parts(vec![1, 0], vec![None, Some(0)]).unwrap();
        let r = validate_tree(&t, &Euclidean::new(), &pts);
        assert!(matches!(r.violations[0], Violation::CoveringDistance { child: 1, parent: 0, .. }));
    }

    #[test]
    fn five_and_seven_node_trees_on_the_line() {
        for (levels, parents, n) in [
            (five_node_parts().0, five_node_parts().1, 5),
            (seven_node_parts().0, seven_node_parts().1, 7),
        ] {
            let pts: Vec<Vec<f64>> = (1..=n).map(|v| vec![v as f64]).collect();
            let t = CoverTree::from_parts(levels, parents).unwrap();
            let r = validate_tree(&t, &Euclidean::new(), &pts);
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn size_mismatch() {
        let t = CoverTree::from_parts(vec![0], vec![None]).unwrap();
        let m = MatrixMetric::from_rows(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let r = validate_tree(&t, &m, &[0, 1]);
        assert!(matches!(r.violations[0], Violation::Size { .. }));
    }
}
