//! Adversarial point sets with their prescribed cover trees.

use std::fmt;
use std::str::FromStr;

use crate::covertree::CoverTree;
use crate::error::{CctError, Result};
use crate::metric::{Family, GraphPoint, Level, MatrixMetric, PointId, TrainLine};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    TallImbalanced,
    Bichromatic,
    Balanced,
}

impl FromStr for Variant {
    type Err = CctError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tall-imbalanced" => Ok(Variant::TallImbalanced),
            "bichromatic" => Ok(Variant::Bichromatic),
            "balanced" => Ok(Variant::Balanced),
            _ => Err(CctError::Input(format!(
                "unknown variant `{s}` (expected tall-imbalanced, bichromatic or balanced)"
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::TallImbalanced => "tall-imbalanced",
            Variant::Bichromatic => "bichromatic",
            Variant::Balanced => "balanced",
        })
    }
}

/// A point set together with the tree it is meant to be paired with.
#[derive(Clone, Debug)]
pub struct GeneratedDataset<P> {
    pub m: u32,
    pub points: Vec<P>,
    pub labels: Vec<String>,
    pub levels: Vec<Level>,
    pub parents: Vec<Option<PointId>>,
}

impl<P> GeneratedDataset<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tree(&self) -> Result<CoverTree> {
        CoverTree::from_parts(self.levels.clone(), self.parents.clone())
    }
}

/// Hub `r` is id 0 at level `m^2 + 1`; `x_i` is id `i` at level `i`, hanging
/// from `r` when `m | i` and from `x_{i+1}` otherwise.
fn train_line_set(m: u32, family: Family, prefix: &str) -> Result<GeneratedDataset<GraphPoint>> {
    TrainLine::<f64>::new(m)?;
    let top = m * m;
    let mut points = vec![GraphPoint::HubR];
    let mut labels = vec!["r".to_string()];
    let mut levels = vec![top as Level + 1];
    let mut parents = vec![None];
    for i in 1..=top {
        points.push(GraphPoint::Mid { family, index: i });
        labels.push(format!("{prefix}_{i}"));
        levels.push(i as Level);
        parents.push(Some(if i % m == 0 { 0 } else { i as PointId + 1 }));
    }
    Ok(GeneratedDataset {
        m,
        points,
        labels,
        levels,
        parents,
    })
}

/// `{r} ∪ {p_1, ..., p_{m^2}}` on the train-line graph.
pub fn gen_tall_imbalanced(m: u32) -> Result<GeneratedDataset<GraphPoint>> {
    train_line_set(m, Family::A, "p")
}

#[derive(Clone, Debug)]
pub struct BichromaticPair {
    pub query: GeneratedDataset<GraphPoint>,
    pub reference: GeneratedDataset<GraphPoint>,
}

/// `Q = {r, q_1, ...}` on one edge family and `R = {r, r_1, ...}` on the
/// other, both shaped like the tall tree. The hub `r` is shared.
pub fn gen_bichromatic(m: u32) -> Result<BichromaticPair> {
    Ok(BichromaticPair {
        query: train_line_set(m, Family::A, "q")?,
        reference: train_line_set(m, Family::B, "r")?,
    })
}

/// Complete `t`-ary tree with root at level `m` and leaves at level 0, on
/// the tree-path metric where the edge above a node at level `l` has length
/// `2^(l+1)`. Ids are breadth-first.
pub fn gen_balanced(t: u32, m: u32) -> Result<(GeneratedDataset<PointId>, MatrixMetric<f64>)> {
    if t < 2 {
        return Err(CctError::Input(format!("branching factor t = {t} must be at least 2")));
    }
    let mut levels: Vec<Level> = vec![m as Level];
    let mut parents: Vec<Option<PointId>> = vec![None];
    let mut frontier = vec![0usize];
    for level in (0..m as Level).rev() {
        let mut next = Vec::new();
        for &p in &frontier {
            for _ in 0..t {
                next.push(levels.len());
                levels.push(level);
                parents.push(Some(p));
            }
        }
        frontier = next;
    }
    let n = levels.len();
    // Distance from each node to the root; parents precede children.
    let mut up = vec![0f64; n];
    for p in 1..n {
        let a = parents[p].expect("non-root");
        up[p] = up[a] + f64::pow2(levels[p] + 1);
    }
    let tree = CoverTree::from_parts(levels.clone(), parents.clone())?;
    let paths: Vec<Vec<PointId>> = (0..n).map(|p| tree.path_to_root(p)).collect();
    let mut data = vec![0f64; n * n];
    for a in 0..n {
        for b in 0..n {
            let lca = paths[b].iter().find(|x| paths[a].contains(x)).copied().expect("shared root");
            data[a * n + b] = up[a] + up[b] - 2.0 * up[lca];
        }
    }
    let labels = (0..n).map(|p| p.to_string()).collect();
    let ds = GeneratedDataset {
        m,
        points: (0..n).collect(),
        labels,
        levels,
        parents,
    };
    Ok((ds, MatrixMetric::from_rows(n, data)?))
}

/// Floyd-Warshall over a small weighted graph.
fn shortest_paths(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n * n];
    for v in 0..n {
        d[v * n + v] = 0.0;
    }
    for &(a, b, w) in edges {
        d[a * n + b] = d[a * n + b].min(w);
        d[b * n + a] = d[b * n + a].min(w);
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                let via = d[a * n + k] + d[k * n + b];
                if via < d[a * n + b] {
                    d[a * n + b] = via;
                }
            }
        }
    }
    d
}

/// Five-point train line: hubs `r`, `q` joined by `g` (length 1), `e`
/// (length `2^6`) and `h` (length `2^h_exp`). `p_4` halves `e`, `p_3` halves
/// `(p_4, q)`, `p_2` halves `h`, `p_1` halves `(p_2, q)`. Ids `p_1..p_4` are
/// 0..3 and `r` is 4; `l(p_i) = i`, `r` parents `p_2`, `p_4`.
pub fn short_train_line(h_exp: u32) -> Result<(GeneratedDataset<PointId>, MatrixMetric<f64>)> {
    let (r, q, p1, p2, p3, p4) = (4, 5, 0, 1, 2, 3);
    let e = 64.0;
    let h = f64::pow2(h_exp as i32);
    let edges = [
        (r, q, 1.0),
        (r, p4, e / 2.0),
        (p4, p3, e / 4.0),
        (p3, q, e / 4.0),
        (r, p2, h / 2.0),
        (p2, p1, h / 4.0),
        (p1, q, h / 4.0),
    ];
    let all = shortest_paths(6, &edges);
    let data: Vec<f64> = (0..5).flat_map(|a| (0..5).map(move |b| (a, b))).map(|(a, b)| all[a * 6 + b]).collect();
    let ds = GeneratedDataset {
        m: 0,
        points: (0..5).collect(),
        labels: ["p_1", "p_2", "p_3", "p_4", "r"].iter().map(|s| s.to_string()).collect(),
        levels: vec![1, 2, 3, 4, 5],
        parents: vec![Some(p2), Some(r), Some(p4), Some(r), None],
    };
    Ok((ds, MatrixMetric::from_rows(5, data)?))
}

/// Explicit depth: along the path `w_0 = p, ..., w_k = root`, counts the
/// children of each `w_{s+1}` with level in `[l(w_s), l(w_{s+1}) - 1]`.
pub fn explicit_depth(tree: &CoverTree, p: PointId) -> usize {
    let path = tree.path_to_root(p);
    path.windows(2)
        .map(|w| {
            let (lo, hi) = (tree.level(w[0]), tree.level(w[1]));
            tree.children(w[1])
                .iter()
                .filter(|&&c| (lo..hi).contains(&tree.level(c)))
                .count()
        })
        .sum()
}
