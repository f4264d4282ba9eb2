//! Distance oracles: Euclidean vectors, train-line metric graphs and explicit
//! distance tables, plus call counting and metric-axiom checks.

use std::fmt::{self, Debug};
use std::marker::PhantomData;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{Float, Zero};

use crate::error::{CctError, Result};
use crate::scalar::Scalar;

/// Dense index of a point inside its dataset.
pub type PointId = usize;

/// Cover tree level. Node `p` at level `i` covers a ball of radius `2^(i+1)`.
pub type Level = i32;

pub trait Metric: Sync {
    type Point: Clone + Debug + Send + Sync;
    type Scalar: Scalar;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Self::Scalar;
}

impl<M: Metric + ?Sized> Metric for &M {
    type Point = M::Point;
    type Scalar = M::Scalar;

    #[inline]
    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Self::Scalar {
        (**self).distance(a, b)
    }
}

/// L2 distance with a dimension check.
pub fn euclidean_distance<T: Float>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(CctError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(l2(a, b))
}

#[inline]
fn l2<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| {
            let d = x - y;
            acc + d * d
        })
        .sqrt()
}

/// Euclidean metric on coordinate vectors. Dimensions are checked at load.
#[derive(Clone, Copy, Debug, Default)]
pub struct Euclidean<T>(PhantomData<T>);

impl<T> Euclidean<T> {
    pub fn new() -> Self {
        Euclidean(PhantomData)
    }
}

impl<T: Float + Scalar> Metric for Euclidean<T> {
    type Point = Vec<T>;
    type Scalar = T;

    #[inline]
    fn distance(&self, a: &Vec<T>, b: &Vec<T>) -> T {
        debug_assert_eq!(a.len(), b.len());
        l2(a, b)
    }
}

/// Which branch of the two-vertex graph a midpoint lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// The single family of the tall imbalanced set, and the query family
    /// of the bichromatic pair.
    A,
    /// Reference family of the bichromatic pair.
    B,
}

/// A point of the train-line graph: one of the two hub vertices or the
/// midpoint `x_i` on a branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphPoint {
    HubR,
    HubQ,
    Mid { family: Family, index: u32 },
}

/// Shortest-path metric of the train-line graph with block size `m`.
///
/// Hubs `r` and `q` are joined by an edge of length 1 and, per family, by
/// edges of length `2^(m*b+2)` for `b = 1..=m`. Midpoint `x_i` with `m | i`
/// halves edge `i/m`; every other `x_i` halves the segment `(x_{i+1}, q)`.
/// Hence `d(x_i, q) = 2^(i+1)` and the distances below follow.
#[derive(Clone, Debug)]
pub struct TrainLine<T> {
    m: u32,
    _scalar: PhantomData<T>,
}

pub const TRAIN_LINE_MIN_M: u32 = 4;
pub const TRAIN_LINE_MAX_M: u32 = 22;

impl<T: Scalar> TrainLine<T> {
    pub fn new(m: u32) -> Result<Self> {
        if !(TRAIN_LINE_MIN_M..=TRAIN_LINE_MAX_M).contains(&m) {
            return Err(CctError::Input(format!(
                "m = {m} out of range [{TRAIN_LINE_MIN_M}, {TRAIN_LINE_MAX_M}]"
            )));
        }
        Ok(TrainLine {
            m,
            _scalar: PhantomData,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    fn block(&self, i: u32) -> u32 {
        i.div_ceil(self.m)
    }

    fn to_q(i: u32) -> T {
        T::pow2(i as i32 + 1)
    }

    fn to_r(&self, i: u32) -> T {
        if i % self.m == 0 {
            T::pow2(i as i32 + 1)
        } else {
            T::pow2(i as i32 + 1) + T::one()
        }
    }

    /// Checks that a point is one this graph can place.
    pub fn contains(&self, p: &GraphPoint) -> bool {
        match *p {
            GraphPoint::Mid { index, .. } => index >= 1 && index <= self.m * self.m,
            _ => true,
        }
    }
}

impl<T: Scalar> Metric for TrainLine<T> {
    type Point = GraphPoint;
    type Scalar = T;

    fn distance(&self, a: &GraphPoint, b: &GraphPoint) -> T {
        use GraphPoint::*;
        match (*a, *b) {
            (HubR, HubR) | (HubQ, HubQ) => T::zero(),
            (HubR, HubQ) | (HubQ, HubR) => T::one(),
            (HubQ, Mid { index, .. }) | (Mid { index, .. }, HubQ) => Self::to_q(index),
            (HubR, Mid { index, .. }) | (Mid { index, .. }, HubR) => self.to_r(index),
            (
                Mid {
                    family: fa,
                    index: i,
                },
                Mid {
                    family: fb,
                    index: j,
                },
            ) => {
                if fa == fb && self.block(i) == self.block(j) {
                    // Same branch: the nearer midpoint lies on the path to q.
                    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
                    Self::to_q(hi) - Self::to_q(lo)
                } else {
                    Self::to_q(i) + Self::to_q(j)
                }
            }
        }
    }
}

/// Explicit symmetric distance table; points are row indices.
#[derive(Clone, Debug)]
pub struct MatrixMetric<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> MatrixMetric<T> {
    /// Builds the table from a full row-major `n x n` vector.
    pub fn from_rows(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(CctError::Input(format!(
                "distance table has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        Ok(MatrixMetric { n, data })
    }

    /// Tabulates another metric over `points`.
    pub fn tabulate<M: Metric<Scalar = T>>(metric: &M, points: &[M::Point]) -> Self {
        let n = points.len();
        let mut data = vec![T::zero(); n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let d = metric.distance(&points[a], &points[b]);
                data[a * n + b] = d.clone();
                data[b * n + a] = d;
            }
        }
        MatrixMetric { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Overwrites one entry (both orientations unless `asymmetric`).
    pub fn set(&mut self, a: usize, b: usize, d: T, asymmetric: bool) {
        self.data[a * self.n + b] = d.clone();
        if !asymmetric {
            self.data[b * self.n + a] = d;
        }
    }

    pub fn get(&self, a: usize, b: usize) -> &T {
        &self.data[a * self.n + b]
    }

    /// Point list `0..n` to pair with this metric.
    pub fn points(&self) -> Vec<usize> {
        (0..self.n).collect()
    }
}

impl<T: Scalar> Metric for MatrixMetric<T> {
    type Point = usize;
    type Scalar = T;

    #[inline]
    fn distance(&self, a: &usize, b: &usize) -> T {
        self.data[a * self.n + b].clone()
    }
}

/// Thread-safe call counter.
#[derive(Debug, Default)]
pub struct DistanceCounter(AtomicU64);

impl DistanceCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn increment(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

/// Wraps a metric and counts every evaluation.
#[derive(Debug)]
pub struct Counted<M> {
    inner: M,
    counter: DistanceCounter,
}

impl<M: Metric> Counted<M> {
    pub fn new(inner: M) -> Self {
        Counted {
            inner,
            counter: DistanceCounter::new(),
        }
    }

    pub fn calls(&self) -> u64 {
        self.counter.get()
    }

    pub fn counter(&self) -> &DistanceCounter {
        &self.counter
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: Metric> Metric for Counted<M> {
    type Point = M::Point;
    type Scalar = M::Scalar;

    #[inline]
    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Self::Scalar {
        self.counter.increment();
        self.inner.distance(a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxiomKind {
    Symmetry,
    Identity,
    Positivity,
    Triangle,
}

/// First failing check: for `Triangle`, `d(a,c) > d(a,b) + d(b,c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation {
    pub kind: AxiomKind,
    pub a: PointId,
    pub b: PointId,
    pub c: PointId,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AxiomKind::Symmetry => write!(f, "asymmetric pair ({}, {})", self.a, self.b),
            AxiomKind::Identity => write!(f, "nonzero self-distance at {}", self.a),
            AxiomKind::Positivity => {
                write!(f, "zero distance between distinct ({}, {})", self.a, self.b)
            }
            AxiomKind::Triangle => write!(
                f,
                "triangle inequality fails: d({a},{c}) > d({a},{b}) + d({b},{c})",
                a = self.a,
                b = self.b,
                c = self.c
            ),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AxiomReport {
    pub triples_checked: usize,
    pub first_violation: Option<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

fn check_triple<T: Scalar>(d: impl Fn(usize, usize) -> T, a: usize, b: usize, c: usize) -> Option<AxiomViolation> {
    let v = |kind, a, b, c| Some(AxiomViolation { kind, a, b, c });
    for &x in &[a, b, c] {
        if d(x, x) != T::zero() {
            return v(AxiomKind::Identity, x, x, x);
        }
    }
    for &(x, y) in &[(a, b), (b, c), (a, c)] {
        if d(x, y) != d(y, x) {
            return v(AxiomKind::Symmetry, x, y, y);
        }
        if x != y && d(x, y) <= T::zero() {
            return v(AxiomKind::Positivity, x, y, y);
        }
    }
    // Each vertex in turn as the intermediate point.
    for &(x, y, z) in &[(a, b, c), (b, a, c), (a, c, b)] {
        if d(x, z) > d(x, y) + d(y, z) {
            return v(AxiomKind::Triangle, x, y, z);
        }
    }
    None
}

/// Checks symmetry, identity of indiscernibles and the triangle inequality
/// on each sampled triple; stops at the first violation.
pub fn verify_metric_axioms<M: Metric>(
    metric: &M,
    points: &[M::Point],
    triples: impl IntoIterator<Item = (PointId, PointId, PointId)>,
) -> AxiomReport {
    let d = |x: usize, y: usize| metric.distance(&points[x], &points[y]);
    let mut report = AxiomReport::default();
    for (a, b, c) in triples {
        report.triples_checked += 1;
        if let Some(v) = check_triple(d, a, b, c) {
            report.first_violation = Some(v);
            break;
        }
    }
    report
}

/// All unordered triples `a <= b <= c`, evaluated against a tabulated copy of
/// the metric. Meant for `n` up to a few hundred.
pub fn verify_metric_axioms_exhaustive<M: Metric>(metric: &M, points: &[M::Point]) -> AxiomReport {
    let n = points.len();
    let mut table = Vec::with_capacity(n * n);
    for a in points {
        for b in points {
            table.push(metric.distance(a, b));
        }
    }
    let d = |x: usize, y: usize| table[x * n + y].clone();
    let mut report = AxiomReport::default();
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                report.triples_checked += 1;
                if let Some(v) = check_triple(d, a, b, c) {
                    report.first_violation = Some(v);
                    return report;
                }
            }
        }
    }
    report
}

/// Rejects any pair of distinct ids at distance zero. Quadratic.
pub fn check_distinct<M: Metric>(metric: &M, points: &[M::Point]) -> Result<()> {
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            if metric.distance(&points[a], &points[b]) <= M::Scalar::zero() {
                return Err(CctError::DuplicatePoint { first: a, second: b });
            }
        }
    }
    Ok(())
}
