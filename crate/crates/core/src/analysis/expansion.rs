use num_traits::Zero;

use crate::error::{CctError, Result};
use crate::metric::{Metric, PointId};
use crate::scalar::Scalar;

/// Exact expansion constant with the ball pair that attains it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionReport {
    /// `max(2, max |B(p,2t)| / |B(p,t)|)`.
    pub c: f64,
    pub witness: PointId,
    pub witness_radius: f64,
    /// `|B(witness, 2t)|` and `|B(witness, t)|` at the witness radius.
    pub outer: usize,
    pub inner: usize,
}

fn count_within<S: Scalar>(sorted: &[S], r: &S) -> usize {
    sorted.partition_point(|d| d <= r)
}

/// Largest ball-growth ratio around `center` over the critical radii
/// `{d, d/2}`, which are the only places either ball count can change.
fn center_ratio<S: Scalar>(dists: &mut [S]) -> (usize, usize, S) {
    dists.sort_by(|a, b| a.total_cmp(b));
    let mut best = (1usize, 1usize, S::zero());
    for d in dists.iter() {
        for t in [d.halve(), d.clone()] {
            let inner = count_within(dists, &t);
            let outer = count_within(dists, &(t.clone() + t.clone()));
            if outer * best.1 > best.0 * inner {
                best = (outer, inner, t);
            }
        }
    }
    best
}

/// `c(R)` by an exact scan over every center and critical radius.
pub fn expansion_constant<M: Metric>(metric: &M, points: &[M::Point]) -> Result<ExpansionReport> {
    if points.len() < 2 {
        return Err(CctError::Input("expansion constant needs at least two points".into()));
    }
    let mut report = ExpansionReport {
        c: 2.0,
        witness: 0,
        witness_radius: 0.0,
        outer: 1,
        inner: 1,
    };
    for (p, center) in points.iter().enumerate() {
        let mut dists: Vec<M::Scalar> = points.iter().map(|x| metric.distance(center, x)).collect();
        let (outer, inner, t) = center_ratio(&mut dists);
        if outer * report.inner > report.outer * inner {
            report.outer = outer;
            report.inner = inner;
            report.witness = p;
            report.witness_radius = t.to_f64();
        }
    }
    report.c = (report.outer as f64 / report.inner as f64).max(2.0);
    Ok(report)
}

/// Whether `|B(p,2t)| <= c |B(p,t)|` holds at every center and critical
/// radius; returns the first `(center, t)` that breaks it.
pub fn expansion_witness<M: Metric>(metric: &M, points: &[M::Point], c: f64) -> Option<(PointId, f64)> {
    for (p, center) in points.iter().enumerate() {
        let mut dists: Vec<M::Scalar> = points.iter().map(|x| metric.distance(center, x)).collect();
        dists.sort_by(|a, b| a.total_cmp(b));
        for d in dists.iter() {
            for t in [d.halve(), d.clone()] {
                let inner = count_within(&dists, &t) as f64;
                let outer = count_within(&dists, &(t.clone() + t.clone())) as f64;
                if outer > c * inner {
                    return Some((p, t.to_f64()));
                }
            }
        }
    }
    None
}

/// `c_qr = max over q of c(R ∪ {q})`. A query already in `R` (distance 0 to
/// some reference point) contributes `c(R)`.
pub fn c_qr<M: Metric>(metric: &M, queries: &[M::Point], r_points: &[M::Point]) -> Result<f64> {
    let base = expansion_constant(metric, r_points)?.c;
    let mut best = base;
    for q in queries {
        if r_points.iter().any(|r| metric.distance(q, r).is_zero()) {
            continue;
        }
        let mut ext: Vec<M::Point> = r_points.to_vec();
        ext.push(q.clone());
        best = best.max(expansion_constant(metric, &ext)?.c);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AspectRatio<S> {
    pub diameter: S,
    pub min_distance: S,
    pub ratio: f64,
}

pub fn aspect_ratio<M: Metric>(metric: &M, points: &[M::Point]) -> Result<AspectRatio<M::Scalar>> {
    if points.len() < 2 {
        return Err(CctError::Input("aspect ratio needs at least two points".into()));
    }
    let mut diameter = M::Scalar::zero();
    let mut min_distance: Option<M::Scalar> = None;
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let d = metric.distance(&points[a], &points[b]);
            if d > diameter {
                diameter = d.clone();
            }
            if min_distance.as_ref().map_or(true, |m| d < *m) {
                min_distance = Some(d);
            }
        }
    }
    let min_distance = min_distance.expect("at least one pair");
    let ratio = diameter.to_f64() / min_distance.to_f64();
    Ok(AspectRatio {
        diameter,
        min_distance,
        ratio,
    })
}
