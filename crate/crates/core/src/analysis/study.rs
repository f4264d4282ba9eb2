use std::fmt::Write as _;

use num_rational::BigRational;

use super::generators::{gen_bichromatic, gen_tall_imbalanced, Variant};
use super::legacy::legacy_findallnn;
use crate::error::{CctError, Result};
use crate::knn::{knn_paired, KnnOptions};
use crate::metric::TrainLine;
use crate::traversal::imbalance;

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub m: u32,
    pub n: usize,
    /// Legacy reference expansions.
    pub ref_expansions: u64,
    pub imbalance: u64,
    pub height: usize,
    pub distance_calls: u64,
    /// Reference expansions of the paired k-NN solver on the same trees.
    pub corrected_ref_expansions: u64,
    /// Nodes whose legacy answer was themselves.
    pub trivial: usize,
}

#[derive(Clone, Debug)]
pub struct GrowthStudy {
    pub variant: Variant,
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of `log(ref_expansions)` against `log(m)`.
    pub slope: f64,
}

impl GrowthStudy {
    pub const CSV_HEADER: &'static str = "m,n,ref_expansions,imbalance,height,distance_calls";

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", Self::CSV_HEADER);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.m, r.n, r.ref_expansions, r.imbalance, r.height, r.distance_calls
            );
        }
        let _ = writeln!(s, "# log-log slope of ref_expansions vs m: {:.4}", self.slope);
        s
    }
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Legacy and paired solvers on the generated pair for one `m`.
pub fn study_row(variant: Variant, m: u32) -> Result<StudyRow> {
    let metric = TrainLine::<BigRational>::new(m)?;
    let (q_ds, r_ds, exclude_self) = match variant {
        Variant::TallImbalanced => {
            let ds = gen_tall_imbalanced(m)?;
            (ds.clone(), ds, true)
        }
        Variant::Bichromatic => {
            let pair = gen_bichromatic(m)?;
            (pair.query, pair.reference, false)
        }
        Variant::Balanced => {
            return Err(CctError::Input("growth study runs on tall-imbalanced or bichromatic".into()));
        }
    };
    let (tq, tr) = (q_ds.tree()?, r_ds.tree()?);
    let legacy = legacy_findallnn(&metric, &q_ds.points, &tq, &r_ds.points, &tr, None)?;
    let opts = KnnOptions {
        k: 1,
        exclude_self,
        verify: false,
    };
    let (_, stats) = knn_paired(&metric, &q_ds.points, &tq, &r_ds.points, &tr, opts)?;
    Ok(StudyRow {
        m,
        n: r_ds.len(),
        ref_expansions: legacy.stats.reference_expansions,
        imbalance: imbalance(&tq, &tr),
        height: tr.height_set().len(),
        distance_calls: legacy.stats.distance_calls,
        corrected_ref_expansions: stats.reference_expansions,
        trivial: legacy.trivial_count(),
    })
}

pub fn expansion_growth_study(variant: Variant, m_list: &[u32]) -> Result<GrowthStudy> {
    if m_list.len() < 2 {
        return Err(CctError::Input("growth study needs at least two values of m".into()));
    }
    let rows = m_list.iter().map(|&m| study_row(variant, m)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ref_expansions as f64).collect();
    Ok(GrowthStudy {
        variant,
        slope: loglog_slope(&xs, &ys),
        rows,
    })
}
