//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cct_core::analysis::{
    c_qr, expansion_constant, expansion_growth_study, gen_balanced, gen_bichromatic, gen_tall_imbalanced,
    legacy_findallnn, structural_checks, Variant,
};
use cct_core::covertree::{build_seeded, distinctive_descendants_brute, DescendantCache};
use cct_core::knn::{knn_bruteforce, knn_paired, nn_sets, KnnOptions};
use cct_core::metric::{Euclidean, TrainLine};
use cct_core::traversal::{balanced_imbalance_formula, imbalance, TraversalStats};
use cct_core::{CoverTree, PointId};

type Outcome = std::result::Result<String, String>;

/// Counter-bound checks applied to every paired run in the suite.
#[derive(Default)]
struct Bounds {
    runs: u64,
    failures: Vec<String>,
}

impl Bounds {
    fn check(&mut self, label: &str, tq: &CoverTree, tr: &CoverTree, stats: &TraversalStats) {
        self.runs += 1;
        let bound = imbalance(tq, tr) + tr.height_set().len() as u64;
        if stats.reference_expansions > bound {
            self.failures.push(format!(
                "{label}: {} reference expansions > I + |H| = {bound}",
                stats.reference_expansions
            ));
        }
        if stats.query_expansions > 2 * tq.len() as u64 {
            self.failures.push(format!(
                "{label}: {} query expansions > 2|Q| = {}",
                stats.query_expansions,
                2 * tq.len()
            ));
        }
        for (side, t) in [("Q", tq), ("R", tr)] {
            if t.essential_level_total() > 2 * t.len() {
                self.failures.push(format!("{label}: sum |E| over {side} exceeds 2|{side}|"));
            }
        }
    }
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize, grid: bool) -> Vec<Vec<f64>> {
    // Grid side chosen so the grid holds at least 2n points.
    let side = ((2 * n) as f64).powf(1.0 / dim as f64).ceil() as u32 + 1;
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
    while pts.len() < n {
        let p: Vec<f64> = if grid {
            (0..dim).map(|_| rng.gen_range(0..side) as f64).collect()
        } else {
            (0..dim).map(|_| rng.gen::<f64>() * 100.0).collect()
        };
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts
}

fn ac1(bounds: &mut Bounds) -> Outcome {
    let start = Instant::now();
    let metric = Euclidean::<f64>::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACE1);
    let mut queries = 0usize;
    let mut verified = 0usize;
    for trial in 0..200u64 {
        let dim = [1usize, 2, 4, 8][trial as usize % 4];
        let k = [1usize, 3, 10][(trial as usize / 4) % 3];
        let self_pair = trial % 2 == 0;
        // Integer grids force distance ties.
        let grid = trial % 5 == 0 && dim > 1;
        let n_r = rng.gen_range(k + 1..=512);
        let r = random_points(&mut rng, n_r, dim, grid);
        let tr = build_seeded(&metric, &r, trial).map_err(|e| e.to_string())?;
        let (q, tq) = if self_pair {
            (r.clone(), tr.clone())
        } else {
            let n_q = rng.gen_range(1..=512);
            let q = random_points(&mut rng, n_q, dim, grid);
            let tq = build_seeded(&metric, &q, trial + 1000).map_err(|e| e.to_string())?;
            (q, tq)
        };
        let verify = r.len() <= 128 && q.len() <= 128;
        let opts = KnnOptions {
            k,
            exclude_self: self_pair,
            verify,
        };
        let (got, stats) = knn_paired(&metric, &q, &tq, &r, &tr, opts).map_err(|e| format!("trial {trial}: {e}"))?;
        bounds.check(&format!("AC1 trial {trial}"), &tq, &tr, &stats);
        let want = knn_bruteforce(&metric, &q, &r, k, self_pair).map_err(|e| e.to_string())?;
        let bad = got.distance_mismatches(&want);
        if let Some(&qid) = bad.first() {
            return Err(format!(
                "trial {trial} (n_r={n_r}, d={dim}, k={k}): query {qid} got {:?}, want {:?}",
                got.distances(qid),
                want.distances(qid)
            ));
        }
        queries += q.len();
        verified += usize::from(verify);
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:.1?} > 60 s"));
    }
    Ok(format!(
        "200 instances, {queries} queries exact; {verified} run with internal verification; {elapsed:.1?}"
    ))
}

fn ac2() -> Outcome {
    let metric = Euclidean::<f64>::new();
    let pts: Vec<Vec<f64>> = (0..4).map(|v| vec![v as f64]).collect();
    let table: [[Vec<PointId>; 3]; 4] = [
        [vec![1], vec![2], vec![3]],
        [vec![0, 2], vec![0, 2], vec![3]],
        [vec![1, 3], vec![1, 3], vec![0]],
        [vec![2], vec![1], vec![0]],
    ];
    for (q, want) in table.iter().enumerate() {
        let got = nn_sets(&metric, &pts[q], &pts, 3, true).map_err(|e| e.to_string())?;
        if got != want.to_vec() {
            return Err(format!("q = {q}: got {got:?}, want {want:?}"));
        }
    }
    let tree = build_seeded(&metric, &pts, 0).map_err(|e| e.to_string())?;
    let opts = KnnOptions {
        k: 3,
        exclude_self: true,
        verify: true,
    };
    let (res, _) = knn_paired(&metric, &pts, &tree, &pts, &tree, opts).map_err(|e| e.to_string())?;
    for (q, want) in table.iter().enumerate() {
        for (rank, (id, _)) in res.neighbors[q].iter().enumerate() {
            if !want[rank].contains(id) {
                return Err(format!("paired q = {q} rank {}: {id} not in {:?}", rank + 1, want[rank]));
            }
        }
    }
    Ok("NN_1..NN_3 for all four points match; paired solver picks from each set".into())
}

fn ac3() -> Outcome {
    // Five-node tree on {1,...,5}: levels 2, -1, 0, -1, 1.
    let five = CoverTree::from_parts(vec![2, -1, 0, -1, 1], vec![None, Some(0), Some(0), Some(2), Some(0)])
        .map_err(|e| e.to_string())?;
    let i = imbalance(&five, &five);
    let naive = five.len() * five.height_set().len();
    if (i, naive) != (11, 20) {
        return Err(format!("five-node tree: I = {i}, |Q||H| = {naive}"));
    }
    let mut pairs = 0;
    for t in [2u32, 3] {
        for m in 1..=4u32 {
            let (ds, _) = gen_balanced(t, m).map_err(|e| e.to_string())?;
            let tree = ds.tree().map_err(|e| e.to_string())?;
            let direct: u64 = (0..tree.len())
                .map(|q| {
                    tree.height_set()
                        .iter()
                        .filter(|&&h| h <= tree.level(q))
                        .count() as u64
                })
                .sum();
            let fast = imbalance(&tree, &tree);
            let formula = balanced_imbalance_formula(t, m).map_err(|e| e.to_string())?;
            if direct != fast || BigRational::from_integer(direct.into()) != formula {
                return Err(format!("t={t} m={m}: direct {direct}, fast {fast}, formula {formula}"));
            }
            pairs += 1;
        }
    }
    Ok(format!("five-node tree: I = 11, bound 20; {pairs} balanced pairs equal the closed form"))
}

fn ac4() -> Outcome {
    let seven = CoverTree::from_parts(
        vec![2, -1, 0, -1, 1, -1, 0],
        vec![None, Some(2), Some(0), Some(2), Some(0), Some(4), Some(4)],
    )
    .map_err(|e| e.to_string())?;
    let cache = DescendantCache::new(&seven);
    let counts: Vec<usize> = [2, 1, 0].iter().map(|&i| cache.count(0, i)).collect();
    if counts != [7, 4, 1] || distinctive_descendants_brute(&seven, 0, 1) != [0, 1, 2, 3] {
        return Err(format!("seven-node counts {counts:?}"));
    }
    let metric = Euclidean::<f64>::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACE4);
    let mut compared = 0u64;
    for seed in 0..50u64 {
        let n = rng.gen_range(1..=128);
        let dim = rng.gen_range(1..=4);
        let pts = random_points(&mut rng, n, dim, seed % 3 == 0);
        let tree = build_seeded(&metric, &pts, seed).map_err(|e| e.to_string())?;
        let cache = DescendantCache::new(&tree);
        for p in 0..tree.len() {
            for &i in tree.height_set().iter().filter(|&&i| i <= tree.level(p)) {
                let want = distinctive_descendants_brute(&tree, p, i).len();
                if cache.count(p, i) != want {
                    return Err(format!("tree {seed} node {p} level {i}: {} != {want}", cache.count(p, i)));
                }
                compared += 1;
            }
        }
    }
    Ok(format!("seven-node counts (7,4,1); {compared} cached counts equal brute force on 50 trees"))
}

fn ac5(bounds: &Bounds) -> Outcome {
    if bounds.failures.is_empty() {
        Ok(format!("{} paired runs within I + |H|, 2|Q| and sum |E| <= 2n", bounds.runs))
    } else {
        Err(format!("{} of {} runs: {}", bounds.failures.len(), bounds.runs, bounds.failures[0]))
    }
}

fn ac6() -> Outcome {
    let metric = Euclidean::<f64>::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACE6);
    let mut totals: Vec<(&'static str, u64, u64, Option<String>)> = Vec::new();
    for seed in 0..100u64 {
        let n = rng.gen_range(2..=256);
        let dim = [1usize, 2, 3][seed as usize % 3];
        let pts = random_points(&mut rng, n, dim, seed % 4 == 0);
        let tree = build_seeded(&metric, &pts, seed).map_err(|e| e.to_string())?;
        let checks = structural_checks(&tree, &metric, &pts, 1000, seed).map_err(|e| e.to_string())?;
        for c in checks {
            let entry = match totals.iter_mut().find(|t| t.0 == c.name) {
                Some(e) => e,
                None => {
                    totals.push((c.name, 0, 0, None));
                    totals.last_mut().expect("just pushed")
                }
            };
            entry.1 += c.checked;
            entry.2 += c.violations.len() as u64;
            if entry.3.is_none() {
                entry.3 = c.violations.first().map(|v| format!("tree {seed} (n={n}): {v}"));
            }
        }
    }
    let summary: Vec<String> = totals.iter().map(|t| format!("{} {}/{}", t.0, t.1 - t.2, t.1)).collect();
    let failed: Vec<String> = totals
        .iter()
        .filter(|t| t.2 > 0)
        .map(|t| format!("{}: {} violations, first {}", t.0, t.2, t.3.clone().unwrap_or_default()))
        .collect();
    if failed.is_empty() {
        Ok(summary.join("; "))
    } else {
        Err(format!("{} [{}]", failed.join("; "), summary.join("; ")))
    }
}

fn ac7() -> Outcome {
    let metric = Euclidean::<f64>::new();
    let fours: Vec<Vec<f64>> = (1..=8).map(|i| vec![4f64.powi(i)]).collect();
    let c = expansion_constant(&metric, &fours).map_err(|e| e.to_string())?;
    if c.c != 8.0 {
        return Err(format!("c({{4^i}}) = {}", c.c));
    }
    let grid: Vec<Vec<f64>> = (1..=64).map(|i| vec![i as f64]).collect();
    let g = expansion_constant(&metric, &grid).map_err(|e| e.to_string())?;
    if g.c > 4.0 {
        return Err(format!("c(1..64) = {}", g.c));
    }
    Ok(format!("c(4^1..4^8) = {}, c(1..64) = {}", c.c, g.c))
}

fn ac8(bounds: &mut Bounds) -> Outcome {
    let start = Instant::now();
    for m in [6u32, 8, 10, 12] {
        let ds = gen_tall_imbalanced(m).map_err(|e| e.to_string())?;
        let tree = ds.tree().map_err(|e| e.to_string())?;
        let metric = TrainLine::<BigRational>::new(m).map_err(|e| e.to_string())?;
        let legacy = legacy_findallnn(&metric, &ds.points, &tree, &ds.points, &tree, None).map_err(|e| e.to_string())?;
        if let Some((q, (a, _))) = legacy.nearest.iter().enumerate().find(|(q, (a, _))| q != a) {
            return Err(format!("m={m}: legacy answer for {q} is {a}, not itself"));
        }
        for k in [1usize, 3] {
            let opts = KnnOptions {
                k,
                exclude_self: true,
                verify: m <= 8,
            };
            let (got, stats) =
                knn_paired(&metric, &ds.points, &tree, &ds.points, &tree, opts).map_err(|e| format!("m={m}: {e}"))?;
            bounds.check(&format!("AC8 m={m} k={k}"), &tree, &tree, &stats);
            let want = knn_bruteforce(&metric, &ds.points, &ds.points, k, true).map_err(|e| e.to_string())?;
            if let Some(q) = got.distance_mismatches(&want).first() {
                return Err(format!("m={m} k={k}: paired answer for {q} differs from brute force"));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        return Err(format!("took {elapsed:.1?} > 30 s"));
    }
    Ok(format!("legacy returns every point as its own neighbor for m in 6,8,10,12; paired solver exact; {elapsed:.1?}"))
}

fn ac9(bounds: &mut Bounds) -> Outcome {
    let start = Instant::now();
    let ms: Vec<u32> = (6..=14).collect();
    let study = expansion_growth_study(Variant::Bichromatic, &ms).map_err(|e| e.to_string())?;
    for (row, &m) in study.rows.iter().zip(&ms) {
        let lower: u64 = (2..=(m * m + 1) as u64).map(|u| u - 2).sum();
        if row.ref_expansions < lower {
            return Err(format!("m={m}: {} legacy expansions < {lower}", row.ref_expansions));
        }
        if row.corrected_ref_expansions > row.imbalance + row.height as u64 {
            return Err(format!(
                "m={m}: paired solver made {} expansions > I + |H| = {}",
                row.corrected_ref_expansions,
                row.imbalance + row.height as u64
            ));
        }
    }
    let pair = gen_bichromatic(6).map_err(|e| e.to_string())?;
    let metric = TrainLine::<BigRational>::new(6).map_err(|e| e.to_string())?;
    let (tq, tr) = (pair.query.tree().map_err(|e| e.to_string())?, pair.reference.tree().map_err(|e| e.to_string())?);
    let (_, stats) = knn_paired(&metric, &pair.query.points, &tq, &pair.reference.points, &tr, KnnOptions::new(1))
        .map_err(|e| e.to_string())?;
    bounds.check("AC9 m=6", &tq, &tr, &stats);
    if study.slope < 3.5 {
        return Err(format!("log-log slope {:.3} < 3.5", study.slope));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        return Err(format!("took {elapsed:.1?} > 120 s"));
    }
    let last = study.rows.last().expect("rows");
    Ok(format!(
        "legacy expansions meet the sum bound for m = 6..14 (m=14: {}); slope {:.3}; paired stays within I + |H|; {elapsed:.1?}",
        last.ref_expansions, study.slope
    ))
}

fn ac10(bounds: &mut Bounds) -> Outcome {
    let metric = Euclidean::<f64>::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC10);
    let mut worst = 0.0f64;
    for trial in 0..12u64 {
        let dim = [1usize, 2, 3][trial as usize % 3];
        let k = [1usize, 3, 10][trial as usize % 3];
        let self_pair = trial % 2 == 0;
        let n_r = rng.gen_range(k + 2..=256);
        let r = random_points(&mut rng, n_r, dim, false);
        let n_q = rng.gen_range(1..=64);
        let q = if self_pair { r.clone() } else { random_points(&mut rng, n_q, dim, false) };
        let tr = build_seeded(&metric, &r, trial).map_err(|e| e.to_string())?;
        let tq = build_seeded(&metric, &q, trial + 50).map_err(|e| e.to_string())?;
        let opts = KnnOptions {
            k,
            exclude_self: self_pair,
            verify: false,
        };
        let (_, stats) = knn_paired(&metric, &q, &tq, &r, &tr, opts).map_err(|e| e.to_string())?;
        bounds.check(&format!("AC10 trial {trial}"), &tq, &tr, &stats);
        let k_search = if self_pair { k + 1 } else { k } as f64;
        let c = expansion_constant(&metric, &r).map_err(|e| e.to_string())?.c;
        let cq = c_qr(&metric, &q, &r).map_err(|e| e.to_string())?;
        let bound = (cq.powi(3) * k_search).max(c.powi(7));
        if stats.max_candidate_width as f64 > bound {
            return Err(format!("trial {trial}: width {} > {bound}", stats.max_candidate_width));
        }
        worst = worst.max(stats.max_candidate_width as f64 / bound);
    }
    Ok(format!("12 instances: max |R_i| <= max(c_qr^3 k, c^7); largest ratio {worst:.2e}"))
}

fn main() -> ExitCode {
    let mut bounds = Bounds::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut timed = |name: &'static str, outcome: fn(&mut Bounds) -> Outcome, bounds: &mut Bounds| {
        let start = Instant::now();
        let o = outcome(bounds);
        eprintln!("{name}: {:.1?}", start.elapsed());
        results.push((name, o));
    };
    timed("AC1 oracle equivalence", ac1, &mut bounds);
    timed("AC2 four-point table", |_| ac2(), &mut bounds);
    timed("AC3 imbalance fixtures", |_| ac3(), &mut bounds);
    timed("AC4 distinctive descendant counts", |_| ac4(), &mut bounds);
    timed("AC6 structural bounds", |_| ac6(), &mut bounds);
    timed("AC7 expansion constants", |_| ac7(), &mut bounds);
    timed("AC8 trivial legacy neighbors", ac8, &mut bounds);
    timed("AC9 legacy expansion growth", ac9, &mut bounds);
    timed("AC10 candidate width bound", ac10, &mut bounds);
    results.insert(4, ("AC5 counter bounds", ac5(&bounds)));
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
