use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use cct_core::analysis::{
    aspect_ratio, c_qr, expansion_constant, expansion_growth_study, gen_balanced, gen_bichromatic,
    gen_tall_imbalanced, legacy_findallnn, structural_checks, GeneratedDataset, Variant,
};
use cct_core::covertree::{
    build_given_levels, build_seeded, check_level_span, deserialize_tree, parse_tree, serialize_tree, validate_tree,
};
use cct_core::io::{read_matrix_csv, read_points_csv, write_labels_csv, write_matrix_csv, write_neighbors_csv};
use cct_core::knn::{knn_bruteforce, knn_paired, KnnOptions};
use cct_core::metric::{Euclidean, MatrixMetric, TrainLine};
use cct_core::traversal::{imbalance, TraversalStats};
use cct_core::{CctError, CoverTree, ExactScalar, Metric, Result, Scalar};

use crate::{AnalyzeArgs, BenchArgs, BuildArgs, DataArgs, GenArgs, KnnArgs, LegacyArgs, ValidateArgs};

enum Data {
    Coords(Vec<Vec<f64>>),
    Matrix(MatrixMetric<ExactScalar>),
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CctError::Input(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CctError::Input(format!("{}: {e}", path.display())))
}

fn load(data: &DataArgs) -> Result<Data> {
    match (&data.input, &data.matrix) {
        (Some(p), None) => Ok(Data::Coords(read_points_csv(open(p)?)?)),
        (None, Some(p)) => Ok(Data::Matrix(read_matrix_csv(open(p)?)?)),
        _ => Err(CctError::Input("give exactly one of --input or --matrix".into())),
    }
}

fn load_query(path: Option<&Path>, data: &Data) -> Result<Option<Vec<Vec<f64>>>> {
    match (path, data) {
        (None, _) => Ok(None),
        (Some(p), Data::Coords(_)) => Ok(Some(read_points_csv(open(p)?)?)),
        (Some(_), Data::Matrix(_)) => Err(CctError::Input("--query needs coordinate input, not --matrix".into())),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CctError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Reads a tree file if given, else builds one from `seed`. Coordinate trees
/// must also stay within the level span.
fn reference_tree<M: Metric>(
    metric: &M,
    points: &[M::Point],
    tree: Option<&Path>,
    seed: u64,
    coords: bool,
) -> Result<CoverTree> {
    let t = match tree {
        Some(p) => deserialize_tree(&read_text(p)?, metric, points)?,
        None => build_seeded(metric, points, seed)?,
    };
    if coords {
        check_level_span(&t)?;
    }
    Ok(t)
}

pub fn build(args: BuildArgs) -> Result<()> {
    let data = load(&args.data)?;
    let given = args.given_levels.as_deref().map(read_text).transpose()?;
    let text = match &data {
        Data::Coords(pts) => build_one(&Euclidean::<f64>::new(), pts, given.as_deref(), args.seed, true)?,
        Data::Matrix(m) => build_one(m, &m.points(), given.as_deref(), args.seed, false)?,
    };
    emit(args.out.as_deref(), &text)
}

fn build_one<M: Metric>(metric: &M, points: &[M::Point], given: Option<&str>, seed: u64, coords: bool) -> Result<String> {
    let tree = match given {
        Some(text) => {
            let shape = parse_tree(text)?;
            build_given_levels(metric, points, shape.levels().to_vec(), shape.parents().to_vec())?
        }
        None => build_seeded(metric, points, seed)?,
    };
    if coords {
        check_level_span(&tree)?;
    }
    Ok(serialize_tree(&tree))
}

pub fn validate(args: ValidateArgs) -> Result<()> {
    let data = load(&args.data)?;
    let tree = parse_tree(&read_text(&args.tree)?)?;
    let report = match &data {
        Data::Coords(pts) => validate_tree(&tree, &Euclidean::<f64>::new(), pts),
        Data::Matrix(m) => validate_tree(&tree, m, &m.points()),
    };
    if report.passed() {
        println!("{report}");
        Ok(())
    } else {
        Err(CctError::Verification(report.violations.iter().map(|v| v.to_string()).collect()))
    }
}

pub fn knn(args: KnnArgs) -> Result<()> {
    let data = load(&args.data)?;
    let query = load_query(args.query.as_deref(), &data)?;
    let opts = KnnOptions {
        k: args.k,
        exclude_self: args.exclude_self,
        verify: args.verify,
    };
    let (csv, stats) = match &data {
        Data::Coords(r) => {
            let metric = Euclidean::<f64>::new();
            let tr = reference_tree(&metric, r, args.tree.as_deref(), args.seed, true)?;
            let (res, stats) = match &query {
                Some(q) => {
                    let tq = build_seeded(&metric, q, args.seed)?;
                    check_level_span(&tq)?;
                    knn_paired(&metric, q, &tq, r, &tr, opts)?
                }
                None => knn_paired(&metric, r, &tr, r, &tr, opts)?,
            };
            let mut buf = Vec::new();
            write_neighbors_csv(&mut buf, &res)?;
            (buf, stats)
        }
        Data::Matrix(m) => {
            let pts = m.points();
            let tr = reference_tree(m, &pts, args.tree.as_deref(), args.seed, false)?;
            let (res, stats) = knn_paired(m, &pts, &tr, &pts, &tr, opts)?;
            let mut buf = Vec::new();
            write_neighbors_csv(&mut buf, &res)?;
            (buf, stats)
        }
    };
    eprint!("{}", stats.key_values());
    emit(args.out.as_deref(), &String::from_utf8(csv).expect("csv output is utf-8"))
}

fn write_dataset<M: Metric>(
    dir: &Path,
    prefix: &str,
    metric: &M,
    ds: &GeneratedDataset<M::Point>,
) -> Result<()> {
    let tree = ds.tree()?;
    let report = validate_tree(&tree, metric, &ds.points);
    if !report.passed() {
        return Err(CctError::Validation(report.to_string()));
    }
    write_labels_csv(File::create(dir.join(format!("{prefix}points.csv")))?, &ds.labels)?;
    fs::write(dir.join(format!("{prefix}tree.txt")), serialize_tree(&tree))?;
    write_matrix_csv(File::create(dir.join(format!("{prefix}matrix.csv")))?, metric, &ds.points)?;
    Ok(())
}

pub fn gen(args: GenArgs) -> Result<()> {
    let variant: Variant = args.variant.parse()?;
    fs::create_dir_all(&args.out)?;
    let dir = args.out.as_path();
    match variant {
        Variant::TallImbalanced => {
            let metric = TrainLine::<ExactScalar>::new(args.m)?;
            write_dataset(dir, "", &metric, &gen_tall_imbalanced(args.m)?)?;
        }
        Variant::Bichromatic => {
            let metric = TrainLine::<ExactScalar>::new(args.m)?;
            let pair = gen_bichromatic(args.m)?;
            write_dataset(dir, "query_", &metric, &pair.query)?;
            write_dataset(dir, "reference_", &metric, &pair.reference)?;
        }
        Variant::Balanced => {
            let (ds, metric) = gen_balanced(args.t, args.m)?;
            write_dataset(dir, "", &metric, &ds)?;
        }
    }
    println!("wrote {variant} (m = {}) to {}", args.m, dir.display());
    Ok(())
}

pub fn legacy(args: LegacyArgs) -> Result<()> {
    let variant: Variant = args.variant.parse()?;
    if !args.m_list.is_empty() {
        let study = expansion_growth_study(variant, &args.m_list)?;
        return emit(args.out.as_deref(), &study.to_csv());
    }
    let m = args.m.expect("clap requires --m without --m-list");
    let (q_ds, r_ds) = match variant {
        Variant::TallImbalanced if args.self_pair => {
            let ds = gen_tall_imbalanced(m)?;
            (ds.clone(), ds)
        }
        Variant::TallImbalanced => {
            return Err(CctError::Input("tall-imbalanced has a single set; pass --self-pair".into()));
        }
        Variant::Bichromatic => {
            let pair = gen_bichromatic(m)?;
            if args.self_pair {
                (pair.reference.clone(), pair.reference)
            } else {
                (pair.query, pair.reference)
            }
        }
        Variant::Balanced => {
            return Err(CctError::Input("legacy runs on tall-imbalanced or bichromatic".into()));
        }
    };
    let metric = TrainLine::<ExactScalar>::new(m)?;
    let (tq, tr) = (q_ds.tree()?, r_ds.tree()?);
    let out = legacy_findallnn(&metric, &q_ds.points, &tq, &r_ds.points, &tr, args.trace)?;

    let opts = KnnOptions {
        k: 1,
        exclude_self: args.self_pair,
        verify: false,
    };
    let (paired, paired_stats) = knn_paired(&metric, &q_ds.points, &tq, &r_ds.points, &tr, opts)?;
    let brute = knn_bruteforce(&metric, &q_ds.points, &r_ds.points, 1, args.self_pair)?;
    let mismatches = paired.distance_mismatches(&brute);

    let trivial = out.trivial_count();
    let mut s = String::new();
    let _ = writeln!(s, "variant: {variant}");
    let _ = writeln!(s, "m: {m}");
    let _ = writeln!(s, "query points: {}", q_ds.len());
    let _ = writeln!(s, "reference points: {}", r_ds.len());
    let _ = writeln!(s, "legacy reference expansions: {}", out.stats.reference_expansions);
    let _ = writeln!(s, "legacy distance calls: {}", out.stats.distance_calls);
    let _ = writeln!(s, "imbalance: {}", imbalance(&tq, &tr));
    let _ = writeln!(s, "height: {}", tr.height_set().len());
    let _ = writeln!(s, "trivial neighbors: {trivial} of {}", q_ds.len());
    let _ = writeln!(s, "all neighbors trivial: {}", trivial == q_ds.len());
    let _ = writeln!(s, "paired reference expansions: {}", paired_stats.reference_expansions);
    let _ = writeln!(s, "paired solver matches brute force: {}", mismatches.is_empty());
    for step in &out.trace {
        let _ = writeln!(s, "trace: i={} j={} survivors={:?}", step.level, step.j, step.survivors);
    }
    emit(args.out.as_deref(), &s)?;
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(CctError::Verification(
            mismatches.iter().map(|q| format!("query {q} differs from brute force")).collect(),
        ))
    }
}

pub fn analyze(args: AnalyzeArgs) -> Result<()> {
    let data = load(&args.data)?;
    let query = load_query(args.query.as_deref(), &data)?;
    let text = match &data {
        Data::Coords(r) => {
            let metric = Euclidean::<f64>::new();
            let mut s = analyze_one(&metric, r, args.tree.as_deref(), args.seed, true, args.checks)?;
            if let Some(q) = &query {
                let _ = writeln!(s, "c_qr = {}", c_qr(&metric, q, r)?);
            }
            s
        }
        Data::Matrix(m) => analyze_one(m, &m.points(), args.tree.as_deref(), args.seed, false, args.checks)?,
    };
    print!("{text}");
    Ok(())
}

fn analyze_one<M: Metric>(
    metric: &M,
    points: &[M::Point],
    tree: Option<&Path>,
    seed: u64,
    coords: bool,
    checks: bool,
) -> Result<String> {
    let t = reference_tree(metric, points, tree, seed, coords)?;
    let mut s = String::new();
    let _ = writeln!(s, "points: {}", points.len());
    if points.len() >= 2 {
        let e = expansion_constant(metric, points)?;
        let _ = writeln!(s, "c(R) = {}", e.c);
        let _ = writeln!(
            s,
            "witness: point {} at radius {} ({} vs {} points)",
            e.witness, e.witness_radius, e.outer, e.inner
        );
        let a = aspect_ratio(metric, points)?;
        let _ = writeln!(
            s,
            "aspect ratio: {} (diameter {}, min distance {})",
            a.ratio,
            a.diameter.to_text(),
            a.min_distance.to_text()
        );
    }
    let _ = writeln!(s, "height: {}", t.height_set().len());
    let _ = writeln!(s, "levels: {}..{}", t.l_min(), t.l_max());
    let _ = writeln!(s, "imbalance (self pair): {}", imbalance(&t, &t));
    let _ = writeln!(s, "essential levels: {}", t.essential_level_total());
    if checks {
        let mut failed = Vec::new();
        for c in structural_checks(&t, metric, points, 1000, seed)? {
            let _ = writeln!(s, "check {c}");
            if !c.passed() {
                failed.push(c.name.to_string());
            }
        }
        let _ = writeln!(s, "failed checks: {}", if failed.is_empty() { "none".into() } else { failed.join(", ") });
    }
    Ok(s)
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let data = load(&args.data)?;
    let query = load_query(args.query.as_deref(), &data)?;
    let mut s = format!("run,seed,n_query,n_reference,k,{},micros\n", TraversalStats::CSV_HEADER);
    for run in 0..args.runs {
        let seed = args.seed + run;
        let opts = KnnOptions {
            k: args.k,
            exclude_self: args.exclude_self,
            verify: false,
        };
        let (nq, nr, stats, micros) = match &data {
            Data::Coords(r) => {
                let metric = Euclidean::<f64>::new();
                let q = query.as_deref().unwrap_or(r);
                let tr = build_seeded(&metric, r, seed)?;
                let tq = if query.is_some() { build_seeded(&metric, q, seed)? } else { tr.clone() };
                let start = Instant::now();
                let (_, stats) = knn_paired(&metric, q, &tq, r, &tr, opts)?;
                (q.len(), r.len(), stats, start.elapsed().as_micros())
            }
            Data::Matrix(m) => {
                let pts = m.points();
                let t = build_seeded(m, &pts, seed)?;
                let start = Instant::now();
                let (_, stats) = knn_paired(m, &pts, &t, &pts, &t, opts)?;
                (pts.len(), pts.len(), stats, start.elapsed().as_micros())
            }
        };
        let _ = writeln!(s, "{run},{seed},{nq},{nr},{},{},{micros}", args.k, stats.csv_row());
    }
    emit(args.out.as_deref(), &s)
}
