use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cct")).args(args).output().expect("run cct")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_points(dir: &Path, name: &str, pts: &[Vec<f64>]) -> PathBuf {
    let mut s = String::from("id");
    for i in 1..=pts[0].len() {
        s.push_str(&format!(",x{i}"));
    }
    s.push('\n');
    for (id, p) in pts.iter().enumerate() {
        s.push_str(&id.to_string());
        for x in p {
            s.push_str(&format!(",{x}"));
        }
        s.push('\n');
    }
    let path = dir.join(name);
    fs::write(&path, s).unwrap();
    path
}

/// Deterministic points from a small LCG, on a coarse grid so ties occur.
fn lcg_points(n: usize, dim: usize, mut state: u64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < n {
        let p: Vec<f64> = (0..dim)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % 50) as f64
            })
            .collect();
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn parse_neighbors(csv: &str) -> Vec<(usize, usize, usize, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn four_point_table() {
    let dir = TempDir::new().unwrap();
    let input = write_points(dir.path(), "four.csv", &(0..4).map(|v| vec![v as f64]).collect::<Vec<_>>());
    let o = cct(&["knn", "--input", p(&input), "--k", "3", "--exclude-self", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sets: [[&[usize]; 3]; 4] = [
        [&[1], &[2], &[3]],
        [&[0, 2], &[0, 2], &[3]],
        [&[1, 3], &[1, 3], &[0]],
        [&[2], &[1], &[0]],
    ];
    let rows = parse_neighbors(&stdout(&o));
    assert_eq!(rows.len(), 12);
    for (q, rank, id, _) in rows {
        assert!(sets[q][rank - 1].contains(&id), "q={q} rank={rank} id={id}");
    }
}

#[test]
fn verify_on_random_points_matches_scan() {
    let dir = TempDir::new().unwrap();
    let pts = lcg_points(128, 3, 11);
    let input = write_points(dir.path(), "r.csv", &pts);
    let o = cct(&["knn", "--input", p(&input), "--k", "5", "--exclude-self", "--verify", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = parse_neighbors(&stdout(&o));
    for q in 0..pts.len() {
        let mut want: Vec<f64> = (0..pts.len())
            .filter(|&r| r != q)
            .map(|r| pts[q].iter().zip(&pts[r]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .collect();
        want.sort_by(f64::total_cmp);
        let got: Vec<f64> = rows.iter().filter(|r| r.0 == q).map(|r| r.3).collect();
        assert_eq!(got.len(), 5);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12 * w.max(1.0), "q={q}: {got:?} vs {:?}", &want[..5]);
        }
    }
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = write_points(dir.path(), "four.csv", &(0..4).map(|v| vec![v as f64]).collect::<Vec<_>>());
    let o = cct(&["knn", "--input", p(&input), "--k", "5"]);
    assert_eq!(o.status.code(), Some(2));

    let dup = dir.path().join("dup.csv");
    fs::write(&dup, "id,x1,x2\n0,1,2\n1,3,4\n2,1,2\n").unwrap();
    let o = cct(&["build", "--input", p(&dup)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("duplicate point"), "{}", stderr(&o));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "id,x1\n0,zero\n").unwrap();
    assert_eq!(cct(&["build", "--input", p(&bad)]).status.code(), Some(2));
    assert_eq!(cct(&["legacy", "--variant", "tall-imbalanced", "--m", "6"]).status.code(), Some(2));
    assert_eq!(cct(&["gen", "--variant", "spiral", "--m", "6", "--out", p(dir.path())]).status.code(), Some(2));
}

#[test]
fn build_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = write_points(dir.path(), "r.csv", &lcg_points(64, 2, 5));
    let a = cct(&["build", "--input", p(&input), "--seed", "7"]);
    let b = cct(&["build", "--input", p(&input), "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("#cct v1 n=64 root="));
}

/// The tree on {2, 4, ..., 30} rooted at 16, one line per id `v/2 - 1`.
fn even_line_sidecar() -> String {
    let id = |v: i32| v / 2 - 1;
    let mut s = String::from("#cct v1 n=15 root=7\n");
    for v in (2..=30).step_by(2) {
        let (level, parent) = match v {
            16 => (3, None),
            8 | 24 => (2, Some(16)),
            4 | 12 => (1, Some(8)),
            20 | 28 => (1, Some(24)),
            30 => (0, Some(28)),
            _ => (0, Some(v + 2)),
        };
        let parent = parent.map_or("-".to_string(), |a| id(a).to_string());
        s.push_str(&format!("{} {level} {parent}\n", id(v)));
    }
    s
}

#[test]
fn given_levels_reproduces_even_line_tree() {
    let dir = TempDir::new().unwrap();
    let input = write_points(dir.path(), "even.csv", &(1..=15).map(|k| vec![2.0 * k as f64]).collect::<Vec<_>>());
    let sidecar = dir.path().join("levels.txt");
    fs::write(&sidecar, even_line_sidecar()).unwrap();
    let out = dir.path().join("tree.txt");
    let o = cct(&["build", "--input", p(&input), "--given-levels", p(&sidecar), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap(), even_line_sidecar());
    let v = cct(&["validate", "--input", p(&input), "--tree", p(&out)]);
    assert!(v.status.success());
    assert!(stdout(&v).starts_with("valid"));
}

#[test]
fn invalid_tree_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = write_points(dir.path(), "even.csv", &(1..=15).map(|k| vec![2.0 * k as f64]).collect::<Vec<_>>());
    // Dropping the root 16 to level 2 leaves it level with its children.
    let broken = even_line_sidecar().replace("\n7 3 -\n", "\n7 2 -\n");
    let tree = dir.path().join("tree.txt");
    fs::write(&tree, broken).unwrap();
    let o = cct(&["validate", "--input", p(&input), "--tree", p(&tree)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("root condition"), "{}", stderr(&o));

    // Raising 12 to level 2 under 16 leaves d(8, 12) = 4, not above 2^2.
    let wide = even_line_sidecar().replace("\n5 1 3\n", "\n5 2 7\n");
    assert_ne!(wide, even_line_sidecar());
    fs::write(&tree, wide).unwrap();
    let o = cct(&["validate", "--input", p(&input), "--tree", p(&tree)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("separation condition at level 2"), "{}", stderr(&o));
}

#[test]
fn tree_file_round_trip_gives_identical_neighbors() {
    let dir = TempDir::new().unwrap();
    let pts = lcg_points(90, 2, 21);
    let input = write_points(dir.path(), "r.csv", &pts);
    let query = write_points(dir.path(), "q.csv", &lcg_points(40, 2, 99));
    let tree = dir.path().join("tree.txt");
    assert!(cct(&["build", "--input", p(&input), "--seed", "4", "--out", p(&tree)]).status.success());
    let direct = cct(&["knn", "--input", p(&input), "--query", p(&query), "--k", "3", "--seed", "4"]);
    let via_file = cct(&[
        "knn", "--input", p(&input), "--query", p(&query), "--k", "3", "--seed", "4", "--tree", p(&tree),
    ]);
    assert!(direct.status.success() && via_file.status.success());
    assert_eq!(direct.stdout, via_file.stdout);
}

#[test]
fn gen_tall_validates_and_knn_runs_on_matrix() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tall");
    let o = cct(&["gen", "--variant", "tall-imbalanced", "--m", "8", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let labels = fs::read_to_string(out.join("points.csv")).unwrap();
    assert!(labels.starts_with("id,label\n0,r\n1,p_1\n"));
    let v = cct(&["validate", "--matrix", p(&out.join("matrix.csv")), "--tree", p(&out.join("tree.txt"))]);
    assert!(v.status.success(), "{}", stderr(&v));
    let k = cct(&[
        "knn", "--matrix", p(&out.join("matrix.csv")), "--tree", p(&out.join("tree.txt")), "--k", "1",
        "--exclude-self", "--verify",
    ]);
    assert!(k.status.success(), "{}", stderr(&k));
    let rows = parse_neighbors(&stdout(&k));
    assert_eq!(rows.len(), 65);
    assert!(rows.iter().all(|r| r.0 != r.2));

    let bi = dir.path().join("bi");
    assert!(cct(&["gen", "--variant", "bichromatic", "--m", "6", "--out", p(&bi)]).status.success());
    for side in ["query_", "reference_"] {
        let v = cct(&[
            "validate",
            "--matrix",
            p(&bi.join(format!("{side}matrix.csv"))),
            "--tree",
            p(&bi.join(format!("{side}tree.txt"))),
        ]);
        assert!(v.status.success(), "{side}: {}", stderr(&v));
    }
}

#[test]
fn legacy_report_on_tall_self_pair() {
    let o = cct(&["legacy", "--variant", "tall-imbalanced", "--m", "8", "--self-pair"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("all neighbors trivial: true"), "{text}");
    assert!(text.contains("paired solver matches brute force: true"), "{text}");
}

#[test]
fn legacy_growth_table() {
    let o = cct(&["legacy", "--variant", "bichromatic", "--m-list", "6,7,8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,n,ref_expansions,imbalance,height,distance_calls"));
    let rows: Vec<Vec<u64>> = lines
        .take(3)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    for row in rows {
        let m = row[0];
        let lower: u64 = (2..=m * m + 1).map(|u| u - 2).sum();
        assert!(row[2] >= lower, "{row:?}");
    }
}

#[test]
fn analyze_reports_expansion_constant() {
    let dir = TempDir::new().unwrap();
    let input = write_points(dir.path(), "pow4.csv", &(1..=8).map(|i| vec![4f64.powi(i)]).collect::<Vec<_>>());
    let o = cct(&["analyze", "--input", p(&input)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "c(R) = 8"), "{}", stdout(&o));
}

#[test]
fn bench_rows() {
    let dir = TempDir::new().unwrap();
    let input = write_points(dir.path(), "r.csv", &lcg_points(50, 2, 8));
    let o = cct(&["bench", "--input", p(&input), "--k", "2", "--runs", "3", "--exclude-self"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "run,seed,n_query,n_reference,k,ref_expansions,query_expansions,distance_calls,max_width,micros"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,0,50,50,2,"));
}
