//! Text format:
//!
//! ```text
//! #cct v1 n=<count> root=<id>
//! <id> <level> <parent_id or ->
//! ```
//!
//! One node per line, sorted by id.

use std::fmt::Write as _;

use super::{validate_tree, CoverTree};
use crate::error::{CctError, Result};
use crate::metric::{Level, Metric, PointId};

pub fn serialize_tree(tree: &CoverTree) -> String {
    let mut out = String::with_capacity(16 * tree.len() + 32);
    let _ = writeln!(out, "#cct v1 n={} root={}", tree.len(), tree.root());
    for p in 0..tree.len() {
        match tree.parent(p) {
            Some(a) => {
                let _ = writeln!(out, "{p} {} {a}", tree.level(p));
            }
            None => {
                let _ = writeln!(out, "{p} {} -", tree.level(p));
            }
        }
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> CctError {
    CctError::Parse { line, msg: msg.into() }
}

fn header_field<'a>(field: Option<&'a str>, key: &str) -> Result<&'a str> {
    field
        .and_then(|f| f.strip_prefix(key))
        .and_then(|f| f.strip_prefix('='))
        .ok_or_else(|| parse_err(1, format!("header is missing `{key}=`")))
}

/// Parses the structure only; no metric checks.
pub fn parse_tree(text: &str) -> Result<CoverTree> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty tree file"))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("#cct") || fields.next() != Some("v1") {
        return Err(parse_err(1, "expected header `#cct v1 n=<count> root=<id>`"));
    }
    let n: usize = header_field(fields.next(), "n")?
        .parse()
        .map_err(|_| parse_err(1, "bad node count"))?;
    let root: PointId = header_field(fields.next(), "root")?
        .parse()
        .map_err(|_| parse_err(1, "bad root id"))?;

    let mut levels: Vec<Option<Level>> = vec![None; n];
    let mut parents: Vec<Option<PointId>> = vec![None; n];
    let mut last: Option<PointId> = None;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(lineno, "expected `id level parent`"));
        }
        let id: PointId = parts[0].parse().map_err(|_| parse_err(lineno, "bad id"))?;
        if id >= n {
            return Err(CctError::TreeMismatch(format!("node id {id} outside 0..{n}")));
        }
        if last.is_some_and(|l| id <= l) {
            return Err(parse_err(lineno, "ids must be strictly increasing"));
        }
        last = Some(id);
        let level: Level = parts[1].parse().map_err(|_| parse_err(lineno, "bad level"))?;
        levels[id] = Some(level);
        parents[id] = match parts[2] {
            "-" => None,
            s => Some(s.parse().map_err(|_| parse_err(lineno, "bad parent id"))?),
        };
        if (parents[id].is_none()) != (id == root) {
            return Err(parse_err(lineno, "only the header root may have parent `-`"));
        }
    }
    let levels: Vec<Level> = levels
        .into_iter()
        .enumerate()
        .map(|(p, l)| l.ok_or_else(|| CctError::TreeMismatch(format!("node {p} missing"))))
        .collect::<Result<_>>()?;
    CoverTree::from_parts(levels, parents)
}

/// Parses and validates against the point set.
pub fn deserialize_tree<M: Metric>(text: &str, metric: &M, points: &[M::Point]) -> Result<CoverTree> {
    let tree = parse_tree(text)?;
    if tree.len() != points.len() {
        return Err(CctError::TreeMismatch(format!(
            "tree has {} nodes, point set has {}",
            tree.len(),
            points.len()
        )));
    }
    let report = validate_tree(&tree, metric, points);
    if !report.passed() {
        return Err(CctError::Validation(report.to_string()));
    }
    Ok(tree)
}
