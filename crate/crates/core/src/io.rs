//! CSV readers and writers for points, distance matrices and neighbor lists.

use std::io::{Read, Write};

use crate::error::{CctError, Result};
use crate::knn::KnnResult;
use crate::metric::{MatrixMetric, Metric};
use crate::scalar::{format_sig17, Scalar};

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader)
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

/// Reads `id,x1,...,xd`. Ids must cover `0..n` exactly; rows may come in any
/// order and are returned indexed by id.
pub fn read_points_csv<R: Read, T: Scalar>(reader: R) -> Result<Vec<Vec<T>>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("id") || header.len() < 2 {
        return Err(CctError::Parse {
            line: 1,
            msg: "expected header `id,x1,...,xd`".into(),
        });
    }
    let dim = header.len() - 1;
    let mut rows: Vec<(usize, Vec<T>)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        let perr = |msg: String| CctError::Parse { line, msg };
        if record.len() != dim + 1 {
            return Err(CctError::DimensionMismatch {
                expected: dim,
                found: record.len().saturating_sub(1),
            });
        }
        let id: usize = record[0].parse().map_err(|_| perr(format!("bad id `{}`", &record[0])))?;
        let coords = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .and_then(T::from_f64)
                    .ok_or_else(|| perr(format!("bad coordinate `{f}`")))
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push((id, coords));
    }
    let n = rows.len();
    let mut out: Vec<Option<Vec<T>>> = vec![None; n];
    for (id, coords) in rows {
        if id >= n {
            return Err(CctError::Input(format!("point id {id} outside 0..{n}")));
        }
        if out[id].replace(coords).is_some() {
            return Err(CctError::Input(format!("point id {id} appears twice")));
        }
    }
    Ok(out.into_iter().map(|c| c.expect("ids are a permutation")).collect())
}

pub fn write_points_csv<W: Write, T: Scalar>(writer: W, points: &[Vec<T>]) -> Result<()> {
    let dim = points.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (id, p) in points.iter().enumerate() {
        let mut row = vec![id.to_string()];
        row.extend(p.iter().map(|x| format_sig17(x.to_f64())));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `id,label` rows naming the points of a generated graph dataset.
pub fn write_labels_csv<W: Write>(writer: W, labels: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "label"])?;
    for (id, l) in labels.iter().enumerate() {
        w.write_record([id.to_string(), l.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Largest point set exported as a full distance matrix.
pub const MATRIX_MAX_POINTS: usize = 2000;

/// `id_a,id_b,distance` for every ordered pair `a < b`.
pub fn write_matrix_csv<W: Write, M: Metric>(writer: W, metric: &M, points: &[M::Point]) -> Result<()> {
    if points.len() > MATRIX_MAX_POINTS {
        return Err(CctError::Input(format!(
            "{} points exceed the matrix export limit of {MATRIX_MAX_POINTS}",
            points.len()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id_a", "id_b", "distance"])?;
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let d = metric.distance(&points[a], &points[b]);
            w.write_record([a.to_string(), b.to_string(), d.to_text()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `id_a,id_b,distance` rows into a symmetric table. Every unordered
/// pair of `0..n` must appear once (in either order); `n` is one more than
/// the largest id.
pub fn read_matrix_csv<R: Read, T: Scalar>(reader: R) -> Result<MatrixMetric<T>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["id_a", "id_b", "distance"] {
        return Err(CctError::Parse {
            line: 1,
            msg: "expected header `id_a,id_b,distance`".into(),
        });
    }
    let mut entries = Vec::new();
    let mut n = 0usize;
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        let perr = |msg: String| CctError::Parse { line, msg };
        if record.len() != 3 {
            return Err(perr("expected 3 fields".into()));
        }
        let a: usize = record[0].parse().map_err(|_| perr(format!("bad id `{}`", &record[0])))?;
        let b: usize = record[1].parse().map_err(|_| perr(format!("bad id `{}`", &record[1])))?;
        let d = T::parse_text(&record[2]).ok_or_else(|| perr(format!("bad distance `{}`", &record[2])))?;
        if a == b {
            return Err(perr(format!("self pair ({a}, {a})")));
        }
        n = n.max(a + 1).max(b + 1);
        entries.push((a, b, d, line));
    }
    if n > MATRIX_MAX_POINTS {
        return Err(CctError::Input(format!("matrix has {n} points, limit {MATRIX_MAX_POINTS}")));
    }
    let mut seen = vec![false; n * n];
    let mut data = vec![T::zero(); n * n];
    for (a, b, d, line) in entries {
        let (lo, hi) = (a.min(b), a.max(b));
        if std::mem::replace(&mut seen[lo * n + hi], true) {
            return Err(CctError::Parse {
                line,
                msg: format!("pair ({lo}, {hi}) listed twice"),
            });
        }
        data[a * n + b] = d.clone();
        data[b * n + a] = d;
    }
    let expected = n * n.saturating_sub(1) / 2;
    let got = seen.iter().filter(|&&s| s).count();
    if got != expected {
        return Err(CctError::Input(format!(
            "matrix lists {got} of {expected} pairs for {n} points"
        )));
    }
    MatrixMetric::from_rows(n, data)
}

/// `query_id,rank,neighbor_id,distance`, ranks from 1.
pub fn write_neighbors_csv<W: Write, S: Scalar>(writer: W, result: &KnnResult<S>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["query_id", "rank", "neighbor_id", "distance"])?;
    for (q, list) in result.neighbors.iter().enumerate() {
        for (rank, (id, d)) in list.iter().enumerate() {
            w.write_record([
                q.to_string(),
                (rank + 1).to_string(),
                id.to_string(),
                format_sig17(d.to_f64()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::knn_bruteforce;
    use crate::metric::Euclidean;
    use num_rational::BigRational;

    #[test]
    fn points_round_trip_and_errors() {
        let pts = vec![vec![0.5, -1.0], vec![2.0, 3.25]];
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &pts).unwrap();
        let back: Vec<Vec<f64>> = read_points_csv(&buf[..]).unwrap();
        assert_eq!(back, pts);

        let shuffled = "id,x1\n1,5\n0,4\n";
        assert_eq!(read_points_csv::<_, f64>(shuffled.as_bytes()).unwrap(), vec![vec![4.0], vec![5.0]]);
        assert!(read_points_csv::<_, f64>("id,x1\n0,1\n0,2\n".as_bytes()).is_err());
        assert!(read_points_csv::<_, f64>("id,x1\n0,abc\n".as_bytes()).is_err());
        assert!(read_points_csv::<_, f64>("x,y\n0,1\n".as_bytes()).is_err());
        let err = read_points_csv::<_, f64>("id,x1,x2\n0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CctError::DimensionMismatch { expected: 2, found: 1 } | CctError::Csv(_)), "{err}");
    }

    #[test]
    fn matrix_round_trip_exact() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![3.0], vec![7.0]];
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &Euclidean::new(), &pts).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id_a,id_b,distance\n0,1,3.0000000000000000\n"));
        let m: MatrixMetric<BigRational> = read_matrix_csv(&buf[..]).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(*m.get(2, 1), BigRational::from_integer(4.into()));
        assert!(read_matrix_csv::<_, f64>("id_a,id_b,distance\n0,1,1\n".as_bytes()).is_ok());
        assert!(read_matrix_csv::<_, f64>("id_a,id_b,distance\n0,2,1\n".as_bytes()).is_err());
    }

    #[test]
    fn neighbors_csv_layout() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let res = knn_bruteforce(&Euclidean::new(), &pts, &pts, 1, true).unwrap();
        let mut buf = Vec::new();
        write_neighbors_csv(&mut buf, &res).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().take(2).collect::<Vec<_>>(),
            ["query_id,rank,neighbor_id,distance", "0,1,1,1.0000000000000000"]
        );
    }
}
