//! Matrix ingestion (Matrix Market coordinate/array, headerless CSV) and
//! emission with 17 significant digits.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// 17 significant digits; parses back to the identical `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: invalid number '{tok}'")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Parses a real (or integer/pattern) Matrix Market file into a dense matrix.
pub fn parse_matrix_market(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market input".into()))?;
    let fields: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse(format!("bad Matrix Market header '{header}'")));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::Parse(format!("unsupported format '{other}'"))),
    };
    let pattern = match fields[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" if coordinate => true,
        other => return Err(Error::Parse(format!("unsupported field '{other}'"))),
    };
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(Error::Parse(format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_no, size_line) = body
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {}: bad size '{t}'", size_no + 1)))
        })
        .collect::<Result<_>>()?;
    let expected_dims = if coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(Error::Parse(format!("line {}: bad size line", size_no + 1)));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && rows != cols {
        return Err(Error::Parse("symmetric storage requires a square matrix".into()));
    }
    let mut m = DMatrix::zeros(rows, cols);

    let mut place = |i: usize, j: usize, v: f64| {
        m[(i, j)] += v;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] += v,
                Symmetry::SkewSymmetric => m[(j, i)] -= v,
            }
        }
    };

    if coordinate {
        let nnz = dims[2];
        let mut count = 0;
        for (no, line) in body {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let need = if pattern { 2 } else { 3 };
            if toks.len() < need {
                return Err(Error::Parse(format!("line {}: incomplete entry", no + 1)));
            }
            let idx = |t: &str| -> Result<usize> {
                let k = t
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: bad index '{t}'", no + 1)))?;
                k.checked_sub(1)
                    .ok_or_else(|| Error::Parse(format!("line {}: indices are 1-based", no + 1)))
            };
            let (i, j) = (idx(toks[0])?, idx(toks[1])?);
            if i >= rows || j >= cols {
                return Err(Error::Parse(format!("line {}: index out of range", no + 1)));
            }
            let v = if pattern { 1.0 } else { parse_f64(toks[2], no + 1)? };
            place(i, j, v);
            count += 1;
        }
        if count != nnz {
            return Err(Error::Parse(format!("expected {nnz} entries, found {count}")));
        }
    } else {
        // Column-major; symmetric variants store the lower triangle only.
        let mut slots = Vec::new();
        for j in 0..cols {
            let start = match symmetry {
                Symmetry::General => 0,
                Symmetry::Symmetric => j,
                Symmetry::SkewSymmetric => j + 1,
            };
            for i in start..rows {
                slots.push((i, j));
            }
        }
        let mut values = Vec::with_capacity(slots.len());
        for (no, line) in body {
            for tok in line.split_whitespace() {
                values.push(parse_f64(tok, no + 1)?);
            }
        }
        if values.len() != slots.len() {
            return Err(Error::Parse(format!(
                "expected {} array values, found {}",
                slots.len(),
                values.len()
            )));
        }
        for ((i, j), v) in slots.into_iter().zip(values) {
            m[(i, j)] = v;
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = v,
                Symmetry::SkewSymmetric => m[(j, i)] = -v,
            }
        }
    }
    Ok(m)
}

/// Headerless CSV, one matrix row per line. Blank lines and `#` comments are
/// skipped.
pub fn parse_csv_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let row = t
            .split(',')
            .map(|tok| parse_f64(tok, no + 1))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    no + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty CSV matrix".into()));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Matrix Market when the text starts with the banner, CSV otherwise.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    if text.trim_start().starts_with("%%MatrixMarket") {
        parse_matrix_market(text)
    } else {
        parse_csv_matrix(text)
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

/// Reads a vector from any matrix file of shape `n x 1` or `1 x n`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let m = parse_matrix(text)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        return Err(Error::Parse(format!(
            "expected a vector, found a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.iter().copied().collect())
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_vector(&text)
}

pub fn format_csv_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Dense `array real general` Matrix Market text.
pub fn format_matrix_market(m: &DMatrix<f64>) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    out.push_str(&format!("{} {}\n", m.nrows(), m.ncols()));
    for v in m.iter() {
        out.push_str(&format_f64(*v));
        out.push('\n');
    }
    out
}

/// Writes Matrix Market for `.mtx` paths and CSV otherwise.
pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("mtx") => format_matrix_market(m),
        _ => format_csv_matrix(m),
    };
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coordinate_general() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 3\n1 1 -1.5\n1 2 2\n2 1 0.5\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[-1.5, 2.0, 0.5, 0.0]));
    }

    #[test]
    fn coordinate_symmetric_and_pattern() {
        let sym = "%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 4\n3 3 1\n";
        let m = parse_matrix_market(sym).unwrap();
        assert_eq!(m[(0, 1)], 4.0);
        assert_eq!(m[(1, 0)], 4.0);
        assert_eq!(m[(2, 2)], 1.0);
        let pat = "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 2\n";
        assert_eq!(parse_matrix_market(pat).unwrap()[(0, 1)], 1.0);
        let skew = "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n";
        let m = parse_matrix_market(skew).unwrap();
        assert_eq!((m[(1, 0)], m[(0, 1)]), (3.0, -3.0));
    }

    #[test]
    fn array_general_is_column_major() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        let sym = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n5\n2\n";
        let m = parse_matrix_market(sym).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 5.0, 5.0, 2.0]));
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n1 1 0\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n").is_err());
        assert!(parse_csv_matrix("1,2\n3\n").is_err());
        assert!(parse_csv_matrix("1,x\n").is_err());
        assert!(parse_csv_matrix("\n\n").is_err());
    }

    #[test]
    fn csv_and_vectors() {
        let m = parse_matrix("# weights\n1, 2\n\n3,4\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(parse_vector("1\n4\n").unwrap(), vec![1.0, 4.0]);
        assert_eq!(parse_vector("1,4,9").unwrap(), vec![1.0, 4.0, 9.0]);
        assert!(parse_vector("1,2\n3,4\n").is_err());
    }

    proptest! {
        #[test]
        fn emitted_matrices_reparse_bitwise(vals in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 6)) {
            let m = DMatrix::from_row_slice(2, 3, &vals);
            let csv = parse_matrix(&format_csv_matrix(&m)).unwrap();
            let mtx = parse_matrix(&format_matrix_market(&m)).unwrap();
            for ((a, b), c) in m.iter().zip(csv.iter()).zip(mtx.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
                prop_assert_eq!(a.to_bits(), c.to_bits());
            }
        }
    }
}
