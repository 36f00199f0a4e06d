//! MatrixMarket and CSV matrix loaders.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix, LinearOperator};

/// A loaded matrix plus an optional right-hand side.
#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub matrix: LinearOperator,
    pub rhs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| perr(line, format!("invalid number `{tok}`")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| perr(line, format!("invalid integer `{tok}`")))
}

/// Parse a real MatrixMarket matrix (coordinate or array, general, symmetric
/// or skew-symmetric; `pattern` entries read as 1). Coordinate files give a
/// sparse operator, array files a dense one.
pub fn parse_matrix_market(reader: impl BufRead) -> Result<LinearOperator> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let banner = banner?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(perr(1, "missing `%%MatrixMarket matrix` banner"));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(perr(1, format!("unsupported format `{other}`"))),
    };
    let pattern = match fields[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" if coordinate => true,
        other => return Err(perr(1, format!("unsupported field `{other}`"))),
    };
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(perr(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut body = lines.filter_map(|(no, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        Ok(s) => Some(Ok((no, s))),
        Err(e) => Some(Err(Error::from(e))),
    });
    let (size_no, size_line) = body.next().ok_or_else(|| perr(1, "missing size line"))??;
    let size: Vec<&str> = size_line.split_whitespace().collect();
    let rows = size.first().map(|t| parse_usize(t, size_no)).transpose()?.unwrap_or(0);
    let cols = size.get(1).map(|t| parse_usize(t, size_no)).transpose()?.unwrap_or(0);
    if symmetry != Symmetry::General && rows != cols {
        return Err(perr(size_no, "symmetric matrix must be square"));
    }

    if coordinate {
        if size.len() != 3 {
            return Err(perr(size_no, "coordinate size line needs `rows cols entries`"));
        }
        let declared = parse_usize(size[2], size_no)?;
        let mut trip = Vec::with_capacity(declared);
        let mut count = 0usize;
        let mut last_line = size_no;
        for item in body {
            let (no, line) = item?;
            last_line = no;
            let tok: Vec<&str> = line.split_whitespace().collect();
            let want = if pattern { 2 } else { 3 };
            if tok.len() != want {
                return Err(perr(no, format!("expected {want} fields, found {}", tok.len())));
            }
            let i = parse_usize(tok[0], no)?;
            let j = parse_usize(tok[1], no)?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(perr(no, format!("index ({i}, {j}) outside {rows}x{cols}")));
            }
            let v = if pattern { 1.0 } else { parse_f64(tok[2], no)? };
            count += 1;
            if count > declared {
                return Err(perr(no, format!("more entries than the {declared} declared")));
            }
            trip.push((i - 1, j - 1, v));
            if i != j {
                match symmetry {
                    Symmetry::General => {}
                    Symmetry::Symmetric => trip.push((j - 1, i - 1, v)),
                    Symmetry::SkewSymmetric => trip.push((j - 1, i - 1, -v)),
                }
            }
        }
        if count != declared {
            return Err(perr(last_line, format!("header declares {declared} entries, found {count}")));
        }
        Ok(LinearOperator::sparse(CsrMatrix::from_triplets(rows, cols, &trip)?))
    } else {
        if size.len() != 2 {
            return Err(perr(size_no, "array size line needs `rows cols`"));
        }
        // column-major; symmetric files store the lower triangle only
        let slots: Vec<(usize, usize)> = match symmetry {
            Symmetry::General => (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).collect(),
            Symmetry::Symmetric => (0..cols).flat_map(|j| (j..rows).map(move |i| (i, j))).collect(),
            Symmetry::SkewSymmetric => (0..cols).flat_map(|j| (j + 1..rows).map(move |i| (i, j))).collect(),
        };
        let mut m = DenseMatrix::zeros(rows, cols);
        let mut k = 0usize;
        let mut last_line = size_no;
        for item in body {
            let (no, line) = item?;
            last_line = no;
            for tok in line.split_whitespace() {
                let v = parse_f64(tok, no)?;
                let &(i, j) = slots
                    .get(k)
                    .ok_or_else(|| perr(no, format!("more than the {} expected values", slots.len())))?;
                m.set(i, j, v);
                match symmetry {
                    Symmetry::General => {}
                    Symmetry::Symmetric => m.set(j, i, v),
                    Symmetry::SkewSymmetric => m.set(j, i, -v),
                }
                k += 1;
            }
        }
        if k != slots.len() {
            return Err(perr(last_line, format!("expected {} values, found {k}", slots.len())));
        }
        Ok(LinearOperator::dense(m))
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
        other => other,
    }
}

// `foo.mtx` → `foo_b.mtx`
fn sibling_rhs(path: &Path) -> Option<PathBuf> {
    let stem = path.file_stem()?.to_str()?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let name = if ext.is_empty() { format!("{stem}_b") } else { format!("{stem}_b.{ext}") };
    Some(path.with_file_name(name))
}

fn as_vector(op: &LinearOperator) -> Result<Vec<f64>> {
    let d = op.to_dense();
    if d.cols() == 1 {
        Ok(d.as_slice().to_vec())
    } else if d.rows() == 1 {
        Ok(d.row(0).to_vec())
    } else {
        Err(Error::InvalidArgument(format!("right-hand side must be a vector, got {}x{}", d.rows(), d.cols())))
    }
}

/// Load a MatrixMarket file. A right-hand side is read from the sibling
/// `<stem>_b.mtx` when it exists.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<LoadedMatrix> {
    let path = path.as_ref();
    let matrix = parse_matrix_market(open(path)?).map_err(|e| with_path(path, e))?;
    let rhs = match sibling_rhs(path).filter(|p| p.exists()) {
        Some(p) => Some(as_vector(&parse_matrix_market(open(&p)?).map_err(|e| with_path(&p, e))?)?),
        None => None,
    };
    Ok(LoadedMatrix { matrix, rhs })
}

/// Parse a dense CSV matrix. A first row that does not parse as numbers is
/// treated as a header.
pub fn parse_csv_matrix(reader: impl std::io::Read) -> Result<DenseMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 1;
        let rec = rec.map_err(|e| perr(line, e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let vals = match parsed {
            Ok(v) => v,
            Err(_) if idx == 0 => continue,
            Err(_) => return Err(perr(line, "non-numeric field")),
        };
        match cols {
            None => cols = Some(vals.len()),
            Some(c) if c != vals.len() => {
                return Err(perr(line, format!("expected {c} fields, found {}", vals.len())));
            }
            _ => {}
        }
        data.extend(vals);
        rows += 1;
    }
    let cols = cols.ok_or_else(|| perr(1, "no numeric rows"))?;
    DenseMatrix::from_row_major(rows, cols, data)
}

/// Load a dense CSV matrix; the right-hand side comes from `<stem>_b.csv`
/// when present.
pub fn load_csv_matrix(path: impl AsRef<Path>) -> Result<LoadedMatrix> {
    let path = path.as_ref();
    let m = parse_csv_matrix(open(path)?).map_err(|e| with_path(path, e))?;
    let rhs = match sibling_rhs(path).filter(|p| p.exists()) {
        Some(p) => Some(as_vector(&LinearOperator::dense(parse_csv_matrix(open(&p)?).map_err(|e| with_path(&p, e))?))?),
        None => None,
    };
    Ok(LoadedMatrix { matrix: LinearOperator::dense(m), rhs })
}

/// Dispatch on extension: `.mtx` is MatrixMarket, anything else CSV.
pub fn load_problem_matrix(path: impl AsRef<Path>) -> Result<LoadedMatrix> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("mtx") => load_matrix_market(path),
        _ => load_csv_matrix(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mm(s: &str) -> Result<DenseMatrix> {
        parse_matrix_market(s.as_bytes()).map(|op| op.to_dense())
    }

    #[test]
    fn coordinate_identity() {
        let m = mm("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 1.0\n").unwrap();
        assert_eq!(m, DenseMatrix::identity(2));
    }

    #[test]
    fn entry_count_mismatch() {
        let e = mm("%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e:?}");
    }

    #[test]
    fn symmetric_mirrors() {
        let m = mm("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 3\n").unwrap();
        assert_eq!(m.as_slice(), &[4.0, 3.0, 3.0, 0.0]);
        let a = mm("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(a.as_slice(), &[1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn array_is_column_major() {
        let a = mm("%%MatrixMarket matrix array real general\n2 3\n1\n2\n3\n4\n5\n6\n").unwrap();
        assert_eq!(a.as_slice(), &[1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
    }

    #[test]
    fn bad_number_reports_line() {
        let e = mm("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 x\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        assert!(mm("%%MatrixMarket matrix coordinate real general\n1 1 1\n2 1 1\n").is_err());
        assert!(mm("not a banner\n").is_err());
    }

    #[test]
    fn csv_with_and_without_header() {
        let m = parse_csv_matrix("a,b\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!((m.rows(), m.cols(), m.as_slice()), (2, 2, &[1.0, 2.0, 3.0, 4.0][..]));
        let m = parse_csv_matrix("1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(m.rows(), 2);
        assert!(parse_csv_matrix("1,2\n3\n".as_bytes()).is_err());
    }
}
