//! MatrixMarket and plain-text readers and writers.
//!
//! Reading covers the `matrix` object in `coordinate` and `array` layouts
//! with `real`, `integer` and `pattern` fields and `general`, `symmetric`
//! and `skew-symmetric` storage. Writing always produces coordinate general
//! real with 17 significant digits, which round-trips binary64 exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

const BANNER: &str = "%%MatrixMarket";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixMarketHeader {
    pub format: Format,
    pub field: Field,
    pub symmetry: Symmetry,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadOptions {
    /// Matrices at or above this fraction of nonzeros are stored dense.
    pub dense_threshold: f64,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions {
            dense_threshold: 0.05,
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Line-numbered cursor over the non-comment lines of a file.
struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Lines {
            path,
            inner: text.lines().enumerate(),
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    /// Next line that is neither blank nor a `%` comment, with its 1-based number.
    fn next_data(&mut self) -> Option<(usize, &'a str)> {
        self.inner.by_ref().find_map(|(i, l)| {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('%')).then_some((i + 1, t))
        })
    }
}

fn parse_header(lines: &Lines, text: &str) -> Result<MatrixMarketHeader> {
    let first = text.lines().next().unwrap_or("");
    let tokens: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() < 5 || !first.starts_with(BANNER) {
        return Err(lines.err(1, "missing or malformed %%MatrixMarket banner"));
    }
    if tokens[1] != "matrix" {
        return Err(lines.err(1, format!("unsupported object '{}'", tokens[1])));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        f => return Err(lines.err(1, format!("unsupported format '{f}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" if format == Format::Coordinate => Field::Pattern,
        f => return Err(lines.err(1, format!("unsupported field '{f}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        s => return Err(lines.err(1, format!("unsupported symmetry '{s}'"))),
    };
    Ok(MatrixMarketHeader {
        format,
        field,
        symmetry,
    })
}

fn parse_usize(lines: &Lines, line: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| lines.err(line, format!("expected {what}")))
}

fn parse_value(lines: &Lines, line: usize, tok: Option<&str>) -> Result<f64> {
    let t = tok.ok_or_else(|| lines.err(line, "missing value"))?;
    let v: f64 = t
        .parse()
        .map_err(|_| lines.err(line, format!("'{t}' is not a number")))?;
    if !v.is_finite() {
        return Err(lines.err(line, format!("non-finite value '{t}'")));
    }
    Ok(v)
}

/// Parsed entries in 0-based coordinates, before storage is chosen.
struct Parsed {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

fn parse_matrix_market(path: &Path, text: &str) -> Result<(MatrixMarketHeader, Parsed)> {
    let mut lines = Lines::new(path, text);
    let header = parse_header(&lines, text)?;
    lines.inner.next();

    let (size_line, size) = lines
        .next_data()
        .ok_or_else(|| lines.err(1, "missing size line"))?;
    let mut it = size.split_whitespace();
    let rows = parse_usize(&lines, size_line, it.next(), "row count")?;
    let cols = parse_usize(&lines, size_line, it.next(), "column count")?;
    if rows == 0 || cols == 0 {
        return Err(lines.err(size_line, "dimensions must be positive"));
    }
    if header.symmetry != Symmetry::General && rows != cols {
        return Err(lines.err(size_line, "symmetric storage needs a square matrix"));
    }

    let mut triplets = Vec::new();
    let mut push = |i: usize, j: usize, v: f64| {
        triplets.push((i, j, v));
        if i != j {
            match header.symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((j, i, v)),
                Symmetry::SkewSymmetric => triplets.push((j, i, -v)),
            }
        }
    };

    match header.format {
        Format::Coordinate => {
            let nnz = parse_usize(&lines, size_line, it.next(), "entry count")?;
            for _ in 0..nnz {
                let (ln, l) = lines
                    .next_data()
                    .ok_or_else(|| lines.err(size_line, format!("expected {nnz} entries")))?;
                let mut t = l.split_whitespace();
                let i = parse_usize(&lines, ln, t.next(), "row index")?;
                let j = parse_usize(&lines, ln, t.next(), "column index")?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(lines.err(
                        ln,
                        format!("entry ({i}, {j}) outside declared {rows}x{cols}"),
                    ));
                }
                if header.symmetry != Symmetry::General && j > i {
                    return Err(lines.err(ln, "symmetric storage lists only the lower triangle"));
                }
                let v = match header.field {
                    Field::Pattern => 1.0,
                    _ => parse_value(&lines, ln, t.next())?,
                };
                push(i - 1, j - 1, v);
            }
        }
        Format::Array => {
            // column-major, lower triangle only when symmetric
            for j in 0..cols {
                let start = match header.symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                for i in start..rows {
                    let (ln, l) = lines
                        .next_data()
                        .ok_or_else(|| lines.err(size_line, "too few array entries"))?;
                    let v = parse_value(&lines, ln, l.split_whitespace().next())?;
                    push(i, j, v);
                }
            }
        }
    }
    if let Some((ln, _)) = lines.next_data() {
        return Err(lines.err(ln, "unexpected trailing data"));
    }
    Ok((header, Parsed { rows, cols, triplets }))
}

/// Reads a MatrixMarket matrix with default options.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<Matrix> {
    read_matrix_market_with(path, ReadOptions::default())
}

pub fn read_matrix_market_with(path: impl AsRef<Path>, opts: ReadOptions) -> Result<Matrix> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let (_, p) = parse_matrix_market(path, &text)?;
    let m = Matrix::from_triplets(p.rows, p.cols, p.triplets)?;
    Ok(if m.density() >= opts.dense_threshold {
        m.to_dense()
    } else {
        m
    })
}

/// Writes `m` as coordinate general real. Zero entries are omitted.
pub fn write_matrix_market(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    let mut body = String::new();
    let mut nnz = 0usize;
    m.for_each_nonzero(|i, j, v| {
        nnz += 1;
        let _ = writeln!(body, "{} {} {:.16e}", i + 1, j + 1, v);
    });
    let _ = writeln!(out, "{BANNER} matrix coordinate real general");
    let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), nnz);
    out.push_str(&body);
    write_text(path.as_ref(), &out)
}

/// Reads a vector from a one-column MatrixMarket file (array or coordinate)
/// or from plain text with one value per line.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    if text.starts_with(BANNER) {
        let (_, p) = parse_matrix_market(path, &text)?;
        if p.cols != 1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 2,
                msg: format!("expected one column, found {}", p.cols),
            });
        }
        let mut v = vec![0.0; p.rows];
        for (i, _, x) in p.triplets {
            v[i] += x;
        }
        return Ok(v);
    }
    let mut lines = Lines::new(path, &text);
    let mut v = Vec::new();
    while let Some((ln, l)) = lines.next_data() {
        v.push(parse_value(&lines, ln, Some(l))?);
    }
    Ok(v)
}

/// Writes `v` as a one-column MatrixMarket array.
pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("{BANNER} matrix array real general\n{} 1\n", v.len());
    for x in v {
        let _ = writeln!(out, "{x:.16e}");
    }
    write_text(path.as_ref(), &out)
}

/// Writes `key = value` lines.
pub fn write_metadata(pairs: &[(String, String)], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    write_text(path.as_ref(), &out)
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_metadata(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    parse_key_values(path, &read_text(path)?)
}

pub fn parse_key_values(path: &Path, text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| Error::Parse {
            path: PathBuf::from(path),
            line: i + 1,
            msg: "expected 'key = value'".into(),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem_gen::gen_type2;

    fn file(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn coordinate_diag() {
        let d = tempfile::tempdir().unwrap();
        let p = file(
            &d,
            "a.mtx",
            "%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 3\n2 2 4\n",
        );
        assert_eq!(read_matrix_market(p).unwrap(), Matrix::diag(&[3.0, 4.0]).unwrap());
    }

    #[test]
    fn pattern_symmetric_expands() {
        let d = tempfile::tempdir().unwrap();
        let p = file(
            &d,
            "a.mtx",
            "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n",
        );
        let m = read_matrix_market(p).unwrap();
        assert_eq!(m, Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap());
    }

    #[test]
    fn skew_and_integer_and_duplicates() {
        let d = tempfile::tempdir().unwrap();
        let p = file(
            &d,
            "a.mtx",
            "%%MatrixMarket matrix coordinate integer skew-symmetric\n2 2 2\n2 1 5\n2 1 1\n",
        );
        let m = read_matrix_market(p).unwrap();
        assert_eq!(m, Matrix::from_rows(&[[0.0, -6.0], [6.0, 0.0]]).unwrap());
    }

    #[test]
    fn array_layout_is_column_major() {
        let d = tempfile::tempdir().unwrap();
        let p = file(
            &d,
            "a.mtx",
            "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n",
        );
        let m = read_matrix_market(p).unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]]).unwrap());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let d = tempfile::tempdir().unwrap();
        let p = file(
            &d,
            "a.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
        );
        assert_eq!(line_of(read_matrix_market(p).unwrap_err()), 3);

        let p = file(&d, "b.mtx", "MatrixMarket matrix coordinate real general\n");
        assert_eq!(line_of(read_matrix_market(p).unwrap_err()), 1);

        let p = file(
            &d,
            "c.mtx",
            "%%MatrixMarket matrix coordinate real general\n1 1 1\n% x\n1 1 nan\n",
        );
        assert_eq!(line_of(read_matrix_market(p).unwrap_err()), 4);
    }

    #[test]
    fn round_trips() {
        let d = tempfile::tempdir().unwrap();
        let path = d.path().join("m.mtx");
        for m in [
            Matrix::diag(&[3.0, 4.0]).unwrap(),
            gen_type2(50, 20, 7).unwrap(),
            gen_type2(30, 40, 8).unwrap().to_sparse(),
            Matrix::zeros(3, 2).unwrap(),
        ] {
            write_matrix_market(&m, &path).unwrap();
            let back = read_matrix_market(&path).unwrap();
            assert_eq!(back.shape(), m.shape());
            assert_eq!(back.to_dense_vec(), m.to_dense_vec());
        }
    }

    #[test]
    fn density_threshold_picks_storage() {
        let d = tempfile::tempdir().unwrap();
        let path = d.path().join("m.mtx");
        write_matrix_market(&Matrix::identity(100).unwrap(), &path).unwrap();
        assert!(read_matrix_market(&path).unwrap().is_sparse());
        let dense = read_matrix_market_with(&path, ReadOptions { dense_threshold: 0.01 }).unwrap();
        assert!(!dense.is_sparse());
    }

    #[test]
    fn vectors() {
        let d = tempfile::tempdir().unwrap();
        assert_eq!(read_vector(file(&d, "v.txt", "1\n2\n3")).unwrap(), vec![1.0, 2.0, 3.0]);
        let p = file(&d, "v.mtx", "%%MatrixMarket matrix array real general\n2 1\n5\n6\n");
        assert_eq!(read_vector(p).unwrap(), vec![5.0, 6.0]);
        let e = read_vector(file(&d, "bad.txt", "1\nabc\n")).unwrap_err();
        assert_eq!(line_of(e), 2);

        let v = vec![0.1, -2.5e-300, 1.0 / 3.0];
        let p = d.path().join("w.mtx");
        write_vector(&v, &p).unwrap();
        assert_eq!(read_vector(&p).unwrap(), v);
    }

    #[test]
    fn metadata_round_trip() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("meta.txt");
        let kv = vec![("rank".to_string(), "150".to_string()), ("kind".into(), "type1".into())];
        write_metadata(&kv, &p).unwrap();
        assert_eq!(read_metadata(&p).unwrap(), kv);
    }
}
