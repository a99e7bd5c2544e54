//! Matrix Market exchange format.
//!
//! Reads "coordinate real general" matrices and "array real general" dense
//! blocks (used for right-hand-side vectors). Symmetric coordinate files are
//! accepted and expanded on read; integer fields parse as reals. Complex,
//! pattern and hermitian files are rejected. Writing always emits the
//! canonical general form, one-based indices, shortest round-trip decimal.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

struct Header {
    layout: Layout,
    symmetry: Symmetry,
}

fn parse_header(line: &str) -> Result<Header> {
    let fields: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
    let bad = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    if fields.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(bad("first line must start with %%MatrixMarket"));
    }
    if fields.get(1).map(String::as_str) != Some("matrix") {
        return Err(bad("object must be \"matrix\""));
    }
    let layout = match fields.get(2).map(String::as_str) {
        Some("coordinate") => Layout::Coordinate,
        Some("array") => Layout::Array,
        other => {
            return Err(bad(&format!(
                "format must be \"coordinate\" or \"array\", got {other:?}"
            )))
        }
    };
    match fields.get(3).map(String::as_str) {
        Some("real") | Some("integer") => {}
        Some(q @ ("complex" | "pattern")) => {
            return Err(Error::Unsupported(format!(
                "{q} field is not supported; only real-valued matrices are handled"
            )))
        }
        other => return Err(bad(&format!("unknown field qualifier {other:?}"))),
    }
    let symmetry = match fields.get(4).map(String::as_str) {
        Some("general") => Symmetry::General,
        Some("symmetric") => Symmetry::Symmetric,
        Some(q @ ("hermitian" | "skew-symmetric")) => {
            return Err(Error::Unsupported(format!(
                "{q} symmetry is not supported; use general or symmetric"
            )))
        }
        other => return Err(bad(&format!("unknown symmetry qualifier {other:?}"))),
    };
    Ok(Header { layout, symmetry })
}

/// Read a Matrix Market file into a canonical [`SparseMatrix`]. One-based file
/// indices become zero-based; duplicates are summed on canonicalization.
pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix> {
    let file = File::open(path)?;
    read_from(BufReader::new(file))
}

/// Same as [`read_matrix_market`] but from any buffered reader.
pub fn read_from<R: BufRead>(reader: R) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".to_string(),
    })?;
    let header = parse_header(&first?)?;

    // Skip comments and blanks up to the size line.
    let mut size_line = None;
    for (idx, line) in &mut lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((idx + 1, trimmed.to_string()));
        break;
    }
    let (size_lineno, size_text) = size_line.ok_or(Error::Parse {
        line: 1,
        msg: "missing size line".to_string(),
    })?;

    let dims: Vec<usize> = size_text
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| Error::Parse {
                line: size_lineno,
                msg: format!("invalid size token {t:?}"),
            })
        })
        .collect::<Result<_>>()?;

    match header.layout {
        Layout::Coordinate => {
            let [nrows, ncols, nnz] = dims[..] else {
                return Err(Error::Parse {
                    line: size_lineno,
                    msg: "coordinate size line must be \"rows cols nnz\"".to_string(),
                });
            };
            let mut triplets = Vec::with_capacity(nnz);
            let mut seen = 0usize;
            for (idx, line) in &mut lines {
                let lineno = idx + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                let mut tok = trimmed.split_whitespace();
                let i: usize = next_token(&mut tok, lineno)?;
                let j: usize = next_token(&mut tok, lineno)?;
                let v: f64 = next_token(&mut tok, lineno)?;
                if i < 1 || i > nrows || j < 1 || j > ncols {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("entry ({i}, {j}) outside declared {nrows}x{ncols} shape"),
                    });
                }
                triplets.push((i - 1, j - 1, v));
                if header.symmetry == Symmetry::Symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(Error::Parse {
                    line: size_lineno,
                    msg: format!("declared {nnz} entries but found {seen}"),
                });
            }
            SparseMatrix::from_triplets(nrows, ncols, triplets)
        }
        Layout::Array => {
            let [nrows, ncols] = dims[..] else {
                return Err(Error::Parse {
                    line: size_lineno,
                    msg: "array size line must be \"rows cols\"".to_string(),
                });
            };
            if header.symmetry != Symmetry::General {
                return Err(Error::Unsupported(
                    "symmetric array storage is not supported".to_string(),
                ));
            }
            // Array data is column-major, one value per line.
            let mut values = Vec::with_capacity(nrows * ncols);
            for (idx, line) in &mut lines {
                let lineno = idx + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                for tok in trimmed.split_whitespace() {
                    let v: f64 = tok.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("invalid value {tok:?}"),
                    })?;
                    values.push(v);
                }
            }
            if values.len() != nrows * ncols {
                return Err(Error::Parse {
                    line: size_lineno,
                    msg: format!(
                        "array declares {} values but file holds {}",
                        nrows * ncols,
                        values.len()
                    ),
                });
            }
            let triplets = values
                .iter()
                .enumerate()
                .map(|(k, &v)| (k % nrows, k / nrows, v))
                .collect();
            SparseMatrix::from_triplets(nrows, ncols, triplets)
        }
    }
}

fn next_token<'a, T: std::str::FromStr>(
    tok: &mut impl Iterator<Item = &'a str>,
    lineno: usize,
) -> Result<T> {
    let t = tok.next().ok_or(Error::Parse {
        line: lineno,
        msg: "truncated entry line".to_string(),
    })?;
    t.parse().map_err(|_| Error::Parse {
        line: lineno,
        msg: format!("invalid token {t:?}"),
    })
}

/// Write a matrix as "coordinate real general".
pub fn write_matrix_market(path: &Path, a: &SparseMatrix) -> Result<()> {
    let file = File::create(path)?;
    write_to(BufWriter::new(file), a)
}

/// Same as [`write_matrix_market`] to any writer.
pub fn write_to<W: Write>(mut w: W, a: &SparseMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for &(r, c, v) in a.entries() {
        writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
    }
    Ok(())
}

/// Write a dense vector as "array real general" (a single column).
pub fn write_vector_market(path: &Path, v: &[f64]) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

/// Read a file that must contain a single column and return it densely.
pub fn read_vector_market(path: &Path) -> Result<Vec<f64>> {
    let a = read_matrix_market(path)?;
    if a.ncols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected a single-column vector, found {} columns",
            a.ncols()
        )));
    }
    let mut v = vec![0.0; a.nrows()];
    for &(r, _, val) in a.entries() {
        v[r] = val;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn read_str(s: &str) -> Result<SparseMatrix> {
        read_from(Cursor::new(s))
    }

    #[test]
    fn reads_identity_coordinate_file() {
        let text = "%%MatrixMarket matrix coordinate real general\n\
                    2 2 2\n\
                    1 1 1.0\n\
                    2 2 1.0\n";
        let a = read_str(text).unwrap();
        assert_eq!(a.nrows(), 2);
        assert_eq!(a.ncols(), 2);
        assert_eq!(a.entries(), &[(0, 0, 1.0), (1, 1, 1.0)]);
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let text = "%%MatrixMarket matrix coordinate real general\n\
                    1 1 2\n\
                    1 1 1.0\n\
                    1 1 1.0\n";
        let a = read_str(text).unwrap();
        assert_eq!(a.entries(), &[(0, 0, 2.0)]);
    }

    #[test]
    fn csr_offsets_after_read() {
        let text = "%%MatrixMarket matrix coordinate real general\n\
                    % running fixture\n\
                    2 2 3\n\
                    1 1 2.0\n\
                    2 1 1.0\n\
                    2 2 1.0\n";
        let a = read_str(text).unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.row_offsets(), &[0, 1, 3]);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "%%MatrixMarket matrix coordinate real general\n\
                    2 2 1\n\
                    1 x 1.0\n";
        match read_str(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unsupported_qualifiers_rejected_with_message() {
        for (qualifier, text) in [
            (
                "complex",
                "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 0.0\n",
            ),
            (
                "pattern",
                "%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n",
            ),
            (
                "hermitian",
                "%%MatrixMarket matrix coordinate real hermitian\n1 1 1\n1 1 1.0\n",
            ),
        ] {
            match read_str(text) {
                Err(Error::Unsupported(msg)) => {
                    assert!(msg.contains(qualifier), "message {msg:?} for {qualifier}")
                }
                other => panic!("expected unsupported error for {qualifier}, got {other:?}"),
            }
        }
    }

    #[test]
    fn symmetric_storage_expands_on_read() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n\
                    2 2 2\n\
                    1 1 1.0\n\
                    2 1 3.0\n";
        let a = read_str(text).unwrap();
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 0), 3.0);
        assert!(a.is_symmetric());
    }

    #[test]
    fn array_vector_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.mtx");
        let v = vec![0.0, 2.0, -1.5];
        write_vector_market(&path, &v).unwrap();
        assert_eq!(read_vector_market(&path).unwrap(), v);
    }

    #[test]
    fn coordinate_roundtrip_is_canonical() {
        let a = SparseMatrix::from_triplets(
            3,
            4,
            vec![(0, 0, 2.5), (2, 3, -1.0), (1, 1, 0.125), (2, 0, 1e-3)],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        write_matrix_market(&path, &a).unwrap();
        let b = read_matrix_market(&path).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn entry_count_mismatch_detected() {
        let text = "%%MatrixMarket matrix coordinate real general\n\
                    2 2 3\n\
                    1 1 1.0\n";
        assert!(matches!(read_str(text), Err(Error::Parse { .. })));
    }
}
