//! Matrix Market exchange format (coordinate, real, general or symmetric).

use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Serializes a matrix in coordinate format. Symmetric matrices are written
/// with the `symmetric` qualifier and only their lower triangle. Explicit
/// zeros are skipped, per the exchange-format convention.
pub fn write_matrix_market(matrix: &SparseMatrix) -> String {
    let symmetric = matrix.is_symmetric();
    let mut entries = Vec::new();
    for i in 0..matrix.n_rows() {
        let (cols, vals) = matrix.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if v == 0.0 || (symmetric && j > i) {
                continue;
            }
            entries.push((i, j, v));
        }
    }
    let mut out = String::new();
    let qualifier = if symmetric { "symmetric" } else { "general" };
    out.push_str(&format!(
        "%%MatrixMarket matrix coordinate real {qualifier}\n"
    ));
    out.push_str(&format!(
        "{} {} {}\n",
        matrix.n_rows(),
        matrix.n_cols(),
        entries.len()
    ));
    for (i, j, v) in entries {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
    }
    out
}

/// Parses coordinate-format input (real, general or symmetric).
pub fn read_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (lno, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "empty Matrix Market input".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5
        || !fields[0].eq_ignore_ascii_case("%%MatrixMarket")
        || !fields[1].eq_ignore_ascii_case("matrix")
        || !fields[2].eq_ignore_ascii_case("coordinate")
        || !fields[3].eq_ignore_ascii_case("real")
    {
        return Err(Error::Parse {
            line: lno,
            message: "expected \"%%MatrixMarket matrix coordinate real <symmetry>\"".into(),
        });
    }
    let symmetric = match fields[4].to_ascii_lowercase().as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(Error::Parse {
                line: lno,
                message: format!("unsupported symmetry qualifier {other:?}"),
            });
        }
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut entries_seen = 0usize;
    for (lno, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: lno,
                        message: "size line must be \"rows cols nnz\"".into(),
                    });
                }
                let parse = |f: &str| -> Result<usize> {
                    f.parse().map_err(|_| Error::Parse {
                        line: lno,
                        message: format!("cannot parse size field {f:?}"),
                    })
                };
                size = Some((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
            }
            Some((rows, cols, _)) => {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: lno,
                        message: "entry line must be \"i j value\"".into(),
                    });
                }
                let i: usize = fields[0].parse().map_err(|_| Error::Parse {
                    line: lno,
                    message: format!("bad row index {:?}", fields[0]),
                })?;
                let j: usize = fields[1].parse().map_err(|_| Error::Parse {
                    line: lno,
                    message: format!("bad column index {:?}", fields[1]),
                })?;
                let v: f64 = fields[2].parse().map_err(|_| Error::Parse {
                    line: lno,
                    message: format!("bad value {:?}", fields[2]),
                })?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse {
                        line: lno,
                        message: format!("entry ({i}, {j}) outside {rows} x {cols}"),
                    });
                }
                entries_seen += 1;
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or(Error::Parse {
        line: 0,
        message: "missing size line".into(),
    })?;
    if entries_seen != nnz {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {nnz} entries, found {entries_seen}"),
        });
    }
    SparseMatrix::from_triplets(rows, cols, &triplets)
}

pub fn write_matrix_market_file(matrix: &SparseMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, write_matrix_market(matrix))?;
    Ok(())
}

pub fn read_matrix_market_file(path: &Path) -> Result<SparseMatrix> {
    let text = std::fs::read_to_string(path)?;
    read_matrix_market(&text)
}

/// Plain-text vector file: one value per line.
pub fn write_vector(v: &[f64]) -> String {
    let mut out = String::new();
    for x in v {
        out.push_str(&format!("{x}\n"));
    }
    out
}

pub fn read_vector(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                line: k + 1,
                message: format!("cannot parse vector entry {l:?}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_round_trip() {
        let m = SparseMatrix::from_triplets(2, 3, &[(0, 1, 1.5), (1, 0, -2.25), (1, 2, 0.125)])
            .unwrap();
        let text = write_matrix_market(&m);
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
        let back = read_matrix_market(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn symmetric_writes_lower_triangle() {
        let m =
            SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0)]).unwrap();
        let text = write_matrix_market(&m);
        assert!(text.contains("symmetric"));
        // one diagonal + one off-diagonal entry
        assert_eq!(text.lines().count(), 4);
        let back = read_matrix_market(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rejects_out_of_range_entries() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(
            read_matrix_market(text),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn vector_round_trip() {
        let v = vec![1.0, -0.5, 3.25e-7];
        let back = read_vector(&write_vector(&v)).unwrap();
        assert_eq!(v, back);
    }
}
