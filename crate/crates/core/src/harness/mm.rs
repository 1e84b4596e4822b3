//! Matrix Market reader and writer for real general matrices.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_header(line: &str) -> Result<Layout> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(Error::UnsupportedFormat(format!("format `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(Error::UnsupportedFormat(format!("field `{other}`"))),
    }
    if tokens[4] != "general" {
        return Err(Error::UnsupportedFormat(format!("symmetry `{}`", tokens[4])));
    }
    Ok(layout)
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

/// Parses Matrix Market text into a dense matrix. Unlisted coordinate
/// entries are zero; repeated coordinates are summed.
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let layout = parse_header(header)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = body.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let mut tok = size.split_whitespace();
    let rows: usize = parse_num(tok.next(), size_line, "row count")?;
    let cols: usize = parse_num(tok.next(), size_line, "column count")?;
    let mut data = vec![0.0; rows * cols];

    match layout {
        Layout::Array => {
            let mut filled = 0;
            for (ln, l) in body {
                for t in l.split_whitespace() {
                    if filled == data.len() {
                        return Err(parse_err(ln, "more entries than the declared size"));
                    }
                    data[filled] = parse_num(Some(t), ln, "value")?;
                    filled += 1;
                }
            }
            if filled != data.len() {
                return Err(parse_err(size_line, format!("expected {} entries, found {filled}", data.len())));
            }
        }
        Layout::Coordinate => {
            let nnz: usize = parse_num(tok.next(), size_line, "entry count")?;
            let mut seen = 0;
            for (ln, l) in body {
                let mut t = l.split_whitespace();
                let i: usize = parse_num(t.next(), ln, "row index")?;
                let j: usize = parse_num(t.next(), ln, "column index")?;
                let v: f64 = parse_num(t.next(), ln, "value")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(ln, format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                data[(j - 1) * rows + (i - 1)] += v;
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(size_line, format!("declared {nnz} entries, found {seen}")));
            }
        }
    }
    DenseMatrix::new(rows, cols, data)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

/// Array-format text with 17 significant digits per entry.
pub fn format_matrix_market(m: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for v in m.as_slice() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

pub fn write_matrix_market(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    std::fs::write(path, format_matrix_market(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_is_column_major() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[&[1.0, 3.0], &[2.0, 4.0]]).unwrap());
    }

    #[test]
    fn coordinate_defaults_to_zero() {
        let text = "%%MatrixMarket matrix coordinate real general\n% note\n3 3 1\n1 1 5.0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m[(0, 0)], 5.0);
        assert_eq!(m.as_slice().iter().filter(|v| **v == 0.0).count(), 8);
    }

    #[test]
    fn unsupported_qualifiers() {
        for h in ["complex general", "pattern general", "real symmetric"] {
            let text = format!("%%MatrixMarket matrix coordinate {h}\n1 1 0\n");
            assert!(matches!(parse_matrix_market(&text), Err(Error::UnsupportedFormat(_))), "{h}");
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n";
        match parse_matrix_market(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = "%%MatrixMarket matrix array real general\n2 1\n1.0\nabc\n";
        assert!(matches!(parse_matrix_market(text), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_matrix_market("hello\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn entry_count_mismatch() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
        assert!(matches!(parse_matrix_market(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn write_then_read_is_exact() {
        let m = crate::rng::gaussian_matrix(4, 3, 5);
        assert_eq!(parse_matrix_market(&format_matrix_market(&m)).unwrap(), m);
    }
}
