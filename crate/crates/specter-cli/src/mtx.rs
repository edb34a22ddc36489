//! Matrix Market reading and writing.
//!
//! Accepts `matrix array complex general`, `matrix coordinate complex
//! general`, and the `real` variants of both (imaginary parts zero). Array
//! entries are stored column by column, as the format prescribes, even
//! though the in-memory layout is row major. Coordinate indices count from
//! one; listing the same position twice is an error rather than a sum.

use num_complex::Complex64;
use specter::matrix::ComplexMatrix;
use std::fmt;
use std::fs;
use std::path::Path;

#[derive(Debug)]
pub enum MtxError {
    Io(std::io::Error),
    Parse { line: usize, message: String },
    DuplicateEntry { row: usize, col: usize },
    UnsupportedHeader(String),
}

impl fmt::Display for MtxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MtxError::Io(e) => write!(f, "{e}"),
            MtxError::Parse { line, message } => write!(f, "line {line}: {message}"),
            MtxError::DuplicateEntry { row, col } => {
                write!(f, "duplicate coordinate entry at ({row}, {col})")
            }
            MtxError::UnsupportedHeader(h) => write!(f, "unsupported header: {h}"),
        }
    }
}

impl std::error::Error for MtxError {}

fn parse_error(line: usize, message: impl Into<String>) -> MtxError {
    MtxError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

pub fn parse(path: &Path) -> Result<ComplexMatrix, MtxError> {
    let text = fs::read_to_string(path).map_err(MtxError::Io)?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<ComplexMatrix, MtxError> {
    let mut lines = text.lines().enumerate();

    let (_, banner) = lines.next().ok_or_else(|| parse_error(1, "empty file"))?;
    let (layout, field) = parse_banner(banner)?;

    // everything after the banner: skip comments and blank lines, keep
    // 1-based line numbers for diagnostics
    let mut data = lines.filter_map(|(idx, raw)| {
        let s = raw.trim();
        if s.is_empty() || s.starts_with('%') {
            None
        } else {
            Some((idx + 1, s))
        }
    });

    let (size_line, size) = data
        .next()
        .ok_or_else(|| parse_error(text.lines().count(), "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();

    match layout {
        Layout::Array => {
            if dims.len() != 2 {
                return Err(parse_error(size_line, "array size line must be `rows cols`"));
            }
            let rows = parse_dim(dims[0], size_line)?;
            let cols = parse_dim(dims[1], size_line)?;
            parse_array(rows, cols, field, data, text)
        }
        Layout::Coordinate => {
            if dims.len() != 3 {
                return Err(parse_error(
                    size_line,
                    "coordinate size line must be `rows cols nnz`",
                ));
            }
            let rows = parse_dim(dims[0], size_line)?;
            let cols = parse_dim(dims[1], size_line)?;
            let nnz = dims[2]
                .parse::<usize>()
                .map_err(|_| parse_error(size_line, format!("bad entry count `{}`", dims[2])))?;
            parse_coordinate(rows, cols, nnz, field, data, text)
        }
    }
}

fn parse_banner(banner: &str) -> Result<(Layout, Field), MtxError> {
    let unsupported = || MtxError::UnsupportedHeader(banner.trim().to_string());
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_error(1, "first line must be a %%MatrixMarket banner"));
    }
    if tokens[1] != "matrix" {
        return Err(unsupported());
    }
    let layout = match tokens[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        _ => return Err(unsupported()),
    };
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "complex" => Field::Complex,
        _ => return Err(unsupported()),
    };
    if tokens[4] != "general" {
        return Err(unsupported());
    }
    Ok((layout, field))
}

fn parse_dim(token: &str, line: usize) -> Result<usize, MtxError> {
    let d = token
        .parse::<usize>()
        .map_err(|_| parse_error(line, format!("bad dimension `{token}`")))?;
    if d == 0 {
        return Err(parse_error(line, "dimensions must be positive"));
    }
    Ok(d)
}

fn parse_value(
    tokens: &[&str],
    field: Field,
    offset: usize,
    line: usize,
) -> Result<Complex64, MtxError> {
    let want = offset + if field == Field::Complex { 2 } else { 1 };
    if tokens.len() != want {
        return Err(parse_error(
            line,
            format!("expected {} fields, found {}", want, tokens.len()),
        ));
    }
    let re = tokens[offset]
        .parse::<f64>()
        .map_err(|_| parse_error(line, format!("bad number `{}`", tokens[offset])))?;
    let im = if field == Field::Complex {
        tokens[offset + 1]
            .parse::<f64>()
            .map_err(|_| parse_error(line, format!("bad number `{}`", tokens[offset + 1])))?
    } else {
        0.0
    };
    Ok(Complex64::new(re, im))
}

fn parse_array<'a>(
    rows: usize,
    cols: usize,
    field: Field,
    data: impl Iterator<Item = (usize, &'a str)>,
    text: &str,
) -> Result<ComplexMatrix, MtxError> {
    let mut values = vec![Complex64::ZERO; rows * cols];
    let mut count = 0usize;
    for (line, entry) in data {
        if count == rows * cols {
            return Err(parse_error(line, "more entries than rows*cols"));
        }
        let tokens: Vec<&str> = entry.split_whitespace().collect();
        let z = parse_value(&tokens, field, 0, line)?;
        // column-major order on disk
        let col = count / rows;
        let row = count % rows;
        values[row * cols + col] = z;
        count += 1;
    }
    if count < rows * cols {
        return Err(parse_error(
            text.lines().count(),
            format!("expected {} entries, found {count}", rows * cols),
        ));
    }
    Ok(ComplexMatrix::new(rows, cols, values).expect("sized above"))
}

fn parse_coordinate<'a>(
    rows: usize,
    cols: usize,
    nnz: usize,
    field: Field,
    data: impl Iterator<Item = (usize, &'a str)>,
    text: &str,
) -> Result<ComplexMatrix, MtxError> {
    let mut values = vec![Complex64::ZERO; rows * cols];
    let mut seen = vec![false; rows * cols];
    let mut count = 0usize;
    for (line, entry) in data {
        if count == nnz {
            return Err(parse_error(line, "more entries than the declared count"));
        }
        let tokens: Vec<&str> = entry.split_whitespace().collect();
        if tokens.len() < 2 {
            return Err(parse_error(line, "coordinate entry needs `i j value`"));
        }
        let i = tokens[0]
            .parse::<usize>()
            .map_err(|_| parse_error(line, format!("bad row index `{}`", tokens[0])))?;
        let j = tokens[1]
            .parse::<usize>()
            .map_err(|_| parse_error(line, format!("bad column index `{}`", tokens[1])))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_error(
                line,
                format!("index ({i}, {j}) outside {rows}x{cols} (indices count from 1)"),
            ));
        }
        let z = parse_value(&tokens, field, 2, line)?;
        let slot = (i - 1) * cols + (j - 1);
        if seen[slot] {
            return Err(MtxError::DuplicateEntry { row: i, col: j });
        }
        seen[slot] = true;
        values[slot] = z;
        count += 1;
    }
    if count < nnz {
        return Err(parse_error(
            text.lines().count(),
            format!("expected {nnz} entries, found {count}"),
        ));
    }
    Ok(ComplexMatrix::new(rows, cols, values).expect("sized above"))
}

/// Render as `array complex general` with one comment line after the banner.
/// Entries use the shortest decimal form that parses back to the same
/// float, so a write/parse round trip is exact.
pub fn format_matrix(m: &ComplexMatrix, comment: &str) -> String {
    let mut s = String::from("%%MatrixMarket matrix array complex general\n");
    if !comment.is_empty() {
        s.push_str("% ");
        s.push_str(comment);
        s.push('\n');
    }
    s.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let z = m[(i, j)];
            s.push_str(&format!("{} {}\n", z.re, z.im));
        }
    }
    s
}
