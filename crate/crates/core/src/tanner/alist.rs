//! alist text serialization.
//!
//! Layout: `n m`, `maxColDeg maxRowDeg`, the n column degrees, the m row
//! degrees, n lines of 1-based check indices (padded with `0` up to
//! `maxColDeg`), then m lines of 1-based variable indices. Space separated,
//! LF terminated.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::ParityMatrix;
use crate::error::{Error, Result};

pub fn write_alist(h: &ParityMatrix) -> String {
    let n = h.num_vars();
    let m = h.num_checks();
    let col_deg = h.column_degrees();
    let rows = h.rows(n);
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = String::new();
    writeln!(out, "{n} {m}").unwrap();
    writeln!(out, "{max_col} {max_row}").unwrap();
    push_line(&mut out, col_deg.iter().copied());
    push_line(&mut out, rows.iter().map(Vec::len));
    for col in h.columns() {
        let padded = col
            .iter()
            .map(|&c| c + 1)
            .chain(std::iter::repeat(0))
            .take(max_col);
        push_line(&mut out, padded);
    }
    for row in &rows {
        push_line(&mut out, row.iter().map(|&v| v + 1));
    }
    out
}

fn push_line(out: &mut String, values: impl Iterator<Item = usize>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

pub fn save_alist(h: &ParityMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_alist(h)).map_err(|e| Error::io(path, e))
}

pub fn load_alist(path: impl AsRef<Path>) -> Result<ParityMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_alist(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next line as a list of integers, with its 1-based line number.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        let (idx, line) = self
            .inner
            .next()
            .ok_or_else(|| Error::parse(0, format!("unexpected end of file, expected {what}")))?;
        let lineno = idx + 1;
        let nums = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::parse(lineno, format!("bad integer {tok:?} in {what}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((lineno, nums))
    }
}

pub fn parse_alist(text: &str) -> Result<ParityMatrix> {
    if text.trim().is_empty() {
        return Err(Error::parse(1, "empty alist file"));
    }
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };

    let (ln, dims) = lines.next_numbers("dimensions")?;
    let [n, m] = dims[..] else {
        return Err(Error::parse(ln, "expected \"n m\""));
    };
    if n == 0 || m == 0 {
        return Err(Error::parse(ln, "dimensions must be positive"));
    }
    let (ln, maxes) = lines.next_numbers("maximum degrees")?;
    let [max_col, max_row] = maxes[..] else {
        return Err(Error::parse(ln, "expected \"maxColDeg maxRowDeg\""));
    };

    let (ln, col_deg) = lines.next_numbers("column degrees")?;
    if col_deg.len() != n {
        return Err(Error::parse(ln, format!("{} column degrees, expected {n}", col_deg.len())));
    }
    if col_deg.iter().any(|&d| d > max_col) {
        return Err(Error::parse(ln, "column degree exceeds declared maximum"));
    }
    let (ln, row_deg) = lines.next_numbers("row degrees")?;
    if row_deg.len() != m {
        return Err(Error::parse(ln, format!("{} row degrees, expected {m}", row_deg.len())));
    }
    if row_deg.iter().any(|&d| d > max_row) {
        return Err(Error::parse(ln, "row degree exceeds declared maximum"));
    }
    if col_deg.iter().sum::<usize>() != row_deg.iter().sum::<usize>() {
        return Err(Error::parse(ln, "row and column degree sums disagree"));
    }

    let mut columns = Vec::with_capacity(n);
    for (j, &deg) in col_deg.iter().enumerate() {
        let (ln, entries) = lines.next_numbers("column entries")?;
        columns.push(read_entries(ln, &entries, deg, m, "column", j)?);
    }
    let mut rows = Vec::with_capacity(m);
    for (i, &deg) in row_deg.iter().enumerate() {
        let (ln, entries) = lines.next_numbers("row entries")?;
        rows.push((ln, read_entries(ln, &entries, deg, n, "row", i)?));
    }
    for (idx, line) in lines.inner {
        if !line.trim().is_empty() {
            return Err(Error::parse(idx + 1, "trailing data after row section"));
        }
    }

    // the row section must describe the same edges as the column section
    let mut transposed = vec![Vec::new(); m];
    for (j, col) in columns.iter().enumerate() {
        for &c in col {
            transposed[c].push(j);
        }
    }
    for (c, (ln, mut row)) in rows.into_iter().enumerate() {
        row.sort_unstable();
        if row != transposed[c] {
            return Err(Error::parse(ln, format!("row {} disagrees with column section", c + 1)));
        }
    }

    ParityMatrix::from_columns(m, columns)
}

fn read_entries(
    ln: usize,
    entries: &[usize],
    degree: usize,
    bound: usize,
    kind: &str,
    index: usize,
) -> Result<Vec<usize>> {
    let listed: Vec<usize> = entries.iter().copied().filter(|&x| x != 0).collect();
    if listed.len() != degree {
        return Err(Error::parse(
            ln,
            format!(
                "{kind} {} lists {} entries, declared degree {degree}",
                index + 1,
                listed.len()
            ),
        ));
    }
    if let Some(&bad) = listed.iter().find(|&&x| x > bound) {
        return Err(Error::parse(ln, format!("index {bad} out of range 1..={bound}")));
    }
    let mut sorted = listed.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::parse(ln, format!("duplicate entry in {kind} {}", index + 1)));
    }
    Ok(listed.into_iter().map(|x| x - 1).collect())
}
