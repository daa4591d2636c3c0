//! Sparse mother parity-check matrices and their column prefixes.
//!
//! A [`ParityMatrix`] stores the Tanner graph column-major: for every
//! variable node the sorted list of check nodes it participates in. Rate
//! adaptation never touches the matrix itself; it only chooses how many
//! leading columns to use, which is what [`MatrixPrefix`] captures.

mod alist;
mod girth;
mod peg;

pub use alist::{load_alist, parse_alist, save_alist, write_alist};
pub use girth::{girth_of_prefix, girth_profile, Girth};
pub use peg::peg_construct;

use crate::error::{Error, Result};

/// Column degree of every variable node, in column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    degrees: Vec<usize>,
}

impl DegreeProfile {
    pub fn new(degrees: Vec<usize>) -> Self {
        DegreeProfile { degrees }
    }

    /// Even columns get degree 4, odd columns degree 5, so every prefix keeps
    /// the half-4/half-5 mix of the full matrix.
    pub fn interleaved_4_5(num_vars: usize) -> Self {
        DegreeProfile {
            degrees: (0..num_vars).map(|j| if j % 2 == 0 { 4 } else { 5 }).collect(),
        }
    }

    pub fn uniform(num_vars: usize, degree: usize) -> Self {
        DegreeProfile {
            degrees: vec![degree; num_vars],
        }
    }

    /// Caps every degree at `max`, for matrices too short for the profile.
    pub fn clamped(mut self, max: usize) -> Self {
        for d in &mut self.degrees {
            *d = (*d).min(max);
        }
        self
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn total_edges(&self) -> usize {
        self.degrees.iter().sum()
    }

    /// Checks the profile against a matrix height: every degree must lie in
    /// `[2, num_checks]`.
    pub fn validate(&self, num_checks: usize) -> Result<()> {
        for (j, &d) in self.degrees.iter().enumerate() {
            if d < 2 {
                return Err(Error::Construction(format!(
                    "column {j} has degree {d}, minimum is 2"
                )));
            }
            if d > num_checks {
                return Err(Error::Construction(format!(
                    "column {j} has degree {d} but only {num_checks} check nodes exist"
                )));
            }
        }
        Ok(())
    }
}

/// Sparse binary parity-check matrix `H` with `num_checks` rows and
/// `num_vars` columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityMatrix {
    num_checks: usize,
    columns: Vec<Vec<usize>>,
}

impl ParityMatrix {
    /// Builds a matrix from column adjacency lists. Each list is sorted; an
    /// index outside `[0, num_checks)` or a repeated index is rejected.
    pub fn from_columns(num_checks: usize, mut columns: Vec<Vec<usize>>) -> Result<Self> {
        if num_checks == 0 {
            return Err(Error::invalid("matrix must have at least one check node"));
        }
        for (j, col) in columns.iter_mut().enumerate() {
            col.sort_unstable();
            if let Some(&last) = col.last() {
                if last >= num_checks {
                    return Err(Error::invalid(format!(
                        "column {j} references check {last}, matrix has {num_checks}"
                    )));
                }
            }
            if col.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("column {j} has a repeated check index")));
            }
        }
        Ok(ParityMatrix {
            num_checks,
            columns,
        })
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_vars(&self) -> usize {
        self.columns.len()
    }

    /// Check nodes adjacent to variable `j`, strictly increasing.
    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn num_edges(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn column_degrees(&self) -> Vec<usize> {
        self.columns.iter().map(Vec::len).collect()
    }

    /// Row degrees counted over the whole matrix.
    pub fn check_degrees(&self) -> Vec<usize> {
        self.prefix_check_degrees(self.num_vars())
    }

    fn prefix_check_degrees(&self, width: usize) -> Vec<usize> {
        let mut deg = vec![0; self.num_checks];
        for col in &self.columns[..width] {
            for &c in col {
                deg[c] += 1;
            }
        }
        deg
    }

    /// Row-major view: for every check node the increasing list of variable
    /// nodes among the first `width` columns.
    pub fn rows(&self, width: usize) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.num_checks];
        for (j, col) in self.columns[..width].iter().enumerate() {
            for &c in col {
                rows[c].push(j);
            }
        }
        rows
    }

    /// The effective matrix made of columns `0..width`.
    pub fn prefix(&self, width: usize) -> Result<MatrixPrefix<'_>> {
        MatrixPrefix::new(self, width)
    }

    /// The whole matrix as a prefix. Fails only when the matrix has no
    /// more columns than rows.
    pub fn full(&self) -> Result<MatrixPrefix<'_>> {
        MatrixPrefix::new(self, self.num_vars())
    }
}

/// The leftmost `width` columns of a mother matrix, used as the encoding
/// matrix for one reconciliation round.
#[derive(Debug, Clone, Copy)]
pub struct MatrixPrefix<'a> {
    matrix: &'a ParityMatrix,
    width: usize,
}

impl<'a> MatrixPrefix<'a> {
    pub fn new(matrix: &'a ParityMatrix, width: usize) -> Result<Self> {
        if width <= matrix.num_checks() || width > matrix.num_vars() {
            return Err(Error::invalid(format!(
                "prefix width {width} outside ({}, {}]",
                matrix.num_checks(),
                matrix.num_vars()
            )));
        }
        Ok(MatrixPrefix { matrix, width })
    }

    pub fn matrix(&self) -> &'a ParityMatrix {
        self.matrix
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_checks(&self) -> usize {
        self.matrix.num_checks()
    }

    pub fn columns(&self) -> &'a [Vec<usize>] {
        &self.matrix.columns[..self.width]
    }

    pub fn num_edges(&self) -> usize {
        self.columns().iter().map(Vec::len).sum()
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        self.matrix.prefix_check_degrees(self.width)
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.matrix.rows(self.width)
    }

    /// Code rate of the effective matrix, `1 - m / width`.
    pub fn rate(&self) -> f64 {
        1.0 - self.num_checks() as f64 / self.width as f64
    }
}
