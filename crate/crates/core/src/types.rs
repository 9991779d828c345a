//! Exact integer vectors and dense matrices.
//!
//! Everything is `i64` with checked arithmetic. An operation that would wrap
//! returns [`Error::Overflow`] instead.

use std::fmt;
use std::ops::{Deref, Index};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IntVector(Vec<i64>);

impl IntVector {
    pub fn new(entries: Vec<i64>) -> Self {
        IntVector(entries)
    }

    pub fn zeros(len: usize) -> Self {
        IntVector(vec![0; len])
    }

    pub fn into_inner(self) -> Vec<i64> {
        self.0
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn norm1(&self) -> Result<i64> {
        norm1(&self.0)
    }

    pub fn norm_inf(&self) -> Result<i64> {
        norm_inf(&self.0)
    }

    pub fn checked_add(&self, other: &IntVector) -> Result<IntVector> {
        zip_checked(&self.0, &other.0, i64::checked_add).map(IntVector)
    }

    pub fn checked_sub(&self, other: &IntVector) -> Result<IntVector> {
        zip_checked(&self.0, &other.0, i64::checked_sub).map(IntVector)
    }

    pub fn checked_scale(&self, factor: i64) -> Result<IntVector> {
        self.0
            .iter()
            .map(|&x| x.checked_mul(factor).ok_or(Error::Overflow("vector scaling")))
            .collect::<Result<Vec<_>>>()
            .map(IntVector)
    }

    pub fn dot(&self, other: &IntVector) -> Result<i64> {
        dot(&self.0, &other.0)
    }
}

impl Deref for IntVector {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for IntVector {
    fn from(v: Vec<i64>) -> Self {
        IntVector(v)
    }
}

impl FromIterator<i64> for IntVector {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        IntVector(iter.into_iter().collect())
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn norm1(v: &[i64]) -> Result<i64> {
    v.iter().try_fold(0i64, |acc, &x| {
        x.checked_abs()
            .and_then(|a| acc.checked_add(a))
            .ok_or(Error::Overflow("one-norm"))
    })
}

pub(crate) fn norm_inf(v: &[i64]) -> Result<i64> {
    v.iter().try_fold(0i64, |acc, &x| {
        x.checked_abs().map(|a| acc.max(a)).ok_or(Error::Overflow("infinity-norm"))
    })
}

pub(crate) fn dot(a: &[i64], b: &[i64]) -> Result<i64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("dot product of lengths {} and {}", a.len(), b.len())));
    }
    // Partial sums may leave the i64 range as long as the total does not.
    a.iter()
        .zip(b)
        .try_fold(0i128, |acc, (&x, &y)| acc.checked_add(x as i128 * y as i128))
        .and_then(|total| i64::try_from(total).ok())
        .ok_or(Error::Overflow("dot product"))
}

fn zip_checked(a: &[i64], b: &[i64], op: fn(i64, i64) -> Option<i64>) -> Result<Vec<i64>> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("vectors of lengths {} and {}", a.len(), b.len())));
    }
    a.iter()
        .zip(b)
        .map(|(&x, &y)| op(x, y).ok_or(Error::Overflow("vector arithmetic")))
        .collect()
}

/// `u` is conformal to `v`: same sign pattern where `u` is nonzero and
/// `|u_i| <= |v_i|` everywhere.
pub fn is_conformal(u: &[i64], v: &[i64]) -> bool {
    u.len() == v.len()
        && u.iter().zip(v).all(|(&a, &b)| {
            a == 0 || (a.signum() == b.signum() && a.unsigned_abs() <= b.unsigned_abs())
        })
}

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<i64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(entries.len()) {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix given {} entries",
                entries.len()
            )));
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![0; rows * cols] }
    }

    /// Builds a matrix from row vectors. All rows must have the same length;
    /// an empty list gives a 0x0 matrix.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(Error::Dimension(format!("row {i} has {} entries, expected {cols}", r.len())));
        }
        Ok(IntMatrix { rows: rows.len(), cols, entries: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[i64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn delta(&self) -> i64 {
        self.entries.iter().map(|x| x.saturating_abs()).max().unwrap_or(0)
    }

    pub fn mul_vec(&self, x: &[i64]) -> Result<Vec<i64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// Matrix with column `j` multiplied by `signs[j]`.
    pub fn with_column_signs(&self, signs: &[i64]) -> IntMatrix {
        let mut m = self.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.entries[r * self.cols + c] *= signs[c];
            }
        }
        m
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (r, c): (usize, usize)) -> &i64 {
        &self.entries[r * self.cols + c]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(i64::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
