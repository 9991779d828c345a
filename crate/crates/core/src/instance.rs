//! Two-stage stochastic integer programs.
//!
//! The constraint matrix has `n` block rows. Block row `i` holds `A_i`
//! (r x s) in the shared first-stage columns and `B_i` (r x t) on the
//! diagonal:
//!
//! ```text
//! A_1 B_1
//! A_2     B_2
//! ...         ...
//! A_n             B_n
//! ```
//!
//! The program is `max c.x  s.t.  Ax = b, l <= x <= u, x integer`.

use crate::error::{Error, Result};
use crate::types::{IntMatrix, IntVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoStageInstance {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub a_blocks: Vec<IntMatrix>,
    pub b_blocks: Vec<IntMatrix>,
    pub rhs: IntVector,
    pub lower: IntVector,
    pub upper: IntVector,
    pub objective: IntVector,
}

/// One failed invariant of a [`TwoStageInstance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BlockCount { field: &'static str, expected: usize, found: usize },
    BlockShape { field: &'static str, index: usize, expected: (usize, usize), found: (usize, usize) },
    Length { field: &'static str, expected: usize, found: usize },
    EmptyBox { index: usize, lower: i64, upper: i64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BlockCount { field, expected, found } => {
                write!(f, "{field}: expected {expected} blocks, found {found}")
            }
            Violation::BlockShape { field, index, expected, found } => write!(
                f,
                "{field}[{index}]: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Violation::Length { field, expected, found } => {
                write!(f, "{field}: expected length {expected}, found {found}")
            }
            Violation::EmptyBox { index, lower, upper } => {
                write!(f, "lower[{index}] = {lower} exceeds upper[{index}] = {upper}")
            }
        }
    }
}

impl TwoStageInstance {
    /// Number of variables, `s + n t`.
    pub fn num_vars(&self) -> usize {
        self.s + self.n * self.t
    }

    pub fn num_rows(&self) -> usize {
        self.n * self.r
    }

    /// Column range of the tail belonging to block `i`.
    pub fn tail_range(&self, i: usize) -> std::ops::Range<usize> {
        let start = self.s + i * self.t;
        start..start + self.t
    }

    /// Largest absolute entry over all blocks.
    pub fn delta(&self) -> i64 {
        self.a_blocks.iter().chain(&self.b_blocks).map(IntMatrix::delta).max().unwrap_or(0)
    }

    /// Checks every dimension and bound invariant and reports all failures.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let blocks = [("a_blocks", &self.a_blocks, self.s), ("b_blocks", &self.b_blocks, self.t)];
        for (field, list, cols) in blocks {
            if list.len() != self.n {
                out.push(Violation::BlockCount { field, expected: self.n, found: list.len() });
            }
            for (index, m) in list.iter().enumerate() {
                if (m.rows(), m.cols()) != (self.r, cols) {
                    out.push(Violation::BlockShape {
                        field,
                        index,
                        expected: (self.r, cols),
                        found: (m.rows(), m.cols()),
                    });
                }
            }
        }
        let nv = self.num_vars();
        let vectors = [
            ("rhs", &self.rhs, self.num_rows()),
            ("lower", &self.lower, nv),
            ("upper", &self.upper, nv),
            ("objective", &self.objective, nv),
        ];
        for (field, v, expected) in vectors {
            if v.len() != expected {
                out.push(Violation::Length { field, expected, found: v.len() });
            }
        }
        for (index, (&lower, &upper)) in self.lower.iter().zip(self.upper.iter()).enumerate() {
            if lower > upper {
                out.push(Violation::EmptyBox { index, lower, upper });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(v.iter().map(ToString::to_string).collect()))
        }
    }

    /// The full `(n r) x (s + n t)` constraint matrix.
    pub fn assemble_matrix(&self) -> Result<IntMatrix> {
        self.ensure_valid()?;
        let mut m = IntMatrix::zeros(self.num_rows(), self.num_vars());
        for i in 0..self.n {
            let tail = self.tail_range(i);
            for k in 0..self.r {
                let row = i * self.r + k;
                for j in 0..self.s {
                    m.set(row, j, self.a_blocks[i].get(k, j));
                }
                for j in 0..self.t {
                    m.set(row, tail.start + j, self.b_blocks[i].get(k, j));
                }
            }
        }
        Ok(m)
    }

    /// `A_i y0 + B_i yi` for block `i`, without forming the full matrix.
    pub fn block_product(&self, i: usize, head: &[i64], tail: &[i64]) -> Result<Vec<i64>> {
        let a = self.a_blocks[i].mul_vec(head)?;
        let b = self.b_blocks[i].mul_vec(tail)?;
        a.iter()
            .zip(&b)
            .map(|(x, y)| x.checked_add(*y).ok_or(Error::Overflow("block product")))
            .collect()
    }

    /// `Ax - b`, computed block by block.
    pub fn residual(&self, x: &[i64]) -> Result<IntVector> {
        if x.len() != self.num_vars() {
            return Err(Error::Dimension(format!(
                "solution has length {}, instance has {} variables",
                x.len(),
                self.num_vars()
            )));
        }
        self.ensure_valid()?;
        let head = &x[..self.s];
        let mut out = Vec::with_capacity(self.num_rows());
        for i in 0..self.n {
            let prod = self.block_product(i, head, &x[self.tail_range(i)])?;
            for (k, p) in prod.into_iter().enumerate() {
                let b = self.rhs[i * self.r + k];
                out.push(p.checked_sub(b).ok_or(Error::Overflow("residual"))?);
            }
        }
        Ok(IntVector::new(out))
    }

    pub fn within_bounds(&self, x: &[i64]) -> bool {
        x.len() == self.num_vars()
            && x.iter().zip(self.lower.iter().zip(self.upper.iter())).all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn is_feasible(&self, x: &[i64]) -> Result<bool> {
        Ok(self.within_bounds(x) && self.residual(x)?.is_zero())
    }

    pub fn objective_value(&self, x: &[i64]) -> Result<i64> {
        self.objective.dot(&IntVector::new(x.to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> TwoStageInstance {
        TwoStageInstance {
            n: 1,
            r: 1,
            s: 1,
            t: 1,
            a_blocks: vec![IntMatrix::from_rows(&[vec![1]]).unwrap()],
            b_blocks: vec![IntMatrix::from_rows(&[vec![2]]).unwrap()],
            rhs: IntVector::new(vec![4]),
            lower: IntVector::new(vec![0, 0]),
            upper: IntVector::new(vec![4, 2]),
            objective: IntVector::new(vec![0, 1]),
        }
    }

    #[test]
    fn well_formed_is_ok() {
        assert!(tiny().validate().is_empty());
    }

    #[test]
    fn empty_box_reported_with_index() {
        let mut inst = tiny();
        inst.lower = IntVector::new(vec![5, 0]);
        assert_eq!(inst.validate(), vec![Violation::EmptyBox { index: 0, lower: 5, upper: 4 }]);
    }

    #[test]
    fn wrong_block_rows_reported() {
        let mut inst = tiny();
        inst.a_blocks[0] = IntMatrix::from_rows(&[vec![1], vec![1]]).unwrap();
        let v = inst.validate();
        assert!(matches!(
            v.as_slice(),
            [Violation::BlockShape { field: "a_blocks", index: 0, expected: (1, 1), found: (2, 1) }]
        ));
        assert!(inst.assemble_matrix().is_err());
    }

    #[test]
    fn single_block_assembly() {
        assert_eq!(tiny().assemble_matrix().unwrap().to_rows(), vec![vec![1, 2]]);
    }

    #[test]
    fn two_block_assembly() {
        let one = IntMatrix::from_rows(&[vec![1]]).unwrap();
        let inst = TwoStageInstance {
            n: 2,
            r: 1,
            s: 1,
            t: 1,
            a_blocks: vec![one.clone(), one.clone()],
            b_blocks: vec![one.clone(), one],
            rhs: IntVector::zeros(2),
            lower: IntVector::zeros(3),
            upper: IntVector::new(vec![1, 1, 1]),
            objective: IntVector::zeros(3),
        };
        assert_eq!(inst.assemble_matrix().unwrap().to_rows(), vec![vec![1, 1, 0], vec![1, 0, 1]]);
    }

    #[test]
    fn residual_small_cases() {
        let inst = tiny();
        assert_eq!(inst.residual(&[0, 2]).unwrap().as_slice(), &[0]);
        assert_eq!(inst.residual(&[1, 0]).unwrap().as_slice(), &[-3]);
        assert!(inst.residual(&[1]).is_err());
        let mut zero = inst.clone();
        zero.rhs = IntVector::zeros(1);
        assert!(zero.residual(&[0, 0]).unwrap().is_zero());
    }
}
