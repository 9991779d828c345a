//! Seeded random instances. The generator is ChaCha8 seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`; every draw goes through
//! `Rng::random_range`, so a seed fixes the instance on every platform.
//!
//! Instances are feasible by construction: a point `x*` is drawn from the box
//! and the right-hand side is set to `A x*`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::TwoStageInstance;
use crate::multistage::{TreeBlock, TreeInstance};
use crate::types::{IntMatrix, IntVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoStageShape {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub delta: i64,
    /// Largest `upper - lower` per variable.
    pub max_width: i64,
    /// Objective coefficients are drawn from `[-max_cost, max_cost]`.
    pub max_cost: i64,
}

impl Default for TwoStageShape {
    fn default() -> Self {
        TwoStageShape { n: 2, r: 1, s: 1, t: 2, delta: 2, max_width: 3, max_cost: 3 }
    }
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, delta: i64) -> IntMatrix {
    let entries = (0..rows * cols).map(|_| rng.random_range(-delta..=delta)).collect();
    IntMatrix::new(rows, cols, entries).expect("shape matches entries")
}

fn random_box(rng: &mut impl Rng, len: usize, max_width: i64) -> (Vec<i64>, Vec<i64>, Vec<i64>) {
    let mut lower = Vec::with_capacity(len);
    let mut upper = Vec::with_capacity(len);
    let mut point = Vec::with_capacity(len);
    for _ in 0..len {
        let l = rng.random_range(-1..=1);
        let u = l + rng.random_range(0..=max_width);
        lower.push(l);
        upper.push(u);
        point.push(rng.random_range(l..=u));
    }
    (lower, upper, point)
}

fn check(delta: i64, max_width: i64, max_cost: i64) -> Result<()> {
    if delta < 0 || max_width < 0 || max_cost < 0 {
        return Err(Error::Precondition("delta, width and cost ranges must be nonnegative".into()));
    }
    Ok(())
}

pub fn random_two_stage(seed: u64, shape: &TwoStageShape) -> Result<TwoStageInstance> {
    check(shape.delta, shape.max_width, shape.max_cost)?;
    let mut rng = rng(seed);
    random_two_stage_with(&mut rng, shape)
}

pub fn random_two_stage_with(rng: &mut impl Rng, shape: &TwoStageShape) -> Result<TwoStageInstance> {
    let TwoStageShape { n, r, s, t, delta, max_width, max_cost } = *shape;
    let a_blocks = (0..n).map(|_| random_matrix(rng, r, s, delta)).collect();
    let b_blocks = (0..n).map(|_| random_matrix(rng, r, t, delta)).collect();
    let nv = s + n * t;
    let (lower, upper, point) = random_box(rng, nv, max_width);
    let objective = (0..nv).map(|_| rng.random_range(-max_cost..=max_cost)).collect();
    let mut inst = TwoStageInstance {
        n,
        r,
        s,
        t,
        a_blocks,
        b_blocks,
        rhs: IntVector::zeros(n * r),
        lower: IntVector::new(lower),
        upper: IntVector::new(upper),
        objective: IntVector::new(objective),
    };
    inst.rhs = inst.assemble_matrix()?.mul_vec(&point)?.into();
    Ok(inst)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    /// Children per block, one entry per level below the root.
    pub branching: Vec<usize>,
    /// Columns per block, one entry per depth starting at the root.
    pub cols: Vec<usize>,
    pub leaf_rows: usize,
    pub delta: i64,
    pub max_width: i64,
    pub max_cost: i64,
}

impl Default for TreeShape {
    fn default() -> Self {
        TreeShape { branching: vec![2, 2], cols: vec![1, 1, 1], leaf_rows: 1, delta: 2, max_width: 2, max_cost: 3 }
    }
}

pub fn random_tree(seed: u64, shape: &TreeShape) -> Result<TreeInstance> {
    check(shape.delta, shape.max_width, shape.max_cost)?;
    if shape.cols.len() != shape.branching.len() + 1 {
        return Err(Error::Precondition("need one column count per depth".into()));
    }
    let mut rng = rng(seed);
    // Rows covered by a block at depth d: leaf_rows times the leaves below it.
    let depth = shape.branching.len();
    let rows_at = |d: usize| shape.branching[d..].iter().product::<usize>() * shape.leaf_rows;
    let mut blocks = Vec::new();
    // Breadth-first: (depth, parent, row_start).
    let mut queue = std::collections::VecDeque::from([(0usize, None, 0usize)]);
    let mut next_col = 0;
    while let Some((d, parent, row_start)) = queue.pop_front() {
        let cols = shape.cols[d];
        let matrix = random_matrix(&mut rng, rows_at(d), cols, shape.delta);
        let id = blocks.len();
        blocks.push(TreeBlock { row_start, col_start: next_col, parent, matrix });
        next_col += cols;
        if d < depth {
            for k in 0..shape.branching[d] {
                queue.push_back((d + 1, Some(id), row_start + k * rows_at(d + 1)));
            }
        }
    }
    let (lower, upper, point) = random_box(&mut rng, next_col, shape.max_width);
    let objective = (0..next_col).map(|_| rng.random_range(-shape.max_cost..=shape.max_cost)).collect();
    let mut inst = TreeInstance {
        blocks,
        rhs: IntVector::zeros(rows_at(0)),
        lower: IntVector::new(lower),
        upper: IntVector::new(upper),
        objective: IntVector::new(objective),
    };
    inst.rhs = inst.assemble_matrix()?.mul_vec(&point)?.into();
    Ok(inst)
}
