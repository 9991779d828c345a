//! Multi-stage programs: block matrices arranged in a rooted tree whose row
//! sets nest. A block's rows contain the rows of all of its descendants, its
//! columns are its own.
//!
//! The step search guesses the variables of every non-leaf block (one-norm
//! capped), pushes the residual down to the children and solves the leaves
//! exactly. Child results are memoised on `(block, residual)`.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::RwLock;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::blockip::{solve_small_ip_with_budget, IpOutcome};
use crate::bounds::{big, checked_pow, DEFAULT_MAX_BITS};
use crate::error::{Error, Result};
use crate::instance::TwoStageInstance;
use crate::twostage::{
    augment, enumerate_heads, with_pool, Augmentation, HeadCap, SolveReport, SolveStatus, SolverConfig, StepSearch,
};
use crate::types::{dot, IntMatrix, IntVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeBlock {
    pub row_start: usize,
    pub col_start: usize,
    pub parent: Option<usize>,
    pub matrix: IntMatrix,
}

impl TreeBlock {
    pub fn rows(&self) -> Range<usize> {
        self.row_start..self.row_start + self.matrix.rows()
    }

    pub fn cols(&self) -> Range<usize> {
        self.col_start..self.col_start + self.matrix.cols()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeInstance {
    pub blocks: Vec<TreeBlock>,
    pub rhs: IntVector,
    pub lower: IntVector,
    pub upper: IntVector,
    pub objective: IntVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    NoBlocks,
    Roots(Vec<usize>),
    BadParent { block: usize, parent: usize },
    Cyclic { block: usize },
    RowsOutOfRange { block: usize },
    ColsOutOfRange { block: usize },
    RootRows { root: usize },
    NotNested { child: usize, parent: usize },
    RowOverlap { a: usize, b: usize },
    ColOverlap { a: usize, b: usize },
    ColUncovered { col: usize },
    LevelWidth { depth: usize, block: usize, expected: usize, found: usize },
    Length { field: &'static str, expected: usize, found: usize },
    EmptyBox { index: usize, lower: i64, upper: i64 },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TreeViolation::*;
        match self {
            NoBlocks => write!(f, "no blocks"),
            Roots(r) => write!(f, "expected exactly one root block, found {r:?}"),
            BadParent { block, parent } => write!(f, "block {block} has invalid parent {parent}"),
            Cyclic { block } => write!(f, "block {block} lies on a parent cycle"),
            RowsOutOfRange { block } => write!(f, "rows of block {block} exceed the rhs length"),
            ColsOutOfRange { block } => write!(f, "columns of block {block} exceed the variable count"),
            RootRows { root } => write!(f, "root block {root} does not contain all rows"),
            NotNested { child, parent } => write!(f, "rows of block {child} are not inside rows of its parent {parent}"),
            RowOverlap { a, b } => write!(f, "blocks {a} and {b} share rows but neither is an ancestor of the other"),
            ColOverlap { a, b } => write!(f, "blocks {a} and {b} share columns"),
            ColUncovered { col } => write!(f, "column {col} belongs to no block"),
            LevelWidth { depth, block, expected, found } => {
                write!(f, "block {block} at depth {depth} has {found} columns, expected {expected}")
            }
            Length { field, expected, found } => write!(f, "{field} has length {found}, expected {expected}"),
            EmptyBox { index, lower, upper } => write!(f, "empty range [{lower}, {upper}] for variable {index}"),
        }
    }
}

impl TreeInstance {
    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn root(&self) -> Option<usize> {
        let roots: Vec<usize> = (0..self.blocks.len()).filter(|&i| self.blocks[i].parent.is_none()).collect();
        (roots.len() == 1).then(|| roots[0])
    }

    pub fn children(&self, block: usize) -> Vec<usize> {
        (0..self.blocks.len()).filter(|&i| self.blocks[i].parent == Some(block)).collect()
    }

    /// Distance from the root; `None` if the parent links do not form a tree.
    pub fn block_depth(&self, block: usize) -> Option<usize> {
        let mut depth = 0;
        let mut cur = block;
        while let Some(p) = self.blocks.get(cur)?.parent {
            depth += 1;
            if depth > self.blocks.len() {
                return None;
            }
            cur = p;
        }
        Some(depth)
    }

    /// Height of the tree counted in edges: a single block has depth 0.
    pub fn depth(&self) -> usize {
        (0..self.blocks.len()).filter_map(|b| self.block_depth(b)).max().unwrap_or(0)
    }

    fn is_ancestor(&self, anc: usize, mut b: usize) -> bool {
        let mut steps = 0;
        while let Some(p) = self.blocks[b].parent {
            if p == anc {
                return true;
            }
            b = p;
            steps += 1;
            if steps > self.blocks.len() {
                return false;
            }
        }
        false
    }

    /// Column counts per level, starting with the level just above the
    /// leaves and ending at the root, plus the leaf row count.
    pub fn level_widths(&self) -> (Vec<usize>, usize) {
        let t = self.depth();
        let mut widths = vec![0; t];
        let mut leaf_rows = 0;
        for (b, block) in self.blocks.iter().enumerate() {
            let Some(d) = self.block_depth(b) else { continue };
            if self.children(b).is_empty() {
                leaf_rows = leaf_rows.max(block.matrix.rows());
            } else {
                let level = t - d;
                widths[level - 1] = widths[level - 1].max(block.matrix.cols());
            }
        }
        (widths, leaf_rows)
    }

    pub fn delta(&self) -> i64 {
        self.blocks.iter().map(|b| b.matrix.delta()).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Vec<TreeViolation> {
        validate_tree_shape(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(v.iter().map(ToString::to_string).collect()))
        }
    }

    pub fn assemble_matrix(&self) -> Result<IntMatrix> {
        self.ensure_valid()?;
        let mut m = IntMatrix::zeros(self.num_rows(), self.num_vars());
        for b in &self.blocks {
            for (i, row) in b.rows().enumerate() {
                for (j, col) in b.cols().enumerate() {
                    m.set(row, col, b.matrix.get(i, j));
                }
            }
        }
        Ok(m)
    }

    pub fn residual(&self, x: &[i64]) -> Result<IntVector> {
        let m = self.assemble_matrix()?;
        if x.len() != m.cols() {
            return Err(Error::Dimension(format!("solution has length {}, instance has {} variables", x.len(), m.cols())));
        }
        let ax = m.mul_vec(x)?;
        ax.iter()
            .zip(self.rhs.iter())
            .map(|(a, b)| a.checked_sub(*b).ok_or(Error::Overflow("residual")))
            .collect()
    }

    pub fn within_bounds(&self, x: &[i64]) -> bool {
        x.len() == self.num_vars()
            && x.iter().zip(self.lower.iter().zip(self.upper.iter())).all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn is_feasible(&self, x: &[i64]) -> Result<bool> {
        Ok(self.within_bounds(x) && self.residual(x)?.is_zero())
    }

    pub fn objective_value(&self, x: &[i64]) -> Result<i64> {
        dot(self.objective.as_slice(), x)
    }

    /// Root holds the stacked `A_i`, one child per `B_i`.
    pub fn from_two_stage(inst: &TwoStageInstance) -> Result<Self> {
        inst.ensure_valid()?;
        let mut root = IntMatrix::zeros(inst.num_rows(), inst.s);
        for (i, a) in inst.a_blocks.iter().enumerate() {
            for k in 0..inst.r {
                for j in 0..inst.s {
                    root.set(i * inst.r + k, j, a.get(k, j));
                }
            }
        }
        let mut blocks = vec![TreeBlock { row_start: 0, col_start: 0, parent: None, matrix: root }];
        for (i, b) in inst.b_blocks.iter().enumerate() {
            blocks.push(TreeBlock {
                row_start: i * inst.r,
                col_start: inst.tail_range(i).start,
                parent: Some(0),
                matrix: b.clone(),
            });
        }
        Ok(TreeInstance {
            blocks,
            rhs: inst.rhs.clone(),
            lower: inst.lower.clone(),
            upper: inst.upper.clone(),
            objective: inst.objective.clone(),
        })
    }

    /// Inverse of [`TreeInstance::from_two_stage`] for trees of depth one
    /// whose leaves have equal shape and follow each other in row and column
    /// order after the root's columns.
    pub fn to_two_stage(&self) -> Result<TwoStageInstance> {
        self.ensure_valid()?;
        let root = self.root().expect("validated");
        let rb = &self.blocks[root];
        let mut kids = self.children(root);
        kids.sort_by_key(|&k| self.blocks[k].row_start);
        let not_two_stage = |why: &str| Error::Precondition(format!("tree is not two-stage: {why}"));
        if rb.col_start != 0 {
            return Err(not_two_stage("root columns do not come first"));
        }
        let (s, n) = (rb.matrix.cols(), kids.len());
        if n == 0 {
            return Err(not_two_stage("root has no children"));
        }
        let (r, t) = (self.blocks[kids[0]].matrix.rows(), self.blocks[kids[0]].matrix.cols());
        let mut a_blocks = Vec::with_capacity(n);
        let mut b_blocks = Vec::with_capacity(n);
        for (i, &k) in kids.iter().enumerate() {
            let b = &self.blocks[k];
            if !self.children(k).is_empty() {
                return Err(not_two_stage("depth exceeds one"));
            }
            if b.matrix.rows() != r || b.row_start != i * r || b.col_start != s + i * t {
                return Err(not_two_stage("children are not aligned blocks"));
            }
            let mut a = IntMatrix::zeros(r, s);
            for kk in 0..r {
                for j in 0..s {
                    a.set(kk, j, rb.matrix.get(i * r + kk, j));
                }
            }
            a_blocks.push(a);
            b_blocks.push(b.matrix.clone());
        }
        if n * r != self.num_rows() {
            return Err(not_two_stage("children do not cover the rows"));
        }
        let out = TwoStageInstance {
            n,
            r,
            s,
            t,
            a_blocks,
            b_blocks,
            rhs: self.rhs.clone(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            objective: self.objective.clone(),
        };
        out.ensure_valid()?;
        Ok(out)
    }
}

/// Checks the nesting conditions, the tree links and the column layout.
pub fn validate_tree_shape(inst: &TreeInstance) -> Vec<TreeViolation> {
    use TreeViolation::*;
    let mut out = Vec::new();
    let nb = inst.blocks.len();
    if nb == 0 {
        out.push(NoBlocks);
        return out;
    }
    let (rows, cols) = (inst.num_rows(), inst.num_vars());
    for (field, v) in [("lower", &inst.lower), ("upper", &inst.upper)] {
        if v.len() != cols {
            out.push(Length { field, expected: cols, found: v.len() });
        }
    }
    for (index, (&lower, &upper)) in inst.lower.iter().zip(inst.upper.iter()).enumerate() {
        if lower > upper {
            out.push(EmptyBox { index, lower, upper });
        }
    }
    let roots: Vec<usize> = (0..nb).filter(|&i| inst.blocks[i].parent.is_none()).collect();
    if roots.len() != 1 {
        out.push(Roots(roots.clone()));
    }
    let mut linked = true;
    for (i, b) in inst.blocks.iter().enumerate() {
        if let Some(p) = b.parent {
            if p >= nb || p == i {
                out.push(BadParent { block: i, parent: p });
                linked = false;
            }
        }
        if b.rows().end > rows {
            out.push(RowsOutOfRange { block: i });
        }
        if b.cols().end > cols {
            out.push(ColsOutOfRange { block: i });
        }
    }
    if !linked {
        return out;
    }
    for i in 0..nb {
        if inst.block_depth(i).is_none() {
            out.push(Cyclic { block: i });
            linked = false;
        }
    }
    if !linked {
        return out;
    }
    if let [root] = roots[..] {
        if inst.blocks[root].rows() != (0..rows) {
            out.push(RootRows { root });
        }
    }
    let overlaps = |a: &Range<usize>, b: &Range<usize>| a.start.max(b.start) < a.end.min(b.end);
    let inside = |a: &Range<usize>, b: &Range<usize>| a.is_empty() || (b.start <= a.start && a.end <= b.end);
    for (i, b) in inst.blocks.iter().enumerate() {
        if let Some(p) = b.parent {
            if !inside(&b.rows(), &inst.blocks[p].rows()) {
                out.push(NotNested { child: i, parent: p });
            }
        }
    }
    for a in 0..nb {
        for b in a + 1..nb {
            let (ra, rb) = (inst.blocks[a].rows(), inst.blocks[b].rows());
            if overlaps(&ra, &rb) && !inst.is_ancestor(a, b) && !inst.is_ancestor(b, a) {
                out.push(RowOverlap { a, b });
            }
            if overlaps(&inst.blocks[a].cols(), &inst.blocks[b].cols()) {
                out.push(ColOverlap { a, b });
            }
        }
    }
    let mut covered = vec![false; cols];
    for b in &inst.blocks {
        for c in b.cols().filter(|&c| c < cols) {
            covered[c] = true;
        }
    }
    out.extend(covered.iter().enumerate().filter(|(_, &c)| !c).map(|(col, _)| ColUncovered { col }));
    let mut width_at: HashMap<usize, usize> = HashMap::new();
    for (i, b) in inst.blocks.iter().enumerate() {
        let depth = inst.block_depth(i).expect("acyclic");
        let expected = *width_at.entry(depth).or_insert(b.matrix.cols());
        if expected != b.matrix.cols() {
            out.push(LevelWidth { depth, block: i, expected, found: b.matrix.cols() });
        }
    }
    out
}

/// Tower bound with unit constants: `T = (Δr)^r`, then `T <- 2^{T^{s_i²}}`
/// for each level width from the leaves upward.
pub fn tower_bound(level_widths: &[u64], r: u64, delta: u64) -> Result<BigUint> {
    tower_bound_with_budget(level_widths, r, delta, DEFAULT_MAX_BITS)
}

pub fn tower_bound_with_budget(level_widths: &[u64], r: u64, delta: u64, max_bits: u64) -> Result<BigUint> {
    let mut t = checked_pow(&big(delta * r), &big(r), max_bits)?;
    for &s in level_widths {
        let exp = checked_pow(&t, &big(s * s), max_bits)?;
        t = checked_pow(&big(2), &exp, max_bits)?;
    }
    Ok(t)
}

/// Normalised tree used by the solver; columns are explicit index lists so
/// that phase 1 can attach slack columns.
#[derive(Debug, Clone)]
struct Node {
    rows: Range<usize>,
    cols: Vec<usize>,
    matrix: IntMatrix,
    children: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
    root: usize,
    rhs: Vec<i64>,
    lower: Vec<i64>,
    upper: Vec<i64>,
    objective: Vec<i64>,
    theorem_cap: Option<u64>,
}

type SubResult = Option<(i64, Vec<(usize, i64)>)>;

impl Tree {
    fn from_instance(inst: &TreeInstance) -> Tree {
        let nodes = (0..inst.blocks.len())
            .map(|i| {
                let b = &inst.blocks[i];
                Node { rows: b.rows(), cols: b.cols().collect(), matrix: b.matrix.clone(), children: inst.children(i) }
            })
            .collect();
        let (widths, r) = inst.level_widths();
        let widths: Vec<u64> = widths.iter().map(|&w| w as u64).collect();
        let theorem_cap = tower_bound(&widths, r.max(1) as u64, inst.delta().max(1) as u64)
            .ok()
            .and_then(|b| b.to_u64())
            .map(|b| b.saturating_mul(widths.iter().copied().max().unwrap_or(1).max(1)));
        Tree {
            nodes,
            root: inst.root().expect("validated"),
            rhs: inst.rhs.clone().into_inner(),
            lower: inst.lower.clone().into_inner(),
            upper: inst.upper.clone().into_inner(),
            objective: inst.objective.clone().into_inner(),
            theorem_cap,
        }
    }

    fn matrix_times(&self, x: &[i64]) -> Result<Vec<i64>> {
        let mut out = vec![0i64; self.rhs.len()];
        for node in &self.nodes {
            let local: Vec<i64> = node.cols.iter().map(|&c| x[c]).collect();
            let prod = node.matrix.mul_vec(&local)?;
            for (row, p) in node.rows.clone().zip(prod) {
                out[row] = out[row].checked_add(p).ok_or(Error::Overflow("tree product"))?;
            }
        }
        Ok(out)
    }

    fn step_search(&self, z: &[i64], lambda: i64, cap: u64, config: &SolverConfig) -> Result<Option<Augmentation>> {
        let (lo, hi): (Vec<i64>, Vec<i64>) = (0..self.lower.len())
            .map(|j| {
                let down = self.lower[j] - z[j];
                let up = self.upper[j] - z[j];
                (-((-down).div_euclid(lambda)), up.div_euclid(lambda))
            })
            .unzip();
        let ctx = Search { tree: self, lo: &lo, hi: &hi, cap, config, memo: RwLock::new(HashMap::new()) };
        let root_rows = self.nodes[self.root].rows.len();
        let Some((value, assignment)) = ctx.solve_node(self.root, vec![0; root_rows], true)? else {
            return Ok(None);
        };
        let gain = value.checked_mul(lambda).ok_or(Error::Overflow("cycle gain"))?;
        if gain <= 0 {
            return Ok(None);
        }
        let mut cycle = vec![0i64; self.lower.len()];
        for (c, v) in assignment {
            cycle[c] = v;
        }
        let head = self.nodes[self.root].cols.iter().map(|&c| cycle[c]).collect();
        Ok(Some(Augmentation { cycle: IntVector::new(cycle), head, lambda, gain }))
    }
}

struct Search<'a> {
    tree: &'a Tree,
    lo: &'a [i64],
    hi: &'a [i64],
    cap: u64,
    config: &'a SolverConfig,
    memo: RwLock<HashMap<(usize, Vec<i64>), SubResult>>,
}

impl Search<'_> {
    /// Best `c.y` over the subtree of `node` with the subtree's rows summing
    /// to `rhs`; assignments are (column, value) pairs.
    fn solve_node(&self, node: usize, rhs: Vec<i64>, parallel: bool) -> Result<SubResult> {
        let key = (node, rhs);
        if let Some(hit) = self.memo.read().expect("memo lock").get(&key) {
            return Ok(hit.clone());
        }
        let (node_idx, rhs) = (key.0, &key.1);
        let n = &self.tree.nodes[node_idx];
        let lo: Vec<i64> = n.cols.iter().map(|&c| self.lo[c]).collect();
        let hi: Vec<i64> = n.cols.iter().map(|&c| self.hi[c]).collect();
        let obj: Vec<i64> = n.cols.iter().map(|&c| self.tree.objective[c]).collect();

        let result = if n.children.is_empty() {
            match solve_small_ip_with_budget(&n.matrix, rhs, &lo, &hi, &obj, self.config.max_states)? {
                IpOutcome::Optimal { solution, value } => {
                    Some((value, n.cols.iter().copied().zip(solution.into_inner()).collect()))
                }
                IpOutcome::Infeasible => None,
            }
        } else {
            let guesses = enumerate_heads(&lo, &hi, self.cap, self.config.max_heads)?;
            let eval = |g: &Vec<i64>| self.evaluate_guess(n, rhs, g, &obj);
            let scored: Vec<Result<SubResult>> = if parallel {
                guesses.par_iter().map(eval).collect()
            } else {
                guesses.iter().map(eval).collect()
            };
            let mut best: SubResult = None;
            for s in scored {
                if let Some((v, a)) = s? {
                    if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                        best = Some((v, a));
                    }
                }
            }
            best
        };
        self.memo.write().expect("memo lock").insert(key.clone(), result.clone());
        Ok(result)
    }

    fn evaluate_guess(&self, n: &Node, rhs: &[i64], guess: &[i64], obj: &[i64]) -> Result<SubResult> {
        let prod = n.matrix.mul_vec(guess)?;
        let residual: Vec<i64> = rhs
            .iter()
            .zip(&prod)
            .map(|(a, b)| a.checked_sub(*b).ok_or(Error::Overflow("tree residual")))
            .collect::<Result<_>>()?;
        let mut covered = vec![false; residual.len()];
        let mut total = dot(obj, guess)?;
        let mut assignment: Vec<(usize, i64)> = n.cols.iter().copied().zip(guess.iter().copied()).collect();
        for &child in &n.children {
            let rows = &self.tree.nodes[child].rows;
            let local = rows.start - n.rows.start..rows.end - n.rows.start;
            for c in local.clone() {
                covered[c] = true;
            }
            match self.solve_node(child, residual[local].to_vec(), false)? {
                Some((v, a)) => {
                    total = total.checked_add(v).ok_or(Error::Overflow("tree value"))?;
                    assignment.extend(a);
                }
                None => return Ok(None),
            }
        }
        if residual.iter().zip(&covered).any(|(&r, &c)| !c && r != 0) {
            return Ok(None);
        }
        Ok(Some((total, assignment)))
    }
}

impl StepSearch for Tree {
    fn lower(&self) -> &[i64] {
        &self.lower
    }

    fn upper(&self) -> &[i64] {
        &self.upper
    }

    fn objective(&self) -> &[i64] {
        &self.objective
    }

    fn guessed_span(&self) -> u64 {
        self.nodes
            .iter()
            .filter(|n| !n.children.is_empty())
            .map(|n| n.cols.iter().map(|&c| (self.upper[c] - self.lower[c]) as u64).sum::<u64>())
            .max()
            .unwrap_or(0)
    }

    fn theorem_cap(&self) -> Option<u64> {
        self.theorem_cap
    }

    fn is_feasible(&self, x: &[i64]) -> Result<bool> {
        let inside = x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u);
        Ok(inside && self.matrix_times(x)? == self.rhs)
    }

    fn search(&self, z: &[i64], lambda: i64, cap: u64, config: &SolverConfig) -> Result<Option<Augmentation>> {
        self.step_search(z, lambda, cap, config)
    }
}

enum PhaseOne {
    Feasible(IntVector, usize),
    Infeasible(usize),
    Unknown(usize),
}

/// Slack column per row, attached to the deepest block covering the row: a
/// leaf takes it as an extra column, an inner block gets a new one-column
/// leaf child.
fn phase_one(tree: &Tree, config: &SolverConfig, policy: &HeadCap) -> Result<PhaseOne> {
    let nv = tree.lower.len();
    let ax = tree.matrix_times(&tree.lower)?;
    let need: Vec<i64> = tree
        .rhs
        .iter()
        .zip(&ax)
        .map(|(b, a)| b.checked_sub(*a).ok_or(Error::Overflow("phase one")))
        .collect::<Result<_>>()?;
    if need.iter().all(|&v| v == 0) {
        return Ok(PhaseOne::Feasible(IntVector::new(tree.lower.clone()), 0));
    }
    let mut aux = tree.clone();
    aux.objective = vec![0; nv];
    let mut start = tree.lower.clone();
    for (row, &v) in need.iter().enumerate() {
        let col = aux.lower.len();
        let amount = v.checked_abs().ok_or(Error::Overflow("phase one"))?;
        aux.lower.push(0);
        aux.upper.push(amount);
        aux.objective.push(-1);
        start.push(amount);
        let sign = if v < 0 { -1 } else { 1 };
        let mut owner = aux.root;
        while let Some(&c) = aux.nodes[owner].children.iter().find(|&&c| aux.nodes[c].rows.contains(&row)) {
            owner = c;
        }
        if aux.nodes[owner].children.is_empty() {
            let node = &mut aux.nodes[owner];
            let mut m = IntMatrix::zeros(node.matrix.rows(), node.matrix.cols() + 1);
            for i in 0..node.matrix.rows() {
                for j in 0..node.matrix.cols() {
                    m.set(i, j, node.matrix.get(i, j));
                }
            }
            m.set(row - node.rows.start, node.matrix.cols(), sign);
            node.matrix = m;
            node.cols.push(col);
        } else {
            let leaf = aux.nodes.len();
            aux.nodes.push(Node {
                rows: row..row + 1,
                cols: vec![col],
                matrix: IntMatrix::new(1, 1, vec![sign])?,
                children: Vec::new(),
            });
            aux.nodes[owner].children.push(leaf);
        }
    }
    debug_assert!(aux.is_feasible(&start).unwrap_or(false));
    let run = augment(&aux, IntVector::new(start), policy, config, Some(0))?;
    let k = run.augmentations.len();
    if dot(&aux.objective, &run.solution)? == 0 {
        return Ok(PhaseOne::Feasible(IntVector::new(run.solution[..nv].to_vec()), k));
    }
    Ok(match run.status {
        SolveStatus::Optimal => PhaseOne::Infeasible(k),
        _ => PhaseOne::Unknown(k),
    })
}

pub fn solve_multistage(inst: &TreeInstance, config: &SolverConfig) -> Result<SolveReport> {
    inst.ensure_valid()?;
    if config.max_iterations < 1 {
        return Err(Error::Precondition("max_iterations must be at least 1".into()));
    }
    if config.head_cap == HeadCap::Exact(0) {
        return Err(Error::Precondition("head cap must be at least 1".into()));
    }
    with_pool(config.parallel_width, || {
        let tree = Tree::from_instance(inst);
        let phase1_policy = match config.head_cap {
            HeadCap::TheoremBound => HeadCap::TheoremBound,
            _ => HeadCap::Adaptive,
        };
        let (start, phase_one_iterations) = match phase_one(&tree, config, &phase1_policy)? {
            PhaseOne::Feasible(x, k) => (x, k),
            PhaseOne::Infeasible(k) => return Ok(stopped(SolveStatus::Infeasible, k)),
            PhaseOne::Unknown(k) => return Ok(stopped(SolveStatus::BudgetStopped, k)),
        };
        let initial_value = inst.objective_value(&start)?;
        let run = augment(&tree, start, &config.head_cap, config, None)?;
        Ok(SolveReport {
            status: run.status,
            objective_value: Some(inst.objective_value(&run.solution)?),
            solution: Some(run.solution),
            initial_value: Some(initial_value),
            iterations: run.augmentations.len(),
            phase_one_iterations,
            augmentations: run.augmentations,
            final_head_cap: run.head_cap,
        })
    })
}

fn stopped(status: SolveStatus, phase_one_iterations: usize) -> SolveReport {
    SolveReport {
        status,
        solution: None,
        objective_value: None,
        initial_value: None,
        iterations: 0,
        phase_one_iterations,
        augmentations: Vec::new(),
        final_head_cap: 0,
    }
}
