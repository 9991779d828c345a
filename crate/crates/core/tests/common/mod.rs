//! Brute-force oracles shared by the integration suites. They only use the
//! crate's plain data types, never its algorithms.
#![allow(dead_code)]

use blockgraver::multistage::TreeInstance;
use blockgraver::twostage::SolveReport;
use blockgraver::{IntMatrix, IntVector, TwoStageInstance};
use num_rational::Ratio;
use rand::Rng;

/// Calls `f` on every integer point of the box, in lexicographic order.
pub fn for_each_point(lower: &[i64], upper: &[i64], mut f: impl FnMut(&[i64])) {
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return;
    }
    let mut x = lower.to_vec();
    loop {
        f(&x);
        let mut k = x.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if x[k] < upper[k] {
                x[k] += 1;
                break;
            }
            x[k] = lower[k];
        }
    }
}

fn mat_vec(m: &IntMatrix, x: &[i64]) -> Vec<i64> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j) * x[j]).sum()).collect()
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum of `c.x` over `M x = b` inside the box, by enumeration.
pub fn brute_max(m: &IntMatrix, rhs: &[i64], lower: &[i64], upper: &[i64], c: &[i64]) -> Option<i64> {
    let mut best = None;
    for_each_point(lower, upper, |x| {
        if mat_vec(m, x) == rhs {
            let v = dot(c, x);
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
    });
    best
}

pub fn brute_two_stage(inst: &TwoStageInstance) -> Option<i64> {
    let m = inst.assemble_matrix().unwrap();
    brute_max(&m, &inst.rhs, &inst.lower, &inst.upper, &inst.objective)
}

pub fn brute_tree(inst: &TreeInstance) -> Option<i64> {
    let m = inst.assemble_matrix().unwrap();
    brute_max(&m, &inst.rhs, &inst.lower, &inst.upper, &inst.objective)
}

/// Replays the augmentation trail backwards from the final point and checks
/// that every step is feasible, strictly improving and reports its gain.
/// Returns the objective values along the trail.
pub fn replay_trail(
    report: &SolveReport,
    feasible: impl Fn(&[i64]) -> bool,
    objective: &[i64],
) -> Result<Vec<i64>, String> {
    let Some(last) = &report.solution else {
        return Ok(Vec::new());
    };
    let mut points = vec![last.as_slice().to_vec()];
    for a in report.augmentations.iter().rev() {
        let next = points.last().unwrap();
        let prev: Vec<i64> = next.iter().zip(a.cycle.iter()).map(|(x, y)| x - a.lambda * y).collect();
        points.push(prev);
    }
    points.reverse();
    let values: Vec<i64> = points.iter().map(|p| dot(objective, p)).collect();
    if let Some(init) = report.initial_value {
        if values[0] != init {
            return Err(format!("trail starts at {} but initial value is {init}", values[0]));
        }
    }
    for (k, p) in points.iter().enumerate() {
        if !feasible(p) {
            return Err(format!("point {k} of the trail is infeasible"));
        }
    }
    for (k, a) in report.augmentations.iter().enumerate() {
        if values[k + 1] <= values[k] {
            return Err(format!("step {k} does not improve: {} -> {}", values[k], values[k + 1]));
        }
        if values[k + 1] - values[k] != a.gain {
            return Err(format!("step {k} reports gain {} but improves by {}", a.gain, values[k + 1] - values[k]));
        }
    }
    Ok(values)
}

/// `u ⊑ v`: same orthant and `|u_i| <= |v_i|`.
pub fn conformal_le(u: &[i64], v: &[i64]) -> bool {
    u.iter().zip(v).all(|(&a, &b)| a * b >= 0 && a.abs() <= b.abs())
}

/// Nonzero kernel vectors of one-norm at most `bound`, found by solving for
/// the pivot variables of the reduced row echelon form over every choice of
/// the free variables.
pub fn kernel_up_to(m: &IntMatrix, bound: i64) -> Vec<Vec<i64>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Ratio<i64>>> =
        (0..rows).map(|i| (0..cols).map(|j| Ratio::from_integer(m.get(i, j))).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| a[i][c] != Ratio::from_integer(0)) else { continue };
        a.swap(r, p);
        let lead = a[r][c];
        for x in a[r].iter_mut() {
            *x /= lead;
        }
        for i in 0..rows {
            if i != r && a[i][c] != Ratio::from_integer(0) {
                let f = a[i][c];
                for j in 0..cols {
                    let sub = f * a[r][j];
                    a[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut out = Vec::new();
    let mut assign = vec![0i64; free.len()];
    fn rec(
        k: usize,
        budget: i64,
        assign: &mut Vec<i64>,
        free: &[usize],
        pivots: &[usize],
        a: &[Vec<Ratio<i64>>],
        cols: usize,
        bound: i64,
        out: &mut Vec<Vec<i64>>,
    ) {
        if k == free.len() {
            let mut x = vec![0i64; cols];
            for (f, &v) in free.iter().zip(assign.iter()) {
                x[*f] = v;
            }
            for (row, &p) in pivots.iter().enumerate() {
                let v: Ratio<i64> = -free.iter().zip(assign.iter()).map(|(&f, &val)| a[row][f] * val).sum::<Ratio<i64>>();
                if !v.is_integer() {
                    return;
                }
                x[p] = v.to_integer();
            }
            if x.iter().any(|&v| v != 0) && x.iter().map(|v| v.abs()).sum::<i64>() <= bound {
                out.push(x);
            }
            return;
        }
        for v in -budget..=budget {
            assign[k] = v;
            rec(k + 1, budget - v.abs(), assign, free, pivots, a, cols, bound, out);
        }
    }
    rec(0, bound, &mut assign, &free, &pivots, &a, cols, bound, &mut out);
    out
}

/// Graver basis restricted to one-norm at most `bound`: the conformally
/// minimal nonzero kernel vectors.
pub fn graver_oracle(m: &IntMatrix, bound: i64) -> Vec<Vec<i64>> {
    let mut kernel = kernel_up_to(m, bound);
    kernel.sort_by_key(|v| v.iter().map(|x| x.abs()).sum::<i64>());
    let mut basis: Vec<Vec<i64>> = Vec::new();
    for v in kernel {
        if !basis.iter().any(|g| conformal_le(g, &v)) {
            basis.push(v);
        }
    }
    basis.sort();
    basis
}

/// Reachability bitmap of `int.cone(gens)` over `[0, extent]^d`, row-major
/// with the last coordinate fastest.
pub fn cone_bitmap(gens: &[IntVector], d: usize, extent: usize) -> Vec<bool> {
    let side = extent + 1;
    let len = side.pow(d as u32);
    let mut reach = vec![false; len];
    reach[0] = true;
    let gens: Vec<Vec<usize>> = gens
        .iter()
        .filter(|g| !g.is_zero() && g.iter().all(|&x| x as usize <= extent))
        .map(|g| g.iter().map(|&x| x as usize).collect())
        .collect();
    let mut point = vec![0usize; d];
    for cell in 0..len {
        let mut c = cell;
        for k in (0..d).rev() {
            point[k] = c % side;
            c /= side;
        }
        if reach[cell] {
            continue;
        }
        reach[cell] = gens.iter().any(|g| {
            if g.iter().zip(&point).any(|(a, p)| a > p) {
                return false;
            }
            let idx = point.iter().zip(g).fold(0, |acc, (p, a)| acc * side + (p - a));
            reach[idx]
        });
    }
    reach
}

/// Smallest positive first coordinate of a kernel vector whose other
/// coordinates are bounded by `factor` times the first, by depth-first search
/// with a row check as soon as a row's columns are all fixed.
pub fn min_first_coordinate_search(m: &IntMatrix, limit: i64, factor: i64) -> Option<i64> {
    let cols = m.cols();
    let last_col: Vec<usize> = (0..m.rows()).map(|i| (0..cols).rev().find(|&j| m.get(i, j) != 0).unwrap_or(0)).collect();
    fn dfs(m: &IntMatrix, x: &mut Vec<i64>, j: usize, range: i64, last_col: &[usize]) -> bool {
        if j == x.len() {
            return true;
        }
        for v in -range..=range {
            x[j] = v;
            let ok = (0..m.rows()).filter(|&i| last_col[i] == j).all(|i| (0..=j).map(|k| m.get(i, k) * x[k]).sum::<i64>() == 0);
            if ok && dfs(m, x, j + 1, range, last_col) {
                return true;
            }
        }
        x[j] = 0;
        false
    }
    (1..=limit).find(|&x0| {
        let mut x = vec![0; cols];
        x[0] = x0;
        let zero_rows_ok = (0..m.rows()).filter(|&i| last_col[i] == 0).all(|i| m.get(i, 0) * x0 == 0);
        zero_rows_ok && dfs(m, &mut x, 1, x0 * factor, &last_col)
    })
}

pub fn lcm_range(lo: u64, hi: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    (lo..=hi).fold(1, |acc, k| acc / gcd(acc, k) * k)
}

/// A family of vectors with entries in `[-delta, delta]` summing to zero.
pub fn zero_sum_family(rng: &mut impl Rng, d: usize, delta: i64, free: usize) -> Vec<IntVector> {
    let mut out: Vec<Vec<i64>> = (0..free).map(|_| (0..d).map(|_| rng.random_range(-delta..=delta)).collect()).collect();
    let mut sum: Vec<i64> = (0..d).map(|k| out.iter().map(|v| v[k]).sum()).collect();
    while sum.iter().any(|&x| x != 0) {
        let fix: Vec<i64> = sum.iter().map(|&x| -x.clamp(-delta, delta)).collect();
        for (s, f) in sum.iter_mut().zip(&fix) {
            *s += f;
        }
        out.push(fix);
    }
    let len = out.len();
    for i in (1..len).rev() {
        out.swap(i, rng.random_range(0..=i));
    }
    out.into_iter().map(IntVector::new).collect()
}

/// Vectors in `[0, delta]^d` summing to exactly `target`.
pub fn split_total(rng: &mut impl Rng, target: &[i64], delta: i64, random_draws: usize) -> Vec<Vec<i64>> {
    let mut rem = target.to_vec();
    let mut out = Vec::new();
    for _ in 0..random_draws {
        if rem.iter().all(|&x| x == 0) {
            break;
        }
        let v: Vec<i64> = rem.iter().map(|&r| rng.random_range(0..=r.min(delta))).collect();
        for (r, x) in rem.iter_mut().zip(&v) {
            *r -= x;
        }
        out.push(v);
    }
    while rem.iter().any(|&x| x != 0) {
        let v: Vec<i64> = rem.iter().map(|&r| r.min(delta)).collect();
        for (r, x) in rem.iter_mut().zip(&v) {
            *r -= x;
        }
        out.push(v);
    }
    if out.is_empty() {
        out.push(vec![0; target.len()]);
    }
    out
}
