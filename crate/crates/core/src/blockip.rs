//! Exact dynamic program for small dense integer programs
//! `max c.y  s.t.  M y = rhs, lower <= y <= upper`.
//!
//! Variables are fixed left to right. A state is the partial right-hand side
//! `M[:, ..j] y[..j]`; states from which `rhs` is no longer reachable with the
//! remaining columns' row-wise min/max contributions are dropped. A backward
//! pass gives the best value-to-go of every state, and a final forward pass
//! picks the smallest value per variable that stays optimal, which yields the
//! lexicographically smallest optimum.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::types::{IntMatrix, IntVector};

pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IpOutcome {
    Optimal { solution: IntVector, value: i64 },
    Infeasible,
}

impl IpOutcome {
    pub fn solution(&self) -> Option<&IntVector> {
        match self {
            IpOutcome::Optimal { solution, .. } => Some(solution),
            IpOutcome::Infeasible => None,
        }
    }

    pub fn value(&self) -> Option<i64> {
        match self {
            IpOutcome::Optimal { value, .. } => Some(*value),
            IpOutcome::Infeasible => None,
        }
    }
}

pub fn solve_small_ip(
    m: &IntMatrix,
    rhs: &[i64],
    lower: &[i64],
    upper: &[i64],
    objective: &[i64],
) -> Result<IpOutcome> {
    solve_small_ip_with_budget(m, rhs, lower, upper, objective, DEFAULT_MAX_STATES)
}

/// Lexicographically smallest feasible point.
pub fn feasible_small_ip(m: &IntMatrix, rhs: &[i64], lower: &[i64], upper: &[i64]) -> Result<Option<IntVector>> {
    let zeros = vec![0; m.cols()];
    Ok(solve_small_ip(m, rhs, lower, upper, &zeros)?.solution().cloned())
}

pub fn solve_small_ip_with_budget(
    m: &IntMatrix,
    rhs: &[i64],
    lower: &[i64],
    upper: &[i64],
    objective: &[i64],
    max_states: usize,
) -> Result<IpOutcome> {
    let (rows, n) = (m.rows(), m.cols());
    if rhs.len() != rows || lower.len() != n || upper.len() != n || objective.len() != n {
        return Err(Error::Dimension(format!(
            "{rows}x{n} system with rhs {}, bounds {}/{}, objective {}",
            rhs.len(),
            lower.len(),
            upper.len(),
            objective.len()
        )));
    }
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Ok(IpOutcome::Infeasible);
    }
    let cols: Vec<Vec<i64>> = (0..n).map(|j| m.column(j)).collect();

    // rest_min[j][r], rest_max[j][r]: range of row r over columns j.. .
    let mut rest_min = vec![vec![0i64; rows]; n + 1];
    let mut rest_max = vec![vec![0i64; rows]; n + 1];
    for j in (0..n).rev() {
        for r in 0..rows {
            let a = mul(cols[j][r], lower[j])?;
            let b = mul(cols[j][r], upper[j])?;
            rest_min[j][r] = add(rest_min[j + 1][r], a.min(b))?;
            rest_max[j][r] = add(rest_max[j + 1][r], a.max(b))?;
        }
    }
    let viable = |j: usize, s: &[i64]| -> bool {
        (0..rows).all(|r| {
            let need = rhs[r] as i128 - s[r] as i128;
            rest_min[j][r] as i128 <= need && need <= rest_max[j][r] as i128
        })
    };

    let origin = vec![0i64; rows];
    if !viable(0, &origin) {
        return Ok(IpOutcome::Infeasible);
    }

    // Forward: reachable viable states per stage.
    let mut stages: Vec<Vec<Vec<i64>>> = Vec::with_capacity(n + 1);
    stages.push(vec![origin.clone()]);
    for j in 0..n {
        let mut next: HashSet<Vec<i64>> = HashSet::new();
        for s in &stages[j] {
            for v in lower[j]..=upper[j] {
                let t = step(s, &cols[j], v)?;
                if viable(j + 1, &t) {
                    next.insert(t);
                }
            }
        }
        if next.len() > max_states {
            return Err(Error::BudgetExceeded { what: "small IP state", limit: max_states });
        }
        let mut layer: Vec<Vec<i64>> = next.into_iter().collect();
        layer.sort_unstable();
        stages.push(layer);
    }

    // Backward: best value-to-go.
    let mut togo: Vec<HashMap<Vec<i64>, i64>> = vec![HashMap::new(); n + 1];
    if stages[n].iter().any(|s| s.as_slice() == rhs) {
        togo[n].insert(rhs.to_vec(), 0);
    }
    for j in (0..n).rev() {
        let (head, tail) = togo.split_at_mut(j + 1);
        let (cur, nxt) = (&mut head[j], &tail[0]);
        for s in &stages[j] {
            let mut best: Option<i64> = None;
            for v in lower[j]..=upper[j] {
                let t = step(s, &cols[j], v)?;
                if let Some(&rest) = nxt.get(&t) {
                    let val = add(mul(objective[j], v)?, rest)?;
                    best = Some(best.map_or(val, |b| b.max(val)));
                }
            }
            if let Some(b) = best {
                cur.insert(s.clone(), b);
            }
        }
    }

    let Some(&value) = togo[0].get(&origin) else {
        return Ok(IpOutcome::Infeasible);
    };
    let mut s = origin;
    let mut y = Vec::with_capacity(n);
    for j in 0..n {
        let want = togo[j][&s];
        let mut chosen = None;
        for v in lower[j]..=upper[j] {
            let t = step(&s, &cols[j], v)?;
            if let Some(&rest) = togo[j + 1].get(&t) {
                if add(mul(objective[j], v)?, rest)? == want {
                    chosen = Some((v, t));
                    break;
                }
            }
        }
        let (v, t) = chosen.expect("optimal continuation exists");
        y.push(v);
        s = t;
    }
    Ok(IpOutcome::Optimal { solution: IntVector::new(y), value })
}

fn step(s: &[i64], col: &[i64], v: i64) -> Result<Vec<i64>> {
    s.iter().zip(col).map(|(&a, &c)| add(a, mul(c, v)?)).collect()
}

fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow("small IP"))
}

fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow("small IP"))
}
