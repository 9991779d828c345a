//! Minimal nonnegative kernel vectors by breadth-first completion.
//!
//! For `M x = 0, x >= 0` the minimal nonzero solutions (the Hilbert basis of
//! the kernel monoid) are generated level by level in `|x|_1`, following
//! Contejean and Devie: a partial vector `p` is extended by `e_j` only when
//! `<Mp, Me_j> < 0`, and any vector dominating a known solution is dropped.
//! Both the Graver enumeration (one orthant at a time) and the cone
//! intersection reduce to this routine.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::types::{dot, IntMatrix};

/// Default cap on the number of vectors visited by one completion run.
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelBasis {
    /// Minimal solutions in order of increasing one-norm, then lexicographic.
    pub elements: Vec<Vec<i64>>,
    /// `true` when the search stopped at the norm cap with partial vectors
    /// still pending; solutions above the cap may then be missing.
    pub hit_cap: bool,
}

/// Minimal nonzero `x >= 0` with `M x = 0` and `|x|_1 <= norm_cap`.
pub fn nonneg_kernel_basis(m: &IntMatrix, norm_cap: u64, node_budget: usize) -> Result<KernelBasis> {
    let n = m.cols();
    let images: Vec<Vec<i64>> = (0..n).map(|j| m.column(j)).collect();
    let mut solutions: Vec<Vec<i64>> = Vec::new();
    let mut visited = 0usize;

    // Frontier entries: (x, M x).
    let mut frontier: Vec<(Vec<i64>, Vec<i64>)> = (0..n)
        .map(|j| {
            let mut x = vec![0; n];
            x[j] = 1;
            (x, images[j].clone())
        })
        .collect();
    let mut level = 1u64;

    while !frontier.is_empty() && level <= norm_cap {
        let (found, pending): (Vec<_>, Vec<_>) =
            frontier.into_iter().partition(|(_, mx)| mx.iter().all(|&v| v == 0));
        solutions.extend(found.into_iter().map(|(x, _)| x));

        let mut next = BTreeSet::new();
        for (x, mx) in &pending {
            for (j, img) in images.iter().enumerate() {
                if dot(mx, img)? >= 0 {
                    continue;
                }
                let mut y = x.clone();
                y[j] = y[j].checked_add(1).ok_or(Error::Overflow("kernel completion"))?;
                if dominates_any(&y, &solutions) {
                    continue;
                }
                next.insert(y);
            }
        }
        visited += next.len();
        if visited > node_budget {
            return Err(Error::BudgetExceeded { what: "kernel completion node", limit: node_budget });
        }
        frontier = next
            .into_iter()
            .map(|y| {
                let my = m.mul_vec(&y)?;
                Ok((y, my))
            })
            .collect::<Result<_>>()?;
        level += 1;
    }

    // Solutions arrive level by level; sort within levels for a canonical order.
    solutions.sort_by(|a, b| a.iter().sum::<i64>().cmp(&b.iter().sum::<i64>()).then_with(|| a.cmp(b)));
    Ok(KernelBasis { elements: solutions, hit_cap: !frontier.is_empty() })
}

fn dominates_any(y: &[i64], solutions: &[Vec<i64>]) -> bool {
    solutions.iter().any(|s| s.iter().zip(y).all(|(a, b)| a <= b))
}
