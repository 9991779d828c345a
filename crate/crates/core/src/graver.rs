//! Graver bases of small matrices.
//!
//! A kernel vector is a Graver element when it is not the sum of two nonzero
//! kernel vectors that are sign-compatible with it. Inside one orthant these
//! are exactly the minimal nonzero kernel points, so the basis is assembled
//! from one nonnegative completion per sign pattern.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::bounds::{big, checked_pow, DEFAULT_MAX_BITS};
use crate::error::{Error, Result};
use crate::hilbert::{nonneg_kernel_basis, DEFAULT_NODE_BUDGET};
use crate::types::{is_conformal, norm1, IntMatrix, IntVector};

/// `(2 m delta + 1)^m`, the one-norm bound for Graver elements of an
/// `m`-row matrix with entries bounded by `delta`.
pub fn graver_norm_bound(m: u64, delta: u64) -> Result<BigUint> {
    checked_pow(&big(2 * m * delta + 1), &big(m), DEFAULT_MAX_BITS)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraverBasis {
    matrix: IntMatrix,
    /// One representative per `±` pair, first nonzero entry positive, sorted.
    representatives: Vec<IntVector>,
    truncated: bool,
}

impl GraverBasis {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn representatives(&self) -> &[IntVector] {
        &self.representatives
    }

    /// All elements, both signs, in lexicographic order.
    pub fn elements(&self) -> Vec<IntVector> {
        let mut all: Vec<IntVector> = self
            .representatives
            .iter()
            .flat_map(|g| [g.clone(), g.iter().map(|x| -x).collect()])
            .collect();
        all.sort();
        all
    }

    pub fn len(&self) -> usize {
        2 * self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// `true` when the norm cap was below the Graver bound and the search was
    /// cut short, so elements may be missing.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn max_norm1(&self) -> i64 {
        self.representatives.iter().map(|g| g.norm1().unwrap_or(i64::MAX)).max().unwrap_or(0)
    }
}

/// Enumerates all Graver elements with one-norm at most `norm_cap`.
pub fn graver_basis(matrix: &IntMatrix, norm_cap: u64) -> Result<GraverBasis> {
    graver_basis_with_budget(matrix, norm_cap, DEFAULT_NODE_BUDGET)
}

pub fn graver_basis_with_budget(matrix: &IntMatrix, norm_cap: u64, node_budget: usize) -> Result<GraverBasis> {
    let n = matrix.cols();
    if n == 0 {
        return Ok(GraverBasis { matrix: matrix.clone(), representatives: Vec::new(), truncated: false });
    }
    if n > 20 {
        return Err(Error::BudgetExceeded { what: "orthant count (columns)", limit: 20 });
    }
    // Orthants with a nonnegative first coordinate cover every ± pair.
    let patterns: Vec<Vec<i64>> = (0..1u64 << (n - 1))
        .map(|mask| (0..n).map(|j| if j > 0 && mask >> (j - 1) & 1 == 1 { -1 } else { 1 }).collect())
        .collect();
    let per_orthant: Vec<(Vec<Vec<i64>>, bool)> = patterns
        .par_iter()
        .map(|signs| {
            let hb = nonneg_kernel_basis(&matrix.with_column_signs(signs), norm_cap, node_budget)?;
            let elems = hb
                .elements
                .into_iter()
                .map(|x| x.iter().zip(signs).map(|(a, s)| a * s).collect())
                .collect();
            Ok((elems, hb.hit_cap))
        })
        .collect::<Result<_>>()?;

    let mut reps = BTreeSet::new();
    let mut hit_cap = false;
    for (elems, cap) in per_orthant {
        hit_cap |= cap;
        reps.extend(elems.into_iter().map(canonical_sign));
    }
    let bound = graver_norm_bound(matrix.rows() as u64, matrix.delta().unsigned_abs()).ok();
    let complete_by_bound = bound.is_some_and(|b| BigUint::from(norm_cap) >= b);
    Ok(GraverBasis {
        matrix: matrix.clone(),
        representatives: reps.into_iter().map(IntVector::new).collect(),
        truncated: hit_cap && !complete_by_bound,
    })
}

/// Graver basis with the cap set to the norm bound of the matrix itself.
pub fn complete_graver_basis(matrix: &IntMatrix) -> Result<GraverBasis> {
    let bound = graver_norm_bound(matrix.rows() as u64, matrix.delta().unsigned_abs())?;
    let cap = bound.to_u64().ok_or(Error::BudgetExceeded { what: "Graver norm cap", limit: usize::MAX })?;
    graver_basis(matrix, cap)
}

fn canonical_sign(v: Vec<i64>) -> Vec<i64> {
    match v.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => v.iter().map(|a| -a).collect(),
        _ => v,
    }
}

/// Checks the defining property directly: `g` is a nonzero kernel vector and
/// no kernel vector `u` with `0 < |u| < |g|` (componentwise, same signs)
/// exists. Exhaustive over the box spanned by `g`.
pub fn is_graver_element(matrix: &IntMatrix, g: &[i64]) -> Result<bool> {
    if g.iter().all(|&x| x == 0) || matrix.mul_vec(g)?.iter().any(|&v| v != 0) {
        return Ok(false);
    }
    let mut u = vec![0i64; g.len()];
    loop {
        // Odometer over 0 <= |u_i| <= |g_i| with the sign of g.
        let mut k = 0;
        loop {
            if k == g.len() {
                return Ok(true);
            }
            if u[k] != g[k] {
                u[k] += g[k].signum();
                break;
            }
            u[k] = 0;
            k += 1;
        }
        if u != g && matrix.mul_vec(&u)?.iter().all(|&v| v == 0) {
            return Ok(false);
        }
    }
}

/// A conformal decomposition `y = Σ k_i g_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub terms: Vec<(IntVector, u64)>,
}

impl Decomposition {
    /// Whether the number of distinct summands is at most `2 · cols`.
    pub fn within_summand_bound(&self, cols: usize) -> bool {
        self.terms.len() <= 2 * cols
    }

    pub fn recompose(&self, len: usize) -> Result<IntVector> {
        self.terms.iter().try_fold(IntVector::zeros(len), |acc, (g, k)| {
            let k = i64::try_from(*k).map_err(|_| Error::Overflow("multiplicity"))?;
            acc.checked_add(&g.checked_scale(k)?)
        })
    }
}

/// Writes the kernel vector `y` as a nonnegative combination of basis
/// elements that are each conformal to `y`. Greedy: at every step the
/// conformal element that removes the most one-norm is taken as often as it
/// fits (ties to the lexicographically smallest element).
pub fn decompose_into_graver(matrix: &IntMatrix, y: &[i64], basis: &GraverBasis) -> Result<Decomposition> {
    if y.len() != matrix.cols() {
        return Err(Error::Dimension(format!("vector of length {} for {} columns", y.len(), matrix.cols())));
    }
    if matrix.mul_vec(y)?.iter().any(|&v| v != 0) {
        return Err(Error::Precondition("vector is not in the kernel".into()));
    }
    let elements = basis.elements();
    let mut rest = y.to_vec();
    let mut terms: Vec<(IntVector, u64)> = Vec::new();
    while rest.iter().any(|&x| x != 0) {
        let mut best: Option<(i64, &IntVector, i64)> = None;
        for g in elements.iter().filter(|g| is_conformal(g, &rest)) {
            let k = g
                .iter()
                .zip(&rest)
                .filter(|(a, _)| **a != 0)
                .map(|(a, b)| b / a)
                .min()
                .unwrap_or(0);
            let gain = k.checked_mul(norm1(g)?).ok_or(Error::Overflow("decomposition"))?;
            if best.is_none_or(|(bg, _, _)| gain > bg) {
                best = Some((gain, g, k));
            }
        }
        let Some((_, g, k)) = best else {
            return Err(Error::IncompleteBasis(rest));
        };
        for (r, a) in rest.iter_mut().zip(g.iter()) {
            *r -= a * k;
        }
        match terms.iter_mut().find(|(h, _)| h == g) {
            Some((_, m)) => *m += k as u64,
            None => terms.push((g.clone(), k as u64)),
        }
    }
    Ok(Decomposition { terms })
}
