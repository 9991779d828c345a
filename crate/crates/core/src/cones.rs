//! Integer cones and their intersections.
//!
//! `int.cone(B)` is the set of nonnegative integer combinations of the
//! generators `B ⊂ Z^d_{>=0}`. The intersection of several integer cones is
//! again finitely generated; its generators are found from the joint witness
//! monoid
//!
//! ```text
//! K = { (λ^1, ..., λ^l) >= 0 : B^1 λ^1 = B^2 λ^2 = ... = B^l λ^l }.
//! ```
//!
//! Every witness tuple of an indecomposable element of the intersection is a
//! minimal element of `K` (a split of the tuple would split the element), so
//! projecting the Hilbert basis of `K` and discarding decomposable images
//! gives the generating set, together with witnesses for each generator.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::blockip::feasible_small_ip;
use crate::bounds::{big, checked_pow, DEFAULT_MAX_BITS};
use crate::error::{Error, Result};
use crate::hilbert::{nonneg_kernel_basis, DEFAULT_NODE_BUDGET};
use crate::types::{IntMatrix, IntVector};

/// Finite generating set of an integer cone in `Z^d_{>=0}`.
///
/// Construction drops duplicates and every generator that lies in the cone
/// of the others, so the stored generators are exactly the indecomposable
/// elements of the cone. They are kept in one-norm then lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    dim: usize,
    generators: Vec<IntVector>,
}

impl GeneratorSet {
    pub fn new(dim: usize, generators: Vec<IntVector>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.len() != dim {
                return Err(Error::Dimension(format!("generator {i} has dimension {}, expected {dim}", g.len())));
            }
            if g.iter().any(|&x| x < 0) || g.is_zero() {
                return Err(Error::Precondition(format!("generator {g} must be nonnegative and nonzero")));
            }
        }
        let mut sorted = generators;
        sorted.sort_by_key(|g| (g.norm1().unwrap_or(i64::MAX), g.clone()));
        sorted.dedup();
        let mut kept: Vec<IntVector> = Vec::with_capacity(sorted.len());
        for g in sorted {
            // Anything that could decompose g is strictly smaller in one-norm.
            let partial = GeneratorSet { dim, generators: kept.clone() };
            if cone_member(&partial, &g)?.is_none() {
                kept.push(g);
            }
        }
        Ok(GeneratorSet { dim, generators: kept })
    }

    pub fn from_rows(dim: usize, rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(dim, rows.iter().cloned().map(IntVector::new).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[IntVector] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Largest entry over all generators.
    pub fn delta(&self) -> i64 {
        self.generators.iter().flat_map(|g| g.iter().copied()).max().unwrap_or(0)
    }

    /// Generators as the columns of a `d x |B|` matrix.
    pub fn matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.dim, self.generators.len());
        for (j, g) in self.generators.iter().enumerate() {
            for (i, &x) in g.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn combine(&self, lambda: &[i64]) -> Result<IntVector> {
        Ok(IntVector::new(self.matrix().mul_vec(lambda)?))
    }
}

/// A witness `λ >= 0` with `B λ = point`, or `None` if the point is not in the
/// integer cone. The witness is the lexicographically smallest one.
pub fn cone_member(gen: &GeneratorSet, point: &[i64]) -> Result<Option<IntVector>> {
    if point.len() != gen.dim {
        return Err(Error::Dimension(format!("point of dimension {} for a cone in dimension {}", point.len(), gen.dim)));
    }
    if point.iter().any(|&x| x < 0) {
        return Ok(None);
    }
    let upper: Vec<i64> = gen
        .generators
        .iter()
        .map(|g| {
            g.iter().zip(point).filter(|(a, _)| **a > 0).map(|(a, p)| p / a).min().unwrap_or(0)
        })
        .collect();
    let lower = vec![0; gen.len()];
    feasible_small_ip(&gen.matrix(), point, &lower, &upper)
}

/// `((2dΔ+1)^d, Δ(2dΔ+1)^d)`: the witness one-norm bound and the element
/// infinity-norm bound for generators of a two-cone intersection.
pub fn lemma4_bounds(d: u64, delta: u64) -> Result<(BigUint, BigUint)> {
    let w = checked_pow(&big(2 * d * delta + 1), &big(d), DEFAULT_MAX_BITS)?;
    let e = &w * big(delta);
    Ok((w, e))
}

/// `(16Δ(d+1)+1)^{d(l-1)}`: witness one-norm bound for generators of an
/// `l`-fold intersection.
pub fn many_witness_bound(d: u64, delta: u64, l: u64) -> Result<BigUint> {
    checked_pow(&big(16 * delta * (d + 1) + 1), &big(d * l.saturating_sub(1)), DEFAULT_MAX_BITS)
}

/// Witness bound that applies to an intersection of `l` cones: the two-cone
/// bound for `l = 2`, the many-cone bound otherwise.
pub fn witness_bound(d: u64, delta: u64, l: u64) -> Result<BigUint> {
    if l == 2 {
        Ok(lemma4_bounds(d, delta)?.0)
    } else {
        many_witness_bound(d, delta, l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeIntersection {
    pub set: GeneratorSet,
    /// `witnesses[k][i]` expresses generator `k` in input cone `i`.
    pub witnesses: Vec<Vec<IntVector>>,
}

pub fn intersect_two(b1: &GeneratorSet, b2: &GeneratorSet, delta: i64) -> Result<ConeIntersection> {
    intersect_many(&[b1.clone(), b2.clone()], delta)
}

pub fn intersect_many(sets: &[GeneratorSet], delta: i64) -> Result<ConeIntersection> {
    intersect_many_with_budget(sets, delta, DEFAULT_NODE_BUDGET)
}

pub fn intersect_many_with_budget(sets: &[GeneratorSet], delta: i64, node_budget: usize) -> Result<ConeIntersection> {
    let Some(first) = sets.first() else {
        return Err(Error::Precondition("need at least one generating set".into()));
    };
    let d = first.dim;
    for (i, s) in sets.iter().enumerate() {
        if s.dim != d {
            return Err(Error::Dimension(format!("set {i} has dimension {}, expected {d}", s.dim)));
        }
        if s.delta() > delta {
            return Err(Error::Precondition(format!("set {i} has an entry above delta = {delta}")));
        }
    }
    if sets.len() == 1 {
        let witnesses = (0..first.len())
            .map(|k| vec![(0..first.len()).map(|j| i64::from(j == k)).collect()])
            .collect();
        return Ok(ConeIntersection { set: first.clone(), witnesses });
    }

    // Joint system B^1 λ^1 - B^i λ^i = 0 for i = 2..l.
    let offsets: Vec<usize> = sets
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s.len();
            Some(o)
        })
        .collect();
    let total: usize = sets.iter().map(GeneratorSet::len).sum();
    let mut joint = IntMatrix::zeros(d * (sets.len() - 1), total);
    for (i, s) in sets.iter().enumerate().skip(1) {
        for row in 0..d {
            let r = (i - 1) * d + row;
            for (j, g) in first.generators.iter().enumerate() {
                joint.set(r, offsets[0] + j, g[row]);
            }
            for (j, g) in s.generators.iter().enumerate() {
                joint.set(r, offsets[i] + j, -g[row]);
            }
        }
    }
    let l = sets.len() as u64;
    let cap = witness_bound(d as u64, delta.max(1) as u64, l)
        .ok()
        .and_then(|w| (w * big(l)).to_u64())
        .unwrap_or(u64::MAX);
    let hb = nonneg_kernel_basis(&joint, cap, node_budget)?;

    let split = |x: &[i64]| -> Vec<IntVector> {
        sets.iter()
            .zip(&offsets)
            .map(|(s, &o)| IntVector::new(x[o..o + s.len()].to_vec()))
            .collect()
    };
    let mut candidates: Vec<(IntVector, Vec<IntVector>)> = Vec::new();
    for x in &hb.elements {
        let parts = split(x);
        let b = first.combine(&parts[0])?;
        candidates.push((b, parts));
    }
    candidates.sort_by(|(a, wa), (b, wb)| {
        (a.norm1().unwrap_or(i64::MAX), a, wa).cmp(&(b.norm1().unwrap_or(i64::MAX), b, wb))
    });
    candidates.dedup_by(|(a, _), (b, _)| a == b);

    let mut generators = Vec::new();
    let mut witnesses = Vec::new();
    for (b, parts) in candidates {
        let partial = GeneratorSet { dim: d, generators: generators.clone() };
        if cone_member(&partial, &b)?.is_none() {
            generators.push(b);
            witnesses.push(parts);
        }
    }
    Ok(ConeIntersection { set: GeneratorSet { dim: d, generators }, witnesses })
}
