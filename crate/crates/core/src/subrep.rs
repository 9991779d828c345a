//! Equal-sum submultisets.
//!
//! Given multisets `T_1..T_n ⊂ Z^d_{>=0}` with entries bounded by `Δ` and a
//! common total, there are nonempty `S_i ⊆ T_i` whose sums agree, and their
//! size depends only on `d` and `Δ`. This module finds such `S_i` exactly: it
//! computes, for every `T_i`, which points are sums of submultisets, looks for
//! the smallest nonzero point reachable in all of them and reads one
//! submultiset per `T_i` back off the reachability tables. The search radius
//! doubles until a common point appears; the common total is always one, so
//! the search terminates.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::bounds::{big, checked_pow, DEFAULT_MAX_BITS};
use crate::error::{Error, Result};
use crate::types::IntVector;

pub const DEFAULT_MAX_CELLS: usize = 20_000_000;

/// Multiset of vectors, stored as vector → multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VectorMultiset {
    dim: usize,
    entries: BTreeMap<IntVector, u64>,
}

impl VectorMultiset {
    pub fn new(dim: usize) -> Self {
        VectorMultiset { dim, entries: BTreeMap::new() }
    }

    pub fn from_vectors(dim: usize, vectors: impl IntoIterator<Item = IntVector>) -> Result<Self> {
        let mut m = VectorMultiset::new(dim);
        for v in vectors {
            m.insert(v, 1)?;
        }
        Ok(m)
    }

    pub fn insert(&mut self, v: IntVector, count: u64) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!("vector {v} in a multiset of dimension {}", self.dim)));
        }
        if count > 0 {
            *self.entries.entry(v).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> impl Iterator<Item = (&IntVector, u64)> {
        self.entries.iter().map(|(v, &c)| (v, c))
    }

    pub fn multiplicity(&self, v: &IntVector) -> u64 {
        self.entries.get(v).copied().unwrap_or(0)
    }

    /// Number of elements counted with multiplicity.
    pub fn size(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> Result<IntVector> {
        self.entries.iter().try_fold(IntVector::zeros(self.dim), |acc, (v, &c)| {
            let c = i64::try_from(c).map_err(|_| Error::Overflow("multiset sum"))?;
            acc.checked_add(&v.checked_scale(c)?)
        })
    }

    pub fn is_submultiset_of(&self, other: &VectorMultiset) -> bool {
        self.entries.iter().all(|(v, &c)| other.multiplicity(v) >= c)
    }

    /// All elements with repetition, in order.
    pub fn to_vec(&self) -> Vec<IntVector> {
        self.entries.iter().flat_map(|(v, &c)| std::iter::repeat_n(v.clone(), c as usize)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonSubmultisets {
    pub subsets: Vec<VectorMultiset>,
    pub common_sum: IntVector,
}

/// Finds nonempty `S_i ⊆ T_i` with equal sums. The common sum is the
/// reachable point of smallest one-norm, ties broken lexicographically.
pub fn find_common_submultisets(sets: &[VectorMultiset], delta: i64) -> Result<CommonSubmultisets> {
    find_common_submultisets_with_budget(sets, delta, DEFAULT_MAX_CELLS)
}

pub fn find_common_submultisets_with_budget(
    sets: &[VectorMultiset],
    delta: i64,
    max_cells: usize,
) -> Result<CommonSubmultisets> {
    let total = check_input(sets, delta)?;
    let d = total.len();
    let zero = IntVector::zeros(d);

    // Zero vectors contribute nothing except when every set holds one.
    if sets.iter().all(|s| s.multiplicity(&zero) > 0) {
        let subsets = sets
            .iter()
            .map(|_| {
                let mut m = VectorMultiset::new(d);
                m.insert(zero.clone(), 1).map(|_| m)
            })
            .collect::<Result<_>>()?;
        return Ok(CommonSubmultisets { subsets, common_sum: zero });
    }

    let total_norm = total.norm1()?;
    let mut radius = 1i64;
    loop {
        let radius_now = radius.min(total_norm);
        let extents: Vec<usize> = total.iter().map(|&t| t.min(radius_now) as usize + 1).collect();
        let cells = extents.iter().try_fold(1usize, |acc, &e| acc.checked_mul(e)).unwrap_or(usize::MAX);
        if cells > max_cells {
            return Err(Error::BudgetExceeded { what: "reachable-sum cell", limit: max_cells });
        }
        let grid = Grid { extents };
        let tables: Vec<Reach> = sets.iter().map(|s| Reach::build(&grid, s, radius_now)).collect();

        let common = (1..grid.len())
            .filter(|&cell| tables.iter().all(|t| t.from[cell] != UNREACHED))
            .map(|cell| grid.point(cell))
            .filter(|p| p.iter().sum::<i64>() <= radius_now)
            .min_by(|a, b| (a.iter().sum::<i64>(), a).cmp(&(b.iter().sum::<i64>(), b)));
        if let Some(point) = common {
            let subsets = tables.iter().map(|t| t.extract(&grid, &point, d)).collect::<Result<_>>()?;
            return Ok(CommonSubmultisets { subsets, common_sum: IntVector::new(point) });
        }
        if radius_now == total_norm {
            // The common total is reachable everywhere, so this is unreachable
            // for valid input.
            return Err(Error::Precondition("no common nonzero sum".into()));
        }
        radius = radius.saturating_mul(2);
    }
}

fn check_input(sets: &[VectorMultiset], delta: i64) -> Result<IntVector> {
    let Some(first) = sets.first() else {
        return Err(Error::Precondition("need at least one multiset".into()));
    };
    let total = first.sum()?;
    for (i, s) in sets.iter().enumerate() {
        if s.dim != first.dim {
            return Err(Error::Dimension(format!("multiset {i} has dimension {}, expected {}", s.dim, first.dim)));
        }
        if s.is_empty() {
            return Err(Error::Precondition(format!("multiset {i} is empty")));
        }
        if let Some((v, _)) = s.entries().find(|(v, _)| v.iter().any(|&x| x < 0 || x > delta)) {
            return Err(Error::Precondition(format!("multiset {i} holds {v}, outside [0, {delta}]")));
        }
        let sum = s.sum()?;
        if sum != total {
            return Err(Error::Precondition(format!("multiset {i} sums to {sum}, multiset 0 to {total}")));
        }
    }
    Ok(total)
}

const UNREACHED: u32 = u32::MAX;
const ORIGIN: u32 = u32::MAX - 1;

struct Grid {
    extents: Vec<usize>,
}

impl Grid {
    fn len(&self) -> usize {
        self.extents.iter().product()
    }

    fn point(&self, mut cell: usize) -> Vec<i64> {
        self.extents
            .iter()
            .map(|&e| {
                let c = cell % e;
                cell /= e;
                c as i64
            })
            .collect()
    }

    fn cell(&self, p: &[i64]) -> Option<usize> {
        let mut idx = 0;
        let mut stride = 1;
        for (&x, &e) in p.iter().zip(&self.extents) {
            if x < 0 || x as usize >= e {
                return None;
            }
            idx += x as usize * stride;
            stride *= e;
        }
        Some(idx)
    }
}

/// 0/1 reachability over the grid with "first item that reached the cell"
/// back-pointers. Multiplicities are split into powers of two.
struct Reach {
    items: Vec<(IntVector, u64)>,
    from: Vec<u32>,
}

impl Reach {
    fn build(grid: &Grid, set: &VectorMultiset, radius: i64) -> Reach {
        let mut items = Vec::new();
        for (v, count) in set.entries().filter(|(v, _)| !v.is_zero()) {
            let mut left = count;
            let mut chunk = 1;
            while left > 0 {
                let take = chunk.min(left);
                items.push((v.clone(), take));
                left -= take;
                chunk *= 2;
            }
        }
        let mut from = vec![UNREACHED; grid.len()];
        from[0] = ORIGIN;
        for (k, (v, take)) in items.iter().enumerate() {
            let shift: Vec<i64> = v.iter().map(|&x| x * *take as i64).collect();
            if shift.iter().sum::<i64>() > radius {
                continue;
            }
            // Descending order keeps each item 0/1.
            for cell in (0..grid.len()).rev() {
                if from[cell] != UNREACHED {
                    continue;
                }
                let p = grid.point(cell);
                if p.iter().sum::<i64>() > radius {
                    continue;
                }
                let q: Vec<i64> = p.iter().zip(&shift).map(|(a, b)| a - b).collect();
                if let Some(src) = grid.cell(&q) {
                    if from[src] != UNREACHED && from[src] != k as u32 {
                        from[cell] = k as u32;
                    }
                }
            }
        }
        Reach { items, from }
    }

    fn extract(&self, grid: &Grid, point: &[i64], d: usize) -> Result<VectorMultiset> {
        let mut out = VectorMultiset::new(d);
        let mut p = point.to_vec();
        loop {
            let cell = grid.cell(&p).expect("point inside grid");
            match self.from[cell] {
                ORIGIN => return Ok(out),
                UNREACHED => unreachable!("extracting an unreached point"),
                k => {
                    let (v, take) = &self.items[k as usize];
                    out.insert(v.clone(), *take)?;
                    for (x, y) in p.iter_mut().zip(v.iter()) {
                        *x -= y * *take as i64;
                    }
                }
            }
        }
    }
}

/// `d²·Δ·l·(16Δ(d+1)+1)^{d(l-1)}` with `l = ((2Δ+1)^d)^d`, an explicit
/// size bound for the submultisets.
pub fn subrep_size_bound(d: u64, delta: u64) -> Result<BigUint> {
    let points = checked_pow(&big(2 * delta + 1), &big(d), DEFAULT_MAX_BITS)?;
    let l = checked_pow(&points, &big(d), DEFAULT_MAX_BITS)?;
    let exp = big(d) * (&l - big(1));
    let power = checked_pow(&big(16 * delta * (d + 1) + 1), &exp, DEFAULT_MAX_BITS)?;
    Ok(big(d * d * delta) * l * power)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(d: usize, vs: &[&[i64]]) -> VectorMultiset {
        VectorMultiset::from_vectors(d, vs.iter().map(|v| IntVector::new(v.to_vec()))).unwrap()
    }

    fn check(sets: &[VectorMultiset], out: &CommonSubmultisets) {
        for (t, s) in sets.iter().zip(&out.subsets) {
            assert!(!s.is_empty());
            assert!(s.is_submultiset_of(t));
            assert_eq!(s.sum().unwrap(), out.common_sum);
        }
    }

    #[test]
    fn whole_sets_when_forced() {
        let sets = [ms(1, &[&[1], &[1]]), ms(1, &[&[2]])];
        let out = find_common_submultisets(&sets, 2).unwrap();
        check(&sets, &out);
        assert_eq!(out.common_sum.as_slice(), &[2]);
        assert_eq!(out.subsets[0], sets[0]);
    }

    #[test]
    fn three_sets_meet_at_six() {
        let one: &[i64] = &[1];
        let two: &[i64] = &[2];
        let three: &[i64] = &[3];
        let sets = [ms(1, &[one; 6]), ms(1, &[two; 3]), ms(1, &[three; 2])];
        let out = find_common_submultisets(&sets, 3).unwrap();
        check(&sets, &out);
        assert_eq!(out.common_sum.as_slice(), &[6]);
        for (s, t) in out.subsets.iter().zip(&sets) {
            assert_eq!(s, t);
        }
    }

    #[test]
    fn two_dimensional_single_point() {
        let sets = [ms(2, &[&[1, 0], &[0, 1]]), ms(2, &[&[1, 1]])];
        let out = find_common_submultisets(&sets, 1).unwrap();
        check(&sets, &out);
        assert_eq!(out.common_sum.as_slice(), &[1, 1]);
    }

    #[test]
    fn smallest_common_point_is_chosen() {
        let sets = [ms(1, &[&[2], &[2], &[3], &[3]]), ms(1, &[&[1], &[1], &[3], &[5]])];
        let out = find_common_submultisets(&sets, 5).unwrap();
        check(&sets, &out);
        assert_eq!(out.common_sum.as_slice(), &[2]);
    }

    #[test]
    fn zero_vectors() {
        let sets = [ms(1, &[&[0], &[2]]), ms(1, &[&[0], &[1], &[1]])];
        let out = find_common_submultisets(&sets, 2).unwrap();
        assert_eq!(out.common_sum.as_slice(), &[0]);
        check(&sets, &out);
        let sets = [ms(1, &[&[0], &[2]]), ms(1, &[&[1], &[1]])];
        let out = find_common_submultisets(&sets, 2).unwrap();
        assert_eq!(out.common_sum.as_slice(), &[2]);
    }

    #[test]
    fn precondition_failures() {
        assert!(find_common_submultisets(&[ms(1, &[&[1]]), ms(1, &[&[2]])], 2).is_err());
        assert!(find_common_submultisets(&[ms(1, &[&[3]])], 2).is_err());
        assert!(find_common_submultisets(&[], 2).is_err());
        assert!(find_common_submultisets(&[ms(1, &[])], 2).is_err());
    }

    #[test]
    fn size_bound_values() {
        assert_eq!(subrep_size_bound(1, 1).unwrap(), big(3267));
        assert!(subrep_size_bound(1, 2).unwrap() < subrep_size_bound(1, 3).unwrap());
        // Golden value: 324 · 49^160.
        let b = subrep_size_bound(2, 1).unwrap();
        assert_eq!(b, big(324) * big(49).pow(160));
        assert_eq!(b.bits(), 907);
    }
}
