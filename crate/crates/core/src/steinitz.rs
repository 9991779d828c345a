//! Steinitz reordering of zero-sum vector sequences.
//!
//! Given `v_1..v_n` in `Z^d` with `|v_i|_inf <= delta` and zero total, the
//! construction keeps nested index sets `A_n ⊇ A_{n-1} ⊇ ... ⊇ A_d` together
//! with fractional weights `λ ∈ [0,1]^{A_k}` such that
//!
//! ```text
//! Σ_{i∈A_k} λ_i v_i = 0,   Σ_{i∈A_k} λ_i = k - d.
//! ```
//!
//! From `A_k` the weights are rescaled to total `k-1-d` and moved to a vertex
//! of the polytope cut out by those `d+1` equations inside the unit cube. At a
//! vertex at most `d+1` weights are fractional, which forces some weight to be
//! exactly zero; that index is peeled off. Placing the index removed from
//! `A_k` at position `k` gives prefix sums `Σ_{i∈A_k} (1-λ_i) v_i`, whose norm
//! is at most `d·delta`.
//!
//! All fractional work is done over exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::types::IntVector;

/// Returns a permutation (as a list of indices) whose prefix sums all have
/// infinity-norm at most `d * delta`.
pub fn steinitz_reorder(vectors: &[IntVector], delta: i64) -> Result<Vec<usize>> {
    let d = check_input(vectors, delta)?;
    let n = vectors.len();
    if n <= d {
        return Ok((0..n).collect());
    }

    let cols: Vec<Vec<BigRational>> = vectors
        .iter()
        .map(|v| {
            v.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .chain(std::iter::once(BigRational::one()))
                .collect()
        })
        .collect();

    let mut active: Vec<usize> = (0..n).collect();
    let mut weights: Vec<BigRational> = vec![ratio((n - d) as i64, n as i64); n];
    let mut peeled = Vec::with_capacity(n);

    while active.len() > d {
        let k = active.len();
        let scale = ratio((k - 1 - d) as i64, (k - d) as i64);
        let mut mu: Vec<BigRational> = weights.iter().map(|w| w * &scale).collect();
        move_to_vertex(&active, &cols, &mut mu);

        // Ties go to the smallest original index; `active` is kept sorted.
        let pos = mu
            .iter()
            .position(Zero::is_zero)
            .ok_or_else(|| Error::Precondition("vertex without a zero weight".into()))?;
        peeled.push(active.remove(pos));
        mu.remove(pos);
        weights = mu;
    }

    let mut perm = active;
    perm.extend(peeled.into_iter().rev());
    Ok(perm)
}

/// Largest infinity-norm over all prefix sums in the given order.
pub fn prefix_radius(vectors: &[IntVector], perm: &[usize]) -> Result<i64> {
    let n = vectors.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::Precondition(format!("{perm:?} is not a permutation of 0..{n}")));
    }
    let dim = vectors.first().map_or(0, |v| v.len());
    let mut sum = IntVector::zeros(dim);
    let mut radius = 0;
    for &i in perm {
        sum = sum.checked_add(&vectors[i])?;
        radius = radius.max(sum.norm_inf()?);
    }
    Ok(radius)
}

fn check_input(vectors: &[IntVector], delta: i64) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(1);
    };
    let d = first.len();
    if d == 0 {
        return Err(Error::Precondition("vectors must have dimension at least 1".into()));
    }
    let mut total = IntVector::zeros(d);
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != d {
            return Err(Error::Dimension(format!("vector {i} has dimension {}, expected {d}", v.len())));
        }
        if v.norm_inf()? > delta {
            return Err(Error::Precondition(format!("vector {i} = {v} has infinity-norm above {delta}")));
        }
        total = total.checked_add(v)?;
    }
    if !total.is_zero() {
        return Err(Error::Precondition(format!("vectors sum to {total}, not zero")));
    }
    Ok(d)
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Moves `mu` (indexed like `active`) to a vertex of
/// `{x ∈ [0,1]^k : Σ x_i (v_i, 1) = const}` without changing the constraint
/// values. Weights that are already 0 or 1 stay put.
fn move_to_vertex(active: &[usize], cols: &[Vec<BigRational>], mu: &mut [BigRational]) {
    loop {
        let free: Vec<usize> =
            (0..mu.len()).filter(|&j| mu[j].is_positive() && mu[j] < BigRational::one()).collect();
        let columns: Vec<&[BigRational]> = free.iter().map(|&j| cols[active[j]].as_slice()).collect();
        let Some(dir) = null_vector(&columns) else {
            return;
        };
        let step = free
            .iter()
            .zip(&dir)
            .filter(|(_, e)| !e.is_zero())
            .map(|(&j, e)| {
                if e.is_positive() {
                    (BigRational::one() - &mu[j]) / e
                } else {
                    &mu[j] / -e
                }
            })
            .min()
            .expect("null vector is nonzero");
        for (&j, e) in free.iter().zip(&dir) {
            mu[j] += &step * e;
        }
    }
}

/// A nonzero vector in the kernel of the matrix with the given columns, or
/// `None` if the columns are linearly independent.
fn null_vector(columns: &[&[BigRational]]) -> Option<Vec<BigRational>> {
    let ncols = columns.len();
    let nrows = columns.first().map_or(0, |c| c.len());
    if ncols == 0 {
        return None;
    }
    let mut m: Vec<Vec<BigRational>> =
        (0..nrows).map(|r| columns.iter().map(|c| c[r].clone()).collect()).collect();

    // Reduced row echelon form.
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == nrows {
            break;
        }
        let Some(p) = (row..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..nrows {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..ncols {
                    let delta = &factor * &m[row][c];
                    m[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }

    let free = (0..ncols).find(|c| !pivots.contains(c))?;
    let mut x = vec![BigRational::zero(); ncols];
    x[free] = BigRational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = -m[r][free].clone();
    }
    Some(x)
}
