//! Matrices whose nonzero kernel vectors are forced to be huge.
//!
//! Harmonic family: `-x_1 + k x_k = 0` for `k = 2..Δ`, so `x_1` is a multiple
//! of `lcm(2..Δ)`. Encoded family: a chain block `Δ y_k - y_{k+1} = 0` pins a
//! block to `y_0 (1, Δ, ..., Δ^s)`, and a digit row writes `z` in base `Δ`,
//! so `x_0 = z y_0` for every `z` in `2..Δ^{s+1}-1`. Both have entries in
//! `[-1, Δ]`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::blockip::{feasible_small_ip, solve_small_ip};
use crate::error::{Error, Result};
use crate::types::IntMatrix;

/// Largest `lcm(2..N)` argument accepted by [`growth_table`].
pub const MAX_LCM_ARGUMENT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Harmonic,
    Encoded,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harmonic" => Ok(Family::Harmonic),
            "encoded" => Ok(Family::Encoded),
            other => Err(Error::Parse(format!("unknown family {other:?}, expected harmonic or encoded"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Harmonic => "harmonic",
            Family::Encoded => "encoded",
        })
    }
}

/// `(Δ-1) x Δ`; column 0 is `-1`, row `i` has `i+2` in column `i+1`.
pub fn gen_harmonic(delta: u64) -> Result<IntMatrix> {
    if delta < 2 {
        return Err(Error::Precondition(format!("harmonic family needs delta >= 2, got {delta}")));
    }
    let d = delta as usize;
    let mut m = IntMatrix::zeros(d - 1, d);
    for i in 0..d - 1 {
        m.set(i, 0, -1);
        m.set(i, i + 1, i as i64 + 2);
    }
    Ok(m)
}

/// Base-`Δ` digits `a_0..a_s` of `z`, least significant first.
pub fn digits(z: u64, delta: u64, s: u64) -> Vec<i64> {
    let mut z = z;
    (0..=s)
        .map(|_| {
            let d = z % delta;
            z /= delta;
            d as i64
        })
        .collect()
}

/// Encoded values `2..Δ^{s+1}-1`.
fn encoded_values(delta: u64, s: u64) -> Result<std::ops::Range<u64>> {
    let top = delta
        .checked_pow(u32::try_from(s + 1).map_err(|_| Error::Overflow("encoded family"))?)
        .ok_or(Error::Overflow("encoded family"))?;
    Ok(2..top)
}

/// Two-stage matrix with one head column `x_0` and one block of `s+1` rows
/// and `s+1` columns per encoded value `z`: the chain rows
/// `Δ y_k - y_{k+1} = 0` first, then the digit row `-x_0 + Σ a_k(z) y_k = 0`.
pub fn gen_encoded(delta: u64, s: u64) -> Result<IntMatrix> {
    if delta < 2 || s < 1 {
        return Err(Error::Precondition(format!("encoded family needs delta >= 2 and s >= 1, got {delta}, {s}")));
    }
    let values = encoded_values(delta, s)?;
    let count = (values.end - values.start) as usize;
    if count.saturating_mul(s as usize + 1) > 1 << 16 {
        return Err(Error::Precondition(format!("encoded family for delta {delta}, s {s} is too large")));
    }
    let w = s as usize + 1;
    let mut m = IntMatrix::zeros(count * w, 1 + count * w);
    for (b, z) in values.enumerate() {
        let (row0, col0) = (b * w, 1 + b * w);
        for k in 0..w - 1 {
            m.set(row0 + k, col0 + k, delta as i64);
            m.set(row0 + k, col0 + k + 1, -1);
        }
        let digit_row = row0 + w - 1;
        m.set(digit_row, 0, -1);
        for (k, a) in digits(z, delta, s).into_iter().enumerate() {
            m.set(digit_row, col0 + k, a);
        }
    }
    Ok(m)
}

pub fn generate(family: Family, delta: u64, s: u64) -> Result<IntMatrix> {
    match family {
        Family::Harmonic => gen_harmonic(delta),
        Family::Encoded => gen_encoded(delta, s),
    }
}

/// `lcm(2..=n)`, exactly; 1 for `n < 2`.
pub fn lcm_upto(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc.lcm(&BigUint::from(k)))
}

/// Largest encoded value, or `Δ` for the harmonic family.
fn lcm_argument(family: Family, delta: u64, s: u64) -> Result<u64> {
    match family {
        Family::Harmonic => Ok(delta),
        Family::Encoded => Ok(encoded_values(delta, s)?.end - 1),
    }
}

/// Minimal `|x_0|` over nonzero integer kernel vectors of a matrix produced
/// by [`generate`] with the same parameters.
pub fn min_first_coordinate(matrix: &IntMatrix, family: Family, delta: u64, s: u64) -> Result<BigUint> {
    if *matrix != generate(family, delta, s)? {
        return Err(Error::Precondition(format!("matrix is not the {family} matrix for delta {delta}, s {s}")));
    }
    Ok(lcm_upto(lcm_argument(family, delta, s)?))
}

/// The kernel vector with `x_0 = lcm`.
pub fn analytic_witness(family: Family, delta: u64, s: u64) -> Result<Vec<BigInt>> {
    let l = BigInt::from(lcm_upto(lcm_argument(family, delta, s)?));
    let mut x = vec![l.clone()];
    match family {
        Family::Harmonic => x.extend((2..=delta).map(|k| &l / BigInt::from(k))),
        Family::Encoded => {
            for z in encoded_values(delta, s)? {
                let mut y = &l / BigInt::from(z);
                for _ in 0..=s {
                    x.push(y.clone());
                    y *= BigInt::from(delta);
                }
            }
        }
    }
    Ok(x)
}

/// `M x` in arbitrary precision.
pub fn big_residual(matrix: &IntMatrix, x: &[BigInt]) -> Result<Vec<BigInt>> {
    if x.len() != matrix.cols() {
        return Err(Error::Dimension(format!("vector of length {} for {} columns", x.len(), matrix.cols())));
    }
    Ok((0..matrix.rows())
        .map(|r| matrix.row(r).iter().zip(x).map(|(&a, v)| BigInt::from(a) * v).sum())
        .collect())
}

/// Smallest `x_0` in `1..=limit` admitting a kernel vector whose other
/// coordinates lie in `[-x_0 f, x_0 f]` with `f = coord_factor`.
pub fn kernel_search_min_first(matrix: &IntMatrix, limit: i64, coord_factor: i64) -> Result<Option<i64>> {
    let rest = drop_first_column(matrix);
    let first = matrix.column(0);
    for x0 in 1..=limit {
        let rhs: Vec<i64> = first.iter().map(|&a| -a * x0).collect();
        let b = x0.checked_mul(coord_factor).ok_or(Error::Overflow("kernel search"))?;
        let lower = vec![-b; rest.cols()];
        let upper = vec![b; rest.cols()];
        if feasible_small_ip(&rest, &rhs, &lower, &upper)?.is_some() {
            return Ok(Some(x0));
        }
    }
    Ok(None)
}

/// Whether some nonzero kernel vector has `x_0 = 0` and other coordinates in
/// `[-bound, bound]`.
pub fn has_kernel_vector_with_zero_first(matrix: &IntMatrix, bound: i64) -> Result<bool> {
    let rest = drop_first_column(matrix);
    let n = rest.cols();
    let zeros = vec![0; rest.rows()];
    for j in 0..n {
        for sign in [1, -1] {
            let mut c = vec![0; n];
            c[j] = sign;
            let out = solve_small_ip(&rest, &zeros, &vec![-bound; n], &vec![bound; n], &c)?;
            if out.value().is_some_and(|v| v > 0) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn drop_first_column(m: &IntMatrix) -> IntMatrix {
    let rows: Vec<Vec<i64>> = (0..m.rows()).map(|r| m.row(r)[1..].to_vec()).collect();
    IntMatrix::new(m.rows(), m.cols().saturating_sub(1), rows.concat()).expect("consistent shape")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthRow {
    pub delta: u64,
    pub s: u64,
    pub min_coordinate: BigUint,
    pub bits: u64,
}

/// Minimal head coordinate of the encoded family over a parameter grid.
pub fn growth_table(deltas: &[u64], ss: &[u64]) -> Result<Vec<GrowthRow>> {
    let mut out = Vec::new();
    for &delta in deltas {
        for &s in ss {
            if delta < 2 || s < 1 {
                return Err(Error::Precondition(format!("need delta >= 2 and s >= 1, got {delta}, {s}")));
            }
            let n = lcm_argument(Family::Encoded, delta, s)?;
            if n > MAX_LCM_ARGUMENT {
                return Err(Error::Precondition(format!(
                    "lcm(2..{n}) for delta {delta}, s {s} exceeds the range limit {MAX_LCM_ARGUMENT}"
                )));
            }
            let l = lcm_upto(n);
            out.push(GrowthRow { delta, s, bits: l.bits(), min_coordinate: l });
        }
    }
    Ok(out)
}

/// Nonzero check for witnesses.
pub fn is_nonzero(x: &[BigInt]) -> bool {
    x.iter().any(|v| !v.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(m: &IntMatrix) -> Vec<Vec<i64>> {
        m.to_rows()
    }

    #[test]
    fn harmonic_shapes() {
        assert_eq!(rows(&gen_harmonic(2).unwrap()), vec![vec![-1, 2]]);
        assert_eq!(rows(&gen_harmonic(3).unwrap()), vec![vec![-1, 2, 0], vec![-1, 0, 3]]);
        let m = gen_harmonic(4).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 4));
        assert_eq!((m.get(0, 1), m.get(1, 2), m.get(2, 3)), (2, 3, 4));
        assert!(gen_harmonic(1).is_err());
    }

    #[test]
    fn encoded_smallest_case() {
        let m = gen_encoded(2, 1).unwrap();
        // z = 2: digits (0, 1); z = 3: digits (1, 1).
        assert_eq!(
            rows(&m),
            vec![vec![0, 2, -1, 0, 0], vec![-1, 0, 1, 0, 0], vec![0, 0, 0, 2, -1], vec![-1, 0, 0, 1, 1]]
        );
    }

    #[test]
    fn encoded_entries_in_range() {
        for delta in 2..=4 {
            for s in 1..=2 {
                let m = gen_encoded(delta, s).unwrap();
                assert_eq!(m.delta(), delta as i64);
                assert!(m.entries().iter().all(|&e| (-1..=delta as i64).contains(&e)));
            }
        }
    }

    #[test]
    fn witnesses_are_kernel_vectors() {
        for delta in 2..=7 {
            let m = gen_harmonic(delta).unwrap();
            let w = analytic_witness(Family::Harmonic, delta, 0).unwrap();
            assert!(big_residual(&m, &w).unwrap().iter().all(Zero::is_zero));
        }
        for (delta, s) in [(2, 1), (2, 2), (3, 1), (3, 2), (4, 2)] {
            let m = gen_encoded(delta, s).unwrap();
            let w = analytic_witness(Family::Encoded, delta, s).unwrap();
            assert!(is_nonzero(&w));
            assert!(big_residual(&m, &w).unwrap().iter().all(Zero::is_zero));
        }
        let w = analytic_witness(Family::Harmonic, 3, 0).unwrap();
        assert_eq!(w, vec![BigInt::from(6), BigInt::from(3), BigInt::from(2)]);
    }

    #[test]
    fn minimal_coordinates() {
        let expect = [(2, 2u32), (3, 6), (4, 12), (5, 60), (6, 60), (7, 420)];
        for (delta, v) in expect {
            let m = gen_harmonic(delta).unwrap();
            assert_eq!(min_first_coordinate(&m, Family::Harmonic, delta, 0).unwrap(), BigUint::from(v));
        }
        let m = gen_encoded(2, 1).unwrap();
        assert_eq!(min_first_coordinate(&m, Family::Encoded, 2, 1).unwrap(), BigUint::from(6u32));
        assert!(min_first_coordinate(&m, Family::Harmonic, 2, 1).is_err());
    }

    #[test]
    fn kernel_search_confirms() {
        for delta in 2..=5u64 {
            let m = gen_harmonic(delta).unwrap();
            let found = kernel_search_min_first(&m, 100, 1).unwrap();
            assert_eq!(found.map(|v| BigUint::from(v as u64)), Some(lcm_upto(delta)));
            assert!(!has_kernel_vector_with_zero_first(&m, 5).unwrap());
        }
        let m = gen_encoded(2, 1).unwrap();
        assert_eq!(kernel_search_min_first(&m, 50, 2).unwrap(), Some(6));
        assert!(!has_kernel_vector_with_zero_first(&m, 5).unwrap());
    }

    #[test]
    fn growth() {
        let t = growth_table(&[2, 3], &[1, 2]).unwrap();
        let values: Vec<u64> = t.iter().map(|r| u64::try_from(&r.min_coordinate).unwrap()).collect();
        // lcm(2..3), lcm(2..7), lcm(2..8), lcm(2..26)
        assert_eq!(values[..3], [6, 420, 840]);
        assert_eq!(t[3].min_coordinate, lcm_upto(26));
        assert!(t[0].bits < t[1].bits && t[2].bits < t[3].bits);
        assert!(t[0].bits < t[2].bits && t[1].bits < t[3].bits);
        assert!(growth_table(&[10], &[5]).is_err());
        assert!("cubic".parse::<Family>().is_err());
    }
}
