//! Arbitrary-precision evaluation of the explicit norm bounds.
//!
//! Several of the bounds are doubly exponential, so every power is checked
//! against a bit budget before it is materialised.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default cap on the size of a materialised bound, in bits.
pub const DEFAULT_MAX_BITS: u64 = 1 << 20;

/// `base^exp`, refusing when the result would need more than `max_bits` bits.
pub fn checked_pow(base: &BigUint, exp: &BigUint, max_bits: u64) -> Result<BigUint> {
    if exp.is_zero() || base.is_one() {
        return Ok(BigUint::one());
    }
    if base.is_zero() {
        return Ok(BigUint::zero());
    }
    let log2 = log2(base) * exp.to_f64().unwrap_or(f64::INFINITY);
    if log2 > max_bits as f64 {
        return Err(Error::BoundTooLarge { log2_estimate: log2, max_bits });
    }
    let e = exp.to_u32().ok_or(Error::BoundTooLarge { log2_estimate: log2, max_bits })?;
    Ok(base.pow(e))
}

pub(crate) fn log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map_or(0.0, |v| (v as f64).log2());
    }
    let shift = bits - 53;
    let top = (x >> shift).to_u64().unwrap_or(0) as f64;
    top.log2() + shift as f64
}

pub(crate) fn big(x: u64) -> BigUint {
    BigUint::from(x)
}
