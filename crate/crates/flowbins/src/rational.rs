//! Exact rational arithmetic helpers.
//!
//! Every time, weight and volume in this crate is a [`Rat`]: an
//! arbitrary-precision fraction kept in canonical form (reduced, positive
//! denominator). All comparisons and event times are therefore exact; no
//! floating point is used anywhere in the scheduling or verification paths.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number in canonical form.
pub type Rat = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumericError {
    #[error("logarithm requires a positive argument, got {0}")]
    NonPositive(String),
    #[error("invalid rational literal `{literal}`: {reason}")]
    BadLiteral { literal: String, reason: String },
}

/// Shorthand for an integer rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Shorthand for the fraction `n/d`.
///
/// Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Exact `2^i`, for any sign of `i`.
pub fn pow2(i: i64) -> Rat {
    if i >= 0 {
        Rat::from_integer(BigInt::one() << i as usize)
    } else {
        Rat::new(BigInt::one(), BigInt::one() << (-i) as usize)
    }
}

/// `⌊log₂ x⌋` for positive `x`, computed by integer comparison only.
///
/// Returns the unique `i` with `2^i ≤ x < 2^(i+1)`.
pub fn floor_log2(x: &Rat) -> Result<i64, NumericError> {
    if !x.is_positive() {
        return Err(NumericError::NonPositive(format_rat(x)));
    }
    let numer = x.numer().magnitude();
    let denom = x.denom().magnitude();
    // bits() = ⌊log₂ n⌋ + 1, so this candidate is off by at most one.
    let candidate = numer.bits() as i64 - denom.bits() as i64;
    if pow2_le(candidate, x) {
        Ok(candidate)
    } else {
        Ok(candidate - 1)
    }
}

/// `⌈log₂ x⌉` for positive `x`: the smallest `i` with `2^i ≥ x`.
pub fn ceil_log2(x: &Rat) -> Result<i64, NumericError> {
    let f = floor_log2(x)?;
    if is_pow2(x) {
        Ok(f)
    } else {
        Ok(f + 1)
    }
}

/// True iff `x = 2^i` for some integer `i`.
pub fn is_pow2(x: &Rat) -> bool {
    if !x.is_positive() {
        return false;
    }
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    // In canonical form one of numerator/denominator is 1 and the other a
    // power of two.
    (n.is_one() || n.count_ones() == 1) && (d.is_one() || d.count_ones() == 1)
}

fn pow2_le(i: i64, x: &Rat) -> bool {
    // 2^i ≤ a/b  ⟺  b·2^i ≤ a (for i ≥ 0), or b ≤ a·2^(−i) (for i < 0).
    let a = x.numer();
    let b = x.denom();
    if i >= 0 {
        &(b << i as usize) <= a
    } else {
        b <= &(a << (-i) as usize)
    }
}

/// Parses a rational literal: an integer (`3`), a decimal (`0.25`, converted
/// exactly) or a fraction of two integers (`3/4`). A single leading `-` is
/// accepted.
pub fn parse_rat(s: &str) -> Result<Rat, NumericError> {
    let bad = |reason: &str| NumericError::BadLiteral {
        literal: s.to_string(),
        reason: reason.to_string(),
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(bad("empty token"));
    }
    if let Some((numer, denom)) = t.split_once('/') {
        let n: BigInt = numer.parse().map_err(|_| bad("bad numerator"))?;
        let d: BigInt = denom.parse().map_err(|_| bad("bad denominator"))?;
        if d.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("bad decimal digits"));
        }
        let (sign, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (Sign::Minus, rest),
            None => (Sign::Plus, int_part),
        };
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("bad integer digits"));
        }
        let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let magnitude: BigInt = format!("{int_digits}{frac_part}")
            .parse()
            .map_err(|_| bad("bad decimal"))?;
        let numer = if sign == Sign::Minus { -magnitude } else { magnitude };
        return Ok(Rat::new(numer, scale));
    }
    let n: BigInt = t.parse().map_err(|_| bad("not an integer, decimal or fraction"))?;
    Ok(Rat::from_integer(n))
}

/// Formats a rational exactly: `num/den`, or just `num` when integral.
pub fn format_rat(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Lossy decimal rendering for human-oriented output columns.
pub fn rat_to_f64(x: &Rat) -> f64 {
    let n = bigint_to_f64(x.numer());
    let d = bigint_to_f64(x.denom());
    n / d
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    n.to_string().parse().unwrap_or(f64::NAN)
}
