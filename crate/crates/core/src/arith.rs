//! Exact rational scalars, places of Q, p-adic valuations and naive heights.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logform::LogForm;

pub type Rational = num_rational::BigRational;

/// Largest trial divisor used by [`factor_integer`].
pub const DEFAULT_TRIAL_CAP: u64 = 10_000_000;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// A place of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlaceQ {
    Archimedean,
    Finite(u64),
}

impl PlaceQ {
    /// The p-adic place; fails unless `p` is prime.
    pub fn finite(p: u64) -> Result<PlaceQ> {
        if is_prime(p) {
            Ok(PlaceQ::Finite(p))
        } else {
            Err(Error::NotPrime(p.to_string()))
        }
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, PlaceQ::Archimedean)
    }
}

impl fmt::Display for PlaceQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceQ::Archimedean => f.write_str("inf"),
            PlaceQ::Finite(p) => write!(f, "{p}"),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut k = 5u64;
    while k.saturating_mul(k) <= n {
        if n.is_multiple_of(k) || n.is_multiple_of(k + 2) {
            return false;
        }
        k += 6;
    }
    true
}

/// Multiplicity of `p` in a nonzero integer.
pub fn int_val(n: &BigInt, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let p = BigUint::from(p);
    let mut m = n.magnitude().clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `v_p(x)`, the multiplicity of `p` in the numerator minus that in the denominator.
pub fn padic_val(x: &Rational, p: u64) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::ValuationOfZero);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    Ok(int_val(x.numer(), p) as i64 - int_val(x.denom(), p) as i64)
}

/// `max(0, log|x|_v)` as an exact log form.
pub fn local_naive_height(x: &Rational, v: PlaceQ) -> LogForm {
    if x.is_zero() {
        return LogForm::zero();
    }
    match v {
        PlaceQ::Archimedean => {
            if x.numer().magnitude() > x.denom().magnitude() {
                LogForm::log_abs(x)
            } else {
                LogForm::zero()
            }
        }
        PlaceQ::Finite(p) => {
            let val = int_val(x.numer(), p) as i64 - int_val(x.denom(), p) as i64;
            if val < 0 {
                LogForm::log_prime(p, int(-val))
            } else {
                LogForm::zero()
            }
        }
    }
}

/// `h(x) = log max(|num|, den)`.
pub fn weil_height(x: &Rational) -> LogForm {
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    LogForm::log_uint(if n > d { n } else { d })
}

/// Trial-division factorization of a positive integer.
///
/// Trial divisors stop at `cap`; a leftover cofactor is accepted as prime only
/// when it is below `cap^2`.
pub fn factor_integer(n: &BigUint, cap: u64) -> Result<Vec<(BigUint, u32)>> {
    if n.is_zero() {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    if let Some(small) = n.to_u64() {
        return factor_u64(small, cap);
    }
    let mut out = Vec::new();
    let mut m = n.clone();
    let mut push = |m: &mut BigUint, p: u64| {
        let bp = BigUint::from(p);
        let mut e = 0;
        loop {
            let (q, r) = m.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            *m = q;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
    };
    push(&mut m, 2);
    push(&mut m, 3);
    let mut k = 5u64;
    while k <= cap {
        if let Some(small) = m.to_u64() {
            let rest = factor_u64(small, cap)?;
            for (p, e) in rest {
                out.push((p, e));
            }
            return Ok(out);
        }
        push(&mut m, k);
        push(&mut m, k + 2);
        k += 6;
    }
    finish_cofactor(m, cap, out)
}

fn factor_u64(mut n: u64, cap: u64) -> Result<Vec<(BigUint, u32)>> {
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    let mut take = |n: &mut u64, p: u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((BigUint::from(p), e));
        }
    };
    take(&mut n, 2);
    take(&mut n, 3);
    let mut k = 5u64;
    while k <= cap && k.saturating_mul(k) <= n {
        take(&mut n, k);
        take(&mut n, k + 2);
        k += 6;
    }
    if n > 1 {
        return finish_cofactor(BigUint::from(n), cap, out);
    }
    Ok(out)
}

fn finish_cofactor(
    m: BigUint,
    cap: u64,
    mut out: Vec<(BigUint, u32)>,
) -> Result<Vec<(BigUint, u32)>> {
    if m.is_one() {
        return Ok(out);
    }
    let bound = BigUint::from(cap) * BigUint::from(cap);
    if m < bound {
        out.push((m, 1));
        out.sort();
        Ok(out)
    } else {
        Err(Error::FactorizationRange(m.to_string()))
    }
}

/// Primes dividing the numerator or denominator of a nonzero rational.
pub fn prime_support(x: &Rational, cap: u64) -> Result<Vec<u64>> {
    let mut ps = Vec::new();
    for part in [x.numer().magnitude(), x.denom().magnitude()] {
        if part.is_zero() {
            continue;
        }
        for (p, _) in factor_integer(part, cap)? {
            let p = p
                .to_u64()
                .ok_or_else(|| Error::FactorizationRange(p.to_string()))?;
            ps.push(p);
        }
    }
    ps.sort_unstable();
    ps.dedup();
    Ok(ps)
}

/// Exact `x^e` for a possibly negative exponent.
pub fn rat_pow(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// Number of bits needed to write `x` as a fraction.
pub fn rat_bits(x: &Rational) -> u64 {
    x.numer().bits() + x.denom().bits()
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}
