//! Extended-precision reals for the places where f64 is not enough: the
//! archimedean escape tail and the evaluation of symbolic log forms, whose
//! differences can sit 15+ orders of magnitude below the terms themselves.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use num_bigint::{BigInt, BigUint, Sign};

use crate::arith::Rational;

/// Binary big float used for all extended-precision work.
pub type Real = FBig<HalfEven, 2>;

/// Working precision in bits.
pub const PRECISION: usize = 256;

pub fn ubig(n: &BigUint) -> UBig {
    UBig::from_le_bytes(&n.to_bytes_le())
}

pub fn ibig(n: &BigInt) -> IBig {
    let mag = ubig(n.magnitude());
    match n.sign() {
        Sign::Minus => -IBig::from(mag),
        _ => IBig::from(mag),
    }
}

pub fn from_int(n: &BigInt) -> Real {
    Real::from(ibig(n)).with_precision(PRECISION).value()
}

pub fn from_uint(n: &BigUint) -> Real {
    Real::from(IBig::from(ubig(n)))
        .with_precision(PRECISION)
        .value()
}

pub fn from_rational(x: &Rational) -> Real {
    from_int(x.numer()) / from_int(x.denom())
}

pub fn from_f64(x: f64) -> Real {
    Real::try_from(x)
        .expect("finite float")
        .with_precision(PRECISION)
        .value()
}

pub fn zero() -> Real {
    Real::ZERO.with_precision(PRECISION).value()
}

pub fn one() -> Real {
    Real::ONE.with_precision(PRECISION).value()
}

/// Natural log of a positive integer.
pub fn ln_uint(n: &BigUint) -> Real {
    from_uint(n).ln()
}

pub fn to_f64(x: &Real) -> f64 {
    x.to_f64().value()
}

pub fn abs(x: &Real) -> Real {
    if x < &Real::ZERO {
        -x.clone()
    } else {
        x.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn ln_of_small_integer_matches_f64() {
        let v = to_f64(&ln_uint(&BigUint::from(7u32)));
        assert!((v - 7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rational_conversion_keeps_precision() {
        let third = Rational::new(BigInt::one(), BigInt::from(3));
        let x = from_rational(&third) * from_int(&BigInt::from(3));
        let err = to_f64(&abs(&(x - one())));
        assert!(err < 1e-70);
    }

    #[test]
    fn ln_1p_resolves_tiny_arguments() {
        let tiny = from_rational(&Rational::new(BigInt::one(), BigInt::from(10).pow(30)));
        let v = to_f64(&tiny.ln_1p());
        assert!((v - 1e-30).abs() < 1e-45);
    }
}
