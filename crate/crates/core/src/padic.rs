//! p-adic numbers with capped absolute precision.
//!
//! Used to follow valuations along orbits at bad primes without carrying the
//! full rational iterates, whose size doubles at every step.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{int_val, Rational};

/// `p^val · unit + O(p^prec)`, with `unit` a p-adic unit reduced modulo
/// `p^(prec - val)`. Zero (to the known precision) has `unit = 0` and
/// `val = prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Padic {
    p: u64,
    val: i64,
    unit: BigInt,
    prec: i64,
}

fn ppow(p: u64, e: i64) -> BigInt {
    num_traits::pow(BigInt::from(p), e.max(0) as usize)
}

impl Padic {
    pub fn zero(p: u64, prec: i64) -> Self {
        Padic {
            p,
            val: prec,
            unit: BigInt::zero(),
            prec,
        }
    }

    /// Image of a rational, known modulo `p^prec`.
    pub fn from_rational(x: &Rational, p: u64, prec: i64) -> Self {
        if x.is_zero() {
            return Padic::zero(p, prec);
        }
        let vn = int_val(x.numer(), p) as i64;
        let vd = int_val(x.denom(), p) as i64;
        let val = vn - vd;
        if val >= prec {
            return Padic::zero(p, prec);
        }
        let m = ppow(p, prec - val);
        let n = x.numer() / ppow(p, vn);
        let d = x.denom() / ppow(p, vd);
        let dinv = d.extended_gcd(&m).x.mod_floor(&m);
        Padic {
            p,
            val,
            unit: (n * dinv).mod_floor(&m),
            prec,
        }
    }

    fn normalize(p: u64, mut val: i64, mut raw: BigInt, prec: i64) -> Self {
        if val >= prec {
            return Padic::zero(p, prec);
        }
        raw = raw.mod_floor(&ppow(p, prec - val));
        if raw.is_zero() {
            return Padic::zero(p, prec);
        }
        let bp = BigInt::from(p);
        loop {
            let (q, r) = raw.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            raw = q;
            val += 1;
        }
        if val >= prec {
            return Padic::zero(p, prec);
        }
        Padic {
            p,
            val,
            unit: raw,
            prec,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    /// Valuation, or a lower bound for it when the value is zero to precision.
    pub fn val(&self) -> i64 {
        self.val
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn add(&self, rhs: &Padic) -> Padic {
        let prec = self.prec.min(rhs.prec);
        let val = self.val.min(rhs.val).min(prec);
        let mut raw = BigInt::zero();
        for x in [self, rhs] {
            if !x.is_zero() && x.val < prec {
                raw += &x.unit * ppow(self.p, x.val - val);
            }
        }
        Padic::normalize(self.p, val, raw, prec)
    }

    pub fn mul(&self, rhs: &Padic) -> Padic {
        let prec = (self.val + rhs.prec).min(rhs.val + self.prec);
        if self.is_zero() || rhs.is_zero() {
            return Padic::zero(self.p, prec);
        }
        Padic::normalize(self.p, self.val + rhs.val, &self.unit * &rhs.unit, prec)
    }

    /// Exact value of the known digits, as a rational.
    pub fn to_rational(&self) -> Rational {
        if self.is_zero() {
            return Rational::zero();
        }
        let pv = Rational::from_integer(ppow(self.p, self.val.abs()));
        let scale = if self.val >= 0 { pv } else { pv.recip() };
        Rational::from_integer(self.unit.clone()) * scale
    }

    pub fn one(p: u64, prec: i64) -> Padic {
        Padic::normalize(p, 0, BigInt::one(), prec)
    }
}
