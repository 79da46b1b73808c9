//! Exact symbolic sums `Σ q_i · log b_i` with rational coefficients.
//!
//! Bases are kept pairwise coprime (a gcd-free basis). Pairwise coprime
//! integers greater than one are multiplicatively independent, so a form is
//! zero exactly when every coefficient vanishes; equality is tested on the
//! difference.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{int, Rational};
use crate::real::{self, Real};

#[derive(Clone, Debug, Default)]
pub struct LogForm {
    /// Sorted by base; bases > 1, pairwise coprime; coefficients nonzero.
    terms: Vec<(BigUint, Rational)>,
}

impl LogForm {
    pub fn zero() -> Self {
        LogForm { terms: Vec::new() }
    }

    /// `log n` for a positive integer.
    pub fn log_uint(n: &BigUint) -> Self {
        LogForm::zero().with_term(n.clone(), int(1))
    }

    /// `q · log p`.
    pub fn log_prime(p: u64, q: Rational) -> Self {
        LogForm::zero().with_term(BigUint::from(p), q)
    }

    /// `log |x|` for a nonzero rational.
    pub fn log_abs(x: &Rational) -> Self {
        assert!(!x.is_zero(), "log of zero");
        LogForm::zero()
            .with_term(x.numer().magnitude().clone(), int(1))
            .with_term(x.denom().magnitude().clone(), int(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(BigUint, Rational)] {
        &self.terms
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return LogForm::zero();
        }
        LogForm {
            terms: self.terms.iter().map(|(b, c)| (b.clone(), c * q)).collect(),
        }
    }

    /// Adds `q · log base`, refining the basis so bases stay coprime.
    pub fn with_term(mut self, base: BigUint, q: Rational) -> Self {
        let mut pending = vec![(base, q)];
        while let Some((x, q)) = pending.pop() {
            if x.is_one() || q.is_zero() || x.is_zero() {
                continue;
            }
            let hit = self
                .terms
                .iter()
                .enumerate()
                .map(|(i, (b, _))| (i, gcd(b, &x)))
                .find(|(_, g)| !g.is_one());
            match hit {
                None => self.terms.push((x, q)),
                Some((i, g)) => {
                    let (b, qb) = self.terms.swap_remove(i);
                    if b == x {
                        self.terms.push((b, qb + q));
                        continue;
                    }
                    // b = g^k b', x = g^j x'
                    let (b1, k) = strip(b, &g);
                    let (x1, j) = strip(x, &g);
                    pending.push((b1, qb.clone()));
                    pending.push((x1, q.clone()));
                    pending.push((g, qb * int(k as i64) + q * int(j as i64)));
                }
            }
        }
        self.terms.retain(|(_, c)| !c.is_zero());
        self.terms.sort_by(|a, b| a.0.cmp(&b.0));
        self
    }

    /// Extended-precision value.
    pub fn to_real(&self) -> Real {
        let mut acc = real::zero();
        for (b, q) in &self.terms {
            acc += real::from_rational(q) * real::ln_uint(b);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        if self.terms.len() == 1 {
            let (b, q) = &self.terms[0];
            return q.to_f64().unwrap_or(f64::NAN) * ln_big(b);
        }
        real::to_f64(&self.to_real())
    }
}

/// Euclid's first step before the binary gcd, which is slow when one
/// argument is much larger than the other.
fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let (big, small) = if a.bits() >= b.bits() { (a, b) } else { (b, a) };
    if small.is_zero() {
        return big.clone();
    }
    (big % small).gcd(small)
}

/// `(x / g^k, k)` with `k` maximal.
fn strip(mut x: BigUint, g: &BigUint) -> (BigUint, u32) {
    let mut k = 0;
    loop {
        let (q, r) = x.div_rem(g);
        if !r.is_zero() {
            return (x, k);
        }
        x = q;
        k += 1;
    }
}

/// Natural log of a big positive integer in double precision.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

impl PartialEq for LogForm {
    fn eq(&self, other: &LogForm) -> bool {
        self.terms == other.terms || (self.clone() - other.clone()).is_zero()
    }
}

impl Eq for LogForm {}

impl Add for LogForm {
    type Output = LogForm;
    fn add(self, rhs: LogForm) -> LogForm {
        let mut out = self;
        for (b, q) in rhs.terms {
            out = out.with_term(b, q);
        }
        out
    }
}

impl Neg for LogForm {
    type Output = LogForm;
    fn neg(self) -> LogForm {
        LogForm {
            terms: self.terms.into_iter().map(|(b, q)| (b, -q)).collect(),
        }
    }
}

impl Sub for LogForm {
    type Output = LogForm;
    fn sub(self, rhs: LogForm) -> LogForm {
        self + (-rhs)
    }
}

impl fmt::Display for LogForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (b, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            let mag = q.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if mag.is_one() {
                write!(f, "log({b})")?;
            } else {
                write!(f, "{mag}*log({b})")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn refines_to_coprime_basis() {
        let twelve = LogForm::log_uint(&BigUint::from(12u32));
        let split = LogForm::log_prime(2, int(2)) + LogForm::log_prime(3, int(1));
        assert_eq!(twelve.clone() - split, LogForm::zero());
        let mixed = twelve + LogForm::log_uint(&BigUint::from(18u32));
        // 12 * 18 = 2^3 3^3
        assert_eq!(
            mixed,
            LogForm::log_prime(2, int(3)) + LogForm::log_prime(3, int(3))
        );
    }

    #[test]
    fn log_abs_of_fraction() {
        let f = LogForm::log_abs(&rat(-49, 6));
        assert!((f.to_f64() - (49.0f64 / 6.0).ln()).abs() < 1e-14);
        assert_eq!(f.to_string(), "-log(6) + log(49)");
    }

    #[test]
    fn cancellation_is_exact() {
        let a = LogForm::log_abs(&rat(7, 1)).scale(&rat(1, 2));
        let b = LogForm::log_prime(7, rat(1, 2));
        assert!((a - b).is_zero());
    }
}
