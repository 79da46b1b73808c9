//! Truncated Laurent series over Q with tracked precision.
//!
//! A series is `Σ coeffs[i] · w^(val + i) + O(w^prec)`. Every operation
//! computes the precision of its result exactly from the precisions and
//! valuations of its operands, so a coefficient is either known exactly or
//! not stored at all.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::arith::{int, rat_pow, Rational};
use crate::error::{Error, Result};
use crate::poly::{ClosedPoint, PolyQt, RatFunc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    val: i64,
    coeffs: Vec<Rational>,
    prec: i64,
}

impl LaurentSeries {
    /// Builds a series, stripping leading zeros. An all-zero window gives the
    /// zero series `O(w^prec)`.
    pub fn new(val: i64, coeffs: Vec<Rational>, prec: i64) -> Self {
        let mut coeffs = coeffs;
        coeffs.truncate((prec - val).max(0) as usize);
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => LaurentSeries::zero(prec),
            Some(k) => {
                coeffs.drain(..k);
                LaurentSeries {
                    val: val + k as i64,
                    coeffs,
                    prec,
                }
            }
        }
    }

    /// `O(w^prec)`.
    pub fn zero(prec: i64) -> Self {
        LaurentSeries {
            val: prec,
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn one(prec: i64) -> Self {
        LaurentSeries::monomial(int(1), 0, prec)
    }

    pub fn monomial(c: Rational, e: i64, prec: i64) -> Self {
        LaurentSeries::new(e, vec![c], prec)
    }

    /// Exact polynomial in `w`, truncated at `prec`.
    pub fn from_poly(p: &PolyQt, prec: i64) -> Self {
        LaurentSeries::new(0, p.coeffs().to_vec(), prec)
    }

    pub fn val(&self) -> i64 {
        self.val
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Number of known coefficients past the leading one, inclusive.
    pub fn relative_prec(&self) -> i64 {
        self.prec - self.val
    }

    /// True when no nonzero coefficient is known (the zero flag).
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn lead(&self) -> Rational {
        self.coeffs.first().cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of `w^k`; `None` beyond the precision.
    pub fn coeff(&self, k: i64) -> Option<Rational> {
        if k >= self.prec {
            return None;
        }
        if k < self.val {
            return Some(Rational::zero());
        }
        Some(
            self.coeffs
                .get((k - self.val) as usize)
                .cloned()
                .unwrap_or_else(Rational::zero),
        )
    }

    /// Coefficients of `w^from .. w^(to-1)`.
    pub fn coeff_range(&self, from: i64, to: i64) -> Vec<Rational> {
        (from..to)
            .map(|k| self.coeff(k).unwrap_or_else(Rational::zero))
            .collect()
    }

    pub fn truncate(&self, prec: i64) -> Self {
        LaurentSeries::new(self.val, self.coeffs.clone(), prec.min(self.prec))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return LaurentSeries::zero(self.prec);
        }
        LaurentSeries {
            val: self.val,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            prec: self.prec,
        }
    }

    /// Multiply by `w^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            val: self.val + k,
            coeffs: self.coeffs.clone(),
            prec: self.prec + k,
        }
    }

    pub fn series_add(&self, rhs: &LaurentSeries) -> Self {
        let prec = self.prec.min(rhs.prec);
        let val = self.val.min(rhs.val).min(prec);
        let n = (prec - val).max(0) as usize;
        let mut out = vec![Rational::zero(); n];
        for s in [self, rhs] {
            for (i, c) in s.coeffs.iter().enumerate() {
                let k = (s.val + i as i64 - val) as usize;
                if k < n {
                    out[k] += c;
                }
            }
        }
        LaurentSeries::new(val, out, prec)
    }

    pub fn series_mul(&self, rhs: &LaurentSeries) -> Self {
        let prec = (self.val + rhs.prec).min(rhs.val + self.prec);
        if self.is_zero() || rhs.is_zero() {
            return LaurentSeries::zero(prec);
        }
        let val = self.val + rhs.val;
        let n = (prec - val).max(0) as usize;
        let mut out = vec![Rational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        LaurentSeries::new(val, out, prec)
    }

    /// Multiplicative inverse; the relative precision is preserved.
    pub fn series_invert(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::PrecisionExhausted(format!(
                "cannot invert O(w^{})",
                self.prec
            )));
        }
        let n = self.relative_prec() as usize;
        let inv0 = self.coeffs[0].recip();
        let mut out: Vec<Rational> = Vec::with_capacity(n);
        out.push(inv0.clone());
        for k in 1..n {
            let mut acc = Rational::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                acc += &self.coeffs[j] * &out[k - j];
            }
            out.push(-acc * &inv0);
        }
        Ok(LaurentSeries::new(
            -self.val,
            out,
            -self.val + self.relative_prec(),
        ))
    }

    pub fn series_div(&self, rhs: &LaurentSeries) -> Result<Self> {
        Ok(self.series_mul(&rhs.series_invert()?))
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut result = LaurentSeries::one(self.relative_prec().max(1));
        if e == 0 {
            return result;
        }
        let mut base = self.clone();
        let mut e = e;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first {
                    first = false;
                    base.clone()
                } else {
                    result.series_mul(&base)
                };
            }
            e >>= 1;
            if e > 0 {
                base = base.series_mul(&base);
            }
        }
        result
    }

    pub fn powi(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.series_invert()?.pow(e.unsigned_abs()))
        }
    }

    /// The `n`-th root whose leading coefficient is `branch`.
    ///
    /// The unit part is lifted by Newton's iteration
    /// `X <- X - (X^n - u) / (n X^(n-1))` starting from `X = 1`; each step
    /// doubles the number of correct coefficients.
    pub fn nth_root(&self, n: u64, branch: &Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("0-th root".into()));
        }
        if self.is_zero() {
            return Err(Error::PrecisionExhausted(
                "root of a series indistinguishable from 0".into(),
            ));
        }
        if self.val.rem_euclid(n as i64) != 0 {
            return Err(Error::InvalidArgument(format!(
                "valuation {} not divisible by {n}",
                self.val
            )));
        }
        let lead = self.lead();
        if num_traits::pow(branch.clone(), n as usize) != lead {
            return Err(Error::NoRationalBranch(format!(
                "{branch}^{n} != leading coefficient {lead}"
            )));
        }
        let rel = self.relative_prec();
        // u = s / (lead w^val), a 1-unit known to O(w^rel)
        let unit = LaurentSeries::new(0, self.coeffs.iter().map(|c| c / &lead).collect(), rel);
        let mut x = LaurentSeries::one(rel);
        let nr = int(n as i64);
        let mut correct = 1i64;
        loop {
            let xn1 = x.pow(n - 1);
            let xn = xn1.series_mul(&x);
            let resid = xn.series_sub(&unit);
            if resid.is_zero() {
                break;
            }
            let step = resid.series_div(&xn1.scale(&nr))?;
            x = x.series_sub(&step).truncate(rel);
            correct *= 2;
            if correct > 4 * rel + 8 {
                return Err(Error::Internal(
                    "Newton root lift failed to converge".into(),
                ));
            }
        }
        Ok(x.scale(branch).shift(self.val / n as i64))
    }

    pub fn series_sub(&self, rhs: &LaurentSeries) -> Self {
        self.series_add(&rhs.series_neg())
    }

    pub fn series_neg(&self) -> Self {
        LaurentSeries {
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }

    /// Sum of the known terms at `w = w0`.
    pub fn eval(&self, w0: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * w0 + c;
        }
        acc * rat_pow(w0, self.val)
    }
}

/// `log s` for a 1-unit `s = 1 + O(w)`.
pub fn log_unit_series(s: &LaurentSeries) -> Result<LaurentSeries> {
    if s.is_zero() || s.val() != 0 || !s.lead().is_one() {
        return Err(Error::InvalidArgument(
            "logarithm needs a series of the form 1 + O(w)".into(),
        ));
    }
    let prec = s.prec();
    let x = s.series_sub(&LaurentSeries::one(prec));
    let mut acc = LaurentSeries::zero(prec);
    if x.is_zero() {
        return Ok(acc);
    }
    let mut power = x.clone();
    let mut k = 1i64;
    while power.val() < prec && !power.is_zero() {
        let term = power.scale(&Rational::new(
            if k % 2 == 1 { 1.into() } else { (-1).into() },
            k.into(),
        ));
        acc = acc.series_add(&term);
        power = power.series_mul(&x);
        k += 1;
    }
    Ok(acc)
}

/// `exp x` for a series with positive valuation.
pub fn exp_series(x: &LaurentSeries) -> Result<LaurentSeries> {
    if !x.is_zero() && x.val() < 1 {
        return Err(Error::InvalidArgument(
            "exponential needs a series with positive valuation".into(),
        ));
    }
    let prec = x.prec();
    let mut acc = LaurentSeries::one(prec);
    let mut term = LaurentSeries::one(prec);
    let mut k = 1i64;
    while !x.is_zero() {
        term = term.series_mul(x).scale(&Rational::new(1.into(), k.into()));
        if term.is_zero() || term.val() >= prec {
            break;
        }
        acc = acc.series_add(&term);
        k += 1;
    }
    Ok(acc)
}

/// Laurent expansion of `r` at a rational point (`w = t - a`) or at infinity
/// (`w = 1/t`), exact modulo `w^prec`.
pub fn expand_at(r: &RatFunc, c: &ClosedPoint, prec: i64) -> Result<LaurentSeries> {
    if r.is_zero() {
        return Err(Error::InvalidArgument(
            "expansion of the zero function".into(),
        ));
    }
    let (num, den, shift) = match c {
        ClosedPoint::Infinity => {
            // p(1/w) = w^(-deg p) * reversed(p)(w)
            let rev =
                |p: &PolyQt| PolyQt::new(p.coeffs().iter().rev().cloned().collect::<Vec<_>>());
            let shift = r.den().deg() as i64 - r.num().deg() as i64;
            (rev(r.num()), rev(r.den()), shift)
        }
        ClosedPoint::Finite(q) => {
            let a = c
                .rational_coordinate()
                .ok_or_else(|| Error::ExtensionFieldRequired(q.to_string()))?;
            (r.num().taylor_shift(&a), r.den().taylor_shift(&a), 0)
        }
    };
    let vn = num.coeffs().iter().position(|x| !x.is_zero()).unwrap() as i64;
    let vd = den.coeffs().iter().position(|x| !x.is_zero()).unwrap() as i64;
    let val = vn - vd + shift;
    let rel = (prec - val).max(0);
    let ns = LaurentSeries::new(0, num.coeffs().to_vec(), vn + rel);
    let ds = LaurentSeries::new(0, den.coeffs().to_vec(), vd + rel);
    if rel == 0 {
        return Ok(LaurentSeries::zero(prec));
    }
    Ok(ns.series_div(&ds)?.shift(shift).truncate(prec))
}

impl<'a> Add<&'a LaurentSeries> for &'a LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.series_add(rhs)
    }
}

impl<'a> Sub<&'a LaurentSeries> for &'a LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.series_sub(rhs)
    }
}

impl<'a> Mul<&'a LaurentSeries> for &'a LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.series_mul(rhs)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.series_neg()
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.val + i as i64;
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono = match e {
                0 => String::new(),
                1 => "w".to_string(),
                _ => format!("w^{e}"),
            };
            if e == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        if first {
            write!(f, "O(w^{})", self.prec)
        } else {
            write!(f, " + O(w^{})", self.prec)
        }
    }
}
