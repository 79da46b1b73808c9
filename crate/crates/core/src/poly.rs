//! Polynomials in Q[t], rational functions in Q(t), and the closed points of
//! the projective t-line over Q.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{int, Rational};
use crate::error::{Error, Result};

/// Polynomial over Q, coefficients lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PolyQt {
    coeffs: Vec<Rational>,
}

impl PolyQt {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyQt { coeffs }
    }

    pub fn from_ints(cs: &[i64]) -> Self {
        PolyQt::new(cs.iter().map(|&c| int(c)).collect())
    }

    pub fn zero() -> Self {
        PolyQt { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        PolyQt::constant(int(1))
    }

    pub fn constant(c: Rational) -> Self {
        PolyQt::new(vec![c])
    }

    /// The variable `t`.
    pub fn t() -> Self {
        PolyQt::from_ints(&[0, 1])
    }

    /// `t - a`.
    pub fn linear(a: &Rational) -> Self {
        PolyQt::new(vec![-a.clone(), int(1)])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_monic(&self) -> bool {
        self.lead().is_one()
    }

    pub fn scale(&self, c: &Rational) -> PolyQt {
        if c.is_zero() {
            return PolyQt::zero();
        }
        PolyQt::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn monic(&self) -> PolyQt {
        if self.is_zero() {
            return PolyQt::zero();
        }
        self.scale(&self.lead().recip())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> PolyQt {
        PolyQt::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    pub fn pow(&self, e: u32) -> PolyQt {
        let mut result = PolyQt::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, rhs: &PolyQt) -> (PolyQt, PolyQt) {
        let dd = rhs.degree().expect("division by zero polynomial");
        let mut rem = self.coeffs.clone();
        if rem.len() < rhs.coeffs.len() {
            return (PolyQt::zero(), self.clone());
        }
        let inv = rhs.lead().recip();
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] * &inv;
            if !c.is_zero() {
                for (j, r) in rhs.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * r;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (PolyQt::new(quot), PolyQt::new(rem))
    }

    pub fn rem(&self, rhs: &PolyQt) -> PolyQt {
        self.div_rem(rhs).1
    }

    /// Quotient when `rhs` divides `self` exactly.
    pub fn div_exact(&self, rhs: &PolyQt) -> Option<PolyQt> {
        let (q, r) = self.div_rem(rhs);
        r.is_zero().then_some(q)
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, rhs: &PolyQt) -> PolyQt {
        let mut a = self.primitive_int();
        let mut b = rhs.primitive_int();
        while !b.is_zero() {
            let r = a.rem(&b).primitive_int();
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Scalar multiple with coprime integer coefficients and positive leading
    /// coefficient.
    pub fn primitive_int(&self) -> PolyQt {
        if self.is_zero() {
            return PolyQt::zero();
        }
        let mut l = BigInt::one();
        for c in &self.coeffs {
            l = l.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if self.lead().is_negative() {
            g = -g;
        }
        PolyQt::new(
            ints.into_iter()
                .map(|c| Rational::from_integer(c / &g))
                .collect(),
        )
    }

    /// `p(t + a)`.
    pub fn taylor_shift(&self, a: &Rational) -> PolyQt {
        let mut out = PolyQt::zero();
        let lin = PolyQt::new(vec![a.clone(), int(1)]);
        for c in self.coeffs.iter().rev() {
            out = &(&out * &lin) + &PolyQt::constant(c.clone());
        }
        out
    }

    /// Multiplicity of `q` (non-constant) as a factor.
    pub fn multiplicity(&self, q: &PolyQt) -> u32 {
        let mut m = 0;
        let mut cur = self.clone();
        while !cur.is_zero() {
            match cur.div_exact(q) {
                Some(next) => {
                    cur = next;
                    m += 1;
                }
                None => break,
            }
        }
        m
    }

    /// Render with the given variable name.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if i == 0 {
                s.push_str(&mag.to_string());
            } else if mag.is_one() {
                s.push_str(&mono);
            } else {
                s.push_str(&format!("{mag}*{mono}"));
            }
        }
        s
    }
}

impl fmt::Display for PolyQt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("t"))
    }
}

impl<'a> Add<&'a PolyQt> for &'a PolyQt {
    type Output = PolyQt;
    fn add(self, rhs: &PolyQt) -> PolyQt {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQt::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<'a> Sub<&'a PolyQt> for &'a PolyQt {
    type Output = PolyQt;
    fn sub(self, rhs: &PolyQt) -> PolyQt {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQt::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<'a> Mul<&'a PolyQt> for &'a PolyQt {
    type Output = PolyQt;
    fn mul(self, rhs: &PolyQt) -> PolyQt {
        if self.is_zero() || rhs.is_zero() {
            return PolyQt::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyQt::new(out)
    }
}

impl Neg for &PolyQt {
    type Output = PolyQt;
    fn neg(self) -> PolyQt {
        PolyQt::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// A closed point of the t-line: a monic irreducible polynomial or infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClosedPoint {
    Finite(PolyQt),
    Infinity,
}

impl ClosedPoint {
    /// The rational point `t = a`.
    pub fn rational(a: &Rational) -> ClosedPoint {
        ClosedPoint::Finite(PolyQt::linear(a))
    }

    pub fn degree(&self) -> usize {
        match self {
            ClosedPoint::Finite(q) => q.deg(),
            ClosedPoint::Infinity => 1,
        }
    }

    /// The rational coordinate of a degree-one finite point.
    pub fn rational_coordinate(&self) -> Option<Rational> {
        match self {
            ClosedPoint::Finite(q) if q.deg() == 1 => Some(-q.coeff(0) / q.coeff(1)),
            _ => None,
        }
    }
}

impl Ord for ClosedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ClosedPoint::Infinity, ClosedPoint::Infinity) => Ordering::Equal,
            (ClosedPoint::Infinity, _) => Ordering::Greater,
            (_, ClosedPoint::Infinity) => Ordering::Less,
            (ClosedPoint::Finite(a), ClosedPoint::Finite(b)) => a
                .deg()
                .cmp(&b.deg())
                .then_with(|| a.coeffs().iter().rev().cmp(b.coeffs().iter().rev())),
        }
    }
}

impl PartialOrd for ClosedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ClosedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedPoint::Finite(q) => write!(f, "{q}"),
            ClosedPoint::Infinity => f.write_str("inf"),
        }
    }
}

/// Element of Q(t): reduced fraction with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: PolyQt,
    den: PolyQt,
}

impl RatFunc {
    pub fn new(num: PolyQt, den: PolyQt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc::zero());
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        let l = d.lead();
        if !l.is_one() {
            let inv = l.recip();
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        Ok(RatFunc { num: n, den: d })
    }

    /// Builds `num/den` for coprime inputs without recomputing a gcd.
    pub(crate) fn from_coprime(num: PolyQt, den: PolyQt) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RatFunc::zero();
        }
        let l = den.lead();
        if l.is_one() {
            return RatFunc { num, den };
        }
        let inv = l.recip();
        RatFunc {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn from_poly(p: PolyQt) -> Self {
        RatFunc {
            num: p,
            den: PolyQt::one(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        RatFunc::from_poly(PolyQt::constant(c))
    }

    pub fn zero() -> Self {
        RatFunc::from_poly(PolyQt::zero())
    }

    pub fn one() -> Self {
        RatFunc::constant(int(1))
    }

    pub fn t() -> Self {
        RatFunc::from_poly(PolyQt::t())
    }

    pub fn num(&self) -> &PolyQt {
        &self.num
    }

    pub fn den(&self) -> &PolyQt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// Value when constant.
    pub fn constant_value(&self) -> Option<Rational> {
        self.is_constant().then(|| self.num.coeff(0))
    }

    pub fn recip(&self) -> Result<RatFunc> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        RatFunc {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    pub fn div(&self, rhs: &RatFunc) -> Result<RatFunc> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    /// Size measure used by orbit budgets: number of stored coefficients.
    pub fn size(&self) -> usize {
        self.num.coeffs().len() + self.den.coeffs().len()
    }

    pub fn eval(&self, t0: &Rational) -> Result<Rational> {
        eval_ratfunc(self, t0)
    }

    pub fn render(&self, var: &str) -> String {
        let n = self.num.render(var);
        if self.den.is_one_poly() {
            return n;
        }
        let wrap = |s: String, p: &PolyQt| {
            let terms = p.coeffs().iter().filter(|c| !c.is_zero()).count();
            if terms > 1 || (!p.lead().is_one() && p.deg() > 0) {
                format!("({s})")
            } else {
                s
            }
        };
        let num_s = wrap(n, &self.num);
        let den_s = wrap(self.den.render(var), &self.den);
        format!("{num_s}/{den_s}")
    }
}

impl PolyQt {
    fn is_one_poly(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("t"))
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den.clone()).unwrap();
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFunc::new(num, &self.den * &rhs.den).unwrap()
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        // cross-cancel before multiplying to keep the gcd small
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = rhs.den.div_exact(&g1).unwrap();
        let n2 = rhs.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let l = den.lead().recip();
        RatFunc {
            num: num.scale(&l),
            den: den.scale(&l),
        }
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

/// Order of vanishing of a nonzero rational function at a closed point.
pub fn ord_at(r: &RatFunc, c: &ClosedPoint) -> Result<i64> {
    if r.is_zero() {
        return Err(Error::InvalidArgument("ord of the zero function".into()));
    }
    Ok(match c {
        ClosedPoint::Finite(q) => r.num.multiplicity(q) as i64 - r.den.multiplicity(q) as i64,
        ClosedPoint::Infinity => r.den.deg() as i64 - r.num.deg() as i64,
    })
}

/// Specialize `t -> t0`.
pub fn eval_ratfunc(r: &RatFunc, t0: &Rational) -> Result<Rational> {
    let d = r.den.eval(t0);
    if d.is_zero() {
        return Err(Error::PoleAtParameter {
            point: ClosedPoint::rational(t0).to_string(),
            t: t0.to_string(),
        });
    }
    Ok(r.num.eval(t0) / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn seven_t_plus_inv() -> RatFunc {
        RatFunc::new(PolyQt::from_ints(&[1, 0, 7]), PolyQt::t()).unwrap()
    }

    fn t3_over() -> RatFunc {
        RatFunc::new(
            PolyQt::from_ints(&[0, 0, 0, 1]),
            PolyQt::from_ints(&[1, 0, 1]),
        )
        .unwrap()
    }

    #[test]
    fn ord_examples() {
        let r = seven_t_plus_inv();
        assert_eq!(ord_at(&r, &ClosedPoint::Finite(PolyQt::t())).unwrap(), -1);
        assert_eq!(ord_at(&r, &ClosedPoint::Infinity).unwrap(), -1);
        let s = t3_over();
        let q = ClosedPoint::Finite(PolyQt::from_ints(&[1, 0, 1]));
        assert_eq!(ord_at(&s, &q).unwrap(), -1);
        assert!(ord_at(&RatFunc::zero(), &q).is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            eval_ratfunc(&seven_t_plus_inv(), &int(7)).unwrap(),
            rat(344, 7)
        );
        assert_eq!(eval_ratfunc(&t3_over(), &int(1)).unwrap(), rat(1, 2));
        let inv_t = RatFunc::new(PolyQt::one(), PolyQt::t()).unwrap();
        match eval_ratfunc(&inv_t, &int(0)) {
            Err(Error::PoleAtParameter { point, .. }) => assert_eq!(point, "t"),
            other => panic!("expected pole error, got {other:?}"),
        }
    }

    #[test]
    fn ratfunc_is_reduced_with_monic_denominator() {
        let r = RatFunc::new(PolyQt::from_ints(&[-2, 0, 2]), PolyQt::from_ints(&[2, 2])).unwrap();
        // (2t^2 - 2)/(2t + 2) = t - 1
        assert_eq!(r, RatFunc::from_poly(PolyQt::from_ints(&[-1, 1])));
        let s = RatFunc::new(PolyQt::one(), PolyQt::from_ints(&[0, 3])).unwrap();
        assert!(s.den().is_monic());
        assert_eq!(s.num(), &PolyQt::constant(rat(1, 3)));
    }

    #[test]
    fn division_and_gcd() {
        let a = PolyQt::from_ints(&[-1, 0, 1]);
        let b = PolyQt::from_ints(&[1, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, PolyQt::from_ints(&[-1, 1]));
        assert!(r.is_zero());
        let g = PolyQt::from_ints(&[0, 2, 2]).gcd(&PolyQt::from_ints(&[3, 3]));
        assert_eq!(g, PolyQt::from_ints(&[1, 1]));
    }

    #[test]
    fn taylor_shift_and_render() {
        let p = PolyQt::from_ints(&[1, 0, 1]);
        assert_eq!(p.taylor_shift(&int(1)), PolyQt::from_ints(&[2, 2, 1]));
        assert_eq!(
            PolyQt::from_ints(&[1, -3, 0, 2]).render("t"),
            "2*t^3 - 3*t + 1"
        );
        assert_eq!(seven_t_plus_inv().to_string(), "(7*t^2 + 1)/t");
    }
}
