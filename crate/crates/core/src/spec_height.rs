//! Canonical heights of specialized systems `f_{t0}` over Q.
//!
//! At the archimedean place the orbit is followed exactly until it enters the
//! escape region; the height is then an exact log form plus a rapidly
//! converging tail evaluated in extended precision. At finite places the
//! orbit is followed in capped-precision p-adic arithmetic.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{
    factor_integer, int, padic_val, prime_support, rat_bits, PlaceQ, Rational, DEFAULT_TRIAL_CAP,
};
use crate::error::{Error, Result};
use crate::ffheight::DynPair;
use crate::logform::LogForm;
use crate::padic::Padic;
use crate::poly::eval_ratfunc;
use crate::real::{self, Real};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_ARCH_CAP: usize = 5000;
pub const DEFAULT_PADIC_CAP: usize = 200;

/// Bits allowed in an exact archimedean iterate before switching to
/// extended-precision floating point.
pub const EXACT_BIT_BUDGET: u64 = 8192;

/// The tail is summed until its remainder bound drops below this as well as
/// below the requested tolerance.
const TAIL_FLOOR: f64 = 1e-70;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecializedSystem {
    pub d: usize,
    pub coeffs: Vec<Rational>,
    pub point: Rational,
}

#[derive(Clone, Debug)]
pub struct LocalHeightResult {
    /// Double-precision value of `exact + tail`.
    pub value: f64,
    /// Exact symbolic part, when the escape happened in exact arithmetic.
    pub exact: Option<LogForm>,
    /// Remaining real part (the whole value when `exact` is `None`).
    pub tail: Real,
    pub escape_n: Option<usize>,
    /// False only when no escape was found within the cap.
    pub certified: bool,
    /// An exact repetition in the orbit was found (so the height is 0).
    pub preperiodic: bool,
}

impl LocalHeightResult {
    fn exact(form: LogForm, escape_n: Option<usize>) -> Self {
        LocalHeightResult {
            value: form.to_f64(),
            exact: Some(form),
            tail: real::zero(),
            escape_n,
            certified: true,
            preperiodic: false,
        }
    }

    fn no_escape(preperiodic: bool) -> Self {
        LocalHeightResult {
            value: 0.0,
            exact: Some(LogForm::zero()),
            tail: real::zero(),
            escape_n: None,
            certified: false,
            preperiodic,
        }
    }

    /// Extended-precision value.
    pub fn real(&self) -> Real {
        match &self.exact {
            Some(f) => f.to_real() + &self.tail,
            None => self.tail.clone(),
        }
    }

    /// The height is proven: an escape was found or the orbit repeats.
    pub fn settled(&self) -> bool {
        self.certified || self.preperiodic
    }
}

/// Evaluate the family at `t0`; refuses poles and a vanishing leading coefficient.
pub fn specialize(fp: &DynPair, t0: &Rational) -> Result<SpecializedSystem> {
    let degenerate = |reason: String| Error::DegenerateFibre {
        t: t0.to_string(),
        reason,
    };
    let mut coeffs = Vec::with_capacity(fp.d() + 1);
    for (i, a) in fp.coeffs().iter().enumerate() {
        let v = eval_ratfunc(a, t0).map_err(|_| degenerate(format!("a_{i} = {a} has a pole")))?;
        coeffs.push(v);
    }
    if coeffs[fp.d()].is_zero() {
        return Err(degenerate(format!(
            "leading coefficient {} vanishes",
            fp.lead()
        )));
    }
    let point = eval_ratfunc(fp.point(), t0)
        .map_err(|_| degenerate(format!("P = {} has a pole", fp.point())))?;
    SpecializedSystem::new(coeffs, point)
}

impl SpecializedSystem {
    pub fn new(mut coeffs: Vec<Rational>, point: Rational) -> Result<Self> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.len() < 3 {
            return Err(Error::InvalidArgument(
                "specialized map has degree < 2".into(),
            ));
        }
        Ok(SpecializedSystem {
            d: coeffs.len() - 1,
            coeffs,
            point,
        })
    }

    pub fn lead(&self) -> &Rational {
        &self.coeffs[self.d]
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        let mut acc = self.lead().clone();
        for c in self.coeffs[..self.d].iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn with_point(&self, x: Rational) -> Self {
        SpecializedSystem {
            point: x,
            ..self.clone()
        }
    }

    fn apply_real(&self, x: &Real, cs: &[Real]) -> Real {
        let mut acc = cs[self.d].clone();
        for c in cs[..self.d].iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// `Σ_{i<d} (a_i/a_d) y^(i-d)`, so that `f(y) = a_d y^d (1 + s)`.
    fn correction(&self, y: &Real, ratios: &[Real]) -> Real {
        let inv = real::one() / y;
        let mut acc = real::zero();
        // Horner in 1/y, innermost term a_0/a_d
        for r in ratios.iter() {
            acc = (acc + r) * &inv;
        }
        acc
    }

    /// `a_0/a_d, ..., a_{d-1}/a_d` in extended precision.
    fn ratios(&self) -> Vec<Real> {
        self.coeffs[..self.d]
            .iter()
            .map(|c| real::from_rational(&(c / self.lead())))
            .collect()
    }
}

fn f64_of(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// `(2d)_v · Λ_v` for the escape region `|z|_v > (2d)_v Λ_v`.
pub fn basin_threshold(sys: &SpecializedSystem, v: PlaceQ) -> f64 {
    let d = sys.d as f64;
    match v {
        PlaceQ::Archimedean => {
            let ad = f64_of(&sys.lead().abs());
            let mut lam = 1f64.max(ad.powf(-2.0 / (d - 1.0)));
            for (i, a) in sys.coeffs[..sys.d].iter().enumerate() {
                let r = f64_of(&(a / sys.lead()).abs());
                lam = lam.max(r.powf(1.0 / (d - i as f64)));
            }
            2.0 * d * lam
        }
        PlaceQ::Finite(p) => {
            let e = padic_escape_bound(sys, p);
            (p as f64).powf(e)
        }
    }
}

/// `log_p Λ_p`: the region is `-v_p(z) > bound`.
fn padic_escape_bound(sys: &SpecializedSystem, p: u64) -> f64 {
    let d = sys.d as f64;
    let vd = padic_val(sys.lead(), p).unwrap() as f64;
    let mut b = 0f64.max(2.0 * vd / (d - 1.0));
    for (i, a) in sys.coeffs[..sys.d].iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let vi = padic_val(a, p).unwrap() as f64;
        b = b.max((vd - vi) / (d - i as f64));
    }
    b
}

/// Exact membership of `x` in the archimedean escape region.
pub fn in_basin0_arch(sys: &SpecializedSystem, x: &Rational) -> bool {
    let two_d = int(2 * sys.d as i64);
    let r = x.abs() / two_d;
    if r <= int(1) {
        return false;
    }
    let ad = sys.lead().abs();
    // r^(d-1) > |a_d|^-2
    if num_traits::pow(r.clone(), sys.d - 1) * &ad * &ad <= int(1) {
        return false;
    }
    for (i, a) in sys.coeffs[..sys.d].iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        if num_traits::pow(r.clone(), sys.d - i) <= (a / sys.lead()).abs() {
            return false;
        }
    }
    true
}

/// Sum `Σ_{k≥0} d^-(k+1) log(1 + s_k)` along the orbit of `y` (which must lie
/// in the escape region), stopping when the remainder bound
/// `2 d^-k |s_k| / (d-1)` drops below `tol`.
fn escape_tail(sys: &SpecializedSystem, y: Real, tol: f64) -> Real {
    let ratios = sys.ratios();
    let cs: Vec<Real> = sys.coeffs.iter().map(real::from_rational).collect();
    let d = real::from_f64(sys.d as f64);
    let bound_scale = 2.0 / (sys.d as f64 - 1.0);
    let stop = tol.min(TAIL_FLOOR);
    let mut y = y;
    let mut weight = real::one() / &d;
    let mut acc = real::zero();
    let mut dk = 1.0f64;
    for _ in 0..200 {
        let s = sys.correction(&y, &ratios);
        let sf = real::to_f64(&real::abs(&s));
        if sf == 0.0 && s == Real::ZERO {
            break;
        }
        acc += &weight * s.clone().ln_1p();
        let rem = bound_scale * sf / dk;
        if rem < stop {
            break;
        }
        y = sys.apply_real(&y, &cs);
        weight /= &d;
        dk *= sys.d as f64;
    }
    acc
}

/// `f` over the integers: `f(z) = Σ c_i z^i / e`.
///
/// For `x = A/B` in lowest terms, a prime dividing both `Σ c_i A^i B^(d-i)`
/// and `e B^d` divides `e c_d`, so reducing `f(x)` only needs those primes
/// instead of a full gcd of two large integers.
struct IntegerMap {
    cs: Vec<BigInt>,
    e: BigInt,
    primes: Vec<BigInt>,
}

impl IntegerMap {
    /// `None` when `e c_d` does not factor within the trial-division cap.
    fn new(sys: &SpecializedSystem) -> Option<IntegerMap> {
        let e = sys
            .coeffs
            .iter()
            .fold(BigInt::from(1), |acc, c| acc.lcm(c.denom()));
        let scale = Rational::from_integer(e.clone());
        let cs: Vec<BigInt> = sys
            .coeffs
            .iter()
            .map(|c| (c * &scale).to_integer())
            .collect();
        let key = (&e * &cs[sys.d]).abs();
        let primes = factor_integer(key.magnitude(), DEFAULT_TRIAL_CAP)
            .ok()?
            .into_iter()
            .map(|(p, _)| BigInt::from(p))
            .collect();
        Some(IntegerMap { cs, e, primes })
    }

    fn apply(&self, x: &Rational) -> Rational {
        let (a, b) = (x.numer(), x.denom());
        let d = self.cs.len() - 1;
        let mut u = self.cs[d].clone();
        let mut bp = BigInt::from(1);
        for c in self.cs[..d].iter().rev() {
            bp *= b;
            u = u * a + c * &bp;
        }
        if u.is_zero() {
            return Rational::zero();
        }
        let mut v = &self.e * bp;
        for p in &self.primes {
            while (&u % p).is_zero() && (&v % p).is_zero() {
                u /= p;
                v /= p;
            }
        }
        Rational::new_raw(u, v)
    }
}

/// Double-precision scan: the orbit of `x` stays below `limit` for `steps`
/// iterations. Only used to skip the extended-precision loop for orbits that
/// are clearly bounded; it certifies nothing.
fn stays_bounded_f64(sys: &SpecializedSystem, x: f64, limit: f64, steps: usize) -> bool {
    let cs: Vec<f64> = sys.coeffs.iter().map(f64_of).collect();
    let mut y = x;
    for _ in 0..steps {
        y = cs.iter().rev().fold(0.0, |acc, c| acc * y + c);
        if y.is_nan() || y.abs() >= limit {
            return false;
        }
    }
    true
}

/// Archimedean local canonical height.
pub fn local_height_arch(sys: &SpecializedSystem, tol: f64, cap: usize) -> LocalHeightResult {
    let ad_form = LogForm::log_abs(sys.lead()).scale(&Rational::new(
        BigInt::from(1),
        BigInt::from(sys.d as i64 - 1),
    ));
    let fast = IntegerMap::new(sys);
    let log2_thr = match basin_threshold(sys, PlaceQ::Archimedean).log2() {
        l if l.is_finite() => l,
        _ => f64::NEG_INFINITY,
    };
    let mut x = sys.point.clone();
    // iterates are canonical, so the raw parts identify them
    let mut seen: HashSet<(BigInt, BigInt)> = HashSet::new();
    let mut n = 0usize;
    // exact phase
    loop {
        // |x| < 2^(bits(num) - bits(den) + 1)
        let log2_upper = x.numer().bits() as f64 - x.denom().bits() as f64 + 1.0;
        if log2_upper >= log2_thr - 1.0 && in_basin0_arch(sys, &x) {
            let w = Rational::new(BigInt::from(1), num_traits::pow(BigInt::from(sys.d), n));
            let form = (LogForm::log_abs(&x) + ad_form.clone()).scale(&w);
            let tail = escape_tail(sys, real::from_rational(&x), tol) * real::from_rational(&w);
            let mut r = LocalHeightResult::exact(form, Some(n));
            r.tail = tail;
            r.value = real::to_f64(&r.real());
            return r;
        }
        if n >= cap {
            return LocalHeightResult::no_escape(false);
        }
        if !seen.insert((x.numer().clone(), x.denom().clone())) {
            return LocalHeightResult::no_escape(true);
        }
        if rat_bits(&x) > EXACT_BIT_BUDGET {
            break;
        }
        x = match &fast {
            Some(m) => m.apply(&x),
            None => sys.apply(&x),
        };
        n += 1;
    }
    // extended-precision phase
    let thr = basin_threshold(sys, PlaceQ::Archimedean) * 1.0001;
    if stays_bounded_f64(sys, f64_of(&x), thr / 2.0, cap - n) {
        return LocalHeightResult::no_escape(false);
    }
    let cs: Vec<Real> = sys.coeffs.iter().map(real::from_rational).collect();
    let mut y = real::from_rational(&x);
    while n < cap {
        y = sys.apply_real(&y, &cs);
        n += 1;
        let mag = real::abs(&y);
        if real::to_f64(&mag) > thr {
            let head = mag.ln() + ad_form.to_real();
            let mut total = head + escape_tail(sys, y, tol);
            let d = real::from_f64(sys.d as f64);
            for _ in 0..n {
                total /= &d;
            }
            return LocalHeightResult {
                value: real::to_f64(&total),
                exact: None,
                tail: total,
                escape_n: Some(n),
                certified: true,
                preperiodic: false,
            };
        }
    }
    LocalHeightResult::no_escape(false)
}

/// p-adic local canonical height.
pub fn local_height_padic(
    sys: &SpecializedSystem,
    p: u64,
    cap: usize,
) -> Result<LocalHeightResult> {
    PlaceQ::finite(p)?;
    let vals: Vec<Option<i64>> = sys
        .coeffs
        .iter()
        .map(|c| (!c.is_zero()).then(|| padic_val(c, p).unwrap()))
        .collect();
    let vd = vals[sys.d].unwrap();
    let good = vd == 0 && vals.iter().all(|v| v.is_none_or(|v| v >= 0));
    if good {
        if sys.point.is_zero() {
            return Ok(LocalHeightResult::exact(LogForm::zero(), None));
        }
        let vx = padic_val(&sys.point, p)?;
        return Ok(if vx < 0 {
            LocalHeightResult::exact(LogForm::log_prime(p, int(-vx)), Some(0))
        } else {
            LocalHeightResult::exact(LogForm::zero(), None)
        });
    }
    let d = sys.d as i64;
    let bound = padic_escape_bound(sys, p);
    let min_v = vals.iter().flatten().copied().min().unwrap_or(0).min(0);
    let prec = 64 + (cap as i64 + 1) * (min_v.abs() + 2) * d;
    let cs: Vec<Padic> = sys
        .coeffs
        .iter()
        .map(|c| Padic::from_rational(c, p, prec))
        .collect();
    let mut x = Padic::from_rational(&sys.point, p, prec);
    for n in 0..=cap {
        if x.is_zero() {
            if (x.prec() as f64) < -bound {
                return Err(Error::PrecisionExhausted(format!(
                    "{p}-adic orbit lost precision at step {n}"
                )));
            }
        } else if (-x.val() as f64) > bound {
            let raw = Rational::new(BigInt::from(-vd), BigInt::from(d - 1)) + int(-x.val());
            let w = Rational::new(BigInt::from(1), num_traits::pow(BigInt::from(d), n));
            return Ok(LocalHeightResult::exact(
                LogForm::log_prime(p, raw * w),
                Some(n),
            ));
        }
        // the disk |z| <= |x| is forward invariant when v(a_i) + i m >= m
        let m = x.val();
        if m < i64::MAX / 4
            && vals
                .iter()
                .enumerate()
                .all(|(i, v)| v.is_none_or(|v| v + i as i64 * m >= m))
        {
            return Ok(LocalHeightResult::exact(LogForm::zero(), None));
        }
        if x.val().abs() > i64::MAX / (4 * d) {
            return Err(Error::Resource(format!("{p}-adic valuation overflow")));
        }
        let mut acc = cs[sys.d].clone();
        for c in cs[..sys.d].iter().rev() {
            acc = acc.mul(&x).add(c);
        }
        x = acc;
    }
    Ok(LocalHeightResult::no_escape(false))
}

/// Primes where the local height is not simply `max(0, -v_p(x)) log p`, plus
/// the primes of the denominator of `x`.
pub fn relevant_primes(sys: &SpecializedSystem) -> Result<Vec<u64>> {
    let mut ps = Vec::new();
    for c in &sys.coeffs {
        if !c.is_zero() {
            let den = Rational::from_integer(c.denom().clone());
            ps.extend(prime_support(&den, DEFAULT_TRIAL_CAP)?);
        }
    }
    ps.extend(prime_support(sys.lead(), DEFAULT_TRIAL_CAP)?);
    if !sys.point.is_zero() {
        let den = Rational::from_integer(sys.point.denom().clone());
        ps.extend(prime_support(&den, DEFAULT_TRIAL_CAP)?);
    }
    ps.sort_unstable();
    ps.dedup();
    Ok(ps)
}

#[derive(Clone, Debug)]
pub struct GlobalHeight {
    pub places: Vec<(PlaceQ, LocalHeightResult)>,
    /// Sum of the exact parts.
    pub exact: LogForm,
    /// Sum of the real tails, including places without an exact form.
    pub tail: Real,
    pub value: f64,
    pub certified: bool,
}

impl GlobalHeight {
    pub fn real(&self) -> Real {
        self.exact.to_real() + &self.tail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeightCaps {
    pub arch: usize,
    pub padic: usize,
}

impl Default for HeightCaps {
    fn default() -> Self {
        HeightCaps {
            arch: DEFAULT_ARCH_CAP,
            padic: DEFAULT_PADIC_CAP,
        }
    }
}

/// `ĥ(x) = Σ_v λ̂_v(x)` over the archimedean place and the relevant primes.
pub fn global_height(sys: &SpecializedSystem, tol: f64, caps: HeightCaps) -> Result<GlobalHeight> {
    let mut places = Vec::new();
    places.push((PlaceQ::Archimedean, local_height_arch(sys, tol, caps.arch)));
    for p in relevant_primes(sys)? {
        let r = match local_height_padic(sys, p, caps.padic) {
            Ok(r) => r,
            Err(Error::PrecisionExhausted(_)) => LocalHeightResult::no_escape(false),
            Err(e) => return Err(e),
        };
        places.push((PlaceQ::Finite(p), r));
    }
    let mut exact = LogForm::zero();
    let mut tail = real::zero();
    let mut certified = true;
    for (_, r) in &places {
        if let Some(f) = &r.exact {
            exact = exact + f.clone();
        }
        tail += &r.tail;
        certified &= r.settled();
    }
    let value = real::to_f64(&(exact.to_real() + &tail));
    Ok(GlobalHeight {
        places,
        exact,
        tail,
        value,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::poly::{PolyQt, RatFunc};
    use num_bigint::BigUint;
    use num_integer::Integer;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sys(cs: &[Rational], x: Rational) -> SpecializedSystem {
        SpecializedSystem::new(cs.to_vec(), x).unwrap()
    }

    fn z2_plus(c: Rational, x: Rational) -> SpecializedSystem {
        sys(&[c, int(0), int(1)], x)
    }

    /// `d^-N h(f^N(x))`, iterating numerator and denominator as integers.
    ///
    /// With `f = Σ c_i z^i / e` (integers `c_i`, `e`) and `x = A/B` in lowest
    /// terms, `f(x) = Σ c_i A^i B^(d-i) / (e B^d)`, and any common factor of
    /// the two sides divides `e c_d`, so only those primes are removed.
    fn naive_height(s: &SpecializedSystem, n: u32) -> f64 {
        let mut e = BigInt::one();
        for c in &s.coeffs {
            e = e.lcm(c.denom());
        }
        let cs: Vec<BigInt> = s
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(e.clone())).to_integer())
            .collect();
        let mut strip: Vec<BigInt> = Vec::new();
        let key = (&e * &cs[s.d]).abs();
        for (p, _) in crate::arith::factor_integer(key.magnitude(), DEFAULT_TRIAL_CAP).unwrap() {
            strip.push(BigInt::from(p));
        }
        let mut a = s.point.numer().clone();
        let mut b = s.point.denom().clone();
        for _ in 0..n {
            let mut u = cs[s.d].clone();
            let mut bp = BigInt::one();
            for c in cs[..s.d].iter().rev() {
                bp *= &b;
                u = u * &a + c * &bp;
            }
            let mut v = &e * &bp;
            for p in &strip {
                while !u.is_zero() && (&u % p).is_zero() && (&v % p).is_zero() {
                    u /= p;
                    v /= p;
                }
            }
            if u.is_zero() {
                v = BigInt::one();
            }
            a = u;
            b = v;
        }
        let big = if a.magnitude() > b.magnitude() {
            a.magnitude().clone()
        } else {
            b.magnitude().clone()
        };
        if big.is_zero() {
            return 0.0;
        }
        crate::logform::ln_big(&big) / (s.d as f64).powi(n as i32)
    }

    #[test]
    fn integer_map_matches_rational_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let d = rng.gen_range(2..4usize);
            let cs: Vec<Rational> = (0..=d)
                .map(|_| rat(rng.gen_range(-12..13), rng.gen_range(1..9)))
                .collect();
            let Ok(s) =
                SpecializedSystem::new(cs, rat(rng.gen_range(-30..31), rng.gen_range(1..30)))
            else {
                continue;
            };
            let m = IntegerMap::new(&s).unwrap();
            let mut x = s.point.clone();
            for _ in 0..4 {
                let y = m.apply(&x);
                assert_eq!(y, s.apply(&x));
                // canonical form: reduced with positive denominator
                assert!(y.numer().gcd(y.denom()) == BigInt::from(1) || y.is_zero());
                assert!(y.denom().is_positive());
                x = y;
            }
        }
    }

    #[test]
    fn specialize_examples() {
        let p = RatFunc::new(PolyQt::from_ints(&[1, 0, 7]), PolyQt::t()).unwrap();
        let fp = DynPair::new(vec![RatFunc::t(), RatFunc::zero(), RatFunc::one()], p).unwrap();
        let s = specialize(&fp, &int(7)).unwrap();
        assert_eq!(s.coeffs, vec![int(7), int(0), int(1)]);
        assert_eq!(s.point, rat(344, 7));
        assert!(matches!(
            specialize(&fp, &int(0)),
            Err(Error::DegenerateFibre { .. })
        ));
        let inv_t = RatFunc::new(PolyQt::one(), PolyQt::t()).unwrap();
        let fp = DynPair::new(
            vec![RatFunc::zero(), RatFunc::zero(), inv_t],
            RatFunc::one(),
        )
        .unwrap();
        match specialize(&fp, &int(0)) {
            Err(Error::DegenerateFibre { reason, .. }) => assert!(reason.contains("a_2")),
            other => panic!("{other:?}"),
        }
        let fp = DynPair::new(
            vec![RatFunc::zero(), RatFunc::zero(), RatFunc::t()],
            RatFunc::one(),
        )
        .unwrap();
        assert!(matches!(
            specialize(&fp, &int(0)),
            Err(Error::DegenerateFibre { .. })
        ));
    }

    #[test]
    fn threshold_examples() {
        let z2 = z2_plus(int(0), int(0));
        assert_eq!(basin_threshold(&z2, PlaceQ::Archimedean), 4.0);
        assert_eq!(basin_threshold(&z2, PlaceQ::Finite(5)), 1.0);
        let s = z2_plus(int(7), int(0));
        assert!((basin_threshold(&s, PlaceQ::Archimedean) - 4.0 * 7f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn arch_examples() {
        let r = local_height_arch(&z2_plus(int(0), int(2)), 1e-12, 100);
        assert!((r.value - 2f64.ln()).abs() < 1e-12);
        assert!(r.certified);
        let r = local_height_arch(&z2_plus(int(-1), int(0)), 1e-12, 100);
        assert_eq!(r.value, 0.0);
        assert!(!r.certified);
        assert!(r.preperiodic);
        let s = z2_plus(int(1), int(0));
        let r = local_height_arch(&s, 1e-12, 100);
        // exact orbit to N = 20: z^2 + 1 keeps x integral
        let mut x = int(0);
        for _ in 0..20 {
            x = s.apply(&x);
        }
        let oracle = crate::logform::ln_big(x.numer().magnitude()) / 2f64.powi(20);
        assert!((r.value - oracle).abs() < 1e-4);
    }

    #[test]
    fn padic_examples() {
        let r = local_height_padic(&z2_plus(int(0), rat(1, 8)), 2, 200).unwrap();
        assert_eq!(r.exact.unwrap(), LogForm::log_prime(2, int(3)));
        let r = local_height_padic(&z2_plus(rat(1, 7), int(1)), 7, 200).unwrap();
        assert_eq!(r.escape_n, Some(1));
        assert_eq!(r.exact.clone().unwrap(), LogForm::log_prime(7, rat(1, 2)));
        // oracle: d^-N max(0, log|f^N(1)|_7) for N = 6
        let s = z2_plus(rat(1, 7), int(1));
        let mut x = int(1);
        for _ in 0..6 {
            x = s.apply(&x);
        }
        let oracle = (-padic_val(&x, 7).unwrap()).max(0) as f64 * 7f64.ln() / 64.0;
        assert!((r.value - oracle).abs() < 1e-12);
        let r = local_height_padic(&z2_plus(int(7), int(1)), 7, 200).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.certified);
    }

    #[test]
    fn global_examples() {
        let h = global_height(&z2_plus(int(0), int(2)), 1e-12, HeightCaps::default()).unwrap();
        assert!((h.value - 2f64.ln()).abs() < 1e-12);
        let h = global_height(&z2_plus(int(-1), int(0)), 1e-12, HeightCaps::default()).unwrap();
        assert_eq!(h.value, 0.0);
        let s = z2_plus(int(1), rat(1, 2));
        let h = global_height(&s, 1e-12, HeightCaps::default()).unwrap();
        assert!((h.value - naive_height(&s, 18)).abs() < 1e-3);
    }

    fn random_system(rng: &mut ChaCha8Rng) -> SpecializedSystem {
        let d = rng.gen_range(2..=3);
        let mut cs: Vec<Rational> = (0..d)
            .map(|_| rat(rng.gen_range(-4..5), rng.gen_range(1..4)))
            .collect();
        let lead = loop {
            let n = rng.gen_range(-3..4);
            if n != 0 {
                break rat(n, rng.gen_range(1..3));
            }
        };
        cs.push(lead);
        let x = rat(rng.gen_range(-6..7), rng.gen_range(1..5));
        SpecializedSystem::new(cs, x).unwrap()
    }

    #[test]
    fn agrees_with_naive_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let s = random_system(&mut rng);
            let n = if s.d == 2 { 18 } else { 11 };
            let h = global_height(&s, 1e-12, HeightCaps::default()).unwrap();
            let naive = naive_height(&s, n);
            assert!(
                (h.value - naive).abs() < 1e-3,
                "{s:?}: {} vs {naive}",
                h.value
            );
        }
    }

    #[test]
    fn functional_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let tol = 1e-12;
        for _ in 0..40 {
            let s = random_system(&mut rng);
            let h0 = global_height(&s, tol, HeightCaps::default()).unwrap();
            let image = s.with_point(s.apply(&s.point));
            let h1 = global_height(&image, tol, HeightCaps::default()).unwrap();
            if !(h0.certified && h1.certified) {
                continue;
            }
            let gap = h1.real() - h0.real() * real::from_f64(s.d as f64);
            assert!(real::to_f64(&real::abs(&gap)) <= 2.0 * tol, "{s:?}");
        }
    }

    #[test]
    fn archimedean_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut tested = 0;
        while tested < 100 {
            let s = random_system(&mut rng);
            let thr = basin_threshold(&s, PlaceQ::Archimedean);
            let x = Rational::from_float(thr * rng.gen_range(1.01..50.0)).unwrap()
                * int(if rng.gen_bool(0.5) { 1 } else { -1 });
            let s = s.with_point(x.clone());
            if !in_basin0_arch(&s, &x) {
                continue;
            }
            let r = local_height_arch(&s, 1e-12, 100);
            let d1 = s.d as f64 - 1.0;
            let base = f64_of(&s.lead().abs()).ln() / d1 + f64_of(&x.abs()).ln();
            let gap = r.value - base;
            assert!(gap >= 0.5f64.ln() / d1 - 1e-12 && gap <= 1.5f64.ln() / d1 + 1e-12);
            tested += 1;
        }
    }

    #[test]
    fn preperiodic_points_have_zero_height() {
        // roots of f^2(z) = z for z^2 - 1 and fixed points of z^2 - 2
        for (c, x) in [(-1, 0), (-1, -1), (-2, 2), (-2, -1), (0, 1), (0, 0)] {
            let s = z2_plus(int(c), int(x));
            let h = global_height(&s, 1e-12, HeightCaps::default()).unwrap();
            assert_eq!(h.value, 0.0);
            for (_, r) in &h.places {
                assert!(r.settled());
            }
        }
        // p-adically: 1/2 is not preperiodic for z^2 but its 2-adic height is positive
        let s = z2_plus(int(0), rat(1, 2));
        let r = local_height_padic(&s, 2, 200).unwrap();
        assert_eq!(r.exact.unwrap(), LogForm::log_uint(&BigUint::from(2u32)));
    }
}
