//! Heights on the parameter line attached to a divisor `D`: a rational
//! function `g` with pole divisor `d^N (d-1) D`, the local heights
//! `λ_{D,v}` and the global `h_D`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{int, local_naive_height, weil_height, PlaceQ, Rational};
use crate::error::{Error, Result};
use crate::ffheight::DivisorQ;
use crate::logform::LogForm;
use crate::poly::{ord_at, ClosedPoint, PolyQt, RatFunc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightPresentation {
    pub n: u32,
    /// `d^N (d-1)`.
    pub scale: u64,
    pub g: RatFunc,
    pub divisor: DivisorQ,
}

/// Least `N` with `d^N (d-1) m` integral for every multiplicity `m`.
pub fn clear_denominators(divisor: &DivisorQ, d: usize) -> Result<u32> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("degree {d} < 2")));
    }
    for n in 0..64u32 {
        let Some(scale) = scale_for(d, n) else { break };
        let s = Rational::from_integer(BigInt::from(scale));
        if divisor.entries().values().all(|m| (m * &s).is_integer()) {
            return Ok(n);
        }
    }
    Err(Error::Internal(format!(
        "multiplicities of {divisor} are not cleared by powers of {d}"
    )))
}

/// `d^n (d-1)`, if it fits a u64.
pub fn scale_for(d: usize, n: u32) -> Option<u64> {
    (d as u64).checked_pow(n)?.checked_mul(d as u64 - 1)
}

fn to_u32(x: &Rational, what: &str) -> Result<u32> {
    x.to_integer()
        .to_u32()
        .filter(|_| x.is_integer() && !x.is_negative())
        .ok_or_else(|| Error::Internal(format!("{what} = {x} is not a small non-negative integer")))
}

/// `g = (t^n + s) / Π q_c^(scale·m_c)` with `n = deg den + scale·m_∞` and the
/// least `s >= 0` making numerator and denominator coprime.
pub fn build_g(divisor: &DivisorQ, n: u32, d: usize) -> Result<RatFunc> {
    if divisor.is_zero() {
        return Err(Error::InvalidArgument("g is undefined for D = 0".into()));
    }
    let scale = scale_for(d, n).ok_or_else(|| Error::Resource(format!("{d}^{n} overflows")))?;
    let s = int(scale as i64);
    let mut den = PolyQt::one();
    let mut inf = 0u32;
    for (c, m) in divisor.entries() {
        let e = to_u32(&(m * &s), "scaled multiplicity")?;
        match c {
            ClosedPoint::Finite(q) => den = &den * &q.pow(e),
            ClosedPoint::Infinity => inf = e,
        }
    }
    let tn = PolyQt::t().pow(den.deg() as u32 + inf);
    let mut s = 0i64;
    loop {
        let num = &tn + &PolyQt::constant(int(s));
        if num.gcd(&den).is_constant() {
            return RatFunc::new(num, den);
        }
        s += 1;
    }
}

impl HeightPresentation {
    pub fn new(divisor: &DivisorQ, d: usize) -> Result<HeightPresentation> {
        let n = clear_denominators(divisor, d)?;
        let g = build_g(divisor, n, d)?;
        let hp = HeightPresentation {
            n,
            scale: scale_for(d, n).unwrap(),
            g,
            divisor: divisor.clone(),
        };
        hp.check()?;
        Ok(hp)
    }

    /// Checks that the pole divisor of `g` is exactly `scale · D`.
    pub fn check(&self) -> Result<()> {
        let s = int(self.scale as i64);
        for (c, m) in self.divisor.entries() {
            if int(-ord_at(&self.g, c)?) != m * &s {
                return Err(Error::Internal(format!("pole order of g at {c} is wrong")));
            }
        }
        if !self.divisor.entries().contains_key(&ClosedPoint::Infinity)
            && ord_at(&self.g, &ClosedPoint::Infinity)? < 0
        {
            return Err(Error::Internal(
                "g has an unexpected pole at infinity".into(),
            ));
        }
        Ok(())
    }

    pub fn inv_scale(&self) -> Rational {
        Rational::new(BigInt::one(), BigInt::from(self.scale))
    }

    /// Whether `t0` is a rational point of `Supp(D)`.
    pub fn is_support_point(&self, t0: &Rational) -> bool {
        self.g.den().eval(t0).is_zero()
    }
}

/// `λ_{D,v}(t0) = max(0, log|g(t0)|_v) / scale`.
pub fn lambda_d(hp: &HeightPresentation, v: PlaceQ, t0: &Rational) -> Result<LogForm> {
    if hp.is_support_point(t0) {
        return Err(Error::SupportPoint(t0.to_string()));
    }
    let x = hp.g.eval(t0)?;
    Ok(local_naive_height(&x, v).scale(&hp.inv_scale()))
}

/// `h_D(t0) = h(g(t0)) / scale`; zero on support points.
pub fn h_d(hp: &HeightPresentation, t0: &Rational) -> LogForm {
    if hp.is_support_point(t0) {
        return LogForm::zero();
    }
    let x = hp.g.eval(t0).expect("not a pole");
    weil_height(&x).scale(&hp.inv_scale())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{prime_support, rat, DEFAULT_TRIAL_CAP};
    use crate::ffheight::pole_degree;
    use proptest::prelude::*;

    fn div(entries: &[(ClosedPoint, Rational)]) -> DivisorQ {
        let mut d = DivisorQ::new();
        for (c, m) in entries {
            d.add(c.clone(), m.clone());
        }
        d
    }

    fn at(a: i64) -> ClosedPoint {
        ClosedPoint::rational(&int(a))
    }

    #[test]
    fn clear_denominators_examples() {
        assert_eq!(
            clear_denominators(&div(&[(ClosedPoint::Infinity, rat(1, 2))]), 2).unwrap(),
            1
        );
        assert_eq!(
            clear_denominators(&div(&[(at(0), int(1)), (ClosedPoint::Infinity, int(1))]), 2)
                .unwrap(),
            0
        );
        assert_eq!(
            clear_denominators(&div(&[(ClosedPoint::Infinity, int(3))]), 3).unwrap(),
            0
        );
        assert!(matches!(
            clear_denominators(&div(&[(ClosedPoint::Infinity, rat(1, 5))]), 2),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn build_g_examples() {
        let g = build_g(&div(&[(ClosedPoint::Infinity, rat(1, 2))]), 1, 2).unwrap();
        assert_eq!(g, RatFunc::t());
        let g = build_g(
            &div(&[(at(0), int(1)), (ClosedPoint::Infinity, int(1))]),
            0,
            2,
        )
        .unwrap();
        assert_eq!(g.to_string(), "(t^2 + 1)/t");
        let q = ClosedPoint::Finite(PolyQt::from_ints(&[1, 0, 1]));
        let g = build_g(&div(&[(q.clone(), int(1))]), 0, 2).unwrap();
        assert_eq!(g.num(), &PolyQt::from_ints(&[0, 0, 1]));
        assert_eq!(ord_at(&g, &q).unwrap(), -1);
        assert_eq!(ord_at(&g, &ClosedPoint::Infinity).unwrap(), 0);
    }

    #[test]
    fn lambda_and_height_examples() {
        let hp = HeightPresentation::new(&div(&[(ClosedPoint::Infinity, rat(1, 2))]), 2).unwrap();
        let l = lambda_d(&hp, PlaceQ::Archimedean, &int(100)).unwrap();
        assert_eq!(l, LogForm::log_abs(&int(100)).scale(&rat(1, 2)));
        assert!(lambda_d(&hp, PlaceQ::Finite(2), &int(3)).unwrap().is_zero());
        assert_eq!(h_d(&hp, &int(100)), l);

        let hp =
            HeightPresentation::new(&div(&[(at(0), int(1)), (ClosedPoint::Infinity, int(1))]), 2)
                .unwrap();
        assert!(matches!(
            lambda_d(&hp, PlaceQ::Archimedean, &int(0)),
            Err(Error::SupportPoint(_))
        ));
        assert!(h_d(&hp, &int(0)).is_zero());

        let hp = HeightPresentation::new(&div(&[(ClosedPoint::Infinity, int(1))]), 2).unwrap();
        assert_eq!(hp.g, RatFunc::t());
        assert_eq!(h_d(&hp, &rat(3, 7)), LogForm::log_prime(7, int(1)));
    }

    #[test]
    fn h_d_grows_like_deg_d_times_height() {
        // regression slope of h_D(t) against h(t) over t = 2..2000
        let q = ClosedPoint::Finite(PolyQt::from_ints(&[1, 0, 1]));
        let d = div(&[
            (at(0), int(1)),
            (q, rat(1, 2)),
            (ClosedPoint::Infinity, rat(3, 2)),
        ]);
        let hp = HeightPresentation::new(&d, 2).unwrap();
        let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for t in 2..=2000i64 {
            let x = (t as f64).ln();
            let y = h_d(&hp, &int(t)).to_f64();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1.0;
        }
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let deg = 1.0 + 2.0 * 0.5 + 1.5;
        assert!((slope - deg).abs() < 0.02 * deg, "slope {slope}");
    }

    fn arb_divisor() -> impl Strategy<Value = DivisorQ> {
        (
            prop::collection::vec((-4i64..5, 1i64..5, 0u32..3), 0..3),
            1i64..5,
            0u32..3,
            prop_oneof![Just(2usize), Just(3usize)],
        )
            .prop_map(|(pts, m_inf, k_inf, d)| {
                let mut out = DivisorQ::new();
                for (a, m, k) in pts {
                    let denom = (d as i64).pow(k) * (d as i64 - 1);
                    out.add(ClosedPoint::rational(&int(a)), rat(m, denom));
                }
                let denom = (d as i64).pow(k_inf) * (d as i64 - 1);
                out.add(ClosedPoint::Infinity, rat(m_inf, denom));
                out
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pole_divisor_of_g_is_scaled_d(dv in arb_divisor()) {
            for d in [2usize, 3] {
                let Ok(hp) = HeightPresentation::new(&dv, d) else { continue };
                prop_assert_eq!(pole_degree(&hp.g), dv.degree() * int(hp.scale as i64));
                prop_assert!(hp.g.num().is_monic() && hp.g.den().is_monic());
            }
        }

        #[test]
        fn lambda_vanishes_at_good_primes(a in -50i64..50, b in 1i64..50) {
            let mut dv = DivisorQ::new();
            dv.add(ClosedPoint::rational(&int(1)), int(1));
            dv.add(ClosedPoint::Infinity, rat(1, 2));
            let hp = HeightPresentation::new(&dv, 2).unwrap();
            let t0 = rat(a, b);
            prop_assume!(!hp.is_support_point(&t0));
            let x = hp.g.eval(&t0).unwrap();
            let total = prime_support(&x, DEFAULT_TRIAL_CAP).unwrap().into_iter()
                .map(|p| lambda_d(&hp, PlaceQ::Finite(p), &t0).unwrap())
                .fold(lambda_d(&hp, PlaceQ::Archimedean, &t0).unwrap(), |x, y| x + y);
            prop_assert_eq!(total, h_d(&hp, &t0));
            for p in [101u64, 103, 107] {
                if (t0.denom() % p as i64) != BigInt::zero() {
                    prop_assert!(lambda_d(&hp, PlaceQ::Finite(p), &t0).unwrap().is_zero());
                }
            }
        }
    }
}
