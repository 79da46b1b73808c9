//! Böttcher-type series at support points of degree one and at infinity,
//! and the correction data `c_β`, `F` and `C(φ)` built from them.

use num_bigint::BigInt;

use crate::arith::{int, padic_val, PlaceQ, Rational};
use crate::divheight::{scale_for, HeightPresentation};
use crate::error::{Error, Result};
use crate::ffheight::{ff_local_height, DynPair, Orbit, DEFAULT_FF_CAP};
use crate::laurent::{expand_at, log_unit_series, LaurentSeries};
use crate::logform::LogForm;
use crate::poly::{ord_at, ClosedPoint, RatFunc};

/// Default cap on the iteration level while waiting for stabilization.
pub const DEFAULT_ORDER_CAP: u32 = 24;

/// Extra relative precision carried through the iteration.
const GUARD: i64 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottcherData {
    pub place: ClosedPoint,
    /// First iterate of `P` inside the escape region at `place`.
    pub escape_n: usize,
    /// Pole order of that iterate.
    pub m: i64,
    /// `w^-m · G`, known to relative precision `prec`.
    pub g: LaurentSeries,
    pub stabilized_at: u32,
}

fn check_place(c: &ClosedPoint) -> Result<()> {
    if let ClosedPoint::Finite(q) = c {
        if q.deg() > 1 {
            return Err(Error::ExtensionFieldRequired(q.to_string()));
        }
    }
    Ok(())
}

/// Expansion of `r` at `c` with relative precision `rel`.
fn expand_rel(r: &RatFunc, c: &ClosedPoint, rel: i64) -> Result<LaurentSeries> {
    expand_at(r, c, ord_at(r, c)? + rel)
}

struct Escaped {
    n0: usize,
    m: i64,
    q: RatFunc,
}

fn escaped_iterate(fp: &DynPair, c: &ClosedPoint) -> Result<Escaped> {
    let h = ff_local_height(fp, c, DEFAULT_FF_CAP)?;
    let n0 = h.escape_n.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "P does not escape at {c} within {DEFAULT_FF_CAP} steps"
        ))
    })?;
    let mut orbit = Orbit::new(fp);
    let q = orbit.get(n0)?.clone();
    let m = -ord_at(&q, c)?;
    Ok(Escaped { n0, m, q })
}

/// `G = lim (f^N(Q) w^(m d^N) a_d^-(d^N-1)/(d-1))^(1/d^N)` for the escaped
/// iterate `Q`, returned as `w^-m G`.
///
/// `prec` is the relative precision of the result. The level `N` is raised
/// until two consecutive roots agree to that precision, and the agreement
/// is confirmed one level further.
pub fn bottcher_series(
    fp: &DynPair,
    c: &ClosedPoint,
    prec: i64,
    order_cap: u32,
) -> Result<BottcherData> {
    check_place(c)?;
    if prec < 1 {
        return Err(Error::InvalidArgument(format!("precision {prec} < 1")));
    }
    let esc = escaped_iterate(fp, c)?;
    let rel = prec + GUARD;
    let d = fp.d();
    let coeffs: Vec<Option<LaurentSeries>> = fp
        .coeffs()
        .iter()
        .map(|a| {
            if a.is_zero() {
                Ok(None)
            } else {
                expand_rel(a, c, rel).map(Some)
            }
        })
        .collect::<Result<_>>()?;
    let lead = coeffs[d].clone().unwrap();
    let q = expand_rel(&esc.q, c, rel)?;
    let alpha = q.lead();

    let mut y = q;
    let mut a_pow = LaurentSeries::one(rel);
    let mut dn: u64 = 1;
    let mut prev: Option<LaurentSeries> = None;
    let mut agreed_at: Option<u32> = None;
    for n in 1..=order_cap {
        // y = f(y), a_pow = a_d^((d^n - 1)/(d - 1))
        let mut acc = lead.clone();
        for a in coeffs[..d].iter().rev() {
            acc = acc.series_mul(&y);
            if let Some(a) = a {
                acc = acc.series_add(a);
            }
        }
        y = acc;
        a_pow = a_pow.pow(d as u64).series_mul(&lead);
        dn = dn
            .checked_mul(d as u64)
            .ok_or_else(|| Error::Resource("iteration level overflow".into()))?;
        let shift = esc
            .m
            .checked_mul(dn as i64)
            .ok_or_else(|| Error::Resource("iteration level overflow".into()))?;
        let xi = y.shift(shift).series_div(&a_pow)?;
        if xi.val() != 0 {
            return Err(Error::Internal(format!(
                "normalized iterate has valuation {}",
                xi.val()
            )));
        }
        let root = xi.nth_root(dn, &alpha)?.truncate(prec);
        if let Some(p) = &prev {
            if *p == root {
                if let Some(first) = agreed_at {
                    return Ok(BottcherData {
                        place: c.clone(),
                        escape_n: esc.n0,
                        m: esc.m,
                        g: root.shift(-esc.m),
                        stabilized_at: first,
                    });
                }
                agreed_at = Some(n - 1);
            } else {
                agreed_at = None;
            }
        }
        prev = Some(root);
    }
    Err(Error::PrecisionExhausted(format!(
        "Böttcher series at {c} did not stabilize by level {order_cap}"
    )))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrectionData {
    pub place: ClosedPoint,
    /// `E_β(β)`.
    pub c: Rational,
    /// `F = log(E/c) / scale`, with zero constant term.
    pub fseries: LaurentSeries,
    /// `d^M (d-1)` for the level `M` used at this point.
    pub scale: u64,
}

impl CorrectionData {
    /// Coefficients of `w^1 .. w^order`.
    pub fn coefficients(&self, order: usize) -> Vec<Rational> {
        self.fseries.coeff_range(1, order as i64 + 1)
    }

    /// `(1/scale) log|c|_v`.
    pub fn log_constant(&self, v: PlaceQ) -> LogForm {
        let inv = Rational::new(BigInt::from(1), BigInt::from(self.scale));
        match v {
            PlaceQ::Archimedean => LogForm::log_abs(&self.c).scale(&inv),
            PlaceQ::Finite(p) => {
                let e = padic_val(&self.c, p).expect("c is nonzero");
                LogForm::log_prime(p, int(-e) * inv)
            }
        }
    }
}

/// `E = 𝒢^((d-1) d^(M-N0)) a_d^(d^(M-N0)) / g^(d^(M-N))` at a support point,
/// its constant `c = E(β)` and `F = log(E/c)/scale` to `O(w^(order+1))`.
pub fn correction_data(
    fp: &DynPair,
    c: &ClosedPoint,
    hp: &HeightPresentation,
    order: usize,
) -> Result<CorrectionData> {
    check_place(c)?;
    if !hp.divisor.entries().contains_key(c) {
        return Err(Error::InvalidArgument(format!(
            "{c} is not in the support of D"
        )));
    }
    let prec = order as i64 + 1;
    let bd = bottcher_series(fp, c, prec, DEFAULT_ORDER_CAP)?;
    let d = fp.d();
    let n0 = bd.escape_n as u32;
    let level = hp.n.max(n0);
    let k = level - n0;
    let scale = scale_for(d, level).ok_or_else(|| Error::Resource("scale overflow".into()))?;
    let dk = (d as u64).pow(k);
    let dg = (d as u64).pow(level - hp.n);
    let lead = expand_rel(fp.lead(), c, prec)?;
    let g = expand_rel(&hp.g, c, prec)?;
    let e =
        bd.g.pow((d as u64 - 1) * dk)
            .series_mul(&lead.pow(dk))
            .series_div(&g.pow(dg))?;
    if e.val() != 0 {
        return Err(Error::Internal(format!(
            "correction at {c} has valuation {} instead of 0",
            e.val()
        )));
    }
    let c0 = e.lead();
    let unit = e.scale(&c0.recip());
    let inv = Rational::new(BigInt::from(1), BigInt::from(scale));
    let fseries = log_unit_series(&unit)?.scale(&inv);
    Ok(CorrectionData {
        place: c.clone(),
        c: c0,
        fseries,
        scale,
    })
}

/// `C(φ) = Σ_v (1/scale) log|c_{φ(v)}|_v` for an assignment of support
/// points to places.
pub fn constant_c(
    assignment: &[(PlaceQ, ClosedPoint)],
    corrections: &[CorrectionData],
) -> Result<LogForm> {
    let mut total = LogForm::zero();
    for (v, beta) in assignment {
        let cd = corrections
            .iter()
            .find(|cd| &cd.place == beta)
            .ok_or_else(|| Error::MissingCorrection(beta.to_string()))?;
        total = total + cd.log_constant(*v);
    }
    Ok(total)
}

/// Primes at which some `c_β` is not a unit.
pub fn nonunit_primes(corrections: &[CorrectionData]) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for cd in corrections {
        out.extend(crate::arith::prime_support(
            &cd.c,
            crate::arith::DEFAULT_TRIAL_CAP,
        )?);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::ffheight::divisor;
    use crate::poly::PolyQt;

    fn z2_plus_t(p: RatFunc) -> DynPair {
        DynPair::new(vec![RatFunc::t(), RatFunc::zero(), RatFunc::one()], p).unwrap()
    }

    fn seven_t_plus_inv() -> RatFunc {
        RatFunc::new(PolyQt::from_ints(&[1, 0, 7]), PolyQt::t()).unwrap()
    }

    fn corrections(fp: &DynPair, order: usize) -> (HeightPresentation, Vec<CorrectionData>) {
        let dr = divisor(fp, 12).unwrap();
        let hp = HeightPresentation::new(&dr.divisor, fp.d()).unwrap();
        let cds = hp
            .divisor
            .entries()
            .keys()
            .map(|c| correction_data(fp, c, &hp, order).unwrap())
            .collect();
        (hp, cds)
    }

    /// Independent route: exact iterates in Q(t), expanded and rooted at
    /// each level separately.
    fn root_at_level(
        fp: &DynPair,
        q: &RatFunc,
        c: &ClosedPoint,
        n: u32,
        prec: i64,
    ) -> LaurentSeries {
        let mut x = q.clone();
        for _ in 0..n {
            x = fp.apply(&x);
        }
        let m = -ord_at(q, c).unwrap();
        let dn = (fp.d() as u64).pow(n);
        let e = (dn as u32 - 1) / (fp.d() as u32 - 1);
        let a = fp.lead().pow(e);
        let xi = expand_at(&x, c, ord_at(&x, c).unwrap() + prec + 2)
            .unwrap()
            .shift(m * dn as i64)
            .series_div(&expand_at(&a, c, ord_at(&a, c).unwrap() + prec + 2).unwrap())
            .unwrap();
        let alpha = expand_at(q, c, ord_at(q, c).unwrap() + 1).unwrap().lead();
        xi.nth_root(dn, &alpha).unwrap().truncate(prec)
    }

    #[test]
    fn bottcher_for_z2_plus_t_at_infinity() {
        let fp = z2_plus_t(RatFunc::zero());
        let bd = bottcher_series(&fp, &ClosedPoint::Infinity, 8, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(bd.escape_n, 1);
        assert_eq!(bd.m, 1);
        assert_eq!(
            bd.g.coeff_range(-1, 3),
            vec![int(1), rat(1, 2), rat(-1, 8), rat(5, 16)]
        );
        // independent oracle: roots of exact iterates stabilize to the same series
        let esc = fp.with_point(RatFunc::t());
        let oracle: Vec<LaurentSeries> = (1..=6)
            .map(|n| root_at_level(&esc, &RatFunc::t(), &ClosedPoint::Infinity, n, 8))
            .collect();
        assert_eq!(oracle[4], oracle[5]);
        assert_eq!(oracle[5].shift(-1), bd.g);
    }

    #[test]
    fn bottcher_trivial_and_finite_examples() {
        let fp = DynPair::new(
            vec![RatFunc::zero(), RatFunc::zero(), RatFunc::one()],
            RatFunc::t(),
        )
        .unwrap();
        let bd = bottcher_series(&fp, &ClosedPoint::Infinity, 6, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(
            bd.g.coeff_range(-1, 5),
            vec![int(1), int(0), int(0), int(0), int(0), int(0)]
        );

        let fp = z2_plus_t(seven_t_plus_inv());
        let at0 = ClosedPoint::rational(&int(0));
        let bd = bottcher_series(&fp, &at0, 6, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(bd.g.val(), -1);
        assert_eq!(bd.g.lead(), int(1));
        let oracle = root_at_level(&fp, fp.point(), &at0, 5, 6);
        assert_eq!(oracle.shift(-1), bd.g);

        let q = ClosedPoint::Finite(PolyQt::from_ints(&[1, 0, 1]));
        assert!(matches!(
            bottcher_series(&fp, &q, 6, DEFAULT_ORDER_CAP),
            Err(Error::ExtensionFieldRequired(_))
        ));
    }

    #[test]
    fn root_identity_at_the_stabilized_level() {
        let fp = z2_plus_t(RatFunc::zero());
        let c = ClosedPoint::Infinity;
        let prec = 8;
        let bd = bottcher_series(&fp, &c, prec, DEFAULT_ORDER_CAP).unwrap();
        for n in [bd.stabilized_at, bd.stabilized_at + 1] {
            let dn = 2u64.pow(n);
            // G^(d^N) w^(-m d^N) a_d^((d^N-1)/(d-1)) = f^N(Q), with a_d = 1
            let mut x = RatFunc::t();
            for _ in 0..n {
                x = fp.apply(&x);
            }
            let lhs = bd.g.pow(dn);
            let rhs = expand_at(&x, &c, ord_at(&x, &c).unwrap() + prec).unwrap();
            let shared = lhs.prec().min(rhs.prec());
            assert_eq!(lhs.truncate(shared), rhs.truncate(shared));
        }
    }

    #[test]
    fn explicit_series_for_z2_plus_t() {
        let (_, cds) = corrections(&z2_plus_t(RatFunc::zero()), 6);
        assert_eq!(cds.len(), 1);
        assert_eq!(cds[0].c, int(1));
        assert_eq!(
            cds[0].coefficients(6),
            vec![
                rat(1, 4),
                rat(-1, 8),
                rat(5, 24),
                rat(-5, 16),
                rat(17, 40),
                rat(-29, 48)
            ]
        );
        assert_eq!(cds[0].fseries.coeff(0), Some(int(0)));
    }

    #[test]
    fn constants_for_seven_t_plus_inverse() {
        let fp = z2_plus_t(seven_t_plus_inv());
        let (hp, cds) = corrections(&fp, 4);
        assert_eq!(hp.g.to_string(), "(t^2 + 1)/t");
        let at0 = ClosedPoint::rational(&int(0));
        let get = |c: &ClosedPoint| cds.iter().find(|cd| &cd.place == c).unwrap().c.clone();
        assert_eq!(get(&ClosedPoint::Infinity), int(7));
        assert_eq!(get(&at0), int(1));
        let phi = [
            (PlaceQ::Archimedean, ClosedPoint::Infinity),
            (PlaceQ::Finite(7), at0.clone()),
        ];
        assert_eq!(
            constant_c(&phi, &cds).unwrap(),
            LogForm::log_prime(7, int(1))
        );
        let swapped = [
            (PlaceQ::Archimedean, at0.clone()),
            (PlaceQ::Finite(7), ClosedPoint::Infinity),
        ];
        assert_eq!(
            constant_c(&swapped, &cds).unwrap(),
            LogForm::log_prime(7, int(-1))
        );
        for beta in [at0.clone(), ClosedPoint::Infinity] {
            let constant = [
                (PlaceQ::Archimedean, beta.clone()),
                (PlaceQ::Finite(7), beta),
            ];
            assert!(constant_c(&constant, &cds).unwrap().is_zero());
        }
        let missing = [(PlaceQ::Archimedean, ClosedPoint::rational(&int(5)))];
        assert!(matches!(
            constant_c(&missing, &cds),
            Err(Error::MissingCorrection(_))
        ));
    }

    #[test]
    fn monomial_dynamics_have_no_correction() {
        let fp = DynPair::new(
            vec![RatFunc::zero(), RatFunc::zero(), RatFunc::one()],
            RatFunc::t(),
        )
        .unwrap();
        let (hp, cds) = corrections(&fp, 5);
        assert_eq!(hp.g, RatFunc::t());
        assert_eq!(cds[0].c, int(1));
        assert!(cds[0].fseries.is_zero());
    }

    #[test]
    fn correction_scales_with_the_orbit() {
        // with g replaced by g^d, F for f(P) is d times F for P and the
        // constants scale the same way
        for p in [RatFunc::zero(), seven_t_plus_inv()] {
            let fp = z2_plus_t(p);
            let image = fp.with_point(fp.apply(fp.point()));
            let (hp, a) = corrections(&fp, 5);
            let image_divisor = divisor(&image, 12).unwrap().divisor;
            let hp_image = HeightPresentation {
                g: hp.g.pow(2),
                divisor: image_divisor,
                ..hp
            };
            hp_image.check().unwrap();
            for ca in &a {
                let cb = correction_data(&image, &ca.place, &hp_image, 5).unwrap();
                assert_eq!(
                    cb.fseries.truncate(6),
                    ca.fseries.scale(&int(2)).truncate(6)
                );
                assert_eq!(
                    cb.log_constant(PlaceQ::Archimedean),
                    ca.log_constant(PlaceQ::Archimedean).scale(&int(2))
                );
            }
        }
    }
}
