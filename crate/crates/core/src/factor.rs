//! Factorization in Q[t]: squarefree split, rational roots, then Kronecker's
//! interpolation search for the remaining factors.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factor_integer, int, Rational, DEFAULT_TRIAL_CAP};
use crate::error::{Error, Result};
use crate::poly::PolyQt;

/// Largest degree handled by the interpolation search.
pub const MAX_KRONECKER_DEGREE: usize = 8;

/// Cap on candidate interpolation tuples tried per factor degree.
const KRONECKER_BUDGET: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    /// Leading coefficient of the input.
    pub content: Rational,
    /// Monic irreducible factors with multiplicities, sorted.
    pub factors: Vec<(PolyQt, u32)>,
}

impl Factorization {
    pub fn expand(&self) -> PolyQt {
        let mut p = PolyQt::constant(self.content.clone());
        for (f, e) in &self.factors {
            p = &p * &f.pow(*e);
        }
        p
    }
}

pub fn factor_poly(q: &PolyQt) -> Result<Factorization> {
    if q.is_zero() {
        return Err(Error::InvalidArgument(
            "cannot factor the zero polynomial".into(),
        ));
    }
    let content = q.lead();
    let mut factors: Vec<(PolyQt, u32)> = Vec::new();
    for (part, mult) in squarefree(&q.monic()) {
        for f in factor_squarefree(&part)? {
            factors.push((f, mult));
        }
    }
    factors.sort_by(|a, b| {
        a.0.deg()
            .cmp(&b.0.deg())
            .then_with(|| a.0.coeffs().iter().rev().cmp(b.0.coeffs().iter().rev()))
    });
    Ok(Factorization { content, factors })
}

/// Monic irreducible factors of `q`, ignoring multiplicity.
pub fn irreducible_factors(q: &PolyQt) -> Result<Vec<PolyQt>> {
    if q.is_constant() {
        return Ok(Vec::new());
    }
    Ok(factor_poly(q)?
        .factors
        .into_iter()
        .map(|(f, _)| f)
        .collect())
}

/// Yun's squarefree decomposition of a monic polynomial.
fn squarefree(f: &PolyQt) -> Vec<(PolyQt, u32)> {
    let mut out = Vec::new();
    if f.is_constant() {
        return out;
    }
    let fp = f.derivative();
    let a0 = f.gcd(&fp);
    let mut b = f.div_exact(&a0).unwrap();
    let mut c = fp.div_exact(&a0).unwrap();
    let mut d = &c - &b.derivative();
    let mut i = 1;
    loop {
        let a = b.gcd(&d);
        if !a.is_constant() {
            out.push((a.clone(), i));
        }
        b = b.div_exact(&a).unwrap();
        if b.is_constant() {
            break;
        }
        c = d.div_exact(&a).unwrap();
        d = &c - &b.derivative();
        i += 1;
    }
    out
}

fn factor_squarefree(f: &PolyQt) -> Result<Vec<PolyQt>> {
    let mut out = Vec::new();
    let mut rest = f.monic();
    for root in rational_roots(&rest)? {
        let lin = PolyQt::linear(&root);
        rest = rest.div_exact(&lin).expect("root divides");
        out.push(lin);
    }
    if rest.deg() >= 1 {
        kronecker(&rest, &mut out)?;
    }
    Ok(out)
}

/// Integer coefficients of the primitive associate.
fn int_coeffs(p: &PolyQt) -> Vec<BigInt> {
    p.primitive_int()
        .coeffs()
        .iter()
        .map(|c| c.to_integer())
        .collect()
}

fn divisors(n: &BigUint) -> Result<Vec<BigUint>> {
    let mut ds = vec![BigUint::one()];
    for (p, e) in factor_integer(n, DEFAULT_TRIAL_CAP)? {
        let mut next = Vec::with_capacity(ds.len() * (e as usize + 1));
        for d in &ds {
            let mut pk = BigUint::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        ds = next;
    }
    ds.sort();
    Ok(ds)
}

/// Distinct rational roots of a squarefree polynomial.
fn rational_roots(p: &PolyQt) -> Result<Vec<Rational>> {
    let mut roots = Vec::new();
    let mut cur = p.clone();
    if cur.coeff(0).is_zero() {
        roots.push(Rational::zero());
        cur = cur.div_exact(&PolyQt::t()).unwrap();
    }
    if cur.deg() == 0 {
        return Ok(roots);
    }
    let cs = int_coeffs(&cur);
    let lead = cs.last().unwrap().magnitude().clone();
    let tail = cs[0].magnitude().clone();
    let nums = divisors(&tail)?;
    let dens = divisors(&lead)?;
    for n in &nums {
        for d in &dens {
            for sign in [1i64, -1] {
                let r = Rational::new(BigInt::from(n.clone()) * sign, BigInt::from(d.clone()));
                if roots.contains(&r) {
                    continue;
                }
                if cur.eval(&r).is_zero() {
                    roots.push(r);
                }
            }
        }
    }
    Ok(roots)
}

/// Split a squarefree, root-free monic polynomial into irreducibles.
fn kronecker(f: &PolyQt, out: &mut Vec<PolyQt>) -> Result<()> {
    let n = f.deg();
    if n <= 3 {
        // no rational roots, so irreducible
        out.push(f.clone());
        return Ok(());
    }
    if n > MAX_KRONECKER_DEGREE {
        return Err(Error::FactorizationRange(format!(
            "degree {n} factor {f} exceeds the interpolation search limit {MAX_KRONECKER_DEGREE}"
        )));
    }
    let prim = f.primitive_int();
    for k in 2..=n / 2 {
        if let Some(g) = find_factor(&prim, k)? {
            let h = f.div_exact(&g).expect("found factor divides");
            kronecker(&g, out)?;
            kronecker(&h, out)?;
            return Ok(());
        }
    }
    out.push(f.clone());
    Ok(())
}

/// Look for an integer factor of exact degree `k` of the primitive `p`.
fn find_factor(p: &PolyQt, k: usize) -> Result<Option<PolyQt>> {
    // evaluation points with the fewest divisors keep the search small
    let mut pts: Vec<(usize, i64, Vec<BigInt>)> = Vec::new();
    for x in -24i64..=24 {
        let v = p.eval(&int(x)).to_integer();
        if v.is_zero() {
            continue;
        }
        let ds = divisors(v.magnitude())?;
        let signed: Vec<BigInt> = ds
            .iter()
            .flat_map(|d| [BigInt::from(d.clone()), -BigInt::from(d.clone())])
            .collect();
        pts.push((signed.len(), x, signed));
    }
    pts.sort_by_key(|(n, x, _)| (*n, x.abs()));
    pts.truncate(k + 1);
    if pts.len() < k + 1 {
        return Ok(None);
    }
    let total: u64 = pts
        .iter()
        .map(|(n, _, _)| *n as u64)
        .try_fold(1u64, |acc, n| acc.checked_mul(n))
        .unwrap_or(u64::MAX);
    if total > KRONECKER_BUDGET {
        return Err(Error::FactorizationRange(format!(
            "interpolation search for {p} needs {total} candidates"
        )));
    }
    let xs: Vec<Rational> = pts.iter().map(|(_, x, _)| int(*x)).collect();
    let lead = p.lead();
    let mut idx = vec![0usize; k + 1];
    loop {
        // only positive first value: g and -g give the same factor
        if pts[0].2[idx[0]].is_positive() {
            let ys: Vec<Rational> = idx
                .iter()
                .zip(&pts)
                .map(|(&i, (_, _, ds))| Rational::from_integer(ds[i].clone()))
                .collect();
            let g = interpolate(&xs, &ys);
            if g.deg() == k
                && g.coeffs().iter().all(|c| c.is_integer())
                && (&lead / g.lead()).is_integer()
                && p.div_exact(&g).is_some()
            {
                return Ok(Some(g.monic()));
            }
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(None);
            }
            idx[pos] += 1;
            if idx[pos] < pts[pos].2.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Lagrange interpolation through `(xs[i], ys[i])`.
fn interpolate(xs: &[Rational], ys: &[Rational]) -> PolyQt {
    let mut acc = PolyQt::zero();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        let mut basis = PolyQt::constant(yi.clone());
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                let lin = PolyQt::linear(xj).scale(&(xi - xj).recip());
                basis = &basis * &lin;
            }
        }
        acc = &acc + &basis;
    }
    acc
}

/// Integer value if the rational fits an i64.
pub fn small_int(x: &Rational) -> Option<i64> {
    x.is_integer().then(|| x.to_integer().to_i64()).flatten()
}
