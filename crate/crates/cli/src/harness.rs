//! The experiments behind each subcommand. Every command returns a typed
//! report; rendering lives in `output`.

use std::collections::BTreeSet;

use hauteur_core::arith::{prime_support, rat_pow, weil_height, DEFAULT_TRIAL_CAP};
use hauteur_core::bottcher::{correction_data, CorrectionData};
use hauteur_core::divheight::{h_d, lambda_d};
use hauteur_core::ffheight::{divisor, is_preperiodic, DEFAULT_FF_CAP};
use hauteur_core::parse::{parse_dynpair, render_f, render_ratfunc};
use hauteur_core::real::{self, Real};
use hauteur_core::spec_height::{global_height, specialize, HeightCaps, DEFAULT_PADIC_CAP};
use hauteur_core::{
    ClosedPoint, DivisorResult, DynPair, Error, HeightPresentation, LogForm, PlaceQ, Rational,
    Result,
};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const SCHEMA: u32 = 1;

/// Sweep bound used to estimate the slack for `count`.
pub const COUNT_SLACK_BOUND: u64 = 25;

/// Largest enumeration box accepted by `count` before the result is marked partial.
pub const COUNT_MAX_BOX: u64 = 400;

/// The parsed pair with its divisor and height presentation.
pub struct Context {
    pub fp: DynPair,
    pub divisor: DivisorResult,
    /// `None` when `D(f, P) = 0`.
    pub hp: Option<HeightPresentation>,
}

impl Context {
    pub fn new(cfg: &RunConfig) -> Result<Context> {
        let fp = parse_dynpair(&cfg.f, &cfg.p)?;
        Context::from_pair(fp, cfg.ff_cap)
    }

    pub fn from_pair(fp: DynPair, ff_cap: usize) -> Result<Context> {
        let dr = divisor(&fp, ff_cap)?;
        let hp = if dr.divisor.is_zero() {
            None
        } else {
            Some(HeightPresentation::new(&dr.divisor, fp.d())?)
        };
        Ok(Context {
            fp,
            divisor: dr,
            hp,
        })
    }

    pub fn caps(&self, cfg: &RunConfig) -> HeightCaps {
        HeightCaps {
            arch: cfg.cap,
            padic: cfg.cap.min(DEFAULT_PADIC_CAP),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorEntry {
    pub place: String,
    pub multiplicity: String,
    pub escape_n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorReport {
    pub schema: u32,
    pub f: String,
    #[serde(rename = "P")]
    pub p: String,
    pub divisor: String,
    pub entries: Vec<DivisorEntry>,
    pub hhat: String,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub scale: Option<u64>,
    pub g: Option<String>,
    pub certified: bool,
    pub preperiodic: bool,
    pub note: Option<String>,
}

pub fn cmd_divisor(cfg: &RunConfig) -> Result<DivisorReport> {
    let ctx = Context::new(cfg)?;
    let dr = &ctx.divisor;
    let entries = dr
        .divisor
        .entries()
        .iter()
        .map(|(c, m)| DivisorEntry {
            place: c.to_string(),
            multiplicity: m.to_string(),
            escape_n: dr.escape_level(c),
        })
        .collect();
    let (preperiodic, note) = if dr.divisor.is_zero() {
        let pre = is_preperiodic(&ctx.fp, cfg.ff_cap.max(DEFAULT_FF_CAP))?;
        let note = if pre {
            "D = 0: P is preperiodic, so its canonical height is 0"
        } else {
            "D = 0: the canonical height of P is 0"
        };
        (pre, Some(note.to_string()))
    } else {
        (false, None)
    };
    Ok(DivisorReport {
        schema: SCHEMA,
        f: render_f(&ctx.fp),
        p: render_ratfunc(ctx.fp.point()),
        divisor: dr.divisor.to_string(),
        entries,
        hhat: dr.height().to_string(),
        n: ctx.hp.as_ref().map(|hp| hp.n),
        scale: ctx.hp.as_ref().map(|hp| hp.scale),
        g: ctx.hp.as_ref().map(|hp| hp.g.to_string()),
        certified: !dr.unverified,
        preperiodic,
        note,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceRecord {
    pub place: String,
    pub lambda_hat: f64,
    #[serde(rename = "lambda_D")]
    pub lambda_d: f64,
    pub escape_n: Option<usize>,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightRecord {
    pub schema: u32,
    pub t: String,
    pub hhat: f64,
    #[serde(rename = "hD")]
    pub h_d: f64,
    pub diff: f64,
    #[serde(rename = "hD_exact")]
    pub h_d_exact: String,
    pub flags: Vec<String>,
    pub places: Vec<PlaceRecord>,
}

impl HeightRecord {
    pub fn certified(&self) -> bool {
        !self.flags.iter().any(|f| f.starts_with("uncertified"))
    }
}

/// A height record with the difference kept in extended precision.
#[derive(Clone, Debug)]
pub struct HeightPoint {
    pub t: Rational,
    pub record: HeightRecord,
    pub diff: Real,
}

fn place_name(v: PlaceQ) -> String {
    match v {
        PlaceQ::Archimedean => "inf".into(),
        PlaceQ::Finite(p) => p.to_string(),
    }
}

/// `ĥ_{f_t}(P_t)`, `h_D(t)` and their difference at one parameter.
pub fn height_at(ctx: &Context, t0: &Rational, tol: f64, caps: HeightCaps) -> Result<HeightPoint> {
    let sys = specialize(&ctx.fp, t0)?;
    let gh = global_height(&sys, tol, caps)?;
    let mut flags = Vec::new();
    let support = ctx.hp.as_ref().is_some_and(|hp| hp.is_support_point(t0));
    let hd = match &ctx.hp {
        Some(hp) => h_d(hp, t0),
        None => LogForm::zero(),
    };
    if support {
        flags.push("support-point".to_string());
    }
    let mut places: Vec<PlaceRecord> = Vec::new();
    let mut seen = BTreeSet::new();
    for (v, r) in &gh.places {
        seen.insert(*v);
        if !r.settled() {
            flags.push(format!("uncertified:{}", place_name(*v)));
        }
        if r.preperiodic && !flags.iter().any(|f| f == "preperiodic") {
            flags.push("preperiodic".into());
        }
        if r.exact.is_none() {
            flags.push(format!("inexact:{}", place_name(*v)));
        }
        places.push(PlaceRecord {
            place: place_name(*v),
            lambda_hat: r.value,
            lambda_d: lambda_or_zero(ctx, *v, t0),
            escape_n: r.escape_n,
            certified: r.settled(),
        });
    }
    if let (Some(hp), false) = (&ctx.hp, support) {
        let gt = hp.g.eval(t0)?;
        for p in prime_support(&gt, DEFAULT_TRIAL_CAP)? {
            let v = PlaceQ::Finite(p);
            if seen.insert(v) {
                places.push(PlaceRecord {
                    place: place_name(v),
                    lambda_hat: 0.0,
                    lambda_d: lambda_or_zero(ctx, v, t0),
                    escape_n: None,
                    certified: true,
                });
            }
        }
    }
    let diff = (gh.exact.clone() - hd.clone()).to_real() + &gh.tail;
    let record = HeightRecord {
        schema: SCHEMA,
        t: t0.to_string(),
        hhat: gh.value,
        h_d: hd.to_f64(),
        diff: real::to_f64(&diff),
        h_d_exact: hd.to_string(),
        flags,
        places,
    };
    Ok(HeightPoint {
        t: t0.clone(),
        record,
        diff,
    })
}

fn lambda_or_zero(ctx: &Context, v: PlaceQ, t0: &Rational) -> f64 {
    match &ctx.hp {
        Some(hp) if !hp.is_support_point(t0) => {
            lambda_d(hp, v, t0).map(|l| l.to_f64()).unwrap_or(0.0)
        }
        _ => 0.0,
    }
}

/// Parameters that could not be evaluated, with the reason.
#[derive(Clone, Debug)]
pub struct Skipped {
    pub t: String,
    pub error: Error,
}

#[derive(Clone, Debug)]
pub struct HeightReport {
    pub points: Vec<HeightPoint>,
    pub skipped: Vec<Skipped>,
}

impl HeightReport {
    pub fn records(&self) -> impl Iterator<Item = &HeightRecord> {
        self.points.iter().map(|p| &p.record)
    }

    pub fn certified(&self) -> bool {
        self.records().all(HeightRecord::certified)
    }
}

fn evaluate(ctx: &Context, ts: &[Rational], cfg: &RunConfig) -> HeightReport {
    let caps = ctx.caps(cfg);
    let results: Vec<_> = ts
        .par_iter()
        .map(|t| (t, height_at(ctx, t, cfg.tol, caps)))
        .collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (t, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(error) => skipped.push(Skipped {
                t: t.to_string(),
                error,
            }),
        }
    }
    HeightReport { points, skipped }
}

pub fn cmd_height(cfg: &RunConfig) -> Result<HeightReport> {
    if cfg.t.is_empty() {
        return Err(Error::InvalidArgument(
            "height needs at least one --t value".into(),
        ));
    }
    let ctx = Context::new(cfg)?;
    Ok(evaluate(&ctx, &cfg.t, cfg))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub schema: u32,
    pub place: String,
    pub c: Option<String>,
    pub scale: Option<u64>,
    pub coefficients: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SeriesReport {
    pub records: Vec<SeriesRecord>,
    pub corrections: Vec<CorrectionData>,
}

pub fn cmd_series(cfg: &RunConfig) -> Result<SeriesReport> {
    let ctx = Context::new(cfg)?;
    let Some(hp) = &ctx.hp else {
        return Err(Error::InvalidArgument(
            "D(f, P) = 0, so there are no support points to expand at".into(),
        ));
    };
    let mut records = Vec::new();
    let mut corrections = Vec::new();
    for c in hp.divisor.entries().keys() {
        match correction_data(&ctx.fp, c, hp, cfg.order) {
            Ok(cd) => {
                records.push(SeriesRecord {
                    schema: SCHEMA,
                    place: c.to_string(),
                    c: Some(cd.c.to_string()),
                    scale: Some(cd.scale),
                    coefficients: cd
                        .coefficients(cfg.order)
                        .iter()
                        .map(|q| q.to_string())
                        .collect(),
                    error: None,
                });
                corrections.push(cd);
            }
            Err(e @ (Error::ExtensionFieldRequired(_) | Error::NoRationalBranch(_))) => {
                records.push(SeriesRecord {
                    schema: SCHEMA,
                    place: c.to_string(),
                    c: None,
                    scale: None,
                    coefficients: Vec::new(),
                    error: Some(format!("[{}] {e}", e.module())),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SeriesReport {
        records,
        corrections,
    })
}

/// Reduced fractions `a/b` with `|a| <= h`, `1 <= b <= h`, ordered by `(b, a)`.
pub fn rationals_up_to(h: u64) -> Vec<Rational> {
    let h = h as i64;
    let mut out = Vec::new();
    for b in 1..=h {
        for a in -h..=h {
            if a.gcd(&b) == 1 || (a == 0 && b == 1) {
                out.push(Rational::new(a.into(), b.into()));
            }
        }
    }
    out
}

/// `max(|a|, b)` for `t = a/b`.
pub fn naive_size(t: &Rational) -> u64 {
    t.numer()
        .abs()
        .max(t.denom().clone())
        .to_u64()
        .unwrap_or(u64::MAX)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema: u32,
    pub bound: u64,
    pub evaluated: usize,
    pub skipped: usize,
    pub max_abs_diff: f64,
    pub argmax: Option<String>,
    pub uncertified: usize,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub heights: HeightReport,
    pub summary: SweepSummary,
}

impl SweepReport {
    /// `max |diff|` over the records with `max(|a|, b) <= h`.
    pub fn max_abs_diff_within(&self, h: u64) -> f64 {
        self.heights
            .points
            .iter()
            .filter(|p| naive_size(&p.t) <= h)
            .map(|p| p.record.diff.abs())
            .fold(0.0, f64::max)
    }
}

fn summarize(bound: u64, heights: &HeightReport) -> SweepSummary {
    let mut max = 0.0;
    let mut argmax = None;
    for p in &heights.points {
        if p.record.diff.abs() > max {
            max = p.record.diff.abs();
            argmax = Some(p.record.t.clone());
        }
    }
    SweepSummary {
        schema: SCHEMA,
        bound,
        evaluated: heights.points.len(),
        skipped: heights.skipped.len(),
        max_abs_diff: max,
        argmax,
        uncertified: heights.records().filter(|r| !r.certified()).count(),
    }
}

pub fn sweep(ctx: &Context, bound: u64, cfg: &RunConfig) -> SweepReport {
    let heights = evaluate(ctx, &rationals_up_to(bound), cfg);
    let summary = summarize(bound, &heights);
    SweepReport { heights, summary }
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepReport> {
    let bound = cfg
        .bound
        .ok_or_else(|| Error::InvalidArgument("sweep needs --bound H".into()))?;
    if bound < 2 {
        return Err(Error::InvalidArgument(format!("sweep bound {bound} < 2")));
    }
    let ctx = Context::new(cfg)?;
    Ok(sweep(&ctx, bound, cfg))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub schema: u32,
    #[serde(rename = "B")]
    pub b: f64,
    pub count: u64,
    pub log_count_over_b: f64,
    /// Enumeration box `max(|a|, b) <= box_bound`.
    pub box_bound: u64,
    pub slack: f64,
    pub candidates: usize,
    pub skipped: usize,
    pub uncertified: usize,
    pub partial: bool,
}

/// Counts `t` with `ĥ_{f_t}(P_t) <= B`.
///
/// Candidates are the rationals with `h_D(t) <= B + slack`, where the slack
/// is the largest `|ĥ - h_D|` seen on a sweep of height `COUNT_SLACK_BOUND`.
/// The box enumerated is wide enough for those candidates by the same
/// empirical comparison between `h_D(t)` and `deg(D) h(t)`.
pub fn cmd_count(cfg: &RunConfig) -> Result<CountReport> {
    let b = cfg
        .count_b
        .ok_or_else(|| Error::InvalidArgument("count needs --B X".into()))?;
    if b <= 0.0 {
        return Err(Error::InvalidArgument(format!("B = {b} must be positive")));
    }
    let ctx = Context::new(cfg)?;
    let Some(hp) = &ctx.hp else {
        return Err(Error::InvalidArgument(
            "ĥ_f(P)=0: D(f, P) = 0, so the count is not finite".into(),
        ));
    };
    let deg = ctx.divisor.height().to_f64().unwrap_or(f64::NAN);
    let pre = sweep(&ctx, COUNT_SLACK_BOUND, cfg);
    let slack = pre.summary.max_abs_diff;
    let slack_g = pre
        .heights
        .points
        .iter()
        .map(|p| (p.record.h_d - deg * weil_height(&p.t).to_f64()).abs())
        .fold(0.0, f64::max);
    let eps = 1e-9;
    let want = ((b + slack + slack_g) / deg).exp() + eps;
    let partial = want > COUNT_MAX_BOX as f64;
    let box_bound = (want.floor() as u64).clamp(1, COUNT_MAX_BOX);
    let candidates: Vec<Rational> = rationals_up_to(box_bound)
        .into_iter()
        .filter(|t| {
            if hp.is_support_point(t) {
                return true;
            }
            h_d(hp, t).to_f64() <= b + slack + eps
        })
        .collect();
    let heights = evaluate(&ctx, &candidates, cfg);
    let count = heights.records().filter(|r| r.hhat <= b + eps).count() as u64;
    Ok(CountReport {
        schema: SCHEMA,
        b,
        count,
        log_count_over_b: (count as f64).ln() / b,
        box_bound,
        slack,
        candidates: candidates.len(),
        skipped: heights.skipped.len(),
        uncertified: heights.records().filter(|r| !r.certified()).count(),
        partial,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: Option<bool>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: Option<bool>, detail: String) -> Check {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Parameters used by `verify` when no `--t` is given.
pub const VERIFY_POINTS: [i64; 4] = [10, 20, 50, 100];

/// Self-checks for one pair: the functional equation of the divisor, the
/// correction data, and agreement of specialized heights with the series
/// at large integer parameters when the family is integral and monic.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Vec<Check>> {
    let ctx = Context::new(cfg)?;
    let mut checks = Vec::new();
    let d = ctx.fp.d() as i64;

    let image = ctx.fp.with_point(ctx.fp.apply(ctx.fp.point()));
    let di = divisor(&image, cfg.ff_cap)?;
    let lhs = di.height();
    let rhs = ctx.divisor.height() * Rational::from_integer(d.into());
    checks.push(Check::new(
        "divisor functional equation",
        Some(lhs == rhs),
        format!("deg D(f(P)) = {lhs}, d deg D(P) = {rhs}"),
    ));

    let Some(hp) = &ctx.hp else {
        checks.push(Check::new("correction series", None, "D = 0".into()));
        return Ok(checks);
    };
    let mut corrections = Vec::new();
    for c in hp.divisor.entries().keys() {
        match correction_data(&ctx.fp, c, hp, cfg.order) {
            Ok(cd) => {
                let ok = cd.fseries.coeff(0).is_some_and(|x| x.is_zero()) && !cd.c.is_zero();
                checks.push(Check::new(
                    &format!("correction at {c}"),
                    Some(ok),
                    format!("c = {}, F(0) = 0", cd.c),
                ));
                corrections.push(cd);
            }
            Err(e) => checks.push(Check::new(
                &format!("correction at {c}"),
                None,
                e.to_string(),
            )),
        }
    }

    let integral = ctx.fp.is_monic_polynomial()
        && ctx.fp.point().is_polynomial()
        && ctx
            .fp
            .coeffs()
            .iter()
            .chain(std::iter::once(ctx.fp.point()))
            .all(|a| a.num().coeffs().iter().all(|q| q.is_integer()));
    let only_infinity = hp.divisor.entries().len() == 1
        && hp.divisor.entries().contains_key(&ClosedPoint::Infinity);
    let at_inf = corrections
        .iter()
        .find(|cd| cd.place == ClosedPoint::Infinity);
    match (integral && only_infinity, at_inf) {
        (true, Some(cd)) => {
            let ts: Vec<Rational> = if cfg.t.is_empty() {
                VERIFY_POINTS
                    .iter()
                    .map(|&t| Rational::from_integer(t.into()))
                    .collect()
            } else {
                cfg.t.clone()
            };
            for t in ts {
                checks.push(series_check(&ctx, cd, &t, cfg)?);
            }
        }
        _ => checks.push(Check::new(
            "series vs specialized heights",
            None,
            "needs a monic integral family with D supported at infinity".into(),
        )),
    }
    Ok(checks)
}

/// `(1/scale) log|c| + F(1/t)`, the predicted difference near infinity.
pub fn series_prediction(cd: &CorrectionData, t: &Rational) -> Real {
    let w = t.recip();
    let f = cd.fseries.eval(&w);
    real::from_rational(&f) + cd.log_constant(PlaceQ::Archimedean).to_real()
}

/// The truncation bound `2 |a_K| |t|^-(K+1)` for an order-`K` series.
pub fn truncation_bound(cd: &CorrectionData, order: usize, t: &Rational) -> f64 {
    let a = cd.fseries.coeff(order as i64).unwrap_or_default();
    let w = t.recip().abs();
    let bound = Rational::from_integer(2.into()) * a.abs() * rat_pow(&w, order as i64 + 1);
    bound.to_f64().unwrap_or(f64::INFINITY)
}

fn series_check(
    ctx: &Context,
    cd: &CorrectionData,
    t: &Rational,
    cfg: &RunConfig,
) -> Result<Check> {
    let name = format!("series vs height at t = {t}");
    if t.abs() < Rational::from_integer(10.into()) || !t.is_integer() {
        return Ok(Check::new(&name, None, "needs an integer |t| >= 10".into()));
    }
    let hp = height_at(ctx, t, cfg.tol, ctx.caps(cfg))?;
    let pred = series_prediction(cd, t);
    let err = real::to_f64(&real::abs(&(hp.diff.clone() - pred)));
    let bound = truncation_bound(cd, cfg.order, t) + cfg.tol;
    Ok(Check::new(
        &name,
        Some(err <= bound),
        format!("|diff - F(1/t)| = {err:.3e}, bound {bound:.3e}"),
    ))
}
