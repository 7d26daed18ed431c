//! Markov, Cantelli and Chebyshev-type tail bounds for lower and upper
//! previsions, plus Walley's lower and upper variance.
//!
//! The scalar functions take already-computed previsions. The `*_for`
//! variants and the Cantelli functions read an [`Assessment`], compute the
//! previsions by natural extension, and attach the event indicator to the
//! report so the oracle can certify it.

use serde::Serialize;

use crate::consistency::{check_coherence, natural_extension, upper_extension, CredalPolytope};
use crate::error::{Error, Result};
use crate::gamble::{Assessment, Gamble};
use crate::report::{Bound, Direction, Quantity, Target};

/// Golden-section search stops once the bracket on `c` is this narrow.
pub const GOLDEN_BRACKET: f64 = 1e-9;
/// Second moments at or below this are treated as zero; they arise as LP
/// rounding on degenerate gambles.
pub const SPREAD_FLOOR: f64 = 1e-12;
/// Tolerance of [`cauchy_like_check`].
pub const CAUCHY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailRule {
    MarkovLower,
    MarkovUpper,
    CantelliPrecise,
    CantelliAsl,
    CantelliCohUv,
    CantelliCohLv,
    CantelliConjugate,
    ChebyshevLike,
}

impl TailRule {
    /// Stable identifier, as serialized.
    pub fn id(self) -> &'static str {
        match self {
            TailRule::MarkovLower => "markov-lower",
            TailRule::MarkovUpper => "markov-upper",
            TailRule::CantelliPrecise => "cantelli-precise",
            TailRule::CantelliAsl => "cantelli-asl",
            TailRule::CantelliCohUv => "cantelli-coh-uv",
            TailRule::CantelliCohLv => "cantelli-coh-lv",
            TailRule::CantelliConjugate => "cantelli-conjugate",
            TailRule::ChebyshevLike => "chebyshev-like",
        }
    }
}

/// Weakest consistency notion under which a bound is proved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Requirement {
    #[serde(rename = "ASL")]
    Asl,
    #[serde(rename = "2-coherence")]
    TwoCoherence,
    #[serde(rename = "coherence")]
    Coherence,
    #[serde(rename = "dF-coherence")]
    DfCoherence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailBoundReport {
    pub event: Target,
    pub threshold: f64,
    /// Clamped to `[0, 1]`.
    pub bound: f64,
    /// The formula's value before clamping.
    pub raw: f64,
    pub vacuous: bool,
    pub direction: Direction,
    pub inequality_id: TailRule,
    pub consistency_required: Requirement,
    pub assumptions_checked: Vec<String>,
}

impl TailBoundReport {
    fn new(event: Target, threshold: f64, raw: f64, direction: Direction, rule: TailRule, req: Requirement) -> Self {
        let bound = raw.clamp(0.0, 1.0);
        let vacuous = bound != raw
            || match direction {
                Direction::AtMost => bound >= 1.0,
                Direction::AtLeast => bound <= 0.0,
            };
        TailBoundReport {
            event,
            threshold,
            bound,
            raw,
            vacuous,
            direction,
            inequality_id: rule,
            consistency_required: req,
            assumptions_checked: Vec::new(),
        }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.assumptions_checked.push(s.into());
        self
    }

    fn with_indicator(mut self, ind: &Gamble) -> Self {
        self.event = self.event.with_values(ind);
        self
    }
}

impl Bound for TailBoundReport {
    fn target(&self) -> &Target {
        &self.event
    }
    fn direction(&self) -> Direction {
        self.direction
    }
    fn bound(&self) -> Option<f64> {
        Some(self.bound)
    }
    fn rule(&self) -> String {
        self.inequality_id.id().to_string()
    }
}

fn positive_threshold(a: f64) -> Result<()> {
    if a > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveThreshold(a))
    }
}

fn positive_eps(eps: f64) -> Result<()> {
    if eps > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveEpsilon(eps))
    }
}

fn cantelli_ratio(v: f64, eps: f64) -> f64 {
    v / (v + eps * eps)
}

fn markov(value: f64, a: f64, nonneg: bool, quantity: Quantity, rule: TailRule) -> Result<TailBoundReport> {
    positive_threshold(a)?;
    if !nonneg {
        return Err(Error::NegativityFlagMissing);
    }
    if value < 0.0 {
        return Err(Error::NegativeArgument(value));
    }
    Ok(TailBoundReport::new(
        Target::new(quantity, format!("X >= {a}")),
        a,
        value / a,
        Direction::AtMost,
        rule,
        Requirement::TwoCoherence,
    )
    .note("X >= 0"))
}

/// `lpr(X >= a) <= lpr(X) / a` for `X >= 0`.
pub fn markov_lower(lpr_x: f64, a: f64, nonneg: bool) -> Result<TailBoundReport> {
    markov(lpr_x, a, nonneg, Quantity::Lower, TailRule::MarkovLower)
}

/// `upr(X >= a) <= upr(X) / a` for `X >= 0`.
pub fn markov_upper(upr_x: f64, a: f64, nonneg: bool) -> Result<TailBoundReport> {
    markov(upr_x, a, nonneg, Quantity::Upper, TailRule::MarkovUpper)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// Markov's bound on the lower or upper probability of `X >= a`, with the
/// event attached.
pub fn markov_for(a: &Assessment, x_name: &str, threshold: f64, side: Side) -> Result<TailBoundReport> {
    let x = &a.gamble(x_name)?;
    if !x.is_nonnegative() {
        return Err(Error::NotNonnegative);
    }
    let r = match side {
        Side::Lower => markov_lower(natural_extension(a, x)?, threshold, true)?,
        Side::Upper => markov_upper(upper_extension(a, x)?, threshold, true)?,
    };
    let mut r = r.with_indicator(&x.indicator_ge(threshold));
    r.event.of = format!("{x_name} >= {threshold}");
    Ok(r)
}

/// Cantelli's two one-sided bounds for a linear prevision with `P(X) = 0`:
/// `P(X <= -eps)` and `P(X >= eps)`, both at most `P(X^2) / (P(X^2) + eps^2)`.
pub fn cantelli_precise(p_x2: f64, eps: f64, p_x_zero: bool) -> Result<(TailBoundReport, TailBoundReport)> {
    positive_eps(eps)?;
    if p_x2 < 0.0 {
        return Err(Error::NegativeArgument(p_x2));
    }
    let raw = cantelli_ratio(p_x2, eps);
    let mk = |of: String, threshold: f64| {
        TailBoundReport::new(
            Target::new(Quantity::Precise, of),
            threshold,
            raw,
            Direction::AtMost,
            TailRule::CantelliPrecise,
            Requirement::DfCoherence,
        )
        .note(format!("P(X) = 0 asserted: {p_x_zero}"))
    };
    Ok((mk(format!("X <= {}", -eps), -eps), mk(format!("X >= {eps}"), eps)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Below,
    Above,
}

/// How far from the center the event starts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Epsilon {
    Value(f64),
    /// `k` times the square root of the upper second moment about the center.
    Sigmas(f64),
}

/// Cantelli's bound for an assessment that only avoids sure loss, provided
/// some dominating prevision has mean `c`.
pub fn cantelli_imprecise(a: &Assessment, x_name: &str, c: f64, eps: Epsilon, side: Tail) -> Result<TailBoundReport> {
    let x = &a.gamble(x_name)?;
    if CredalPolytope::new(a).with_mean(x.clone(), c)?.is_empty()? {
        return Err(Error::EmptyConstrainedCredalSet { c });
    }
    let dev2 = x.map(|v| (v - c) * (v - c));
    let u = upper_extension(a, &dev2)?;
    let u = if u <= SPREAD_FLOOR { 0.0 } else { u };
    let (eps, raw) = match eps {
        Epsilon::Value(e) => {
            positive_eps(e)?;
            (e, cantelli_ratio(u, e))
        }
        Epsilon::Sigmas(k) => {
            let e = k * u.sqrt();
            positive_eps(e)?;
            // u / (u + k²u) reduces to 1 / (1 + k²)
            (e, 1.0 / (1.0 + k * k))
        }
    };
    let (threshold, ind, of) = match side {
        Tail::Below => (c - eps, x.indicator_le(c - eps), format!("{x_name} <= {}", c - eps)),
        Tail::Above => (c + eps, x.indicator_ge(c + eps), format!("{x_name} >= {}", c + eps)),
    };
    Ok(TailBoundReport::new(
        Target::new(Quantity::Lower, of),
        threshold,
        raw,
        Direction::AtMost,
        TailRule::CantelliAsl,
        Requirement::Asl,
    )
    .note(format!("credal set with E({x_name}) = {c} is non-empty"))
    .note(format!("upr(({x_name} - {c})^2) = {u}, eps = {eps}"))
    .with_indicator(&ind))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub lower_variance: f64,
    pub upper_variance: f64,
    /// Mean of the witness, where `lpr((X-c)^2)` is minimal.
    pub argmin_c_lower: f64,
    pub argmin_c_upper: f64,
    pub witness_p1: Vec<f64>,
    pub coherent: bool,
    pub method_notes: String,
}

fn variance_at(x: &Gamble, p: &[f64]) -> f64 {
    let m = x.expectation(p);
    let v: f64 = x.values().iter().zip(p).map(|(xi, pi)| pi * (xi - m) * (xi - m)).sum();
    v.max(0.0)
}

/// Minimizes a convex function on `[lo, hi]` by golden-section search.
/// Returns the best point seen and its value.
pub fn golden_section(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d)?;
        }
        for (x, fx) in [(c, fc), (d, fd)] {
            if fx < best.1 {
                best = (x, fx);
            }
        }
    }
    for x in [lo, hi, (a + b) / 2.0] {
        let fx = f(x)?;
        if fx < best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}

/// Walley's lower and upper variance of `x_name` over the credal set.
pub fn variances(a: &Assessment, x_name: &str) -> Result<VarianceReport> {
    let x = &a.gamble(x_name)?;
    let poly = CredalPolytope::new(a);
    let vertices = poly.vertices()?;
    let (witness, lvx) = vertices
        .iter()
        .map(|p| (p, variance_at(x, p)))
        .min_by(|l, r| l.1.total_cmp(&r.1))
        .ok_or(Error::EmptyCredalSet)?;
    let (inf, sup) = x.bounds();
    let (c_up, uvx) = if sup > inf {
        golden_section(
            |c| upper_extension(a, &x.map(|v| (v - c) * (v - c))),
            inf,
            sup,
            GOLDEN_BRACKET,
        )?
    } else {
        (inf, 0.0)
    };
    let coherent = check_coherence(a)?.pass;
    let mut notes = format!(
        "lower variance: minimum over {} credal vertices; upper variance: golden section on c in [{inf}, {sup}]",
        vertices.len()
    );
    if !coherent {
        notes.push_str("; assessment is not coherent, variances computed on its credal set");
    }
    Ok(VarianceReport {
        lower_variance: lvx,
        upper_variance: uvx.max(lvx),
        argmin_c_lower: x.expectation(witness),
        argmin_c_upper: c_up,
        witness_p1: witness.clone(),
        coherent,
        method_notes: notes,
    })
}

/// The four coherent Cantelli bounds, around `upr(X)` and `lpr(X)` below and
/// `lpr(X)` and `upr(X)` above.
pub fn cantelli_coherent(a: &Assessment, x_name: &str, eps: f64) -> Result<Vec<TailBoundReport>> {
    let vr = variances(a, x_name)?;
    cantelli_coherent_with(a, x_name, eps, &vr)
}

/// [`cantelli_coherent`] with the variances already computed.
pub fn cantelli_coherent_with(
    a: &Assessment,
    x_name: &str,
    eps: f64,
    vr: &VarianceReport,
) -> Result<Vec<TailBoundReport>> {
    positive_eps(eps)?;
    let x = &a.gamble(x_name)?;
    let lpr_x = natural_extension(a, x)?;
    let upr_x = upper_extension(a, x)?;
    let uv = cantelli_ratio(vr.upper_variance, eps);
    let lv = cantelli_ratio(vr.lower_variance, eps);
    let cases = [
        (Tail::Below, upr_x - eps, uv, TailRule::CantelliCohUv),
        (Tail::Below, lpr_x - eps, lv, TailRule::CantelliCohLv),
        (Tail::Above, lpr_x + eps, uv, TailRule::CantelliCohUv),
        (Tail::Above, upr_x + eps, lv, TailRule::CantelliCohLv),
    ];
    Ok(cases
        .into_iter()
        .map(|(tail, t, raw, rule)| {
            let (ind, of) = match tail {
                Tail::Below => (x.indicator_le(t), format!("{x_name} <= {t}")),
                Tail::Above => (x.indicator_ge(t), format!("{x_name} >= {t}")),
            };
            let mut r = TailBoundReport::new(
                Target::new(Quantity::Lower, of),
                t,
                raw,
                Direction::AtMost,
                rule,
                Requirement::Coherence,
            )
            .note(format!("lpr({x_name}) = {lpr_x}, upr({x_name}) = {upr_x}"))
            .with_indicator(&ind);
            if !vr.coherent {
                r = r.note("assessment is not coherent");
            }
            r
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub delta: f64,
    pub eps2: f64,
    pub eps: f64,
    /// `"cantelli"` when `eps > eps2`, otherwise `"markov"`.
    pub preferred_for_eps: String,
    pub markov_bound: f64,
    pub cantelli_bound: f64,
    /// `eps * lpr(X) < lvx`, which is enough for Markov to win.
    pub markov_sufficient: bool,
}

/// Markov at `a = upr(X) + eps` against the lower-variance Cantelli bound on
/// `lpr(X >= upr(X) + eps)`.
pub fn compare_markov_cantelli(lpr_x: f64, upr_x: f64, lvx: f64, eps: f64, nonneg: bool) -> Result<ComparisonReport> {
    if !nonneg {
        return Err(Error::NegativityFlagMissing);
    }
    positive_eps(eps)?;
    if lpr_x == 0.0 {
        return Err(Error::ZeroLowerPrevision);
    }
    if lpr_x < 0.0 || lvx < 0.0 {
        return Err(Error::NegativeArgument(lpr_x.min(lvx)));
    }
    if lpr_x > upr_x {
        return Err(Error::ConjugacyViolation {
            lower: lpr_x,
            upper: upr_x,
        });
    }
    let delta = lvx * (lvx + 4.0 * lpr_x * (upr_x - lpr_x));
    let eps2 = (lvx + delta.sqrt()) / (2.0 * lpr_x);
    let preferred = if eps > eps2 { "cantelli" } else { "markov" };
    Ok(ComparisonReport {
        delta,
        eps2,
        eps,
        preferred_for_eps: preferred.into(),
        markov_bound: lpr_x / (upr_x + eps),
        cantelli_bound: cantelli_ratio(lvx, eps),
        markov_sufficient: eps * lpr_x < lvx,
    })
}

/// `upr(X >= lpr(X) - eps) >= eps^2 / (lvx + eps^2)`.
pub fn conjugate_cantelli(lvx: f64, eps: f64) -> Result<TailBoundReport> {
    positive_eps(eps)?;
    if lvx < 0.0 {
        return Err(Error::NegativeArgument(lvx));
    }
    Ok(TailBoundReport::new(
        Target::new(Quantity::Upper, format!("X >= lpr(X) - {eps}")),
        eps,
        eps * eps / (lvx + eps * eps),
        Direction::AtLeast,
        TailRule::CantelliConjugate,
        Requirement::Coherence,
    ))
}

pub fn conjugate_cantelli_for(a: &Assessment, x_name: &str, eps: f64, vr: &VarianceReport) -> Result<TailBoundReport> {
    let x = &a.gamble(x_name)?;
    let t = natural_extension(a, x)? - eps;
    let mut r = conjugate_cantelli(vr.lower_variance, eps)?
        .with_indicator(&x.indicator_ge(t))
        .note(format!("lower variance {}", vr.lower_variance));
    r.threshold = t;
    r.event.of = format!("{x_name} >= {t}");
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Center {
    Lower,
    Upper,
}

/// `upr(|X - center| >= b) <= upr((X - center)^2) / b^2`.
pub fn chebyshev_like(dev2_upper: f64, b: f64, center: Center) -> Result<TailBoundReport> {
    positive_threshold(b)?;
    if dev2_upper < 0.0 {
        return Err(Error::NegativeArgument(dev2_upper));
    }
    let c = match center {
        Center::Lower => "lpr(X)",
        Center::Upper => "upr(X)",
    };
    Ok(TailBoundReport::new(
        Target::new(Quantity::Upper, format!("|X - {c}| >= {b}")),
        b,
        dev2_upper / (b * b),
        Direction::AtMost,
        TailRule::ChebyshevLike,
        Requirement::TwoCoherence,
    ))
}

pub fn chebyshev_for(a: &Assessment, x_name: &str, b: f64, center: Center) -> Result<TailBoundReport> {
    let x = &a.gamble(x_name)?;
    let c = match center {
        Center::Lower => natural_extension(a, x)?,
        Center::Upper => upper_extension(a, x)?,
    };
    let dev2 = upper_extension(a, &x.map(|v| (v - c) * (v - c)))?;
    let ind = x.map(|v| if (v - c).abs() >= b { 1.0 } else { 0.0 });
    let mut r = chebyshev_like(dev2, b, center)?
        .with_indicator(&ind)
        .note(format!("center {c}, upr((X - c)^2) = {dev2}"));
    r.event.of = format!("|{x_name} - {c}| >= {b}");
    Ok(r)
}

/// `E(I_A g)^2 <= P(A) E(I_A g^2)` with `A = (g > 0)`.
pub fn cauchy_like_check(p: &[f64], g: &Gamble) -> bool {
    let (mut s1, mut pa, mut s2) = (0.0, 0.0, 0.0);
    for (&pi, &v) in p.iter().zip(g.values()) {
        if v > 0.0 {
            s1 += pi * v;
            pa += pi;
            s2 += pi * v * v;
        }
    }
    s1 * s1 <= pa * s2 + CAUCHY_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamble::Partition;
    use approx::assert_abs_diff_eq;

    fn three() -> Partition {
        Partition::numbered(3).unwrap()
    }

    fn x_three() -> Gamble {
        Gamble::new(&three(), vec![-1.0, 1.0, 2.0]).unwrap()
    }

    fn three_atoms() -> Assessment {
        Assessment::new(&three()).with_lower("X", x_three(), 0.75).unwrap()
    }

    #[test]
    fn markov_examples() {
        assert_eq!(markov_lower(0.75, 3.0, true).unwrap().bound, 0.25);
        assert_eq!(markov_lower(0.0, 3.0, true).unwrap().bound, 0.0);
        let v = markov_lower(2.0, 1.0, true).unwrap();
        assert!(v.vacuous && v.bound == 1.0 && v.raw == 2.0);
        assert_eq!(markov_upper(120.0, 150.0, true).unwrap().bound, 0.8);
        assert_eq!(markov_upper(0.0, 150.0, true).unwrap().bound, 0.0);
        let v = markov_upper(3.0, 3.0, true).unwrap();
        assert!(v.vacuous && v.bound == 1.0);
        assert_eq!(markov_lower(1.0, 0.0, true), Err(Error::NonPositiveThreshold(0.0)));
        assert_eq!(markov_lower(1.0, 1.0, false), Err(Error::NegativityFlagMissing));
        assert_eq!(
            markov_upper(120.0, 150.0, true).unwrap().consistency_required,
            Requirement::TwoCoherence
        );
    }

    #[test]
    fn markov_for_attaches_event() {
        let p = three();
        let x = Gamble::new(&p, vec![0.0, 1.0, 4.0]).unwrap();
        let a = Assessment::new(&p).with_lower("X", x, 0.75).unwrap();
        let r = markov_for(&a, "X", 3.0, Side::Lower).unwrap();
        assert_eq!(r.bound, 0.25);
        assert_eq!(r.event.values.as_deref(), Some(&[0.0, 0.0, 1.0][..]));
        assert_eq!(
            markov_for(&three_atoms(), "X", 3.0, Side::Lower),
            Err(Error::NotNonnegative)
        );
    }

    #[test]
    fn cantelli_precise_examples() {
        assert_eq!(cantelli_precise(0.0, 1.0, true).unwrap().0.bound, 0.0);
        assert_eq!(cantelli_precise(4.0, 2.0, true).unwrap().1.bound, 0.5);
        assert_eq!(cantelli_precise(1.0, 3.0, true).unwrap().0.bound, 0.1);
        assert_eq!(
            cantelli_precise(1.0, 0.0, true).unwrap_err(),
            Error::NonPositiveEpsilon(0.0)
        );
    }

    #[test]
    fn cantelli_imprecise_three_sigma() {
        let r = cantelli_imprecise(&three_atoms(), "X", 0.75, Epsilon::Sigmas(3.0), Tail::Below).unwrap();
        assert_eq!(r.bound, 0.1);
        assert_eq!(r.consistency_required, Requirement::Asl);
    }

    #[test]
    fn cantelli_imprecise_degenerate_and_empty() {
        let p = three();
        let c = Gamble::constant(&p, 2.0).unwrap();
        let a = Assessment::new(&p).with_lower("X", c, 2.0).unwrap();
        assert_eq!(
            cantelli_imprecise(&a, "X", 2.0, Epsilon::Value(0.5), Tail::Below)
                .unwrap()
                .bound,
            0.0
        );
        assert_eq!(
            cantelli_imprecise(&three_atoms(), "X", 3.0, Epsilon::Value(1.0), Tail::Below),
            Err(Error::EmptyConstrainedCredalSet { c: 3.0 })
        );
    }

    #[test]
    fn variances_three_atoms() {
        let vr = variances(&three_atoms(), "X").unwrap();
        assert_abs_diff_eq!(vr.lower_variance, 0.0, epsilon = 1e-12);
        assert!(vr.coherent);
        assert!(vr.upper_variance >= vr.lower_variance);
    }

    #[test]
    fn variances_precise_uniform() {
        let p = three();
        let a = Assessment::precise(&p, &[1.0 / 3.0; 3])
            .unwrap()
            .with_gamble("X", x_three())
            .unwrap();
        let vr = variances(&a, "X").unwrap();
        assert_abs_diff_eq!(vr.lower_variance, 14.0 / 9.0, epsilon = 1e-9);
        assert_abs_diff_eq!(vr.upper_variance, 14.0 / 9.0, epsilon = 1e-9);
    }

    #[test]
    fn variances_constant() {
        let p = three();
        let a = Assessment::new(&p)
            .with_lower("X", Gamble::constant(&p, 5.0).unwrap(), 5.0)
            .unwrap();
        let vr = variances(&a, "X").unwrap();
        assert_eq!((vr.lower_variance, vr.upper_variance), (0.0, 0.0));
    }

    #[test]
    fn cantelli_coherent_three_atoms() {
        let rs = cantelli_coherent(&three_atoms(), "X", 0.5).unwrap();
        assert_eq!(rs.len(), 4);
        assert_eq!(rs[1].inequality_id, TailRule::CantelliCohLv);
        assert_abs_diff_eq!(rs[1].bound, 0.0, epsilon = 1e-12);
        for r in cantelli_coherent(&three_atoms(), "X", 1e9).unwrap() {
            assert!(r.bound < 1e-12);
        }
    }

    #[test]
    fn precise_collapse() {
        let p = three();
        let probs = [0.2, 0.5, 0.3];
        let a = Assessment::precise(&p, &probs)
            .unwrap()
            .with_gamble("X", x_three())
            .unwrap();
        let m = x_three().expectation(&probs);
        let v = variance_at(&x_three(), &probs);
        for eps in [0.1, 0.7, 2.5] {
            let prec = cantelli_precise(v, eps, true).unwrap().0.bound;
            for r in cantelli_coherent(&a, "X", eps).unwrap() {
                assert_abs_diff_eq!(r.bound, prec, epsilon = 1e-12);
            }
            let rs = cantelli_coherent(&a, "X", eps).unwrap();
            assert_abs_diff_eq!(rs[1].threshold, m - eps, epsilon = 1e-12);
        }
    }

    #[test]
    fn comparison_examples() {
        let r = compare_markov_cantelli(1.0, 2.0, 0.0, 0.3, true).unwrap();
        assert_eq!((r.delta, r.eps2, r.cantelli_bound), (0.0, 0.0, 0.0));
        assert_eq!(r.preferred_for_eps, "cantelli");

        let r = compare_markov_cantelli(1.0, 1.0, 1.0, 1.0, true).unwrap();
        assert_eq!((r.delta, r.eps2), (1.0, 1.0));
        assert_eq!((r.markov_bound, r.cantelli_bound), (0.5, 0.5));

        let r = compare_markov_cantelli(1.0, 2.0, 1.0, 0.5, true).unwrap();
        assert!(r.markov_sufficient);
        assert_eq!(r.preferred_for_eps, "markov");
        assert_abs_diff_eq!(r.markov_bound, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(r.cantelli_bound, 0.8, epsilon = 1e-15);

        assert_eq!(
            compare_markov_cantelli(0.0, 1.0, 1.0, 1.0, true),
            Err(Error::ZeroLowerPrevision)
        );
    }

    #[test]
    fn conjugate_and_chebyshev_examples() {
        assert_eq!(conjugate_cantelli(0.0, 0.4).unwrap().bound, 1.0);
        assert_eq!(conjugate_cantelli(0.25, 0.5).unwrap().bound, 0.5);
        assert_eq!(chebyshev_like(0.0, 1.0, Center::Lower).unwrap().bound, 0.0);
        let v = chebyshev_like(4.0, 2.0, Center::Lower).unwrap();
        assert!(v.bound == 1.0 && v.vacuous);
        assert_eq!(
            chebyshev_like(1.0, 0.0, Center::Upper),
            Err(Error::NonPositiveThreshold(0.0))
        );

        // (X - 0.75)^2 = (3.0625, 0.0625, 1.5625); its maximum over the
        // credal vertices is at (5/12, 0, 7/12).
        let dev2_max = 5.0 / 12.0 * 3.0625 + 7.0 / 12.0 * 1.5625;
        let r = chebyshev_for(&three_atoms(), "X", 2.0, Center::Lower).unwrap();
        assert_abs_diff_eq!(r.bound, dev2_max / 4.0, epsilon = 1e-9);
    }

    #[test]
    fn cauchy_examples() {
        let p = three();
        let g = Gamble::new(&p, vec![-1.0, -2.0, 0.0]).unwrap();
        assert!(cauchy_like_check(&[0.2, 0.3, 0.5], &g));
        let g = Gamble::new(&p, vec![-1.0, 2.0, 0.0]).unwrap();
        assert!(cauchy_like_check(&[0.0, 1.0, 0.0], &g));
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_section(|x| Ok((x - 0.3) * (x - 0.3) + 1.0), -2.0, 5.0, 1e-9).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-8);
        assert_abs_diff_eq!(fx, 1.0, epsilon = 1e-15);
        let (x, _) = golden_section(Ok, -2.0, 5.0, 1e-9).unwrap();
        assert_eq!(x, -2.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn crossover_law(l in 0.01f64..10.0, d in 0.0f64..10.0, lvx in 0.0f64..20.0, eps in 0.001f64..20.0) {
                let r = compare_markov_cantelli(l, l + d, lvx, eps, true).unwrap();
                if (eps - r.eps2).abs() > 1e-9 {
                    prop_assert_eq!(r.cantelli_bound <= r.markov_bound, eps > r.eps2);
                }
                if r.markov_sufficient {
                    prop_assert!(r.markov_bound < r.cantelli_bound);
                }
                prop_assert!(r.delta >= lvx * lvx);
                prop_assert!(r.eps2 >= lvx / l - 1e-12);
            }

            #[test]
            fn lv_bound_never_exceeds_uv_bound(lv in 0.0f64..10.0, extra in 0.0f64..10.0, eps in 0.001f64..10.0) {
                prop_assert!(cantelli_ratio(lv, eps) <= cantelli_ratio(lv + extra, eps));
            }

            #[test]
            fn cauchy_always_holds(raw in prop::collection::vec(0.0f64..1.0, 5), vals in prop::collection::vec(-5.0f64..5.0, 5)) {
                let s: f64 = raw.iter().sum();
                prop_assume!(s > 0.0);
                let p: Vec<f64> = raw.iter().map(|r| r / s).collect();
                let g = Gamble::new(&Partition::numbered(5).unwrap(), vals).unwrap();
                prop_assert!(cauchy_like_check(&p, &g));
            }
        }
    }
}
