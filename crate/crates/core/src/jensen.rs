//! Jensen-type inequalities for 2-coherent lower and upper previsions.
//!
//! [`jensen_base`] is the general supporting-line argument for any measure
//! with a conjugate; [`jensen_bounds`] specializes it to a lower/upper pair;
//! [`improved_jensen`] replaces the supporting line with a chord when the
//! prevision falls in a hole of the image set; [`lyapunov`] and
//! [`moment_inference`] are applications.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::consistency::{natural_extension, upper_extension};
use crate::error::{Error, Result};
use crate::gamble::{Assessment, Gamble, HoleBracket};
use crate::report::{Bound, Direction, Quantity, Target};

/// Margin for "interior point of the domain".
pub const INTERIOR_MARGIN: f64 = 1e-12;
/// `f(x_L) <= f(x_U)` is tested with this slack.
pub const CHORD_TOL: f64 = 1e-12;
/// Step of the one-sided difference quotients used for custom functions.
pub const NUMERIC_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Convex,
    Concave,
}

impl Shape {
    pub fn flip(self) -> Shape {
        match self {
            Shape::Convex => Shape::Concave,
            Shape::Concave => Shape::Convex,
        }
    }
}

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A convex or concave function on `[lo, hi]` with its one-sided derivatives.
#[derive(Clone)]
pub struct FunctionSpec {
    name: String,
    shape: Shape,
    lo: f64,
    hi: f64,
    eval: Scalar,
    dminus: Scalar,
    dplus: Scalar,
    approximate: bool,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("shape", &self.shape)
            .field("domain", &(self.lo, self.hi))
            .field("approximate", &self.approximate)
            .finish()
    }
}

fn check_domain(lo: f64, hi: f64) -> Result<()> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::BadFunction(format!("empty domain [{lo}, {hi}]")));
    }
    Ok(())
}

impl FunctionSpec {
    fn closed_form(
        name: String,
        shape: Shape,
        lo: f64,
        hi: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dminus: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dplus: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_domain(lo, hi)?;
        Ok(FunctionSpec {
            name,
            shape,
            lo,
            hi,
            eval: Arc::new(eval),
            dminus: Arc::new(dminus),
            dplus: Arc::new(dplus),
            approximate: false,
        })
    }

    /// `x ↦ x`, filed as concave.
    pub fn identity(lo: f64, hi: f64) -> Self {
        Self::closed_form("identity".into(), Shape::Concave, lo, hi, |x| x, |_| 1.0, |_| 1.0)
            .expect("identity needs lo < hi")
    }

    /// `x ↦ x^k`. Even powers are convex anywhere; odd powers above 1 need a
    /// domain on one side of zero.
    pub fn power(k: u32, lo: f64, hi: f64) -> Result<Self> {
        let shape = match k {
            0 => return Err(Error::BadFunction("power 0 is constant".into())),
            1 => Shape::Convex,
            k if k % 2 == 0 => Shape::Convex,
            _ if lo >= 0.0 => Shape::Convex,
            _ if hi <= 0.0 => Shape::Concave,
            _ => {
                return Err(Error::BadFunction(format!(
                    "x^{k} is neither convex nor concave on [{lo}, {hi}]"
                )))
            }
        };
        let ki = k as i32;
        let kf = k as f64;
        let d = move |x: f64| kf * x.powi(ki - 1);
        Self::closed_form(format!("x^{k}"), shape, lo, hi, move |x| x.powi(ki), d, d)
    }

    pub fn square(lo: f64, hi: f64) -> Result<Self> {
        Self::power(2, lo, hi)
    }

    /// `x ↦ |x|^r` for `r >= 1`.
    pub fn abs_power(r: f64, lo: f64, hi: f64) -> Result<Self> {
        if r.is_nan() || r < 1.0 || !r.is_finite() {
            return Err(Error::BadFunction(format!("|x|^{r} needs r >= 1")));
        }
        let slope = move |x: f64| r * x.abs().powf(r - 1.0) * x.signum();
        let dminus = move |x: f64| {
            if x == 0.0 {
                if r == 1.0 {
                    -1.0
                } else {
                    0.0
                }
            } else {
                slope(x)
            }
        };
        let dplus = move |x: f64| {
            if x == 0.0 {
                if r == 1.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                slope(x)
            }
        };
        Self::closed_form(
            format!("|x|^{r}"),
            Shape::Convex,
            lo,
            hi,
            move |x| x.abs().powf(r),
            dminus,
            dplus,
        )
    }

    /// `x ↦ x^r` on a nonnegative domain: convex for `r >= 1`, concave for
    /// `0 < r <= 1`.
    pub fn real_power(r: f64, lo: f64, hi: f64) -> Result<Self> {
        if r.is_nan() || r <= 0.0 || !r.is_finite() {
            return Err(Error::BadFunction(format!("x^{r} needs r > 0")));
        }
        if lo < 0.0 {
            return Err(Error::BadFunction(format!("x^{r} needs a nonnegative domain")));
        }
        let shape = if r >= 1.0 { Shape::Convex } else { Shape::Concave };
        let d = move |x: f64| r * x.powf(r - 1.0);
        Self::closed_form(format!("x^{r}"), shape, lo, hi, move |x| x.powf(r), d, d)
    }

    pub fn sqrt(lo: f64, hi: f64) -> Result<Self> {
        let mut f = Self::real_power(0.5, lo, hi)?;
        f.name = "sqrt".into();
        Ok(f)
    }

    pub fn exp(lo: f64, hi: f64) -> Result<Self> {
        Self::closed_form("exp".into(), Shape::Convex, lo, hi, f64::exp, f64::exp, f64::exp)
    }

    /// Piecewise-linear interpolant through `knots` (strictly increasing in
    /// `x`). Convex when slopes never decrease, concave when they never
    /// increase.
    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::BadFunction("need at least two knots".into()));
        }
        if knots
            .windows(2)
            .any(|w| w[0].0 >= w[1].0 || w[0].0.is_nan() || w[1].0.is_nan())
        {
            return Err(Error::BadFunction("knots must be strictly increasing".into()));
        }
        let slopes: Vec<f64> = knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        let shape = if slopes.windows(2).all(|w| w[0] <= w[1]) {
            Shape::Convex
        } else if slopes.windows(2).all(|w| w[0] >= w[1]) {
            Shape::Concave
        } else {
            return Err(Error::BadFunction("slopes are not monotone".into()));
        };
        let knots = Arc::new(knots);
        let slopes = Arc::new(slopes);
        let (lo, hi) = (knots[0].0, knots[knots.len() - 1].0);

        let k = knots.clone();
        let s = slopes.clone();
        let eval = move |x: f64| {
            let i = segment_right(&k, x);
            k[i].1 + s[i] * (x - k[i].0)
        };
        let k = knots.clone();
        let s = slopes.clone();
        let dminus = move |x: f64| s[segment_left(&k, x)];
        let k = knots;
        let s = slopes;
        let dplus = move |x: f64| s[segment_right(&k, x)];
        Self::closed_form("piecewise-linear".into(), shape, lo, hi, eval, dminus, dplus)
    }

    /// A user function whose one-sided derivatives are approximated by
    /// difference quotients with step [`NUMERIC_STEP`].
    pub fn custom(
        name: impl Into<String>,
        shape: Shape,
        lo: f64,
        hi: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_domain(lo, hi)?;
        let eval: Scalar = Arc::new(eval);
        let e = eval.clone();
        let dminus = move |x: f64| {
            let h = NUMERIC_STEP.min(x - lo).max(f64::MIN_POSITIVE);
            (e(x) - e(x - h)) / h
        };
        let e = eval.clone();
        let dplus = move |x: f64| {
            let h = NUMERIC_STEP.min(hi - x).max(f64::MIN_POSITIVE);
            (e(x + h) - e(x)) / h
        };
        Ok(FunctionSpec {
            name: name.into(),
            shape,
            lo,
            hi,
            eval,
            dminus: Arc::new(dminus),
            dplus: Arc::new(dplus),
            approximate: true,
        })
    }

    /// `x ↦ -f(x)`, with the shape flipped.
    pub fn negate(&self) -> Self {
        let (e, dm, dp) = (self.eval.clone(), self.dminus.clone(), self.dplus.clone());
        FunctionSpec {
            name: format!("-{}", self.name),
            shape: self.shape.flip(),
            lo: self.lo,
            hi: self.hi,
            eval: Arc::new(move |x| -e(x)),
            dminus: Arc::new(move |x| -dm(x)),
            dplus: Arc::new(move |x| -dp(x)),
            approximate: self.approximate,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn is_approximate(&self) -> bool {
        self.approximate
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn dminus(&self, x: f64) -> f64 {
        (self.dminus)(x)
    }

    pub fn dplus(&self, x: f64) -> f64 {
        (self.dplus)(x)
    }

    pub fn is_interior(&self, x: f64) -> bool {
        x > self.lo + INTERIOR_MARGIN && x < self.hi - INTERIOR_MARGIN
    }

    fn require_interior(&self, x: f64) -> Result<()> {
        if self.is_interior(x) {
            Ok(())
        } else {
            Err(Error::BoundaryPoint {
                at: x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// Spot-checks the ordering of one-sided derivatives at `samples` evenly
    /// spaced interior points: nondecreasing for convex, nonincreasing for
    /// concave.
    pub fn check_slopes(&self, samples: usize, tol: f64) -> bool {
        let pts: Vec<f64> = (1..=samples)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (samples + 1) as f64)
            .collect();
        let sign = match self.shape {
            Shape::Convex => 1.0,
            Shape::Concave => -1.0,
        };
        let seq: Vec<f64> = pts
            .iter()
            .flat_map(|&x| [sign * self.dminus(x), sign * self.dplus(x)])
            .collect();
        seq.windows(2).all(|w| w[0] <= w[1] + tol)
    }
}

fn segment_right(knots: &[(f64, f64)], x: f64) -> usize {
    let last = knots.len() - 2;
    (0..=last).find(|&i| x < knots[i + 1].0).unwrap_or(last)
}

fn segment_left(knots: &[(f64, f64)], x: f64) -> usize {
    (0..knots.len() - 1)
        .find(|&i| x <= knots[i + 1].0)
        .unwrap_or(knots.len() - 2)
}

/// Which inequality produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JensenRule {
    /// `mu(φ) >= φ(mu)` when a nonnegative subgradient exists.
    SupportConvexMeasure,
    /// `conj-mu(φ) >= φ(mu)` when a nonpositive subgradient exists.
    SupportConvexConjugate,
    /// `mu(ψ) <= ψ(mu)` when a nonnegative supergradient exists.
    SupportConcaveMeasure,
    /// `conj-mu(ψ) <= ψ(mu)` when a nonpositive supergradient exists.
    SupportConcaveConjugate,
    /// `lpr(ψ(X)) <= min{ψ(lpr X), ψ(upr X)}`.
    ConcaveLowerMin,
    /// `upr(φ(X)) >= max{φ(lpr X), φ(upr X)}`.
    ConvexUpperMax,
    /// `lpr(φ(X)) >= φ(lpr X)` if `φ'+(lpr X) >= 0`.
    ConvexLowerAtLower,
    /// `lpr(φ(X)) >= φ(upr X)` if `φ'-(upr X) <= 0`.
    ConvexLowerAtUpper,
    /// `upr(ψ(X)) <= ψ(upr X)` if `ψ'-(upr X) >= 0`.
    ConcaveUpperAtUpper,
    /// `upr(ψ(X)) <= ψ(lpr X)` if `ψ'+(lpr X) <= 0`.
    ConcaveUpperAtLower,
    /// Linear prevision: `P(φ(X)) >= φ(P X)`, `P(ψ(X)) <= ψ(P X)`.
    Precise,
    /// Chord through the hole bracket of `lpr X`.
    ChordAtLower,
    /// Chord through the hole bracket of `upr X`.
    ChordAtUpper,
    /// Best of the chord and plain bounds on the lower prevision.
    ImprovedLower,
    /// Best of the chord and plain bounds on the upper prevision.
    ImprovedUpper,
    /// `upr(|X|^t) >= upr(|X|^s)^(t/s)`.
    LyapunovUpper,
    /// `lpr(X^t) >= lpr(X^s)^(t/s)` for `X >= 0`.
    LyapunovLower,
}

impl JensenRule {
    /// Stable identifier, as serialized.
    pub fn id(self) -> &'static str {
        match self {
            JensenRule::SupportConvexMeasure => "support-convex-measure",
            JensenRule::SupportConvexConjugate => "support-convex-conjugate",
            JensenRule::SupportConcaveMeasure => "support-concave-measure",
            JensenRule::SupportConcaveConjugate => "support-concave-conjugate",
            JensenRule::ConcaveLowerMin => "concave-lower-min",
            JensenRule::ConvexUpperMax => "convex-upper-max",
            JensenRule::ConvexLowerAtLower => "convex-lower-at-lower",
            JensenRule::ConvexLowerAtUpper => "convex-lower-at-upper",
            JensenRule::ConcaveUpperAtUpper => "concave-upper-at-upper",
            JensenRule::ConcaveUpperAtLower => "concave-upper-at-lower",
            JensenRule::Precise => "precise",
            JensenRule::ChordAtLower => "chord-at-lower",
            JensenRule::ChordAtUpper => "chord-at-upper",
            JensenRule::ImprovedLower => "improved-lower",
            JensenRule::ImprovedUpper => "improved-upper",
            JensenRule::LyapunovUpper => "lyapunov-upper",
            JensenRule::LyapunovLower => "lyapunov-lower",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JensenReport {
    pub target: Target,
    pub bound: Option<f64>,
    pub direction: Direction,
    pub fired: JensenRule,
    pub applicable: bool,
    /// Set on the strongest applicable bound for its target.
    pub tightest: bool,
    pub assumptions_checked: Vec<String>,
}

impl JensenReport {
    fn new(target: Target, direction: Direction, fired: JensenRule, bound: Option<f64>) -> Self {
        JensenReport {
            target,
            bound,
            direction,
            fired,
            applicable: bound.is_some(),
            tightest: false,
            assumptions_checked: Vec::new(),
        }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.assumptions_checked.push(s.into());
        self
    }

    pub fn with_values(mut self, g: &Gamble) -> Self {
        self.target = self.target.with_values(g);
        self
    }
}

impl Bound for JensenReport {
    fn target(&self) -> &Target {
        &self.target
    }
    fn direction(&self) -> Direction {
        self.direction
    }
    fn bound(&self) -> Option<f64> {
        self.bound
    }
    fn rule(&self) -> String {
        self.fired.id().to_string()
    }
}

/// Flags the strongest applicable report of every (target, direction) group.
fn mark_tightest(reports: &mut [JensenReport]) {
    for i in 0..reports.len() {
        let Some(b) = reports[i].bound else { continue };
        let beaten = reports.iter().enumerate().any(|(j, r)| {
            let Some(o) = r.bound else { return false };
            if r.target.quantity != reports[i].target.quantity || r.direction != reports[i].direction {
                return false;
            }
            let better = match r.direction {
                Direction::AtMost => o < b,
                Direction::AtLeast => o > b,
            };
            better || (o == b && j < i)
        });
        reports[i].tightest = !beaten;
    }
}

/// Supporting-line inequalities for a measure `mu` with conjugate `conj`,
/// evaluated at `mu`. Every case of the function's shape is reported, with
/// `applicable` telling which fired.
pub fn jensen_base(mu: f64, conj: f64, f: &FunctionSpec) -> Result<Vec<JensenReport>> {
    f.require_interior(mu)?;
    let at = mu;
    let fx = f.eval(at);
    let of = format!("{}(X|B)", f.name());
    let base_note = format!("mu(X|B) = {at} interior to [{}, {}]; conj-mu(X|B) = {conj}", f.lo, f.hi);
    let (dm, dp) = (f.dminus(at), f.dplus(at));
    let mut out = match f.shape() {
        Shape::Convex => vec![
            JensenReport::new(
                Target::new(Quantity::Measure, &of),
                Direction::AtLeast,
                JensenRule::SupportConvexMeasure,
                (dp >= 0.0).then_some(fx),
            )
            .note(format!("right derivative {dp} >= 0: {}", dp >= 0.0)),
            JensenReport::new(
                Target::new(Quantity::ConjugateMeasure, &of),
                Direction::AtLeast,
                JensenRule::SupportConvexConjugate,
                (dm <= 0.0).then_some(fx),
            )
            .note(format!("left derivative {dm} <= 0: {}", dm <= 0.0)),
        ],
        Shape::Concave => vec![
            JensenReport::new(
                Target::new(Quantity::Measure, &of),
                Direction::AtMost,
                JensenRule::SupportConcaveMeasure,
                (dm >= 0.0).then_some(fx),
            )
            .note(format!("left derivative {dm} >= 0: {}", dm >= 0.0)),
            JensenReport::new(
                Target::new(Quantity::ConjugateMeasure, &of),
                Direction::AtMost,
                JensenRule::SupportConcaveConjugate,
                (dp <= 0.0).then_some(fx),
            )
            .note(format!("right derivative {dp} <= 0: {}", dp <= 0.0)),
        ],
    };
    for r in &mut out {
        r.assumptions_checked.insert(0, base_note.clone());
    }
    mark_tightest(&mut out);
    Ok(out)
}

/// The unconditional inequalities for a 2-coherent pair `lpr(X) <= upr(X)`.
pub fn jensen_bounds(lpr_x: f64, upr_x: f64, f: &FunctionSpec) -> Result<Vec<JensenReport>> {
    if lpr_x > upr_x {
        return Err(Error::ConjugacyViolation {
            lower: lpr_x,
            upper: upr_x,
        });
    }
    f.require_interior(lpr_x)?;
    f.require_interior(upr_x)?;
    let (fl, fu) = (f.eval(lpr_x), f.eval(upr_x));
    let of = format!("{}(X)", f.name());
    let interior = format!("lpr(X) = {lpr_x}, upr(X) = {upr_x} interior to [{}, {}]", f.lo, f.hi);
    let monotone = {
        let (dl, du) = (f.dplus(lpr_x), f.dminus(upr_x));
        if dl >= 0.0 && du >= 0.0 {
            Some("nondecreasing")
        } else if dl <= 0.0 && du <= 0.0 {
            Some("nonincreasing")
        } else {
            None
        }
    };
    let mut out = match f.shape() {
        Shape::Concave => {
            let dm_u = f.dminus(upr_x);
            let dp_l = f.dplus(lpr_x);
            vec![
                JensenReport::new(
                    Target::new(Quantity::Lower, &of),
                    Direction::AtMost,
                    JensenRule::ConcaveLowerMin,
                    Some(fl.min(fu)),
                ),
                JensenReport::new(
                    Target::new(Quantity::Upper, &of),
                    Direction::AtMost,
                    JensenRule::ConcaveUpperAtUpper,
                    (dm_u >= 0.0).then_some(fu),
                )
                .note(format!("left derivative at upr(X) = {dm_u} >= 0: {}", dm_u >= 0.0)),
                JensenReport::new(
                    Target::new(Quantity::Upper, &of),
                    Direction::AtMost,
                    JensenRule::ConcaveUpperAtLower,
                    (dp_l <= 0.0).then_some(fl),
                )
                .note(format!("right derivative at lpr(X) = {dp_l} <= 0: {}", dp_l <= 0.0)),
            ]
        }
        Shape::Convex => {
            let dp_l = f.dplus(lpr_x);
            let dm_u = f.dminus(upr_x);
            vec![
                JensenReport::new(
                    Target::new(Quantity::Upper, &of),
                    Direction::AtLeast,
                    JensenRule::ConvexUpperMax,
                    Some(fl.max(fu)),
                ),
                JensenReport::new(
                    Target::new(Quantity::Lower, &of),
                    Direction::AtLeast,
                    JensenRule::ConvexLowerAtLower,
                    (dp_l >= 0.0).then_some(fl),
                )
                .note(format!("right derivative at lpr(X) = {dp_l} >= 0: {}", dp_l >= 0.0)),
                JensenReport::new(
                    Target::new(Quantity::Lower, &of),
                    Direction::AtLeast,
                    JensenRule::ConvexLowerAtUpper,
                    (dm_u <= 0.0).then_some(fu),
                )
                .note(format!("left derivative at upr(X) = {dm_u} <= 0: {}", dm_u <= 0.0)),
            ]
        }
    };
    for r in &mut out {
        r.assumptions_checked.insert(0, interior.clone());
        if let Some(m) = monotone {
            r.assumptions_checked
                .push(format!("{} is {m} on [lpr(X), upr(X)]", f.name()));
        }
        if f.is_approximate() {
            r.assumptions_checked
                .push("derivatives approximated numerically".into());
        }
    }
    mark_tightest(&mut out);
    Ok(out)
}

/// Jensen's inequality for a linear prevision. Whether `p_x` belongs to a
/// globally dF-coherent assessment is the caller's responsibility.
pub fn jensen_precise(p_x: f64, f: &FunctionSpec) -> Result<JensenReport> {
    f.require_interior(p_x)?;
    let direction = match f.shape() {
        Shape::Convex => Direction::AtLeast,
        Shape::Concave => Direction::AtMost,
    };
    let mut r = JensenReport::new(
        Target::new(Quantity::Precise, format!("{}(X)", f.name())),
        direction,
        JensenRule::Precise,
        Some(f.eval(p_x)),
    )
    .note("prevision assumed dF-coherent (not verified)");
    r.tightest = true;
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImprovedJensenReport {
    pub function: String,
    pub shape: Shape,
    pub lpr_x: f64,
    pub upr_x: f64,
    pub lower_bracket: (f64, f64),
    pub upper_bracket: (f64, f64),
    /// Chord value at `lpr(X)`.
    pub m1: Option<f64>,
    /// Chord value at `upr(X)`.
    pub m2: Option<f64>,
    /// Best bound on `lpr(f(X))`: from above for concave f, below for convex.
    pub combined: Option<f64>,
    /// Best bound on `upr(f(X))`, same orientation as `combined`.
    pub combined_upper: Option<f64>,
    pub reasons: Vec<String>,
}

fn chord(f: &FunctionSpec, k: f64, b: &HoleBracket) -> f64 {
    let w = (k - b.lower) / (b.upper - b.lower);
    f.eval(b.upper) * w + f.eval(b.lower) * (1.0 - w)
}

fn best(values: impl IntoIterator<Item = Option<f64>>, shape: Shape) -> Option<f64> {
    values.into_iter().flatten().reduce(|a, b| match shape {
        Shape::Concave => a.min(b),
        Shape::Convex => a.max(b),
    })
}

/// Chord-improved Jensen bounds for a gamble whose image has holes.
pub fn improved_jensen(g: &Gamble, lpr_x: f64, upr_x: f64, f: &FunctionSpec) -> Result<ImprovedJensenReport> {
    if lpr_x > upr_x {
        return Err(Error::ConjugacyViolation {
            lower: lpr_x,
            upper: upr_x,
        });
    }
    let (inf, sup) = g.bounds();
    let (lo, hi) = f.domain();
    if inf < lo || sup > hi {
        return Err(Error::DomainMismatch {
            value: if inf < lo { inf } else { sup },
            lo,
            hi,
        });
    }
    let xb = g.hole_bracket(lpr_x)?;
    let zb = g.hole_bracket(upr_x)?;
    let mut reasons = Vec::new();

    let plain = |x: f64, ok: bool, what: &str, reasons: &mut Vec<String>| -> Option<f64> {
        if !f.is_interior(x) {
            reasons.push(format!("{what}: {x} not interior to the domain, skipped"));
            None
        } else if ok {
            Some(f.eval(x))
        } else {
            None
        }
    };

    let (m1, m2, combined, combined_upper) = match f.shape() {
        Shape::Concave => {
            let m1 = if xb.strict {
                Some(chord(f, lpr_x, &xb))
            } else {
                reasons.push("lpr(X) is in the image set; lower chord inapplicable".into());
                None
            };
            let m2 = if !zb.strict {
                reasons.push("upr(X) is in the image set; upper chord inapplicable".into());
                None
            } else if f.eval(zb.lower) <= f.eval(zb.upper) + CHORD_TOL {
                Some(chord(f, upr_x, &zb))
            } else {
                reasons.push("f(z_L) > f(z_U); upper chord inapplicable".into());
                None
            };
            let lower_l = m1.or_else(|| plain(lpr_x, true, "f(lpr X)", &mut reasons));
            let lower_u = m2.or_else(|| plain(upr_x, true, "f(upr X)", &mut reasons));
            let combined = best([lower_l, lower_u], Shape::Concave);
            let up_u = plain(
                upr_x,
                f.is_interior(upr_x) && f.dminus(upr_x) >= 0.0,
                "f(upr X)",
                &mut reasons,
            );
            let up_l = plain(
                lpr_x,
                f.is_interior(lpr_x) && f.dplus(lpr_x) <= 0.0,
                "f(lpr X)",
                &mut reasons,
            );
            let combined_upper = best([m2, up_u, up_l], Shape::Concave);
            (m1, m2, combined, combined_upper)
        }
        Shape::Convex => {
            let m1 = if !xb.strict {
                reasons.push("lpr(X) is in the image set; lower chord inapplicable".into());
                None
            } else if f.eval(xb.lower) <= f.eval(xb.upper) + CHORD_TOL {
                Some(chord(f, lpr_x, &xb))
            } else {
                reasons.push("f(x_L) > f(x_U); lower chord inapplicable".into());
                None
            };
            let m2 = if zb.strict {
                Some(chord(f, upr_x, &zb))
            } else {
                reasons.push("upr(X) is in the image set; upper chord inapplicable".into());
                None
            };
            let lo_l = plain(
                lpr_x,
                f.is_interior(lpr_x) && f.dplus(lpr_x) >= 0.0,
                "f(lpr X)",
                &mut reasons,
            );
            let lo_u = plain(
                upr_x,
                f.is_interior(upr_x) && f.dminus(upr_x) <= 0.0,
                "f(upr X)",
                &mut reasons,
            );
            let combined = best([m1, lo_l, lo_u], Shape::Convex);
            let up_u = m2.or_else(|| plain(upr_x, true, "f(upr X)", &mut reasons));
            let up_l = plain(lpr_x, true, "f(lpr X)", &mut reasons);
            let combined_upper = best([up_u, up_l], Shape::Convex);
            (m1, m2, combined, combined_upper)
        }
    };
    reasons.dedup();
    Ok(ImprovedJensenReport {
        function: f.name().to_string(),
        shape: f.shape(),
        lpr_x,
        upr_x,
        lower_bracket: (xb.lower, xb.upper),
        upper_bracket: (zb.lower, zb.upper),
        m1,
        m2,
        combined,
        combined_upper,
        reasons,
    })
}

impl ImprovedJensenReport {
    /// The individual bounds as certifiable reports.
    pub fn reports(&self) -> Vec<JensenReport> {
        let of = format!("{}(X)", self.function);
        let dir = match self.shape {
            Shape::Concave => Direction::AtMost,
            Shape::Convex => Direction::AtLeast,
        };
        // For concave f the lower chord bounds lpr and the upper chord upr;
        // for convex f the same holds.
        let mut out = vec![
            JensenReport::new(
                Target::new(Quantity::Lower, &of),
                dir,
                JensenRule::ChordAtLower,
                self.m1,
            ),
            JensenReport::new(
                Target::new(Quantity::Upper, &of),
                dir,
                JensenRule::ChordAtUpper,
                self.m2,
            ),
            JensenReport::new(
                Target::new(Quantity::Lower, &of),
                dir,
                JensenRule::ImprovedLower,
                self.combined,
            ),
            JensenReport::new(
                Target::new(Quantity::Upper, &of),
                dir,
                JensenRule::ImprovedUpper,
                self.combined_upper,
            ),
        ];
        for r in &mut out {
            r.assumptions_checked = self.reasons.clone();
        }
        mark_tightest(&mut out);
        out
    }
}

/// Known moment values for [`lyapunov`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentKnowns {
    /// `upr(|X|^s)`
    pub upr_abs_s: Option<f64>,
    /// `lpr(|X|^s)`
    pub lpr_abs_s: Option<f64>,
    /// `lpr(X^s)`, meaningful for `X >= 0`
    pub lpr_s: Option<f64>,
    pub nonneg: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub s: f64,
    pub t: f64,
    pub bounds: Vec<JensenReport>,
    /// `lpr(|X|^s)^(1/s) <= upr(|X|^s)^(1/s)` when both are known.
    pub chain_ok: Option<bool>,
}

pub fn lyapunov(s: f64, t: f64, knowns: MomentKnowns) -> Result<LyapunovReport> {
    if !(s > 0.0 && s < t && t.is_finite()) {
        return Err(Error::BadExponents { s, t });
    }
    for v in [knowns.upr_abs_s, knowns.lpr_abs_s, knowns.lpr_s].into_iter().flatten() {
        if v < 0.0 {
            return Err(Error::NegativeMoment(v));
        }
    }
    let r = t / s;
    let mut bounds = Vec::new();
    if let Some(u) = knowns.upr_abs_s {
        bounds.push(
            JensenReport::new(
                Target::new(Quantity::Upper, format!("|X|^{t}")),
                Direction::AtLeast,
                JensenRule::LyapunovUpper,
                Some(u.powf(r)),
            )
            .note(format!("from upr(|X|^{s}) = {u}")),
        );
    }
    if let (Some(l), true) = (knowns.lpr_s, knowns.nonneg) {
        bounds.push(
            JensenReport::new(
                Target::new(Quantity::Lower, format!("X^{t}")),
                Direction::AtLeast,
                JensenRule::LyapunovLower,
                Some(l.powf(r)),
            )
            .note(format!("X >= 0; from lpr(X^{s}) = {l}")),
        );
    }
    mark_tightest(&mut bounds);
    let chain_ok = match (knowns.lpr_abs_s, knowns.upr_abs_s) {
        (Some(l), Some(u)) => Some(l.powf(1.0 / s) <= u.powf(1.0 / s) + 1e-12),
        _ => None,
    };
    Ok(LyapunovReport { s, t, bounds, chain_ok })
}

/// Verdicts of `lpr(X)^2 <= lpr(X^2)` and `upr(X)^2 <= upr(X^2)` for `X >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VarianceCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
}

pub fn variance_property_check(
    lpr_x: f64,
    lpr_x2: f64,
    upr_x: f64,
    upr_x2: f64,
    nonneg: bool,
) -> Result<VarianceCheck> {
    if !nonneg {
        return Err(Error::NegativityFlagMissing);
    }
    Ok(VarianceCheck {
        lower_ok: lpr_x * lpr_x <= lpr_x2 + 1e-12,
        upper_ok: upr_x * upr_x <= upr_x2 + 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub gamble: String,
    pub power: u32,
    pub lpr_x: f64,
    pub upr_x: f64,
    pub jensen: Vec<JensenReport>,
    pub improved: Option<ImprovedJensenReport>,
    pub exact_lower: f64,
    pub exact_upper: f64,
}

impl MomentReport {
    /// Strongest plain Jensen lower bound on `lpr(X^k)`.
    pub fn jensen_lower(&self) -> Option<f64> {
        self.jensen
            .iter()
            .filter(|r| r.target.quantity == Quantity::Lower && r.direction == Direction::AtLeast)
            .filter_map(|r| r.bound)
            .reduce(f64::max)
    }

    pub fn improved_lower(&self) -> Option<f64> {
        self.improved.as_ref().and_then(|r| r.combined)
    }
}

/// Jensen bounds on `lpr/upr(X^power)` from the assessment's envelope of `X`,
/// next to the exact natural extension.
pub fn moment_inference(a: &Assessment, x_name: &str, power: u32) -> Result<MomentReport> {
    if power < 2 {
        return Err(Error::BadPower(power));
    }
    let x = &a.gamble(x_name)?;
    let lpr_x = natural_extension(a, x)?;
    let upr_x = upper_extension(a, x)?;
    let (inf, sup) = x.bounds();
    let xk = x.map(|v| v.powi(power as i32));
    let of = format!("{x_name}^{power}");

    let (jensen, improved) = if power.is_multiple_of(2) {
        let f = FunctionSpec::power(power, inf - 1.0, sup + 1.0)?;
        let j = jensen_bounds(lpr_x, upr_x, &f)?;
        let imp = improved_jensen(x, lpr_x, upr_x, &f)?;
        (j, Some(imp))
    } else {
        if inf < 0.0 {
            return Err(Error::NotNonnegative);
        }
        // x^k is convex and increasing on [0, ∞), so both plain bounds fire
        // even when lpr(X) sits on the boundary at 0.
        let k = power as i32;
        let mut j = vec![
            JensenReport::new(
                Target::new(Quantity::Upper, &of),
                Direction::AtLeast,
                JensenRule::ConvexUpperMax,
                Some(upr_x.powi(k)),
            ),
            JensenReport::new(
                Target::new(Quantity::Lower, &of),
                Direction::AtLeast,
                JensenRule::ConvexLowerAtLower,
                Some(lpr_x.max(0.0).powi(k)),
            )
            .note("X >= 0"),
        ];
        mark_tightest(&mut j);
        let f = FunctionSpec::power(power, 0.0, sup + 1.0)?;
        (j, Some(improved_jensen(x, lpr_x, upr_x, &f)?))
    };
    let jensen = jensen
        .into_iter()
        .map(|mut r| {
            r.target.of = of.clone();
            r.with_values(&xk)
        })
        .collect();
    Ok(MomentReport {
        gamble: x_name.to_string(),
        power,
        lpr_x,
        upr_x,
        jensen,
        improved,
        exact_lower: natural_extension(a, &xk)?,
        exact_upper: upper_extension(a, &xk)?,
    })
}

/// [`jensen_bounds`] at the natural-extension envelope of `x_name`, with the
/// target gamble attached.
pub fn jensen_for(a: &Assessment, x_name: &str, f: &FunctionSpec) -> Result<Vec<JensenReport>> {
    let x = &a.gamble(x_name)?;
    let fx = x.apply(f)?;
    let (l, u) = (natural_extension(a, x)?, upper_extension(a, x)?);
    Ok(jensen_bounds(l, u, f)?
        .into_iter()
        .map(|mut r| {
            r.target.of = format!("{}({x_name})", f.name());
            r.with_values(&fx)
        })
        .collect())
}

/// [`improved_jensen`] at the natural-extension envelope of `x_name`; the
/// returned reports carry the target gamble.
pub fn improved_for(
    a: &Assessment,
    x_name: &str,
    f: &FunctionSpec,
) -> Result<(ImprovedJensenReport, Vec<JensenReport>)> {
    let x = &a.gamble(x_name)?;
    let fx = x.apply(f)?;
    let (l, u) = (natural_extension(a, x)?, upper_extension(a, x)?);
    let rep = improved_jensen(x, l.clamp(x.inf(), x.sup()), u.clamp(x.inf(), x.sup()), f)?;
    let reports = rep
        .reports()
        .into_iter()
        .map(|mut r| {
            r.target.of = format!("{}({x_name})", f.name());
            r.with_values(&fx)
        })
        .collect();
    Ok((rep, reports))
}
