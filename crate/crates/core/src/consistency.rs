//! Avoiding sure loss, coherence and 2-coherence checks, plus the credal-set
//! optimizer every bound in this crate leans on.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamble::{Assessment, Gamble};
use crate::lp::{self, Constraints, LinearProgram, LpResult};

/// Envelope gaps below this count as tight.
pub const COHERENCE_TOL: f64 = 1e-8;
/// 2-coherence fails only when the optimal normalized gain is below `-TWO_COHERENCE_TOL`.
pub const TWO_COHERENCE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// Probability vectors dominating an assessment, optionally with pinned
/// means `E_p(g) = v`.
#[derive(Clone, Debug)]
pub struct CredalPolytope {
    assessment: Assessment,
    mean_constraints: Vec<(Gamble, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub witness: Vec<f64>,
}

impl CredalPolytope {
    pub fn new(assessment: &Assessment) -> Self {
        CredalPolytope {
            assessment: assessment.clone(),
            mean_constraints: Vec::new(),
        }
    }

    pub fn with_mean(mut self, gamble: Gamble, value: f64) -> Result<Self> {
        if gamble.partition() != self.assessment.partition() {
            return Err(Error::PartitionMismatch);
        }
        self.mean_constraints.push((gamble, value));
        Ok(self)
    }

    pub fn assessment(&self) -> &Assessment {
        &self.assessment
    }

    pub fn dims(&self) -> usize {
        self.assessment.partition().len()
    }

    pub fn constraints(&self) -> Constraints {
        let mut c = Constraints::on_simplex(self.dims());
        for e in self.assessment.entries() {
            c = c.ge(e.gamble.values().to_vec(), e.lower);
        }
        for (g, v) in &self.mean_constraints {
            c = c.eq(g.values().to_vec(), *v);
        }
        c
    }

    /// A point of the polytope, or `None` when it is empty.
    pub fn feasible_point(&self) -> Result<Option<Vec<f64>>> {
        let r = lp::solve(&LinearProgram::minimize(vec![0.0; self.dims()], self.constraints()))?;
        Ok(r.solution().map(<[f64]>::to_vec))
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.feasible_point()?.is_none())
    }

    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        lp::enumerate_vertices(&self.constraints())
    }

    /// Optimum of `E_p(y)` over the polytope, with an optimal `p`.
    pub fn optimize(&self, y: &Gamble, sense: Sense) -> Result<Optimum> {
        if y.partition() != self.assessment.partition() {
            return Err(Error::PartitionMismatch);
        }
        let obj = y.values().to_vec();
        let prog = match sense {
            Sense::Min => LinearProgram::minimize(obj, self.constraints()),
            Sense::Max => LinearProgram::maximize(obj, self.constraints()),
        };
        match lp::solve(&prog)? {
            LpResult::Optimal { solution, .. } => Ok(Optimum {
                value: y.expectation(&solution),
                witness: solution,
            }),
            LpResult::Infeasible => Err(self.empty_error()),
            LpResult::Unbounded => unreachable!("programs on the simplex are bounded"),
        }
    }

    fn empty_error(&self) -> Error {
        match self.mean_constraints.first() {
            Some((_, c)) => Error::EmptyConstrainedCredalSet { c: *c },
            None => Error::EmptyCredalSet,
        }
    }
}

/// Optimum of `E_p(y)` over `poly`.
pub fn credal_optimize(poly: &CredalPolytope, y: &Gamble, sense: Sense) -> Result<f64> {
    poly.optimize(y, sense).map(|o| o.value)
}

/// Lower natural extension of `a` at `y`.
pub fn natural_extension(a: &Assessment, y: &Gamble) -> Result<f64> {
    credal_optimize(&CredalPolytope::new(a), y, Sense::Min)
}

/// Upper natural extension, `-natural_extension(a, -y)`.
pub fn upper_extension(a: &Assessment, y: &Gamble) -> Result<f64> {
    credal_optimize(&CredalPolytope::new(a), y, Sense::Max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Level {
    #[serde(rename = "asl")]
    AvoidingSureLoss,
    #[serde(rename = "coherence")]
    Coherence,
    #[serde(rename = "2coherence")]
    TwoCoherence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryGap {
    pub name: String,
    pub lower: f64,
    pub envelope: f64,
    /// `lower - envelope`; zero for a tight entry, negative otherwise.
    pub gap: f64,
}

/// A pair for which a strictly negative two-term gain exists.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairWitness {
    pub x0: String,
    pub x1: String,
    pub s0: f64,
    pub s1: f64,
    /// Supremum of the normalized gain; negative for a failing pair.
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Dominating { p: Option<Vec<f64>> },
    Gaps { gaps: Vec<EntryGap> },
    Pair { failing: Option<PairWitness> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub level: Level,
    pub pass: bool,
    pub witness: Witness,
}

/// Passes iff some probability vector dominates every assessed lower prevision.
pub fn check_asl(a: &Assessment) -> Result<ConsistencyReport> {
    let p = CredalPolytope::new(a).feasible_point()?;
    Ok(ConsistencyReport {
        level: Level::AvoidingSureLoss,
        pass: p.is_some(),
        witness: Witness::Dominating { p },
    })
}

/// Coherence as envelope tightness: every assessed lower prevision equals the
/// minimum expectation over the credal set.
pub fn check_coherence(a: &Assessment) -> Result<ConsistencyReport> {
    let poly = CredalPolytope::new(a);
    if poly.is_empty()? {
        return Ok(ConsistencyReport {
            level: Level::Coherence,
            pass: false,
            witness: Witness::Gaps { gaps: Vec::new() },
        });
    }
    let mut gaps = Vec::with_capacity(a.len());
    for e in a.entries() {
        let envelope = credal_optimize(&poly, &e.gamble, Sense::Min)?;
        gaps.push(EntryGap {
            name: e.name.clone(),
            lower: e.lower,
            envelope,
            gap: e.lower - envelope,
        });
    }
    let pass = gaps.iter().all(|g| g.gap.abs() <= COHERENCE_TOL);
    Ok(ConsistencyReport {
        level: Level::Coherence,
        pass,
        witness: Witness::Gaps { gaps },
    })
}

/// Minimum over normalized `(s0, s1)`, `s1 >= 0`, `s1 + |s0| = 1`, of
/// `sup_ω [s1 d1(ω) - s0 d0(ω)]`, with `d_i = X_i - lpr(X_i)`.
fn pair_gain(d0: &[f64], d1: &[f64]) -> Result<(f64, f64, f64)> {
    // variables: s1, s0+, s0-, t+, t-
    let mut c = Constraints::new(5).eq(vec![1.0, 1.0, 1.0, 0.0, 0.0], 1.0);
    for (a0, a1) in d0.iter().zip(d1) {
        c = c.ge(vec![-a1, *a0, -a0, 1.0, -1.0], 0.0);
    }
    let r = lp::solve(&LinearProgram::minimize(vec![0.0, 0.0, 0.0, 1.0, -1.0], c))?;
    let s = r
        .solution()
        .expect("normalized pair program is always feasible and bounded");
    let (s1, s0) = (s[0], s[1] - s[2]);
    let t = (0..d0.len())
        .map(|i| s1 * d1[i] - s0 * d0[i])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((s0, s1, t))
}

/// 2-coherence: every ordered pair of entries (a gamble with itself
/// included) must admit no strictly negative two-term gain.
pub fn check_2coherence(a: &Assessment) -> Result<ConsistencyReport> {
    let diffs: Vec<Vec<f64>> = a
        .entries()
        .iter()
        .map(|e| e.gamble.values().iter().map(|v| v - e.lower).collect())
        .collect();
    for (i0, e0) in a.entries().iter().enumerate() {
        for (i1, e1) in a.entries().iter().enumerate() {
            let (s0, s1, t) = pair_gain(&diffs[i0], &diffs[i1])?;
            if t < -TWO_COHERENCE_TOL {
                return Ok(ConsistencyReport {
                    level: Level::TwoCoherence,
                    pass: false,
                    witness: Witness::Pair {
                        failing: Some(PairWitness {
                            x0: e0.name.clone(),
                            x1: e1.name.clone(),
                            s0,
                            s1,
                            t,
                        }),
                    },
                });
            }
        }
    }
    Ok(ConsistencyReport {
        level: Level::TwoCoherence,
        pass: true,
        witness: Witness::Pair { failing: None },
    })
}

pub fn check(a: &Assessment, level: Level) -> Result<ConsistencyReport> {
    match level {
        Level::AvoidingSureLoss => check_asl(a),
        Level::Coherence => check_coherence(a),
        Level::TwoCoherence => check_2coherence(a),
    }
}

/// Upper bound for the upper prevision of a sum from the summands' upper
/// previsions. Valid under coherence only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SublinearSum {
    pub value: f64,
    pub coherence_required: bool,
}

pub fn sublinear_upper_sum(upper_values: &[f64]) -> SublinearSum {
    SublinearSum {
        value: upper_values.iter().sum(),
        coherence_required: true,
    }
}
