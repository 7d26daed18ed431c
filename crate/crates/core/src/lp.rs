//! Dense linear programming for desk-scale credal computations.
//!
//! Variables are always nonnegative. A program minimizes `objective · x`
//! subject to `row · x >= rhs` and `row · x = rhs` constraints, optionally
//! restricted to the probability simplex. The solver is a two-phase tableau
//! simplex with Bland's rule; it is meant for a few dozen variables, not for
//! scale.

use itertools::Itertools;

use crate::error::{Error, Result};

/// Feasibility tolerance for constraint residuals and the phase-one optimum.
pub const FEAS_TOL: f64 = 1e-9;
/// Smallest admissible pivot element.
pub const PIVOT_TOL: f64 = 1e-11;
/// Reduced costs above `-COST_TOL` are treated as nonnegative.
const COST_TOL: f64 = 1e-11;
/// L∞ distance under which two vertices are merged.
pub const VERTEX_TOL: f64 = 1e-9;
/// Largest dimension accepted by [`enumerate_vertices`].
pub const MAX_VERTEX_DIMS: usize = 12;
/// Largest number of candidate bases [`enumerate_vertices`] will try.
pub const MAX_VERTEX_CANDIDATES: u128 = 2_000_000;

const MAX_PIVOTS: usize = 100_000;

/// A linear feasible region over nonnegative variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraints {
    pub dims: usize,
    pub ge: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
    /// Adds `Σ x = 1`.
    pub simplex: bool,
}

impl Constraints {
    pub fn new(dims: usize) -> Self {
        Constraints {
            dims,
            ..Default::default()
        }
    }

    pub fn on_simplex(dims: usize) -> Self {
        Constraints {
            dims,
            simplex: true,
            ..Default::default()
        }
    }

    pub fn ge(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.ge.push((row, rhs));
        self
    }

    pub fn eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.eq.push((row, rhs));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dims == 0 {
            return Err(Error::MalformedProgram("no variables".into()));
        }
        for (row, rhs) in self.ge.iter().chain(&self.eq) {
            if row.len() != self.dims {
                return Err(Error::MalformedProgram(format!(
                    "row of length {} in a {}-variable program",
                    row.len(),
                    self.dims
                )));
            }
            if !rhs.is_finite() || row.iter().any(|v| !v.is_finite()) {
                return Err(Error::MalformedProgram("non-finite coefficient".into()));
            }
        }
        Ok(())
    }

    /// All equality rows, the simplex row included.
    fn equalities(&self) -> Vec<(Vec<f64>, f64)> {
        let mut rows = self.eq.clone();
        if self.simplex {
            rows.push((vec![1.0; self.dims], 1.0));
        }
        rows
    }

    /// Largest violation of any constraint at `x` (0 when feasible).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for (row, rhs) in &self.ge {
            worst = worst.max(rhs - dot(row, x));
        }
        for (row, rhs) in self.equalities() {
            worst = worst.max((dot(&row, x) - rhs).abs());
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    /// Minimized.
    pub objective: Vec<f64>,
    pub constraints: Constraints,
}

impl LinearProgram {
    pub fn minimize(objective: Vec<f64>, constraints: Constraints) -> Self {
        LinearProgram { objective, constraints }
    }

    pub fn maximize(objective: Vec<f64>, constraints: Constraints) -> Self {
        LinearProgram {
            objective: objective.into_iter().map(|c| -c).collect(),
            constraints,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Optimal { value: f64, solution: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpResult::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpResult::Optimal { solution, .. } => Some(solution),
            _ => None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, LpResult::Optimal { .. })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `lp`. The reported value is `objective · solution` as stated in
/// `lp` (so a program built with [`LinearProgram::maximize`] reports the
/// negated maximum).
pub fn solve(lp: &LinearProgram) -> Result<LpResult> {
    let cons = &lp.constraints;
    cons.validate()?;
    if lp.objective.len() != cons.dims {
        return Err(Error::MalformedProgram(format!(
            "objective of length {} in a {}-variable program",
            lp.objective.len(),
            cons.dims
        )));
    }
    if lp.objective.iter().any(|v| !v.is_finite()) {
        return Err(Error::MalformedProgram("non-finite objective".into()));
    }
    let mut tableau = Tableau::build(cons);
    if !tableau.phase_one()? {
        return Ok(LpResult::Infeasible);
    }
    if !tableau.phase_two(&lp.objective)? {
        return Ok(LpResult::Unbounded);
    }
    let solution = tableau.primal(cons.dims);
    let value = dot(&lp.objective, &solution);
    Ok(LpResult::Optimal { value, solution })
}

/// Simplex tableau in canonical form: `rows[i]` holds the constraint
/// coefficients followed by the right-hand side, `basis[i]` the basic column.
struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Columns `[art_start, width)` are artificial.
    art_start: usize,
    width: usize,
}

impl Tableau {
    fn build(cons: &Constraints) -> Tableau {
        let n = cons.dims;
        let eqs = cons.equalities();
        let n_ge = cons.ge.len();
        let m = n_ge + eqs.len();
        let art_start = n + n_ge;
        let width = art_start + m;
        let mut rows = Vec::with_capacity(m);
        for (i, (row, rhs)) in cons.ge.iter().chain(eqs.iter()).enumerate() {
            let mut r = vec![0.0; width + 1];
            r[..n].copy_from_slice(row);
            if i < n_ge {
                r[n + i] = -1.0;
            }
            r[width] = *rhs;
            if *rhs < 0.0 {
                r.iter_mut().for_each(|v| *v = -*v);
            }
            r[art_start + i] = 1.0;
            rows.push(r);
        }
        Tableau {
            rows,
            basis: (art_start..width).collect(),
            art_start,
            width,
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
                if v.abs() < 1e-15 {
                    *v = 0.0;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs of every column for the cost vector `cost`.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut red = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (r, v) in red.iter_mut().zip(row) {
                    *r -= cb * v;
                }
            }
        }
        red
    }

    /// Bland's-rule simplex on `cost` over columns `< allowed`. Returns false
    /// when the objective is unbounded below.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let red = self.reduced_costs(cost);
            let Some(enter) = (0..allowed).find(|&j| red[j] < -COST_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
        Err(Error::MalformedProgram("simplex iteration limit reached".into()))
    }

    /// Returns false when the constraints are infeasible.
    fn phase_one(&mut self) -> Result<bool> {
        let mut cost = vec![0.0; self.width];
        cost[self.art_start..].iter_mut().for_each(|c| *c = 1.0);
        self.optimize(&cost, self.width)?;
        let infeasibility: f64 = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= self.art_start)
            .map(|(i, _)| self.rhs(i))
            .sum();
        if infeasibility > FEAS_TOL {
            return Ok(false);
        }
        // Drive zero-level artificials out of the basis where possible. A row
        // with no admissible pivot is redundant and stays inert.
        for i in 0..self.rows.len() {
            if self.basis[i] < self.art_start {
                continue;
            }
            let col = (0..self.art_start)
                .filter(|&j| self.rows[i][j].abs() > 1e-9)
                .max_by(|&a, &b| self.rows[i][a].abs().total_cmp(&self.rows[i][b].abs()));
            if let Some(j) = col {
                self.pivot(i, j);
            }
        }
        Ok(true)
    }

    fn phase_two(&mut self, objective: &[f64]) -> Result<bool> {
        let mut cost = vec![0.0; self.width];
        cost[..objective.len()].copy_from_slice(objective);
        self.optimize(&cost, self.art_start)
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rhs(i).max(0.0);
            }
        }
        x
    }
}

/// All extreme points of the region, merged within [`VERTEX_TOL`]. Empty when
/// the region is empty.
///
/// Basis enumeration: every choice of `dims - rank(eq)` active inequalities is
/// solved together with the independent equalities; singular choices are
/// skipped and infeasible points discarded.
pub fn enumerate_vertices(cons: &Constraints) -> Result<Vec<Vec<f64>>> {
    cons.validate()?;
    let n = cons.dims;

    // Emptiness and boundedness via the solver.
    let probe = solve(&LinearProgram::minimize(vec![0.0; n], cons.clone()))?;
    if !probe.is_optimal() {
        return Ok(Vec::new());
    }
    if !cons.simplex {
        for i in 0..n {
            let mut obj = vec![0.0; n];
            obj[i] = 1.0;
            if solve(&LinearProgram::maximize(obj, cons.clone()))? == LpResult::Unbounded {
                return Err(Error::UnboundedRegion);
            }
        }
    }

    let eqs = independent_rows(&cons.equalities());
    let mut ineqs: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            (r, 0.0)
        })
        .collect();
    ineqs.extend(cons.ge.iter().cloned());

    let k = n.saturating_sub(eqs.len());
    let candidates = binomial(ineqs.len() as u128, k as u128);
    if n > MAX_VERTEX_DIMS || candidates > MAX_VERTEX_CANDIDATES {
        return Err(Error::VertexBudgetExceeded { dims: n, candidates });
    }

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for chosen in (0..ineqs.len()).combinations(k) {
        let mut a: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut b: Vec<f64> = Vec::with_capacity(n);
        for (row, rhs) in eqs.iter().chain(chosen.iter().map(|&i| &ineqs[i])) {
            a.push(row.clone());
            b.push(*rhs);
        }
        let Some(mut x) = solve_square(a, b) else {
            continue;
        };
        x.iter_mut().for_each(|v| {
            if v.abs() < 1e-12 {
                *v = 0.0
            }
        });
        if cons.violation(&x) > FEAS_TOL {
            continue;
        }
        let dup = vertices
            .iter()
            .any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() <= VERTEX_TOL));
        if !dup {
            vertices.push(x);
        }
    }
    Ok(vertices)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Greedy maximal subset of rows with linearly independent left-hand sides.
fn independent_rows(rows: &[(Vec<f64>, f64)]) -> Vec<(Vec<f64>, f64)> {
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut echelon: Vec<Vec<f64>> = Vec::new();
    for (row, rhs) in rows {
        let mut r = row.clone();
        for e in &echelon {
            let lead = e.iter().position(|v| v.abs() > PIVOT_TOL).unwrap();
            let f = r[lead] / e[lead];
            r.iter_mut().zip(e).for_each(|(v, ev)| *v -= f * ev);
        }
        let scale = row.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if r.iter().any(|v| v.abs() > 1e-10 * scale) {
            r.iter_mut().for_each(|v| {
                if v.abs() <= 1e-10 * scale {
                    *v = 0.0
                }
            });
            echelon.push(r);
            kept.push((row.clone(), *rhs));
        }
    }
    kept
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < PIVOT_TOL {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(row);
                for (r, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *r -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}
