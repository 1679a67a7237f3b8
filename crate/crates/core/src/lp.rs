//! Dense linear programming in normal form `max { cᵀx : Ax ≤ b, x ≥ 0 }`,
//! solved by a two-phase simplex with Bland's smallest-index pivot rule.
//!
//! The solver is generic over the scalar: [`Rat`] gives exact rational
//! arithmetic (the default everywhere certificates matter), `f64` a
//! tolerance-based floating path. At an optimum both the primal vector and
//! the dual vector of the paired problem `min { bᵀy : Aᵀy ≥ c, y ≥ 0 }` are
//! returned; [`verify`] re-checks both feasibilities and the zero duality
//! gap without consulting any solver state.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Exact rational scalar used by the default solve path.
pub type Rat = num_rational::BigRational;

/// Convenience constructor for rational constants.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Scalar operations the simplex needs. Exact types use zero tolerances.
pub trait LpScalar:
    Clone
    + std::fmt::Debug
    + PartialOrd
    + Zero
    + One
    + std::ops::Neg<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Div<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    /// Strictly positive beyond the pivot tolerance.
    fn is_pos(&self) -> bool;
    /// Strictly negative beyond the pivot tolerance.
    fn is_neg(&self) -> bool;
    /// `self <= other` up to the verification tolerance.
    fn approx_le(&self, other: &Self) -> bool;
    /// Equality up to the verification tolerance.
    fn approx_eq(&self, other: &Self) -> bool;
    /// Finite and well-formed (floats reject NaN/∞).
    fn valid(&self) -> bool;
    /// Whether arithmetic is exact; inexact modes map failures to
    /// [`Error::NumericalInstability`].
    fn exact() -> bool;
}

impl LpScalar for Rat {
    fn from_i64(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn approx_le(&self, other: &Self) -> bool {
        self <= other
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn valid(&self) -> bool {
        true
    }
    fn exact() -> bool {
        true
    }
}

const F64_PIVOT_EPS: f64 = 1e-9;
const F64_VERIFY_EPS: f64 = 1e-8;

impl LpScalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_pos(&self) -> bool {
        *self > F64_PIVOT_EPS
    }
    fn is_neg(&self) -> bool {
        *self < -F64_PIVOT_EPS
    }
    fn approx_le(&self, other: &Self) -> bool {
        *self <= *other + F64_VERIFY_EPS
    }
    fn approx_eq(&self, other: &Self) -> bool {
        (*self - *other).abs() <= F64_VERIFY_EPS
    }
    fn valid(&self) -> bool {
        self.is_finite()
    }
    fn exact() -> bool {
        false
    }
}

/// `max { cᵀx : Ax ≤ b, x ≥ 0 }` with a dense constraint matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub constraints: Vec<Vec<S>>,
    pub bounds: Vec<S>,
}

impl<S: LpScalar> LinearProgram<S> {
    pub fn new(objective: Vec<S>, constraints: Vec<Vec<S>>, bounds: Vec<S>) -> Result<Self> {
        if constraints.len() != bounds.len() {
            return Err(Error::InvalidParam(format!(
                "{} constraint rows but {} bounds",
                constraints.len(),
                bounds.len()
            )));
        }
        for row in &constraints {
            if row.len() != objective.len() {
                return Err(Error::InvalidParam(format!(
                    "constraint row of width {} does not match {} variables",
                    row.len(),
                    objective.len()
                )));
            }
        }
        let all = objective
            .iter()
            .chain(bounds.iter())
            .chain(constraints.iter().flatten());
        for v in all {
            if !v.valid() {
                return Err(Error::InvalidParam("non-finite entry".into()));
            }
        }
        Ok(LinearProgram {
            objective,
            constraints,
            bounds,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.bounds.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. At `Optimal`, `x` is primal feasible, `y` dual feasible
/// and `objective = cᵀx = bᵀy` (exactly in rational mode).
#[derive(Clone, Debug)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    pub x: Vec<S>,
    pub y: Vec<S>,
    pub objective: S,
}

/// The dual in the same normal form, using the identity
/// `min { bᵀy : Aᵀy ≥ c, y ≥ 0 } = -max { (-b)ᵀy : (-Aᵀ)y ≤ -c, y ≥ 0 }`.
/// Applying `dualize` twice returns the original program.
pub fn dualize<S: LpScalar>(lp: &LinearProgram<S>) -> LinearProgram<S> {
    let m = lp.num_constraints();
    let n = lp.num_vars();
    let objective: Vec<S> = lp.bounds.iter().map(|b| -b.clone()).collect();
    let constraints: Vec<Vec<S>> = (0..n)
        .map(|j| (0..m).map(|i| -lp.constraints[i][j].clone()).collect())
        .collect();
    let bounds: Vec<S> = lp.objective.iter().map(|c| -c.clone()).collect();
    LinearProgram {
        objective,
        constraints,
        bounds,
    }
}

struct Tableau<S> {
    rows: Vec<Vec<S>>, // m rows of length ncols + 1; last entry is the rhs
    obj: Vec<S>,       // reduced-cost row of length ncols + 1; last entry is -z
    basis: Vec<usize>,
    ncols: usize,
    iterations: usize,
}

impl<S: LpScalar> Tableau<S> {
    fn rhs(&self, i: usize) -> &S {
        &self.rows[i][self.ncols]
    }

    fn pivot(&mut self, prow: usize, pcol: usize) {
        let piv = self.rows[prow][pcol].clone();
        for v in self.rows[prow].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        for r in 0..self.rows.len() {
            if r == prow {
                continue;
            }
            let factor = self.rows[r][pcol].clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..=self.ncols {
                let delta = factor.clone() * self.rows[prow][c].clone();
                self.rows[r][c] = self.rows[r][c].clone() - delta;
            }
        }
        let factor = self.obj[pcol].clone();
        if !factor.is_zero() {
            for c in 0..=self.ncols {
                let delta = factor.clone() * self.rows[prow][c].clone();
                self.obj[c] = self.obj[c].clone() - delta;
            }
        }
        self.basis[prow] = pcol;
        self.iterations += 1;
    }

    /// Bland entering rule: smallest column index (below `col_limit`) with
    /// positive reduced cost.
    fn entering(&self, col_limit: usize) -> Option<usize> {
        (0..col_limit).find(|&j| self.obj[j].is_pos())
    }

    /// Bland leaving rule: minimum ratio, ties broken by smallest basis
    /// variable. `None` means the column is unbounded.
    fn leaving(&self, pcol: usize) -> Option<usize> {
        let mut best: Option<(S, usize)> = None; // (ratio, row)
        for i in 0..self.rows.len() {
            let coeff = &self.rows[i][pcol];
            if !coeff.is_pos() {
                continue;
            }
            let ratio = self.rhs(i).clone() / coeff.clone();
            best = match best {
                None => Some((ratio, i)),
                Some((r, ri)) => {
                    if ratio < r || (ratio == r && self.basis[i] < self.basis[ri]) {
                        Some((ratio, i))
                    } else {
                        Some((r, ri))
                    }
                }
            };
        }
        best.map(|(_, i)| i)
    }

    /// Runs pivots to optimality. Returns false on an unbounded column.
    fn optimize(&mut self, col_limit: usize, max_iterations: usize) -> Result<bool> {
        while let Some(pcol) = self.entering(col_limit) {
            if self.iterations > max_iterations {
                return Err(if S::exact() {
                    Error::LpFailure("iteration limit exceeded".into())
                } else {
                    Error::NumericalInstability
                });
            }
            match self.leaving(pcol) {
                Some(prow) => self.pivot(prow, pcol),
                None => return Ok(false),
            }
            if !S::exact() && !self.obj[self.ncols].valid() {
                return Err(Error::NumericalInstability);
            }
        }
        Ok(true)
    }
}

/// Solves the program to optimality, infeasibility or unboundedness.
///
/// Rows with negative bounds are handled by a phase-1 search over artificial
/// variables; Bland's rule guarantees termination in exact arithmetic.
pub fn solve<S: LpScalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>> {
    let lp = LinearProgram::new(
        lp.objective.clone(),
        lp.constraints.clone(),
        lp.bounds.clone(),
    )?;
    let n = lp.num_vars();
    let m = lp.num_constraints();
    let negated: Vec<bool> = lp.bounds.iter().map(|b| b.is_neg()).collect();
    let art_rows: Vec<usize> = (0..m).filter(|&i| negated[i]).collect();
    let nart = art_rows.len();
    let ncols = n + m + nart;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_seen = 0usize;
    for i in 0..m {
        let mut row = vec![S::zero(); ncols + 1];
        let flip = negated[i];
        for j in 0..n {
            let v = lp.constraints[i][j].clone();
            row[j] = if flip { -v } else { v };
        }
        row[n + i] = if flip { -S::one() } else { S::one() };
        row[ncols] = if flip {
            -lp.bounds[i].clone()
        } else {
            lp.bounds[i].clone()
        };
        if flip {
            let acol = n + m + art_seen;
            art_seen += 1;
            row[acol] = S::one();
            basis.push(acol);
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: vec![S::zero(); ncols + 1],
        basis,
        ncols,
        iterations: 0,
    };
    let max_iterations = 2000 + 200 * (n + m) * (n + m);

    if nart > 0 {
        // Phase 1: maximize -sum(artificials); price out the basic ones.
        for j in 0..=ncols {
            let mut v = S::zero();
            for &i in &art_rows {
                v = v + t.rows[i][j].clone();
            }
            if j >= n + m && j < ncols {
                v = v - S::one();
            }
            t.obj[j] = v;
        }
        // obj holds c_j - z_j with c = -1 on artificials; the rhs cell then
        // starts at sum of artificial values = -(-z).
        let bounded = t.optimize(ncols, max_iterations)?;
        if !bounded {
            return Err(Error::LpFailure("phase 1 reported unbounded".into()));
        }
        let z1 = -t.obj[ncols].clone();
        if z1.is_neg() {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                y: Vec::new(),
                objective: S::zero(),
            });
        }
        // Drive basic artificials out where a real pivot exists; rows left
        // behind are all-zero on real columns and stay inert.
        for i in 0..m {
            if t.basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| {
                    t.rows[i][j].is_pos() || t.rows[i][j].is_neg()
                }) {
                    t.pivot(i, j);
                }
            }
        }
    }

    // Phase 2 objective from the real costs of the current basis.
    for j in 0..=ncols {
        let mut v = if j < n {
            lp.objective[j].clone()
        } else {
            S::zero()
        };
        for i in 0..m {
            let cb = if t.basis[i] < n {
                lp.objective[t.basis[i]].clone()
            } else {
                S::zero()
            };
            if !cb.is_zero() {
                v = v - cb * t.rows[i][j].clone();
            }
        }
        t.obj[j] = v;
    }
    if !t.optimize(n + m, max_iterations)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            y: Vec::new(),
            objective: S::zero(),
        });
    }

    let mut x = vec![S::zero(); n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i).clone();
        }
    }
    // Dual values are the reduced costs of the slack columns, independent of
    // whether the row was negated on entry.
    let y: Vec<S> = (0..m).map(|i| -t.obj[n + i].clone()).collect();
    let objective = -t.obj[ncols].clone();
    if !S::exact() && (!objective.valid() || x.iter().chain(y.iter()).any(|v| !v.valid())) {
        return Err(Error::NumericalInstability);
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        y,
        objective,
    })
}

/// Re-checks an optimal solution from scratch: primal feasibility of `x`,
/// dual feasibility of `y`, and `cᵀx = bᵀy` (exact in rational mode, within
/// tolerance for floats). Returns false for non-optimal statuses.
pub fn verify<S: LpScalar>(lp: &LinearProgram<S>, sol: &LpSolution<S>) -> bool {
    if sol.status != LpStatus::Optimal {
        return false;
    }
    let n = lp.num_vars();
    let m = lp.num_constraints();
    if sol.x.len() != n || sol.y.len() != m {
        return false;
    }
    let zero = S::zero();
    for v in sol.x.iter().chain(sol.y.iter()) {
        if !zero.approx_le(v) {
            return false;
        }
    }
    for i in 0..m {
        let mut lhs = S::zero();
        for j in 0..n {
            lhs = lhs + lp.constraints[i][j].clone() * sol.x[j].clone();
        }
        if !lhs.approx_le(&lp.bounds[i]) {
            return false;
        }
    }
    for j in 0..n {
        let mut lhs = S::zero();
        for i in 0..m {
            lhs = lhs + lp.constraints[i][j].clone() * sol.y[i].clone();
        }
        if !lp.objective[j].approx_le(&lhs) {
            return false;
        }
    }
    let primal: S = (0..n).fold(S::zero(), |acc, j| {
        acc + lp.objective[j].clone() * sol.x[j].clone()
    });
    let dual: S = (0..m).fold(S::zero(), |acc, i| {
        acc + lp.bounds[i].clone() * sol.y[i].clone()
    });
    primal.approx_eq(&dual) && primal.approx_eq(&sol.objective)
}

/// Debug-oriented JSON form `{"c": [...], "b": [...], "A": [[...]]}` with
/// rationals rendered as `"p/q"` strings. Not a stability promise.
pub fn to_json(lp: &LinearProgram<Rat>) -> serde_json::Value {
    let s = |v: &Rat| serde_json::Value::String(format!("{}/{}", v.numer(), v.denom()));
    serde_json::json!({
        "c": lp.objective.iter().map(s).collect::<Vec<_>>(),
        "b": lp.bounds.iter().map(s).collect::<Vec<_>>(),
        "A": lp.constraints.iter().map(|row| row.iter().map(s).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

/// Inverse of [`to_json`].
pub fn from_json(v: &serde_json::Value) -> Result<LinearProgram<Rat>> {
    fn parse_rat(v: &serde_json::Value) -> Result<Rat> {
        let s = v
            .as_str()
            .ok_or_else(|| Error::InvalidParam("rational must be a \"p/q\" string".into()))?;
        crate::guide::parse_ratio(s)
    }
    let arr = |v: &serde_json::Value, key: &str| -> Result<Vec<serde_json::Value>> {
        v.get(key)
            .and_then(|x| x.as_array())
            .cloned()
            .ok_or_else(|| Error::InvalidParam(format!("missing array field {key}")))
    };
    let c = arr(v, "c")?.iter().map(parse_rat).collect::<Result<_>>()?;
    let b = arr(v, "b")?.iter().map(parse_rat).collect::<Result<_>>()?;
    let a = arr(v, "A")?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::InvalidParam("matrix row must be an array".into()))?
                .iter()
                .map(parse_rat)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    LinearProgram::new(c, a, b)
}
