//! Linear and linear-fractional programming with verified certificates.
//!
//! Every optimal outcome carries a dual solution whose objective equals the
//! primal one, every infeasible outcome a Farkas certificate, and every
//! unbounded outcome an improving ray. Certificates are checked before a
//! result is returned; in float mode a failed check is reported as
//! [`LpError::NumericBreakdown`] so the caller can retry in rational mode.

mod fractional;
mod simplex;

pub use fractional::{solve_fractional, Cone, FractionalOutcome, FractionalSense};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::numeric::{to_f64, NumericMode, Rational};
use simplex::{solve_standard, Field, StandardForm, TableauResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VarBound {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBound {
    pub fn free() -> Self {
        VarBound::default()
    }

    pub fn nonneg() -> Self {
        VarBound {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub sense: Sense,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
}

impl LinearProgram {
    /// All variables non-negative, no constraints yet.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            sense,
            constraints: Vec::new(),
            bounds: vec![VarBound::nonneg(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bound(&mut self, var: usize, bound: VarBound) -> &mut Self {
        self.bounds[var] = bound;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Multipliers on the standardised rows proving infeasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    /// One multiplier per original constraint, followed by one per finite
    /// two-sided variable bound. A non-negative combination of
    /// `>=`-oriented rows collapses to `0 >= positive`.
    pub multipliers: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Primal point in original variables (empty unless optimal).
    pub primal: Vec<Rational>,
    /// Dual value per original constraint (empty unless optimal). For a
    /// maximisation, `<=` rows carry non-negative duals; for a minimisation,
    /// `>=` rows do.
    pub duals: Vec<Rational>,
    pub objective: Option<Rational>,
    pub dual_objective: Option<Rational>,
    pub farkas: Option<FarkasCertificate>,
    /// Improving direction in original variables when unbounded.
    pub ray: Option<Vec<Rational>>,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self) -> Option<&Rational> {
        self.objective.as_ref()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("numeric breakdown: {0}; retry with --mode rational")]
    NumericBreakdown(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("denominator vanishes on the whole cone")]
    DegenerateDenominator,
}

/// How an original variable is expressed in standard columns.
#[derive(Debug, Clone)]
struct VarMap {
    offset: Rational,
    cols: Vec<(usize, i8)>,
}

#[derive(Debug, Clone)]
struct Standardised {
    form: StandardForm<Rational>,
    vars: Vec<VarMap>,
    /// +1 or -1 per standard row (rows are negated to make `b >= 0`).
    row_sign: Vec<i8>,
    /// Number of standard rows coming from original constraints.
    original_rows: usize,
    objective_offset: Rational,
    /// -1 when the original problem is a maximisation.
    sense_sign: i8,
}

fn standardise(lp: &LinearProgram) -> Result<Standardised, LpError> {
    let n = lp.num_vars();
    if lp.bounds.len() != n {
        return Err(LpError::DimensionMismatch(format!(
            "{} bounds for {n} variables",
            lp.bounds.len()
        )));
    }
    if let Some(c) = lp.constraints.iter().find(|c| c.coeffs.len() != n) {
        return Err(LpError::DimensionMismatch(format!(
            "constraint with {} coefficients for {n} variables",
            c.coeffs.len()
        )));
    }

    let mut vars = Vec::with_capacity(n);
    let mut ncols = 0usize;
    // (structural column, upper limit) rows for two-sided bounds
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &lp.bounds {
        let map = match (&b.lower, &b.upper) {
            (Some(l), None) => VarMap { offset: l.clone(), cols: vec![(ncols, 1)] },
            (Some(l), Some(u)) => {
                bound_rows.push((ncols, u - l));
                VarMap { offset: l.clone(), cols: vec![(ncols, 1)] }
            }
            (None, Some(u)) => VarMap { offset: u.clone(), cols: vec![(ncols, -1)] },
            (None, None) => VarMap {
                offset: Rational::zero(),
                cols: vec![(ncols, 1), (ncols + 1, -1)],
            },
        };
        ncols += map.cols.len();
        vars.push(map);
    }

    // Rows in structural columns, before slacks.
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![Rational::zero(); ncols];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            rhs -= a * &vars[j].offset;
            for &(col, s) in &vars[j].cols {
                if s > 0 {
                    coeffs[col] += a;
                } else {
                    coeffs[col] -= a;
                }
            }
        }
        rows.push((coeffs, c.relation, rhs));
    }
    let original_rows = rows.len();
    for (col, limit) in bound_rows {
        let mut coeffs = vec![Rational::zero(); ncols];
        coeffs[col] = Rational::from_integer(1.into());
        rows.push((coeffs, Relation::Le, limit));
    }

    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let width = ncols + slack_count;
    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    let mut row_sign = Vec::with_capacity(rows.len());
    let mut slack = ncols;
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(width, Rational::zero());
        match rel {
            Relation::Le => {
                row[slack] = Rational::from_integer(1.into());
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = Rational::from_integer((-1).into());
                slack += 1;
            }
            Relation::Eq => {}
        }
        if rhs.is_negative() {
            a.push(row.into_iter().map(|x| -x).collect());
            b.push(-rhs);
            row_sign.push(-1);
        } else {
            a.push(row);
            b.push(rhs);
            row_sign.push(1);
        }
    }

    let sense_sign: i8 = match lp.sense {
        Sense::Minimize => 1,
        Sense::Maximize => -1,
    };
    let mut c = vec![Rational::zero(); width];
    let mut objective_offset = Rational::zero();
    for (j, cj) in lp.objective.iter().enumerate() {
        let cj = if sense_sign > 0 { cj.clone() } else { -cj };
        objective_offset += &cj * &vars[j].offset;
        for &(col, s) in &vars[j].cols {
            if s > 0 {
                c[col] += &cj;
            } else {
                c[col] -= &cj;
            }
        }
    }

    Ok(Standardised {
        form: StandardForm { a, b, c },
        vars,
        row_sign,
        original_rows,
        objective_offset,
        sense_sign,
    })
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scale(v: &[Rational]) -> f64 {
    v.iter().map(|x| to_f64(x).abs()).fold(1.0, f64::max)
}

/// Checks a residual against zero in the given mode.
fn close(mode: NumericMode, residual: &Rational, magnitude: f64) -> bool {
    match mode {
        NumericMode::Rational => residual.is_zero(),
        NumericMode::Float { tolerance } => to_f64(residual).abs() <= tolerance * magnitude,
    }
}

fn breakdown(mode: NumericMode, what: &str) -> LpError {
    debug_assert!(!mode.is_exact(), "exact certificate failed: {what}");
    LpError::NumericBreakdown(what.to_string())
}

/// Solves `lp` deterministically (Bland's rule) and verifies the attached
/// certificate.
pub fn solve_lp(lp: &LinearProgram, mode: NumericMode) -> Result<LpOutcome, LpError> {
    let st = standardise(lp)?;
    let raw = match mode {
        NumericMode::Rational => solve_standard(&st.form, 0.0),
        NumericMode::Float { tolerance } => {
            let sf = StandardForm {
                a: st.form.a.iter().map(|r| r.iter().map(f64::from_rational).collect()).collect(),
                b: st.form.b.iter().map(f64::from_rational).collect(),
                c: st.form.c.iter().map(f64::from_rational).collect(),
            };
            match solve_standard(&sf, tolerance) {
                TableauResult::Optimal { x, y } => TableauResult::Optimal {
                    x: x.iter().map(Field::to_rational).collect(),
                    y: y.iter().map(Field::to_rational).collect(),
                },
                TableauResult::Infeasible { y } => TableauResult::Infeasible {
                    y: y.iter().map(Field::to_rational).collect(),
                },
                TableauResult::Unbounded { ray } => TableauResult::Unbounded {
                    ray: ray.iter().map(Field::to_rational).collect(),
                },
            }
        }
    };
    let form = &st.form;
    let mag = scale(&form.b).max(scale(&form.c)).max(
        form.a.iter().map(|r| scale(r)).fold(1.0, f64::max),
    );

    match raw {
        TableauResult::Optimal { mut x, y } => {
            if !mode.is_exact() {
                // Clip round-off below zero.
                for v in x.iter_mut() {
                    if v.is_negative() {
                        *v = Rational::zero();
                    }
                }
            }
            for (row, bi) in form.a.iter().zip(&form.b) {
                if !close(mode, &(dot(row, &x) - bi), mag * scale(&x)) {
                    return Err(breakdown(mode, "primal infeasible at reported optimum"));
                }
            }
            for j in 0..form.c.len() {
                let col: Rational = form.a.iter().zip(&y).map(|(r, yi)| &r[j] * yi).sum();
                let reduced = &form.c[j] - col;
                if reduced.is_negative() && !close(mode, &reduced, mag * scale(&y)) {
                    return Err(breakdown(mode, "dual infeasible at reported optimum"));
                }
            }
            let primal_std = dot(&form.c, &x);
            let dual_std = dot(&form.b, &y);
            if !close(mode, &(&primal_std - &dual_std), mag * scale(&x).max(scale(&y))) {
                return Err(breakdown(mode, "duality gap at reported optimum"));
            }

            let primal: Vec<Rational> = st
                .vars
                .iter()
                .map(|v| {
                    v.cols.iter().fold(v.offset.clone(), |acc, &(col, s)| {
                        if s > 0 {
                            acc + &x[col]
                        } else {
                            acc - &x[col]
                        }
                    })
                })
                .collect();
            let sign = Rational::from_integer(st.sense_sign.into());
            let duals: Vec<Rational> = (0..st.original_rows)
                .map(|i| &y[i] * Rational::from_integer(st.row_sign[i].into()) * &sign)
                .collect();
            let objective = dot(&lp.objective, &primal);
            let dual_objective = (dual_std + &st.objective_offset) * &sign;
            Ok(LpOutcome {
                status: LpStatus::Optimal,
                primal,
                duals,
                objective: Some(objective),
                dual_objective: Some(dual_objective),
                farkas: None,
                ray: None,
            })
        }
        TableauResult::Infeasible { y } => {
            if !verify_standard_farkas(form, &y, mode, mag) {
                return Err(breakdown(mode, "Farkas certificate failed verification"));
            }
            let multipliers = y
                .iter()
                .zip(&st.row_sign)
                .map(|(v, s)| v * Rational::from_integer((*s).into()))
                .collect();
            Ok(LpOutcome {
                status: LpStatus::Infeasible,
                primal: vec![],
                duals: vec![],
                objective: None,
                dual_objective: None,
                farkas: Some(FarkasCertificate { multipliers }),
                ray: None,
            })
        }
        TableauResult::Unbounded { ray } => {
            for (row, _) in form.a.iter().zip(&form.b) {
                if !close(mode, &dot(row, &ray), mag * scale(&ray)) {
                    return Err(breakdown(mode, "unbounded ray leaves the feasible set"));
                }
            }
            let slope = dot(&form.c, &ray);
            if !slope.is_negative() || close(mode, &slope, mag * scale(&ray)) {
                return Err(breakdown(mode, "unbounded ray does not improve the objective"));
            }
            let direction = st
                .vars
                .iter()
                .map(|v| {
                    v.cols.iter().fold(Rational::zero(), |acc, &(col, s)| {
                        if s > 0 {
                            acc + &ray[col]
                        } else {
                            acc - &ray[col]
                        }
                    })
                })
                .collect();
            Ok(LpOutcome {
                status: LpStatus::Unbounded,
                primal: vec![],
                duals: vec![],
                objective: None,
                dual_objective: None,
                farkas: None,
                ray: Some(direction),
            })
        }
    }
}

fn verify_standard_farkas(form: &StandardForm<Rational>, y: &[Rational], mode: NumericMode, mag: f64) -> bool {
    let by = dot(&form.b, y);
    if !by.is_positive() || close(mode, &by, mag * scale(y)) {
        return false;
    }
    (0..form.c.len()).all(|j| {
        let col: Rational = form.a.iter().zip(y).map(|(r, yi)| &r[j] * yi).sum();
        !col.is_positive() || close(mode, &col, mag * scale(y))
    })
}

/// Re-checks a Farkas certificate against the program it claims to refute:
/// the combination `sum_i y_i * row_i` has no positive coefficient on any
/// standard column yet a positive right-hand side.
pub fn verify_farkas(lp: &LinearProgram, cert: &FarkasCertificate, mode: NumericMode) -> bool {
    let Ok(st) = standardise(lp) else {
        return false;
    };
    if cert.multipliers.len() != st.row_sign.len() {
        return false;
    }
    let y: Vec<Rational> = cert
        .multipliers
        .iter()
        .zip(&st.row_sign)
        .map(|(v, s)| v * Rational::from_integer((*s).into()))
        .collect();
    let form = &st.form;
    let mag = scale(&form.b).max(form.a.iter().map(|r| scale(r)).fold(1.0, f64::max));
    verify_standard_farkas(form, &y, mode, mag)
}
