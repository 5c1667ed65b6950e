//! Brute-force reference checks that share no arithmetic with the solver.
//!
//! Equations are evaluated straight from the source syntax tree in
//! round-to-nearest `f64` with a relative residual tolerance. Use it to test
//! the solver, never inside it.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::boxes::{IntervalBox, VarName};
use crate::decompose::{Equation, Expr};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Samples per variable, endpoints included.
    pub n: usize,
    /// Accept a point when `|lhs − rhs| ≤ tol · (1 + |rhs|)` for every equation.
    pub tol: f64,
}

impl Default for GridSpec {
    fn default() -> GridSpec {
        GridSpec { n: 401, tol: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("f({lo}) = {flo} and f({hi}) = {fhi} do not differ in sign")]
    NoSignChange {
        lo: f64,
        hi: f64,
        flo: f64,
        fhi: f64,
    },
}

pub type Point = BTreeMap<VarName, f64>;

/// Evaluates `e` at `point` in plain floating point.
///
/// # Panics
///
/// Panics if a variable of `e` has no value.
pub fn eval(e: &Expr, point: &Point) -> f64 {
    match e {
        Expr::Var(v) => *point.get(v).unwrap_or_else(|| panic!("no value for `{v}`")),
        Expr::Const(d) => d.value(),
        Expr::Add(a, b) => eval(a, point) + eval(b, point),
        Expr::Sub(a, b) => eval(a, point) - eval(b, point),
        Expr::Mul(a, b) => eval(a, point) * eval(b, point),
        Expr::Neg(a) => -eval(a, point),
        Expr::Pow(a, k) => {
            let base = eval(a, point);
            (0..*k).fold(1.0, |acc, _| acc * base)
        }
    }
}

/// Whether `point` satisfies `eq` within the relative tolerance.
pub fn satisfies(eq: &Equation, point: &Point, tol: f64) -> bool {
    let lhs = eval(&eq.lhs, point);
    let rhs = eval(&eq.rhs, point);
    (lhs - rhs).abs() <= tol * (1.0 + rhs.abs())
}

/// Uniform grid over `bx` filtered by the equations, in lexicographic grid
/// order.
///
/// # Panics
///
/// Panics if `spec.n < 2`, `spec.tol` is not positive, or `bx` is empty or
/// has an infinite bound.
pub fn grid_solutions(equations: &[Equation], bx: &IntervalBox, spec: &GridSpec) -> Vec<Point> {
    assert!(spec.n >= 2, "grid needs at least two samples per axis");
    assert!(spec.tol > 0.0, "grid tolerance must be positive");
    assert!(!bx.is_empty(), "cannot sample the empty box");
    let axes: Vec<(VarName, Vec<f64>)> = bx
        .iter()
        .map(|(v, iv)| {
            let (lo, hi) = (iv.lo(), iv.hi());
            assert!(
                lo.is_finite() && hi.is_finite(),
                "cannot sample infinite range of `{v}`"
            );
            let last = (spec.n - 1) as f64;
            let samples = (0..spec.n)
                .map(|i| {
                    if i == spec.n - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * (i as f64 / last)
                    }
                })
                .collect();
            (v.clone(), samples)
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; axes.len()];
    loop {
        let point: Point = axes
            .iter()
            .zip(&idx)
            .map(|((v, s), &i)| (v.clone(), s[i]))
            .collect();
        if equations.iter().all(|eq| satisfies(eq, &point, spec.tol)) {
            out.push(point);
        }
        // odometer increment, last axis fastest
        let mut k = axes.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < spec.n {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Bisection on a sign change of `f` over `[lo, hi]`; stops when the bracket
/// is at most `tol` wide or cannot shrink.
pub fn bisect_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64, OracleError> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(OracleError::NoSignChange {
            lo,
            hi,
            flo: fa,
            fhi: fb,
        });
    }
    let negative_at_a = fa < 0.0;
    while b - a > tol {
        let m = a + (b - a) / 2.0;
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == negative_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    // endpoint with the smaller residual
    Ok(if f(a).abs() <= f(b).abs() { a } else { b })
}
