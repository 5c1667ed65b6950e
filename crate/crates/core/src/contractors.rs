//! Contraction operators for the primitive relations.
//!
//! For a relation `r` and a box `P`, the contraction operator returns the
//! least box containing `r ∩ P`. Each primitive here (`sum`, `mul`, `sq`,
//! `const`) has a contractor that is idempotent, monotonic, contracting and
//! correct: no point of `r ∩ P` is ever removed. The per-kind contractors
//! iterate their projection formulas until nothing changes, so applying one
//! twice gives bit-identical results.
//!
//! [`apply_lifted`] lifts a contractor to a box over a larger scope and
//! [`big_gamma`] intersects all lifted contractors of a CSP applied to the
//! same box.

use std::fmt;

use crate::boxes::{IntervalBox, VarName};
use crate::decompose::Csp;
use crate::interval::Interval;
use crate::round;

/// Upper bound on passes of a local fixpoint loop. Every pass strictly
/// shrinks a box on the finite float lattice, so the bound is a safety net.
const MAX_LOCAL_PASSES: usize = 100_000;

/// Which primitive relation a constraint denotes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintKind {
    /// `args[0] + args[1] = args[2]`
    Sum,
    /// `args[0] · args[1] = args[2]`
    Mul,
    /// `args[0]² = args[1]`
    Sq,
    /// `args[0] = c`
    Const(f64),
}

impl ConstraintKind {
    pub fn arity(&self) -> usize {
        match self {
            ConstraintKind::Sum | ConstraintKind::Mul => 3,
            ConstraintKind::Sq => 2,
            ConstraintKind::Const(_) => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstraintKind::Sum => "sum",
            ConstraintKind::Mul => "mul",
            ConstraintKind::Sq => "sq",
            ConstraintKind::Const(_) => "const",
        }
    }
}

/// How repeated arguments collapse a constraint onto its distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pattern {
    /// All arguments distinct.
    Plain,
    /// `sq(x,x)` or `mul(x,x,x)`: `x² = x`.
    Idempotent,
    /// `mul(x,x,z)`: `x² = z`.
    Square,
    /// `sum(x,x,z)`: `2x = z`.
    Double,
    /// `sum(x,y,x)` or `sum(y,x,x)`: `y = 0`, with `y` at distinct index 1.
    ZeroOther,
    /// `sum(x,x,x)`: `x = 0`.
    Zero,
    /// `mul(x,y,x)` or `mul(y,x,x)`: `x = 0 ∨ y = 1`, `x` at index 0.
    ZeroOrOne,
}

/// One primitive constraint over named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveConstraint {
    id: usize,
    kind: ConstraintKind,
    args: Vec<VarName>,
    vars: Vec<VarName>,
    pattern: Pattern,
}

impl PrimitiveConstraint {
    fn build(kind: ConstraintKind, args: Vec<VarName>) -> PrimitiveConstraint {
        debug_assert_eq!(args.len(), kind.arity());
        let mut vars: Vec<VarName> = Vec::with_capacity(args.len());
        for a in &args {
            if !vars.contains(a) {
                vars.push(a.clone());
            }
        }
        let pattern = match kind {
            ConstraintKind::Sq if args[0] == args[1] => Pattern::Idempotent,
            ConstraintKind::Mul if args[0] == args[1] && args[1] == args[2] => Pattern::Idempotent,
            ConstraintKind::Mul if args[0] == args[1] => Pattern::Square,
            ConstraintKind::Mul if args[0] == args[2] || args[1] == args[2] => {
                // distinct order is [x, y] where x is the repeated one when it
                // occurs first; normalize so the repeated variable is index 0
                if args[1] == args[2] {
                    vars.swap(0, 1);
                }
                Pattern::ZeroOrOne
            }
            ConstraintKind::Sum if args[0] == args[1] && args[1] == args[2] => Pattern::Zero,
            ConstraintKind::Sum if args[0] == args[1] => Pattern::Double,
            ConstraintKind::Sum if args[0] == args[2] || args[1] == args[2] => {
                if args[1] == args[2] {
                    vars.swap(0, 1);
                }
                Pattern::ZeroOther
            }
            _ => Pattern::Plain,
        };
        PrimitiveConstraint {
            id: 0,
            kind,
            args,
            vars,
            pattern,
        }
    }

    /// `x + y = z`
    pub fn sum(x: VarName, y: VarName, z: VarName) -> PrimitiveConstraint {
        Self::build(ConstraintKind::Sum, vec![x, y, z])
    }

    /// `x · y = z`
    pub fn mul(x: VarName, y: VarName, z: VarName) -> PrimitiveConstraint {
        Self::build(ConstraintKind::Mul, vec![x, y, z])
    }

    /// `x² = y`
    pub fn sq(x: VarName, y: VarName) -> PrimitiveConstraint {
        Self::build(ConstraintKind::Sq, vec![x, y])
    }

    /// `x = c`
    ///
    /// # Panics
    ///
    /// Panics if `c` is not finite.
    pub fn constant(c: f64, x: VarName) -> PrimitiveConstraint {
        assert!(c.is_finite(), "constant value must be finite");
        Self::build(
            ConstraintKind::Const(if c == 0.0 { 0.0 } else { c }),
            vec![x],
        )
    }

    pub fn with_id(mut self, id: usize) -> PrimitiveConstraint {
        self.id = id;
        self
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    /// Arguments in relation order, repeats included.
    pub fn args(&self) -> &[VarName] {
        &self.args
    }

    /// Distinct variables; [`PrimitiveConstraint::contract`] works over this
    /// list.
    pub fn vars(&self) -> &[VarName] {
        &self.vars
    }

    /// Contracts the intervals of [`PrimitiveConstraint::vars`], in order.
    /// Returns all-empty when the relation has no point in the input box.
    pub fn contract(&self, input: &[Interval]) -> Vec<Interval> {
        assert_eq!(input.len(), self.vars.len(), "wrong number of intervals");
        let out = match (self.kind, self.pattern) {
            (_, Pattern::Idempotent) => vec![contract_idempotent(input[0])],
            (_, Pattern::Square) => {
                let (x, z) = contract_sq(input[0], input[1]);
                vec![x, z]
            }
            (_, Pattern::Double) => {
                let (x, z) = contract_double(input[0], input[1]);
                vec![x, z]
            }
            (_, Pattern::Zero) => vec![input[0].intersect(&Interval::point(0.0))],
            (_, Pattern::ZeroOther) => {
                let y = input[1].intersect(&Interval::point(0.0));
                vec![input[0], y]
            }
            (_, Pattern::ZeroOrOne) => {
                let (x, y) = contract_zero_or_one(input[0], input[1]);
                vec![x, y]
            }
            (ConstraintKind::Sum, Pattern::Plain) => {
                let (x, y, z) = contract_sum(input[0], input[1], input[2]);
                vec![x, y, z]
            }
            (ConstraintKind::Mul, Pattern::Plain) => {
                let (x, y, z) = contract_mul(input[0], input[1], input[2]);
                vec![x, y, z]
            }
            (ConstraintKind::Sq, Pattern::Plain) => {
                let (x, y) = contract_sq(input[0], input[1]);
                vec![x, y]
            }
            (ConstraintKind::Const(c), Pattern::Plain) => vec![contract_const(c, input[0])],
        };
        if out.iter().any(Interval::is_empty) {
            vec![Interval::EMPTY; out.len()]
        } else {
            out
        }
    }

    /// Whether the point satisfies the relation in exact arithmetic on the
    /// given (representable) coordinates. Coordinates are indexed like
    /// [`PrimitiveConstraint::args`].
    pub fn holds_exactly(&self, args: &[f64]) -> bool {
        match self.kind {
            ConstraintKind::Sum => {
                let s = args[0] + args[1];
                let bb = s - args[0];
                // TwoSum error must vanish for exactness
                s.is_finite() && s == args[2] && (args[0] - (s - bb)) + (args[1] - bb) == 0.0
            }
            ConstraintKind::Mul => {
                let p = args[0] * args[1];
                p.is_finite() && p == args[2] && args[0].mul_add(args[1], -p) == 0.0
            }
            ConstraintKind::Sq => {
                let p = args[0] * args[0];
                p.is_finite() && p == args[1] && args[0].mul_add(args[0], -p) == 0.0
            }
            ConstraintKind::Const(c) => args[0] == c,
        }
    }
}

impl fmt::Display for PrimitiveConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<&str> = self.args.iter().map(VarName::as_str).collect();
        match self.kind {
            ConstraintKind::Const(c) => write!(
                f,
                "const[{}]({})",
                crate::interval::format_bound(c),
                args[0]
            ),
            k => write!(f, "{}({})", k.name(), args.join(",")),
        }
    }
}

fn all_empty3() -> (Interval, Interval, Interval) {
    (Interval::EMPTY, Interval::EMPTY, Interval::EMPTY)
}

/// Contractor of `x + y = z`.
pub fn contract_sum(x: Interval, y: Interval, z: Interval) -> (Interval, Interval, Interval) {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..MAX_LOCAL_PASSES {
        if x.is_empty() || y.is_empty() || z.is_empty() {
            return all_empty3();
        }
        let nx = x.intersect(&z.sub_outward(&y));
        let ny = y.intersect(&z.sub_outward(&x));
        let nz = z.intersect(&x.add_outward(&y));
        if nx == x && ny == y && nz == z {
            break;
        }
        (x, y, z) = (nx, ny, nz);
    }
    (x, y, z)
}

/// Contractor of `x² = y`.
pub fn contract_sq(x: Interval, y: Interval) -> (Interval, Interval) {
    let (mut x, mut y) = (x, y);
    for _ in 0..MAX_LOCAL_PASSES {
        if x.is_empty() || y.is_empty() {
            return (Interval::EMPTY, Interval::EMPTY);
        }
        let ny = y.intersect(&x.sq_outward());
        let root = ny.sqrt_outer();
        // both branches of the inverse image, each clipped to x
        let nx = x.intersect(&root).hull(&x.intersect(&root.neg()));
        if nx.is_empty() || ny.is_empty() {
            return (Interval::EMPTY, Interval::EMPTY);
        }
        if nx == x && ny == y {
            break;
        }
        (x, y) = (nx, ny);
    }
    (x, y)
}

/// Contractor of `x · y = z`. The inverse images use extended division; when
/// the divisor straddles zero the two quotient branches are joined by their
/// hull.
pub fn contract_mul(x: Interval, y: Interval, z: Interval) -> (Interval, Interval, Interval) {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..MAX_LOCAL_PASSES {
        if x.is_empty() || y.is_empty() || z.is_empty() {
            return all_empty3();
        }
        let nz = z.intersect(&x.mul_outward(&y));
        if nz.is_empty() {
            return all_empty3();
        }
        let nx = x.intersect(&ext_div(&nz, &y));
        if nx.is_empty() {
            return all_empty3();
        }
        let ny = y.intersect(&ext_div(&nz, &nx));
        if ny.is_empty() {
            return all_empty3();
        }
        if nx == x && ny == y && nz == z {
            break;
        }
        (x, y, z) = (nx, ny, nz);
    }
    (x, y, z)
}

/// Contractor of `x = c`.
pub fn contract_const(c: f64, x: Interval) -> Interval {
    x.intersect(&Interval::point(c))
}

/// `x² = x`: the solutions are 0 and 1.
fn contract_idempotent(x: Interval) -> Interval {
    let zero = x.intersect(&Interval::point(0.0));
    let one = x.intersect(&Interval::point(1.0));
    zero.hull(&one)
}

/// `2x = z`. Doubling and halving are exact away from overflow and the
/// subnormal range; the directed helpers cover those.
fn contract_double(x: Interval, z: Interval) -> (Interval, Interval) {
    let two = Interval::point(2.0);
    let nz = z.intersect(&x.mul_outward(&two));
    let nx = x.intersect(&ext_div(&nz, &two));
    if nx.is_empty() || nz.is_empty() {
        (Interval::EMPTY, Interval::EMPTY)
    } else {
        (nx, nz)
    }
}

/// `x · y = x`, i.e. `x = 0 ∨ y = 1`.
fn contract_zero_or_one(x: Interval, y: Interval) -> (Interval, Interval) {
    let x_zero = x.contains_zero();
    let y_one = y.contains(1.0);
    match (x_zero, y_one) {
        (true, true) => (x, y),
        (true, false) => (Interval::point(0.0), y),
        (false, true) => (x, Interval::point(1.0)),
        (false, false) => (Interval::EMPTY, Interval::EMPTY),
    }
}

/// Hull of `{ x : ∃ y ∈ divisor, x·y ∈ numerator }`, outward rounded.
pub(crate) fn ext_div(numerator: &Interval, divisor: &Interval) -> Interval {
    let (Some((zl, zh)), Some((yl, yh))) = (numerator.bounds(), divisor.bounds()) else {
        return Interval::EMPTY;
    };
    if divisor.contains_zero() {
        if numerator.contains_zero() {
            return Interval::ENTIRE;
        }
        if yl == 0.0 && yh == 0.0 {
            return Interval::EMPTY;
        }
        // numerator strictly one-signed, divisor touches zero
        let pos = zl > 0.0;
        return match (yl < 0.0, yh > 0.0) {
            (true, true) => Interval::ENTIRE,
            (false, true) => {
                if pos {
                    Interval::from_bounds(round::div_down(zl, yh), f64::INFINITY)
                } else {
                    Interval::from_bounds(f64::NEG_INFINITY, round::div_up(zh, yh))
                }
            }
            (true, false) => {
                if pos {
                    Interval::from_bounds(f64::NEG_INFINITY, round::div_up(zl, yl))
                } else {
                    Interval::from_bounds(round::div_down(zh, yl), f64::INFINITY)
                }
            }
            (false, false) => unreachable!(),
        };
    }
    let (lo, hi) = if yl > 0.0 {
        if zl >= 0.0 {
            (round::div_down(zl, yh), round::div_up(zh, yl))
        } else if zh <= 0.0 {
            (round::div_down(zl, yl), round::div_up(zh, yh))
        } else {
            (round::div_down(zl, yl), round::div_up(zh, yl))
        }
    } else if zl >= 0.0 {
        (round::div_down(zh, yh), round::div_up(zl, yl))
    } else if zh <= 0.0 {
        (round::div_down(zh, yl), round::div_up(zl, yh))
    } else {
        (round::div_down(zh, yh), round::div_up(zl, yh))
    };
    Interval::from_bounds(lo, hi)
}

/// Applies the contractor of `c` to the projection of `b` onto the
/// constraint's variables, cylindrifies back and joins with `b`.
///
/// # Panics
///
/// Panics if a variable of `c` is not in the scope of `b`.
pub fn apply_lifted(c: &PrimitiveConstraint, b: &IntervalBox) -> IntervalBox {
    let mut out = b.clone();
    if out.is_empty() {
        return out;
    }
    let input: Vec<Interval> = c.vars().iter().map(|v| b.interval(v.as_str())).collect();
    for (v, iv) in c.vars().iter().zip(c.contract(&input)) {
        out.narrow(v.as_str(), iv);
    }
    out
}

/// Simultaneous intersection of every lifted contractor of `csp` applied to
/// the same box.
///
/// # Panics
///
/// Panics if the scope of `b` is not the variable set of `csp`.
pub fn big_gamma(csp: &Csp, b: &IntervalBox) -> IntervalBox {
    assert!(
        csp.initial_box().same_scope(b),
        "box scope differs from the CSP variables"
    );
    let mut acc = b.clone();
    for c in csp.constraints() {
        if acc.is_empty() {
            break;
        }
        acc = acc.join(&apply_lifted(c, b));
    }
    acc
}
