//! Directed rounding without touching the FPU rounding mode.
//!
//! Every function computes the round-to-nearest result and then recovers the
//! sign of the rounding error with an error-free transformation (TwoSum for
//! addition, a fused multiply-add residual for products, quotients and square
//! roots). The result is moved by one ULP only when it lies on the wrong side
//! of the exact value, which yields true round-toward-∓∞ results.
//!
//! Error-free transformations stop being exact once intermediate quantities
//! fall into the subnormal range. Below [`TINY`] the helpers give up on the
//! exactness test and always step outward, which is still sound.

/// Magnitude below which residuals may be inexact.
const TINY: f64 = 1.0e-270;

#[inline]
fn down_by(value: f64, err: f64) -> f64 {
    if err < 0.0 {
        value.next_down()
    } else {
        value
    }
}

#[inline]
fn up_by(value: f64, err: f64) -> f64 {
    if err > 0.0 {
        value.next_up()
    } else {
        value
    }
}

/// Resolves a non-finite round-to-nearest result of an operation on finite
/// operands (overflow) for a downward-rounded bound.
#[inline]
fn overflow_down(v: f64) -> f64 {
    if v == f64::INFINITY {
        f64::MAX
    } else {
        f64::NEG_INFINITY
    }
}

#[inline]
fn overflow_up(v: f64) -> f64 {
    if v == f64::NEG_INFINITY {
        f64::MIN
    } else {
        f64::INFINITY
    }
}

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        return f64::NEG_INFINITY;
    }
    if !(a.is_finite() && b.is_finite()) {
        return s;
    }
    if !s.is_finite() {
        return overflow_down(s);
    }
    down_by(s, two_sum_err(a, b, s))
}

pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        return f64::INFINITY;
    }
    if !(a.is_finite() && b.is_finite()) {
        return s;
    }
    if !s.is_finite() {
        return overflow_up(s);
    }
    up_by(s, two_sum_err(a, b, s))
}

pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// One-ULP outward step for results too small for an exact residual, never
/// crossing zero on the side the exact result's sign rules out.
fn tiny_step(r: f64, upward: bool, positive: bool) -> f64 {
    match (upward, positive) {
        (true, false) => r.next_up().min(0.0),
        (false, true) => r.next_down().max(0.0),
        (true, true) => r.next_up(),
        (false, false) => r.next_down(),
    }
}

/// Product with the interval convention `0 · ±∞ = 0`.
fn mul_rounded(a: f64, b: f64, upward: bool) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !(a.is_finite() && b.is_finite()) {
        return p;
    }
    if !p.is_finite() {
        return if upward {
            overflow_up(p)
        } else {
            overflow_down(p)
        };
    }
    if p.abs() < TINY {
        return tiny_step(p, upward, (a > 0.0) == (b > 0.0));
    }
    let err = a.mul_add(b, -p);
    if upward {
        up_by(p, err)
    } else {
        down_by(p, err)
    }
}

pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    mul_rounded(a, b, false)
}

pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    mul_rounded(a, b, true)
}

/// Quotient for a nonzero divisor. An infinite numerator over an infinite
/// divisor is never requested by the callers.
fn div_rounded(a: f64, b: f64, upward: bool) -> f64 {
    debug_assert!(b != 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_nan() {
        return if upward {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    if !(a.is_finite() && b.is_finite()) {
        return q;
    }
    if !q.is_finite() {
        return if upward {
            overflow_up(q)
        } else {
            overflow_down(q)
        };
    }
    if q.abs() < TINY || a.abs() < TINY {
        return tiny_step(q, upward, (a > 0.0) == (b > 0.0));
    }
    // a/b - q has the sign of (a - q·b)/b.
    let residual = (-q).mul_add(b, a);
    let err = if b > 0.0 { residual } else { -residual };
    if upward {
        up_by(q, err)
    } else {
        down_by(q, err)
    }
}

pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    div_rounded(a, b, false)
}

pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    div_rounded(a, b, true)
}

fn sqrt_rounded(x: f64, upward: bool) -> f64 {
    debug_assert!(x >= 0.0);
    let r = x.sqrt();
    if x == 0.0 || x.is_infinite() {
        return r;
    }
    if x < TINY {
        return if upward {
            r.next_up()
        } else {
            r.next_down().max(0.0)
        };
    }
    let err = (-r).mul_add(r, x);
    if upward {
        up_by(r, err)
    } else {
        down_by(r, err)
    }
}

pub(crate) fn sqrt_down(x: f64) -> f64 {
    sqrt_rounded(x, false)
}

pub(crate) fn sqrt_up(x: f64) -> f64 {
    sqrt_rounded(x, true)
}
