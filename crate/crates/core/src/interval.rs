//! Closed real intervals with `f64` bounds and outward-rounded arithmetic.
//!
//! An interval `[lo,hi]` denotes the set of reals `x` with `lo <= x <= hi`.
//! Infinite bounds are open: `+∞` is never a member of `[0,+∞]`. Every
//! arithmetic operation returns an interval containing the exact real image
//! of its arguments; bounds are rounded toward `−∞` (lower) and `+∞` (upper).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::round;

/// Error raised when constructing an interval from invalid bounds.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("interval bound is NaN")]
    NaN,
    #[error("inverted interval bounds [{0}, {1}]")]
    Inverted(f64, f64),
    #[error("lower bound +inf or upper bound -inf")]
    InfiniteEndpoint,
    #[error("malformed interval literal `{0}`")]
    Malformed(String),
}

/// A closed interval of reals, or the empty set.
///
/// Bounds are stored with zeros normalized to `+0.0`, so structural equality
/// coincides with bit-exact equality of the bounds. The empty interval has a
/// single representation.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[inline]
fn norm_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

impl Interval {
    pub const EMPTY: Interval = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };

    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Builds `[lo,hi]`.
    ///
    /// # Panics
    ///
    /// Panics on NaN bounds, `lo > hi`, `lo = +∞` or `hi = −∞`.
    pub fn new(lo: f64, hi: f64) -> Interval {
        match Interval::try_new(lo, hi) {
            Ok(iv) => iv,
            Err(e) => panic!("invalid interval: {e}"),
        }
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Interval, IntervalError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(IntervalError::NaN);
        }
        if lo > hi {
            return Err(IntervalError::Inverted(lo, hi));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(IntervalError::InfiniteEndpoint);
        }
        Ok(Interval {
            lo: norm_zero(lo),
            hi: norm_zero(hi),
        })
    }

    /// The degenerate interval `[x,x]`.
    pub fn point(x: f64) -> Interval {
        Interval::new(x, x)
    }

    /// Builds an interval from bounds produced by arithmetic, collapsing to
    /// `EMPTY` when they cross.
    #[inline]
    pub(crate) fn from_bounds(lo: f64, hi: f64) -> Interval {
        debug_assert!(!lo.is_nan() && !hi.is_nan());
        if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            Interval::EMPTY
        } else {
            Interval {
                lo: norm_zero(lo),
                hi: norm_zero(hi),
            }
        }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    /// Lower bound. Meaningless for the empty interval.
    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// Upper bound. Meaningless for the empty interval.
    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// `Some((lo, hi))` unless empty.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        (!self.is_empty()).then_some((self.lo, self.hi))
    }

    pub fn is_entire(&self) -> bool {
        *self == Interval::ENTIRE
    }

    pub fn is_point(&self) -> bool {
        !self.is_empty() && self.lo == self.hi
    }

    /// Real membership; infinite bounds are excluded.
    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    /// `self ⊆ other`. The empty interval is a subset of everything.
    pub fn is_subset(&self, other: &Interval) -> bool {
        self.is_empty() || (other.lo <= self.lo && self.hi <= other.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::from_bounds(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Smallest interval containing both arguments.
    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// `hi − lo`, rounded up; `+∞` when a bound is infinite, `0` when empty.
    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            round::sub_up(self.hi, self.lo)
        }
    }

    /// A finite split point.
    ///
    /// For intervals spanning at least three floats the result lies strictly
    /// inside. Half-infinite intervals use `±f64::MAX / 2` when that is
    /// interior.
    ///
    /// # Panics
    ///
    /// Panics on the empty interval.
    pub fn midpoint(&self) -> f64 {
        assert!(!self.is_empty(), "midpoint of the empty interval");
        const HALF_MAX: f64 = f64::MAX * 0.5;
        let (lo, hi) = (self.lo, self.hi);
        let m = match (lo.is_finite(), hi.is_finite()) {
            (false, false) => 0.0,
            (true, false) => {
                if lo < HALF_MAX {
                    HALF_MAX.max(lo)
                } else {
                    lo + (f64::MAX - lo) * 0.5
                }
            }
            (false, true) => {
                if hi > -HALF_MAX {
                    (-HALF_MAX).min(hi)
                } else {
                    hi - (hi - f64::MIN) * 0.5
                }
            }
            (true, true) => {
                let m = 0.5 * lo + 0.5 * hi;
                if m.is_finite() && m != 0.0 {
                    m
                } else {
                    (lo + hi) * 0.5
                }
            }
        };
        let m = norm_zero(m.clamp(lo.max(f64::MIN), hi.min(f64::MAX)));
        if self.is_splittable() && (m <= lo || m >= hi) {
            // Interior float closest to the computed value.
            let up = lo.next_up();
            if up < hi {
                return norm_zero(up);
            }
        }
        m
    }

    /// At least three floats (infinite bounds counted as endpoints) lie in
    /// the interval, so a bisection produces two strictly smaller halves.
    pub fn is_splittable(&self) -> bool {
        !self.is_empty() && self.lo.next_up() < self.hi
    }

    /// Number of `f64` values in the closed interval, counting infinite
    /// bounds. Used to measure progress on the float lattice.
    pub fn float_count(&self) -> u64 {
        if self.is_empty() {
            return 0;
        }
        ordinal(self.hi) - ordinal(self.lo) + 1
    }

    /// Exact negation.
    pub fn neg(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        Interval::from_bounds(-self.hi, -self.lo)
    }

    pub fn add_outward(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        Interval::from_bounds(
            round::add_down(self.lo, other.lo),
            round::add_up(self.hi, other.hi),
        )
    }

    pub fn sub_outward(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        Interval::from_bounds(
            round::sub_down(self.lo, other.hi),
            round::sub_up(self.hi, other.lo),
        )
    }

    pub fn mul_outward(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        let (a, b, c, d) = (self.lo, self.hi, other.lo, other.hi);
        let lo = round::mul_down(a, c)
            .min(round::mul_down(a, d))
            .min(round::mul_down(b, c))
            .min(round::mul_down(b, d));
        let hi = round::mul_up(a, c)
            .max(round::mul_up(a, d))
            .max(round::mul_up(b, c))
            .max(round::mul_up(b, d));
        Interval::from_bounds(lo, hi)
    }

    /// Image of squaring; exactly `0` as lower bound when zero is inside.
    pub fn sq_outward(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        let (lo, hi) = (self.lo, self.hi);
        if lo >= 0.0 {
            Interval::from_bounds(round::mul_down(lo, lo), round::mul_up(hi, hi))
        } else if hi <= 0.0 {
            Interval::from_bounds(round::mul_down(hi, hi), round::mul_up(lo, lo))
        } else {
            let m = (-lo).max(hi);
            Interval::from_bounds(0.0, round::mul_up(m, m))
        }
    }

    /// Image of the square root over the nonnegative part.
    pub fn sqrt_outer(&self) -> Interval {
        let nonneg = self.intersect(&Interval {
            lo: 0.0,
            hi: f64::INFINITY,
        });
        if nonneg.is_empty() {
            return Interval::EMPTY;
        }
        Interval::from_bounds(round::sqrt_down(nonneg.lo), round::sqrt_up(nonneg.hi))
    }
}

/// Monotone map from `f64` (non-NaN) to `u64` preserving order; adjacent
/// floats map to adjacent integers, with `-0.0` and `+0.0` sharing a slot.
fn ordinal(v: f64) -> u64 {
    let v = norm_zero(v);
    let bits = v.to_bits();
    if bits >> 63 == 1 {
        // negative: larger magnitude is smaller
        (1u64 << 63) - (bits & !(1u64 << 63))
    } else {
        (1u64 << 63) + bits
    }
}

/// Formats a bound with the shortest decimal that parses back to the same
/// `f64`; infinities are `inf` and `-inf`.
pub fn format_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        let s = format!("{:?}", norm_zero(v));
        match s.strip_suffix(".0") {
            Some(t) => t.to_string(),
            None => s,
        }
    }
}

/// Inverse of [`format_bound`].
pub fn parse_bound(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t => t.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("empty")
        } else {
            write!(f, "[{},{}]", format_bound(self.lo), format_bound(self.hi))
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Interval {
    type Err = IntervalError;

    fn from_str(s: &str) -> Result<Interval, IntervalError> {
        let s = s.trim();
        if s == "empty" {
            return Ok(Interval::EMPTY);
        }
        let malformed = || IntervalError::Malformed(s.to_string());
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(malformed)?;
        let (a, b) = inner.split_once(',').ok_or_else(malformed)?;
        let lo = parse_bound(a).ok_or_else(malformed)?;
        let hi = parse_bound(b).ok_or_else(malformed)?;
        Interval::try_new(lo, hi)
    }
}
