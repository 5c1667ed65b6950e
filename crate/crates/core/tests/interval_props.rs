//! Outward-rounded interval arithmetic: soundness, monotonicity, lattice laws.

use intcon_core::Interval;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-64i32..=64).prop_map(|k| k as f64 / 8.0),
        -1e6f64..1e6,
        -1e-6f64..1e-6,
        prop::num::f64::NORMAL,
        Just(0.0),
        Just(f64::MAX),
        Just(f64::MIN),
    ]
}

fn bound() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => finite(),
        1 => Just(f64::INFINITY),
        1 => Just(f64::NEG_INFINITY),
    ]
}

fn interval() -> impl Strategy<Value = Interval> {
    (bound(), bound()).prop_filter_map("two infinite bounds of one sign", |(a, b)| {
        Interval::try_new(a.min(b), a.max(b)).ok()
    })
}

fn maybe_empty() -> impl Strategy<Value = Interval> {
    prop_oneof![9 => interval(), 1 => Just(Interval::EMPTY)]
}

/// Interval and a finite member of it.
fn with_member() -> impl Strategy<Value = (Interval, f64)> {
    (interval(), 0.0f64..=1.0).prop_map(|(iv, t)| {
        let lo = iv.lo().max(f64::MIN);
        let hi = iv.hi().min(f64::MAX);
        let x = lo + (hi / 2.0 - lo / 2.0) * 2.0 * t;
        (iv, x.clamp(lo, hi))
    })
}

/// Interval and a sub-interval of it.
fn nested() -> impl Strategy<Value = (Interval, Interval)> {
    (with_member(), 0.0f64..=1.0, 0.0f64..=1.0).prop_map(|((outer, x), s, t)| {
        let lo = if s < 0.2 {
            outer.lo()
        } else {
            x - (x - outer.lo().max(f64::MIN)) * s
        };
        let hi = if t < 0.2 {
            outer.hi()
        } else {
            x + (outer.hi().min(f64::MAX) - x) * t
        };
        let lo = lo.clamp(outer.lo(), x);
        let hi = hi.clamp(x, outer.hi());
        (outer, Interval::new(lo, hi))
    })
}

fn well_formed(iv: Interval) -> bool {
    match iv.bounds() {
        None => true,
        Some((lo, hi)) => {
            !lo.is_nan()
                && !hi.is_nan()
                && lo <= hi
                && lo != f64::INFINITY
                && hi != f64::NEG_INFINITY
        }
    }
}

/// `x ∈ iv`, with infinite results counted as inside an interval unbounded
/// on that side.
fn holds(iv: Interval, x: f64) -> bool {
    if x.is_nan() {
        return false;
    }
    match iv.bounds() {
        None => false,
        Some((lo, hi)) => {
            if x == f64::INFINITY {
                hi == f64::INFINITY || hi == f64::MAX
            } else if x == f64::NEG_INFINITY {
                lo == f64::NEG_INFINITY || lo == f64::MIN
            } else {
                lo <= x && x <= hi
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn forward_ops_are_sound((a, x) in with_member(), (b, y) in with_member()) {
        // exact results are only checked where they are representable
        let s = x + y;
        if s.is_finite() && (s - x == y) && (s - y == x) {
            prop_assert!(holds(a.add_outward(&b), s), "{x} + {y} ∉ {a} + {b}");
        }
        let d = x - y;
        if d.is_finite() && (d + y == x) {
            prop_assert!(holds(a.sub_outward(&b), d), "{x} - {y} ∉ {a} - {b}");
        }
        let p = x * y;
        if p.is_finite() && x.mul_add(y, -p) == 0.0 {
            prop_assert!(holds(a.mul_outward(&b), p), "{x} · {y} ∉ {a} · {b}");
        }
        let q = x * x;
        if q.is_finite() && x.mul_add(x, -q) == 0.0 {
            prop_assert!(holds(a.sq_outward(), q), "{x}² ∉ {a}²");
        }
        prop_assert!(holds(a.neg(), -x));
    }

    #[test]
    fn inexact_results_are_bracketed((a, x) in with_member(), (b, y) in with_member()) {
        // a rounded result must be widened on the side the real value lies
        let s = a.add_outward(&b);
        let r = x + y;
        if r.is_finite() {
            let bb = r - x;
            let err = (x - (r - bb)) + (y - bb);
            if err > 0.0 {
                prop_assert!(s.hi() > r, "{x}+{y} rounded down but hi = {}", s.hi());
            } else if err < 0.0 {
                prop_assert!(s.lo() < r, "{x}+{y} rounded up but lo = {}", s.lo());
            }
            prop_assert!(s.lo() <= r && r <= s.hi());
        }
        let p = a.mul_outward(&b);
        let r = x * y;
        if r.is_finite() && r.abs() > 1e-290 {
            let err = x.mul_add(y, -r);
            if err > 0.0 {
                prop_assert!(p.hi() > r, "{x}·{y} rounded down but hi = {}", p.hi());
            } else if err < 0.0 {
                prop_assert!(p.lo() < r, "{x}·{y} rounded up but lo = {}", p.lo());
            }
            prop_assert!(p.lo() <= r && r <= p.hi());
        }
    }

    #[test]
    fn sqrt_is_sound((a, x) in with_member()) {
        let r = a.sqrt_outer();
        prop_assert!(well_formed(r));
        if x >= 0.0 {
            let s = x.sqrt();
            // s is within half an ulp of √x, so √x lies in [s⁻, s⁺]
            prop_assert!(r.lo() <= s.next_up() && s.next_down() <= r.hi(), "√{x} ∉ {r}");
            prop_assert!(r.lo() <= s && s <= r.hi() || s * s != x);
        }
    }

    #[test]
    fn forward_ops_are_monotone((a2, a) in nested(), (b2, b) in nested()) {
        prop_assert!(a.add_outward(&b).is_subset(&a2.add_outward(&b2)));
        prop_assert!(a.sub_outward(&b).is_subset(&a2.sub_outward(&b2)));
        prop_assert!(a.mul_outward(&b).is_subset(&a2.mul_outward(&b2)));
        prop_assert!(a.sq_outward().is_subset(&a2.sq_outward()));
        prop_assert!(a.sqrt_outer().is_subset(&a2.sqrt_outer()));
        prop_assert!(a.neg().is_subset(&a2.neg()));
    }

    #[test]
    fn no_operation_produces_nan_or_inverted_bounds(a in maybe_empty(), b in maybe_empty()) {
        for r in [
            a.add_outward(&b),
            a.sub_outward(&b),
            a.mul_outward(&b),
            a.sq_outward(),
            a.sqrt_outer(),
            a.neg(),
            a.intersect(&b),
            a.hull(&b),
        ] {
            prop_assert!(well_formed(r), "{r:?} from {a:?}, {b:?}");
        }
    }

    #[test]
    fn intersection_laws(a in maybe_empty(), b in maybe_empty(), c in maybe_empty()) {
        prop_assert_eq!(a.intersect(&a), a);
        prop_assert_eq!(a.intersect(&b), b.intersect(&a));
        prop_assert_eq!(a.intersect(&b).intersect(&c), a.intersect(&b.intersect(&c)));
        prop_assert!(a.intersect(&b).is_subset(&a));
    }

    #[test]
    fn hull_is_least_upper_bound(a in maybe_empty(), b in maybe_empty(), c in maybe_empty()) {
        let h = a.hull(&b);
        prop_assert!(a.is_subset(&h) && b.is_subset(&h));
        if a.is_subset(&c) && b.is_subset(&c) {
            prop_assert!(h.is_subset(&c));
        }
        if let (Some((al, ah)), Some((bl, bh))) = (a.bounds(), b.bounds()) {
            prop_assert_eq!(h, Interval::new(al.min(bl), ah.max(bh)));
        }
    }

    #[test]
    fn midpoint_splits_strictly(a in interval()) {
        if a.is_splittable() {
            let m = a.midpoint();
            prop_assert!(m.is_finite() && a.lo() < m && m < a.hi(), "midpoint {m} of {a}");
            let (l, r) = (Interval::new(a.lo(), m), Interval::new(m, a.hi()));
            prop_assert!(l.float_count() < a.float_count() && r.float_count() < a.float_count());
        }
    }

    #[test]
    fn display_round_trips(a in maybe_empty()) {
        let back: Interval = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
        if let Some((lo, hi)) = a.bounds() {
            prop_assert_eq!(back.lo().to_bits(), lo.to_bits());
            prop_assert_eq!(back.hi().to_bits(), hi.to_bits());
        }
    }
}
