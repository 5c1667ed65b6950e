//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use intcon_core::{csp_from_text, Csp, Interval};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// The four-constraint CSP for `y = x²`, `x² + y² = 1` with named
/// auxiliaries: `sq(x,y)`, `sq(y,z)`, `sum(y,z,u)`, `const[1](u)`.
pub const PARABOLA_CIRCLE: &str =
    "var x in [0,1]; var y in [0,1]; constraint y = x^2; constraint x^2 + y^2 = 1;";

pub const PHI_ROOT: f64 = 0.7861513777574233;
pub const PHI_INV: f64 = 0.6180339887498949;

/// Endpoint drawn from a mix of dyadics, uniform reals, zero and large values.
pub fn endpoint(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1..=4 => rng.random_range(-64i32..=64) as f64 / 8.0,
        5..=7 => rng.random_range(-10.0..10.0),
        8 => rng.random_range(-1e-3..1e-3),
        _ => rng.random_range(-1e12..1e12),
    }
}

/// Non-empty interval, occasionally with infinite bounds.
pub fn interval(rng: &mut ChaCha8Rng) -> Interval {
    match rng.random_range(0..20) {
        0 => Interval::ENTIRE,
        1 => Interval::new(endpoint(rng), f64::INFINITY),
        2 => Interval::new(f64::NEG_INFINITY, endpoint(rng)),
        3 => Interval::point(endpoint(rng)),
        _ => {
            let (a, b) = (endpoint(rng), endpoint(rng));
            Interval::new(a.min(b), a.max(b))
        }
    }
}

/// Random non-empty sub-interval of `iv`.
pub fn sub_interval(rng: &mut ChaCha8Rng, iv: Interval) -> Interval {
    let (flo, fhi) = (iv.lo().clamp(-1e15, 1e15), iv.hi().clamp(-1e15, 1e15));
    let draw = |rng: &mut ChaCha8Rng, keep: f64| {
        if rng.random_bool(0.3) {
            keep
        } else if flo < fhi {
            rng.random_range(flo..=fhi)
        } else {
            flo
        }
    };
    let a = draw(rng, iv.lo()).clamp(iv.lo(), iv.hi());
    let b = draw(rng, iv.hi()).clamp(iv.lo(), iv.hi());
    let (lo, hi) = (a.min(b), a.max(b));
    Interval::try_new(lo, hi).unwrap_or(iv)
}

/// Random box around `p`: each side is widened by a random nonnegative
/// amount, occasionally to infinity.
pub fn interval_around(rng: &mut ChaCha8Rng, p: f64) -> Interval {
    let spread = |rng: &mut ChaCha8Rng| match rng.random_range(0..10) {
        0 => 0.0,
        1 => f64::INFINITY,
        2..=5 => rng.random_range(0u32..=64) as f64 / 16.0,
        _ => rng.random_range(0.0..5.0),
    };
    let lo = p - spread(rng);
    let hi = p + spread(rng);
    Interval::new(lo, hi)
}

/// Dyadic with at most 12 significant bits, so sums and products of two are
/// exact.
pub fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-2048i32..=2048) as f64 / 64.0
}

const NAMES: [&str; 3] = ["a", "b", "c"];

fn expr(rng: &mut ChaCha8Rng, nvars: usize, depth: u32) -> String {
    let v = |rng: &mut ChaCha8Rng| NAMES[rng.random_range(0..nvars)].to_string();
    if depth == 0 {
        return match rng.random_range(0..6) {
            0 => rng.random_range(0..=4).to_string(),
            1 => format!("{}^2", v(rng)),
            _ => v(rng),
        };
    }
    let l = expr(rng, nvars, depth - 1);
    let r = expr(rng, nvars, depth - 1);
    match rng.random_range(0..5) {
        0 => format!("{l} + {r}"),
        1 => format!("{l} - ({r})"),
        2 => format!("({l}) * ({r})"),
        3 => format!("-({l})"),
        _ => format!("{}*{}", rng.random_range(1..=3), v(rng)),
    }
}

/// Random problem source over 1..=3 declared variables.
pub fn random_problem(rng: &mut ChaCha8Rng) -> String {
    let nvars = rng.random_range(1..=3);
    let mut text = String::new();
    for name in &NAMES[..nvars] {
        if rng.random_bool(0.15) {
            text.push_str(&format!("var {name};\n"));
        } else {
            let lo = rng.random_range(-8i32..=4) as f64 / 4.0;
            let hi = lo + rng.random_range(1i32..=8) as f64 / 4.0;
            text.push_str(&format!("var {name} in [{lo}, {hi}];\n"));
        }
    }
    for _ in 0..rng.random_range(1..=3) {
        let (dl, dr) = (rng.random_range(0..=2), rng.random_range(0..=1));
        let lhs = expr(rng, nvars, dl);
        let rhs = expr(rng, nvars, dr);
        text.push_str(&format!("constraint {lhs} = {rhs};\n"));
    }
    text
}

/// Exact decimal text of a finite float with a short binary expansion.
pub fn exact_decimal(v: f64) -> String {
    let mut t = format!("{:.40}", v.abs());
    while t.ends_with('0') {
        t.pop();
    }
    if t.ends_with('.') {
        t.pop();
    }
    t
}

/// Random problem with a known exact solution: equations are shifted by
/// constants so that a dyadic point inside the declared domains satisfies
/// them. Returns the source and the planted point.
pub fn planted_problem(rng: &mut ChaCha8Rng) -> (String, Vec<(String, f64)>) {
    use intcon_core::oracle::eval;
    loop {
        let nvars = rng.random_range(1..=3);
        let mut text = String::new();
        let mut point = Vec::new();
        for name in &NAMES[..nvars] {
            let lo = rng.random_range(-8i32..=4) as f64 / 4.0;
            let hi = lo + rng.random_range(1i32..=8) as f64 / 4.0;
            let v = rng.random_range((lo * 16.0) as i32..=(hi * 16.0) as i32) as f64 / 16.0;
            if rng.random_bool(0.15) {
                text.push_str(&format!("var {name};\n"));
            } else {
                text.push_str(&format!("var {name} in [{lo}, {hi}];\n"));
            }
            point.push((name.to_string(), v));
        }
        let assignment: intcon_core::oracle::Point = point
            .iter()
            .map(|(n, v)| (intcon_core::var(n), *v))
            .collect();
        for _ in 0..rng.random_range(1..=3) {
            let (dl, dr) = (rng.random_range(0..=2), rng.random_range(0..=1));
            let lhs = expr(rng, nvars, dl);
            let rhs = expr(rng, nvars, dr);
            let p = intcon_core::parse_problem(&format!("{text}constraint {lhs} = {rhs};"))
                .expect("generated problems parse");
            let eq = p.equations.last().unwrap();
            let shift = eval(&eq.lhs, &assignment) - eval(&eq.rhs, &assignment);
            let sign = if shift < 0.0 { "-" } else { "+" };
            text.push_str(&format!(
                "constraint {lhs} = ({rhs}) {sign} {};\n",
                exact_decimal(shift)
            ));
        }
        let csp = csp_from_text(&text).expect("planted problems parse");
        if csp.constraints().len() <= 14 {
            return (text, point);
        }
    }
}

/// Random decomposed CSP with at most 6 variables and 1..=10 constraints.
pub fn random_csp(rng: &mut ChaCha8Rng) -> (String, Csp) {
    loop {
        let text = random_problem(rng);
        let csp = csp_from_text(&text).expect("generated problems parse");
        let m = csp.constraints().len();
        if (1..=10).contains(&m) && csp.variables().count() <= 6 {
            return (text, csp);
        }
    }
}

/// Proptest strategies.
pub mod strategies {
    use intcon_core::{var, Interval, IntervalBox};
    use proptest::prelude::*;

    pub fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            (-64i32..=64).prop_map(|k| k as f64 / 8.0),
            -1e3f64..1e3,
            -1e-3f64..1e-3,
            Just(0.0),
        ]
    }

    pub fn interval() -> impl Strategy<Value = Interval> {
        let bound = prop_oneof![
            8 => finite(),
            1 => Just(f64::INFINITY),
            1 => Just(f64::NEG_INFINITY),
        ];
        (bound.clone(), bound).prop_filter_map("one-sided infinite point", |(a, b)| {
            Interval::try_new(a.min(b), a.max(b)).ok()
        })
    }

    /// Sub-interval drawn by shrinking each finite side by a fraction.
    pub fn shrink(iv: Interval, s: f64, t: f64) -> Interval {
        let (lo, hi) = (iv.lo(), iv.hi());
        if !(lo.is_finite() && hi.is_finite()) {
            let lo2 = if lo.is_finite() || s < 0.5 {
                lo
            } else {
                hi.min(0.0) - 1.0 / (1.0 - s)
            };
            let hi2 = if hi.is_finite() || t < 0.5 {
                hi
            } else {
                lo.max(0.0) + 1.0 / (1.0 - t)
            };
            return Interval::try_new(lo2.max(lo), hi2.min(hi)).unwrap_or(iv);
        }
        let w = hi - lo;
        let lo2 = lo + w * s * 0.5;
        let hi2 = hi - w * t * 0.5;
        Interval::try_new(lo2.min(hi2).clamp(lo, hi), hi2.max(lo2).clamp(lo, hi)).unwrap_or(iv)
    }

    pub const NAMES: [&str; 4] = ["a", "b", "c", "d"];

    /// Box over the first `n` names.
    pub fn boxed(n: usize) -> impl Strategy<Value = IntervalBox> {
        prop::collection::vec(interval(), n)
            .prop_map(|ivs| IntervalBox::new(NAMES.iter().map(|s| var(s)).zip(ivs)))
    }
}
