//! Problem fixtures shared by the benchmarks.

use intcon_core::{csp_from_text, Csp};

/// Parabola meets unit circle; one root in the unit square.
pub const PARABOLA_CIRCLE_UNIT: &str =
    "var x in [0,1]; var y in [0,1]; constraint y = x^2; constraint x^2 + y^2 = 1;";

/// Same curves over `[-2,2]²`; two roots.
pub const PARABOLA_CIRCLE_WIDE: &str =
    "var x in [-2,2]; var y in [-2,2]; constraint y = x^2; constraint x^2 + y^2 = 1;";

/// Three quadrics with a unique root near `(0.5, 0.5, 0.5)` in the unit cube.
pub const THREE_QUADRICS: &str = "var x in [0,1]; var y in [0,1]; var z in [0,1];
constraint x^2 + y^2 + z^2 = 0.75;
constraint x*y + z = 0.75;
constraint x - y*z = 0.25;";

/// Decomposes a fixture.
///
/// # Panics
///
/// Panics if `text` does not parse.
pub fn csp(text: &str) -> Csp {
    csp_from_text(text).expect("fixture parses")
}
