//! Sound interval constraint solving over the reals.
//!
//! Problems are systems of polynomial equations over real variables with
//! interval domains. They are decomposed into primitive constraints
//! (`x + y = z`, `x · y = z`, `x² = y`, `x = c`), each with an optimal
//! contraction operator on outward-rounded `f64` intervals. Propagation
//! applies the contractors to a fixpoint; branch-and-prune search bisects
//! what propagation cannot settle. Every answer is an enclosure: an empty
//! result proves there is no solution, otherwise every solution lies in one
//! of the reported boxes.
//!
//! ```
//! use intcon_core::{csp_from_text, solve};
//!
//! let csp = csp_from_text(
//!     "var x in [0,1]; var y in [0,1]; constraint y = x^2; constraint x^2 + y^2 = 1;",
//! ).unwrap();
//! let report = solve(&csp, 1e-10, 4096).unwrap();
//! assert_eq!(report.atomic_boxes.len(), 1);
//! assert!(report.atomic_boxes[0].bx.interval("x").contains(0.7861513777574233));
//! ```

pub mod boxes;
pub mod contractors;
pub mod decompose;
pub mod interval;
pub mod oracle;
pub mod propagation;
mod round;
pub mod search;

pub use boxes::{var, IntervalBox, VarName};
pub use contractors::{
    apply_lifted, big_gamma, contract_const, contract_mul, contract_sq, contract_sum,
    ConstraintKind, PrimitiveConstraint,
};
pub use decompose::{csp_from_text, decompose, parse_problem, var_index, Csp, ParseError, Problem};
pub use interval::Interval;
pub use propagation::{
    gamma_power, propagate_random, propagate_roundrobin, propagate_worklist, Order,
    PropagationError, PropagationOutcome, Propagator, Status, TraceRecord,
};
pub use search::{
    pick_split_var, solve, solve_with, split, AtomicBox, AtomicReason, Path, SolveError,
    SolveOptions, SolveReport, SolveStats, SolveStatus, DEFAULT_NODE_ROUNDS,
};
