//! Branch-and-prune over the subdivision tree of the initial box.
//!
//! Each node is propagated to a fixpoint, or for at most
//! [`SolveOptions::node_rounds`] rounds. An empty result is pruned; a box
//! whose user variables are all at most `eps` wide (or cannot be bisected
//! any further) is emitted as an atomic box; anything else is split on its
//! widest user variable and both halves are explored, left first. Every
//! solution inside the initial box ends up in some atomic box.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::boxes::{IntervalBox, VarName};
use crate::decompose::Csp;
use crate::interval::Interval;
use crate::propagation::{Order, PropagationError, Propagator, TraceRecord};

/// Position in the subdivision tree: `false` for a left half, `true` for a
/// right half. Lexicographic order is depth-first left-first order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(Vec<bool>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn child(&self, right: bool) -> Path {
        let mut bits = self.0.clone();
        bits.push(right);
        Path(bits)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// `0`/`1` digits; the root is the empty string.
    pub fn to_bitstring(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Option<Path> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<bool>>>()
            .map(Path)
    }
}

/// Bitstring, or `root` for the empty path.
impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("root")
        } else {
            f.write_str(&self.to_bitstring())
        }
    }
}

/// Why a box was not split further.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomicReason {
    /// Every user variable is at most `eps` wide.
    Converged,
    /// Some user variable is wider than `eps` but spans at most two floats.
    Unsplittable,
    /// Narrow enough, but propagation hit the per-node round limit before
    /// stabilizing. The box still encloses every solution it started with.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicBox {
    pub bx: IntervalBox,
    pub path: Path,
    pub reason: AtomicReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Infeasible,
    Enclosures,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub contractor_applications: usize,
    pub max_depth: usize,
    pub nodes: usize,
    /// Nodes whose propagation hit the per-node round limit.
    pub stalled_nodes: usize,
    pub elapsed: Duration,
}

/// Wall-clock time is not part of equality.
impl PartialEq for SolveStats {
    fn eq(&self, other: &SolveStats) -> bool {
        self.contractor_applications == other.contractor_applications
            && self.max_depth == other.max_depth
            && self.nodes == other.nodes
            && self.stalled_nodes == other.stalled_nodes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// In path order.
    pub atomic_boxes: Vec<AtomicBox>,
    pub pruned_count: usize,
    /// The node boxes (before propagation) that propagation proved empty,
    /// in path order.
    pub pruned_boxes: Vec<(Path, IntervalBox)>,
    pub status: SolveStatus,
    pub stats: SolveStats,
    /// False when the search stopped at the box budget.
    pub complete: bool,
    /// Per-node propagation traces when tracing was requested.
    pub trace: Option<Vec<(Path, Vec<TraceRecord>)>>,
}

impl SolveReport {
    /// Whether some atomic box contains `point` (user variables only).
    pub fn encloses(&self, point: &std::collections::BTreeMap<VarName, f64>) -> bool {
        self.atomic_boxes
            .iter()
            .any(|a| a.bx.project(point.keys()).contains_point(point))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("more than {max_boxes} atomic boxes; results are incomplete")]
    BudgetExceeded {
        max_boxes: usize,
        partial: Box<SolveReport>,
    },
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}

pub const DEFAULT_NODE_ROUNDS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub eps: f64,
    pub max_boxes: usize,
    pub order: Order,
    pub trace: bool,
    /// Propagation round limit per node. Chaotic iteration can approach its
    /// fixpoint arbitrarily slowly; a node that hits the limit is split like
    /// any other wide box.
    pub node_rounds: usize,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            eps: 1e-10,
            max_boxes: 4096,
            order: Order::Worklist,
            trace: false,
            node_rounds: DEFAULT_NODE_ROUNDS,
        }
    }
}

/// Bisects `v` at its midpoint into closed halves sharing the midpoint.
///
/// # Panics
///
/// Panics if `v` is unbound or its interval is not splittable.
pub fn split(b: &IntervalBox, v: &str) -> (IntervalBox, IntervalBox) {
    let iv = b.interval(v);
    assert!(iv.is_splittable(), "`{v}` = {iv} cannot be split");
    let mid = iv.midpoint();
    let mut left = b.clone();
    let mut right = b.clone();
    left.set(v, Interval::new(iv.lo(), mid));
    right.set(v, Interval::new(mid, iv.hi()));
    (left, right)
}

/// Widest splittable user variable wider than `eps`; ties go to the
/// lexicographically smallest name.
pub fn pick_split_var<'a>(
    b: &IntervalBox,
    user_vars: impl IntoIterator<Item = &'a VarName>,
    eps: f64,
) -> Option<VarName> {
    let mut best: Option<(&VarName, f64)> = None;
    let mut vars: Vec<&VarName> = user_vars.into_iter().collect();
    vars.sort();
    for v in vars {
        let iv = b.interval(v.as_str());
        let w = iv.width();
        if w > eps && iv.is_splittable() && best.is_none_or(|(_, bw)| w > bw) {
            best = Some((v, w));
        }
    }
    best.map(|(v, _)| v.clone())
}

/// Branch-and-prune with worklist propagation.
pub fn solve(csp: &Csp, eps: f64, max_boxes: usize) -> Result<SolveReport, SolveError> {
    solve_with(
        csp,
        &SolveOptions {
            eps,
            max_boxes,
            ..SolveOptions::default()
        },
    )
}

/// # Panics
///
/// Panics unless `eps > 0`, `max_boxes ≥ 1` and `node_rounds ≥ 1`.
pub fn solve_with(csp: &Csp, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    assert!(opts.eps > 0.0, "eps must be positive");
    assert!(opts.max_boxes >= 1, "max_boxes must be at least 1");
    assert!(opts.node_rounds >= 1, "node_rounds must be at least 1");
    let started = Instant::now();
    let propagator = Propagator::new(csp)
        .order(opts.order)
        .trace(opts.trace)
        .max_rounds(opts.node_rounds);
    let mut report = SolveReport {
        atomic_boxes: Vec::new(),
        pruned_count: 0,
        pruned_boxes: Vec::new(),
        status: SolveStatus::Infeasible,
        stats: SolveStats::default(),
        complete: true,
        trace: opts.trace.then(Vec::new),
    };
    let mut stack = vec![(Path::root(), csp.initial_box().clone())];
    while let Some((path, node)) = stack.pop() {
        report.stats.nodes += 1;
        report.stats.max_depth = report.stats.max_depth.max(path.depth());
        let outcome = propagator.run_capped(&node)?;
        report.stats.contractor_applications += outcome.steps;
        report.stats.stalled_nodes += usize::from(!outcome.converged);
        if let (Some(all), Some(t)) = (&mut report.trace, outcome.trace) {
            all.push((path.clone(), t));
        }
        let fixpoint = outcome.fixpoint;
        if fixpoint.is_empty() {
            report.pruned_count += 1;
            report.pruned_boxes.push((path, node));
            continue;
        }
        match pick_split_var(&fixpoint, csp.user_vars(), opts.eps) {
            Some(v) => {
                let (left, right) = split(&fixpoint, v.as_str());
                stack.push((path.child(true), right));
                stack.push((path.child(false), left));
            }
            None => {
                if report.atomic_boxes.len() == opts.max_boxes {
                    report.complete = false;
                    report.status = SolveStatus::Enclosures;
                    report.stats.elapsed = started.elapsed();
                    return Err(SolveError::BudgetExceeded {
                        max_boxes: opts.max_boxes,
                        partial: Box::new(report),
                    });
                }
                let converged = csp
                    .user_vars()
                    .iter()
                    .all(|v| fixpoint.interval(v.as_str()).width() <= opts.eps);
                let reason = if !outcome.converged {
                    AtomicReason::Stalled
                } else if converged {
                    AtomicReason::Converged
                } else {
                    AtomicReason::Unsplittable
                };
                report.atomic_boxes.push(AtomicBox {
                    bx: fixpoint,
                    path,
                    reason,
                });
            }
        }
    }
    if !report.atomic_boxes.is_empty() {
        report.status = SolveStatus::Enclosures;
    }
    report.stats.elapsed = started.elapsed();
    Ok(report)
}
