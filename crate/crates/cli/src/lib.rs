//! Front end for the `intcon` binary: read a problem file, solve or only
//! propagate, and print enclosures as text or JSON.
//!
//! Exit codes: 0 enclosures, 1 proved infeasible, 2 parse or usage error,
//! 3 budget or round limit exhausted (partial output, marked incomplete).

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use intcon_core::oracle::{grid_solutions, GridSpec};
use intcon_core::propagation::DEFAULT_MAX_ROUNDS;
use intcon_core::{
    decompose, parse_problem, solve_with, AtomicReason, Csp, IntervalBox, Order,
    PropagationOutcome, Propagator, SolveError, SolveOptions, SolveReport, SolveStatus, Status,
    TraceRecord, VarName, DEFAULT_NODE_ROUNDS,
};

pub const EXIT_ENCLOSURES: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Encloses all real solutions of a system of polynomial equations.
#[derive(Debug, Clone, Parser)]
#[command(name = "intcon", version)]
pub struct CliConfig {
    /// Problem file.
    pub input: PathBuf,

    /// Atomic boxes have all user variables at most this wide.
    #[arg(long, default_value_t = 1e-10, value_parser = positive_f64)]
    pub eps: f64,

    /// Stop after this many atomic boxes.
    #[arg(long, default_value_t = 4096, value_parser = at_least_one)]
    pub max_boxes: usize,

    /// roundrobin, worklist or random:<seed>.
    #[arg(long, default_value_t = Order::Worklist)]
    pub order: Order,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Record every contractor application.
    #[arg(long)]
    pub trace: bool,

    /// After solving, sample an n-per-axis grid and check it against the
    /// enclosures.
    #[arg(long, value_name = "N", value_parser = grid_size)]
    pub check_grid: Option<usize>,

    /// Relative residual accepted by the grid check.
    #[arg(long, default_value_t = 1e-7, value_parser = positive_f64)]
    pub grid_tol: f64,

    /// Propagate over the initial box without splitting.
    #[arg(long)]
    pub propagate_only: bool,

    /// Include auxiliary variables in boxes.
    #[arg(long)]
    pub show_aux: bool,

    /// Print the problem in canonical form and exit.
    #[arg(long)]
    pub echo: bool,

    /// Propagation round limit per search node.
    #[arg(long, default_value_t = DEFAULT_NODE_ROUNDS, value_parser = at_least_one)]
    pub node_rounds: usize,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be positive and finite".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn grid_size(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        Ok(_) => Err("must be at least 2".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Runs one invocation, writing results to `out` and diagnostics to `err`.
/// Returns the exit code.
pub fn run(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(config, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "intcon: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "intcon: {e}");
            EXIT_USAGE
        }
    }
}

enum Failure {
    Usage(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Io(e)
    }
}

fn execute(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let path = config.input.display();
    let text = std::fs::read_to_string(&config.input)
        .map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
    let problem = parse_problem(&text).map_err(|e| Failure::Usage(format!("{path}:{e}")))?;
    if config.echo {
        out.write_all(problem.to_canonical().as_bytes())?;
        return Ok(EXIT_ENCLOSURES);
    }
    let csp = decompose(&problem);
    if config.propagate_only {
        return propagate_only(config, &csp, out, err);
    }
    if config.check_grid.is_some() {
        let user = csp.initial_box().project(csp.user_vars());
        let unbounded = user
            .iter()
            .find(|(_, iv)| !iv.lo().is_finite() || !iv.hi().is_finite())
            .map(|(v, _)| v.clone());
        if let Some(v) = unbounded {
            return Err(Failure::Usage(format!(
                "--check-grid needs bounded domains, `{v}` is unbounded"
            )));
        }
    }
    let opts = SolveOptions {
        eps: config.eps,
        max_boxes: config.max_boxes,
        order: config.order,
        trace: config.trace,
        node_rounds: config.node_rounds,
    };
    let (report, code) = match solve_with(&csp, &opts) {
        Ok(r) => {
            let code = match r.status {
                SolveStatus::Enclosures => EXIT_ENCLOSURES,
                SolveStatus::Infeasible => EXIT_INFEASIBLE,
            };
            (r, code)
        }
        Err(SolveError::BudgetExceeded { max_boxes, partial }) => {
            writeln!(
                err,
                "intcon: more than {max_boxes} atomic boxes, output is incomplete"
            )?;
            (*partial, EXIT_INCOMPLETE)
        }
        Err(e) => return Err(Failure::Usage(e.to_string())),
    };
    if code == EXIT_INFEASIBLE {
        writeln!(err, "intcon: proved infeasible")?;
    }
    let grid = config.check_grid.map(|n| {
        grid_check(
            &csp,
            &report,
            &GridSpec {
                n,
                tol: config.grid_tol,
            },
        )
    });
    let rendered = match config.format {
        Format::Text => {
            let mut s = render_report(&report, config.format, config.show_aux);
            if let Some(g) = &grid {
                s.push_str(&g.to_text());
            }
            s
        }
        Format::Json => {
            let mut v = report_json(&report, config.show_aux);
            if let Some(g) = &grid {
                v["grid_check"] = g.to_json();
            }
            format!("{v}\n")
        }
    };
    out.write_all(rendered.as_bytes())?;
    Ok(code)
}

fn keep(show_aux: bool) -> impl Fn(&VarName) -> bool {
    move |v: &VarName| show_aux || !v.is_auxiliary()
}

fn reason_name(r: AtomicReason) -> &'static str {
    match r {
        AtomicReason::Converged => "converged",
        AtomicReason::Unsplittable => "unsplittable",
        AtomicReason::Stalled => "stalled",
    }
}

fn status_name(report: &SolveReport) -> &'static str {
    match (report.complete, report.status) {
        (false, _) => "incomplete",
        (true, SolveStatus::Enclosures) => "enclosures",
        (true, SolveStatus::Infeasible) => "infeasible",
    }
}

/// Text: one `box <path>: {..}` line per atomic box in path order, then a
/// stats footer. JSON: `{status, boxes: [{path, bindings, reason}], stats}`.
/// Auxiliary variables appear only when `show_aux` is set.
pub fn render_report(report: &SolveReport, format: Format, show_aux: bool) -> String {
    match format {
        Format::Json => format!("{}\n", report_json(report, show_aux)),
        Format::Text => report_text(report, show_aux),
    }
}

fn report_text(report: &SolveReport, show_aux: bool) -> String {
    let mut s = String::new();
    if let Some(trace) = &report.trace {
        for (path, records) in trace {
            let _ = writeln!(s, "node {path}");
            for r in records {
                let _ = writeln!(s, "  {}", r.to_text());
            }
        }
    }
    if report.complete && report.status == SolveStatus::Infeasible {
        let _ = writeln!(s, "infeasible (pruned {} subboxes)", report.pruned_count);
    }
    for a in &report.atomic_boxes {
        let _ = write!(
            s,
            "box {}: {}",
            a.path,
            a.bx.render_filtered(keep(show_aux))
        );
        if a.reason != AtomicReason::Converged {
            let _ = write!(s, " ({})", reason_name(a.reason));
        }
        s.push('\n');
    }
    if !report.complete {
        let _ = writeln!(s, "incomplete: box budget exhausted");
    }
    let _ = writeln!(s, "boxes emitted: {}", report.atomic_boxes.len());
    let _ = writeln!(s, "boxes pruned: {}", report.pruned_count);
    let _ = writeln!(
        s,
        "contractor applications: {}",
        report.stats.contractor_applications
    );
    s
}

fn trace_json(records: &[TraceRecord]) -> Value {
    Value::Array(records.iter().map(TraceRecord::to_json).collect())
}

fn report_json(report: &SolveReport, show_aux: bool) -> Value {
    let boxes: Vec<Value> = report
        .atomic_boxes
        .iter()
        .map(|a| {
            json!({
                "path": a.path.to_bitstring(),
                "bindings": a.bx.to_json_filtered(keep(show_aux)),
                "reason": reason_name(a.reason),
            })
        })
        .collect();
    let mut v = json!({
        "status": status_name(report),
        "boxes": boxes,
        "stats": {
            "boxes_emitted": report.atomic_boxes.len(),
            "boxes_pruned": report.pruned_count,
            "contractor_applications": report.stats.contractor_applications,
            "nodes": report.stats.nodes,
            "max_depth": report.stats.max_depth,
            "stalled_nodes": report.stats.stalled_nodes,
        },
    });
    if let Some(trace) = &report.trace {
        let nodes: Vec<Value> = trace
            .iter()
            .map(|(path, records)| json!({"path": path.to_bitstring(), "records": trace_json(records)}))
            .collect();
        v["trace"] = Value::Array(nodes);
    }
    v
}

/// Grid points accepted by the oracle, split by where the solver put them.
/// With a loose tolerance, near-solutions may fall outside tight enclosures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCheck {
    pub points: usize,
    pub outside: usize,
    pub in_pruned: usize,
}

impl GridCheck {
    fn to_text(&self) -> String {
        if self.outside == 0 && self.in_pruned == 0 {
            format!("grid check: {} solutions, all enclosed\n", self.points)
        } else {
            format!(
                "grid check: {} solutions, {} outside enclosures, {} in pruned boxes\n",
                self.points, self.outside, self.in_pruned
            )
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "points": self.points,
            "outside": self.outside,
            "in_pruned": self.in_pruned,
            "agrees": self.outside == 0 && self.in_pruned == 0,
        })
    }
}

/// Compares oracle grid solutions over the initial user box with `report`.
///
/// # Panics
///
/// Panics if a user domain is unbounded or `csp` has no source problem.
pub fn grid_check(csp: &Csp, report: &SolveReport, spec: &GridSpec) -> GridCheck {
    let user = csp.initial_box().project(csp.user_vars());
    let problem = csp.source().expect("decomposed from a problem");
    let points = grid_solutions(&problem.equations, &user, spec);
    let in_pruned = points
        .iter()
        .filter(|p| {
            report
                .pruned_boxes
                .iter()
                .any(|(_, b)| b.project(p.keys()).contains_point(p))
        })
        .count();
    let outside = if report.complete {
        points.iter().filter(|p| !report.encloses(p)).count()
    } else {
        0
    };
    GridCheck {
        points: points.len(),
        outside,
        in_pruned,
    }
}

fn propagate_only(
    config: &CliConfig,
    csp: &Csp,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let outcome = Propagator::new(csp)
        .order(config.order)
        .trace(config.trace)
        .max_rounds(DEFAULT_MAX_ROUNDS)
        .run_capped(csp.initial_box())
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let code = if !outcome.converged {
        writeln!(
            err,
            "intcon: propagation did not stabilize within {DEFAULT_MAX_ROUNDS} rounds, output is incomplete"
        )?;
        EXIT_INCOMPLETE
    } else if outcome.status == Status::ProvedEmpty {
        writeln!(err, "intcon: proved infeasible")?;
        EXIT_INFEASIBLE
    } else {
        EXIT_ENCLOSURES
    };
    let rendered = match config.format {
        Format::Text => fixpoint_text(&outcome, config.show_aux),
        Format::Json => format!("{}\n", fixpoint_json(&outcome, config.show_aux)),
    };
    out.write_all(rendered.as_bytes())?;
    Ok(code)
}

fn fixpoint_text(outcome: &PropagationOutcome, show_aux: bool) -> String {
    let mut s = String::new();
    for r in outcome.trace.iter().flatten() {
        let _ = writeln!(s, "{}", r.to_text());
    }
    if outcome.fixpoint.is_empty() {
        let _ = writeln!(s, "infeasible (proved empty by propagation)");
    } else {
        let _ = writeln!(
            s,
            "fixpoint: {}",
            outcome.fixpoint.render_filtered(keep(show_aux))
        );
    }
    if !outcome.converged {
        let _ = writeln!(s, "incomplete: round limit reached");
    }
    let _ = writeln!(s, "contractor applications: {}", outcome.steps);
    let _ = writeln!(s, "effective applications: {}", outcome.effective_steps);
    s
}

fn fixpoint_json(outcome: &PropagationOutcome, show_aux: bool) -> Value {
    let status = match (outcome.converged, outcome.status) {
        (false, _) => "incomplete",
        (true, Status::FeasibleUnknown) => "feasible_unknown",
        (true, Status::ProvedEmpty) => "infeasible",
    };
    let mut v = json!({
        "status": status,
        "fixpoint": outcome.fixpoint.to_json_filtered(keep(show_aux)),
        "stats": {
            "contractor_applications": outcome.steps,
            "effective_applications": outcome.effective_steps,
        },
    });
    if let Some(t) = &outcome.trace {
        v["trace"] = trace_json(t);
    }
    v
}

/// Reads the `bindings` of every box in a JSON report back into boxes.
pub fn boxes_from_json(report: &Value) -> Option<Vec<IntervalBox>> {
    report["boxes"]
        .as_array()?
        .iter()
        .map(|b| IntervalBox::from_json(&b["bindings"]).ok())
        .collect()
}
