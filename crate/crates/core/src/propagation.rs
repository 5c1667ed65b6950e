//! Fixpoint engines for the lifted contraction operators of a CSP.
//!
//! All engines apply the constraints' contractors one at a time until no
//! application changes the box. Contractors are monotonic and idempotent and
//! the float lattice is finite, so every fair schedule stops at the same
//! greatest common fixpoint below the start box: the engines differ only in
//! how much work they do to get there.
//!
//! * [`Order::RoundRobin`] cycles through the constraints in id order until a
//!   whole round changes nothing.
//! * [`Order::Worklist`] keeps a FIFO queue of constraints to revisit; when a
//!   contractor narrows a variable only the constraints on that variable are
//!   re-queued.
//! * [`Order::Random`] draws the next constraint uniformly from the pending
//!   set with a seeded PRNG.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::boxes::IntervalBox;
use crate::contractors::{big_gamma, PrimitiveConstraint};
use crate::decompose::Csp;
use crate::interval::Interval;

pub const DEFAULT_MAX_ROUNDS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    RoundRobin,
    Worklist,
    Random(u64),
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::RoundRobin => f.write_str("roundrobin"),
            Order::Worklist => f.write_str("worklist"),
            Order::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown propagation order `{0}` (expected roundrobin, worklist or random:<seed>)")]
pub struct ParseOrderError(String);

impl FromStr for Order {
    type Err = ParseOrderError;

    fn from_str(s: &str) -> Result<Order, ParseOrderError> {
        match s {
            "roundrobin" => Ok(Order::RoundRobin),
            "worklist" => Ok(Order::Worklist),
            _ => s
                .strip_prefix("random:")
                .and_then(|seed| seed.parse::<u64>().ok())
                .map(Order::Random)
                .ok_or_else(|| ParseOrderError(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Stable and non-empty; solutions may or may not exist.
    FeasibleUnknown,
    /// The box is empty: no solution exists in the start box.
    ProvedEmpty,
}

/// One contractor application.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub id: usize,
    pub constraint: String,
    pub kind: &'static str,
    /// Bindings of the constraint's variables before the application.
    pub input: IntervalBox,
    /// Bindings of the constraint's variables after the application.
    pub output: IntervalBox,
    pub changed: bool,
}

impl TraceRecord {
    /// `#2 sum(y,z,u) {u=[1,1], y=[0.25,1], z=[0,1]} -> {...} changed`
    pub fn to_text(&self) -> String {
        format!(
            "#{} {} {} -> {} {}",
            self.id,
            self.constraint,
            self.input,
            self.output,
            if self.changed { "changed" } else { "unchanged" }
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "kind": self.kind,
            "constraint": self.constraint,
            "input": self.input.to_json(),
            "output": self.output.to_json(),
            "changed": self.changed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOutcome {
    pub fixpoint: IntervalBox,
    pub status: Status,
    /// Contractor applications.
    pub steps: usize,
    /// Applications that changed the box.
    pub effective_steps: usize,
    /// Present when tracing was requested.
    pub trace: Option<Vec<TraceRecord>>,
    /// False when [`Propagator::run_capped`] stopped at the round limit;
    /// `fixpoint` is then a sound contraction but not yet stable.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropagationError {
    #[error("box scope does not match the CSP variables")]
    ScopeMismatch,
    #[error("propagation did not stabilize within {0} rounds")]
    RoundLimit(usize),
}

/// Configurable propagation run over one CSP.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    csp: &'a Csp,
    order: Order,
    trace: bool,
    max_rounds: usize,
}

struct Run<'a> {
    csp: &'a Csp,
    current: IntervalBox,
    steps: usize,
    effective: usize,
    trace: Option<Vec<TraceRecord>>,
}

impl Run<'_> {
    /// Applies constraint `id`; returns the indices (into `vars()`) of the
    /// variables whose binding changed.
    fn apply(&mut self, id: usize) -> Vec<usize> {
        let c: &PrimitiveConstraint = &self.csp.constraints()[id];
        let input: Vec<Interval> = c
            .vars()
            .iter()
            .map(|v| self.current.interval(v.as_str()))
            .collect();
        let output = c.contract(&input);
        let changed: Vec<usize> = (0..input.len())
            .filter(|&i| input[i] != output[i])
            .collect();
        self.steps += 1;
        if !changed.is_empty() {
            self.effective += 1;
            for &i in &changed {
                self.current.set(c.vars()[i].as_str(), output[i]);
            }
        }
        if let Some(trace) = &mut self.trace {
            let slice = |ivs: &[Interval]| {
                IntervalBox::new(c.vars().iter().cloned().zip(ivs.iter().copied()))
            };
            trace.push(TraceRecord {
                id,
                constraint: c.to_string(),
                kind: c.kind().name(),
                input: slice(&input),
                output: slice(&output),
                changed: !changed.is_empty(),
            });
        }
        changed
    }

    fn finish(self, converged: bool) -> PropagationOutcome {
        let status = if self.current.is_empty() {
            Status::ProvedEmpty
        } else {
            Status::FeasibleUnknown
        };
        PropagationOutcome {
            fixpoint: self.current,
            status,
            steps: self.steps,
            effective_steps: self.effective,
            trace: self.trace,
            converged,
        }
    }
}

impl<'a> Propagator<'a> {
    pub fn new(csp: &'a Csp) -> Propagator<'a> {
        Propagator {
            csp,
            order: Order::Worklist,
            trace: false,
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }

    pub fn order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn trace(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }

    /// Caps round-robin rounds; the queue-based engines are capped at
    /// `max_rounds × m` applications.
    pub fn max_rounds(mut self, rounds: usize) -> Self {
        self.max_rounds = rounds.max(1);
        self
    }

    /// Runs to the fixpoint.
    pub fn run(&self, start: &IntervalBox) -> Result<PropagationOutcome, PropagationError> {
        let out = self.run_capped(start)?;
        if out.converged {
            Ok(out)
        } else {
            Err(PropagationError::RoundLimit(self.max_rounds))
        }
    }

    /// Like [`Propagator::run`], but returns the box reached so far with
    /// `converged == false` when the round limit is hit.
    pub fn run_capped(&self, start: &IntervalBox) -> Result<PropagationOutcome, PropagationError> {
        if !self.csp.initial_box().same_scope(start) {
            return Err(PropagationError::ScopeMismatch);
        }
        let mut run = Run {
            csp: self.csp,
            current: start.clone(),
            steps: 0,
            effective: 0,
            trace: self.trace.then(Vec::new),
        };
        if run.current.is_empty() || self.csp.constraints().is_empty() {
            return Ok(run.finish(true));
        }
        let converged = match self.order {
            Order::RoundRobin => self.round_robin(&mut run),
            Order::Worklist => self.worklist(&mut run),
            Order::Random(seed) => self.random(&mut run, seed),
        };
        Ok(run.finish(converged))
    }

    fn step_limit(&self) -> usize {
        self.max_rounds.saturating_mul(self.csp.constraints().len())
    }

    fn round_robin(&self, run: &mut Run<'_>) -> bool {
        let m = self.csp.constraints().len();
        for _ in 0..self.max_rounds {
            let mut changed = false;
            for id in 0..m {
                changed |= !run.apply(id).is_empty();
                if run.current.is_empty() {
                    return true;
                }
            }
            if !changed {
                return true;
            }
        }
        false
    }

    fn worklist(&self, run: &mut Run<'_>) -> bool {
        let m = self.csp.constraints().len();
        let mut queue: VecDeque<usize> = (0..m).collect();
        let mut queued = vec![true; m];
        while let Some(id) = queue.pop_front() {
            queued[id] = false;
            if run.steps >= self.step_limit() {
                return false;
            }
            let changed = run.apply(id);
            if run.current.is_empty() {
                return true;
            }
            let c = &self.csp.constraints()[id];
            for i in changed {
                for &other in self.csp.constraints_on(c.vars()[i].as_str()) {
                    if other != id && !queued[other] {
                        queued[other] = true;
                        queue.push_back(other);
                    }
                }
            }
        }
        true
    }

    fn random(&self, run: &mut Run<'_>, seed: u64) -> bool {
        let m = self.csp.constraints().len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pending: Vec<usize> = (0..m).collect();
        let mut is_pending = vec![true; m];
        while !pending.is_empty() {
            if run.steps >= self.step_limit() {
                return false;
            }
            let pick = rng.random_range(0..pending.len());
            let id = pending.swap_remove(pick);
            is_pending[id] = false;
            let changed = run.apply(id);
            if run.current.is_empty() {
                return true;
            }
            let c = &self.csp.constraints()[id];
            for i in changed {
                for &other in self.csp.constraints_on(c.vars()[i].as_str()) {
                    if other != id && !is_pending[other] {
                        is_pending[other] = true;
                        pending.push(other);
                    }
                }
            }
        }
        true
    }
}

/// Cyclic application in id order until a full round changes nothing.
pub fn propagate_roundrobin(
    csp: &Csp,
    start: &IntervalBox,
    max_rounds: usize,
) -> Result<PropagationOutcome, PropagationError> {
    Propagator::new(csp)
        .order(Order::RoundRobin)
        .max_rounds(max_rounds)
        .run(start)
}

/// FIFO worklist propagation.
pub fn propagate_worklist(
    csp: &Csp,
    start: &IntervalBox,
) -> Result<PropagationOutcome, PropagationError> {
    Propagator::new(csp).order(Order::Worklist).run(start)
}

/// Seeded random fair order.
pub fn propagate_random(
    csp: &Csp,
    start: &IntervalBox,
    seed: u64,
) -> Result<PropagationOutcome, PropagationError> {
    Propagator::new(csp).order(Order::Random(seed)).run(start)
}

/// `n`-fold application of the simultaneous operator [`big_gamma`].
pub fn gamma_power(csp: &Csp, start: &IntervalBox, n: usize) -> IntervalBox {
    let mut b = start.clone();
    for _ in 0..n {
        let next = big_gamma(csp, &b);
        if next == b {
            break;
        }
        b = next;
    }
    b
}

/// Whether every lifted contractor leaves `b` unchanged.
pub fn is_stable(csp: &Csp, b: &IntervalBox) -> bool {
    csp.constraints()
        .iter()
        .all(|c| crate::contractors::apply_lifted(c, b) == *b)
}
