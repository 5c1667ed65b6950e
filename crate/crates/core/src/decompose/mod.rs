//! Problem text to constraint-satisfaction problem.
//!
//! Compound equations are flattened into `sum`, `mul`, `sq` and `const`
//! primitives. Every non-leaf subexpression gets one variable: either a fresh
//! auxiliary `_tN` or, when an equation equates it with a variable, that
//! variable itself. Identical subexpressions (commutative operands
//! normalized) share one variable, so `y = x^2; x^2 + y^2 = 1` becomes
//! `{sq(x,y), sq(y,_t0), sum(y,_t0,_t1), const[1](_t1)}`.

pub mod ast;
pub mod parser;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::boxes::{IntervalBox, VarName};
use crate::contractors::PrimitiveConstraint;
use crate::interval::Interval;

pub use ast::{Bound, Decimal, Declaration, Equation, Expr, Problem};
pub use parser::{parse_problem, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CspError {
    #[error("constraint {id} uses `{var}`, which is not in the initial box")]
    UnknownVariable { id: usize, var: VarName },
}

/// A constraint-satisfaction problem: primitive constraints, their
/// variables, and the initial box.
#[derive(Debug, Clone, PartialEq)]
pub struct Csp {
    constraints: Vec<PrimitiveConstraint>,
    user_vars: BTreeSet<VarName>,
    initial_box: IntervalBox,
    index: BTreeMap<VarName, Vec<usize>>,
    source: Option<Problem>,
}

impl Csp {
    /// Assembles a CSP, numbering constraints `0..m` in the given order.
    /// Variables whose name starts with `_` count as auxiliaries.
    pub fn new(
        constraints: Vec<PrimitiveConstraint>,
        initial_box: IntervalBox,
    ) -> Result<Csp, CspError> {
        let constraints: Vec<PrimitiveConstraint> = constraints
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.with_id(i))
            .collect();
        let mut index: BTreeMap<VarName, Vec<usize>> = initial_box
            .scope()
            .map(|v| (v.clone(), Vec::new()))
            .collect();
        for c in &constraints {
            for v in c.vars() {
                match index.get_mut(v.as_str()) {
                    Some(ids) => ids.push(c.id()),
                    None => {
                        return Err(CspError::UnknownVariable {
                            id: c.id(),
                            var: v.clone(),
                        })
                    }
                }
            }
        }
        let user_vars = initial_box
            .scope()
            .filter(|v| !v.is_auxiliary())
            .cloned()
            .collect();
        Ok(Csp {
            constraints,
            user_vars,
            initial_box,
            index,
            source: None,
        })
    }

    pub fn constraints(&self) -> &[PrimitiveConstraint] {
        &self.constraints
    }

    pub fn variables(&self) -> impl Iterator<Item = &VarName> {
        self.initial_box.scope()
    }

    pub fn user_vars(&self) -> &BTreeSet<VarName> {
        &self.user_vars
    }

    pub fn auxiliary_vars(&self) -> impl Iterator<Item = &VarName> {
        self.initial_box.scope().filter(|v| v.is_auxiliary())
    }

    pub fn initial_box(&self) -> &IntervalBox {
        &self.initial_box
    }

    /// The same CSP started from a different box over the same scope.
    ///
    /// # Panics
    ///
    /// Panics if the scope differs.
    pub fn with_initial_box(&self, b: IntervalBox) -> Csp {
        assert!(self.initial_box.same_scope(&b), "scope mismatch");
        Csp {
            initial_box: b,
            ..self.clone()
        }
    }

    /// Source problem, when the CSP came from [`decompose`].
    pub fn source(&self) -> Option<&Problem> {
        self.source.as_ref()
    }

    /// Variable → ids of the constraints mentioning it (each id once).
    pub fn var_index(&self) -> &BTreeMap<VarName, Vec<usize>> {
        &self.index
    }

    /// Ids of the constraints mentioning `v`; empty when none do.
    pub fn constraints_on(&self, v: &str) -> &[usize] {
        self.index.get(v).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Standalone form of [`Csp::var_index`].
pub fn var_index(csp: &Csp) -> BTreeMap<VarName, Vec<usize>> {
    csp.var_index().clone()
}

type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Var(VarName),
    /// Bits of the nearest value plus exactness.
    Const(u64, bool),
    Sum(NodeId, NodeId),
    Diff(NodeId, NodeId),
    Prod(NodeId, NodeId),
    Square(NodeId),
    Neg(NodeId),
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    /// Operands in source order for commutative nodes.
    operands: Vec<Option<(NodeId, NodeId)>>,
    table: HashMap<Node, NodeId>,
    binding: HashMap<NodeId, VarName>,
    constraints: Vec<PrimitiveConstraint>,
    /// Result variable of each emitted operation, keyed on operand
    /// variables, so that subexpressions equal up to aliasing share it.
    results: HashMap<(&'static str, VarName, VarName), VarName>,
    inexact: HashMap<NodeId, Interval>,
    aux: Vec<(VarName, Interval)>,
    zero: Option<VarName>,
}

impl Builder {
    fn intern(&mut self, node: Node, operands: Option<(NodeId, NodeId)>) -> NodeId {
        if let Some(&id) = self.table.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.operands.push(operands);
        self.table.insert(node, id);
        id
    }

    fn commutative(&mut self, make: fn(NodeId, NodeId) -> Node, a: NodeId, b: NodeId) -> NodeId {
        let key = make(a.min(b), a.max(b));
        self.intern(key, Some((a, b)))
    }

    fn product(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == b {
            self.intern(Node::Square(a), None)
        } else {
            self.commutative(Node::Prod, a, b)
        }
    }

    fn power(&mut self, base: NodeId, k: u32) -> NodeId {
        match k {
            1 => base,
            k if k % 2 == 0 => {
                let half = self.power(base, k / 2);
                self.intern(Node::Square(half), None)
            }
            k => {
                let rest = self.power(base, k - 1);
                self.product(rest, base)
            }
        }
    }

    fn lower(&mut self, e: &Expr) -> NodeId {
        match e {
            Expr::Var(v) => self.intern(Node::Var(v.clone()), None),
            Expr::Const(d) => {
                let key = Node::Const(d.value().to_bits(), d.is_exact());
                let id = self.intern(key, None);
                if !d.is_exact() {
                    self.inexact.insert(id, d.enclosure());
                }
                id
            }
            Expr::Add(a, b) => {
                let (a, b) = (self.lower(a), self.lower(b));
                self.commutative(Node::Sum, a, b)
            }
            Expr::Sub(a, b) => {
                let (a, b) = (self.lower(a), self.lower(b));
                self.intern(Node::Diff(a, b), None)
            }
            Expr::Mul(a, b) => {
                let (a, b) = (self.lower(a), self.lower(b));
                self.product(a, b)
            }
            Expr::Neg(a) => {
                let a = self.lower(a);
                self.intern(Node::Neg(a), None)
            }
            Expr::Pow(a, k) => {
                let a = self.lower(a);
                self.power(a, *k)
            }
        }
    }

    fn fresh(&mut self, domain: Interval) -> VarName {
        let name = VarName::new(format!("_t{}", self.aux.len())).expect("valid aux name");
        self.aux.push((name.clone(), domain));
        name
    }

    fn zero(&mut self) -> VarName {
        if let Some(z) = &self.zero {
            return z.clone();
        }
        let zero_node = self.intern(Node::Const(0.0f64.to_bits(), true), None);
        let z = self.materialize(zero_node, None);
        self.zero = Some(z.clone());
        z
    }

    fn has_var(&self, id: NodeId) -> bool {
        matches!(self.nodes[id], Node::Var(_)) || self.binding.contains_key(&id)
    }

    fn is_const(&self, id: NodeId) -> bool {
        matches!(self.nodes[id], Node::Const(..))
    }

    /// Variable holding the value of node `id`. A node not yet bound takes
    /// `target` as its variable when given.
    fn materialize(&mut self, id: NodeId, target: Option<VarName>) -> VarName {
        if let Node::Var(v) = &self.nodes[id] {
            return v.clone();
        }
        if let Some(v) = self.binding.get(&id) {
            return v.clone();
        }
        let node = self.nodes[id].clone();
        let result = match node {
            Node::Var(_) => unreachable!(),
            Node::Const(bits, exact) => {
                let c = f64::from_bits(bits);
                if exact {
                    match target {
                        // `target = c` is a constraint on target; the constant
                        // node itself stays unbound
                        Some(t) => {
                            self.constraints
                                .push(PrimitiveConstraint::constant(c, t.clone()));
                            return t;
                        }
                        None => {
                            let t = self.fresh(Interval::ENTIRE);
                            self.constraints
                                .push(PrimitiveConstraint::constant(c, t.clone()));
                            t
                        }
                    }
                } else {
                    let enclosure = self.inexact[&id];
                    self.fresh(enclosure)
                }
            }
            Node::Sum(..) | Node::Prod(..) => {
                let (a, b) = self.operands[id].expect("commutative operands");
                let (va, vb) = (self.materialize(a, None), self.materialize(b, None));
                let op = if matches!(node, Node::Sum(..)) {
                    "sum"
                } else {
                    "mul"
                };
                let key = if va <= vb {
                    (op, va.clone(), vb.clone())
                } else {
                    (op, vb.clone(), va.clone())
                };
                self.emit(key, target, |r| {
                    if op == "sum" {
                        PrimitiveConstraint::sum(va, vb, r)
                    } else {
                        PrimitiveConstraint::mul(va, vb, r)
                    }
                })
            }
            Node::Diff(a, b) => {
                let (va, vb) = (self.materialize(a, None), self.materialize(b, None));
                // r = a - b  <=>  r + b = a
                self.emit(("diff", va.clone(), vb.clone()), target, |r| {
                    PrimitiveConstraint::sum(r, vb, va)
                })
            }
            Node::Square(a) => {
                let va = self.materialize(a, None);
                self.emit(("sq", va.clone(), va.clone()), target, |r| {
                    PrimitiveConstraint::sq(va, r)
                })
            }
            Node::Neg(a) => {
                let va = self.materialize(a, None);
                let z = self.zero();
                // r = -a  <=>  r + a = 0
                self.emit(("neg", va.clone(), va.clone()), target, |r| {
                    PrimitiveConstraint::sum(r, va, z)
                })
            }
        };
        self.binding.insert(id, result.clone());
        result
    }

    fn emit(
        &mut self,
        key: (&'static str, VarName, VarName),
        target: Option<VarName>,
        make: impl FnOnce(VarName) -> PrimitiveConstraint,
    ) -> VarName {
        if let Some(r) = self.results.get(&key) {
            return r.clone();
        }
        let r = target.unwrap_or_else(|| self.fresh(Interval::ENTIRE));
        self.constraints.push(make(r.clone()));
        self.results.insert(key, r.clone());
        r
    }

    fn equate(&mut self, lhs: NodeId, rhs: NodeId) {
        // a side that already has a variable names the other side; constants
        // go last so they become `const` constraints on that variable
        let rank = |b: &Builder, id: NodeId| {
            if b.has_var(id) {
                0
            } else if b.is_const(id) {
                2
            } else {
                1
            }
        };
        let (first, second) = if rank(self, rhs) < rank(self, lhs) {
            (rhs, lhs)
        } else {
            (lhs, rhs)
        };
        let a = self.materialize(first, None);
        let b = self.materialize(second, Some(a.clone()));
        if a != b {
            let z = self.zero();
            self.constraints.push(PrimitiveConstraint::sum(a, z, b));
        }
    }
}

/// Decomposes a parsed problem into primitive constraints.
pub fn decompose(problem: &Problem) -> Csp {
    let mut builder = Builder::default();
    for eq in &problem.equations {
        let l = builder.lower(&eq.lhs);
        let r = builder.lower(&eq.rhs);
        builder.equate(l, r);
    }
    let bindings = problem
        .declarations
        .iter()
        .map(|d| (d.name.clone(), d.domain()))
        .chain(builder.aux.iter().cloned());
    let initial_box = IntervalBox::new(bindings);
    let mut csp = Csp::new(builder.constraints, initial_box)
        .expect("decomposition only uses declared and auxiliary variables");
    csp.source = Some(problem.clone());
    csp
}

/// Parses and decomposes in one step.
pub fn csp_from_text(text: &str) -> Result<Csp, ParseError> {
    Ok(decompose(&parse_problem(text)?))
}
