//! Variable-indexed boxes: products of per-variable intervals.
//!
//! A box over a scope `I` is the product of one interval per variable in `I`.
//! Boxes are ordered by information: `b0 ⊑ b1` when every binding of `b1` is
//! a subset of the matching binding of `b0`. The full box (every binding
//! `[-inf,inf]`) carries no information; the empty box carries the most.
//!
//! Relational operations follow their set-theoretic meaning restricted to
//! boxes: projection drops variables, cylindrification adds unconstrained
//! ones, join intersects on shared variables and takes the product
//! elsewhere, and the hull is the least box containing a family of boxes.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::interval::{format_bound, parse_bound, Interval};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VarNameError {
    #[error("variable name is empty")]
    Empty,
    #[error("invalid variable name `{0}`")]
    Invalid(String),
}

/// Variable identifier: `[A-Za-z_][A-Za-z0-9_]*`.
///
/// Names beginning with `_` are reserved for auxiliary variables introduced
/// by decomposition.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(String);

impl VarName {
    pub fn new(name: impl Into<String>) -> Result<VarName, VarNameError> {
        let name = name.into();
        let mut chars = name.chars();
        match chars.next() {
            None => return Err(VarNameError::Empty),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            Some(_) => return Err(VarNameError::Invalid(name)),
        }
        if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') || name == "_" {
            return Err(VarNameError::Invalid(name));
        }
        Ok(VarName(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_auxiliary(&self) -> bool {
        self.0.starts_with('_')
    }
}

/// Convenience for literals in tests and examples.
///
/// # Panics
///
/// Panics if `name` is not a valid identifier.
pub fn var(name: &str) -> VarName {
    VarName::new(name).expect("valid variable name")
}

impl Borrow<str> for VarName {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxError {
    #[error("expected a JSON object or null")]
    NotAnObject,
    #[error("binding for `{0}` is not a two-element bound array")]
    BadBinding(String),
    #[error(transparent)]
    Name(#[from] VarNameError),
    #[error("binding for `{0}` is not an interval: {1}")]
    BadInterval(String, crate::interval::IntervalError),
}

/// A finite map from variables to intervals, normalized so that one empty
/// binding makes every binding empty.
#[derive(Clone, PartialEq)]
pub struct IntervalBox {
    bindings: BTreeMap<VarName, Interval>,
}

impl IntervalBox {
    /// Builds a box from bindings. Later duplicates overwrite earlier ones.
    pub fn new(bindings: impl IntoIterator<Item = (VarName, Interval)>) -> IntervalBox {
        let mut b = IntervalBox {
            bindings: bindings.into_iter().collect(),
        };
        b.normalize();
        b
    }

    /// Every variable bound to `[-inf,inf]`.
    pub fn full<'a>(vars: impl IntoIterator<Item = &'a VarName>) -> IntervalBox {
        IntervalBox {
            bindings: vars
                .into_iter()
                .map(|v| (v.clone(), Interval::ENTIRE))
                .collect(),
        }
    }

    /// The canonical empty box over `vars`.
    pub fn empty_over<'a>(vars: impl IntoIterator<Item = &'a VarName>) -> IntervalBox {
        IntervalBox {
            bindings: vars
                .into_iter()
                .map(|v| (v.clone(), Interval::EMPTY))
                .collect(),
        }
    }

    fn normalize(&mut self) {
        if self.bindings.values().any(Interval::is_empty) {
            self.set_all_empty();
        }
    }

    fn set_all_empty(&mut self) {
        for iv in self.bindings.values_mut() {
            *iv = Interval::EMPTY;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bindings
            .values()
            .next()
            .is_some_and(Interval::is_empty)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, v: &str) -> Option<Interval> {
        self.bindings.get(v).copied()
    }

    /// Binding of `v`.
    ///
    /// # Panics
    ///
    /// Panics if `v` is not in scope.
    pub fn interval(&self, v: &str) -> Interval {
        match self.bindings.get(v) {
            Some(iv) => *iv,
            None => panic!("variable `{v}` is not in the scope of the box"),
        }
    }

    /// Rebinds an in-scope variable, keeping the box Empty-normalized.
    ///
    /// # Panics
    ///
    /// Panics if `v` is not in scope.
    pub fn set(&mut self, v: &str, iv: Interval) {
        match self.bindings.get_mut(v) {
            Some(slot) => *slot = iv,
            None => panic!("variable `{v}` is not in the scope of the box"),
        }
        if iv.is_empty() {
            self.set_all_empty();
        }
    }

    /// Intersects the binding of `v` with `iv`; returns whether it changed.
    pub(crate) fn narrow(&mut self, v: &str, iv: Interval) -> bool {
        let old = self.interval(v);
        let new = old.intersect(&iv);
        if new == old {
            return false;
        }
        self.set(v, new);
        true
    }

    pub fn contains_var(&self, v: &str) -> bool {
        self.bindings.contains_key(v)
    }

    pub fn scope(&self) -> impl Iterator<Item = &VarName> {
        self.bindings.keys()
    }

    pub fn scope_set(&self) -> BTreeSet<VarName> {
        self.bindings.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarName, &Interval)> {
        self.bindings.iter()
    }

    /// Point membership over the whole scope. Points must bind exactly the
    /// scope; extra coordinates are ignored, missing ones fail.
    pub fn contains_point(&self, point: &BTreeMap<VarName, f64>) -> bool {
        self.bindings
            .iter()
            .all(|(v, iv)| point.get(v).is_some_and(|&x| iv.contains(x)))
    }

    /// Componentwise `self ⊆ other` over a common scope.
    ///
    /// # Panics
    ///
    /// Panics if the scopes differ.
    pub fn is_subset(&self, other: &IntervalBox) -> bool {
        assert!(self.same_scope(other), "boxes over different scopes");
        if self.is_empty() {
            return true;
        }
        self.bindings
            .iter()
            .zip(other.bindings.values())
            .all(|((_, a), b)| a.is_subset(b))
    }

    pub fn same_scope(&self, other: &IntervalBox) -> bool {
        self.bindings.len() == other.bindings.len()
            && self
                .bindings
                .keys()
                .zip(other.bindings.keys())
                .all(|(a, b)| a == b)
    }

    /// Restriction to `vars`.
    ///
    /// # Panics
    ///
    /// Panics unless `vars ⊆ scope(self)`.
    pub fn project<'a>(&self, vars: impl IntoIterator<Item = &'a VarName>) -> IntervalBox {
        let bindings = vars
            .into_iter()
            .map(|v| (v.clone(), self.interval(v.as_str())))
            .collect();
        IntervalBox { bindings }
    }

    /// Extension to the larger scope `vars`, binding new variables to
    /// `[-inf,inf]`.
    ///
    /// # Panics
    ///
    /// Panics unless `scope(self) ⊆ vars`.
    pub fn cylinder<'a>(&self, vars: impl IntoIterator<Item = &'a VarName>) -> IntervalBox {
        let empty = self.is_empty();
        let bindings: BTreeMap<VarName, Interval> = vars
            .into_iter()
            .map(|v| {
                let iv = if empty {
                    Interval::EMPTY
                } else {
                    self.get(v.as_str()).unwrap_or(Interval::ENTIRE)
                };
                (v.clone(), iv)
            })
            .collect();
        for v in self.bindings.keys() {
            assert!(
                bindings.contains_key(v.as_str()),
                "cylinder target scope does not contain `{v}`"
            );
        }
        IntervalBox { bindings }
    }

    /// Join: union of scopes, intersection on shared variables.
    pub fn join(&self, other: &IntervalBox) -> IntervalBox {
        let mut bindings = self.bindings.clone();
        for (v, iv) in &other.bindings {
            bindings
                .entry(v.clone())
                .and_modify(|cur| *cur = cur.intersect(iv))
                .or_insert(*iv);
        }
        let mut b = IntervalBox { bindings };
        // an empty operand empties the join even without shared variables
        if self.is_empty() || other.is_empty() {
            b.set_all_empty();
        }
        b.normalize();
        b
    }

    /// Least box containing every box in `boxes`.
    ///
    /// # Panics
    ///
    /// Panics on an empty collection or mixed scopes.
    pub fn hull_all<'a>(boxes: impl IntoIterator<Item = &'a IntervalBox>) -> IntervalBox {
        let mut it = boxes.into_iter();
        let mut acc = it.next().expect("hull of no boxes").clone();
        for b in it {
            assert!(acc.same_scope(b), "hull of boxes over different scopes");
            if b.is_empty() {
                continue;
            }
            if acc.is_empty() {
                acc = b.clone();
                continue;
            }
            for (slot, iv) in acc.bindings.values_mut().zip(b.bindings.values()) {
                *slot = slot.hull(iv);
            }
        }
        acc
    }

    /// Renders as `{x=[lo,hi], y=[lo,hi]}` restricted to variables accepted
    /// by `keep`.
    pub fn render_filtered(&self, keep: impl Fn(&VarName) -> bool) -> String {
        let parts: Vec<String> = self
            .bindings
            .iter()
            .filter(|(v, _)| keep(v))
            .map(|(v, iv)| format!("{v}={iv}"))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// JSON object `{"x":[lo,hi],...}`; `null` when empty. Infinite bounds are
    /// the strings `"-inf"`/`"inf"`.
    pub fn to_json(&self) -> Value {
        self.to_json_filtered(|_| true)
    }

    pub fn to_json_filtered(&self, keep: impl Fn(&VarName) -> bool) -> Value {
        if self.is_empty() {
            return Value::Null;
        }
        let mut map = Map::new();
        for (v, iv) in self.bindings.iter().filter(|(v, _)| keep(v)) {
            map.insert(v.to_string(), interval_to_json(iv));
        }
        Value::Object(map)
    }

    /// Inverse of [`IntervalBox::to_json`]. `null` has no scope and is
    /// rejected; use [`IntervalBox::from_json_over`] for empty boxes.
    pub fn from_json(value: &Value) -> Result<IntervalBox, BoxError> {
        let map = value.as_object().ok_or(BoxError::NotAnObject)?;
        let mut bindings = BTreeMap::new();
        for (k, v) in map {
            let name = VarName::new(k.clone())?;
            let iv = interval_from_json(v).map_err(|e| match e {
                Some(err) => BoxError::BadInterval(k.clone(), err),
                None => BoxError::BadBinding(k.clone()),
            })?;
            bindings.insert(name, iv);
        }
        Ok(IntervalBox::new(bindings))
    }

    /// Like [`IntervalBox::from_json`], mapping `null` to the empty box over
    /// `scope`.
    pub fn from_json_over<'a>(
        value: &Value,
        scope: impl IntoIterator<Item = &'a VarName>,
    ) -> Result<IntervalBox, BoxError> {
        if value.is_null() {
            return Ok(IntervalBox::empty_over(scope));
        }
        IntervalBox::from_json(value)
    }
}

fn bound_to_json(v: f64) -> Value {
    match Number::from_f64(v) {
        Some(n) => Value::Number(n),
        None => Value::String(format_bound(v)),
    }
}

pub(crate) fn interval_to_json(iv: &Interval) -> Value {
    match iv.bounds() {
        Some((lo, hi)) => Value::Array(vec![bound_to_json(lo), bound_to_json(hi)]),
        None => Value::Null,
    }
}

fn bound_from_json(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_bound(s).filter(|b| b.is_infinite()),
        _ => None,
    }
}

/// `Err(None)` for structural problems, `Err(Some(_))` for invalid bounds.
pub(crate) fn interval_from_json(
    v: &Value,
) -> Result<Interval, Option<crate::interval::IntervalError>> {
    if v.is_null() {
        return Ok(Interval::EMPTY);
    }
    let arr = v.as_array().filter(|a| a.len() == 2).ok_or(None)?;
    let lo = bound_from_json(&arr[0]).ok_or(None)?;
    let hi = bound_from_json(&arr[1]).ok_or(None)?;
    Interval::try_new(lo, hi).map_err(Some)
}

impl fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_filtered(|_| true))
    }
}

impl fmt::Debug for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
