//! Turns a satisfying assignment of the negated condition for relation `k`
//! into two finite instances that agree on every view but not on the query.
//!
//! Given base tuples `t_1..t_m` and witnesses `t'_{k,1..n_k}` from the model:
//!
//! ```text
//! I(R_k)  = { t'_{k,j} : θ_kj(t_k) }      I(R_i)  = { t_i }  (i ≠ k)
//! I'(R_k) = I(R_k) ∪ { t_k }              I'(R_i) = I(R_i)
//! ```
//!
//! `t[U]` is then in `Q(I')` but not in `Q(I)`. Every construction is checked
//! with the evaluator before it is returned.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::eval::{eval_query, views_equal};
use crate::formula::{tuple_vars_for, Model, TupleVar};
use crate::normalize::NormalizedProblem;
use crate::relational::{eval_predicate, ColumnRef, Instance, Tuple, TupleSeq, Value};
use crate::solver::SatResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    Conformance,
    ViewsEqual,
    WitnessInPrime,
    WitnessNotInOriginal,
    SizeBound,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::Conformance => "instances conform to the schema",
            Invariant::ViewsEqual => "views agree on both instances",
            Invariant::WitnessInPrime => "witness row is in Q(I')",
            Invariant::WitnessNotInOriginal => "witness row is not in Q(I)",
            Invariant::SizeBound => "instance size bound",
        })
    }
}

/// Construction errors. Any of these after a successful solve points at a
/// bug in the formula builder or the solver, never at the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CounterexampleError {
    #[error("cannot build a counterexample from an unsatisfiable result")]
    NotSat,
    #[error("model assigns no value to `{0}`")]
    MissingValue(String),
    #[error("counterexample verification failed ({invariant}): {detail}")]
    VerificationFailed { invariant: Invariant, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Zero-based index of the relation whose condition failed.
    pub k: usize,
    pub instance: Instance,
    pub instance_prime: Instance,
    /// `t[U]`, in `Q(I')` but not in `Q(I)`.
    pub witness_row: Tuple,
    /// The canonicalized model the instances were read from.
    pub model: Model,
}

impl Counterexample {
    pub fn to_json(&self, problem: &NormalizedProblem) -> serde_json::Value {
        serde_json::json!({
            "k": self.k + 1,
            "relation": problem.schema.relation(self.k).name.to_string(),
            "instance": self.instance.to_json(),
            "instance_prime": self.instance_prime.to_json(),
            "witness_row": self.witness_row.to_json(true),
            "model": self.model.iter().map(|(v, x)| (v.name.to_string(), x.to_json())).collect::<serde_json::Map<_, _>>(),
        })
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "I:")?;
        for line in self.instance.to_string().lines() {
            writeln!(f, "  {line}")?;
        }
        writeln!(f, "I':")?;
        for line in self.instance_prime.to_string().lines() {
            writeln!(f, "  {line}")?;
        }
        write!(f, "row in Q(I') but not in Q(I): {}", self.witness_row)
    }
}

fn problem_literals(problem: &NormalizedProblem) -> BTreeSet<u32> {
    problem
        .views()
        .map(|v| &v.predicate)
        .chain(std::iter::once(&problem.query.predicate))
        .flat_map(|p| p.constants())
        .filter_map(|c| match c {
            Value::Uninterpreted(n) => Some(*n),
            _ => None,
        })
        .collect()
}

/// Renames uninterpreted values that are not literals of the problem to
/// `#0, #1, …` in order of first appearance along `order`.
pub fn canonicalize(model: &Model, order: &[&TupleVar], problem: &NormalizedProblem) -> Model {
    let literals = problem_literals(problem);
    let mut renaming: BTreeMap<u32, u32> = BTreeMap::new();
    let mut next = 0u32;
    let mut out = model.clone();
    for var in order.iter().flat_map(|t| t.vars()) {
        if let Some(Value::Uninterpreted(n)) = model.get(var) {
            if literals.contains(n) {
                continue;
            }
            let fresh = *renaming.entry(*n).or_insert_with(|| {
                while literals.contains(&next) {
                    next += 1;
                }
                next += 1;
                next - 1
            });
            out.insert(var.clone(), Value::Uninterpreted(fresh));
        }
    }
    // values of variables outside `order` are renamed consistently too
    for (var, value) in out.iter_mut() {
        if let Value::Uninterpreted(n) = value {
            if !order.iter().any(|t| t.vars().any(|v| v == var)) {
                if let Some(r) = renaming.get(n) {
                    *n = *r;
                }
            }
        }
    }
    out
}

fn ground(t: &TupleVar, model: &Model) -> Result<Tuple, CounterexampleError> {
    let mut out = Tuple::new();
    for (column, var) in &t.columns {
        let value = model
            .get(var)
            .ok_or_else(|| CounterexampleError::MissingValue(var.name.to_string()))?;
        out.insert(
            ColumnRef {
                relation: t.relation_name.clone(),
                column: column.clone(),
            },
            value.clone(),
        );
    }
    Ok(out)
}

fn fail(invariant: Invariant, detail: impl Into<String>) -> CounterexampleError {
    CounterexampleError::VerificationFailed {
        invariant,
        detail: detail.into(),
    }
}

/// Builds and verifies the instance pair for a satisfying model of
/// `build_negated_star(problem, k)`.
pub fn construct(problem: &NormalizedProblem, k: usize, result: &SatResult) -> Result<Counterexample, CounterexampleError> {
    let raw = result.model.as_ref().filter(|_| result.is_sat()).ok_or(CounterexampleError::NotSat)?;
    let (base, witnesses) = tuple_vars_for(problem, k);
    let order: Vec<&TupleVar> = base.iter().chain(&witnesses).collect();
    let model = canonicalize(raw, &order, problem);

    let schema = &problem.schema;
    let t: Vec<Tuple> = base.iter().map(|b| ground(b, &model)).collect::<Result<_, _>>()?;
    let primes: Vec<Tuple> = witnesses.iter().map(|w| ground(w, &model)).collect::<Result<_, _>>()?;

    let mut instance = Instance::empty(schema);
    for (i, ti) in t.iter().enumerate() {
        if i != k {
            instance
                .insert(schema, i, ti.clone())
                .map_err(|e| fail(Invariant::Conformance, e.to_string()))?;
        }
    }
    for (view, prime) in problem.views_by_relation[k].iter().zip(&primes) {
        let selected = eval_predicate(&view.predicate, &t[k].0).map_err(|e| fail(Invariant::Conformance, e.to_string()))?;
        if selected {
            instance
                .insert(schema, k, prime.clone())
                .map_err(|e| fail(Invariant::Conformance, e.to_string()))?;
        }
    }
    let mut instance_prime = instance.clone();
    instance_prime
        .insert(schema, k, t[k].clone())
        .map_err(|e| fail(Invariant::Conformance, e.to_string()))?;

    let witness_row = TupleSeq(t)
        .joined()
        .sub_tuple(&problem.query.projection)
        .map_err(|e| fail(Invariant::Conformance, e.to_string()))?;

    let cx = Counterexample {
        k,
        instance,
        instance_prime,
        witness_row,
        model,
    };
    verify(problem, &cx)?;
    Ok(cx)
}

/// Re-establishes the counterexample's guarantees with the evaluator.
pub fn verify(problem: &NormalizedProblem, cx: &Counterexample) -> Result<(), CounterexampleError> {
    let schema = &problem.schema;
    for inst in [&cx.instance, &cx.instance_prime] {
        inst.validate(schema).map_err(|e| fail(Invariant::Conformance, e.to_string()))?;
    }
    if !views_equal(schema, problem.views(), &cx.instance, &cx.instance_prime) {
        return Err(fail(Invariant::ViewsEqual, "some view differs between I and I'"));
    }
    if !eval_query(schema, &problem.query, &cx.instance_prime).contains(&cx.witness_row) {
        return Err(fail(Invariant::WitnessInPrime, cx.witness_row.to_string()));
    }
    if eval_query(schema, &problem.query, &cx.instance).contains(&cx.witness_row) {
        return Err(fail(Invariant::WitnessNotInOriginal, cx.witness_row.to_string()));
    }
    let m = problem.relation_count();
    let n_k = problem.view_count(cx.k);
    let size = |inst: &Instance, i: usize| inst.tuples(&schema.relation(i).name).count();
    for i in 0..m {
        let (lo, hi) = (size(&cx.instance, i), size(&cx.instance_prime, i));
        let ok = if i == cx.k { lo <= n_k && hi <= n_k + 1 } else { lo == 1 && hi == 1 };
        if !ok {
            return Err(fail(
                Invariant::SizeBound,
                format!("relation {} has {lo} / {hi} tuples", schema.relation(i).name),
            ));
        }
    }
    if cx.instance_prime.total_tuples() > (m - 1) + n_k + 1 {
        return Err(fail(Invariant::SizeBound, "I' exceeds (m-1) + n_k + 1 tuples"));
    }
    Ok(())
}
