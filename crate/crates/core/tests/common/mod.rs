//! Reference implementations shared by the integration tests. None of
//! these go through the decision procedure they are used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use qdet_core::eval::{eval_query, eval_view, Relation};
use qdet_core::formula::{build_phi, build_psi, instantiate, tuple_vars_for, Formula, Model, TupleVar, Var};
use qdet_core::normalize::NormalizedProblem;
use qdet_core::relational::{Expr, Instance, Schema, Sort, Tuple, Value};
use rand::Rng;

/// `θ(t) ∧ ⋀_j (¬θ_ij(t_i) ∨ (Φ_ij ∧ ¬Ψ_ij))`, assembled with the
/// non-folding constructors.
pub fn hand_composed(problem: &NormalizedProblem, i: usize) -> Expr<Var> {
    let (base, witnesses) = tuple_vars_for(problem, i);
    let seq: Vec<&TupleVar> = base.iter().collect();
    let mut conj = vec![instantiate(&problem.query.predicate, &seq)];
    for (j, (view, w)) in problem.views_by_relation[i].iter().zip(&witnesses).enumerate() {
        let phi = build_phi(problem, i, j, &base[i], w);
        let psi = build_psi(problem, i, &base, w);
        conj.push(Expr::Or(vec![
            Expr::Not(Box::new(instantiate(&view.predicate, &[&base[i]]))),
            Expr::And(vec![phi, Expr::Not(Box::new(psi))]),
        ]));
    }
    Expr::And(conj)
}

fn fresh(sort: Sort, k: usize) -> Value {
    match sort {
        Sort::Uninterpreted => Value::Uninterpreted(1_000_000 + k as u32),
        Sort::Int => Value::Int(-1_000_000 - k as i64),
        Sort::String => Value::string(&format!("fresh{k}")),
        Sort::Bool => unreachable!(),
    }
}

/// Exhaustive satisfiability by assignment search. Each variable ranges over
/// the formula's literals of its sort plus fresh values, one more than the
/// fresh values used so far; that covers every assignment up to renaming of
/// non-literal values, over a domain no larger than the distinct-term count.
pub fn brute_force_sat(f: &Formula) -> Option<Model> {
    let vars: Vec<Var> = f.vars().into_iter().cloned().collect();
    let literals: BTreeSet<Value> = f.body.constants().into_iter().cloned().collect();
    fn go(
        f: &Formula,
        vars: &[Var],
        literals: &BTreeSet<Value>,
        idx: usize,
        fresh_used: &mut BTreeMap<Sort, usize>,
        model: &mut Model,
    ) -> bool {
        if idx == vars.len() {
            return f.eval(model).expect("total assignment");
        }
        let v = &vars[idx];
        let mut candidates: Vec<(Value, bool)> = Vec::new();
        if v.sort == Sort::Bool {
            candidates.push((Value::Bool(false), false));
            candidates.push((Value::Bool(true), false));
        } else {
            candidates.extend(literals.iter().filter(|l| l.sort() == v.sort).map(|l| (l.clone(), false)));
            let used = fresh_used.get(&v.sort).copied().unwrap_or(0);
            candidates.extend((0..used).map(|k| (fresh(v.sort, k), false)));
            candidates.push((fresh(v.sort, used), true));
        }
        for (value, is_new) in candidates {
            model.insert(v.clone(), value);
            if is_new {
                *fresh_used.entry(v.sort).or_default() += 1;
            }
            let found = go(f, vars, literals, idx + 1, fresh_used, model);
            if is_new {
                *fresh_used.get_mut(&v.sort).unwrap() -= 1;
            }
            if found {
                return true;
            }
        }
        model.remove(v);
        false
    }
    let mut model = Model::new();
    go(f, &vars, &literals, 0, &mut BTreeMap::new(), &mut model).then_some(model)
}

/// Uniform assignment from `{#0..#(size-1)}` (uninterpreted), `0..size` (int)
/// or booleans.
pub fn random_model(f: &Formula, rng: &mut impl Rng, size: u32) -> Model {
    f.vars()
        .into_iter()
        .map(|v| {
            let value = match v.sort {
                Sort::Uninterpreted => Value::Uninterpreted(rng.gen_range(0..size)),
                Sort::Int => Value::Int(rng.gen_range(0..size as i64)),
                Sort::Bool => Value::Bool(rng.gen()),
                Sort::String => Value::string(&format!("v{}", rng.gen_range(0..size))),
            };
            (v.clone(), value)
        })
        .collect()
}

fn random_value(sort: Sort, rng: &mut impl Rng, size: u32) -> Value {
    match sort {
        Sort::Uninterpreted => Value::Uninterpreted(rng.gen_range(0..size)),
        Sort::Int => Value::Int(rng.gen_range(0..size as i64)),
        Sort::Bool => Value::Bool(rng.gen()),
        Sort::String => Value::string(&format!("v{}", rng.gen_range(0..size))),
    }
}

pub fn random_tuple(schema: &Schema, i: usize, rng: &mut impl Rng, size: u32) -> Tuple {
    let decl = schema.relation(i);
    Tuple::from_values(decl, decl.columns.iter().map(|(_, s)| random_value(*s, rng, size)))
}

/// A random instance with up to `max_tuples` tuples per relation.
pub fn random_instance(schema: &Schema, rng: &mut impl Rng, size: u32, max_tuples: usize) -> Instance {
    let mut inst = Instance::empty(schema);
    for i in 0..schema.len() {
        for _ in 0..rng.gen_range(0..=max_tuples) {
            inst.insert(schema, i, random_tuple(schema, i, rng, size)).unwrap();
        }
    }
    inst
}

/// Re-checks a counterexample pair with the evaluator alone. Returns the
/// first violated property.
pub fn independent_check(problem: &NormalizedProblem, k: usize, inst: &Instance, inst_prime: &Instance) -> Result<(), String> {
    let schema = &problem.schema;
    for v in problem.views() {
        if eval_view(schema, v, inst) != eval_view(schema, v, inst_prime) {
            return Err(format!("view {} differs", v.name));
        }
    }
    let q: Relation = eval_query(schema, &problem.query, inst);
    let q_prime = eval_query(schema, &problem.query, inst_prime);
    if q_prime.rows.difference(&q.rows).next().is_none() {
        return Err("Q(I') \\ Q(I) is empty".into());
    }
    let bound = (problem.relation_count() - 1) + problem.view_count(k) + 1;
    if inst_prime.total_tuples() > bound || inst.total_tuples() > bound {
        return Err(format!("{} tuples exceed the bound {bound}", inst_prime.total_tuples()));
    }
    Ok(())
}

/// The external solver command: `QDET_SOLVER_CMD` if set, else `z3 -in`
/// when a `z3` binary is on the path.
pub fn external_solver() -> Option<String> {
    if let Ok(cmd) = std::env::var("QDET_SOLVER_CMD") {
        if !cmd.trim().is_empty() {
            return Some(cmd);
        }
    }
    std::process::Command::new("z3")
        .arg("-version")
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|_| "z3 -in".to_string())
}
