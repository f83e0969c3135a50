//! Construction of the per-relation determinacy condition and its
//! skolemized negation.
//!
//! For relation `i` the condition is
//!
//! ```text
//! ∀t. θ(t) ⇒ ⋁_j ( θ_ij(t_i) ∧ ∀t'. Φ_ij(t_i, t') ⇒ Ψ_ij(t, t') )
//! Φ_ij(t_i, t') = θ_ij(t') ∧ t'[U_ij] = t_i[U_ij]
//! Ψ_ij(t, t')   = θ(s) ∧ s[U] = t[U]   where s = t EXCEPT i ↦ t'
//! ```
//!
//! Its negation only has existential quantifiers. Each disjunct `j` gets its
//! own witness tuple `t'_ij`, so the result is a quantifier-free formula
//! over the base tuples `t_1..t_m` and the witnesses.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::normalize::NormalizedProblem;
use crate::relational::{ColumnRef, Expr, ModelError, Name, Predicate, Schema, Sort, Term, Value};

/// A sort-tagged logical variable standing for one column of one tuple variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Name,
    pub sort: Sort,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// `t_i`, the tuple drawn from relation `i` in the universally
    /// quantified sequence.
    Base { relation: usize },
    /// `t'_{i,j}`, the skolemized replacement candidate for disjunct `j`.
    SkolemWitness { relation: usize, disjunct: usize },
}

/// One logical variable per column of relation `relation`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TupleVar {
    pub label: Name,
    pub relation: usize,
    pub relation_name: Name,
    pub role: Role,
    pub columns: Vec<(Name, Var)>,
}

impl TupleVar {
    fn over(schema: &Schema, relation: usize, label: String, role: Role) -> TupleVar {
        let decl = schema.relation(relation);
        let columns = decl
            .columns
            .iter()
            .map(|(c, sort)| {
                let var = Var {
                    name: Arc::from(format!("{label}.{c}")),
                    sort: *sort,
                };
                (c.clone(), var)
            })
            .collect();
        TupleVar {
            label: Arc::from(label),
            relation,
            relation_name: decl.name.clone(),
            role,
            columns,
        }
    }

    /// `t_{i+1}` in one-based notation.
    pub fn base(schema: &Schema, relation: usize) -> TupleVar {
        TupleVar::over(schema, relation, format!("t{}", relation + 1), Role::Base { relation })
    }

    /// `t'_{i+1,j+1}` in one-based notation.
    pub fn witness(schema: &Schema, relation: usize, disjunct: usize) -> TupleVar {
        TupleVar::over(
            schema,
            relation,
            format!("t{}'{}", relation + 1, disjunct + 1),
            Role::SkolemWitness { relation, disjunct },
        )
    }

    pub fn var(&self, column: &str) -> Option<&Var> {
        self.columns.iter().find(|(c, _)| &**c == column).map(|(_, v)| v)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.columns.iter().map(|(_, v)| v)
    }

    fn term(&self, c: &ColumnRef) -> Term<Var> {
        Term::Col(
            self.var(&c.column)
                .unwrap_or_else(|| panic!("{} has no column {}", self.label, c))
                .clone(),
        )
    }
}

/// Ground assignment of logical variables.
pub type Model = BTreeMap<Var, Value>;

/// A quantifier-free formula together with its free tuple variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub body: Expr<Var>,
    pub tuple_vars: Vec<TupleVar>,
}

impl Formula {
    /// All free logical variables, in tuple-variable then column order.
    pub fn vars(&self) -> Vec<&Var> {
        self.tuple_vars.iter().flat_map(TupleVar::vars).collect()
    }

    pub fn eval(&self, model: &Model) -> Result<bool, ModelError> {
        self.body.eval(&|v| model.get(v))
    }

    pub fn tuple_var(&self, role: Role) -> Option<&TupleVar> {
        self.tuple_vars.iter().find(|t| t.role == role)
    }
}

/// `θ` instantiated on a sequence of tuple variables: each column
/// `R.c` becomes the variable for `c` of the tuple variable over `R`.
pub fn instantiate(pred: &Predicate, seq: &[&TupleVar]) -> Expr<Var> {
    pred.map_columns(&mut |c: &ColumnRef| {
        let t = seq
            .iter()
            .find(|t| t.relation_name == c.relation)
            .unwrap_or_else(|| panic!("no tuple variable over relation {}", c.relation));
        match t.term(c) {
            Term::Col(v) => v,
            Term::Const(_) => unreachable!(),
        }
    })
}

/// `Φ_ij(t, t') = θ_ij(t') ∧ t'[U_ij] = t[U_ij]`.
pub fn build_phi(problem: &NormalizedProblem, i: usize, j: usize, t: &TupleVar, t_prime: &TupleVar) -> Expr<Var> {
    debug_assert!(t.relation == i && t_prime.relation == i);
    let view = &problem.views_by_relation[i][j];
    let selection = instantiate(&view.predicate, &[t_prime]);
    let agreement = view
        .projection
        .iter()
        .map(|c| Expr::eq(t_prime.term(c), t.term(c)));
    Expr::and(std::iter::once(selection).chain(agreement).collect::<Vec<_>>())
}

/// `Ψ_i(t, t') = θ(s) ∧ s[U] = t[U]` with `s = t EXCEPT i ↦ t'`.
///
/// Ψ does not depend on which view's witness `t'` is; only the position it
/// replaces matters. Equalities on columns outside relation `i` compare a
/// variable with itself and fold away.
pub fn build_psi(problem: &NormalizedProblem, i: usize, base: &[TupleVar], t_prime: &TupleVar) -> Expr<Var> {
    debug_assert_eq!(base.len(), problem.relation_count());
    debug_assert_eq!(t_prime.relation, i);
    let s: Vec<&TupleVar> = base
        .iter()
        .enumerate()
        .map(|(k, t)| if k == i { t_prime } else { t })
        .collect();
    let selection = instantiate(&problem.query.predicate, &s);
    let agreement = problem.query.projection.iter().map(|c| {
        let k = problem.schema.index_of(&c.relation).expect("resolved column");
        Expr::eq(s[k].term(c), base[k].term(c))
    });
    Expr::and(std::iter::once(selection).chain(agreement).collect::<Vec<_>>())
}

/// The base tuple variables `t_1..t_m` and the witnesses `t'_{i,1}..t'_{i,n_i}`.
pub fn tuple_vars_for(problem: &NormalizedProblem, i: usize) -> (Vec<TupleVar>, Vec<TupleVar>) {
    let base = (0..problem.relation_count())
        .map(|k| TupleVar::base(&problem.schema, k))
        .collect();
    let witnesses = (0..problem.view_count(i))
        .map(|j| TupleVar::witness(&problem.schema, i, j))
        .collect();
    (base, witnesses)
}

/// `θ(t) ∧ ⋀_j ( ¬θ_ij(t_i) ∨ (Φ_ij(t_i, t'_ij) ∧ ¬Ψ_ij(t, t'_ij)) )`.
///
/// Satisfiable iff the views over relation `i` fail to pin down the query.
/// With no views on `i` the conjunction is empty and only `θ(t)` remains.
pub fn build_negated_star(problem: &NormalizedProblem, i: usize) -> Formula {
    assert!(i < problem.relation_count(), "relation index {i} out of range");
    let (base, witnesses) = tuple_vars_for(problem, i);
    let seq: Vec<&TupleVar> = base.iter().collect();
    let theta = instantiate(&problem.query.predicate, &seq);
    let per_view = problem.views_by_relation[i].iter().zip(&witnesses).enumerate().map(|(j, (view, w))| {
        let not_selected = Expr::not(instantiate(&view.predicate, &[&base[i]]));
        let escapes = Expr::and([build_phi(problem, i, j, &base[i], w), Expr::not(build_psi(problem, i, &base, w))]);
        Expr::or([not_selected, escapes])
    });
    let body = Expr::and(std::iter::once(theta).chain(per_view).collect::<Vec<_>>());
    Formula {
        body,
        tuple_vars: base.into_iter().chain(witnesses).collect(),
    }
}
