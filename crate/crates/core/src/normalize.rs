//! Canonical form consumed by the checker: predicates in negation normal
//! form, projections deduplicated, views grouped by source relation.

use crate::relational::{dedup, Problem, QueryDef, Schema, ViewDef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedProblem {
    pub schema: Schema,
    /// `views_by_relation[i]` is `V_i`, in input order.
    pub views_by_relation: Vec<Vec<ViewDef>>,
    pub query: QueryDef,
}

impl NormalizedProblem {
    /// `n_i`, the number of views over relation `i`.
    pub fn view_count(&self, i: usize) -> usize {
        self.views_by_relation[i].len()
    }

    pub fn relation_count(&self) -> usize {
        self.schema.len()
    }

    pub fn views(&self) -> impl Iterator<Item = &ViewDef> {
        self.views_by_relation.iter().flatten()
    }

    /// Flattens back to a problem, relation by relation.
    pub fn to_problem(&self) -> Problem {
        Problem {
            schema: self.schema.clone(),
            views: self.views().cloned().collect(),
            query: self.query.clone(),
        }
    }
}

pub fn normalize(problem: &Problem) -> NormalizedProblem {
    let mut views_by_relation = vec![Vec::new(); problem.schema.len()];
    for v in &problem.views {
        views_by_relation[v.source].push(ViewDef {
            name: v.name.clone(),
            source: v.source,
            projection: dedup(v.projection.clone()),
            predicate: v.predicate.nnf(),
        });
    }
    NormalizedProblem {
        schema: problem.schema.clone(),
        views_by_relation,
        query: QueryDef {
            projection: dedup(problem.query.projection.clone()),
            predicate: problem.query.predicate.nnf(),
        },
    }
}
