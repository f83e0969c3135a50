//! Set-semantics evaluation of views and the query on concrete instances.

use std::collections::BTreeSet;

use crate::relational::{eval_predicate, ColumnRef, Instance, QueryDef, Schema, Tuple, ViewDef};

/// A duplicate-free set of tuples over a fixed column list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    pub columns: Vec<ColumnRef>,
    pub rows: BTreeSet<Tuple>,
}

impl Relation {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.rows.contains(t)
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows.is_subset(&other.rows)
    }
}

/// `π_U σ_θ R_i` on `inst`. Panics if the instance is not well-formed for
/// the view's relation.
pub fn eval_view(schema: &Schema, v: &ViewDef, inst: &Instance) -> Relation {
    let relation = &schema.relation(v.source).name;
    let rows = inst
        .tuples(relation)
        .filter(|t| eval_predicate(&v.predicate, &t.0).expect("instance conforms to schema"))
        .map(|t| t.sub_tuple(&v.projection).expect("projection columns exist"))
        .collect();
    Relation {
        columns: v.projection.clone(),
        rows,
    }
}

/// `π_U σ_θ (R_1 × … × R_m)` on `inst`, by nested loops over the cross product.
pub fn eval_query(schema: &Schema, q: &QueryDef, inst: &Instance) -> Relation {
    let relations: Vec<Vec<&Tuple>> = schema
        .relations()
        .iter()
        .map(|r| inst.tuples(&r.name).collect())
        .collect();
    let mut rows = BTreeSet::new();
    if relations.iter().all(|r| !r.is_empty()) {
        let mut cursor = vec![0usize; relations.len()];
        'product: loop {
            let mut joined = Tuple::new();
            for (k, &pos) in cursor.iter().enumerate() {
                for (c, v) in &relations[k][pos].0 {
                    joined.insert(c.clone(), v.clone());
                }
            }
            if eval_predicate(&q.predicate, &joined.0).expect("instance conforms to schema") {
                rows.insert(joined.sub_tuple(&q.projection).expect("projection columns exist"));
            }
            for k in (0..cursor.len()).rev() {
                cursor[k] += 1;
                if cursor[k] < relations[k].len() {
                    continue 'product;
                }
                cursor[k] = 0;
            }
            break;
        }
    }
    Relation {
        columns: q.projection.clone(),
        rows,
    }
}

/// Whether every view returns the same set on both instances.
pub fn views_equal<'a>(
    schema: &Schema,
    views: impl IntoIterator<Item = &'a ViewDef>,
    i1: &Instance,
    i2: &Instance,
) -> bool {
    views
        .into_iter()
        .all(|v| eval_view(schema, v, i1) == eval_view(schema, v, i2))
}
