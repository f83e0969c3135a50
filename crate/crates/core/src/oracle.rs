//! Brute-force determinacy over bounded instances.
//!
//! Works straight from the definition: views determine the query iff any two
//! instances with equal view outputs have equal query outputs. All instances
//! whose relations hold at most `max_tuples` tuples over a `domain_size`-value
//! domain are enumerated and bucketed by their view outputs; a bucket holding
//! two different query outputs is a counterexample. This is equivalent to
//! comparing every pair, in time linear in the number of instances.
//!
//! The oracle never looks at the logical characterization the checker uses,
//! which is what makes it useful for differential testing.

use std::collections::HashMap;

use thiserror::Error;

use crate::eval::{eval_query, eval_view, views_equal, Relation};
use crate::normalize::NormalizedProblem;
use crate::par::{map_range, map_slice, Execution};
use crate::relational::{Instance, RelationDecl, Sort, Tuple, Value};

/// Default cap on the number of instances enumerated.
pub const DEFAULT_WORK_BUDGET: u64 = 250_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBounds {
    pub domain_size: usize,
    pub max_tuples: usize,
}

impl OracleBounds {
    pub fn new(domain_size: usize, max_tuples: usize) -> Result<OracleBounds, OracleError> {
        if domain_size == 0 {
            return Err(OracleError::InvalidBounds("domain size must be at least 1".into()));
        }
        Ok(OracleBounds { domain_size, max_tuples })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error(
        "enumeration needs {required} instances but the work budget is {budget}; \
         lower --domain-size or --max-tuples"
    )]
    BudgetExceeded { required: u128, budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    DeterminedUpToBounds {
        bounds: OracleBounds,
        instances: u64,
    },
    Counterexample {
        bounds: OracleBounds,
        instance: Instance,
        instance_prime: Instance,
    },
}

impl OracleOutcome {
    pub fn is_determined(&self) -> bool {
        matches!(self, OracleOutcome::DeterminedUpToBounds { .. })
    }

    pub fn to_json(&self, problem: &NormalizedProblem) -> serde_json::Value {
        let bounds = |b: &OracleBounds| serde_json::json!({"domain_size": b.domain_size, "max_tuples": b.max_tuples});
        match self {
            OracleOutcome::DeterminedUpToBounds { bounds: b, instances } => serde_json::json!({
                "status": "DETERMINED_UP_TO_BOUNDS",
                "bounds": bounds(b),
                "instances_enumerated": instances,
            }),
            OracleOutcome::Counterexample { bounds: b, instance, instance_prime } => {
                let q = |i: &Instance| {
                    let rows = eval_query(&problem.schema, &problem.query, i).rows;
                    serde_json::Value::Array(rows.iter().map(|t| t.to_json(true)).collect())
                };
                serde_json::json!({
                    "status": "COUNTEREXAMPLE",
                    "bounds": bounds(b),
                    "instance": instance.to_json(),
                    "instance_prime": instance_prime.to_json(),
                    "query_on_instance": q(instance),
                    "query_on_instance_prime": q(instance_prime),
                })
            }
        }
    }
}

/// The values a column of `sort` ranges over.
pub fn domain(sort: Sort, size: usize) -> Vec<Value> {
    match sort {
        Sort::Uninterpreted => (0..size as u32).map(Value::Uninterpreted).collect(),
        Sort::Int => (0..size as i64).map(Value::Int).collect(),
        Sort::Bool => [false, true].into_iter().take(size).map(Value::Bool).collect(),
        Sort::String => (0..size).map(|k| Value::string(&format!("v{k}"))).collect(),
    }
}

fn all_tuples(relation: &RelationDecl, size: usize) -> Vec<Tuple> {
    let mut rows: Vec<Vec<Value>> = vec![Vec::new()];
    for (_, sort) in &relation.columns {
        let values = domain(*sort, size);
        rows = rows
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut r = prefix.clone();
                    r.push(v.clone());
                    r
                })
            })
            .collect();
    }
    rows.into_iter().map(|r| Tuple::from_values(relation, r)).collect()
}

fn tuple_count(relation: &RelationDecl, size: usize) -> u128 {
    relation
        .columns
        .iter()
        .map(|(_, s)| domain(*s, size).len() as u128)
        .fold(1u128, |acc, n| acc.saturating_mul(n))
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of instances the enumeration would visit.
pub fn instance_count(problem: &NormalizedProblem, bounds: OracleBounds) -> u128 {
    problem
        .schema
        .relations()
        .iter()
        .map(|r| {
            let n = tuple_count(r, bounds.domain_size);
            (0..=bounds.max_tuples as u128)
                .map(|k| binomial(n, k))
                .fold(0u128, |acc, c| acc.saturating_add(c))
        })
        .fold(1u128, |acc, c| acc.saturating_mul(c))
}

/// Subsets of `0..n` with at most `k` elements, smallest first, each sorted.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..k.min(n) {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |l: &usize| l + 1);
            for x in start..n {
                let mut t = s.clone();
                t.push(x);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn oracle_check(problem: &NormalizedProblem, bounds: OracleBounds) -> Result<OracleOutcome, OracleError> {
    oracle_check_with(problem, bounds, DEFAULT_WORK_BUDGET, Execution::default())
}

/// Per-relation enumeration state: every candidate tuple set and the id of
/// the view outputs it produces.
struct RelationSpace {
    tuples: Vec<Tuple>,
    subsets: Vec<Vec<usize>>,
    signature: Vec<u32>,
}

pub fn oracle_check_with(
    problem: &NormalizedProblem,
    bounds: OracleBounds,
    budget: u64,
    exec: Execution,
) -> Result<OracleOutcome, OracleError> {
    let required = instance_count(problem, bounds);
    if required > budget as u128 {
        return Err(OracleError::BudgetExceeded { required, budget });
    }
    let schema = &problem.schema;

    let spaces: Vec<RelationSpace> = (0..schema.len())
        .map(|i| {
            let relation = schema.relation(i);
            let tuples = all_tuples(relation, bounds.domain_size);
            let subsets = subsets(tuples.len(), bounds.max_tuples);
            // views only read their own relation, so their outputs can be
            // computed once per tuple set
            let outputs: Vec<Vec<Relation>> = map_slice(&subsets, exec, |s| {
                let mut inst = Instance::empty(schema);
                for &x in s {
                    inst.insert(schema, i, tuples[x].clone()).expect("domain tuples conform");
                }
                problem.views_by_relation[i].iter().map(|v| eval_view(schema, v, &inst)).collect()
            });
            let mut ids: HashMap<Vec<Relation>, u32> = HashMap::new();
            let signature = outputs
                .into_iter()
                .map(|o| {
                    let next = ids.len() as u32;
                    *ids.entry(o).or_insert(next)
                })
                .collect();
            RelationSpace { tuples, subsets, signature }
        })
        .collect();

    let radix: Vec<usize> = spaces.iter().map(|s| s.subsets.len()).collect();
    let total = radix.iter().product::<usize>();
    let digits = |mut n: usize| -> Vec<usize> {
        let mut d = vec![0; radix.len()];
        for k in (0..radix.len()).rev() {
            d[k] = n % radix[k];
            n /= radix[k];
        }
        d
    };
    let build = |d: &[usize]| -> Instance {
        let mut inst = Instance::empty(schema);
        for (i, (&choice, space)) in d.iter().zip(&spaces).enumerate() {
            for &x in &space.subsets[choice] {
                inst.insert(schema, i, space.tuples[x].clone()).expect("domain tuples conform");
            }
        }
        inst
    };

    let evaluated: Vec<(Vec<u32>, Relation)> = map_range(total, exec, |n| {
        let d = digits(n);
        let signature = d.iter().zip(&spaces).map(|(&c, s)| s.signature[c]).collect();
        (signature, eval_query(schema, &problem.query, &build(&d)))
    });

    let mut first_seen: HashMap<&[u32], usize> = HashMap::new();
    for (n, (signature, answer)) in evaluated.iter().enumerate() {
        match first_seen.get(signature.as_slice()) {
            None => {
                first_seen.insert(signature, n);
            }
            Some(&m) if evaluated[m].1 != *answer => {
                let instance = build(&digits(m));
                let instance_prime = build(&digits(n));
                assert!(
                    views_equal(schema, problem.views(), &instance, &instance_prime)
                        && eval_query(schema, &problem.query, &instance) != eval_query(schema, &problem.query, &instance_prime),
                    "oracle counterexample failed its own re-check"
                );
                return Ok(OracleOutcome::Counterexample {
                    bounds,
                    instance,
                    instance_prime,
                });
            }
            Some(_) => {}
        }
    }
    Ok(OracleOutcome::DeterminedUpToBounds {
        bounds,
        instances: total as u64,
    })
}
