//! The decision procedure: views determine the query iff the negated
//! condition is unsatisfiable for every relation.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::counterexample::{construct, Counterexample, CounterexampleError};
use crate::formula::build_negated_star;
use crate::normalize::NormalizedProblem;
use crate::par::{map_range, Execution};
use crate::relational::Name;
use crate::solver::{solve, SatResult, SatStatus, SolverConfig, SolverError};

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    pub solver: SolverConfig,
    /// Solve every relation instead of stopping at the first failure.
    pub all: bool,
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Determined,
    NotDetermined,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Determined => "DETERMINED",
            Status::NotDetermined => "NOT_DETERMINED",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelationResult {
    /// Zero-based.
    pub index: usize,
    pub relation: Name,
    pub status: SatStatus,
    pub solve_time: Duration,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    /// Zero-based index `k` of the first relation whose condition fails.
    pub failing_relation: Option<usize>,
    pub counterexample: Option<Counterexample>,
    /// Ordered by relation index.
    pub per_relation: Vec<RelationResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("solving the condition for relation `{relation}`: {error}")]
    Solver { relation: Name, error: SolverError },
    #[error(transparent)]
    Counterexample(#[from] CounterexampleError),
}

fn solve_one(problem: &NormalizedProblem, i: usize, cfg: &SolverConfig) -> Result<(SatResult, Duration), CheckError> {
    let f = build_negated_star(problem, i);
    let start = Instant::now();
    let r = solve(&f, cfg).map_err(|error| CheckError::Solver {
        relation: problem.schema.relation(i).name.clone(),
        error,
    })?;
    Ok((r, start.elapsed()))
}

pub fn check(problem: &NormalizedProblem, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    let m = problem.relation_count();
    let mut solved: Vec<(SatResult, Duration)> = Vec::new();
    if opts.all {
        let results = map_range(m, opts.execution, |i| solve_one(problem, i, &opts.solver));
        for r in results {
            solved.push(r?);
        }
    } else {
        for i in 0..m {
            let r = solve_one(problem, i, &opts.solver)?;
            let stop = r.0.is_sat();
            solved.push(r);
            if stop {
                break;
            }
        }
    }
    let per_relation = solved
        .iter()
        .enumerate()
        .map(|(i, (r, t))| RelationResult {
            index: i,
            relation: problem.schema.relation(i).name.clone(),
            status: r.status,
            solve_time: *t,
        })
        .collect();
    let failing = solved.iter().position(|(r, _)| r.is_sat());
    Ok(match failing {
        None => Verdict {
            status: Status::Determined,
            failing_relation: None,
            counterexample: None,
            per_relation,
        },
        Some(k) => Verdict {
            status: Status::NotDetermined,
            failing_relation: Some(k),
            counterexample: Some(construct(problem, k, &solved[k].0)?),
            per_relation,
        },
    })
}

impl Verdict {
    pub fn is_determined(&self) -> bool {
        self.status == Status::Determined
    }

    pub fn to_json(&self, problem: &NormalizedProblem) -> serde_json::Value {
        let per_relation: Vec<serde_json::Value> = self
            .per_relation
            .iter()
            .map(|r| {
                serde_json::json!({
                    "index": r.index + 1,
                    "relation": r.relation.to_string(),
                    "result": r.status.as_str(),
                    "solve_time_ms": r.solve_time.as_secs_f64() * 1000.0,
                })
            })
            .collect();
        serde_json::json!({
            "status": self.status.as_str(),
            "failing_relation": self.failing_relation.map(|k| k + 1),
            "per_relation": per_relation,
            "counterexample": self.counterexample.as_ref().map(|c| c.to_json(problem)),
        })
    }

    /// Human-readable report. Contains no timings, so it is stable across runs.
    pub fn render_text(&self, problem: &NormalizedProblem) -> String {
        let mut out = String::new();
        match self.failing_relation {
            None => out.push_str("DETERMINED\n"),
            Some(k) => writeln!(
                out,
                "NOT DETERMINED: the views over relation {} ({}) do not pin down the query",
                problem.schema.relation(k).name,
                k + 1
            )
            .unwrap(),
        }
        for r in &self.per_relation {
            writeln!(out, "  relation {} ({}): {}", r.relation, r.index + 1, r.status.as_str()).unwrap();
        }
        if let Some(cx) = &self.counterexample {
            out.push_str("counterexample (views agree, query differs):\n");
            for line in cx.to_string().lines() {
                writeln!(out, "  {line}").unwrap();
            }
        }
        out
    }
}
