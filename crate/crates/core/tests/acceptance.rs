//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qdet_core::check::{check, CheckOptions, Status};
use qdet_core::corpus::{standard_corpus, CorpusProblem};
use qdet_core::eval::eval_view;
use qdet_core::formula::build_negated_star;
use qdet_core::normalize::{normalize, NormalizedProblem};
use qdet_core::oracle::{oracle_check, OracleBounds};
use qdet_core::par::{map_slice, Execution};
use qdet_core::parser::{parse_problem, SourceFile};
use qdet_core::solver::{solve_builtin, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Option<Outcome> + 'a>);

fn builtin_verdicts(corpus: &[CorpusProblem]) -> Result<Vec<qdet_core::Verdict>, String> {
    map_slice(corpus, Execution::default(), |p| {
        check(&p.problem, &CheckOptions::default()).map_err(|e| format!("{}: {e}", p.name))
    })
    .into_iter()
    .collect()
}

fn soundness(corpus: &[CorpusProblem]) -> Outcome {
    let start = Instant::now();
    let verdicts = builtin_verdicts(corpus)?;
    let determined: Vec<&CorpusProblem> = corpus
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.status == Status::Determined)
        .map(|(p, _)| p)
        .collect();
    let bounds = OracleBounds::new(3, 3).unwrap();
    let disagreements: Vec<String> = map_slice(&determined, Execution::default(), |p| {
        match oracle_check(&p.problem, bounds) {
            Ok(o) if o.is_determined() => None,
            Ok(_) => Some(format!("{}: oracle found a counterexample", p.name)),
            Err(e) => Some(format!("{}: {e}", p.name)),
        }
    })
    .into_iter()
    .flatten()
    .collect();
    let elapsed = start.elapsed();
    if !disagreements.is_empty() {
        return Err(format!("{} disagreement(s), first: {}", disagreements.len(), disagreements[0]));
    }
    if elapsed > Duration::from_secs(300) {
        return Err(format!("took {elapsed:.1?}, over 5 minutes"));
    }
    Ok(format!(
        "{} problems, {} DETERMINED, all confirmed by the oracle at (3,3) in {elapsed:.1?}",
        corpus.len(),
        determined.len()
    ))
}

fn completeness(corpus: &[CorpusProblem]) -> Outcome {
    let verdicts = builtin_verdicts(corpus)?;
    let mut checked = 0;
    for (p, v) in corpus.iter().zip(&verdicts) {
        if v.status != Status::NotDetermined {
            continue;
        }
        let cx = v.counterexample.as_ref().ok_or_else(|| format!("{}: no counterexample", p.name))?;
        let k = v.failing_relation.ok_or_else(|| format!("{}: no failing relation", p.name))?;
        common::independent_check(&p.problem, k, &cx.instance, &cx.instance_prime).map_err(|e| format!("{}: {e}", p.name))?;
        checked += 1;
    }
    if checked == 0 {
        return Err("the corpus produced no NOT_DETERMINED problem".into());
    }
    Ok(format!("{checked} counterexamples verified by the evaluator"))
}

fn builder(corpus: &[CorpusProblem]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut evaluations = 0usize;
    for p in corpus {
        for i in 0..p.problem.relation_count() {
            let f = build_negated_star(&p.problem, i);
            let reference = common::hand_composed(&p.problem, i);
            for _ in 0..200 {
                let m = common::random_model(&f, &mut rng, 4);
                let got = f.eval(&m).map_err(|e| e.to_string())?;
                let want = reference.eval(&|v| m.get(v)).map_err(|e| e.to_string())?;
                if got != want {
                    return Err(format!("{} relation {}: {got} vs {want} under {m:?}", p.name, i + 1));
                }
                evaluations += 1;
            }
        }
    }
    Ok(format!("{evaluations} assignments agree"))
}

fn solver(corpus: &[CorpusProblem]) -> Outcome {
    let formulas: Vec<(String, qdet_core::formula::Formula)> = corpus
        .iter()
        .flat_map(|p| (0..p.problem.relation_count()).map(move |i| (format!("{} relation {}", p.name, i + 1), build_negated_star(&p.problem, i))))
        .collect();
    let failures: Vec<String> = map_slice(&formulas, Execution::default(), |(name, f)| {
        let got = match solve_builtin(f) {
            Ok(r) => r,
            Err(e) => return Some(format!("{name}: {e}")),
        };
        if let Some(m) = &got.model {
            if f.eval(m) != Ok(true) {
                return Some(format!("{name}: model does not satisfy the formula"));
            }
        }
        let want = common::brute_force_sat(f).is_some();
        (got.is_sat() != want).then(|| format!("{name}: builtin {} vs brute force {want}", got.status.as_str()))
    })
    .into_iter()
    .flatten()
    .collect();
    match failures.first() {
        Some(first) => Err(format!("{} mismatch(es), first: {first}", failures.len())),
        None => Ok(format!("{} formulas agree with brute force", formulas.len())),
    }
}

fn backends(corpus: &[CorpusProblem]) -> Option<Outcome> {
    let cmd = common::external_solver()?;
    let external = CheckOptions {
        solver: SolverConfig::external(cmd.clone()),
        ..CheckOptions::default()
    };
    let run = || -> Outcome {
        for p in corpus {
            let b = check(&p.problem, &CheckOptions::default()).map_err(|e| format!("{}: {e}", p.name))?;
            let x = check(&p.problem, &external).map_err(|e| format!("{}: {e}", p.name))?;
            if b.status != x.status {
                return Err(format!("{}: builtin {} vs external {}", p.name, b.status.as_str(), x.status.as_str()));
            }
        }
        Ok(format!("{} problems agree with `{cmd}`", corpus.len()))
    };
    Some(run())
}

fn parse(src: &str) -> NormalizedProblem {
    normalize(&parse_problem(&SourceFile::new(src)).expect("example parses").problem)
}

fn worked_examples() -> Outcome {
    let cases: [(&str, &str, Status); 4] = [
        (
            "projection mismatch",
            "relation R(A: uninterpreted, B: uninterpreted);\n\
             view V = project R.A where true from R;\n\
             query project R.B where true from R;",
            Status::NotDetermined,
        ),
        (
            "identity view, selective query",
            "relation R(A: uninterpreted, B: uninterpreted, C: uninterpreted);\n\
             view V = project R.A, R.B, R.C where true from R;\n\
             query project R.C where R.A = R.B and not R.B = R.C from R;",
            Status::Determined,
        ),
        (
            "identity view, join query",
            "relation R(A: uninterpreted, B: uninterpreted); relation S(C: uninterpreted);\n\
             view V = project R.A, R.B where true from R;\n\
             view W = project S.C where true from S;\n\
             query project R.A where R.B = S.C or R.A = S.C from R, S;",
            Status::Determined,
        ),
        (
            "equalities and connectives only",
            "relation R(A: uninterpreted, B: uninterpreted, C: uninterpreted);\n\
             view V1 = project R.A, R.B where R.A = R.B or not R.B = R.C from R;\n\
             view V2 = project R.C where not (R.A = R.C and R.B = R.C) from R;\n\
             query project R.A where R.A = R.B and (R.B = R.C or not R.A = R.C) from R;",
            Status::Determined,
        ),
    ];
    let mut lines = Vec::new();
    for (name, src, expected) in cases {
        let p = parse(src);
        let start = Instant::now();
        let v = check(&p, &CheckOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let elapsed = start.elapsed();
        if v.status != expected {
            return Err(format!("{name}: got {}, expected {}", v.status.as_str(), expected.as_str()));
        }
        if elapsed >= Duration::from_secs(1) {
            return Err(format!("{name}: took {elapsed:?}"));
        }
        let oracle = oracle_check(&p, OracleBounds::new(3, 2).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        if oracle.is_determined() != v.is_determined() {
            return Err(format!("{name}: the oracle disagrees"));
        }
        lines.push(format!("{name} {}", v.status.as_str()));
    }
    Ok(lines.join("; "))
}

fn monotonicity(corpus: &[CorpusProblem]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let problems: Vec<&CorpusProblem> = corpus.iter().filter(|p| p.problem.views().count() > 0).collect();
    let mut comparisons = 0;
    for n in 0..100 {
        let p = &problems[(n * 37) % problems.len()].problem;
        let small = common::random_instance(&p.schema, &mut rng, 4, 4);
        let mut large = small.clone();
        let extra = common::random_instance(&p.schema, &mut rng, 4, 4);
        for i in 0..p.schema.len() {
            for t in extra.tuples(&p.schema.relation(i).name) {
                large.insert(&p.schema, i, t.clone()).unwrap();
            }
        }
        for v in p.views() {
            if !eval_view(&p.schema, v, &small).is_subset(&eval_view(&p.schema, v, &large)) {
                return Err(format!("view {} not monotone on pair {n}", v.name));
            }
            comparisons += 1;
        }
    }
    Ok(format!("100 instance pairs, {comparisons} view comparisons"))
}

fn main() -> ExitCode {
    let corpus = standard_corpus();
    let criteria: Vec<Criterion<'_>> = vec![
        ("soundness against the bounded oracle", Box::new(|| Some(soundness(&corpus)))),
        ("counterexamples verify", Box::new(|| Some(completeness(&corpus)))),
        ("builder matches hand-composed formula", Box::new(|| Some(builder(&corpus)))),
        ("builtin solver matches brute force", Box::new(|| Some(solver(&corpus)))),
        ("builtin and external backends agree", Box::new(|| backends(&corpus))),
        ("worked examples", Box::new(|| Some(worked_examples()))),
        ("view evaluation is monotone", Box::new(|| Some(monotonicity(&corpus)))),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Some(Ok(detail)) => println!("PASS [{}] {name}: {detail}", n + 1),
            Some(Err(why)) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", n + 1);
            }
            None => println!("SKIP [{}] {name}: no external solver (set QDET_SOLVER_CMD)", n + 1),
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
