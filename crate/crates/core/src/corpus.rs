//! A fixed, exhaustively enumerated family of small problems, generated as
//! source text and parsed. Used for differential testing and benchmarks.

use crate::normalize::{normalize, NormalizedProblem};
use crate::parser::{parse_problem, SourceFile};

#[derive(Debug, Clone)]
pub struct CorpusProblem {
    pub name: String,
    pub source: String,
    pub problem: NormalizedProblem,
}

struct Family {
    tag: &'static str,
    relations: &'static [(&'static str, &'static [&'static str])],
    /// Candidate views per relation as `(projection, predicate)`.
    views: &'static [&'static [(&'static str, &'static str)]],
    projections: &'static [&'static str],
    predicates: &'static [&'static str],
}

const ONE: &[(&str, &str)] = &[("R.A", "true")];
const PAIR: &[(&str, &str)] = &[
    ("R.A", "true"),
    ("R.B", "true"),
    ("R.A, R.B", "true"),
    ("R.A", "R.A = R.B"),
    ("R.B", "R.A = R.B"),
    ("R.A, R.B", "R.A = R.B"),
    ("R.A", "not R.A = R.B"),
    ("R.B", "not R.A = R.B"),
    ("R.A, R.B", "not R.A = R.B"),
];
const R1_SMALL: &[(&str, &str)] = &[("R1.A", "true"), ("R1.A, R1.B", "true"), ("R1.A", "R1.A = R1.B")];
const R1_ONE: &[(&str, &str)] = &[("R1.A", "true")];
const R2_ONE: &[(&str, &str)] = &[("R2.C", "true")];
const R2_SMALL: &[(&str, &str)] = &[("R2.C", "true"), ("R2.C, R2.D", "true"), ("R2.D", "R2.C = R2.D")];

const FAMILIES: &[Family] = &[
    Family {
        tag: "a",
        relations: &[("R", &["A"])],
        views: &[ONE],
        projections: &["R.A"],
        predicates: &["true"],
    },
    Family {
        tag: "ab",
        relations: &[("R", &["A", "B"])],
        views: &[PAIR],
        projections: &["R.A", "R.B", "R.A, R.B"],
        predicates: &["true", "R.A = R.B", "not R.A = R.B"],
    },
    Family {
        tag: "a-c",
        relations: &[("R1", &["A"]), ("R2", &["C"])],
        views: &[R1_ONE, R2_ONE],
        projections: &["R1.A", "R2.C", "R1.A, R2.C"],
        predicates: &["true", "R1.A = R2.C", "not R1.A = R2.C"],
    },
    Family {
        tag: "ab-c",
        relations: &[("R1", &["A", "B"]), ("R2", &["C"])],
        views: &[R1_SMALL, R2_ONE],
        projections: &["R1.A", "R1.B", "R2.C", "R1.A, R2.C"],
        predicates: &["true", "R1.B = R2.C", "not R1.B = R2.C", "R1.A = R1.B"],
    },
    Family {
        tag: "ab-cd",
        relations: &[("R1", &["A", "B"]), ("R2", &["C", "D"])],
        views: &[R1_SMALL, R2_SMALL],
        projections: &["R1.A", "R1.A, R2.C", "R2.D"],
        predicates: &["true", "R1.B = R2.C", "not R1.A = R2.C"],
    },
];

/// All subsets of `0..n` with at most two elements, in a fixed order.
fn view_choices(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    out.extend((0..n).map(|a| vec![a]));
    for a in 0..n {
        out.extend((a + 1..n).map(|b| vec![a, b]));
    }
    out
}

fn cartesian(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

fn source(f: &Family, views: &[Vec<usize>], proj: &str, pred: &str) -> String {
    let mut s = String::new();
    for (name, cols) in f.relations {
        let cols: Vec<String> = cols.iter().map(|c| format!("{c}: uninterpreted")).collect();
        s.push_str(&format!("relation {name}({});\n", cols.join(", ")));
    }
    let mut n = 0;
    for (k, chosen) in views.iter().enumerate() {
        for &v in chosen {
            let (p, q) = f.views[k][v];
            n += 1;
            s.push_str(&format!("view V{n} = project {p} where {q} from {};\n", f.relations[k].0));
        }
    }
    let from: Vec<&str> = f.relations.iter().map(|r| r.0).collect();
    s.push_str(&format!("query project {proj} where {pred} from {};\n", from.join(", ")));
    s
}

/// The standard corpus: 1117 problems over one or two relations of arity
/// at most two, at most two views per relation and equality predicates.
pub fn standard_corpus() -> Vec<CorpusProblem> {
    let mut out = Vec::new();
    for f in FAMILIES {
        let per_relation: Vec<Vec<Vec<usize>>> = f.views.iter().map(|c| view_choices(c.len())).collect();
        let sizes: Vec<usize> = per_relation.iter().map(Vec::len).collect();
        for pick in cartesian(&sizes) {
            let views: Vec<Vec<usize>> = pick.iter().zip(&per_relation).map(|(&x, c)| c[x].clone()).collect();
            for (pi, proj) in f.projections.iter().enumerate() {
                for (qi, pred) in f.predicates.iter().enumerate() {
                    let source = source(f, &views, proj, pred);
                    let parsed = parse_problem(&SourceFile::new(&source))
                        .unwrap_or_else(|e| panic!("corpus problem does not parse: {e:?}\n{source}"));
                    let tag: Vec<String> = views
                        .iter()
                        .map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("+"))
                        .collect();
                    out.push(CorpusProblem {
                        name: format!("{}/v{}/p{pi}/q{qi}", f.tag, tag.join(",")),
                        problem: normalize(&parsed.problem),
                        source,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn corpus_size_and_uniqueness() {
        let c = standard_corpus();
        assert_eq!(c.len(), 2 + 46 * 9 + 4 * 9 + 7 * 2 * 16 + 49 * 9);
        assert!(c.len() >= 200);
        let names: BTreeSet<&str> = c.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names.len(), c.len());
        let sources: BTreeSet<&str> = c.iter().map(|p| p.source.as_str()).collect();
        assert_eq!(sources.len(), c.len());
    }

    #[test]
    fn corpus_stays_small() {
        for p in standard_corpus() {
            let m = p.problem.relation_count();
            assert!((1..=2).contains(&m));
            for i in 0..m {
                assert!(p.problem.schema.relation(i).arity() <= 2);
                assert!(p.problem.view_count(i) <= 2);
            }
        }
    }
}
