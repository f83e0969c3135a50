mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use qdet_core::eval::{eval_query, eval_view};
use qdet_core::formula::{build_negated_star, Formula, TupleVar, Var};
use qdet_core::normalize::normalize;
use qdet_core::parser::{parse_problem, print_problem, SourceFile};
use qdet_core::relational::{Atom, CmpOp, ColumnRef, Expr, Predicate, Schema, Term, Tuple, TupleSeq, Value};
use qdet_core::solver::solve_builtin;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const HEADER: &str = "relation R1(A: int, B: int);\nrelation R2(C: int, D: int);\n";

fn schema() -> Schema {
    parse_problem(&SourceFile::new(format!("{HEADER}query project R1.A where true from R1, R2;")))
        .unwrap()
        .problem
        .schema
}

fn column(cols: &'static [(&'static str, &'static str)]) -> impl Strategy<Value = ColumnRef> {
    prop::sample::select(cols).prop_map(|(r, c)| ColumnRef::new(r, c))
}

fn term(cols: &'static [(&'static str, &'static str)]) -> impl Strategy<Value = Term<ColumnRef>> {
    prop_oneof![
        3 => column(cols).prop_map(Term::Col),
        1 => (0i64..3).prop_map(|n| Term::Const(Value::Int(n))),
    ]
}

fn predicate(cols: &'static [(&'static str, &'static str)], ops: &'static [CmpOp]) -> impl Strategy<Value = Predicate> {
    let atom = (prop::sample::select(ops), term(cols), term(cols))
        .prop_map(|(op, lhs, rhs)| Expr::Atom(Atom { op, lhs, rhs }));
    let leaf = prop_oneof![8 => atom, 1 => Just(Expr::True), 1 => Just(Expr::False)];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Or),
            inner.prop_map(|e| Expr::Not(Box::new(e))),
        ]
    })
}

const ALL: &[(&str, &str)] = &[("R1", "A"), ("R1", "B"), ("R2", "C"), ("R2", "D")];
const R1: &[(&str, &str)] = &[("R1", "A"), ("R1", "B")];
const R2: &[(&str, &str)] = &[("R2", "C"), ("R2", "D")];
const EQ: &[CmpOp] = &[CmpOp::Eq];
const ANY_OP: &[CmpOp] = &[CmpOp::Eq, CmpOp::Lt, CmpOp::Le];

fn projection(cols: &'static [(&'static str, &'static str)]) -> impl Strategy<Value = String> {
    prop::sample::subsequence(cols, 1..=cols.len())
        .prop_map(|cs| cs.iter().map(|(r, c)| format!("{r}.{c}")).collect::<Vec<_>>().join(", "))
}

/// Source text of a two-relation problem with equality predicates.
fn problem_source() -> impl Strategy<Value = String> {
    let view = |rel: &'static str, cols| (projection(cols), predicate(cols, EQ)).prop_map(move |(p, q)| (rel, p, q));
    (
        prop::collection::vec(view("R1", R1), 0..3),
        prop::collection::vec(view("R2", R2), 0..3),
        projection(ALL),
        predicate(ALL, EQ),
    )
        .prop_map(|(v1, v2, proj, pred)| {
            let mut s = HEADER.to_string();
            for (n, (rel, p, q)) in v1.iter().chain(&v2).enumerate() {
                s.push_str(&format!("view V{n} = project {p} where {q} from {rel};\n"));
            }
            s.push_str(&format!("query project {proj} where {pred} from R1, R2;\n"));
            s
        })
}

fn all_bindings(schema: &Schema) -> Vec<BTreeMap<ColumnRef, Value>> {
    let cols: Vec<ColumnRef> = schema.all_columns().collect();
    let mut out = vec![BTreeMap::new()];
    for c in cols {
        out = out
            .into_iter()
            .flat_map(|b| {
                (0..3).map({
                    let c = c.clone();
                    move |n| {
                        let mut b = b.clone();
                        b.insert(c.clone(), Value::Int(n));
                        b
                    }
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sub_tuple_is_idempotent(a in 0i64..5, b in 0i64..5, pick in prop::sample::subsequence(R1, 0..=2)) {
        let s = schema();
        let t = Tuple::from_values(s.relation(0), [Value::Int(a), Value::Int(b)]);
        let cols: Vec<ColumnRef> = pick.iter().map(|(r, c)| ColumnRef::new(r, c)).collect();
        let once = t.sub_tuple(&cols).unwrap();
        prop_assert_eq!(once.sub_tuple(&cols).unwrap(), once.clone());
        prop_assert_eq!(once.len(), cols.len());
    }

    #[test]
    fn except_changes_only_its_position(vals in prop::collection::vec(0i64..4, 6), index in 0usize..2) {
        let s = schema();
        let seq = TupleSeq(vec![
            Tuple::from_values(s.relation(0), [Value::Int(vals[0]), Value::Int(vals[1])]),
            Tuple::from_values(s.relation(1), [Value::Int(vals[2]), Value::Int(vals[3])]),
        ]);
        let replacement = Tuple::from_values(s.relation(index), [Value::Int(vals[4]), Value::Int(vals[5])]);
        let out = seq.except(index, replacement.clone(), &s).unwrap();
        prop_assert_eq!(&out.0[index], &replacement);
        prop_assert_eq!(&out.0[1 - index], &seq.0[1 - index]);
        prop_assert!(seq.except(index, seq.0[1 - index].clone(), &s).is_err());
    }

    #[test]
    fn nnf_preserves_meaning(p in predicate(ALL, ANY_OP)) {
        let n = p.nnf();
        prop_assert!(n.is_nnf());
        for b in all_bindings(&schema()) {
            prop_assert_eq!(p.eval(&|c| b.get(c)).unwrap(), n.eval(&|c| b.get(c)).unwrap());
        }
    }

    #[test]
    fn printing_round_trips(src in problem_source()) {
        let parsed = parse_problem(&SourceFile::new(&src)).map_err(|e| TestCaseError::fail(format!("{e:?}")))?.problem;
        let printed = print_problem(&parsed);
        let reparsed = parse_problem(&SourceFile::new(&printed)).map_err(|e| TestCaseError::fail(format!("{e:?}\n{printed}")))?.problem;
        prop_assert_eq!(parsed, reparsed);
    }

    #[test]
    fn normalization_is_idempotent(src in problem_source()) {
        let p = normalize(&parse_problem(&SourceFile::new(&src)).unwrap().problem);
        prop_assert_eq!(normalize(&p.to_problem()), p);
    }

    #[test]
    fn negated_condition_mentions_only_its_tuple_variables(src in problem_source()) {
        let p = normalize(&parse_problem(&SourceFile::new(&src)).unwrap().problem);
        for i in 0..p.relation_count() {
            let f = build_negated_star(&p, i);
            prop_assert_eq!(f.tuple_vars.len(), p.relation_count() + p.view_count(i));
            let declared = f.vars();
            for v in f.body.columns() {
                prop_assert!(declared.contains(&v), "{} is not declared", v);
            }
        }
    }

    #[test]
    fn builder_matches_hand_composition(src in problem_source(), seed in any::<u64>()) {
        let p = normalize(&parse_problem(&SourceFile::new(&src)).unwrap().problem);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..p.relation_count() {
            let f = build_negated_star(&p, i);
            let reference = common::hand_composed(&p, i);
            for _ in 0..20 {
                let m = common::random_model(&f, &mut rng, 3);
                prop_assert_eq!(f.eval(&m).unwrap(), reference.eval(&|v| m.get(v)).unwrap());
            }
        }
    }

    #[test]
    fn view_evaluation_is_monotone(src in problem_source(), seed in any::<u64>()) {
        let p = normalize(&parse_problem(&SourceFile::new(&src)).unwrap().problem);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let small = common::random_instance(&p.schema, &mut rng, 3, 3);
        let mut large = small.clone();
        for i in 0..p.schema.len() {
            for _ in 0..3 {
                large.insert(&p.schema, i, common::random_tuple(&p.schema, i, &mut rng, 3)).unwrap();
            }
        }
        for v in p.views() {
            prop_assert!(eval_view(&p.schema, v, &small).is_subset(&eval_view(&p.schema, v, &large)));
        }
        prop_assert!(eval_query(&p.schema, &p.query, &small).is_subset(&eval_query(&p.schema, &p.query, &large)));
    }
}

fn equality_formula() -> impl Strategy<Value = Formula> {
    let schema = parse_problem(&SourceFile::new(
        "relation R(A: uninterpreted, B: uninterpreted, C: uninterpreted, D: uninterpreted, E: uninterpreted);\n\
         query project R.A where true from R;",
    ))
    .unwrap()
    .problem
    .schema;
    let tv = TupleVar::base(&schema, 0);
    let vars: Vec<Var> = tv.vars().cloned().collect();
    let term = prop_oneof![
        4 => prop::sample::select(vars).prop_map(Term::Col),
        1 => (0u32..2).prop_map(|n| Term::Const(Value::Uninterpreted(n))),
    ];
    let atom = (term.clone(), term).prop_map(|(l, r)| Expr::Atom(Atom { op: CmpOp::Eq, lhs: l, rhs: r }));
    let body = atom.prop_recursive(3, 20, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..5).prop_map(Expr::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Or),
            inner.prop_map(|e| Expr::Not(Box::new(e))),
        ]
    });
    body.prop_map(move |body| Formula { body, tuple_vars: vec![tv.clone()] })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn builtin_agrees_with_brute_force(f in equality_formula()) {
        let got = solve_builtin(&f).unwrap();
        prop_assert_eq!(got.is_sat(), common::brute_force_sat(&f).is_some());
        if let Some(m) = &got.model {
            prop_assert_eq!(f.eval(m), Ok(true));
        }
    }
}
