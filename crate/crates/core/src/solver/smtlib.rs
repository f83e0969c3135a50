//! SMT-LIB2 rendering of formulas and parsing of solver replies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::builtin::FreshValues;
use super::{verified, SatResult, SolverError};
use crate::formula::{Formula, Model, Var};
use crate::relational::{CmpOp, Expr, Sort, Term, Value};

/// Name of the declared sort standing for the uninterpreted domain.
pub const UNINTERPRETED_SORT: &str = "S";

fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::Uninterpreted => UNINTERPRETED_SORT,
        Sort::Int => "Int",
        Sort::Bool => "Bool",
        Sort::String => "String",
    }
}

/// Quoted SMT-LIB symbol for a variable name or uninterpreted literal.
pub fn smt_symbol(name: &str) -> String {
    format!("|{name}|")
}

fn literal_symbol(n: u32) -> String {
    smt_symbol(&format!("#{n}"))
}

fn value(v: &Value) -> String {
    match v {
        Value::Uninterpreted(n) => literal_symbol(*n),
        Value::Int(n) if *n < 0 => format!("(- {})", n.unsigned_abs()),
        Value::Int(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => {
            let mut out = String::from("\"");
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\"\""),
                    ' '..='~' => out.push(c),
                    c => write!(out, "\\u{{{:x}}}", c as u32).unwrap(),
                }
            }
            out.push('"');
            out
        }
    }
}

fn term(t: &Term<Var>) -> String {
    match t {
        Term::Col(v) => smt_symbol(&v.name),
        Term::Const(c) => value(c),
    }
}

fn expr(e: &Expr<Var>, out: &mut String) {
    match e {
        Expr::True => out.push_str("true"),
        Expr::False => out.push_str("false"),
        Expr::And(xs) | Expr::Or(xs) if xs.is_empty() => {
            out.push_str(if matches!(e, Expr::And(_)) { "true" } else { "false" })
        }
        Expr::And(xs) | Expr::Or(xs) => {
            out.push_str(if matches!(e, Expr::And(_)) { "(and" } else { "(or" });
            for x in xs {
                out.push(' ');
                expr(x, out);
            }
            out.push(')');
        }
        Expr::Not(x) => {
            out.push_str("(not ");
            expr(x, out);
            out.push(')');
        }
        Expr::Atom(a) => {
            let op = match a.op {
                CmpOp::Eq => "=",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
            };
            write!(out, "({op} {} {})", term(&a.lhs), term(&a.rhs)).unwrap();
        }
    }
}

fn uninterpreted_literals(f: &Formula) -> BTreeSet<u32> {
    f.body
        .constants()
        .into_iter()
        .filter_map(|c| match c {
            Value::Uninterpreted(n) => Some(*n),
            _ => None,
        })
        .collect()
}

/// Renders `f` as a self-contained SMT-LIB2 script ending in
/// `(check-sat)` and `(get-model)`.
///
/// Uninterpreted literals `#n` become constants of sort `S` that are
/// asserted pairwise distinct alongside the formula body.
pub fn emit_smtlib(f: &Formula) -> String {
    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n(set-logic ALL)\n");
    let literals = uninterpreted_literals(f);
    let vars = f.vars();
    if !literals.is_empty() || vars.iter().any(|v| v.sort == Sort::Uninterpreted) {
        writeln!(out, "(declare-sort {UNINTERPRETED_SORT} 0)").unwrap();
    }
    for n in &literals {
        writeln!(out, "(declare-const {} {UNINTERPRETED_SORT})", literal_symbol(*n)).unwrap();
    }
    for v in &vars {
        writeln!(out, "(declare-const {} {})", smt_symbol(&v.name), sort_name(v.sort)).unwrap();
    }
    let mut body = String::new();
    expr(&f.body, &mut body);
    if literals.len() >= 2 {
        let names: Vec<String> = literals.iter().map(|n| literal_symbol(*n)).collect();
        body = format!("(and (distinct {}) {body})", names.join(" "));
    }
    writeln!(out, "(assert {body})").unwrap();
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Result<Vec<Sexp>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack.last_mut().ok_or("unbalanced `)`")?.push(Sexp::List(done));
                i += 1;
            }
            '|' => {
                let start = i + 1;
                i = start;
                while i < chars.len() && chars[i] != '|' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err("unterminated quoted symbol".into());
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
                i += 1;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string literal".into()),
                        Some('"') if chars.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                stack.last_mut().unwrap().push(Sexp::Str(unescape_unicode(&s)));
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '(' | ')' | ';' | '"' | '|') {
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

fn unescape_unicode(s: &str) -> String {
    let mut out = String::new();
    let mut rest = s;
    while let Some(at) = rest.find("\\u{") {
        out.push_str(&rest[..at]);
        let tail = &rest[at + 3..];
        match tail.find('}').and_then(|end| {
            u32::from_str_radix(&tail[..end], 16).ok().and_then(char::from_u32).map(|c| (c, end))
        }) {
            Some((c, end)) => {
                out.push(c);
                rest = &tail[end + 1..];
            }
            None => {
                out.push_str("\\u{");
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

enum Raw {
    Element(String),
    Value(Value),
}

fn raw_value(sort: Sort, s: &Sexp) -> Result<Raw, String> {
    let bad = || format!("cannot read {s:?} as a value of sort {sort}");
    Ok(match (sort, s) {
        (Sort::Uninterpreted, Sexp::Atom(a)) => Raw::Element(a.clone()),
        (Sort::Int, Sexp::Atom(a)) => Raw::Value(Value::Int(a.parse().map_err(|_| bad())?)),
        (Sort::Int, Sexp::List(xs)) => match xs.as_slice() {
            [Sexp::Atom(minus), Sexp::Atom(n)] if minus == "-" => {
                let n: i64 = n.parse().map_err(|_| bad())?;
                Raw::Value(Value::Int(-n))
            }
            _ => return Err(bad()),
        },
        (Sort::Bool, Sexp::Atom(a)) if a == "true" || a == "false" => Raw::Value(Value::Bool(a == "true")),
        (Sort::String, Sexp::Str(text)) => Raw::Value(Value::string(text)),
        _ => return Err(bad()),
    })
}

/// Reads a solver's reply to [`emit_smtlib`]`(f)`.
///
/// Uninterpreted universe elements are renamed to canonical `#0, #1, …` in
/// variable order, except those equal to a literal of the formula, which
/// take that literal's name. The model is re-evaluated before returning.
pub fn parse_model(solver_output: &str, f: &Formula) -> Result<SatResult, SolverError> {
    let failure = SolverError::ExternalFailure;
    let items = tokenize(solver_output).map_err(|e| failure(format!("malformed output: {e}")))?;
    let mut items = items.into_iter();
    match items.next() {
        Some(Sexp::Atom(s)) if s == "unsat" => return Ok(SatResult::unsat()),
        Some(Sexp::Atom(s)) if s == "sat" => {}
        Some(Sexp::Atom(s)) if s == "unknown" => return Err(failure("solver answered `unknown`".into())),
        Some(other) => return Err(failure(format!("unexpected solver output {other:?}"))),
        None => return Err(failure("empty solver output".into())),
    }
    let model_list = match items.next() {
        Some(Sexp::List(xs)) => xs,
        other => return Err(failure(format!("expected a model after `sat`, found {other:?}"))),
    };
    let mut definitions: BTreeMap<String, Sexp> = BTreeMap::new();
    for entry in model_list {
        if let Sexp::List(parts) = entry {
            if let [Sexp::Atom(head), Sexp::Atom(name), Sexp::List(args), _sort, value] = parts.as_slice() {
                if head == "define-fun" && args.is_empty() {
                    definitions.insert(name.clone(), value.clone());
                }
            }
        }
    }

    let literals = uninterpreted_literals(f);
    let mut element_names: BTreeMap<String, Value> = BTreeMap::new();
    for n in &literals {
        if let Some(Sexp::Atom(element)) = definitions.get(&format!("#{n}")) {
            element_names.insert(element.clone(), Value::Uninterpreted(*n));
        }
    }
    let all_literals: Vec<Value> = f.body.constants().into_iter().cloned().collect();
    let mut fresh = FreshValues::new(all_literals.iter());
    let mut model = Model::new();
    for var in f.vars() {
        let value = match definitions.get(&*var.name) {
            Some(sexp) => match raw_value(var.sort, sexp).map_err(failure)? {
                Raw::Value(v) => v,
                Raw::Element(e) => element_names
                    .entry(e)
                    .or_insert_with(|| fresh.next(Sort::Uninterpreted))
                    .clone(),
            },
            // the solver left it unconstrained
            None => match var.sort {
                Sort::Bool => Value::Bool(false),
                s => fresh.next(s),
            },
        };
        model.insert(var.clone(), value);
    }
    verified(f, model).map_err(|e| failure(e.to_string()))
}
