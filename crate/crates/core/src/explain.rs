//! Pretty-printing of the per-relation condition, both in its quantified
//! form and as the skolemized negation handed to the solver.

use std::fmt::Write as _;

use crate::formula::{build_negated_star, build_phi, build_psi, instantiate, tuple_vars_for, TupleVar, Var};
use crate::normalize::NormalizedProblem;
use crate::relational::{Expr, Term, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    #[default]
    Text,
    Latex,
}

struct Sym {
    forall: &'static str,
    exists: &'static str,
    implies: &'static str,
    and: &'static str,
    or: &'static str,
    not: &'static str,
    top: &'static str,
    bottom: &'static str,
}

const TEXT: Sym = Sym {
    forall: "∀",
    exists: "∃",
    implies: " ⇒ ",
    and: " ∧ ",
    or: " ∨ ",
    not: "¬",
    top: "⊤",
    bottom: "⊥",
};

const LATEX: Sym = Sym {
    forall: "\\forall ",
    exists: "\\exists ",
    implies: " \\Rightarrow ",
    and: " \\land ",
    or: " \\lor ",
    not: "\\lnot ",
    top: "\\top",
    bottom: "\\bot",
};

impl Style {
    fn sym(self) -> &'static Sym {
        match self {
            Style::Text => &TEXT,
            Style::Latex => &LATEX,
        }
    }

    /// `t1` / `t1'2` as written in formulas.
    fn label(self, label: &str) -> String {
        match self {
            Style::Text => label.to_string(),
            Style::Latex => match label.trim_start_matches('t').split_once('\'') {
                Some((i, j)) => format!("t'_{{{i},{j}}}"),
                None => format!("t_{{{}}}", label.trim_start_matches('t')),
            },
        }
    }

    fn var(self, v: &Var) -> String {
        match self {
            Style::Text => v.name.to_string(),
            Style::Latex => {
                let (label, col) = v.name.split_once('.').unwrap_or((&v.name, ""));
                format!("{}.\\mathit{{{}}}", self.label(label), latex_escape(col))
            }
        }
    }

    fn value(self, v: &Value) -> String {
        match (self, v) {
            (Style::Text, _) => v.to_string(),
            (Style::Latex, Value::Uninterpreted(n)) => format!("\\#{n}"),
            (Style::Latex, Value::Bool(b)) => format!("\\mathsf{{{b}}}"),
            (Style::Latex, Value::Int(n)) => n.to_string(),
            (Style::Latex, Value::Str(s)) => format!("\\texttt{{\"{}\"}}", latex_escape(s)),
        }
    }

    fn op(self, op: crate::relational::CmpOp) -> &'static str {
        match (self, op.symbol()) {
            (Style::Latex, "<=") => "\\leq",
            (_, s) => s,
        }
    }

    fn name(self, n: &str) -> String {
        match self {
            Style::Text => n.to_string(),
            Style::Latex => format!("\\mathrm{{{}}}", latex_escape(n)),
        }
    }
}

fn latex_escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '_' | '#' | '%' | '&' | '$' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '\\' => out.push_str("\\textbackslash{}"),
            _ => out.push(c),
        }
    }
    out
}

fn term(style: Style, t: &Term<Var>) -> String {
    match t {
        Term::Col(v) => style.var(v),
        Term::Const(c) => style.value(c),
    }
}

/// Renders `e`, parenthesizing nested connectives.
pub fn render_expr(style: Style, e: &Expr<Var>) -> String {
    let s = style.sym();
    let child = |x: &Expr<Var>| {
        let r = render_expr(style, x);
        if matches!(x, Expr::And(xs) | Expr::Or(xs) if xs.len() > 1) {
            format!("({r})")
        } else {
            r
        }
    };
    match e {
        Expr::True => s.top.to_string(),
        Expr::False => s.bottom.to_string(),
        Expr::And(xs) if xs.is_empty() => s.top.to_string(),
        Expr::Or(xs) if xs.is_empty() => s.bottom.to_string(),
        Expr::And(xs) | Expr::Or(xs) if xs.len() == 1 => render_expr(style, &xs[0]),
        Expr::And(xs) => xs.iter().map(child).collect::<Vec<_>>().join(s.and),
        Expr::Or(xs) => xs.iter().map(child).collect::<Vec<_>>().join(s.or),
        Expr::Not(x) => format!("{}{}", s.not, child(x)),
        Expr::Atom(a) => format!("{} {} {}", term(style, &a.lhs), style.op(a.op), term(style, &a.rhs)),
    }
}

fn labels(style: Style, ts: &[&TupleVar]) -> String {
    ts.iter().map(|t| style.label(&t.label)).collect::<Vec<_>>().join(", ")
}

/// Explanation for relation `i`: the quantified condition with every
/// abbreviation spelled out, followed by the skolemized negation.
pub fn explain_relation(problem: &NormalizedProblem, i: usize, style: Style) -> String {
    let s = style.sym();
    let (base, witnesses) = tuple_vars_for(problem, i);
    let seq: Vec<&TupleVar> = base.iter().collect();
    let all = labels(style, &seq);
    let ti = style.label(&base[i].label);
    let views = &problem.views_by_relation[i];
    let theta = render_expr(style, &instantiate(&problem.query.predicate, &seq));
    let (open, close, nl) = match style {
        Style::Text => ("", "", "\n"),
        Style::Latex => ("\\[ ", " \\]", "\n"),
    };
    let mut out = String::new();
    let rel = &problem.schema.relation(i).name;
    match style {
        Style::Text => writeln!(out, "relation {rel} ({} of {}), {} view(s)", i + 1, problem.relation_count(), views.len()).unwrap(),
        Style::Latex => writeln!(out, "% relation {rel} ({} of {}), {} view(s)", i + 1, problem.relation_count(), views.len()).unwrap(),
    }

    if views.is_empty() {
        write!(out, "{open}{}{all}. {}({theta}){close}{nl}", s.forall, s.not).unwrap();
    } else {
        let disjuncts: Vec<String> = views
            .iter()
            .zip(&witnesses)
            .map(|(v, w)| {
                let wl = style.label(&w.label);
                let vn = style.name(&v.name);
                let (th, ph, ps) = match style {
                    Style::Text => ("θ_", "Φ_", "Ψ"),
                    Style::Latex => ("\\theta_{", "\\Phi_{", "\\Psi"),
                };
                let close_sub = if style == Style::Latex { "}" } else { "" };
                format!(
                    "({th}{vn}{close_sub}({ti}){}{}{wl}. {ph}{vn}{close_sub}({ti}, {wl}){}{ps}({all}, {wl}))",
                    s.and, s.forall, s.implies
                )
            })
            .collect();
        let theta_name = if style == Style::Latex { "\\theta" } else { "θ" };
        write!(
            out,
            "{open}{}{all}. {theta_name}({all}){}{}{close}{nl}",
            s.forall,
            s.implies,
            disjuncts.join(s.or)
        )
        .unwrap();
    }

    let mut defs: Vec<(String, String)> = Vec::new();
    let (th, ph, ps, cl) = match style {
        Style::Text => ("θ", "Φ_", "Ψ", ""),
        Style::Latex => ("\\theta", "\\Phi_{", "\\Psi", "}"),
    };
    defs.push((format!("{th}({all})"), theta));
    for (j, (v, w)) in views.iter().zip(&witnesses).enumerate() {
        let vn = style.name(&v.name);
        let wl = style.label(&w.label);
        let sub = match style {
            Style::Text => format!("θ_{vn}({ti})"),
            Style::Latex => format!("\\theta_{{{vn}}}({ti})"),
        };
        defs.push((sub, render_expr(style, &instantiate(&v.predicate, &[&base[i]]))));
        defs.push((
            format!("{ph}{vn}{cl}({ti}, {wl})"),
            render_expr(style, &build_phi(problem, i, j, &base[i], w)),
        ));
        defs.push((
            format!("{ps}({all}, {wl})"),
            render_expr(style, &build_psi(problem, i, &base, w)),
        ));
    }
    match style {
        Style::Text => {
            out.push_str("where\n");
            let width = defs.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
            for (l, r) in &defs {
                let pad = width - l.chars().count();
                writeln!(out, "  {l}{} := {r}", " ".repeat(pad)).unwrap();
            }
        }
        Style::Latex => {
            out.push_str("\\begin{align*}\n");
            for (l, r) in &defs {
                writeln!(out, "  {l} &:= {r} \\\\").unwrap();
            }
            out.push_str("\\end{align*}\n");
        }
    }

    let neg = build_negated_star(problem, i);
    let ex: Vec<&TupleVar> = neg.tuple_vars.iter().collect();
    match style {
        Style::Text => out.push_str("negation, skolemized (satisfiable iff not determined):\n  "),
        Style::Latex => out.push_str("% negation, skolemized\n"),
    }
    writeln!(out, "{open}{}{}. {}{close}", s.exists, labels(style, &ex), render_expr(style, &neg.body)).unwrap();
    out
}

/// Explanation for every relation, separated by blank lines.
pub fn explain(problem: &NormalizedProblem, style: Style) -> String {
    (0..problem.relation_count())
        .map(|i| explain_relation(problem, i, style))
        .collect::<Vec<_>>()
        .join("\n")
}
