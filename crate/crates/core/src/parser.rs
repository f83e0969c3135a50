//! Hand-written recursive-descent parser for the `.qdet` problem language.
//!
//! ```text
//! relation R(A: uninterpreted, B: uninterpreted);
//! view V = project R.A where R.A = R.B from R;
//! query project R.A where true from R;
//! ```
//!
//! Parsing runs in two phases: a syntax pass that records positions, then a
//! resolution pass that checks names, sorts, and the single-relation /
//! no-self-join shape, reporting every problem it finds.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::relational::{
    check_predicate, Atom, CmpOp, ColumnRef, Expr, ModelError, Name, Predicate, Problem, QueryDef,
    RelationDecl, Schema, Sort, Term, Value, ViewDef,
};

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub text: String,
    pub path: Option<String>,
}

impl SourceFile {
    pub fn new(text: impl Into<String>) -> SourceFile {
        SourceFile { text: text.into(), path: None }
    }

    pub fn with_path(text: impl Into<String>, path: impl Into<String>) -> SourceFile {
        SourceFile {
            text: text.into(),
            path: Some(path.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A positioned message. Lines and columns are one-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl ParseDiagnostic {
    fn error(pos: Pos, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic {
            severity: Severity::Error,
            message: message.into(),
            line: pos.line,
            column: pos.column,
        }
    }

    fn warning(pos: Pos, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic {
            severity: Severity::Warning,
            message: message.into(),
            line: pos.line,
            column: pos.column,
        }
    }

    /// `path:line:col: severity: message`
    pub fn render(&self, path: Option<&str>) -> String {
        format!(
            "{}:{}:{}: {}: {}",
            path.unwrap_or("<input>"),
            self.line,
            self.column,
            self.severity,
            self.message
        )
    }
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub problem: Problem,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Fresh(u32),
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Dot,
    Eq,
    Lt,
    Le,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(_) => f.write_str("string literal"),
            Tok::Fresh(n) => write!(f, "`#{n}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "relation", "view", "query", "project", "where", "from", "and", "or", "not", "true", "false",
];

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseDiagnostic> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if (c == '-' && next == Some('-')) || (c == '/' && next == Some('/')) {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            '=' => Tok::Eq,
            '<' if next == Some('=') => {
                bump!();
                Tok::Le
            }
            '<' => Tok::Lt,
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(ParseDiagnostic::error(pos, "unterminated string literal"))
                        }
                        Some('"') => break,
                        Some('\\') => {
                            bump!();
                            match chars.get(i) {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                _ => {
                                    return Err(ParseDiagnostic::error(
                                        Pos { line, column: col },
                                        "unknown escape sequence",
                                    ))
                                }
                            }
                            bump!();
                        }
                        Some(&ch) => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                Tok::Str(s)
            }
            '#' => {
                bump!();
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
                let digits: String = chars[start..i].iter().collect();
                let n = digits
                    .parse::<u32>()
                    .map_err(|_| ParseDiagnostic::error(pos, "expected digits after `#`"))?;
                out.push((Tok::Fresh(n), pos));
                continue;
            }
            c if c.is_ascii_digit() || (c == '-' && next.is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
                let digits: String = chars[start..i].iter().collect();
                let n = digits
                    .parse::<i64>()
                    .map_err(|_| ParseDiagnostic::error(pos, "integer literal out of range"))?;
                out.push((Tok::Int(n), pos));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    bump!();
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
                continue;
            }
            other => return Err(ParseDiagnostic::error(pos, format!("unexpected character `{other}`"))),
        };
        bump!();
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct SynCol {
    relation: String,
    column: String,
    pos: (usize, usize),
}

impl SynCol {
    fn pos(&self) -> Pos {
        Pos { line: self.pos.0, column: self.pos.1 }
    }
}

impl fmt::Display for SynCol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.relation, self.column)
    }
}

type SynPred = Expr<SynCol>;

struct SynRelation {
    name: String,
    pos: Pos,
    columns: Vec<(String, Pos, Sort)>,
}

struct SynView {
    name: String,
    pos: Pos,
    projection: Vec<SynCol>,
    predicate: SynPred,
    pred_pos: Pos,
    from: Vec<(String, Pos)>,
}

struct SynQuery {
    pos: Pos,
    projection: Vec<SynCol>,
    predicate: SynPred,
    pred_pos: Pos,
    from: Vec<(String, Pos)>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            Err(ParseDiagnostic::error(
                self.pos(),
                format!("expected {tok}, found {}", self.peek()),
            ))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_keyword(kw) {
            Ok(self.advance().1)
        } else {
            Err(ParseDiagnostic::error(
                self.pos(),
                format!("expected `{kw}`, found {}", self.peek()),
            ))
        }
    }

    fn name(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let pos = self.advance().1;
                Ok((s, pos))
            }
            other => Err(ParseDiagnostic::error(
                self.pos(),
                format!("expected {what}, found {other}"),
            )),
        }
    }

    /// Skips past the next `;` so parsing can resume at the next declaration.
    fn recover(&mut self) {
        loop {
            match self.advance().0 {
                Tok::Semi | Tok::Eof => return,
                _ => {}
            }
        }
    }

    fn relation(&mut self) -> PResult<SynRelation> {
        self.expect_keyword("relation")?;
        let (name, pos) = self.name("relation name")?;
        self.expect(Tok::LParen)?;
        let mut columns = Vec::new();
        loop {
            let (col, cpos) = self.name("column name")?;
            self.expect(Tok::Colon)?;
            let (sort_name, spos) = match self.peek().clone() {
                Tok::Ident(s) => (s, self.advance().1),
                other => {
                    return Err(ParseDiagnostic::error(
                        self.pos(),
                        format!("expected a sort, found {other}"),
                    ))
                }
            };
            let sort = Sort::from_keyword(&sort_name).ok_or_else(|| {
                ParseDiagnostic::error(
                    spos,
                    format!("unknown sort `{sort_name}` (expected uninterpreted, int, bool, or string)"),
                )
            })?;
            columns.push((col, cpos, sort));
            if *self.peek() == Tok::Comma {
                self.advance();
            } else {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Semi)?;
        Ok(SynRelation { name, pos, columns })
    }

    fn colref(&mut self) -> PResult<SynCol> {
        let (relation, pos) = self.name("column reference `Relation.column`")?;
        if *self.peek() != Tok::Dot {
            return Err(ParseDiagnostic::error(
                self.pos(),
                format!("column references must be qualified: expected `{relation}.<column>`"),
            ));
        }
        self.advance();
        let (column, _) = self.name("column name")?;
        Ok(SynCol {
            relation,
            column,
            pos: (pos.line, pos.column),
        })
    }

    fn colrefs(&mut self) -> PResult<Vec<SynCol>> {
        let mut out = vec![self.colref()?];
        while *self.peek() == Tok::Comma {
            self.advance();
            out.push(self.colref()?);
        }
        Ok(out)
    }

    fn relation_list(&mut self) -> PResult<Vec<(String, Pos)>> {
        self.expect_keyword("from")?;
        let mut out = vec![self.name("relation name")?];
        while *self.peek() == Tok::Comma {
            self.advance();
            out.push(self.name("relation name")?);
        }
        Ok(out)
    }

    fn view(&mut self) -> PResult<SynView> {
        self.expect_keyword("view")?;
        let (name, pos) = self.name("view name")?;
        self.expect(Tok::Eq)?;
        self.expect_keyword("project")?;
        let projection = self.colrefs()?;
        self.expect_keyword("where")?;
        let pred_pos = self.pos();
        let predicate = self.predicate()?;
        let from = self.relation_list()?;
        self.expect(Tok::Semi)?;
        Ok(SynView {
            name,
            pos,
            projection,
            predicate,
            pred_pos,
            from,
        })
    }

    fn query(&mut self) -> PResult<SynQuery> {
        let pos = self.expect_keyword("query")?;
        self.expect_keyword("project")?;
        let projection = self.colrefs()?;
        self.expect_keyword("where")?;
        let pred_pos = self.pos();
        let predicate = self.predicate()?;
        let from = self.relation_list()?;
        self.expect(Tok::Semi)?;
        Ok(SynQuery {
            pos,
            projection,
            predicate,
            pred_pos,
            from,
        })
    }

    fn predicate(&mut self) -> PResult<SynPred> {
        let mut items = vec![self.conjunction()?];
        while self.is_keyword("or") {
            self.advance();
            items.push(self.conjunction()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Or(items) })
    }

    fn conjunction(&mut self) -> PResult<SynPred> {
        let mut items = vec![self.unary()?];
        while self.is_keyword("and") {
            self.advance();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::And(items) })
    }

    fn unary(&mut self) -> PResult<SynPred> {
        if self.is_keyword("not") {
            self.advance();
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if *self.peek() == Tok::LParen {
            self.advance();
            let inner = self.predicate()?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        let is_cmp = |t: &Tok| matches!(t, Tok::Eq | Tok::Lt | Tok::Le);
        if (self.is_keyword("true") || self.is_keyword("false")) && !is_cmp(self.peek_at(1)) {
            let v = self.is_keyword("true");
            self.advance();
            return Ok(if v { Expr::True } else { Expr::False });
        }
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            other => {
                return Err(ParseDiagnostic::error(
                    self.pos(),
                    format!("expected `=`, `<` or `<=`, found {other}"),
                ))
            }
        };
        self.advance();
        let rhs = self.term()?;
        Ok(Expr::Atom(Atom { op, lhs, rhs }))
    }

    fn term(&mut self) -> PResult<Term<SynCol>> {
        let value = match self.peek().clone() {
            Tok::Int(n) => Value::Int(n),
            Tok::Str(s) => Value::string(&s),
            Tok::Fresh(n) => Value::Uninterpreted(n),
            Tok::Ident(s) if s == "true" || s == "false" => Value::Bool(s == "true"),
            Tok::Ident(_) => return Ok(Term::Col(self.colref()?)),
            other => {
                return Err(ParseDiagnostic::error(
                    self.pos(),
                    format!("expected a column reference or constant, found {other}"),
                ))
            }
        };
        self.advance();
        Ok(Term::Const(value))
    }
}

/// Parses and resolves a whole problem file.
///
/// On success every relational-core invariant holds; on failure the returned
/// list holds at least one error (warnings found along the way are included).
pub fn parse_problem(src: &SourceFile) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let toks = lex(&src.text).map_err(|d| vec![d])?;
    let mut p = Parser { toks, at: 0 };
    let mut diags = Vec::new();
    let mut relations = Vec::new();
    let mut views = Vec::new();
    let mut queries = Vec::new();

    while *p.peek() != Tok::Eof {
        let result = if p.is_keyword("relation") {
            p.relation().map(|r| relations.push(r))
        } else if p.is_keyword("view") {
            p.view().map(|v| views.push(v))
        } else if p.is_keyword("query") {
            p.query().map(|q| queries.push(q))
        } else {
            Err(ParseDiagnostic::error(
                p.pos(),
                format!("expected `relation`, `view` or `query`, found {}", p.peek()),
            ))
        };
        if let Err(d) = result {
            diags.push(d);
            p.recover();
        }
    }
    let end = p.pos();
    if !diags.is_empty() {
        return Err(diags);
    }
    resolve(relations, views, queries, end)
}

fn resolve(
    relations: Vec<SynRelation>,
    views: Vec<SynView>,
    queries: Vec<SynQuery>,
    end: Pos,
) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    let mut decls = Vec::new();
    let mut names = BTreeSet::new();
    for r in &relations {
        if !names.insert(r.name.clone()) {
            errors.push(ParseDiagnostic::error(r.pos, format!("relation `{}` is declared more than once", r.name)));
            continue;
        }
        let mut cols = BTreeSet::new();
        for (c, cpos, _) in &r.columns {
            if !cols.insert(c.as_str()) {
                errors.push(ParseDiagnostic::error(*cpos, format!("column `{c}` is declared more than once in `{}`", r.name)));
            }
        }
        let cols: Vec<(&str, Sort)> = r.columns.iter().map(|(c, _, s)| (c.as_str(), *s)).collect();
        if let Ok(d) = RelationDecl::new(&r.name, &cols) {
            decls.push(d);
        }
    }
    if relations.is_empty() {
        errors.push(ParseDiagnostic::error(end, "no relations declared"));
    }
    let query = match queries.len() {
        0 => {
            errors.push(ParseDiagnostic::error(end, "missing `query` declaration"));
            None
        }
        1 => queries.into_iter().next(),
        _ => {
            for q in &queries[1..] {
                errors.push(ParseDiagnostic::error(q.pos, "only one `query` is allowed per file"));
            }
            None
        }
    };
    if !errors.is_empty() {
        return Err(errors);
    }
    let schema = Schema::new(decls).map_err(|e| vec![ParseDiagnostic::error(end, e.to_string())])?;

    let mut view_defs = Vec::new();
    let mut view_names = BTreeSet::new();
    for v in views {
        if !view_names.insert(v.name.clone()) {
            errors.push(ParseDiagnostic::error(v.pos, format!("view `{}` is defined more than once", v.name)));
            continue;
        }
        match resolve_view(&schema, v, &mut warnings) {
            Ok(def) => view_defs.push(def),
            Err(d) => errors.push(d),
        }
    }
    let query = match query.map(|q| resolve_query(&schema, q, &mut warnings)) {
        Some(Ok(q)) => Some(q),
        Some(Err(d)) => {
            errors.push(d);
            None
        }
        None => None,
    };
    if !errors.is_empty() {
        return Err(errors);
    }
    let problem = Problem::new(schema, view_defs, query.expect("query resolved"))
        .map_err(|e| vec![ParseDiagnostic::error(end, e.to_string())])?;
    Ok(Parsed { problem, warnings })
}

fn lookup_column(schema: &Schema, c: &SynCol) -> Result<(usize, ColumnRef), ParseDiagnostic> {
    let i = schema
        .index_of(&c.relation)
        .ok_or_else(|| ParseDiagnostic::error(c.pos(), format!("unknown relation `{}`", c.relation)))?;
    if schema.relation(i).column_sort(&c.column).is_none() {
        return Err(ParseDiagnostic::error(
            c.pos(),
            format!("relation `{}` has no column `{}`", c.relation, c.column),
        ));
    }
    Ok((i, ColumnRef::new(&c.relation, &c.column)))
}

fn convert_pred(schema: &Schema, pred: &SynPred, only: Option<usize>, single_msg: &str) -> Result<Predicate, ParseDiagnostic> {
    let mut err = None;
    for c in pred.columns() {
        match lookup_column(schema, c) {
            Ok((i, _)) if only.is_some_and(|o| o != i) => {
                err.get_or_insert(ParseDiagnostic::error(c.pos(), single_msg.to_string()));
            }
            Ok(_) => {}
            Err(d) => {
                err.get_or_insert(d);
            }
        }
    }
    if let Some(d) = err {
        return Err(d);
    }
    Ok(raw_map(pred, &mut |c: &SynCol| ColumnRef::new(&c.relation, &c.column)))
}

/// Structure-preserving column rename (no folding), so printing and
/// re-parsing reproduces the same tree.
fn raw_map<C, D>(e: &Expr<C>, f: &mut impl FnMut(&C) -> D) -> Expr<D> {
    match e {
        Expr::True => Expr::True,
        Expr::False => Expr::False,
        Expr::And(xs) => Expr::And(xs.iter().map(|x| raw_map(x, f)).collect()),
        Expr::Or(xs) => Expr::Or(xs.iter().map(|x| raw_map(x, f)).collect()),
        Expr::Not(x) => Expr::Not(Box::new(raw_map(x, f))),
        Expr::Atom(a) => {
            let mut term = |t: &Term<C>| match t {
                Term::Col(c) => Term::Col(f(c)),
                Term::Const(v) => Term::Const(v.clone()),
            };
            Expr::Atom(Atom {
                op: a.op,
                lhs: term(&a.lhs),
                rhs: term(&a.rhs),
            })
        }
    }
}

fn first_pos(pred: &SynPred, fallback: Pos) -> Pos {
    pred.columns().first().map(|c| c.pos()).unwrap_or(fallback)
}

fn model_error(pos: Pos, e: ModelError) -> ParseDiagnostic {
    ParseDiagnostic::error(pos, e.to_string())
}

fn projection(
    schema: &Schema,
    cols: &[SynCol],
    only: Option<usize>,
    single_msg: &str,
    warnings: &mut Vec<ParseDiagnostic>,
) -> Result<Vec<ColumnRef>, ParseDiagnostic> {
    let mut out = Vec::new();
    for c in cols {
        let (i, col) = lookup_column(schema, c)?;
        if only.is_some_and(|o| o != i) {
            return Err(ParseDiagnostic::error(c.pos(), single_msg.to_string()));
        }
        if out.contains(&col) {
            warnings.push(ParseDiagnostic::warning(c.pos(), format!("column `{col}` is projected twice; ignoring the repeat")));
            continue;
        }
        out.push(col);
    }
    Ok(out)
}

const SINGLE_RELATION: &str = "view must reference a single relation";

fn resolve_view(schema: &Schema, v: SynView, warnings: &mut Vec<ParseDiagnostic>) -> Result<ViewDef, ParseDiagnostic> {
    if v.from.len() != 1 {
        return Err(ParseDiagnostic::error(v.from[1].1, SINGLE_RELATION));
    }
    let (source_name, source_pos) = &v.from[0];
    let source = schema
        .index_of(source_name)
        .ok_or_else(|| ParseDiagnostic::error(*source_pos, format!("unknown relation `{source_name}`")))?;
    let projection = projection(schema, &v.projection, Some(source), SINGLE_RELATION, warnings)?;
    let predicate = convert_pred(schema, &v.predicate, Some(source), SINGLE_RELATION)?;
    let name: Name = Arc::from(v.name.as_str());
    check_predicate(schema, &predicate, Some((source, &name)))
        .map_err(|e| model_error(first_pos(&v.predicate, v.pred_pos), e))?;
    ViewDef::new(schema, &v.name, source_name, projection, predicate).map_err(|e| model_error(v.pos, e))
}

fn resolve_query(schema: &Schema, q: SynQuery, warnings: &mut Vec<ParseDiagnostic>) -> Result<QueryDef, ParseDiagnostic> {
    let mut listed = BTreeSet::new();
    for (name, pos) in &q.from {
        if schema.index_of(name).is_none() {
            return Err(ParseDiagnostic::error(*pos, format!("unknown relation `{name}`")));
        }
        if !listed.insert(name.as_str()) {
            return Err(ParseDiagnostic::error(
                *pos,
                format!("self join not supported: `{name}` appears more than once in the query"),
            ));
        }
    }
    let missing: Vec<&str> = schema
        .relations()
        .iter()
        .map(|r| &*r.name)
        .filter(|n| !listed.contains(n))
        .collect();
    if !missing.is_empty() {
        return Err(ParseDiagnostic::error(
            q.from[0].1,
            format!("query must list every declared relation exactly once; missing {}", missing.join(", ")),
        ));
    }
    let projection = projection(schema, &q.projection, None, "", warnings)?;
    let predicate = convert_pred(schema, &q.predicate, None, "")?;
    check_predicate(schema, &predicate, None).map_err(|e| model_error(first_pos(&q.predicate, q.pred_pos), e))?;
    QueryDef::new(schema, projection, predicate).map_err(|e| model_error(q.pos, e))
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Renders a problem back into the `.qdet` language.
pub fn print_problem(problem: &Problem) -> String {
    let mut out = String::new();
    for r in problem.schema.relations() {
        let cols: Vec<String> = r.columns.iter().map(|(c, s)| format!("{c}: {s}")).collect();
        out.push_str(&format!("relation {}({});\n", r.name, cols.join(", ")));
    }
    for v in &problem.views {
        out.push_str(&format!(
            "view {} = project {} where {} from {};\n",
            v.name,
            join(&v.projection),
            v.predicate,
            problem.schema.relation(v.source).name
        ));
    }
    let from: Vec<&str> = problem.schema.relations().iter().map(|r| &*r.name).collect();
    out.push_str(&format!(
        "query project {} where {} from {};\n",
        join(&problem.query.projection),
        problem.query.predicate,
        from.join(", ")
    ));
    out
}
