//! Schema, view and query definitions, predicates, tuples and instances.
//!
//! Relation indices are zero-based throughout the library. User-facing
//! renderings (CLI text, JSON, SMT-LIB comments) print them one-based.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned identifier. Cloning is a reference-count bump.
pub type Name = Arc<str>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("schema must declare at least one relation")]
    EmptySchema,
    #[error("relation `{0}` is declared more than once")]
    DuplicateRelation(Name),
    #[error("relation `{0}` must have at least one column")]
    NoColumns(Name),
    #[error("column `{column}` is declared more than once in relation `{relation}`")]
    DuplicateColumn { relation: Name, column: Name },
    #[error("unknown relation `{0}`")]
    UnknownRelation(Name),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` is not bound")]
    UnboundColumn(String),
    #[error("projection of {0} must not be empty")]
    EmptyProjection(String),
    #[error("view `{view}` must reference a single relation, but mentions `{column}`")]
    ForeignColumn { view: Name, column: ColumnRef },
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("index {index} out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("view `{0}` is defined more than once")]
    DuplicateView(Name),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Uninterpreted,
    Int,
    Bool,
    String,
}

impl Sort {
    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Uninterpreted => "uninterpreted",
            Sort::Int => "int",
            Sort::Bool => "bool",
            Sort::String => "string",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Sort> {
        Some(match s {
            "uninterpreted" => Sort::Uninterpreted,
            "int" => Sort::Int,
            "bool" => Sort::Bool,
            "string" => Sort::String,
            _ => return None,
        })
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A sort-tagged constant.
///
/// Uninterpreted values are opaque labels written `#n`; two labels are equal
/// iff their numbers are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Uninterpreted(u32),
    Int(i64),
    Bool(bool),
    Str(Arc<str>),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Uninterpreted(_) => Sort::Uninterpreted,
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
            Value::Str(_) => Sort::String,
        }
    }

    pub fn string(s: &str) -> Value {
        Value::Str(Arc::from(s))
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Uninterpreted(n) => serde_json::Value::String(format!("#{n}")),
            Value::Int(n) => serde_json::Value::from(*n),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Str(s) => serde_json::Value::String(s.to_string()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Uninterpreted(n) => write!(f, "#{n}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// A relation-qualified column name. Queries have no self joins, so the
/// relation name alone disambiguates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub relation: Name,
    pub column: Name,
}

impl ColumnRef {
    pub fn new(relation: &str, column: &str) -> ColumnRef {
        ColumnRef {
            relation: Arc::from(relation),
            column: Arc::from(column),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.relation, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDecl {
    pub name: Name,
    pub columns: Vec<(Name, Sort)>,
}

impl RelationDecl {
    pub fn new(name: &str, columns: &[(&str, Sort)]) -> Result<RelationDecl, ModelError> {
        let name: Name = Arc::from(name);
        if columns.is_empty() {
            return Err(ModelError::NoColumns(name));
        }
        let mut seen = BTreeSet::new();
        for (column, _) in columns {
            if !seen.insert(*column) {
                return Err(ModelError::DuplicateColumn {
                    relation: name,
                    column: Arc::from(*column),
                });
            }
        }
        Ok(RelationDecl {
            columns: columns.iter().map(|(c, s)| (Arc::from(*c), *s)).collect(),
            name,
        })
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn column_sort(&self, column: &str) -> Option<Sort> {
        self.columns
            .iter()
            .find(|(c, _)| &**c == column)
            .map(|(_, s)| *s)
    }

    pub fn column_refs(&self) -> impl Iterator<Item = ColumnRef> + '_ {
        self.columns.iter().map(|(c, _)| ColumnRef {
            relation: self.name.clone(),
            column: c.clone(),
        })
    }
}

/// Ordered list of relations `R_1..R_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    relations: Vec<RelationDecl>,
}

impl Schema {
    pub fn new(relations: Vec<RelationDecl>) -> Result<Schema, ModelError> {
        if relations.is_empty() {
            return Err(ModelError::EmptySchema);
        }
        let mut seen = BTreeSet::new();
        for r in &relations {
            if !seen.insert(r.name.clone()) {
                return Err(ModelError::DuplicateRelation(r.name.clone()));
            }
        }
        Ok(Schema { relations })
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn relation(&self, index: usize) -> &RelationDecl {
        &self.relations[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| &*r.name == name)
    }

    pub fn column_sort(&self, column: &ColumnRef) -> Option<Sort> {
        let i = self.index_of(&column.relation)?;
        self.relations[i].column_sort(&column.column)
    }

    /// Every column of every relation, in declaration order.
    pub fn all_columns(&self) -> impl Iterator<Item = ColumnRef> + '_ {
        self.relations.iter().flat_map(|r| r.column_refs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Lt,
    Le,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term<C> {
    Col(C),
    Const(Value),
}

impl<C: fmt::Display> fmt::Display for Term<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Col(c) => c.fmt(f),
            Term::Const(v) => v.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom<C> {
    pub op: CmpOp,
    pub lhs: Term<C>,
    pub rhs: Term<C>,
}

impl<C: fmt::Display> fmt::Display for Atom<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// Quantifier-free boolean expression over comparison atoms.
///
/// The column type `C` is [`ColumnRef`] for selection predicates and
/// [`crate::formula::Var`] for the solver-facing formulas. The plain variants
/// build a tree verbatim; the lower-case constructors fold constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr<C> {
    True,
    False,
    And(Vec<Expr<C>>),
    Or(Vec<Expr<C>>),
    Not(Box<Expr<C>>),
    Atom(Atom<C>),
}

/// Selection predicate θ over relation-qualified columns.
pub type Predicate = Expr<ColumnRef>;

impl<C: Clone + Eq> Expr<C> {
    pub fn and(items: impl IntoIterator<Item = Expr<C>>) -> Expr<C> {
        let mut out = Vec::new();
        for item in items {
            match item {
                Expr::True => {}
                Expr::False => return Expr::False,
                Expr::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::True,
            1 => out.pop().unwrap(),
            _ => Expr::And(out),
        }
    }

    pub fn or(items: impl IntoIterator<Item = Expr<C>>) -> Expr<C> {
        let mut out = Vec::new();
        for item in items {
            match item {
                Expr::False => {}
                Expr::True => return Expr::True,
                Expr::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::False,
            1 => out.pop().unwrap(),
            _ => Expr::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr<C>) -> Expr<C> {
        match e {
            Expr::True => Expr::False,
            Expr::False => Expr::True,
            Expr::Not(inner) => *inner,
            other => Expr::Not(Box::new(other)),
        }
    }

    /// Comparison atom with folding of syntactically identical operands and
    /// of constant-only comparisons.
    pub fn cmp(op: CmpOp, lhs: Term<C>, rhs: Term<C>) -> Expr<C> {
        if lhs == rhs {
            return if op == CmpOp::Lt { Expr::False } else { Expr::True };
        }
        if let (Term::Const(a), Term::Const(b)) = (&lhs, &rhs) {
            if let Some(v) = compare_values(op, a, b) {
                return if v { Expr::True } else { Expr::False };
            }
        }
        Expr::Atom(Atom { op, lhs, rhs })
    }

    pub fn eq(lhs: Term<C>, rhs: Term<C>) -> Expr<C> {
        Expr::cmp(CmpOp::Eq, lhs, rhs)
    }

    /// Rebuilds the expression over a different column type, folding as it goes.
    pub fn map_columns<D: Clone + Eq>(&self, f: &mut impl FnMut(&C) -> D) -> Expr<D> {
        match self {
            Expr::True => Expr::True,
            Expr::False => Expr::False,
            Expr::And(xs) => Expr::and(xs.iter().map(|x| x.map_columns(f)).collect::<Vec<_>>()),
            Expr::Or(xs) => Expr::or(xs.iter().map(|x| x.map_columns(f)).collect::<Vec<_>>()),
            Expr::Not(x) => Expr::not(x.map_columns(f)),
            Expr::Atom(a) => {
                let mut term = |t: &Term<C>| match t {
                    Term::Col(c) => Term::Col(f(c)),
                    Term::Const(v) => Term::Const(v.clone()),
                };
                let lhs = term(&a.lhs);
                let rhs = term(&a.rhs);
                Expr::cmp(a.op, lhs, rhs)
            }
        }
    }

    /// Folds constants bottom-up without changing the connective structure otherwise.
    pub fn fold(&self) -> Expr<C> {
        self.map_columns(&mut |c| c.clone())
    }

    /// Negation normal form: negations only directly above atoms, constants folded.
    pub fn nnf(&self) -> Expr<C> {
        self.nnf_polarity(true)
    }

    fn nnf_polarity(&self, positive: bool) -> Expr<C> {
        match (self, positive) {
            (Expr::True, true) | (Expr::False, false) => Expr::True,
            (Expr::True, false) | (Expr::False, true) => Expr::False,
            (Expr::And(xs), true) => Expr::and(xs.iter().map(|x| x.nnf_polarity(true)).collect::<Vec<_>>()),
            (Expr::And(xs), false) => Expr::or(xs.iter().map(|x| x.nnf_polarity(false)).collect::<Vec<_>>()),
            (Expr::Or(xs), true) => Expr::or(xs.iter().map(|x| x.nnf_polarity(true)).collect::<Vec<_>>()),
            (Expr::Or(xs), false) => Expr::and(xs.iter().map(|x| x.nnf_polarity(false)).collect::<Vec<_>>()),
            (Expr::Not(x), p) => x.nnf_polarity(!p),
            (Expr::Atom(a), true) => Expr::cmp(a.op, a.lhs.clone(), a.rhs.clone()),
            (Expr::Atom(a), false) => Expr::not(Expr::cmp(a.op, a.lhs.clone(), a.rhs.clone())),
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Expr::True | Expr::False | Expr::Atom(_) => true,
            Expr::Not(x) => matches!(**x, Expr::Atom(_)),
            Expr::And(xs) | Expr::Or(xs) => xs.iter().all(Expr::is_nnf),
        }
    }
}

impl<C> Expr<C> {
    pub fn atoms(&self) -> Vec<&Atom<C>> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom<C>)) {
        match self {
            Expr::True | Expr::False => {}
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.visit_atoms(f)),
            Expr::Not(x) => x.visit_atoms(f),
            Expr::Atom(a) => f(a),
        }
    }

    /// Every column occurrence, in left-to-right order (with repeats).
    pub fn columns(&self) -> Vec<&C> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| {
            for t in [&a.lhs, &a.rhs] {
                if let Term::Col(c) = t {
                    out.push(c);
                }
            }
        });
        out
    }

    pub fn constants(&self) -> Vec<&Value> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| {
            for t in [&a.lhs, &a.rhs] {
                if let Term::Const(v) = t {
                    out.push(v);
                }
            }
        });
        out
    }

    /// Evaluates under a total binding.
    pub fn eval<'v>(
        &self,
        lookup: &impl Fn(&C) -> Option<&'v Value>,
    ) -> Result<bool, ModelError>
    where
        C: fmt::Display,
    {
        Ok(match self {
            Expr::True => true,
            Expr::False => false,
            Expr::And(xs) => {
                for x in xs {
                    if !x.eval(lookup)? {
                        return Ok(false);
                    }
                }
                true
            }
            Expr::Or(xs) => {
                for x in xs {
                    if x.eval(lookup)? {
                        return Ok(true);
                    }
                }
                false
            }
            Expr::Not(x) => !x.eval(lookup)?,
            Expr::Atom(a) => {
                let value = |t: &'_ Term<C>| -> Result<Value, ModelError> {
                    match t {
                        Term::Col(c) => lookup(c)
                            .cloned()
                            .ok_or_else(|| ModelError::UnboundColumn(c.to_string())),
                        Term::Const(v) => Ok(v.clone()),
                    }
                };
                let l = value(&a.lhs)?;
                let r = value(&a.rhs)?;
                compare_values(a.op, &l, &r).ok_or_else(|| {
                    ModelError::SortMismatch(format!(
                        "cannot evaluate `{} {} {}` ({} vs {})",
                        l,
                        a.op.symbol(),
                        r,
                        l.sort(),
                        r.sort()
                    ))
                })?
            }
        })
    }

    /// Kleene three-valued evaluation given a partial valuation of atoms.
    pub fn eval_partial(&self, atom_value: &impl Fn(&Atom<C>) -> Option<bool>) -> Option<bool> {
        match self {
            Expr::True => Some(true),
            Expr::False => Some(false),
            Expr::And(xs) => {
                let mut all = true;
                for x in xs {
                    match x.eval_partial(atom_value) {
                        Some(false) => return Some(false),
                        None => all = false,
                        Some(true) => {}
                    }
                }
                all.then_some(true)
            }
            Expr::Or(xs) => {
                let mut none = true;
                for x in xs {
                    match x.eval_partial(atom_value) {
                        Some(true) => return Some(true),
                        None => none = false,
                        Some(false) => {}
                    }
                }
                none.then_some(false)
            }
            Expr::Not(x) => x.eval_partial(atom_value).map(|b| !b),
            Expr::Atom(a) => atom_value(a),
        }
    }
}

/// `None` when the operands' sorts do not fit the operator.
pub fn compare_values(op: CmpOp, a: &Value, b: &Value) -> Option<bool> {
    if a.sort() != b.sort() {
        return None;
    }
    match op {
        CmpOp::Eq => Some(a == b),
        CmpOp::Lt | CmpOp::Le => match (a, b) {
            (Value::Int(x), Value::Int(y)) => Some(if op == CmpOp::Lt { x < y } else { x <= y }),
            _ => None,
        },
    }
}

fn needs_parens<C>(e: &Expr<C>) -> bool {
    matches!(e, Expr::And(_) | Expr::Or(_))
}

impl<C: fmt::Display> fmt::Display for Expr<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr<C>| {
            if needs_parens(e) {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::True => f.write_str("true"),
            Expr::False => f.write_str("false"),
            Expr::And(xs) | Expr::Or(xs) if xs.is_empty() => {
                f.write_str(if matches!(self, Expr::And(_)) { "true" } else { "false" })
            }
            Expr::And(xs) | Expr::Or(xs) => {
                let sep = if matches!(self, Expr::And(_)) { " and " } else { " or " };
                for (n, x) in xs.iter().enumerate() {
                    if n > 0 {
                        f.write_str(sep)?;
                    }
                    child(f, x)?;
                }
                Ok(())
            }
            Expr::Not(x) => {
                f.write_str("not ")?;
                child(f, x)
            }
            Expr::Atom(a) => a.fmt(f),
        }
    }
}

/// Evaluates a selection predicate against a column binding.
pub fn eval_predicate(p: &Predicate, binding: &BTreeMap<ColumnRef, Value>) -> Result<bool, ModelError> {
    p.eval(&|c| binding.get(c))
}

/// Checks that every atom of `p` resolves against `schema` and is well-sorted.
/// When `only` is set, every column must belong to that relation.
pub(crate) fn check_predicate(
    schema: &Schema,
    p: &Predicate,
    only: Option<(usize, &Name)>,
) -> Result<(), ModelError> {
    let mut result = Ok(());
    p.visit_atoms(&mut |a| {
        if result.is_err() {
            return;
        }
        result = check_atom(schema, a, only);
    });
    result
}

fn check_atom(schema: &Schema, a: &Atom<ColumnRef>, only: Option<(usize, &Name)>) -> Result<(), ModelError> {
    let sort_of = |t: &Term<ColumnRef>| -> Result<Sort, ModelError> {
        match t {
            Term::Const(v) => Ok(v.sort()),
            Term::Col(c) => {
                let i = schema
                    .index_of(&c.relation)
                    .ok_or_else(|| ModelError::UnknownRelation(c.relation.clone()))?;
                if let Some((source, view)) = only {
                    if i != source {
                        return Err(ModelError::ForeignColumn {
                            view: view.clone(),
                            column: c.clone(),
                        });
                    }
                }
                schema
                    .relation(i)
                    .column_sort(&c.column)
                    .ok_or_else(|| ModelError::UnknownColumn(c.to_string()))
            }
        }
    };
    let l = sort_of(&a.lhs)?;
    let r = sort_of(&a.rhs)?;
    if l != r {
        return Err(ModelError::SortMismatch(format!(
            "`{a}` compares {l} with {r}"
        )));
    }
    if a.op != CmpOp::Eq && l != Sort::Int {
        return Err(ModelError::SortMismatch(format!(
            "`{a}` orders values of sort {l}; `<` and `<=` need int"
        )));
    }
    Ok(())
}

/// A project-select view `π_U σ_θ R_i` over a single relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDef {
    pub name: Name,
    /// Zero-based index of the source relation.
    pub source: usize,
    pub projection: Vec<ColumnRef>,
    pub predicate: Predicate,
}

impl ViewDef {
    pub fn new(
        schema: &Schema,
        name: &str,
        source: &str,
        projection: Vec<ColumnRef>,
        predicate: Predicate,
    ) -> Result<ViewDef, ModelError> {
        let name: Name = Arc::from(name);
        let source = schema
            .index_of(source)
            .ok_or_else(|| ModelError::UnknownRelation(Arc::from(source)))?;
        if projection.is_empty() {
            return Err(ModelError::EmptyProjection(format!("view `{name}`")));
        }
        let rel = schema.relation(source);
        for c in &projection {
            if c.relation != rel.name {
                return Err(ModelError::ForeignColumn { view: name, column: c.clone() });
            }
            if rel.column_sort(&c.column).is_none() {
                return Err(ModelError::UnknownColumn(c.to_string()));
            }
        }
        check_predicate(schema, &predicate, Some((source, &name)))?;
        Ok(ViewDef {
            name,
            source,
            projection: dedup(projection),
            predicate,
        })
    }
}

/// A project-select-join query `π_U σ_θ (R_1 × … × R_m)` over every relation
/// of the schema, each exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryDef {
    pub projection: Vec<ColumnRef>,
    pub predicate: Predicate,
}

impl QueryDef {
    pub fn new(schema: &Schema, projection: Vec<ColumnRef>, predicate: Predicate) -> Result<QueryDef, ModelError> {
        if projection.is_empty() {
            return Err(ModelError::EmptyProjection("the query".into()));
        }
        for c in &projection {
            if schema.column_sort(c).is_none() {
                return match schema.index_of(&c.relation) {
                    None => Err(ModelError::UnknownRelation(c.relation.clone())),
                    Some(_) => Err(ModelError::UnknownColumn(c.to_string())),
                };
            }
        }
        check_predicate(schema, &predicate, None)?;
        Ok(QueryDef {
            projection: dedup(projection),
            predicate,
        })
    }
}

pub(crate) fn dedup(cols: Vec<ColumnRef>) -> Vec<ColumnRef> {
    let mut seen = BTreeSet::new();
    cols.into_iter().filter(|c| seen.insert(c.clone())).collect()
}

/// A schema together with its views and the query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub schema: Schema,
    pub views: Vec<ViewDef>,
    pub query: QueryDef,
}

impl Problem {
    pub fn new(schema: Schema, views: Vec<ViewDef>, query: QueryDef) -> Result<Problem, ModelError> {
        let mut names = BTreeSet::new();
        for v in &views {
            if !names.insert(v.name.clone()) {
                return Err(ModelError::DuplicateView(v.name.clone()));
            }
        }
        Ok(Problem { schema, views, query })
    }
}

/// Mapping from relation-qualified column to value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple(pub BTreeMap<ColumnRef, Value>);

impl Tuple {
    pub fn new() -> Tuple {
        Tuple::default()
    }

    pub fn from_values(relation: &RelationDecl, values: impl IntoIterator<Item = Value>) -> Tuple {
        Tuple(relation.column_refs().zip(values).collect())
    }

    pub fn get(&self, c: &ColumnRef) -> Option<&Value> {
        self.0.get(c)
    }

    pub fn insert(&mut self, c: ColumnRef, v: Value) {
        self.0.insert(c, v);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `t[U]`: the restriction of this tuple to the columns in `cols`.
    pub fn sub_tuple<'a>(&self, cols: impl IntoIterator<Item = &'a ColumnRef>) -> Result<Tuple, ModelError> {
        let mut out = BTreeMap::new();
        for c in cols {
            let v = self
                .0
                .get(c)
                .ok_or_else(|| ModelError::UnknownColumn(c.to_string()))?;
            out.insert(c.clone(), v.clone());
        }
        Ok(Tuple(out))
    }

    /// Union of the bindings of two tuples over disjoint columns.
    pub fn join(&self, other: &Tuple) -> Tuple {
        let mut out = self.0.clone();
        out.extend(other.0.iter().map(|(k, v)| (k.clone(), v.clone())));
        Tuple(out)
    }

    pub fn conforms_to(&self, relation: &RelationDecl) -> Result<(), ModelError> {
        if self.0.len() != relation.arity() {
            return Err(ModelError::SortMismatch(format!(
                "tuple {self} has {} columns but relation `{}` has {}",
                self.0.len(),
                relation.name,
                relation.arity()
            )));
        }
        for (c, sort) in &relation.columns {
            let key = ColumnRef {
                relation: relation.name.clone(),
                column: c.clone(),
            };
            match self.0.get(&key) {
                None => return Err(ModelError::UnknownColumn(key.to_string())),
                Some(v) if v.sort() != *sort => {
                    return Err(ModelError::SortMismatch(format!(
                        "column {key} holds {v} but is declared {sort}"
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Renders `(A: v, B: w)` without relation qualifiers.
    pub fn display_unqualified(&self) -> String {
        let cells: Vec<String> = self.0.iter().map(|(c, v)| format!("{}: {v}", c.column)).collect();
        format!("({})", cells.join(", "))
    }

    pub fn to_json(&self, qualified: bool) -> serde_json::Value {
        let map = self
            .0
            .iter()
            .map(|(c, v)| {
                let key = if qualified { c.to_string() } else { c.column.to_string() };
                (key, v.to_json())
            })
            .collect();
        serde_json::Value::Object(map)
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.0.iter().map(|(c, v)| format!("{c}: {v}")).collect();
        write!(f, "({})", cells.join(", "))
    }
}

/// `𝐭 = ⟨t_1, …, t_n⟩`, one tuple per relation position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TupleSeq(pub Vec<Tuple>);

impl TupleSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `𝐭 EXCEPT i ↦ s` with a zero-based `index`. `s` must conform to the
    /// relation at that position.
    pub fn except(&self, index: usize, s: Tuple, schema: &Schema) -> Result<TupleSeq, ModelError> {
        if index >= self.0.len() || index >= schema.len() {
            return Err(ModelError::IndexOutOfRange {
                index,
                len: self.0.len(),
            });
        }
        s.conforms_to(schema.relation(index))?;
        let mut out = self.0.clone();
        out[index] = s;
        Ok(TupleSeq(out))
    }

    /// `𝐭_{from..to}` over zero-based, inclusive-exclusive bounds.
    pub fn slice(&self, from: usize, to: usize) -> Result<TupleSeq, ModelError> {
        if from > to || to > self.0.len() {
            return Err(ModelError::IndexOutOfRange {
                index: to,
                len: self.0.len(),
            });
        }
        Ok(TupleSeq(self.0[from..to].to_vec()))
    }

    pub fn concat(&self, other: &TupleSeq) -> TupleSeq {
        TupleSeq(self.0.iter().chain(&other.0).cloned().collect())
    }

    /// All bindings of the sequence merged into one row.
    pub fn joined(&self) -> Tuple {
        Tuple(self.0.iter().flat_map(|t| t.0.iter().map(|(k, v)| (k.clone(), v.clone()))).collect())
    }
}

/// Mapping from relation name to a finite set of tuples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance(pub BTreeMap<Name, BTreeSet<Tuple>>);

impl Instance {
    /// One empty relation per schema entry.
    pub fn empty(schema: &Schema) -> Instance {
        Instance(schema.relations().iter().map(|r| (r.name.clone(), BTreeSet::new())).collect())
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Tuple>> {
        self.0.get(name)
    }

    /// Tuples of `name`; an absent relation reads as empty.
    pub fn tuples(&self, name: &str) -> impl Iterator<Item = &Tuple> {
        self.0.get(name).into_iter().flatten()
    }

    pub fn insert(&mut self, schema: &Schema, relation: usize, t: Tuple) -> Result<bool, ModelError> {
        let decl = schema.relation(relation);
        t.conforms_to(decl)?;
        Ok(self.0.entry(decl.name.clone()).or_default().insert(t))
    }

    pub fn validate(&self, schema: &Schema) -> Result<(), ModelError> {
        for (name, tuples) in &self.0 {
            let i = schema
                .index_of(name)
                .ok_or_else(|| ModelError::UnknownRelation(name.clone()))?;
            for t in tuples {
                t.conforms_to(schema.relation(i))?;
            }
        }
        Ok(())
    }

    pub fn total_tuples(&self) -> usize {
        self.0.values().map(BTreeSet::len).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.0
                .iter()
                .map(|(name, tuples)| {
                    let rows = tuples.iter().map(|t| t.to_json(false)).collect();
                    (name.to_string(), serde_json::Value::Array(rows))
                })
                .collect(),
        )
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (name, tuples)) in self.0.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            let rows: Vec<String> = tuples.iter().map(Tuple::display_unqualified).collect();
            write!(f, "{name} = {{{}}}", rows.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(r: &str, c: &str) -> ColumnRef {
        ColumnRef::new(r, c)
    }

    fn ab() -> Schema {
        Schema::new(vec![RelationDecl::new(
            "R",
            &[("A", Sort::Uninterpreted), ("B", Sort::Uninterpreted)],
        )
        .unwrap()])
        .unwrap()
    }

    fn tuple(pairs: &[(&str, i64)]) -> Tuple {
        Tuple(pairs.iter().map(|(c, v)| (col("R", c), Value::Int(*v))).collect())
    }

    #[test]
    fn sub_tuple_projects() {
        let t = tuple(&[("A", 1), ("B", 2)]);
        assert_eq!(t.sub_tuple(&[col("R", "A")]).unwrap(), tuple(&[("A", 1)]));
        assert_eq!(t.sub_tuple(&[col("R", "A"), col("R", "B")]).unwrap(), t);
        assert!(t.sub_tuple(&[]).unwrap().is_empty());
        assert!(matches!(
            t.sub_tuple(&[col("R", "C")]),
            Err(ModelError::UnknownColumn(_))
        ));
    }

    #[test]
    fn except_replaces_one_position() {
        let schema = Schema::new(vec![
            RelationDecl::new("R1", &[("A", Sort::Int)]).unwrap(),
            RelationDecl::new("R2", &[("C", Sort::Int)]).unwrap(),
        ])
        .unwrap();
        let t1 = Tuple::from_values(schema.relation(0), [Value::Int(1)]);
        let t2 = Tuple::from_values(schema.relation(1), [Value::Int(2)]);
        let s = Tuple::from_values(schema.relation(1), [Value::Int(9)]);
        let seq = TupleSeq(vec![t1.clone(), t2.clone()]);

        assert_eq!(seq.except(0, t1.clone(), &schema).unwrap(), seq);
        assert_eq!(seq.except(1, s.clone(), &schema).unwrap(), TupleSeq(vec![t1.clone(), s.clone()]));
        assert_eq!(seq.0[1], t2, "input untouched");

        let short = TupleSeq(vec![t1.clone()]);
        assert!(matches!(
            short.except(1, s.clone(), &schema),
            Err(ModelError::IndexOutOfRange { index: 1, len: 1 })
        ));
        // s belongs to R2, not R1
        assert!(matches!(seq.except(0, s, &schema), Err(ModelError::UnknownColumn(_) | ModelError::SortMismatch(_))));

        let bad = Tuple::from_values(schema.relation(0), [Value::Bool(true)]);
        assert!(matches!(seq.except(0, bad, &schema), Err(ModelError::SortMismatch(_))));
    }

    #[test]
    fn slice_and_concat() {
        let seq = TupleSeq(vec![tuple(&[("A", 1)]), tuple(&[("A", 2)]), tuple(&[("A", 3)])]);
        let head = seq.slice(0, 1).unwrap();
        let tail = seq.slice(1, 3).unwrap();
        assert_eq!(head.concat(&tail), seq);
        assert!(seq.slice(2, 4).is_err());
    }

    #[test]
    fn predicate_evaluation() {
        let a = || Term::Col(col("R", "A"));
        let b = || Term::Col(col("R", "B"));
        let c = || Term::Col(col("R", "C"));
        let binding = |pairs: &[(&str, i64)]| -> BTreeMap<ColumnRef, Value> {
            pairs.iter().map(|(k, v)| (col("R", k), Value::Int(*v))).collect()
        };

        let p = Expr::Atom(Atom { op: CmpOp::Eq, lhs: a(), rhs: b() });
        assert!(eval_predicate(&p, &binding(&[("A", 1), ("B", 1)])).unwrap());

        let p = Expr::And(vec![
            Expr::Atom(Atom { op: CmpOp::Eq, lhs: a(), rhs: b() }),
            Expr::Not(Box::new(Expr::Atom(Atom { op: CmpOp::Eq, lhs: a(), rhs: c() }))),
        ]);
        assert!(!eval_predicate(&p, &binding(&[("A", 1), ("B", 1), ("C", 1)])).unwrap());

        let p = Expr::Atom(Atom { op: CmpOp::Le, lhs: a(), rhs: Term::Const(Value::Int(5)) });
        assert!(!eval_predicate(&p, &binding(&[("A", 7)])).unwrap());

        assert!(matches!(
            eval_predicate(&p, &binding(&[("B", 7)])),
            Err(ModelError::UnboundColumn(_))
        ));
        let mixed: BTreeMap<_, _> = [(col("R", "A"), Value::Bool(true))].into_iter().collect();
        assert!(matches!(eval_predicate(&p, &mixed), Err(ModelError::SortMismatch(_))));
    }

    #[test]
    fn smart_constructors_fold() {
        let a: Term<ColumnRef> = Term::Col(col("R", "A"));
        assert_eq!(Expr::eq(a.clone(), a.clone()), Expr::True);
        assert_eq!(Expr::cmp(CmpOp::Lt, a.clone(), a.clone()), Expr::False);
        assert_eq!(
            Expr::<ColumnRef>::eq(Term::Const(Value::Uninterpreted(0)), Term::Const(Value::Uninterpreted(1))),
            Expr::False
        );
        assert_eq!(Expr::and([Expr::True, Expr::<ColumnRef>::False]), Expr::False);
        assert_eq!(Expr::<ColumnRef>::or([]), Expr::False);
        assert_eq!(Expr::not(Expr::not(Expr::eq(a.clone(), Term::Const(Value::Uninterpreted(0))))),
            Expr::eq(a, Term::Const(Value::Uninterpreted(0))));
    }

    #[test]
    fn schema_invariants() {
        assert_eq!(Schema::new(vec![]), Err(ModelError::EmptySchema));
        let r = RelationDecl::new("R", &[("A", Sort::Int)]).unwrap();
        assert!(matches!(Schema::new(vec![r.clone(), r]), Err(ModelError::DuplicateRelation(_))));
        assert!(matches!(RelationDecl::new("R", &[]), Err(ModelError::NoColumns(_))));
        assert!(matches!(
            RelationDecl::new("R", &[("A", Sort::Int), ("A", Sort::Bool)]),
            Err(ModelError::DuplicateColumn { .. })
        ));
    }

    #[test]
    fn view_and_query_validation() {
        let schema = ab();
        let a = col("R", "A");
        assert!(matches!(
            ViewDef::new(&schema, "V", "R", vec![], Expr::True),
            Err(ModelError::EmptyProjection(_))
        ));
        assert!(matches!(
            ViewDef::new(&schema, "V", "S", vec![a.clone()], Expr::True),
            Err(ModelError::UnknownRelation(_))
        ));
        let lt = Expr::Atom(Atom { op: CmpOp::Lt, lhs: Term::Col(a.clone()), rhs: Term::Col(col("R", "B")) });
        assert!(matches!(
            ViewDef::new(&schema, "V", "R", vec![a.clone()], lt),
            Err(ModelError::SortMismatch(_))
        ));
        let v = ViewDef::new(&schema, "V", "R", vec![a.clone(), a.clone()], Expr::True).unwrap();
        assert_eq!(v.projection, vec![a.clone()]);
        assert!(matches!(
            QueryDef::new(&schema, vec![col("R", "Z")], Expr::True),
            Err(ModelError::UnknownColumn(_))
        ));
    }

    #[test]
    fn instance_rejects_nonconforming_tuples() {
        let schema = ab();
        let mut inst = Instance::empty(&schema);
        let ok = Tuple::from_values(schema.relation(0), [Value::Uninterpreted(0), Value::Uninterpreted(1)]);
        assert!(inst.insert(&schema, 0, ok.clone()).unwrap());
        assert!(!inst.insert(&schema, 0, ok).unwrap(), "set semantics");
        let bad = Tuple::from_values(schema.relation(0), [Value::Int(0), Value::Uninterpreted(1)]);
        assert!(inst.insert(&schema, 0, bad).is_err());
        assert_eq!(inst.total_tuples(), 1);
    }

    #[test]
    fn display_round_trips_strings() {
        assert_eq!(Value::string("a\"b").to_string(), "\"a\\\"b\"");
        assert_eq!(Value::Uninterpreted(3).to_string(), "#3");
    }
}
