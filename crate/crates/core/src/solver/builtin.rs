//! Equality logic by propositional case splitting plus a union-find
//! consistency check.
//!
//! Atoms are assigned one at a time; after each step the formula is
//! evaluated three-valued and the asserted (dis)equalities are checked for
//! consistency, pruning either failure. Once the formula is true under the
//! partial assignment, the equivalence classes give a model directly.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use super::{verified, SatResult, SolverError};
use crate::formula::{Formula, Model, Var};
use crate::relational::{Atom, CmpOp, Sort, Term, Value};

/// Formulas with more distinct atoms go to the external backend.
pub const MAX_BUILTIN_ATOMS: usize = 30;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // lower index wins so class representatives are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Terms of the formula, numbered. Every variable of the formula is a node
/// even when it occurs in no atom.
struct Nodes {
    terms: Vec<Term<Var>>,
    index: HashMap<Term<Var>, usize>,
}

impl Nodes {
    fn intern(&mut self, t: &Term<Var>) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        self.terms.push(t.clone());
        self.index.insert(t.clone(), self.terms.len() - 1);
        self.terms.len() - 1
    }

    fn sort(&self, n: usize) -> Sort {
        match &self.terms[n] {
            Term::Col(v) => v.sort,
            Term::Const(c) => c.sort(),
        }
    }

    fn constant(&self, n: usize) -> Option<&Value> {
        match &self.terms[n] {
            Term::Const(c) => Some(c),
            Term::Col(_) => None,
        }
    }
}

struct Search<'a> {
    formula: &'a Formula,
    atoms: Vec<(usize, usize)>,
    atom_index: HashMap<&'a Atom<Var>, usize>,
    nodes: Nodes,
    assignment: Vec<Option<bool>>,
}

/// Equivalence classes and BOOL colouring of a consistent assignment.
struct Classes {
    uf: UnionFind,
    bool_color: HashMap<usize, bool>,
}

impl<'a> Search<'a> {
    fn consistent(&self) -> Option<Classes> {
        let n = self.nodes.terms.len();
        let mut uf = UnionFind::new(n);
        for (k, &(a, b)) in self.atoms.iter().enumerate() {
            if self.assignment[k] == Some(true) {
                uf.union(a, b);
            }
        }
        // distinct constants are distinct values
        let mut class_const: HashMap<usize, &Value> = HashMap::new();
        for node in 0..n {
            if let Some(c) = self.nodes.constant(node) {
                let root = uf.find(node);
                if let Some(prev) = class_const.insert(root, c) {
                    if prev != c {
                        return None;
                    }
                }
            }
        }
        let mut diseq: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, &(a, b)) in self.atoms.iter().enumerate() {
            if self.assignment[k] == Some(false) {
                let (ra, rb) = (uf.find(a), uf.find(b));
                if ra == rb {
                    return None;
                }
                if self.nodes.sort(a) == Sort::Bool {
                    diseq.entry(ra).or_default().push(rb);
                    diseq.entry(rb).or_default().push(ra);
                }
            }
        }
        // BOOL has two values: disequal BOOL classes must be 2-colourable,
        // with the classes of `true` and `false` pre-coloured.
        let mut bool_color: HashMap<usize, bool> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut roots: Vec<usize> = Vec::new();
        for node in 0..n {
            if self.nodes.sort(node) != Sort::Bool {
                continue;
            }
            let root = uf.find(node);
            if let Some(Value::Bool(b)) = class_const.get(&root) {
                if bool_color.insert(root, *b).is_none() {
                    queue.push_back(root);
                }
            }
            roots.push(root);
        }
        let bfs = |queue: &mut VecDeque<usize>, color: &mut HashMap<usize, bool>| -> bool {
            while let Some(r) = queue.pop_front() {
                let c = color[&r];
                for &s in diseq.get(&r).into_iter().flatten() {
                    match color.get(&s) {
                        Some(&cs) if cs == c => return false,
                        Some(_) => {}
                        None => {
                            color.insert(s, !c);
                            queue.push_back(s);
                        }
                    }
                }
            }
            true
        };
        if !bfs(&mut queue, &mut bool_color) {
            return None;
        }
        for root in roots {
            if let std::collections::hash_map::Entry::Vacant(e) = bool_color.entry(root) {
                e.insert(false);
                queue.push_back(root);
                if !bfs(&mut queue, &mut bool_color) {
                    return None;
                }
            }
        }
        Some(Classes { uf, bool_color })
    }

    fn run(&mut self, k: usize) -> Option<Classes> {
        let value = {
            let assignment = &self.assignment;
            let index = &self.atom_index;
            self.formula
                .body
                .eval_partial(&|a: &Atom<Var>| index.get(a).and_then(|&i| assignment[i]))
        };
        if value == Some(false) {
            return None;
        }
        let classes = self.consistent()?;
        if value == Some(true) {
            return Some(classes);
        }
        debug_assert!(k < self.atoms.len(), "total assignment must decide the formula");
        for choice in [true, false] {
            self.assignment[k] = Some(choice);
            if let Some(found) = self.run(k + 1) {
                return Some(found);
            }
        }
        self.assignment[k] = None;
        None
    }

    fn model(&self, mut classes: Classes) -> Model {
        let literals: Vec<&Value> = self.nodes.terms.iter().filter_map(|t| match t {
            Term::Const(c) => Some(c),
            Term::Col(_) => None,
        }).collect();
        let mut fresh = FreshValues::new(literals.iter().copied());
        let mut class_value: BTreeMap<usize, Value> = BTreeMap::new();
        for node in 0..self.nodes.terms.len() {
            if let Some(c) = self.nodes.constant(node) {
                let root = classes.uf.find(node);
                class_value.insert(root, c.clone());
            }
        }
        let mut model = Model::new();
        for var in self.formula.vars() {
            let node = self.nodes.index[&Term::Col(var.clone())];
            let root = classes.uf.find(node);
            let value = match class_value.get(&root) {
                Some(v) => v.clone(),
                None => {
                    let v = match var.sort {
                        Sort::Bool => Value::Bool(classes.bool_color.get(&root).copied().unwrap_or(false)),
                        sort => fresh.next(sort),
                    };
                    class_value.insert(root, v.clone());
                    v
                }
            };
            model.insert(var.clone(), value);
        }
        model
    }
}

/// Hands out values of each infinite sort that avoid a set of literals.
pub(crate) struct FreshValues {
    used: BTreeSet<Value>,
    next_uninterpreted: u32,
    next_int: i64,
    next_string: usize,
}

impl FreshValues {
    pub(crate) fn new<'v>(literals: impl IntoIterator<Item = &'v Value>) -> FreshValues {
        FreshValues {
            used: literals.into_iter().cloned().collect(),
            next_uninterpreted: 0,
            next_int: 0,
            next_string: 0,
        }
    }

    pub(crate) fn next(&mut self, sort: Sort) -> Value {
        loop {
            let v = match sort {
                Sort::Uninterpreted => {
                    self.next_uninterpreted += 1;
                    Value::Uninterpreted(self.next_uninterpreted - 1)
                }
                Sort::Int => {
                    self.next_int += 1;
                    Value::Int(self.next_int - 1)
                }
                Sort::String => {
                    self.next_string += 1;
                    Value::Str(Arc::from(format!("v{}", self.next_string - 1)))
                }
                Sort::Bool => unreachable!("BOOL values come from the colouring"),
            };
            if self.used.insert(v.clone()) {
                return v;
            }
        }
    }
}

/// Decides a formula whose atoms are all equalities.
pub fn solve_builtin(f: &Formula) -> Result<SatResult, SolverError> {
    let mut atoms_in_order: Vec<&Atom<Var>> = Vec::new();
    let mut atom_index = HashMap::new();
    for a in f.body.atoms() {
        if a.op != CmpOp::Eq {
            return Err(SolverError::UnsupportedTheory(format!(
                "`{a}` uses integer order; only equality atoms are supported"
            )));
        }
        if !atom_index.contains_key(a) {
            atom_index.insert(a, atoms_in_order.len());
            atoms_in_order.push(a);
        }
    }
    if atoms_in_order.len() > MAX_BUILTIN_ATOMS {
        return Err(SolverError::TooLarge {
            atoms: atoms_in_order.len(),
            limit: MAX_BUILTIN_ATOMS,
        });
    }
    let mut nodes = Nodes {
        terms: Vec::new(),
        index: HashMap::new(),
    };
    for v in f.vars() {
        nodes.intern(&Term::Col(v.clone()));
    }
    let atoms = atoms_in_order
        .iter()
        .map(|a| (nodes.intern(&a.lhs), nodes.intern(&a.rhs)))
        .collect::<Vec<_>>();
    let mut search = Search {
        formula: f,
        assignment: vec![None; atoms.len()],
        atoms,
        atom_index,
        nodes,
    };
    match search.run(0) {
        None => Ok(SatResult::unsat()),
        Some(classes) => {
            let model = search.model(classes);
            verified(f, model)
        }
    }
}
