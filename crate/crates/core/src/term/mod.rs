//! Terms, clauses, programs and the substitution machinery shared by every
//! stage of the pipeline.
//!
//! Atoms and goals are ordinary compound terms: a goal is just a term whose
//! functor is read as a predicate symbol. Lists are the usual `'.'/2` cells
//! terminated by `[]`.

mod subst;

pub use subst::{
    clause_variant_eq, is_instance, match_term, rename_apart, rename_term_apart, unify, variant_eq,
    Substitution, VarGen,
};

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

pub const CONS: &str = ".";

fn no_args() -> Arc<[Term]> {
    static EMPTY: OnceLock<Arc<[Term]>> = OnceLock::new();
    EMPTY.get_or_init(|| Arc::new([])).clone()
}
pub const NIL: &str = "[]";

/// A logic variable. Source variables carry index 0; variables minted by a
/// [`VarGen`] carry positive indexes, which is what keeps renamed copies
/// apart.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub index: u32,
}

impl Var {
    pub fn named(name: &str) -> Self {
        Var {
            name: name.into(),
            index: 0,
        }
    }

    pub fn with_index(name: Arc<str>, index: u32) -> Self {
        Var { name, index }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.index, &*self.name) {
            (0, name) => f.write_str(name),
            (i, "_") => write!(f, "_G{i}"),
            (i, name) => write!(f, "{name}_{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App { functor: Arc<str>, args: Arc<[Term]> },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::named(name))
    }

    pub fn atom(name: &str) -> Term {
        Term::App {
            functor: name.into(),
            args: no_args(),
        }
    }

    pub fn app(functor: &str, args: Vec<Term>) -> Term {
        Term::App {
            functor: functor.into(),
            args: args.into(),
        }
    }

    pub fn app_shared(functor: Arc<str>, args: Vec<Term>) -> Term {
        Term::App {
            functor,
            args: args.into(),
        }
    }

    pub fn nil() -> Term {
        static NIL_TERM: OnceLock<Term> = OnceLock::new();
        NIL_TERM.get_or_init(|| Term::atom(NIL)).clone()
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        static CONS_NAME: OnceLock<Arc<str>> = OnceLock::new();
        let args: Arc<[Term]> = Arc::new([head, tail]);
        Term::App {
            functor: CONS_NAME.get_or_init(|| Arc::from(CONS)).clone(),
            args,
        }
    }

    /// Builds `[i1, ..., in | tail]`.
    pub fn list_with_tail(items: impl IntoIterator<Item = Term>, tail: Term) -> Term {
        let items: Vec<Term> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::cons(item, acc))
    }

    pub fn list(items: impl IntoIterator<Item = Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App { .. } => None,
        }
    }

    pub fn functor(&self) -> Option<&str> {
        match self {
            Term::App { functor, .. } => Some(functor),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App { args, .. } => args,
            Term::Var(_) => &[],
        }
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Term::App { functor, args } if &**functor == NIL && args.is_empty())
    }

    pub fn as_cons(&self) -> Option<(&Term, &Term)> {
        match self {
            Term::App { functor, args } if &**functor == CONS && args.len() == 2 => {
                Some((&args[0], &args[1]))
            }
            _ => None,
        }
    }

    /// Splits a list into its elements and the term that terminates the
    /// spine (`[]` for a proper list, a variable for an open one).
    pub fn list_parts(&self) -> (Vec<&Term>, &Term) {
        let mut items = Vec::new();
        let mut cur = self;
        while let Some((h, t)) = cur.as_cons() {
            items.push(h);
            cur = t;
        }
        (items, cur)
    }

    /// Elements of a nil-terminated list, `None` for anything else.
    pub fn closed_list(&self) -> Option<Vec<&Term>> {
        let (items, tail) = self.list_parts();
        tail.is_nil().then_some(items)
    }

    /// Predicate symbol of a callable term.
    pub fn pred(&self) -> Option<PredSym> {
        match self {
            Term::App { functor, args } => Some(PredSym {
                name: functor.clone(),
                arity: args.len(),
            }),
            Term::Var(_) => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    /// Pushes variables in depth-first, left-to-right first-occurrence order.
    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App { args, .. } => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn count_occurrences(&self, v: &Var) -> usize {
        match self {
            Term::Var(w) => usize::from(w == v),
            Term::App { args, .. } => args.iter().map(|a| a.count_occurrences(v)).sum(),
        }
    }

    pub fn max_var_index(&self) -> u32 {
        match self {
            Term::Var(v) => v.index,
            Term::App { args, .. } => args.iter().map(Term::max_var_index).max().unwrap_or(0),
        }
    }

    /// Every functor symbol used anywhere in the term, with its arity.
    pub fn collect_functors(&self, out: &mut BTreeSet<PredSym>) {
        if let Term::App { functor, args } = self {
            out.insert(PredSym {
                name: functor.clone(),
                arity: args.len(),
            });
            args.iter().for_each(|a| a.collect_functors(out));
        }
    }

    /// Renames variables according to `map`; unmapped variables are kept.
    pub fn map_vars(&self, map: &HashMap<Var, Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::App { functor, args } => {
                if args.is_empty() {
                    return self.clone();
                }
                Term::App {
                    functor: functor.clone(),
                    args: args.iter().map(|a| a.map_vars(map)).collect(),
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::write_term(f, self, &|v: &Var| v.to_string())
    }
}

/// A predicate symbol; two symbols are equal only when both name and arity
/// agree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredSym {
    pub name: Arc<str>,
    pub arity: usize,
}

impl PredSym {
    pub fn new(name: &str, arity: usize) -> Self {
        PredSym {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for PredSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::write_atom(f, &self.name)?;
        write!(f, "/{}", self.arity)
    }
}

impl serde::Serialize for PredSym {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Term>,
}

impl Clause {
    /// Panics if `head` is a variable.
    pub fn new(head: Term, body: Vec<Term>) -> Self {
        assert!(!head.is_var(), "clause head must not be a variable");
        Clause { head, body }
    }

    pub fn fact(head: Term) -> Self {
        Clause::new(head, Vec::new())
    }

    pub fn is_unit(&self) -> bool {
        self.body.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.body.len() <= 1
    }

    pub fn head_pred(&self) -> PredSym {
        self.head.pred().expect("clause head is callable")
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        std::iter::once(&self.head).chain(self.body.iter())
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for t in self.terms() {
            t.collect_vars(&mut out);
        }
        out
    }

    pub fn max_var_index(&self) -> u32 {
        self.terms().map(Term::max_var_index).max().unwrap_or(0)
    }

    pub fn map_vars(&self, map: &HashMap<Var, Var>) -> Clause {
        Clause {
            head: self.head.map_vars(map),
            body: self.body.iter().map(|b| b.map_vars(map)).collect(),
        }
    }

    /// The variant of this clause whose variables are `X1, X2, ...` in
    /// first-occurrence order. This is the form the printer emits.
    pub fn canonical(&self) -> Clause {
        let map = canonical_names(&self.vars());
        self.map_vars(&map)
    }
}

pub(crate) fn canonical_names(vars: &[Var]) -> HashMap<Var, Var> {
    vars.iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), Var::named(&format!("X{}", i + 1))))
        .collect()
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_clause(self))
    }
}

/// An ordered list of clauses; order is significant for LD search.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Program { clauses }
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Clause> {
        self.clauses.iter()
    }

    pub fn is_binary(&self) -> bool {
        self.clauses.iter().all(Clause::is_binary)
    }

    /// Maximum body length over all clauses (0 for an empty program).
    pub fn max_body_len(&self) -> usize {
        self.clauses.iter().map(|c| c.body.len()).max().unwrap_or(0)
    }

    /// Predicate symbols in order of first appearance, heads and bodies.
    pub fn predicates(&self) -> Vec<PredSym> {
        let mut seen = indexmap::IndexSet::new();
        for c in &self.clauses {
            for t in c.terms() {
                if let Some(p) = t.pred() {
                    seen.insert(p);
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn defined_predicates(&self) -> BTreeSet<PredSym> {
        self.clauses.iter().map(Clause::head_pred).collect()
    }

    pub fn functors(&self) -> BTreeSet<PredSym> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            for t in c.terms() {
                t.collect_functors(&mut out);
            }
        }
        out
    }

    pub fn max_var_index(&self) -> u32 {
        self.clauses.iter().map(Clause::max_var_index).max().unwrap_or(0)
    }

    pub fn canonical(&self) -> Program {
        Program::new(self.clauses.iter().map(Clause::canonical).collect())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_program(self))
    }
}

/// A conjunction of atoms; the empty query is the successful resolvent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Query {
    pub atoms: Vec<Term>,
}

impl Query {
    pub fn new(atoms: Vec<Term>) -> Self {
        Query { atoms }
    }

    pub fn empty() -> Self {
        Query::default()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in &self.atoms {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn max_var_index(&self) -> u32 {
        self.atoms.iter().map(Term::max_var_index).max().unwrap_or(0)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_helpers() {
        let l = Term::list_with_tail([Term::atom("a"), Term::atom("b")], Term::var("T"));
        let (items, tail) = l.list_parts();
        assert_eq!(items.len(), 2);
        assert_eq!(tail, &Term::var("T"));
        assert!(l.closed_list().is_none());
        assert_eq!(Term::list([Term::atom("a")]).closed_list().unwrap().len(), 1);
        assert_eq!(Term::nil().closed_list().unwrap().len(), 0);
    }

    #[test]
    fn predsym_equality_is_name_and_arity() {
        assert_ne!(PredSym::new("p", 1), PredSym::new("p", 2));
        assert_eq!(Term::app("p", vec![Term::var("X")]).pred(), Some(PredSym::new("p", 1)));
    }

    #[test]
    fn binary_clause_classification() {
        let c = Clause::new(Term::atom("a"), vec![Term::atom("b")]);
        assert!(c.is_binary());
        assert!(!c.is_unit());
        let d = Clause::new(Term::atom("a"), vec![Term::atom("b"), Term::atom("c")]);
        assert!(!d.is_binary());
    }

    #[test]
    #[should_panic]
    fn variable_head_rejected() {
        Clause::fact(Term::var("X"));
    }
}
