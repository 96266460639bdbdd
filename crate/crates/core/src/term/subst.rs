use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{Clause, Term, Var};

/// A finite, idempotent map from variables to terms.
///
/// Bindings are stored fully resolved: no bound variable occurs in the range,
/// and no variable is bound to itself.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an idempotent substitution from arbitrary (triangular) bindings.
    /// Returns `None` if the bindings are cyclic.
    pub fn from_bindings(bindings: impl IntoIterator<Item = (Var, Term)>) -> Option<Self> {
        let raw: HashMap<Var, Term> = bindings
            .into_iter()
            .filter(|(v, t)| t.as_var() != Some(v))
            .collect();
        let mut out = BTreeMap::new();
        for v in raw.keys() {
            let t = resolve(&Term::Var(v.clone()), &raw, &mut Vec::new())?;
            if t.as_var() != Some(v) {
                out.insert(v.clone(), t);
            }
        }
        Some(Substitution { bindings: out })
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        self.apply_changed(t).unwrap_or_else(|| t.clone())
    }

    /// `None` when `t` is unchanged, so untouched subterms stay shared.
    fn apply_changed(&self, t: &Term) -> Option<Term> {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned(),
            Term::App { functor, args } => {
                rebuild(functor, args, |a| self.apply_changed(a))
            }
        }
    }

    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause {
            head: self.apply(&c.head),
            body: c.body.iter().map(|b| self.apply(b)).collect(),
        }
    }

    /// `self` followed by `other`: applying the result equals applying `self`
    /// and then `other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out: BTreeMap<Var, Term> = self
            .bindings
            .iter()
            .map(|(v, t)| (v.clone(), other.apply(t)))
            .filter(|(v, t)| t.as_var() != Some(v))
            .collect();
        for (v, t) in &other.bindings {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution { bindings: out }
    }

    /// Keeps only bindings for the listed variables.
    pub fn restrict(&self, vars: &[Var]) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        }
    }
}

/// Rebuilds `functor(args)` if `f` changes some argument.
fn rebuild(functor: &Arc<str>, args: &Arc<[Term]>, mut f: impl FnMut(&Term) -> Option<Term>) -> Option<Term> {
    let mut out: Option<Vec<Term>> = None;
    for (i, a) in args.iter().enumerate() {
        if let Some(new) = f(a) {
            out.get_or_insert_with(|| args[..i].to_vec()).push(new);
        } else if let Some(v) = out.as_mut() {
            v.push(a.clone());
        }
    }
    out.map(|args| Term::App {
        functor: functor.clone(),
        args: args.into(),
    })
}

fn resolve(t: &Term, raw: &HashMap<Var, Term>, visiting: &mut Vec<Var>) -> Option<Term> {
    resolve_changed(t, raw, visiting).map(|r| r.unwrap_or_else(|| t.clone()))
}

/// Outer `None` on a cycle, inner `None` when `t` is unchanged.
fn resolve_changed(t: &Term, raw: &HashMap<Var, Term>, visiting: &mut Vec<Var>) -> Option<Option<Term>> {
    match t {
        Term::Var(v) => match raw.get(v) {
            Some(bound) => {
                if visiting.contains(v) {
                    return None;
                }
                visiting.push(v.clone());
                let r = resolve(bound, raw, visiting);
                visiting.pop();
                r.map(Some)
            }
            None => Some(None),
        },
        Term::App { functor, args } => {
            let mut cyclic = false;
            let out = rebuild(functor, args, |a| match resolve_changed(a, raw, visiting) {
                Some(r) => r,
                None => {
                    cyclic = true;
                    None
                }
            });
            (!cyclic).then_some(out)
        }
    }
}

fn walk<'a>(mut t: &'a Term, b: &'a HashMap<Var, Term>) -> &'a Term {
    while let Term::Var(v) = t {
        match b.get(v) {
            Some(next) => t = next,
            None => break,
        }
    }
    t
}

fn occurs_walk(v: &Var, t: &Term, b: &HashMap<Var, Term>) -> bool {
    let mut stack = vec![t];
    while let Some(t) = stack.pop() {
        match walk(t, b) {
            Term::Var(w) => {
                if w == v {
                    return true;
                }
            }
            Term::App { args, .. } => stack.extend(args.iter()),
        }
    }
    false
}

/// Most general unifier of `a` and `b`, or `None` when they do not unify.
///
/// With `occurs_check` off, a binding that would make the result cyclic is
/// still rejected when the idempotent form is built, since cyclic terms
/// have no finite representation here.
pub fn unify(a: &Term, b: &Term, occurs_check: bool) -> Option<Substitution> {
    let mut bindings: HashMap<Var, Term> = HashMap::new();
    let mut stack: Vec<(Term, Term)> = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = stack.pop() {
        let x = walk(&x, &bindings).clone();
        let y = walk(&y, &bindings).clone();
        match (&x, &y) {
            (Term::Var(v), Term::Var(w)) if v == w => {}
            (Term::Var(v), other) | (other, Term::Var(v)) => {
                if occurs_check && occurs_walk(v, other, &bindings) {
                    return None;
                }
                bindings.insert(v.clone(), other.clone());
            }
            (
                Term::App {
                    functor: f,
                    args: xs,
                },
                Term::App {
                    functor: g,
                    args: ys,
                },
            ) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
        }
    }
    Substitution::from_bindings(bindings)
}

/// One-way matching: a substitution `s` over the variables of `general` with
/// `s(general) == specific`, treating the variables of `specific` as
/// constants.
pub fn match_term(general: &Term, specific: &Term) -> Option<Substitution> {
    let mut map: HashMap<Var, Term> = HashMap::new();
    let mut stack = vec![(general, specific)];
    while let Some((g, s)) = stack.pop() {
        match g {
            Term::Var(v) => match map.get(v) {
                Some(bound) if bound != s => return None,
                Some(_) => {}
                None => {
                    map.insert(v.clone(), s.clone());
                }
            },
            Term::App { functor, args } => match s {
                Term::App {
                    functor: f2,
                    args: a2,
                } if functor == f2 && args.len() == a2.len() => {
                    stack.extend(args.iter().zip(a2.iter()));
                }
                _ => return None,
            },
        }
    }
    // `map` is already idempotent relative to `general`: its range consists
    // of subterms of `specific` only.
    Some(Substitution {
        bindings: map
            .into_iter()
            .filter(|(v, t)| t.as_var() != Some(v))
            .collect(),
    })
}

pub fn is_instance(specific: &Term, general: &Term) -> bool {
    match_term(general, specific).is_some()
}

/// True iff a variable-to-variable bijection maps `a` onto `b`.
pub fn variant_eq(a: &Term, b: &Term) -> bool {
    let mut fwd: HashMap<&Var, &Var> = HashMap::new();
    let mut bwd: HashMap<&Var, &Var> = HashMap::new();
    let mut stack = vec![(a, b)];
    while let Some((x, y)) = stack.pop() {
        match (x, y) {
            (Term::Var(v), Term::Var(w)) => {
                if *fwd.entry(v).or_insert(w) != w || *bwd.entry(w).or_insert(v) != v {
                    return false;
                }
            }
            (
                Term::App {
                    functor: f,
                    args: xs,
                },
                Term::App {
                    functor: g,
                    args: ys,
                },
            ) => {
                if f != g || xs.len() != ys.len() {
                    return false;
                }
                stack.extend(xs.iter().zip(ys.iter()));
            }
            _ => return false,
        }
    }
    true
}

pub fn clause_variant_eq(a: &Clause, b: &Clause) -> bool {
    a.body.len() == b.body.len() && variant_eq(&clause_as_term(a), &clause_as_term(b))
}

fn clause_as_term(c: &Clause) -> Term {
    Term::app(":-", vec![c.head.clone(), Term::list(c.body.iter().cloned())])
}

/// Freshness scope: a monotone counter handing out variable indexes.
#[derive(Debug, Clone)]
pub struct VarGen {
    next: u32,
}

impl Default for VarGen {
    fn default() -> Self {
        VarGen { next: 1 }
    }
}

impl VarGen {
    pub fn new() -> Self {
        Self::default()
    }

    /// A scope whose variables are guaranteed distinct from any variable
    /// with index `<= floor`.
    pub fn above(floor: u32) -> Self {
        VarGen { next: floor + 1 }
    }

    pub fn fresh(&mut self, name: &Arc<str>) -> Var {
        let v = Var::with_index(name.clone(), self.next);
        self.next += 1;
        v
    }

    pub fn fresh_named(&mut self, name: &str) -> Var {
        self.fresh(&Arc::from(name))
    }

    pub fn fresh_term(&mut self, name: &str) -> Term {
        Term::Var(self.fresh_named(name))
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

/// A variant of `c` whose variables have never been issued by `scope`
/// before.
pub fn rename_apart(c: &Clause, scope: &mut VarGen) -> Clause {
    let vars = c.vars();
    if vars.is_empty() {
        return c.clone();
    }
    let map: HashMap<Var, Var> = vars
        .into_iter()
        .map(|v| {
            let fresh = scope.fresh(&v.name);
            (v, fresh)
        })
        .collect();
    c.map_vars(&map)
}

/// Renames the variables of a term to fresh ones from `scope`.
pub fn rename_term_apart(t: &Term, scope: &mut VarGen) -> Term {
    let map: HashMap<Var, Var> = t
        .vars()
        .into_iter()
        .map(|v| {
            let fresh = scope.fresh(&v.name);
            (v, fresh)
        })
        .collect();
    t.map_vars(&map)
}
