//! Continuation-passing binarization.
//!
//! Each clause `H :- B1, ..., Bn` becomes `q([H|Cont]) :- q([B1, ..., Bn|Cont])`
//! (a fact becomes `q([H|Cont]) :- q(Cont)`), the query `A1, ..., An` becomes
//! `q([A1, ..., An])`, and the terminator `q([])` is appended last. Goals are
//! carried as ordinary list elements; no wrapper functor is added.

use crate::term::{Clause, PredSym, Program, Query, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinarizedProgram {
    pub program: Program,
    /// The fresh unary continuation predicate.
    pub cont_pred: PredSym,
    pub origin: Program,
}

impl BinarizedProgram {
    /// The terminator clause `q([])`.
    pub fn terminator(&self) -> &Clause {
        self.program.clauses.last().expect("binarized program ends with the terminator")
    }

    pub fn binarize_query(&self, q: &Query) -> Term {
        binarize_query(q, &self.cont_pred)
    }
}

/// `q/1` unless some functor `q/1` already occurs in the program, then the
/// first unused of `q1/1`, `q2/1`, ...
pub fn fresh_cont_pred(p: &Program) -> PredSym {
    let used = p.functors();
    std::iter::once("q".to_string())
        .chain((1..).map(|i| format!("q{i}")))
        .map(|name| PredSym::new(&name, 1))
        .find(|cand| !used.contains(cand))
        .expect("an unused name exists")
}

fn cont_var(c: &Clause) -> Var {
    let names: Vec<_> = c.vars().into_iter().map(|v| v.name).collect();
    std::iter::once("Cont".to_string())
        .chain((1..).map(|i| format!("Cont{i}")))
        .find(|n| !names.iter().any(|m| &**m == n))
        .map(|n| Var::named(&n))
        .expect("an unused variable name exists")
}

pub fn binarize_clause(c: &Clause, q: &PredSym) -> Clause {
    let cont = Term::Var(cont_var(c));
    let head = Term::app_shared(q.name.clone(), vec![Term::cons(c.head.clone(), cont.clone())]);
    let body_arg = if c.body.is_empty() {
        cont
    } else {
        Term::list_with_tail(c.body.iter().cloned(), cont)
    };
    Clause::new(head, vec![Term::app_shared(q.name.clone(), vec![body_arg])])
}

pub fn binarize_query(qy: &Query, q: &PredSym) -> Term {
    Term::app_shared(q.name.clone(), vec![Term::list(qy.atoms.iter().cloned())])
}

pub fn terminator_clause(q: &PredSym) -> Clause {
    Clause::fact(Term::app_shared(q.name.clone(), vec![Term::nil()]))
}

/// Clause-by-clause binarization in source order with the terminator last.
pub fn binarize_program(p: &Program) -> BinarizedProgram {
    let q = fresh_cont_pred(p);
    binarize_program_with(p, q)
}

pub fn binarize_program_with(p: &Program, q: PredSym) -> BinarizedProgram {
    let mut clauses: Vec<Clause> = p.clauses.iter().map(|c| binarize_clause(c, &q)).collect();
    clauses.push(terminator_clause(&q));
    BinarizedProgram {
        program: Program::new(clauses),
        cont_pred: q,
        origin: p.clone(),
    }
}

/// The continuation variable of a binarized non-terminator clause, if the
/// clause has the shape `q([H|Cont]) :- q(... Cont)` with `Cont` occurring
/// exactly once in the head and once in the body.
pub fn linear_continuation(c: &Clause, q: &PredSym) -> Option<Var> {
    if c.head.pred().as_ref() != Some(q) || c.body.len() != 1 || c.body[0].pred().as_ref() != Some(q) {
        return None;
    }
    let (_, head_tail) = c.head.args()[0].as_cons()?;
    let cont = head_tail.as_var()?.clone();
    let (_, body_tail) = c.body[0].args()[0].list_parts();
    if body_tail.as_var() != Some(&cont) {
        return None;
    }
    let in_head = c.head.count_occurrences(&cont);
    let in_body = c.body[0].count_occurrences(&cont);
    (in_head == 1 && in_body == 1).then_some(cont)
}
