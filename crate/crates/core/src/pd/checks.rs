//! Structural checks on partial deduction output.

use super::generalize::{goal_list, GeneralizedAtom};
use crate::term::{is_instance, rename_term_apart, unify, PredSym, Program, Term, VarGen};

fn cont_atoms<'a>(p: &'a Program, cont: &'a PredSym) -> impl Iterator<Item = &'a Term> + 'a {
    p.clauses
        .iter()
        .flat_map(|c| c.terms())
        .filter(move |t| t.pred().as_ref() == Some(cont))
}

/// Every continuation atom in the program has a nil-terminated goal list.
pub fn check_invariant_4_5(p: &Program, cont: &PredSym) -> bool {
    cont_atoms(p, cont).all(|a| goal_list(a).is_ok())
}

/// No atom of the continuation predicate remains.
pub fn no_continuation_atoms(p: &Program, cont: &PredSym) -> bool {
    cont_atoms(p, cont).next().is_none()
}

/// Each body atom of `p` is an instance of exactly one member of `s`.
pub fn check_closedness(p: &Program, s: &[GeneralizedAtom]) -> bool {
    p.clauses.iter().flat_map(|c| &c.body).all(|b| {
        s.iter().filter(|g| is_instance(b, &g.atom)).count() == 1
    })
}

/// No two members of `s` have a common instance.
pub fn check_independence(s: &[GeneralizedAtom]) -> bool {
    let floor = s.iter().map(|g| g.atom.max_var_index()).max().unwrap_or(0);
    let mut gen = VarGen::above(floor);
    for (i, a) in s.iter().enumerate() {
        for b in &s[i + 1..] {
            let b = rename_term_apart(&b.atom, &mut gen);
            if unify(&a.atom, &b, true).is_some() {
                return false;
            }
        }
    }
    true
}

pub fn check_closedness_independence(p: &Program, s: &[GeneralizedAtom]) -> bool {
    check_closedness(p, s) && check_independence(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pd::generalize::pattern_of;
    use crate::syntax::{parse_program, parse_term};

    fn prog(s: &str) -> Program {
        parse_program(s).unwrap().program
    }

    fn gatom(s: &str) -> GeneralizedAtom {
        let atom = parse_term(s).unwrap();
        let pattern = pattern_of(&atom).unwrap();
        GeneralizedAtom { atom, pattern }
    }

    #[test]
    fn invariant_on_clauses() {
        let q = PredSym::new("q", 1);
        assert!(!check_invariant_4_5(&prog("q([append([],B,B)|Cont]) :- q(Cont)."), &q));
        assert!(check_invariant_4_5(&prog("q([])."), &q));
        assert!(check_invariant_4_5(&prog("q([a(X)]) :- q([b,c(X)])."), &q));
        assert!(!check_invariant_4_5(&prog("q([a(X)]) :- q([b|T])."), &q));
    }

    #[test]
    fn closedness_and_independence() {
        let s = vec![gatom("q([a(X)])"), gatom("q([b,c(Y)])"), gatom("q([])")];
        assert!(check_closedness_independence(&prog("q([a(X)]) :- q([b,c(X)])."), &s));
        assert!(!check_closedness(&prog("q([a(X)]) :- q([d])."), &s));
        let dup = vec![gatom("q([a(X)])"), gatom("q([a(Y)])")];
        assert!(!check_independence(&dup));
        assert!(!check_closedness(&prog("p :- q([a(z)])."), &dup));
    }

    #[test]
    fn leftover_continuations() {
        let q = PredSym::new("q", 1);
        assert!(no_continuation_atoms(&prog("q_a(X) :- q_b_c(X)."), &q));
        assert!(!no_continuation_atoms(&prog("q_a(X) :- q([])."), &q));
    }
}
