//! Conservative cleanup of a renamed program: unfold calls to the empty
//! continuation fact and drop predicates unreachable from the entry.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::term::{clause_variant_eq, Clause, PredSym, Program};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OptReport {
    pub folded_eps_calls: usize,
    pub removed_unreachable_preds: Vec<PredSym>,
    pub removed_unreachable_clauses: usize,
    pub warnings: Vec<String>,
}

pub struct FoldResult {
    pub program: Program,
    pub folded: usize,
    pub warning: Option<String>,
}

/// Deletes every body call of `eps`, which must be defined by exactly one
/// nullary unit clause. The fact itself goes once nothing calls it.
pub fn fold_eps(p: &Program, eps: &PredSym) -> FoldResult {
    let defs: Vec<&Clause> = p.clauses.iter().filter(|c| &c.head_pred() == eps).collect();
    let called = p.clauses.iter().flat_map(|c| &c.body).any(|b| b.pred().as_ref() == Some(eps));
    if !called {
        return FoldResult {
            program: p.clone(),
            folded: 0,
            warning: None,
        };
    }
    if eps.arity != 0 || defs.len() != 1 || !defs[0].is_unit() {
        return FoldResult {
            program: p.clone(),
            folded: 0,
            warning: Some(format!("{eps} is not a single fact; calls left in place")),
        };
    }
    let mut folded = 0;
    let clauses = p
        .clauses
        .iter()
        .filter(|c| &c.head_pred() != eps)
        .map(|c| {
            let before = c.body.len();
            let body: Vec<_> = c.body.iter().filter(|b| b.pred().as_ref() != Some(eps)).cloned().collect();
            folded += before - body.len();
            Clause::new(c.head.clone(), body)
        })
        .collect();
    FoldResult {
        program: Program::new(clauses),
        folded,
        warning: None,
    }
}

pub struct ReachResult {
    pub program: Program,
    pub removed: Vec<PredSym>,
    pub removed_clauses: usize,
    pub warning: Option<String>,
}

/// Keeps only clauses for predicates reachable from `entry` through body
/// calls.
pub fn remove_unreachable(p: &Program, entry: &PredSym) -> ReachResult {
    let defined = p.defined_predicates();
    if !defined.contains(entry) {
        return ReachResult {
            program: Program::default(),
            removed: defined.into_iter().collect(),
            removed_clauses: p.len(),
            warning: Some(format!("entry {entry} has no clauses; nothing is reachable")),
        };
    }
    let mut seen: HashSet<PredSym> = HashSet::from([entry.clone()]);
    let mut queue = VecDeque::from([entry.clone()]);
    while let Some(pred) = queue.pop_front() {
        for c in p.clauses.iter().filter(|c| c.head_pred() == pred) {
            for b in &c.body {
                let callee = b.pred().expect("body atoms are callable");
                if seen.insert(callee.clone()) {
                    queue.push_back(callee);
                }
            }
        }
    }
    let removed: Vec<PredSym> = defined.into_iter().filter(|d| !seen.contains(d)).collect();
    let kept: Vec<Clause> = p.clauses.iter().filter(|c| seen.contains(&c.head_pred())).cloned().collect();
    ReachResult {
        removed_clauses: p.len() - kept.len(),
        program: Program::new(kept),
        removed,
        warning: None,
    }
}

/// Drops clauses that are variants of an earlier clause. Not part of
/// [`optimize`]: a duplicate clause yields a duplicate answer, so removing
/// it changes the answer multiset.
pub fn dedupe(p: &Program) -> (Program, usize) {
    let mut kept: Vec<Clause> = Vec::new();
    for c in &p.clauses {
        if !kept.iter().any(|k| clause_variant_eq(k, c)) {
            kept.push(c.clone());
        }
    }
    let dropped = p.len() - kept.len();
    (Program::new(kept), dropped)
}

/// fold, then reachability from `entry`.
pub fn optimize(p: &Program, entry: &PredSym, eps: &PredSym) -> (Program, OptReport) {
    let mut report = OptReport::default();
    let f = fold_eps(p, eps);
    report.folded_eps_calls = f.folded;
    report.warnings.extend(f.warning);
    let r = remove_unreachable(&f.program, entry);
    report.removed_unreachable_preds = r.removed;
    report.removed_unreachable_clauses = r.removed_clauses;
    report.warnings.extend(r.warning);
    (r.program, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, print_program};

    fn prog(s: &str) -> Program {
        parse_program(s).unwrap().program
    }

    fn eps() -> PredSym {
        PredSym::new("q_eps", 0)
    }

    #[test]
    fn folds_unique_fact() {
        let f = fold_eps(&prog("q_c :- q_eps.\nq_eps."), &eps());
        assert_eq!(print_program(&f.program), "q_c.\n");
        assert_eq!(f.folded, 1);
        let f = fold_eps(&prog("q_a :- q_eps, q_b.\nq_b.\nq_eps."), &eps());
        assert_eq!(print_program(&f.program), "q_a :- q_b.\nq_b.\n");
    }

    #[test]
    fn leaves_other_programs_alone() {
        let p = prog("a :- b.\nb.");
        assert_eq!(fold_eps(&p, &eps()).program, p);
        let bad = prog("q_c :- q_eps.\nq_eps :- q_c.");
        let f = fold_eps(&bad, &eps());
        assert_eq!(f.program, bad);
        assert!(f.warning.is_some());
    }

    #[test]
    fn reachability() {
        let chain = prog("q_a :- q_b_c.\nq_b_c :- q_d_c.\nq_d_c :- q_c.\nq_c :- q_eps.\nq_eps.");
        let r = remove_unreachable(&chain, &PredSym::new("q_a", 0));
        assert_eq!(r.program, chain);
        assert!(r.removed.is_empty());
        let orphan = prog("a :- b.\nb.\nc :- b.\nd.");
        let r = remove_unreachable(&orphan, &PredSym::new("a", 0));
        assert_eq!(print_program(&r.program), "a :- b.\nb.\n");
        assert_eq!(r.removed, vec![PredSym::new("c", 0), PredSym::new("d", 0)]);
        let r = remove_unreachable(&orphan, &PredSym::new("zz", 0));
        assert!(r.program.is_empty());
        assert!(r.warning.is_some());
    }

    #[test]
    fn dedupe_and_report() {
        let (p, n) = dedupe(&prog("p(X,Y) :- r(Y).\np(A,B) :- r(B).\np(A,A) :- r(A)."));
        assert_eq!(n, 1);
        assert_eq!(p.len(), 2);
        let (p, rep) = optimize(&prog("q_a :- q_eps.\nq_a.\nq_eps.\nq_z."), &PredSym::new("q_a", 0), &eps());
        assert_eq!(print_program(&p), "q_a.\nq_a.\n");
        assert_eq!(rep.folded_eps_calls, 1);
        assert_eq!(rep.removed_unreachable_preds, vec![PredSym::new("q_z", 0)]);
    }
}
