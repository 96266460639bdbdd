//! Depth-1 partial deduction of binarized programs.
//!
//! Starting from the generalized binarized query, each pending atom is
//! unfolded one step against every clause, the body of each resultant is
//! generalized, and unseen call patterns are queued (FIFO). When no pattern
//! is pending the resultants are renamed so that each `q([p1(..), ..])` atom
//! becomes a flat `q_p1_..(..)` atom.

mod checks;
mod generalize;
mod growth;
mod rename;

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use checks::{
    check_closedness, check_closedness_independence, check_independence, check_invariant_4_5,
    no_continuation_atoms,
};
pub use generalize::{generalize, pattern_of, CallPattern, GeneralizedAtom};
pub use growth::{detect_growth, growing_chain};
use growth::chain_indices;
pub use rename::{base_name, rename_atom, RenameTable};

use crate::binarize::BinarizedProgram;
use crate::stratify::{b_stratify, lemma48_bound};
use crate::term::{rename_apart, unify, Clause, PredSym, Program, Query, Term, Var, VarGen};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PdError {
    #[error("continuation list is not closed in {0}")]
    OpenContinuation(String),
    #[error("not a continuation atom: {0}")]
    NotContinuationAtom(String),
    #[error("goal list contains a variable in {0}")]
    NonCallableGoal(String),
    #[error("no renaming for call pattern {0}")]
    UnknownPattern(String),
    #[error("the query is empty")]
    EmptyQuery,
}

/// Limits on the worklist. `None` means unlimited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_pattern_len: Option<usize>,
    pub max_iterations: Option<usize>,
    /// True when `max_pattern_len` is the resolvent bound of a
    /// B-stratifiable program rather than a default.
    pub from_stratification: bool,
}

impl Budget {
    pub const DEFAULT_MAX_PATTERN_LEN: usize = 64;
    pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

    pub fn unlimited() -> Self {
        Budget {
            max_pattern_len: None,
            max_iterations: None,
            from_stratification: false,
        }
    }

    pub fn fixed(max_pattern_len: usize, max_iterations: usize) -> Self {
        Budget {
            max_pattern_len: Some(max_pattern_len),
            max_iterations: Some(max_iterations),
            from_stratification: false,
        }
    }

    /// For a B-stratifiable program the pattern length is capped by the
    /// resolvent bound and iterations are unlimited; otherwise the defaults
    /// apply.
    pub fn for_program(p: &Program, query_len: usize) -> Self {
        match b_stratify(p) {
            Ok(s) => Budget {
                max_pattern_len: Some(lemma48_bound(p, &s, query_len)),
                max_iterations: None,
                from_stratification: true,
            },
            Err(_) => Budget::fixed(Self::DEFAULT_MAX_PATTERN_LEN, Self::DEFAULT_MAX_ITERATIONS),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NontermReason {
    PatternLengthExceeded,
    IterationBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NontermDiagnosis {
    /// Patterns of strictly increasing length, each a proper prefix of the
    /// next and enqueued before it.
    pub growing_chain: Vec<CallPattern>,
    /// The limit that was hit.
    pub budget: usize,
    pub reason: NontermReason,
    pub iterations: usize,
    /// Number of patterns enqueued before stopping.
    pub enqueued: usize,
}

/// One unfolding step `a θ :- B θ` of a generalized atom with a clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resultant {
    pub clause: Clause,
    /// Index of the binarized clause used.
    pub source_clause: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PdChecks {
    pub invariant_4_5: bool,
    pub closedness: bool,
    pub independence: bool,
    pub no_continuation_atoms: bool,
}

impl PdChecks {
    pub fn all(&self) -> bool {
        self.invariant_4_5 && self.closedness && self.independence && self.no_continuation_atoms
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdSuccess {
    /// The renamed program.
    pub new_prog: Program,
    /// The generalized atoms in the order they were processed.
    pub s_set: Vec<GeneralizedAtom>,
    pub renamed_query: Term,
    pub rename_table: RenameTable,
    /// Resultants before renaming.
    pub resultants: Program,
    pub binarized_query: Term,
    pub iterations: usize,
    /// Every pattern in the order it was enqueued.
    pub history: Vec<CallPattern>,
    pub checks: PdChecks,
    pub warnings: Vec<String>,
}

impl PdSuccess {
    pub fn query(&self) -> Query {
        Query::new(vec![self.renamed_query.clone()])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PdOutcome {
    Success(Box<PdSuccess>),
    Nonterm(NontermDiagnosis),
}

/// `t` with every occurrence of `v` replaced by `r`; unchanged subterms
/// are shared.
fn replace_var(t: &Term, v: &Var, r: &Term) -> Option<Term> {
    match t {
        Term::Var(w) => (w == v).then(|| r.clone()),
        Term::App { functor, args } => {
            let mut out: Option<Vec<Term>> = None;
            for (i, a) in args.iter().enumerate() {
                match replace_var(a, v, r) {
                    Some(new) => out.get_or_insert_with(|| args[..i].to_vec()).push(new),
                    None => {
                        if let Some(o) = out.as_mut() {
                            o.push(a.clone());
                        }
                    }
                }
            }
            out.map(|args| Term::app_shared(functor.clone(), args))
        }
    }
}

/// Resultant of a linear atom `q([G|T])` with a renamed clause
/// `q([H|Cont]) :- B` where `Cont` does not occur in `H`: the mgu is
/// `mgu(G, H)` plus `Cont = T`, so only the first goal is unified and `T` is
/// shared, not copied. `None` when the shapes do not fit.
fn resultant_by_first_goal(a: &Term, c: &Clause) -> Option<Option<Clause>> {
    let (g, t) = a.args().first()?.as_cons()?;
    let (h, cont) = c.head.args().first()?.as_cons()?;
    let cont = cont.as_var()?;
    if h.occurs(cont) {
        return None;
    }
    let Some(theta) = unify(g, h, true) else {
        return Some(None);
    };
    let functor = a.functor().expect("continuation atom is compound");
    let head = Term::app(functor, vec![Term::cons(theta.apply(g), t.clone())]);
    let body = c
        .body
        .iter()
        .map(|b| {
            let b = theta.apply(b);
            replace_var(&b, cont, t).unwrap_or(b)
        })
        .collect();
    Some(Some(Clause::new(head, body)))
}

/// Quick test on the first goal so that clauses for other predicates are
/// skipped without renaming; unification decides the rest.
fn head_may_match(a: &Term, head: &Term) -> bool {
    let (Some(x), Some(y)) = (a.args().first(), head.args().first()) else {
        return false;
    };
    match (x.as_cons(), y.as_cons()) {
        (Some((g, _)), Some((h, _))) => g.is_var() || h.is_var() || g.pred() == h.pred(),
        (Some(_), None) => !y.is_nil(),
        (None, Some(_)) => !x.is_nil(),
        (None, None) => true,
    }
}

/// All resultants of `a` against the clauses of `p`, one per matching
/// clause, in clause order. `a.atom` must be linear, as [`generalize`]
/// makes it.
pub fn unfold_depth1(p: &Program, a: &GeneralizedAtom, gen: &mut VarGen) -> Vec<Resultant> {
    unfold_atom(p, &a.atom, gen)
}

fn unfold_atom(p: &Program, a: &Term, gen: &mut VarGen) -> Vec<Resultant> {
    let mut out: Vec<Resultant> = Vec::new();
    for (i, c) in p.clauses.iter().enumerate() {
        if !head_may_match(a, &c.head) {
            continue;
        }
        let c = rename_apart(c, gen);
        let r = match resultant_by_first_goal(a, &c) {
            Some(r) => r,
            None => unify(a, &c.head, true)
                .map(|theta| Clause::new(theta.apply(a), c.body.iter().map(|b| theta.apply(b)).collect())),
        };
        let Some(r) = r else {
            continue;
        };
        out.push(Resultant {
            clause: r,
            source_clause: i,
        });
    }
    out
}

/// Predicate symbols numbered in order of first sight.
#[derive(Default)]
struct Interner {
    ids: HashMap<PredSym, u32>,
    preds: Vec<PredSym>,
}

impl Interner {
    fn id(&mut self, p: PredSym) -> u32 {
        if let Some(&i) = self.ids.get(&p) {
            return i;
        }
        let i = self.preds.len() as u32;
        self.preds.push(p.clone());
        self.ids.insert(p, i);
        i
    }

    fn pattern(&self, key: &[u32]) -> CallPattern {
        CallPattern(key.iter().map(|&i| self.preds[i as usize].clone()).collect())
    }
}

/// A generalized atom waiting in the worklist or already in S, with its
/// pattern as interned ids.
struct Pending {
    atom: Term,
    key: Vec<u32>,
}

/// The same allocated node, not merely an equal term.
fn same_node(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::App { functor: f, args: x }, Term::App { functor: g, args: y }) => f == g && Arc::ptr_eq(x, y),
        (Term::Var(v), Term::Var(w)) => v == w,
        _ => false,
    }
}

/// Goals of the continuation atom `a` up to `shared`, if the list reaches
/// that exact node, or up to `[]`. The flag says whether `shared` was hit.
fn goals_before<'a>(a: &'a Term, shared: Option<&Term>) -> Result<(Vec<&'a Term>, bool), PdError> {
    let [list] = a.args() else {
        return Err(PdError::NotContinuationAtom(a.to_string()));
    };
    let mut cur = list;
    let mut goals = Vec::new();
    loop {
        if shared.is_some_and(|s| same_node(cur, s)) {
            return Ok((goals, true));
        }
        match cur.as_cons() {
            Some((g, rest)) => {
                goals.push(g);
                cur = rest;
            }
            None if cur.is_nil() => return Ok((goals, false)),
            None => return Err(PdError::OpenContinuation(a.to_string())),
        }
    }
}

/// Runs the partial deduction worklist for `q0` over `bp`.
pub fn algorithm1(bp: &BinarizedProgram, q0: &Query, budget: &Budget) -> Result<PdOutcome, PdError> {
    if q0.is_empty() {
        return Err(PdError::EmptyQuery);
    }
    let cont = &bp.cont_pred;
    let mut gen = VarGen::above(bp.program.max_var_index().max(q0.max_var_index()));
    let bq = bp.binarize_query(q0);
    let g0 = generalize(&bq, &mut gen)?;
    let functor = g0.atom.functor().expect("continuation atom is compound").to_string();
    let var_name: Arc<str> = Arc::from("X");

    // A resultant body is the clause body followed by the tail of the atom
    // being unfolded, and that tail is already generalized. Only the new
    // prefix is generalized and keyed; the tail and its key are reused.
    // An enqueued pattern is either pending or in S, so `seen` answers
    // "in S or in the queue".
    let mut preds = Interner::default();
    let k0: Vec<u32> = g0.pattern.preds().iter().map(|p| preds.id(p.clone())).collect();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut history: Vec<Vec<u32>> = vec![k0.clone()];
    let mut s: Vec<Pending> = Vec::new();
    let mut queue: VecDeque<Pending> = VecDeque::new();
    let mut resultants: Vec<Clause> = Vec::new();
    let mut warnings = Vec::new();
    let mut iterations = 0;

    let nonterm = |history: &[Vec<u32>], preds: &Interner, budget, reason, iterations| {
        let seqs: Vec<&[u32]> = history.iter().map(Vec::as_slice).collect();
        NontermDiagnosis {
            growing_chain: chain_indices(&seqs).into_iter().map(|i| preds.pattern(&history[i])).collect(),
            budget,
            reason,
            iterations,
            enqueued: history.len(),
        }
    };

    if let Some(max) = budget.max_pattern_len.filter(|&m| k0.len() > m) {
        return Ok(PdOutcome::Nonterm(nonterm(
            &history,
            &preds,
            max,
            NontermReason::PatternLengthExceeded,
            iterations,
        )));
    }
    seen.insert(k0.clone());
    queue.push_back(Pending {
        atom: g0.atom,
        key: k0,
    });

    while let Some(a) = queue.pop_front() {
        if let Some(max) = budget.max_iterations.filter(|&m| iterations >= m) {
            return Ok(PdOutcome::Nonterm(nonterm(
                &history,
                &preds,
                max,
                NontermReason::IterationBudget,
                iterations,
            )));
        }
        iterations += 1;
        let rs = unfold_atom(&bp.program, &a.atom, &mut gen);
        if rs.is_empty() {
            warnings.push(format!("no clause matches {}", preds.pattern(&a.key)));
        }
        let tail = a.atom.args()[0].as_cons().map(|(_, t)| t);
        for r in rs {
            for b in &r.clause.body {
                let (prefix, shares_tail) = goals_before(b, tail)?;
                let mut key = Vec::with_capacity(prefix.len() + a.key.len());
                for g in &prefix {
                    let p = g.pred().ok_or_else(|| PdError::NonCallableGoal(b.to_string()))?;
                    key.push(preds.id(p));
                }
                if shares_tail {
                    key.extend_from_slice(&a.key[1..]);
                }
                if seen.contains(&key) {
                    continue;
                }
                seen.insert(key.clone());
                history.push(key.clone());
                if let Some(max) = budget.max_pattern_len.filter(|&m| key.len() > m) {
                    return Ok(PdOutcome::Nonterm(nonterm(
                        &history,
                        &preds,
                        max,
                        NontermReason::PatternLengthExceeded,
                        iterations,
                    )));
                }
                let rest = match (shares_tail, tail) {
                    (true, Some(t)) => t.clone(),
                    _ => Term::nil(),
                };
                let goals: Vec<Term> = prefix
                    .iter()
                    .map(|g| {
                        let args = g.args().iter().map(|_| Term::Var(gen.fresh(&var_name))).collect();
                        Term::app(g.functor().expect("callable goal"), args)
                    })
                    .collect();
                queue.push_back(Pending {
                    atom: Term::app(&functor, vec![Term::list_with_tail(goals, rest)]),
                    key,
                });
            }
            resultants.push(r.clause);
        }
        s.push(a);
    }

    let resultants = Program::new(resultants);
    let s_set: Vec<GeneralizedAtom> = s
        .into_iter()
        .map(|p| GeneralizedAtom {
            pattern: preds.pattern(&p.key),
            atom: p.atom,
        })
        .collect();
    let history: Vec<CallPattern> = history.iter().map(|k| preds.pattern(k)).collect();
    let reserved = bp
        .origin
        .functors()
        .into_iter()
        .map(|p| p.name.to_string())
        .chain(std::iter::once(cont.name.to_string()));
    let rename_table = RenameTable::build(&cont.name, s_set.iter().map(|g| &g.pattern), reserved);
    let new_prog = Program::new(
        resultants
            .clauses
            .iter()
            .map(|c| {
                Ok(Clause::new(
                    rename_atom(&c.head, &rename_table)?,
                    c.body.iter().map(|b| rename_atom(b, &rename_table)).collect::<Result<_, _>>()?,
                ))
            })
            .collect::<Result<_, PdError>>()?,
    );
    let renamed_query = rename_atom(&bq, &rename_table)?;

    let with_query = Program::new(
        resultants
            .clauses
            .iter()
            .cloned()
            .chain(std::iter::once(Clause::new(Term::atom("$query"), vec![bq.clone()])))
            .collect(),
    );
    let checks = PdChecks {
        invariant_4_5: check_invariant_4_5(&resultants, cont),
        closedness: check_closedness(&with_query, &s_set),
        independence: check_independence(&s_set),
        no_continuation_atoms: no_continuation_atoms(&new_prog, cont),
    };
    Ok(PdOutcome::Success(Box::new(PdSuccess {
        new_prog,
        s_set,
        renamed_query,
        rename_table,
        resultants,
        binarized_query: bq,
        iterations,
        history,
        checks,
        warnings,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binarize::binarize_program;
    use crate::syntax::{parse_program, parse_query, print_program};

    const SAMELEAVES: &str = "sameleaves(leaf(L),leaf(L)).
sameleaves(tree(T1,T2),tree(S1,S2)) :- getleaf(T1,T2,L,T), getleaf(S1,S2,L,S), sameleaves(S,T).
getleaf(leaf(A),C,A,C).
getleaf(tree(A,B),C,L,O) :- getleaf(A,tree(B,C),L,O).
";

    fn run(src: &str, query: &str, budget: Budget) -> PdOutcome {
        let p = parse_program(src).unwrap().program;
        let bp = binarize_program(&p);
        algorithm1(&bp, &parse_query(query).unwrap(), &budget).unwrap()
    }

    fn success(o: PdOutcome) -> PdSuccess {
        match o {
            PdOutcome::Success(s) => *s,
            PdOutcome::Nonterm(d) => panic!("unexpected diagnosis {d:?}"),
        }
    }

    #[test]
    fn example_22() {
        let s = success(run("a :- b,c.\nb :- d.\nc.\nd.\n", "a", Budget::unlimited()));
        assert_eq!(
            print_program(&s.new_prog),
            "q_a :- q_b_c.\nq_b_c :- q_d_c.\nq_d_c :- q_c.\nq_c :- q_eps.\nq_eps.\n"
        );
        assert_eq!(s.renamed_query.to_string(), "q_a");
        assert!(s.checks.all());
    }

    #[test]
    fn unfold_keeps_continuation() {
        let p = parse_program("app([],L,L).\napp([H|T],L,[H|R]) :- app(T,L,R).").unwrap().program;
        let bp = binarize_program(&p);
        let mut gen = VarGen::above(100);
        let a = generalize(&crate::syntax::parse_term("q([app(A,B,C), app(C,D,E)])").unwrap(), &mut gen).unwrap();
        let rs = unfold_depth1(&bp.program, &a, &mut gen);
        assert_eq!(rs.len(), 2);
        let shown: Vec<String> = rs.iter().map(|r| r.clause.to_string()).collect();
        assert_eq!(shown[0], "q([app([],X1,X1),app(X2,X3,X4)]) :- q([app(X2,X3,X4)]).");
        assert_eq!(
            shown[1],
            "q([app([X1|X2],X3,[X1|X4]),app(X5,X6,X7)]) :- q([app(X2,X3,X4),app(X5,X6,X7)])."
        );
        let eps = generalize(&crate::syntax::parse_term("q([])").unwrap(), &mut gen).unwrap();
        let rs = unfold_depth1(&bp.program, &eps, &mut gen);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].clause.to_string(), "q([]).");
        assert_eq!(rs[0].source_clause, 2);
    }

    #[test]
    fn sameleaves_unfolding() {
        let p = parse_program(SAMELEAVES).unwrap().program;
        let bp = binarize_program(&p);
        let mut gen = VarGen::above(100);
        let a = generalize(&crate::syntax::parse_term("q([sameleaves(T1,T2)])").unwrap(), &mut gen).unwrap();
        let rs = unfold_depth1(&bp.program, &a, &mut gen);
        let shown: Vec<String> = rs.iter().map(|r| r.clause.to_string()).collect();
        assert_eq!(
            shown,
            vec![
                "q([sameleaves(leaf(X1),leaf(X1))]) :- q([]).",
                "q([sameleaves(tree(X1,X2),tree(X3,X4))]) :- q([getleaf(X1,X2,X5,X6),getleaf(X3,X4,X5,X7),sameleaves(X7,X6)]).",
            ]
        );
    }

    #[test]
    fn undefined_predicate_warns() {
        let s = success(run("p :- r.", "p", Budget::unlimited()));
        assert_eq!(s.warnings.len(), 1);
        assert!(s.checks.all());
    }

    #[test]
    fn length_budget_stops_growth() {
        let src = "p :- p, r.\nr.";
        match run(src, "p", Budget::fixed(4, 1000)) {
            PdOutcome::Nonterm(d) => {
                assert_eq!(d.reason, NontermReason::PatternLengthExceeded);
                let lens: Vec<usize> = d.growing_chain.iter().map(|p| p.len()).collect();
                assert_eq!(lens, vec![1, 2, 3, 4, 5]);
            }
            o => panic!("{o:?}"),
        }
        match run(src, "p", Budget::fixed(1000, 3)) {
            PdOutcome::Nonterm(d) => assert_eq!(d.reason, NontermReason::IterationBudget),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn stratified_budget() {
        let p = parse_program("p :- q,p.\nq :- r,r.\nr.\n").unwrap().program;
        let b = Budget::for_program(&p, 1);
        assert!(b.from_stratification);
        assert_eq!(b.max_iterations, None);
        let np = parse_program("p :- p, r.\nr.").unwrap().program;
        assert_eq!(Budget::for_program(&np, 1), Budget::fixed(64, 10_000));
    }

    #[test]
    fn empty_query_rejected() {
        let p = parse_program("p.").unwrap().program;
        let bp = binarize_program(&p);
        assert_eq!(algorithm1(&bp, &Query::empty(), &Budget::unlimited()), Err(PdError::EmptyQuery));
    }
}
