//! Depth-first LD-resolution: leftmost selection, clauses tried in textual
//! order, chronological backtracking.
//!
//! The machine keeps its own binding store, trail and choicepoint stack, so
//! neither deep derivations nor deep backtracking consume host stack. The
//! resolvent is a persistent list of goals; its length is what
//! `max_goal_len` reports.

use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use serde::Serialize;

use crate::term::{PredSym, Program, Query, Substitution, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: u64,
    pub max_solutions: usize,
    pub max_goal_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 1_000_000,
            max_solutions: 16,
            max_goal_depth: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("limit `{0}` must be at least 1")]
pub struct LimitError(pub &'static str);

impl Limits {
    pub fn new(max_steps: u64, max_solutions: usize, max_goal_depth: usize) -> Result<Self, LimitError> {
        if max_steps == 0 {
            return Err(LimitError("max_steps"));
        }
        if max_solutions == 0 {
            return Err(LimitError("max_solutions"));
        }
        if max_goal_depth == 0 {
            return Err(LimitError("max_goal_depth"));
        }
        Ok(Limits {
            max_steps,
            max_solutions,
            max_goal_depth,
        })
    }
}

/// A computed answer, restricted to the query's variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub bindings: Substitution,
    /// Length in resolution steps of the derivation that produced it.
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub resolution_steps: u64,
    pub head_attempts: u64,
    pub max_goal_len: usize,
    pub solutions: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Exhausted,
    StepLimit,
    SolutionLimit,
    DepthLimit,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Exhausted => "Exhausted",
            RunStatus::StepLimit => "StepLimit",
            RunStatus::SolutionLimit => "SolutionLimit",
            RunStatus::DepthLimit => "DepthLimit",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub answers: Vec<Answer>,
    pub metrics: Metrics,
    pub status: RunStatus,
}

impl RunResult {
    /// Metrics plus status, with the fixed key names used in reports.
    pub fn metrics_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self.metrics).expect("metrics serialize");
        v["status"] = self.status.as_str().into();
        v
    }
}

/// Clause body/head with variables numbered from zero; ground subterms are
/// shared rather than copied on every renaming.
enum Tmpl {
    Var(u32),
    Ground(Term),
    App(Arc<str>, Box<[Tmpl]>),
}

struct Compiled {
    head: Tmpl,
    body: Vec<Tmpl>,
    nvars: u32,
    /// No variable repeats in the head. Unifying a linear term with a
    /// variable-disjoint one cannot build a cycle, so the occurs check is
    /// skipped entirely for such heads.
    linear_head: bool,
}

fn compile_term(t: &Term, vars: &mut HashMap<Var, u32>) -> Tmpl {
    if t.is_ground() {
        return Tmpl::Ground(t.clone());
    }
    match t {
        Term::Var(v) => {
            let n = vars.len() as u32;
            Tmpl::Var(*vars.entry(v.clone()).or_insert(n))
        }
        Term::App { functor, args } => Tmpl::App(
            functor.clone(),
            args.iter().map(|a| compile_term(a, vars)).collect(),
        ),
    }
}

struct GoalNode {
    goal: Term,
    next: Option<Rc<GoalNode>>,
    len: usize,
}

struct Choice {
    node: Rc<GoalNode>,
    alt: usize,
    depth: usize,
    trail_len: usize,
    var_len: usize,
}

#[derive(Clone, Copy)]
enum OccursCheck {
    Off,
    /// Slots at or above the given one are fresh head variables. As long as
    /// no older slot has been bound to a compound term, the goal side of
    /// every pair mentions only older slots, so a fresh slot cannot occur in
    /// what it is bound to. The first such binding switches to full checks.
    FreshFrom(usize),
}

enum Next {
    Resolve(Rc<GoalNode>, usize, usize),
    Success(usize),
    Backtrack,
}

/// An interpreter for one program. Independent engines share nothing.
pub struct Engine {
    index: HashMap<PredSym, Vec<Compiled>>,
    occurs_check: bool,
    slot_name: Arc<str>,
}

impl Engine {
    pub fn new(program: &Program) -> Self {
        let mut index: HashMap<PredSym, Vec<Compiled>> = HashMap::new();
        for c in &program.clauses {
            let mut vars = HashMap::new();
            let head = compile_term(&c.head, &mut vars);
            let linear_head = vars.keys().all(|v| c.head.count_occurrences(v) == 1);
            let body = c.body.iter().map(|b| compile_term(b, &mut vars)).collect();
            index.entry(c.head_pred()).or_default().push(Compiled {
                head,
                body,
                nvars: vars.len() as u32,
                linear_head,
            });
        }
        Engine {
            index,
            occurs_check: true,
            slot_name: Arc::from("_E"),
        }
    }

    pub fn with_occurs_check(mut self, on: bool) -> Self {
        self.occurs_check = on;
        self
    }

    pub fn solve(&self, query: &Query, limits: &Limits) -> RunResult {
        Machine::new(self).run(query, limits)
    }
}

struct Machine<'e> {
    engine: &'e Engine,
    bindings: Vec<Option<Term>>,
    trail: Vec<usize>,
}

impl<'e> Machine<'e> {
    fn new(engine: &'e Engine) -> Self {
        Machine {
            engine,
            bindings: Vec::new(),
            trail: Vec::new(),
        }
    }

    fn slot(&self, i: usize) -> Term {
        Term::Var(Var::with_index(self.engine.slot_name.clone(), i as u32))
    }

    fn instantiate(&self, t: &Tmpl, base: usize) -> Term {
        match t {
            Tmpl::Var(i) => self.slot(base + *i as usize),
            Tmpl::Ground(g) => g.clone(),
            Tmpl::App(f, args) => Term::App {
                functor: f.clone(),
                args: args.iter().map(|a| self.instantiate(a, base)).collect(),
            },
        }
    }

    fn deref<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match &self.bindings[v.index as usize] {
                Some(bound) => t = bound,
                None => break,
            }
        }
        t
    }

    fn occurs(&self, slot: u32, t: &Term) -> bool {
        let mut stack = vec![t.clone()];
        while let Some(t) = stack.pop() {
            match self.deref(&t) {
                Term::Var(v) => {
                    if v.index == slot {
                        return true;
                    }
                }
                Term::App { args, .. } => stack.extend(args.iter().cloned()),
            }
        }
        false
    }

    fn bind(&mut self, slot: u32, t: Term) {
        self.bindings[slot as usize] = Some(t);
        self.trail.push(slot as usize);
    }

    fn unify(&mut self, a: Term, b: Term, check: OccursCheck) -> bool {
        let mut fresh_from = match check {
            OccursCheck::Off => None,
            OccursCheck::FreshFrom(base) => Some(base),
        };
        let checking = !matches!(check, OccursCheck::Off);
        let mut stack = vec![(a, b)];
        while let Some((x, y)) = stack.pop() {
            let x = self.deref(&x).clone();
            let y = self.deref(&y).clone();
            match (&x, &y) {
                (Term::Var(v), Term::Var(w)) if v.index == w.index => {}
                (Term::Var(v), Term::Var(w)) => {
                    // Bind the younger variable to the older one.
                    if v.index > w.index {
                        self.bind(v.index, y.clone());
                    } else {
                        self.bind(w.index, x.clone());
                    }
                }
                (Term::Var(v), other) | (other, Term::Var(v)) => {
                    let slot = v.index as usize;
                    let fresh = fresh_from.is_some_and(|base| slot >= base);
                    if checking && !fresh {
                        if self.occurs(v.index, other) {
                            return false;
                        }
                        fresh_from = None;
                    }
                    self.bind(v.index, other.clone());
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
                    if xs.len() != ys.len() || f != g {
                        return false;
                    }
                    stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                }
            }
        }
        true
    }

    fn undo(&mut self, trail_len: usize, var_len: usize) {
        while self.trail.len() > trail_len {
            let slot = self.trail.pop().expect("trail entry");
            if slot < self.bindings.len() {
                self.bindings[slot] = None;
            }
        }
        self.bindings.truncate(var_len);
    }

    /// Fully dereferenced copy of `t`. Unbound slots owned by query variables
    /// come back as those variables; other unbound slots as `_E` variables.
    fn resolve(&self, t: &Term, owners: &HashMap<u32, Var>, visiting: &mut Vec<u32>) -> Term {
        match t {
            Term::Var(v) => match &self.bindings[v.index as usize] {
                Some(bound) if !visiting.contains(&v.index) => {
                    visiting.push(v.index);
                    let r = self.resolve(bound, owners, visiting);
                    visiting.pop();
                    r
                }
                // A cyclic binding (occurs check off) is cut at the back edge.
                Some(_) => Term::Var(Var::with_index(self.engine.slot_name.clone(), v.index + 1)),
                None => match owners.get(&v.index) {
                    Some(q) => Term::Var(q.clone()),
                    None => Term::Var(Var::with_index(self.engine.slot_name.clone(), v.index + 1)),
                },
            },
            Term::App { functor, args } => {
                if args.is_empty() {
                    return t.clone();
                }
                Term::App {
                    functor: functor.clone(),
                    args: args.iter().map(|a| self.resolve(a, owners, visiting)).collect(),
                }
            }
        }
    }

    fn run(mut self, query: &Query, limits: &Limits) -> RunResult {
        let qvars = query.vars();
        let slot_of: HashMap<Var, Var> = qvars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), Var::with_index(self.engine.slot_name.clone(), i as u32)))
            .collect();
        let owners: HashMap<u32, Var> = qvars
            .iter()
            .enumerate()
            .map(|(i, v)| (i as u32, v.clone()))
            .collect();
        self.bindings = vec![None; qvars.len()];

        let mut goals: Option<Rc<GoalNode>> = None;
        for (i, a) in query.atoms.iter().enumerate().rev() {
            goals = Some(Rc::new(GoalNode {
                goal: a.map_vars(&slot_of),
                next: goals,
                len: query.atoms.len() - i,
            }));
        }

        let mut metrics = Metrics {
            max_goal_len: query.atoms.len(),
            ..Metrics::default()
        };
        let mut answers = Vec::new();
        let mut choices: Vec<Choice> = Vec::new();
        let mut next = match goals {
            Some(n) => Next::Resolve(n, 0, 0),
            None => Next::Success(0),
        };
        let status = if query.atoms.len() > limits.max_goal_depth {
            RunStatus::DepthLimit
        } else {
            loop {
                match next {
                    Next::Resolve(node, start, depth) => {
                        if metrics.resolution_steps >= limits.max_steps {
                            break RunStatus::StepLimit;
                        }
                        let goal = self.deref(&node.goal).clone();
                        let Some(pred) = goal.pred() else {
                            next = Next::Backtrack;
                            continue;
                        };
                        let engine = self.engine;
                        let clauses: &[Compiled] = engine.index.get(&pred).map_or(&[], Vec::as_slice);
                        let (trail_len, var_len) = (self.trail.len(), self.bindings.len());
                        let mut chosen = None;
                        for (i, c) in clauses.iter().enumerate().skip(start) {
                            metrics.head_attempts += 1;
                            let base = self.bindings.len();
                            self.bindings.resize(base + c.nvars as usize, None);
                            let head = self.instantiate(&c.head, base);
                            let check = if engine.occurs_check && !c.linear_head {
                                OccursCheck::FreshFrom(base)
                            } else {
                                OccursCheck::Off
                            };
                            if self.unify(goal.clone(), head, check) {
                                chosen = Some((i, base));
                                break;
                            }
                            self.undo(trail_len, var_len);
                        }
                        let Some((i, base)) = chosen else {
                            next = Next::Backtrack;
                            continue;
                        };
                        if i + 1 < clauses.len() {
                            choices.push(Choice {
                                node: node.clone(),
                                alt: i + 1,
                                depth,
                                trail_len,
                                var_len,
                            });
                        }
                        metrics.resolution_steps += 1;
                        let body = &clauses[i].body;
                        let mut rest = node.next.clone();
                        let mut len = node.len - 1;
                        for b in body.iter().rev() {
                            len += 1;
                            rest = Some(Rc::new(GoalNode {
                                goal: self.instantiate(b, base),
                                next: rest,
                                len,
                            }));
                        }
                        metrics.max_goal_len = metrics.max_goal_len.max(len);
                        if len > limits.max_goal_depth {
                            break RunStatus::DepthLimit;
                        }
                        next = match rest {
                            Some(n) => Next::Resolve(n, 0, depth + 1),
                            None => Next::Success(depth + 1),
                        };
                    }
                    Next::Success(depth) => {
                        let mut bindings = Vec::new();
                        for (i, v) in qvars.iter().enumerate() {
                            let t = self.resolve(&self.slot(i), &owners, &mut Vec::new());
                            if t.as_var() != Some(v) {
                                bindings.push((v.clone(), t));
                            }
                        }
                        let bindings = Substitution::from_bindings(bindings)
                            .expect("resolved answer bindings are acyclic");
                        answers.push(Answer {
                            bindings,
                            steps: depth,
                        });
                        metrics.solutions += 1;
                        if metrics.solutions >= limits.max_solutions {
                            break if choices.is_empty() {
                                RunStatus::Exhausted
                            } else {
                                RunStatus::SolutionLimit
                            };
                        }
                        next = Next::Backtrack;
                    }
                    Next::Backtrack => {
                        let Some(c) = choices.pop() else {
                            break RunStatus::Exhausted;
                        };
                        self.undo(c.trail_len, c.var_len);
                        next = Next::Resolve(c.node, c.alt, c.depth);
                    }
                }
            }
        };
        RunResult {
            answers,
            metrics,
            status,
        }
    }
}

/// Runs `query` against `program` with the occurs check on.
pub fn solve(program: &Program, query: &Query, limits: &Limits) -> RunResult {
    Engine::new(program).solve(query, limits)
}

/// Length of the first successful derivation in search order.
pub fn successful_derivation_length(program: &Program, query: &Query, limits: &Limits) -> Option<usize> {
    let lim = Limits {
        max_solutions: 1,
        ..*limits
    };
    solve(program, query, &lim).answers.first().map(|a| a.steps)
}
