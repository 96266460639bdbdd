//! B-stratifiability analysis.
//!
//! A program is B-stratifiable when its predicates can be layered so that
//! every body call goes to the same or a lower layer, and each clause has at
//! most one body atom from its head's layer, in the rightmost position. The
//! canonical layering used here puts every strongly connected component of
//! the predicate dependency graph at its height in the condensation (sinks
//! at 0). Predicates on the same layer in a clause's body are then exactly
//! the head's SCC-mates, so a violation found with these strata is a
//! violation under every layering.

use std::collections::{BTreeMap, HashMap};

use indexmap::{IndexMap, IndexSet};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::term::{PredSym, Program};

/// A body occurrence witnessing an edge: (clause index, body position).
pub type Occurrence = (usize, usize);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: IndexSet<PredSym>,
    /// Edges `head -> body` in first-seen order, each with its witnesses.
    pub edges: IndexMap<(PredSym, PredSym), Vec<Occurrence>>,
}

impl DependencyGraph {
    pub fn has_edge(&self, from: &PredSym, to: &PredSym) -> bool {
        self.edges.contains_key(&(from.clone(), to.clone()))
    }

    pub fn successors<'a>(&'a self, p: &'a PredSym) -> impl Iterator<Item = &'a PredSym> + 'a {
        self.edges
            .keys()
            .filter(move |(from, _)| from == p)
            .map(|(_, to)| to)
    }
}

pub fn dependency_graph(p: &Program) -> DependencyGraph {
    let mut g = DependencyGraph {
        nodes: p.predicates().into_iter().collect(),
        edges: IndexMap::new(),
    };
    for (ci, c) in p.clauses.iter().enumerate() {
        let head = c.head_pred();
        for (bi, b) in c.body.iter().enumerate() {
            let to = b.pred().expect("body atoms are callable");
            g.edges.entry((head.clone(), to)).or_default().push((ci, bi));
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stratification {
    pub stratum_of: BTreeMap<PredSym, usize>,
    pub stratum_count: usize,
}

impl Stratification {
    pub fn stratum(&self, p: &PredSym) -> Option<usize> {
        self.stratum_of.get(p).copied()
    }

    /// Predicates grouped by stratum, lowest first.
    pub fn strata(&self) -> Vec<Vec<PredSym>> {
        let mut out = vec![Vec::new(); self.stratum_count];
        for (p, &s) in &self.stratum_of {
            out[s].push(p.clone());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationReason {
    /// A single same-stratum call that is not the last body atom.
    NonRightmost,
    /// More than one same-stratum call in one body.
    MultipleSameStratum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause_index: usize,
    pub culprit_positions: Vec<usize>,
    pub reason: ViolationReason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StratifyOutcome {
    Stratified(Stratification),
    Violated(Violation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    pub outcome: StratifyOutcome,
    /// Every violating clause in textual order (empty on success).
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

struct Sccs {
    /// SCC id of each predicate.
    component: HashMap<PredSym, usize>,
    /// Height of each SCC in the condensation.
    height: Vec<usize>,
}

fn sccs(g: &DependencyGraph) -> Sccs {
    let mut dg: DiGraph<(), ()> = DiGraph::new();
    let ids: Vec<NodeIndex> = g.nodes.iter().map(|_| dg.add_node(())).collect();
    for (from, to) in g.edges.keys() {
        let a = ids[g.nodes.get_index_of(from).expect("edge endpoint is a node")];
        let b = ids[g.nodes.get_index_of(to).expect("edge endpoint is a node")];
        dg.add_edge(a, b, ());
    }
    // Tarjan emits components callee-first (reverse topological order), so
    // every successor's height is known before it is needed.
    let comps = tarjan_scc(&dg);
    let mut comp_of_node = vec![0usize; g.nodes.len()];
    for (ci, comp) in comps.iter().enumerate() {
        for n in comp {
            comp_of_node[n.index()] = ci;
        }
    }
    let mut height = vec![0usize; comps.len()];
    for (ci, comp) in comps.iter().enumerate() {
        let mut h = 0;
        for n in comp {
            for succ in dg.neighbors(*n) {
                let sc = comp_of_node[succ.index()];
                if sc != ci {
                    h = h.max(height[sc] + 1);
                }
            }
        }
        height[ci] = h;
    }
    let component = g
        .nodes
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), comp_of_node[i]))
        .collect();
    Sccs { component, height }
}

fn clause_violation(ci: usize, same: &[usize], body_len: usize) -> Option<Violation> {
    match same {
        [] => None,
        [only] if *only + 1 == body_len => None,
        [_] => Some(Violation {
            clause_index: ci,
            culprit_positions: same.to_vec(),
            reason: ViolationReason::NonRightmost,
        }),
        _ => Some(Violation {
            clause_index: ci,
            culprit_positions: same.to_vec(),
            reason: ViolationReason::MultipleSameStratum,
        }),
    }
}

/// Full analysis: canonical strata or every violating clause, plus warnings
/// for predicates that are called but never defined.
pub fn analyze(p: &Program) -> Analysis {
    let g = dependency_graph(p);
    let s = sccs(&g);
    let defined = p.defined_predicates();
    let warnings = g
        .nodes
        .iter()
        .filter(|n| !defined.contains(n))
        .map(|n| format!("predicate {n} is called but has no clauses; placed in the bottom stratum"))
        .collect();

    let mut violations = Vec::new();
    for (ci, c) in p.clauses.iter().enumerate() {
        let head_comp = s.component[&c.head_pred()];
        let same: Vec<usize> = c
            .body
            .iter()
            .enumerate()
            .filter(|(_, b)| s.component[&b.pred().expect("callable")] == head_comp)
            .map(|(i, _)| i)
            .collect();
        if let Some(v) = clause_violation(ci, &same, c.body.len()) {
            violations.push(v);
        }
    }

    let outcome = match violations.first() {
        Some(v) => StratifyOutcome::Violated(v.clone()),
        None => {
            let stratum_of: BTreeMap<PredSym, usize> = g
                .nodes
                .iter()
                .map(|n| (n.clone(), s.height[s.component[n]]))
                .collect();
            let stratum_count = stratum_of.values().max().map_or(0, |m| m + 1);
            StratifyOutcome::Stratified(Stratification {
                stratum_of,
                stratum_count,
            })
        }
    };
    Analysis {
        outcome,
        violations,
        warnings,
    }
}

/// The canonical B-stratification, or the first violating clause in
/// textual order.
pub fn b_stratify(p: &Program) -> Result<Stratification, Violation> {
    match analyze(p).outcome {
        StratifyOutcome::Stratified(s) => Ok(s),
        StratifyOutcome::Violated(v) => Err(v),
    }
}

/// Checks both layering conditions directly against the given strata,
/// independently of how they were computed.
pub fn validate_stratification(p: &Program, s: &Stratification) -> bool {
    for c in &p.clauses {
        let Some(hs) = s.stratum(&c.head_pred()) else {
            return false;
        };
        let mut same = Vec::new();
        for (i, b) in c.body.iter().enumerate() {
            let Some(bs) = b.pred().and_then(|q| s.stratum(&q)) else {
                return false;
            };
            if bs > hs {
                return false;
            }
            if bs == hs {
                same.push(i);
            }
        }
        if clause_violation(0, &same, c.body.len()).is_some() {
            return false;
        }
    }
    true
}

/// Upper bound on the number of atoms in any LD-resolvent for a query of
/// `query_len` atoms: `n * (m - 1) + l` with `n` the stratum count and `m`
/// the longest body (floored at 1).
pub fn lemma48_bound(p: &Program, s: &Stratification, query_len: usize) -> usize {
    let m = p.max_body_len().max(1);
    s.stratum_count * (m - 1) + query_len
}
