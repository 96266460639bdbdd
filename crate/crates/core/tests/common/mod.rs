//! Seeded random definite programs for property and acceptance tests.
#![allow(dead_code)]

use binpd::term::{Clause, Program, Query, Term};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// At most one body atom, calls unrestricted.
    Binary,
    /// Bodies only call predicates declared earlier.
    NonRecursive,
    /// Anything, including mutual recursion.
    General,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const CONSTS: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

fn term(r: &mut impl Rng, depth: usize) -> Term {
    match r.gen_range(0..10) {
        0..=3 => Term::var(VARS.choose(r).unwrap()),
        4..=6 => Term::atom(CONSTS.choose(r).unwrap()),
        7 if depth > 0 => Term::cons(term(r, depth - 1), term(r, depth - 1)),
        _ if depth > 0 => Term::app("f", vec![term(r, depth - 1)]),
        _ => Term::nil(),
    }
}

fn ground(r: &mut impl Rng, depth: usize) -> Term {
    match r.gen_range(0..6) {
        0..=3 => Term::atom(CONSTS.choose(r).unwrap()),
        4 if depth > 0 => Term::app("f", vec![ground(r, depth - 1)]),
        _ => Term::nil(),
    }
}

fn atom(r: &mut impl Rng, name: &str, arity: usize) -> Term {
    Term::app(name, (0..arity).map(|_| term(r, 2)).collect())
}

/// Predicate `p{i}` has arity `arities[i]`.
fn arities(r: &mut impl Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| r.gen_range(0..=2)).collect()
}

pub fn random_program(r: &mut impl Rng, shape: Shape) -> Program {
    let n = r.gen_range(1..=5);
    let ar = arities(r, n);
    let mut clauses = Vec::new();
    for (i, &a) in ar.iter().enumerate() {
        for _ in 0..r.gen_range(1..=3) {
            let head = atom(r, &format!("p{i}"), a);
            let max_body = match shape {
                Shape::Binary => 1,
                Shape::NonRecursive if i == 0 => 0,
                _ => 3,
            };
            let body = (0..r.gen_range(0..=max_body))
                .map(|_| {
                    let j = match shape {
                        Shape::NonRecursive => r.gen_range(0..i),
                        _ => r.gen_range(0..n),
                    };
                    atom(r, &format!("p{j}"), ar[j])
                })
                .collect();
            clauses.push(Clause::new(head, body));
        }
    }
    clauses.shuffle(r);
    Program::new(clauses)
}

/// A query calling one defined predicate, arguments ground or variables.
pub fn random_query(r: &mut impl Rng, p: &Program) -> Query {
    let preds = p.predicates();
    let pred = preds.choose(r).unwrap();
    let args = (0..pred.arity)
        .map(|k| if r.gen_bool(0.5) { ground(r, 1) } else { Term::var(VARS[k]) })
        .collect();
    Query::new(vec![Term::app(&pred.name, args)])
}
