use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::PdError;
use crate::term::{PredSym, Term, VarGen};

/// The sequence of predicate symbols in a closed goal list. The empty
/// pattern stands for `q([])`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallPattern(pub Vec<PredSym>);

impl CallPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn preds(&self) -> &[PredSym] {
        &self.0
    }

    pub fn is_proper_prefix_of(&self, other: &CallPattern) -> bool {
        self.len() < other.len() && other.0.starts_with(&self.0)
    }

    /// Predicate names only, e.g. `[front, front, append]`.
    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(|p| p.name.to_string()).collect()
    }
}

impl fmt::Display for CallPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

impl Serialize for CallPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|p| p.to_string()))
    }
}

/// An atom `q([p1(X..), ..., pn(X..)])` with every argument position a
/// distinct fresh variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedAtom {
    pub atom: Term,
    pub pattern: CallPattern,
}

/// The goals of a continuation atom `q([G1, ..., Gn])`.
pub(crate) fn goal_list(a: &Term) -> Result<Vec<&Term>, PdError> {
    let [list] = a.args() else {
        return Err(PdError::NotContinuationAtom(a.to_string()));
    };
    list.closed_list()
        .ok_or_else(|| PdError::OpenContinuation(a.to_string()))
}

pub fn pattern_of(a: &Term) -> Result<CallPattern, PdError> {
    goal_list(a)?
        .into_iter()
        .map(|g| g.pred().ok_or_else(|| PdError::NonCallableGoal(a.to_string())))
        .collect::<Result<Vec<_>, _>>()
        .map(CallPattern)
}

/// Replaces every argument of every goal in the continuation by a fresh
/// variable, keeping goal functors and the list spine.
pub fn generalize(a: &Term, gen: &mut VarGen) -> Result<GeneralizedAtom, PdError> {
    let pattern = pattern_of(a)?;
    let name: Arc<str> = Arc::from("X");
    let goals = pattern
        .0
        .iter()
        .map(|p| {
            let args = (0..p.arity).map(|_| Term::Var(gen.fresh(&name))).collect();
            Term::app_shared(p.name.clone(), args)
        })
        .collect::<Vec<_>>();
    let functor = a.functor().expect("continuation atom is compound");
    Ok(GeneralizedAtom {
        atom: Term::app(functor, vec![Term::list(goals)]),
        pattern,
    })
}
