use std::collections::HashSet;

use indexmap::IndexMap;
use serde::Serialize;

use super::generalize::{goal_list, pattern_of, CallPattern};
use super::PdError;
use crate::term::{PredSym, Term};

/// Maps each call pattern to the predicate that replaces its continuation
/// atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RenameTable {
    map: IndexMap<CallPattern, PredSym>,
}

#[derive(Serialize)]
struct Row<'a> {
    pattern: &'a CallPattern,
    predicate: &'a PredSym,
}

impl Serialize for RenameTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            self.map
                .iter()
                .map(|(pattern, predicate)| Row { pattern, predicate }),
        )
    }
}

/// `q_p1_..._pn`, or `q_eps` for the empty pattern.
pub fn base_name(prefix: &str, pattern: &CallPattern) -> String {
    if pattern.is_empty() {
        return format!("{prefix}_eps");
    }
    let mut name = prefix.to_string();
    for p in pattern.preds() {
        name.push('_');
        name.push_str(&p.name);
    }
    name
}

impl RenameTable {
    /// Assigns names in the given order. A name already used by a source
    /// predicate or an earlier pattern gets a `/k` suffix.
    pub fn build<'a>(
        prefix: &str,
        patterns: impl IntoIterator<Item = &'a CallPattern>,
        reserved: impl IntoIterator<Item = String>,
    ) -> Self {
        let mut used: HashSet<String> = reserved.into_iter().collect();
        let mut map = IndexMap::new();
        for pattern in patterns {
            let base = base_name(prefix, pattern);
            let mut name = base.clone();
            let mut k = 1;
            while used.contains(&name) {
                name = format!("{base}/{k}");
                k += 1;
            }
            used.insert(name.clone());
            let arity = pattern.preds().iter().map(|p| p.arity).sum();
            map.insert(pattern.clone(), PredSym::new(&name, arity));
        }
        RenameTable { map }
    }

    pub fn get(&self, pattern: &CallPattern) -> Option<&PredSym> {
        self.map.get(pattern)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CallPattern, &PredSym)> {
        self.map.iter()
    }

    pub fn predicates(&self) -> impl Iterator<Item = &PredSym> {
        self.map.values()
    }
}

/// `q([p1(t1,..), ..., pn(.., tk)])` becomes `q_p1_.._pn(t1, .., tk)`.
pub fn rename_atom(a: &Term, table: &RenameTable) -> Result<Term, PdError> {
    let pattern = pattern_of(a)?;
    let pred = table
        .get(&pattern)
        .ok_or_else(|| PdError::UnknownPattern(pattern.to_string()))?;
    let args: Vec<Term> = goal_list(a)?
        .into_iter()
        .flat_map(|g| g.args().iter().cloned())
        .collect();
    debug_assert_eq!(args.len(), pred.arity);
    Ok(Term::app_shared(pred.name.clone(), args))
}
