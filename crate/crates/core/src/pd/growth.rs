//! Recovering a growing chain of call patterns from the enqueue history.

use std::collections::HashMap;
use std::hash::Hash;

use super::generalize::CallPattern;
use super::{NontermDiagnosis, NontermReason};
use crate::term::PredSym;

/// Ends at the longest pattern in `history` (earliest on ties) and walks
/// back through the longest proper prefix enqueued before the current
/// element, so each step is both earlier and strictly shorter.
pub fn growing_chain(history: &[CallPattern]) -> Vec<CallPattern> {
    let seqs: Vec<&[PredSym]> = history.iter().map(|p| p.preds()).collect();
    chain_indices(&seqs).into_iter().map(|i| history[i].clone()).collect()
}

/// Positions in `history` of the chain described at [`growing_chain`].
pub(crate) fn chain_indices<T: Hash + Eq>(history: &[&[T]]) -> Vec<usize> {
    let Some((mut at, _)) = history
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, p)| p.len())
    else {
        return Vec::new();
    };
    let mut first: HashMap<&[T], usize> = HashMap::new();
    for (i, p) in history.iter().enumerate() {
        first.entry(*p).or_insert(i);
    }
    let mut chain = vec![at];
    loop {
        let cur = history[at];
        let prev = (0..cur.len())
            .rev()
            .find_map(|k| first.get(&cur[..k]).copied().filter(|&i| i < at));
        match prev {
            Some(i) => {
                at = i;
                chain.push(i);
            }
            None => break,
        }
    }
    chain.reverse();
    chain
}

/// A diagnosis when some enqueued pattern is longer than `bound`.
pub fn detect_growth(history: &[CallPattern], bound: usize) -> Option<NontermDiagnosis> {
    history.iter().any(|p| p.len() > bound).then(|| NontermDiagnosis {
        growing_chain: growing_chain(history),
        budget: bound,
        reason: NontermReason::PatternLengthExceeded,
        iterations: 0,
        enqueued: history.len(),
    })
}
