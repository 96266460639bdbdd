//! binarize, then partial deduction, then optional cleanup. The CLI and the
//! verifier both go through [`transform`].

use serde::Serialize;

use crate::binarize::{binarize_program, BinarizedProgram};
use crate::pd::{algorithm1, base_name, Budget, CallPattern, NontermDiagnosis, PdError, PdOutcome, PdSuccess};
use crate::post_opt::{optimize, OptReport};
use crate::term::{PredSym, Program, Query};

/// User overrides applied on top of [`Budget::for_program`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BudgetOverrides {
    pub max_pattern_len: Option<usize>,
    pub max_iterations: Option<usize>,
}

impl BudgetOverrides {
    pub fn budget_for(&self, p: &Program, query_len: usize) -> Budget {
        let mut b = Budget::for_program(p, query_len);
        if let Some(n) = self.max_pattern_len {
            b.max_pattern_len = Some(n);
        }
        if let Some(n) = self.max_iterations {
            b.max_iterations = Some(n);
        }
        b
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TransformOptions {
    pub budget: BudgetOverrides,
    pub optimize: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transformed {
    pub pd: PdSuccess,
    /// The program to run: the partial deduction output, cleaned up when
    /// requested.
    pub program: Program,
    pub query: Query,
    pub opt: Option<OptReport>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformOutcome {
    Done(Box<Transformed>),
    Nonterm(NontermDiagnosis),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformRun {
    pub binarized: BinarizedProgram,
    pub budget: Budget,
    pub outcome: TransformOutcome,
}

fn eps_pred(pd: &PdSuccess, cont: &PredSym) -> PredSym {
    pd.rename_table
        .get(&CallPattern::default())
        .cloned()
        .unwrap_or_else(|| PredSym::new(&base_name(&cont.name, &CallPattern::default()), 0))
}

pub fn transform(p: &Program, q: &Query, opts: &TransformOptions) -> Result<TransformRun, PdError> {
    let binarized = binarize_program(p);
    let budget = opts.budget.budget_for(p, q.len());
    let outcome = match algorithm1(&binarized, q, &budget)? {
        PdOutcome::Nonterm(d) => TransformOutcome::Nonterm(d),
        PdOutcome::Success(pd) => {
            let query = pd.query();
            let (program, opt) = if opts.optimize {
                let entry = pd.renamed_query.pred().expect("renamed query is callable");
                let (prog, report) = optimize(&pd.new_prog, &entry, &eps_pred(&pd, &binarized.cont_pred));
                (prog, Some(report))
            } else {
                (pd.new_prog.clone(), None)
            };
            TransformOutcome::Done(Box::new(Transformed {
                pd: *pd,
                program,
                query,
                opt,
            }))
        }
    };
    Ok(TransformRun {
        binarized,
        budget,
        outcome,
    })
}

#[derive(Serialize)]
struct RenameRow<'a> {
    pattern: &'a CallPattern,
    predicate: String,
}

/// The `--report` document for `transform`.
pub fn transform_report(run: &TransformRun) -> serde_json::Value {
    let budget = serde_json::json!({
        "max_pattern_len": run.budget.max_pattern_len,
        "max_iterations": run.budget.max_iterations,
        "from_stratification": run.budget.from_stratification,
    });
    match &run.outcome {
        TransformOutcome::Nonterm(d) => serde_json::json!({
            "status": "nonterminating",
            "budget": budget,
            "diagnosis": d,
        }),
        TransformOutcome::Done(t) => {
            let renames: Vec<RenameRow> = t
                .pd
                .rename_table
                .iter()
                .map(|(pattern, p)| RenameRow {
                    pattern,
                    predicate: p.to_string(),
                })
                .collect();
            serde_json::json!({
                "status": "success",
                "budget": budget,
                "iterations": t.pd.iterations,
                "s_patterns": t.pd.s_set.iter().map(|g| &g.pattern).collect::<Vec<_>>(),
                "rename_table": renames,
                "renamed_query": t.pd.renamed_query.to_string(),
                "checks": t.pd.checks,
                "warnings": t.pd.warnings,
                "optimization": t.opt,
                "clauses": t.program.len(),
            })
        }
    }
}
