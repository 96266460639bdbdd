//! Runs a program, its binarization and its partial deduction on the same
//! query and compares answers and interpreter metrics.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{Answer, Engine, Limits, Metrics, RunResult, RunStatus};
use crate::pd::{NontermDiagnosis, PdError};
use crate::pipeline::{transform, TransformOptions, TransformOutcome};
use crate::syntax::print_clause;
use crate::term::{Clause, Program, Query, Term};

/// Canonical text of `q` instantiated by `a`, variables renamed by first
/// occurrence.
fn instance_key(a: &Answer, q: &Query) -> String {
    let atoms: Vec<Term> = q.atoms.iter().map(|t| a.bindings.apply(t)).collect();
    print_clause(&Clause::new(Term::app("$answer", atoms), Vec::new()))
}

fn instance_keys(answers: &[Answer], q: &Query) -> Vec<String> {
    let mut keys: Vec<String> = answers.iter().map(|a| instance_key(a, q)).collect();
    keys.sort_unstable();
    keys
}

/// Multiset equality of query instances up to variable renaming.
pub fn answers_equal_mod_renaming(a1: &[Answer], a2: &[Answer], q1: &Query, q2: &Query) -> bool {
    a1.len() == a2.len() && instance_keys(a1, q1) == instance_keys(a2, q2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Original,
    Binarized,
    Transformed,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRun {
    pub stage: Stage,
    #[serde(skip)]
    pub program: Program,
    pub query: String,
    #[serde(serialize_with = "status_str")]
    pub status: RunStatus,
    pub answer_count: usize,
    pub metrics: Metrics,
    #[serde(skip)]
    pub answers: Vec<Answer>,
    pub wall_ms: f64,
}

fn status_str<S: serde::Serializer>(s: &RunStatus, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s.as_str())
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub left: Stage,
    pub right: Stage,
    /// `None` unless both runs were exhausted.
    pub equal: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub query: String,
    pub stages: Vec<StageRun>,
    pub answers_equal: Vec<PairCheck>,
    /// Set when partial deduction stopped on its budget.
    pub transformed_absent: Option<NontermDiagnosis>,
}

impl EquivalenceReport {
    pub fn stage(&self, s: Stage) -> Option<&StageRun> {
        self.stages.iter().find(|r| r.stage == s)
    }

    /// Some compared pair disagreed.
    pub fn mismatch(&self) -> bool {
        self.answers_equal.iter().any(|p| p.equal == Some(false))
    }

    /// Every pair was compared and agreed.
    pub fn all_equal(&self) -> bool {
        self.answers_equal.iter().all(|p| p.equal == Some(true))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub transform: TransformOptions,
    pub occurs_check: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            transform: TransformOptions::default(),
            occurs_check: true,
        }
    }
}

fn run_stage(stage: Stage, p: Program, q: &Query, lim: &Limits, occurs: bool) -> StageRun {
    let start = Instant::now();
    let RunResult {
        answers,
        metrics,
        status,
    } = Engine::new(&p).with_occurs_check(occurs).solve(q, lim);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    StageRun {
        stage,
        program: p,
        query: q.to_string(),
        status,
        answer_count: answers.len(),
        metrics,
        answers,
        wall_ms,
    }
}

/// Runs the original program, its binarization and, when partial deduction
/// terminates, the transformed program. Each stage's answers are applied to
/// the original query, which shares its variables with the stage queries.
pub fn verify_pipeline(p: &Program, q: &Query, lim: &Limits, opts: &VerifyOptions) -> Result<EquivalenceReport, PdError> {
    let run = transform(p, q, &opts.transform)?;
    let bq = Query::new(vec![run.binarized.binarize_query(q)]);
    let mut stages = vec![
        run_stage(Stage::Original, p.clone(), q, lim, opts.occurs_check),
        run_stage(Stage::Binarized, run.binarized.program.clone(), &bq, lim, opts.occurs_check),
    ];
    let mut transformed_absent = None;
    match run.outcome {
        TransformOutcome::Done(t) => {
            stages.push(run_stage(Stage::Transformed, t.program, &t.query, lim, opts.occurs_check));
        }
        TransformOutcome::Nonterm(d) => transformed_absent = Some(d),
    }
    let answers_equal = stages[1..]
        .iter()
        .map(|s| {
            let base = &stages[0];
            let both = base.status == RunStatus::Exhausted && s.status == RunStatus::Exhausted;
            PairCheck {
                left: base.stage,
                right: s.stage,
                equal: both.then(|| answers_equal_mod_renaming(&base.answers, &s.answers, q, q)),
            }
        })
        .collect();
    Ok(EquivalenceReport {
        query: q.to_string(),
        stages,
        answers_equal,
        transformed_absent,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Ratios {
    pub resolution_steps: Option<f64>,
    pub head_attempts: Option<f64>,
    pub max_goal_len: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Both runs explored the same search space: both exhausted, or both cut
/// at the same number of solutions.
fn comparable(a: &StageRun, b: &StageRun) -> bool {
    match (a.status, b.status) {
        (RunStatus::Exhausted, RunStatus::Exhausted) => true,
        (RunStatus::SolutionLimit, RunStatus::SolutionLimit) => a.answer_count == b.answer_count,
        _ => false,
    }
}

fn ratios(stage: Option<&StageRun>, base: Option<&StageRun>) -> Ratios {
    match (stage, base) {
        (Some(s), Some(b)) if comparable(s, b) => Ratios {
            resolution_steps: ratio(s.metrics.resolution_steps, b.metrics.resolution_steps),
            head_attempts: ratio(s.metrics.head_attempts, b.metrics.head_attempts),
            max_goal_len: ratio(s.metrics.max_goal_len as u64, b.metrics.max_goal_len as u64),
        },
        _ => Ratios::default(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub program: String,
    pub query_id: usize,
    pub query: String,
    pub original: Option<StageRun>,
    pub binarized: Option<StageRun>,
    pub transformed: Option<StageRun>,
    pub binarized_ratio: Ratios,
    pub transformed_ratio: Ratios,
    pub answers_equal: Option<bool>,
    pub error: Option<String>,
}

/// One benchmark input: program name, query index, program, query.
pub type BenchCase = (String, usize, Program, Query);

fn bench_row(case: &BenchCase, lim: &Limits, opts: &VerifyOptions) -> BenchRow {
    let (name, query_id, p, q) = case;
    let mut row = BenchRow {
        program: name.clone(),
        query_id: *query_id,
        query: q.to_string(),
        original: None,
        binarized: None,
        transformed: None,
        binarized_ratio: Ratios::default(),
        transformed_ratio: Ratios::default(),
        answers_equal: None,
        error: None,
    };
    match verify_pipeline(p, q, lim, opts) {
        Err(e) => row.error = Some(e.to_string()),
        Ok(report) => {
            row.answers_equal = if report.mismatch() {
                Some(false)
            } else if report.all_equal() {
                Some(true)
            } else {
                None
            };
            if let Some(d) = &report.transformed_absent {
                row.error = Some(format!(
                    "partial deduction stopped: {:?} at {}",
                    d.reason, d.budget
                ));
            }
            for s in report.stages {
                match s.stage {
                    Stage::Original => row.original = Some(s),
                    Stage::Binarized => row.binarized = Some(s),
                    Stage::Transformed => row.transformed = Some(s),
                }
            }
            row.binarized_ratio = ratios(row.binarized.as_ref(), row.original.as_ref());
            row.transformed_ratio = ratios(row.transformed.as_ref(), row.original.as_ref());
        }
    }
    row
}

/// One row per case, in input order. Rows run on `jobs` threads.
pub fn bench(cases: &[BenchCase], lim: &Limits, opts: &VerifyOptions, jobs: usize) -> Vec<BenchRow> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| cases.par_iter().map(|c| bench_row(c, lim, opts)).collect())
}
