use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use binpd::binarize::binarize_program;
use binpd::corpus::{load_corpus, parse_queries, CorpusError};
use binpd::engine::{Engine, Limits, RunResult};
use binpd::pd::{NontermDiagnosis, NontermReason};
use binpd::pipeline::{transform, transform_report, BudgetOverrides, TransformOptions, TransformOutcome};
use binpd::stratify::{analyze, lemma48_bound, StratifyOutcome, ViolationReason};
use binpd::syntax::{parse_program, parse_query, print_program};
use binpd::term::{Program, Query, Term};
use binpd::verify::{bench, verify_pipeline, BenchCase, BenchRow, EquivalenceReport, VerifyOptions};

const EXIT_NOT_STRATIFIABLE: u8 = 1;
const EXIT_NONTERM: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_MISMATCH: u8 = 4;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 66;

#[derive(Parser)]
#[command(name = "binpd", version, about = "Binarize definite logic programs and specialize them by partial deduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide B-stratifiability and print the strata or the offending clause.
    Check {
        file: PathBuf,
        /// Query whose length enters the resolvent bound (default: one atom).
        #[arg(long)]
        query: Option<String>,
        #[arg(long)]
        json: bool,
        /// Exit with status 1 when the program is not B-stratifiable.
        #[arg(long)]
        strict: bool,
    },
    /// Print the binarized program, terminator clause last.
    Binarize {
        file: PathBuf,
        /// Also print the binarized form of this query as a comment.
        #[arg(long)]
        query: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Binarize, then partially deduce with respect to a query.
    Transform {
        file: PathBuf,
        #[arg(long)]
        query: String,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Fold the empty-continuation fact and drop unreachable clauses.
        #[arg(long)]
        optimize: bool,
        /// Write a JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the report on stdout instead of the program.
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve a query with the LD-resolution interpreter.
    Run {
        file: PathBuf,
        #[arg(long)]
        query: String,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        json: bool,
    },
    /// Compare answers of the original, binarized and transformed programs.
    Verify {
        file: PathBuf,
        /// Queries to check; defaults to the sibling `.queries` file.
        #[arg(long)]
        query: Vec<String>,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        optimize: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run every program/query pair of a corpus through all three stages.
    Bench {
        /// Corpus directory of `name.pl` files with sibling `name.queries`.
        #[arg(long, env = "BINPD_CORPUS")]
        corpus: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        json: bool,
        /// Write the JSON rows here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct LimitArgs {
    #[arg(long, default_value_t = Limits::default().max_steps)]
    max_steps: u64,
    #[arg(long, default_value_t = Limits::default().max_solutions)]
    max_solutions: usize,
    #[arg(long)]
    no_occurs_check: bool,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    #[arg(long)]
    max_pattern_len: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl BudgetArgs {
    fn overrides(self) -> BudgetOverrides {
        BudgetOverrides {
            max_pattern_len: self.max_pattern_len,
            max_iterations: self.max_iterations,
        }
    }
}

/// A diagnostic and the status to exit with.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<u8, Failure>;

impl LimitArgs {
    fn limits(self) -> Result<Limits, Failure> {
        Limits::new(self.max_steps, self.max_solutions, Limits::default().max_goal_depth)
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    parse_program(&text)
        .map(|u| u.program)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}:{e}", path.display())))
}

fn load_query(text: &str) -> Result<Query, Failure> {
    let q = parse_query(text).map_err(|e| Failure::new(EXIT_PARSE, format!("query: {e}")))?;
    if q.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "query is empty"));
    }
    Ok(q)
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn reason_text(r: ViolationReason) -> &'static str {
    match r {
        ViolationReason::NonRightmost => "same-stratum call is not the last body atom",
        ViolationReason::MultipleSameStratum => "more than one same-stratum call in the body",
    }
}

fn cmd_check(file: &Path, query: Option<&str>, json: bool, strict: bool) -> Outcome {
    let p = load_program(file)?;
    let l = match query {
        Some(q) => load_query(q)?.len(),
        None => 1,
    };
    let a = analyze(&p);
    for w in &a.warnings {
        eprintln!("warning: {w}");
    }
    let ok = matches!(a.outcome, StratifyOutcome::Stratified(_));
    if json {
        let doc = match &a.outcome {
            StratifyOutcome::Stratified(s) => json!({
                "b_stratifiable": true,
                "strata": s.stratum_of,
                "violation": null,
                "bound_formula": {
                    "n": s.stratum_count,
                    "m": p.max_body_len().max(1),
                    "l": l,
                    "bound": lemma48_bound(&p, s, l),
                },
            }),
            StratifyOutcome::Violated(v) => json!({
                "b_stratifiable": false,
                "strata": null,
                "violation": {
                    "clause_index": v.clause_index,
                    "clause": p.clauses[v.clause_index].to_string(),
                    "culprit_positions": v.culprit_positions,
                    "reason": v.reason,
                },
                "bound_formula": null,
            }),
        };
        println!("{}", to_json(&doc));
    } else {
        match &a.outcome {
            StratifyOutcome::Stratified(s) => {
                println!("b-stratifiable: yes");
                for (i, stratum) in s.strata().iter().enumerate() {
                    let names: Vec<String> = stratum.iter().map(ToString::to_string).collect();
                    println!("  stratum {i}: {}", names.join(" "));
                }
                let m = p.max_body_len().max(1);
                println!(
                    "resolvent bound: {} * ({m} - 1) + {l} = {}",
                    s.stratum_count,
                    lemma48_bound(&p, s, l)
                );
            }
            StratifyOutcome::Violated(v) => {
                println!("b-stratifiable: no");
                let positions: Vec<String> = v.culprit_positions.iter().map(ToString::to_string).collect();
                println!(
                    "  clause {}: {}\n  {} (body positions {})",
                    v.clause_index,
                    p.clauses[v.clause_index],
                    reason_text(v.reason),
                    positions.join(", ")
                );
            }
        }
    }
    Ok(if strict && !ok { EXIT_NOT_STRATIFIABLE } else { 0 })
}

fn cmd_binarize(file: &Path, query: Option<&str>, output: Option<&Path>) -> Outcome {
    let p = load_program(file)?;
    let bp = binarize_program(&p);
    let mut text = print_program(&bp.program);
    if let Some(q) = query {
        let q = load_query(q)?;
        text.push_str(&format!("% query: {}\n", bp.binarize_query(&q)));
    }
    emit(output, &text)?;
    Ok(0)
}

fn diagnosis_text(d: &NontermDiagnosis) -> String {
    let why = match d.reason {
        NontermReason::PatternLengthExceeded => format!("a call pattern grew past length {}", d.budget),
        NontermReason::IterationBudget => format!("iteration budget of {} used up", d.budget),
    };
    let mut s = format!(
        "partial deduction did not terminate: {why} ({} iterations, {} patterns enqueued)\ngrowing chain:\n",
        d.iterations, d.enqueued
    );
    for p in &d.growing_chain {
        s.push_str(&format!("  {p}\n"));
    }
    s
}

fn cmd_transform(
    file: &Path,
    query: &str,
    opts: TransformOptions,
    report: Option<&Path>,
    json: bool,
    output: Option<&Path>,
) -> Outcome {
    let p = load_program(file)?;
    let q = load_query(query)?;
    let run = transform(&p, &q, &opts).map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
    let doc = transform_report(&run);
    if let Some(path) = report {
        write(path, &to_json(&doc))?;
    }
    match &run.outcome {
        TransformOutcome::Nonterm(d) => {
            if json {
                println!("{}", to_json(&doc));
            }
            eprint!("{}", diagnosis_text(d));
            Ok(EXIT_NONTERM)
        }
        TransformOutcome::Done(t) => {
            for w in t.pd.warnings.iter().chain(t.opt.iter().flat_map(|o| &o.warnings)) {
                eprintln!("warning: {w}");
            }
            let mut text = print_program(&t.program);
            text.push_str(&format!("% query: {}\n", t.query));
            if json {
                if let Some(path) = output {
                    write(path, &text)?;
                }
                println!("{}", to_json(&doc));
            } else {
                emit(output, &text)?;
            }
            Ok(0)
        }
    }
}

fn answer_json(r: &RunResult, q: &Query) -> Vec<serde_json::Value> {
    let vars = q.vars();
    r.answers
        .iter()
        .map(|a| {
            let m: serde_json::Map<String, serde_json::Value> = vars
                .iter()
                .map(|v| (v.to_string(), a.bindings.apply(&Term::Var(v.clone())).to_string().into()))
                .collect();
            serde_json::Value::Object(m)
        })
        .collect()
}

fn cmd_run(file: &Path, query: &str, limits: LimitArgs, json: bool) -> Outcome {
    let lim = limits.limits()?;
    let p = load_program(file)?;
    let q = load_query(query)?;
    let r = Engine::new(&p).with_occurs_check(!limits.no_occurs_check).solve(&q, &lim);
    if json {
        let doc = json!({
            "query": q.to_string(),
            "answers": answer_json(&r, &q),
            "metrics": r.metrics_json(),
        });
        println!("{}", to_json(&doc));
        return Ok(0);
    }
    let vars = q.vars();
    for a in &r.answers {
        if vars.is_empty() {
            println!("true.");
            continue;
        }
        let parts: Vec<String> = vars
            .iter()
            .map(|v| format!("{v} = {}", a.bindings.apply(&Term::Var(v.clone()))))
            .collect();
        println!("{}.", parts.join(", "));
    }
    if r.answers.is_empty() {
        println!("false.");
    }
    let m = r.metrics;
    println!(
        "% {}: {} solutions, {} steps, {} head attempts, max resolvent {}",
        r.status.as_str(),
        m.solutions,
        m.resolution_steps,
        m.head_attempts,
        m.max_goal_len
    );
    Ok(0)
}

fn report_text(r: &EquivalenceReport) -> String {
    let mut s = format!("query {}\n", r.query);
    for st in &r.stages {
        let stage = serde_json::to_value(st.stage).expect("stage serializes");
        s.push_str(&format!(
            "  {:<12}{:<14}answers {:<6}steps {:<9}head attempts {:<9}max resolvent {}\n",
            stage.as_str().unwrap_or_default(),
            st.status.as_str(),
            st.answer_count,
            st.metrics.resolution_steps,
            st.metrics.head_attempts,
            st.metrics.max_goal_len
        ));
    }
    if let Some(d) = &r.transformed_absent {
        for line in diagnosis_text(d).lines() {
            s.push_str(&format!("  {line}\n"));
        }
    }
    let verdict = if r.mismatch() {
        "MISMATCH"
    } else if r.all_equal() {
        "answers equal"
    } else {
        "not compared (a run hit a limit or a stage is missing)"
    };
    s.push_str(&format!("  {verdict}\n"));
    s
}

fn cmd_verify(file: &Path, queries: &[String], lim: Limits, opts: VerifyOptions, json: bool) -> Outcome {
    let p = load_program(file)?;
    let qs: Vec<Query> = if queries.is_empty() {
        let path = file.with_extension("queries");
        let text = read(&path)?;
        parse_queries(&text, &path)
            .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?
            .0
    } else {
        queries.iter().map(|q| load_query(q)).collect::<Result<_, _>>()?
    };
    if qs.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "no queries given"));
    }
    let mut reports = Vec::new();
    for q in &qs {
        let r = verify_pipeline(&p, q, &lim, &opts).map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
        reports.push(r);
    }
    if json {
        println!("{}", to_json(&reports));
    } else {
        for r in &reports {
            print!("{}", report_text(r));
        }
    }
    Ok(if reports.iter().any(EquivalenceReport::mismatch) { EXIT_MISMATCH } else { 0 })
}

fn ratio_text(r: Option<f64>) -> String {
    r.map_or("-".to_string(), |x| format!("{x:.3}"))
}

fn bench_text(rows: &[BenchRow]) -> String {
    let mut s = format!(
        "{:<16}{:>4}  {:<14}{:>10}{:>10}{:>10}{:>10}  {}\n",
        "program", "q", "status", "bin/steps", "bin/heads", "pd/steps", "pd/heads", "answers"
    );
    for r in rows {
        let status = r.original.as_ref().map_or("-", |o| o.status.as_str());
        let answers = match r.answers_equal {
            Some(true) => "equal",
            Some(false) => "MISMATCH",
            None => "-",
        };
        s.push_str(&format!(
            "{:<16}{:>4}  {:<14}{:>10}{:>10}{:>10}{:>10}  {}\n",
            r.program,
            r.query_id,
            status,
            ratio_text(r.binarized_ratio.resolution_steps),
            ratio_text(r.binarized_ratio.head_attempts),
            ratio_text(r.transformed_ratio.resolution_steps),
            ratio_text(r.transformed_ratio.head_attempts),
            answers
        ));
        if let Some(e) = &r.error {
            s.push_str(&format!("    {e}\n"));
        }
    }
    s
}

fn cmd_bench(dir: &Path, lim: Limits, opts: VerifyOptions, jobs: usize, json: bool, output: Option<&Path>) -> Outcome {
    let corpus = load_corpus(dir).map_err(|e| {
        let code = match &e {
            CorpusError::Io { .. } => EXIT_IO,
            e if e.is_parse_error() => EXIT_PARSE,
            _ => EXIT_DATA,
        };
        Failure::new(code, e.to_string())
    })?;
    let cases: Vec<BenchCase> = corpus
        .iter()
        .flat_map(|e| {
            e.queries
                .iter()
                .enumerate()
                .map(|(i, q)| (e.name.clone(), i, e.program.clone(), q.clone()))
        })
        .collect();
    let rows = bench(&cases, &lim, &opts, jobs);
    if let Some(path) = output {
        write(path, &to_json(&rows))?;
    }
    if json {
        println!("{}", to_json(&rows));
    } else {
        print!("{}", bench_text(&rows));
    }
    Ok(if rows.iter().any(|r| r.answers_equal == Some(false)) { EXIT_MISMATCH } else { 0 })
}

fn verify_options(limits: LimitArgs, budget: BudgetArgs, optimize: bool) -> VerifyOptions {
    VerifyOptions {
        transform: TransformOptions {
            budget: budget.overrides(),
            optimize,
        },
        occurs_check: !limits.no_occurs_check,
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Check {
            file,
            query,
            json,
            strict,
        } => cmd_check(&file, query.as_deref(), json, strict),
        Command::Binarize { file, query, output } => cmd_binarize(&file, query.as_deref(), output.as_deref()),
        Command::Transform {
            file,
            query,
            budget,
            optimize,
            report,
            json,
            output,
        } => cmd_transform(
            &file,
            &query,
            TransformOptions {
                budget: budget.overrides(),
                optimize,
            },
            report.as_deref(),
            json,
            output.as_deref(),
        ),
        Command::Run {
            file,
            query,
            limits,
            json,
        } => cmd_run(&file, &query, limits, json),
        Command::Verify {
            file,
            query,
            limits,
            budget,
            optimize,
            json,
        } => cmd_verify(&file, &query, limits.limits()?, verify_options(limits, budget, optimize), json),
        Command::Bench {
            corpus,
            limits,
            budget,
            optimize,
            jobs,
            json,
            output,
        } => cmd_bench(
            &corpus,
            limits.limits()?,
            verify_options(limits, budget, optimize),
            jobs,
            json,
            output.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("binpd: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
