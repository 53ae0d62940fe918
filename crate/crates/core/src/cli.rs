//! Command-line front end. Exit codes: 0 valid/pass, 1 counterexample/fail,
//! 2 usage or input error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::congruence::{
    boolean_ada_roundtrip, bset_ultrafilter_decompose, subdirect_embed, CongruenceError,
};
use crate::decision::{
    check_statement, unique_star_search, verify_axiom_suite_with, Coverage, Suite, Theory,
};
use crate::logic::{classify_algebra, AlgebraClass, AlgebraTables};
use crate::models::{bset_view, FiniteBSet, FiniteCSet, Structure};
use crate::terms::{
    evaluate, parse_corpus, parse_statement, parse_term_with_sorts, Env, ParseError, Sort,
    Statement, Value,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ifte", version, about = "Workbench for three-valued if-then-else algebras")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Seed for randomized runs (`verify --sample`).
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide an identity or quasi-identity over a theory.
    Check {
        statement: Option<String>,
        #[arg(long)]
        theory: Theory,
        /// Check every statement of a file (one per line, `#` comments).
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Decide a quasi-identity `p1 = q1, ... => p = q`.
    CheckQuasi {
        statement: String,
        #[arg(long)]
        theory: Theory,
    },
    /// Run an axiom suite exhaustively on a model.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        suite: Suite,
        /// Restrict the tests to the Boolean skeleton first.
        #[arg(long)]
        skeleton: bool,
        /// Check this many random assignments per axiom instead of all.
        #[arg(long)]
        sample: Option<u64>,
    },
    /// Subdirect decomposition into basic models.
    Decompose {
        #[command(flatten)]
        model: ModelArgs,
        /// Also check that the equality test is preserved.
        #[arg(long)]
        agreeable: bool,
    },
    /// Evaluate a term in a model.
    Eval {
        term: String,
        /// A model file or generator (`basic:N`, `functional:N`, `self-ada:N`, `total-bset:N`).
        #[arg(long)]
        model: String,
        /// Assignments such as `a=T,s=2,t=bot`.
        #[arg(long, default_value = "")]
        env: String,
    },
    /// Classify operation tables.
    Classify {
        tables: PathBuf,
        #[arg(long = "as")]
        class: ClassArg,
    },
    /// Enumerate every equality test on a basic C-set.
    StarSearch {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        force: bool,
    },
    /// Boolean algebra -> disjoint pairs -> skeleton round trip for 2^X.
    Roundtrip {
        #[arg(long)]
        atoms: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ClassArg {
    Bool,
    Calg,
    Ada,
}

impl From<ClassArg> for AlgebraClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Bool => AlgebraClass::Boolean,
            ClassArg::Calg => AlgebraClass::CAlgebra,
            ClassArg::Ada => AlgebraClass::Ada,
        }
    }
}

impl clap::builder::ValueParserFactory for Theory {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Theory>())
    }
}

impl clap::builder::ValueParserFactory for Suite {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Suite>())
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ModelArgs {
    /// Model file (JSON).
    path: Option<PathBuf>,
    /// Basic agreeable C-set with N points including bot.
    #[arg(long)]
    basic: Option<usize>,
    /// Agreeable functional C-set over |X| = N.
    #[arg(long)]
    functional: Option<usize>,
    /// Self-action C-set (3^N, 3^N).
    #[arg(long = "self-ada")]
    self_ada: Option<usize>,
    /// Agreeable B-set of total functions over |X| = N.
    #[arg(long = "total-bset")]
    total_bset: Option<usize>,
}

enum Model {
    C(FiniteCSet),
    B(FiniteBSet),
}

impl Model {
    fn structure(&self) -> &(dyn Structure + Sync) {
        match self {
            Model::C(m) => m,
            Model::B(m) => m,
        }
    }
}

fn positive(n: usize, flag: &str) -> anyhow::Result<usize> {
    if n == 0 {
        bail!("{flag} needs a positive size");
    }
    Ok(n)
}

impl ModelArgs {
    fn load(&self) -> anyhow::Result<Model> {
        if let Some(n) = self.basic {
            return Ok(Model::C(FiniteCSet::basic(positive(n, "--basic")?, true)));
        }
        if let Some(n) = self.functional {
            return Ok(Model::C(FiniteCSet::functional(positive(n, "--functional")?)));
        }
        if let Some(n) = self.self_ada {
            return Ok(Model::C(FiniteCSet::self_ada(positive(n, "--self-ada")?)));
        }
        if let Some(n) = self.total_bset {
            return Ok(Model::B(FiniteBSet::total_functional(positive(n, "--total-bset")?)));
        }
        let path = self.path.as_ref().expect("clap enforces one source");
        load_model_file(path)
    }
}

fn load_model_file(path: &PathBuf) -> anyhow::Result<Model> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m: FiniteCSet =
        serde_json::from_str(&text).with_context(|| format!("parsing model {}", path.display()))?;
    Ok(Model::C(m.with_name(path.display().to_string())))
}

fn model_from_spec(spec: &str) -> anyhow::Result<Model> {
    if let Some((kind, n)) = spec.split_once(':') {
        if let Ok(n) = n.parse::<usize>() {
            let source = ModelArgs {
                path: None,
                basic: (kind == "basic").then_some(n),
                functional: (kind == "functional").then_some(n),
                self_ada: (kind == "self-ada").then_some(n),
                total_bset: (kind == "total-bset").then_some(n),
            };
            if source.basic.or(source.functional).or(source.self_ada).or(source.total_bset).is_some() {
                return source.load();
            }
        }
    }
    load_model_file(&PathBuf::from(spec))
}

/// Exit code plus a rendered report.
struct Outcome {
    code: i32,
    text: String,
    json: serde_json::Value,
}

impl Outcome {
    fn new<T: Serialize>(passed: bool, text: String, value: &T) -> anyhow::Result<Self> {
        Ok(Outcome {
            code: if passed { EXIT_PASS } else { EXIT_FAIL },
            text,
            json: serde_json::to_value(value)?,
        })
    }
}

/// Runs the CLI on `args` (including the program name), writing the report
/// to `out` and diagnostics to `err`.
pub fn run_with(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(anyhow!("cannot start {n} worker threads: {e}")),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(outcome) => {
            let _ = match cli.format {
                Format::Text => writeln!(out, "{}", outcome.text),
                Format::Json => writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&outcome.json).unwrap_or_default()
                ),
            };
            outcome.code
        }
        Err(e) => {
            // Failed decompositions are verdicts, not input errors.
            let code = match e.downcast_ref::<CongruenceError>() {
                Some(
                    CongruenceError::NotInjective(_)
                    | CongruenceError::NotHomomorphism { .. }
                    | CongruenceError::NotCompatible(_)
                    | CongruenceError::NotEquivalence(_),
                ) => EXIT_FAIL,
                _ => EXIT_ERROR,
            };
            let _ = writeln!(err, "error: {e:#}");
            code
        }
    }
}

/// Entry point used by the binary.
pub fn run(args: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Check {
            statement,
            theory,
            corpus,
        } => match (statement, corpus) {
            (Some(text), None) => check_one(&parse_statement(text)?, *theory),
            (None, Some(path)) => check_corpus(path, *theory),
            _ => bail!("give either a statement or --corpus, not both"),
        },
        Command::CheckQuasi { statement, theory } => {
            let stmt = parse_statement(statement)?;
            if !matches!(stmt, Statement::Quasi(_)) {
                bail!("expected a quasi-identity `premises => conclusion`; use `check` for identities");
            }
            check_one(&stmt, *theory)
        }
        Command::Verify {
            model,
            suite,
            skeleton,
            sample,
        } => {
            let model = model.load()?;
            let model = match (skeleton, model) {
                (true, Model::C(m)) => Model::B(bset_view(&m)?),
                (true, Model::B(_)) => bail!("--skeleton applies to C-set models"),
                (false, m) => m,
            };
            let coverage = match sample {
                Some(samples) => Coverage::Sampled {
                    samples: *samples,
                    seed: cli.seed,
                },
                None => Coverage::Exhaustive,
            };
            let s = model.structure();
            let report = verify_axiom_suite_with(s, *suite, coverage)?;
            let text = format!("model: {}\n{}", s.describe(), report.to_string().trim_end());
            Outcome::new(report.passed, text, &report)
        }
        Command::Decompose { model, agreeable } => {
            let embedding = match model.load()? {
                Model::C(m) => subdirect_embed(&m, *agreeable)?,
                Model::B(m) => bset_ultrafilter_decompose(&m)?,
            };
            let passed = embedding.injective && embedding.star_preserved != Some(false);
            Outcome::new(passed, embedding.to_string(), &embedding)
        }
        Command::Eval { term, model, env } => eval(term, model, env),
        Command::Classify { tables, class } => {
            let text = fs::read_to_string(tables)
                .with_context(|| format!("reading {}", tables.display()))?;
            let t: AlgebraTables = serde_json::from_str(&text)
                .with_context(|| format!("parsing tables {}", tables.display()))?;
            let report = classify_algebra(&t, (*class).into())?;
            Outcome::new(report.passed, report.to_string().trim_end().to_string(), &report)
        }
        Command::StarSearch { size, force } => {
            let r = unique_star_search(*size, *force)?;
            Outcome::new(r.unique_and_basic, r.to_string(), &r)
        }
        Command::Roundtrip { atoms } => {
            let r = boolean_ada_roundtrip(&AlgebraTables::boolean_power(positive(*atoms, "--atoms")?))?;
            Outcome::new(r.passed, r.to_string(), &r)
        }
    }
}

fn check_one(stmt: &Statement, theory: Theory) -> anyhow::Result<Outcome> {
    let v = check_statement(stmt, theory)?;
    Outcome::new(v.valid, v.to_string(), &v)
}

fn check_corpus(path: &PathBuf, theory: Theory) -> anyhow::Result<Outcome> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let stmts = parse_corpus(&text)
        .map_err(|(line, e)| anyhow!("{}:{line}: {e}", path.display()))?;
    let mut verdicts = Vec::new();
    let mut lines = Vec::new();
    for (line, stmt) in &stmts {
        let v = check_statement(stmt, theory).with_context(|| format!("{}:{line}", path.display()))?;
        lines.push(format!("{line}: {v}"));
        verdicts.push(v);
    }
    let valid = verdicts.iter().filter(|v| v.valid).count();
    lines.push(format!("{valid}/{} valid", verdicts.len()));
    Outcome::new(valid == verdicts.len(), lines.join("\n"), &verdicts)
}

#[derive(Serialize)]
struct EvalReport {
    term: String,
    sort: Sort,
    value: usize,
    label: String,
}

fn eval(term: &str, model: &str, env_text: &str) -> anyhow::Result<Outcome> {
    let model = model_from_spec(model)?;
    let m = model.structure();
    // Values fix the sorts of variables the term alone leaves open.
    let mut raw: BTreeMap<String, String> = BTreeMap::new();
    for part in env_text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("bad binding `{part}`; expected name=value"))?;
        raw.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut known: BTreeMap<String, Sort> = raw
        .iter()
        .filter_map(|(k, v)| match v.as_str() {
            "T" | "F" | "U" => Some((k.clone(), Sort::Test)),
            "bot" => Some((k.clone(), Sort::Element)),
            _ => None,
        })
        .collect();
    let t = loop {
        match parse_term_with_sorts(term, &known) {
            Err(ParseError::UnresolvedSort { var }) if !known.contains_key(&var) => {
                known.insert(var, Sort::Element);
            }
            other => break other?,
        }
    };
    let (tests, elems) = crate::terms::free_vars(&t);
    let mut env = Env::new();
    for (k, v) in &raw {
        if tests.contains(k) {
            let idx = match v.as_str() {
                "T" => Some(m.tests().top()),
                "F" => Some(m.tests().bottom()),
                "U" => m.tests().undefined(),
                n => n.trim_start_matches('#').parse().ok(),
            }
            .ok_or_else(|| anyhow!("bad test value `{v}` for `{k}`"))?;
            env = env.with_test(k, idx);
        } else if elems.contains(k) {
            let idx = match v.as_str() {
                "bot" => m.bottom().ok_or_else(|| anyhow!("the model has no bot"))?,
                n => n
                    .trim_start_matches('p')
                    .parse()
                    .map_err(|_| anyhow!("bad point value `{v}` for `{k}`"))?,
            };
            env = env.with_element(k, idx);
        } else {
            bail!("`{k}` does not occur in the term");
        }
    }
    let value = evaluate(&t, &env, m)?;
    let (sort, idx, label) = match value {
        Value::Test(i) => (Sort::Test, i, m.tests().label(i)),
        Value::Element(i) => (Sort::Element, i, m.point_label(i)),
    };
    let report = EvalReport {
        term: t.to_string(),
        sort,
        value: idx,
        label: label.clone(),
    };
    Outcome::new(true, format!("{} = {label}", t), &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let argv: Vec<String> = std::iter::once("ifte")
            .chain(args.iter().copied())
            .map(String::from)
            .collect();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(&argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn check_exit_codes() {
        assert_eq!(run_args(&["check", "U[s,t] = bot", "--theory", "cset"]).0, 0);
        let (code, out, _) = run_args(&["check", "a[s,s] = s", "--theory", "cset"]);
        assert_eq!(code, 1);
        assert!(out.contains("a=U"), "{out}");
        assert_eq!(run_args(&["check", "a[s,", "--theory", "cset"]).0, 2);
        assert_eq!(run_args(&["check", "T = T", "--theory", "nope"]).0, 2);
        assert_eq!(run_args(&["check-quasi", "T = T", "--theory", "ada"]).0, 2);
        assert_eq!(
            run_args(&["check-quasi", "s*s = T, s*t = U => t = bot", "--theory", "agcset"]).0,
            0
        );
    }

    #[test]
    fn verify_json_report() {
        let (code, out, _) = run_args(&["verify", "--basic", "3", "--suite", "cset", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["passed"], true);
        assert_eq!(v["axioms"].as_array().unwrap().len(), 8);
    }

    #[test]
    fn verify_skeleton_and_sampling() {
        assert_eq!(
            run_args(&["verify", "--self-ada", "1", "--skeleton", "--suite", "bset"]).0,
            0
        );
        assert_eq!(
            run_args(&["verify", "--functional", "2", "--suite", "cset", "--sample", "50", "--seed", "3"]).0,
            0
        );
        assert_eq!(run_args(&["verify", "--basic", "3", "--functional", "1", "--suite", "cset"]).0, 2);
        assert_eq!(run_args(&["verify", "--basic", "3", "--suite", "bset"]).0, 1);
    }

    #[test]
    fn eval_with_env() {
        let (code, out, _) = run_args(&["eval", "a[s,t]", "--model", "basic:4", "--env", "a=U,s=2,t=3"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "a[s,t] = bot");
        let (_, out, _) = run_args(&["eval", "s", "--model", "basic:4", "--env", "s=2"]);
        assert_eq!(out.trim(), "s = p2");
        let (_, out, _) = run_args(&["eval", "s*t", "--model", "basic:4", "--env", "s=2,t=2"]);
        assert_eq!(out.trim(), "s*t = T");
        assert_eq!(run_args(&["eval", "s*t", "--model", "basic:4", "--env", "s=2"]).0, 2);
    }

    #[test]
    fn decompose_and_star_search() {
        let (code, out, _) = run_args(&["decompose", "--self-ada", "2", "--agreeable", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["factors"].as_array().unwrap().len(), 2);
        assert_eq!(v["star_preserved"], true);
        assert_eq!(run_args(&["star-search", "--size", "2"]).0, 0);
        assert_eq!(run_args(&["star-search", "--size", "5"]).0, 2);
        assert_eq!(run_args(&["roundtrip", "--atoms", "2"]).0, 0);
    }

    #[test]
    fn help_exits_cleanly() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("check-quasi"));
    }
}
