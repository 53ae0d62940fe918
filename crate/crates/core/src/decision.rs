//! Validity of identities and quasi-identities by exhaustive checking in
//! small generating models, axiom suites for finite models, and the
//! brute-force search for equality tests on basic C-sets.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::logic::{classify_algebra, AlgebraClass, AlgebraTables, LogicError, TruthValue};
use crate::models::{basic_star, FiniteBSet, FiniteCSet, Structure, BOTTOM};
use crate::report::{AxiomOutcome, Binding, SuiteReport};
use crate::terms::{
    parse_statement, EvalError, Identity, ParseError, Program, QuasiIdentity, Sort, Statement,
    TermError, VarLayout,
};

/// Enumerations larger than this are refused.
pub const MAX_INSTANCES: u64 = 1 << 36;

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("{what} is not available in theory `{theory}`")]
    NotAllowed { what: &'static str, theory: Theory },
    #[error("suite `{suite}` does not apply: {reason}")]
    InapplicableSuite { suite: Suite, reason: String },
    #[error("{0} assignments to enumerate; refusing")]
    TooLarge(u128),
    #[error("star search over {points} points needs 3^{} tables; pass --force to run it", points * points)]
    StarSearchGuard { points: usize },
    #[error("star search needs at least 2 points (including bot), got {0}")]
    StarSearchTooSmall(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theory {
    Boolean,
    CAlgebra,
    Ada,
    BSet,
    AgreeableBSet,
    CSet,
    AgreeableCSet,
}

impl Theory {
    pub const ALL: [Theory; 7] = [
        Theory::Boolean,
        Theory::CAlgebra,
        Theory::Ada,
        Theory::BSet,
        Theory::AgreeableBSet,
        Theory::CSet,
        Theory::AgreeableCSet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theory::Boolean => "bool",
            Theory::CAlgebra => "calg",
            Theory::Ada => "ada",
            Theory::BSet => "bset",
            Theory::AgreeableBSet => "agbset",
            Theory::CSet => "cset",
            Theory::AgreeableCSet => "agcset",
        }
    }

    fn has_elements(self) -> bool {
        matches!(
            self,
            Theory::BSet | Theory::AgreeableBSet | Theory::CSet | Theory::AgreeableCSet
        )
    }

    fn has_star(self) -> bool {
        matches!(self, Theory::AgreeableBSet | Theory::AgreeableCSet)
    }

    fn has_down(self) -> bool {
        matches!(self, Theory::Ada | Theory::CSet | Theory::AgreeableCSet)
    }

    fn is_boolean(self) -> bool {
        matches!(self, Theory::Boolean | Theory::BSet | Theory::AgreeableBSet)
    }

    fn check_allowed(self, stmt: &Statement) -> Result<(), DecisionError> {
        for t in stmt.terms() {
            t.validate()?;
            let deny = |what| {
                Err(DecisionError::NotAllowed {
                    what,
                    theory: self,
                })
            };
            if t.has_elements() && !self.has_elements() {
                return deny("element-sorted syntax");
            }
            if t.uses_star() && !self.has_star() {
                return deny("the equality test `*`");
            }
            if t.uses_down() && !self.has_down() {
                return deny("`^`");
            }
            if t.uses_undefined() && self.is_boolean() {
                return deny("the constant U");
            }
            if t.uses_bottom() && self.is_boolean() {
                return deny("`bot`");
            }
        }
        Ok(())
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "bool" | "boolean" => Theory::Boolean,
            "calg" | "c_algebra" => Theory::CAlgebra,
            "ada" => Theory::Ada,
            "bset" | "b_set" => Theory::BSet,
            "agbset" | "agreeable_b_set" => Theory::AgreeableBSet,
            "cset" | "c_set_over_ada" => Theory::CSet,
            "agcset" | "agreeable_c_set_over_ada" => Theory::AgreeableCSet,
            other => return Err(format!("unknown theory `{other}`")),
        })
    }
}

/// A small model in which counterexamples are reported; rebuildable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// The two-element Boolean algebra.
    Two,
    /// The three-element logic, with or without `^`.
    Three { down: bool },
    BasicCSet { points: usize, star: bool },
    BasicBSet { points: usize, star: bool },
}

impl ModelSpec {
    pub fn build(&self) -> Box<dyn Structure + Send + Sync> {
        match *self {
            ModelSpec::Two => Box::new(FiniteBSet::basic(1, false)),
            ModelSpec::Three { down: true } => Box::new(FiniteCSet::basic(1, false)),
            ModelSpec::Three { down: false } => {
                let tests = AlgebraTables::three_c_algebra();
                let action = TruthValue::ALL
                    .iter()
                    .map(|v| crate::models::basic_action(*v, 0, 0))
                    .collect();
                Box::new(
                    FiniteCSet::new(tests, 1, action, None, "the C-algebra 3")
                        .expect("trivial pointed set"),
                )
            }
            ModelSpec::BasicCSet { points, star } => Box::new(FiniteCSet::basic(points, star)),
            ModelSpec::BasicBSet { points, star } => Box::new(FiniteBSet::basic(points, star)),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            ModelSpec::Two => "the Boolean algebra 2".into(),
            ModelSpec::Three { down: true } => "the ada 3".into(),
            ModelSpec::Three { down: false } => "the C-algebra 3".into(),
            ModelSpec::BasicCSet { points, star } => format!(
                "{}basic C-set with {} points (bot, p1..p{})",
                if star { "agreeable " } else { "" },
                points,
                points - 1
            ),
            ModelSpec::BasicBSet { points, star } => format!(
                "{}basic B-set with points p0..p{}",
                if star { "agreeable " } else { "" },
                points - 1
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub model: ModelSpec,
    pub description: String,
    pub env: Vec<Binding>,
    /// Raw values in variable order (test indices / point indices).
    #[serde(skip)]
    pub values: Vec<(String, Sort, usize)>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub statement: String,
    pub theory: Theory,
    pub valid: bool,
    pub counterexample: Option<Counterexample>,
    pub instances: u64,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} over {} ({} assignments)",
            if self.valid { "VALID" } else { "INVALID" },
            self.statement,
            self.theory,
            self.instances
        )?;
        if let Some(cx) = &self.counterexample {
            let env: Vec<String> = cx.env.iter().map(|b| format!("{}={}", b.var, b.value)).collect();
            write!(
                f,
                "\n  counterexample in {}: {}\n  lhs = {}, rhs = {}",
                cx.description,
                env.join(", "),
                cx.lhs,
                cx.rhs
            )?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- enumeration

/// A statement compiled against one model, with one slot per variable.
struct Compiled {
    vars: Vec<(String, Sort, usize)>,
    premises: Vec<(Program, Program)>,
    conclusion: (Program, Program),
}

struct Scratch {
    tvals: Vec<usize>,
    evals: Vec<usize>,
    stack: Vec<usize>,
}

impl Compiled {
    fn new<S: Structure + ?Sized>(stmt: &Statement, m: &S) -> Result<Self, DecisionError> {
        let order = stmt.vars_in_order()?;
        let mut layout = VarLayout::default();
        let mut vars = Vec::new();
        for (name, sort) in order {
            let slot = match sort {
                Sort::Test => {
                    layout.tests.push(name.clone());
                    layout.tests.len() - 1
                }
                Sort::Element => {
                    layout.elements.push(name.clone());
                    layout.elements.len() - 1
                }
            };
            vars.push((name, sort, slot));
        }
        let pair = |id: &Identity| -> Result<(Program, Program), DecisionError> {
            Ok((
                Program::compile(&id.lhs, &layout, m)?,
                Program::compile(&id.rhs, &layout, m)?,
            ))
        };
        Ok(Compiled {
            premises: stmt.premises().iter().map(pair).collect::<Result<_, _>>()?,
            conclusion: pair(stmt.conclusion())?,
            vars,
        })
    }

    fn scratch(&self) -> Scratch {
        let n_tests = self.vars.iter().filter(|v| v.1 == Sort::Test).count();
        Scratch {
            tvals: vec![0; n_tests],
            evals: vec![0; self.vars.len() - n_tests],
            stack: Vec::with_capacity(32),
        }
    }

    /// Decodes `index` (first variable most significant) into the scratch.
    fn load(&self, domains: &[Vec<usize>], mut index: u64, sc: &mut Scratch) {
        for (i, (_, sort, slot)) in self.vars.iter().enumerate().rev() {
            let d = &domains[i];
            let v = d[(index % d.len() as u64) as usize];
            index /= d.len() as u64;
            match sort {
                Sort::Test => sc.tvals[*slot] = v,
                Sort::Element => sc.evals[*slot] = v,
            }
        }
    }

    fn side_values<S: Structure + ?Sized>(&self, m: &S, id: &(Program, Program), sc: &mut Scratch) -> (usize, usize) {
        let l = id.0.run(m, &sc.tvals, &sc.evals, &mut sc.stack);
        let r = id.1.run(m, &sc.tvals, &sc.evals, &mut sc.stack);
        (l, r)
    }

    /// False iff every premise holds and the conclusion fails.
    fn holds<S: Structure + ?Sized>(&self, m: &S, sc: &mut Scratch) -> bool {
        for p in &self.premises {
            let (l, r) = self.side_values(m, p, sc);
            if l != r {
                return true;
            }
        }
        let (l, r) = self.side_values(m, &self.conclusion, sc);
        l == r
    }

    fn value(&self, sc: &Scratch, i: usize) -> usize {
        let (_, sort, slot) = &self.vars[i];
        match sort {
            Sort::Test => sc.tvals[*slot],
            Sort::Element => sc.evals[*slot],
        }
    }
}

fn total_instances(domains: &[Vec<usize>]) -> Result<u64, DecisionError> {
    let total: u128 = domains.iter().map(|d| d.len() as u128).product();
    if total > MAX_INSTANCES as u128 {
        return Err(DecisionError::TooLarge(total));
    }
    Ok(total as u64)
}

/// Returns the first assignment index (in canonical order) violating the
/// statement, if any.
fn first_failure<S: Structure + Sync + ?Sized>(
    c: &Compiled,
    m: &S,
    domains: &[Vec<usize>],
    total: u64,
    parallel: bool,
) -> Option<u64> {
    if parallel && total > 4096 {
        (0..total)
            .into_par_iter()
            .map_init(
                || c.scratch(),
                |sc, i| {
                    c.load(domains, i, sc);
                    (i, c.holds(m, sc))
                },
            )
            .find_first(|(_, ok)| !ok)
            .map(|(i, _)| i)
    } else {
        let mut sc = c.scratch();
        (0..total).find(|&i| {
            c.load(domains, i, &mut sc);
            !c.holds(m, &mut sc)
        })
    }
}

fn label_value<S: Structure + ?Sized>(m: &S, sort: Sort, v: usize) -> String {
    match sort {
        Sort::Test => m.tests().label(v),
        Sort::Element => m.point_label(v),
    }
}

fn witness<S: Structure + ?Sized>(
    c: &Compiled,
    m: &S,
    domains: &[Vec<usize>],
    index: u64,
    sort: Sort,
) -> (Vec<Binding>, Vec<(String, Sort, usize)>, String, String) {
    let mut sc = c.scratch();
    c.load(domains, index, &mut sc);
    let mut bindings = Vec::new();
    let mut values = Vec::new();
    for (i, (name, var_sort, _)) in c.vars.iter().enumerate() {
        let v = c.value(&sc, i);
        bindings.push(Binding::new(name.clone(), label_value(m, *var_sort, v)));
        values.push((name.clone(), *var_sort, v));
    }
    let (l, r) = c.side_values(m, &c.conclusion, &mut sc);
    (bindings, values, label_value(m, sort, l), label_value(m, sort, r))
}

// ---------------------------------------------------------------- deciding

fn element_count(stmt: &Statement) -> Result<usize, DecisionError> {
    Ok(stmt
        .vars_in_order()?
        .iter()
        .filter(|(_, s)| *s == Sort::Element)
        .count())
}

/// Decides a statement over a theory.
pub fn check_statement(stmt: &Statement, theory: Theory) -> Result<Verdict, DecisionError> {
    theory.check_allowed(stmt)?;
    let k = element_count(stmt)?;
    let star = stmt.terms().iter().any(|t| t.uses_star());
    let quasi = !stmt.premises().is_empty();
    let spec = match theory {
        Theory::Boolean => ModelSpec::Two,
        Theory::CAlgebra => ModelSpec::Three { down: false },
        Theory::Ada => ModelSpec::Three { down: true },
        Theory::CSet => ModelSpec::BasicCSet {
            points: k + 1,
            star: false,
        },
        Theory::AgreeableCSet => ModelSpec::BasicCSet {
            points: k + 1,
            star: true,
        },
        Theory::BSet => ModelSpec::BasicBSet {
            points: k.max(1),
            star: false,
        },
        Theory::AgreeableBSet => ModelSpec::BasicBSet {
            points: k.max(1),
            star: true,
        },
    };
    let m = spec.build();
    let m = &*m;
    let c = Compiled::new(stmt, m)?;
    // Without `*`, a single assignment of distinct defined points is
    // generic for basic C-sets; otherwise every equality pattern is tried.
    let generic = theory == Theory::CSet && !quasi && !star;
    let mut next_point = 0;
    let domains: Vec<Vec<usize>> = c
        .vars
        .iter()
        .map(|(_, sort, _)| match sort {
            Sort::Test => (0..m.tests().size()).collect(),
            Sort::Element if generic => {
                next_point += 1;
                vec![next_point]
            }
            Sort::Element => (0..m.point_count()).collect(),
        })
        .collect();
    let total = total_instances(&domains)?;
    let failure = first_failure(&c, m, &domains, total, true);
    let counterexample = failure.map(|i| {
        let (env, values, lhs, rhs) = witness(&c, m, &domains, i, stmt.conclusion().sort());
        Counterexample {
            description: spec.describe(),
            model: spec.clone(),
            env,
            values,
            lhs,
            rhs,
        }
    });
    Ok(Verdict {
        statement: stmt.to_string(),
        theory,
        valid: counterexample.is_none(),
        counterexample,
        instances: total,
    })
}

pub fn check_identity(id: &Identity, theory: Theory) -> Result<Verdict, DecisionError> {
    check_statement(&Statement::Identity(id.clone()), theory)
}

pub fn check_quasi_identity(q: &QuasiIdentity, theory: Theory) -> Result<Verdict, DecisionError> {
    check_statement(&Statement::Quasi(q.clone()), theory)
}

/// Parses and decides.
pub fn check_text(text: &str, theory: Theory) -> Result<Verdict, DecisionError> {
    check_statement(&parse_statement(text)?, theory)
}

// ---------------------------------------------------------------- suites

/// A named law; some laws bundle more than one statement.
#[derive(Clone, Copy, Debug)]
pub struct Law {
    pub label: &'static str,
    pub statements: &'static [&'static str],
}

const fn law(label: &'static str, statements: &'static [&'static str]) -> Law {
    Law { label, statements }
}

pub const C_ALGEBRA_AXIOMS: &[Law] = &[
    law("C1", &["~~a = a"]),
    law("C2", &["~(a&b) = ~a|~b"]),
    law("C3", &["(a&b)&c = a&(b&c)"]),
    law("C4", &["a&(b|c) = (a&b)|(a&c)"]),
    law("C5", &["(a|b)&c = (a&c)|(~a&b&c)"]),
    law("C6", &["a|(a&b) = a"]),
    law("C7", &["(a&b)|(b&a) = (b&a)|(a&b)"]),
];

pub const ADA_AXIOMS: &[Law] = &[
    law("A1", &["F^ = F"]),
    law("A2", &["U^ = F"]),
    law("A3", &["T^ = T"]),
    law("A4", &["a&b^ = a&(a&b)^"]),
    law("A5", &["a^|~(a^) = T"]),
    law("A6", &["a = a^|a"]),
];

pub const B_SET_AXIOMS: &[Law] = &[
    law("B1", &["a[s,s] = s"]),
    law("B2", &["a[a[s,t],u] = a[s,u]"]),
    law("B3", &["a[s,a[t,u]] = a[s,u]"]),
    law("B4", &["F[s,t] = t"]),
    law("B5", &["(~a)[s,t] = a[t,s]"]),
    law("B6", &["(a&b)[s,t] = a[b[s,t],t]"]),
];

pub const AGREEABLE_B_SET_AXIOMS: &[Law] = &[
    law("AB1", &["s*s = T"]),
    law("AB2", &["(s*t)[s,t] = t"]),
    law("AB3", &["a[s,t]*a[u,v] = (a&(s*u))|(~a&(t*v))"]),
];

pub const C_SET_AXIOMS: &[Law] = &[
    law("EC1", &["U[s,t] = bot"]),
    law("EC2", &["a[b[s,t],b[u,v]] = b[a[s,u],a[t,v]]"]),
    law("EC3", &["a[a[s,t],u] = a[s,u]"]),
    law("EC4", &["a[s,a[t,u]] = a[s,u]"]),
    law("EC5", &["(~a)[s,t] = a[t,s]"]),
    law("EC6", &["F[s,t] = t"]),
    law("EC7", &["(a&b)[s,t] = a[b[s,t],t]"]),
    law("EC8", &["a[s,t] = a[t,t] => (a&b)[s,t] = (a&b)[t,t]"]),
];

pub const AGREEABLE_AXIOMS: &[Law] = &[
    law("EA1", &["bot*s = U", "s*bot = U"]),
    law("EA2", &["(s*t)[s,t] = (s*t)[t,t]"]),
    law("EA3", &["a[s,t]*a[u,v] = (a&(s*u))|(~a&(t*v))"]),
    law("EA4", &["(s*s)[s,bot] = s"]),
    law("EA5", &["s*s = T, s*t = U => t = bot"]),
];

/// Consequences of the C-set axioms over adas.
pub const C_SET_CONSEQUENCES: &[Law] = &[
    law("VA", &["(a|b)[s,t] = a[s,b[s,t]]"]),
    law("bot-fixed", &["a[bot,bot] = bot"]),
    law("cancel", &["a[s,u] = a[t,q] => a[s,v] = a[t,v]"]),
    law("cancel-diag", &["a[s,u] = a[r,r] => a[s,r] = a[r,r]"]),
    law("cancel-right", &["a[s,u] = a[t,u] => a[s,v] = a[t,v]"]),
    law("and-left", &["a[s,t] = a[t,t] => (b&a)[s,t] = (b&a)[t,t]"]),
    law("down-agree", &["a[s,t] = a[t,t] => a^[s,t] = a^[t,t]"]),
    law("skeleton-idem", &["a^[s,s] = s"]),
    law("complement-u", &["(~(a^|(~a)^)|U)&a = U"]),
];

/// Consequences of the agreeable axioms.
pub const AGREEABLE_CONSEQUENCES: &[Law] = &[law("star-symmetric", &["s*t = t*s"])];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    CAlgebra,
    Ada,
    BSet,
    AgreeableBSet,
    CSet,
    Agreeable,
    /// [`C_SET_CONSEQUENCES`], plus [`AGREEABLE_CONSEQUENCES`] when the
    /// model has `*`.
    Consequences,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::CAlgebra => "calg",
            Suite::Ada => "ada",
            Suite::BSet => "bset",
            Suite::AgreeableBSet => "agbset",
            Suite::CSet => "cset",
            Suite::Agreeable => "agreeable",
            Suite::Consequences => "consequences",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "calg" | "c_algebra" => Suite::CAlgebra,
            "ada" => Suite::Ada,
            "bset" | "b_set" => Suite::BSet,
            "agbset" | "agreeable_b_set" => Suite::AgreeableBSet,
            "cset" | "c_set" => Suite::CSet,
            "agreeable" | "agcset" => Suite::Agreeable,
            "consequences" => Suite::Consequences,
            other => return Err(format!("unknown suite `{other}`")),
        })
    }
}

/// How a suite enumerates assignments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    /// `samples` uniformly random assignments per statement, drawn from a
    /// ChaCha stream seeded with `seed`.
    Sampled { samples: u64, seed: u64 },
}

/// Checks one law in `m` under every assignment of model values.
pub fn check_law<S: Structure + Sync + ?Sized>(
    m: &S,
    law: &Law,
    parallel: bool,
) -> Result<AxiomOutcome, DecisionError> {
    check_law_with(m, law, parallel, &mut None)
}

fn check_law_with<S: Structure + Sync + ?Sized>(
    m: &S,
    law: &Law,
    parallel: bool,
    sampler: &mut Option<(u64, ChaCha8Rng)>,
) -> Result<AxiomOutcome, DecisionError> {
    let mut instances = 0;
    let mut witness_env = None;
    for text in law.statements {
        let stmt = parse_statement(text)?;
        let c = Compiled::new(&stmt, m)?;
        let domains: Vec<Vec<usize>> = c
            .vars
            .iter()
            .map(|(_, sort, _)| match sort {
                Sort::Test => (0..m.tests().size()).collect(),
                Sort::Element => (0..m.point_count()).collect(),
            })
            .collect();
        let total = total_instances(&domains)?;
        let failure = match sampler {
            None => {
                instances += total;
                first_failure(&c, m, &domains, total, parallel)
            }
            Some((samples, rng)) => {
                instances += *samples;
                let mut sc = c.scratch();
                (0..*samples).map(|_| rng.gen_range(0..total)).find(|&i| {
                    c.load(&domains, i, &mut sc);
                    !c.holds(m, &mut sc)
                })
            }
        };
        if let Some(i) = failure {
            witness_env = Some(witness(&c, m, &domains, i, stmt.conclusion().sort()).0);
            break;
        }
    }
    Ok(AxiomOutcome {
        label: law.label.to_string(),
        statement: law.statements.join("; "),
        passed: witness_env.is_none(),
        instances,
        witness: witness_env,
    })
}

fn check_laws<S: Structure + Sync + ?Sized>(
    m: &S,
    suite: Suite,
    laws: &[Law],
    coverage: Coverage,
) -> Result<SuiteReport, DecisionError> {
    let mut sampler = match coverage {
        Coverage::Exhaustive => None,
        Coverage::Sampled { samples, seed } => Some((samples, ChaCha8Rng::seed_from_u64(seed))),
    };
    let outcomes = laws
        .iter()
        .map(|l| check_law_with(m, l, true, &mut sampler))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteReport::new(suite.name(), outcomes))
}

/// Runs an axiom suite exhaustively on a finite model.
pub fn verify_axiom_suite<S: Structure + Sync + ?Sized>(
    m: &S,
    suite: Suite,
) -> Result<SuiteReport, DecisionError> {
    verify_axiom_suite_with(m, suite, Coverage::Exhaustive)
}

/// Runs an axiom suite with the given coverage. The algebra suites are
/// always exhaustive.
pub fn verify_axiom_suite_with<S: Structure + Sync + ?Sized>(
    m: &S,
    suite: Suite,
    coverage: Coverage,
) -> Result<SuiteReport, DecisionError> {
    let inapplicable = |reason: &str| DecisionError::InapplicableSuite {
        suite,
        reason: reason.to_string(),
    };
    match suite {
        Suite::CAlgebra => Ok(classify_algebra(m.tests(), AlgebraClass::CAlgebra)?),
        Suite::Ada => classify_algebra(m.tests(), AlgebraClass::Ada).map_err(|e| inapplicable(&e.to_string())),
        Suite::BSet => check_laws(m, suite, B_SET_AXIOMS, coverage),
        Suite::AgreeableBSet => {
            if !m.has_star() {
                return Err(inapplicable("the model has no equality test"));
            }
            check_laws(m, suite, AGREEABLE_B_SET_AXIOMS, coverage)
        }
        Suite::CSet => {
            if m.bottom().is_none() || m.tests().undefined().is_none() {
                return Err(inapplicable("C-sets need bot and a test algebra with U"));
            }
            check_laws(m, suite, C_SET_AXIOMS, coverage)
        }
        Suite::Agreeable => {
            if !m.has_star() {
                return Err(inapplicable("the model has no equality test"));
            }
            if m.bottom().is_none() {
                return Err(inapplicable("the model has no bot"));
            }
            check_laws(m, suite, AGREEABLE_AXIOMS, coverage)
        }
        Suite::Consequences => {
            if m.bottom().is_none() || !m.tests().has_down() {
                return Err(inapplicable("needs bot and an ada of tests"));
            }
            let mut laws = C_SET_CONSEQUENCES.to_vec();
            if m.has_star() {
                laws.extend_from_slice(AGREEABLE_CONSEQUENCES);
            }
            check_laws(m, suite, &laws, coverage)
        }
    }
}

// ---------------------------------------------------------------- star search

/// A basic C-set with an arbitrary (unchecked) candidate equality table.
struct CandidateStar<'a> {
    base: &'a FiniteCSet,
    star: Vec<usize>,
}

impl Structure for CandidateStar<'_> {
    fn tests(&self) -> &AlgebraTables {
        self.base.tests()
    }

    fn point_count(&self) -> usize {
        self.base.points()
    }

    fn bottom(&self) -> Option<usize> {
        Some(BOTTOM)
    }

    fn act(&self, test: usize, s: usize, t: usize) -> usize {
        self.base.action_at(test, s, t)
    }

    fn star(&self, s: usize, t: usize) -> usize {
        self.star[s * self.base.points() + t]
    }

    fn has_star(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        "candidate".into()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarSearch {
    pub points: usize,
    pub examined: u64,
    /// Every table satisfying the agreeable axioms, as `table[s][t]`.
    pub tables: Vec<Vec<Vec<TruthValue>>>,
    /// True iff exactly one table was found and it is the basic one.
    pub unique_and_basic: bool,
}

impl fmt::Display for StarSearch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "examined {} candidate tables on {} points: {} satisfy the agreeable axioms",
            self.examined,
            self.points,
            self.tables.len()
        )?;
        for table in &self.tables {
            for row in table {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(f, "  {}", cells.join(" "))?;
            }
            writeln!(f)?;
        }
        write!(
            f,
            "unique and equal to the basic equality test: {}",
            if self.unique_and_basic { "yes" } else { "no" }
        )
    }
}

/// Finds every table `* : S x S -> 3` making the basic C-set on `points`
/// points satisfy the agreeable axioms.
pub fn unique_star_search(points: usize, force: bool) -> Result<StarSearch, DecisionError> {
    if points < 2 {
        return Err(DecisionError::StarSearchTooSmall(points));
    }
    if points > 4 && !force {
        return Err(DecisionError::StarSearchGuard { points });
    }
    let cells = points * points;
    let total = 3u128.pow(cells as u32);
    if total > MAX_INSTANCES as u128 {
        return Err(DecisionError::TooLarge(total));
    }
    let base = FiniteCSet::basic(points, false);
    let template = CandidateStar {
        base: &base,
        star: vec![0; cells],
    };
    let mut laws = Vec::new();
    for law in AGREEABLE_AXIOMS {
        for text in law.statements {
            let stmt = parse_statement(text)?;
            let c = Compiled::new(&stmt, &template)?;
            let domains: Vec<Vec<usize>> = c
                .vars
                .iter()
                .map(|(_, sort, _)| match sort {
                    Sort::Test => (0..3).collect(),
                    Sort::Element => (0..points).collect(),
                })
                .collect();
            let n = total_instances(&domains)?;
            laws.push((c, domains, n));
        }
    }
    let decode = |mut code: u64| -> Vec<usize> {
        (0..cells)
            .map(|_| {
                let d = (code % 3) as usize;
                code /= 3;
                d
            })
            .collect()
    };
    let found: Vec<u64> = (0..total as u64)
        .into_par_iter()
        .filter(|&code| {
            let cand = CandidateStar {
                base: &base,
                star: decode(code),
            };
            laws.iter()
                .all(|(c, d, n)| first_failure(c, &cand, d, *n, false).is_none())
        })
        .collect();
    let tables: Vec<Vec<Vec<TruthValue>>> = found
        .iter()
        .map(|&code| {
            decode(code)
                .chunks(points)
                .map(|row| {
                    row.iter()
                        .map(|&i| TruthValue::from_index(i).expect("index < 3"))
                        .collect()
                })
                .collect()
        })
        .collect();
    let basic: Vec<Vec<TruthValue>> = (0..points)
        .map(|s| (0..points).map(|t| basic_star(s, t)).collect())
        .collect();
    Ok(StarSearch {
        points,
        examined: total as u64,
        unique_and_basic: tables.len() == 1 && tables[0] == basic,
        tables,
    })
}
