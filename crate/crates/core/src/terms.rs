//! Two-sorted terms over tests and elements: parsing, rendering, free
//! variables and evaluation in finite models.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! statement := identity ("," identity)* "=>" identity | identity | expr
//! identity  := expr "=" expr
//! expr      := or ("*" or)*
//! or        := and ("|" and)*
//! and       := unary ("&" unary)*
//! unary     := "~" unary | postfix
//! postfix   := atom ("^" | "[" expr "," expr "]")*
//! atom      := "T" | "F" | "U" | "bot" | ident | "(" expr ")"
//! ```
//!
//! Postfix operators bind tighter than `~`, so `~a^` is `~(a^)` and
//! `~a[s,t]` is ill-sorted; write `(~a)[s,t]`. Variable sorts are inferred
//! from position; using one name in both sorts is rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::logic::TruthValue;
use crate::models::Structure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Test,
    Element,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Test => "test",
            Sort::Element => "element",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(TruthValue),
    TestVar(String),
    Neg(Box<Term>),
    And(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
    Down(Box<Term>),
    Star(Box<Term>, Box<Term>),
    Bottom,
    ElemVar(String),
    Action(Box<Term>, Box<Term>, Box<Term>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at column {}: {message}", pos + 1)]
    Syntax { pos: usize, message: String },
    #[error("variable `{var}` is used both as a {first} and as a {second}")]
    SortConflict { var: String, first: Sort, second: Sort },
    #[error("expected a {expected} term at column {}, found a {found} term", pos + 1)]
    SortMismatch {
        pos: usize,
        expected: Sort,
        found: Sort,
    },
    #[error("cannot infer the sort of variable `{var}`")]
    UnresolvedSort { var: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("ill-sorted term `{term}`: expected {expected}")]
    IllSorted { term: String, expected: Sort },
    #[error("identity sides have different sorts: `{lhs}` vs `{rhs}`")]
    SideSorts { lhs: String, rhs: String },
    #[error("variable `{0}` is used in both sorts")]
    MixedVariable(String),
}

impl Term {
    pub fn test_var(name: &str) -> Term {
        Term::TestVar(name.to_string())
    }

    pub fn elem_var(name: &str) -> Term {
        Term::ElemVar(name.to_string())
    }

    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::Or(Box::new(a), Box::new(b))
    }

    pub fn down(a: Term) -> Term {
        Term::Down(Box::new(a))
    }

    pub fn star(s: Term, t: Term) -> Term {
        Term::Star(Box::new(s), Box::new(t))
    }

    pub fn action(a: Term, s: Term, t: Term) -> Term {
        Term::Action(Box::new(a), Box::new(s), Box::new(t))
    }

    /// The sort of the head constructor.
    pub fn sort(&self) -> Sort {
        match self {
            Term::Bottom | Term::ElemVar(_) | Term::Action(..) => Sort::Element,
            _ => Sort::Test,
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Const(_) | Term::TestVar(_) | Term::Bottom | Term::ElemVar(_) => vec![],
            Term::Neg(a) | Term::Down(a) => vec![a],
            Term::And(a, b) | Term::Or(a, b) | Term::Star(a, b) => vec![a, b],
            Term::Action(a, s, t) => vec![a, s, t],
        }
    }

    /// Checks that every child has the sort its constructor requires.
    pub fn validate(&self) -> Result<(), TermError> {
        let expect = |t: &Term, sort: Sort| {
            if t.sort() != sort {
                Err(TermError::IllSorted {
                    term: t.to_string(),
                    expected: sort,
                })
            } else {
                Ok(())
            }
        };
        match self {
            Term::Neg(a) | Term::Down(a) => expect(a, Sort::Test)?,
            Term::And(a, b) | Term::Or(a, b) => {
                expect(a, Sort::Test)?;
                expect(b, Sort::Test)?;
            }
            Term::Star(s, t) => {
                expect(s, Sort::Element)?;
                expect(t, Sort::Element)?;
            }
            Term::Action(a, s, t) => {
                expect(a, Sort::Test)?;
                expect(s, Sort::Element)?;
                expect(t, Sort::Element)?;
            }
            _ => {}
        }
        self.children().into_iter().try_for_each(Term::validate)
    }

    /// Replaces variables by terms. Keys are variable names; the replacement
    /// is applied regardless of sort, so callers keep sorts consistent.
    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Term {
        let sub = |t: &Term| Box::new(t.substitute(map));
        match self {
            Term::TestVar(v) | Term::ElemVar(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) | Term::Bottom => self.clone(),
            Term::Neg(a) => Term::Neg(sub(a)),
            Term::Down(a) => Term::Down(sub(a)),
            Term::And(a, b) => Term::And(sub(a), sub(b)),
            Term::Or(a, b) => Term::Or(sub(a), sub(b)),
            Term::Star(a, b) => Term::Star(sub(a), sub(b)),
            Term::Action(a, s, t) => Term::Action(sub(a), sub(s), sub(t)),
        }
    }

    pub fn uses_star(&self) -> bool {
        matches!(self, Term::Star(..)) || self.children().into_iter().any(Term::uses_star)
    }

    pub fn uses_down(&self) -> bool {
        matches!(self, Term::Down(_)) || self.children().into_iter().any(Term::uses_down)
    }

    pub fn uses_undefined(&self) -> bool {
        matches!(self, Term::Const(TruthValue::U))
            || self.children().into_iter().any(Term::uses_undefined)
    }

    pub fn uses_bottom(&self) -> bool {
        matches!(self, Term::Bottom) || self.children().into_iter().any(Term::uses_bottom)
    }

    /// True if any subterm (including this one) is element-sorted.
    pub fn has_elements(&self) -> bool {
        self.sort() == Sort::Element || self.children().into_iter().any(Term::has_elements)
    }

    fn collect_vars(&self, out: &mut Vec<(String, Sort)>) {
        match self {
            Term::TestVar(v) => push_var(out, v, Sort::Test),
            Term::ElemVar(v) => push_var(out, v, Sort::Element),
            _ => self.children().into_iter().for_each(|c| c.collect_vars(out)),
        }
    }

    /// Variables in order of first appearance (left to right).
    pub fn vars_in_order(&self) -> Vec<(String, Sort)> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn level(&self) -> u8 {
        match self {
            Term::Star(..) => 0,
            Term::Or(..) => 1,
            Term::And(..) => 2,
            Term::Neg(_) => 3,
            Term::Down(_) | Term::Action(..) => 4,
            _ => 5,
        }
    }

    fn render_at(&self, min: u8, out: &mut String) {
        let paren = self.level() < min;
        if paren {
            out.push('(');
        }
        match self {
            Term::Const(v) => out.push_str(&v.to_string()),
            Term::TestVar(v) | Term::ElemVar(v) => out.push_str(v),
            Term::Bottom => out.push_str("bot"),
            Term::Star(a, b) => {
                a.render_at(1, out);
                out.push('*');
                b.render_at(1, out);
            }
            Term::Or(a, b) => {
                a.render_at(1, out);
                out.push('|');
                b.render_at(2, out);
            }
            Term::And(a, b) => {
                a.render_at(2, out);
                out.push('&');
                b.render_at(3, out);
            }
            Term::Neg(a) => {
                out.push('~');
                a.render_at(3, out);
            }
            Term::Down(a) => {
                a.render_at(4, out);
                out.push('^');
            }
            Term::Action(a, s, t) => {
                a.render_at(4, out);
                out.push('[');
                s.render_at(0, out);
                out.push(',');
                t.render_at(0, out);
                out.push(']');
            }
        }
        if paren {
            out.push(')');
        }
    }
}

fn push_var(out: &mut Vec<(String, Sort)>, name: &str, sort: Sort) {
    if !out.iter().any(|(v, _)| v == name) {
        out.push((name.to_string(), sort));
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.render_at(0, &mut out);
        f.write_str(&out)
    }
}

/// Renders a term in the canonical concrete syntax.
pub fn render(t: &Term) -> String {
    t.to_string()
}

/// Test variables and element variables occurring in `t`.
pub fn free_vars(t: &Term) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut tests = BTreeSet::new();
    let mut elems = BTreeSet::new();
    for (v, sort) in t.vars_in_order() {
        match sort {
            Sort::Test => tests.insert(v),
            Sort::Element => elems.insert(v),
        };
    }
    (tests, elems)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
}

impl Identity {
    pub fn new(lhs: Term, rhs: Term) -> Result<Self, TermError> {
        lhs.validate()?;
        rhs.validate()?;
        if lhs.sort() != rhs.sort() {
            return Err(TermError::SideSorts {
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            });
        }
        Ok(Identity { lhs, rhs })
    }

    pub fn sort(&self) -> Sort {
        self.lhs.sort()
    }

    fn terms(&self) -> [&Term; 2] {
        [&self.lhs, &self.rhs]
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuasiIdentity {
    pub premises: Vec<Identity>,
    pub conclusion: Identity,
}

impl fmt::Display for QuasiIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let premises: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
        write!(f, "{} => {}", premises.join(", "), self.conclusion)
    }
}

/// An identity or quasi-identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Statement {
    Identity(Identity),
    Quasi(QuasiIdentity),
}

impl Statement {
    pub fn premises(&self) -> &[Identity] {
        match self {
            Statement::Identity(_) => &[],
            Statement::Quasi(q) => &q.premises,
        }
    }

    pub fn conclusion(&self) -> &Identity {
        match self {
            Statement::Identity(id) => id,
            Statement::Quasi(q) => &q.conclusion,
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        self.premises()
            .iter()
            .chain(std::iter::once(self.conclusion()))
            .flat_map(Identity::terms)
            .collect()
    }

    /// Variables in order of first appearance across premises and conclusion.
    pub fn vars_in_order(&self) -> Result<Vec<(String, Sort)>, TermError> {
        let mut out: Vec<(String, Sort)> = Vec::new();
        for t in self.terms() {
            for (v, sort) in t.vars_in_order() {
                match out.iter().find(|(w, _)| *w == v) {
                    Some((_, s)) if *s != sort => return Err(TermError::MixedVariable(v)),
                    Some(_) => {}
                    None => out.push((v, sort)),
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Identity(id) => id.fmt(f),
            Statement::Quasi(q) => q.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parsed {
    Term(Term),
    Identity(Identity),
    Quasi(QuasiIdentity),
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Amp,
    Pipe,
    Tilde,
    Caret,
    Star,
    Eq,
    Arrow,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::End => f.write_str("end of input"),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Comma => ",",
                    Tok::Amp => "&",
                    Tok::Pipe => "|",
                    Tok::Tilde => "~",
                    Tok::Caret => "^",
                    Tok::Star => "*",
                    Tok::Eq => "=",
                    Tok::Arrow => "=>",
                    _ => unreachable!(),
                };
                write!(f, "`{s}`")
            }
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '~' => Tok::Tilde,
            '^' => Tok::Caret,
            '*' => Tok::Star,
            '=' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Arrow
            }
            '=' => Tok::Eq,
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < chars.len()
                    && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_' || chars[i + 1] == '\'')
                {
                    i += 1;
                }
                Tok::Ident(chars[start..=i].iter().collect())
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        toks.push((tok, start));
        i += 1;
    }
    toks.push((Tok::End, chars.len()));
    Ok(toks)
}

// ---------------------------------------------------------------- parser

#[derive(Debug)]
enum RawKind {
    Const(TruthValue),
    Bottom,
    Var(String),
    Neg(Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Down(Box<Raw>),
    Star(Box<Raw>, Box<Raw>),
    Action(Box<Raw>, Box<Raw>, Box<Raw>),
}

#[derive(Debug)]
struct Raw {
    kind: RawKind,
    pos: usize,
}

impl Raw {
    fn new(kind: RawKind, pos: usize) -> Box<Raw> {
        Box::new(Raw { kind, pos })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn expr(&mut self) -> Result<Box<Raw>, ParseError> {
        let mut lhs = self.or()?;
        while *self.peek() == Tok::Star {
            let pos = lhs.pos;
            self.bump();
            let rhs = self.or()?;
            lhs = Raw::new(RawKind::Star(lhs, rhs), pos);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Box<Raw>, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Pipe {
            let pos = lhs.pos;
            self.bump();
            let rhs = self.and()?;
            lhs = Raw::new(RawKind::Or(lhs, rhs), pos);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Box<Raw>, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            let pos = lhs.pos;
            self.bump();
            let rhs = self.unary()?;
            lhs = Raw::new(RawKind::And(lhs, rhs), pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Box<Raw>, ParseError> {
        if *self.peek() == Tok::Tilde {
            let pos = self.pos();
            self.bump();
            let inner = self.unary()?;
            return Ok(Raw::new(RawKind::Neg(inner), pos));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Box<Raw>, ParseError> {
        let mut node = self.atom()?;
        loop {
            match self.peek() {
                Tok::Caret => {
                    self.bump();
                    let pos = node.pos;
                    node = Raw::new(RawKind::Down(node), pos);
                }
                Tok::LBracket => {
                    self.bump();
                    let s = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let t = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    let pos = node.pos;
                    node = Raw::new(RawKind::Action(node, s, t), pos);
                }
                _ => return Ok(node),
            }
        }
    }

    fn atom(&mut self) -> Result<Box<Raw>, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(name) => {
                let kind = match name.as_str() {
                    "T" => RawKind::Const(TruthValue::T),
                    "F" => RawKind::Const(TruthValue::F),
                    "U" => RawKind::Const(TruthValue::U),
                    "bot" => RawKind::Bottom,
                    _ => RawKind::Var(name),
                };
                Ok(Raw::new(kind, pos))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(ParseError::Syntax {
                pos,
                message: format!("expected a term, found {other}"),
            }),
        }
    }
}

// ---------------------------------------------------------------- sorts

type SortEnv = BTreeMap<String, Sort>;

fn synth(raw: &Raw, env: &SortEnv) -> Option<Sort> {
    match &raw.kind {
        RawKind::Var(v) => env.get(v).copied(),
        RawKind::Bottom | RawKind::Action(..) => Some(Sort::Element),
        _ => Some(Sort::Test),
    }
}

fn check(raw: &Raw, sort: Sort, env: &mut SortEnv) -> Result<(), ParseError> {
    let mismatch = |found| {
        Err(ParseError::SortMismatch {
            pos: raw.pos,
            expected: sort,
            found,
        })
    };
    match &raw.kind {
        RawKind::Var(v) => match env.get(v) {
            Some(&s) if s != sort => Err(ParseError::SortConflict {
                var: v.clone(),
                first: s,
                second: sort,
            }),
            Some(_) => Ok(()),
            None => {
                env.insert(v.clone(), sort);
                Ok(())
            }
        },
        RawKind::Bottom | RawKind::Action(..) if sort == Sort::Test => mismatch(Sort::Element),
        RawKind::Const(_)
        | RawKind::Neg(_)
        | RawKind::And(..)
        | RawKind::Or(..)
        | RawKind::Down(_)
        | RawKind::Star(..)
            if sort == Sort::Element =>
        {
            mismatch(Sort::Test)
        }
        RawKind::Const(_) | RawKind::Bottom => Ok(()),
        RawKind::Neg(a) | RawKind::Down(a) => check(a, Sort::Test, env),
        RawKind::And(a, b) | RawKind::Or(a, b) => {
            check(a, Sort::Test, env)?;
            check(b, Sort::Test, env)
        }
        RawKind::Star(s, t) => {
            check(s, Sort::Element, env)?;
            check(t, Sort::Element, env)
        }
        RawKind::Action(a, s, t) => {
            check(a, Sort::Test, env)?;
            check(s, Sort::Element, env)?;
            check(t, Sort::Element, env)
        }
    }
}

fn to_term(raw: &Raw, env: &SortEnv) -> Term {
    let sub = |r: &Raw| Box::new(to_term(r, env));
    match &raw.kind {
        RawKind::Const(v) => Term::Const(*v),
        RawKind::Bottom => Term::Bottom,
        RawKind::Var(v) => match env[v] {
            Sort::Test => Term::TestVar(v.clone()),
            Sort::Element => Term::ElemVar(v.clone()),
        },
        RawKind::Neg(a) => Term::Neg(sub(a)),
        RawKind::Down(a) => Term::Down(sub(a)),
        RawKind::And(a, b) => Term::And(sub(a), sub(b)),
        RawKind::Or(a, b) => Term::Or(sub(a), sub(b)),
        RawKind::Star(a, b) => Term::Star(sub(a), sub(b)),
        RawKind::Action(a, s, t) => Term::Action(sub(a), sub(s), sub(t)),
    }
}

fn first_var(raw: &Raw) -> Option<&str> {
    match &raw.kind {
        RawKind::Var(v) => Some(v),
        RawKind::Const(_) | RawKind::Bottom => None,
        RawKind::Neg(a) | RawKind::Down(a) => first_var(a),
        RawKind::And(a, b) | RawKind::Or(a, b) | RawKind::Star(a, b) => {
            first_var(a).or_else(|| first_var(b))
        }
        RawKind::Action(a, s, t) => first_var(a).or_else(|| first_var(s)).or_else(|| first_var(t)),
    }
}

/// Parses a term, identity or quasi-identity.
pub fn parse(text: &str) -> Result<Parsed, ParseError> {
    parse_with_sorts(text, &BTreeMap::new())
}

/// Like [`parse`], with sorts for some variables fixed in advance. This is
/// how a bare variable such as `s` gets a sort.
pub fn parse_with_sorts(text: &str, known: &BTreeMap<String, Sort>) -> Result<Parsed, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let mut sides: Vec<(Box<Raw>, Box<Raw>)> = Vec::new();
    let first = p.expr()?;
    let mut bare = None;
    if *p.peek() == Tok::Eq {
        p.bump();
        sides.push((first, p.expr()?));
        while *p.peek() == Tok::Comma {
            p.bump();
            let lhs = p.expr()?;
            p.expect(Tok::Eq)?;
            sides.push((lhs, p.expr()?));
        }
    } else {
        bare = Some(first);
    }
    let mut quasi = false;
    if bare.is_none() && *p.peek() == Tok::Arrow {
        p.bump();
        let lhs = p.expr()?;
        p.expect(Tok::Eq)?;
        sides.push((lhs, p.expr()?));
        quasi = true;
    }
    if *p.peek() != Tok::End {
        return p.error(format!("unexpected {}", p.peek()));
    }
    if !quasi && sides.len() > 1 {
        return p.error("a list of identities must end with `=> conclusion`");
    }

    // Sorts propagate from constructors through variables and across `=`;
    // iterate until nothing changes.
    let mut env: SortEnv = known.clone();
    if let Some(raw) = &bare {
        return match synth(raw, &env) {
            Some(sort) => {
                check(raw, sort, &mut env)?;
                Ok(Parsed::Term(to_term(raw, &env)))
            }
            None => Err(ParseError::UnresolvedSort {
                var: first_var(raw).unwrap_or_default().to_string(),
            }),
        };
    }
    loop {
        let before = env.len();
        for (lhs, rhs) in &sides {
            if let Some(sort) = synth(lhs, &env).or_else(|| synth(rhs, &env)) {
                check(lhs, sort, &mut env)?;
                check(rhs, sort, &mut env)?;
            }
        }
        if env.len() == before {
            break;
        }
    }
    for (lhs, rhs) in &sides {
        if synth(lhs, &env).is_none() && synth(rhs, &env).is_none() {
            return Err(ParseError::UnresolvedSort {
                var: first_var(lhs).unwrap_or_default().to_string(),
            });
        }
    }
    let mut ids: Vec<Identity> = sides
        .iter()
        .map(|(l, r)| Identity {
            lhs: to_term(l, &env),
            rhs: to_term(r, &env),
        })
        .collect();
    if quasi {
        let conclusion = ids.pop().expect("conclusion present");
        Ok(Parsed::Quasi(QuasiIdentity {
            premises: ids,
            conclusion,
        }))
    } else {
        Ok(Parsed::Identity(ids.pop().expect("one identity")))
    }
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    parse_term_with_sorts(text, &BTreeMap::new())
}

pub fn parse_term_with_sorts(text: &str, known: &BTreeMap<String, Sort>) -> Result<Term, ParseError> {
    match parse_with_sorts(text, known)? {
        Parsed::Term(t) => Ok(t),
        _ => Err(ParseError::Syntax {
            pos: 0,
            message: "expected a term, found an identity".into(),
        }),
    }
}

/// Parses an identity or quasi-identity (a bare term is rejected).
pub fn parse_statement(text: &str) -> Result<Statement, ParseError> {
    match parse(text)? {
        Parsed::Identity(id) => Ok(Statement::Identity(id)),
        Parsed::Quasi(q) => Ok(Statement::Quasi(q)),
        Parsed::Term(_) => Err(ParseError::Syntax {
            pos: text.len(),
            message: "expected `=`".into(),
        }),
    }
}

/// Parses a corpus: one statement per line, `#` starts a comment.
/// Returns `(line number, statement)` pairs.
pub fn parse_corpus(text: &str) -> Result<Vec<(usize, Statement)>, (usize, ParseError)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        out.push((i + 1, parse_statement(body).map_err(|e| (i + 1, e))?));
    }
    Ok(out)
}

// ---------------------------------------------------------------- evaluation

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Test(usize),
    Element(usize),
}

impl Value {
    pub fn index(self) -> usize {
        match self {
            Value::Test(i) | Value::Element(i) => i,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("the model has no equality test `*`")]
    MissingStar,
    #[error("the model has no base point `bot`")]
    MissingBottom,
    #[error("the model's tests have no `^` operation")]
    MissingDown,
    #[error("the model's tests have no constant U")]
    MissingUndefined,
    #[error("value {value} of `{var}` is out of range (size {size})")]
    OutOfRange { var: String, value: usize, size: usize },
    #[error(transparent)]
    IllSorted(#[from] TermError),
}

/// Variable assignment: test variables to test indices, element variables to
/// point indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    pub tests: BTreeMap<String, usize>,
    pub elements: BTreeMap<String, usize>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with_test(mut self, name: &str, value: usize) -> Self {
        self.tests.insert(name.to_string(), value);
        self
    }

    pub fn with_element(mut self, name: &str, value: usize) -> Self {
        self.elements.insert(name.to_string(), value);
        self
    }
}

/// Evaluates `t` in `m` by structural recursion.
pub fn evaluate<S: Structure + ?Sized>(t: &Term, env: &Env, m: &S) -> Result<Value, EvalError> {
    t.validate()?;
    let layout = VarLayout {
        tests: env.tests.keys().cloned().collect(),
        elements: env.elements.keys().cloned().collect(),
    };
    let tvals: Vec<usize> = env.tests.values().copied().collect();
    let evals: Vec<usize> = env.elements.values().copied().collect();
    for (name, &v) in env.tests.iter() {
        if v >= m.tests().size() {
            return Err(EvalError::OutOfRange {
                var: name.clone(),
                value: v,
                size: m.tests().size(),
            });
        }
    }
    for (name, &v) in env.elements.iter() {
        if v >= m.point_count() {
            return Err(EvalError::OutOfRange {
                var: name.clone(),
                value: v,
                size: m.point_count(),
            });
        }
    }
    let prog = Program::compile(t, &layout, m)?;
    let v = prog.run(m, &tvals, &evals, &mut Vec::new());
    Ok(match t.sort() {
        Sort::Test => Value::Test(v),
        Sort::Element => Value::Element(v),
    })
}

/// Slot assignment for compiled programs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarLayout {
    pub tests: Vec<String>,
    pub elements: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Lit(usize),
    TVar(usize),
    EVar(usize),
    Neg(usize),
    And(usize, usize),
    Or(usize, usize),
    Down(usize),
    Star(usize, usize),
    Act(usize, usize, usize),
}

/// A term flattened to post-order with variables resolved to slots and
/// constants to indices of one model; operands refer to earlier ops.
#[derive(Clone, Debug)]
pub struct Program {
    ops: Vec<Op>,
}

impl Program {
    pub fn compile<S: Structure + ?Sized>(
        t: &Term,
        layout: &VarLayout,
        m: &S,
    ) -> Result<Program, EvalError> {
        let mut ops = Vec::new();
        Self::emit(t, layout, m, &mut ops)?;
        Ok(Program { ops })
    }

    fn emit<S: Structure + ?Sized>(
        t: &Term,
        layout: &VarLayout,
        m: &S,
        ops: &mut Vec<Op>,
    ) -> Result<usize, EvalError> {
        let op = match t {
            Term::Const(v) => Op::Lit(match v {
                TruthValue::T => m.tests().top(),
                TruthValue::F => m.tests().bottom(),
                TruthValue::U => m.tests().undefined().ok_or(EvalError::MissingUndefined)?,
            }),
            Term::Bottom => Op::Lit(m.bottom().ok_or(EvalError::MissingBottom)?),
            Term::TestVar(v) => Op::TVar(
                layout
                    .tests
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| EvalError::Unbound(v.clone()))?,
            ),
            Term::ElemVar(v) => Op::EVar(
                layout
                    .elements
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| EvalError::Unbound(v.clone()))?,
            ),
            Term::Neg(a) => Op::Neg(Self::emit(a, layout, m, ops)?),
            Term::Down(a) => {
                if !m.tests().has_down() {
                    return Err(EvalError::MissingDown);
                }
                Op::Down(Self::emit(a, layout, m, ops)?)
            }
            Term::And(a, b) => {
                let a = Self::emit(a, layout, m, ops)?;
                Op::And(a, Self::emit(b, layout, m, ops)?)
            }
            Term::Or(a, b) => {
                let a = Self::emit(a, layout, m, ops)?;
                Op::Or(a, Self::emit(b, layout, m, ops)?)
            }
            Term::Star(s, u) => {
                if !m.has_star() {
                    return Err(EvalError::MissingStar);
                }
                let s = Self::emit(s, layout, m, ops)?;
                Op::Star(s, Self::emit(u, layout, m, ops)?)
            }
            Term::Action(a, s, u) => {
                let a = Self::emit(a, layout, m, ops)?;
                let s = Self::emit(s, layout, m, ops)?;
                Op::Act(a, s, Self::emit(u, layout, m, ops)?)
            }
        };
        ops.push(op);
        Ok(ops.len() - 1)
    }

    /// Runs the program; `scratch` is reused between calls to avoid
    /// allocation. The model must be the one the program was compiled for.
    #[inline]
    pub fn run<S: Structure + ?Sized>(
        &self,
        m: &S,
        tvals: &[usize],
        evals: &[usize],
        scratch: &mut Vec<usize>,
    ) -> usize {
        scratch.clear();
        let tables = m.tests();
        for op in &self.ops {
            let v = match *op {
                Op::Lit(i) => i,
                Op::TVar(i) => tvals[i],
                Op::EVar(i) => evals[i],
                Op::Neg(a) => tables.neg(scratch[a]),
                Op::And(a, b) => tables.and(scratch[a], scratch[b]),
                Op::Or(a, b) => tables.or(scratch[a], scratch[b]),
                Op::Down(a) => tables.down(scratch[a]).expect("checked at compile time"),
                Op::Star(a, b) => m.star(scratch[a], scratch[b]),
                Op::Act(a, s, t) => m.act(scratch[a], scratch[s], scratch[t]),
            };
            scratch.push(v);
        }
        *scratch.last().expect("non-empty program")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FiniteCSet, BOTTOM};
    use proptest::prelude::*;

    fn id(text: &str) -> Identity {
        match parse(text).unwrap() {
            Parsed::Identity(id) => id,
            other => panic!("not an identity: {other:?}"),
        }
    }

    #[test]
    fn parse_examples() {
        let e = id("U[s,t] = bot");
        assert_eq!(
            e.lhs,
            Term::action(
                Term::Const(TruthValue::U),
                Term::elem_var("s"),
                Term::elem_var("t")
            )
        );
        assert_eq!(e.rhs, Term::Bottom);

        let e = id("(a&b)[s,t] = a[b[s,t],t]");
        let (a, b, s, t) = (
            Term::test_var("a"),
            Term::test_var("b"),
            Term::elem_var("s"),
            Term::elem_var("t"),
        );
        assert_eq!(e.lhs, Term::action(Term::and(a.clone(), b.clone()), s.clone(), t.clone()));
        assert_eq!(
            e.rhs,
            Term::action(a, Term::action(b, s.clone(), t.clone()), t.clone())
        );

        match parse("s*s = T, s*t = U => t = bot").unwrap() {
            Parsed::Quasi(q) => {
                assert_eq!(q.premises.len(), 2);
                assert_eq!(q.premises[0].lhs, Term::star(s.clone(), s.clone()));
                assert_eq!(q.conclusion.lhs, t);
                assert_eq!(q.conclusion.rhs, Term::Bottom);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse_term("~a^").unwrap(),
            Term::neg(Term::down(Term::test_var("a")))
        );
        assert_eq!(
            parse_term("a|b&c").unwrap(),
            Term::or(
                Term::test_var("a"),
                Term::and(Term::test_var("b"), Term::test_var("c"))
            )
        );
        assert_eq!(
            parse_term("a&b&c").unwrap(),
            Term::and(
                Term::and(Term::test_var("a"), Term::test_var("b")),
                Term::test_var("c")
            )
        );
        // `|` binds tighter than `*`, so this is `s*(t|a)`.
        assert_eq!(
            parse_term("s*t|a").unwrap_err(),
            ParseError::SortMismatch {
                pos: 2,
                expected: Sort::Element,
                found: Sort::Test
            }
        );
    }

    #[test]
    fn render_examples() {
        let (a, b, s, t) = (
            Term::test_var("a"),
            Term::test_var("b"),
            Term::elem_var("s"),
            Term::elem_var("t"),
        );
        assert_eq!(
            render(&Term::action(Term::Const(TruthValue::U), s.clone(), t.clone())),
            "U[s,t]"
        );
        assert_eq!(render(&Term::neg(Term::and(a.clone(), b.clone()))), "~(a&b)");
        assert_eq!(render(&Term::down(a.clone())), "a^");
        assert_eq!(render(&Term::down(Term::neg(a.clone()))), "(~a)^");
        assert_eq!(
            render(&Term::action(Term::neg(a.clone()), s.clone(), t.clone())),
            "(~a)[s,t]"
        );
        assert_eq!(
            render(&Term::or(a.clone(), Term::or(b.clone(), a.clone()))),
            "a|(b|a)"
        );
        assert_eq!(render(&Term::star(s, t)), "s*t");
    }

    #[test]
    fn quasi_render_round_trip() {
        let text = "s*s = T, s*t = U => t = bot";
        match parse(text).unwrap() {
            Parsed::Quasi(q) => assert_eq!(q.to_string(), text),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse("a[s,a] = s"),
            Err(ParseError::SortConflict { ref var, .. }) if var == "a"
        ));
        assert!(matches!(parse("a[s,t"), Err(ParseError::Syntax { pos: 5, .. })));
        assert!(matches!(parse("a & $"), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse("x = y"), Err(ParseError::UnresolvedSort { .. })));
        assert!(matches!(parse("T = bot"), Err(ParseError::SortMismatch { .. })));
        assert!(parse("a = T, b = T").is_err());
        assert!(parse_statement("a&b").is_err());
    }

    #[test]
    fn sorts_propagate_across_equations() {
        // `x` is only pinned down by the second premise.
        match parse("x = y, y = a&b => x = T").unwrap() {
            Parsed::Quasi(q) => {
                assert_eq!(q.premises[0].lhs, Term::test_var("x"));
                assert_eq!(q.premises[0].rhs, Term::test_var("y"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_vars_examples() {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(
            free_vars(&parse_term("a[s, b[t,s]]").unwrap()),
            (set(&["a", "b"]), set(&["s", "t"]))
        );
        assert_eq!(free_vars(&parse_term("T").unwrap()), (set(&[]), set(&[])));
        assert_eq!(
            free_vars(&parse_term("s*t").unwrap()),
            (set(&[]), set(&["s", "t"]))
        );
    }

    #[test]
    fn corpus_skips_comments() {
        let corpus = "# header\nU[s,t] = bot\n\n a[s,s] = s # trailing\n";
        let parsed = parse_corpus(corpus).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[1].0, 4);
        assert_eq!(parse_corpus("T = T\nT =").unwrap_err().0, 2);
    }

    #[test]
    fn evaluation_examples() {
        let m = FiniteCSet::basic(4, true);
        let f_st = parse_term("F[s,t]").unwrap();
        for s in 0..4 {
            for t in 0..4 {
                let env = Env::new().with_element("s", s).with_element("t", t);
                assert_eq!(evaluate(&f_st, &env, &m).unwrap(), Value::Element(t));
                let s_bot = parse_term("s*bot").unwrap();
                assert_eq!(evaluate(&s_bot, &env, &m).unwrap(), Value::Test(2));
                for a in 0..3 {
                    let env = env.clone().with_test("a", a);
                    assert_eq!(
                        evaluate(&parse_term("(~a)[s,t]").unwrap(), &env, &m),
                        evaluate(&parse_term("a[t,s]").unwrap(), &env, &m)
                    );
                }
            }
        }
    }

    #[test]
    fn evaluation_errors() {
        let m = FiniteCSet::basic(3, false);
        let env = Env::new().with_element("s", 1);
        assert_eq!(
            evaluate(&parse_term("s*s").unwrap(), &env, &m),
            Err(EvalError::MissingStar)
        );
        assert_eq!(
            evaluate(&parse_term("a[s,s]").unwrap(), &env, &m),
            Err(EvalError::Unbound("a".into()))
        );
        assert!(matches!(parse_term("s"), Err(ParseError::UnresolvedSort { .. })));
        assert!(matches!(
            evaluate(&Term::elem_var("s"), &Env::new().with_element("s", 9), &m),
            Err(EvalError::OutOfRange { .. })
        ));
    }

    #[test]
    fn bottom_evaluates_to_index_zero() {
        let m = FiniteCSet::basic(2, false);
        assert_eq!(
            evaluate(&Term::Bottom, &Env::new(), &m).unwrap(),
            Value::Element(BOTTOM)
        );
    }

    const TEST_VARS: [&str; 3] = ["a", "b", "c"];
    const ELEM_VARS: [&str; 3] = ["s", "t", "u"];

    fn arb_test(depth: u32) -> BoxedStrategy<Term> {
        let leaf = prop_oneof![
            prop::sample::select(TruthValue::ALL.to_vec()).prop_map(Term::Const),
            prop::sample::select(TEST_VARS.to_vec()).prop_map(Term::test_var),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        let sub = arb_test(depth - 1);
        let el = arb_elem(depth - 1);
        prop_oneof![
            2 => leaf,
            1 => sub.clone().prop_map(Term::neg),
            1 => sub.clone().prop_map(Term::down),
            1 => (sub.clone(), sub.clone()).prop_map(|(a, b)| Term::and(a, b)),
            1 => (sub.clone(), sub).prop_map(|(a, b)| Term::or(a, b)),
            1 => (el.clone(), el).prop_map(|(s, t)| Term::star(s, t)),
        ]
        .boxed()
    }

    fn arb_elem(depth: u32) -> BoxedStrategy<Term> {
        let leaf = prop_oneof![
            Just(Term::Bottom),
            prop::sample::select(ELEM_VARS.to_vec()).prop_map(Term::elem_var),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        let el = arb_elem(depth - 1);
        prop_oneof![
            1 => leaf,
            2 => (arb_test(depth - 1), el.clone(), el)
                .prop_map(|(a, s, t)| Term::action(a, s, t)),
        ]
        .boxed()
    }

    fn pool_sorts() -> BTreeMap<String, Sort> {
        TEST_VARS
            .iter()
            .map(|v| (v.to_string(), Sort::Test))
            .chain(ELEM_VARS.iter().map(|v| (v.to_string(), Sort::Element)))
            .collect()
    }

    fn arb_term() -> BoxedStrategy<Term> {
        prop_oneof![arb_test(3), arb_elem(3)].boxed()
    }

    fn full_env() -> impl Strategy<Value = Env> {
        (prop::collection::vec(0..9usize, 3), prop::collection::vec(0..9usize, 3)).prop_map(
            |(tv, ev)| {
                let mut env = Env::new();
                for (name, v) in TEST_VARS.iter().zip(tv) {
                    env = env.with_test(name, v);
                }
                for (name, v) in ELEM_VARS.iter().zip(ev) {
                    env = env.with_element(name, v);
                }
                env
            },
        )
    }

    proptest! {
        #[test]
        fn parse_render_round_trip(t in arb_term()) {
            let text = render(&t);
            let known = pool_sorts();
            prop_assert_eq!(parse_term_with_sorts(&text, &known).unwrap(), t.clone());
            // Rendering is canonical: spacing does not matter.
            let spaced: String = text
                .chars()
                .map(|c| if c.is_alphanumeric() { c.to_string() } else { format!(" {c} ") })
                .collect();
            prop_assert_eq!(render(&parse_term_with_sorts(&spaced, &known).unwrap()), text);
        }

        #[test]
        fn evaluation_preserves_sorts(t in arb_term(), env in full_env()) {
            let m = FiniteCSet::functional(2);
            let v = evaluate(&t, &env, &m).unwrap();
            match t.sort() {
                Sort::Test => {
                    prop_assert!(matches!(v, Value::Test(i) if i < m.tests().size()));
                }
                Sort::Element => {
                    prop_assert!(matches!(v, Value::Element(i) if i < m.points()));
                }
            }
        }

        #[test]
        fn evaluation_is_compositional(t in arb_term(), env in full_env()) {
            // Replace the first child by a fresh variable bound to its value.
            let m = FiniteCSet::functional(2);
            let whole = evaluate(&t, &env, &m).unwrap();
            if let Some(&child) = t.children().first() {
                let v = evaluate(child, &env, &m).unwrap();
                let (fresh, env2) = match v {
                    Value::Test(i) => (Term::test_var("z"), env.clone().with_test("z", i)),
                    Value::Element(i) => (Term::elem_var("z"), env.clone().with_element("z", i)),
                };
                let replaced = match &t {
                    Term::Neg(_) => Term::neg(fresh),
                    Term::Down(_) => Term::down(fresh),
                    Term::And(_, b) => Term::and(fresh, (**b).clone()),
                    Term::Or(_, b) => Term::or(fresh, (**b).clone()),
                    Term::Star(_, b) => Term::star(fresh, (**b).clone()),
                    Term::Action(_, s, u) => Term::action(fresh, (**s).clone(), (**u).clone()),
                    _ => unreachable!(),
                };
                prop_assert_eq!(evaluate(&replaced, &env2, &m).unwrap(), whole);
            }
        }
    }
}
