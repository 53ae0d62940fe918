//! McCarthy's sequential three-valued logic, its powers as pairs of sets,
//! and exhaustive classification of finite operation tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::report::{AxiomOutcome, Binding, SuiteReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("connective `{conn}` takes {expected} argument(s), got {got}")]
    Arity {
        conn: Connective,
        expected: usize,
        got: usize,
    },
    #[error("universe mismatch: {0} vs {1}")]
    UniverseMismatch(usize, usize),
    #[error("test vector is not a pair of disjoint sets")]
    NotDisjoint,
    #[error("index {index} outside universe of size {size}")]
    OutOfUniverse { index: usize, size: usize },
    #[error("malformed tables: {0}")]
    Malformed(String),
    #[error("tables carry no `down` operation")]
    MissingDown,
    #[error("tables carry no `U` constant")]
    MissingUndefined,
    #[error("element set is not closed under the operations: {0}")]
    NotClosed(String),
    #[error("tables are not a {0}")]
    NotInClass(&'static str),
    #[error("unknown connective `{0}`")]
    UnknownConnective(String),
    #[error("unknown truth value `{0}`")]
    UnknownTruthValue(String),
}

/// A value of McCarthy's logic: true, false, or undefined (a diverging test).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TruthValue {
    T,
    F,
    U,
}

impl TruthValue {
    pub const ALL: [TruthValue; 3] = [TruthValue::T, TruthValue::F, TruthValue::U];

    /// Position in the canonical element order T, F, U used by every table
    /// built from `3`.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            TruthValue::T => 0,
            TruthValue::F => 1,
            TruthValue::U => 2,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Option<TruthValue> {
        match i {
            0 => Some(TruthValue::T),
            1 => Some(TruthValue::F),
            2 => Some(TruthValue::U),
            _ => None,
        }
    }

    /// Left-sequential conjunction: the left operand is evaluated first.
    #[inline]
    pub fn and(self, other: TruthValue) -> TruthValue {
        match self {
            TruthValue::T => other,
            TruthValue::F => TruthValue::F,
            TruthValue::U => TruthValue::U,
        }
    }

    #[inline]
    pub fn or(self, other: TruthValue) -> TruthValue {
        match self {
            TruthValue::T => TruthValue::T,
            TruthValue::F => other,
            TruthValue::U => TruthValue::U,
        }
    }

    #[inline]
    pub fn not(self) -> TruthValue {
        match self {
            TruthValue::T => TruthValue::F,
            TruthValue::F => TruthValue::T,
            TruthValue::U => TruthValue::U,
        }
    }

    /// The halting oracle: `T` stays `T`, everything else becomes `F`.
    #[inline]
    pub fn down(self) -> TruthValue {
        match self {
            TruthValue::T => TruthValue::T,
            _ => TruthValue::F,
        }
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TruthValue::T => "T",
            TruthValue::F => "F",
            TruthValue::U => "U",
        };
        f.write_str(s)
    }
}

impl FromStr for TruthValue {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "T" => Ok(TruthValue::T),
            "F" => Ok(TruthValue::F),
            "U" => Ok(TruthValue::U),
            other => Err(LogicError::UnknownTruthValue(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
    Neg,
    Down,
}

impl Connective {
    pub fn arity(self) -> usize {
        match self {
            Connective::And | Connective::Or => 2,
            Connective::Neg | Connective::Down => 1,
        }
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Connective::And => "and",
            Connective::Or => "or",
            Connective::Neg => "neg",
            Connective::Down => "down",
        };
        f.write_str(s)
    }
}

impl FromStr for Connective {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "and" => Ok(Connective::And),
            "or" => Ok(Connective::Or),
            "neg" | "not" => Ok(Connective::Neg),
            "down" => Ok(Connective::Down),
            other => Err(LogicError::UnknownConnective(other.to_string())),
        }
    }
}

fn check_arity(conn: Connective, got: usize) -> Result<(), LogicError> {
    if conn.arity() != got {
        return Err(LogicError::Arity {
            conn,
            expected: conn.arity(),
            got,
        });
    }
    Ok(())
}

/// Applies a connective of `3` (with the ada operation `down`).
pub fn tv_apply(conn: Connective, args: &[TruthValue]) -> Result<TruthValue, LogicError> {
    check_arity(conn, args.len())?;
    Ok(match conn {
        Connective::And => args[0].and(args[1]),
        Connective::Or => args[0].or(args[1]),
        Connective::Neg => args[0].not(),
        Connective::Down => args[0].down(),
    })
}

/// A subset of `0..universe` stored as a bit mask.
///
/// Universes of up to 64 points fit in one inline machine word; larger
/// universes spill into a heap-allocated word vector with the same layout.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    universe: usize,
    words: SmallVec<[u64; 1]>,
}

impl IndexSet {
    fn word_count(universe: usize) -> usize {
        universe.div_ceil(64).max(1)
    }

    pub fn empty(universe: usize) -> Self {
        IndexSet {
            universe,
            words: SmallVec::from_elem(0, Self::word_count(universe)),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = Self::empty(universe);
        for i in 0..universe {
            set.insert(i);
        }
        set
    }

    pub fn from_indices(
        universe: usize,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self, LogicError> {
        let mut set = Self::empty(universe);
        for i in indices {
            if i >= universe {
                return Err(LogicError::OutOfUniverse {
                    index: i,
                    size: universe,
                });
            }
            set.insert(i);
        }
        Ok(set)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// # Panics
    /// If `i` lies outside the universe.
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.universe, "index {i} outside universe {}", self.universe);
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.words[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |&i| self.contains(i))
    }

    fn zip_with(&self, other: &IndexSet, op: impl Fn(u64, u64) -> u64) -> IndexSet {
        debug_assert_eq!(self.universe, other.universe);
        IndexSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        self.zip_with(other, |a, b| a & b)
    }

    /// Complement relative to the universe.
    pub fn complement(&self) -> IndexSet {
        let full = IndexSet::full(self.universe);
        full.zip_with(self, |a, b| a & !b)
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.intersection(other).is_empty()
    }
}

/// An element of `3^X` as the pair `(A, B)` of its true-set and false-set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TestVector {
    trues: IndexSet,
    falses: IndexSet,
}

impl TestVector {
    pub fn new(trues: IndexSet, falses: IndexSet) -> Result<Self, LogicError> {
        if trues.universe() != falses.universe() {
            return Err(LogicError::UniverseMismatch(
                trues.universe(),
                falses.universe(),
            ));
        }
        if !trues.is_disjoint(&falses) {
            return Err(LogicError::NotDisjoint);
        }
        Ok(TestVector { trues, falses })
    }

    pub fn from_sets(
        universe: usize,
        trues: impl IntoIterator<Item = usize>,
        falses: impl IntoIterator<Item = usize>,
    ) -> Result<Self, LogicError> {
        Self::new(
            IndexSet::from_indices(universe, trues)?,
            IndexSet::from_indices(universe, falses)?,
        )
    }

    pub fn constant(universe: usize, value: TruthValue) -> Self {
        let (trues, falses) = match value {
            TruthValue::T => (IndexSet::full(universe), IndexSet::empty(universe)),
            TruthValue::F => (IndexSet::empty(universe), IndexSet::full(universe)),
            TruthValue::U => (IndexSet::empty(universe), IndexSet::empty(universe)),
        };
        TestVector { trues, falses }
    }

    pub fn from_values(values: &[TruthValue]) -> Self {
        let n = values.len();
        let mut trues = IndexSet::empty(n);
        let mut falses = IndexSet::empty(n);
        for (i, v) in values.iter().enumerate() {
            match v {
                TruthValue::T => trues.insert(i),
                TruthValue::F => falses.insert(i),
                TruthValue::U => {}
            }
        }
        TestVector { trues, falses }
    }

    /// Decodes a base-3 index whose digit at position `x` is the value at `x`
    /// (digits T=0, F=1, U=2).
    pub fn from_index(universe: usize, mut index: usize) -> Self {
        let values: Vec<TruthValue> = (0..universe)
            .map(|_| {
                let v = TruthValue::from_index(index % 3).expect("digit below 3");
                index /= 3;
                v
            })
            .collect();
        Self::from_values(&values)
    }

    pub fn to_index(&self) -> usize {
        (0..self.universe())
            .rev()
            .fold(0, |acc, x| acc * 3 + self.value_at(x).index())
    }

    pub fn universe(&self) -> usize {
        self.trues.universe()
    }

    pub fn trues(&self) -> &IndexSet {
        &self.trues
    }

    pub fn falses(&self) -> &IndexSet {
        &self.falses
    }

    pub fn value_at(&self, x: usize) -> TruthValue {
        if self.trues.contains(x) {
            TruthValue::T
        } else if self.falses.contains(x) {
            TruthValue::F
        } else {
            TruthValue::U
        }
    }

    pub fn values(&self) -> Vec<TruthValue> {
        (0..self.universe()).map(|x| self.value_at(x)).collect()
    }
}

impl fmt::Display for TestVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &IndexSet| {
            let items: Vec<String> = s.iter().map(|i| i.to_string()).collect();
            format!("{{{}}}", items.join(","))
        };
        write!(f, "({}, {})", show(&self.trues), show(&self.falses))
    }
}

/// Applies a connective of `3^X` directly on pairs of sets.
pub fn pair_apply(conn: Connective, args: &[&TestVector]) -> Result<TestVector, LogicError> {
    check_arity(conn, args.len())?;
    if let [a, b] = args {
        if a.universe() != b.universe() {
            return Err(LogicError::UniverseMismatch(a.universe(), b.universe()));
        }
    }
    let a = args[0];
    Ok(match conn {
        Connective::Neg => TestVector {
            trues: a.falses.clone(),
            falses: a.trues.clone(),
        },
        Connective::And => {
            let b = args[1];
            TestVector {
                trues: a.trues.intersection(&b.trues),
                falses: a.falses.union(&a.trues.intersection(&b.falses)),
            }
        }
        Connective::Or => {
            let b = args[1];
            TestVector {
                trues: a.trues.union(&a.falses.intersection(&b.trues)),
                falses: a.falses.intersection(&b.falses),
            }
        }
        Connective::Down => TestVector {
            trues: a.trues.clone(),
            falses: a.trues.complement(),
        },
    })
}

#[derive(Serialize, Deserialize)]
struct RawTables {
    size: usize,
    and: Vec<Vec<usize>>,
    or: Vec<Vec<usize>>,
    neg: Vec<usize>,
    #[serde(default)]
    down: Option<Vec<usize>>,
    #[serde(rename = "T")]
    t: usize,
    #[serde(rename = "F")]
    f: usize,
    #[serde(rename = "U", default)]
    u: Option<usize>,
}

/// Operation tables of a finite algebra of tests.
///
/// This is the interchange form for every finite algebra in the crate:
/// `3`, `2`, powers and products, subalgebras and Boolean skeletons.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTables", into = "RawTables")]
pub struct AlgebraTables {
    size: usize,
    and: Vec<usize>,
    or: Vec<usize>,
    neg: Vec<usize>,
    down: Option<Vec<usize>>,
    t: usize,
    f: usize,
    u: Option<usize>,
}

impl TryFrom<RawTables> for AlgebraTables {
    type Error = LogicError;

    fn try_from(raw: RawTables) -> Result<Self, Self::Error> {
        let n = raw.size;
        let flatten = |name: &str, rows: Vec<Vec<usize>>| -> Result<Vec<usize>, LogicError> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(LogicError::Malformed(format!("`{name}` must be {n}x{n}")));
            }
            Ok(rows.into_iter().flatten().collect())
        };
        let and = flatten("and", raw.and)?;
        let or = flatten("or", raw.or)?;
        AlgebraTables::new(n, and, or, raw.neg, raw.down, raw.t, raw.f, raw.u)
    }
}

impl From<AlgebraTables> for RawTables {
    fn from(t: AlgebraTables) -> Self {
        let n = t.size;
        let rows = |v: &[usize]| v.chunks(n.max(1)).map(|c| c.to_vec()).collect();
        RawTables {
            size: n,
            and: rows(&t.and),
            or: rows(&t.or),
            neg: t.neg.clone(),
            down: t.down.clone(),
            t: t.t,
            f: t.f,
            u: t.u,
        }
    }
}

impl AlgebraTables {
    /// Builds tables from row-major binary tables, checking every entry.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        size: usize,
        and: Vec<usize>,
        or: Vec<usize>,
        neg: Vec<usize>,
        down: Option<Vec<usize>>,
        t: usize,
        f: usize,
        u: Option<usize>,
    ) -> Result<Self, LogicError> {
        if size == 0 {
            return Err(LogicError::Malformed("empty carrier".into()));
        }
        if and.len() != size * size || or.len() != size * size {
            return Err(LogicError::Malformed("binary tables have wrong size".into()));
        }
        if neg.len() != size || down.as_ref().is_some_and(|d| d.len() != size) {
            return Err(LogicError::Malformed("unary tables have wrong size".into()));
        }
        let entries = and
            .iter()
            .chain(&or)
            .chain(&neg)
            .chain(down.iter().flatten())
            .chain([&t, &f])
            .chain(u.iter());
        if let Some(bad) = entries.copied().find(|&e| e >= size) {
            return Err(LogicError::Malformed(format!(
                "entry {bad} is not an element index below {size}"
            )));
        }
        Ok(AlgebraTables {
            size,
            and,
            or,
            neg,
            down,
            t,
            f,
            u,
        })
    }

    /// Builds tables by applying `op` to an explicit list of distinct elements.
    fn from_elements<E: PartialEq>(
        elements: &[E],
        and: impl Fn(&E, &E) -> E,
        or: impl Fn(&E, &E) -> E,
        neg: impl Fn(&E) -> E,
        down: Option<&dyn Fn(&E) -> E>,
        t: &E,
        f: &E,
        u: Option<&E>,
    ) -> Result<Self, LogicError> {
        let find = |e: &E| -> Result<usize, LogicError> {
            elements
                .iter()
                .position(|x| x == e)
                .ok_or_else(|| LogicError::NotClosed("operation result outside element list".into()))
        };
        let n = elements.len();
        let mut and_t = Vec::with_capacity(n * n);
        let mut or_t = Vec::with_capacity(n * n);
        for a in elements {
            for b in elements {
                and_t.push(find(&and(a, b))?);
                or_t.push(find(&or(a, b))?);
            }
        }
        let neg_t = elements.iter().map(|a| find(&neg(a))).collect::<Result<_, _>>()?;
        let down_t = match down {
            Some(d) => Some(elements.iter().map(|a| find(&d(a))).collect::<Result<_, _>>()?),
            None => None,
        };
        let u_idx = u.map(&find).transpose()?;
        AlgebraTables::new(n, and_t, or_t, neg_t, down_t, find(t)?, find(f)?, u_idx)
    }

    /// The three-element ada `3` with elements ordered T, F, U.
    pub fn three() -> Self {
        let down: &dyn Fn(&TruthValue) -> TruthValue = &|a| a.down();
        Self::from_elements(
            &TruthValue::ALL,
            |a, b| a.and(*b),
            |a, b| a.or(*b),
            |a| a.not(),
            Some(down),
            &TruthValue::T,
            &TruthValue::F,
            Some(&TruthValue::U),
        )
        .expect("3 is closed")
    }

    /// `3` as a plain C-algebra, without the halting oracle.
    pub fn three_c_algebra() -> Self {
        let mut t = Self::three();
        t.down = None;
        t
    }

    /// The two-element Boolean algebra `2` (elements T, F); `down` is the identity.
    pub fn two() -> Self {
        Self::boolean_power(1)
    }

    /// The ada `3^X` for `|X| = n`, built through the pairs-of-sets operations.
    /// Element `i` is `TestVector::from_index(n, i)`.
    pub fn power(n: usize) -> Self {
        assert!(n >= 1, "3^0 is degenerate");
        let elements: Vec<TestVector> = (0..3usize.pow(n as u32))
            .map(|i| TestVector::from_index(n, i))
            .collect();
        let down: &dyn Fn(&TestVector) -> TestVector =
            &|a| pair_apply(Connective::Down, &[a]).expect("unary");
        Self::from_elements(
            &elements,
            |a, b| pair_apply(Connective::And, &[a, b]).expect("same universe"),
            |a, b| pair_apply(Connective::Or, &[a, b]).expect("same universe"),
            |a| pair_apply(Connective::Neg, &[a]).expect("unary"),
            Some(down),
            &TestVector::constant(n, TruthValue::T),
            &TestVector::constant(n, TruthValue::F),
            Some(&TestVector::constant(n, TruthValue::U)),
        )
        .expect("3^X is closed")
    }

    /// The Boolean algebra `2^X` for `|X| = n` as pairs `(P, X \ P)`; element
    /// `i` has true-set given by the bits of `i`. No `U` constant.
    pub fn boolean_power(n: usize) -> Self {
        assert!(n >= 1, "2^0 is degenerate");
        let elements = boolean_power_elements(n);
        let down: &dyn Fn(&TestVector) -> TestVector =
            &|a| pair_apply(Connective::Down, &[a]).expect("unary");
        Self::from_elements(
            &elements,
            |a, b| pair_apply(Connective::And, &[a, b]).expect("same universe"),
            |a, b| pair_apply(Connective::Or, &[a, b]).expect("same universe"),
            |a| pair_apply(Connective::Neg, &[a]).expect("unary"),
            Some(down),
            &TestVector::constant(n, TruthValue::T),
            &TestVector::constant(n, TruthValue::F),
            None,
        )
        .expect("2^X is closed")
    }

    /// Tables of the finite subalgebra of `3^X` whose elements are `elements`.
    pub fn from_test_vectors(elements: &[TestVector], with_down: bool) -> Result<Self, LogicError> {
        let n = elements
            .first()
            .map(|e| e.universe())
            .ok_or_else(|| LogicError::Malformed("empty carrier".into()))?;
        if let Some(bad) = elements.iter().find(|e| e.universe() != n) {
            return Err(LogicError::UniverseMismatch(n, bad.universe()));
        }
        let down: &dyn Fn(&TestVector) -> TestVector =
            &|a| pair_apply(Connective::Down, &[a]).expect("unary");
        let u = TestVector::constant(n, TruthValue::U);
        let u_ref = elements.contains(&u).then_some(&u);
        Self::from_elements(
            elements,
            |a, b| pair_apply(Connective::And, &[a, b]).expect("same universe"),
            |a, b| pair_apply(Connective::Or, &[a, b]).expect("same universe"),
            |a| pair_apply(Connective::Neg, &[a]).expect("unary"),
            with_down.then_some(down),
            &TestVector::constant(n, TruthValue::T),
            &TestVector::constant(n, TruthValue::F),
            u_ref,
        )
    }

    /// Direct product; element `(i, j)` has index `i * other.size + j`.
    pub fn product(&self, other: &AlgebraTables) -> Self {
        let m = other.size;
        let pair = |i: usize, j: usize| i * m + j;
        let elems: Vec<(usize, usize)> = (0..self.size)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .collect();
        let n = elems.len();
        let mut and = Vec::with_capacity(n * n);
        let mut or = Vec::with_capacity(n * n);
        for &(a1, a2) in &elems {
            for &(b1, b2) in &elems {
                and.push(pair(self.and(a1, b1), other.and(a2, b2)));
                or.push(pair(self.or(a1, b1), other.or(a2, b2)));
            }
        }
        let neg = elems.iter().map(|&(a, b)| pair(self.neg(a), other.neg(b))).collect();
        let down = match (&self.down, &other.down) {
            (Some(d1), Some(d2)) => Some(elems.iter().map(|&(a, b)| pair(d1[a], d2[b])).collect()),
            _ => None,
        };
        let u = self.u.zip(other.u).map(|(a, b)| pair(a, b));
        AlgebraTables::new(
            n,
            and,
            or,
            neg,
            down,
            pair(self.t, other.t),
            pair(self.f, other.f),
            u,
        )
        .expect("product of well-formed tables")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn and(&self, a: usize, b: usize) -> usize {
        self.and[a * self.size + b]
    }

    #[inline]
    pub fn or(&self, a: usize, b: usize) -> usize {
        self.or[a * self.size + b]
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    /// `None` when the tables carry no `down` operation.
    #[inline]
    pub fn down(&self, a: usize) -> Option<usize> {
        self.down.as_ref().map(|d| d[a])
    }

    pub fn has_down(&self) -> bool {
        self.down.is_some()
    }

    pub fn top(&self) -> usize {
        self.t
    }

    pub fn bottom(&self) -> usize {
        self.f
    }

    pub fn undefined(&self) -> Option<usize> {
        self.u
    }

    /// The element index of a constant, if the tables carry it.
    pub fn constant(&self, v: TruthValue) -> Option<usize> {
        match v {
            TruthValue::T => Some(self.t),
            TruthValue::F => Some(self.f),
            TruthValue::U => self.u,
        }
    }

    /// Short display label for an element: its constant name, or its index.
    pub fn label(&self, a: usize) -> String {
        if a == self.t {
            "T".into()
        } else if a == self.f {
            "F".into()
        } else if Some(a) == self.u {
            "U".into()
        } else {
            format!("#{a}")
        }
    }

    /// Tables with `down` removed (the underlying C-algebra).
    pub fn without_down(&self) -> Self {
        let mut t = self.clone();
        t.down = None;
        t
    }

    /// Restricts the tables to `elements` (listed in the order of the new
    /// indices), failing if the set is not closed under every operation.
    pub fn subalgebra(&self, elements: &[usize]) -> Result<AlgebraTables, LogicError> {
        let mut new_index = vec![None; self.size];
        for (i, &e) in elements.iter().enumerate() {
            if e >= self.size {
                return Err(LogicError::OutOfUniverse {
                    index: e,
                    size: self.size,
                });
            }
            new_index[e] = Some(i);
        }
        let map = |e: usize, what: &str| -> Result<usize, LogicError> {
            new_index[e].ok_or_else(|| LogicError::NotClosed(format!("{what} yields {e}")))
        };
        let n = elements.len();
        let mut and = Vec::with_capacity(n * n);
        let mut or = Vec::with_capacity(n * n);
        for &a in elements {
            for &b in elements {
                and.push(map(self.and(a, b), "and")?);
                or.push(map(self.or(a, b), "or")?);
            }
        }
        let neg = elements.iter().map(|&a| map(self.neg(a), "neg")).collect::<Result<_, _>>()?;
        let down = match &self.down {
            Some(d) => Some(elements.iter().map(|&a| map(d[a], "down")).collect::<Result<_, _>>()?),
            None => None,
        };
        let t = map(self.t, "constant T")?;
        let f = map(self.f, "constant F")?;
        let u = self.u.and_then(|u| new_index[u]);
        AlgebraTables::new(n, and, or, neg, down, t, f, u)
    }
}

/// Elements of `2^X` in the order used by [`AlgebraTables::boolean_power`].
pub fn boolean_power_elements(n: usize) -> Vec<TestVector> {
    (0..1usize << n)
        .map(|mask| {
            let trues: Vec<usize> = (0..n).filter(|x| mask >> x & 1 == 1).collect();
            let falses: Vec<usize> = (0..n).filter(|x| mask >> x & 1 == 0).collect();
            TestVector::from_sets(n, trues, falses).expect("complementary sets are disjoint")
        })
        .collect()
}

/// Algebra classes recognised by [`classify_algebra`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgebraClass {
    Boolean,
    CAlgebra,
    Ada,
}

impl AlgebraClass {
    pub fn name(self) -> &'static str {
        match self {
            AlgebraClass::Boolean => "boolean",
            AlgebraClass::CAlgebra => "c_algebra",
            AlgebraClass::Ada => "ada",
        }
    }
}

impl FromStr for AlgebraClass {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bool" | "boolean" => Ok(AlgebraClass::Boolean),
            "calg" | "c_algebra" | "c-algebra" => Ok(AlgebraClass::CAlgebra),
            "ada" => Ok(AlgebraClass::Ada),
            other => Err(LogicError::Malformed(format!("unknown algebra class `{other}`"))),
        }
    }
}

type LawFn = fn(&AlgebraTables, &[usize]) -> bool;

struct TableLaw {
    label: &'static str,
    statement: &'static str,
    vars: &'static [&'static str],
    holds: LawFn,
}

const C_ALGEBRA_LAWS: &[TableLaw] = &[
    TableLaw {
        label: "C1",
        statement: "~~a = a",
        vars: &["a"],
        holds: |m, v| m.neg(m.neg(v[0])) == v[0],
    },
    TableLaw {
        label: "C2",
        statement: "~(a&b) = ~a|~b",
        vars: &["a", "b"],
        holds: |m, v| m.neg(m.and(v[0], v[1])) == m.or(m.neg(v[0]), m.neg(v[1])),
    },
    TableLaw {
        label: "C3",
        statement: "(a&b)&c = a&(b&c)",
        vars: &["a", "b", "c"],
        holds: |m, v| m.and(m.and(v[0], v[1]), v[2]) == m.and(v[0], m.and(v[1], v[2])),
    },
    TableLaw {
        label: "C4",
        statement: "a&(b|c) = (a&b)|(a&c)",
        vars: &["a", "b", "c"],
        holds: |m, v| {
            m.and(v[0], m.or(v[1], v[2])) == m.or(m.and(v[0], v[1]), m.and(v[0], v[2]))
        },
    },
    TableLaw {
        label: "C5",
        statement: "(a|b)&c = (a&c)|(~a&b&c)",
        vars: &["a", "b", "c"],
        holds: |m, v| {
            m.and(m.or(v[0], v[1]), v[2])
                == m.or(m.and(v[0], v[2]), m.and(m.and(m.neg(v[0]), v[1]), v[2]))
        },
    },
    TableLaw {
        label: "C6",
        statement: "a|(a&b) = a",
        vars: &["a", "b"],
        holds: |m, v| m.or(v[0], m.and(v[0], v[1])) == v[0],
    },
    TableLaw {
        label: "C7",
        statement: "(a&b)|(b&a) = (b&a)|(a&b)",
        vars: &["a", "b"],
        holds: |m, v| {
            let ab = m.and(v[0], v[1]);
            let ba = m.and(v[1], v[0]);
            m.or(ab, ba) == m.or(ba, ab)
        },
    },
];

const BOOLEAN_LAWS: &[TableLaw] = &[
    TableLaw {
        label: "excluded-middle",
        statement: "a|~a = T",
        vars: &["a"],
        holds: |m, v| m.or(v[0], m.neg(v[0])) == m.top(),
    },
    TableLaw {
        label: "non-contradiction",
        statement: "a&~a = F",
        vars: &["a"],
        holds: |m, v| m.and(v[0], m.neg(v[0])) == m.bottom(),
    },
    TableLaw {
        label: "and-commutative",
        statement: "a&b = b&a",
        vars: &["a", "b"],
        holds: |m, v| m.and(v[0], v[1]) == m.and(v[1], v[0]),
    },
    TableLaw {
        label: "or-commutative",
        statement: "a|b = b|a",
        vars: &["a", "b"],
        holds: |m, v| m.or(v[0], v[1]) == m.or(v[1], v[0]),
    },
    TableLaw {
        label: "or-distributive",
        statement: "a|(b&c) = (a|b)&(a|c)",
        vars: &["a", "b", "c"],
        holds: |m, v| {
            m.or(v[0], m.and(v[1], v[2])) == m.and(m.or(v[0], v[1]), m.or(v[0], v[2]))
        },
    },
    TableLaw {
        label: "identities",
        statement: "a&T = a, a|F = a",
        vars: &["a"],
        holds: |m, v| m.and(v[0], m.top()) == v[0] && m.or(v[0], m.bottom()) == v[0],
    },
];

const CONSTANT_LAWS: &[TableLaw] = &[
    TableLaw {
        label: "T-unit",
        statement: "T&a = a = a&T",
        vars: &["a"],
        holds: |m, v| m.and(m.top(), v[0]) == v[0] && m.and(v[0], m.top()) == v[0],
    },
    TableLaw {
        label: "F-unit",
        statement: "F|a = a = a|F",
        vars: &["a"],
        holds: |m, v| m.or(m.bottom(), v[0]) == v[0] && m.or(v[0], m.bottom()) == v[0],
    },
    TableLaw {
        label: "U-fixed",
        statement: "~U = U",
        vars: &[],
        holds: |m, _| m.u.is_some_and(|u| m.neg(u) == u),
    },
];

fn down_of(m: &AlgebraTables, a: usize) -> usize {
    m.down(a).expect("ada laws run only on tables with down")
}

const ADA_LAWS: &[TableLaw] = &[
    TableLaw {
        label: "A1",
        statement: "F^ = F",
        vars: &[],
        holds: |m, _| down_of(m, m.bottom()) == m.bottom(),
    },
    TableLaw {
        label: "A2",
        statement: "U^ = F",
        vars: &[],
        holds: |m, _| m.u.is_some_and(|u| down_of(m, u) == m.bottom()),
    },
    TableLaw {
        label: "A3",
        statement: "T^ = T",
        vars: &[],
        holds: |m, _| down_of(m, m.top()) == m.top(),
    },
    TableLaw {
        label: "A4",
        statement: "a&b^ = a&(a&b)^",
        vars: &["a", "b"],
        holds: |m, v| m.and(v[0], down_of(m, v[1])) == m.and(v[0], down_of(m, m.and(v[0], v[1]))),
    },
    TableLaw {
        label: "A5",
        statement: "a^|~(a^) = T",
        vars: &["a"],
        holds: |m, v| {
            let d = down_of(m, v[0]);
            m.or(d, m.neg(d)) == m.top()
        },
    },
    TableLaw {
        label: "A6",
        statement: "a = a^|a",
        vars: &["a"],
        holds: |m, v| v[0] == m.or(down_of(m, v[0]), v[0]),
    },
];

fn check_table_law(t: &AlgebraTables, law: &TableLaw) -> AxiomOutcome {
    let arity = law.vars.len();
    let total = t.size.pow(arity as u32);
    let mut tuple = vec![0usize; arity];
    let mut witness = None;
    for idx in 0..total {
        let mut rest = idx;
        for slot in tuple.iter_mut().rev() {
            *slot = rest % t.size;
            rest /= t.size;
        }
        if !(law.holds)(t, &tuple) {
            witness = Some(
                law.vars
                    .iter()
                    .zip(&tuple)
                    .map(|(v, &e)| Binding::new(*v, t.label(e)))
                    .collect(),
            );
            break;
        }
    }
    AxiomOutcome {
        label: law.label.to_string(),
        statement: law.statement.to_string(),
        passed: witness.is_none(),
        instances: total as u64,
        witness,
    }
}

/// Checks every axiom of `target` under exhaustive substitution.
///
/// Laws are reported in order; the witness of a failing law is the first
/// failing tuple in lexicographic element order.
pub fn classify_algebra(t: &AlgebraTables, target: AlgebraClass) -> Result<SuiteReport, LogicError> {
    let mut laws: Vec<&TableLaw> = C_ALGEBRA_LAWS.iter().collect();
    match target {
        AlgebraClass::CAlgebra => {}
        AlgebraClass::Boolean => laws.extend(BOOLEAN_LAWS),
        AlgebraClass::Ada => {
            if !t.has_down() {
                return Err(LogicError::MissingDown);
            }
            if t.u.is_none() {
                return Err(LogicError::MissingUndefined);
            }
            laws.extend(CONSTANT_LAWS);
            laws.extend(ADA_LAWS);
        }
    }
    let outcomes = laws.into_iter().map(|law| check_table_law(t, law)).collect();
    Ok(SuiteReport::new(target.name(), outcomes))
}

/// The Boolean skeleton `{a : a | ~a = T}`, in increasing index order.
pub fn boolean_skeleton(t: &AlgebraTables) -> Result<Vec<usize>, LogicError> {
    if !classify_algebra(t, AlgebraClass::CAlgebra)?.passed {
        return Err(LogicError::NotInClass("C-algebra"));
    }
    Ok((0..t.size)
        .filter(|&a| t.or(a, t.neg(a)) == t.top())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use TruthValue::{F, T, U};

    #[test]
    fn truth_table_examples() {
        assert_eq!(tv_apply(Connective::And, &[U, T]).unwrap(), U);
        assert_eq!(tv_apply(Connective::And, &[F, U]).unwrap(), F);
        assert_eq!(tv_apply(Connective::Neg, &[U]).unwrap(), U);
        assert_eq!(tv_apply(Connective::Down, &[U]).unwrap(), F);
        assert_eq!(tv_apply(Connective::Or, &[T, U]).unwrap(), T);
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        assert!(matches!(
            tv_apply(Connective::Neg, &[T, F]),
            Err(LogicError::Arity { expected: 1, got: 2, .. })
        ));
        let a = TestVector::constant(2, T);
        assert!(pair_apply(Connective::And, &[&a]).is_err());
    }

    #[test]
    fn left_zeros_and_involution() {
        for a in TruthValue::ALL {
            assert_eq!(U.and(a), U);
            assert_eq!(U.or(a), U);
            assert_eq!(F.and(a), F);
            assert_eq!(a.not().not(), a);
        }
    }

    #[test]
    fn pair_examples() {
        let x = TestVector::from_sets(3, [0], [1, 2]).unwrap();
        let neg = pair_apply(Connective::Neg, &[&x]).unwrap();
        assert_eq!(neg, TestVector::from_sets(3, [1, 2], [0]).unwrap());

        let a = TestVector::from_sets(2, [0], [1]).unwrap();
        let b = TestVector::from_sets(2, [0, 1], []).unwrap();
        assert_eq!(pair_apply(Connective::And, &[&a, &b]).unwrap(), a);

        let u = TestVector::from_sets(1, [], []).unwrap();
        let down = pair_apply(Connective::Down, &[&u]).unwrap();
        assert_eq!(down, TestVector::from_sets(1, [], [0]).unwrap());
    }

    #[test]
    fn universe_mismatch_and_disjointness() {
        let a = TestVector::constant(2, T);
        let b = TestVector::constant(3, T);
        assert!(matches!(
            pair_apply(Connective::Or, &[&a, &b]),
            Err(LogicError::UniverseMismatch(2, 3))
        ));
        assert_eq!(
            TestVector::from_sets(2, [0], [0]),
            Err(LogicError::NotDisjoint)
        );
    }

    #[test]
    fn pair_apply_matches_pointwise_exhaustively() {
        for n in 1..=3 {
            let all: Vec<TestVector> = (0..3usize.pow(n as u32))
                .map(|i| TestVector::from_index(n, i))
                .collect();
            for a in &all {
                for conn in [Connective::Neg, Connective::Down] {
                    let r = pair_apply(conn, &[a]).unwrap();
                    for x in 0..n {
                        assert_eq!(r.value_at(x), tv_apply(conn, &[a.value_at(x)]).unwrap());
                    }
                }
                for b in &all {
                    for conn in [Connective::And, Connective::Or] {
                        let r = pair_apply(conn, &[a, b]).unwrap();
                        assert!(r.trues().is_disjoint(r.falses()));
                        for x in 0..n {
                            let want = tv_apply(conn, &[a.value_at(x), b.value_at(x)]).unwrap();
                            assert_eq!(r.value_at(x), want);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn wide_universe_uses_fallback_words() {
        let a = TestVector::from_sets(130, [0, 64, 129], [1, 65]).unwrap();
        let n = pair_apply(Connective::Down, &[&a]).unwrap();
        assert_eq!(n.trues().len(), 3);
        assert_eq!(n.falses().len(), 127);
        assert_eq!(n.value_at(129), T);
        assert_eq!(n.value_at(65), F);
        assert_eq!(a.value_at(100), U);
    }

    #[test]
    fn index_round_trip() {
        for i in 0..27 {
            assert_eq!(TestVector::from_index(3, i).to_index(), i);
        }
    }

    #[test]
    fn three_is_an_ada_and_not_boolean() {
        let three = AlgebraTables::three();
        assert!(classify_algebra(&three, AlgebraClass::Ada).unwrap().passed);
        let report = classify_algebra(&three, AlgebraClass::Boolean).unwrap();
        let fail = report.first_failure().unwrap();
        assert_eq!(fail.label, "excluded-middle");
        assert_eq!(fail.witness.as_ref().unwrap(), &vec![Binding::new("a", "U")]);
    }

    #[test]
    fn products_and_powers_are_c_algebras() {
        let sq = AlgebraTables::three().product(&AlgebraTables::three());
        assert!(classify_algebra(&sq, AlgebraClass::CAlgebra).unwrap().passed);
        assert!(classify_algebra(&sq, AlgebraClass::Ada).unwrap().passed);
        assert!(classify_algebra(&AlgebraTables::power(2), AlgebraClass::Ada).unwrap().passed);
        let two = AlgebraTables::two();
        assert!(classify_algebra(&two, AlgebraClass::Boolean).unwrap().passed);
        assert!(classify_algebra(&AlgebraTables::boolean_power(3), AlgebraClass::Boolean)
            .unwrap()
            .passed);
    }

    #[test]
    fn ada_requires_down() {
        assert_eq!(
            classify_algebra(&AlgebraTables::three_c_algebra(), AlgebraClass::Ada),
            Err(LogicError::MissingDown)
        );
    }

    #[test]
    fn broken_table_fails_with_witness() {
        let three = AlgebraTables::three();
        let mut raw = RawTables::from(three);
        // make F & U = U instead of F
        raw.and[1][2] = 2;
        let broken = AlgebraTables::try_from(raw).unwrap();
        let report = classify_algebra(&broken, AlgebraClass::CAlgebra).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn skeletons() {
        let three = AlgebraTables::three();
        assert_eq!(boolean_skeleton(&three).unwrap(), vec![0, 1]);
        assert_eq!(boolean_skeleton(&AlgebraTables::two()).unwrap(), vec![0, 1]);
        for t in [AlgebraTables::three(), AlgebraTables::power(2), AlgebraTables::power(3)] {
            let fixed: Vec<usize> = (0..t.size()).filter(|&a| t.down(a) == Some(a)).collect();
            assert_eq!(boolean_skeleton(&t).unwrap(), fixed);
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = AlgebraTables::three();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"T\":0"));
        assert!(json.contains("\"U\":2"));
        let back: AlgebraTables = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let bad = json.replace("\"neg\":[1,0,2]", "\"neg\":[1,0,7]");
        assert!(serde_json::from_str::<AlgebraTables>(&bad).is_err());
        let without_down = r#"{"size":1,"and":[[0]],"or":[[0]],"neg":[0],"down":null,"T":0,"F":0,"U":0}"#;
        let t: AlgebraTables = serde_json::from_str(without_down).unwrap();
        assert!(!t.has_down());
    }

    #[test]
    fn subalgebra_must_be_closed() {
        let three = AlgebraTables::three();
        let two = three.subalgebra(&[0, 1]).unwrap();
        assert_eq!(two.undefined(), None);
        assert!(classify_algebra(&two, AlgebraClass::Boolean).unwrap().passed);
        assert!(matches!(three.subalgebra(&[0, 2]), Err(LogicError::NotClosed(_))));
    }
}
