//! Concrete if-then-else models: basic, functional and self-action C-sets,
//! their table-driven form, and B-sets.
//!
//! Every [`FiniteCSet`] reserves point index 0 for the base point `bot`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{boolean_skeleton, AlgebraTables, LogicError, TestVector, TruthValue};

/// Index of the base point in every [`FiniteCSet`].
pub const BOTTOM: usize = 0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("universe mismatch: {0} vs {1}")]
    UniverseMismatch(usize, usize),
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("U-row of the action must send every pair to bot (at {s},{t})")]
    URow { s: usize, t: usize },
    #[error("F-row of the action must select the second argument (at {s},{t})")]
    FRow { s: usize, t: usize },
    #[error("comparison with bot must give U (at {s},{t})")]
    BottomComparison { s: usize, t: usize },
    #[error("index {index} out of range for {what} (size {size})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("model has no equality test")]
    MissingStar,
    #[error("expected {expected} indices, got {got}")]
    IndexCount { expected: usize, got: usize },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// A finite two-sorted model that terms can be evaluated in.
pub trait Structure {
    fn tests(&self) -> &AlgebraTables;
    fn point_count(&self) -> usize;
    /// The base point, if the model has one.
    fn bottom(&self) -> Option<usize>;
    /// The if-then-else action `test[s, t]`.
    fn act(&self, test: usize, s: usize, t: usize) -> usize;
    /// Panics when [`Structure::has_star`] is false.
    fn star(&self, s: usize, t: usize) -> usize;
    fn has_star(&self) -> bool;
    fn describe(&self) -> String;

    fn point_label(&self, p: usize) -> String {
        if Some(p) == self.bottom() {
            "bot".to_string()
        } else {
            format!("p{p}")
        }
    }
}

/// A `bot`-fixing total map on `X u {bot}`, stored on `X` only.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialFn {
    image: Vec<Option<usize>>,
}

impl PartialFn {
    pub fn new(image: Vec<Option<usize>>) -> Result<Self, ModelError> {
        let n = image.len();
        if let Some(bad) = image.iter().flatten().find(|&&y| y >= n) {
            return Err(ModelError::OutOfRange {
                what: "partial function image",
                index: *bad,
                size: n,
            });
        }
        Ok(PartialFn { image })
    }

    /// The everywhere-undefined map.
    pub fn nowhere(universe: usize) -> Self {
        PartialFn {
            image: vec![None; universe],
        }
    }

    pub fn universe(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        self.image[x]
    }

    pub fn image(&self) -> &[Option<usize>] {
        &self.image
    }

    pub fn domain(&self) -> Vec<usize> {
        (0..self.universe()).filter(|&x| self.image[x].is_some()).collect()
    }

    /// Decodes a base-`(n+1)` index: digit 0 is `bot`, digit `k+1` is `k`.
    /// Index 0 is always the nowhere-defined map.
    pub fn from_index(universe: usize, mut index: usize) -> Self {
        let radix = universe + 1;
        let image = (0..universe)
            .map(|_| {
                let d = index % radix;
                index /= radix;
                d.checked_sub(1)
            })
            .collect();
        PartialFn { image }
    }

    pub fn to_index(&self) -> usize {
        let radix = self.universe() + 1;
        self.image
            .iter()
            .rev()
            .fold(0, |acc, y| acc * radix + y.map_or(0, |v| v + 1))
    }
}

impl fmt::Display for PartialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .image
            .iter()
            .map(|y| y.map_or("bot".to_string(), |v| v.to_string()))
            .collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Action of `3` on any pointed set: pure selection, with `U` yielding `bot`.
#[inline]
pub fn basic_action(test: TruthValue, s: usize, t: usize) -> usize {
    match test {
        TruthValue::T => s,
        TruthValue::F => t,
        TruthValue::U => BOTTOM,
    }
}

/// The equality test of a basic C-set.
#[inline]
pub fn basic_star(s: usize, t: usize) -> TruthValue {
    if s == BOTTOM || t == BOTTOM {
        TruthValue::U
    } else if s == t {
        TruthValue::T
    } else {
        TruthValue::F
    }
}

fn same_universe(a: usize, b: usize) -> Result<(), ModelError> {
    if a != b {
        return Err(ModelError::UniverseMismatch(a, b));
    }
    Ok(())
}

/// Pointwise if-then-else on partial functions.
pub fn fn_action(test: &TestVector, f: &PartialFn, g: &PartialFn) -> Result<PartialFn, ModelError> {
    same_universe(test.universe(), f.universe())?;
    same_universe(f.universe(), g.universe())?;
    let image = (0..f.universe())
        .map(|x| match test.value_at(x) {
            TruthValue::T => f.apply(x),
            TruthValue::F => g.apply(x),
            TruthValue::U => None,
        })
        .collect();
    Ok(PartialFn { image })
}

/// Pointwise equality test of partial functions: `T` where both agree and are
/// defined, `F` where both are defined and differ, `U` elsewhere.
pub fn fn_star(f: &PartialFn, g: &PartialFn) -> Result<TestVector, ModelError> {
    same_universe(f.universe(), g.universe())?;
    let values: Vec<TruthValue> = (0..f.universe())
        .map(|x| match (f.apply(x), g.apply(x)) {
            (Some(a), Some(b)) if a == b => TruthValue::T,
            (Some(_), Some(_)) => TruthValue::F,
            _ => TruthValue::U,
        })
        .collect();
    Ok(TestVector::from_values(&values))
}

/// `a[[b, c]] = (a & b) | (~a & c)` in a C-algebra.
pub fn self_action(m: &AlgebraTables, a: usize, b: usize, c: usize) -> usize {
    m.or(m.and(a, b), m.and(m.neg(a), c))
}

/// `a * b = (a & b) | (~a & ~b)` in a C-algebra.
pub fn self_star(m: &AlgebraTables, a: usize, b: usize) -> usize {
    m.or(m.and(a, b), m.and(m.neg(a), m.neg(b)))
}

#[derive(Serialize, Deserialize)]
struct RawCSet {
    tests: AlgebraTables,
    points: usize,
    action: Vec<Vec<Vec<usize>>>,
    #[serde(default)]
    star: Option<Vec<Vec<usize>>>,
}

/// A table-driven C-set: an algebra of tests acting on `points` points,
/// optionally with an equality test `*`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCSet", into = "RawCSet")]
pub struct FiniteCSet {
    tests: AlgebraTables,
    points: usize,
    action: Vec<usize>,
    star: Option<Vec<usize>>,
    #[serde(skip)]
    name: String,
}

impl TryFrom<RawCSet> for FiniteCSet {
    type Error = ModelError;

    fn try_from(raw: RawCSet) -> Result<Self, Self::Error> {
        let n = raw.points;
        let m = raw.tests.size();
        if raw.action.len() != m
            || raw
                .action
                .iter()
                .any(|rows| rows.len() != n || rows.iter().any(|r| r.len() != n))
        {
            return Err(ModelError::Malformed(format!(
                "`action` must be {m}x{n}x{n}"
            )));
        }
        let action = raw.action.into_iter().flatten().flatten().collect();
        let star = match raw.star {
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(ModelError::Malformed(format!("`star` must be {n}x{n}")));
                }
                Some(rows.into_iter().flatten().collect())
            }
            None => None,
        };
        FiniteCSet::new(raw.tests, n, action, star, "loaded model")
    }
}

impl From<FiniteCSet> for RawCSet {
    fn from(m: FiniteCSet) -> Self {
        let n = m.points;
        let action = m
            .action
            .chunks(n * n)
            .map(|plane| plane.chunks(n).map(|r| r.to_vec()).collect())
            .collect();
        let star = m
            .star
            .as_ref()
            .map(|s| s.chunks(n).map(|r| r.to_vec()).collect());
        RawCSet {
            tests: m.tests,
            points: n,
            action,
            star,
        }
    }
}

impl FiniteCSet {
    /// Builds a model from a flat action table indexed `(test * n + s) * n + t`
    /// and an optional flat star table indexed `s * n + t`.
    ///
    /// The U-row, F-row and `bot`-comparison constraints are checked here.
    pub fn new(
        tests: AlgebraTables,
        points: usize,
        action: Vec<usize>,
        star: Option<Vec<usize>>,
        name: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let m = tests.size();
        let n = points;
        if n == 0 {
            return Err(ModelError::Malformed("a pointed set needs bot".into()));
        }
        let u = tests.undefined().ok_or(LogicError::MissingUndefined)?;
        let f = tests.bottom();
        if action.len() != m * n * n {
            return Err(ModelError::Malformed("action table has wrong size".into()));
        }
        if let Some(&bad) = action.iter().find(|&&p| p >= n) {
            return Err(ModelError::OutOfRange {
                what: "point",
                index: bad,
                size: n,
            });
        }
        for s in 0..n {
            for t in 0..n {
                if action[(u * n + s) * n + t] != BOTTOM {
                    return Err(ModelError::URow { s, t });
                }
                if action[(f * n + s) * n + t] != t {
                    return Err(ModelError::FRow { s, t });
                }
            }
        }
        if let Some(star) = &star {
            if star.len() != n * n {
                return Err(ModelError::Malformed("star table has wrong size".into()));
            }
            if let Some(&bad) = star.iter().find(|&&a| a >= m) {
                return Err(ModelError::OutOfRange {
                    what: "test",
                    index: bad,
                    size: m,
                });
            }
            for j in 0..n {
                if star[j] != u {
                    return Err(ModelError::BottomComparison { s: BOTTOM, t: j });
                }
                if star[j * n] != u {
                    return Err(ModelError::BottomComparison { s: j, t: BOTTOM });
                }
            }
        }
        Ok(FiniteCSet {
            tests,
            points,
            action,
            star,
            name: name.into(),
        })
    }

    /// The basic C-set `(S_bot, 3)` with `points` points including `bot`,
    /// carrying the basic equality test when `agreeable`.
    pub fn basic(points: usize, agreeable: bool) -> Self {
        assert!(points >= 1, "a pointed set needs bot");
        let tests = AlgebraTables::three();
        let mut action = Vec::with_capacity(3 * points * points);
        for a in TruthValue::ALL {
            for s in 0..points {
                for t in 0..points {
                    action.push(basic_action(a, s, t));
                }
            }
        }
        let star = agreeable.then(|| {
            (0..points)
                .flat_map(|s| (0..points).map(move |t| basic_star(s, t).index()))
                .collect()
        });
        let name = format!("basic C-set with {points} points");
        FiniteCSet::new(tests, points, action, star, name).expect("basic C-set is well formed")
    }

    /// The agreeable functional C-set `(T_o(X_bot), 3^X)` for `|X| = n`.
    ///
    /// Point `i` is `PartialFn::from_index(n, i)`; test `j` is
    /// `TestVector::from_index(n, j)`.
    pub fn functional(n: usize) -> Self {
        let tests = AlgebraTables::power(n);
        let points = (n + 1).pow(n as u32);
        let fns: Vec<PartialFn> = (0..points).map(|i| PartialFn::from_index(n, i)).collect();
        let vectors: Vec<TestVector> = (0..tests.size())
            .map(|j| TestVector::from_index(n, j))
            .collect();
        let mut action = Vec::with_capacity(tests.size() * points * points);
        for alpha in &vectors {
            for f in &fns {
                for g in &fns {
                    action.push(fn_action(alpha, f, g).expect("same universe").to_index());
                }
            }
        }
        let star = fns
            .iter()
            .flat_map(|f| {
                fns.iter()
                    .map(move |g| fn_star(f, g).expect("same universe").to_index())
            })
            .collect();
        let name = format!("functional C-set over |X|={n}");
        FiniteCSet::new(tests, points, action, Some(star), name)
            .expect("functional C-set is well formed")
    }

    /// The self-action C-set `(M, M)` with base point `U` and the equality
    /// test `a * b`. Point 0 is `U`; the remaining points list the other
    /// elements in increasing index order (see [`FiniteCSet::self_point_elements`]).
    pub fn self_action_model(tests: &AlgebraTables) -> Result<Self, ModelError> {
        let elems = Self::self_point_elements(tests)?;
        let m = tests.size();
        let mut point_of = vec![0; m];
        for (p, &e) in elems.iter().enumerate() {
            point_of[e] = p;
        }
        let mut action = Vec::with_capacity(m * m * m);
        for a in 0..m {
            for &b in &elems {
                for &c in &elems {
                    action.push(point_of[self_action(tests, a, b, c)]);
                }
            }
        }
        let star = elems
            .iter()
            .flat_map(|&b| elems.iter().map(move |&c| self_star(tests, b, c)))
            .collect();
        let name = format!("self-action C-set (M, M) with |M|={m}");
        FiniteCSet::new(tests.clone(), m, action, Some(star), name)
    }

    /// The algebra element that each point of the self-action model stands for.
    pub fn self_point_elements(tests: &AlgebraTables) -> Result<Vec<usize>, ModelError> {
        let u = tests.undefined().ok_or(LogicError::MissingUndefined)?;
        Ok(std::iter::once(u)
            .chain((0..tests.size()).filter(|&e| e != u))
            .collect())
    }

    /// `(3^X, 3^X)` for `|X| = n`.
    pub fn self_ada(n: usize) -> Self {
        Self::self_action_model(&AlgebraTables::power(n)).expect("3^X has U")
    }

    pub fn tests(&self) -> &AlgebraTables {
        &self.tests
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn action_at(&self, test: usize, s: usize, t: usize) -> usize {
        self.action[(test * self.points + s) * self.points + t]
    }

    #[inline]
    pub fn star_at(&self, s: usize, t: usize) -> Option<usize> {
        self.star.as_ref().map(|st| st[s * self.points + t])
    }

    pub fn star_table(&self) -> Option<&[usize]> {
        self.star.as_deref()
    }

    pub fn without_star(&self) -> Self {
        let mut m = self.clone();
        m.star = None;
        m
    }

    /// Replaces one action entry without re-checking the structural
    /// invariants; for building deliberately broken models in tests.
    #[doc(hidden)]
    pub fn set_action_unchecked(&mut self, test: usize, s: usize, t: usize, value: usize) {
        let n = self.points;
        self.action[(test * n + s) * n + t] = value;
    }
}

impl Structure for FiniteCSet {
    fn tests(&self) -> &AlgebraTables {
        &self.tests
    }

    fn point_count(&self) -> usize {
        self.points
    }

    fn bottom(&self) -> Option<usize> {
        Some(BOTTOM)
    }

    #[inline]
    fn act(&self, test: usize, s: usize, t: usize) -> usize {
        self.action_at(test, s, t)
    }

    #[inline]
    fn star(&self, s: usize, t: usize) -> usize {
        self.star_at(s, t).expect("model has no star")
    }

    fn has_star(&self) -> bool {
        self.star.is_some()
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Action,
    Star,
}

/// Looks up `action[test][s][t]` or `star[s][t]`, checking every index.
pub fn table_eval(m: &FiniteCSet, kind: TableKind, indices: &[usize]) -> Result<usize, ModelError> {
    let check = |what, index: usize, size| {
        if index >= size {
            Err(ModelError::OutOfRange { what, index, size })
        } else {
            Ok(())
        }
    };
    match kind {
        TableKind::Action => {
            let [a, s, t] = indices else {
                return Err(ModelError::IndexCount {
                    expected: 3,
                    got: indices.len(),
                });
            };
            check("test", *a, m.tests.size())?;
            check("point", *s, m.points)?;
            check("point", *t, m.points)?;
            Ok(m.action_at(*a, *s, *t))
        }
        TableKind::Star => {
            let [s, t] = indices else {
                return Err(ModelError::IndexCount {
                    expected: 2,
                    got: indices.len(),
                });
            };
            check("point", *s, m.points)?;
            check("point", *t, m.points)?;
            m.star_at(*s, *t).ok_or(ModelError::MissingStar)
        }
    }
}

/// A table-driven B-set: a Boolean algebra acting on a set with no base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteBSet {
    tests: AlgebraTables,
    points: usize,
    action: Vec<usize>,
    star: Option<Vec<usize>>,
    name: String,
}

impl FiniteBSet {
    pub fn new(
        tests: AlgebraTables,
        points: usize,
        action: Vec<usize>,
        star: Option<Vec<usize>>,
        name: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let m = tests.size();
        let n = points;
        if action.len() != m * n * n {
            return Err(ModelError::Malformed("action table has wrong size".into()));
        }
        if let Some(&bad) = action.iter().find(|&&p| p >= n) {
            return Err(ModelError::OutOfRange {
                what: "point",
                index: bad,
                size: n,
            });
        }
        if let Some(star) = &star {
            if star.len() != n * n {
                return Err(ModelError::Malformed("star table has wrong size".into()));
            }
            if let Some(&bad) = star.iter().find(|&&a| a >= m) {
                return Err(ModelError::OutOfRange {
                    what: "test",
                    index: bad,
                    size: m,
                });
            }
        }
        Ok(FiniteBSet {
            tests,
            points,
            action,
            star,
            name: name.into(),
        })
    }

    /// The basic B-set `(S, 2)`.
    pub fn basic(points: usize, agreeable: bool) -> Self {
        let tests = AlgebraTables::two();
        let (t, f) = (tests.top(), tests.bottom());
        let mut action = Vec::with_capacity(2 * points * points);
        for a in 0..tests.size() {
            for s in 0..points {
                for u in 0..points {
                    action.push(if a == t { s } else { u });
                }
            }
        }
        let star = agreeable.then(|| {
            (0..points)
                .flat_map(|s| (0..points).map(move |u| if s == u { t } else { f }))
                .collect()
        });
        let name = format!("basic B-set with {points} points");
        FiniteBSet::new(tests, points, action, star, name).expect("basic B-set is well formed")
    }

    /// The agreeable B-set `(T(X), 2^X)` of total functions for `|X| = n`.
    ///
    /// Point `i` has base-`n` digits `f(0), f(1), ...`; test `j` holds exactly
    /// at the bits of `j`.
    pub fn total_functional(n: usize) -> Self {
        assert!(n >= 1);
        let tests = AlgebraTables::boolean_power(n);
        let points = n.pow(n as u32);
        let decode = |mut i: usize| -> Vec<usize> {
            (0..n)
                .map(|_| {
                    let d = i % n;
                    i /= n;
                    d
                })
                .collect()
        };
        let encode = |f: &[usize]| f.iter().rev().fold(0, |acc, &d| acc * n + d);
        let fns: Vec<Vec<usize>> = (0..points).map(decode).collect();
        let mut action = Vec::with_capacity(tests.size() * points * points);
        for mask in 0..tests.size() {
            for f in &fns {
                for g in &fns {
                    let h: Vec<usize> = (0..n)
                        .map(|x| if mask >> x & 1 == 1 { f[x] } else { g[x] })
                        .collect();
                    action.push(encode(&h));
                }
            }
        }
        let star = fns
            .iter()
            .flat_map(|f| {
                fns.iter().map(move |g| {
                    (0..n).filter(|&x| f[x] == g[x]).fold(0, |m, x| m | 1 << x)
                })
            })
            .collect();
        let name = format!("agreeable B-set of total functions over |X|={n}");
        FiniteBSet::new(tests, points, action, Some(star), name)
            .expect("total functional B-set is well formed")
    }

    pub fn tests(&self) -> &AlgebraTables {
        &self.tests
    }

    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn action_at(&self, test: usize, s: usize, t: usize) -> usize {
        self.action[(test * self.points + s) * self.points + t]
    }

    #[inline]
    pub fn star_at(&self, s: usize, t: usize) -> Option<usize> {
        self.star.as_ref().map(|st| st[s * self.points + t])
    }
}

impl Structure for FiniteBSet {
    fn tests(&self) -> &AlgebraTables {
        &self.tests
    }

    fn point_count(&self) -> usize {
        self.points
    }

    fn bottom(&self) -> Option<usize> {
        None
    }

    #[inline]
    fn act(&self, test: usize, s: usize, t: usize) -> usize {
        self.action_at(test, s, t)
    }

    #[inline]
    fn star(&self, s: usize, t: usize) -> usize {
        self.star_at(s, t).expect("model has no star")
    }

    fn has_star(&self) -> bool {
        self.star.is_some()
    }

    fn describe(&self) -> String {
        self.name.clone()
    }

    fn point_label(&self, p: usize) -> String {
        format!("p{p}")
    }
}

/// Restricts a C-set to the tests of its Boolean skeleton, giving a B-set on
/// the same points (with `bot` as an ordinary point).
pub fn bset_view(m: &FiniteCSet) -> Result<FiniteBSet, ModelError> {
    let skeleton = boolean_skeleton(m.tests())?;
    let tests = m.tests().subalgebra(&skeleton)?;
    let n = m.points();
    let mut action = Vec::with_capacity(skeleton.len() * n * n);
    for &a in &skeleton {
        for s in 0..n {
            for t in 0..n {
                action.push(m.action_at(a, s, t));
            }
        }
    }
    let name = format!("Boolean skeleton view of {}", m.name());
    FiniteBSet::new(tests, n, action, None, name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TruthValue::{F, T, U};

    #[test]
    fn basic_action_and_star_examples() {
        assert_eq!(basic_action(T, 2, 3), 2);
        assert_eq!(basic_action(U, 2, 3), BOTTOM);
        assert_eq!(basic_action(F, BOTTOM, 3), 3);
        assert_eq!(basic_star(2, 2), T);
        assert_eq!(basic_star(BOTTOM, 2), U);
        assert_eq!(basic_star(BOTTOM, BOTTOM), U);
        assert_eq!(basic_star(1, 2), F);
    }

    #[test]
    fn functional_examples() {
        let f = PartialFn::new(vec![Some(1), None]).unwrap();
        let g = PartialFn::new(vec![Some(0), Some(0)]).unwrap();
        let all_t = TestVector::constant(2, T);
        assert_eq!(fn_action(&all_t, &f, &g).unwrap(), f);
        let undefined = TestVector::constant(2, U);
        assert_eq!(fn_action(&undefined, &f, &g).unwrap(), PartialFn::nowhere(2));
        let alpha = TestVector::from_sets(2, [0], [1]).unwrap();
        assert_eq!(
            fn_action(&alpha, &f, &g).unwrap(),
            PartialFn::new(vec![Some(1), Some(0)]).unwrap()
        );

        assert_eq!(
            fn_star(&PartialFn::nowhere(2), &g).unwrap(),
            TestVector::constant(2, U)
        );
        assert_eq!(
            fn_star(&f, &f).unwrap(),
            TestVector::from_sets(2, f.domain(), []).unwrap()
        );
        let h = PartialFn::new(vec![Some(1), Some(0)]).unwrap();
        assert_eq!(
            fn_star(&f, &h).unwrap(),
            TestVector::from_sets(2, [0], []).unwrap()
        );
    }

    #[test]
    fn universe_mismatch() {
        let f = PartialFn::nowhere(2);
        let g = PartialFn::nowhere(3);
        assert_eq!(fn_star(&f, &g), Err(ModelError::UniverseMismatch(2, 3)));
        let a = TestVector::constant(3, T);
        assert!(fn_action(&a, &f, &f).is_err());
        assert!(PartialFn::new(vec![Some(2), None]).is_err());
    }

    #[test]
    fn partial_fn_index_round_trip() {
        for i in 0..27 {
            assert_eq!(PartialFn::from_index(2, i % 9).to_index(), i % 9);
            assert_eq!(PartialFn::from_index(3, i).to_index(), i);
        }
        assert_eq!(PartialFn::from_index(2, 0), PartialFn::nowhere(2));
    }

    #[test]
    fn self_action_examples() {
        let m = AlgebraTables::power(2);
        let (t, f, u) = (m.top(), m.bottom(), m.undefined().unwrap());
        for b in 0..m.size() {
            for c in 0..m.size() {
                assert_eq!(self_action(&m, t, b, c), b);
                assert_eq!(self_action(&m, u, b, c), u);
                assert_eq!(self_action(&m, f, b, c), c);
            }
            assert_eq!(self_star(&m, u, b), u);
            assert_eq!(self_star(&m, b, b), m.or(b, m.neg(b)));
            assert_eq!(self_star(&m, b, b), self_action(&m, b, b, m.neg(b)));
        }
        let three = AlgebraTables::three();
        assert_eq!(self_star(&three, 0, 2), 2);
    }

    #[test]
    fn generated_models_satisfy_structural_invariants() {
        for m in [
            FiniteCSet::basic(4, true),
            FiniteCSet::functional(1),
            FiniteCSet::functional(2),
            FiniteCSet::self_ada(1),
            FiniteCSet::self_ada(2),
        ] {
            let u = m.tests().undefined().unwrap();
            let f = m.tests().bottom();
            for s in 0..m.points() {
                for t in 0..m.points() {
                    assert_eq!(table_eval(&m, TableKind::Action, &[u, s, t]).unwrap(), BOTTOM);
                    assert_eq!(table_eval(&m, TableKind::Action, &[f, s, t]).unwrap(), t);
                }
                assert_eq!(table_eval(&m, TableKind::Star, &[BOTTOM, s]).unwrap(), u);
            }
        }
    }

    #[test]
    fn functional_model_sizes() {
        let m = FiniteCSet::functional(2);
        assert_eq!(m.points(), 9);
        assert_eq!(m.tests().size(), 9);
        assert_eq!(FiniteCSet::self_ada(2).points(), 9);
    }

    #[test]
    fn table_eval_errors() {
        let m = FiniteCSet::basic(3, false);
        assert!(matches!(
            table_eval(&m, TableKind::Action, &[0, 3, 0]),
            Err(ModelError::OutOfRange { .. })
        ));
        assert_eq!(
            table_eval(&m, TableKind::Star, &[1, 1]),
            Err(ModelError::MissingStar)
        );
        assert!(matches!(
            table_eval(&m, TableKind::Star, &[1]),
            Err(ModelError::IndexCount { .. })
        ));
    }

    #[test]
    fn construction_rejects_broken_rows() {
        let good = FiniteCSet::basic(3, true);
        let raw = RawCSet::from(good.clone());
        let mut bad = RawCSet { ..raw };
        bad.action[2][1][2] = 1;
        assert_eq!(
            FiniteCSet::try_from(bad),
            Err(ModelError::URow { s: 1, t: 2 })
        );
        let mut bad = RawCSet::from(good.clone());
        bad.action[1][0][0] = 2;
        assert!(matches!(FiniteCSet::try_from(bad), Err(ModelError::FRow { .. })));
        let mut bad = RawCSet::from(good);
        bad.star.as_mut().unwrap()[0][1] = 0;
        assert!(matches!(
            FiniteCSet::try_from(bad),
            Err(ModelError::BottomComparison { .. })
        ));
    }

    #[test]
    fn json_shape() {
        let m = FiniteCSet::basic(2, true);
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["points"], 2);
        assert_eq!(v["action"].as_array().unwrap().len(), 3);
        assert_eq!(v["star"][1][1], 0);
        let back: FiniteCSet = serde_json::from_value(v).unwrap();
        assert_eq!(back.without_star().star_table(), None);
        assert_eq!(back.action_at(0, 1, 0), 1);
    }

    #[test]
    fn skeleton_view_has_boolean_tests() {
        let view = bset_view(&FiniteCSet::self_ada(1)).unwrap();
        assert_eq!(view.tests().size(), 2);
        assert_eq!(view.points(), 3);
        let view = bset_view(&FiniteCSet::functional(1)).unwrap();
        assert_eq!(view.tests().size(), 2);
    }

    #[test]
    fn projection_commutes_with_functional_operations() {
        // Evaluating at a coordinate x turns the functional model into the
        // basic model on X_bot (bot encoded as point 0, y as point y+1).
        let n = 2;
        let project = |f: &PartialFn, x: usize| f.apply(x).map_or(BOTTOM, |y| y + 1);
        let fns: Vec<PartialFn> = (0..9).map(|i| PartialFn::from_index(n, i)).collect();
        for j in 0..9 {
            let alpha = TestVector::from_index(n, j);
            for f in &fns {
                for g in &fns {
                    let h = fn_action(&alpha, f, g).unwrap();
                    let e = fn_star(f, g).unwrap();
                    for x in 0..n {
                        let basic = basic_action(alpha.value_at(x), project(f, x), project(g, x));
                        assert_eq!(project(&h, x), basic);
                        assert_eq!(e.value_at(x), basic_star(project(f, x), project(g, x)));
                    }
                }
            }
        }
    }
}
