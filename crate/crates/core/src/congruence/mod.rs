//! Congruences of finite algebras and C-sets, and the representations built
//! from them.

mod stone;
mod subdirect;
mod ultrafilter;

pub use stone::{ada_roundtrip, atoms, boolean_ada_roundtrip, star_algebra, RoundTrip};
pub use subdirect::{subdirect_embed, Embedding, Factor};
pub use ultrafilter::bset_ultrafilter_decompose;

use std::collections::BTreeSet;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::logic::{AlgebraTables, LogicError, TruthValue};
use crate::models::Structure;

/// Algebras above this size are refused by the lattice and isomorphism
/// searches.
pub const MAX_ALGEBRA_SIZE: usize = 27;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CongruenceError {
    #[error("algebra of size {0} exceeds the limit of {MAX_ALGEBRA_SIZE}")]
    TooLarge(usize),
    #[error("the tests do not form an ada: {0}")]
    NotAda(String),
    #[error("the tests do not form a Boolean algebra: {0}")]
    NotBoolean(String),
    #[error("quotient by {0} is not isomorphic to 3")]
    QuotientNotThree(String),
    #[error("partition {0} is not a maximal congruence")]
    NotMaximal(String),
    #[error("point relation is not an equivalence: {0}")]
    NotEquivalence(String),
    #[error("pair of partitions is not a congruence: {0}")]
    NotCompatible(String),
    #[error("factor {factor} is not a homomorphism: {detail}")]
    NotHomomorphism { factor: usize, detail: String },
    #[error("product map is not injective on {0}; the model violates the axioms")]
    NotInjective(&'static str),
    #[error("the model has no equality test")]
    MissingStar,
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// An equivalence relation on `0..n`, stored as a canonical block labelling
/// (blocks numbered by first occurrence).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    block_of: Vec<usize>,
}

impl Partition {
    pub fn from_labels<T: Eq + std::hash::Hash + Clone>(labels: &[T]) -> Self {
        let mut seen = std::collections::HashMap::new();
        let block_of = labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l.clone()).or_insert(next)
            })
            .collect();
        Partition { block_of }
    }

    /// The identity relation.
    pub fn discrete(n: usize) -> Self {
        Partition {
            block_of: (0..n).collect(),
        }
    }

    /// The all relation.
    pub fn total(n: usize) -> Self {
        Partition {
            block_of: vec![0; n],
        }
    }

    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self, LogicError> {
        let mut labels = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &x in block {
                if x >= n || labels[x] != usize::MAX {
                    return Err(LogicError::Malformed(format!(
                        "blocks must partition 0..{n} (bad element {x})"
                    )));
                }
                labels[x] = b;
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(LogicError::Malformed("blocks do not cover every element".into()));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn labels(&self) -> &[usize] {
        &self.block_of
    }

    pub fn block_count(&self) -> usize {
        self.block_of.iter().max().map_or(0, |m| m + 1)
    }

    #[inline]
    pub fn same(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count()];
        for (x, &b) in self.block_of.iter().enumerate() {
            out[b].push(x);
        }
        out
    }

    pub fn block_containing(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.same(x, y)).collect()
    }

    pub fn is_discrete(&self) -> bool {
        self.block_count() == self.len()
    }

    pub fn is_total(&self) -> bool {
        self.block_count() <= 1
    }

    /// True if every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        let mut image = vec![None; self.block_count()];
        for x in 0..self.len() {
            let b = self.block_of[x];
            match image[b] {
                None => image[b] = Some(other.block_of[x]),
                Some(o) if o != other.block_of[x] => return false,
                _ => {}
            }
        }
        true
    }

    pub fn meet(&self, other: &Partition) -> Partition {
        let pairs: Vec<(usize, usize)> = self
            .block_of
            .iter()
            .zip(&other.block_of)
            .map(|(&a, &b)| (a, b))
            .collect();
        Partition::from_labels(&pairs)
    }

    pub fn join(&self, other: &Partition) -> Partition {
        let mut uf = UnionFind::new(self.len());
        for p in [self, other] {
            let mut first = vec![None; p.block_count()];
            for x in 0..p.len() {
                match first[p.block_of[x]] {
                    None => first[p.block_of[x]] = Some(x),
                    Some(y) => {
                        uf.union(x, y);
                    }
                }
            }
        }
        uf.partition()
    }

    /// Blocks as `{a,b} {c}`.
    pub fn render(&self) -> String {
        self.blocks()
            .iter()
            .map(|b| {
                let items: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.blocks().serialize(s)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if two classes were merged.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    pub(crate) fn partition(&mut self) -> Partition {
        let roots: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::from_labels(&roots)
    }
}

fn guard(t: &AlgebraTables) -> Result<(), CongruenceError> {
    if t.size() > MAX_ALGEBRA_SIZE {
        return Err(CongruenceError::TooLarge(t.size()));
    }
    Ok(())
}

/// True if `p` is compatible with every operation of `t`.
pub fn is_congruence(t: &AlgebraTables, p: &Partition) -> bool {
    let n = t.size();
    // Changing one argument at a time suffices by transitivity.
    for a in 0..n {
        for b in a + 1..n {
            if !p.same(a, b) {
                continue;
            }
            if !p.same(t.neg(a), t.neg(b)) {
                return false;
            }
            if let (Some(x), Some(y)) = (t.down(a), t.down(b)) {
                if !p.same(x, y) {
                    return false;
                }
            }
            for c in 0..n {
                if !p.same(t.and(a, c), t.and(b, c))
                    || !p.same(t.and(c, a), t.and(c, b))
                    || !p.same(t.or(a, c), t.or(b, c))
                    || !p.same(t.or(c, a), t.or(c, b))
                {
                    return false;
                }
            }
        }
    }
    true
}

/// The smallest congruence identifying `a` and `b`: union-find closed under
/// the unary translations of the basic operations.
pub fn principal_congruence(t: &AlgebraTables, a: usize, b: usize) -> Partition {
    let n = t.size();
    let mut uf = UnionFind::new(n);
    let mut queue = vec![(a, b)];
    uf.union(a, b);
    while let Some((x, y)) = queue.pop() {
        let mut images = vec![(t.neg(x), t.neg(y))];
        if let (Some(dx), Some(dy)) = (t.down(x), t.down(y)) {
            images.push((dx, dy));
        }
        for c in 0..n {
            images.push((t.and(x, c), t.and(y, c)));
            images.push((t.and(c, x), t.and(c, y)));
            images.push((t.or(x, c), t.or(y, c)));
            images.push((t.or(c, x), t.or(c, y)));
        }
        for (u, v) in images {
            if uf.union(u, v) {
                queue.push((u, v));
            }
        }
    }
    uf.partition()
}

/// Every congruence of `t`, sorted, including the identity and the total
/// relation.
pub fn all_congruences(t: &AlgebraTables) -> Result<Vec<Partition>, CongruenceError> {
    guard(t)?;
    let n = t.size();
    let mut set: BTreeSet<Partition> = BTreeSet::new();
    set.insert(Partition::discrete(n));
    for a in 0..n {
        for b in a + 1..n {
            set.insert(principal_congruence(t, a, b));
        }
    }
    // Every congruence is a join of principal ones.
    loop {
        let current: Vec<Partition> = set.iter().cloned().collect();
        let mut grew = false;
        for (i, p) in current.iter().enumerate() {
            for q in &current[i + 1..] {
                if set.insert(p.join(q)) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    Ok(set.into_iter().collect())
}

/// Labels each element by its class in a quotient isomorphic to `3`, or
/// `None` if the quotient is not `3`.
pub fn quotient_labels(t: &AlgebraTables, theta: &Partition) -> Option<Vec<TruthValue>> {
    let u = t.undefined()?;
    let (top, bot) = (t.top(), t.bottom());
    if theta.block_count() != 3 || theta.same(top, bot) || theta.same(top, u) || theta.same(bot, u) {
        return None;
    }
    let label = |a: usize| {
        if theta.same(a, top) {
            TruthValue::T
        } else if theta.same(a, bot) {
            TruthValue::F
        } else {
            TruthValue::U
        }
    };
    let labels: Vec<TruthValue> = (0..t.size()).map(label).collect();
    for a in 0..t.size() {
        if labels[t.neg(a)] != labels[a].not() {
            return None;
        }
        if let Some(d) = t.down(a) {
            if labels[d] != labels[a].down() {
                return None;
            }
        }
        for b in 0..t.size() {
            if labels[t.and(a, b)] != labels[a].and(labels[b])
                || labels[t.or(a, b)] != labels[a].or(labels[b])
            {
                return None;
            }
        }
    }
    Some(labels)
}

fn is_ada_tables(t: &AlgebraTables) -> bool {
    t.has_down() && t.undefined().is_some()
}

/// The maximal proper congruences of `t`. For adas each quotient is checked
/// to be `3`, and an error is returned otherwise.
pub fn maximal_congruences(t: &AlgebraTables) -> Result<Vec<Partition>, CongruenceError> {
    let all = all_congruences(t)?;
    let proper: Vec<&Partition> = all.iter().filter(|p| !p.is_total()).collect();
    let maximal: Vec<Partition> = proper
        .iter()
        .filter(|p| !proper.iter().any(|q| q != *p && p.refines(q)))
        .map(|p| (*p).clone())
        .collect();
    if is_ada_tables(t) {
        if let Some(bad) = maximal.iter().find(|p| quotient_labels(t, p).is_none()) {
            return Err(CongruenceError::QuotientNotThree(bad.render()));
        }
    }
    Ok(maximal)
}

/// Meet of a list of partitions of `0..n`.
pub fn meet_all(n: usize, ps: &[Partition]) -> Partition {
    ps.iter().fold(Partition::total(n), |acc, p| acc.meet(p))
}

/// A two-sorted relation pair: `points` on the points, `tests` on the tests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CongruencePair {
    pub points: Partition,
    pub tests: Partition,
}

impl CongruencePair {
    /// Checks that `tests` is an algebra congruence and that
    /// `s~t, u~v, a~b` imply `a[s,u] ~ b[t,v]`.
    pub fn is_compatible<S: Structure + ?Sized>(&self, m: &S) -> bool {
        let (sigma, tau) = (&self.points, &self.tests);
        if !is_congruence(m.tests(), tau) {
            return false;
        }
        let (k, n) = (m.tests().size(), m.point_count());
        for a in 0..k {
            for s in 0..n {
                for u in 0..n {
                    let base = m.act(a, s, u);
                    for b in 0..k {
                        if tau.same(a, b) && !sigma.same(base, m.act(b, s, u)) {
                            return false;
                        }
                    }
                    for t in 0..n {
                        if sigma.same(s, t) && !sigma.same(base, m.act(a, t, u)) {
                            return false;
                        }
                        if sigma.same(u, t) && !sigma.same(base, m.act(a, s, t)) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// `s~t, u~v` imply `s*u ~ t*v`.
    pub fn preserves_star<S: Structure + ?Sized>(&self, m: &S) -> bool {
        let (sigma, tau) = (&self.points, &self.tests);
        let n = m.point_count();
        for s in 0..n {
            for u in 0..n {
                let base = m.star(s, u);
                for t in 0..n {
                    if sigma.same(s, t) && !tau.same(base, m.star(t, u)) {
                        return false;
                    }
                    if sigma.same(u, t) && !tau.same(base, m.star(s, t)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// `E_theta` together with how many related pairs needed a witness outside
/// the `^`-fixed part of the T-block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EThetaSearch {
    pub partition: Partition,
    pub fallback_pairs: usize,
}

/// Relates `s` and `t` when some `b` in the T-block of `theta` has
/// `b[s,t] = b[t,t]`. `theta` is assumed maximal.
pub fn e_theta_search<S: Structure + ?Sized>(
    m: &S,
    theta: &Partition,
) -> Result<EThetaSearch, CongruenceError> {
    let tests = m.tests();
    let block = theta.block_containing(tests.top());
    let (fixed, rest): (Vec<usize>, Vec<usize>) = block
        .iter()
        .partition(|&&b| tests.down(b).is_some_and(|d| d == b));
    let n = m.point_count();
    let agree = |b: usize, s: usize, t: usize| m.act(b, s, t) == m.act(b, t, t);
    let mut related = vec![false; n * n];
    let mut fallback_pairs = 0;
    for s in 0..n {
        for t in 0..n {
            if fixed.iter().any(|&b| agree(b, s, t)) {
                related[s * n + t] = true;
            } else if rest.iter().any(|&b| agree(b, s, t)) {
                related[s * n + t] = true;
                fallback_pairs += 1;
            }
        }
    }
    // The relation must be an equivalence; build it and compare.
    let mut uf = UnionFind::new(n);
    for s in 0..n {
        for t in 0..n {
            if related[s * n + t] {
                uf.union(s, t);
            }
        }
    }
    let partition = uf.partition();
    for s in 0..n {
        for t in 0..n {
            if partition.same(s, t) != related[s * n + t] {
                return Err(CongruenceError::NotEquivalence(format!(
                    "pair ({s},{t}) breaks reflexivity, symmetry or transitivity"
                )));
            }
        }
    }
    Ok(EThetaSearch {
        partition,
        fallback_pairs,
    })
}

/// `E_theta` for a maximal congruence `theta` of the tests of `m`.
pub fn e_theta<S: Structure + ?Sized>(m: &S, theta: &Partition) -> Result<Partition, CongruenceError> {
    if !maximal_congruences(m.tests())?.contains(theta) {
        return Err(CongruenceError::NotMaximal(theta.render()));
    }
    Ok(e_theta_search(m, theta)?.partition)
}

/// Searches for an isomorphism `a -> b` preserving `and`, `or`, `neg`, the
/// constants, and `down` when both carry it. Returns the element map.
pub fn find_isomorphism(
    a: &AlgebraTables,
    b: &AlgebraTables,
) -> Result<Option<Vec<usize>>, CongruenceError> {
    guard(a)?;
    guard(b)?;
    if a.size() != b.size() || a.undefined().is_some() != b.undefined().is_some() {
        return Ok(None);
    }
    let use_down = a.has_down() && b.has_down();
    let n = a.size();
    let mut map = vec![None; n];
    let mut used = vec![false; n];
    let mut seeds = vec![(a.top(), b.top()), (a.bottom(), b.bottom())];
    if let (Some(x), Some(y)) = (a.undefined(), b.undefined()) {
        seeds.push((x, y));
    }
    if !extend(a, b, use_down, &mut map, &mut used, seeds) {
        return Ok(None);
    }
    Ok(search(a, b, use_down, map, used))
}

fn search(
    a: &AlgebraTables,
    b: &AlgebraTables,
    use_down: bool,
    map: Vec<Option<usize>>,
    used: Vec<bool>,
) -> Option<Vec<usize>> {
    let Some(x) = map.iter().position(Option::is_none) else {
        return Some(map.into_iter().map(|m| m.expect("complete")).collect());
    };
    for y in 0..b.size() {
        if used[y] {
            continue;
        }
        let (mut m2, mut u2) = (map.clone(), used.clone());
        if extend(a, b, use_down, &mut m2, &mut u2, vec![(x, y)]) {
            if let Some(found) = search(a, b, use_down, m2, u2) {
                return Some(found);
            }
        }
    }
    None
}

/// Adds the forced pairs and closes the partial map under the operations;
/// false on conflict.
fn extend(
    a: &AlgebraTables,
    b: &AlgebraTables,
    use_down: bool,
    map: &mut [Option<usize>],
    used: &mut [bool],
    mut pending: Vec<(usize, usize)>,
) -> bool {
    while let Some((x, y)) = pending.pop() {
        match map[x] {
            Some(z) if z == y => continue,
            Some(_) => return false,
            None if used[y] => return false,
            None => {
                map[x] = Some(y);
                used[y] = true;
            }
        }
        pending.push((a.neg(x), b.neg(y)));
        if use_down {
            pending.push((a.down(x).expect("down"), b.down(y).expect("down")));
        }
        for z in 0..a.size() {
            if let Some(w) = map[z] {
                pending.push((a.and(x, z), b.and(y, w)));
                pending.push((a.and(z, x), b.and(w, y)));
                pending.push((a.or(x, z), b.or(y, w)));
                pending.push((a.or(z, x), b.or(w, y)));
            }
        }
    }
    true
}
