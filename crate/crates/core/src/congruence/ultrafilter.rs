use super::stone::atoms;
use super::subdirect::{Embedding, Factor};
use super::{CongruenceError, CongruencePair, Partition, UnionFind};
use crate::logic::{classify_algebra, AlgebraClass, TruthValue};
use crate::models::{FiniteBSet, Structure};

/// Represents a finite agreeable B-set as a subdirect product of basic
/// agreeable B-sets, one per ultrafilter (equivalently, per atom) of its
/// Boolean algebra of tests.
pub fn bset_ultrafilter_decompose(m: &FiniteBSet) -> Result<Embedding, CongruenceError> {
    let tests = m.tests();
    let report = classify_algebra(tests, AlgebraClass::Boolean)?;
    if let Some(bad) = report.first_failure() {
        return Err(CongruenceError::NotBoolean(format!("fails {}", bad.label)));
    }
    if !m.has_star() {
        return Err(CongruenceError::MissingStar);
    }
    let (n, k) = (m.points(), tests.size());
    let mut factors = Vec::new();
    let mut star_ok = true;
    for (i, &atom) in atoms(tests).iter().enumerate() {
        // The ultrafilter of `atom` and its kernel.
        let in_filter: Vec<bool> = (0..k).map(|g| tests.and(atom, g) == atom).collect();
        let test_map: Vec<TruthValue> = in_filter
            .iter()
            .map(|&f| if f { TruthValue::T } else { TruthValue::F })
            .collect();
        let theta = Partition::from_labels(&in_filter);
        let filter: Vec<usize> = (0..k).filter(|&g| in_filter[g]).collect();
        let mut uf = UnionFind::new(n);
        let mut related = vec![false; n * n];
        for s in 0..n {
            for t in 0..n {
                if filter.iter().any(|&g| m.act(g, s, t) == t) {
                    related[s * n + t] = true;
                    uf.union(s, t);
                }
            }
        }
        let e = uf.partition();
        if (0..n * n).any(|st| related[st] != e.same(st / n, st % n)) {
            return Err(CongruenceError::NotEquivalence(format!("ultrafilter of atom {atom}")));
        }
        let pair = CongruencePair {
            points: e.clone(),
            tests: theta.clone(),
        };
        if !pair.is_compatible(m) {
            return Err(CongruenceError::NotCompatible(format!("ultrafilter of atom {atom}")));
        }
        let point_map = e.labels().to_vec();
        for a in 0..k {
            for s in 0..n {
                for t in 0..n {
                    let chosen = if test_map[a] == TruthValue::T { s } else { t };
                    if point_map[m.act(a, s, t)] != point_map[chosen] {
                        return Err(CongruenceError::NotHomomorphism {
                            factor: i,
                            detail: format!("action at ({a},{s},{t})"),
                        });
                    }
                }
            }
        }
        star_ok &= pair.preserves_star(m)
            && (0..n).all(|s| {
                (0..n).all(|t| {
                    let expected = point_map[s] == point_map[t];
                    (test_map[m.star(s, t)] == TruthValue::T) == expected
                })
            });
        factors.push(Factor {
            points: e.block_count(),
            theta,
            e_theta: e,
            test_map,
            point_map,
        });
    }
    Embedding::finish(factors, n, k, Some(star_ok), 0)
}
