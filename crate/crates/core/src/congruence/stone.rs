use std::fmt;

use serde::Serialize;

use super::{find_isomorphism, CongruenceError};
use crate::logic::{boolean_skeleton, classify_algebra, AlgebraClass, AlgebraTables, TestVector};
use crate::report::SuiteReport;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundTrip {
    pub atoms: usize,
    pub boolean_size: usize,
    pub star_size: usize,
    /// The ada suite run on the disjoint-pair algebra.
    pub ada: SuiteReport,
    /// The Boolean skeleton of the pair algebra is isomorphic to the input.
    pub skeleton_isomorphic: bool,
    /// Rebuilding pairs from that skeleton gives back the pair algebra.
    pub reverse_isomorphic: bool,
    pub passed: bool,
}

impl fmt::Display for RoundTrip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Boolean algebra with {} atoms ({} elements) -> {} disjoint pairs",
            self.atoms, self.boolean_size, self.star_size
        )?;
        write!(f, "{}", self.ada)?;
        writeln!(f, "skeleton isomorphic to input: {}", self.skeleton_isomorphic)?;
        write!(f, "pairs over the skeleton isomorphic back: {}", self.reverse_isomorphic)
    }
}

/// Atoms of a finite Boolean algebra: minimal elements other than `F`.
pub fn atoms(b: &AlgebraTables) -> Vec<usize> {
    let below = |x: usize, y: usize| b.and(x, y) == x;
    let f = b.bottom();
    (0..b.size())
        .filter(|&x| x != f && (0..b.size()).all(|y| y == f || y == x || !below(y, x)))
        .collect()
}

fn require_boolean(b: &AlgebraTables) -> Result<(), CongruenceError> {
    let report = classify_algebra(b, AlgebraClass::Boolean)?;
    match report.first_failure() {
        Some(bad) => Err(CongruenceError::NotBoolean(format!("fails {}", bad.label))),
        None => Ok(()),
    }
}

/// The ada of disjoint pairs `(P, Q)` of elements of a finite Boolean
/// algebra, each pair written over the atoms. Returns the tables and the
/// pair behind each element.
pub fn star_algebra(b: &AlgebraTables) -> Result<(AlgebraTables, Vec<TestVector>), CongruenceError> {
    require_boolean(b)?;
    let at = atoms(b);
    let k = at.len();
    let over_atoms = |x: usize| -> Vec<usize> { (0..k).filter(|&i| b.and(at[i], x) == at[i]).collect() };
    let mut pairs = Vec::new();
    for p in 0..b.size() {
        for q in 0..b.size() {
            if b.and(p, q) == b.bottom() {
                pairs.push(TestVector::from_sets(k, over_atoms(p), over_atoms(q))?);
            }
        }
    }
    let tables = AlgebraTables::from_test_vectors(&pairs, true)?;
    Ok((tables, pairs))
}

/// Builds the pair algebra of `b`, checks it is an ada whose skeleton is
/// `b` again, and that the pair algebra of that skeleton is isomorphic to it.
pub fn boolean_ada_roundtrip(b: &AlgebraTables) -> Result<RoundTrip, CongruenceError> {
    let (star, _) = star_algebra(b)?;
    let ada = classify_algebra(&star, AlgebraClass::Ada)?;
    let skeleton = star.subalgebra(&boolean_skeleton(&star)?)?;
    let skeleton_isomorphic = find_isomorphism(&skeleton, b)?.is_some();
    let reverse_isomorphic = ada.passed && ada_roundtrip(&star)?;
    Ok(RoundTrip {
        atoms: atoms(b).len(),
        boolean_size: b.size(),
        star_size: star.size(),
        passed: ada.passed && skeleton_isomorphic && reverse_isomorphic,
        ada,
        skeleton_isomorphic,
        reverse_isomorphic,
    })
}

/// For a finite ada `a`: is the pair algebra of its skeleton isomorphic to `a`?
pub fn ada_roundtrip(a: &AlgebraTables) -> Result<bool, CongruenceError> {
    let skeleton = a.subalgebra(&boolean_skeleton(a)?)?;
    let (star, _) = star_algebra(&skeleton)?;
    Ok(find_isomorphism(&star, a)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_over_one_atom_give_three() {
        let (star, pairs) = star_algebra(&AlgebraTables::two()).unwrap();
        assert_eq!(pairs.len(), 3);
        assert!(find_isomorphism(&star, &AlgebraTables::three()).unwrap().is_some());
    }

    #[test]
    fn pairs_over_two_atoms_give_three_squared() {
        let (star, _) = star_algebra(&AlgebraTables::boolean_power(2)).unwrap();
        assert_eq!(star.size(), 9);
        assert!(find_isomorphism(&star, &AlgebraTables::power(2)).unwrap().is_some());
    }

    #[test]
    fn round_trips() {
        for n in 1..=3 {
            let r = boolean_ada_roundtrip(&AlgebraTables::boolean_power(n)).unwrap();
            assert!(r.passed, "{r}");
            assert_eq!(r.star_size, 3usize.pow(n as u32));
            assert_eq!(r.atoms, n);
        }
        assert!(ada_roundtrip(&AlgebraTables::power(2)).unwrap());
    }

    #[test]
    fn non_boolean_input_is_rejected() {
        assert!(matches!(
            boolean_ada_roundtrip(&AlgebraTables::three()),
            Err(CongruenceError::NotBoolean(_))
        ));
    }

    #[test]
    fn atoms_of_powers() {
        assert_eq!(atoms(&AlgebraTables::boolean_power(3)), vec![1, 2, 4]);
    }
}
