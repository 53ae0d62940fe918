use std::fmt;

use serde::Serialize;

use super::{
    e_theta_search, maximal_congruences, meet_all, quotient_labels, CongruenceError, CongruencePair,
    Partition,
};
use crate::logic::{classify_algebra, AlgebraClass, TruthValue};
use crate::models::{basic_action, basic_star, FiniteCSet, BOTTOM};

/// One factor of a subdirect representation: the quotient maps onto a basic
/// model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factor {
    pub theta: Partition,
    pub e_theta: Partition,
    /// Image of each test in the two- or three-element factor algebra.
    pub test_map: Vec<TruthValue>,
    /// Image of each point; in C-set factors `bot` maps to 0.
    pub point_map: Vec<usize>,
    /// Number of points of the factor.
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Embedding {
    pub factors: Vec<Factor>,
    pub injective_points: bool,
    pub injective_tests: bool,
    pub injective: bool,
    /// `None` unless the equality test was checked.
    pub star_preserved: Option<bool>,
    /// Related pairs whose `E_theta` witness was not `^`-fixed.
    pub fallback_witnesses: usize,
}

impl Embedding {
    pub fn point_image(&self, s: usize) -> Vec<usize> {
        self.factors.iter().map(|f| f.point_map[s]).collect()
    }

    pub fn test_image(&self, a: usize) -> Vec<TruthValue> {
        self.factors.iter().map(|f| f.test_map[a]).collect()
    }

    pub(crate) fn finish(
        factors: Vec<Factor>,
        n_points: usize,
        n_tests: usize,
        star_preserved: Option<bool>,
        fallback_witnesses: usize,
    ) -> Result<Self, CongruenceError> {
        let es: Vec<Partition> = factors.iter().map(|f| f.e_theta.clone()).collect();
        let thetas: Vec<Partition> = factors.iter().map(|f| f.theta.clone()).collect();
        let injective_points = meet_all(n_points, &es).is_discrete();
        let injective_tests = meet_all(n_tests, &thetas).is_discrete();
        if !injective_points {
            return Err(CongruenceError::NotInjective("points"));
        }
        if !injective_tests {
            return Err(CongruenceError::NotInjective("tests"));
        }
        Ok(Embedding {
            factors,
            injective_points,
            injective_tests,
            injective: true,
            star_preserved,
            fallback_witnesses,
        })
    }
}

impl fmt::Display for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} factors", self.factors.len())?;
        for (i, factor) in self.factors.iter().enumerate() {
            writeln!(f, "  factor {i}: {} points", factor.points)?;
            writeln!(f, "    theta   = {}", factor.theta.render())?;
            writeln!(f, "    E_theta = {}", factor.e_theta.render())?;
        }
        writeln!(
            f,
            "injective: {} (points {}, tests {})",
            self.injective, self.injective_points, self.injective_tests
        )?;
        match self.star_preserved {
            Some(p) => write!(f, "star preserved: {p}"),
            None => write!(f, "star preserved: not checked"),
        }
    }
}

/// Numbers the blocks of `e` with `bot`'s block first.
fn point_map_with_bottom(e: &Partition) -> (Vec<usize>, usize) {
    let ground = e.block_of(BOTTOM);
    let map = e
        .labels()
        .iter()
        .map(|&b| match b {
            b if b == ground => 0,
            b if b < ground => b + 1,
            b => b,
        })
        .collect();
    (map, e.block_count())
}

/// Represents `m` as a subdirect product of basic C-sets, one per maximal
/// congruence of its ada of tests. With `agreeable`, also checks that the
/// equality test is carried to the basic one in every factor.
pub fn subdirect_embed(m: &FiniteCSet, agreeable: bool) -> Result<Embedding, CongruenceError> {
    let tests = m.tests();
    let report = classify_algebra(tests, AlgebraClass::Ada)
        .map_err(|e| CongruenceError::NotAda(e.to_string()))?;
    if let Some(bad) = report.first_failure() {
        return Err(CongruenceError::NotAda(format!("fails {}", bad.label)));
    }
    if agreeable && m.star_table().is_none() {
        return Err(CongruenceError::MissingStar);
    }
    let (n, k) = (m.points(), tests.size());
    let mut factors = Vec::new();
    let mut star_ok = true;
    let mut fallback = 0;
    for (i, theta) in maximal_congruences(tests)?.into_iter().enumerate() {
        let test_map =
            quotient_labels(tests, &theta).ok_or_else(|| CongruenceError::QuotientNotThree(theta.render()))?;
        let search = e_theta_search(m, &theta)?;
        fallback += search.fallback_pairs;
        let e = search.partition;
        let pair = CongruencePair {
            points: e.clone(),
            tests: theta.clone(),
        };
        if !pair.is_compatible(m) {
            return Err(CongruenceError::NotCompatible(format!(
                "E = {} with theta = {}",
                e.render(),
                theta.render()
            )));
        }
        let (point_map, points) = point_map_with_bottom(&e);
        for a in 0..k {
            for s in 0..n {
                for t in 0..n {
                    let lhs = point_map[m.action_at(a, s, t)];
                    let rhs = basic_action(test_map[a], point_map[s], point_map[t]);
                    if lhs != rhs {
                        return Err(CongruenceError::NotHomomorphism {
                            factor: i,
                            detail: format!("action at ({a},{s},{t})"),
                        });
                    }
                }
            }
        }
        if agreeable {
            let preserved = pair.preserves_star(m)
                && (0..n).all(|s| {
                    (0..n).all(|t| {
                        let st = m.star_at(s, t).expect("checked above");
                        test_map[st] == basic_star(point_map[s], point_map[t])
                    })
                });
            star_ok &= preserved;
        }
        factors.push(Factor {
            theta,
            e_theta: e,
            test_map,
            point_map,
            points,
        });
    }
    Embedding::finish(factors, n, k, agreeable.then_some(star_ok), fallback)
}
