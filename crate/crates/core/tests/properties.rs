use proptest::prelude::*;

use ifte::congruence::{all_congruences, is_congruence, principal_congruence, Partition};
use ifte::logic::{pair_apply, tv_apply, AlgebraTables, Connective, TestVector, TruthValue};
use ifte::models::{fn_action, fn_star, PartialFn};

fn tv() -> impl Strategy<Value = TruthValue> {
    prop_oneof![Just(TruthValue::T), Just(TruthValue::F), Just(TruthValue::U)]
}

/// Three test vectors over one universe; sizes past 64 reach the
/// non-bitmask representation.
fn vectors() -> impl Strategy<Value = (Vec<TruthValue>, Vec<TruthValue>, Vec<TruthValue>)> {
    (1usize..140).prop_flat_map(|n| {
        (
            prop::collection::vec(tv(), n),
            prop::collection::vec(tv(), n),
            prop::collection::vec(tv(), n),
        )
    })
}

fn partial_fns(n: usize) -> impl Strategy<Value = PartialFn> {
    prop::collection::vec(prop::option::of(0..n), n).prop_map(|img| PartialFn::new(img).unwrap())
}

/// Universe size, tests `a`, `b` and functions `s`, `t`, `u`, `v`.
type FnCase = (Vec<TruthValue>, Vec<TruthValue>, [PartialFn; 4]);

fn fn_case() -> impl Strategy<Value = FnCase> {
    (1usize..6).prop_flat_map(|n| {
        (
            prop::collection::vec(tv(), n),
            prop::collection::vec(tv(), n),
            [partial_fns(n), partial_fns(n), partial_fns(n), partial_fns(n)],
        )
    })
}

fn labels(n: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>, Vec<u8>)> {
    (
        prop::collection::vec(0u8..4, n),
        prop::collection::vec(0u8..4, n),
        prop::collection::vec(0u8..4, n),
    )
}

proptest! {
    #[test]
    fn pairs_of_sets_are_pointwise((x, y, _) in vectors()) {
        let (a, b) = (TestVector::from_values(&x), TestVector::from_values(&y));
        for conn in [Connective::And, Connective::Or] {
            let r = pair_apply(conn, &[&a, &b]).unwrap();
            prop_assert!(r.trues().is_disjoint(r.falses()));
            for i in 0..x.len() {
                prop_assert_eq!(r.value_at(i), tv_apply(conn, &[x[i], y[i]]).unwrap());
            }
        }
        for conn in [Connective::Neg, Connective::Down] {
            let r = pair_apply(conn, &[&a]).unwrap();
            prop_assert!(r.trues().is_disjoint(r.falses()));
            for i in 0..x.len() {
                prop_assert_eq!(r.value_at(i), tv_apply(conn, &[x[i]]).unwrap());
            }
        }
    }

    #[test]
    fn powers_of_three_satisfy_the_c_algebra_and_ada_laws((x, y, z) in vectors()) {
        let [a, b, c] = [&x, &y, &z].map(|v| TestVector::from_values(v));
        let and = |p: &TestVector, q: &TestVector| pair_apply(Connective::And, &[p, q]).unwrap();
        let or = |p: &TestVector, q: &TestVector| pair_apply(Connective::Or, &[p, q]).unwrap();
        let neg = |p: &TestVector| pair_apply(Connective::Neg, &[p]).unwrap();
        let down = |p: &TestVector| pair_apply(Connective::Down, &[p]).unwrap();
        prop_assert_eq!(neg(&neg(&a)), a.clone());
        prop_assert_eq!(neg(&and(&a, &b)), or(&neg(&a), &neg(&b)));
        prop_assert_eq!(and(&and(&a, &b), &c), and(&a, &and(&b, &c)));
        prop_assert_eq!(and(&a, &or(&b, &c)), or(&and(&a, &b), &and(&a, &c)));
        prop_assert_eq!(and(&or(&a, &b), &c), or(&and(&a, &c), &and(&and(&neg(&a), &b), &c)));
        prop_assert_eq!(or(&a, &and(&a, &b)), a.clone());
        prop_assert_eq!(or(&and(&a, &b), &and(&b, &a)), or(&and(&b, &a), &and(&a, &b)));
        prop_assert_eq!(and(&a, &down(&b)), and(&a, &down(&and(&a, &b))));
        let n = a.universe();
        prop_assert_eq!(or(&down(&a), &neg(&down(&a))), TestVector::constant(n, TruthValue::T));
        prop_assert_eq!(or(&down(&a), &a), a.clone());
    }

    #[test]
    fn functional_action_satisfies_the_c_set_laws((x, y, [s, t, u, v]) in fn_case()) {
        let n = x.len();
        let (a, b) = (TestVector::from_values(&x), TestVector::from_values(&y));
        let act = |p: &TestVector, f: &PartialFn, g: &PartialFn| fn_action(p, f, g).unwrap();
        let not_a = pair_apply(Connective::Neg, &[&a]).unwrap();
        let a_and_b = pair_apply(Connective::And, &[&a, &b]).unwrap();
        prop_assert_eq!(act(&TestVector::constant(n, TruthValue::U), &s, &t), PartialFn::nowhere(n));
        prop_assert_eq!(
            act(&a, &act(&b, &s, &t), &act(&b, &u, &v)),
            act(&b, &act(&a, &s, &u), &act(&a, &t, &v))
        );
        prop_assert_eq!(act(&a, &act(&a, &s, &t), &u), act(&a, &s, &u));
        prop_assert_eq!(act(&a, &s, &act(&a, &t, &u)), act(&a, &s, &u));
        prop_assert_eq!(act(&not_a, &s, &t), act(&a, &t, &s));
        prop_assert_eq!(act(&TestVector::constant(n, TruthValue::F), &s, &t), t.clone());
        prop_assert_eq!(act(&a_and_b, &s, &t), act(&a, &act(&b, &s, &t), &t));
        if act(&a, &s, &t) == act(&a, &t, &t) {
            prop_assert_eq!(act(&a_and_b, &s, &t), act(&a_and_b, &t, &t));
        }
    }

    #[test]
    fn functional_star_satisfies_the_agreeable_laws((x, _, [s, t, u, v]) in fn_case()) {
        let a = TestVector::from_values(&x);
        let star = |f: &PartialFn, g: &PartialFn| fn_star(f, g).unwrap();
        let act = |p: &TestVector, f: &PartialFn, g: &PartialFn| fn_action(p, f, g).unwrap();
        let and = |p: &TestVector, q: &TestVector| pair_apply(Connective::And, &[p, q]).unwrap();
        let n = x.len();
        let bot = PartialFn::nowhere(n);
        prop_assert_eq!(star(&bot, &s), TestVector::constant(n, TruthValue::U));
        prop_assert_eq!(star(&s, &t), star(&t, &s));
        prop_assert_eq!(act(&star(&s, &t), &s, &t), act(&star(&s, &t), &t, &t));
        let lhs = star(&act(&a, &s, &t), &act(&a, &u, &v));
        let not_a = pair_apply(Connective::Neg, &[&a]).unwrap();
        let rhs = pair_apply(Connective::Or, &[&and(&a, &star(&s, &u)), &and(&not_a, &star(&t, &v))]).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(act(&star(&s, &s), &s, &bot), s.clone());
    }

    #[test]
    fn partitions_form_a_lattice((p, q, r) in (1usize..9).prop_flat_map(labels)) {
        let [p, q, r] = [&p, &q, &r].map(|l| Partition::from_labels(l));
        prop_assert_eq!(p.meet(&q), q.meet(&p));
        prop_assert_eq!(p.join(&q), q.join(&p));
        prop_assert_eq!(p.meet(&p.join(&q)), p.clone());
        prop_assert_eq!(p.join(&p.meet(&q)), p.clone());
        prop_assert_eq!(p.meet(&q).meet(&r), p.meet(&q.meet(&r)));
        prop_assert_eq!(p.join(&q).join(&r), p.join(&q.join(&r)));
        prop_assert!(p.meet(&q).refines(&p) && p.refines(&p.join(&q)));
    }

    #[test]
    fn principal_congruences_are_least(a in 0usize..9, b in 0usize..9) {
        let t = AlgebraTables::power(2);
        let theta = principal_congruence(&t, a, b);
        prop_assert!(is_congruence(&t, &theta));
        prop_assert!(theta.same(a, b));
        for c in all_congruences(&t).unwrap() {
            if c.same(a, b) {
                prop_assert!(theta.refines(&c));
            }
        }
    }
}
