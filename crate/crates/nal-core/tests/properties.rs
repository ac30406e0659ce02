use std::collections::BTreeMap;

use nal_core::field::{limit_at_zero, parse_scalar, Assumptions, Branch, ScalarExpr, Var};
use nal_core::identities::{check_identity, IdentityName};
use nal_core::invariants::{derivation_algebra, fingerprint};
use nal_core::tensor::{change_basis, jordan_product, BasisChange, StructureTensor};
use proptest::prelude::*;

fn int(n: i64) -> ScalarExpr {
    ScalarExpr::from_int(n)
}

/// Polynomial in alpha and beta with small integer coefficients.
fn poly() -> impl Strategy<Value = ScalarExpr> {
    prop::collection::vec((-4i64..=4, 0u32..3, 0u32..3), 1..4).prop_map(|terms| {
        let (a, b) = (ScalarExpr::var("alpha"), ScalarExpr::var("beta"));
        let mut acc = ScalarExpr::zero();
        for (c, i, j) in terms {
            let m = &(&int(c) * &a.powi(i as i64).unwrap()) * &b.powi(j as i64).unwrap();
            acc = &acc + &m;
        }
        acc
    })
}

fn nonzero_poly() -> impl Strategy<Value = ScalarExpr> {
    poly().prop_filter("nonzero", |x| !x.is_zero())
}

/// Polynomial in t with nonzero constant term.
fn t_unit() -> impl Strategy<Value = ScalarExpr> {
    (prop::collection::vec(-5i64..=5, 0..4), prop_oneof![-5i64..=-1, 1i64..=5]).prop_map(|(cs, c0)| {
        let t = ScalarExpr::t();
        let mut acc = int(c0);
        for (k, c) in cs.into_iter().enumerate() {
            acc = &acc + &(&int(c) * &t.powi(k as i64 + 1).unwrap());
        }
        acc
    })
}

fn small() -> impl Strategy<Value = i64> {
    -2i64..=2
}

fn tensor3() -> impl Strategy<Value = StructureTensor> {
    prop::collection::vec(prop_oneof![4 => Just(0i64), 1 => small()], 27)
        .prop_map(|c| StructureTensor::from_fn(3, |i, j, k| int(c[(i * 3 + j) * 3 + k])))
}

fn invertible3() -> impl Strategy<Value = BasisChange> {
    prop::collection::vec(small(), 9)
        .prop_map(|c| BasisChange::new((0..3).map(|i| (0..3).map(|j| int(c[i * 3 + j])).collect()).collect()))
        .prop_filter("invertible", |p| !p.determinant().is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_ring_axioms(x in poly(), y in poly(), z in poly()) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert!((&x - &x).is_zero());
    }

    #[test]
    fn field_division(x in poly(), y in nonzero_poly()) {
        let q = x.try_div(&y).unwrap();
        prop_assert_eq!(&q * &y, x);
        prop_assert!((&y * &y.inv().unwrap()).is_one());
    }

    #[test]
    fn substitution_is_a_homomorphism(x in poly(), y in poly(), a in -3i64..=3, b in -3i64..=3) {
        let s: BTreeMap<Var, ScalarExpr> = [(Var::new("alpha"), int(a)), (Var::new("beta"), int(b))].into_iter().collect();
        let sub = |v: &ScalarExpr| v.substitute(&s).unwrap();
        prop_assert_eq!(sub(&(&x * &y)), &sub(&x) * &sub(&y));
        prop_assert_eq!(sub(&(&x + &y)), &sub(&x) + &sub(&y));
    }

    #[test]
    fn limits_are_multiplicative(f in t_unit(), g in t_unit()) {
        let none = Assumptions::new(Vec::new());
        let lim = |x: &ScalarExpr| limit_at_zero(x, &none, Branch::Principal).unwrap().value;
        prop_assert_eq!(lim(&(&f * &g)), &lim(&f) * &lim(&g));
        prop_assert_eq!(lim(&(&f / &g)), &lim(&f) / &lim(&g));
    }

    #[test]
    fn basis_changes_compose(a in tensor3(), p in invertible3(), q in invertible3()) {
        let two = change_basis(&change_basis(&a, &p).unwrap(), &q).unwrap();
        prop_assert_eq!(two, change_basis(&a, &p.then(&q)).unwrap());
    }

    #[test]
    fn invariants_survive_basis_change(a in tensor3(), p in invertible3()) {
        let b = change_basis(&a, &p).unwrap();
        prop_assert_eq!(fingerprint(&a).unwrap(), fingerprint(&b).unwrap());
        prop_assert_eq!(derivation_algebra(&a).dim(), derivation_algebra(&b).dim());
        for id in IdentityName::ALL {
            prop_assert_eq!(check_identity(&a, id).unwrap().is_verified(), check_identity(&b, id).unwrap().is_verified());
        }
    }

    #[test]
    fn jordan_product_commutes_with_basis_change(a in tensor3(), p in invertible3()) {
        let lhs = jordan_product(&change_basis(&a, &p).unwrap());
        prop_assert_eq!(lhs, change_basis(&jordan_product(&a), &p).unwrap());
    }
}

#[test]
fn radical_arithmetic_is_exact() {
    let s = parse_scalar("sqrt(2*alpha + 1)").unwrap();
    let sq = &s * &s;
    assert_eq!(sq, parse_scalar("2*alpha + 1").unwrap());
    assert!((&s / &s).is_one());
}
