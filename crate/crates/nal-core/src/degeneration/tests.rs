use super::*;
use crate::field::{parse_expr, parse_scalar};
use alloc::string::ToString;

fn v(xs: &[&str]) -> Vec<ScalarExpr> {
    xs.iter().map(|x| parse_scalar(x).unwrap()).collect()
}

fn comm(rows: &[(usize, usize, &[&str])]) -> StructureTensor {
    let mut ps = Vec::new();
    for (i, j, c) in rows {
        ps.push((*i, *j, v(c)));
        if i != j {
            ps.push((*j, *i, v(c)));
        }
    }
    StructureTensor::from_products(3, &ps)
}

fn raw(rows: &[(usize, usize, &[&str])]) -> StructureTensor {
    let ps: Vec<_> = rows.iter().map(|(i, j, c)| (*i, *j, v(c))).collect();
    StructureTensor::from_products(3, &ps)
}

fn witness(index: &[(&str, &str)], basis: [[&str; 3]; 3]) -> DegenerationWitness {
    DegenerationWitness {
        from: String::from("A"),
        to: String::from("B"),
        index: index.iter().map(|(k, e)| (String::from(*k), parse_expr(e).unwrap())).collect(),
        basis: basis.iter().map(|r| r.iter().map(|e| parse_expr(e).unwrap()).collect()).collect(),
    }
}

fn m01() -> StructureTensor {
    comm(&[(0, 0, &["0", "1", "0"])])
}

fn m02() -> StructureTensor {
    comm(&[(0, 1, &["0", "0", "1"])])
}

fn m04() -> StructureTensor {
    comm(&[(0, 2, &["1", "0", "0"]), (1, 2, &["0", "alpha", "0"])])
        .with_params(alloc::vec![String::from("alpha")], alloc::vec![])
}

fn m07() -> StructureTensor {
    comm(&[(0, 2, &["1", "0", "0"]), (1, 1, &["1", "0", "0"])])
}

#[test]
fn transport_m02_to_m01() {
    let w = witness(&[], [["1", "1/2", "0"], ["0", "0", "1"], ["0", "t", "0"]]);
    let c = transported_constants(&m02(), &w).unwrap();
    let mut expect = StructureTensor::zero(3);
    expect.set(0, 0, 1, ScalarExpr::one());
    expect.set(0, 2, 1, ScalarExpr::t());
    expect.set(2, 0, 1, ScalarExpr::t());
    assert_eq!(c, expect);
    let o = verify_degeneration(&m02(), &m01(), &w, VerifyOptions::default());
    assert_eq!(o, DegenerationOutcome::VerifiedExact { branch: None, side_conditions: alloc::vec![] });
    let n = verify_degeneration(&m02(), &m01(), &w, VerifyOptions { numeric_only: true });
    assert!(matches!(n, DegenerationOutcome::VerifiedNumeric(_)), "{:?}", n);
}

#[test]
fn identity_witness_is_constant() {
    let w = witness(&[], [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]);
    let c = transported_constants(&m04(), &w).unwrap();
    assert!(c.entries().iter().all(|x| !x.contains_t()));
    assert!(verify_degeneration(&m04(), &m04(), &w, VerifyOptions::default()).is_verified());
}

#[test]
fn wrong_limit_is_refuted() {
    let j07 = comm(&[(0, 0, &["1", "0", "0"]), (1, 1, &["0", "1", "0"]), (2, 2, &["0", "0", "1"])]);
    let w = witness(&[], [["t", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]);
    match verify_degeneration(&m01(), &j07, &w, VerifyOptions::default()) {
        DegenerationOutcome::Refuted { entry, .. } => assert_eq!(entry, (0, 0, 0)),
        o => panic!("{:?}", o),
    }
    let pole = witness(&[], [["1/t", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]);
    match verify_degeneration(&m01(), &m01(), &pole, VerifyOptions::default()) {
        DegenerationOutcome::Refuted { found, .. } => assert!(found.contains("pole")),
        o => panic!("{:?}", o),
    }
    let singular = witness(&[], [["1", "0", "0"], ["1", "0", "0"], ["0", "0", "1"]]);
    assert!(matches!(verify_degeneration(&m01(), &m01(), &singular, VerifyOptions::default()), DegenerationOutcome::Inconclusive(_)));
}

#[test]
fn radical_branches() {
    let w = witness(&[], [["1", "0", "0"], ["0", "sqrt(1 + t)", "0"], ["0", "0", "1"]]);
    assert_eq!(
        verify_degeneration(&m01(), &m01(), &w, VerifyOptions::default()),
        DegenerationOutcome::VerifiedExact { branch: Some(Branch::Principal), side_conditions: alloc::vec![] }
    );
    let neg = comm(&[(0, 0, &["0", "-1", "0"])]);
    assert_eq!(
        verify_degeneration(&m01(), &neg, &w, VerifyOptions::default()),
        DegenerationOutcome::VerifiedExact { branch: Some(Branch::Conjugate), side_conditions: alloc::vec![] }
    );
    match verify_degeneration(&m01(), &neg, &w, VerifyOptions { numeric_only: true }) {
        DegenerationOutcome::VerifiedNumeric(ev) => assert_eq!(ev.branch.len(), 1),
        o => panic!("{:?}", o),
    }
}

#[test]
fn family_index_and_samples() {
    // M04^(1/t) rescaled: E1 = e1, E2 = e2, E3 = t e3 gives E2E3 = e2, E1E3 = t e1
    let target = comm(&[(1, 2, &["0", "1", "0"])]);
    let w = witness(&[("alpha", "1/t")], [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "t"]]);
    assert!(matches!(verify_degeneration(&m04(), &target, &w, VerifyOptions::default()), DegenerationOutcome::VerifiedExact { .. }));
    let kept = witness(&[], [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]);
    match verify_degeneration(&m04(), &m04(), &kept, VerifyOptions { numeric_only: true }) {
        DegenerationOutcome::VerifiedNumeric(ev) => {
            assert_eq!(ev.samples.len(), 5);
            assert_eq!(ev.samples[0]["alpha"], 2);
        }
        o => panic!("{:?}", o),
    }
}

#[test]
fn derived_dimension_obstruction() {
    let a01 = comm(&[
        (0, 0, &["1", "0", "0"]),
        (1, 1, &["0", "1", "0"]),
        (0, 2, &["0", "alpha", "0"]),
        (1, 2, &["beta", "0", "0"]),
        (2, 2, &["1", "gamma", "0"]),
    ])
    .with_params(alloc::vec![String::from("alpha"), String::from("beta"), String::from("gamma")], alloc::vec![]);
    let j07 = comm(&[(0, 0, &["1", "0", "0"]), (1, 1, &["0", "1", "0"]), (2, 2, &["0", "0", "1"])]);
    let o = check_semicontinuity_obstruction(&a01, &j07).unwrap().unwrap();
    assert_eq!((o.name, o.from.as_str(), o.to.as_str()), ("dim_derived", "2", "3"));
    assert_eq!(check_semicontinuity_obstruction(&a01, &a01).unwrap(), None);
    assert_eq!(check_semicontinuity_obstruction(&m02(), &m01()).unwrap(), None);
}

fn b06() -> StructureTensor {
    raw(&[
        (0, 0, &["1", "0", "0"]),
        (1, 1, &["0", "1", "0"]),
        (2, 2, &["-1", "-gamma^2", "0"]),
        (0, 2, &["1", "0", "0"]),
        (2, 0, &["-1", "0", "0"]),
        (1, 2, &["0", "gamma", "0"]),
        (2, 1, &["0", "-gamma", "0"]),
    ])
    .with_params(alloc::vec![String::from("gamma")], alloc::vec![])
}

fn b07() -> StructureTensor {
    raw(&[(0, 0, &["1", "0", "0"]), (0, 2, &["gamma", "0", "0"]), (2, 0, &["-gamma", "0", "0"]), (1, 2, &["0", "2", "0"]), (2, 2, &["-gamma^2", "0", "0"])])
        .with_params(alloc::vec![String::from("gamma")], alloc::vec![])
}

#[test]
fn opposite_obstruction() {
    assert!(self_opposite_witness(&b06()).is_some());
    assert!(self_opposite_witness(&b07()).is_none());
    let c = chirality(&b07()).unwrap();
    assert_eq!((c.left_square, c.right_square), (1, 2));
    let o = check_semicontinuity_obstruction(&b06(), &b07()).unwrap().unwrap();
    assert_eq!(o.name, "self_opposite");
    let b08 = crate::tensor::opposite(&b07());
    assert_eq!(check_semicontinuity_obstruction(&b06(), &b08).unwrap().unwrap().name, "self_opposite");
}

fn staged() -> BasisChange {
    BasisChange::permutation(&[2, 1, 0])
}

#[test]
fn flag_certificate_m04_m07() {
    let cond = FlagCondition { conditions: alloc::vec![(2, 2, 4)], staged_basis: staged() };
    assert_eq!(cond.to_string(), "A2A2 = 0");
    assert_eq!(verify_nondeg_certificate(&m04(), &m07(), &cond), Ok(NondegOutcome::Verified));
    match verify_nondeg_certificate(&m04(), &m04(), &cond).unwrap() {
        NondegOutcome::ExclusionFailed(w) => {
            // the witness subspace is totally isotropic in M04
            let vecs: Vec<Vec<ScalarExpr>> = w
                .basis
                .iter()
                .map(|r| r.iter().map(|(re, _)| ScalarExpr::from_int(libm::round(*re) as i64)).collect())
                .collect();
            let m = m04();
            for x in &vecs {
                for y in &vecs {
                    assert!(m.mul_unchecked(x, y).iter().all(|c| c.is_zero()));
                }
            }
        }
        o => panic!("{:?}", o),
    }
    let bad = FlagCondition { conditions: alloc::vec![(2, 2, 4)], staged_basis: BasisChange::identity(3) };
    assert!(matches!(verify_nondeg_certificate(&m04(), &m07(), &bad), Ok(NondegOutcome::MembershipFailed(_))));
    let singular = FlagCondition { conditions: alloc::vec![(2, 2, 4)], staged_basis: BasisChange::diagonal(&v(&["1", "0", "1"])) };
    assert!(matches!(verify_nondeg_certificate(&m04(), &m07(), &singular), Ok(NondegOutcome::MembershipFailed(_))));
    let flag = FlagCondition { conditions: alloc::vec![(3, 3, 4)], staged_basis: staged() };
    assert!(matches!(verify_nondeg_certificate(&m04(), &m07(), &flag), Err(NondegError::UnsupportedConditionShape(_))));
    let none = FlagCondition { conditions: alloc::vec![], staged_basis: staged() };
    assert_eq!(verify_nondeg_certificate(&m04(), &m07(), &none), Err(NondegError::EmptyConditions));
}
