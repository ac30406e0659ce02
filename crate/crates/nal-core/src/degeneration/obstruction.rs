use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::field::ScalarExpr;
use crate::identities::{variety_membership, IdentityError, Varieties};
use crate::invariants::{annihilator, derivation_algebra, derived_subalgebra};
use crate::isomorphism::{verify_witness, WitnessOutcome};
use crate::linalg::{self, Matrix};
use crate::tensor::{opposite, BasisChange, StructureTensor};

/// A monotone invariant moving in the forbidden direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstruction {
    pub name: &'static str,
    pub from: String,
    pub to: String,
}

/// Invariants exchanged by passing to the opposite algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Chirality {
    pub left_annihilator: usize,
    pub right_annihilator: usize,
    /// dim A·A²
    pub left_square: usize,
    /// dim A²·A
    pub right_square: usize,
}

impl Chirality {
    pub fn is_symmetric(&self) -> bool {
        self.left_annihilator == self.right_annihilator && self.left_square == self.right_square
    }
}

fn span_dim(a: &StructureTensor, rows: Matrix) -> usize {
    linalg::rank(&rows, &a.assumptions()).0
}

fn unit(n: usize, i: usize) -> Vec<ScalarExpr> {
    (0..n).map(|k| if k == i { ScalarExpr::one() } else { ScalarExpr::zero() }).collect()
}

pub fn chirality(a: &StructureTensor) -> Result<Chirality, IdentityError> {
    let n = a.dim();
    let sq = derived_subalgebra(a)?;
    let mut ls = Vec::new();
    let mut rs = Vec::new();
    for i in 0..n {
        let e = unit(n, i);
        for d in &sq.basis {
            ls.push(a.mul_unchecked(&e, d));
            rs.push(a.mul_unchecked(d, &e));
        }
    }
    // x in the left annihilator iff sum_i x_i c[i][j][k] = 0 for all j, k
    let left: Matrix = (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| (0..n).map(|i| a.get(i, j, k).clone()).collect()).collect();
    let right: Matrix = (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| (0..n).map(|i| a.get(j, i, k).clone()).collect()).collect();
    let assume = a.assumptions();
    Ok(Chirality {
        left_annihilator: n - linalg::rank(&left, &assume).0,
        right_annihilator: n - linalg::rank(&right, &assume).0,
        left_square: span_dim(a, ls),
        right_square: span_dim(a, rs),
    })
}

fn signed_permutations(n: usize) -> Vec<BasisChange> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        for signs in 0u32..(1 << n) {
            let m: Matrix = (0..n)
                .map(|i| {
                    let mut r = alloc::vec![ScalarExpr::zero(); n];
                    r[perm[i]] = if signs & (1 << i) == 0 { ScalarExpr::one() } else { -ScalarExpr::one() };
                    r
                })
                .collect();
            out.push(BasisChange::new(m));
        }
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else { break };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap_or(i);
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

/// Signed permutation identifying `a` with its opposite, valid for all parameter values.
pub fn self_opposite_witness(a: &StructureTensor) -> Option<BasisChange> {
    let op = opposite(a);
    if op == *a {
        return Some(BasisChange::identity(a.dim()));
    }
    signed_permutations(a.dim()).into_iter().find(|p| matches!(verify_witness(a, &op, p), Ok(WitnessOutcome::Verified)))
}

fn bits_or_none(a: &StructureTensor) -> Result<Option<Varieties>, IdentityError> {
    match variety_membership(a) {
        Ok(v) => Ok(Some(v)),
        Err(IdentityError::ParameterConditional { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn ob(name: &'static str, from: impl ToString, to: impl ToString) -> Option<Obstruction> {
    Some(Obstruction { name, from: from.to_string(), to: to.to_string() })
}

/// First invariant that forbids `from -> to`; family values are generic, so each test holds for all parameters.
pub fn check_semicontinuity_obstruction(from: &StructureTensor, to: &StructureTensor) -> Result<Option<Obstruction>, IdentityError> {
    if from.dim() != to.dim() {
        return Ok(ob("dim", from.dim(), to.dim()));
    }
    let (da, db) = (derived_subalgebra(from)?, derived_subalgebra(to)?);
    if da.dim() < db.dim() {
        return Ok(ob("dim_derived", da.dim(), db.dim()));
    }
    let (sa, sb) = (derived_subalgebra(&da.induced)?.dim(), derived_subalgebra(&db.induced)?.dim());
    if sa < sb {
        return Ok(ob("dim_derived_squared", sa, sb));
    }
    let (aa, ab) = (annihilator(from).dim(), annihilator(to).dim());
    if aa > ab {
        return Ok(ob("dim_annihilator", aa, ab));
    }
    let (ra, rb) = (derivation_algebra(from).dim(), derivation_algebra(to).dim());
    if ra > rb {
        return Ok(ob("dim_derivations", ra, rb));
    }
    if let (Some(va), Some(vb)) = (bits_or_none(from)?, bits_or_none(to)?) {
        let lost: Vec<&str> = Varieties::NAMES
            .iter()
            .zip(va.bits().iter().zip(vb.bits().iter()))
            .filter(|(_, (x, y))| **x && !**y)
            .map(|(name, _)| *name)
            .collect();
        if !lost.is_empty() {
            return Ok(ob("identity_bits", lost.join(","), format!("not {}", lost.join(","))));
        }
    }
    let ct = chirality(to)?;
    if !ct.is_symmetric() && self_opposite_witness(from).is_some() {
        return Ok(ob(
            "self_opposite",
            "isomorphic to its opposite",
            format!(
                "not isomorphic to its opposite (annihilators {}/{}, A*A^2 {} vs A^2*A {})",
                ct.left_annihilator, ct.right_annihilator, ct.left_square, ct.right_square
            ),
        ));
    }
    Ok(None)
}
