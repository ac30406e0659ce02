//! Isomorphism invariants computed by exact generic-rank linear algebra.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::field::{FieldError, Poly, ScalarExpr, Var};
use crate::identities::{self, IdentityError, IdentityName, Varieties};
use crate::linalg::{self, Matrix};
use crate::tensor::StructureTensor;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvariantError {
    AllSamplesDegenerate,
    Field(FieldError),
}

impl fmt::Display for InvariantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantError::AllSamplesDegenerate => write!(f, "every parameter sample violates a constraint"),
            InvariantError::Field(e) => write!(f, "{}", e),
        }
    }
}

impl From<FieldError> for InvariantError {
    fn from(e: FieldError) -> Self {
        InvariantError::Field(e)
    }
}

/// A subspace with its multiplication, exact at a generic parameter point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subalgebra {
    pub basis: Matrix,
    pub induced: StructureTensor,
    /// Parameter polynomials whose vanishing drops the rank.
    pub conditions: Vec<Poly>,
}

impl Subalgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub basis: Matrix,
    pub conditions: Vec<Poly>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Span of all products, with the induced multiplication in the echelon basis.
pub fn derived_subalgebra(a: &StructureTensor) -> Result<Subalgebra, InvariantError> {
    let n = a.dim();
    let assume = a.assumptions();
    let products: Matrix = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a.product(i, j).to_vec()).collect();
    let e = linalg::rref(&products, &assume);
    let basis = e.rows;
    let d = basis.len();
    let mut induced = StructureTensor::zero(d).with_params(a.params.clone(), a.constraints.clone());
    for p in 0..d {
        for q in 0..d {
            let v = a.mul_unchecked(&basis[p], &basis[q]);
            // the echelon basis has a 1 in each pivot column, so coordinates are read off there
            let coords: Vec<ScalarExpr> = e.pivots.iter().map(|&c| v[c].clone()).collect();
            induced.set_product(p, q, &coords);
        }
    }
    Ok(Subalgebra { basis, induced, conditions: e.conditions })
}

/// {x : xA = Ax = 0}.
pub fn annihilator(a: &StructureTensor) -> Subspace {
    let n = a.dim();
    let mut rows = Vec::new();
    for j in 0..n {
        for k in 0..n {
            rows.push((0..n).map(|i| a.get(i, j, k).clone()).collect());
            rows.push((0..n).map(|i| a.get(j, i, k).clone()).collect());
        }
    }
    let (basis, conditions) = linalg::nullspace(&rows, n, &a.assumptions());
    Subspace { basis, conditions }
}

/// Derivations as matrices D with D(e_i) = sum_k D[i][k] e_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivations {
    pub basis: Vec<Matrix>,
    pub conditions: Vec<Poly>,
}

impl Derivations {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Linear system D(e_i e_j) = D(e_i) e_j + e_i D(e_j) in the n^2 entries of D.
pub fn derivation_system(a: &StructureTensor) -> Matrix {
    let n = a.dim();
    let idx = |r: usize, c: usize| r * n + c;
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                let mut row = alloc::vec![ScalarExpr::zero(); n * n];
                for k in 0..n {
                    let c = a.get(i, j, k);
                    if !c.is_zero() {
                        row[idx(k, kk)] = &row[idx(k, kk)] + c;
                    }
                }
                for l in 0..n {
                    let c1 = a.get(l, j, kk);
                    if !c1.is_zero() {
                        row[idx(i, l)] = &row[idx(i, l)] - c1;
                    }
                    let c2 = a.get(i, l, kk);
                    if !c2.is_zero() {
                        row[idx(j, l)] = &row[idx(j, l)] - c2;
                    }
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    rows
}

pub fn derivation_algebra(a: &StructureTensor) -> Derivations {
    let n = a.dim();
    let rows = derivation_system(a);
    let (ns, conditions) = linalg::nullspace(&rows, n * n, &a.assumptions());
    let basis = ns.into_iter().map(|v| v.chunks(n).map(|r| r.to_vec()).collect()).collect();
    Derivations { basis, conditions }
}

/// The derivation span is closed under commutators.
pub fn is_lie_closed(a: &StructureTensor, ders: &Derivations) -> bool {
    let n = a.dim();
    let flat: Matrix = ders.basis.iter().map(|d| d.concat()).collect();
    let assume = a.assumptions();
    for x in &ders.basis {
        for y in &ders.basis {
            let xy = linalg::mat_mul(x, y);
            let yx = linalg::mat_mul(y, x);
            let c: Vec<ScalarExpr> = (0..n * n).map(|p| &xy[p / n][p % n] - &yx[p / n][p % n]).collect();
            if linalg::solve_in_span(&flat, &c, &assume).is_none() {
                return false;
            }
        }
    }
    true
}

pub fn orbit_dimension(a: &StructureTensor) -> usize {
    let n = a.dim();
    n * n - derivation_algebra(a).dim()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyDimension {
    pub dim: usize,
    pub generic_derivations: usize,
    pub params: usize,
    /// Indices of samples whose derivation algebra is larger than the generic one.
    pub jumps: Vec<usize>,
    /// Indices of samples rejected by the constraints.
    pub rejected: Vec<usize>,
}

fn violates(a: &StructureTensor, sample: &BTreeMap<Var, ScalarExpr>) -> bool {
    a.constraints.iter().any(|c| {
        let x = ScalarExpr::from_poly(c.clone());
        x.substitute(sample).map(|v| v.is_zero()).unwrap_or(true)
    })
}

/// Generic orbit dimension plus the number of parameters.
pub fn family_component_dimension(
    a: &StructureTensor,
    samples: &[BTreeMap<Var, ScalarExpr>],
) -> Result<FamilyDimension, InvariantError> {
    let n = a.dim();
    let mut dims = Vec::new();
    let mut rejected = Vec::new();
    for (s, sample) in samples.iter().enumerate() {
        if violates(a, sample) {
            rejected.push(s);
            continue;
        }
        let Ok(b) = a.substitute(sample) else {
            rejected.push(s);
            continue;
        };
        dims.push((s, derivation_algebra(&b).dim()));
    }
    let Some(generic) = dims.iter().map(|(_, d)| *d).min() else {
        return Err(InvariantError::AllSamplesDegenerate);
    };
    let jumps = dims.iter().filter(|(_, d)| *d > generic).map(|(s, _)| *s).collect();
    Ok(FamilyDimension { dim: n * n - generic + a.params.len(), generic_derivations: generic, params: a.params.len(), jumps, rejected })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InvariantFingerprint {
    pub dim_derived: usize,
    pub dim_derived_squared: usize,
    pub dim_annihilator: usize,
    pub dim_derivations: usize,
    pub identity_bits: Varieties,
    pub derived_iso_class: Option<String>,
}

impl InvariantFingerprint {
    pub const FIELDS: [&'static str; 6] =
        ["dim_derived", "dim_derived_squared", "dim_annihilator", "dim_derivations", "identity_bits", "derived_iso_class"];

    /// First differing field with both values rendered.
    pub fn first_difference(&self, o: &InvariantFingerprint) -> Option<(&'static str, String, String)> {
        use alloc::format;
        let f = Self::FIELDS;
        if self.dim_derived != o.dim_derived {
            return Some((f[0], format!("{}", self.dim_derived), format!("{}", o.dim_derived)));
        }
        if self.dim_derived_squared != o.dim_derived_squared {
            return Some((f[1], format!("{}", self.dim_derived_squared), format!("{}", o.dim_derived_squared)));
        }
        if self.dim_annihilator != o.dim_annihilator {
            return Some((f[2], format!("{}", self.dim_annihilator), format!("{}", o.dim_annihilator)));
        }
        if self.dim_derivations != o.dim_derivations {
            return Some((f[3], format!("{}", self.dim_derivations), format!("{}", o.dim_derivations)));
        }
        if self.identity_bits != o.identity_bits {
            return Some((f[4], self.identity_bits.names().join(","), o.identity_bits.names().join(",")));
        }
        if self.derived_iso_class != o.derived_iso_class {
            let r = |x: &Option<String>| x.clone().unwrap_or_else(|| String::from("none"));
            return Some((f[5], r(&self.derived_iso_class), r(&o.derived_iso_class)));
        }
        None
    }
}

fn square_dim(a: &StructureTensor) -> usize {
    let n = a.dim();
    let products: Matrix = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a.product(i, j).to_vec()).collect();
    linalg::rank(&products, &a.assumptions()).0
}

/// Label of a 2-dimensional Jordan algebra among Jfrak01..Jfrak05, or "zero".
pub fn classify_two_dim_jordan(b: &StructureTensor) -> Result<Option<String>, IdentityError> {
    if b.dim() != 2 {
        return Ok(None);
    }
    if b.is_zero() {
        return Ok(Some(String::from("zero")));
    }
    if !identities::check_identity(b, IdentityName::Jordan)?.is_verified() {
        return Ok(None);
    }
    let d = derived_subalgebra(b)?;
    let label = if d.dim() == 1 {
        if d.induced.is_zero() {
            "Jfrak05"
        } else {
            "Jfrak02"
        }
    } else if !identities::check_identity(b, IdentityName::Associative)?.is_verified() {
        "Jfrak04"
    } else if derivation_algebra(b).dim() == 0 {
        "Jfrak01"
    } else {
        "Jfrak03"
    };
    Ok(Some(String::from(label)))
}

pub fn fingerprint(a: &StructureTensor) -> Result<InvariantFingerprint, IdentityError> {
    let d = derived_subalgebra(a)?;
    Ok(InvariantFingerprint {
        dim_derived: d.dim(),
        dim_derived_squared: square_dim(&d.induced),
        dim_annihilator: annihilator(a).dim(),
        dim_derivations: derivation_algebra(a).dim(),
        identity_bits: identities::variety_membership(a)?,
        derived_iso_class: classify_two_dim_jordan(&d.induced)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_scalar;

    fn v(xs: &[&str]) -> Vec<ScalarExpr> {
        xs.iter().map(|x| parse_scalar(x).unwrap()).collect()
    }

    fn comm(dim: usize, rows: &[(usize, usize, &[&str])]) -> StructureTensor {
        let mut ps = Vec::new();
        for (i, j, c) in rows {
            ps.push((*i, *j, v(c)));
            if i != j {
                ps.push((*j, *i, v(c)));
            }
        }
        StructureTensor::from_products(dim, &ps)
    }

    #[test]
    fn annihilators() {
        let m01 = comm(3, &[(0, 0, &["0", "1", "0"])]);
        let ann = annihilator(&m01);
        assert_eq!(ann.basis, alloc::vec![v(&["0", "1", "0"]), v(&["0", "0", "1"])]);
        let m02 = comm(3, &[(0, 1, &["0", "0", "1"])]);
        assert_eq!(annihilator(&m02).basis, alloc::vec![v(&["0", "0", "1"])]);
        assert_eq!(annihilator(&StructureTensor::zero(3)).dim(), 3);
    }

    #[test]
    fn derivations_and_orbits() {
        let j07 = comm(3, &[(0, 0, &["1", "0", "0"]), (1, 1, &["0", "1", "0"]), (2, 2, &["0", "0", "1"])]);
        assert_eq!(orbit_dimension(&j07), 9);
        assert_eq!(orbit_dimension(&StructureTensor::zero(3)), 0);
        let g00 = StructureTensor::from_products(3, &[(1, 2, v(&["1", "0", "0"])), (2, 1, v(&["-1", "0", "0"]))]);
        let d = derivation_algebra(&g00);
        assert_eq!(d.dim(), 6);
        assert!(is_lie_closed(&g00, &d));
    }

    #[test]
    fn derived_of_m04() {
        let m04 = comm(3, &[(0, 2, &["1", "0", "0"]), (1, 2, &["0", "alpha", "0"])]);
        let d = derived_subalgebra(&m04).unwrap();
        assert_eq!(d.dim(), 2);
        assert!(d.induced.is_zero());
        let dims = family_component_dimension(
            &m04.clone().with_params(alloc::vec!["alpha".into()], Vec::new()),
            &[2, 3, 5].iter().map(|x| BTreeMap::from([(Var::new("alpha"), ScalarExpr::from_int(*x))])).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(dims.dim, 8);
    }

    #[test]
    fn two_dim_labels() {
        let cases: [(&[(usize, usize, &[&str])], &str); 5] = [
            (&[(0, 0, &["1", "0"]), (1, 1, &["0", "1"])], "Jfrak01"),
            (&[(0, 0, &["1", "0"])], "Jfrak02"),
            (&[(0, 0, &["1", "0"]), (0, 1, &["0", "1"])], "Jfrak03"),
            (&[(0, 0, &["1", "0"]), (0, 1, &["0", "1/2"])], "Jfrak04"),
            (&[(0, 0, &["0", "1"])], "Jfrak05"),
        ];
        for (rows, label) in cases {
            assert_eq!(classify_two_dim_jordan(&comm(2, rows)).unwrap().as_deref(), Some(label));
        }
    }

    #[test]
    fn fingerprints_separate() {
        let m01 = comm(3, &[(0, 0, &["0", "1", "0"])]);
        let m02 = comm(3, &[(0, 1, &["0", "0", "1"])]);
        let (f1, f2) = (fingerprint(&m01).unwrap(), fingerprint(&m02).unwrap());
        assert_eq!(f1.first_difference(&f2).map(|d| d.0), Some("dim_annihilator"));
        let z = fingerprint(&StructureTensor::zero(3)).unwrap();
        assert_eq!(z.dim_derived, 0);
        assert_eq!(z.derived_iso_class, None);
    }
}
