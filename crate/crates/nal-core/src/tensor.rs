//! Structure-constant algebras.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::field::{Assumptions, FieldError, GaussianRational, Poly, ScalarExpr, Var};
use crate::linalg::{self, Matrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TensorError {
    DimensionMismatch { expected: usize, found: usize },
    SingularMatrix { minor: Poly },
    Field(FieldError),
}

impl From<FieldError> for TensorError {
    fn from(e: FieldError) -> Self {
        TensorError::Field(e)
    }
}

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {}, found {}", expected, found)
            }
            TensorError::SingularMatrix { minor } if minor.is_zero() => write!(f, "singular matrix"),
            TensorError::SingularMatrix { minor } => write!(f, "matrix singular when {} = 0", minor),
            TensorError::Field(e) => write!(f, "{}", e),
        }
    }
}

/// c[i][j][k] is the coefficient of e_k in e_i e_j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureTensor {
    dim: usize,
    c: Vec<ScalarExpr>,
    pub params: Vec<String>,
    /// Parameter polynomials required to be nonzero.
    pub constraints: Vec<Poly>,
}

impl StructureTensor {
    pub fn zero(dim: usize) -> Self {
        StructureTensor { dim, c: alloc::vec![ScalarExpr::zero(); dim * dim * dim], params: Vec::new(), constraints: Vec::new() }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> ScalarExpr) -> Self {
        let mut a = StructureTensor::zero(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    a.c[(i * dim + j) * dim + k] = f(i, j, k);
                }
            }
        }
        a
    }

    /// Products given as (i, j, coefficients of e_i e_j), 0-based.
    pub fn from_products(dim: usize, products: &[(usize, usize, Vec<ScalarExpr>)]) -> Self {
        let mut a = StructureTensor::zero(dim);
        for (i, j, v) in products {
            a.set_product(*i, *j, v);
        }
        a
    }

    pub fn with_params(mut self, params: Vec<String>, constraints: Vec<Poly>) -> Self {
        self.params = params;
        self.constraints = constraints;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &ScalarExpr {
        &self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: ScalarExpr) {
        let n = self.dim;
        self.c[(i * n + j) * n + k] = v;
    }

    pub fn product(&self, i: usize, j: usize) -> &[ScalarExpr] {
        let n = self.dim;
        &self.c[(i * n + j) * n..(i * n + j + 1) * n]
    }

    pub fn set_product(&mut self, i: usize, j: usize, v: &[ScalarExpr]) {
        for (k, x) in v.iter().enumerate() {
            self.set(i, j, k, x.clone());
        }
    }

    pub fn entries(&self) -> &[ScalarExpr] {
        &self.c
    }

    pub fn assumptions(&self) -> Assumptions {
        Assumptions::new(self.constraints.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(ScalarExpr::is_zero)
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (i + 1..n).all(|j| self.product(i, j) == self.product(j, i)))
    }

    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Self {
        StructureTensor { dim: self.dim, c: self.c.iter().map(f).collect(), params: self.params.clone(), constraints: self.constraints.clone() }
    }

    pub fn try_map(&self, f: impl Fn(&ScalarExpr) -> Result<ScalarExpr, FieldError>) -> Result<Self, FieldError> {
        let c = self.c.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Ok(StructureTensor { dim: self.dim, c, params: self.params.clone(), constraints: self.constraints.clone() })
    }

    pub fn substitute(&self, bindings: &BTreeMap<Var, ScalarExpr>) -> Result<Self, FieldError> {
        let mut out = self.try_map(|x| x.substitute(bindings))?;
        out.params.retain(|p| !bindings.contains_key(&Var::new(p)));
        Ok(out)
    }

    /// Left multiplication matrix L_x as rows: (L_x)[k][j] = coefficient of e_k in x e_j.
    pub fn left_mul(&self, x: &[ScalarExpr]) -> Matrix {
        let n = self.dim;
        let mut m = alloc::vec![alloc::vec![ScalarExpr::zero(); n]; n];
        for j in 0..n {
            let mut e = alloc::vec![ScalarExpr::zero(); n];
            e[j] = ScalarExpr::one();
            let v = self.mul_unchecked(x, &e);
            for k in 0..n {
                m[k][j] = v[k].clone();
            }
        }
        m
    }

    pub(crate) fn mul_unchecked(&self, x: &[ScalarExpr], y: &[ScalarExpr]) -> Vec<ScalarExpr> {
        let n = self.dim;
        let mut out = alloc::vec![ScalarExpr::zero(); n];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let w = xi * yj;
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.get(i, j, k);
                    if !c.is_zero() {
                        *o = &*o + &(&w * c);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for StructureTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim;
        let mut first = true;
        for i in 0..n {
            for j in 0..n {
                let v = self.product(i, j);
                if v.iter().all(ScalarExpr::is_zero) {
                    continue;
                }
                if !first {
                    write!(f, ", ")?;
                }
                first = false;
                write!(f, "e{}e{} = {}", i + 1, j + 1, render_vector(v))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// "e1 + 1/2*e2" style rendering of a coordinate vector.
pub fn render_vector(v: &[ScalarExpr]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (k, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let body = x.render();
        let atomic = x.sqrt_part().is_none() && x.rational_part().is_atomic_render();
        if s.is_empty() {
            if x.is_one() {
                let _ = write!(s, "e{}", k + 1);
            } else if (-x).is_one() {
                let _ = write!(s, "-e{}", k + 1);
            } else if atomic {
                let _ = write!(s, "{}*e{}", body, k + 1);
            } else {
                let _ = write!(s, "({})*e{}", body, k + 1);
            }
            continue;
        }
        let neg = -x;
        if x.is_one() {
            let _ = write!(s, " + e{}", k + 1);
        } else if neg.is_one() {
            let _ = write!(s, " - e{}", k + 1);
        } else if atomic && body.starts_with('-') {
            let _ = write!(s, " - {}*e{}", neg.render(), k + 1);
        } else if atomic {
            let _ = write!(s, " + {}*e{}", body, k + 1);
        } else {
            let _ = write!(s, " + ({})*e{}", body, k + 1);
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Row i holds the old-basis coordinates of the new vector e'_i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisChange {
    pub matrix: Matrix,
}

impl BasisChange {
    pub fn new(matrix: Matrix) -> Self {
        BasisChange { matrix }
    }

    pub fn identity(n: usize) -> Self {
        BasisChange { matrix: linalg::identity(n) }
    }

    pub fn diagonal(d: &[ScalarExpr]) -> Self {
        let n = d.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { d[i].clone() } else { ScalarExpr::zero() }).collect())
            .collect();
        BasisChange { matrix }
    }

    /// Permutation sending e'_i to e_{perm[i]}.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if perm[i] == j { ScalarExpr::one() } else { ScalarExpr::zero() }).collect())
            .collect();
        BasisChange { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn determinant(&self) -> ScalarExpr {
        linalg::determinant(&self.matrix)
    }

    pub fn inverse(&self) -> Result<Matrix, TensorError> {
        linalg::inverse(&self.matrix).ok_or(TensorError::SingularMatrix { minor: Poly::zero() })
    }

    /// Q∘P: first P, then Q expressed in P's basis.
    pub fn then(&self, q: &BasisChange) -> BasisChange {
        BasisChange { matrix: linalg::mat_mul(&q.matrix, &self.matrix) }
    }

    /// Determinant numerator when it can vanish under the assumptions.
    pub fn singularity_condition(&self, assume: &Assumptions) -> Option<Poly> {
        let d = self.determinant();
        let p = linalg::vanishing_poly(&d);
        if assume.is_unit(&p) {
            None
        } else {
            Some(p)
        }
    }

    pub fn apply(&self, x: &[ScalarExpr]) -> Vec<ScalarExpr> {
        // new coordinates x' -> old coordinates: sum_i x'_i row_i
        let n = self.dim();
        let mut out = alloc::vec![ScalarExpr::zero(); n];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for k in 0..n {
                if !self.matrix[i][k].is_zero() {
                    out[k] = &out[k] + &(xi * &self.matrix[i][k]);
                }
            }
        }
        out
    }
}

pub fn multiply(a: &StructureTensor, x: &[ScalarExpr], y: &[ScalarExpr]) -> Result<Vec<ScalarExpr>, TensorError> {
    for v in [x, y] {
        if v.len() != a.dim {
            return Err(TensorError::DimensionMismatch { expected: a.dim, found: v.len() });
        }
    }
    Ok(a.mul_unchecked(x, y))
}

pub fn change_basis(a: &StructureTensor, p: &BasisChange) -> Result<StructureTensor, TensorError> {
    let n = a.dim;
    if p.dim() != n {
        return Err(TensorError::DimensionMismatch { expected: n, found: p.dim() });
    }
    let inv = p.inverse()?;
    let mut out = StructureTensor::zero(n);
    out.params = a.params.clone();
    out.constraints = a.constraints.clone();
    for i in 0..n {
        for j in 0..n {
            let v = a.mul_unchecked(&p.matrix[i], &p.matrix[j]);
            for k in 0..n {
                let mut acc = ScalarExpr::zero();
                for (r, vr) in v.iter().enumerate() {
                    if !vr.is_zero() && !inv[r][k].is_zero() {
                        acc = &acc + &(vr * &inv[r][k]);
                    }
                }
                out.set(i, j, k, acc);
            }
        }
    }
    Ok(out)
}

/// x∘y = (xy + yx)/2.
pub fn jordan_product(a: &StructureTensor) -> StructureTensor {
    let half = GaussianRational::from_ratio(1, 2);
    let mut out = a.clone();
    let n = a.dim;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.set(i, j, k, (a.get(i, j, k) + a.get(j, i, k)).scale(&half));
            }
        }
    }
    out
}

pub fn opposite(a: &StructureTensor) -> StructureTensor {
    let mut out = a.clone();
    let n = a.dim;
    for i in 0..n {
        for j in 0..n {
            out.set_product(i, j, a.product(j, i));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_scalar;

    fn s(x: &str) -> ScalarExpr {
        parse_scalar(x).unwrap()
    }

    fn vecs(xs: &[&str]) -> Vec<ScalarExpr> {
        xs.iter().map(|x| s(x)).collect()
    }

    fn m03() -> StructureTensor {
        // e1e1 = e2, e1e2 = e3
        StructureTensor::from_products(
            3,
            &[(0, 0, vecs(&["0", "1", "0"])), (0, 1, vecs(&["0", "0", "1"])), (1, 0, vecs(&["0", "0", "1"]))],
        )
    }

    fn m04(a: &str) -> StructureTensor {
        let e1 = vecs(&["1", "0", "0"]);
        let ae2 = vecs(&["0", a, "0"]);
        StructureTensor::from_products(3, &[(0, 2, e1.clone()), (2, 0, e1), (1, 2, ae2.clone()), (2, 1, ae2)])
    }

    #[test]
    fn bilinear_products() {
        let a = m03();
        assert_eq!(multiply(&a, &vecs(&["1", "0", "0"]), &vecs(&["0", "1", "0"])).unwrap(), vecs(&["0", "0", "1"]));
        assert_eq!(multiply(&a, &vecs(&["1", "1", "0"]), &vecs(&["1", "0", "0"])).unwrap(), vecs(&["0", "1", "1"]));
        assert_eq!(multiply(&a, &vecs(&["0", "0", "0"]), &vecs(&["3", "1", "0"])).unwrap(), vecs(&["0", "0", "0"]));
        assert!(matches!(multiply(&a, &vecs(&["1"]), &vecs(&["1", "0", "0"])), Err(TensorError::DimensionMismatch { .. })));
    }

    #[test]
    fn m04_reciprocal_parameter() {
        let p = BasisChange::new(alloc::vec![vecs(&["0", "1", "0"]), vecs(&["1", "0", "0"]), vecs(&["0", "0", "1/alpha"])]);
        let b = change_basis(&m04("alpha"), &p).unwrap();
        assert_eq!(b, m04("1/alpha"));
    }

    #[test]
    fn right_action() {
        let a = m04("alpha");
        let p = BasisChange::new(alloc::vec![vecs(&["1", "2", "0"]), vecs(&["0", "1", "t"]), vecs(&["1", "0", "1"])]);
        let q = BasisChange::new(alloc::vec![vecs(&["0", "1", "0"]), vecs(&["1", "0", "1/2"]), vecs(&["0", "0", "3"])]);
        let lhs = change_basis(&change_basis(&a, &p).unwrap(), &q).unwrap();
        let rhs = change_basis(&a, &p.then(&q)).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(change_basis(&a, &BasisChange::identity(3)).unwrap(), a);
    }

    #[test]
    fn singular_change_rejected() {
        let p = BasisChange::new(alloc::vec![vecs(&["1", "1", "0"]), vecs(&["2", "2", "0"]), vecs(&["0", "0", "1"])]);
        assert!(matches!(change_basis(&m03(), &p), Err(TensorError::SingularMatrix { .. })));
        let q = BasisChange::diagonal(&vecs(&["1", "alpha - 1", "1"]));
        assert!(q.singularity_condition(&Assumptions::none()).is_some());
    }

    #[test]
    fn jordan_and_opposite() {
        // e1e2 = e3 only
        let a = StructureTensor::from_products(3, &[(0, 1, vecs(&["0", "0", "1"]))]);
        let j = jordan_product(&a);
        assert_eq!(j.product(0, 1), &vecs(&["0", "0", "1/2"])[..]);
        assert_eq!(j.product(1, 0), &vecs(&["0", "0", "1/2"])[..]);
        assert_eq!(jordan_product(&opposite(&a)), j);
        assert_eq!(opposite(&opposite(&a)), a);
        assert_eq!(opposite(&m03()), m03());
    }

    #[test]
    fn vector_rendering() {
        assert_eq!(render_vector(&vecs(&["1", "1/2", "0"])), "e1 + 1/2*e2");
        assert_eq!(render_vector(&vecs(&["0", "-4", "alpha + 1"])), "-4*e2 + (alpha + 1)*e3");
        assert_eq!(render_vector(&vecs(&["-1", "-t", "0"])), "-e1 - t*e2");
        assert_eq!(render_vector(&vecs(&["0", "0", "0"])), "0");
    }
}
