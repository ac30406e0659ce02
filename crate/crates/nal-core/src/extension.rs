//! Skew cocycle triples and the bicommutative extension x·y + θ(x,y).

use alloc::vec::Vec;
use core::fmt;

use crate::field::ScalarExpr;
use crate::identities::{self, CoordPoly, IdentityName};
use crate::linalg::{self, Matrix};
use crate::tensor::{BasisChange, StructureTensor, TensorError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormSymmetry {
    Skew,
    Symmetric,
}

/// Gram matrix: B(x, y) = sum x_l y_m matrix[l][m].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearForm {
    pub matrix: Matrix,
    pub symmetry: FormSymmetry,
}

impl BilinearForm {
    pub fn zero(n: usize, symmetry: FormSymmetry) -> Self {
        BilinearForm { matrix: alloc::vec![alloc::vec![ScalarExpr::zero(); n]; n], symmetry }
    }

    /// Delta_ij (0-based): 1 at (i, j), -1 at (j, i).
    pub fn delta(n: usize, i: usize, j: usize) -> Self {
        let mut b = BilinearForm::zero(n, FormSymmetry::Skew);
        if i != j {
            b.matrix[i][j] = ScalarExpr::one();
            b.matrix[j][i] = -ScalarExpr::one();
        }
        b
    }

    /// Nabla_ij (0-based): 1 at (i, j) and (j, i).
    pub fn nabla(n: usize, i: usize, j: usize) -> Self {
        let mut b = BilinearForm::zero(n, FormSymmetry::Symmetric);
        b.matrix[i][j] = ScalarExpr::one();
        b.matrix[j][i] = ScalarExpr::one();
        b
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn scale(&self, c: &ScalarExpr) -> Self {
        BilinearForm { matrix: self.matrix.iter().map(|r| r.iter().map(|x| x * c).collect()).collect(), symmetry: self.symmetry }
    }

    /// Sum; the result keeps the symmetry of `self` and may fail `is_consistent` if the kinds differ.
    pub fn add(&self, o: &BilinearForm) -> Self {
        let matrix = self.matrix.iter().zip(&o.matrix).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
        BilinearForm { matrix, symmetry: self.symmetry }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(ScalarExpr::is_zero)
    }

    pub fn is_consistent(&self) -> bool {
        let n = self.dim();
        (0..n).all(|l| {
            (0..n).all(|m| match self.symmetry {
                FormSymmetry::Skew => self.matrix[l][m] == -&self.matrix[m][l],
                FormSymmetry::Symmetric => self.matrix[l][m] == self.matrix[m][l],
            })
        })
    }
}

/// θ(x, y) = sum_k B_k(x, y) e_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleTriple {
    pub forms: Vec<BilinearForm>,
}

impl CocycleTriple {
    pub fn zero(n: usize) -> Self {
        CocycleTriple { forms: (0..n).map(|_| BilinearForm::zero(n, FormSymmetry::Skew)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.forms.len()
    }

    pub fn is_skew(&self) -> bool {
        self.forms.iter().all(|b| b.symmetry == FormSymmetry::Skew && b.is_consistent())
    }

    /// The product θ as a structure tensor.
    pub fn to_tensor(&self) -> StructureTensor {
        let n = self.dim();
        StructureTensor::from_fn(n, |i, j, k| self.forms[k].matrix[i][j].clone())
    }

    pub fn from_tensor(t: &StructureTensor, symmetry: FormSymmetry) -> Self {
        let n = t.dim();
        let forms = (0..n)
            .map(|k| BilinearForm { matrix: (0..n).map(|i| (0..n).map(|j| t.get(i, j, k).clone()).collect()).collect(), symmetry })
            .collect();
        CocycleTriple { forms }
    }
}

impl fmt::Display for CocycleTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        let mut parts = Vec::new();
        for (k, b) in self.forms.iter().enumerate() {
            let mut terms = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let c = &b.matrix[i][j];
                    let take = match b.symmetry {
                        FormSymmetry::Skew => i < j,
                        FormSymmetry::Symmetric => i <= j,
                    };
                    if !take || c.is_zero() {
                        continue;
                    }
                    let name = if b.symmetry == FormSymmetry::Skew { "Delta" } else { "Nabla" };
                    let prim = alloc::format!("{}({},{})", name, i + 1, j + 1);
                    if c.is_one() {
                        terms.push(prim);
                    } else {
                        terms.push(alloc::format!("({})*{}", c, prim));
                    }
                }
            }
            if terms.is_empty() {
                terms.push(alloc::string::String::from("0"));
            }
            parts.push(alloc::format!("B{} = {}", k + 1, terms.join(" + ")));
        }
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CocycleOutcome {
    Verified,
    /// Basis triple (0-based) and which condition failed (0 = right, 1 = left), with the discrepancy.
    Refuted { triple: (usize, usize, usize), condition: usize, discrepancy: Vec<ScalarExpr> },
}

impl CocycleOutcome {
    pub fn is_verified(&self) -> bool {
        matches!(self, CocycleOutcome::Verified)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionError {
    NotBicommutativePlus,
    NotSkew,
    NotACocycle,
    DimensionMismatch,
    Tensor(TensorError),
}

impl fmt::Display for ExtensionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionError::NotBicommutativePlus => write!(f, "base algebra is not bicommutative+"),
            ExtensionError::NotSkew => write!(f, "triple has a non-skew form"),
            ExtensionError::NotACocycle => write!(f, "triple is not a cocycle"),
            ExtensionError::DimensionMismatch => write!(f, "dimension mismatch"),
            ExtensionError::Tensor(e) => write!(f, "{}", e),
        }
    }
}

impl From<TensorError> for ExtensionError {
    fn from(e: TensorError) -> Self {
        ExtensionError::Tensor(e)
    }
}

fn is_bicommutative_plus(a: &StructureTensor) -> bool {
    let ok = |id| identities::check_identity(a, id).map(|o| o.is_verified()).unwrap_or(false);
    ok(IdentityName::Commutative) && ok(IdentityName::FourAssoc)
}

fn vadd<T: Clone>(x: &[T], y: &[T], add: impl Fn(&T, &T) -> T) -> Vec<T> {
    x.iter().zip(y).map(|(a, b)| add(a, b)).collect()
}

/// The two compatibility conditions, as left side minus right side, each term written out.
fn conditions<R: Clone>(
    dot: &dyn Fn(&[R], &[R]) -> Vec<R>,
    th: &dyn Fn(&[R], &[R]) -> Vec<R>,
    add: &dyn Fn(&R, &R) -> R,
    sub: &dyn Fn(&R, &R) -> R,
    x: &[R],
    y: &[R],
    z: &[R],
) -> [Vec<R>; 2] {
    let sum = |vs: [Vec<R>; 4]| {
        let [a, b, c, d] = vs;
        vadd(&vadd(&vadd(&a, &b, add), &c, add), &d, add)
    };
    let right = |x: &[R], y: &[R], z: &[R]| {
        let xy = dot(x, y);
        let txy = th(x, y);
        sum([dot(&xy, z), dot(&txy, z), th(&xy, z), th(&txy, z)])
    };
    let left = |x: &[R], y: &[R], z: &[R]| {
        let yz = dot(y, z);
        let tyz = th(y, z);
        sum([dot(x, &yz), dot(x, &tyz), th(x, &yz), th(x, &tyz)])
    };
    let r = vadd(&right(x, y, z), &right(x, z, y), sub);
    let l = vadd(&left(x, y, z), &left(y, x, z), sub);
    [r, l]
}

fn coord_mul(a: &StructureTensor) -> impl Fn(&[CoordPoly], &[CoordPoly]) -> Vec<CoordPoly> + '_ {
    move |x, y| identities::coord_product(a, x, y)
}

pub fn is_cocycle(aplus: &StructureTensor, theta: &CocycleTriple) -> Result<CocycleOutcome, ExtensionError> {
    let n = aplus.dim();
    if theta.dim() != n {
        return Err(ExtensionError::DimensionMismatch);
    }
    if !theta.is_skew() {
        return Err(ExtensionError::NotSkew);
    }
    if !is_bicommutative_plus(aplus) {
        return Err(ExtensionError::NotBicommutativePlus);
    }
    let t = theta.to_tensor();
    let count = 3 * n;
    let gen = |s: usize| -> Vec<CoordPoly> { (0..n).map(|c| CoordPoly::indeterminate(s * n + c, count)).collect() };
    let (x, y, z) = (gen(0), gen(1), gen(2));
    let dot = coord_mul(aplus);
    let th = coord_mul(&t);
    let add = |a: &CoordPoly, b: &CoordPoly| identities::coord_add(a, b);
    let sub = |a: &CoordPoly, b: &CoordPoly| identities::coord_sub(a, b);
    let conds = conditions(&dot, &th, &add, &sub, &x, &y, &z);
    if conds.iter().all(|v| v.iter().all(|p| p.coefficients().next().is_none())) {
        return Ok(CocycleOutcome::Verified);
    }
    let e = |i: usize| -> Vec<ScalarExpr> { (0..n).map(|k| if k == i { ScalarExpr::one() } else { ScalarExpr::zero() }).collect() };
    let sdot = |p: &[ScalarExpr], q: &[ScalarExpr]| aplus.mul_unchecked(p, q);
    let sth = |p: &[ScalarExpr], q: &[ScalarExpr]| t.mul_unchecked(p, q);
    let sadd = |a: &ScalarExpr, b: &ScalarExpr| a + b;
    let ssub = |a: &ScalarExpr, b: &ScalarExpr| a - b;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let cs = conditions(&sdot, &sth, &sadd, &ssub, &e(i), &e(j), &e(k));
                for (c, v) in cs.into_iter().enumerate() {
                    if v.iter().any(|x| !x.is_zero()) {
                        return Ok(CocycleOutcome::Refuted { triple: (i, j, k), condition: c, discrepancy: v });
                    }
                }
            }
        }
    }
    unreachable!("multilinear conditions vanish on all basis triples")
}

/// c_new[i][j][k] = c[i][j][k] + B_k(e_i, e_j).
pub fn extend(aplus: &StructureTensor, theta: &CocycleTriple) -> Result<StructureTensor, ExtensionError> {
    if !is_cocycle(aplus, theta)?.is_verified() {
        return Err(ExtensionError::NotACocycle);
    }
    Ok(extend_unchecked(aplus, theta))
}

pub fn extend_unchecked(aplus: &StructureTensor, theta: &CocycleTriple) -> StructureTensor {
    let n = aplus.dim();
    let mut out = aplus.clone();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.set(i, j, k, aplus.get(i, j, k) + &theta.forms[k].matrix[i][j]);
            }
        }
    }
    out
}

/// θ∗φ with φ the linear map sending e_i to row i of `phi`: B'_i = sum_j b_ij φᵗ B_j φ, (b_ij) = φ⁻¹.
pub fn act(theta: &CocycleTriple, phi: &BasisChange) -> Result<CocycleTriple, ExtensionError> {
    let n = theta.dim();
    if phi.dim() != n {
        return Err(ExtensionError::DimensionMismatch);
    }
    // column convention: the map's matrix is the transpose of the row-basis matrix
    let f = linalg::transpose(&phi.matrix);
    let ft = &phi.matrix;
    let b = linalg::inverse(&f).ok_or(TensorError::SingularMatrix { minor: crate::field::Poly::zero() })?;
    let moved: Vec<Matrix> = theta.forms.iter().map(|bj| linalg::mat_mul(&linalg::mat_mul(ft, &bj.matrix), &f)).collect();
    let forms = (0..n)
        .map(|i| {
            let mut m = alloc::vec![alloc::vec![ScalarExpr::zero(); n]; n];
            for (j, mj) in moved.iter().enumerate() {
                if b[i][j].is_zero() {
                    continue;
                }
                for l in 0..n {
                    for r in 0..n {
                        m[l][r] = &m[l][r] + &(&b[i][j] * &mj[l][r]);
                    }
                }
            }
            BilinearForm { matrix: m, symmetry: theta.forms[i].symmetry }
        })
        .collect();
    Ok(CocycleTriple { forms })
}
