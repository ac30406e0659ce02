//! Polynomial identities decided by expansion on generic vectors.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::field::{gcd, Assumptions, Poly, ScalarExpr};
use crate::invariants::{self, InvariantError};
use crate::linalg::vanishing_poly;
use crate::tensor::StructureTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityName {
    Commutative,
    Anticommutative,
    Associative,
    Jordan,
    LeftBicommutative,
    RightBicommutative,
    Bicommutative,
    Metabelian,
    FourAssoc,
}

impl IdentityName {
    pub const ALL: [IdentityName; 9] = [
        IdentityName::Commutative,
        IdentityName::Anticommutative,
        IdentityName::Associative,
        IdentityName::Jordan,
        IdentityName::LeftBicommutative,
        IdentityName::RightBicommutative,
        IdentityName::Bicommutative,
        IdentityName::Metabelian,
        IdentityName::FourAssoc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityName::Commutative => "commutative",
            IdentityName::Anticommutative => "anticommutative",
            IdentityName::Associative => "associative",
            IdentityName::Jordan => "jordan",
            IdentityName::LeftBicommutative => "left_bicommutative",
            IdentityName::RightBicommutative => "right_bicommutative",
            IdentityName::Bicommutative => "bicommutative",
            IdentityName::Metabelian => "metabelian",
            IdentityName::FourAssoc => "four_assoc",
        }
    }

    /// Number of vector arguments.
    pub fn arity(self) -> usize {
        match self {
            IdentityName::Commutative | IdentityName::Anticommutative | IdentityName::Jordan => 2,
            IdentityName::Associative | IdentityName::LeftBicommutative | IdentityName::RightBicommutative => 3,
            IdentityName::Bicommutative => 3,
            IdentityName::Metabelian | IdentityName::FourAssoc => 4,
        }
    }

    /// True when the identity is linear in each argument.
    pub fn is_multilinear(self) -> bool {
        self != IdentityName::Jordan
    }
}

impl fmt::Display for IdentityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        IdentityName::ALL.iter().copied().find(|n| n.as_str() == s).ok_or_else(|| s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdentityOutcome {
    Verified,
    Refuted { witness: Vec<Vec<ScalarExpr>>, discrepancy: Vec<ScalarExpr> },
}

impl IdentityOutcome {
    pub fn is_verified(&self) -> bool {
        matches!(self, IdentityOutcome::Verified)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdentityError {
    /// Truth depends on whether this parameter polynomial vanishes.
    ParameterConditional { critical: Poly },
    Invariant(InvariantError),
}

impl fmt::Display for IdentityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityError::ParameterConditional { critical } => write!(f, "holds only where {} = 0", critical),
            IdentityError::Invariant(e) => write!(f, "{}", e),
        }
    }
}

impl From<InvariantError> for IdentityError {
    fn from(e: InvariantError) -> Self {
        IdentityError::Invariant(e)
    }
}

/// Arithmetic needed to evaluate an identity.
pub(crate) trait Coeff: Clone {
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Coeff for ScalarExpr {
    fn zero() -> Self {
        ScalarExpr::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn is_zero(&self) -> bool {
        ScalarExpr::is_zero(self)
    }
}

/// Polynomial in coordinate indeterminates with coefficients in the scalar tower.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoordPoly {
    terms: BTreeMap<Vec<u8>, ScalarExpr>,
}

impl CoordPoly {
    pub fn indeterminate(index: usize, count: usize) -> Self {
        let mut e = alloc::vec![0u8; count];
        e[index] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, ScalarExpr::one());
        CoordPoly { terms }
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Vec<u8>, &ScalarExpr)> {
        self.terms.iter()
    }

    fn insert(terms: &mut BTreeMap<Vec<u8>, ScalarExpr>, e: Vec<u8>, c: ScalarExpr) {
        use alloc::collections::btree_map::Entry;
        match terms.entry(e) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }
}

impl Coeff for CoordPoly {
    fn zero() -> Self {
        CoordPoly::default()
    }
    fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &o.terms {
            CoordPoly::insert(&mut terms, e.clone(), c.clone());
        }
        CoordPoly { terms }
    }
    fn sub(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &o.terms {
            CoordPoly::insert(&mut terms, e.clone(), -c);
        }
        CoordPoly { terms }
    }
    fn mul(&self, o: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u8> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                CoordPoly::insert(&mut terms, e, c1 * c2);
            }
        }
        CoordPoly { terms }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl CoordPoly {
    fn scale_lift(c: &ScalarExpr, p: &CoordPoly) -> CoordPoly {
        let mut terms = BTreeMap::new();
        for (e, x) in &p.terms {
            let y = c * x;
            if !y.is_zero() {
                terms.insert(e.clone(), y);
            }
        }
        CoordPoly { terms }
    }
}

fn mul_generic<R: Coeff>(a: &StructureTensor, x: &[R], y: &[R], scale: &dyn Fn(&ScalarExpr, &R) -> R) -> Vec<R> {
    let n = a.dim();
    let mut out: Vec<R> = (0..n).map(|_| R::zero()).collect();
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            if yj.is_zero() {
                continue;
            }
            let p = a.product(i, j);
            if p.iter().all(ScalarExpr::is_zero) {
                continue;
            }
            let w = xi.mul(yj);
            for k in 0..n {
                if !p[k].is_zero() {
                    out[k] = out[k].add(&scale(&p[k], &w));
                }
            }
        }
    }
    out
}

fn vsub<R: Coeff>(x: &[R], y: &[R]) -> Vec<R> {
    x.iter().zip(y).map(|(a, b)| a.sub(b)).collect()
}

fn vadd<R: Coeff>(x: &[R], y: &[R]) -> Vec<R> {
    x.iter().zip(y).map(|(a, b)| a.add(b)).collect()
}

/// Value of the identity's defining expression; it holds iff every value is zero.
pub(crate) fn eval_identity<R: Coeff>(
    id: IdentityName,
    mul: &dyn Fn(&[R], &[R]) -> Vec<R>,
    args: &[Vec<R>],
) -> Vec<Vec<R>> {
    let m = |x: &[R], y: &[R]| mul(x, y);
    match id {
        IdentityName::Commutative => alloc::vec![vsub(&m(&args[0], &args[1]), &m(&args[1], &args[0]))],
        IdentityName::Anticommutative => alloc::vec![vadd(&m(&args[0], &args[1]), &m(&args[1], &args[0]))],
        IdentityName::Associative => {
            let (x, y, z) = (&args[0], &args[1], &args[2]);
            alloc::vec![vsub(&m(&m(x, y), z), &m(x, &m(y, z)))]
        }
        IdentityName::Jordan => {
            let (x, y) = (&args[0], &args[1]);
            let x2 = m(x, x);
            alloc::vec![vsub(&m(&m(&x2, y), x), &m(&x2, &m(y, x)))]
        }
        IdentityName::LeftBicommutative => {
            let (a, b, c) = (&args[0], &args[1], &args[2]);
            alloc::vec![vsub(&m(a, &m(b, c)), &m(b, &m(a, c)))]
        }
        IdentityName::RightBicommutative => {
            let (a, b, c) = (&args[0], &args[1], &args[2]);
            alloc::vec![vsub(&m(&m(a, b), c), &m(&m(a, c), b))]
        }
        IdentityName::Bicommutative => {
            let mut v = eval_identity(IdentityName::LeftBicommutative, mul, args);
            v.extend(eval_identity(IdentityName::RightBicommutative, mul, args));
            v
        }
        IdentityName::Metabelian => {
            alloc::vec![m(&m(&args[0], &args[1]), &m(&args[2], &args[3]))]
        }
        IdentityName::FourAssoc => {
            let (a, b, c, d) = (&args[0], &args[1], &args[2], &args[3]);
            let ab = m(a, b);
            alloc::vec![vsub(&m(&m(&ab, c), d), &m(&m(&ab, d), c))]
        }
    }
}

/// Coefficients of the identity expanded on generic vectors.
pub fn generic_expansion(a: &StructureTensor, id: IdentityName) -> Vec<Vec<CoordPoly>> {
    let n = a.dim();
    let k = id.arity();
    let count = n * k;
    let args: Vec<Vec<CoordPoly>> =
        (0..k).map(|s| (0..n).map(|c| CoordPoly::indeterminate(s * n + c, count)).collect()).collect();
    let mul = |x: &[CoordPoly], y: &[CoordPoly]| mul_generic(a, x, y, &CoordPoly::scale_lift);
    eval_identity(id, &mul, &args)
}

pub(crate) fn coord_product(a: &StructureTensor, x: &[CoordPoly], y: &[CoordPoly]) -> Vec<CoordPoly> {
    mul_generic(a, x, y, &CoordPoly::scale_lift)
}

pub(crate) fn coord_add(x: &CoordPoly, y: &CoordPoly) -> CoordPoly {
    x.add(y)
}

pub(crate) fn coord_sub(x: &CoordPoly, y: &CoordPoly) -> CoordPoly {
    x.sub(y)
}

/// Evaluate the identity on concrete vectors.
pub fn evaluate(a: &StructureTensor, id: IdentityName, args: &[Vec<ScalarExpr>]) -> Vec<Vec<ScalarExpr>> {
    let mul = |x: &[ScalarExpr], y: &[ScalarExpr]| mul_generic(a, x, y, &|c, w| c * w);
    eval_identity(id, &mul, args)
}

fn basis_vector(n: usize, i: usize) -> Vec<ScalarExpr> {
    (0..n).map(|k| if k == i { ScalarExpr::one() } else { ScalarExpr::zero() }).collect()
}

fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(k as u32);
    (0..total).map(move |mut idx| {
        let mut t = alloc::vec![0; k];
        for s in (0..k).rev() {
            t[s] = idx % n;
            idx /= n;
        }
        t
    })
}

fn find_witness(a: &StructureTensor, id: IdentityName) -> Option<(Vec<Vec<ScalarExpr>>, Vec<ScalarExpr>)> {
    let n = a.dim();
    let k = id.arity();
    let try_args = |args: Vec<Vec<ScalarExpr>>| {
        let vals = evaluate(a, id, &args);
        vals.into_iter().find(|v| v.iter().any(|x| !x.is_zero())).map(|v| (args.clone(), v))
    };
    for t in tuples(n, k) {
        if let Some(w) = try_args(t.iter().map(|&i| basis_vector(n, i)).collect()) {
            return Some(w);
        }
    }
    // Non-multilinear identities can vanish on every basis tuple; try small integer vectors.
    let vals = [0i64, 1, 2, -1];
    for t in tuples(vals.len(), n * k) {
        if t.iter().all(|&i| i == 0) {
            continue;
        }
        let args = (0..k).map(|s| (0..n).map(|c| ScalarExpr::from_int(vals[t[s * n + c]])).collect()).collect();
        if let Some(w) = try_args(args) {
            return Some(w);
        }
    }
    None
}

pub fn check_identity(a: &StructureTensor, id: IdentityName) -> Result<IdentityOutcome, IdentityError> {
    if id == IdentityName::Jordan {
        let c = check_identity(a, IdentityName::Commutative)?;
        if !c.is_verified() {
            return Ok(c);
        }
    }
    let expansion = generic_expansion(a, id);
    let mut g: Option<Poly> = None;
    for v in &expansion {
        for p in v {
            for (_, c) in p.coefficients() {
                let q = vanishing_poly(c);
                g = Some(match g {
                    None => q.monic(),
                    Some(h) => gcd(&h, &q),
                });
            }
        }
    }
    let Some(g) = g else { return Ok(IdentityOutcome::Verified) };
    let assume: Assumptions = a.assumptions();
    if !assume.is_unit(&g) {
        return Err(IdentityError::ParameterConditional { critical: g });
    }
    let (witness, discrepancy) = find_witness(a, id).expect("nonzero identity has a witness");
    Ok(IdentityOutcome::Refuted { witness, discrepancy })
}

fn holds(a: &StructureTensor, id: IdentityName) -> Result<bool, IdentityError> {
    Ok(check_identity(a, id)?.is_verified())
}

/// Variety memberships of one algebra.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Varieties {
    pub metabelian_commutative: bool,
    pub commutative_associative: bool,
    pub jordan: bool,
    pub derived_commutative_associative: bool,
    pub derived_jordan: bool,
    pub bicommutative: bool,
    pub bicommutative_plus: bool,
}

impl Varieties {
    pub const NAMES: [&'static str; 7] = [
        "metabelian-commutative",
        "commutative-associative",
        "jordan",
        "derived-commutative-associative",
        "derived-jordan",
        "bicommutative",
        "bicommutative+",
    ];

    pub fn bits(&self) -> [bool; 7] {
        [
            self.metabelian_commutative,
            self.commutative_associative,
            self.jordan,
            self.derived_commutative_associative,
            self.derived_jordan,
            self.bicommutative,
            self.bicommutative_plus,
        ]
    }

    pub fn names(&self) -> Vec<&'static str> {
        Self::NAMES.iter().zip(self.bits()).filter(|(_, b)| *b).map(|(n, _)| *n).collect()
    }

    /// The containments between the varieties hold.
    pub fn is_consistent(&self) -> bool {
        let imp = |a: bool, b: bool| !a || b;
        imp(self.metabelian_commutative, self.derived_commutative_associative)
            && imp(self.derived_commutative_associative, self.derived_jordan)
            && imp(self.commutative_associative, self.jordan)
            && imp(self.jordan, self.derived_jordan)
    }
}

pub fn variety_membership(a: &StructureTensor) -> Result<Varieties, IdentityError> {
    let commutative = holds(a, IdentityName::Commutative)?;
    let d = invariants::derived_subalgebra(a)?;
    let sq = &d.induced;
    let sq_comm = holds(sq, IdentityName::Commutative)?;
    let derived_ca = sq_comm && holds(sq, IdentityName::Associative)?;
    let derived_jordan = sq_comm && holds(sq, IdentityName::Jordan)?;
    Ok(Varieties {
        metabelian_commutative: commutative && holds(a, IdentityName::Metabelian)?,
        commutative_associative: commutative && holds(a, IdentityName::Associative)?,
        jordan: commutative && holds(a, IdentityName::Jordan)?,
        derived_commutative_associative: derived_ca,
        derived_jordan,
        bicommutative: holds(a, IdentityName::Bicommutative)?,
        bicommutative_plus: commutative && holds(a, IdentityName::FourAssoc)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_poly, parse_scalar};

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
    fn j18_not_associative() {
        // e1e1 = e1, e1e2 = 1/2 e2
        let j18 = comm(3, &[(0, 0, &["1", "0", "0"]), (0, 1, &["0", "1/2", "0"])]);
        match check_identity(&j18, IdentityName::Associative).unwrap() {
            IdentityOutcome::Refuted { witness, discrepancy } => {
                assert_eq!(witness, alloc::vec![v(&["1", "0", "0"]), v(&["1", "0", "0"]), v(&["0", "1", "0"])]);
                assert_eq!(discrepancy, v(&["0", "1/4", "0"]));
            }
            o => panic!("{:?}", o),
        }
        assert!(check_identity(&j18, IdentityName::Jordan).unwrap().is_verified());
    }

    #[test]
    fn j05_associative() {
        let j05 = comm(3, &[(0, 1, &["0", "0", "1"])]);
        assert!(check_identity(&j05, IdentityName::Associative).unwrap().is_verified());
        assert!(check_identity(&j05, IdentityName::Metabelian).unwrap().is_verified());
    }

    #[test]
    fn skew_product_bicommutative() {
        let g = StructureTensor::from_products(3, &[(1, 2, v(&["1", "0", "0"])), (2, 1, v(&["-1", "0", "0"]))]);
        assert!(check_identity(&g, IdentityName::Bicommutative).unwrap().is_verified());
        assert!(check_identity(&g, IdentityName::Anticommutative).unwrap().is_verified());
        assert!(!check_identity(&g, IdentityName::Commutative).unwrap().is_verified());
    }

    #[test]
    fn parameter_conditional() {
        // e1e1 = e2, e2e2 = (alpha - 1) e3 is metabelian only at alpha = 1
        let a = comm(3, &[(0, 0, &["0", "1", "0"]), (1, 1, &["0", "0", "alpha - 1"])]);
        assert_eq!(
            check_identity(&a, IdentityName::Metabelian),
            Err(IdentityError::ParameterConditional { critical: parse_poly("alpha - 1").unwrap() })
        );
        let b = a.clone().with_params(alloc::vec!["alpha".into()], alloc::vec![parse_poly("alpha - 1").unwrap()]);
        assert!(matches!(check_identity(&b, IdentityName::Metabelian), Ok(IdentityOutcome::Refuted { .. })));
    }

    #[test]
    fn m04_varieties() {
        let m04 = comm(3, &[(0, 2, &["1", "0", "0"]), (1, 2, &["0", "alpha", "0"])]);
        let m = variety_membership(&m04).unwrap();
        // e1(e3e3) = 0 but e3(e1e3) = e1
        assert_eq!(
            m.names(),
            alloc::vec!["metabelian-commutative", "derived-commutative-associative", "derived-jordan", "bicommutative+"]
        );
        let z = variety_membership(&StructureTensor::zero(3)).unwrap();
        assert!(z.bits().iter().all(|b| *b));
    }

    #[test]
    fn names_round_trip() {
        for n in IdentityName::ALL {
            assert_eq!(n.as_str().parse::<IdentityName>(), Ok(n));
        }
    }
}
