//! Isomorphism witnesses: exact verification, numeric-then-exact search, invariant separation.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{Complex, DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::field::{eval_scalar, GaussianRational, ScalarExpr};
use crate::identities::IdentityError;
use crate::invariants::fingerprint;
use crate::tensor::{change_basis, BasisChange, StructureTensor, TensorError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessOutcome {
    Verified,
    /// First product (0-based i, j) where the transported table differs, as transported minus target.
    Refuted { pair: (usize, usize), discrepancy: Vec<ScalarExpr> },
}

/// Checks that the rows of `w` form a basis of A in which A has the table of B.
pub fn verify_witness(a: &StructureTensor, b: &StructureTensor, w: &BasisChange) -> Result<WitnessOutcome, TensorError> {
    if a.dim() != b.dim() {
        return Err(TensorError::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let moved = change_basis(a, w)?;
    let n = a.dim();
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (moved.product(i, j), b.product(i, j));
            if x != y {
                let discrepancy = x.iter().zip(y).map(|(p, q)| p - q).collect();
                return Ok(WitnessOutcome::Refuted { pair: (i, j), discrepancy });
            }
        }
    }
    Ok(WitnessOutcome::Verified)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(BasisChange),
    NotFound,
}

type C64 = Complex<f64>;

fn numeric_table(a: &StructureTensor) -> Option<Vec<C64>> {
    a.entries()
        .iter()
        .map(|x| {
            if !x.vars().is_empty() {
                return None;
            }
            let v = eval_scalar(x, &|_| None, false).ok()?;
            let (re, im) = v.to_f64_pair();
            Some(C64::new(re, im))
        })
        .collect()
}

struct Problem {
    n: usize,
    a: Vec<C64>,
    b: Vec<C64>,
}

impl Problem {
    fn matrix(&self, x: &[f64]) -> Vec<C64> {
        x.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
    }

    fn det(&self, p: &[C64]) -> f64 {
        libm::sqrt(DMatrix::from_row_slice(self.n, self.n, p).determinant().norm_sqr())
    }

    /// A(P_i, P_j) - sum_l b_ijl P_l for all i, j, split into real and imaginary parts.
    fn residual(&self, x: &[f64], penalty: f64) -> Vec<f64> {
        let n = self.n;
        let p = self.matrix(x);
        let at = |i: usize, j: usize, k: usize| self.a[(i * n + j) * n + k];
        let bt = |i: usize, j: usize, k: usize| self.b[(i * n + j) * n + k];
        let mut out = Vec::with_capacity(2 * n * n * n + 1);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut r = C64::new(0.0, 0.0);
                    for q1 in 0..n {
                        let piq = p[i * n + q1];
                        if piq.norm_sqr() == 0.0 {
                            continue;
                        }
                        for q2 in 0..n {
                            r += piq * p[j * n + q2] * at(q1, q2, k);
                        }
                    }
                    for l in 0..n {
                        r -= bt(i, j, l) * p[l * n + k];
                    }
                    out.push(r.re);
                    out.push(r.im);
                }
            }
        }
        if penalty > 0.0 {
            out.push(penalty / (self.det(&p) + 1e-300));
        }
        out
    }

    /// Levenberg-Marquardt over the entries not marked fixed.
    fn solve(&self, x: &mut [f64], fixed: &[bool], penalty: f64, iters: usize) -> f64 {
        let free: Vec<usize> = (0..x.len()).filter(|&k| !fixed[k]).collect();
        let mut lambda = 1e-3;
        let mut r = self.residual(x, penalty);
        let mut cost: f64 = r.iter().map(|v| v * v).sum();
        for _ in 0..iters {
            if cost < 1e-30 || free.is_empty() {
                break;
            }
            let m = r.len();
            let mut jac = DMatrix::<f64>::zeros(m, free.len());
            for (c, &k) in free.iter().enumerate() {
                let h = 1e-7 * (1.0 + libm::fabs(x[k]));
                let old = x[k];
                x[k] = old + h;
                let rp = self.residual(x, penalty);
                x[k] = old;
                for row in 0..m {
                    jac[(row, c)] = (rp[row] - r[row]) / h;
                }
            }
            let rv = DVector::from_vec(r.clone());
            let jt = jac.transpose();
            let jtj = &jt * &jac;
            let g = &jt * rv;
            let mut improved = false;
            while lambda < 1e12 {
                let mut lhs = jtj.clone();
                for d in 0..free.len() {
                    lhs[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
                }
                let Some(step) = lhs.lu().solve(&(-&g)) else {
                    lambda *= 10.0;
                    continue;
                };
                let mut trial = x.to_vec();
                for (c, &k) in free.iter().enumerate() {
                    trial[k] += step[c];
                }
                let rt = self.residual(&trial, penalty);
                let ct: f64 = rt.iter().map(|v| v * v).sum();
                if ct.is_finite() && ct < cost {
                    x.copy_from_slice(&trial);
                    r = rt;
                    cost = ct;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 4.0;
            }
            if !improved {
                break;
            }
        }
        cost
    }
}

const MAX_DEN: i64 = 64;

/// Best rational approximation with denominator at most MAX_DEN, if within tolerance.
fn rationalize(x: f64, tol: f64) -> Option<(i64, i64)> {
    if libm::fabs(x) > 1e6 {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut y = x;
    for _ in 0..32 {
        let a = libm::floor(y) as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > MAX_DEN {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a as f64;
        if libm::fabs(x - h1 as f64 / k1 as f64) < tol || frac < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    if k1 > 0 && libm::fabs(x - h1 as f64 / k1 as f64) < tol {
        Some((h1, k1))
    } else {
        None
    }
}

fn cmp_matrix(p: &BasisChange, q: &BasisChange) -> Ordering {
    for (rp, rq) in p.matrix.iter().zip(&q.matrix) {
        for (x, y) in rp.iter().zip(rq) {
            let (x, y) = (x.constant_value().unwrap_or_default(), y.constant_value().unwrap_or_default());
            match x.cmp_lex(&y) {
                Ordering::Equal => {}
                o => return o,
            }
        }
    }
    Ordering::Equal
}

/// Fixes entries one at a time to nearby small rationals, re-solving the rest in between.
fn snap(prob: &Problem, x: &mut [f64]) -> Option<Vec<(i64, i64)>> {
    let len = x.len();
    let mut fixed = alloc::vec![false; len];
    let mut value = alloc::vec![(0i64, 1i64); len];
    while fixed.iter().any(|f| !f) {
        let mut best: Option<(usize, (i64, i64), f64)> = None;
        for k in (0..len).filter(|&k| !fixed[k]) {
            for tol in [1e-9, 1e-4, 1e-2] {
                if let Some(pq) = rationalize(x[k], tol) {
                    let err = libm::fabs(x[k] - pq.0 as f64 / pq.1 as f64) * (pq.1 as f64);
                    if best.as_ref().is_none_or(|b| err < b.2) {
                        best = Some((k, pq, err));
                    }
                    break;
                }
            }
        }
        let (k, pq, _) = best?;
        fixed[k] = true;
        value[k] = pq;
        x[k] = pq.0 as f64 / pq.1 as f64;
        let c = prob.solve(x, &fixed, 0.0, 60);
        if c > 1e-18 {
            return None;
        }
    }
    let p = prob.matrix(x);
    if prob.det(&p) < 1e-9 {
        return None;
    }
    Some(value)
}

/// Numeric multistart search, then rationalization and exact verification.
pub fn search_isomorphism(a: &StructureTensor, b: &StructureTensor, budget: usize, seed: u64) -> SearchOutcome {
    let n = a.dim();
    if b.dim() != n {
        return SearchOutcome::NotFound;
    }
    let (Some(ta), Some(tb)) = (numeric_table(a), numeric_table(b)) else {
        return SearchOutcome::NotFound;
    };
    let prob = Problem { n, a: ta, b: tb };
    let mut found: Vec<BasisChange> = Vec::new();
    // identity and coordinate permutations first: cheap and common
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut x = alloc::vec![0.0; 2 * n * n];
        for (i, &p) in perm.iter().enumerate() {
            x[2 * (i * n + p)] = 1.0;
        }
        candidates.push(x);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..budget {
        let mut x: Vec<f64> = (0..2 * n * n)
            .map(|k| {
                let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                let v = 4.0 * u - 2.0;
                // half of the starts are real
                if k % 2 == 1 && s % 2 == 0 {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        prob.solve(&mut x, &alloc::vec![false; 2 * n * n], 1e-3, 200);
        candidates.push(x);
    }
    for mut x in candidates {
        if found.len() >= 4 {
            break;
        }
        let c = prob.solve(&mut x, &alloc::vec![false; 2 * n * n], 0.0, 100);
        if c > 1e-16 || prob.det(&prob.matrix(&x)) < 1e-9 {
            continue;
        }
        let Some(vals) = snap(&prob, &mut x) else { continue };
        let entries: Vec<ScalarExpr> = vals
            .chunks(2)
            .map(|c| {
                let re = GaussianRational::from_ratio(c[0].0, c[0].1);
                let im = &GaussianRational::from_ratio(c[1].0, c[1].1) * &GaussianRational::i();
                ScalarExpr::constant(&re + &im)
            })
            .collect();
        let w = BasisChange::new(entries.chunks(n).map(|r| r.to_vec()).collect());
        if verify_witness(a, b, &w) == Ok(WitnessOutcome::Verified) && !found.contains(&w) {
            found.push(w);
        }
    }
    found.into_iter().min_by(cmp_matrix).map_or(SearchOutcome::NotFound, SearchOutcome::Found)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonIsoOutcome {
    Certificate { field: &'static str, left: String, right: String },
    Inconclusive,
}

pub fn certify_noniso(a: &StructureTensor, b: &StructureTensor) -> Result<NonIsoOutcome, IdentityError> {
    if a.dim() != b.dim() {
        use alloc::format;
        return Ok(NonIsoOutcome::Certificate { field: "dim", left: format!("{}", a.dim()), right: format!("{}", b.dim()) });
    }
    let (fa, fb) = (fingerprint(a)?, fingerprint(b)?);
    Ok(match fa.first_difference(&fb) {
        Some((field, left, right)) => NonIsoOutcome::Certificate { field, left, right },
        None => NonIsoOutcome::Inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_scalar;

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

    fn m04(a: &str) -> StructureTensor {
        comm(&[(0, 2, &["1", "0", "0"]), (1, 2, &["0", a, "0"])])
    }

    #[test]
    fn witness_checks() {
        let w = BasisChange::new(alloc::vec![v(&["0", "1", "0"]), v(&["1", "0", "0"]), v(&["0", "0", "1/alpha"])]);
        assert_eq!(verify_witness(&m04("alpha"), &m04("1/alpha"), &w), Ok(WitnessOutcome::Verified));
        let m01 = comm(&[(0, 0, &["0", "1", "0"])]);
        let m02 = comm(&[(0, 1, &["0", "0", "1"])]);
        match verify_witness(&m01, &m02, &BasisChange::identity(3)).unwrap() {
            WitnessOutcome::Refuted { pair, .. } => assert_eq!(pair, (0, 0)),
            o => panic!("{:?}", o),
        }
    }

    #[test]
    fn search_finds_reciprocal() {
        match search_isomorphism(&m04("2"), &m04("1/2"), 16, 0) {
            SearchOutcome::Found(w) => assert_eq!(verify_witness(&m04("2"), &m04("1/2"), &w), Ok(WitnessOutcome::Verified)),
            SearchOutcome::NotFound => panic!("no witness"),
        }
        let j05 = comm(&[(0, 1, &["0", "0", "1"])]);
        assert!(matches!(search_isomorphism(&j05, &j05, 4, 0), SearchOutcome::Found(_)));
    }

    #[test]
    fn search_undoes_random_change() {
        let a = comm(&[(0, 0, &["1", "0", "0"]), (0, 1, &["0", "1/2", "0"]), (1, 2, &["1", "0", "0"])]);
        let p = BasisChange::new(alloc::vec![v(&["1", "2", "0"]), v(&["0", "1", "-1"]), v(&["3", "0", "1"])]);
        let b = change_basis(&a, &p).unwrap();
        assert!(matches!(search_isomorphism(&a, &b, 32, 7), SearchOutcome::Found(_)));
    }

    #[test]
    fn noniso_certificates() {
        let m01 = comm(&[(0, 0, &["0", "1", "0"])]);
        let m02 = comm(&[(0, 1, &["0", "0", "1"])]);
        assert!(matches!(
            certify_noniso(&m01, &m02).unwrap(),
            NonIsoOutcome::Certificate { field: "dim_annihilator", .. }
        ));
        assert_eq!(search_isomorphism(&m01, &m02, 8, 0), SearchOutcome::NotFound);
        assert_eq!(certify_noniso(&m04("2"), &m04("1/2")).unwrap(), NonIsoOutcome::Inconclusive);
    }

    #[test]
    fn rational_snapping() {
        assert_eq!(rationalize(0.5000000001, 1e-6), Some((1, 2)));
        assert_eq!(rationalize(-1.0 / 3.0, 1e-9), Some((-1, 3)));
        assert_eq!(rationalize(core::f64::consts::PI, 1e-9), None);
    }
}
