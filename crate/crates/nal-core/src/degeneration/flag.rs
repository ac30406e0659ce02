use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::Complex;

use super::numeric::DEFAULT_SAMPLES;
use crate::field::{gcd, Cx, GaussianRational, Poly, ScalarExpr, Var};
use crate::linalg::{self, Matrix};
use crate::tensor::{change_basis, BasisChange, StructureTensor, TensorError};

type C64 = Complex<f64>;

const VAR_A: &str = "chart_a";
const VAR_B: &str = "chart_b";

/// Products among tail subspaces A_k = span(e_k..e_n); (p, q, r) means A_p A_q ⊆ A_r, r = n + 1 is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagCondition {
    pub conditions: Vec<(usize, usize, usize)>,
    pub staged_basis: BasisChange,
}

impl fmt::Display for FlagCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.staged_basis.dim();
        for (idx, (p, q, r)) in self.conditions.iter().enumerate() {
            if idx > 0 {
                write!(f, ", ")?;
            }
            if *r > n {
                write!(f, "A{}A{} = 0", p, q)?;
            } else {
                write!(f, "A{}A{} in A{}", p, q, r)?;
            }
        }
        Ok(())
    }
}

/// A subspace of the target satisfying every condition; numeric coordinates of its spanning vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceWitness {
    /// Coordinate left free in the Grassmannian chart (0-based).
    pub chart: usize,
    pub basis: Vec<Vec<(f64, f64)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NondegOutcome {
    Verified,
    MembershipFailed(String),
    ExclusionFailed(SubspaceWitness),
    Inconclusive(String),
}

impl NondegOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            NondegOutcome::Verified => "verified",
            NondegOutcome::MembershipFailed(_) => "membership_failed",
            NondegOutcome::ExclusionFailed(_) => "exclusion_failed",
            NondegOutcome::Inconclusive(_) => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NondegError {
    EmptyConditions,
    UnsupportedConditionShape(String),
    Tensor(TensorError),
}

impl fmt::Display for NondegError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NondegError::EmptyConditions => write!(f, "no flag conditions"),
            NondegError::UnsupportedConditionShape(s) => write!(f, "unsupported condition shape: {}", s),
            NondegError::Tensor(e) => write!(f, "{}", e),
        }
    }
}

fn check_shape(n: usize, cond: &FlagCondition) -> Result<(), NondegError> {
    if cond.conditions.is_empty() {
        return Err(NondegError::EmptyConditions);
    }
    if n != 3 || cond.staged_basis.dim() != n {
        return Err(NondegError::UnsupportedConditionShape(format!("dimension {}", n)));
    }
    for &(p, q, r) in &cond.conditions {
        let ok = matches!(p, 1 | 2) && matches!(q, 1 | 2) && matches!(r, 1 | 2 | 4) && (p == 2 || q == 2 || r == 2);
        if !ok {
            return Err(NondegError::UnsupportedConditionShape(format!("({}, {}, {})", p, q, r)));
        }
    }
    Ok(())
}

fn membership(from: &StructureTensor, cond: &FlagCondition) -> Result<Option<String>, NondegError> {
    let b = match change_basis(from, &cond.staged_basis) {
        Ok(b) => b,
        Err(TensorError::SingularMatrix { .. }) => return Ok(Some(String::from("staged basis is singular"))),
        Err(e) => return Err(NondegError::Tensor(e)),
    };
    let n = b.dim();
    for &(p, q, r) in &cond.conditions {
        for i in p - 1..n {
            for j in q - 1..n {
                for k in 0..(r - 1).min(n) {
                    let x = b.get(i, j, k);
                    if !x.is_zero() {
                        return Ok(Some(format!("f{}f{} has coefficient {} on f{}", i + 1, j + 1, x.render(), k + 1)));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn unit(n: usize, i: usize) -> Vec<ScalarExpr> {
    (0..n).map(|k| if k == i { ScalarExpr::one() } else { ScalarExpr::zero() }).collect()
}

fn chart_basis(free: usize) -> Matrix {
    let piv: Vec<usize> = (0..3).filter(|&k| k != free).collect();
    let mut w1 = unit(3, piv[0]);
    w1[free] = ScalarExpr::var(VAR_A);
    let mut w2 = unit(3, piv[1]);
    w2[free] = ScalarExpr::var(VAR_B);
    alloc::vec![w1, w2]
}

fn chart_equations(to: &StructureTensor, cond: &FlagCondition, w: &Matrix) -> Vec<Poly> {
    let full: Matrix = (0..3).map(|i| unit(3, i)).collect();
    let gens = |s: usize| if s == 1 { &full } else { w };
    let mut eqs = Vec::new();
    for &(p, q, r) in &cond.conditions {
        for x in gens(p) {
            for y in gens(q) {
                let v = to.mul_unchecked(x, y);
                match r {
                    4 => eqs.extend(v.iter().map(linalg::vanishing_poly)),
                    2 => {
                        let m = alloc::vec![w[0].clone(), w[1].clone(), v];
                        eqs.push(linalg::vanishing_poly(&linalg::determinant(&m)));
                    }
                    _ => {}
                }
            }
        }
    }
    let mut out: Vec<Poly> = Vec::new();
    for e in eqs {
        if !e.is_zero() && !out.contains(&e) {
            out.push(e);
        }
    }
    out
}

fn resultant(f: &Poly, g: &Poly, v: &Var) -> Poly {
    let fc = f.coeffs_in(v);
    let gc = g.coeffs_in(v);
    let (m, n) = (fc.len() - 1, gc.len() - 1);
    let size = m + n;
    let mut s: Matrix = alloc::vec![alloc::vec![ScalarExpr::zero(); size]; size];
    for row in 0..n {
        for (k, c) in fc.iter().rev().enumerate() {
            s[row][row + k] = ScalarExpr::from_poly(c.clone());
        }
    }
    for row in 0..m {
        for (k, c) in gc.iter().rev().enumerate() {
            s[n + row][row + k] = ScalarExpr::from_poly(c.clone());
        }
    }
    linalg::determinant(&s).numerator().clone()
}

fn gauss_c64(z: &GaussianRational) -> C64 {
    let (re, im) = Cx::from_gauss(z).to_f64_pair();
    C64::new(re, im)
}

fn eval_c64(p: &Poly, values: &BTreeMap<Var, C64>) -> C64 {
    p.eval_with(C64::new(0.0, 0.0), gauss_c64, |v| values.get(v).copied().unwrap_or(C64::new(0.0, 0.0)))
}

fn univariate(p: &Poly, v: &Var, values: &BTreeMap<Var, C64>) -> Vec<C64> {
    let mut cs: Vec<C64> = p.coeffs_in(v).iter().map(|c| eval_c64(c, values)).collect();
    let scale = cs.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let scale = libm::sqrt(scale);
    while cs.len() > 1 && cs.last().is_some_and(|c| libm::sqrt(c.norm_sqr()) <= 1e-12 * scale) {
        cs.pop();
    }
    cs
}

/// Durand-Kerner; coefficients low to high.
fn roots(cs: &[C64]) -> Vec<C64> {
    let d = cs.len().saturating_sub(1);
    if d == 0 {
        return Vec::new();
    }
    let lead = cs[d];
    let monic: Vec<C64> = cs.iter().map(|c| c / lead).collect();
    let eval = |z: C64| monic.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c);
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..d).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den.norm_sqr() == 0.0 {
                continue;
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            moved = moved.max(step.norm_sqr());
        }
        if moved < 1e-30 {
            break;
        }
    }
    z
}

enum ChartResult {
    Empty,
    Point(C64, C64),
    Unknown(String),
}

fn residual(eqs: &[Poly], values: &BTreeMap<Var, C64>) -> f64 {
    eqs.iter().map(|e| libm::sqrt(eval_c64(e, values).norm_sqr())).fold(0.0, f64::max)
}

fn with_point(base: &BTreeMap<Var, C64>, a: C64, b: C64) -> BTreeMap<Var, C64> {
    let mut m = base.clone();
    m.insert(Var::new(VAR_A), a);
    m.insert(Var::new(VAR_B), b);
    m
}

fn point_on_curve(g: &Poly, eqs: &[Poly], base: &BTreeMap<Var, C64>) -> Option<(C64, C64)> {
    let (va, vb) = (Var::new(VAR_A), Var::new(VAR_B));
    if g.contains_var(&vb) {
        for a0 in [0.0, 1.0, 2.0, -1.0, 3.0, 0.5] {
            let a0 = C64::new(a0, 0.0);
            let mut vals = base.clone();
            vals.insert(va.clone(), a0);
            for b0 in roots(&univariate(g, &vb, &vals)) {
                if residual(eqs, &with_point(base, a0, b0)) < 1e-8 {
                    return Some((a0, b0));
                }
            }
        }
        None
    } else {
        roots(&univariate(g, &va, base)).into_iter().map(|a0| (a0, C64::new(0.0, 0.0))).find(|(a, b)| residual(eqs, &with_point(base, *a, *b)) < 1e-8)
    }
}

fn solve_chart(eqs: &[Poly], base: &BTreeMap<Var, C64>) -> ChartResult {
    let (va, vb) = (Var::new(VAR_A), Var::new(VAR_B));
    if eqs.is_empty() {
        return ChartResult::Point(C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    let involves = |p: &Poly| p.contains_var(&va) || p.contains_var(&vb);
    if eqs.iter().any(|e| !involves(e)) {
        return ChartResult::Empty;
    }
    let g = eqs.iter().skip(1).fold(eqs[0].clone(), |acc, e| gcd(&acc, e));
    if involves(&g) {
        return match point_on_curve(&g, eqs, base) {
            Some((a, b)) => ChartResult::Point(a, b),
            None => ChartResult::Unknown(format!("common factor {} without a located point", g)),
        };
    }
    let (fb, f0): (Vec<&Poly>, Vec<&Poly>) = eqs.iter().partition(|e| e.contains_var(&vb));
    let mut r = Poly::zero();
    for p in &f0 {
        r = gcd(&r, p);
    }
    for i in 0..fb.len() {
        for j in i + 1..fb.len() {
            if !r.is_zero() && !r.contains_var(&va) {
                return ChartResult::Empty;
            }
            r = gcd(&r, &resultant(fb[i], fb[j], &vb));
        }
    }
    if r.is_zero() {
        return ChartResult::Unknown(String::from("all resultants vanish"));
    }
    if !r.contains_var(&va) {
        return ChartResult::Empty;
    }
    for a0 in roots(&univariate(&r, &va, base)) {
        let mut vals = base.clone();
        vals.insert(va.clone(), a0);
        let lead = fb.iter().map(|f| univariate(f, &vb, &vals)).find(|cs| cs.len() > 1);
        let cands = lead.map_or_else(|| alloc::vec![C64::new(0.0, 0.0)], |cs| roots(&cs));
        for b0 in cands {
            if residual(eqs, &with_point(base, a0, b0)) < 1e-8 {
                return ChartResult::Point(a0, b0);
            }
        }
    }
    ChartResult::Unknown(format!("eliminant {} has roots that did not lift numerically", r))
}

fn param_values(to: &StructureTensor) -> BTreeMap<Var, C64> {
    to.params.iter().enumerate().map(|(j, p)| (Var::new(p), C64::new(DEFAULT_SAMPLES[j % DEFAULT_SAMPLES.len()] as f64, 0.0))).collect()
}

/// Membership of the staged `from` representative, then exclusion of every subspace of `to` over Gr(2,3).
pub fn verify_nondeg_certificate(from: &StructureTensor, to: &StructureTensor, cond: &FlagCondition) -> Result<NondegOutcome, NondegError> {
    check_shape(from.dim(), cond)?;
    if to.dim() != from.dim() {
        return Err(NondegError::UnsupportedConditionShape(format!("target dimension {}", to.dim())));
    }
    if let Some(m) = membership(from, cond)? {
        return Ok(NondegOutcome::MembershipFailed(m));
    }
    let base = param_values(to);
    let mut unknown = None;
    for free in (0..3).rev() {
        let w = chart_basis(free);
        let eqs = chart_equations(to, cond, &w);
        match solve_chart(&eqs, &base) {
            ChartResult::Empty => {}
            ChartResult::Point(a, b) => {
                let subst = |x: &ScalarExpr| -> (f64, f64) {
                    let vals = with_point(&base, a, b);
                    let z = if let Some(c) = x.constant_value() { gauss_c64(&c) } else { eval_c64(x.numerator(), &vals) };
                    (z.re, z.im)
                };
                let basis = w.iter().map(|v| v.iter().map(subst).collect()).collect();
                return Ok(NondegOutcome::ExclusionFailed(SubspaceWitness { chart: free, basis }));
            }
            ChartResult::Unknown(r) => {
                unknown.get_or_insert(format!("chart {}: {}", free + 1, r));
            }
        }
    }
    Ok(match unknown {
        Some(r) => NondegOutcome::Inconclusive(r),
        None => NondegOutcome::Verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resultant_of_lines() {
        let (a, b) = (Poly::var(VAR_A), Poly::var(VAR_B));
        // b - a and b + a - 2 meet at a = 1
        let f = &b - &a;
        let g = &(&b + &a) - &Poly::constant(GaussianRational::from_int(2));
        let r = resultant(&f, &g, &Var::new(VAR_B));
        assert_eq!(r.monic(), (&a - &Poly::one()).monic());
    }

    #[test]
    fn durand_kerner_quadratic() {
        let mut rs = roots(&[C64::new(-2.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        rs.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((rs[0].re + 2f64.sqrt()).abs() < 1e-10 && (rs[1].re - 2f64.sqrt()).abs() < 1e-10);
    }
}
