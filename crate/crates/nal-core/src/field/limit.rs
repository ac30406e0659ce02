use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::gcd::square_split;
use super::poly::{Poly, Var};
use super::ratfunc::RatFunc;
use super::scalar::ScalarExpr;
use super::FieldError;

/// Parameter polynomials declared nonvanishing. Monomials in the parameters are always units.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assumptions {
    nonzero: Vec<Poly>,
}

impl Assumptions {
    pub fn none() -> Self {
        Assumptions::default()
    }

    pub fn new(nonzero: Vec<Poly>) -> Self {
        Assumptions { nonzero: nonzero.into_iter().filter(|p| !p.is_zero()).collect() }
    }

    pub fn with(&self, p: Poly) -> Self {
        let mut a = self.clone();
        if !p.is_zero() && !a.nonzero.contains(&p) {
            a.nonzero.push(p);
        }
        a
    }

    pub fn polys(&self) -> &[Poly] {
        &self.nonzero
    }

    /// True when c cannot vanish under the assumptions.
    pub fn is_unit(&self, c: &Poly) -> bool {
        if c.is_zero() {
            return false;
        }
        if c.is_monomial() {
            return true;
        }
        let mut rest = c.clone();
        let m = rest.monomial_content();
        if !m.is_one() {
            rest = Poly { terms: rest.terms().map(|(k, v)| (k.div(&m).unwrap(), v.clone())).collect() };
        }
        let mut changed = true;
        while changed && !rest.is_constant() {
            changed = false;
            for a in &self.nonzero {
                if a.is_constant() {
                    continue;
                }
                if let Some(q) = rest.div_exact(a) {
                    rest = q;
                    changed = true;
                }
            }
        }
        rest.is_constant()
    }
}

/// Which square root of f(0) the adjoined root tends to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Principal,
    Conjugate,
}

/// Value at t = 0 together with what it relied on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limit {
    pub value: ScalarExpr,
    /// Lowest denominator coefficients assumed nonzero (generic parameters).
    pub side_conditions: Vec<Poly>,
    /// The value keeps a square root of a non-square f(0).
    pub symbolic_root: bool,
}

fn t_coeffs(p: &Poly) -> Vec<Poly> {
    p.coeffs_in(&Var::t())
}

fn first_nonzero(cs: &[Poly]) -> usize {
    cs.iter().position(|c| !c.is_zero()).unwrap_or(0)
}

fn order(r: &RatFunc) -> i64 {
    if r.is_zero() {
        return i64::MAX;
    }
    first_nonzero(&t_coeffs(r.num())) as i64 - first_nonzero(&t_coeffs(r.den())) as i64
}

/// Laurent coefficients of r at t = 0 for orders start..=upto.
fn laurent(r: &RatFunc, upto: i64, assume: &Assumptions, side: &mut Vec<Poly>) -> (i64, Vec<RatFunc>) {
    if r.is_zero() {
        return (upto + 1, Vec::new());
    }
    let nc = t_coeffs(r.num());
    let dc = t_coeffs(r.den());
    let on = first_nonzero(&nc);
    let od = first_nonzero(&dc);
    let start = on as i64 - od as i64;
    if upto < start {
        return (start, Vec::new());
    }
    let count = (upto - start + 1) as usize;
    let dlow = &dc[od];
    if !assume.is_unit(dlow) && !side.contains(dlow) {
        side.push(dlow.clone());
    }
    let d: Vec<RatFunc> = dc[od..].iter().map(|p| RatFunc::from_poly(p.clone())).collect();
    let n: Vec<RatFunc> = nc[on..].iter().map(|p| RatFunc::from_poly(p.clone())).collect();
    let inv0 = d[0].inv().expect("nonzero lowest coefficient");
    let mut inv = alloc::vec![inv0.clone()];
    for k in 1..count {
        let mut acc = RatFunc::zero();
        for j in 1..=k.min(d.len() - 1) {
            acc = &acc + &(&d[j] * &inv[k - j]);
        }
        inv.push(-&(&acc * &inv0));
    }
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut acc = RatFunc::zero();
        for a in 0..=k.min(n.len().saturating_sub(1)) {
            acc = &acc + &(&n[a] * &inv[k - a]);
        }
        out.push(acc);
    }
    (start, out)
}

fn coeff_at(series: &(i64, Vec<RatFunc>), k: i64) -> RatFunc {
    let (start, cs) = series;
    if k < *start {
        return RatFunc::zero();
    }
    cs.get((k - start) as usize).cloned().unwrap_or_else(RatFunc::zero)
}

fn pole_error(c: &RatFunc, k: i64, assume: &Assumptions) -> FieldError {
    if assume.is_unit(c.num()) {
        FieldError::Pole { order: k }
    } else {
        FieldError::IndeterminateValuation { coefficient: c.num().clone() }
    }
}

/// Limit of a rational function as t -> 0.
fn limit_rat(r: &RatFunc, assume: &Assumptions, side: &mut Vec<Poly>) -> Result<RatFunc, FieldError> {
    if !r.contains_var(&Var::t()) {
        return Ok(r.clone());
    }
    let series = laurent(r, 0, assume, side);
    if series.0 < 0 {
        let c = coeff_at(&series, series.0);
        return Err(pole_error(&c, series.0, assume));
    }
    Ok(coeff_at(&series, 0))
}

/// sqrt(1 + u) for a power series u with u_0 = 0, first `count` terms.
fn sqrt_series(u: &[RatFunc], count: usize) -> Vec<RatFunc> {
    let half = RatFunc::constant(super::gauss::GaussianRational::from_ratio(1, 2));
    let mut w = alloc::vec![RatFunc::one()];
    for k in 1..count {
        let mut acc = u.get(k).cloned().unwrap_or_else(RatFunc::zero);
        for j in 1..k {
            acc = &acc - &(&w[j] * &w[k - j]);
        }
        w.push(&acc * &half);
    }
    w
}

/// s0 = h * sqrt(r) with s0^2 = f0.
fn root_at_zero(f0: &Poly, branch: Branch) -> (RatFunc, Poly) {
    let (mut h, r) = square_split(f0);
    if !h.leading_coeff().is_principal() {
        h = -h;
    }
    if branch == Branch::Conjugate {
        h = -h;
    }
    (RatFunc::from_poly(h), r)
}

/// Limit as t -> 0, exact. Poles and parameter-dependent cancellations are errors.
pub fn limit_at_zero(x: &ScalarExpr, assume: &Assumptions, branch: Branch) -> Result<Limit, FieldError> {
    let mut side = Vec::new();
    let Some(sp) = x.sqrt_part() else {
        let v = limit_rat(x.rational_part(), assume, &mut side)?;
        return Ok(Limit { value: ScalarExpr::from_rat(v), side_conditions: side, symbolic_root: false });
    };
    let t = Var::t();
    let a = x.rational_part();
    let b = &sp.coeff;
    let f = &*sp.radicand;
    if !x.contains_var(&t) {
        return Ok(Limit { value: x.clone(), side_conditions: side, symbolic_root: true });
    }
    let fc = t_coeffs(f);
    if fc[0].is_zero() {
        // f = t*f1 with f1(0) != 0: the radical has half-integer order and cannot cancel A.
        let la = limit_rat(a, assume, &mut side)?;
        limit_rat(b, assume, &mut side)?;
        return Ok(Limit { value: ScalarExpr::from_rat(la), side_conditions: side, symbolic_root: false });
    }
    let f0 = fc[0].clone();
    let (h0, r0) = root_at_zero(&f0, branch);
    let rational_root = r0.constant_value().is_some_and(|c| num_traits::One::is_one(&c));
    let m = order(a).min(order(b)).min(0);
    let sa = laurent(a, 0, assume, &mut side);
    let sb = laurent(b, 0, assume, &mut side);
    let need = (-m) as usize + 1;
    let f0r = RatFunc::from_poly(f0.clone());
    let u: Vec<RatFunc> = (0..need)
        .map(|k| if k == 0 { RatFunc::zero() } else { fc.get(k).map_or_else(RatFunc::zero, |c| &RatFunc::from_poly(c.clone()) / &f0r) })
        .collect();
    let w = sqrt_series(&u, need);
    let c_at = |k: i64| -> RatFunc {
        let mut acc = RatFunc::zero();
        for (j, wj) in w.iter().enumerate() {
            let idx = k - j as i64;
            if idx < m {
                break;
            }
            acc = &acc + &(&coeff_at(&sb, idx) * wj);
        }
        acc
    };
    for k in m..0 {
        let ak = coeff_at(&sa, k);
        let ck = c_at(k);
        if rational_root {
            let v = &ak + &(&ck * &h0);
            if !v.is_zero() {
                return Err(pole_error(&v, k, assume));
            }
        } else {
            if !ak.is_zero() {
                return Err(pole_error(&ak, k, assume));
            }
            if !ck.is_zero() {
                return Err(pole_error(&ck, k, assume));
            }
        }
    }
    let a0 = coeff_at(&sa, 0);
    let c0 = c_at(0);
    if rational_root {
        let v = &a0 + &(&c0 * &h0);
        return Ok(Limit { value: ScalarExpr::from_rat(v), side_conditions: side, symbolic_root: false });
    }
    let value = ScalarExpr::with_sqrt(a0, &c0 * &h0, Arc::new(r0));
    let symbolic = value.sqrt_part().is_some();
    Ok(Limit { value, side_conditions: side, symbolic_root: symbolic })
}

/// ord_t(numerator) - ord_t(denominator), parameters treated as units.
pub fn valuation_at_zero(x: &ScalarExpr, assume: &Assumptions) -> Result<i64, FieldError> {
    let unit_low = |p: &Poly| -> Result<(), FieldError> {
        let cs = t_coeffs(p);
        let low = &cs[first_nonzero(&cs)];
        if assume.is_unit(low) {
            Ok(())
        } else {
            Err(FieldError::IndeterminateValuation { coefficient: low.clone() })
        }
    };
    let Some(sp) = x.sqrt_part() else {
        let r = x.rational_part();
        if r.is_zero() {
            return Ok(i64::MAX);
        }
        unit_low(r.num())?;
        unit_low(r.den())?;
        return Ok(order(r));
    };
    let f = &*sp.radicand;
    let fc = t_coeffs(f);
    if fc[0].is_zero() {
        return Err(FieldError::Unsupported("radicand vanishes at t = 0".to_string()));
    }
    // x * conj(x) = a^2 - b^2 f has twice the valuation of x when no cancellation occurs
    // between a and b*s; scan the Laurent coefficients instead.
    let mut side = Vec::new();
    let a = x.rational_part();
    let b = &sp.coeff;
    let m = order(a).min(order(b));
    let (h0, r0) = root_at_zero(&fc[0], Branch::Principal);
    let rational_root = r0.constant_value().is_some_and(|c| num_traits::One::is_one(&c));
    let top = m + 64;
    let sa = laurent(a, top, assume, &mut side);
    let sb = laurent(b, top, assume, &mut side);
    let need = (top - m) as usize + 1;
    let f0r = RatFunc::from_poly(fc[0].clone());
    let u: Vec<RatFunc> = (0..need)
        .map(|k| if k == 0 { RatFunc::zero() } else { fc.get(k).map_or_else(RatFunc::zero, |c| &RatFunc::from_poly(c.clone()) / &f0r) })
        .collect();
    let w = sqrt_series(&u, need);
    for k in m..=top {
        let ak = coeff_at(&sa, k);
        let mut ck = RatFunc::zero();
        for (j, wj) in w.iter().enumerate() {
            let idx = k - j as i64;
            if idx < m {
                break;
            }
            ck = &ck + &(&coeff_at(&sb, idx) * wj);
        }
        let nonzero = if rational_root { !(&ak + &(&ck * &h0)).is_zero() } else { !ak.is_zero() || !ck.is_zero() };
        if nonzero {
            if let Some(p) = side.first() {
                return Err(FieldError::IndeterminateValuation { coefficient: p.clone() });
            }
            return Ok(k);
        }
    }
    Err(FieldError::Unsupported("valuation beyond scan range".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_scalar;

    fn s(x: &str) -> ScalarExpr {
        parse_scalar(x).unwrap()
    }

    fn lim(x: &str) -> Result<ScalarExpr, FieldError> {
        limit_at_zero(&s(x), &Assumptions::none(), Branch::Principal).map(|l| l.value)
    }

    #[test]
    fn valuations() {
        let a = Assumptions::none();
        assert_eq!(valuation_at_zero(&s("(t^3 - t^2)/(2*t^2)"), &a), Ok(0));
        assert_eq!(valuation_at_zero(&s("1/t"), &a), Ok(-1));
        assert_eq!(valuation_at_zero(&s("alpha*t^2/t"), &a), Ok(1));
        assert!(matches!(
            valuation_at_zero(&s("(alpha - 1)/t"), &a),
            Err(FieldError::IndeterminateValuation { .. })
        ));
        let b = Assumptions::new(alloc::vec![crate::field::parse_poly("alpha - 1").unwrap()]);
        assert_eq!(valuation_at_zero(&s("(alpha - 1)/t"), &b), Ok(-1));
    }

    #[test]
    fn rational_limits() {
        assert_eq!(lim("(t^2 + 3*t)/t"), Ok(ScalarExpr::from_int(3)));
        assert_eq!(lim("1/t"), Err(FieldError::Pole { order: -1 }));
        assert_eq!(lim("t*alpha"), Ok(ScalarExpr::zero()));
        assert!(matches!(lim("(alpha - 1)/t"), Err(FieldError::IndeterminateValuation { .. })));
    }

    #[test]
    fn conjugate_rationalization() {
        assert_eq!(lim("(sqrt(1 + t) - 1)/t"), Ok(ScalarExpr::from_ratio(1, 2)));
        let c = limit_at_zero(&s("(sqrt(1 + t) - 1)/t"), &Assumptions::none(), Branch::Conjugate);
        assert!(matches!(c, Err(FieldError::Pole { .. })));
    }

    #[test]
    fn non_square_constant_term() {
        let l = limit_at_zero(&s("(2 + t)*sqrt(t - 3)"), &Assumptions::none(), Branch::Principal).unwrap();
        assert!(l.symbolic_root);
        assert_eq!(l.value, s("2*sqrt(-3)"));
        assert!(matches!(lim("(sqrt(t - 3) - 1)/t"), Err(FieldError::Pole { .. })));
    }

    #[test]
    fn radicand_vanishing_at_zero() {
        assert_eq!(lim("1 + t + sqrt(2*t)"), Ok(ScalarExpr::one()));
        assert!(matches!(lim("sqrt(2*t)/t"), Err(FieldError::Pole { .. })));
    }

    #[test]
    fn side_conditions_are_reported() {
        let l = limit_at_zero(&s("t/(t + alpha - 1) + 1/(alpha + 1 + t)"), &Assumptions::none(), Branch::Principal).unwrap();
        assert_eq!(l.value, s("1/(alpha + 1)"));
        assert_eq!(l.side_conditions, alloc::vec![crate::field::parse_poly("alpha^2 - 1").unwrap()]);
    }

    #[test]
    fn valuation_with_radical() {
        assert_eq!(valuation_at_zero(&s("sqrt(1 + t) - 1"), &Assumptions::none()), Ok(1));
        assert_eq!(valuation_at_zero(&s("sqrt(1 + t) + 1"), &Assumptions::none()), Ok(0));
    }
}
