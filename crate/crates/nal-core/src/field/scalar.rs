use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt::{self, Write};
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::gauss::GaussianRational;
use super::gcd::square_split;
use super::poly::{Poly, Var};
use super::ratfunc::RatFunc;
use super::FieldError;

/// Coefficient and square-free radicand of the adjoined root s, s^2 = radicand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SqrtPart {
    pub coeff: RatFunc,
    pub radicand: Arc<Poly>,
}

/// Element a + b*s of K[s]/(s^2 - f), K the rational function field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ScalarExpr {
    rat: RatFunc,
    sqrt: Option<SqrtPart>,
}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr { rat: RatFunc::zero(), sqrt: None }
    }

    pub fn one() -> Self {
        ScalarExpr::from_rat(RatFunc::one())
    }

    pub fn from_rat(rat: RatFunc) -> Self {
        ScalarExpr { rat, sqrt: None }
    }

    pub fn from_poly(p: Poly) -> Self {
        ScalarExpr::from_rat(RatFunc::from_poly(p))
    }

    pub fn from_int(n: i64) -> Self {
        ScalarExpr::from_rat(RatFunc::from_int(n))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        ScalarExpr::constant(GaussianRational::from_ratio(n, d))
    }

    pub fn constant(c: GaussianRational) -> Self {
        ScalarExpr::from_rat(RatFunc::constant(c))
    }

    pub fn i() -> Self {
        ScalarExpr::constant(GaussianRational::i())
    }

    pub fn var(name: &str) -> Self {
        ScalarExpr::from_rat(RatFunc::var(name))
    }

    pub fn t() -> Self {
        ScalarExpr::var(super::poly::T)
    }

    /// Build a + b*s and normalize; the radicand must already be square-free.
    pub fn with_sqrt(rat: RatFunc, coeff: RatFunc, radicand: Arc<Poly>) -> Self {
        if coeff.is_zero() {
            return ScalarExpr::from_rat(rat);
        }
        ScalarExpr { rat, sqrt: Some(SqrtPart { coeff, radicand }) }
    }

    /// Principal formal square root of an element without a radical part.
    pub fn sqrt(x: &ScalarExpr) -> Result<ScalarExpr, FieldError> {
        if x.sqrt.is_some() {
            return Err(FieldError::NestedRadical);
        }
        if x.is_zero() {
            return Ok(ScalarExpr::zero());
        }
        let n = x.rat.num();
        let d = x.rat.den();
        let (h, r) = square_split(&(n * d));
        let h = RatFunc::new(h, d.clone())?;
        if let Some(c) = r.constant_value() {
            if c.is_one() {
                return Ok(ScalarExpr::from_rat(h));
            }
        }
        Ok(ScalarExpr::with_sqrt(RatFunc::zero(), h, Arc::new(r)))
    }

    pub fn rational_part(&self) -> &RatFunc {
        &self.rat
    }

    pub fn sqrt_part(&self) -> Option<&SqrtPart> {
        self.sqrt.as_ref()
    }

    pub fn radicand(&self) -> Option<&Arc<Poly>> {
        self.sqrt.as_ref().map(|s| &s.radicand)
    }

    pub fn as_rat(&self) -> Option<&RatFunc> {
        if self.sqrt.is_none() {
            Some(&self.rat)
        } else {
            None
        }
    }

    pub fn numerator(&self) -> &Poly {
        self.rat.num()
    }

    pub fn denominator(&self) -> &Poly {
        self.rat.den()
    }

    pub fn is_zero(&self) -> bool {
        self.sqrt.is_none() && self.rat.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.sqrt.is_none() && self.rat.is_one()
    }

    pub fn constant_value(&self) -> Option<GaussianRational> {
        if self.sqrt.is_some() {
            return None;
        }
        self.rat.constant_value()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = self.rat.vars();
        if let Some(sp) = &self.sqrt {
            s.extend(sp.coeff.vars());
            s.extend(sp.radicand.vars());
        }
        s
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.rat.contains_var(v)
            || self.sqrt.as_ref().is_some_and(|s| s.coeff.contains_var(v) || s.radicand.contains_var(v))
    }

    pub fn contains_t(&self) -> bool {
        self.contains_var(&Var::t())
    }

    fn join(a: &Option<SqrtPart>, b: &Option<SqrtPart>) -> Result<Option<Arc<Poly>>, FieldError> {
        match (a, b) {
            (Some(x), Some(y)) => {
                if x.radicand == y.radicand {
                    Ok(Some(x.radicand.clone()))
                } else {
                    Err(FieldError::MixedRadicands)
                }
            }
            (Some(x), None) => Ok(Some(x.radicand.clone())),
            (None, Some(y)) => Ok(Some(y.radicand.clone())),
            (None, None) => Ok(None),
        }
    }

    fn coeff(&self) -> RatFunc {
        self.sqrt.as_ref().map_or_else(RatFunc::zero, |s| s.coeff.clone())
    }

    pub fn try_add(&self, o: &ScalarExpr) -> Result<ScalarExpr, FieldError> {
        let rad = Self::join(&self.sqrt, &o.sqrt)?;
        let rat = &self.rat + &o.rat;
        Ok(match rad {
            None => ScalarExpr::from_rat(rat),
            Some(f) => ScalarExpr::with_sqrt(rat, &self.coeff() + &o.coeff(), f),
        })
    }

    pub fn try_sub(&self, o: &ScalarExpr) -> Result<ScalarExpr, FieldError> {
        self.try_add(&-o)
    }

    pub fn try_mul(&self, o: &ScalarExpr) -> Result<ScalarExpr, FieldError> {
        let rad = Self::join(&self.sqrt, &o.sqrt)?;
        match rad {
            None => Ok(ScalarExpr::from_rat(&self.rat * &o.rat)),
            Some(f) => {
                let (a1, b1) = (&self.rat, self.coeff());
                let (a2, b2) = (&o.rat, o.coeff());
                let fr = RatFunc::from_poly((*f).clone());
                let rat = &(a1 * a2) + &(&(&b1 * &b2) * &fr);
                let c = &(a1 * &b2) + &(a2 * &b1);
                Ok(ScalarExpr::with_sqrt(rat, c, f))
            }
        }
    }

    pub fn inv(&self) -> Result<ScalarExpr, FieldError> {
        match &self.sqrt {
            None => self.rat.inv().map(ScalarExpr::from_rat).ok_or(FieldError::ZeroDenominator),
            Some(sp) => {
                let fr = RatFunc::from_poly((*sp.radicand).clone());
                let norm = &(&self.rat * &self.rat) - &(&(&sp.coeff * &sp.coeff) * &fr);
                let ninv = norm.inv().ok_or(FieldError::ZeroDenominator)?;
                Ok(ScalarExpr::with_sqrt(&self.rat * &ninv, -&(&sp.coeff * &ninv), sp.radicand.clone()))
            }
        }
    }

    pub fn try_div(&self, o: &ScalarExpr) -> Result<ScalarExpr, FieldError> {
        self.try_mul(&o.inv()?)
    }

    pub fn powi(&self, e: i64) -> Result<ScalarExpr, FieldError> {
        if self.sqrt.is_none() {
            return self.rat.powi(e).map(ScalarExpr::from_rat);
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = ScalarExpr::one();
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.try_mul(&b)?;
            }
            n >>= 1;
            if n > 0 {
                b = b.try_mul(&b)?;
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &GaussianRational) -> ScalarExpr {
        match &self.sqrt {
            None => ScalarExpr::from_rat(self.rat.scale(c)),
            Some(sp) => ScalarExpr::with_sqrt(self.rat.scale(c), sp.coeff.scale(c), sp.radicand.clone()),
        }
    }

    /// Simultaneous substitution; bound values may carry the same radicand.
    pub fn substitute(&self, bindings: &BTreeMap<Var, ScalarExpr>) -> Result<ScalarExpr, FieldError> {
        if bindings.is_empty() || !self.vars().iter().any(|v| bindings.contains_key(v)) {
            return Ok(self.clone());
        }
        let eval_poly = |p: &Poly| -> Result<ScalarExpr, FieldError> {
            let mut acc = ScalarExpr::zero();
            for (m, c) in p.terms() {
                let mut term = ScalarExpr::constant(c.clone());
                for (v, e) in &m.0 {
                    let base = bindings.get(v).cloned().unwrap_or_else(|| ScalarExpr::from_poly(Poly::from_var(v)));
                    term = term.try_mul(&base.powi(*e as i64)?)?;
                }
                acc = acc.try_add(&term)?;
            }
            Ok(acc)
        };
        let eval_rat = |r: &RatFunc| -> Result<ScalarExpr, FieldError> {
            let n = eval_poly(r.num())?;
            let d = eval_poly(r.den())?;
            if d.is_zero() {
                return Err(FieldError::ZeroDenominator);
            }
            n.try_div(&d)
        };
        let a = eval_rat(&self.rat)?;
        match &self.sqrt {
            None => Ok(a),
            Some(sp) => {
                let b = eval_rat(&sp.coeff)?;
                let f = eval_poly(&sp.radicand)?;
                let s = ScalarExpr::sqrt(&f)?;
                a.try_add(&b.try_mul(&s)?)
            }
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{}", self);
        s
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.sqrt {
            None => write!(f, "{}", self.rat),
            Some(sp) => {
                if !self.rat.is_zero() {
                    write!(f, "{} + ", self.rat)?;
                }
                if sp.coeff.is_one() {
                    write!(f, "sqrt({})", sp.radicand)
                } else if sp.coeff.is_atomic_render() {
                    write!(f, "{}*sqrt({})", sp.coeff, sp.radicand)
                } else {
                    write!(f, "({})*sqrt({})", sp.coeff, sp.radicand)
                }
            }
        }
    }
}

impl<'a> Add<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, o: &ScalarExpr) -> ScalarExpr {
        self.try_add(o).expect("radicands must agree within one context")
    }
}

impl<'a> Sub<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, o: &ScalarExpr) -> ScalarExpr {
        self.try_sub(o).expect("radicands must agree within one context")
    }
}

impl<'a> Mul<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, o: &ScalarExpr) -> ScalarExpr {
        self.try_mul(o).expect("radicands must agree within one context")
    }
}

impl<'a> Div<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, o: &ScalarExpr) -> ScalarExpr {
        self.try_div(o).expect("nonzero divisor with a shared radicand")
    }
}

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr {
            rat: -&self.rat,
            sqrt: self.sqrt.as_ref().map(|s| SqrtPart { coeff: -&s.coeff, radicand: s.radicand.clone() }),
        }
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        -&self
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, o: ScalarExpr) -> ScalarExpr { (&self).$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Zero for ScalarExpr {
    fn zero() -> Self {
        ScalarExpr::zero()
    }
    fn is_zero(&self) -> bool {
        ScalarExpr::is_zero(self)
    }
}

impl One for ScalarExpr {
    fn one() -> Self {
        ScalarExpr::one()
    }
}

impl From<RatFunc> for ScalarExpr {
    fn from(r: RatFunc) -> Self {
        ScalarExpr::from_rat(r)
    }
}

impl From<i64> for ScalarExpr {
    fn from(n: i64) -> Self {
        ScalarExpr::from_int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_scalar;

    fn s(x: &str) -> ScalarExpr {
        parse_scalar(x).unwrap()
    }

    #[test]
    fn root_squares_to_radicand() {
        let r = s("sqrt(1 + t)");
        assert_eq!(&r * &r, s("1 + t"));
    }

    #[test]
    fn cube_root_extraction_is_consistent() {
        let a = s("sqrt((9*alpha - 12)^3)");
        let b = s("(9*alpha - 12)*sqrt(9*alpha - 12)");
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_with_radical() {
        let x = s("1 + sqrt(1 + t)");
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, ScalarExpr::one());
    }

    #[test]
    fn mixed_radicands_error() {
        let a = s("sqrt(t)");
        let b = s("sqrt(alpha)");
        assert_eq!(a.try_mul(&b), Err(FieldError::MixedRadicands));
    }

    #[test]
    fn perfect_square_roots_collapse() {
        assert_eq!(s("sqrt(t^2 + 2*t + 1)"), s("t + 1"));
        assert_eq!(s("sqrt(-1)"), ScalarExpr::i());
        assert_eq!(s("sqrt(1/4)"), ScalarExpr::from_ratio(1, 2));
    }

    #[test]
    fn render_round_trip() {
        for x in ["(1 - t)/(t^2 + 1) + 2*sqrt(alpha*t)", "i*alpha/2", "-(1/2+i)*t^2", "sqrt(3)"] {
            let v = s(x);
            assert_eq!(s(&v.render()), v, "{}", v);
        }
    }
}
