use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt::{self, Write};
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::gauss::GaussianRational;
use super::gcd::gcd;
use super::poly::{Poly, Var};
use super::FieldError;

/// Reduced quotient of polynomials with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::ZeroDenominator);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = den.constant_value() {
            if c.is_one() {
                return RatFunc { num, den };
            }
            return RatFunc { num: num.scale(&c.inv().unwrap()), den: Poly::one() };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.inv().unwrap();
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFunc { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn constant(c: GaussianRational) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        RatFunc::constant(GaussianRational::from_int(n))
    }

    pub fn var(name: &str) -> Self {
        RatFunc::from_poly(Poly::var(name))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<GaussianRational> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = self.num.vars();
        s.extend(self.den.vars());
        s
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, o: &RatFunc) -> Result<RatFunc, FieldError> {
        let inv = o.inv().ok_or(FieldError::ZeroDenominator)?;
        Ok(self * &inv)
    }

    pub fn scale(&self, c: &GaussianRational) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn powi(&self, e: i64) -> Result<RatFunc, FieldError> {
        if e >= 0 {
            return Ok(RatFunc { num: self.num.pow(e as u32), den: self.den.pow(e as u32) });
        }
        let inv = self.inv().ok_or(FieldError::ZeroDenominator)?;
        inv.powi(-e)
    }

    /// Simultaneous substitution of variables by rational functions.
    pub fn subst(&self, bindings: &BTreeMap<Var, RatFunc>) -> Result<RatFunc, FieldError> {
        if bindings.is_empty() || !self.vars().iter().any(|v| bindings.contains_key(v)) {
            return Ok(self.clone());
        }
        let n = subst_poly(&self.num, bindings);
        let d = subst_poly(&self.den, bindings);
        n.checked_div(&d)
    }

    /// Value at t = 0 when the denominator does not vanish there.
    pub fn at_t_zero(&self) -> Option<RatFunc> {
        let t = Var::t();
        let n = self.num.coeffs_in(&t).swap_remove(0);
        let d = self.den.coeffs_in(&t).swap_remove(0);
        if d.is_zero() {
            return None;
        }
        Some(Self::reduce(n, d))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{}", self);
        s
    }

    pub fn is_atomic_render(&self) -> bool {
        self.den.is_one() && self.num.len() <= 1 && !self.num.leading_coeff().needs_parens()
    }
}

pub(crate) fn subst_poly(p: &Poly, bindings: &BTreeMap<Var, RatFunc>) -> RatFunc {
    p.eval_with(
        RatFunc::zero(),
        |c| RatFunc::constant(c.clone()),
        |v| bindings.get(v).cloned().unwrap_or_else(|| RatFunc::from_poly(Poly::from_var(v))),
    )
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.len() > 1 || self.num.leading_coeff().needs_parens() {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        let single = self.den.len() == 1 && self.den.leading().is_some_and(|(m, _)| m.0.len() == 1);
        if single {
            write!(f, "/{}", self.den)
        } else {
            write!(f, "/({})", self.den)
        }
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            if self.den.is_one() {
                return RatFunc { num: &self.num + &o.num, den: Poly::one() };
            }
            return RatFunc::reduce(&self.num + &o.num, self.den.clone());
        }
        let n = &(&self.num * &o.den) + &(&o.num * &self.den);
        RatFunc::reduce(n, &self.den * &o.den)
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        self + &(-o)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc { num: &self.num * &o.num, den: Poly::one() };
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = o.den.div_exact(&g1).unwrap();
        let n2 = o.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.inv().unwrap();
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }
}

impl<'a> Div<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn div(self, o: &RatFunc) -> RatFunc {
        self.checked_div(o).expect("division by zero rational function")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -self.num, den: self.den }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: RatFunc) -> RatFunc { (&self).$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

macro_rules! owned_ref_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<'a> $tr<&'a RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: &RatFunc) -> RatFunc { (&self).$m(o) }
        }
    )*};
}
owned_ref_ops!(Add add, Sub sub, Mul mul, Div div);

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFunc {
    fn one() -> Self {
        RatFunc::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_poly;

    fn r(n: &str, d: &str) -> RatFunc {
        RatFunc::new(parse_poly(n).unwrap(), parse_poly(d).unwrap()).unwrap()
    }

    #[test]
    fn cancels_common_factors() {
        assert_eq!(r("t^2 + t", "t"), r("t + 1", "1"));
        assert_eq!(r("2*alpha", "4"), r("alpha", "2"));
        assert_eq!(r("t^2 - 1", "2*t - 2"), r("t + 1", "2"));
    }

    #[test]
    fn denominator_is_monic() {
        let x = r("1", "3*t + 6");
        assert!(x.den().leading_coeff().is_one());
    }

    #[test]
    fn arithmetic() {
        let a = r("1", "t");
        let b = r("1", "t + 1");
        assert_eq!(&a - &b, r("1", "t^2 + t"));
        assert_eq!(&(&a * &b) * &r("t^2 + t", "1"), RatFunc::one());
    }

    #[test]
    fn substitution() {
        let mut b = BTreeMap::new();
        b.insert(Var::new("alpha"), r("2 - t", "t"));
        assert_eq!(r("1 + alpha", "1").subst(&b).unwrap(), r("2", "t"));
        let mut c = BTreeMap::new();
        c.insert(Var::new("gamma"), RatFunc::from_int(2));
        assert_eq!(r("-gamma^2", "1").subst(&c).unwrap(), RatFunc::from_int(-4));
    }

    #[test]
    fn zero_denominator() {
        assert!(RatFunc::new(Poly::one(), Poly::zero()).is_err());
        let mut b = BTreeMap::new();
        b.insert(Var::new("alpha"), RatFunc::from_int(1));
        assert!(r("1", "alpha - 1").subst(&b).is_err());
    }
}
