use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gauss::{ratio_to_f64, GaussianRational};
use super::poly::Poly;
use super::ratfunc::RatFunc;

/// Fractional bits of the fixed-point representation.
pub const FRAC_BITS: u64 = 320;

/// Fixed-point complex number, value = (re + i*im) / 2^FRAC_BITS.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Cx {
    pub re: BigInt,
    pub im: BigInt,
}

fn scale_rational(q: &BigRational) -> BigInt {
    (q.numer() << FRAC_BITS) / q.denom()
}

impl Cx {
    pub fn zero() -> Self {
        Cx { re: BigInt::zero(), im: BigInt::zero() }
    }

    pub fn one() -> Self {
        Cx { re: BigInt::one() << FRAC_BITS, im: BigInt::zero() }
    }

    pub fn from_gauss(z: &GaussianRational) -> Self {
        Cx { re: scale_rational(&z.re), im: scale_rational(&z.im) }
    }

    pub fn from_rational(q: &BigRational) -> Self {
        Cx { re: scale_rational(q), im: BigInt::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Cx { re: BigInt::from(n) << FRAC_BITS, im: BigInt::zero() }
    }

    /// 10^-k exactly rounded.
    pub fn pow10_neg(k: u32) -> Self {
        let d = num_traits::pow(BigInt::from(10u32), k as usize);
        Cx::from_rational(&BigRational::new(BigInt::one(), d))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn norm_sq_raw(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    /// |z| as a fixed-point real.
    pub fn abs_raw(&self) -> BigInt {
        self.norm_sq_raw().sqrt()
    }

    pub fn abs_f64(&self) -> f64 {
        ratio_to_f64(&BigRational::new(self.abs_raw(), BigInt::one() << FRAC_BITS))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        let d = BigInt::one() << FRAC_BITS;
        (
            ratio_to_f64(&BigRational::new(self.re.clone(), d.clone())),
            ratio_to_f64(&BigRational::new(self.im.clone(), d)),
        )
    }

    pub fn inv(&self) -> Option<Cx> {
        Cx::one().div(self)
    }

    pub fn div(&self, o: &Cx) -> Option<Cx> {
        let den = o.norm_sq_raw();
        if den.is_zero() {
            return None;
        }
        let re = &self.re * &o.re + &self.im * &o.im;
        let im = &self.im * &o.re - &self.re * &o.im;
        Some(Cx { re: (re << FRAC_BITS) / &den, im: (im << FRAC_BITS) / &den })
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Cx {
        if self.is_zero() {
            return Cx::zero();
        }
        let r = self.abs_raw();
        if !self.re.is_negative() {
            let x = (((&r + &self.re) >> 1u32) << FRAC_BITS).sqrt();
            if x.is_zero() {
                return Cx::zero();
            }
            let y = (&self.im << FRAC_BITS) / (&x << 1u32);
            Cx { re: x, im: y }
        } else {
            let y = (((&r - &self.re) >> 1u32) << FRAC_BITS).sqrt();
            let y = if self.im.sign() == Sign::Minus { -y } else { y };
            let x = (&self.im << FRAC_BITS) / (&y << 1u32);
            Cx { re: x, im: y }
        }
    }

    pub fn powi(&self, e: i64) -> Option<Cx> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Cx::one();
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            n >>= 1;
            if n > 0 {
                b = &b * &b;
            }
        }
        Some(acc)
    }

    pub fn eval_poly(p: &Poly, var: &mut dyn FnMut(&super::poly::Var) -> Cx) -> Cx {
        p.eval_with(Cx::zero(), Cx::from_gauss, |v| var(v))
    }

    pub fn eval_rat(r: &RatFunc, var: &mut dyn FnMut(&super::poly::Var) -> Cx) -> Option<Cx> {
        let n = Cx::eval_poly(r.num(), var);
        let d = Cx::eval_poly(r.den(), var);
        n.div(&d)
    }
}

impl<'a> Add<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn add(self, o: &Cx) -> Cx {
        Cx { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Add<&'a Cx> for Cx {
    type Output = Cx;
    fn add(self, o: &Cx) -> Cx {
        Cx { re: self.re + &o.re, im: self.im + &o.im }
    }
}

impl<'a> Sub<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn sub(self, o: &Cx) -> Cx {
        Cx { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn mul(self, o: &Cx) -> Cx {
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        Cx { re: re >> FRAC_BITS, im: im >> FRAC_BITS }
    }
}

impl<'a> Mul<&'a Cx> for Cx {
    type Output = Cx;
    fn mul(self, o: &Cx) -> Cx {
        &self * o
    }
}

impl Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx { re: -&self.re, im: -&self.im }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Cx, b: &Cx) -> bool {
        (a - b).abs_f64() < 1e-80
    }

    #[test]
    fn sqrt_principal() {
        let m = Cx::from_int(-4).sqrt();
        assert!(close(&m, &Cx::from_gauss(&(&GaussianRational::i() * &GaussianRational::from_int(2)))));
        let z = Cx::from_gauss(&GaussianRational::new(super::super::gauss::rat(3, 1), super::super::gauss::rat(4, 1)));
        let r = z.sqrt();
        assert!(close(&(&r * &r), &z));
        assert!(close(&r, &Cx::from_gauss(&GaussianRational::new(super::super::gauss::rat(2, 1), super::super::gauss::rat(1, 1)))));
        let w = Cx::from_gauss(&GaussianRational::new(super::super::gauss::rat(-3, 1), super::super::gauss::rat(-4, 1)));
        let s = w.sqrt();
        assert!(close(&(&s * &s), &w));
        assert!(s.re.sign() != Sign::Minus);
    }

    #[test]
    fn division_and_small_powers() {
        let t = Cx::pow10_neg(6);
        let big = t.powi(-4).unwrap();
        let back = (&big * &t.powi(4).unwrap()).abs_f64();
        assert!((back - 1.0).abs() < 1e-60);
    }
}
