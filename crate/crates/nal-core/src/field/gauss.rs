use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Element of Q(i), stored as two reduced rationals.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Square root of a non-negative rational when it is rational.
pub(crate) fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer();
    let d = q.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        GaussianRational::new(rat(n, d), BigRational::zero())
    }

    pub fn from_rational(q: BigRational) -> Self {
        GaussianRational::new(q, BigRational::zero())
    }

    pub fn i() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(GaussianRational::new(&self.re / &n, -(&self.im / &n)))
    }

    /// Principal square root when it lies in Q(i).
    pub fn sqrt(&self) -> Option<Self> {
        if self.im.is_zero() {
            if !self.re.is_negative() {
                return rational_sqrt(&self.re).map(GaussianRational::from_rational);
            }
            return rational_sqrt(&-self.re.clone())
                .map(|y| GaussianRational::new(BigRational::zero(), y));
        }
        let n = rational_sqrt(&self.norm())?;
        let two = BigRational::from_integer(2.into());
        let x = rational_sqrt(&((&self.re + &n) / &two))?;
        if x.is_zero() {
            return None;
        }
        let y = &self.im / (&two * &x);
        Some(GaussianRational::new(x, y))
    }

    /// Positive real part, or zero real part and non-negative imaginary part.
    pub fn is_principal(&self) -> bool {
        self.re.is_positive() || (self.re.is_zero() && !self.im.is_negative())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = GaussianRational::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Total order used for tie-breaking; not compatible with arithmetic.
    pub fn cmp_lex(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }

    pub fn is_integer_valued(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    /// Least common multiple of the two denominators.
    pub fn denom_lcm(&self) -> BigInt {
        num_integer::Integer::lcm(self.re.denom(), self.im.denom())
    }

    /// Text accepted by the expression parser; atomic unless both parts are nonzero.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = fmt::write(&mut s, format_args!("{}", self));
        s
    }

    pub fn needs_parens(&self) -> bool {
        !self.re.is_zero() && !self.im.is_zero()
    }
}

pub(crate) fn ratio_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // scale both to a manageable size
            let nb = q.numer().bits() as i64;
            let db = q.denom().bits() as i64;
            let shift = (nb.max(db) - 900).max(0) as u64;
            let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

fn fmt_rat(q: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_rat(&self.re, f);
        }
        let imag = |f: &mut fmt::Formatter<'_>, q: &BigRational| -> fmt::Result {
            if q.is_one() {
                write!(f, "i")
            } else if (-q.clone()).is_one() {
                write!(f, "-i")
            } else {
                fmt_rat(q, f)?;
                write!(f, "*i")
            }
        };
        if self.re.is_zero() {
            return imag(f, &self.im);
        }
        write!(f, "(")?;
        fmt_rat(&self.re, f)?;
        if self.im.is_positive() {
            write!(f, "+")?;
        }
        imag(f, &self.im)?;
        write!(f, ")")
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        GaussianRational::new(BigRational::one(), BigRational::zero())
    }
    fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        GaussianRational::from_int(n)
    }
}

impl From<BigRational> for GaussianRational {
    fn from(q: BigRational) -> Self {
        GaussianRational::from_rational(q)
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational::from_rational(&self.re * &o.re);
        }
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn div(self, o: &GaussianRational) -> GaussianRational {
        if o.im.is_zero() {
            return GaussianRational::new(&self.re / &o.re, &self.im / &o.re);
        }
        self * &o.inv().expect("division by zero in Q(i)")
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

impl<'a> Neg for &'a GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: GaussianRational) -> GaussianRational { (&self).$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, o: &GaussianRational) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, o: &GaussianRational) {
        *self = &*self * o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn sqrt_of_minus_one_is_i() {
        assert_eq!(GaussianRational::from_int(-1).sqrt(), Some(GaussianRational::i()));
    }

    #[test]
    fn sqrt_of_2i() {
        let z = GaussianRational::new(BigRational::zero(), rat(2, 1));
        let r = z.sqrt().unwrap();
        assert_eq!(&r * &r, z);
        assert!(r.is_principal());
        assert_eq!(r, GaussianRational::new(rat(1, 1), rat(1, 1)));
    }

    #[test]
    fn non_squares() {
        assert!(GaussianRational::from_int(2).sqrt().is_none());
        assert!(GaussianRational::from_int(-48).sqrt().is_none());
        assert!(GaussianRational::new(rat(1, 1), rat(1, 1)).sqrt().is_none());
    }

    #[test]
    fn inverse_and_display() {
        let z = GaussianRational::new(rat(1, 2), rat(-3, 1));
        assert!((&z * &z.inv().unwrap()).is_one());
        assert_eq!(z.to_string(), "(1/2-3*i)");
        assert_eq!(GaussianRational::i().to_string(), "i");
        assert_eq!((-GaussianRational::i()).to_string(), "-i");
        assert_eq!(GaussianRational::from_ratio(-4, 6).to_string(), "-2/3");
    }
}
