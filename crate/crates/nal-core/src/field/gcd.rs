use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gauss::GaussianRational;
use super::poly::{Monomial, Poly, Var};

/// Monic greatest common divisor over Q(i).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let m = ma.gcd(&mb);
    let a1 = strip_monomial(a, &ma);
    let b1 = strip_monomial(b, &mb);
    let g = gcd_inner(&a1, &b1);
    g.mul_monomial(&m).monic()
}

fn strip_monomial(p: &Poly, m: &Monomial) -> Poly {
    if m.is_one() {
        return p.clone();
    }
    Poly { terms: p.terms().map(|(k, c)| (k.div(m).unwrap(), c.clone())).collect() }
}

fn gcd_inner(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if b.is_monomial() || a.is_monomial() {
        // monomial contents were removed, so a monomial here is a constant multiple of 1
        return Poly::one();
    }
    let va = a.vars();
    let vb = b.vars();
    let shared: Vec<&Var> = va.intersection(&vb).collect();
    let Some(v) = shared.into_iter().next_back().cloned() else {
        return Poly::one();
    };
    if let Some(w) = va.iter().find(|w| !vb.contains(w)) {
        return gcd_inner(&content_in(a, w), b);
    }
    if let Some(w) = vb.iter().find(|w| !va.contains(w)) {
        return gcd_inner(a, &content_in(b, w));
    }
    let ca = content_in(a, &v);
    let cb = content_in(b, &v);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = primitive_prs(&pa, &pb, &v);
    (&c * &g).monic()
}

/// GCD of the coefficients with respect to `v`.
pub fn content_in(p: &Poly, v: &Var) -> Poly {
    let mut g = Poly::zero();
    for c in p.coeffs_in(v) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    if g.is_zero() {
        Poly::one()
    } else {
        g
    }
}

pub fn primitive_part(p: &Poly, v: &Var) -> Poly {
    if p.is_zero() {
        return Poly::zero();
    }
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides").monic()
}

/// Pseudo-remainder of f by g as polynomials in `v`.
pub fn pseudo_rem(f: &Poly, g: &Poly, v: &Var) -> Poly {
    let dg = g.degree_in(v);
    let gc = g.coeffs_in(v);
    let lc = &gc[dg as usize];
    let mut r = f.clone();
    if dg == 0 {
        return Poly::zero();
    }
    while !r.is_zero() && r.degree_in(v) >= dg {
        let dr = r.degree_in(v);
        let lr = r.coeffs_in(v).swap_remove(dr as usize);
        let shift = Monomial::var(v.clone(), dr - dg);
        r = &(lc * &r) - &(&lr * g).mul_monomial(&shift);
    }
    r
}

fn primitive_prs(a: &Poly, b: &Poly, v: &Var) -> Poly {
    let (mut f, mut g) = if a.degree_in(v) >= b.degree_in(v) {
        (a.monic(), b.monic())
    } else {
        (b.monic(), a.monic())
    };
    loop {
        if g.is_zero() {
            return primitive_part(&f, v);
        }
        if g.degree_in(v) == 0 {
            return Poly::one();
        }
        let r = pseudo_rem(&f, &g, v);
        f = g;
        g = primitive_part(&r, v);
    }
}

/// Split f = h^2 * r with r square-free; constant squares move into h.
pub fn square_split(f: &Poly) -> (Poly, Poly) {
    if f.is_zero() {
        return (Poly::zero(), Poly::one());
    }
    let mut h = Poly::one();
    let mut r = Poly::one();
    let m = f.monomial_content();
    let mut hm = Vec::new();
    let mut rm = Vec::new();
    for (v, e) in &m.0 {
        if e / 2 > 0 {
            hm.push((v.clone(), e / 2));
        }
        if e % 2 == 1 {
            rm.push((v.clone(), 1));
        }
    }
    h = h.mul_monomial(&Monomial(hm));
    r = r.mul_monomial(&Monomial(rm));
    let rest = strip_monomial(f, &m);
    let (h2, r2, k) = split_rec(&rest);
    let (hk, rk) = split_constant(&k);
    h = (&h * &h2).scale(&hk);
    r = (&r * &r2).scale(&rk);
    (h, r)
}

/// Returns (h, r, k) with f = k * h^2 * r, h and r monic.
fn split_rec(f: &Poly) -> (Poly, Poly, GaussianRational) {
    if let Some(c) = f.constant_value() {
        return (Poly::one(), Poly::one(), c);
    }
    let v = f.vars().into_iter().next_back().unwrap();
    let c = content_in(f, &v);
    let p = f.div_exact(&c).unwrap();
    let factors = yun(&p, &v);
    let mut prod = Poly::one();
    let mut h = Poly::one();
    let mut r = Poly::one();
    for (i, a) in factors.iter().enumerate() {
        let mult = (i + 1) as u32;
        prod = &prod * &a.pow(mult);
        h = &h * &a.pow(mult / 2);
        if mult % 2 == 1 {
            r = &r * a;
        }
    }
    let kp = p.div_exact(&prod).and_then(|q| q.constant_value()).expect("yun factors multiply back");
    let (hc, rc, kc) = split_rec(&c);
    (&h * &hc, &r * &rc, &kp * &kc)
}

/// Square-free factors a_1, a_2, ... with p = const * prod a_i^i, for p primitive in v.
fn yun(p: &Poly, v: &Var) -> Vec<Poly> {
    let mut out = Vec::new();
    let dp = p.derivative(v);
    let c = gcd(p, &dp);
    let mut w = p.div_exact(&c).unwrap();
    let mut y = dp.div_exact(&c).unwrap();
    let mut z = &y - &w.derivative(v);
    while !w.is_constant() {
        let g = gcd(&w, &z);
        out.push(g.monic());
        w = w.div_exact(&g).unwrap();
        y = z.div_exact(&g).unwrap();
        z = &y - &w.derivative(v);
    }
    out
}

/// c = h^2 * r with r a reduced representative.
pub fn split_constant(c: &GaussianRational) -> (GaussianRational, GaussianRational) {
    if c.is_zero() {
        return (GaussianRational::zero(), GaussianRational::one());
    }
    if let Some(s) = c.sqrt() {
        return (s, GaussianRational::one());
    }
    if !c.is_real() {
        return (GaussianRational::one(), c.clone());
    }
    let neg = c.re.is_negative();
    let q = c.re.abs();
    let m = q.numer() * q.denom();
    let (s, k) = split_integer(&m);
    let mut h = GaussianRational::from_rational(BigRational::new(s, q.denom().clone()));
    if neg {
        h = &h * &GaussianRational::i();
    }
    (h, GaussianRational::from_rational(BigRational::from_integer(k)))
}

/// m = s^2 * k with small square factors removed.
fn split_integer(m: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut k = m.clone();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(10_000u32);
    while &p * &p <= k && p <= limit {
        let p2 = &p * &p;
        while (&k % &p2).is_zero() {
            k /= &p2;
            s *= &p;
        }
        p += 1u32;
    }
    let r = k.sqrt();
    if &r * &r == k {
        s *= &r;
        k = BigInt::one();
    }
    (s, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_poly;

    fn p(s: &str) -> Poly {
        parse_poly(s).unwrap()
    }

    #[test]
    fn univariate_gcd() {
        let a = &p("t - 1") * &p("t + 2");
        let b = &p("t - 1") * &p("t - 3");
        assert_eq!(gcd(&a, &b), p("t - 1"));
    }

    #[test]
    fn multivariate_gcd() {
        let g = p("alpha*t + beta - 1");
        let a = &g * &p("alpha^2 + t");
        let b = &g * &p("beta*t - alpha + 2");
        assert_eq!(gcd(&a, &b), g.monic());
        assert_eq!(gcd(&p("alpha + t"), &p("alpha - t")), Poly::one());
    }

    #[test]
    fn gcd_with_monomials() {
        assert_eq!(gcd(&p("t^2 + t"), &p("t^3")), p("t"));
        assert_eq!(gcd(&p("2*alpha*t^2"), &p("4*alpha^2*t")), p("alpha*t"));
    }

    #[test]
    fn gaussian_factors() {
        let a = p("t^2 + 1");
        let b = p("t - i");
        assert_eq!(gcd(&a, &b), b);
    }

    #[test]
    fn square_split_cube() {
        let f = p("9*alpha - 12").pow(3);
        let (h, r) = square_split(&f);
        assert_eq!(&(&h * &h) * &r, f);
        assert_eq!(r.total_degree(), 1);
    }

    #[test]
    fn square_split_constants() {
        let (h, r) = square_split(&p("2*t^3"));
        assert_eq!(h, p("t"));
        assert_eq!(r, p("2*t"));
        let (h, r) = square_split(&p("-48"));
        assert_eq!(&(&h * &h) * &r, p("-48"));
        assert_eq!(r, p("3"));
        let (h, r) = square_split(&p("-4*t - 4"));
        assert_eq!(&(&h * &h) * &r, p("-4*t - 4"));
        assert_eq!(r, p("t + 1"));
    }
}
