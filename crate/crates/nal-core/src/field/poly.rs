use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write};
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::gauss::GaussianRational;

/// Name of the degeneration variable.
pub const T: &str = "t";

/// A polynomial variable. Ordered by name, with `t` after every parameter.
#[derive(Clone, Debug, Hash)]
pub struct Var(pub Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }
    pub fn t() -> Self {
        Var::new(T)
    }
    pub fn name(&self) -> &str {
        &self.0
    }
    pub fn is_t(&self) -> bool {
        &*self.0 == T
    }
}

impl PartialEq for Var {
    fn eq(&self, o: &Var) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || self.0 == o.0
    }
}
impl Eq for Var {}

impl Ord for Var {
    fn cmp(&self, o: &Var) -> Ordering {
        if Arc::ptr_eq(&self.0, &o.0) {
            return Ordering::Equal;
        }
        self.is_t().cmp(&o.is_t()).then_with(|| self.0.cmp(&o.0))
    }
}
impl PartialOrd for Var {
    fn partial_cmp(&self, o: &Var) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Sparse exponent vector sorted by variable order, no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(alloc::vec![(v, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.0.iter().find(|(w, _)| w == v).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < o.0.len() {
            if j == o.0.len() || (i < self.0.len() && self.0[i].0 < o.0[j].0) {
                out.push(self.0[i].clone());
                i += 1;
            } else if i == self.0.len() || o.0[j].0 < self.0[i].0 {
                out.push(o.0[j].clone());
                j += 1;
            } else {
                out.push((self.0[i].0.clone(), self.0[i].1 + o.0[j].1));
                i += 1;
                j += 1;
            }
        }
        Monomial(out)
    }

    /// self / o when o divides self.
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (v, e) in &self.0 {
            if j < o.0.len() && o.0[j].0 < *v {
                return None;
            }
            if j < o.0.len() && o.0[j].0 == *v {
                let f = o.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((v.clone(), e - f)),
                }
            } else {
                out.push((v.clone(), *e));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn without(&self, v: &Var) -> Monomial {
        Monomial(self.0.iter().filter(|(w, _)| w != v).cloned().collect())
    }

    pub fn gcd(&self, o: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (v, e) in &self.0 {
            let f = o.degree_in(v);
            if f > 0 {
                out.push((v.clone(), (*e).min(f)));
            }
        }
        Monomial(out)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic, earlier variables more significant, `t` least.
    fn cmp(&self, o: &Monomial) -> Ordering {
        let d = self.degree().cmp(&o.degree());
        if d != Ordering::Equal {
            return d;
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), o.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((a, ea)), Some((b, eb))) => match a.cmp(b) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}
impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Monomial) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Multivariate polynomial over Q(i) with graded-lex ordered terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    pub(crate) terms: BTreeMap<Monomial, GaussianRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn var(name: &str) -> Self {
        Poly::term(Monomial::var(Var::new(name), 1), GaussianRational::one())
    }

    pub fn from_var(v: &Var) -> Self {
        Poly::term(Monomial::var(v.clone(), 1), GaussianRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Constant value when the polynomial has no variables (zero included).
    pub fn constant_value(&self) -> Option<GaussianRational> {
        if self.is_zero() {
            return Some(GaussianRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Monomial, &GaussianRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> GaussianRational {
        self.leading().map_or_else(GaussianRational::zero, |(_, c)| c.clone())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (v, _) in &m.0 {
                s.insert(v.clone());
            }
        }
        s
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.degree_in(v) > 0)
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    /// Smallest exponent of `v` among the terms.
    pub fn order_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).min().unwrap_or(0)
    }

    pub fn scale(&self, c: &GaussianRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect() }
    }

    fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Coefficients with respect to `v`, indexed by power of `v`.
    pub fn coeffs_in(&self, v: &Var) -> Vec<Poly> {
        let mut out = alloc::vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let d = m.degree_in(v) as usize;
            out[d].add_term(m.without(v), c.clone());
        }
        out
    }

    pub fn from_coeffs_in(v: &Var, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (d, c) in coeffs.iter().enumerate() {
            let m = Monomial::var(v.clone(), d as u32);
            for (k, a) in &c.terms {
                out.add_term(k.mul(&m), a.clone());
            }
        }
        out
    }

    pub fn derivative(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let d = m.degree_in(v);
            if d == 0 {
                continue;
            }
            let rest = m.without(v).mul(&Monomial::var(v.clone(), d - 1));
            out.add_term(rest, c * &GaussianRational::from_int(d as i64));
        }
        out
    }

    /// Exact quotient self / b, or None when b does not divide self.
    pub fn div_exact(&self, b: &Poly) -> Option<Poly> {
        if b.is_zero() {
            return None;
        }
        if let Some(c) = b.constant_value() {
            return Some(self.scale(&c.inv()?));
        }
        let (bm, bc) = b.leading()?;
        let bc_inv = bc.inv()?;
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((rm, rc)) = r.leading() {
            let m = rm.div(bm)?;
            let c = rc * &bc_inv;
            for (k, a) in &b.terms {
                r.add_term(k.mul(&m), -(a * &c));
            }
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Substitute a polynomial for a variable.
    pub fn subst_var(&self, v: &Var, p: &Poly) -> Poly {
        let coeffs = self.coeffs_in(v);
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * p) + c;
        }
        acc
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.inv().unwrap()),
        }
    }

    /// Greatest common monomial divisor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return Monomial::one() };
        let mut g = first.clone();
        for m in it {
            g = g.gcd(m);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Evaluate every variable by a callback, in an arbitrary commutative ring.
    pub fn eval_with<R, F>(&self, zero: R, konst: impl Fn(&GaussianRational) -> R, mut var: F) -> R
    where
        R: Clone + for<'a> Add<&'a R, Output = R> + for<'a> Mul<&'a R, Output = R>,
        F: FnMut(&Var) -> R,
    {
        let mut cache: BTreeMap<Var, R> = BTreeMap::new();
        let mut acc = zero;
        for (m, c) in &self.terms {
            let mut term = konst(c);
            for (v, e) in &m.0 {
                let base = cache.entry(v.clone()).or_insert_with(|| var(v)).clone();
                for _ in 0..*e {
                    term = term * &base;
                }
            }
            acc = acc + &term;
        }
        acc
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{}", self);
        s
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let mut coef = c.clone();
            let negative = c.is_real() && c.re < num_rational::BigRational::zero();
            if negative {
                coef = -coef;
            }
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let mut parts: Vec<String> = Vec::new();
            if !coef.is_one() || m.is_one() {
                parts.push(coef.render());
            }
            for (v, e) in &m.0 {
                if *e == 1 {
                    parts.push(String::from(v.name()));
                } else {
                    let mut p = String::new();
                    let _ = write!(p, "{}^{}", v.name(), e);
                    parts.push(p);
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let (mut big, small) = if self.terms.len() >= o.terms.len() { (self.clone(), o) } else { (o.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly { (&self).$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);
