use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::gauss::GaussianRational;
use super::gcd::square_split;
use super::numeric::Cx;
use super::poly::{Poly, Var};
use super::ratfunc::RatFunc;
use super::scalar::ScalarExpr;
use super::FieldError;

/// Parsed scalar expression, kept so the numeric path can re-evaluate it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    I,
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, FieldError> {
    let mut out = Vec::new();
    let b = src.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let s = i;
            while i < b.len() && (b[i] as char).is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = src[s..i].parse().map_err(|_| FieldError::parse(s, "bad integer"))?;
            out.push((s, Tok::Num(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((s, Tok::Ident(src[s..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(FieldError::parse(i, &format!("unexpected character '{}'", c)));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FieldError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(FieldError::parse(self.at(), &format!("expected '{}'", c)))
        }
    }

    fn expr(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, FieldError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, FieldError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = if self.eat('-') {
                Expr::Neg(Box::new(self.primary()?))
            } else {
                self.primary()?
            };
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, FieldError> {
        let at = self.at();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "sqrt" {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Sqrt(Box::new(e)));
                }
                if name == "i" {
                    return Ok(Expr::I);
                }
                Ok(Expr::Var(name))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(FieldError::parse(at, "expected a number, identifier or '('")),
        }
    }
}

/// Parse the scalar grammar into an expression tree.
pub fn parse_expr(src: &str) -> Result<Expr, FieldError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(FieldError::parse(p.at(), "trailing input"));
    }
    Ok(e)
}

/// Parse and convert to the exact tower.
pub fn parse_scalar(src: &str) -> Result<ScalarExpr, FieldError> {
    parse_expr(src)?.to_scalar()
}

/// Parse an expression that must be a polynomial.
pub fn parse_poly(src: &str) -> Result<Poly, FieldError> {
    let s = parse_scalar(src)?;
    match s.as_rat() {
        Some(r) if r.is_polynomial() => Ok(r.num().clone()),
        _ => Err(FieldError::Unsupported("expected a polynomial".to_string())),
    }
}

/// Exponent as p/q with q in {1, 2}.
fn exponent(e: &Expr) -> Result<(i64, u32), FieldError> {
    let s = e.to_scalar()?;
    let c = s.constant_value().ok_or_else(|| FieldError::Unsupported("non-constant exponent".to_string()))?;
    use num_traits::ToPrimitive;
    if !c.is_real() {
        return Err(FieldError::Unsupported("complex exponent".to_string()));
    }
    let n = c.re.numer().to_i64().ok_or_else(|| FieldError::Unsupported("exponent too large".to_string()))?;
    let d = c.re.denom().to_u32().unwrap_or(0);
    if d == 1 || d == 2 {
        Ok((n, d))
    } else {
        Err(FieldError::Unsupported(format!("fractional power {}", c)))
    }
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Int(BigInt::from(n))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Int(n) if n.is_zero())
    }

    /// Exact conversion; fails on fractional powers other than halves and on mixed radicands.
    pub fn to_scalar(&self) -> Result<ScalarExpr, FieldError> {
        Ok(match self {
            Expr::Int(n) => ScalarExpr::constant(GaussianRational::from_rational(num_rational::BigRational::from_integer(n.clone()))),
            Expr::I => ScalarExpr::i(),
            Expr::Var(v) => ScalarExpr::var(v),
            Expr::Neg(a) => -a.to_scalar()?,
            Expr::Add(a, b) => a.to_scalar()?.try_add(&b.to_scalar()?)?,
            Expr::Sub(a, b) => a.to_scalar()?.try_sub(&b.to_scalar()?)?,
            Expr::Mul(a, b) => a.to_scalar()?.try_mul(&b.to_scalar()?)?,
            Expr::Div(a, b) => {
                let d = b.to_scalar()?;
                if d.is_zero() {
                    return Err(FieldError::ZeroDenominator);
                }
                a.to_scalar()?.try_div(&d)?
            }
            Expr::Sqrt(a) => ScalarExpr::sqrt(&a.to_scalar()?)?,
            Expr::Pow(b, e) => {
                let (n, d) = exponent(e)?;
                let base = b.to_scalar()?;
                if d == 1 {
                    base.powi(n)?
                } else {
                    ScalarExpr::sqrt(&base)?.powi(n)?
                }
            }
        })
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    fn collect_vars(&self, s: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                s.insert(v.clone());
            }
            Expr::Neg(a) | Expr::Sqrt(a) => a.collect_vars(s),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_vars(s);
                b.collect_vars(s);
            }
            _ => {}
        }
    }

    pub fn has_radical(&self) -> bool {
        match self {
            Expr::Sqrt(_) => true,
            Expr::Pow(b, e) => b.has_radical() || exponent(e).map_or(true, |(_, d)| d != 1),
            Expr::Neg(a) => a.has_radical(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.has_radical() || b.has_radical(),
            _ => false,
        }
    }

    /// Replace variables by expressions.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        let r = |a: &Expr| Box::new(a.substitute(map));
        match self {
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(r(a)),
            Expr::Sqrt(a) => Expr::Sqrt(r(a)),
            Expr::Add(a, b) => Expr::Add(r(a), r(b)),
            Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
            Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
            Expr::Div(a, b) => Expr::Div(r(a), r(b)),
            Expr::Pow(a, b) => Expr::Pow(r(a), b.clone()),
            _ => self.clone(),
        }
    }

    /// Distinct radical keys, in first-occurrence order.
    pub fn radical_keys(&self, out: &mut Vec<String>) {
        match self {
            Expr::Sqrt(a) => {
                a.radical_keys(out);
                push_unique(out, radical_key(a));
            }
            Expr::Pow(b, e) => {
                b.radical_keys(out);
                if exponent(e).is_ok_and(|(_, d)| d == 2) {
                    push_unique(out, radical_key(b));
                }
            }
            Expr::Neg(a) => a.radical_keys(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.radical_keys(out);
                b.radical_keys(out);
            }
            _ => {}
        }
    }

    /// High-precision evaluation. `env` supplies variable values, `sign` the branch per radical key.
    pub fn eval(&self, env: &dyn Fn(&str) -> Option<Cx>, sign: &dyn Fn(&str) -> bool) -> Result<Cx, FieldError> {
        Ok(match self {
            Expr::Int(n) => Cx::from_rational(&num_rational::BigRational::from_integer(n.clone())),
            Expr::I => Cx::from_gauss(&GaussianRational::i()),
            Expr::Var(v) => env(v).ok_or_else(|| FieldError::Unsupported(format!("unbound variable {}", v)))?,
            Expr::Neg(a) => -&a.eval(env, sign)?,
            Expr::Add(a, b) => &a.eval(env, sign)? + &b.eval(env, sign)?,
            Expr::Sub(a, b) => &a.eval(env, sign)? - &b.eval(env, sign)?,
            Expr::Mul(a, b) => &a.eval(env, sign)? * &b.eval(env, sign)?,
            Expr::Div(a, b) => a.eval(env, sign)?.div(&b.eval(env, sign)?).ok_or(FieldError::ZeroDenominator)?,
            Expr::Sqrt(a) => eval_root(a, env, sign)?,
            Expr::Pow(b, e) => {
                let (n, d) = exponent(e)?;
                if d == 1 {
                    b.eval(env, sign)?.powi(n).ok_or(FieldError::ZeroDenominator)?
                } else {
                    eval_root(b, env, sign)?.powi(n).ok_or(FieldError::ZeroDenominator)?
                }
            }
        })
    }
}

fn push_unique(out: &mut Vec<String>, k: String) {
    if !out.contains(&k) {
        out.push(k);
    }
}

/// Canonical square-free radicand of an exactly convertible expression.
fn split_exact(a: &Expr) -> Option<(RatFunc, Poly)> {
    let s = a.to_scalar().ok()?;
    let r = s.as_rat()?;
    let (h, f) = square_split(&(r.num() * r.den()));
    Some((RatFunc::new(h, r.den().clone()).ok()?, f))
}

fn radical_key(a: &Expr) -> String {
    match split_exact(a) {
        Some((_, f)) => f.render(),
        None => a.to_string(),
    }
}

fn eval_root(a: &Expr, env: &dyn Fn(&str) -> Option<Cx>, sign: &dyn Fn(&str) -> bool) -> Result<Cx, FieldError> {
    let flip = !sign(&radical_key(a));
    let v = match split_exact(a) {
        Some((h, f)) => {
            let mut lookup = |v: &Var| env(v.name()).unwrap_or_else(Cx::zero);
            for v in f.vars().iter().chain(h.vars().iter()) {
                if env(v.name()).is_none() {
                    return Err(FieldError::Unsupported(format!("unbound variable {}", v.name())));
                }
            }
            let hv = Cx::eval_rat(&h, &mut lookup).ok_or(FieldError::ZeroDenominator)?;
            let fv = Cx::eval_poly(&f, &mut lookup);
            &hv * &fv.sqrt()
        }
        None => a.eval(env, sign)?.sqrt(),
    };
    Ok(if flip { -&v } else { v })
}

/// Numeric value of an exact scalar; the radical takes the principal root unless `flip`.
pub fn eval_scalar(x: &ScalarExpr, env: &dyn Fn(&str) -> Option<Cx>, flip: bool) -> Result<Cx, FieldError> {
    let mut lookup = |v: &Var| env(v.name()).unwrap_or_else(Cx::zero);
    let a = Cx::eval_rat(x.rational_part(), &mut lookup).ok_or(FieldError::ZeroDenominator)?;
    match x.sqrt_part() {
        None => Ok(a),
        Some(sp) => {
            let b = Cx::eval_rat(&sp.coeff, &mut lookup).ok_or(FieldError::ZeroDenominator)?;
            let mut s = Cx::eval_poly(&sp.radicand, &mut lookup).sqrt();
            if flip {
                s = -&s;
            }
            Ok(&a + &(&b * &s))
        }
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({})", e)
    } else {
        write!(f, "{}", e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{}", n),
            Expr::I => write!(f, "i"),
            Expr::Var(v) => write!(f, "{}", v),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 3)
            }
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " + ")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " - ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 4)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, 5)?;
                write!(f, "^")?;
                match **b {
                    Expr::Int(_) => write!(f, "{}", b),
                    _ => write!(f, "({})", b),
                }
            }
            Expr::Sqrt(a) => write!(f, "sqrt({})", a),
        }
    }
}

/// Split a linear combination of basis symbols into coefficient expressions.
pub fn linear_coefficients(e: &Expr, basis: &dyn Fn(&str) -> Option<usize>, n: usize) -> Result<Vec<Expr>, FieldError> {
    let v = lin(e, basis, n)?;
    match v {
        Lin::Scalar(s) if s.is_zero_literal() => Ok(alloc::vec![Expr::int(0); n]),
        Lin::Scalar(_) => Err(FieldError::Unsupported("expected a vector".to_string())),
        Lin::Vector(c) => Ok(c.into_iter().map(|x| x.unwrap_or_else(|| Expr::int(0))).collect()),
    }
}

enum Lin {
    Scalar(Expr),
    Vector(Vec<Option<Expr>>),
}

fn combine(a: Vec<Option<Expr>>, b: Vec<Option<Expr>>, sub: bool) -> Vec<Option<Expr>> {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (None, None) => None,
            (Some(x), None) => Some(x),
            (None, Some(y)) => Some(if sub { Expr::Neg(Box::new(y)) } else { y }),
            (Some(x), Some(y)) => Some(if sub { Expr::Sub(Box::new(x), Box::new(y)) } else { Expr::Add(Box::new(x), Box::new(y)) }),
        })
        .collect()
}

fn scale_vec(v: Vec<Option<Expr>>, s: &Expr, left: bool) -> Vec<Option<Expr>> {
    v.into_iter()
        .map(|x| {
            x.map(|x| {
                if let Expr::Int(n) = &x {
                    if n.is_one() {
                        return s.clone();
                    }
                }
                if left {
                    Expr::Mul(Box::new(s.clone()), Box::new(x))
                } else {
                    Expr::Mul(Box::new(x), Box::new(s.clone()))
                }
            })
        })
        .collect()
}

fn lin(e: &Expr, basis: &dyn Fn(&str) -> Option<usize>, n: usize) -> Result<Lin, FieldError> {
    let bad = || FieldError::Unsupported("not linear in the basis vectors".to_string());
    Ok(match e {
        Expr::Var(v) => match basis(v) {
            Some(k) => {
                let mut c = alloc::vec![None; n];
                c[k] = Some(Expr::int(1));
                Lin::Vector(c)
            }
            None => Lin::Scalar(e.clone()),
        },
        Expr::Neg(a) => match lin(a, basis, n)? {
            Lin::Scalar(_) => Lin::Scalar(e.clone()),
            Lin::Vector(c) => Lin::Vector(c.into_iter().map(|x| x.map(|x| Expr::Neg(Box::new(x)))).collect()),
        },
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let sub = matches!(e, Expr::Sub(..));
            match (lin(a, basis, n)?, lin(b, basis, n)?) {
                (Lin::Scalar(_), Lin::Scalar(_)) => Lin::Scalar(e.clone()),
                (Lin::Vector(x), Lin::Vector(y)) => Lin::Vector(combine(x, y, sub)),
                _ => return Err(bad()),
            }
        }
        Expr::Mul(a, b) => match (lin(a, basis, n)?, lin(b, basis, n)?) {
            (Lin::Scalar(_), Lin::Scalar(_)) => Lin::Scalar(e.clone()),
            (Lin::Scalar(s), Lin::Vector(v)) => Lin::Vector(scale_vec(v, &s, true)),
            (Lin::Vector(v), Lin::Scalar(s)) => Lin::Vector(scale_vec(v, &s, false)),
            _ => return Err(bad()),
        },
        Expr::Div(a, b) => match (lin(a, basis, n)?, lin(b, basis, n)?) {
            (Lin::Scalar(_), Lin::Scalar(_)) => Lin::Scalar(e.clone()),
            (Lin::Vector(v), Lin::Scalar(s)) => Lin::Vector(
                v.into_iter().map(|x| x.map(|x| Expr::Div(Box::new(x), Box::new(s.clone())))).collect(),
            ),
            _ => return Err(bad()),
        },
        _ => {
            if e.vars().iter().any(|v| basis(v).is_some()) {
                return Err(bad());
            }
            Lin::Scalar(e.clone())
        }
    })
}
