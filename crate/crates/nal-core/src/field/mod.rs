//! Exact coefficient tower: Q(i), polynomials and rational functions in named
//! parameters and `t`, and one adjoined square root per context.

mod expr;
mod gauss;
mod gcd;
mod limit;
mod numeric;
mod poly;
mod ratfunc;
mod scalar;

use alloc::string::{String, ToString};
use core::fmt;

pub use expr::{eval_scalar, linear_coefficients, parse_expr, parse_poly, parse_scalar, Expr};
pub use gauss::GaussianRational;
pub use gcd::{content_in, gcd, pseudo_rem, square_split};
pub use limit::{limit_at_zero, valuation_at_zero, Assumptions, Branch, Limit};
pub use numeric::{Cx, FRAC_BITS};
pub use poly::{Monomial, Poly, Var, T};
pub use ratfunc::RatFunc;
pub use scalar::{ScalarExpr, SqrtPart};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldError {
    ZeroDenominator,
    MixedRadicands,
    NestedRadical,
    IndeterminateValuation { coefficient: Poly },
    Pole { order: i64 },
    Parse { pos: usize, msg: String },
    Unsupported(String),
}

impl FieldError {
    pub(crate) fn parse(pos: usize, msg: &str) -> Self {
        FieldError::Parse { pos, msg: msg.to_string() }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::ZeroDenominator => write!(f, "zero denominator"),
            FieldError::MixedRadicands => write!(f, "two distinct radicands in one context"),
            FieldError::NestedRadical => write!(f, "nested radical"),
            FieldError::IndeterminateValuation { coefficient } => {
                write!(f, "valuation depends on whether {} vanishes", coefficient)
            }
            FieldError::Pole { order } => write!(f, "pole of order {}", order),
            FieldError::Parse { pos, msg } => write!(f, "parse error at {}: {}", pos, msg),
            FieldError::Unsupported(m) => write!(f, "unsupported: {}", m),
        }
    }
}

/// Canonical form of a raw quotient; idempotent.
pub fn normalize(num: Poly, den: Poly) -> Result<ScalarExpr, FieldError> {
    RatFunc::new(num, den).map(ScalarExpr::from_rat)
}

/// Simultaneous substitution of parameters.
pub fn substitute(
    x: &ScalarExpr,
    bindings: &alloc::collections::BTreeMap<Var, ScalarExpr>,
) -> Result<ScalarExpr, FieldError> {
    x.substitute(bindings)
}
