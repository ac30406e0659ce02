//! Degeneration witnesses and non-degeneration certificates.

mod flag;
mod numeric;
mod obstruction;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::field::{limit_at_zero, Assumptions, Branch, Expr, FieldError, Poly, ScalarExpr, Var};
use crate::tensor::{change_basis, BasisChange, StructureTensor, TensorError};

pub use flag::{verify_nondeg_certificate, FlagCondition, NondegError, NondegOutcome, SubspaceWitness};
pub use numeric::{NumericEvidence, DEFAULT_SAMPLES, T_EXPONENTS};
pub use obstruction::{check_semicontinuity_obstruction, chirality, self_opposite_witness, Chirality, Obstruction};

/// Parametrized basis and index taking `from` to `to` at t = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegenerationWitness {
    pub from: String,
    pub to: String,
    pub index: BTreeMap<String, Expr>,
    /// Row i holds the coordinates of E_i in the old basis.
    pub basis: Vec<Vec<Expr>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DegenerationError {
    Field(FieldError),
    Tensor(TensorError),
}

impl From<FieldError> for DegenerationError {
    fn from(e: FieldError) -> Self {
        DegenerationError::Field(e)
    }
}

impl From<TensorError> for DegenerationError {
    fn from(e: TensorError) -> Self {
        DegenerationError::Tensor(e)
    }
}

impl fmt::Display for DegenerationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegenerationError::Field(e) => write!(f, "{}", e),
            DegenerationError::Tensor(e) => write!(f, "{}", e),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    pub numeric_only: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DegenerationOutcome {
    VerifiedExact { branch: Option<Branch>, side_conditions: Vec<Poly> },
    VerifiedNumeric(NumericEvidence),
    Refuted { entry: (usize, usize, usize), found: String, expected: String },
    Inconclusive(String),
}

impl DegenerationOutcome {
    pub fn is_verified(&self) -> bool {
        matches!(self, DegenerationOutcome::VerifiedExact { .. } | DegenerationOutcome::VerifiedNumeric(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            DegenerationOutcome::VerifiedExact { .. } => "verified_exact",
            DegenerationOutcome::VerifiedNumeric(_) => "verified_numeric",
            DegenerationOutcome::Refuted { .. } => "refuted",
            DegenerationOutcome::Inconclusive(_) => "inconclusive",
        }
    }
}

fn note_radicand(x: &ScalarExpr, seen: &mut Option<Arc<Poly>>) -> Result<(), FieldError> {
    if let Some(r) = x.radicand() {
        match seen {
            Some(s) if **s != **r => return Err(FieldError::MixedRadicands),
            Some(_) => {}
            None => *seen = Some(r.clone()),
        }
    }
    Ok(())
}

/// Exact basis over the t-field.
pub fn witness_basis(w: &DegenerationWitness) -> Result<BasisChange, FieldError> {
    let rows = w.basis.iter().map(|r| r.iter().map(Expr::to_scalar).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?;
    Ok(BasisChange::new(rows))
}

/// Structure constants of `from` (index substituted) in the parametrized basis.
pub fn transported_constants(from: &StructureTensor, w: &DegenerationWitness) -> Result<StructureTensor, DegenerationError> {
    let mut seen = None;
    let mut bindings = BTreeMap::new();
    for (k, e) in &w.index {
        let s = e.to_scalar()?;
        note_radicand(&s, &mut seen)?;
        bindings.insert(Var::new(k), s);
    }
    for x in from.entries() {
        note_radicand(x, &mut seen)?;
    }
    let basis = witness_basis(w)?;
    for x in basis.matrix.iter().flatten() {
        note_radicand(x, &mut seen)?;
    }
    if basis.dim() != from.dim() || basis.matrix.iter().any(|r| r.len() != from.dim()) {
        return Err(TensorError::DimensionMismatch { expected: from.dim(), found: basis.dim() }.into());
    }
    let a = if bindings.is_empty() { from.clone() } else { from.substitute(&bindings)? };
    Ok(change_basis(&a, &basis)?)
}

enum Exact {
    Verified(Vec<Poly>),
    Refuted((usize, usize, usize), String, String),
    Blocked(String),
}

fn exact_at_branch(c: &StructureTensor, to: &StructureTensor, assume: &Assumptions, branch: Branch) -> Exact {
    let n = c.dim();
    let mut side: Vec<Poly> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = c.get(i, j, k);
                let target = to.get(i, j, k);
                let lim = match limit_at_zero(x, assume, branch) {
                    Ok(l) => l,
                    Err(FieldError::Pole { order }) => {
                        return Exact::Refuted((i, j, k), format!("pole of order {}", order), target.render())
                    }
                    Err(e) => return Exact::Blocked(format!("e{}e{} coefficient {}: {}", i + 1, j + 1, k + 1, e)),
                };
                match lim.value.try_sub(target) {
                    Ok(d) if d.is_zero() => {}
                    Ok(_) if lim.symbolic_root => {
                        return Exact::Blocked(format!("symbolic root in limit {}", lim.value.render()))
                    }
                    Ok(_) => return Exact::Refuted((i, j, k), lim.value.render(), target.render()),
                    Err(e) => return Exact::Blocked(format!("{}", e)),
                }
                for p in lim.side_conditions {
                    if !side.contains(&p) {
                        side.push(p);
                    }
                }
            }
        }
    }
    Exact::Verified(side)
}

fn exact_path(from: &StructureTensor, to: &StructureTensor, w: &DegenerationWitness) -> Result<DegenerationOutcome, String> {
    let c = match transported_constants(from, w) {
        Ok(c) => c,
        Err(DegenerationError::Tensor(TensorError::SingularMatrix { .. })) => {
            return Ok(DegenerationOutcome::Inconclusive(String::from("parametrized basis is singular")))
        }
        Err(e) => return Err(format!("{}", e)),
    };
    let mut nonzero = to.constraints.clone();
    nonzero.extend(c.constraints.iter().cloned());
    let assume = Assumptions::new(nonzero);
    let radical = c.entries().iter().any(|x| x.sqrt_part().is_some());
    let branches: &[Branch] = if radical { &[Branch::Principal, Branch::Conjugate] } else { &[Branch::Principal] };
    let mut refuted = None;
    let mut blocked = None;
    for &b in branches {
        match exact_at_branch(&c, to, &assume, b) {
            Exact::Verified(side) => {
                return Ok(DegenerationOutcome::VerifiedExact { branch: radical.then_some(b), side_conditions: side })
            }
            Exact::Refuted(entry, found, expected) => {
                refuted.get_or_insert(DegenerationOutcome::Refuted { entry, found, expected });
            }
            Exact::Blocked(r) => {
                blocked.get_or_insert(r);
            }
        }
    }
    match (blocked, refuted) {
        (Some(r), _) => Err(r),
        (None, Some(o)) => Ok(o),
        (None, None) => Err(String::from("no branch")),
    }
}

/// Exact verification first; numeric evaluation when exactness is blocked.
pub fn verify_degeneration(
    from: &StructureTensor,
    to: &StructureTensor,
    w: &DegenerationWitness,
    opts: VerifyOptions,
) -> DegenerationOutcome {
    if from.dim() != to.dim() || w.basis.len() != from.dim() {
        return DegenerationOutcome::Inconclusive(format!(
            "dimension mismatch: {} -> {} with {} basis vectors",
            from.dim(),
            to.dim(),
            w.basis.len()
        ));
    }
    let mut reason = None;
    if !opts.numeric_only {
        match exact_path(from, to, w) {
            Ok(o) => return o,
            Err(r) => reason = Some(r),
        }
    }
    match numeric::verify(from, to, w) {
        Ok(ev) => DegenerationOutcome::VerifiedNumeric(ev),
        Err(r) => DegenerationOutcome::Inconclusive(match reason {
            Some(ex) => format!("{}; numeric: {}", ex, r),
            None => r,
        }),
    }
}

#[cfg(test)]
mod tests;
