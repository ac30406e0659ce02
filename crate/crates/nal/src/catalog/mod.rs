//! Shipped algebra tables, degeneration witnesses and certificates.

mod syntax;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use nal_core::degeneration::{DegenerationWitness, FlagCondition};
use nal_core::field::{linear_coefficients, parse_expr, parse_scalar, Expr, ScalarExpr, Var};
use nal_core::tensor::{BasisChange, StructureTensor};
use sha2::{Digest, Sha256};

pub use syntax::{parse_document, render_document, render_entry, render_item};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown catalog name '{0}'")]
    UnknownName(String),
    #[error("{name}: constraint {constraint} vanishes at the given bindings")]
    ConstraintViolated { name: String, constraint: String },
    #[error("{context}: {msg}")]
    Expr { context: String, msg: String },
    #[error("{0}")]
    Io(String),
}

fn expr_err(context: impl Into<String>, e: impl fmt::Display) -> CatalogError {
    CatalogError::Expr { context: context.into(), msg: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    None,
    Commutative,
    Anticommutative,
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::None => "none",
            Symmetry::Commutative => "commutative",
            Symmetry::Anticommutative => "anticommutative",
        })
    }
}

impl FromStr for Symmetry {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "none" => Ok(Symmetry::None),
            "commutative" => Ok(Symmetry::Commutative),
            "anticommutative" => Ok(Symmetry::Anticommutative),
            _ => Err(()),
        }
    }
}

/// e_i e_j = value, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    pub i: usize,
    pub j: usize,
    pub value: String,
}

/// The entry is isomorphic to `target` at the parameter values `at`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub target: String,
    pub at: Vec<(String, String)>,
    pub witness: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: usize,
    pub symmetry: Symmetry,
    pub params: Vec<String>,
    /// Expressions required to be nonzero.
    pub constraints: Vec<String>,
    /// Identities asserted beyond the group's defining ones.
    pub claims: Vec<String>,
    pub group: Option<String>,
    /// Table printed after the e3 := e3/2 rescaling.
    pub rescaled: bool,
    pub table: Vec<Product>,
    pub relations: Vec<Relation>,
    /// Basis vectors in free symbols; every value of the symbols should be an automorphism.
    pub aut_shapes: Vec<Vec<String>>,
}

impl CatalogEntry {
    pub fn new(name: &str, dim: usize) -> Self {
        CatalogEntry {
            name: name.to_string(),
            dim,
            symmetry: Symmetry::None,
            params: Vec::new(),
            constraints: Vec::new(),
            claims: Vec::new(),
            group: None,
            rescaled: false,
            table: Vec::new(),
            relations: Vec::new(),
            aut_shapes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degeneration {
    pub label: String,
    pub from: String,
    pub to: String,
    pub index: Vec<(String, String)>,
    pub basis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nondegeneration {
    pub label: String,
    pub from: String,
    pub to: String,
    pub conditions: Vec<(usize, usize, usize)>,
    pub basis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionClaim {
    pub label: String,
    pub from: String,
    pub to: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitTable {
    pub label: String,
    pub dims: Vec<(String, usize)>,
}

/// A base algebra, a skew cocycle and the algebra its extension should give.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionCase {
    pub label: String,
    pub plus: String,
    pub plus_at: Vec<(String, String)>,
    /// Basis of the base algebra in which theta is written.
    pub frame: Option<Vec<String>>,
    /// theta(e_i, e_j) for i < j; theta(e_j, e_i) is the negative.
    pub theta: Vec<Product>,
    pub result: String,
    pub result_at: Vec<(String, String)>,
    /// Basis of the extension in which it has the result's table.
    pub witness: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection {
    pub label: String,
    pub members: Vec<(String, Vec<(String, String)>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Algebra(CatalogEntry),
    Degeneration(Degeneration),
    Nondegeneration(Nondegeneration),
    Obstruction(ObstructionClaim),
    Orbits(OrbitTable),
    Case(ExtensionCase),
    Collection(Collection),
    Basis(Vec<String>),
}

/// A single algebra block.
pub fn parse(text: &str) -> Result<CatalogEntry, CatalogError> {
    let mut items = parse_document(text)?;
    match (items.len(), items.pop()) {
        (1, Some(Item::Algebra(e))) => Ok(e),
        _ => Err(CatalogError::Syntax { line: 1, col: 1, msg: String::from("expected exactly one algebra block") }),
    }
}

pub fn render(e: &CatalogEntry) -> String {
    render_entry(e)
}

pub fn parse_bindings(map: &[(String, String)]) -> Result<BTreeMap<String, ScalarExpr>, CatalogError> {
    map.iter()
        .map(|(k, v)| parse_scalar(v).map(|s| (k.clone(), s)).map_err(|e| expr_err(format!("binding {} = {}", k, v), e)))
        .collect()
}

fn var_map(b: &BTreeMap<String, ScalarExpr>) -> BTreeMap<Var, ScalarExpr> {
    b.iter().map(|(k, v)| (Var::new(k), v.clone())).collect()
}

fn basis_names(n: usize, prefix: char) -> impl Fn(&str) -> Option<usize> {
    move |s: &str| {
        let rest = s.strip_prefix(prefix)?;
        let k: usize = rest.parse().ok()?;
        (k >= 1 && k <= n && rest == k.to_string()).then(|| k - 1)
    }
}

/// Coordinates of a vector written in e1..en.
pub fn parse_vector(text: &str, n: usize) -> Result<Vec<Expr>, String> {
    let e = parse_expr(text).map_err(|e| e.to_string())?;
    if e.is_zero_literal() {
        return Ok(vec![Expr::int(0); n]);
    }
    linear_coefficients(&e, &basis_names(n, 'e'), n).map_err(|e| e.to_string())
}

pub fn vector_scalars(text: &str, n: usize) -> Result<Vec<ScalarExpr>, CatalogError> {
    parse_vector(text, n)
        .map_err(|e| expr_err(format!("vector {}", text), e))?
        .iter()
        .map(|x| x.to_scalar().map_err(|e| expr_err(format!("vector {}", text), e)))
        .collect()
}

pub fn basis_change(rows: &[String], n: usize) -> Result<BasisChange, CatalogError> {
    if rows.len() != n {
        return Err(expr_err("basis", format!("{} vectors for dimension {}", rows.len(), n)));
    }
    Ok(BasisChange::new(rows.iter().map(|r| vector_scalars(r, n)).collect::<Result<_, _>>()?))
}

/// Expands the table, substitutes `bindings` and keeps the rest symbolic.
pub fn instantiate(entry: &CatalogEntry, bindings: &BTreeMap<String, ScalarExpr>) -> Result<StructureTensor, CatalogError> {
    let n = entry.dim;
    let vm = var_map(bindings);
    let mut constraints = Vec::new();
    for c in &entry.constraints {
        let ctx = format!("{} constraint {}", entry.name, c);
        let v = parse_scalar(c).map_err(|e| expr_err(&ctx, e))?.substitute(&vm).map_err(|e| expr_err(&ctx, e))?;
        if v.is_zero() {
            return Err(CatalogError::ConstraintViolated { name: entry.name.clone(), constraint: c.clone() });
        }
        if v.sqrt_part().is_none() && !v.numerator().is_constant() {
            constraints.push(v.numerator().clone());
        }
    }
    let mut products = Vec::new();
    for p in &entry.table {
        let ctx = format!("{} product ({},{})", entry.name, p.i, p.j);
        let v: Vec<ScalarExpr> = vector_scalars(&p.value, n)?
            .iter()
            .map(|x| x.substitute(&vm).map_err(|e| expr_err(&ctx, e)))
            .collect::<Result<_, _>>()?;
        if p.i != p.j {
            match entry.symmetry {
                Symmetry::Commutative => products.push((p.j - 1, p.i - 1, v.clone())),
                Symmetry::Anticommutative => products.push((p.j - 1, p.i - 1, v.iter().map(|x| -x).collect())),
                Symmetry::None => {}
            }
        }
        products.push((p.i - 1, p.j - 1, v));
    }
    let mut params: Vec<String> = entry.params.iter().filter(|p| !bindings.contains_key(*p)).cloned().collect();
    let mut fresh = BTreeSet::new();
    for v in bindings.values() {
        fresh.extend(v.vars().into_iter().filter(|x| !x.is_t()).map(|x| x.name().to_string()));
    }
    for f in fresh {
        if !params.contains(&f) {
            params.push(f);
        }
    }
    Ok(StructureTensor::from_products(n, &products).with_params(params, constraints))
}

impl Degeneration {
    /// Parsed witness; `allowed` are the symbols besides t that may occur.
    pub fn witness(&self, n: usize, allowed: &BTreeSet<String>) -> Result<DegenerationWitness, String> {
        let check = |e: &Expr, what: &str| -> Result<(), String> {
            for v in e.vars() {
                if v != "t" && !allowed.contains(&v) {
                    return Err(format!("{}: undefined symbol {}", what, v));
                }
            }
            Ok(())
        };
        let mut index = BTreeMap::new();
        for (k, v) in &self.index {
            let e = parse_expr(v).map_err(|e| format!("index {}: {}", k, e))?;
            check(&e, &format!("index {}", k))?;
            index.insert(k.clone(), e);
        }
        let mut basis = Vec::new();
        for (i, v) in self.basis.iter().enumerate() {
            let what = format!("E{} = {}", i + 1, v);
            let row = parse_vector(v, n).map_err(|e| format!("{}: {}", what, e))?;
            for x in &row {
                check(x, &what)?;
            }
            basis.push(row);
        }
        if basis.len() != n {
            return Err(format!("{} basis vectors for dimension {}", basis.len(), n));
        }
        Ok(DegenerationWitness { from: self.from.clone(), to: self.to.clone(), index, basis })
    }
}

impl Nondegeneration {
    pub fn flag(&self, n: usize) -> Result<FlagCondition, CatalogError> {
        Ok(FlagCondition { conditions: self.conditions.clone(), staged_basis: basis_change(&self.basis, n)? })
    }
}

impl ExtensionCase {
    /// theta as a tensor on the base algebra's dimension.
    pub fn theta_tensor(&self, n: usize) -> Result<StructureTensor, CatalogError> {
        let mut products = Vec::new();
        for p in &self.theta {
            if p.i == 0 || p.j > n || p.i >= p.j {
                return Err(expr_err(&self.label, format!("theta row ({},{}) out of range", p.i, p.j)));
            }
            let v = vector_scalars(&p.value, n)?;
            products.push((p.j - 1, p.i - 1, v.iter().map(|x| -x).collect()));
            products.push((p.i - 1, p.j - 1, v));
        }
        Ok(StructureTensor::from_products(n, &products))
    }
}

/// Shipped catalog files in load order.
pub const BUILTIN_FILES: [(&str, &str); 9] = [
    ("00-jordan.nal", include_str!("../../catalog/00-jordan.nal")),
    ("01-metabelian.nal", include_str!("../../catalog/01-metabelian.nal")),
    ("02-derived-ca.nal", include_str!("../../catalog/02-derived-ca.nal")),
    ("03-derived-jordan.nal", include_str!("../../catalog/03-derived-jordan.nal")),
    ("04-bicommutative.nal", include_str!("../../catalog/04-bicommutative.nal")),
    ("10-g1.nal", include_str!("../../catalog/10-g1.nal")),
    ("11-g2.nal", include_str!("../../catalog/11-g2.nal")),
    ("12-g3.nal", include_str!("../../catalog/12-g3.nal")),
    ("13-g4.nal", include_str!("../../catalog/13-g4.nal")),
];

pub const CATALOG_ENV: &str = "NAL_CATALOG";

#[derive(Debug, Clone)]
pub struct Catalog {
    pub items: Vec<Item>,
    pub version: String,
}

impl Catalog {
    pub fn from_sources<'a>(sources: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Catalog, CatalogError> {
        let mut items = Vec::new();
        let mut hash = Sha256::new();
        for (name, text) in sources {
            items.extend(parse_document(text).map_err(|e| match e {
                CatalogError::Syntax { line, col, msg } => CatalogError::Syntax { line, col, msg: format!("{}: {}", name, msg) },
                e => e,
            })?);
            hash.update(name.as_bytes());
            hash.update([0u8]);
            hash.update(text.as_bytes());
        }
        let digest = hash.finalize();
        let version = digest.iter().take(8).map(|b| format!("{:02x}", b)).collect();
        let cat = Catalog { items, version };
        let mut seen = BTreeSet::new();
        for e in cat.entries() {
            if !seen.insert(e.name.as_str()) {
                return Err(CatalogError::Syntax { line: 0, col: 0, msg: format!("algebra '{}' defined twice", e.name) });
            }
        }
        Ok(cat)
    }

    pub fn builtin() -> &'static Catalog {
        static CELL: OnceLock<Catalog> = OnceLock::new();
        CELL.get_or_init(|| Catalog::from_sources(BUILTIN_FILES).expect("shipped catalog parses"))
    }

    /// Every `*.nal` file of a directory, by file name.
    pub fn load_dir(dir: &Path) -> Result<Catalog, CatalogError> {
        let io = |e: std::io::Error| CatalogError::Io(format!("{}: {}", dir.display(), e));
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "nal"))
            .collect();
        files.sort();
        let mut texts = Vec::new();
        for f in &files {
            let name = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            texts.push((name, std::fs::read_to_string(f).map_err(io)?));
        }
        Catalog::from_sources(texts.iter().map(|(a, b)| (a.as_str(), b.as_str())))
    }

    /// The directory named by NAL_CATALOG, else the shipped files.
    pub fn from_env() -> Result<Catalog, CatalogError> {
        match std::env::var_os(CATALOG_ENV) {
            Some(d) if !d.is_empty() => Catalog::load_dir(Path::new(&d)),
            _ => Ok(Catalog::builtin().clone()),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.items.iter().filter_map(|i| match i {
            Item::Algebra(e) => Some(e),
            _ => None,
        })
    }

    pub fn entry(&self, name: &str) -> Result<&CatalogEntry, CatalogError> {
        self.entries().find(|e| e.name == name).ok_or_else(|| CatalogError::UnknownName(name.to_string()))
    }

    /// The named entry at parameter values written as expressions.
    pub fn tensor(&self, name: &str, at: &[(String, String)]) -> Result<StructureTensor, CatalogError> {
        instantiate(self.entry(name)?, &parse_bindings(at)?)
    }
}

pub fn builtin(name: &str) -> Result<CatalogEntry, CatalogError> {
    Catalog::builtin().entry(name).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nal_core::identities::{check_identity, IdentityName};

    #[test]
    fn builtin_catalog_loads() {
        let c = Catalog::builtin();
        assert!(c.entries().count() >= 80);
    }

    #[test]
    fn builtin_examples() {
        let j05 = builtin("J05").unwrap();
        assert_eq!(j05.symmetry, Symmetry::Commutative);
        assert_eq!(j05.table, vec![Product { i: 1, j: 2, value: "e3".into() }]);
        let t = instantiate(&builtin("Jcal05").unwrap(), &BTreeMap::new()).unwrap();
        assert_eq!(t.product(2, 2), &[ScalarExpr::from_int(-4), ScalarExpr::one(), ScalarExpr::zero()]);
        assert_eq!(t.product(0, 1), &[ScalarExpr::zero(), ScalarExpr::from_ratio(1, 2), ScalarExpr::zero()]);
        let g = instantiate(&builtin("G00").unwrap(), &BTreeMap::new()).unwrap();
        assert_eq!(g.product(1, 2)[0], ScalarExpr::one());
        assert_eq!(g.product(2, 1)[0], ScalarExpr::from_int(-1));
        assert!(matches!(builtin("X99"), Err(CatalogError::UnknownName(_))));
    }

    #[test]
    fn instantiate_binds_or_keeps_parameters() {
        let m04 = builtin("M04").unwrap();
        let two: BTreeMap<_, _> = [("alpha".to_string(), ScalarExpr::from_int(2))].into();
        let t = instantiate(&m04, &two).unwrap();
        assert!(t.params.is_empty());
        assert!(t.is_commutative());
        assert_eq!(t.product(2, 1)[1], ScalarExpr::from_int(2));
        let b16 = instantiate(&builtin("B16").unwrap(), &BTreeMap::new()).unwrap();
        assert_eq!(b16.params, vec!["alpha"]);
        assert!(check_identity(&b16, IdentityName::LeftBicommutative).unwrap().is_verified());
    }

    #[test]
    fn constraint_violation() {
        let b17 = builtin("B17").unwrap();
        let zero: BTreeMap<_, _> = [("alpha".to_string(), ScalarExpr::zero())].into();
        assert!(matches!(instantiate(&b17, &zero), Err(CatalogError::ConstraintViolated { .. })));
    }

    #[test]
    fn empty_table_is_zero_algebra() {
        let e = parse("algebra \"Z\" { dim: 3 ; symmetry: commutative }").unwrap();
        assert!(instantiate(&e, &BTreeMap::new()).unwrap().is_zero());
    }

    #[test]
    fn b04_keeps_both_orders() {
        let e = builtin("B04").unwrap();
        assert_eq!(e.symmetry, Symmetry::None);
        assert!(e.table.iter().any(|p| (p.i, p.j) == (1, 2)));
        assert!(e.table.iter().any(|p| (p.i, p.j) == (2, 1)));
    }

    #[test]
    fn every_builtin_round_trips() {
        for item in &Catalog::builtin().items {
            let text = render_item(item);
            assert_eq!(parse_document(&text).unwrap(), vec![item.clone()], "{}", text);
        }
    }

    #[test]
    fn vectors_reject_constants() {
        assert!(parse_vector("t*(t^3-1)*e2 + t + t^4*e1", 3).is_err());
        assert_eq!(parse_vector("0", 3).unwrap().len(), 3);
    }
}
