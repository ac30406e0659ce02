use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nal_core::degeneration::{check_semicontinuity_obstruction, verify_degeneration, verify_nondeg_certificate, DegenerationOutcome, NondegOutcome, VerifyOptions};
use nal_core::identities::{check_identity, IdentityError, IdentityName, IdentityOutcome};
use nal_core::invariants::{fingerprint, orbit_dimension};
use nal_core::isomorphism::{certify_noniso, search_isomorphism, verify_witness, NonIsoOutcome, SearchOutcome, WitnessOutcome};
use nal_core::tensor::{render_vector, BasisChange, StructureTensor};
use serde_json::json;

use nal::catalog::{basis_change, instantiate, parse_bindings, parse_document, Catalog, Item};
use nal::report::Outcome;
use nal::reproduce::{reproduce, Options, TheoremId, DEFAULT_BUDGET};

const INPUT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "nal", version, about = "Checks identities, isomorphisms and degenerations of small algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one identity on the algebra in a catalog file
    Check {
        file: PathBuf,
        #[arg(long)]
        identity: IdentityName,
    },
    /// Print the invariant fingerprint of the algebra in a catalog file
    Invariants {
        file: PathBuf,
        /// Parameter binding k=v, repeatable
        #[arg(long = "at", value_name = "K=V")]
        at: Vec<String>,
    },
    /// Decide whether two algebras (catalog names or files) are isomorphic
    Iso {
        a: String,
        b: String,
        #[arg(long, conflicts_with = "search")]
        witness: Option<PathBuf>,
        #[arg(long)]
        search: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Degeneration witnesses and certificates
    Deg {
        #[command(subcommand)]
        command: DegCommand,
    },
    /// Run every check of one statement and write a JSON report
    Reproduce {
        id: String,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Record wall-clock time per item
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Subcommand)]
enum DegCommand {
    /// Verify a degeneration block
    Verify {
        file: PathBuf,
        #[arg(long)]
        numeric_only: bool,
    },
    /// Verify a non-degeneration certificate or invariant obstruction
    Forbid {
        from: String,
        to: String,
        #[arg(long)]
        cert: PathBuf,
    },
}

struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

fn read_items(path: &Path) -> Result<Vec<Item>, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| Fail(format!("{}: {}", path.display(), e)))?;
    parse_document(&text).map_err(|e| Fail(format!("{}: {}", path.display(), e)))
}

/// Catalog plus the algebras defined in `extra`.
fn catalog_with(extra: &[Item]) -> Result<Catalog, Fail> {
    let mut cat = Catalog::from_env()?;
    for i in extra {
        if let Item::Algebra(e) = i {
            cat.items.retain(|x| !matches!(x, Item::Algebra(y) if y.name == e.name));
            cat.items.push(i.clone());
        }
    }
    Ok(cat)
}

fn single_algebra(path: &Path, at: &[String]) -> Result<StructureTensor, Fail> {
    let items = read_items(path)?;
    let mut algebras = items.iter().filter_map(|i| match i {
        Item::Algebra(e) => Some(e),
        _ => None,
    });
    let (Some(e), None) = (algebras.next(), algebras.next()) else {
        return Err(Fail(format!("{}: expected exactly one algebra block", path.display())));
    };
    let pairs: Vec<(String, String)> = at
        .iter()
        .map(|b| b.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())).ok_or_else(|| Fail(format!("binding '{}' is not k=v", b))))
        .collect::<Result<_, _>>()?;
    Ok(instantiate(e, &parse_bindings(&pairs)?)?)
}

/// A catalog name or a file holding one algebra.
fn algebra_arg(cat: &Catalog, s: &str) -> Result<StructureTensor, Fail> {
    if Path::new(s).is_file() {
        single_algebra(Path::new(s), &[])
    } else {
        Ok(cat.tensor(s, &[])?)
    }
}

fn witness_arg(path: &Path, n: usize) -> Result<BasisChange, Fail> {
    for i in read_items(path)? {
        if let Item::Basis(rows) = i {
            return Ok(basis_change(&rows, n)?);
        }
    }
    Err(Fail(format!("{}: no basis block", path.display())))
}

fn code(o: Outcome) -> u8 {
    o.exit_code() as u8
}

fn check(file: &Path, id: IdentityName) -> Result<u8, Fail> {
    let a = single_algebra(file, &[])?;
    Ok(match check_identity(&a, id) {
        Ok(IdentityOutcome::Verified) => {
            println!("verified: {}", id.as_str());
            code(Outcome::Verified)
        }
        Ok(IdentityOutcome::Refuted { witness, discrepancy }) => {
            let args: Vec<String> = witness.iter().map(|v| render_vector(v)).collect();
            println!("refuted: {} fails at ({}) by {}", id.as_str(), args.join(", "), render_vector(&discrepancy));
            code(Outcome::Refuted)
        }
        Err(IdentityError::ParameterConditional { critical }) => {
            println!("inconclusive: {} holds only where {} = 0", id.as_str(), critical);
            code(Outcome::Inconclusive)
        }
        Err(e) => return Err(e.into()),
    })
}

fn invariants(file: &Path, at: &[String]) -> Result<u8, Fail> {
    let a = single_algebra(file, at)?;
    let f = fingerprint(&a)?;
    let out = json!({
        "dim_derived": f.dim_derived,
        "dim_derived_squared": f.dim_derived_squared,
        "dim_annihilator": f.dim_annihilator,
        "dim_derivations": f.dim_derivations,
        "orbit_dimension": orbit_dimension(&a),
        "varieties": f.identity_bits.names(),
        "derived_class": f.derived_iso_class,
        "params": a.params,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn iso(a: &str, b: &str, witness: Option<&Path>, search: bool, seed: u64, budget: usize) -> Result<u8, Fail> {
    let cat = Catalog::from_env()?;
    let (ta, tb) = (algebra_arg(&cat, a)?, algebra_arg(&cat, b)?);
    if let Some(w) = witness {
        let p = witness_arg(w, ta.dim())?;
        return Ok(match verify_witness(&ta, &tb, &p)? {
            WitnessOutcome::Verified => {
                println!("verified: witness maps {} onto {}", a, b);
                code(Outcome::Verified)
            }
            WitnessOutcome::Refuted { pair: (i, j), discrepancy } => {
                println!("refuted: product e{}e{} differs by {}", i + 1, j + 1, render_vector(&discrepancy));
                code(Outcome::Refuted)
            }
        });
    }
    if search {
        if let SearchOutcome::Found(p) = search_isomorphism(&ta, &tb, budget, seed) {
            println!("verified: isomorphic via");
            for (k, r) in p.matrix.iter().enumerate() {
                println!("  E{} = {}", k + 1, render_vector(r));
            }
            return Ok(code(Outcome::Verified));
        }
    }
    Ok(match certify_noniso(&ta, &tb)? {
        NonIsoOutcome::Certificate { field, left, right } => {
            println!("refuted: not isomorphic ({}: {} vs {})", field, left, right);
            code(Outcome::Refuted)
        }
        NonIsoOutcome::Inconclusive => {
            println!("inconclusive: no witness and no separating invariant");
            code(Outcome::Inconclusive)
        }
    })
}

fn deg_verify(file: &Path, numeric_only: bool) -> Result<u8, Fail> {
    let items = read_items(file)?;
    let cat = catalog_with(&items)?;
    let Some(d) = items.iter().find_map(|i| match i {
        Item::Degeneration(d) => Some(d),
        _ => None,
    }) else {
        return Err(Fail(format!("{}: no degeneration block", file.display())));
    };
    let from = cat.tensor(&d.from, &[])?;
    let to = cat.tensor(&d.to, &[])?;
    let mut allowed: std::collections::BTreeSet<String> = to.params.iter().cloned().collect();
    allowed.extend(from.params.iter().filter(|p| !d.index.iter().any(|(k, _)| k == *p)).cloned());
    let w = match d.witness(from.dim(), &allowed) {
        Ok(w) => w,
        Err(e) => {
            println!("inconclusive: parse: {}", e);
            return Ok(code(Outcome::Inconclusive));
        }
    };
    let out = verify_degeneration(&from, &to, &w, VerifyOptions { numeric_only });
    Ok(match out {
        DegenerationOutcome::VerifiedExact { branch, side_conditions } => {
            print!("verified exactly: {} -> {}", d.from, d.to);
            if let Some(b) = branch {
                print!(" (branch {:?})", b);
            }
            for c in &side_conditions {
                print!(", assuming {} != 0", c);
            }
            println!();
            code(Outcome::Verified)
        }
        DegenerationOutcome::VerifiedNumeric(ev) => {
            println!("verified numerically: {} -> {}", d.from, d.to);
            for (s, e) in ev.samples.iter().zip(&ev.errors) {
                let errs: Vec<String> = e.iter().map(|x| format!("{:.2e}", x)).collect();
                let at: BTreeMap<_, _> = s.iter().collect();
                println!("  {:?}: {}", at, errs.join(" "));
            }
            code(Outcome::Verified)
        }
        DegenerationOutcome::Refuted { entry: (i, j, k), found, expected } => {
            println!("refuted: coefficient of E{} in E{}E{} tends to {} instead of {}", k + 1, i + 1, j + 1, found, expected);
            code(Outcome::Refuted)
        }
        DegenerationOutcome::Inconclusive(why) => {
            println!("inconclusive: {}", why);
            code(Outcome::Inconclusive)
        }
    })
}

fn deg_forbid(from: &str, to: &str, cert: &Path) -> Result<u8, Fail> {
    let items = read_items(cert)?;
    let cat = catalog_with(&items)?;
    let (ta, tb) = (algebra_arg(&cat, from)?, algebra_arg(&cat, to)?);
    for i in &items {
        match i {
            Item::Nondegeneration(n) => {
                let flag = n.flag(ta.dim())?;
                let out = verify_nondeg_certificate(&ta, &tb, &flag)?;
                return Ok(match out {
                    NondegOutcome::Verified => {
                        println!("verified: {} does not degenerate to {} ({})", from, to, flag);
                        code(Outcome::Verified)
                    }
                    NondegOutcome::MembershipFailed(why) => {
                        println!("refuted: membership fails: {}", why);
                        code(Outcome::Refuted)
                    }
                    NondegOutcome::ExclusionFailed(w) => {
                        println!("refuted: {} has a subspace meeting the conditions:", to);
                        for v in &w.basis {
                            let c: Vec<String> = v.iter().map(|(re, im)| format!("{:.6}{:+.6}i", re, im)).collect();
                            println!("  ({})", c.join(", "));
                        }
                        code(Outcome::Refuted)
                    }
                    NondegOutcome::Inconclusive(why) => {
                        println!("inconclusive: {}", why);
                        code(Outcome::Inconclusive)
                    }
                });
            }
            Item::Obstruction(_) => {
                return Ok(match check_semicontinuity_obstruction(&ta, &tb)? {
                    Some(ob) => {
                        println!("verified: {} ({} vs {})", ob.name, ob.from, ob.to);
                        code(Outcome::Verified)
                    }
                    None => {
                        println!("refuted: no invariant forbids {} -> {}", from, to);
                        code(Outcome::Refuted)
                    }
                });
            }
            _ => {}
        }
    }
    Err(Fail(format!("{}: no nondegeneration or obstruction block", cert.display())))
}

fn run_reproduce(id: &str, out: &Path, opts: Options) -> Result<u8, Fail> {
    let id: TheoremId = id.parse()?;
    let cat = Catalog::from_env()?;
    let report = reproduce(&cat, id, &opts);
    std::fs::write(out, report.to_json()).map_err(|e| Fail(format!("{}: {}", out.display(), e)))?;
    print!("{}", report.summary_text());
    Ok(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR } else { 0 });
        }
    };
    let r = match cli.command {
        Command::Check { file, identity } => check(&file, identity),
        Command::Invariants { file, at } => invariants(&file, &at),
        Command::Iso { a, b, witness, search, seed, budget } => iso(&a, &b, witness.as_deref(), search, seed, budget),
        Command::Deg { command: DegCommand::Verify { file, numeric_only } } => deg_verify(&file, numeric_only),
        Command::Deg { command: DegCommand::Forbid { from, to, cert } } => deg_forbid(&from, &to, &cert),
        Command::Reproduce { id, report, seed, budget, timings } => run_reproduce(&id, &report, Options { seed, budget, timings }),
    };
    match r {
        Ok(c) => ExitCode::from(c),
        Err(Fail(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(INPUT_ERROR)
        }
    }
}
