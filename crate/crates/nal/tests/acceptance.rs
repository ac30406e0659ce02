//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nal::catalog::{basis_change, instantiate, parse_bindings, Catalog, CatalogEntry, Item};
use nal::report::{ItemReport, Outcome, Report};
use nal::reproduce::{reproduce, Options, TheoremId};
use nal_core::degeneration::DEFAULT_SAMPLES;
use nal_core::extension::{extend_unchecked, CocycleTriple, FormSymmetry};
use nal_core::field::{ScalarExpr, Var};
use nal_core::identities::{check_identity, IdentityError, IdentityName};
use nal_core::invariants::{derivation_algebra, fingerprint, InvariantFingerprint};
use nal_core::isomorphism::{verify_witness, WitnessOutcome};
use nal_core::tensor::{change_basis, StructureTensor};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn not_verified<'a>(items: impl Iterator<Item = &'a ItemReport>) -> Vec<String> {
    items
        .filter(|i| i.outcome != Outcome::Verified)
        .map(|i| format!("{} ({:?}{})", i.id, i.outcome, i.reason.as_ref().map(|r| format!(": {}", r)).unwrap_or_default()))
        .collect()
}

fn criterion1(reports: &BTreeMap<TheoremId, Report>, elapsed: Duration) -> Verdict {
    let mut bad = Vec::new();
    let mut count = 0;
    for id in [TheoremId::A1, TheoremId::A2, TheoremId::A3, TheoremId::A4] {
        let r = &reports[&id];
        let items: Vec<&ItemReport> = r.items_of("membership").chain(r.items_of("bicommutative_plus")).collect();
        count += items.len();
        bad.extend(not_verified(items.into_iter()));
    }
    let assoc: BTreeSet<&str> = reports[&TheoremId::A1]
        .items_of("membership")
        .filter(|i| i.details["associative"] == true)
        .map(|i| i.id.as_str())
        .collect();
    let want: BTreeSet<&str> = ["M01", "M02", "M03"].into_iter().collect();
    let a1 = reports[&TheoremId::A1].items_of("membership").count();
    let ok = bad.is_empty() && assoc == want && a1 == 7 && elapsed < Duration::from_secs(60);
    verdict(ok, format!("{} entries checked, associative among A1 = {:?}, {} failures {:?}, {:.1}s", count, assoc, bad.len(), bad, elapsed.as_secs_f64()))
}

fn criterion2(reports: &BTreeMap<TheoremId, Report>) -> Verdict {
    let cases: Vec<&ItemReport> = reports[&TheoremId::A4].items_of("extension_case").collect();
    let matched = cases.iter().filter(|i| i.outcome == Outcome::Verified && i.details["jordan_product_matches"] == true).count();
    let rescaled = cases.iter().filter(|i| i.details["rescaled"] == true).count();
    let bad = not_verified(cases.iter().copied());
    verdict(
        cases.len() >= 18 && bad.is_empty() && matched == cases.len(),
        format!("{}/{} cases match their symmetrization ({} through the e3 rescaling), failures {:?}", matched, cases.len(), rescaled, bad),
    )
}

fn criterion3(reports: &BTreeMap<TheoremId, Report>) -> Verdict {
    let expected: [(&str, &[(&str, u64)]); 4] = [
        ("G1", &[("M04", 8), ("M07", 7)]),
        ("G2", &[("A01", 12), ("J07", 9)]),
        ("G3", &[("A01", 12), ("Jcal01", 10), ("J07", 9), ("J12", 8), ("J16", 7), ("J19", 7), ("J14", 3)]),
        ("G4", &[("B06", 10), ("J07", 9), ("B07", 9), ("B08", 9)]),
    ];
    let mut wrong = Vec::new();
    let mut n = 0;
    for (g, dims) in expected {
        let r = &reports[&g.parse::<TheoremId>().unwrap()];
        for (name, want) in dims {
            n += 1;
            let got = r.tables.get("orbit_dimensions").and_then(|t| t.get(format!("{}/{}", g, name))).and_then(|v| v.as_u64());
            if got != Some(*want) {
                wrong.push(format!("{}/{}: {:?} vs {}", g, name, got, want));
            }
        }
    }
    verdict(wrong.is_empty(), format!("{} orbit dimensions, mismatches {:?}", n, wrong))
}

fn criterion4(reports: &BTreeMap<TheoremId, Report>, elapsed: Duration) -> Verdict {
    let mut rows = 0;
    let mut parse = Vec::new();
    let mut bad = Vec::new();
    let (mut exact, mut numeric) = (0, 0);
    for id in [TheoremId::G1, TheoremId::G2, TheoremId::G3, TheoremId::G4] {
        for i in reports[&id].items_of("degeneration") {
            if i.details["table_row"] != true {
                continue;
            }
            rows += 1;
            match (i.outcome, i.method.as_str()) {
                (Outcome::Verified, "exact limit") => exact += 1,
                (Outcome::Verified, _) => numeric += 1,
                (Outcome::Inconclusive, "parse") => parse.push(i.id.clone()),
                _ => bad.push(format!("{} ({:?}: {})", i.id, i.outcome, i.reason.clone().unwrap_or_default())),
            }
        }
    }
    let ok = bad.is_empty() && parse.len() <= 3 && elapsed < Duration::from_secs(300);
    verdict(
        ok,
        format!(
            "{} rows: {} exact, {} numeric, parse artifacts {:?}, failures {:?}, {:.1}s",
            rows,
            exact,
            numeric,
            parse,
            bad,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion5(reports: &BTreeMap<TheoremId, Report>) -> Verdict {
    let nondeg: Vec<&ItemReport> = reports[&TheoremId::G1].items_of("nondegeneration").collect();
    let mut obstructions = Vec::new();
    for id in [TheoremId::G2, TheoremId::G3, TheoremId::G4] {
        obstructions.extend(reports[&id].items_of("obstruction"));
    }
    let required = ["G2/A01-not-J07", "G3/Jcal01-not-J07", "G4/B06-not-B07", "G4/B06-not-B08"];
    let present = required.iter().all(|r| obstructions.iter().any(|o| o.id == *r));
    let kinds_match = obstructions.iter().all(|o| o.details["claimed"] == o.details["invariant"]);
    let mut bad = not_verified(nondeg.iter().copied());
    bad.extend(not_verified(obstructions.iter().copied()));
    verdict(
        nondeg.len() == 1 && present && kinds_match && bad.is_empty(),
        format!("{} flag certificate, {} obstructions, claimed kinds reproduced: {}, failures {:?}", nondeg.len(), obstructions.len(), kinds_match, bad),
    )
}

fn criterion6(reports: &BTreeMap<TheoremId, Report>) -> Verdict {
    let mut all = Vec::new();
    for id in [TheoremId::A1, TheoremId::A2, TheoremId::A3, TheoremId::A4] {
        all.extend(reports[&id].items_of("isomorphism"));
    }
    let symbolic = all.iter().filter(|i| i.outcome == Outcome::Verified && i.method.ends_with("symbolic")).count();
    let sampled = all.iter().filter(|i| i.outcome == Outcome::Verified && i.method.ends_with("sampled")).count();
    let bad = not_verified(all.iter().copied());
    verdict(bad.is_empty(), format!("{} relations: {} symbolic, {} sampled; not verified {:?}", all.len(), symbolic, sampled, bad))
}

/// First parameter assignment from the default samples that the entry's constraints admit.
fn sample_for(e: &CatalogEntry) -> Option<BTreeMap<String, ScalarExpr>> {
    let list: Vec<i64> = DEFAULT_SAMPLES.to_vec();
    (0..list.len()).find_map(|k| {
        let s: BTreeMap<String, ScalarExpr> =
            e.params.iter().enumerate().map(|(j, p)| (p.clone(), ScalarExpr::from_int(list[(k + 2 * j) % list.len()]))).collect();
        instantiate(e, &s).ok().map(|_| s)
    })
}

fn criterion7(cat: &Catalog) -> Verdict {
    let mut prints: Vec<(String, InvariantFingerprint)> = Vec::new();
    let mut errors = Vec::new();
    for e in cat.entries() {
        let Some(s) = sample_for(e) else {
            errors.push(format!("{}: no admissible sample", e.name));
            continue;
        };
        match instantiate(e, &s).map_err(|x| x.to_string()).and_then(|t| fingerprint(&t).map_err(|x| x.to_string())) {
            Ok(f) => prints.push((e.name.clone(), f)),
            Err(x) => errors.push(format!("{}: {}", e.name, x)),
        }
    }
    // witnessed pairs: shipped relations at the sample, and extension cases
    let mut unsound = Vec::new();
    let mut pairs = 0;
    for e in cat.entries() {
        let Some(s) = sample_for(e) else { continue };
        let sv: BTreeMap<Var, ScalarExpr> = s.iter().map(|(k, v)| (Var::new(k), v.clone())).collect();
        for r in e.relations.iter().filter(|r| r.witness.is_some()) {
            let check = || -> Result<Option<bool>, String> {
                let src = instantiate(e, &s).map_err(|x| x.to_string())?;
                let mut at = parse_bindings(&r.at).map_err(|x| x.to_string())?;
                for v in at.values_mut() {
                    *v = v.substitute(&sv).map_err(|x| x.to_string())?;
                }
                let dst = instantiate(cat.entry(&r.target).map_err(|x| x.to_string())?, &at).map_err(|x| x.to_string())?;
                let w = basis_change(r.witness.as_ref().unwrap(), e.dim).map_err(|x| x.to_string())?;
                let w = nal_core::tensor::BasisChange::new(
                    w.matrix.iter().map(|row| row.iter().map(|x| x.substitute(&sv)).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>().map_err(|x| x.to_string())?,
                );
                if verify_witness(&src, &dst, &w).map_err(|x| x.to_string())? != WitnessOutcome::Verified {
                    return Ok(None);
                }
                Ok(Some(fingerprint(&src).map_err(|x| x.to_string())? == fingerprint(&dst).map_err(|x| x.to_string())?))
            };
            match check() {
                Ok(Some(true)) => pairs += 1,
                Ok(Some(false)) => unsound.push(format!("{} ~ {}", e.name, r.target)),
                Ok(None) => {}
                Err(x) => errors.push(format!("{} ~ {}: {}", e.name, r.target, x)),
            }
        }
    }
    for item in &cat.items {
        let Item::Case(c) = item else { continue };
        let run = || -> Result<bool, String> {
            let plus = cat.tensor(&c.plus, &c.plus_at).map_err(|x| x.to_string())?;
            let n = plus.dim();
            let staged = match &c.frame {
                Some(f) => change_basis(&plus, &basis_change(f, n).map_err(|x| x.to_string())?).map_err(|x| x.to_string())?,
                None => plus,
            };
            let theta = CocycleTriple::from_tensor(&c.theta_tensor(n).map_err(|x| x.to_string())?, FormSymmetry::Skew);
            let x = extend_unchecked(&staged, &theta);
            let res = cat.tensor(&c.result, &c.result_at).map_err(|x| x.to_string())?;
            let s: BTreeMap<Var, ScalarExpr> = res.params.iter().map(|p| (Var::new(p), ScalarExpr::from_int(3))).collect();
            let (x, res) = (x.substitute(&s).map_err(|e| e.to_string())?, res.substitute(&s).map_err(|e| e.to_string())?);
            Ok(fingerprint(&x).map_err(|e| e.to_string())? == fingerprint(&res).map_err(|e| e.to_string())?)
        };
        match run() {
            Ok(true) => pairs += 1,
            Ok(false) => unsound.push(c.label.clone()),
            Err(x) => errors.push(format!("{}: {}", c.label, x)),
        }
    }
    let n = prints.len();
    let mut separated = 0;
    let mut matrix = String::new();
    let _ = writeln!(matrix, "# 1 = fingerprints differ, . = equal; rows and columns in catalog order");
    let _ = writeln!(matrix, "{:>8} {}", "", prints.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" "));
    for (a, fa) in &prints {
        let row: String = prints.iter().map(|(_, fb)| if fa.first_difference(fb).is_some() { '1' } else { '.' }).collect();
        separated += row.chars().filter(|c| *c == '1').count();
        let _ = writeln!(matrix, "{:>8} {}", a, row);
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("fingerprint-matrix.txt");
    let _ = std::fs::write(&path, matrix);
    let total = n * (n - 1);
    verdict(
        unsound.is_empty() && errors.is_empty(),
        format!(
            "{} entries, {} witnessed pairs agree, unsound {:?}, errors {:?}; {}/{} ordered pairs separated, matrix at {}",
            n,
            pairs,
            unsound,
            errors,
            separated,
            total,
            path.display()
        ),
    )
}

// ---- criterion 8 oracles, written independently of the library's evaluators ----

type V = Vec<ScalarExpr>;

fn mul(a: &StructureTensor, x: &[ScalarExpr], y: &[ScalarExpr]) -> V {
    let n = a.dim();
    let mut out = vec![ScalarExpr::zero(); n];
    for i in 0..n {
        for j in 0..n {
            if x[i].is_zero() || y[j].is_zero() {
                continue;
            }
            let s = &x[i] * &y[j];
            for (k, o) in out.iter_mut().enumerate() {
                let c = a.get(i, j, k);
                if !c.is_zero() {
                    *o = &*o + &(&s * c);
                }
            }
        }
    }
    out
}

fn sub(x: &[ScalarExpr], y: &[ScalarExpr]) -> V {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn zero(v: &[ScalarExpr]) -> bool {
    v.iter().all(|x| x.is_zero())
}

fn basis(n: usize) -> Vec<V> {
    (0..n).map(|i| (0..n).map(|k| ScalarExpr::from_int((i == k) as i64)).collect()).collect()
}

/// Every vector with coordinates in 0..m.
fn grid(n: usize, m: i64) -> Vec<V> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v: V| (0..m).map(move |c| [v.clone(), vec![ScalarExpr::from_int(c)]].concat())).collect();
    }
    out
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|t: Vec<usize>| (0..n).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    out
}

/// Brute force over basis tuples, or over a coordinate grid in the non-linear argument.
fn brute_force(a: &StructureTensor, id: IdentityName) -> bool {
    let n = a.dim();
    let e = basis(n);
    let m = |x: &[ScalarExpr], y: &[ScalarExpr]| mul(a, x, y);
    let all = |k: usize, f: &dyn Fn(&[&V]) -> bool| tuples(n, k).iter().all(|t| f(&t.iter().map(|&i| &e[i]).collect::<Vec<_>>()));
    match id {
        IdentityName::Commutative => all(2, &|v| zero(&sub(&m(v[0], v[1]), &m(v[1], v[0])))),
        // x^2 = 0 has degree 2 per coordinate: three values per coordinate decide it
        IdentityName::Anticommutative => grid(n, 3).iter().all(|x| zero(&m(x, x))),
        IdentityName::Associative => all(3, &|v| zero(&sub(&m(&m(v[0], v[1]), v[2]), &m(v[0], &m(v[1], v[2]))))),
        IdentityName::LeftBicommutative => all(3, &|v| zero(&sub(&m(v[0], &m(v[1], v[2])), &m(v[1], &m(v[0], v[2]))))),
        IdentityName::RightBicommutative => all(3, &|v| zero(&sub(&m(&m(v[0], v[1]), v[2]), &m(&m(v[0], v[2]), v[1])))),
        IdentityName::Bicommutative => brute_force(a, IdentityName::LeftBicommutative) && brute_force(a, IdentityName::RightBicommutative),
        IdentityName::Metabelian => all(4, &|v| zero(&m(&m(v[0], v[1]), &m(v[2], v[3])))),
        IdentityName::FourAssoc => all(4, &|v| {
            let ab = m(v[0], v[1]);
            zero(&sub(&m(&m(&ab, v[2]), v[3]), &m(&m(&ab, v[3]), v[2])))
        }),
        // Jordan algebras are commutative; the identity has degree 3 in x and is linear in y
        IdentityName::Jordan => brute_force(a, IdentityName::Commutative) && grid(n, 4).iter().all(|x| {
            let x2 = m(x, x);
            e.iter().all(|y| zero(&sub(&m(&m(&x2, y), x), &m(&x2, &m(y, x)))))
        }),
    }
}

fn expansion(a: &StructureTensor, id: IdentityName) -> Result<bool, String> {
    match check_identity(a, id) {
        Ok(o) => Ok(o.is_verified()),
        Err(IdentityError::ParameterConditional { .. }) => Ok(false),
        Err(e) => Err(e.to_string()),
    }
}

/// Rank of an integer matrix by fraction-free elimination.
fn bareiss_rank(mut m: Vec<Vec<i128>>) -> usize {
    let (rows, cols) = (m.len(), m.first().map_or(0, |r| r.len()));
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for k in c + 1..cols {
                m[r][k] = (m[rank][c] * m[r][k] - m[r][c] * m[rank][k]) / prev;
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
    }
    rank
}

/// dim Der from the dense system D(e_i e_j) = D(e_i) e_j + e_i D(e_j), unknowns d[a][b] = coefficient of e_b in D(e_a).
fn naive_derivations(c: &[i64], n: usize) -> usize {
    let at = |i: usize, j: usize, k: usize| c[(i * n + j) * n + k] as i128;
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut row = vec![0i128; n * n];
                for s in 0..n {
                    row[s * n + k] += at(i, j, s);
                    row[i * n + s] -= at(s, j, k);
                    row[j * n + s] -= at(i, s, k);
                }
                rows.push(row);
            }
        }
    }
    n * n - bareiss_rank(rows)
}

fn criterion8(cat: &Catalog) -> Verdict {
    let mut checks = 0;
    let mut disagree = Vec::new();
    for e in cat.entries() {
        let a = match instantiate(e, &BTreeMap::new()) {
            Ok(a) => a,
            Err(x) => {
                disagree.push(format!("{}: {}", e.name, x));
                continue;
            }
        };
        for id in IdentityName::ALL {
            checks += 1;
            match expansion(&a, id) {
                Ok(x) if x == brute_force(&a, id) => {}
                Ok(x) => disagree.push(format!("{} {}: expansion {} vs brute force {}", e.name, id, x, !x)),
                Err(x) => disagree.push(format!("{} {}: {}", e.name, id, x)),
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut der_bad = Vec::new();
    for trial in 0..50 {
        // sparse tensors so that derivation algebras of every size turn up
        let c: Vec<i64> = (0..27).map(|_| if rng.next_u32() % 3 == 0 { (rng.next_u32() % 5) as i64 - 2 } else { 0 }).collect();
        let t = StructureTensor::from_fn(3, |i, j, k| ScalarExpr::from_int(c[(i * 3 + j) * 3 + k]));
        let (lib, naive) = (derivation_algebra(&t).dim(), naive_derivations(&c, 3));
        if lib != naive {
            der_bad.push(format!("trial {}: {} vs {}", trial, lib, naive));
        }
    }
    verdict(
        disagree.is_empty() && der_bad.is_empty(),
        format!("{} identity checks agree with brute force (disagreements {:?}); 50 random derivation algebras, mismatches {:?}", checks, disagree, der_bad),
    )
}

fn main() -> ExitCode {
    let cat = Catalog::builtin();
    let opts = Options::default();
    let mut reports = BTreeMap::new();
    let mut alg = Duration::ZERO;
    let mut geo = Duration::ZERO;
    for id in TheoremId::ALL {
        let start = Instant::now();
        reports.insert(id, reproduce(cat, id, &opts));
        let d = start.elapsed();
        if id <= TheoremId::A4 {
            alg += d;
        } else {
            geo += d;
        }
    }
    let verdicts = [
        ("identity suites", criterion1(&reports, alg)),
        ("Jordan-product correspondences", criterion2(&reports)),
        ("orbit dimensions", criterion3(&reports)),
        ("degeneration tables", criterion4(&reports, geo)),
        ("non-degenerations", criterion5(&reports)),
        ("isomorphism exceptions", criterion6(&reports)),
        ("fingerprint soundness", criterion7(cat)),
        ("oracle equivalence", criterion8(cat)),
    ];
    let mut failed = 0;
    for (k, (name, v)) in verdicts.iter().enumerate() {
        println!("criterion {} {}: {} ({})", k + 1, name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += !v.pass as usize;
    }
    println!("acceptance: {} passed, {} failed", verdicts.len() - failed, failed);
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
