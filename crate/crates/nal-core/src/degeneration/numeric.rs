use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::DegenerationWitness;
use crate::field::{eval_scalar, Cx};
use crate::tensor::StructureTensor;

/// Parameter values tried first for family witnesses.
pub const DEFAULT_SAMPLES: [i64; 5] = [2, 3, 5, 7, -2];
/// t = 10^-k for these k.
pub const T_EXPONENTS: [u32; 5] = [2, 3, 4, 5, 6];

const EXTRA_SAMPLES: [i64; 10] = [11, 13, -3, 17, 19, -5, 23, 29, -7, 31];
const WANTED: usize = 5;
const DECAY: f64 = 5.0;
const FINAL_TOL: f64 = 1e-6;
const ZERO_TOL: f64 = 1e-60;
const ROUNDING: f64 = 1.01;

#[derive(Clone, Debug, PartialEq)]
pub struct NumericEvidence {
    pub samples: Vec<BTreeMap<String, i64>>,
    /// Sign per radical key; true keeps the principal root.
    pub branch: Vec<(String, bool)>,
    /// Max-entry error per sample, one value per t in the schedule.
    pub errors: Vec<Vec<f64>>,
}

impl Eq for NumericEvidence {}

fn free_params(from: &StructureTensor, to: &StructureTensor, w: &DegenerationWitness) -> Vec<String> {
    let mut s: BTreeSet<String> = to.params.iter().cloned().collect();
    for p in &from.params {
        if !w.index.contains_key(p) {
            s.insert(p.clone());
        }
    }
    for e in w.index.values().chain(w.basis.iter().flatten()) {
        s.extend(e.vars());
    }
    s.remove("t");
    s.into_iter().collect()
}

fn sample_list() -> Vec<i64> {
    DEFAULT_SAMPLES.iter().chain(EXTRA_SAMPLES.iter()).copied().collect()
}

fn admissible(t: &StructureTensor, env: &BTreeMap<String, Cx>) -> bool {
    t.constraints.iter().all(|c| {
        let mut look = |v: &crate::field::Var| env.get(v.name()).cloned().unwrap_or_else(Cx::zero);
        !Cx::eval_poly(c, &mut look).is_zero()
    })
}

fn cx_inverse(m: &[Vec<Cx>]) -> Option<Vec<Vec<Cx>>> {
    let n = m.len();
    let mut a: Vec<Vec<Cx>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { Cx::one() } else { Cx::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by_key(|&i| a[i][c].abs_raw())?;
        if a[p][c].is_zero() {
            return None;
        }
        a.swap(p, c);
        let inv = a[c][c].inv()?;
        for x in a[c].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..2 * n {
                let d = &f * &a[c][j];
                a[i][j] = &a[i][j] - &d;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn error_at(
    from: &StructureTensor,
    to: &StructureTensor,
    w: &DegenerationWitness,
    params: &BTreeMap<String, Cx>,
    t: Cx,
    sign: &dyn Fn(&str) -> bool,
) -> Result<f64, String> {
    let n = from.dim();
    let env = |v: &str| if v == "t" { Some(t.clone()) } else { params.get(v).cloned() };
    let mut from_env: BTreeMap<String, Cx> = params.clone();
    for (k, e) in &w.index {
        from_env.insert(k.clone(), e.eval(&env, sign).map_err(|e| format!("{}", e))?);
    }
    let fenv = |v: &str| from_env.get(v).cloned();
    let c: Vec<Cx> = from.entries().iter().map(|x| eval_scalar(x, &fenv, false)).collect::<Result<_, _>>().map_err(|e| format!("{}", e))?;
    let p: Vec<Vec<Cx>> = w
        .basis
        .iter()
        .map(|r| r.iter().map(|e| e.eval(&env, sign)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("{}", e))?;
    let inv = cx_inverse(&p).ok_or_else(|| String::from("basis singular at sample"))?;
    let penv = |v: &str| params.get(v).cloned();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut v = alloc::vec![Cx::zero(); n];
            for a in 0..n {
                if p[i][a].is_zero() {
                    continue;
                }
                for b in 0..n {
                    if p[j][b].is_zero() {
                        continue;
                    }
                    let s = &p[i][a] * &p[j][b];
                    for (r, vr) in v.iter_mut().enumerate() {
                        let x = &c[(a * n + b) * n + r];
                        if !x.is_zero() {
                            *vr = &*vr + &(&s * x);
                        }
                    }
                }
            }
            for k in 0..n {
                let mut acc = Cx::zero();
                for (r, vr) in v.iter().enumerate() {
                    acc = &acc + &(vr * &inv[r][k]);
                }
                let target = eval_scalar(to.get(i, j, k), &penv, false).map_err(|e| format!("{}", e))?;
                worst = worst.max((&acc - &target).abs_f64());
            }
        }
    }
    Ok(worst)
}

/// Decay by DECAY per decade and a final error within C*t, C the largest err/t over the earlier points (at least 1).
fn converges(errs: &[f64]) -> bool {
    let Some((&last, earlier)) = errs.split_last() else { return false };
    let slope = earlier.iter().zip(T_EXPONENTS).map(|(e, k)| e * libm::pow(10.0, k as f64)).fold(1.0, f64::max);
    let c = slope * ROUNDING;
    last <= FINAL_TOL * c && errs.windows(2).all(|w| w[1] < ZERO_TOL || w[1] * DECAY <= w[0])
}

fn samples(from: &StructureTensor, to: &StructureTensor, names: &[String]) -> Vec<BTreeMap<String, i64>> {
    if names.is_empty() {
        return alloc::vec![BTreeMap::new()];
    }
    let list = sample_list();
    let mut out = Vec::new();
    for k in 0..list.len() {
        let s: BTreeMap<String, i64> = names.iter().enumerate().map(|(j, v)| (v.clone(), list[(k + 2 * j) % list.len()])).collect();
        let env: BTreeMap<String, Cx> = s.iter().map(|(k, v)| (k.clone(), Cx::from_int(*v))).collect();
        if admissible(to, &env) && admissible(from, &env) {
            out.push(s);
        }
        if out.len() == WANTED {
            break;
        }
    }
    out
}

pub(super) fn verify(from: &StructureTensor, to: &StructureTensor, w: &DegenerationWitness) -> Result<NumericEvidence, String> {
    let names = free_params(from, to, w);
    let samples = samples(from, to, &names);
    if samples.is_empty() {
        return Err(String::from("no admissible parameter sample"));
    }
    let mut keys = Vec::new();
    for e in w.index.values().chain(w.basis.iter().flatten()) {
        e.radical_keys(&mut keys);
    }
    if keys.len() > 4 {
        return Err(format!("{} independent radicals", keys.len()));
    }
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << keys.len()) {
        let sign = |k: &str| keys.iter().position(|x| x == k).map_or(true, |p| mask & (1 << p) == 0);
        let mut errors = Vec::new();
        let mut ok = true;
        for s in &samples {
            let env: BTreeMap<String, Cx> = s.iter().map(|(k, v)| (k.clone(), Cx::from_int(*v))).collect();
            let mut errs = Vec::new();
            for &e in &T_EXPONENTS {
                match error_at(from, to, w, &env, Cx::pow10_neg(e), &sign) {
                    Ok(x) => errs.push(x),
                    Err(_) => errs.push(f64::INFINITY),
                }
            }
            let last = *errs.last().unwrap_or(&f64::INFINITY);
            best = Some(best.map_or(last, |b| b.min(last)));
            ok &= converges(&errs);
            errors.push(errs);
            if !ok {
                break;
            }
        }
        if ok {
            let branch = keys.iter().enumerate().map(|(p, k)| (k.clone(), mask & (1 << p) == 0)).collect();
            return Ok(NumericEvidence { samples, branch, errors });
        }
    }
    Err(format!("no convergence to the target (best final error {:e})", best.unwrap_or(f64::INFINITY)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_acceptance() {
        assert!(converges(&[1e-2, 1e-3, 1e-4, 1e-5, 1e-6 * 0.9]));
        assert!(converges(&[0.0; 5]));
        assert!(!converges(&[1e-2, 5e-3, 1e-3, 1e-4, 1e-7]));
        assert!(converges(&[1e-2, 1e-3, 1e-4, 1e-5, 1e-6]));
        assert!(!converges(&[1e-2, 1e-3, 1e-4, 1e-5, 2e-6]));
        assert!(!converges(&[1.0, 0.1, 1e-2, 1e-3, 1e-3]));
    }

    #[test]
    fn numeric_inverse() {
        let m = alloc::vec![alloc::vec![Cx::from_int(2), Cx::from_int(1)], alloc::vec![Cx::from_int(1), Cx::from_int(1)]];
        let inv = cx_inverse(&m).unwrap();
        assert!((&inv[0][1] - &Cx::from_int(-1)).abs_f64() < 1e-80);
        assert!(cx_inverse(&[alloc::vec![Cx::one(), Cx::one()], alloc::vec![Cx::one(), Cx::one()]]).is_none());
    }
}
