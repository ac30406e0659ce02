//! Exact elimination over the scalar tower with generic-parameter pivoting.

use alloc::vec::Vec;

use crate::field::{Assumptions, Poly, RatFunc, ScalarExpr};

pub type Matrix = Vec<Vec<ScalarExpr>>;

/// Polynomial whose vanishing makes x zero.
pub fn vanishing_poly(x: &ScalarExpr) -> Poly {
    match x.sqrt_part() {
        None => x.numerator().clone(),
        Some(sp) => {
            let a = x.rational_part();
            let f = RatFunc::from_poly((*sp.radicand).clone());
            let norm = &(a * a) - &(&(&sp.coeff * &sp.coeff) * &f);
            norm.num().clone()
        }
    }
}

fn push_condition(conds: &mut Vec<Poly>, x: &ScalarExpr, assume: &Assumptions) {
    let p = vanishing_poly(x);
    if !assume.is_unit(&p) {
        let p = p.monic();
        if !conds.contains(&p) {
            conds.push(p);
        }
    }
}

fn pivot_rank(x: &ScalarExpr, assume: &Assumptions) -> (u8, usize) {
    if x.constant_value().is_some() {
        return (0, 0);
    }
    let p = vanishing_poly(x);
    if assume.is_unit(&p) {
        (1, p.len())
    } else {
        (2, p.len())
    }
}

/// Reduced row echelon form, exact at a generic point of the parameters.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub rows: Matrix,
    pub pivots: Vec<usize>,
    /// Pivots that vanish for special parameter values.
    pub conditions: Vec<Poly>,
}

pub fn rref(m: &Matrix, assume: &Assumptions) -> Echelon {
    let mut a: Matrix = m.clone();
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut conditions = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let best = (r..nrows)
            .filter(|&i| !a[i][c].is_zero())
            .min_by_key(|&i| pivot_rank(&a[i][c], assume));
        let Some(p) = best else { continue };
        a.swap(r, p);
        push_condition(&mut conditions, &a[r][c], assume);
        let inv = a[r][c].inv().expect("nonzero pivot");
        for j in c..ncols {
            a[r][j] = &a[r][j] * &inv;
        }
        for i in 0..nrows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..ncols {
                if a[r][j].is_zero() {
                    continue;
                }
                a[i][j] = &a[i][j] - &(&f * &a[r][j]);
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r.max(0));
    Echelon { rows: a, pivots, conditions }
}

pub fn rank(m: &Matrix, assume: &Assumptions) -> (usize, Vec<Poly>) {
    let e = rref(m, assume);
    (e.pivots.len(), e.conditions)
}

/// Basis of {x : m x = 0}, one vector per free column with a 1 in that column.
pub fn nullspace(m: &Matrix, ncols: usize, assume: &Assumptions) -> (Matrix, Vec<Poly>) {
    let e = rref(m, assume);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !e.pivots.contains(c)) {
        let mut v = alloc::vec![ScalarExpr::zero(); ncols];
        v[free] = ScalarExpr::one();
        for (row, &pc) in e.rows.iter().zip(&e.pivots) {
            v[pc] = -&row[free];
        }
        basis.push(v);
    }
    (basis, e.conditions)
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { ScalarExpr::one() } else { ScalarExpr::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let k = b.len();
    let mut out = alloc::vec![alloc::vec![ScalarExpr::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[l][j].is_zero() {
                    out[i][j] = &out[i][j] + &(&a[i][l] * &b[l][j]);
                }
            }
        }
    }
    out
}

pub fn transpose(a: &Matrix) -> Matrix {
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn determinant(a: &Matrix) -> ScalarExpr {
    let n = a.len();
    let mut m = a.clone();
    let mut det = ScalarExpr::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return ScalarExpr::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det = &det * &m[c][c];
        let inv = m[c][c].inv().expect("nonzero pivot");
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..n {
                m[i][j] = &m[i][j] - &(&f * &m[c][j]);
            }
        }
    }
    det
}

/// Inverse, or None when singular as a matrix over the coefficient field.
pub fn inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let aug: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { ScalarExpr::one() } else { ScalarExpr::zero() }));
            r
        })
        .collect();
    let e = rref(&aug, &Assumptions::none());
    if e.pivots.len() < n || e.pivots[n - 1] != n - 1 {
        return None;
    }
    Some(e.rows.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Coordinates of v in the span of `basis` (rows), if it lies there.
pub fn solve_in_span(basis: &Matrix, v: &[ScalarExpr], assume: &Assumptions) -> Option<Vec<ScalarExpr>> {
    let k = basis.len();
    let n = v.len();
    // columns = basis vectors, augmented by v
    let m: Matrix = (0..n)
        .map(|r| {
            let mut row: Vec<ScalarExpr> = basis.iter().map(|b| b[r].clone()).collect();
            row.push(v[r].clone());
            row
        })
        .collect();
    let e = rref(&m, assume);
    if e.pivots.contains(&k) {
        return None;
    }
    let mut x = alloc::vec![ScalarExpr::zero(); k];
    for (row, &pc) in e.rows.iter().zip(&e.pivots) {
        x[pc] = row[k].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_poly, parse_scalar};

    fn m(rows: &[&[&str]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|s| parse_scalar(s).unwrap()).collect()).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let a = m(&[&["1", "2", "3"], &["2", "4", "6"], &["0", "1", "1"]]);
        let (r, c) = rank(&a, &Assumptions::none());
        assert_eq!((r, c.len()), (2, 0));
        let (ns, _) = nullspace(&a, 3, &Assumptions::none());
        assert_eq!(ns.len(), 1);
        for row in &a {
            let dot = row.iter().zip(&ns[0]).fold(ScalarExpr::zero(), |acc, (x, y)| &acc + &(x * y));
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn generic_rank_reports_condition() {
        let a = m(&[&["alpha - 1", "0"], &["0", "alpha"]]);
        let (r, c) = rank(&a, &Assumptions::none());
        assert_eq!(r, 2);
        assert_eq!(c, alloc::vec![parse_poly("alpha - 1").unwrap()]);
        let (_, c) = rank(&a, &Assumptions::new(alloc::vec![parse_poly("alpha - 1").unwrap()]));
        assert!(c.is_empty());
    }

    #[test]
    fn inverse_and_det() {
        let a = m(&[&["0", "1", "0"], &["1", "0", "0"], &["0", "0", "1/alpha"]]);
        assert_eq!(determinant(&a), parse_scalar("-1/alpha").unwrap());
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(3));
        assert!(inverse(&m(&[&["1", "t"], &["1/t", "1"]])).is_none());
    }

    #[test]
    fn span_membership() {
        let b = m(&[&["1", "0", "1"], &["0", "1", "0"]]);
        let v: Vec<ScalarExpr> = ["2", "alpha", "2"].iter().map(|s| parse_scalar(s).unwrap()).collect();
        let x = solve_in_span(&b, &v, &Assumptions::none()).unwrap();
        assert_eq!(x[1], parse_scalar("alpha").unwrap());
        let w: Vec<ScalarExpr> = ["1", "0", "0"].iter().map(|s| parse_scalar(s).unwrap()).collect();
        assert!(solve_in_span(&b, &w, &Assumptions::none()).is_none());
    }
}
