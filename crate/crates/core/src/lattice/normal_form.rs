//! Hermite and Smith normal forms with unimodular multipliers.
//!
//! Conventions follow the column-lattice picture: the lattice of an
//! `n x s` matrix is the span of its columns, right multipliers change
//! the basis of that lattice and left multipliers change the basis of
//! `Z^n`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

/// `H = M * U` with `H` in (column) Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hermite {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// Number of nonzero columns of `h`.
    pub rank: usize,
    /// Row index of the leading entry of each nonzero column.
    pub pivot_rows: Vec<usize>,
}

/// `S = L * M * R` with `S` in Smith normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Smith {
    pub s: IntMatrix,
    pub l: IntMatrix,
    pub r: IntMatrix,
    /// Inverse of `l`, tracked alongside it.
    pub l_inv: IntMatrix,
}

impl Smith {
    /// The diagonal `d_1 | d_2 | ...` (including trailing zeros), of length
    /// `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols())).map(|i| self.s[(i, i)].clone()).collect()
    }
}

/// Bezout coefficients `(g, x, y)` with `x*a + y*b = g = gcd(a, b) >= 0`.
fn bezout(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Column-style Hermite normal form: lower triangular (echelon for
/// rank-deficient input), positive pivots, entries left of a pivot reduced
/// into `[0, pivot)`, zero columns rightmost.
pub fn hermite_normal_form(m: &IntMatrix) -> Hermite {
    let rows = m.rows();
    let cols = m.cols();
    let mut h = m.clone();
    let mut u = IntMatrix::identity(cols);
    let mut piv = 0;
    let mut pivot_rows = Vec::new();

    for i in 0..rows {
        if piv == cols {
            break;
        }
        for j in piv + 1..cols {
            if h[(i, j)].is_zero() {
                continue;
            }
            let a = h[(i, piv)].clone();
            let b = h[(i, j)].clone();
            if !a.is_zero() && b.is_multiple_of(&a) {
                let q = &b / &a;
                h.col_sub_mul(j, piv, &q);
                u.col_sub_mul(j, piv, &q);
                continue;
            }
            let (g, x, y) = bezout(&a, &b);
            let r = -(&b / &g);
            let s = &a / &g;
            h.col_transform(piv, j, &x, &y, &r, &s);
            u.col_transform(piv, j, &x, &y, &r, &s);
        }
        if h[(i, piv)].is_zero() {
            continue;
        }
        if h[(i, piv)].is_negative() {
            h.negate_col(piv);
            u.negate_col(piv);
        }
        let p = h[(i, piv)].clone();
        for j in 0..piv {
            let q = h[(i, j)].div_floor(&p);
            h.col_sub_mul(j, piv, &q);
            u.col_sub_mul(j, piv, &q);
        }
        pivot_rows.push(i);
        piv += 1;
    }

    Hermite { h, u, rank: piv, pivot_rows }
}

/// Smith normal form with both multipliers and the inverse of the left one.
pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let rows = m.rows();
    let cols = m.cols();
    let mut s = m.clone();
    let mut l = IntMatrix::identity(rows);
    let mut l_inv = IntMatrix::identity(rows);
    let mut r = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if s[(i, j)].is_zero() {
                    continue;
                }
                if best.map_or(true, |(bi, bj)| s[(i, j)].abs() < s[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        s.swap_rows(t, pi);
        l.swap_rows(t, pi);
        l_inv.swap_cols(t, pi);
        s.swap_cols(t, pj);
        r.swap_cols(t, pj);

        loop {
            for i in t + 1..rows {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let a = s[(t, t)].clone();
                let b = s[(i, t)].clone();
                if b.is_multiple_of(&a) {
                    let q = &b / &a;
                    s.row_sub_mul(i, t, &q);
                    l.row_sub_mul(i, t, &q);
                    // inverse of (row_i -= q row_t) is (row_i += q row_t): col_t += q col_i
                    l_inv.col_sub_mul(t, i, &-q);
                    continue;
                }
                let (g, x, y) = bezout(&a, &b);
                let bg = &b / &g;
                let ag = &a / &g;
                s.row_transform(t, i, &x, &y, &-&bg, &ag);
                l.row_transform(t, i, &x, &y, &-&bg, &ag);
                l_inv.col_transform(t, i, &ag, &bg, &-&y, &x);
            }
            for j in t + 1..cols {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let a = s[(t, t)].clone();
                let b = s[(t, j)].clone();
                if b.is_multiple_of(&a) {
                    let q = &b / &a;
                    s.col_sub_mul(j, t, &q);
                    r.col_sub_mul(j, t, &q);
                    continue;
                }
                let (g, x, y) = bezout(&a, &b);
                let rr = -(&b / &g);
                let ss = &a / &g;
                s.col_transform(t, j, &x, &y, &rr, &ss);
                r.col_transform(t, j, &x, &y, &rr, &ss);
            }
            let col_clear = (t + 1..rows).all(|i| s[(i, t)].is_zero());
            let row_clear = (t + 1..cols).all(|j| s[(t, j)].is_zero());
            if !(col_clear && row_clear) {
                continue;
            }
            let pivot = s[(t, t)].clone();
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !s[(i, j)].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    // row_t += row_i, then the column sweep picks up the gcd
                    let minus_one = -BigInt::one();
                    s.row_sub_mul(t, i, &minus_one);
                    l.row_sub_mul(t, i, &minus_one);
                    l_inv.col_sub_mul(i, t, &BigInt::one());
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            l.negate_row(t);
            l_inv.negate_col(t);
        }
    }

    Smith { s, l, r, l_inv }
}

/// Inverse of a unimodular matrix, or `None` if the matrix is not unimodular.
pub fn unimodular_inverse(m: &IntMatrix) -> Option<IntMatrix> {
    if !m.is_square() {
        return None;
    }
    let herm = hermite_normal_form(m);
    (herm.h == IntMatrix::identity(m.rows())).then_some(herm.u)
}
