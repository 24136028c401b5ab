//! Column-style Hermite normal form via unimodular column operations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{LinalgError, RatMatrix};
use crate::rat::Rational;

/// `A · [U | K] = [H | 0]` with `[U | K]` unimodular and `H` lower triangular.
#[derive(Debug, Clone)]
pub struct HnfResult {
    /// N×R, the columns mapping onto `H`.
    pub u_part: RatMatrix,
    /// N×(N−R), a basis of `ker(A)`.
    pub k_part: RatMatrix,
    /// M×R lower triangular (in the echelon sense) with positive pivots.
    pub h: RatMatrix,
    /// Row index of the pivot of each column of `H`, strictly increasing.
    pub pivot_rows: Vec<usize>,
}

impl HnfResult {
    pub fn rank(&self) -> usize {
        self.pivot_rows.len()
    }

    /// `[U | K]` as one N×N matrix.
    pub fn transform(&self) -> RatMatrix {
        let n = self.u_part.rows();
        let mut cols = self.u_part.col_vectors();
        cols.extend(self.k_part.col_vectors());
        RatMatrix::from_columns(n, &cols)
    }
}

struct IntGrid {
    rows: usize,
    data: Vec<Vec<BigInt>>, // column-major: data[j][i]
}

impl IntGrid {
    fn swap_cols(&mut self, a: usize, b: usize) {
        self.data.swap(a, b);
    }

    fn negate_col(&mut self, j: usize) {
        for v in self.data[j].iter_mut() {
            *v = -std::mem::take(v);
        }
    }

    /// `col_dst -= f · col_src`
    fn sub_mul_col(&mut self, dst: usize, src: usize, f: &BigInt) {
        if f.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let d = &self.data[src][i] * f;
            self.data[dst][i] -= d;
        }
    }

    /// Replaces `(col_a, col_b)` by `(s·a + t·b, −q·a + p·b)`; determinant `s·p + t·q = 1`.
    fn combine(&mut self, a: usize, b: usize, s: &BigInt, t: &BigInt, p: &BigInt, q: &BigInt) {
        for i in 0..self.rows {
            let x = self.data[a][i].clone();
            let y = self.data[b][i].clone();
            self.data[a][i] = s * &x + t * &y;
            self.data[b][i] = p * &y - q * &x;
        }
    }

    fn to_matrix(&self, cols: std::ops::Range<usize>) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.rows, cols.len());
        for (jj, j) in cols.enumerate() {
            for i in 0..self.rows {
                m[(i, jj)] = Rational::from_integer(self.data[j][i].clone());
            }
        }
        m
    }
}

/// Hermite normal form of an integer matrix under unimodular column operations.
///
/// Any shape is accepted; the columns of `k_part` always span `ker(A)`.
pub fn hnf_decompose(a: &RatMatrix) -> Result<HnfResult, LinalgError> {
    if !a.is_integer() {
        return Err(LinalgError::NonInteger);
    }
    let m = a.rows();
    let n = a.cols();
    let mut g = IntGrid {
        rows: m,
        data: (0..n)
            .map(|j| (0..m).map(|i| a[(i, j)].numer().clone()).collect())
            .collect(),
    };
    let mut v = IntGrid {
        rows: n,
        data: (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect(),
    };
    let mut pivot_rows = Vec::new();
    let mut pc = 0usize;
    for i in 0..m {
        if pc == n {
            break;
        }
        for j in pc + 1..n {
            if g.data[j][i].is_zero() {
                continue;
            }
            if g.data[pc][i].is_zero() {
                g.swap_cols(pc, j);
                v.swap_cols(pc, j);
                continue;
            }
            let x = g.data[pc][i].clone();
            let y = g.data[j][i].clone();
            let e = x.extended_gcd(&y);
            let (gd, s, t) = (e.gcd, e.x, e.y);
            let p = &x / &gd;
            let q = &y / &gd;
            g.combine(pc, j, &s, &t, &p, &q);
            v.combine(pc, j, &s, &t, &p, &q);
        }
        if g.data[pc][i].is_zero() {
            continue;
        }
        if g.data[pc][i].is_negative() {
            g.negate_col(pc);
            v.negate_col(pc);
        }
        // reduce entries left of the pivot into [0, pivot)
        let piv = g.data[pc][i].clone();
        for k in 0..pc {
            let f = g.data[k][i].div_floor(&piv);
            if !f.is_zero() {
                g.sub_mul_col(k, pc, &f);
                v.sub_mul_col(k, pc, &f);
            }
        }
        pivot_rows.push(i);
        pc += 1;
    }
    let r = pc;
    Ok(HnfResult {
        u_part: v.to_matrix(0..r),
        k_part: v.to_matrix(r..n),
        h: g.to_matrix(0..r),
        pivot_rows,
    })
}
