//! Determinants, definiteness, eigenvalue lower bounds and rational square-root brackets.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{LinalgError, RatMatrix, RatVector};
use crate::rat::{self, Rational};

pub const DEFAULT_SQRT_PRECISION: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefiniteSingular,
    Indefinite,
}

/// Exact determinant via fraction-free (Bareiss) elimination after clearing
/// row denominators.
pub fn bareiss_det(m: &RatMatrix) -> Result<Rational, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Rational::one());
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let l = rat::denominator_lcm(m.row(i));
            let f = Rational::from_integer(l.clone());
            scale *= l;
            m.row(i).iter().map(|v| (v * &f).to_integer()).collect()
        })
        .collect();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(Rational::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone() * BigInt::from(sign);
    Ok(Rational::new(det, scale))
}

/// Classifies a symmetric matrix by exact LDLᵀ with symmetric (largest
/// remaining diagonal) pivoting.
pub fn ldlt_definiteness(m: &RatMatrix) -> Result<Definiteness, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if !m.is_symmetric() {
        return Err(LinalgError::Asymmetric);
    }
    let n = m.rows();
    let mut s: Vec<Vec<Rational>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut singular = false;
    while !active.is_empty() {
        let (pos, &p) = active
            .iter()
            .enumerate()
            .max_by(|(_, &i), (_, &j)| s[i][i].cmp(&s[j][j]).then(j.cmp(&i)))
            .expect("nonempty");
        let d = s[p][p].clone();
        if d.is_negative() {
            return Ok(Definiteness::Indefinite);
        }
        if d.is_zero() {
            // remaining diagonals are <= 0; a negative one or any coupling
            // gives a negative principal minor
            let negative = active.iter().any(|&i| s[i][i].is_negative());
            let coupled = active
                .iter()
                .any(|&i| active.iter().any(|&j| i != j && !s[i][j].is_zero()));
            if negative || coupled {
                return Ok(Definiteness::Indefinite);
            }
            singular = true;
            break;
        }
        active.remove(pos);
        for &i in &active {
            if s[i][p].is_zero() {
                continue;
            }
            let f = &s[i][p] / &d;
            for &j in &active {
                let delta = &f * &s[p][j];
                s[i][j] -= delta;
            }
        }
    }
    Ok(if singular {
        Definiteness::PositiveSemidefiniteSingular
    } else {
        Definiteness::PositiveDefinite
    })
}

/// A positive rational `μ̂ ≤ λ_min(M)` for positive definite `M`:
/// `det(M) / (N·B̄)^(N−1)` with `B̄` the largest entry magnitude, since
/// `λ_max ≤ N·B̄`.
pub fn lambda_min_lower_bound(m: &RatMatrix) -> Result<Rational, LinalgError> {
    if ldlt_definiteness(m)? != Definiteness::PositiveDefinite {
        return Err(LinalgError::NotPositiveDefinite);
    }
    let n = m.rows();
    if n == 1 {
        return Ok(m[(0, 0)].clone());
    }
    let det = bareiss_det(m)?;
    let bound = rat::int(n as i64) * m.max_abs_entry();
    Ok(det / rat::rat_pow(&bound, (n - 1) as u32))
}

/// Rational bracket `lower ≤ √s ≤ upper` with `upper − lower ≤ 2^-precision`
/// (relative to `max(1, √s)`); exact for perfect squares.
pub fn sqrt_bounds(s: &Rational, precision: u32) -> Result<(Rational, Rational), LinalgError> {
    if s.is_negative() {
        return Err(LinalgError::NegativeSqrt(s.to_string()));
    }
    if s.is_zero() {
        return Ok((Rational::zero(), Rational::zero()));
    }
    // √(p/q) = √(p·q·4^k) / (q·2^k)
    let p = s.numer();
    let q = s.denom();
    let shift = precision as usize;
    let radicand: BigInt = (p * q) << (2 * shift);
    let t = radicand.sqrt();
    let den: BigInt = q << shift;
    let lower = Rational::new(t.clone(), den.clone());
    let upper = if &t * &t == radicand {
        lower.clone()
    } else {
        Rational::new(t + BigInt::one(), den)
    };
    Ok((lower, upper))
}

/// Rational upper bound on `‖v‖` at the default precision.
pub(crate) fn norm_upper(v: &[Rational]) -> Rational {
    sqrt_bounds(&super::norm_sq(v), DEFAULT_SQRT_PRECISION)
        .expect("squared norm is nonnegative")
        .1
}

/// Rational lower bound on `‖v‖` at the default precision.
pub(crate) fn norm_lower(v: &[Rational]) -> Rational {
    sqrt_bounds(&super::norm_sq(v), DEFAULT_SQRT_PRECISION)
        .expect("squared norm is nonnegative")
        .0
}

/// Rescales a nonzero rational vector to the primitive integer vector on the
/// same ray (gcd of entries 1, direction preserved).
pub(crate) fn primitive_integer_vector(v: &[Rational]) -> RatVector {
    let l = rat::denominator_lcm(v);
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Rational::from_integer(l.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter()
        .map(|x| Rational::from_integer(x / &g))
        .collect()
}

/// Sylvester test on an integer symmetric matrix: all leading principal
/// minors positive. Uses Bareiss elimination without pivoting (whose pivots
/// are exactly those minors) and exits at the first nonpositive one.
pub(crate) fn integer_leading_minors_positive(a: &[Vec<BigInt>]) -> bool {
    if let Some(small) = to_i128(a) {
        if let Some(res) = leading_minors_i128(small) {
            return res;
        }
    }
    let n = a.len();
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut prev = BigInt::one();
    for k in 0..n {
        if !m[k][k].is_positive() {
            return false;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    true
}

fn to_i128(a: &[Vec<BigInt>]) -> Option<Vec<Vec<i128>>> {
    a.iter()
        .map(|r| r.iter().map(|v| i128::try_from(v).ok()).collect())
        .collect()
}

/// `None` on overflow.
pub(crate) fn leading_minors_i128(mut m: Vec<Vec<i128>>) -> Option<bool> {
    let n = m.len();
    let mut prev: i128 = 1;
    for k in 0..n {
        if m[k][k] <= 0 {
            return Some(false);
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j]
                    .checked_mul(m[k][k])?
                    .checked_sub(m[i][k].checked_mul(m[k][j])?)?;
                m[i][j] = v / prev;
            }
        }
        prev = m[k][k];
    }
    Some(true)
}
