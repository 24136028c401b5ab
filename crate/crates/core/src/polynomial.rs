//! Exact sparse multivariate polynomials with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{RatMatrix, RatVector};
use crate::rat::{self, Rational, RationalParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("malformed coefficient in term {term}: {source}")]
    Coefficient {
        term: usize,
        source: RationalParseError,
    },
    #[error("denominator of term {0} must be positive")]
    NonPositiveDenominator(usize),
    #[error("term {term} has {got} exponents, expected {expected}")]
    ExponentLength {
        term: usize,
        got: usize,
        expected: usize,
    },
    #[error("term {0} has a negative exponent")]
    NegativeExponent(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid polynomial JSON: {0}")]
    Json(String),
}

/// Exponent vector of a monomial; its length is the ambient variable count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|α|`, the total degree of the monomial.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Polynomial in `n` variables stored as a map from multi-index to nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl SparsePolynomial {
    pub fn zero(n: usize) -> Self {
        SparsePolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), c);
        p
    }

    /// The coordinate function `x_i` (0-based).
    pub fn variable(n: usize, i: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::unit(n, i), Rational::one());
        p
    }

    /// Affine form `c0 + Σ c_i x_i`.
    pub fn affine(c0: Rational, coeffs: &[Rational]) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c0);
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(MultiIndex::unit(n, i), c.clone());
        }
        p
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging duplicates.
    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (Rational, Vec<u32>)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(n);
        for (idx, (c, e)) in terms.into_iter().enumerate() {
            if e.len() != n {
                return Err(PolyError::ExponentLength {
                    term: idx,
                    got: e.len(),
                    expected: n,
                });
            }
            p.add_term(MultiIndex(e), c);
        }
        Ok(p)
    }

    /// Adds `c · x^α`, dropping the entry if the coefficient cancels.
    pub fn add_term(&mut self, alpha: MultiIndex, c: Rational) {
        debug_assert_eq!(alpha.len(), self.n);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Rational {
        self.terms.get(alpha).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Constant term `p(0)`.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&MultiIndex::zero(self.n))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|a| a.degree() == 0)
    }

    /// `n + deg(p) + Σ bl(p_α)`.
    pub fn encoding_length(&self) -> u64 {
        self.n as u64
            + self.degree() as u64
            + self.terms.values().map(rat::bit_length).sum::<u64>()
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational, PolyError> {
        self.check_dim(x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[Rational]) -> Rational {
        let maxdeg = self.degree() as usize;
        // powers[i][e] = x_i^e
        let powers: Vec<Vec<Rational>> = x
            .iter()
            .map(|xi| {
                let mut v = Vec::with_capacity(maxdeg + 1);
                v.push(Rational::one());
                for e in 1..=maxdeg {
                    let next = &v[e - 1] * xi;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = Rational::zero();
        for (alpha, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in alpha.0.iter().enumerate() {
                if e > 0 {
                    t *= &powers[i][e as usize];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn partial_derivative(&self, i: usize) -> Result<Self, PolyError> {
        if i >= self.n {
            return Err(PolyError::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        let mut d = Self::zero(self.n);
        for (alpha, c) in &self.terms {
            let e = alpha.0[i];
            if e == 0 {
                continue;
            }
            let mut beta = alpha.clone();
            beta.0[i] -= 1;
            d.add_term(beta, c * rat::int(e as i64));
        }
        Ok(d)
    }

    /// All first partial derivatives.
    pub fn gradient(&self) -> Vec<SparsePolynomial> {
        (0..self.n)
            .map(|i| self.partial_derivative(i).expect("index in range"))
            .collect()
    }

    /// `∇_v p = Σ v_i ∂p/∂x_i`.
    pub fn directional_derivative(&self, v: &[Rational]) -> Result<Self, PolyError> {
        self.check_dim(v.len())?;
        let mut acc = Self::zero(self.n);
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            acc = &acc + &self.partial_derivative(i)?.scale(vi);
        }
        Ok(acc)
    }

    pub fn gradient_at(&self, a: &[Rational]) -> Result<RatVector, PolyError> {
        self.check_dim(a.len())?;
        Ok(self.gradient().iter().map(|g| g.eval_unchecked(a)).collect())
    }

    pub fn hessian_at(&self, a: &[Rational]) -> Result<RatMatrix, PolyError> {
        self.check_dim(a.len())?;
        let grad = self.gradient();
        let mut h = RatMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let v = grad[i]
                    .partial_derivative(j)
                    .expect("index in range")
                    .eval_unchecked(a);
                h[(i, j)] = v.clone();
                h[(j, i)] = v;
            }
        }
        Ok(h)
    }

    /// Second partial derivatives `∂²p/∂x_i∂x_j` for `i <= j`, row-major upper triangle.
    pub fn second_partials(&self) -> Vec<Vec<SparsePolynomial>> {
        let grad = self.gradient();
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| grad[i].partial_derivative(j).expect("index in range"))
                    .collect()
            })
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        SparsePolynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(a, v)| (a.clone(), v * c))
                .collect(),
        }
    }

    /// Composition `q(y) = p(offset + Σ_j y_j · basis_j)`; the result has
    /// `basis.len()` variables.
    pub fn substitute_affine(
        &self,
        basis: &[RatVector],
        offset: &[Rational],
    ) -> Result<Self, PolyError> {
        self.check_dim(offset.len())?;
        for b in basis {
            self.check_dim(b.len())?;
        }
        let m = basis.len();
        let forms: Vec<SparsePolynomial> = (0..self.n)
            .map(|i| {
                let coeffs: Vec<Rational> = basis.iter().map(|b| b[i].clone()).collect();
                SparsePolynomial::affine(offset[i].clone(), &coeffs)
            })
            .collect();
        let maxdeg = self.degree() as usize;
        let mut powers: Vec<Vec<Option<SparsePolynomial>>> = vec![vec![None; maxdeg + 1]; self.n];
        let mut out = SparsePolynomial::zero(m);
        for (alpha, c) in &self.terms {
            let mut t = SparsePolynomial::constant(m, c.clone());
            for (i, &e) in alpha.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = power_cached(&forms[i], &mut powers[i], e as usize);
                t = &t * &pw;
                if t.is_zero() {
                    break;
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    fn check_dim(&self, got: usize) -> Result<(), PolyError> {
        if got != self.n {
            Err(PolyError::Dimension {
                expected: self.n,
                got,
            })
        } else {
            Ok(())
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = SparsePolynomial::constant(self.n, Rational::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Least common multiple of all coefficient denominators.
    pub fn denominator_lcm(&self) -> num_bigint::BigInt {
        rat::denominator_lcm(self.terms.values())
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

fn power_cached(
    base: &SparsePolynomial,
    cache: &mut [Option<SparsePolynomial>],
    e: usize,
) -> SparsePolynomial {
    if let Some(p) = &cache[e] {
        return p.clone();
    }
    let p = if e == 0 {
        SparsePolynomial::constant(base.n, Rational::one())
    } else {
        let prev = power_cached(base, cache, e - 1);
        &prev * base
    };
    cache[e] = Some(p.clone());
    p
}

impl<'a> std::ops::Add<&'a SparsePolynomial> for &'a SparsePolynomial {
    type Output = SparsePolynomial;
    fn add(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.n, rhs.n, "variable count mismatch");
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }
}

impl<'a> std::ops::Sub<&'a SparsePolynomial> for &'a SparsePolynomial {
    type Output = SparsePolynomial;
    fn sub(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.n, rhs.n, "variable count mismatch");
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), -c.clone());
        }
        out
    }
}

impl<'a> std::ops::Mul<&'a SparsePolynomial> for &'a SparsePolynomial {
    type Output = SparsePolynomial;
    fn mul(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.n, rhs.n, "variable count mismatch");
        let mut out = SparsePolynomial::zero(self.n);
        for (a, c) in &self.terms {
            for (b, d) in &rhs.terms {
                out.add_term(a.add(b), c * d);
            }
        }
        out
    }
}

impl std::ops::Neg for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn neg(self) -> SparsePolynomial {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // highest degree first reads better
        let mut entries: Vec<_> = self.terms.iter().collect();
        entries.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then(b.cmp(a)));
        for (alpha, c) in entries {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let ac = c.abs();
            let mono: Vec<String> = alpha
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", ac)?;
            } else if ac.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", ac, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// One term of the polynomial JSON format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub num: String,
    #[serde(default = "default_den")]
    pub den: String,
    pub exp: Vec<i64>,
}

fn default_den() -> String {
    "1".to_string()
}

/// `{"n": int, "terms": [{"num": "..", "den": "..", "exp": [..]}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub n: usize,
    #[serde(default)]
    pub terms: Vec<TermJson>,
}

impl PolynomialJson {
    pub fn to_polynomial(&self) -> Result<SparsePolynomial, PolyError> {
        let mut p = SparsePolynomial::zero(self.n);
        for (idx, t) in self.terms.iter().enumerate() {
            let num: num_bigint::BigInt = t.num.trim().parse().map_err(|_| PolyError::Coefficient {
                term: idx,
                source: RationalParseError::Malformed(t.num.clone()),
            })?;
            let den: num_bigint::BigInt = t.den.trim().parse().map_err(|_| PolyError::Coefficient {
                term: idx,
                source: RationalParseError::Malformed(t.den.clone()),
            })?;
            if !den.is_positive() {
                return Err(PolyError::NonPositiveDenominator(idx));
            }
            if t.exp.len() != self.n {
                return Err(PolyError::ExponentLength {
                    term: idx,
                    got: t.exp.len(),
                    expected: self.n,
                });
            }
            if t.exp.iter().any(|&e| e < 0) {
                return Err(PolyError::NegativeExponent(idx));
            }
            let exps = t.exp.iter().map(|&e| e as u32).collect();
            p.add_term(MultiIndex(exps), Rational::new(num, den));
        }
        Ok(p)
    }

    pub fn from_polynomial(p: &SparsePolynomial) -> Self {
        PolynomialJson {
            n: p.n,
            terms: p
                .terms
                .iter()
                .map(|(a, c)| TermJson {
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                    exp: a.0.iter().map(|&e| e as i64).collect(),
                })
                .collect(),
        }
    }
}

/// Parses the polynomial JSON format.
pub fn parse_polynomial(text: &str) -> Result<SparsePolynomial, PolyError> {
    let js: PolynomialJson =
        serde_json::from_str(text).map_err(|e| PolyError::Json(e.to_string()))?;
    js.to_polynomial()
}
