//! Structure decomposition `f(x) = f̂(Ux) − ⟨w, x⟩` and the strongly convex
//! quadratic lower bound on `f̂`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{
    self, integer_leading_minors_positive, inverse_image_split, lambda_min_lower_bound,
    leading_minors_i128, ldlt_definiteness, Definiteness, LinalgError, RatMatrix, RatVector,
};
use crate::polynomial::{MultiIndex, PolyError, SparsePolynomial};
use crate::rat::{self, Rational};

/// Grids with at most this many points are always searched exhaustively.
pub const EXHAUSTIVE_GRID_LIMIT: u128 = 1 << 20;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("decomposition residual f - fhat(Ux) + <w,x> is not identically zero")]
    ResidualNonzero,
    #[error("not convex: the Hessian is nowhere positive definite on the search grid {{0..{bound}}}^{k}")]
    NotConvexEvidence { k: usize, bound: u64 },
    #[error("no positive definite Hessian found after {tries} random grid samples")]
    DefinitePointNotFound { tries: usize },
    #[error("Hessian at the base point is not positive definite")]
    NotPositiveDefinite,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Coefficient matrix of the gradient over the joint support of the partials.
#[derive(Debug, Clone)]
pub struct GradientMatrix {
    /// Row labels; the zero multi-index is always first.
    pub support: Vec<MultiIndex>,
    /// `|S| × n`, column `i` holds the coefficients of `∂f/∂x_i`.
    pub mat: RatMatrix,
    /// Expansion of the constant polynomial 1 over `support`.
    pub one_vector: RatVector,
}

pub fn build_gradient_matrix(f: &SparsePolynomial) -> GradientMatrix {
    let n = f.n_vars();
    let grad = f.gradient();
    let mut set: BTreeSet<MultiIndex> = BTreeSet::new();
    set.insert(MultiIndex::zero(n));
    for g in &grad {
        set.extend(g.terms().map(|(a, _)| a.clone()));
    }
    // BTreeSet orders the zero index first
    let support: Vec<MultiIndex> = set.into_iter().collect();
    let mut mat = RatMatrix::zeros(support.len(), n);
    for (i, g) in grad.iter().enumerate() {
        for (r, alpha) in support.iter().enumerate() {
            mat[(r, i)] = g.coefficient(alpha);
        }
    }
    let mut one_vector = linalg::zero_vec(support.len());
    one_vector[0] = Rational::one();
    GradientMatrix {
        support,
        mat,
        one_vector,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureDecomposition {
    /// `k × n`, orthogonal rows spanning the complement of the linearity space.
    pub u: RatMatrix,
    /// Satisfies `f(x) = f̂(Ux) − ⟨w, x⟩`; zero when `f` has no linear direction.
    pub w: RatVector,
    /// Orthogonal basis of the directions along which `f` is constant.
    pub kernel_basis: Vec<RatVector>,
    /// `f̂` in `k` variables.
    pub fhat: SparsePolynomial,
    /// `Ū_i = U_i / ‖U_i‖²`.
    pub scaled_basis: Vec<RatVector>,
}

impl StructureDecomposition {
    pub fn k(&self) -> usize {
        self.u.rows()
    }

    pub fn n(&self) -> usize {
        self.u.cols()
    }

    pub fn has_linear_part(&self) -> bool {
        !linalg::is_zero_vec(&self.w)
    }

    /// `f̂(Ux) − ⟨w, x⟩` as a polynomial in `x`.
    pub fn recompose(&self) -> SparsePolynomial {
        let cols = self.u.col_vectors();
        let lifted = self
            .fhat
            .substitute_affine(&cols, &linalg::zero_vec(self.k()))
            .expect("columns of U have length k");
        let neg_w: RatVector = self.w.iter().map(|v| -v.clone()).collect();
        &lifted + &SparsePolynomial::affine(Rational::zero(), &neg_w)
    }
}

pub fn decompose(f: &SparsePolynomial) -> Result<StructureDecomposition, StructureError> {
    let n = f.n_vars();
    let gm = build_gradient_matrix(f);
    let minus_one: RatVector = gm.one_vector.iter().map(|v| -v.clone()).collect();
    let split = inverse_image_split(&gm.mat, &minus_one);
    let w_norm = linalg::norm_sq(&split.w);
    let w = if w_norm.is_zero() {
        split.w.clone()
    } else {
        linalg::scale(&split.w, &(Rational::one() / &w_norm))
    };
    let u = RatMatrix::from_rows(n, &split.complement_basis);
    let scaled_basis: Vec<RatVector> = split
        .complement_basis
        .iter()
        .map(|r| linalg::scale(r, &(Rational::one() / linalg::norm_sq(r))))
        .collect();
    let fhat = f.substitute_affine(&scaled_basis, &linalg::zero_vec(n))?;
    let d = StructureDecomposition {
        u,
        w,
        kernel_basis: split.kernel_basis,
        fhat,
        scaled_basis,
    };
    if &d.recompose() != f {
        return Err(StructureError::ResidualNonzero);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Every point of the grid in lexicographic order.
    Exhaustive,
    /// Uniform samples from the grid.
    Randomized { seed: u64, max_tries: usize },
    /// Exhaustive for grids of at most [`EXHAUSTIVE_GRID_LIMIT`] points,
    /// otherwise `64·k` random samples.
    Auto { seed: u64 },
}

impl SearchMode {
    fn resolve(self, k: usize, side: u64) -> SearchMode {
        match self {
            SearchMode::Auto { seed } => {
                let size = (side as u128 + 1).checked_pow(k as u32);
                if size.is_some_and(|s| s <= EXHAUSTIVE_GRID_LIMIT) {
                    SearchMode::Exhaustive
                } else {
                    SearchMode::Randomized {
                        seed,
                        max_tries: 64 * k,
                    }
                }
            }
            m => m,
        }
    }
}

/// Upper end `n·deg(f)` of the search grid `{0, …, n·deg(f)}ⁿ`.
pub fn grid_side(f: &SparsePolynomial) -> u64 {
    f.n_vars() as u64 * f.degree() as u64
}

type IntTerms = Vec<(BigInt, Vec<u32>)>;

/// Hessian of `lcm(denominators)·f` as integer polynomials.
struct IntegerHessian {
    n: usize,
    entries: Vec<Vec<IntTerms>>,
    small: Option<Vec<Vec<Vec<(i128, Vec<u32>)>>>>,
}

impl IntegerHessian {
    fn new(f: &SparsePolynomial) -> Self {
        let n = f.n_vars();
        let g = f.scale(&Rational::from_integer(f.denominator_lcm()));
        let sp = g.second_partials();
        let entries: Vec<Vec<IntTerms>> = sp
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| {
                        p.terms()
                            .map(|(a, c)| (c.to_integer(), a.exponents().to_vec()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let small = entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| {
                        t.iter()
                            .map(|(c, e)| c.to_i128().map(|v| (v, e.clone())))
                            .collect::<Option<Vec<_>>>()
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>();
        IntegerHessian { n, entries, small }
    }

    fn eval_small(terms: &[(i128, Vec<u32>)], x: &[u64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (c, e) in terms {
            let mut t = *c;
            for (xi, &ei) in x.iter().zip(e) {
                for _ in 0..ei {
                    t = t.checked_mul(*xi as i128)?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }

    fn eval_big(terms: &IntTerms, x: &[u64]) -> BigInt {
        let mut acc = BigInt::zero();
        for (c, e) in terms {
            let mut t = c.clone();
            for (xi, &ei) in x.iter().zip(e) {
                for _ in 0..ei {
                    t *= *xi;
                }
            }
            acc += t;
        }
        acc
    }

    fn positive_definite_at(&self, x: &[u64]) -> bool {
        let n = self.n;
        if let Some(small) = &self.small {
            let mut m = vec![vec![0i128; n]; n];
            let mut ok = true;
            'fill: for i in 0..n {
                for j in i..n {
                    match Self::eval_small(&small[i][j], x) {
                        Some(v) => {
                            m[i][j] = v;
                            m[j][i] = v;
                        }
                        None => {
                            ok = false;
                            break 'fill;
                        }
                    }
                }
            }
            if ok {
                if let Some(res) = leading_minors_i128(m) {
                    return res;
                }
            }
        }
        let mut m = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = Self::eval_big(&self.entries[i][j], x);
                m[j][i] = v.clone();
                m[i][j] = v;
            }
        }
        integer_leading_minors_positive(&m)
    }
}

/// An integer grid point where `∇²f` is positive definite, or `None`.
///
/// For convex `f`, an exhaustive miss certifies that the Hessian determinant
/// vanishes identically.
pub fn find_definite_point(f: &SparsePolynomial, mode: SearchMode) -> Option<RatVector> {
    let n = f.n_vars();
    let side = grid_side(f);
    let to_rat = |x: &[u64]| -> RatVector { x.iter().map(|&v| Rational::from_integer(v.into())).collect() };
    if n == 0 || f.degree() < 2 {
        return None;
    }
    let hess = IntegerHessian::new(f);
    let found = match mode.resolve(n, side) {
        SearchMode::Exhaustive => {
            let mut x = vec![0u64; n];
            loop {
                if hess.positive_definite_at(&x) {
                    break Some(x);
                }
                // odometer, last coordinate fastest
                let mut i = n;
                loop {
                    if i == 0 {
                        return None;
                    }
                    i -= 1;
                    if x[i] < side {
                        x[i] += 1;
                        break;
                    }
                    x[i] = 0;
                }
            }
        }
        SearchMode::Randomized { seed, max_tries } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..max_tries).find_map(|_| {
                let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=side)).collect();
                hess.positive_definite_at(&x).then_some(x)
            })
        }
        SearchMode::Auto { .. } => unreachable!("resolved above"),
    }?;
    let a = to_rat(&found);
    debug_assert_eq!(
        ldlt_definiteness(&f.hessian_at(&a).expect("dimension")).ok(),
        Some(Definiteness::PositiveDefinite)
    );
    Some(a)
}

/// `q(y) = value + ⟨grad, y − a⟩ + quad_coeff·‖y − a‖² ≤ f̂(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticLowerBound {
    pub a: RatVector,
    pub value: Rational,
    pub grad: RatVector,
    /// Strong-convexity modulus of `q`, equal to `2·quad_coeff`.
    pub mu: Rational,
    pub quad_coeff: Rational,
    /// Certified lower bound on `λ_min(∇²f̂(a))`.
    pub lambda_hat: Rational,
}

impl QuadraticLowerBound {
    pub fn eval(&self, y: &[Rational]) -> Rational {
        let d = linalg::sub(y, &self.a);
        &self.value + linalg::dot(&self.grad, &d) + &self.quad_coeff * linalg::norm_sq(&d)
    }

    /// `q(0)`.
    pub fn value_at_origin(&self) -> Rational {
        self.eval(&linalg::zero_vec(self.a.len()))
    }

    /// `∇q(0) = grad − 2·quad_coeff·a`.
    pub fn grad_at_origin(&self) -> RatVector {
        let two_c = &self.quad_coeff * rat::int(2);
        self.grad
            .iter()
            .zip(&self.a)
            .map(|(g, a)| g - &two_c * a)
            .collect()
    }
}

pub fn lower_bound_at(
    f: &SparsePolynomial,
    a: &[Rational],
) -> Result<QuadraticLowerBound, StructureError> {
    let h = f.hessian_at(a)?;
    let lambda_hat = match lambda_min_lower_bound(&h) {
        Ok(l) => l,
        Err(LinalgError::NotPositiveDefinite) => return Err(StructureError::NotPositiveDefinite),
        Err(e) => return Err(e.into()),
    };
    let d = rat::int(f.degree() as i64);
    let d2 = &d * &d;
    let quad_coeff = &lambda_hat / (rat::int(4) * &d2);
    let mu = &lambda_hat / (rat::int(2) * &d2);
    Ok(QuadraticLowerBound {
        a: a.to_vec(),
        value: f.eval(a)?,
        grad: f.gradient_at(a)?,
        mu,
        quad_coeff,
        lambda_hat,
    })
}

#[derive(Debug, Clone)]
pub struct StructureWithBound {
    pub decomposition: StructureDecomposition,
    /// `None` when `k = 0`: `f` is affine and no quadratic bound exists.
    pub bound: Option<QuadraticLowerBound>,
}

impl StructureWithBound {
    pub fn is_linear_only(&self) -> bool {
        self.bound.is_none()
    }
}

pub fn structure_with_bound(
    f: &SparsePolynomial,
    mode: SearchMode,
) -> Result<StructureWithBound, StructureError> {
    let decomposition = decompose(f)?;
    let fhat = &decomposition.fhat;
    let k = decomposition.k();
    if k == 0 {
        return Ok(StructureWithBound {
            decomposition,
            bound: None,
        });
    }
    let side = grid_side(fhat);
    let resolved = mode.resolve(k, side);
    let a = match find_definite_point(fhat, resolved) {
        Some(a) => a,
        None => {
            return Err(match resolved {
                SearchMode::Randomized { max_tries, .. } => {
                    StructureError::DefinitePointNotFound { tries: max_tries }
                }
                _ => StructureError::NotConvexEvidence { k, bound: side },
            })
        }
    };
    let bound = lower_bound_at(fhat, &a)?;
    Ok(StructureWithBound {
        decomposition,
        bound: Some(bound),
    })
}
