use num_traits::{One, Zero};

use super::{dot, hnf_decompose, is_zero_vec, norm_sq, primitive_integer_vector, RatMatrix, RatVector};
use crate::rat::{self, Rational};

/// Output of [`gram_schmidt`]: the surviving orthogonal vectors and, for each,
/// the index of the input it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramSchmidt {
    pub vectors: Vec<RatVector>,
    pub source: Vec<usize>,
}

/// Exact Gram-Schmidt without normalization. Inputs that are dependent on
/// their predecessors reduce to zero and are dropped.
pub fn gram_schmidt(vectors: &[RatVector]) -> GramSchmidt {
    let mut out: Vec<RatVector> = Vec::new();
    let mut norms: Vec<Rational> = Vec::new();
    let mut source = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let mut u = v.clone();
        for (q, qn) in out.iter().zip(&norms) {
            let c = dot(v, q) / qn;
            if c.is_zero() {
                continue;
            }
            for (ui, qi) in u.iter_mut().zip(q) {
                *ui -= &c * qi;
            }
        }
        if is_zero_vec(&u) {
            continue;
        }
        norms.push(norm_sq(&u));
        out.push(u);
        source.push(idx);
    }
    GramSchmidt {
        vectors: out,
        source,
    }
}

/// The decomposition `{v : A v ∈ span(b)} = ker(A) ⊕ span(w)` together with an
/// orthogonal basis of its orthogonal complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InverseImageSplit {
    /// Orthogonal basis of `ker(A)`, scaled to primitive integer vectors.
    pub kernel_basis: Vec<RatVector>,
    /// Zero when `A v = b` has no solution; otherwise `A w = b` and `w ⊥ ker(A)`.
    pub w: RatVector,
    /// Orthogonal basis of `(ker(A) ⊕ span(w))^⊥`, primitive integer vectors.
    pub complement_basis: Vec<RatVector>,
}

/// Clears denominators row by row of the augmented system `[A | b]`.
fn integer_rows(a: &RatMatrix, b: &[Rational]) -> (RatMatrix, RatVector) {
    let mut ai = a.clone();
    let mut bi = b.to_vec();
    for i in 0..a.rows() {
        let l = rat::denominator_lcm(a.row(i).iter().chain(std::iter::once(&b[i])));
        if l.is_one() {
            continue;
        }
        let f = Rational::from_integer(l);
        for j in 0..a.cols() {
            ai[(i, j)] = &a[(i, j)] * &f;
        }
        bi[i] = &b[i] * &f;
    }
    (ai, bi)
}

pub fn inverse_image_split(a: &RatMatrix, b: &[Rational]) -> InverseImageSplit {
    assert_eq!(a.rows(), b.len(), "dimension mismatch in inverse_image_split");
    let n = a.cols();
    let (ai, bi) = integer_rows(a, b);
    let hnf = hnf_decompose(&ai).expect("rows were cleared to integers");
    let r = hnf.rank();

    // forward substitution on the pivot rows of H
    let mut y: RatVector = Vec::with_capacity(r);
    for (j, &pr) in hnf.pivot_rows.iter().enumerate() {
        let mut s = bi[pr].clone();
        for (l, yl) in y.iter().enumerate() {
            s -= &hnf.h[(pr, l)] * yl;
        }
        y.push(s / &hnf.h[(pr, j)]);
    }
    let consistent = (0..ai.rows()).all(|i| {
        let lhs = (0..r).fold(Rational::zero(), |acc, l| acc + &hnf.h[(i, l)] * &y[l]);
        lhs == bi[i]
    });
    let w_hat = if consistent && !is_zero_vec(&bi) {
        Some(hnf.u_part.mul_vec(&y))
    } else {
        None
    };

    let kcols = hnf.k_part.col_vectors();
    let ucols = hnf.u_part.col_vectors();
    let n_k = kcols.len();
    let mut seq = kcols;
    if let Some(wh) = &w_hat {
        seq.push(wh.clone());
    }
    seq.extend(ucols);
    let gs = gram_schmidt(&seq);

    let mut kernel_basis = Vec::new();
    let mut w = vec![Rational::zero(); n];
    let mut complement_basis = Vec::new();
    for (v, &src) in gs.vectors.iter().zip(&gs.source) {
        if src < n_k {
            kernel_basis.push(primitive_integer_vector(v));
        } else if w_hat.is_some() && src == n_k {
            w = v.clone();
        } else {
            complement_basis.push(primitive_integer_vector(v));
        }
    }
    InverseImageSplit {
        kernel_basis,
        w,
        complement_basis,
    }
}

/// Orthogonal basis of `ker(A)` made of primitive integer vectors.
pub fn kernel_basis(a: &RatMatrix) -> Vec<RatVector> {
    let zero = vec![Rational::zero(); a.rows()];
    inverse_image_split(a, &zero).kernel_basis
}
