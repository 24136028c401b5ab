//! Unboundedness certificates and an explicit radius `R` such that some
//! minimizer of `f` over `P` has norm at most `R`.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{self, kernel_basis, norm_lower, norm_upper, sqrt_bounds, RatMatrix, RatVector};
use crate::lp::{lp_feasible_point, LpStatus, Polyhedron};
use crate::polynomial::{PolyError, SparsePolynomial};
use crate::rat::{self, Rational};
use crate::structure::{QuadraticLowerBound, StructureDecomposition, StructureWithBound};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("the polyhedron is empty")]
    EmptyPolyhedron,
    #[error("no Farkas witness A^T lambda + U^T z = w exists; f is unbounded below on P")]
    WitnessInfeasible,
    #[error("strong-convexity modulus must be positive")]
    NonPositiveMu,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `A x⁰ ≤ 0`, `U x⁰ = 0`, `⟨w, x⁰⟩ = 1`: `f` decreases by `t` along `t·x⁰`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnboundedCertificate {
    pub ray: RatVector,
}

impl UnboundedCertificate {
    pub fn verify(&self, p: &Polyhedron, d: &StructureDecomposition) -> bool {
        p.a.mul_vec(&self.ray).iter().all(|v| !v.is_positive())
            && linalg::is_zero_vec(&d.u.mul_vec(&self.ray))
            && linalg::dot(&d.w, &self.ray).is_one()
    }
}

/// `Aᵀλ + Uᵀz = w` with `λ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasWitness {
    pub lambda: RatVector,
    pub z: RatVector,
}

impl FarkasWitness {
    pub fn verify(&self, p: &Polyhedron, d: &StructureDecomposition) -> bool {
        let lhs = linalg::add(
            &p.a.transpose().mul_vec(&self.lambda),
            &d.u.transpose().mul_vec(&self.z),
        );
        self.lambda.iter().all(|v| !v.is_negative()) && lhs == d.w
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusBound {
    /// Bound on `‖U x*‖`.
    pub b_u: Rational,
    /// Bound on `|⟨w, x*⟩|`.
    pub b_w: Rational,
    /// Bound on the norm of the projection of `x*` onto `span(U) ⊕ span(w)`.
    pub b_uw: Rational,
    /// Some minimizer lies in the ball of radius `r`.
    pub r: Rational,
}

fn stack_rows(n: usize, parts: &[&[RatVector]]) -> RatMatrix {
    let rows: Vec<RatVector> = parts.iter().flat_map(|p| p.iter().cloned()).collect();
    RatMatrix::from_rows(n, &rows)
}

fn neg(v: &[Rational]) -> RatVector {
    v.iter().map(|x| -x.clone()).collect()
}

pub fn unboundedness_ray(
    p: &Polyhedron,
    d: &StructureDecomposition,
) -> Option<UnboundedCertificate> {
    if !d.has_linear_part() {
        return None;
    }
    let n = p.n();
    let u_rows = d.u.row_vectors();
    let u_neg: Vec<RatVector> = u_rows.iter().map(|r| neg(r)).collect();
    let w_rows = [d.w.clone(), neg(&d.w)];
    let a = stack_rows(n, &[&p.a.row_vectors(), &u_rows, &u_neg, &w_rows]);
    let mut b = linalg::zero_vec(p.m() + 2 * u_rows.len());
    b.push(Rational::one());
    b.push(-Rational::one());
    let sys = Polyhedron::new(a, b).expect("consistent sizes");
    let out = lp_feasible_point(&sys);
    let cert = UnboundedCertificate { ray: out.point? };
    assert!(cert.verify(p, d), "LP returned a ray violating the certificate conditions");
    Some(cert)
}

pub fn farkas_witness(p: &Polyhedron, d: &StructureDecomposition) -> Result<FarkasWitness, BoundsError> {
    let (n, m, k) = (p.n(), p.m(), d.k());
    if !d.has_linear_part() {
        return Ok(FarkasWitness {
            lambda: linalg::zero_vec(m),
            z: linalg::zero_vec(k),
        });
    }
    // unknowns (λ, z); the n equalities become paired inequalities
    let at = p.a.transpose();
    let ut = d.u.transpose();
    let mut rows = Vec::with_capacity(2 * n + m);
    let mut rhs = Vec::with_capacity(2 * n + m);
    for i in 0..n {
        let mut r = at.row(i).to_vec();
        r.extend(ut.row(i).iter().cloned());
        rows.push(neg(&r));
        rows.push(r);
        rhs.push(-d.w[i].clone());
        rhs.push(d.w[i].clone());
    }
    for j in 0..m {
        let mut r = linalg::zero_vec(m + k);
        r[j] = -Rational::one();
        rows.push(r);
        rhs.push(Rational::zero());
    }
    let sys = Polyhedron::new(RatMatrix::from_rows(m + k, &rows), rhs).expect("consistent sizes");
    let out = lp_feasible_point(&sys);
    let mut sol = out.point.ok_or(BoundsError::WitnessInfeasible)?;
    let z = sol.split_off(m);
    let wit = FarkasWitness { lambda: sol, z };
    debug_assert!(wit.verify(p, d));
    Ok(wit)
}

fn recip_norm_upper(v: &[Rational]) -> Rational {
    Rational::one() / norm_lower(v)
}

/// Bounds on `‖Ux*‖`, `|⟨w,x*⟩|` and `‖x*_{U⊕W}‖` for every minimizer `x*`.
/// The returned `r` field equals `b_uw`; [`lifting_norm_bound`] supplies the
/// full-space radius.
pub fn subspace_norm_bound(
    f: &SparsePolynomial,
    bound: Option<&QuadraticLowerBound>,
    d: &StructureDecomposition,
    witness: &FarkasWitness,
    p: &Polyhedron,
    a_feas: &[Rational],
) -> Result<RadiusBound, BoundsError> {
    let big_f = f.eval(a_feas)?;
    let z_ub = norm_upper(&witness.z);
    let lb_ub = norm_upper(&witness.lambda) * norm_upper(&p.b);
    let (b_u, b_w) = match bound {
        None => {
            // k = 0: f = c0 − ⟨w,x⟩
            let c0 = d.fhat.constant_term();
            let b_w = lb_ub.clone().max(&big_f - &c0);
            (Rational::zero(), b_w)
        }
        Some(q) => {
            if !q.mu.is_positive() {
                return Err(BoundsError::NonPositiveMu);
            }
            let g = norm_upper(&q.grad_at_origin());
            let q0 = q.value_at_origin();
            let gz = &g + &z_ub;
            let slack = (&big_f + &lb_ub - &q0).max(Rational::zero());
            let disc = &gz * &gz + rat::int(2) * &q.mu * slack;
            let root = sqrt_bounds(&disc, linalg::DEFAULT_SQRT_PRECISION)
                .expect("nonnegative discriminant")
                .1;
            let b_u = (&gz + root) / &q.mu;
            let q_min_lower = &q0 - &g * &g / (rat::int(2) * &q.mu);
            let b_w = (&lb_ub + &z_ub * &b_u).max(&big_f - q_min_lower);
            (b_u, b_w)
        }
    };
    let b_w = b_w.max(Rational::zero());
    let mut b_uw = Rational::zero();
    if d.k() > 0 {
        let sqrt_k = norm_upper(&vec![Rational::one(); d.k()]);
        let inv = d
            .u
            .row_vectors()
            .iter()
            .map(|r| recip_norm_upper(r))
            .max()
            .expect("k > 0");
        b_uw += sqrt_k * &b_u * inv;
    }
    if d.has_linear_part() {
        b_uw += &b_w * recip_norm_upper(&d.w);
    }
    Ok(RadiusBound {
        b_u,
        b_w,
        r: b_uw.clone(),
        b_uw,
    })
}

/// A radius `R` such that some minimizer has norm at most `R`, given that the
/// `U ⊕ W` component of every minimizer has norm at most `b_uw`.
pub fn lifting_norm_bound(p: &Polyhedron, d: &StructureDecomposition, b_uw: &Rational) -> Rational {
    let n = p.n();
    if n == 0 {
        return Rational::one();
    }
    let mut cand: Vec<RatVector> = p.a.row_vectors();
    cand.extend(d.u.row_vectors());
    if d.has_linear_part() {
        cand.push(d.w.clone());
    }
    let stacked = RatMatrix::from_rows(n, &cand);
    cand.extend(kernel_basis(&stacked));
    cand.retain(|r| !linalg::is_zero_vec(r));

    let mut h = Rational::one();
    let mut max_norm = Rational::zero();
    for r in &cand {
        let dr = Rational::from_integer(rat::denominator_lcm(r));
        let nr = norm_upper(r);
        h = h.max((&dr * &nr).max(dr));
        max_norm = max_norm.max(nr);
    }
    let sqrt_n = norm_upper(&vec![Rational::one(); n]);
    let scale = sqrt_n * rat::int(n as i64) * rat::rat_pow(&h, n as u32);
    let r = scale * (norm_upper(&p.b) + b_uw * max_norm + Rational::one());
    r.max(Rational::one())
}

/// Full radius chain for a bounded-below instance.
pub fn radius_r(
    f: &SparsePolynomial,
    p: &Polyhedron,
    s: &StructureWithBound,
) -> Result<RadiusBound, BoundsError> {
    let feas = lp_feasible_point(p);
    if feas.status == LpStatus::Infeasible {
        return Err(BoundsError::EmptyPolyhedron);
    }
    let a_feas = feas.point.expect("feasible point");
    let d = &s.decomposition;
    let witness = farkas_witness(p, d)?;
    let mut rb = subspace_norm_bound(f, s.bound.as_ref(), d, &witness, p, &a_feas)?;
    rb.r = lifting_norm_bound(p, d, &rb.b_uw);
    Ok(rb)
}
