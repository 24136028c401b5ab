use num_traits::{One, Signed, Zero};

use super::{
    ellipsoid_feasibility, oracle_ball, oracle_polyhedron, oracle_sublevel, EllipsoidError,
    Feasibility, IntersectionOracle,
};
use crate::linalg::{self, kernel_basis, norm_lower, norm_upper, RatMatrix, RatVector};
use crate::lp::{chebyshev_inner_ball, lp_feasible_point, lp_optimize, LpStatus, Polyhedron};
use crate::polynomial::SparsePolynomial;
use crate::rat::{self, Rational};

/// `aff(P) = point + span(directions)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineHull {
    pub point: RatVector,
    /// Pairwise orthogonal primitive integer vectors.
    pub directions: Vec<RatVector>,
    /// Rows of `P` that hold with equality on all of `P`.
    pub equalities: Vec<usize>,
}

pub fn affine_hull(p: &Polyhedron) -> Result<AffineHull, EllipsoidError> {
    let feas = lp_feasible_point(p);
    if feas.status == LpStatus::Infeasible {
        return Err(EllipsoidError::EmptyPolyhedron);
    }
    let point = feas.point.expect("feasible point");
    let equalities: Vec<usize> = (0..p.m())
        .filter(|&i| {
            let out = lp_optimize(p.a.row(i), p);
            out.status == LpStatus::Optimal && out.value.as_ref() == Some(&p.b[i])
        })
        .collect();
    let rows: Vec<RatVector> = equalities.iter().map(|&i| p.a.row(i).to_vec()).collect();
    let directions = kernel_basis(&RatMatrix::from_rows(p.n(), &rows));
    Ok(AffineHull {
        point,
        directions,
        equalities,
    })
}

/// Problem restated on `x = offset + basis·x′`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedProblem {
    pub f: SparsePolynomial,
    pub p: Polyhedron,
    pub offset: RatVector,
    /// Columns are the hull directions.
    pub basis: Vec<RatVector>,
}

impl ReducedProblem {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn lift(&self, y: &[Rational]) -> RatVector {
        let mut x = self.offset.clone();
        for (c, d) in y.iter().zip(&self.basis) {
            for (xi, di) in x.iter_mut().zip(d) {
                *xi += c * di;
            }
        }
        x
    }
}

/// Rows of `(AB)x′ ≤ b − A·v₁` that vanish identically are dropped.
pub fn full_dim_reduce(
    f: &SparsePolynomial,
    p: &Polyhedron,
    hull: &AffineHull,
) -> Result<ReducedProblem, EllipsoidError> {
    let k = hull.directions.len();
    let fr = f.substitute_affine(&hull.directions, &hull.point)?;
    let av = p.a.mul_vec(&hull.point);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..p.m() {
        let row: RatVector = hull
            .directions
            .iter()
            .map(|d| linalg::dot(p.a.row(i), d))
            .collect();
        let r = &p.b[i] - &av[i];
        if linalg::is_zero_vec(&row) && !r.is_negative() {
            continue;
        }
        rows.push(row);
        rhs.push(r);
    }
    Ok(ReducedProblem {
        f: fr,
        p: Polyhedron::new(RatMatrix::from_rows(k, &rows), rhs)?,
        offset: hull.point.clone(),
        basis: hull.directions.clone(),
    })
}

/// Upper bound on `‖∇f‖` over `B_R(0)`.
pub fn lipschitz_bound(f: &SparsePolynomial, radius: &Rational) -> Rational {
    let n = f.n_vars();
    if n == 0 {
        return Rational::zero();
    }
    let rb = radius.clone().max(Rational::one());
    let per_coord = f
        .gradient()
        .iter()
        .map(|g| {
            g.terms().fold(Rational::zero(), |acc, (beta, c)| {
                acc + c.abs() * rat::rat_pow(&rb, beta.degree())
            })
        })
        .max()
        .unwrap_or_else(Rational::zero);
    sqrt_upper(n) * per_coord
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimizeDiagnostics {
    /// Dimension after the affine-hull reduction.
    pub reduced_dim: usize,
    pub working_radius: Rational,
    pub lipschitz: Rational,
    pub volume_threshold: Rational,
    pub bisection_steps: u64,
    pub ellipsoid_iterations: u64,
    /// Final `[τ_ℓ, τ_r]`: a certified lower bound and the value attained.
    pub tau_low: Rational,
    pub tau_high: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Minimized {
    pub point: RatVector,
    pub value: Rational,
    pub diagnostics: MinimizeDiagnostics,
}

/// A point of `P` whose value is within `eps` of the minimum of `f` over
/// `P ∩ B_R(0)`.
pub fn minimize_over_ball(
    f: &SparsePolynomial,
    p: &Polyhedron,
    radius: &Rational,
    eps: &Rational,
) -> Result<Minimized, EllipsoidError> {
    if !eps.is_positive() {
        return Err(EllipsoidError::NonPositiveEpsilon);
    }
    if !radius.is_positive() {
        return Err(EllipsoidError::NonPositiveRadius);
    }
    let hull = affine_hull(p)?;
    let red = full_dim_reduce(f, p, &hull)?;
    let n = red.dim();
    if n == 0 || red.f.is_constant() {
        let value = f.eval(&red.offset)?;
        return Ok(Minimized {
            point: red.offset.clone(),
            diagnostics: MinimizeDiagnostics {
                reduced_dim: n,
                working_radius: Rational::zero(),
                lipschitz: Rational::zero(),
                volume_threshold: Rational::zero(),
                bisection_steps: 0,
                ellipsoid_iterations: 0,
                tau_low: value.clone(),
                tau_high: value.clone(),
            },
            value,
        });
    }

    // |x′_i| ≤ ‖x − v₁‖/‖d_i‖, so ‖x′‖ ≤ √n·R′ for x ∈ B_R
    let inv_len = red
        .basis
        .iter()
        .map(|d| Rational::one() / norm_lower(d))
        .max()
        .expect("nonempty basis");
    let r_prime = (radius + norm_upper(&red.offset)) * inv_len;
    let sqrt_n = sqrt_upper(n);
    // outward dyadic rounding
    let rw = rat::round_up_bits(&(rat::int(2) * &sqrt_n * &r_prime + Rational::one()), 16);
    let lip = rat::round_up_bits(&lipschitz_bound(&red.f, &rw).max(Rational::one()), 16);

    let (center, rho) = chebyshev_inner_ball(&red.p, &rw)?;
    if !rho.is_positive() {
        return Err(EllipsoidError::FlatIntersection);
    }
    let cube = rat::int(2) * &rho / &sqrt_n;
    let shrink = eps / (rat::int(4) * &lip * &rw);
    let r_vol = rat::round_down_bits(&(rat::rat_pow(&(cube * shrink), n as u32) / rat::int(2)), 16);

    let box_p = red.p.intersect(&box_polyhedron(n, &rw));
    let mut best = center;
    let mut tau_r = red.f.eval(&best)?;
    let origin_bound = red.f.constant_term() - &lip * &rw;
    let mut tau_l = origin_bound.max(linearization_bound(&red.f, &box_p, &best)?);
    let half_eps = eps / rat::int(2);
    let mut steps = 0u64;
    let mut iterations = 0u64;
    let po = oracle_polyhedron(&red.p);
    let bo = oracle_ball(&rw);
    while &tau_r - &tau_l >= half_eps {
        let tau = short_midpoint(&tau_l, &tau_r);
        let so = oracle_sublevel(&red.f, &tau);
        let oracle = IntersectionOracle::new(vec![&po, &bo, &so]);
        let run = ellipsoid_feasibility(&oracle, &rw, &r_vol, n)?;
        steps += 1;
        iterations += run.iterations;
        match run.outcome {
            Feasibility::Point(y) => {
                tau_r = red.f.eval(&y)?;
                let lb = linearization_bound(&red.f, &box_p, &y)?;
                best = y;
                if lb > tau_l {
                    tau_l = lb;
                }
            }
            Feasibility::SmallVolume => tau_l = tau,
        }
    }
    let point = red.lift(&best);
    let value = f.eval(&point)?;
    Ok(Minimized {
        point,
        value,
        diagnostics: MinimizeDiagnostics {
            reduced_dim: n,
            working_radius: rw,
            lipschitz: lip,
            volume_threshold: r_vol,
            bisection_steps: steps,
            ellipsoid_iterations: iterations,
            tau_low: tau_l,
            tau_high: tau_r,
        },
    })
}

/// A dyadic within `(hi − lo)/8` of the midpoint.
fn short_midpoint(lo: &Rational, hi: &Rational) -> Rational {
    let gap = hi - lo;
    let shift = 4 - (gap.numer().bits() as i64 - gap.denom().bits() as i64);
    rat::round_to_quantum_exp(&((lo + hi) / rat::int(2)), shift)
}

fn sqrt_upper(n: usize) -> Rational {
    norm_upper(&vec![Rational::one(); n])
}

fn box_polyhedron(n: usize, r: &Rational) -> Polyhedron {
    let mut rows = Vec::with_capacity(2 * n);
    for i in 0..n {
        rows.push(linalg::unit_vec(n, i));
        rows.push(linalg::scale(&linalg::unit_vec(n, i), &-Rational::one()));
    }
    Polyhedron::new(RatMatrix::from_rows(n, &rows), vec![r.clone(); 2 * n])
        .expect("consistent sizes")
}

/// Convexity gives `f(x) ≥ f(y) + ∇f(y)ᵀ(x − y)`; minimized over a bounded
/// polyhedron this is a lower bound on `min f`.
fn linearization_bound(
    f: &SparsePolynomial,
    bounded: &Polyhedron,
    y: &[Rational],
) -> Result<Rational, EllipsoidError> {
    let g = f.gradient_at(y)?;
    let fy = f.eval(y)?;
    let out = lp_optimize(&g, bounded);
    match out.value {
        Some(v) => Ok(fy + v - linalg::dot(&g, y)),
        None => Err(EllipsoidError::EmptyPolyhedron),
    }
}
